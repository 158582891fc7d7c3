"""Poisson brackets of spectral functionals through their gradient fields.

The two operators are J = m D + D m, acting as J f = 2 m f' + m' f, and
K = (D - D^3) / 2.  Every gradient field handled here is a combination of
products of two solutions at one spectral point, so all derivatives up to the
third close through the differential equation itself; nothing is
differentiated numerically.

Bracket integrals run over one period on the trajectory grid.  Delta atoms in
the coefficient put the integrands outside this implementation's domain
(products of distributions), so brackets reject coefficients with atoms.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .floquet import auxiliary_spectrum
from .quadrature import grid_integral
from .shooting import DEFAULT_STEPS


class BracketDomainError(ValueError):
    """Bracket requested outside the smooth-coefficient domain."""


@dataclass(frozen=True)
class ProductField:
    """phi(x) built from solutions at lam, with ODE-closed derivative grids."""

    lam: float
    xs: np.ndarray
    segments: tuple
    values: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray

    @classmethod
    def from_trajectories(cls, m, ta, tb):
        """Field w = psi_a psi_b for two trajectories on one grid.

        With c = 1/4 - lam m_s the closures are
        w'' = 2 c w + 2 psi_a' psi_b' and w''' = 4 c w' - 2 lam m_s' w.
        """
        if ta.lam != tb.lam or ta.xs.shape != tb.xs.shape:
            raise ValueError("trajectories live on different grids or spectral points")
        lam = ta.lam
        xs = ta.xs
        w = ta.psi * tb.psi
        d1 = ta.dpsi * tb.psi + ta.psi * tb.dpsi
        c = 0.25 - lam * np.asarray(m.smooth_value(xs), dtype=float)
        d2 = 2.0 * c * w + 2.0 * ta.dpsi * tb.dpsi
        d3 = 4.0 * c * d1 - 2.0 * lam * np.asarray(m.smooth_derivative(xs), dtype=float) * w
        return cls(lam=lam, xs=xs, segments=ta.segments, values=w, d1=d1, d2=d2, d3=d3)

    def scaled(self, a):
        return replace(self, values=a * self.values, d1=a * self.d1,
                       d2=a * self.d2, d3=a * self.d3)

    def plus(self, other, coeff=1.0):
        if other.xs.shape != self.xs.shape or other.lam != self.lam:
            raise ValueError("fields live on different grids or spectral points")
        return replace(self, values=self.values + coeff * other.values,
                       d1=self.d1 + coeff * other.d1,
                       d2=self.d2 + coeff * other.d2,
                       d3=self.d3 + coeff * other.d3)

    def value_at(self, x):
        idx = np.nonzero(self.xs == x)[0]
        if idx.size == 0:
            raise ValueError(f"x={x} is not a stored grid point")
        return float(self.values[idx[0]])


def _reject_atoms(m, what):
    if m.has_atoms:
        raise BracketDomainError(
            f"{what} needs a smooth coefficient; delta atoms make the integrand "
            "a product of distributions")


def apply_j(m, field):
    """(m D + D m) f = 2 m f' + m' f on the field's grid."""
    _reject_atoms(m, "J")
    ms = np.asarray(m.smooth_value(field.xs), dtype=float)
    dms = np.asarray(m.smooth_derivative(field.xs), dtype=float)
    return 2.0 * ms * field.d1 + dms * field.values


def apply_k(field):
    """(D - D^3) f / 2 on the field's grid."""
    return 0.5 * (field.d1 - field.d3)


def lemma_residual(m, field):
    """max |lam J f - K f| and max |K f| for a solution-product field.

    The identity lam J w = K w holds exactly for products of solutions at lam,
    so the first number is a pure roundoff measure of the closure grids.
    """
    _reject_atoms(m, "the commutation identity")
    k = apply_k(field)
    res = field.lam * apply_j(m, field) - k
    return float(np.max(np.abs(res))), float(np.max(np.abs(k)))


def closure_residual(field):
    """Consistency of the closed derivative grids against finite differences.

    Central differences of values against d1 and of d1 against d2, segment by
    segment; returns the worst relative deviation.  An O(h^2) check, useful as
    a property test rather than a precision statement.
    """
    worst = 0.0
    for start, stop in field.segments:
        xs = field.xs[start: stop + 1]
        h = (xs[-1] - xs[0]) / (len(xs) - 1)
        for vals, deriv in ((field.values, field.d1), (field.d1, field.d2)):
            v = vals[start: stop + 1]
            d = deriv[start: stop + 1]
            fd = (v[2:] - v[:-2]) / (2.0 * h)
            scale = max(1.0, float(np.max(np.abs(d))))
            worst = max(worst, float(np.max(np.abs(fd - d[1:-1]))) / scale)
    return worst


def bracket1(m, fa, fb):
    """First bracket: integral of fa J fb over one period.

    Written in the antisymmetric form integral m (fa fb' - fa' fb); the
    boundary term [m fa fb] vanishes because every gradient field here
    carries a factor y2, which is zero at both period ends.
    """
    _reject_atoms(m, "the first bracket")
    if fa.xs.shape != fb.xs.shape:
        raise ValueError("fields live on different grids")
    ms = np.asarray(m.smooth_value(fa.xs), dtype=float)
    integrand = ms * (fa.values * fb.d1 - fa.d1 * fb.values)
    return grid_integral(fa.xs, integrand, fa.segments)


def bracket2(fa, fb):
    """Second bracket: integral of fa K fb over one period."""
    if fa.xs.shape != fb.xs.shape:
        raise ValueError("fields live on different grids")
    integrand = fa.values * (0.5 * (fb.d1 - fb.d3))
    return grid_integral(fa.xs, integrand, fa.segments)


def log_multiplier_matrix(m, bundles):
    """Matrix of first-bracket pairings {mu_i, log|rho_j|}.

    The expected value is -mu_i^2 on the diagonal and zero off it.
    """
    n = len(bundles)
    out = np.empty((n, n))
    for i, bi in enumerate(bundles):
        for j, bj in enumerate(bundles):
            out[i, j] = bracket1(m, bi.grad_mu, bj.grad_log_rho)
    return out


def conjugacy_matrix(m, bundles=None, count=3, steps=DEFAULT_STEPS, which="first"):
    """Full 2N x 2N pairing matrix of (mu_1..N, F_1..N).

    which = "first" pairs mu with f = -log|rho| / mu^2 under the first
    bracket; which = "second" pairs mu with g = -log|rho| / mu^3 under the
    second.  Canonical conjugacy means the result is [[0, I], [-I, 0]].
    """
    from .variations import gradient_bundle  # deferred: variations imports this module

    if which not in ("first", "second"):
        raise ValueError("which must be 'first' or 'second'")
    if bundles is None:
        points = auxiliary_spectrum(m, count=count, steps=steps)
        bundles = [gradient_bundle(m, pt, steps=steps) for pt in points]
    fields = [b.grad_mu for b in bundles]
    fields += [b.grad_f if which == "first" else b.grad_g for b in bundles]
    n2 = len(fields)
    out = np.empty((n2, n2))
    for i, fi in enumerate(fields):
        for j, fj in enumerate(fields):
            if which == "first":
                out[i, j] = bracket1(m, fi, fj)
            else:
                out[i, j] = bracket2(fi, fj)
    return out


def conjugacy_target(n):
    """The canonical block matrix [[0, I], [-I, 0]] of size 2n."""
    out = np.zeros((2 * n, 2 * n))
    out[:n, n:] = np.eye(n)
    out[n:, :n] = -np.eye(n)
    return out
