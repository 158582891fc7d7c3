"""Shooting integration of psi'' = psi/4 - lambda m psi across one or two periods.

Smooth stretches use fixed-step classical RK4; stretches where the smooth part
vanishes identically use the exact constant-coefficient propagator; delta atoms
act through the jump psi' -> psi' - lambda p psi(q).  Trajectories are stored
segment by segment with atom positions duplicated (pre/post derivative).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

DEFAULT_STEPS = 4096
BLOWUP_GUARD = 1e300


class BlowUpError(RuntimeError):
    """Trajectory magnitude exceeded the overflow guard."""


@dataclass(frozen=True)
class ShootingState:
    """Cauchy data (psi, psi') at position x for spectral parameter lam."""

    x: float
    psi: float
    dpsi: float
    lam: float


@dataclass(frozen=True)
class FundamentalMatrix:
    """Transfer matrix U(x, lam) = [[y1, y2], [dy1, dy2]] with unit det."""

    x: float
    lam: float
    y1: float
    y2: float
    dy1: float
    dy2: float

    @property
    def det(self):
        return self.y1 * self.dy2 - self.dy1 * self.y2

    @property
    def trace(self):
        return self.y1 + self.dy2


@dataclass(frozen=True)
class SolutionTrajectory:
    """Dense (psi, psi') samples along segment grids over [0, periods].

    xs contains each atom position twice (pre- and post-jump row); segments
    lists inclusive index ranges (start, stop) of the uniform pieces.
    """

    lam: float
    xs: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    segments: tuple[tuple[int, int], ...]
    periods: int
    steps: int
    period_stride: int
    segments_per_period: int

    def first_period(self):
        """View restricted to [0, 1]."""
        if self.periods == 1:
            return self
        stop = self.period_stride
        return SolutionTrajectory(
            lam=self.lam, xs=self.xs[:stop], psi=self.psi[:stop], dpsi=self.dpsi[:stop],
            segments=self.segments[: self.segments_per_period], periods=1,
            steps=self.steps, period_stride=stop,
            segments_per_period=self.segments_per_period)

    def combine(self, other, coeff):
        """Trajectory of self + coeff * other (same lam, same grid)."""
        if other.lam != self.lam or other.xs.shape != self.xs.shape:
            raise ValueError("trajectories live on different grids or spectral points")
        return SolutionTrajectory(
            lam=self.lam, xs=self.xs,
            psi=self.psi + coeff * other.psi, dpsi=self.dpsi + coeff * other.dpsi,
            segments=self.segments, periods=self.periods, steps=self.steps,
            period_stride=self.period_stride,
            segments_per_period=self.segments_per_period)

    def value_at(self, x):
        """psi at a stored grid position (exact match required)."""
        idx = np.nonzero(self.xs == x)[0]
        if idx.size == 0:
            raise ValueError(f"x={x} is not a stored grid point")
        return float(self.psi[idx[0]])


def _segment_breaks(m, x0, x1):
    """Atom crossing positions in [x0, x1), ordered."""
    breaks = []
    for atom in m.atoms:
        k = math.ceil(x0 - atom.q)
        pos = atom.q + k
        while pos < x1 - 1e-14:
            if pos >= x0 - 1e-14:
                breaks.append((max(pos, x0), atom.p))
            pos += 1.0
    breaks.sort(key=lambda t: t[0])
    return breaks


def _segment_steps(steps, length):
    # even count so Simpson applies segment-wise
    n = max(2, int(math.ceil(steps * length)))
    return n + (n % 2)


def _check_guard(psi, dpsi):
    bad = (np.any(np.abs(psi) > BLOWUP_GUARD) or np.any(np.abs(dpsi) > BLOWUP_GUARD)
           or not (np.all(np.isfinite(psi)) and np.all(np.isfinite(dpsi))))
    if bad:
        raise BlowUpError("trajectory exceeded the overflow guard 1e300")


# ---------------------------------------------------------------------------
# RK4 cores.  The scalar pair core advances (y1, y2) columns together; the
# batched core advances one column for an array of lambdas (and optionally an
# array-valued coefficient, used by the finite-difference oracle).

def _smooth_substeps(m, a, h, nsteps):
    xs = a + 0.5 * h * np.arange(2 * nsteps + 1)
    return m.smooth_value(xs)

def _rk4_pair_dense(mvals, lam, h, p1, d1, p2, d2, out):
    """Advance two states over len(out[0])-1 steps, storing every step point."""
    xp1, xd1, xp2, xd2 = out
    xp1[0], xd1[0], xp2[0], xd2[0] = p1, d1, p2, d2
    six = h / 6.0
    half = 0.5 * h
    mv = mvals.tolist()
    for i in range(len(xp1) - 1):
        ca = 0.25 - lam * mv[2 * i]
        cb = 0.25 - lam * mv[2 * i + 1]
        cc = 0.25 - lam * mv[2 * i + 2]
        # column 1
        k1p = d1;            k1d = ca * p1
        k2p = d1 + half * k1d; k2d = cb * (p1 + half * k1p)
        k3p = d1 + half * k2d; k3d = cb * (p1 + half * k2p)
        k4p = d1 + h * k3d;    k4d = cc * (p1 + h * k3p)
        p1 = p1 + six * (k1p + 2.0 * (k2p + k3p) + k4p)
        d1 = d1 + six * (k1d + 2.0 * (k2d + k3d) + k4d)
        # column 2
        k1p = d2;            k1d = ca * p2
        k2p = d2 + half * k1d; k2d = cb * (p2 + half * k1p)
        k3p = d2 + half * k2d; k3d = cb * (p2 + half * k2p)
        k4p = d2 + h * k3d;    k4d = cc * (p2 + h * k3p)
        p2 = p2 + six * (k1p + 2.0 * (k2p + k3p) + k4p)
        d2 = d2 + six * (k1d + 2.0 * (k2d + k3d) + k4d)
        xp1[i + 1], xd1[i + 1], xp2[i + 1], xd2[i + 1] = p1, d1, p2, d2
    return p1, d1, p2, d2


def _rk4_batch_endpoint(msub, lam, h, nsteps, psi, dpsi):
    """Advance array states; msub[j] is m at a + j*h/2 (scalar or batch-shaped)."""
    six = h / 6.0
    half = 0.5 * h
    for i in range(nsteps):
        ca = 0.25 - lam * msub[2 * i]
        cb = 0.25 - lam * msub[2 * i + 1]
        cc = 0.25 - lam * msub[2 * i + 2]
        k1p = dpsi;              k1d = ca * psi
        k2p = dpsi + half * k1d; k2d = cb * (psi + half * k1p)
        k3p = dpsi + half * k2d; k3d = cb * (psi + half * k2p)
        k4p = dpsi + h * k3d;    k4d = cc * (psi + h * k3p)
        psi = psi + six * (k1p + 2.0 * (k2p + k3p) + k4p)
        dpsi = dpsi + six * (k1d + 2.0 * (k2d + k3d) + k4d)
    return psi, dpsi


def _exact_step(psi, dpsi, d):
    """Exact propagator over a zero-coefficient stretch: psi'' = psi/4."""
    ch = np.cosh(0.5 * d)
    sh = np.sinh(0.5 * d)
    return ch * psi + 2.0 * sh * dpsi, 0.5 * sh * psi + ch * dpsi


# ---------------------------------------------------------------------------
# public operations

def delta_jump(state, p):
    """Cross an atom of weight p: psi continuous, psi' -> psi' - lam p psi."""
    return ShootingState(x=state.x, psi=state.psi,
                         dpsi=state.dpsi - state.lam * p * state.psi,
                         lam=state.lam)


def propagate(m, lam, state, x1, steps=DEFAULT_STEPS):
    """Advance Cauchy data from state.x to x1 (endpoint only).

    steps counts RK4 steps per unit length; stretches with an identically zero
    smooth part use the exact propagator instead.
    """
    if x1 < state.x:
        raise ValueError("backward propagation is not supported")
    psi, dpsi = state.psi, state.dpsi
    pos = state.x
    exact = m.smooth_is_zero
    for break_x, weight in _segment_breaks(m, state.x, x1):
        if break_x > pos:
            psi, dpsi = _advance(m, lam, psi, dpsi, pos, break_x, steps, exact)
            pos = break_x
        dpsi = dpsi - lam * weight * psi
    if x1 > pos:
        psi, dpsi = _advance(m, lam, psi, dpsi, pos, x1, steps, exact)
    _check_guard(psi, dpsi)
    return ShootingState(x=x1, psi=psi, dpsi=dpsi, lam=lam)


def _advance(m, lam, psi, dpsi, a, b, steps, exact):
    if exact:
        return _exact_step(psi, dpsi, b - a)
    nsteps = _segment_steps(steps, b - a)
    h = (b - a) / nsteps
    msub = _smooth_substeps(m, a, h, nsteps)
    p, d = _rk4_batch_endpoint(msub.tolist(), lam, h, nsteps, psi, dpsi)
    return p, d


def solve_fundamental(m, lam, steps=DEFAULT_STEPS, periods=1):
    """Dense fundamental pair y1 (1,0) and y2 (0,1) over [0, periods].

    Returns two SolutionTrajectory objects sharing one grid: a uniform grid per
    segment between atoms, atom positions stored twice (pre/post jump).
    """
    if periods not in (1, 2):
        raise ValueError("periods must be 1 or 2")
    breaks = _segment_breaks(m, 0.0, float(periods))
    # build segment edges over the full range
    edges = [0.0]
    weights_at = {}
    for pos, w in breaks:
        if pos == 0.0:
            weights_at[0.0] = w
            continue
        edges.append(pos)
        weights_at[pos] = w
    edges.append(float(periods))
    if periods == 2 and 1.0 not in edges:
        edges.append(1.0)
        edges.sort()

    exact = m.smooth_is_zero
    xs_parts, p1_parts, d1_parts, p2_parts, d2_parts = [], [], [], [], []
    segments = []
    idx = 0
    p1, d1, p2, d2 = 1.0, 0.0, 0.0, 1.0
    if 0.0 in weights_at:
        d1 -= lam * weights_at[0.0] * p1
        d2 -= lam * weights_at[0.0] * p2
    for a, b in zip(edges, edges[1:]):
        nsteps = _segment_steps(steps, b - a)
        grid = a + (b - a) * np.arange(nsteps + 1) / nsteps
        if exact:
            ch = np.cosh(0.5 * (grid - a))
            sh = np.sinh(0.5 * (grid - a))
            sp1 = ch * p1 + 2.0 * sh * d1
            sd1 = 0.5 * sh * p1 + ch * d1
            sp2 = ch * p2 + 2.0 * sh * d2
            sd2 = 0.5 * sh * p2 + ch * d2
            p1, d1, p2, d2 = sp1[-1], sd1[-1], sp2[-1], sd2[-1]
        else:
            h = (b - a) / nsteps
            mvals = _smooth_substeps(m, a, h, nsteps)
            sp1 = np.empty(nsteps + 1); sd1 = np.empty(nsteps + 1)
            sp2 = np.empty(nsteps + 1); sd2 = np.empty(nsteps + 1)
            p1, d1, p2, d2 = _rk4_pair_dense(mvals, lam, h, p1, d1, p2, d2,
                                             (sp1, sd1, sp2, sd2))
        xs_parts.append(grid)
        p1_parts.append(sp1); d1_parts.append(sd1)
        p2_parts.append(sp2); d2_parts.append(sd2)
        segments.append((idx, idx + nsteps))
        idx += nsteps + 1
        if b in weights_at:
            d1 -= lam * weights_at[b] * p1
            d2 -= lam * weights_at[b] * p2

    xs = np.concatenate(xs_parts)
    arr_p1 = np.concatenate(p1_parts); arr_d1 = np.concatenate(d1_parts)
    arr_p2 = np.concatenate(p2_parts); arr_d2 = np.concatenate(d2_parts)
    # post-jump rows at interior atom positions: overwrite the duplicated start
    # of each following segment (concatenation already duplicates edge points,
    # and the jump was applied between segments, so values are consistent).
    _check_guard(arr_p1, arr_d1)
    _check_guard(arr_p2, arr_d2)

    n_segs = len(segments)
    segs_per_period = n_segs // periods
    stride = segments[segs_per_period - 1][1] + 1 if periods == 2 else len(xs)
    common = dict(xs=xs, segments=tuple(segments), periods=periods, steps=steps,
                  period_stride=stride, segments_per_period=segs_per_period)
    t1 = SolutionTrajectory(lam=lam, psi=arr_p1, dpsi=arr_d1, **common)
    t2 = SolutionTrajectory(lam=lam, psi=arr_p2, dpsi=arr_d2, **common)
    return t1, t2


def fundamental_matrix(m, lam, x=1.0, steps=DEFAULT_STEPS):
    """Transfer matrix U(x, lam) from the identity at 0."""
    if not 0.0 <= x <= 2.0:
        raise ValueError("fundamental matrix is tracked over [0, 2] only")
    if x == 0.0:
        return FundamentalMatrix(x=0.0, lam=lam, y1=1.0, y2=0.0, dy1=0.0, dy2=1.0)
    c1 = propagate(m, lam, ShootingState(0.0, 1.0, 0.0, lam), x, steps)
    c2 = propagate(m, lam, ShootingState(0.0, 0.0, 1.0, lam), x, steps)
    return FundamentalMatrix(x=x, lam=lam, y1=c1.psi, y2=c2.psi,
                             dy1=c1.dpsi, dy2=c2.dpsi)


def wronskian(state_a, state_b):
    """psi_a psi_b' - psi_a' psi_b at matching position and spectral point."""
    if state_a.x != state_b.x:
        raise ValueError(f"states at different positions: {state_a.x} vs {state_b.x}")
    if state_a.lam != state_b.lam:
        raise ValueError(f"states at different spectral points: {state_a.lam} vs {state_b.lam}")
    return state_a.psi * state_b.dpsi - state_a.dpsi * state_b.psi


def trajectory_wronskian(ta, tb):
    """Pointwise Wronskian grid of two trajectories on one grid."""
    if ta.lam != tb.lam or ta.xs.shape != tb.xs.shape:
        raise ValueError("trajectories live on different grids or spectral points")
    return ta.psi * tb.dpsi - ta.dpsi * tb.psi


# ---------------------------------------------------------------------------
# batched endpoint maps over arrays of lambda (scan workhorse)

def endpoint_column(m, lams, column=(0.0, 1.0), steps=DEFAULT_STEPS, x1=1.0):
    """Endpoint (psi, psi') at x1 for an array of spectral points.

    column is the shared Cauchy data at 0; the smooth part is evaluated once
    per substep and shared across the batch.
    """
    lams = np.asarray(lams, dtype=float)
    psi = np.full(lams.shape, float(column[0]))
    dpsi = np.full(lams.shape, float(column[1]))
    pos = 0.0
    exact = m.smooth_is_zero
    for break_x, weight in _segment_breaks(m, 0.0, x1):
        if break_x > pos:
            psi, dpsi = _advance_batch(m, lams, psi, dpsi, pos, break_x, steps, exact)
            pos = break_x
        dpsi = dpsi - lams * weight * psi
    if x1 > pos:
        psi, dpsi = _advance_batch(m, lams, psi, dpsi, pos, x1, steps, exact)
    _check_guard(psi, dpsi)
    return psi, dpsi


def _advance_batch(m, lams, psi, dpsi, a, b, steps, exact):
    if exact:
        return _exact_step(psi, dpsi, b - a)
    nsteps = _segment_steps(steps, b - a)
    h = (b - a) / nsteps
    msub = _smooth_substeps(m, a, h, nsteps)
    return _rk4_batch_endpoint(msub, lams, h, nsteps, psi, dpsi)


def endpoint_column_variants(msub_fn, atoms, lams, column, steps, x0=0.0, x1=1.0):
    """Endpoint map where the coefficient varies across the batch.

    msub_fn(x) must return the smooth-part values at x as an array matching
    lams (the finite-difference oracle passes one hat-perturbed variant per
    batch member).  atoms is shared across variants.
    """
    lams = np.asarray(lams, dtype=float)
    psi = np.full(lams.shape, float(column[0]))
    dpsi = np.full(lams.shape, float(column[1]))
    pos = x0
    breaks = sorted((a.q + k, a.p) for a in atoms
                    for k in range(math.ceil(x0 - a.q), math.ceil(x1 - a.q))
                    if x0 - 1e-14 <= a.q + k < x1 - 1e-14)
    for break_x, weight in breaks:
        if break_x > pos:
            psi, dpsi = _advance_variants(msub_fn, lams, psi, dpsi, pos, break_x, steps)
            pos = break_x
        dpsi = dpsi - lams * weight * psi
    if x1 > pos:
        psi, dpsi = _advance_variants(msub_fn, lams, psi, dpsi, pos, x1, steps)
    _check_guard(psi, dpsi)
    return psi, dpsi


def _advance_variants(msub_fn, lams, psi, dpsi, a, b, steps):
    nsteps = _segment_steps(steps, b - a)
    h = (b - a) / nsteps
    msub = [msub_fn(a + 0.5 * h * j) for j in range(2 * nsteps + 1)]
    return _rk4_batch_endpoint(msub, lams, h, nsteps, psi, dpsi)
