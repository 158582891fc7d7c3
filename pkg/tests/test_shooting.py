"""Transfer matrices and trajectories against constant-coefficient closed forms."""

import math

import numpy as np
import pytest

from chspectral.coefficient import make_coefficient
from chspectral.shooting import (
    BlowUpError,
    ShootingState,
    delta_jump,
    endpoint_column,
    fundamental_matrix,
    propagate,
    solve_fundamental,
    trajectory_wronskian,
    wronskian,
)


def const_m(c):
    return make_coefficient({"smooth": {"kind": "const", "value": c}, "atoms": []})


def peakon(p, q):
    return make_coefficient({"smooth": {"kind": "const", "value": 0.0},
                             "atoms": [{"q": q, "p": p}]})


def exact_zero_propagator(d):
    # psi'' = psi/4 over a stretch of length d
    ch, sh = math.cosh(d / 2), math.sinh(d / 2)
    return np.array([[ch, 2 * sh], [sh / 2, ch]])


def test_delta_jump():
    s = ShootingState(x=0.3, psi=2.0, dpsi=0.5, lam=3.0)
    out = delta_jump(s, p=0.4)
    assert out.psi == 2.0
    assert out.dpsi == pytest.approx(0.5 - 3.0 * 0.4 * 2.0)
    assert out.x == 0.3 and out.lam == 3.0


def test_zero_momentum_transfer_matrix():
    # no momentum at all: U(1) is the cosh/sinh matrix of psi'' = psi/4
    U = fundamental_matrix(const_m(0.0), lam=5.0)
    want = exact_zero_propagator(1.0)
    assert U.y1 == pytest.approx(want[0, 0], abs=1e-15)
    assert U.y2 == pytest.approx(want[0, 1], abs=1e-15)
    assert U.dy1 == pytest.approx(want[1, 0], abs=1e-15)
    assert U.dy2 == pytest.approx(want[1, 1], abs=1e-15)


def test_constant_momentum_closed_form():
    # m = 1, lam = 1: psi'' = -(lam - 1/4) psi, omega = sqrt(3)/2
    lam = 1.0
    omega = math.sqrt(lam - 0.25)
    U = fundamental_matrix(const_m(1.0), lam=lam)
    assert U.y1 == pytest.approx(math.cos(omega), abs=1e-12)
    assert U.y2 == pytest.approx(math.sin(omega) / omega, abs=1e-12)
    assert U.dy1 == pytest.approx(-omega * math.sin(omega), abs=1e-12)
    assert U.dy2 == pytest.approx(math.cos(omega), abs=1e-12)


def test_constant_momentum_negative_side():
    # lam < 1/4 on m = 1: hyperbolic branch
    lam = -2.0
    kappa = math.sqrt(0.25 - lam)
    U = fundamental_matrix(const_m(1.0), lam=lam)
    assert U.y1 == pytest.approx(math.cosh(kappa), rel=1e-11)
    assert U.y2 == pytest.approx(math.sinh(kappa) / kappa, rel=1e-11)


def test_det_one_across_coefficients():
    configs = [
        const_m(1.0),
        make_coefficient({"smooth": {"kind": "fourier", "a0": 1.0, "cos": [0.3]},
                          "atoms": []}),
        peakon(1.0, 0.3),
        make_coefficient({"smooth": {"kind": "fourier", "a0": 1.0, "cos": [0.25],
                                     "sin": [0.0, 0.1]},
                          "atoms": [{"q": 0.6, "p": 0.4}]}),
    ]
    for m in configs:
        for lam in (-3.0, 0.0, 1.7, 25.0, 90.0):
            U = fundamental_matrix(m, lam)
            assert U.det == pytest.approx(1.0, abs=1e-11)


def test_peakon_transfer_matrix_exact():
    # zero smooth part: exact product P(1-q) . jump . P(q), lam-independent pieces
    p, q, lam = 1.0, 0.3, 2.5
    U = fundamental_matrix(peakon(p, q), lam)
    jump = np.array([[1.0, 0.0], [-lam * p, 1.0]])
    want = exact_zero_propagator(1 - q) @ jump @ exact_zero_propagator(q)
    got = np.array([[U.y1, U.y2], [U.dy1, U.dy2]])
    np.testing.assert_allclose(got, want, atol=1e-14)


def test_peakon_discriminant_affine():
    # trace/2 = cosh(1/2) - lam p sinh(1/2), independent of q
    p = 0.8
    for q in (0.2, 0.5, 0.9):
        for lam in (0.0, 1.0, 4.0):
            U = fundamental_matrix(peakon(p, q), lam)
            want = 2 * (math.cosh(0.5) - lam * p * math.sinh(0.5))
            assert U.trace == pytest.approx(want, abs=1e-13)


def test_atom_at_origin_applies_once():
    # q = 0 jump acts on the initial data before the smooth stretch
    p, lam = 0.7, 2.0
    U = fundamental_matrix(peakon(p, 0.0), lam)
    jump = np.array([[1.0, 0.0], [-lam * p, 1.0]])
    want = exact_zero_propagator(1.0) @ jump
    got = np.array([[U.y1, U.y2], [U.dy1, U.dy2]])
    np.testing.assert_allclose(got, want, atol=1e-14)


def test_propagate_linearity():
    m = make_coefficient({"smooth": {"kind": "fourier", "a0": 1.0, "cos": [0.3]},
                          "atoms": []})
    lam = 7.0
    a = propagate(m, lam, ShootingState(0.0, 1.0, 0.0, lam), 1.0)
    b = propagate(m, lam, ShootingState(0.0, 0.0, 1.0, lam), 1.0)
    c = propagate(m, lam, ShootingState(0.0, 2.0, -3.0, lam), 1.0)
    assert c.psi == pytest.approx(2 * a.psi - 3 * b.psi, rel=1e-12)
    assert c.dpsi == pytest.approx(2 * a.dpsi - 3 * b.dpsi, rel=1e-12)


def test_rk4_fourth_order_convergence():
    # halving h divides the endpoint error by about 16
    lam = 30.0
    omega = math.sqrt(lam - 0.25)
    exact = math.sin(omega) / omega
    errs = []
    for steps in (64, 128):
        U = fundamental_matrix(const_m(1.0), lam, steps=steps)
        errs.append(abs(U.y2 - exact))
    ratio = errs[0] / errs[1]
    assert 13.0 < ratio < 19.0


def test_wronskian_helpers():
    sa = ShootingState(0.5, 1.0, 2.0, 3.0)
    sb = ShootingState(0.5, 4.0, 5.0, 3.0)
    assert wronskian(sa, sb) == pytest.approx(1.0 * 5.0 - 2.0 * 4.0)
    with pytest.raises(ValueError):
        wronskian(sa, ShootingState(0.6, 4.0, 5.0, 3.0))
    with pytest.raises(ValueError):
        wronskian(sa, ShootingState(0.5, 4.0, 5.0, 2.0))


def test_trajectory_matches_closed_form():
    lam = 1.0
    omega = math.sqrt(lam - 0.25)
    t1, t2 = solve_fundamental(const_m(1.0), lam, steps=512)
    np.testing.assert_allclose(t2.psi, np.sin(omega * t2.xs) / omega, atol=1e-11)
    np.testing.assert_allclose(t1.psi, np.cos(omega * t1.xs), atol=1e-11)
    np.testing.assert_allclose(t1.dpsi, -omega * np.sin(omega * t1.xs), atol=1e-11)
    assert t2.xs[0] == 0.0 and t2.xs[-1] == 1.0


def test_trajectory_wronskian_is_one():
    m = make_coefficient({"smooth": {"kind": "fourier", "a0": 1.0, "cos": [0.25],
                                     "sin": [0.0, 0.1]},
                          "atoms": [{"q": 0.4, "p": 0.6}]})
    t1, t2 = solve_fundamental(m, lam=11.0, steps=512)
    w = trajectory_wronskian(t1, t2)
    np.testing.assert_allclose(w, 1.0, atol=1e-11)


def test_trajectory_atom_rows():
    # atom position appears twice: pre-jump and post-jump derivative rows
    m = peakon(1.0, 0.5)
    lam = 2.0
    t1, _ = solve_fundamental(m, lam, steps=128)
    hits = np.nonzero(t1.xs == 0.5)[0]
    assert hits.size == 2
    i, j = hits
    assert t1.psi[i] == pytest.approx(t1.psi[j], abs=1e-15)
    assert t1.dpsi[j] - t1.dpsi[i] == pytest.approx(-lam * 1.0 * t1.psi[i], abs=1e-13)
    assert len(t1.segments) == 2


def test_two_period_trajectory():
    m = const_m(1.0)
    lam = 3.0
    t1, t2 = solve_fundamental(m, lam, steps=256, periods=2)
    assert t2.xs[-1] == 2.0
    stride = t2.period_stride
    assert t2.xs[stride - 1] == 1.0
    # second-period endpoint equals U^2 acting on the starting column
    U = fundamental_matrix(m, lam, steps=256)
    M = np.array([[U.y1, U.y2], [U.dy1, U.dy2]])
    end = M @ M @ np.array([0.0, 1.0])
    assert t2.psi[-1] == pytest.approx(end[0], rel=1e-10)
    assert t2.dpsi[-1] == pytest.approx(end[1], rel=1e-10)
    first = t2.first_period()
    assert first.xs[-1] == 1.0
    assert first.psi[-1] == pytest.approx(U.y2, rel=1e-12)


def test_combine_trajectories():
    t1, t2 = solve_fundamental(const_m(1.0), lam=2.0, steps=128)
    y = t1.combine(t2, 3.0)
    np.testing.assert_allclose(y.psi, t1.psi + 3.0 * t2.psi, atol=1e-15)
    np.testing.assert_allclose(y.dpsi, t1.dpsi + 3.0 * t2.dpsi, atol=1e-15)


def test_endpoint_column_matches_scalar():
    m = make_coefficient({"smooth": {"kind": "fourier", "a0": 1.0, "cos": [0.3]},
                          "atoms": [{"q": 0.25, "p": 0.5}]})
    lams = np.array([0.5, 4.0, 17.0])
    psi, dpsi = endpoint_column(m, lams, column=(0.0, 1.0), steps=256)
    for k, lam in enumerate(lams):
        U = fundamental_matrix(m, lam, steps=256)
        assert psi[k] == pytest.approx(U.y2, rel=1e-12)
        assert dpsi[k] == pytest.approx(U.dy2, rel=1e-12)


def test_blowup_guard():
    with pytest.raises(BlowUpError):
        fundamental_matrix(const_m(1.0), lam=-1e8, steps=256)
