import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexsmooth.errors import CapabilityError, DomainError, NotDifferentiableError
from convexsmooth.interval import Interval
from convexsmooth.kernels import (KernelConfig, b_eps_eval, bridge_eval, cutoff_eval, h_eval,
                                  phi_derivs, phi_eval, smoothstep_derivs, term_jet,
                                  term_partials)

mp.mp.dps = 40


# multiprecision reference implementations of the building blocks
def mp_s(t):
    t = mp.mpf(t)
    if t <= 0:
        return mp.mpf(0)
    if t >= 1:
        return mp.mpf(1)
    a, b = mp.exp(-1 / t), mp.exp(-1 / (1 - t))
    return a / (a + b)


def mp_b(x):
    return -mp_s(mp.mpf(x) + 1)


def mp_chi(x):
    return 1 - mp_s(mp.mpf(x) - 1)


def mp_phi(m, x):
    x = mp.mpf(x)
    if x <= 0:
        return mp.mpf(0)
    return x ** (m + mp.mpf(1) / 2) * mp_chi(x)


def mp_term(m, x, y):
    eps = mp.mpf(1) / m
    return mp_phi(m, mp.mpf(y) - eps * mp_b(mp.mpf(x) - 1 + eps))


def close(got, want, rel=1e-6, floor=1e-9):
    want = float(want)
    return abs(got - want) <= rel * abs(want) + floor


def mp_deriv(f, x, j):
    return mp.diff(f, mp.mpf(x), j) if j else f(mp.mpf(x))


# ---------------------------------------------------------------------------
# examples


def test_bridge_examples():
    assert bridge_eval(-2.0, 0) == 0.0
    assert bridge_eval(5.0, 0) == -1.0
    v = bridge_eval(-0.5, 0)
    assert -1.0 < v < 0.0
    for j in range(1, 6):
        assert bridge_eval(-3.0, j) == 0.0
        assert bridge_eval(0.0, j) == 0.0
        assert bridge_eval(2.0, j) == 0.0


def test_b_eps_examples():
    for t in np.linspace(-2, 1, 13):
        assert b_eps_eval(1.0, t, 0) == bridge_eval(t, 0)
    for k in range(1, 8):
        assert b_eps_eval(1.0 / k, -1.0 / k, 0) == pytest.approx(0.0, abs=1e-300)
    assert b_eps_eval(0.5, 2.0, 0) == -0.5


def test_cutoff_examples():
    assert cutoff_eval(0.5, 0) == 1.0
    assert cutoff_eval(3.0, 0) == 0.0
    assert 0.0 <= cutoff_eval(1.5, 0) <= 1.0
    for j in range(1, 6):
        assert cutoff_eval(0.5, j) == 0.0
        assert cutoff_eval(3.0, j) == 0.0


def test_phi_examples():
    assert phi_eval(1, 0.25, 0) == pytest.approx(0.125, rel=1e-15)
    assert phi_eval(3, -1.0, 2) == 0.0
    assert phi_eval(1, 0.25, 2) == pytest.approx(1.5, rel=1e-14)
    # closed-form product rule on (0, 1)
    for m in range(1, 5):
        for j in range(m + 3):
            coeff = math.prod(m + 0.5 - i for i in range(j))
            assert phi_eval(m, 0.4, j) == pytest.approx(coeff * 0.4 ** (m + 0.5 - j), rel=1e-13)


def test_h_examples():
    for k in range(1, 7):
        assert h_eval(k, -1.0 / k, 0.37, (0, 0)) == pytest.approx(0.37, abs=1e-300)
    assert h_eval(2, 0.0, 0.0, (0, 1)) == 1.0
    assert h_eval(2, 0.0, 0.0, (1, 1)) == 0.0


def test_term_jet_examples():
    J = term_jet(1, (0.0, 3.0), 4)
    assert all(J[a] == 0.0 for a in J.multi_indices())
    for k in range(1, 5):
        y = 0.3
        J = term_jet(k, (-1.0 / k, y), k + 1)
        want = math.prod(k + 0.5 - i for i in range(k + 1)) * y ** -0.5
        assert J[(0, k + 1)] == pytest.approx(want, rel=1e-12)
    J = term_jet(5, (0.3, -1.0), 5)
    assert all(J[a] == 0.0 for a in J.multi_indices())


def test_error_cases():
    with pytest.raises(NotDifferentiableError):
        phi_eval(1, -1.0, 2)
    with pytest.raises(NotDifferentiableError):
        phi_eval(2, 0.0, 3)
    with pytest.raises(DomainError):
        b_eps_eval(0.0, 0.0, 0)
    with pytest.raises(DomainError):
        b_eps_eval(1.5, 0.0, 0)
    with pytest.raises(CapabilityError):
        bridge_eval(0.0, 13)
    with pytest.raises(CapabilityError):
        bridge_eval(0.0, 5, KernelConfig(max_order=4))
    with pytest.raises(DomainError):
        phi_eval(0, 0.5, 0)
    with pytest.raises(NotDifferentiableError):
        term_jet(1, (0.0, -2.0), 2)


# ---------------------------------------------------------------------------
# agreement with high-precision finite differences


rng = np.random.default_rng(2024)
BRIDGE_PTS = rng.uniform(-0.97, -0.03, 200)
CUTOFF_PTS = rng.uniform(1.03, 1.97, 200)
PHI_PTS = rng.uniform(0.05, 1.95, 200)


@pytest.mark.parametrize("j", range(7))
def test_bridge_agrees_with_finite_differences(j):
    for x in BRIDGE_PTS:
        assert close(bridge_eval(x, j), mp_deriv(mp_b, x, j)), (x, j)


@pytest.mark.parametrize("j", range(7))
def test_cutoff_agrees_with_finite_differences(j):
    for x in CUTOFF_PTS:
        assert close(cutoff_eval(x, j), mp_deriv(mp_chi, x, j)), (x, j)


@pytest.mark.parametrize("m", [1, 2, 4])
def test_phi_agrees_with_finite_differences(m):
    for x in PHI_PTS:
        got = phi_derivs(m, x, 6)
        for j in range(7):
            assert close(got[j], mp_deriv(lambda u: mp_phi(m, u), x, j)), (m, x, j)


def test_b_eps_agrees_with_finite_differences():
    for eps in (1.0, 0.5, 0.2):
        for x in rng.uniform(-eps + 0.02, 0.98, 40):
            for j in range(7):
                want = mp_deriv(lambda u: eps * mp_b(u - 1 + eps), x, j)
                assert close(b_eps_eval(eps, x, j), want), (eps, x, j)


@pytest.mark.parametrize("m", [3, 6])
def test_term_partials_agree_with_multivariate_differences(m):
    pts = np.column_stack([rng.uniform(-0.3, 0.9, 12), rng.uniform(0.05, 1.2, 12)])
    for x, y in pts:
        P = term_partials(m, x, y, 4)
        if mp_term(m, x, y) == 0 and max(abs(v) for v in P.values()) == 0:
            continue
        for (a, c), v in P.items():
            want = mp.diff(lambda u, w: mp_term(m, u, w), (mp.mpf(x), mp.mpf(y)), (a, c))
            assert close(v, want), (m, x, y, a, c)


# ---------------------------------------------------------------------------
# invariants


@pytest.mark.parametrize("m", [1, 2, 3])
def test_phi_low_order_differences_vanish_at_zero(m):
    xs = [1e-2, 1e-4, 1e-6, 1e-8]
    for j in range(m + 1):
        fd = []
        for x in xs:
            h = x / 4
            fd.append(abs(float(mp.diff(lambda u: mp_phi(m, u), mp.mpf(x), j, h=h,
                                        direction=0))) if j else phi_eval(m, x, 0))
        assert fd == sorted(fd, reverse=True)
        # decay at the rate x^(m + 1/2 - j) predicted by the power rule
        assert fd[-1] <= 1.1 * fd[0] * (xs[-1] / xs[0]) ** (m + 0.5 - j)


@pytest.mark.parametrize("m", [1, 2])
def test_phi_blowup_slope_is_minus_half(m):
    xs = np.logspace(-6, -2, 9)
    fd = []
    for x in xs:
        h = x / 100
        n = m + 1
        # central difference of order m+1 applied to the float kernel
        pts = [x + (n / 2 - i) * h for i in range(n + 1)]
        d = sum((-1) ** i * math.comb(n, i) * phi_eval(m, p, 0) for i, p in enumerate(pts))
        fd.append(abs(d) / h ** n)
    slope = np.polyfit(np.log(xs), np.log(fd), 1)[0]
    assert abs(slope + 0.5) <= 0.05


def test_b_eps_strictly_decreasing_in_eps():
    eps = np.linspace(0.02, 1.0, 50)
    for x in np.linspace(0.0, 3.0, 31):
        vals = np.array([b_eps_eval(e, x, 0) for e in eps])
        assert np.all(np.diff(vals) < 0), x


@given(st.integers(1, 12), st.floats(-5, 5), st.floats(-5, 5), st.integers(1, 6),
       st.integers(1, 6))
def test_h_structural_partials_are_exact(m, x, y, a, c):
    assert h_eval(m, x, y, (0, 1)) == 1.0
    assert h_eval(m, x, y, (a, c)) == 0.0
    if c >= 2:
        assert h_eval(m, x, y, (0, c)) == 0.0


@settings(max_examples=200)
@given(st.floats(-0.5, 1.5), st.floats(0, 0.05))
def test_smoothstep_interval_encloses_multiprecision(t, w):
    X = Interval(t, t + w)
    encl = smoothstep_derivs(X, 4)
    for u in (t, t + w / 2, t + w):
        for j in range(5):
            want = mp_deriv(mp_s, u, j)
            assert mp.mpf(float(encl[j].lo)) - 1e-25 <= want <= mp.mpf(float(encl[j].hi)) + 1e-25
