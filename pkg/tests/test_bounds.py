import json
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from convexsmooth import bounds
from convexsmooth.bnb import Box
from convexsmooth.bounds import (BoundSettings, CmTable, FaaDiBrunoTable, build_cm_table,
                                 c_bound, faa_di_bruno_bound, load_or_build_cm_table,
                                 sup_abs_on_box, sup_h_deriv, sup_phi_deriv, sup_smoothstep)
from convexsmooth.errors import BudgetExceededError, CapabilityError, DomainError
from convexsmooth.kernels import b_eps_derivs, bridge_derivs, phi_derivs, term_partials
from convexsmooth.suites import dense_term_sup

DENSE = 100_000


def strip_samples(m, n, seed=0):
    """Points of the support strip ``0 < h_m < 2`` with x across the bridge transition."""
    rng = np.random.default_rng(seed)
    eps = 1.0 / m
    x = rng.uniform(-eps - 0.05, 1 - eps + 0.05, n)
    hv = rng.uniform(1e-9, 2.0, n)
    return x, hv + b_eps_derivs(eps, x, 0)[0]


# ---------------------------------------------------------------------------
# sup_abs_on_box


def test_sup_abs_on_box_bridge_derivative_dominates_dense_grid():
    cert = sup_abs_on_box(("b", 1), Box.of((-1.0, 0.0)), tol=1e-3)
    xs = np.linspace(-1.0, 0.0, DENSE)
    dense = np.abs(bridge_derivs(xs, 1)[1]).max()
    assert dense <= cert.bound
    assert cert.bound - dense <= 1e-3
    assert cert.method == "branch-and-bound"


def test_sup_abs_on_box_bridge_value_is_one():
    cert = sup_abs_on_box(("b", 0), Box.of((-5.0, 5.0)), tol=1e-3)
    assert 1.0 - 1e-3 <= cert.bound
    assert cert.bound <= 1.0 + 1e-3


def test_sup_abs_on_box_zero_function():
    cert = sup_abs_on_box(("zero", 0), Box.of((-3.0, 7.0)), tol=1e-6)
    assert 0.0 <= cert.bound <= 1e-6


def test_sup_abs_on_box_budget_error_carries_best_bound():
    with pytest.raises(BudgetExceededError) as info:
        sup_abs_on_box(("s", 6), Box.of((0.0, 1.0)), tol=0.0, budget=8)
    assert info.value.best is not None


def test_sup_abs_on_box_rejects_bad_inputs():
    with pytest.raises(DomainError):
        sup_abs_on_box(("nope", 0), Box.of((0.0, 1.0)))
    with pytest.raises(DomainError):
        Box.of((1.0, 0.0))


# ---------------------------------------------------------------------------
# P, Q and the composition bound


def test_sup_phi_deriv_examples():
    assert sup_phi_deriv(1, 0) >= 1.0
    assert sup_phi_deriv(3, 1) >= 3.5
    with pytest.raises(CapabilityError):
        sup_phi_deriv(2, 3)


@pytest.mark.parametrize("m", range(1, 9))
def test_sup_phi_deriv_dominates_dense_sampling(m):
    xs = np.linspace(-1.0, 2.5, DENSE)
    D = phi_derivs(m, xs, m)
    for j in range(m + 1):
        assert np.abs(D[j]).max() <= sup_phi_deriv(m, j)
    # the nonpositive half-line contributes nothing
    assert all(np.all(d[xs <= 0] == 0) for d in D)


def test_sup_h_deriv_examples():
    assert sup_h_deriv(3, (0, 1)) == 1.0
    assert sup_h_deriv(2, 1) == pytest.approx(0.5 * sup_smoothstep(1).bound, rel=1e-12)
    assert sup_h_deriv(2, 1) >= 0.5 * sup_smoothstep(1).bound
    for m in (1, 4, 9):
        assert sup_h_deriv(m, (1, 1)) == 0.0
        assert sup_h_deriv(m, (0, 3)) == 0.0
    with pytest.raises(DomainError):
        sup_h_deriv(2, 0)


@pytest.mark.parametrize("m", [1, 3, 6])
def test_sup_h_deriv_dominates_dense_sampling(m):
    xs = np.linspace(-1.5, 1.5, DENSE)
    D = b_eps_derivs(1.0 / m, xs, m)
    for j in range(1, m + 1):
        assert np.abs(D[j]).max() <= sup_h_deriv(m, j)


def test_faa_di_bruno_examples():
    assert faa_di_bruno_bound(1, 0) >= sup_phi_deriv(1, 0)
    P21, Q21 = sup_phi_deriv(2, 1), sup_h_deriv(2, 1)
    assert faa_di_bruno_bound(2, 1) >= P21 * max(1.0, Q21)
    with pytest.raises(CapabilityError):
        faa_di_bruno_bound(2, 3)


def test_faa_di_bruno_m4_n4_dominates_dense_oracle():
    x, y = strip_samples(4, DENSE, seed=4)
    P = term_partials(4, x, y, 4)
    worst = max(np.abs(v).max() for (a, c), v in P.items() if a + c == 4)
    assert worst <= faa_di_bruno_bound(4, 4)


@pytest.mark.parametrize("m", range(1, 7))
def test_every_order_bound_dominates_strip_samples(m):
    x, y = strip_samples(m, 20_000, seed=m)
    P = term_partials(m, x, y, m)
    for n in range(m + 1):
        worst = max(np.abs(v).max() for (a, c), v in P.items() if a + c == n)
        assert worst <= faa_di_bruno_bound(m, n), (m, n)


@pytest.mark.parametrize("K", [3, 6])
def test_faa_table_matches_sympy_bell_polynomials(K):
    table = FaaDiBrunoTable.build(K)
    gs = sp.symbols(f"g1:{K + 1}")
    for n in range(1, K + 1):
        for k in range(1, n + 1):
            poly = sp.Poly(sp.bell(n, k, gs[: n - k + 1]), *gs)
            want = {tuple(e): int(c) for e, c in zip(poly.monoms(), poly.coeffs())}
            got = table.monomials(n, k)
            assert got == want
            assert all(isinstance(c, int) and c > 0 for c in got.values())


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.data())
def test_composition_bound_is_monotone_in_inputs(m, data):
    n = data.draw(st.integers(0, m))
    P = [sup_phi_deriv(m, j) for j in range(n + 1)]
    Q = [None] + [sup_h_deriv(m, j) for j in range(1, n + 1)]
    base = faa_di_bruno_bound(m, n, P=P, Q=Q)
    grow = data.draw(st.lists(st.floats(1.0, 10.0), min_size=2 * n + 1, max_size=2 * n + 1))
    P2 = [p * g for p, g in zip(P, grow)]
    Q2 = [None] + [q * g for q, g in zip(Q[1:], grow[n + 1:])]
    assert faa_di_bruno_bound(m, n, P=P2, Q=Q2) >= base


# ---------------------------------------------------------------------------
# c_m and the table


def test_c_bound_examples(table):
    for m in range(1, 9):
        assert table[m] >= sup_phi_deriv(m, 0)
    x, y = strip_samples(1, DENSE, seed=11)
    P = term_partials(1, x, y, 1)
    assert table[1] >= max(np.abs(v).max() for v in P.values())
    with pytest.raises(CapabilityError):
        c_bound(13)
    with pytest.raises(DomainError):
        c_bound(0)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_cm_dominates_symbolic_dense_oracle(table, m):
    assert dense_term_sup(m, 50_000, seed=3) <= table[m]


def test_tail_enabler(table):
    for m in range(1, table.max_index + 1):
        x, y = strip_samples(m, 20_000, seed=100 + m)
        sup0 = np.abs(term_partials(m, x, y, 0)[(0, 0)]).max()
        assert sup0 / (table[m] * 2 ** m) <= 2.0 ** -m


def test_table_is_deterministic_and_round_trips(tmp_path):
    s = BoundSettings()
    a = build_cm_table(4, settings=s)
    # drop memoised certificates so the second build recomputes everything
    bounds._smoothstep_certs.cache_clear()
    bounds._phi_cutoff_certs.cache_clear()
    b = build_cm_table(4, settings=s)
    assert a.to_json() == b.to_json()
    back = CmTable.from_dict(json.loads(a.to_json()))
    assert back.values == a.values and back.smoothstep == a.smoothstep
    assert back.to_json() == a.to_json()
    cache = tmp_path / "cm.json"
    first = load_or_build_cm_table(cache, 4, settings=s)
    assert cache.exists()
    assert load_or_build_cm_table(cache, 4, settings=s).to_json() == first.to_json()
    # a different configuration must not reuse the cache
    other = load_or_build_cm_table(cache, 3, settings=s)
    assert other.max_index == 3
    assert json.loads(cache.read_text())["hash"] == other.hash


def test_table_values_grow_with_index(table):
    vals = [table[m] for m in range(1, table.max_index + 1)]
    assert all(math.isfinite(v) and v > 0 for v in vals)
    assert vals[2:] == sorted(vals[2:])
