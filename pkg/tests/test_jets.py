import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from convexsmooth.jets import (BatchJet, Jet1, Jet2, bell_table, compose_bivariate, compose_raw,
                               raw_to_taylor, taylor_div, taylor_mul, taylor_to_raw)

small = st.floats(min_value=-2, max_value=2, allow_nan=False)


@pytest.mark.parametrize("K", [1, 4, 7])
def test_bell_table_matches_sympy(K):
    gs = sp.symbols(f"g1:{K + 1}")
    g = [None] + list(gs)
    B = bell_table(g, K)
    for n in range(1, K + 1):
        for k in range(1, n + 1):
            want = sp.bell(n, k, gs[: n - k + 1])
            assert sp.expand(B[n][k] - want) == 0


@settings(max_examples=40, deadline=None)
@given(small, st.integers(1, 6))
def test_compose_raw_against_symbolic_chain_rule(t0, K):
    t = sp.Symbol("t")
    inner = sp.sin(t) + t ** 2 / 3
    outer_sym = sp.exp
    g = [float(sp.diff(inner, t, j).subs(t, t0)) for j in range(K + 1)]
    u = sp.Symbol("u")
    outer = [float(sp.diff(outer_sym(u), u, j).subs(u, g[0])) for j in range(K + 1)]
    got = compose_raw(outer, g, K)
    want = [float(sp.diff(outer_sym(inner), t, j).subs(t, t0)) for j in range(K + 1)]
    assert np.allclose(got, want, rtol=1e-10, atol=1e-12)


@given(st.lists(small, min_size=4, max_size=4), st.lists(small, min_size=4, max_size=4))
def test_taylor_product_and_quotient_roundtrip(a, b):
    b = [b[0] + 3.0] + b[1:]  # keep the constant term away from zero
    prod = taylor_mul(a, b)
    back = taylor_div(prod, b)
    assert np.allclose(back, a, atol=1e-9)
    assert np.allclose(raw_to_taylor(taylor_to_raw(a)), a)


def test_jet_conventions_are_raw_derivatives():
    j = Jet1(0.0, (1.0, 1.0, 1.0, 1.0))  # exp at 0
    assert j.order == 3
    assert np.allclose(j.taylor(), [1.0, 1.0, 0.5, 1.0 / 6.0])
    J = Jet2((0.0, 0.0), 2, {(0, 0): 1.0, (1, 0): 2.0, (0, 1): 3.0, (2, 0): 4.0, (1, 1): 5.0,
                             (0, 2): 6.0})
    assert J[(1, 1)] == 5.0
    assert len(J.multi_indices()) == 6
    with pytest.raises(KeyError):
        J[(2, 1)]


def test_batchjet_mixed_partials_match_sympy():
    x, y = sp.symbols("x y")
    expr = sp.exp(x * y) / (1 + x ** 2) + y ** 3 * x
    pts = np.array([[0.3, -0.2], [1.1, 0.7], [-0.5, 0.4]])
    K = 4
    X = BatchJet.variable(0, pts[:, 0], 2, K)
    Y = BatchJet.variable(1, pts[:, 1], 2, K)
    XY = X * Y
    ex = XY.compose([np.exp(XY.value)] * (K + 1))
    F = ex / (1 + X * X) + Y * Y * Y * X
    for a in range(K + 1):
        for c in range(K + 1 - a):
            d = sp.lambdify((x, y), sp.diff(expr, x, a, y, c), "numpy")
            want = np.broadcast_to(d(pts[:, 0], pts[:, 1]), (len(pts),))
            assert np.allclose(F.partial((a, c)), want, rtol=1e-9, atol=1e-10), (a, c)


def test_compose_bivariate_matches_direct_product():
    K = 3
    pts = np.array([[0.2, 0.5], [0.9, -0.3]])
    X = BatchJet.variable(0, pts[:, 0], 2, K)
    Y = BatchJet.variable(1, pts[:, 1], 2, K)
    # G(u, v) = u * v composed with (X + Y, X - Y)
    U, V = X + Y, X - Y
    u0, v0 = U.value, V.value
    partials = {(0, 0): u0 * v0, (1, 0): v0, (0, 1): u0, (1, 1): np.ones(2)}
    for a in range(K + 1):
        for c in range(K + 1 - a):
            partials.setdefault((a, c), np.zeros(2))
    got = compose_bivariate(U, V, partials)
    want = U * V
    for alpha in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0)]:
        assert np.allclose(got.partial(alpha), want.partial(alpha))
