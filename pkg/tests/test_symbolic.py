import json
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st

from convexsmooth.counterexample import f_values_float
from convexsmooth.errors import DomainError, NotDifferentiableError
from convexsmooth.precise import expr_value_mp, f_value_mp
from convexsmooth.structures.descriptors import open_interval, region_X
from convexsmooth.structures.symbolic import (Expr, SymbolicMap, b, b_eps, chi, const, coord,
                                              coords, exp, fnode, h, phi, s, step)

x, y = coords(2)

leaves = st.one_of(st.just(x), st.just(y),
                   st.fractions(-3, 3, max_denominator=8).map(const))


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda p: p[0] + p[1]),
        st.tuples(children, children).map(lambda p: p[0] - p[1]),
        st.tuples(children, children).map(lambda p: p[0] * p[1]),
        children.map(lambda e: exp(s(e))),
        children.map(s),
        children.map(b),
        children.map(chi),
        children.map(lambda e: b_eps(Fraction(1, 3), e)),
        st.tuples(children, children).map(lambda p: h(2, p[0], p[1])),
    )


smooth_exprs = st.recursive(leaves, _extend, max_leaves=8)
points = st.tuples(st.floats(-2, 2), st.floats(-2, 2))


@settings(max_examples=150, deadline=None)
@given(smooth_exprs, points)
@example(exp(s(s(y))), (0.0, 5.3301129911476234e-285))  # tiny argument to the inner s
def test_value_agrees_with_multiprecision(e, p):
    got = e.value(np.array([p]))[0]
    want = expr_value_mp(e, p)
    assert abs(got - float(want)) <= 1e-9 * max(1.0, abs(float(want)))


@settings(max_examples=100, deadline=None)
@given(smooth_exprs, smooth_exprs, points)
def test_substitution_commutes_with_evaluation(e, g, p):
    composed = e.substitute([g, x])
    inner = (g.value(np.array([p]))[0], p[0])
    assert composed.value(np.array([p]))[0] == pytest.approx(e.value(np.array([inner]))[0],
                                                             rel=1e-12, abs=1e-12)


@settings(max_examples=100)
@given(smooth_exprs)
def test_serialization_round_trip(e):
    back = Expr.from_dict(json.loads(json.dumps(e.to_dict())))
    assert back == e
    assert e.is_structurally_smooth()


JET_CASES = [
    x * y + exp(x - y),
    s(x) * chi(y + 1),
    b(x - y) + h(3, x, y),
    b_eps(Fraction(1, 2), x * y) / (const(2) + x * x),
    phi(3, const(1) + x * y),
]


@pytest.mark.parametrize("e", JET_CASES, ids=str)
def test_jet_agrees_with_multiprecision_differences(e):
    mp.mp.dps = 40
    P = np.array([[0.3, -0.4], [-0.6, 0.2], [0.1, 0.9]])
    K = 4
    J = e.jet(P, K)
    for i, (px, py) in enumerate(P):
        for a in range(K + 1):
            for c in range(K + 1 - a):
                want = mp.diff(lambda u, v: expr_value_mp(e, (u, v)), (mp.mpf(px), mp.mpf(py)),
                               (a, c))
                got = J.partial((a, c))[i]
                assert abs(got - float(want)) <= 1e-7 * max(1.0, abs(float(want))), (i, a, c)


def test_structural_flags():
    assert (x * x - 3 * y).is_polynomial()
    assert not exp(x).is_polynomial()
    assert exp(x).is_structurally_smooth()
    assert (x / 2).is_structurally_smooth()
    assert not (1 / x).is_structurally_smooth()
    for e in (phi(1, x), step(x), fnode(x, y)):
        assert not e.is_structurally_smooth()


def test_constructor_errors():
    with pytest.raises(DomainError):
        b_eps(0, x)
    with pytest.raises(DomainError):
        b_eps(2, x)
    with pytest.raises(DomainError):
        phi(0, x)
    with pytest.raises(DomainError):
        h(0, x, y)
    with pytest.raises(DomainError):
        (x / (x - x)).value(np.array([[1.0, 2.0]]))


def test_phi_jet_refused_past_its_order_at_zero():
    e = phi(1, x)
    e.jet(np.array([[0.0, 0.0]]), 1)
    with pytest.raises(NotDifferentiableError):
        e.jet(np.array([[0.0, 0.0]]), 2)


# ---------------------------------------------------------------------------
# the f node


def test_f_node_matches_float_and_multiprecision_sums(table):
    rng = np.random.default_rng(4)
    P = np.column_stack([rng.uniform(-1.5, 1.5, 20), rng.uniform(0.0, 2.2, 20)])
    P[:5, 1] = 0.0
    P[:5, 0] = np.abs(P[:5, 0])
    e = fnode(x, y)
    got = e.value(P)
    assert np.allclose(got, f_values_float(P[:, 0], P[:, 1], table), rtol=1e-14, atol=0)
    for (px, py), g in zip(P, got):
        assert g == pytest.approx(float(f_value_mp(px, py, table)), rel=1e-12, abs=1e-300)


def test_f_node_only_defined_on_X():
    e = fnode(x, y)
    with pytest.raises(DomainError):
        e.value(np.array([[-1.0, 0.0]]))
    with pytest.raises(DomainError):
        e.jet(np.array([[0.5, -0.1]]), 1)
    with pytest.raises(DomainError):
        f_value_mp(-1.0, 0.0, None)


# ---------------------------------------------------------------------------
# maps


def test_map_arity_checks():
    with pytest.raises(DomainError):
        SymbolicMap.of(y, n_in=1)
    with pytest.raises(DomainError):
        SymbolicMap.of(x, n_in=1, domain=region_X())
    with pytest.raises(DomainError):
        SymbolicMap.of()
    F = SymbolicMap.of(x * y, n_in=2)
    with pytest.raises(TypeError):
        F.compose(SymbolicMap.of(coord(0)))


def test_map_composition_and_partials():
    t = coord(0)
    curve = SymbolicMap.of(t, t * t, domain=open_interval(-1, 1))
    F = SymbolicMap.of(x * y, exp(x), n_in=2)
    G = F.compose(curve)
    assert G.n_in == 1 and G.n_out == 2 and G.domain == curve.domain
    ts = np.linspace(-0.9, 0.9, 7)
    P = G.partials(ts, 3)
    assert np.allclose(P[0][(1,)], 3 * ts ** 2)
    assert np.allclose(P[0][(3,)], 6.0)
    assert np.allclose(P[1][(2,)], np.exp(ts))
    xs, ys = G.curve()(ts)
    assert np.allclose(xs, ts ** 3) and np.allclose(ys, np.exp(ts))


def test_map_round_trip_and_constancy():
    m = SymbolicMap.of(const(Fraction(1, 3)), s(const(2)), n_in=1, domain=open_interval(0, 1),
                       name="c")
    assert m.is_constant()
    back = SymbolicMap.from_dict(json.loads(m.to_json()))
    assert back == m
    assert not SymbolicMap.of(coord(0)).is_constant()
