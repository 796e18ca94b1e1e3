import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexsmooth.counterexample import (blowup_closed_form, contrast_sweep, f_eval, f_partial,
                                         f_partials_float, in_U, in_X, limiting_index,
                                         origin_samples, plot_composition_check, verify_blowup,
                                         verify_ck_bounded)
from convexsmooth.errors import (CapabilityError, DomainError, NotDifferentiableError,
                                 PreconditionError)
from convexsmooth.kernels import h_value
from convexsmooth.verdict import Status

points_X = st.one_of(
    st.tuples(st.floats(-3, 3), st.floats(1e-6, 2.5)),
    st.tuples(st.floats(0, 3), st.just(0.0)),
)


# ---------------------------------------------------------------------------
# regions


def test_in_X_examples():
    assert in_X((0.0, 0.0))
    assert not in_X((-1.0, 0.0))
    assert in_X((-5.0, 0.1))
    assert not in_X((2.0, -1e-300))


def test_in_U_examples():
    assert h_value(1, -1.0, 0.0) == 0.0
    assert not in_U(1, (-1.0, 0.0))
    assert in_U(3, (0.0, 1.0))
    for k in range(1, 10):
        assert not in_U(k, (0.0, -1.0))


def test_regions_nest_and_contain_X():
    rng = np.random.default_rng(7)
    pts = np.column_stack([rng.uniform(-1.5, 1.5, 10_000), rng.uniform(-0.6, 0.6, 10_000)])
    pts[:2000, 1] = 0.0  # put a fifth of the samples on the axis
    member = np.array([h_value(k, pts[:, 0], pts[:, 1]) > 0 for k in range(1, 9)])
    # U_1 contains U_2 contains ...
    assert np.all(member[:-1] | ~member[1:])
    inX = np.array([in_X(p) for p in pts])
    assert np.all(member[:, inX])
    # the certified membership test agrees on a subsample
    for i in range(0, 10_000, 25):
        assert [in_U(k, pts[i]) for k in range(1, 9)] == member[:, i].tolist()


def test_limiting_index():
    assert limiting_index((0.0, 1.0), kmax=10) == 10
    assert limiting_index((-1.0, 0.0)) == 0
    # (-1/k', 0) lies in U_k exactly for k < k'
    assert limiting_index((-1.0 / 4, 0.0), kmax=10) == 3


# ---------------------------------------------------------------------------
# certified values


def test_f_eval_examples(table):
    v = f_eval((0.0, 3.0), 1e-3, table=table)
    assert v.lo == 0.0 and v.hi == 0.0
    v = f_eval((0.0, 0.0), 1e-8, table=table)
    assert v.lo > 0 and v.width <= 1e-8
    assert v.lo >= 1.0 / (2 * table[1]) * (1 - 1e-12)
    a = f_eval((1.0, 0.0), 1e-8, table=table)
    b = f_eval((7.0, 0.0), 1e-8, table=table)
    assert (a.lo, a.hi, a.M) == (b.lo, b.hi, b.M)


def test_f_eval_errors(table):
    with pytest.raises(DomainError):
        f_eval((-1.0, 0.0), table=table)
    with pytest.raises(CapabilityError):
        f_eval((0.5, 0.5), tol=0.0, table=table)


@settings(max_examples=40, deadline=None)
@given(points_X, st.integers(1, 12), st.integers(1, 12))
def test_enclosures_nest_as_truncation_grows(table, p, M1, M2):
    lo_M, hi_M = sorted((M1, M2))
    coarse = f_eval(p, M=lo_M, table=table)
    fine = f_eval(p, M=hi_M, table=table)
    assert coarse.lo <= fine.lo and fine.hi <= coarse.hi


@settings(max_examples=60, deadline=None)
@given(points_X)
def test_f_is_nonnegative(table, p):
    assert f_eval(p, 1e-6, table=table).hi >= 0
    assert f_eval(p, 1e-6, table=table).lo >= 0


@given(st.floats(-10, 10), st.floats(2.0, 50.0))
def test_f_vanishes_above_two(table, x, y):
    v = f_eval((x, y), table=table)
    assert v.lo == 0.0 and v.hi == 0.0


def test_f_partial_flat_example(table):
    v = f_partial((0.0, 3.0), (1, 1), table=table)
    assert v.lo == 0.0 and v.hi == 0.0


def test_f_partial_matches_finite_difference_of_f_eval(table):
    rng = np.random.default_rng(50)
    pts = np.column_stack([rng.uniform(-1.5, 1.5, 50), rng.uniform(0.05, 1.9, 50)])
    # truncation h^2 |f'''| / 6 ~ 1e-7, enclosure noise 1e-10 / h ~ 1e-6
    h = 1e-4
    for x, y in pts:
        def mid(q):
            v = f_eval(q, 1e-10, table=table)
            return 0.5 * (v.lo + v.hi)
        fx = (mid((x + h, y)) - mid((x - h, y))) / (2 * h)
        fy = (mid((x, y + h)) - mid((x, y - h))) / (2 * h)
        for alpha, fd in (((1, 0), fx), ((0, 1), fy)):
            v = f_partial((x, y), alpha, 1e-8, table=table)
            centre = 0.5 * (v.lo + v.hi)
            assert abs(centre - fd) <= 1e-5 * max(1.0, abs(fd)) + v.width, (x, y, alpha)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_f_partial_blowup_dominated_by_kth_term(table, k):
    ratios = []
    # the lower terms stay bounded, so domination sets in once y^(-1/2) outgrows them
    for y in (1e-8, 1e-14, 1e-20):
        v = f_partial((-1.0 / k, y), (0, k + 1), 1e-3, table=table)
        lead = blowup_closed_form(k, y) / (table[k] * 2 ** k)
        ratios.append(0.5 * (v.lo + v.hi) / lead)
    assert abs(ratios[-1] - 1) < abs(ratios[0] - 1) + 1e-12
    assert abs(ratios[-1] - 1) < 1e-2


def test_f_partial_requires_differentiability(table):
    # (-1/3, 0) is in U_2 but not U_3: order 4 must be refused
    with pytest.raises(NotDifferentiableError):
        f_partial((-1.0 / 3, 0.0), (0, 4), table=table)
    f_partial((-1.0 / 3, 0.0), (0, 3), 1e-6, table=table)
    with pytest.raises(DomainError):
        f_partial((0.0, 1.0), (-1, 0), table=table)


# ---------------------------------------------------------------------------
# blow-up and boundedness


def test_verify_blowup_examples():
    c = verify_blowup(1, [1e-4])
    assert c.values[0] == pytest.approx(75.0, rel=1e-9)
    c = verify_blowup(1, [0.25])
    assert c.values[0] == pytest.approx(1.5, rel=1e-9)
    c = verify_blowup(2, np.logspace(-2, -8, 7))
    assert abs(c.slope + 0.5) <= 0.02
    assert c.passed


@pytest.mark.parametrize("k", range(1, 6))
def test_blowup_closed_form_agreement(k):
    ys = np.logspace(-1, -9, 17)
    c = verify_blowup(k, ys)
    assert c.max_residual <= 1e-9
    assert c.monotone
    want = math.prod(k + 0.5 - i for i in range(k + 1)) * ys ** -0.5
    assert np.allclose(c.values, want, rtol=1e-9)


def test_verify_blowup_domain_errors():
    with pytest.raises(DomainError):
        verify_blowup(1, [0.5, 1.5])
    with pytest.raises(DomainError):
        verify_blowup(1, [0.1, 0.2])
    with pytest.raises(DomainError):
        verify_blowup(1, [])
    with pytest.raises(DomainError):
        verify_blowup(1, [0.0])


def test_ck_bounded_near_origin(table):
    cert = verify_ck_bounded(1, n=1000, radius=0.5, table=table)
    assert cert.bounded and cert.margin > 0
    assert cert.passed
    assert all(cert.observed[a] <= cert.bound[a] for a in cert.bound)


def test_ck_contrast_grows(table):
    sweep = contrast_sweep(1, table=table)
    assert sweep["growing"] and sweep["monotone"]


def test_ck_rejects_points_outside_region(table):
    with pytest.raises(DomainError):
        verify_ck_bounded(2, samples=[(-1.0, 0.0)], table=table, contrast=False)
    assert all(in_U(2, q) for q in origin_samples(2, 200, seed=3))


def test_float_partial_sums_are_vectorised(table):
    xs = np.array([0.1, 0.5, 2.0])
    ys = np.array([0.3, 0.0, 0.7])
    P = f_partials_float(xs, ys, 2, table)
    for i in range(3):
        single = f_partials_float(xs[i], ys[i], 2, table)
        assert all(single[a] == P[a][i] for a in P)


# ---------------------------------------------------------------------------
# plots into X


class Plot:
    def __init__(self, fx, fy):
        self.fx, self.fy = fx, fy

    def __call__(self, ts):
        return self.fx(ts), self.fy(ts)


def test_plot_above_axis_passes(table):
    plot = Plot(lambda t: t, lambda t: 1 + t * t)
    assert plot_composition_check(plot, 4, table=table).status == Status.PASSED
    # order 5 needs multiprecision: double rounding swamps the fifth difference
    v = plot_composition_check(plot, 5, table=table, precision="mp")
    assert v.status == Status.PASSED
    assert v.details["max_residual"] <= 1e-4


def test_parabola_through_origin_passes(table):
    params = np.concatenate([np.linspace(-0.9, 0.9, 7), [0.0]])
    v = plot_composition_check(Plot(lambda t: t, lambda t: t * t), 4, params, table=table)
    assert v.status == Status.PASSED


def test_constant_plot_has_zero_derivatives(table):
    v = plot_composition_check(Plot(lambda t: np.ones_like(t), lambda t: np.zeros_like(t)), 3,
                               table=table)
    assert v.status == Status.PASSED
    assert all(d == 0.0 for d in v.details["derivatives"].values())


def test_plot_escaping_X_is_rejected(table):
    with pytest.raises(PreconditionError) as info:
        plot_composition_check(Plot(lambda t: t, lambda t: -t), 2, table=table)
    assert info.value.witness is not None
    assert not in_X(info.value.witness)
