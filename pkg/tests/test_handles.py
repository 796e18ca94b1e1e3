import json
from fractions import Fraction

import numpy as np
import pytest

from convexsmooth.errors import DomainError
from convexsmooth.structures.descriptors import (halfspace, open_interval, region_X,
                                                 square_pyramid, unit_interval)
from convexsmooth.structures.handles import (E, Ch, Ch_membership, Di, Di_membership,
                                             Phi_membership, Pi_membership, ProbeFamily, anchors,
                                             default_generators, exhaustion_membership,
                                             handle_from_dict, handle_to_dict,
                                             nonstandard_interval, standard_chen,
                                             standard_diffeology, subspace_structure)
from convexsmooth.structures.symbolic import SymbolicMap, const, coord, coords, fnode, phi, s, step
from convexsmooth.verdict import Status

t = coord(0)
x, y = coords(2)
I = unit_interval()
HALF = Fraction(1, 2)


def on_I(e):
    return SymbolicMap.of(e, domain=I)


# ---------------------------------------------------------------------------
# Phi and Pi


def test_f_is_diffeologically_smooth_on_generators():
    D = standard_diffeology(region_X())
    names = {g.name for g in D.generators}
    assert {"(t, 1+t^2)", "(t, t^2)"} <= names
    assert any(g.is_constant() for g in D.generators)
    v = Phi_membership(SymbolicMap.of(fnode(x, y), n_in=2), D)
    assert v.status == Status.PASSED


def test_indicator_of_half_of_X_is_not_smooth():
    v = Phi_membership(SymbolicMap.of(step(x), n_in=2), standard_diffeology(region_X()))
    assert v.status == Status.FAILED
    assert v.replay_check()


def test_constant_function_is_proven():
    v = Phi_membership(SymbolicMap.of(const(7), n_in=2), standard_diffeology(region_X()))
    assert v.is_proven


def test_pi_examples():
    assert Pi_membership(SymbolicMap.of(t, t * t), subspace_structure(region_X())).ok
    ident = SymbolicMap.of(t, domain=open_interval(0, 1))
    assert Pi_membership(ident, subspace_structure(I)).is_proven
    upper = halfspace((0, -1), 0, True, "upper")
    v = Pi_membership(SymbolicMap.of(phi(1, t), const(1)), subspace_structure(upper))
    assert v.status == Status.FAILED and v.witness["order"] == 2


# ---------------------------------------------------------------------------
# Di, Ch and the exhaustion


def test_di_examples():
    dom = open_interval(0, 1)
    assert Di_membership(SymbolicMap.of(s(t), domain=dom), standard_chen(I)).ok
    assert Di_membership(SymbolicMap.of(t, domain=dom), nonstandard_interval()).ok
    for C in (standard_chen(I), nonstandard_interval()):
        assert Di_membership(SymbolicMap.of(const(HALF)), C).is_proven


def test_ch_examples():
    D = standard_diffeology(I)
    assert Ch_membership(on_I(t), D).ok
    v = Ch_membership(on_I(step(t - HALF)), D)
    assert v.status == Status.FAILED
    assert "probe" in v.witness


def test_exhaustion_examples():
    N = nonstandard_interval()
    assert N.member(on_I(t)).is_failed
    assert exhaustion_membership(on_I(t), N).ok
    assert exhaustion_membership(on_I(s(t)), N).ok
    assert exhaustion_membership(on_I(const(0)), N).ok
    # a plot already in the structure stays in its exhaustion
    q = on_I(3 * t * t - 2 * t ** 3)
    assert N.member(q).ok and E(N).member(q).ok


def test_diffeology_plots_need_open_domains():
    with pytest.raises(DomainError):
        standard_diffeology(I).member(on_I(t))


def test_functor_handles_delegate():
    C = standard_chen(I)
    DC = Di(C)
    assert DC.kind == "transformed" and DC.underlying == I
    assert Ch(DC).underlying == I
    assert E(C).kind == "exhaustion"


# ---------------------------------------------------------------------------
# probes and generators


def test_probe_family_shapes():
    P = ProbeFamily()
    opens = P.open_probes(I)
    convex = P.convex_probes(I)
    assert all(p.domain.is_open() for p in opens)
    assert any(p.name == "identity" for p in convex)
    assert not any(p.name == "identity" for p in opens)
    ts = np.linspace(0.0, 1.0, 101).reshape(-1, 1)
    for p in convex:
        if p.n_in == 1:
            assert I.contains_many(p.value(ts), slack=1e-12).all(), p.name
    back = ProbeFamily.from_dict(json.loads(json.dumps(P.to_dict())))
    assert back == P
    assert len(ProbeFamily(kinds=("affine",)).open_probes(I)) < len(opens)


def test_generators_land_in_the_set():
    for S in (region_X(), square_pyramid(), I):
        A = anchors(S, 3)
        assert S.contains_many(A).all()
        for g in default_generators(S):
            if g.is_constant():
                assert S.contains(g.value(np.zeros((1, 1)))[0])


@pytest.mark.parametrize("make", [
    lambda: standard_diffeology(region_X()),
    lambda: subspace_structure(region_X()),
    lambda: standard_chen(I),
    nonstandard_interval,
    lambda: E(nonstandard_interval()),
    lambda: Di(standard_chen(I)),
    lambda: Ch(standard_diffeology(region_X())),
])
def test_handle_dict_round_trip(make):
    H = make()
    d = json.loads(json.dumps(handle_to_dict(H)))
    back = handle_from_dict(d)
    assert handle_to_dict(back) == d
    assert type(back) is type(H) and back.kind == H.kind


def test_round_tripped_handle_gives_same_verdicts():
    N = E(nonstandard_interval())
    back = handle_from_dict(handle_to_dict(N))
    for q in (on_I(t), on_I(step(t - HALF)), on_I(t * t)):
        assert back.member(q).status == N.member(q).status
