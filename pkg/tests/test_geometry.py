import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kcmlab.errors import BadPlacement, DegenerateAnnulus, NotAdmissible, NotTypeI, SizeCap
from kcmlab.family.directions import Direction
from kcmlab.family.family import zoo
from kcmlab.family.quasistable import quasi_stable_set
from kcmlab.geometry.annulus import AnnulusSpec, annulus_sets, build_annulus
from kcmlab.geometry.bisection import bisect_snail, bisection_identities, type_i_violations
from kcmlab.geometry.events import end_margin, has_run, spanning_preconditions, spans, verify_supergood_spans
from kcmlab.geometry.halfplane import HalfPlane, lattice_points, rho
from kcmlab.geometry.snail import RIGHT, SnailSpec, build_snail
from kcmlab.geometry.strip import HelpingSets, WConsecutive, default_placements, verify_strip_lemma
from kcmlab.geometry.tokens import east_min_tokens

from geometry_cases import DESK, LONG, U0, constructive_witness, desk, random_type_i_cases, regions_for
from oracles import bottleneck_tokens, halfplane_member

E1, E2 = Direction(1, 0), Direction(0, 1)


# ---------------------------------------------------------------- rho / half-planes

def test_rho_examples():
    assert rho(E1).norm2 == 1 and rho(E1).value == 1.0
    assert rho(Direction(1, 1)).norm2 == 2
    assert rho(Direction(2, 1)).norm2 == 5


def _brute_points(hps, bound):
    return frozenset((x, y) for x in range(-bound, bound + 1) for y in range(-bound, bound + 1)
                     if all(halfplane_member(h, x, y) for h in hps))


hp_st = st.builds(
    lambda v, c, r, n, strict: HalfPlane.of(v, Fraction(c), Fraction(r), n, strict),
    st.sampled_from([(1, 0), (0, 1), (-1, 0), (0, -1), (1, 1), (-1, 1), (2, 1), (-1, -2), (1, -1)]),
    st.integers(-3, 8), st.integers(-3, 3), st.sampled_from([1, 2, 5]), st.booleans(),
)


@settings(max_examples=150, deadline=None)
@given(st.lists(hp_st, min_size=1, max_size=4))
def test_rasterization_matches_exact_membership(extra):
    box = [HalfPlane.of(v, 12) for v in [(1, 0), (0, 1), (-1, 0), (0, -1)]]
    hps = box + extra
    assert lattice_points(hps) == _brute_points(hps, 12)


@settings(max_examples=100, deadline=None)
@given(st.lists(hp_st, min_size=1, max_size=4))
def test_doubled_lattice_consistency(extra):
    box = [HalfPlane.of(v, 12) for v in [(1, 0), (0, 1), (-1, 0), (0, -1)]]
    hps = box + extra
    doubled = [HalfPlane(h.a, h.b, 2 * h.c, 2 * h.r, h.n, h.strict) for h in hps]
    pts, big = lattice_points(hps), lattice_points(doubled)
    assert {(2 * x, 2 * y) for x, y in pts} <= big
    assert {(x // 2, y // 2) for x, y in big if x % 2 == 0 and y % 2 == 0} == pts


# ------------------------------------------------------------------ annulus

def test_square_frame(two_neighbour):
    qs = quasi_stable_set(two_neighbour, U0)
    sets = annulus_sets(AnnulusSpec(qs, Fraction(10), 2))
    assert sets.outer == {(x, y) for x in range(-10, 11) for y in range(-10, 11)}
    assert sets.A == {p for p in sets.outer if max(abs(p[0]), abs(p[1])) >= 8}
    assert len(sets.A) == 441 - 225


def test_degenerate_annulus(two_neighbour):
    qs = quasi_stable_set(two_neighbour, U0)
    with pytest.raises(DegenerateAnnulus):
        build_annulus(AnnulusSpec(qs, Fraction(3), 3))


def test_unbalanced_annulus_partition(unbalanced):
    qs = quasi_stable_set(unbalanced, U0)
    sets = annulus_sets(AnnulusSpec(qs, Fraction(12), 3))
    assert not (sets.A & sets.A_int)
    assert sets.A | sets.A_int == sets.outer


@pytest.mark.parametrize("R,w", [(7, 2), (10, 3), (Fraction(23, 2), 4)])
def test_annulus_width_is_euclidean_on_eight_directions(R, w):
    from kcmlab.family.quasistable import QuasiStableSet
    qs = QuasiStableSet.from_directions([E1, Direction(1, 1)], U0)
    sets = annulus_sets(AnnulusSpec(qs, Fraction(R), w))
    for x, y in sets.outer:
        inner = all(qs.u(i).dot((x, y)) < math.isqrt(int(R * R * qs.u(i).norm2)) - w * math.sqrt(qs.u(i).norm2)
                    for i in range(len(qs)))
        assert ((x, y) in sets.A_int) == inner


# -------------------------------------------------------------------- snail

def _spec(fam, R, L, rbar, w=4, delta=Fraction(1, 5), side="Both"):
    return SnailSpec.from_reals(quasi_stable_set(fam, U0), R, L, rbar, delta, w, side)


def test_base_only_snail(two_neighbour):
    reg = build_snail(_spec(two_neighbour, 8, 40, (0, 0, 0)))
    assert reg.V == reg.B
    assert all(not t for t in reg.T.values())
    assert reg.partition_ok()


def test_trapezoid_slices(two_neighbour):
    spec = _spec(two_neighbour, 8, 40, (8, 0, 0))
    reg = build_snail(spec)
    T = reg.T[(0, "+")]
    assert T and len(reg.T_slices[(0, "+")]) == spec.s[0] == 8
    seen = [p for s in reg.T_slices[(0, "+")] for p in s.sites]
    assert len(seen) == len(set(seen)) and set(seen) == T
    assert reg.partition_ok() and reg.slice_partition_ok()


def test_admissibility(two_neighbour):
    with pytest.raises(NotAdmissible):
        build_snail(_spec(two_neighbour, 8, 40, (5, 2, 0)))
    with pytest.raises(NotAdmissible):
        build_snail(_spec(two_neighbour, 8, 40, (9, 0, 0)))
    assert _spec(two_neighbour, 8, 40, (5, 1, 0)).violations() == []


snail_st = st.tuples(
    st.sampled_from(["two_neighbour", "unbalanced_rooted"]),
    st.integers(6, 10),
    st.integers(20, 70),
    st.floats(0, 1),
    st.floats(0, 1),
    st.sampled_from(["Both", "Right", "Left"]),
)


@settings(max_examples=25, deadline=None)
@given(snail_st)
def test_snail_partitions(case):
    name, R, L, a, b, side = case
    r0 = int(a * L / 5)
    r1 = int(b * r0 / 5)
    spec = _spec(zoo(name), R, L, (r0, r1, 0), side=side)
    if spec.violations():
        return
    reg = build_snail(spec)
    assert reg.partition_ok()
    assert reg.slice_partition_ok()
    for sl in (s for v in reg.T_slices.values() for s in v):
        assert list(sl.positions) == list(range(sl.positions[0], sl.positions[0] + len(sl.positions)))


def test_eight_direction_snail_partitions():
    from kcmlab.family.quasistable import QuasiStableSet
    qs = QuasiStableSet.from_directions([E1, Direction(1, 1)], U0)
    spec = SnailSpec.from_reals(qs, 10, 60, (10, 2, 0, 0, 0), Fraction(1, 5), 3)
    assert spec.violations() == []
    reg = build_snail(spec)
    assert reg.partition_ok() and reg.slice_partition_ok()


# ------------------------------------------------------------------- events

@pytest.mark.parametrize("name", ["two_neighbour", "unbalanced_rooted"])
def test_event_extremes(name):
    fam, reg, checker = desk(name)
    full = checker.evaluate(np.ones(len(checker.sites), bool))
    assert all(full.events.values()) and full.sg
    empty = checker.evaluate(np.zeros(len(checker.sites), bool))
    assert not empty.sg and empty.first_failure == "A"


@pytest.mark.parametrize("name", ["two_neighbour", "unbalanced_rooted"])
def test_constructive_witness_is_supergood_and_spans(name):
    fam, reg, checker = desk(name, LONG)
    x = constructive_witness(checker)
    assert checker.evaluate(x).sg
    assert x.sum() < len(x)
    assert verify_supergood_spans(checker.configuration(x), reg, fam, checker=checker)


def test_witness_without_trapezoid_run(two_neighbour):
    fam, reg, checker = desk("two_neighbour", LONG)
    x = constructive_witness(checker)
    name, key, idx = checker.st[-1]
    x[idx] = False
    rep = checker.evaluate(x)
    assert rep.aggregates["SG(B)"] and not rep.sg and rep.first_failure == name
    with pytest.raises(ValueError, match="not super good"):
        verify_supergood_spans(checker.configuration(x), reg, fam, checker=checker)
    assert spans(checker.configuration(x), reg, fam) is False


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.3, 0.95))
def test_events_are_decreasing(seed, p):
    _, _, checker = desk("unbalanced_rooted")
    rng = np.random.default_rng(seed)
    x = rng.random(len(checker.sites)) < p
    y = x | (rng.random(len(x)) < 0.2)
    a, b = checker.evaluate(x), checker.evaluate(y)
    for k, v in a.events.items():
        assert not v or b.events[k]
    for k, v in a.aggregates.items():
        assert not v or b.aggregates[k]


def test_has_run_and_margin():
    assert has_run(np.array([0, 1, 1, 1, 0], bool), 3)
    assert not has_run(np.array([1, 1, 0, 1, 1], bool), 3)
    assert end_margin(4, E1) == 4 and end_margin(4, Direction(1, 1)) == 3


def test_preconditions_reported():
    _, reg, _ = desk("two_neighbour")
    assert spanning_preconditions(reg) == []
    _, short, _ = regions_for("two_neighbour", 8, 20, (4, 0, 0), Fraction(1, 5), 5)
    msgs = spanning_preconditions(short)
    assert msgs and all("< w^2 = 25" in m for m in msgs)


# -------------------------------------------------------------------- strip

def test_strip_examples(two_neighbour, unbalanced):
    qs = quasi_stable_set(two_neighbour, U0)
    assert verify_strip_lemma(qs.index(E2), 3, 16, WConsecutive(), two_neighbour, qs)
    qf = quasi_stable_set(unbalanced, U0)
    i = qf.index(E1)
    Z = ((0, 0),)
    anchors = default_placements(qf, i, 4, 25, Z, 3, gap=1)
    assert verify_strip_lemma(i, 4, 25, HelpingSets(anchors, Z), unbalanced, qf)
    assert not verify_strip_lemma(i, 4, 25, HelpingSets(()), unbalanced, qf)


def test_strip_errors(two_neighbour):
    qs = quasi_stable_set(two_neighbour, U0)
    with pytest.raises(ValueError):
        verify_strip_lemma(0, 4, 10, WConsecutive(), two_neighbour, qs)
    with pytest.raises(BadPlacement):
        verify_strip_lemma(0, 3, 16, WConsecutive(position=10_000), two_neighbour, qs)
    with pytest.raises(BadPlacement):
        verify_strip_lemma(0, 3, 16, HelpingSets(((50, 50),)), two_neighbour, qs)


# ---------------------------------------------------------------- bisection

def test_bisection_unbalanced_type0(unbalanced):
    qs = quasi_stable_set(unbalanced, U0)
    ref = SnailSpec(qs, 8, 60, (12, 2, 0), side=RIGHT)
    hat = ref.with_s((12, 0, 0))
    b = bisect_snail(hat, ref, 0)
    assert b.tilde.s[0] == 6
    assert bisection_identities(hat, b, 0) == (True, True)
    assert type_i_violations(b.tilde, ref, 0) == [] and type_i_violations(b.bar, ref, 0) == []


def test_bisection_rejects_non_type_i(unbalanced):
    qs = quasi_stable_set(unbalanced, U0)
    ref = SnailSpec(qs, 8, 60, (12, 2, 0), side=RIGHT)
    with pytest.raises(NotTypeI):
        bisect_snail(ref, ref, 0)


@pytest.mark.parametrize("case", range(20))
def test_bisection_random_specs(case):
    hat, ref, i = random_type_i_cases(20)[case]
    assert type_i_violations(hat, ref, i) == []
    b = bisect_snail(hat, ref, i)
    assert bisection_identities(hat, b, i) == (True, True)
    assert type_i_violations(b.tilde, ref, i) == []
    assert type_i_violations(b.bar, ref, i) == []


# ------------------------------------------------------------------- tokens

TOKENS = [1, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4, 4, 5]  # n = 1..16, exhaustive search


def test_token_fixture_matches_bottleneck_oracle():
    got = [east_min_tokens(n) for n in range(1, 17)]
    assert got == TOKENS
    assert got == [bottleneck_tokens(n) for n in range(1, 17)]


def test_token_properties():
    f = {n: east_min_tokens(n) for n in range(1, 17)}
    assert f[1] == 1 and f[2] == 2
    assert all(f[n] <= f[n + 1] for n in range(1, 16))
    assert all(f[2 * n] <= f[n] + 1 for n in range(1, 9))
    band = [f[n] - math.log2(n) for n in f]
    assert 0 < min(band) and max(band) <= 1


def test_token_cap():
    with pytest.raises(SizeCap):
        east_min_tokens(25)
    with pytest.raises(ValueError):
        east_min_tokens(0)
