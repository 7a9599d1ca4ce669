import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vckit import (
    DomainError,
    Partition,
    SetFamily,
    approximate,
    boundary_profile,
    join,
    make_counterexample,
    pi_boundary,
    vc_dimension,
)

from util import disjoint_family, random_family, uniform_ground


# ---------------------------------------------------------------------------
# pi_boundary
# ---------------------------------------------------------------------------

def test_singleton_partition_has_empty_boundaries():
    g = uniform_ground(5)
    part = Partition.singletons(g)
    for ids in (["p0"], ["p1", "p3"], g.points):
        assert not pi_boundary(ids, part).any()


def test_trivial_partition_boundary_is_everything():
    g = uniform_ground(4)
    part = Partition.trivial(g)
    mask = pi_boundary(["p0", "p2"], part)
    assert mask.all()
    assert g.measure(mask) == 1.0


def test_zero_weight_cells_never_enter_a_boundary():
    g = SetFamily  # noqa: F841 - just making the intent obvious below
    ground = Partition.trivial  # noqa: F841
    gs = np.array([0.5, 0.5, 0.0])
    from vckit import GroundSpace

    g = GroundSpace(("a", "b", "z"), gs)
    part = Partition.from_cells(g, {"ab": ["a", "b"], "z": ["z"]})
    # member meets cell "z" and its complement, but with zero mass
    mask = pi_boundary(["a", "z"], part)
    assert g.ids(mask) == ("a", "b")


def test_counterexample_boundary_is_the_tail():
    ce = make_counterexample(8)
    for n in range(1, 8):
        part = join(ce.family, range(n))
        mask = pi_boundary(ce.family.member_mask(n), part)
        assert np.array_equal(mask, ce.tail_mask(n))
        assert ce.ground.measure(mask) == 1.0 - ce.partial_sums[n]


# ---------------------------------------------------------------------------
# boundary_profile
# ---------------------------------------------------------------------------

def test_profile_of_empty_and_full_sets_is_zero():
    g = uniform_ground(4)
    fam = SetFamily.from_members(g, {"empty": [], "X": g.points})
    prof = boundary_profile(fam, Partition.trivial(g))
    assert prof.sup == 0.0
    assert list(prof.measures) == [0.0, 0.0]


def test_profile_on_counterexample_matches_partial_sums_exactly():
    ce = make_counterexample(12)
    for n in range(1, 12):
        prof = boundary_profile(ce.family, join(ce.family, range(n)))
        assert prof.measures[n] == 1.0 - ce.partial_sums[n]
        assert prof.sup == 1.0 - ce.partial_sums[n]
        assert prof.sup > 0.5
        assert prof.argmax == n  # first unjoined member attains the sup


def test_profile_of_independent_pair_under_own_join_is_pure():
    g = uniform_ground(4)
    fam = SetFamily.from_members(g, {"A": ["p0", "p1"], "B": ["p0", "p2"]})
    prof = boundary_profile(fam, join(fam, [0, 1]))
    assert prof.sup == 0.0


def test_profile_witness_is_first_argmax():
    g = uniform_ground(4)
    fam = SetFamily.from_members(g, {"A": ["p0", "p1"], "B": ["p2", "p3"]})
    prof = boundary_profile(fam, Partition.trivial(g))
    assert prof.sup == 1.0
    assert prof.witness == "A"


# ---------------------------------------------------------------------------
# approximate
# ---------------------------------------------------------------------------

def test_greedy_purifies_disjoint_family():
    g = uniform_ground(7)
    fam = disjoint_family(g, [2, 2, 2])
    result = approximate(fam, 0.01, "greedy")
    assert result.success
    assert result.achieved_sup == 0.0
    assert result.partition.num_cells <= len(fam) + 1


def test_join_prefix_fails_on_counterexample_within_depth_cells():
    # With a cell budget of depth, the prefix join can never reach the final
    # purifying step; every recorded sup is the tail mass 1 - s_t > 1/2.
    ce = make_counterexample(12)
    result = approximate(ce.family, 0.4, "join-prefix", max_cells=12)
    assert not result.success
    assert result.failure_reason == "cell-budget"
    sups = [s.sup_after for s in result.trace]
    assert len(sups) == 11
    assert all(s > 0.5 for s in sups)
    assert sups == [1.0 - ce.partial_sums[t] for t in range(1, 12)]
    assert vc_dimension(ce.family) == 1


def test_join_prefix_with_room_purifies_the_finite_truncation():
    # The finite instance differs from the infinite construction here: once
    # every member is joined the family is pure, so an unrestricted budget
    # always ends in success at the last step.
    ce = make_counterexample(12)
    result = approximate(ce.family, 0.4, "join-prefix")
    assert result.success
    assert len(result.trace) == 12
    assert result.achieved_sup == 0.0


def test_greedy_succeeds_on_counterexample():
    ce = make_counterexample(12)
    result = approximate(ce.family, 0.4, "greedy")
    assert result.success
    assert result.achieved_sup == 0.0
    assert result.partition.num_cells == 13


def test_epsilon_at_least_one_succeeds_trivially():
    g = uniform_ground(3)
    fam = SetFamily.from_members(g, {"A": ["p0"]})
    result = approximate(fam, 1.0, "join-prefix")
    assert result.success
    assert result.partition.num_cells == 1
    assert result.trace == ()


def test_approximate_validates_inputs():
    g = uniform_ground(3)
    fam = SetFamily.from_members(g, {"A": ["p0"]})
    with pytest.raises(DomainError):
        approximate(fam, 0.0)
    with pytest.raises(DomainError):
        approximate(fam, 0.5, "greedy", max_cells=1)
    with pytest.raises(DomainError):
        approximate(fam, 0.5, "annealing")


def test_budget_failure_is_a_result_not_an_exception():
    g = uniform_ground(6)
    fam = disjoint_family(g, [1, 1, 1, 1, 1])
    result = approximate(fam, 0.05, "greedy", max_cells=3)
    assert not result.success
    assert result.failure_reason == "cell-budget"
    assert result.achieved_sup > 0.05


def test_trace_sups_match_recomputed_profiles():
    rng = np.random.default_rng(7)
    for _ in range(20):
        fam = random_family(rng, max_points=6, max_members=6)
        result = approximate(fam, 0.15, "greedy")
        joined = []
        for step in result.trace:
            joined.append(step.joined_index)
            prof = boundary_profile(fam, join(fam, sorted(joined)))
            assert step.sup_after == prof.sup
        final = boundary_profile(fam, result.partition)
        assert result.achieved_sup == final.sup
        assert result.success == (result.achieved_sup <= 0.15)


def test_greedy_with_full_budget_reaches_zero():
    rng = np.random.default_rng(99)
    for _ in range(10):
        fam = random_family(rng, max_points=6, max_members=5)
        result = approximate(fam, 1e-12, "greedy")
        assert result.success
        assert result.achieved_sup == 0.0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_refinement_never_increases_boundaries(seed):
    rng = np.random.default_rng(seed)
    fam = random_family(rng, max_points=7, max_members=8)
    m = len(fam)
    k_coarse = int(rng.integers(0, m))
    order = list(rng.permutation(m))
    coarse_idx = sorted(order[:k_coarse])
    fine_idx = sorted(order[: min(m, k_coarse + int(rng.integers(1, 3)))])
    coarse = boundary_profile(fam, join(fam, coarse_idx))
    fine = boundary_profile(fam, join(fam, fine_idx))
    assert np.all(fine.measures <= coarse.measures + 1e-12)


# ---------------------------------------------------------------------------
# make_counterexample
# ---------------------------------------------------------------------------

def test_counterexample_depth_one_defaults():
    ce = make_counterexample(1)
    assert list(ce.ground.weights) == [0.25, 0.75]
    assert ce.family.members() == {"C1": ("c1",)}


def test_counterexample_depth_three_partial_sums():
    ce = make_counterexample(3)
    assert ce.partial_sums[3] == 0.4375
    assert list(ce.ground.weights) == [0.25, 0.125, 0.0625, 0.5625]


def test_counterexample_vc_dimension_is_one():
    for depth in (2, 4, 9, 12):
        assert vc_dimension(make_counterexample(depth).family) == 1
    # a single proper set realizes only one trace on any point
    assert vc_dimension(make_counterexample(1).family) == 0


def test_counterexample_custom_masses():
    ce = make_counterexample(2, [0.3, 0.4])
    assert list(ce.ground.weights) == [0.3, 0.4, pytest.approx(0.3)]
    with pytest.raises(DomainError):
        make_counterexample(2, [0.5, 0.5])
    with pytest.raises(DomainError):
        make_counterexample(2, [0.5, -0.1])
    with pytest.raises(DomainError):
        make_counterexample(0)
