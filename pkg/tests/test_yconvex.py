import random

import pytest

from effgap.core import VoteCounts, district_effgap, total_effgap
from effgap.grid import (
    enumerate_equipartitions,
    partition_vote_totals,
    validate_partition,
    _connected,
)
from effgap.yconvex import (
    ColumnSegmentation,
    DPState,
    LabelState,
    ACTIVE,
    FINISHED,
    UNSTARTED,
    enumerate_segmentations,
    is_yconvex_partition,
    solve_yconvex,
    transition_feasible,
)
from conftest import polygon, random_column_polygon, uniform_rect


def test_segmentations_two_cells_two_labels():
    p = uniform_rect(2, 1)
    segs = enumerate_segmentations(p, 0, 2)
    assert len(segs) == 4
    shapes = {tuple(s.segments) for s in segs}
    assert ((1, (0, 1)),) in shapes and ((2, (0, 1)),) in shapes
    assert ((1, (0, 0)), (2, (1, 1))) in shapes and ((2, (0, 0)), (1, (1, 1))) in shapes


def test_segmentations_one_cell_three_labels():
    p = uniform_rect(1, 1)
    assert len(enumerate_segmentations(p, 0, 3)) == 3


def test_segmentations_empty_column():
    p = polygon({(0, 0): (1, 0)}, rows=1, cols=2)
    segs = enumerate_segmentations(p, 1, 2)
    assert segs == [ColumnSegmentation(1, ())]


def test_segmentations_reject_multi_run_column():
    p = polygon({(0, 0): (1, 0), (2, 0): (1, 0), (0, 1): (1, 0), (1, 1): (1, 0), (2, 1): (1, 0)})
    with pytest.raises(ValueError, match="not y-convex-compatible"):
        enumerate_segmentations(p, 0, 2)


def _state(column, entries):
    return DPState(column, tuple(LabelState(*e) for e in entries))


def test_transition_overlap_ok():
    p = uniform_rect(3, 2)
    prev = _state(0, [(1, 1, ACTIVE, (0, 1)), (1, 0, ACTIVE, (2, 2))])
    seg = ColumnSegmentation(1, ((1, (1, 2)),))
    res = transition_feasible(p, prev, seg)
    # Label 1 overlaps at row 1; label 2 goes inactive and is finished.
    assert res.ok
    assert res.state.labels[0].status == ACTIVE
    assert res.state.labels[1].status == FINISHED


def test_transition_no_overlap_rejected_and_truly_disconnected():
    p = uniform_rect(3, 2)
    prev = _state(0, [(1, 0, ACTIVE, (0, 0)), (0, 0, UNSTARTED, None)])
    seg = ColumnSegmentation(1, ((1, (2, 2)),))
    res = transition_feasible(p, prev, seg)
    assert not res.ok and "no overlap" in res.reason
    # Independent connectivity check: those two cells really are disconnected.
    assert not _connected({(0, 0), (2, 1)})


def test_transition_reactivation_rejected():
    p = uniform_rect(3, 3)
    prev = _state(1, [(2, 0, FINISHED, None), (1, 0, ACTIVE, (0, 2))])
    seg = ColumnSegmentation(2, ((1, (0, 0)), (2, (1, 2))))
    res = transition_feasible(p, prev, seg)
    assert not res.ok and "reactivated" in res.reason


def test_transition_accumulates_votes():
    p = polygon({(0, 0): (1, 0), (0, 1): (2, 1), (1, 1): (0, 3)})
    prev = _state(0, [(1, 0, ACTIVE, (0, 0)), (0, 0, UNSTARTED, None)])
    seg = ColumnSegmentation(1, ((1, (0, 0)), (2, (1, 1))))
    res = transition_feasible(p, prev, seg)
    assert res.ok
    assert res.state.labels[0] == LabelState(3, 1, ACTIVE, (0, 0))
    assert res.state.labels[1] == LabelState(0, 3, ACTIVE, (1, 1))


def test_solve_2x2_row_split():
    p = polygon({(0, 0): (1, 0), (0, 1): (1, 0), (1, 0): (0, 1), (1, 1): (0, 1)})
    res = solve_yconvex(p, 2)
    assert res.feasible and res.value == 0
    assert validate_partition(p, res.partition, 2).ok
    assert is_yconvex_partition(res.partition)


def test_solve_1x4_row():
    p = polygon({(0, 0): (1, 0), (0, 1): (1, 0), (0, 2): (0, 1), (0, 3): (0, 1)})
    # Three y-convex splits by hand: after column 1, 2, or 3; the middle
    # split cancels exactly.
    values = []
    for cut in (1, 2, 3):
        left = VoteCounts(min(cut, 2), max(0, cut - 2))
        right = VoteCounts(2 - left.party_a, 2 - left.party_b)
        values.append(abs(district_effgap(left) + district_effgap(right)))
    assert min(values) == 0
    res = solve_yconvex(p, 2)
    assert res.value == 0


def test_solve_kappa_one():
    p = uniform_rect(2, 2, pop=3, a_cells=[(0, 0)])
    res = solve_yconvex(p, 1)
    assert res.feasible
    assert res.value == abs(district_effgap(p.total_votes()))


def test_solve_infeasible_population():
    p = polygon({(0, 0): (0, 1), (0, 1): (0, 2)})
    assert not solve_yconvex(p, 2).feasible


def test_state_count_bound():
    rng = random.Random(11)
    for _ in range(10):
        p = random_column_polygon(rng, max_cells=10)
        kappa = rng.choice([2, 3])
        res = solve_yconvex(p, kappa)
        pop = p.total_votes().population()
        assert res.max_vote_vectors <= (pop + 1) ** (2 * kappa)


def test_agrees_with_oracle_restricted_to_yconvex():
    rng = random.Random(12)
    feasible = 0
    for i in range(60):
        uniform = i % 2 == 0
        p = random_column_polygon(rng, max_cells=10, uniform=uniform)
        kappa = rng.choice([2, 3])
        res = solve_yconvex(p, kappa)
        best = None
        for q in enumerate_equipartitions(p, kappa):
            if is_yconvex_partition(q):
                stats = total_effgap(partition_vote_totals(p, q, kappa))
                v = stats.total_scaled_abs
                best = v if best is None else min(best, v)
        assert (best is None) == (not res.feasible)
        if best is not None:
            feasible += 1
            assert res.value == best
            assert validate_partition(p, res.partition, kappa).ok
            assert is_yconvex_partition(res.partition)
    assert feasible >= 5


def test_deterministic_witness():
    p = uniform_rect(3, 3)
    a = solve_yconvex(p, 3)
    b = solve_yconvex(p, 3)
    assert a.value == b.value
    assert dict(a.partition.labels) == dict(b.partition.labels)
