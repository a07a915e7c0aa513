import random
from fractions import Fraction
from itertools import combinations

import pytest

from effgap.canonical import (
    CanonicalPlanError,
    build_decomposition,
    build_reach_table,
    solve_canonical,
    solve_case1,
    solve_two_near_stable,
)
from effgap.core import VoteCounts, district_effgap
from effgap.grid import validate_partition, _connected
from conftest import polygon, uniform_rect


def test_9x9_t3_nine_blocks_tree_connected():
    d = build_decomposition(uniform_rect(9, 9), 3)
    assert len(d.rects) == 9
    assert _connected(set(d.tree))
    # The spine touches every block.
    for rect in d.rects:
        assert any(cell in d.tree for cell in rect.cells())


def test_degenerate_single_block_is_ring_minus_one():
    d = build_decomposition(uniform_rect(4, 4), 4)
    assert len(d.rects) == 1
    ring = {(r, c) for r in range(4) for c in range(4) if r in (0, 3) or c in (0, 3)}
    assert set(d.tree) == ring - {(1, 3)}


def test_32x32_t10_matches_published_structure():
    d = build_decomposition(uniform_rect(32, 32), 10)
    assert len(d.rects) == 9
    assert _connected(set(d.tree))
    assert all(interior for interior in d.interiors)


def test_interiors_are_two_away_from_tree():
    d = build_decomposition(uniform_rect(10, 10), 5)
    for interior in d.interiors:
        for (r, c) in interior:
            for (tr, tc) in d.tree:
                assert max(abs(r - tr), abs(c - tc)) >= 2


def test_non_rectangle_rejected():
    p = polygon({(0, 0): (1, 0), (0, 1): (1, 0), (1, 0): (1, 0)})
    with pytest.raises(ValueError, match="rectangle"):
        build_decomposition(p, 3)
    with pytest.raises(ValueError, match="at least 3"):
        build_decomposition(uniform_rect(4, 4), 2)


def case1_reference(p, t, window):
    """Independent enumeration of all one-interior-subset plans."""
    d = build_decomposition(p, t)
    total = p.total_votes()
    lo, hi = window
    best = None
    for interior in d.interiors:
        cells = sorted(interior)
        for size in range(1, len(cells) + 1):
            for combo in combinations(cells, size):
                subset = set(combo)
                if not _connected(subset):
                    continue
                v1 = VoteCounts(
                    sum(p.votes[c].party_a for c in subset),
                    sum(p.votes[c].party_b for c in subset),
                )
                pop1 = v1.population()
                pop2 = total.population() - pop1
                if not (lo <= pop1 <= hi and lo <= pop2 <= hi):
                    continue
                if not _connected(set(p.votes) - subset):
                    continue
                v2 = VoteCounts(total.party_a - v1.party_a, total.party_b - v1.party_b)
                value = abs(district_effgap(v1) + district_effgap(v2))
                if best is None or value < best:
                    best = value
    return best


def test_case1_window_excludes_everything():
    p = uniform_rect(6, 6, pop=2)
    assert solve_case1(p, 5, (30, 40)) is None  # interior pop <= 8 < 30


def test_case1_matches_interior_subset_enumeration():
    # 6x6 with a 2x2 interior at t=5; A concentrated inside it.
    p = uniform_rect(6, 6, pop=4, a_cells=[(2, 2), (2, 3), (3, 2), (3, 3)])
    window = (4, 140)
    got = solve_case1(p, 5, window)
    want = case1_reference(p, 5, window)
    assert got is not None and got.value == want
    q = got.partition
    assert validate_partition(p, q, 2, mode="near", delta=Fraction(1, 2)).ok


def test_case1_respects_connectivity():
    # Force a disconnected candidate: interior of 6x6 at t=5 is a 2x2
    # block, whose diagonal pairs are disconnected and must be skipped.
    p = uniform_rect(6, 6, pop=1, a_cells=[(2, 2), (3, 3)])
    window = (2, 34)
    got = solve_case1(p, 5, window)
    ref = case1_reference(p, 5, window)
    assert got.value == ref
    side1 = {c for c, lab in got.partition.labels.items() if lab == 1}
    assert _connected(side1)


def test_reach_table_base_plan_is_tree():
    p = uniform_rect(6, 6, pop=2)
    d = build_decomposition(p, 3)  # interiors all empty at t=3
    assert all(not i for i in d.interiors)
    table = build_reach_table(p, d)
    assert set(table.layers[-1]) == {(0, 0)}
    pop = p.total_votes().population()
    plan = solve_canonical(p, 3, (0, pop))
    side1 = {c for c, lab in plan.partition.labels.items() if lab == 1}
    assert side1 == set(d.tree)
    assert _connected(side1) and _connected(set(p.votes) - side1)


def test_reach_table_monotone_and_reconstructible():
    p = uniform_rect(10, 10, pop=2, a_cells=[(2, 2), (6, 6), (6, 7), (2, 6)])
    d = build_decomposition(p, 5)
    table = build_reach_table(p, d)
    for earlier, later in zip(table.layers, table.layers[1:]):
        assert earlier <= later
    # Every marked pair reconstructs to subsets with exactly those totals.
    from effgap.canonical import _reconstruct_masks

    for pair in table.first_marked:
        masks = _reconstruct_masks(table, pair, len(d.rects))
        a = b = 0
        for ri, mask in enumerate(masks):
            if mask:
                choice = next(c for c in table.choices[ri] if c.mask == mask)
                a += choice.votes.party_a
                b += choice.votes.party_b
        assert (a, b) == pair


def test_canonical_plan_valid_and_deterministic():
    p = uniform_rect(10, 10, pop=2, a_cells=[(2, 2), (6, 6), (7, 7), (2, 7)])
    pop = p.total_votes().population()
    first = solve_canonical(p, 5, (pop // 4, 3 * pop // 4))
    second = solve_canonical(p, 5, (pop // 4, 3 * pop // 4))
    assert first.value == second.value
    assert dict(first.partition.labels) == dict(second.partition.labels)
    assert validate_partition(p, first.partition, 2, mode="near", delta=Fraction(1, 2)).ok
    # Side 1 contains the spine and has no holes (complement connected).
    d = build_decomposition(p, 5)
    side1 = {c for c, lab in first.partition.labels.items() if lab == 1}
    assert set(d.tree) <= side1
    assert _connected(set(p.votes) - side1)


def test_canonical_no_plan_in_window():
    p = uniform_rect(6, 6, pop=2)
    with pytest.raises(CanonicalPlanError, match="no canonical plan in window"):
        solve_canonical(p, 3, (35, 37))


def test_canonical_beats_or_equals_tree_plan():
    rng = random.Random(21)
    p = uniform_rect(10, 10, pop=3,
                     a_cells=[(r, c) for r in range(10) for c in range(10) if rng.random() < 0.4])
    d = build_decomposition(p, 5)
    pop = p.total_votes().population()
    window = (0, pop)
    tree_votes = VoteCounts(
        sum(p.votes[c].party_a for c in d.tree), sum(p.votes[c].party_b for c in d.tree)
    )
    total = p.total_votes()
    rest = VoteCounts(total.party_a - tree_votes.party_a, total.party_b - tree_votes.party_b)
    tree_value = abs(district_effgap(tree_votes) + district_effgap(rest))
    plan = solve_canonical(p, 5, window)
    assert plan.value <= tree_value


def test_two_near_stable_reports_delta_and_stability():
    p = uniform_rect(9, 9, pop=1, a_cells=[(r, c) for r in range(9) for c in range(5)])
    res = solve_two_near_stable(p, Fraction(1, 3))
    assert res.t == 3
    assert res.delta_achieved <= res.delta_bound
    pops = [v.population() for v in res.plan.votes]
    assert res.window[0] <= min(pops) and max(pops) <= res.window[1]
    assert res.stability is not None
    # Determinism.
    again = solve_two_near_stable(p, Fraction(1, 3))
    assert dict(again.plan.partition.labels) == dict(res.plan.partition.labels)


def test_two_near_stable_epsilon_too_small():
    p = uniform_rect(12, 12)
    with pytest.raises(ValueError, match="larger epsilon"):
        solve_two_near_stable(p, Fraction(1, 7))
