"""Exact minimum-gap y-convex equipartitions via a column dynamic program.

A region is y-convex when its intersection with every grid column is a
single vertical segment.  The DP sweeps columns left to right; a state
records, per district label, the accumulated vote totals, a lifecycle
flag and the label's segment in the current column.  Two contiguity
rules beyond the vote recurrence keep every district connected: a label
active in consecutive columns must overlap by at least one row, and a
label that has gone inactive never reappears.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from .core import VoteCounts, district_effgap
from .grid import GridPartition, GridPolygon

UNSTARTED = 0
ACTIVE = 1
FINISHED = 2

Interval = tuple[int, int]  # inclusive (top_row, bottom_row)


@dataclass(frozen=True)
class ColumnSegmentation:
    """Labelled cut of one column's cell run into disjoint segments.

    ``segments`` lists (label, (top_row, bottom_row)) top to bottom;
    labels are distinct, labels without a segment are empty in this
    column.
    """

    column: int
    segments: tuple[tuple[int, Interval], ...]

    def label_interval(self, label: int) -> Interval | None:
        for lab, interval in self.segments:
            if lab == label:
                return interval
        return None


@dataclass(frozen=True)
class LabelState:
    party_a: int
    party_b: int
    status: int
    interval: Interval | None

    def population(self) -> int:
        return self.party_a + self.party_b


@dataclass(frozen=True)
class DPState:
    column: int
    labels: tuple[LabelState, ...]  # indexed by label-1


@dataclass(frozen=True)
class TransitionResult:
    ok: bool
    state: DPState | None = None
    reason: str | None = None


def _column_run(p: GridPolygon, column: int) -> Interval | None:
    """The column's single contiguous run, or None when empty.

    Columns whose cells form two or more disjoint runs are rejected;
    such polygons are outside this solver's scope.
    """
    rows = sorted(r for (r, c) in p.votes if c == column)
    if not rows:
        return None
    if rows[-1] - rows[0] + 1 != len(rows):
        raise ValueError(f"column {column} not y-convex-compatible")
    return rows[0], rows[-1]


def _compositions(lo: int, hi: int, parts: int) -> Iterator[tuple[Interval, ...]]:
    """Cuts of the inclusive row range [lo, hi] into `parts` intervals."""
    length = hi - lo + 1
    for cuts in itertools.combinations(range(1, length), parts - 1):
        bounds = (0,) + cuts + (length,)
        yield tuple((lo + bounds[i], lo + bounds[i + 1] - 1) for i in range(parts))


def enumerate_segmentations(p: GridPolygon, column: int, kappa: int) -> list[ColumnSegmentation]:
    """All ways to cut the column into distinctly-labelled segments.

    Empty labels are allowed; an empty column has exactly one (empty)
    segmentation.
    """
    if kappa < 1:
        raise ValueError("kappa must be at least 1")
    run = _column_run(p, column)
    if run is None:
        return [ColumnSegmentation(column, ())]
    lo, hi = run
    out = []
    for parts in range(1, min(kappa, hi - lo + 1) + 1):
        for intervals in _compositions(lo, hi, parts):
            for labels in itertools.permutations(range(1, kappa + 1), parts):
                out.append(ColumnSegmentation(column, tuple(zip(labels, intervals))))
    return out


def _overlaps(a: Interval, b: Interval) -> bool:
    return a[0] <= b[1] and b[0] <= a[1]


def _segment_votes(p: GridPolygon, column: int, interval: Interval) -> VoteCounts:
    a = b = 0
    for r in range(interval[0], interval[1] + 1):
        v = p.votes[(r, column)]
        a += v.party_a
        b += v.party_b
    return VoteCounts(a, b)


def transition_feasible(p: GridPolygon, prev: DPState, seg: ColumnSegmentation) -> TransitionResult:
    """Apply a column segmentation to a DP state.

    Accumulators advance by the segment's vote totals; a label active in
    both columns must overlap its previous segment by at least one row,
    a previously active label with no segment becomes finished, and a
    finished label may never reactivate.
    """
    if seg.column != prev.column + 1:
        return TransitionResult(False, reason="segmentation not for the next column")
    new_labels = []
    for idx, st in enumerate(prev.labels):
        label = idx + 1
        interval = seg.label_interval(label)
        if interval is None:
            if st.status == ACTIVE:
                new_labels.append(LabelState(st.party_a, st.party_b, FINISHED, None))
            else:
                new_labels.append(LabelState(st.party_a, st.party_b, st.status, None))
            continue
        if st.status == FINISHED:
            return TransitionResult(False, reason=f"label {label} reactivated")
        if st.status == ACTIVE and not _overlaps(st.interval, interval):
            return TransitionResult(
                False, reason=f"label {label} no overlap, district disconnected"
            )
        votes = _segment_votes(p, seg.column, interval)
        new_labels.append(
            LabelState(st.party_a + votes.party_a, st.party_b + votes.party_b, ACTIVE, interval)
        )
    return TransitionResult(True, DPState(seg.column, tuple(new_labels)))


def is_yconvex_partition(q: GridPartition) -> bool:
    """True when every label's cells form one vertical run per column."""
    per_label_col: dict[tuple[int, int], list[int]] = {}
    for (r, c), lab in q.labels.items():
        per_label_col.setdefault((lab, c), []).append(r)
    for rows in per_label_col.values():
        rows.sort()
        if rows[-1] - rows[0] + 1 != len(rows):
            return False
    return True


@dataclass(frozen=True)
class YConvexResult:
    feasible: bool
    value: int | None  # scaled optimum
    partition: GridPartition | None
    max_column_states: int = 0
    max_vote_vectors: int = 0  # distinct per-label accumulator vectors in any column


def _canonical_transitions(
    p: GridPolygon, prev: DPState, column: int, kappa: int
) -> Iterator[tuple[DPState, ColumnSegmentation]]:
    """Successor states with labels canonicalized by first appearance.

    Each segment continues an overlapping active label or starts the
    next unused one; interchangeable labelings are therefore explored
    once.
    """
    run = _column_run(p, column)
    used = sum(1 for st in prev.labels if st.status != UNSTARTED)
    if run is None:
        seg = ColumnSegmentation(column, ())
        res = transition_feasible(p, prev, seg)
        if res.ok:
            yield res.state, seg
        return
    lo, hi = run
    for parts in range(1, min(kappa, hi - lo + 1) + 1):
        for intervals in _compositions(lo, hi, parts):
            # Choices per segment: overlapping active labels, each at most
            # once, or fresh labels taken in appearance order.
            def assign(i: int, taken: frozenset[int], next_new: int, acc: tuple[int, ...]):
                if i == len(intervals):
                    yield acc
                    return
                interval = intervals[i]
                for idx, st in enumerate(prev.labels):
                    label = idx + 1
                    if st.status != ACTIVE or label in taken:
                        continue
                    if _overlaps(st.interval, interval):
                        yield from assign(i + 1, taken | {label}, next_new, acc + (label,))
                if next_new <= kappa:
                    yield from assign(i + 1, taken, next_new + 1, acc + (next_new,))

            for labels in assign(0, frozenset(), used + 1, ()):
                seg = ColumnSegmentation(column, tuple(zip(labels, intervals)))
                res = transition_feasible(p, prev, seg)
                if res.ok:
                    yield res.state, seg


def solve_yconvex(p: GridPolygon, kappa: int) -> YConvexResult:
    """Minimum total absolute gap over y-convex kappa-equipartitions.

    Requires every polygon column to be a single run.  Returns the
    scaled optimum and a witness partition found by backtracking, or an
    infeasible result when no y-convex equipartition exists.
    """
    if kappa < 1:
        raise ValueError("kappa must be at least 1")
    total = p.total_votes()
    if kappa == 1:
        labels = {cell: 1 for cell in p.votes}
        return YConvexResult(True, abs(district_effgap(total)), GridPartition(labels), 1)
    if kappa > p.size:
        return YConvexResult(False, None, None, 0)
    pop = total.population()
    if pop % kappa != 0:
        return YConvexResult(False, None, None, 0)
    target = pop // kappa

    columns = sorted({c for (_, c) in p.votes})
    for col in columns:
        _column_run(p, col)  # raises on multi-run columns

    def state_key(state: DPState):
        return tuple(
            (st.party_a, st.party_b, st.status, st.interval) for st in state.labels
        )

    start = DPState(columns[0] - 1, tuple(LabelState(0, 0, UNSTARTED, None) for _ in range(kappa)))
    frontier: dict[tuple, DPState] = {state_key(start): start}
    # Backpointers keyed by (column, state key): identical states can recur
    # across columns when columns carry no population.
    back: dict[tuple[int, tuple], tuple[tuple, ColumnSegmentation]] = {}
    max_states = 1
    max_vectors = 1

    for col in columns:
        nxt: dict[tuple, DPState] = {}
        for key, state in sorted(frontier.items()):
            for new_state, seg in _canonical_transitions(p, state, col, kappa):
                ok = True
                for st in new_state.labels:
                    if st.population() > target:
                        ok = False
                        break
                    if st.status == FINISHED and st.population() != target:
                        ok = False
                        break
                if not ok:
                    continue
                nkey = state_key(new_state)
                if nkey not in nxt:
                    nxt[nkey] = new_state
                    back[(col, nkey)] = (key, seg)
        frontier = nxt
        max_states = max(max_states, len(frontier))
        vectors = {
            tuple((st.party_a, st.party_b) for st in state.labels)
            for state in frontier.values()
        }
        max_vectors = max(max_vectors, len(vectors))
        if not frontier:
            return YConvexResult(False, None, None, max_states, max_vectors)

    best_key = None
    best_value = None
    for key, state in sorted(frontier.items()):
        if any(st.status == UNSTARTED for st in state.labels):
            continue
        if any(st.population() != target for st in state.labels):
            continue
        signed = sum(
            district_effgap(VoteCounts(st.party_a, st.party_b)) for st in state.labels
        )
        value = abs(signed)
        if best_value is None or value < best_value:
            best_value = value
            best_key = key
    if best_key is None:
        return YConvexResult(False, None, None, max_states, max_vectors)

    labels: dict[tuple[int, int], int] = {}
    key = best_key
    for col in reversed(columns):
        prev_key, seg = back[(col, key)]
        for lab, (top, bottom) in seg.segments:
            for r in range(top, bottom + 1):
                labels[(r, col)] = lab
        key = prev_key
    return YConvexResult(True, best_value, GridPartition(labels), max_states, max_vectors)
