"""Label splitting and amalgamation of symbolic matrices.

Vertices are 0-based indices.  Splitting vertex ``v`` into ``m`` copies puts
the copies ``v^1 .. v^m`` (in block order) at position ``v``; the other
vertices keep their relative order.  Amalgamating ``u`` and ``v`` keeps the
merged vertex at ``min(u, v)`` and drops ``max(u, v)``.

Every operation works label by label on the integral sub-matrices and then
reassembles the symbolic result, so the symbolic and integral pictures move
in lockstep by construction.

Witness conventions (``SplitWitness``):

* row kind (out-splitting):   A = S·R and B = R·S, S a division matrix;
* column kind (in-splitting): A = R·S and B = S·R, S an amalgamation matrix.

In both kinds R is a degree-1 symbolic matrix and A is the smaller matrix.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AmalgamationError, MergePreconditionError, MoveError, PartitionError, ShapeError
from .symalg import (
    FormalSum,
    SymbolicMatrix,
    decompose,
    is_amalgamation_matrix,
    is_division_matrix,
    mixed_mul,
    recompose,
)

__all__ = [
    "EdgeRef",
    "EdgePartition",
    "SplitWitness",
    "Move",
    "in_split",
    "out_split",
    "verify_split_witness",
    "identity_witness",
    "predecessor_set",
    "follower_set",
    "amalgamate",
    "merge_pair",
    "common_amalgamation",
    "apply_move_sequence",
    "split_submatrix",
    "merge_submatrix",
]

DIRECTIONS = ("in", "out")


@dataclass(frozen=True, order=True)
class EdgeRef:
    """One edge ``source -> target`` carrying ``label``.

    Parallel edges with the same label are the same EdgeRef; a multiset of
    EdgeRefs (repetition) tells them apart by count.
    """

    source: int
    target: int
    label: str

    @property
    def cycle(self) -> bool:
        return self.source == self.target


def _full_components(a: SymbolicMatrix) -> dict:
    comps = decompose(a)
    return {x: comps.get(x, np.zeros(a.shape, dtype=np.int64)) for x in a.alphabet}


def _edges_at(a: SymbolicMatrix, vertex: int, direction: str) -> Counter:
    out: Counter = Counter()
    for x, m in _full_components(a).items():
        if direction == "in":
            for s in range(a.rows):
                if m[s, vertex]:
                    out[EdgeRef(s, vertex, x)] = int(m[s, vertex])
        else:
            for t in range(a.cols):
                if m[vertex, t]:
                    out[EdgeRef(vertex, t, x)] = int(m[vertex, t])
    return out


@dataclass(frozen=True)
class EdgePartition:
    """Partition of the in- (or out-) edge multiset at one vertex."""

    vertex: int
    direction: str
    blocks: tuple

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise PartitionError(f"direction must be 'in' or 'out', got {self.direction!r}")
        object.__setattr__(self, "blocks", tuple(tuple(sorted(b)) for b in self.blocks))

    @property
    def m(self) -> int:
        return len(self.blocks)

    @classmethod
    def from_labels(cls, a: SymbolicMatrix, vertex: int, direction: str, blocks) -> "EdgePartition":
        """Build a partition from label-level block descriptions.

        Each block item is an :class:`EdgeRef`, a ``(label, other_vertex)``
        pair, or a bare label.  ``other_vertex`` is the source for in-edges
        and the target for out-edges.  A bare label is accepted only when a
        single ``other_vertex`` carries it.
        """
        if not 0 <= vertex < a.rows:
            raise PartitionError(f"vertex {vertex} out of range")
        edges = _edges_at(a, vertex, direction)
        resolved = []
        for block in blocks:
            refs = []
            for item in block:
                if isinstance(item, EdgeRef):
                    refs.append(item)
                    continue
                if isinstance(item, str):
                    label, other = item, None
                else:
                    label, other = item
                if other is None:
                    ends = sorted({(e.source if direction == "in" else e.target) for e in edges if e.label == label})
                    if not ends:
                        raise PartitionError(f"no {direction}-edge labeled {label!r} at vertex {vertex}")
                    if len(ends) > 1:
                        raise PartitionError(
                            f"label {label!r} is ambiguous at vertex {vertex}; give the other endpoint"
                        )
                    other = ends[0]
                refs.append(EdgeRef(other, vertex, label) if direction == "in" else EdgeRef(vertex, other, label))
            resolved.append(refs)
        return cls(vertex, direction, resolved)

    def validate(self, a: SymbolicMatrix) -> None:
        if not a.is_square:
            raise ShapeError("splitting needs a square matrix")
        if not 0 <= self.vertex < a.rows:
            raise PartitionError(f"vertex {self.vertex} out of range")
        if not self.blocks:
            raise PartitionError("a partition needs at least one block")
        if any(not b for b in self.blocks):
            raise PartitionError("partition blocks must be nonempty")
        have = Counter()
        for b in self.blocks:
            have.update(b)
        want = _edges_at(a, self.vertex, self.direction)
        if have != want:
            missing = want - have
            extra = have - want
            raise PartitionError(
                f"blocks do not partition the {self.direction}-edges at vertex {self.vertex}: "
                f"missing {sorted(missing.elements())}, extra {sorted(extra.elements())}"
            )


@dataclass(frozen=True, eq=False)
class SplitWitness:
    """Factorization certifying that B is an elementary splitting of A."""

    kind: str
    direction: str
    R: SymbolicMatrix
    S: np.ndarray
    A: SymbolicMatrix
    B: SymbolicMatrix


def _layout(n: int, v: int, m: int) -> list:
    """Parent vertex of each vertex after splitting v into m copies."""
    return list(range(v)) + [v] * m + list(range(v + 1, n))


def _copy_index(v: int, new: int) -> int:
    return new - v


def split_submatrix(m: np.ndarray, partition: EdgePartition, label: str) -> np.ndarray:
    """Split one label's integral sub-matrix.

    In-splitting follows the four entry rules: cycle counts of block k fill
    column v^k in every copy row; non-cycle in-edge counts of block k fill
    column v^k of their source row; copy rows repeat the old out-row; all
    other entries are unchanged.  Out-splitting is the dual (R_a · S).
    """
    n = m.shape[0]
    v, k_blocks = partition.vertex, partition.m
    parent = _layout(n, v, k_blocks)
    n2 = len(parent)
    counts = []
    for block in partition.blocks:
        c = Counter()
        for e in block:
            if e.label == label:
                c[e.source if partition.direction == "in" else e.target] += 1
        counts.append(c)
    out = np.zeros((n2, n2), dtype=np.int64)
    for r in range(n2):
        pr = parent[r]
        for col in range(n2):
            pc = parent[col]
            if partition.direction == "in":
                if pc == v:
                    # cycle edges land in every copy row, other in-edges in their source row
                    out[r, col] = counts[_copy_index(v, col)][pr]
                else:
                    out[r, col] = m[pr, pc]
            else:
                if pr == v:
                    out[r, col] = counts[_copy_index(v, r)][pc]
                else:
                    out[r, col] = m[pr, pc]
    return out


def _amalgamation_matrix(parent: Sequence[int], n_small: int) -> np.ndarray:
    s = np.zeros((len(parent), n_small), dtype=np.int64)
    for r, p in enumerate(parent):
        s[r, p] = 1
    return s


def _edge_matrix(a: SymbolicMatrix, partition: EdgePartition, parent) -> SymbolicMatrix:
    v = partition.vertex
    blocks = [Counter() for _ in partition.blocks]
    for k, block in enumerate(partition.blocks):
        for e in block:
            other = e.source if partition.direction == "in" else e.target
            blocks[k][(other, e.label)] += 1

    def block_sum(k, other):
        return FormalSum(((x,), c) for (o, x), c in blocks[k].items() if o == other)

    n, n2 = a.rows, len(parent)
    if partition.direction == "in":
        rows = [[block_sum(_copy_index(v, c), i) if parent[c] == v else a[i, parent[c]] for c in range(n2)]
                for i in range(n)]
    else:
        rows = [[block_sum(_copy_index(v, r), j) if parent[r] == v else a[parent[r], j] for j in range(n)]
                for r in range(n2)]
    return SymbolicMatrix(rows, a.alphabet, 1)


def _split(a: SymbolicMatrix, partition: EdgePartition, direction: str):
    if partition.direction != direction:
        raise PartitionError(f"expected an {direction}-partition, got {partition.direction}")
    if a.degree != 1:
        raise PartitionError("splitting needs a degree-1 matrix")
    partition.validate(a)
    comps = _full_components(a)
    per_label = {x: split_submatrix(m, partition, x) for x, m in comps.items()}
    n2 = a.rows + partition.m - 1
    b = recompose(per_label, alphabet=a.alphabet, shape=(n2, n2))
    parent = _layout(a.rows, partition.vertex, partition.m)
    r = _edge_matrix(a, partition, parent)
    amal = _amalgamation_matrix(parent, a.rows)
    if direction == "in":
        w = SplitWitness("column", "in", r, amal, a, b)
    else:
        w = SplitWitness("row", "out", r, amal.T.copy(), a, b)
    if not verify_split_witness(w):
        raise AssertionError("split witness failed to verify")
    return b, w


def in_split(a: SymbolicMatrix, partition: EdgePartition):
    """Split ``partition.vertex`` by a partition of its in-edges; returns (B, witness)."""
    return _split(a, partition, "in")


def out_split(a: SymbolicMatrix, partition: EdgePartition):
    """Split ``partition.vertex`` by a partition of its out-edges; returns (B, witness)."""
    return _split(a, partition, "out")


def verify_split_witness(w: SplitWitness) -> bool:
    """Check the factorization identities and the shape of S."""
    if w.R.degree != 1:
        return False
    s = np.asarray(w.S)
    try:
        if w.kind == "row":
            if not is_division_matrix(s):
                return False
            return mixed_mul(s, w.R, "left") == w.A and mixed_mul(s, w.R, "right") == w.B
        if w.kind == "column":
            if not is_amalgamation_matrix(s):
                return False
            return mixed_mul(s, w.R, "right") == w.A and mixed_mul(s, w.R, "left") == w.B
    except (ShapeError, ValueError):
        return False
    return False


def identity_witness(a: SymbolicMatrix, kind: str = "row") -> SplitWitness:
    direction = "out" if kind == "row" else "in"
    return SplitWitness(kind, direction, a, np.eye(a.rows, dtype=np.int64), a, a)


# predecessor / follower sets ------------------------------------------------


def predecessor_set(a: SymbolicMatrix, v: int) -> Counter:
    """Multiset of (source, label) over the in-edges of v."""
    return Counter({(e.source, e.label): c for e, c in _edges_at(a, v, "in").items()})


def follower_set(a: SymbolicMatrix, v: int) -> Counter:
    """Multiset of (target, label) over the out-edges of v."""
    return Counter({(e.target, e.label): c for e, c in _edges_at(a, v, "out").items()})


# amalgamation ---------------------------------------------------------------


def _merge_parent(n: int, u: int, v: int) -> list:
    lo, hi = sorted((u, v))
    return [lo if b == hi else (b - 1 if b > hi else b) for b in range(n)]


def merge_submatrix(m: np.ndarray, u: int, v: int, direction: str) -> np.ndarray:
    """Merge two vertices of one integral sub-matrix (no legality check)."""
    n = m.shape[0]
    hi = max(u, v)
    s = _amalgamation_matrix(_merge_parent(n, u, v), n - 1)
    if direction == "in":
        return np.delete(m, hi, axis=0) @ s
    return s.T @ np.delete(m, hi, axis=1)


def amalgamate(a: SymbolicMatrix, u: int, v: int, direction: str):
    """Merge vertices u and v; the inverse of an in- or out-split.

    ``direction='in'`` undoes an in-split: in every sub-matrix the rows of u
    and v (their follower sets) must agree, and their columns are summed.
    ``direction='out'`` undoes an out-split: the columns (predecessor sets)
    must agree label by label, and the rows are summed.

    Returns ``(C, witness)`` where the witness certifies A as a splitting
    of C.
    """
    if direction not in DIRECTIONS:
        raise AmalgamationError(f"direction must be 'in' or 'out', got {direction!r}")
    if not a.is_square or a.degree != 1:
        raise AmalgamationError("amalgamation needs a square degree-1 matrix")
    n = a.rows
    if u == v or not (0 <= u < n and 0 <= v < n):
        raise AmalgamationError(f"cannot merge vertices {u} and {v} of a {n}-vertex matrix")
    comps = _full_components(a)
    for x, m in comps.items():
        if direction == "in" and not np.array_equal(m[u], m[v]):
            raise AmalgamationError(f"follower sets of {u} and {v} differ in sub-matrix {x}", label=x)
        if direction == "out" and not np.array_equal(m[:, u], m[:, v]):
            raise AmalgamationError(f"predecessor sets of {u} and {v} differ in sub-matrix {x}", label=x)
    merged = {x: merge_submatrix(m, u, v, direction) for x, m in comps.items()}
    c = recompose(merged, alphabet=a.alphabet, shape=(n - 1, n - 1))
    hi = max(u, v)
    amal = _amalgamation_matrix(_merge_parent(n, u, v), n - 1)
    if direction == "in":
        r = SymbolicMatrix([row for i, row in enumerate(a.entries) if i != hi], a.alphabet, 1)
        w = SplitWitness("column", "in", r, amal, c, a)
    else:
        r = SymbolicMatrix([[e for j, e in enumerate(row) if j != hi] for row in a.entries], a.alphabet, 1)
        w = SplitWitness("row", "out", r, amal.T.copy(), c, a)
    if not verify_split_witness(w):
        raise AssertionError("amalgamation witness failed to verify")
    return c, w


def merge_pair(w: SplitWitness) -> tuple:
    """The (u, v, direction) merge an elementary amalgamation witness performs on w.B."""
    s = np.asarray(w.S)
    fibers_of = s.T if w.kind == "column" else s
    fibers = [tuple(np.flatnonzero(row)) for row in fibers_of]
    big = [f for f in fibers if len(f) > 1]
    if len(big) != 1 or len(big[0]) != 2:
        raise MergePreconditionError("witness is not an elementary (two-vertex) amalgamation")
    u, v = (int(i) for i in big[0])
    return u, v, ("in" if w.kind == "column" else "out")


def common_amalgamation(a: SymbolicMatrix, w1: SplitWitness, w2: SplitWitness):
    """A common amalgamation C of two elementary amalgamations of A.

    Both witnesses must have ``B == a``; ``w.A`` is the amalgamated matrix.
    Returns ``(C, witness_from_B1, witness_from_B2)``.  When the two merges
    share a vertex all three vertices end up merged.
    """
    for w in (w1, w2):
        if w.B != a or not verify_split_witness(w):
            raise MergePreconditionError("each witness must verify and amalgamate the given matrix")
    b1, b2 = w1.A, w2.A
    u1, v1, d1 = merge_pair(w1)
    u2, v2, d2 = merge_pair(w2)
    n = a.rows
    if {u1, v1} == {u2, v2}:
        if b1 != b2:
            raise MergePreconditionError("same vertex pair merged into different matrices")
        kind = w1.kind
        return b1, identity_witness(b1, kind), identity_witness(b2, kind)
    p1, p2 = _merge_parent(n, u1, v1), _merge_parent(n, u2, v2)
    try:
        c1, x1 = amalgamate(b1, p1[u2], p1[v2], d2)
        c2, x2 = amalgamate(b2, p2[u1], p2[v1], d1)
    except AmalgamationError as exc:
        raise MergePreconditionError(f"merges are not compatible: {exc}") from exc
    if c1 != c2:
        raise MergePreconditionError("the two merge orders disagree")
    return c1, x1, x2


# move sequences -------------------------------------------------------------


@dataclass(frozen=True)
class Move:
    """One split or amalgamation step.

    Split blocks are resolved against the running matrix with
    :meth:`EdgePartition.from_labels`, so they may use bare labels.
    """

    action: str
    direction: str
    vertex: int | None = None
    blocks: tuple | None = None
    pair: tuple | None = None

    @classmethod
    def split(cls, vertex: int, direction: str, blocks) -> "Move":
        return cls("split", direction, vertex=vertex, blocks=tuple(tuple(b) for b in blocks))

    @classmethod
    def amalgamate(cls, u: int, v: int, direction: str) -> "Move":
        return cls("amalgamate", direction, pair=(u, v))


def apply_move_sequence(a: SymbolicMatrix, moves: Sequence[Move]):
    """Run moves in order; returns ``(final, traces)``.

    ``traces[label]`` lists the label's integral sub-matrix before the first
    move and after each move, computed on the sub-matrices alone.  Each step
    is checked against ``decompose`` of the symbolic matrix.
    """
    current = a
    traces = {x: [m] for x, m in _full_components(a).items()}
    for step, move in enumerate(moves):
        try:
            if move.action == "split":
                part = EdgePartition.from_labels(current, move.vertex, move.direction, move.blocks)
                nxt, _ = _split(current, part, move.direction)
                per_label = {x: split_submatrix(t[-1], part, x) for x, t in traces.items()}
            elif move.action == "amalgamate":
                u, v = move.pair
                nxt, _ = amalgamate(current, u, v, move.direction)
                per_label = {x: merge_submatrix(t[-1], u, v, move.direction) for x, t in traces.items()}
            else:
                raise MoveError(f"unknown action {move.action!r}", step)
        except (PartitionError, AmalgamationError, ShapeError) as exc:
            raise MoveError(str(exc), step) from exc
        got = decompose(nxt)
        for x, m in per_label.items():
            if not np.array_equal(got.get(x, np.zeros_like(m)), m):
                raise MoveError(f"sub-matrix {x} left lockstep", step)
            traces[x].append(m)
        current = nxt
    return current, traces
