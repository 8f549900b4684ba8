"""Right-, left- and bi-closing analysis of labeled graphs.

The graph of a degree-1 symbolic matrix has coefficient-many edges i -> j
for each label in entry (i, j).  It is right-closing with delay D when any
two paths of length D+1 that start at the same vertex and present the same
label word share their first edge.

Exact delays come from the pair graph: nodes are unordered vertex pairs
{u, v} (diagonal pairs included), with {u, v} -> {u', v'} whenever some
label leads u -> u' and v -> v'.  Seeds are the target pairs of two
distinct equal-label edges leaving a common vertex.  A cycle reachable
from a seed means the graph is not right-closing; otherwise the delay is
one more than the longest walk from a seed.  Two parallel edges with the
same label and the same endpoints can never be told apart, so their
presence alone makes the graph not right-closing.
"""

from __future__ import annotations

import itertools
import logging
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .errors import DegreeError, ShapeError
from .splitting import _full_components
from .symalg import SymbolicMatrix, as_integer_matrix, is_amalgamation_matrix

__all__ = [
    "PairGraph",
    "ClosingReport",
    "right_closing_delay",
    "left_closing_delay",
    "bi_closing_report",
    "column_label_heuristic",
    "is_right_resolving",
    "is_left_resolving",
    "verify_right_resolving_factor",
    "closing_violations",
    "brute_force_closing_delay",
    "enumerate_closing_violations",
]

log = logging.getLogger(__name__)

RIGHT_CLOSING = "right-closing"
NOT_RIGHT_CLOSING = "not-right-closing"
INCONCLUSIVE = "inconclusive"


def _label_matrices(a: SymbolicMatrix) -> dict:
    if a.degree != 1:
        raise DegreeError("closing analysis needs a degree-1 matrix")
    if not a.is_square:
        raise ShapeError("closing analysis needs a square matrix")
    return _full_components(a)


def _pair(u: int, v: int) -> tuple:
    return (u, v) if u <= v else (v, u)


def _has_parallel_edges(comps: dict) -> bool:
    return any((m > 1).any() for m in comps.values())


class PairGraph:
    """Pair graph of a degree-1 square symbolic matrix."""

    def __init__(self, a: SymbolicMatrix):
        comps = _label_matrices(a)
        self.n = a.rows
        self.parallel = _has_parallel_edges(comps)
        succ = defaultdict(set)
        seeds = set()
        for m in comps.values():
            targets = [np.flatnonzero(m[i]) for i in range(self.n)]
            for u, v in itertools.combinations_with_replacement(range(self.n), 2):
                for t in targets[u]:
                    for t2 in targets[v]:
                        succ[(u, v)].add(_pair(int(t), int(t2)))
            for i in range(self.n):
                for t, t2 in itertools.combinations(targets[i], 2):
                    seeds.add(_pair(int(t), int(t2)))
                for t in targets[i]:
                    if m[i, t] > 1:
                        seeds.add((int(t), int(t)))
        self.successors = {k: frozenset(v) for k, v in succ.items()}
        self.seeds = frozenset(seeds)

    def reachable(self) -> set:
        seen = set(self.seeds)
        stack = list(self.seeds)
        while stack:
            node = stack.pop()
            for nxt in self.successors.get(node, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return seen

    def longest_walk(self) -> int | None:
        """Longest walk from a seed in edges, None if a reachable cycle exists, -1 without seeds."""
        nodes = self.reachable()
        if not nodes:
            return -1
        indeg = {v: 0 for v in nodes}
        for v in nodes:
            for w in self.successors.get(v, ()):
                indeg[w] += 1
        order = [v for v in nodes if indeg[v] == 0]
        head = 0
        while head < len(order):
            v = order[head]
            head += 1
            for w in self.successors.get(v, ()):
                indeg[w] -= 1
                if indeg[w] == 0:
                    order.append(w)
        if len(order) != len(nodes):
            return None
        # longest path ending at each node, starting from any seed
        best = {v: (0 if v in self.seeds else None) for v in nodes}
        for v in order:
            if best[v] is None:
                continue
            for w in self.successors.get(v, ()):
                if best[w] is None or best[w] < best[v] + 1:
                    best[w] = best[v] + 1
        return max(b for b in best.values() if b is not None)


def right_closing_delay(a: SymbolicMatrix) -> int | None:
    """Minimal right-closing delay, or None when the graph is not right-closing."""
    g = PairGraph(a)
    if g.parallel:
        return None
    walk = g.longest_walk()
    if walk is None:
        return None
    return walk + 1


def left_closing_delay(a: SymbolicMatrix) -> int | None:
    return right_closing_delay(a.transpose())


def is_right_resolving(a: SymbolicMatrix) -> bool:
    comps = _label_matrices(a)
    return all((m.sum(axis=1) <= 1).all() for m in comps.values())


def is_left_resolving(a: SymbolicMatrix) -> bool:
    return is_right_resolving(a.transpose())


# oracles ----------------------------------------------------------------------


def closing_violations(a: SymbolicMatrix, length: int) -> int:
    """Ordered pairs of paths of the given length with a common start and word but different first edges.

    Counted exactly through powers of F = sum_x A_x (x) A_x, the
    ordered-pair graph.
    """
    if length < 1:
        raise ValueError("length must be at least 1")
    comps = {x: m.astype(object) for x, m in _label_matrices(a).items()}
    n = a.rows
    f = sum(np.kron(m, m) for m in comps.values())
    if isinstance(f, int):
        return 0
    reach = np.ones(n * n, dtype=object)
    for _ in range(length - 1):
        reach = f @ reach
    total = sum(reach[i * n + j] * comps[x][s, i] * comps[x][s, j]
                for x in comps for s in range(n) for i in range(n) for j in range(n))
    same = sum(comps[x][s, t] * reach[t * n + t] for x in comps for s in range(n) for t in range(n))
    return int(total - same)


def brute_force_closing_delay(a: SymbolicMatrix) -> int | None:
    """Minimal delay found by counting violations for lengths 1 .. n^2 + 1.

    Violations at length L+1 restrict to violations at length L, so the
    first violation-free length gives the delay.  Parallel equal-label
    edges are reported as not right-closing, as in :func:`right_closing_delay`.
    """
    comps = _label_matrices(a)
    if _has_parallel_edges(comps):
        return None
    n = a.rows
    for length in range(1, n * n + 2):
        if closing_violations(a, length) == 0:
            return length - 1
    return None


def _edges(a: SymbolicMatrix) -> list:
    out = []
    for x, m in _label_matrices(a).items():
        for i, j in zip(*np.nonzero(m)):
            for copy in range(int(m[i, j])):
                out.append((int(i), int(j), x, copy))
    return out


def enumerate_closing_violations(a: SymbolicMatrix, length: int) -> list:
    """Explicit pairs of paths (as edge lists) witnessing a delay of at least ``length``."""
    edges = _edges(a)
    by_source = defaultdict(list)
    for e in edges:
        by_source[e[0]].append(e)
    paths = [[e] for e in edges]
    for _ in range(length - 1):
        paths = [p + [e] for p in paths for e in by_source[p[-1][1]]]
    groups = defaultdict(list)
    for p in paths:
        groups[(p[0][0], tuple(e[2] for e in p))].append(p)
    found = []
    for group in groups.values():
        for p, q in itertools.combinations(group, 2):
            if p[0] != q[0]:
                found.append((p, q))
    return found


# heuristic --------------------------------------------------------------------


def _column_label_sets(comps: dict, n: int) -> list:
    return [frozenset(x for x, m in comps.items() if m[:, j].any()) for j in range(n)]


def column_label_heuristic(a: SymbolicMatrix, side: str = "right") -> str:
    """Label-set recipe for right-closing (side='left' uses rows instead of columns).

    Every pair of nonzero positions in one sub-matrix compares the label
    sets of their columns.  Identical sets mean not right-closing; sets
    that are not nested are resolved; nested sets are re-examined through
    the source pairs that reach both columns with a common label.  After
    n^2 rounds with open pairs the verdict is inconclusive.
    """
    if side == "left":
        a = a.transpose()
    elif side != "right":
        raise ValueError("side must be 'right' or 'left'")
    comps = _label_matrices(a)
    n = a.rows
    sets = _column_label_sets(comps, n)

    def classify(j, j2):
        if sets[j] == sets[j2]:
            return "equal"
        if sets[j] < sets[j2] or sets[j2] < sets[j]:
            return "nested"
        return "resolved"

    pending = set()
    for m in comps.values():
        positions = list(zip(*np.nonzero(m)))
        for i, j in positions:
            if m[i, j] > 1:
                return NOT_RIGHT_CLOSING
        for (i, j), (i2, j2) in itertools.combinations(positions, 2):
            if j == j2:
                # two positions in one column compare a set with itself
                continue
            verdict = classify(j, j2)
            if verdict == "equal":
                return NOT_RIGHT_CLOSING
            if verdict == "nested":
                pending.add(_pair(int(j), int(j2)))
    seen = set(pending)
    for _ in range(n * n):
        if not pending:
            return RIGHT_CLOSING
        nxt = set()
        for j, j2 in pending:
            for x in sets[j] & sets[j2]:
                m = comps[x]
                for k in np.flatnonzero(m[:, j]):
                    for k2 in np.flatnonzero(m[:, j2]):
                        if k == k2:
                            continue
                        verdict = classify(k, k2)
                        if verdict == "equal":
                            return NOT_RIGHT_CLOSING
                        p = _pair(int(k), int(k2))
                        if verdict == "nested" and p not in seen:
                            seen.add(p)
                            nxt.add(p)
        pending = nxt
    return RIGHT_CLOSING if not pending else INCONCLUSIVE


# reports ----------------------------------------------------------------------


@dataclass(frozen=True)
class ClosingReport:
    right_closing: bool
    right_delay: int | None
    left_closing: bool
    left_delay: int | None
    heuristic_verdict: str
    heuristic_agrees: bool | None = None
    warnings: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.right_closing != (self.right_delay is not None):
            raise ValueError("right_delay must be present exactly when right_closing")
        if self.left_closing != (self.left_delay is not None):
            raise ValueError("left_delay must be present exactly when left_closing")

    @property
    def bi_closing(self) -> bool:
        return self.right_closing and self.left_closing

    def summary(self) -> str:
        def part(side, delay):
            return f"{side} delay {delay}" if delay is not None else f"not {side}-closing"

        return (f"bi-closing: {str(self.bi_closing).lower()}; "
                f"{part('right', self.right_delay)}; {part('left', self.left_delay)}")

    def as_dict(self) -> dict:
        return {
            "right_closing": self.right_closing,
            "right_delay": self.right_delay,
            "left_closing": self.left_closing,
            "left_delay": self.left_delay,
            "bi_closing": self.bi_closing,
            "heuristic_verdict": self.heuristic_verdict,
            "heuristic_agrees": self.heuristic_agrees,
            "warnings": list(self.warnings),
        }


def bi_closing_report(a: SymbolicMatrix) -> ClosingReport:
    right = right_closing_delay(a)
    left = left_closing_delay(a)
    verdict = column_label_heuristic(a)
    warnings = []
    agrees = None
    if verdict != INCONCLUSIVE:
        agrees = (verdict == RIGHT_CLOSING) == (right is not None)
        if not agrees:
            msg = f"label-set heuristic says {verdict} but the pair graph says " + (
                f"right delay {right}" if right is not None else "not right-closing")
            log.warning(msg)
            warnings.append(msg)
    else:
        warnings.append("label-set heuristic was inconclusive")
    return ClosingReport(right is not None, right, left is not None, left, verdict, agrees, tuple(warnings))


def verify_right_resolving_factor(a: SymbolicMatrix, b: SymbolicMatrix, s) -> bool:
    """Check that an amalgamation matrix S defines a label-wise factor: A_x·S == S·B_x for all x."""
    s = as_integer_matrix(s)
    if not is_amalgamation_matrix(s) or s.shape != (a.rows, b.rows):
        return False
    ca, cb = _full_components(a), _full_components(b)
    labels = set(ca) | set(cb)
    for x in labels:
        ax = ca.get(x, np.zeros(a.shape, dtype=np.int64))
        bx = cb.get(x, np.zeros(b.shape, dtype=np.int64))
        if not np.array_equal(ax @ s, s @ bx):
            return False
    return True
