import numpy as np
import pytest

from conftest import load
from helpers import random_matrix
from soficmat.closing import (
    PairGraph,
    bi_closing_report,
    brute_force_closing_delay,
    closing_violations,
    enumerate_closing_violations,
    is_left_resolving,
    is_right_resolving,
    column_label_heuristic,
    left_closing_delay,
    right_closing_delay,
    verify_right_resolving_factor,
)
from soficmat.errors import DegreeError
from soficmat.symalg import SymbolicMatrix, entropy, sym_mul


def explicit_delay(a, max_len):
    """Smallest D with no explicit violating path pair of length D+1, None past max_len."""
    for length in range(1, max_len + 1):
        if not enumerate_closing_violations(a, length):
            return length - 1
    return None


def test_closing_examples():
    a, b = load("closing_bi"), load("closing_left_only")
    assert right_closing_delay(a) == 1
    assert left_closing_delay(a) == 0
    assert right_closing_delay(b) is None
    assert left_closing_delay(b) == 0
    ra, rb = bi_closing_report(a), bi_closing_report(b)
    assert ra.bi_closing and ra.heuristic_agrees
    assert not rb.bi_closing and rb.left_closing and rb.heuristic_agrees
    assert ra.summary() == "bi-closing: true; right delay 1; left delay 0"


def test_single_loop():
    rep = bi_closing_report(load("single_loop"))
    assert rep.bi_closing and rep.right_delay == 0 and rep.left_delay == 0


def test_heuristic_examples():
    assert column_label_heuristic(load("closing_bi")) == "right-closing"
    assert column_label_heuristic(load("closing_left_only")) == "not-right-closing"
    assert column_label_heuristic(load("full_ambiguity")) == "not-right-closing"
    assert column_label_heuristic(load("closing_left_only"), side="left") in (
        "right-closing", "not-right-closing", "inconclusive")


def test_explicit_enumeration_agrees_on_examples():
    for name in ("closing_bi", "closing_left_only", "full_ambiguity", "two_state_four_label"):
        a = load(name)
        assert explicit_delay(a, 4) == right_closing_delay(a)


def test_counting_matches_enumeration(rng):
    for _ in range(60):
        a = random_matrix(rng, n=int(rng.integers(1, 4)), max_coef=1)
        for length in (1, 2, 3):
            assert closing_violations(a, length) == len(enumerate_closing_violations(a, length)) * 2


def test_parallel_equal_edges_not_closing():
    a = SymbolicMatrix([["2a"]])
    assert right_closing_delay(a) is None
    assert brute_force_closing_delay(a) is None
    sink = SymbolicMatrix([["a", "2b"], [".", "."]])
    assert right_closing_delay(sink) is None


def test_resolving_means_delay_zero(rng):
    for _ in range(100):
        a = random_matrix(rng, max_coef=1)
        if is_right_resolving(a):
            assert right_closing_delay(a) == 0
        if right_closing_delay(a) == 0:
            assert is_right_resolving(a)
        if is_left_resolving(a):
            assert left_closing_delay(a) == 0


def test_oracle_equivalence(rng):
    for _ in range(200):
        a = random_matrix(rng)
        assert right_closing_delay(a) == brute_force_closing_delay(a)
        assert left_closing_delay(a) == right_closing_delay(a.transpose())


def test_delay_bound_and_long_delay():
    # a chain that takes three steps to resolve
    a = SymbolicMatrix([
        ["a", "a", ".", "."],
        [".", ".", "b", "."],
        [".", ".", ".", "c"],
        ["d", ".", ".", "."],
    ])
    d = right_closing_delay(a)
    assert d == brute_force_closing_delay(a)
    assert d == explicit_delay(a, 6)


def test_pair_graph_basics():
    g = PairGraph(load("closing_bi"))
    assert (0, 1) in g.seeds
    assert g.longest_walk() == 0
    assert PairGraph(load("single_loop")).longest_walk() == -1


def test_report_invariants():
    rep = bi_closing_report(load("closing_left_only"))
    assert (rep.right_delay is not None) == rep.right_closing
    assert rep.bi_closing == (rep.right_closing and rep.left_closing)
    d = rep.as_dict()
    assert d["bi_closing"] is False and d["left_delay"] == 0


def test_disagreement_is_reported():
    # identical column label sets although the graph is right-resolving
    a = SymbolicMatrix([["a", "b"], ["b", "a"]])
    assert right_closing_delay(a) == 0
    rep = bi_closing_report(a)
    if rep.heuristic_verdict == "not-right-closing":
        assert rep.heuristic_agrees is False and rep.warnings


def test_degree_check():
    a = load("two_state_four_label")
    with pytest.raises(DegreeError):
        right_closing_delay(sym_mul(a, a))


def test_right_resolving_factor():
    # out-split of the full 2-shift onto itself
    a = SymbolicMatrix([["a", "b"], ["a", "b"]])
    b = SymbolicMatrix([["a+b"]])
    s = np.array([[1], [1]])
    assert verify_right_resolving_factor(a, b, s)
    assert entropy(a) == pytest.approx(entropy(b), rel=1e-12)
    assert not verify_right_resolving_factor(a, b, np.array([[1], [0]]))
    c = SymbolicMatrix([["a", "a"], ["b", "b"]])
    assert not verify_right_resolving_factor(c, b, s)
