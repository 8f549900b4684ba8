"""Symbolic adjacency matrices of sofic shifts.

Sub-matrix decomposition, state splitting and amalgamation with witness
factorizations, strong shift equivalence checks and constructions,
Williams factorization and closing-delay analysis.
"""

from .closing import (
    ClosingReport,
    bi_closing_report,
    is_left_resolving,
    is_right_resolving,
    column_label_heuristic,
    left_closing_delay,
    right_closing_delay,
    verify_right_resolving_factor,
)
from .equivalence import (
    EsseWitness,
    SearchBounds,
    SseChain,
    block_conjugacy_construct,
    conj_lift_diagonal,
    matrix_conjugate_check,
    search_esse,
    sse_dr_construct,
    verify_esse,
    verify_sse_chain,
    williams_factorize,
)
from .errors import SoficMatError
from .formats import parse_matrix, serialize_matrix
from .splitting import (
    EdgePartition,
    Move,
    SplitWitness,
    amalgamate,
    apply_move_sequence,
    common_amalgamation,
    in_split,
    out_split,
    verify_split_witness,
)
from .symalg import (
    Alphabet,
    FormalSum,
    SymbolicMatrix,
    count_periodic_words,
    decompose,
    entropy,
    recompose,
    sym_equal_mod_bijection,
    sym_mul,
)

__version__ = "0.1.0"

__all__ = [
    "Alphabet",
    "ClosingReport",
    "EdgePartition",
    "EsseWitness",
    "FormalSum",
    "Move",
    "SearchBounds",
    "SoficMatError",
    "SplitWitness",
    "SseChain",
    "SymbolicMatrix",
    "amalgamate",
    "apply_move_sequence",
    "bi_closing_report",
    "block_conjugacy_construct",
    "column_label_heuristic",
    "common_amalgamation",
    "conj_lift_diagonal",
    "count_periodic_words",
    "decompose",
    "entropy",
    "in_split",
    "is_left_resolving",
    "is_right_resolving",
    "left_closing_delay",
    "matrix_conjugate_check",
    "out_split",
    "parse_matrix",
    "recompose",
    "right_closing_delay",
    "search_esse",
    "serialize_matrix",
    "sse_dr_construct",
    "sym_equal_mod_bijection",
    "sym_mul",
    "verify_esse",
    "verify_right_resolving_factor",
    "verify_split_witness",
    "verify_sse_chain",
    "williams_factorize",
]
