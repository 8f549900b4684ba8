"""Strong shift equivalence for symbolic matrices.

Conventions
-----------
An :class:`EsseWitness` is a pair (R, S): R a degree-1 symbolic matrix and
S an integral division matrix.  With ``orientation='RS'`` it certifies
``A = R·S, B = S·R``; with ``'SR'`` it certifies ``A = S·R, B = R·S``.
An out-split witness ``(A = S·R, B = R·S)`` is therefore an 'SR' witness
from A to B, or an 'RS' witness from B to A.

Conjugacy checks run over exact rationals: ``A·W ≃ W·B`` means there is a
label bijection beta with ``A_a·W == W·B_beta(a)`` for every label a.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import BudgetError, DegeneracyError, FormError, ShapeError, SingularError
from .splitting import SplitWitness, verify_split_witness
from .symalg import (
    SymbolicMatrix,
    as_integer_matrix,
    as_rational_matrix,
    decompose,
    find_label_bijection,
    is_division_matrix,
    is_invertible,
    mixed_mul,
    recompose,
)

__all__ = [
    "EsseWitness",
    "SseChain",
    "SearchBounds",
    "WilliamsFactorization",
    "DiagonalRefactorization",
    "SseDrResult",
    "BlockConjugacyCertificate",
    "verify_esse",
    "verify_sse_chain",
    "search_esse",
    "williams_factorize",
    "sse_dr_construct",
    "block_conjugacy_construct",
    "matrix_conjugate_check",
    "conj_lift_diagonal",
    "find_conjugating_permutation",
]

CANDIDATE_BUDGET = 10**8


@dataclass(frozen=True, eq=False)
class EsseWitness:
    R: SymbolicMatrix
    S: np.ndarray
    orientation: str = "RS"

    def __post_init__(self):
        if self.orientation not in ("RS", "SR"):
            raise ValueError("orientation must be 'RS' or 'SR'")
        object.__setattr__(self, "S", as_integer_matrix(self.S))

    def endpoints(self) -> tuple:
        """The (A, B) pair this witness connects."""
        rs = mixed_mul(self.S, self.R, "right")
        sr = mixed_mul(self.S, self.R, "left")
        return (rs, sr) if self.orientation == "RS" else (sr, rs)

    def reversed(self) -> "EsseWitness":
        return EsseWitness(self.R, self.S, "SR" if self.orientation == "RS" else "RS")

    @classmethod
    def from_split(cls, w: SplitWitness) -> "EsseWitness":
        """An out-split (row) witness, as a link from w.A to w.B."""
        if w.kind != "row":
            raise ValueError("only row (division-matrix) splittings are elementary equivalences")
        return cls(w.R, w.S, "SR")


def verify_esse(a: SymbolicMatrix, b: SymbolicMatrix, w: EsseWitness) -> bool:
    if w.R.degree != 1 or not is_division_matrix(w.S):
        return False
    try:
        x, y = w.endpoints()
    except ShapeError:
        return False
    return x == a and y == b


@dataclass(frozen=True)
class SseChain:
    """Chain of elementary equivalences; ``lag`` is ``len(links) - 1``."""

    links: tuple

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        if not self.links:
            raise ValueError("a chain needs at least one link")

    @property
    def lag(self) -> int:
        return len(self.links) - 1

    def matrices(self) -> list:
        """A, the intermediates, and B as produced by the links."""
        out = []
        for w in self.links:
            x, y = w.endpoints()
            if not out:
                out.append(x)
            out.append(y)
        return out


def verify_sse_chain(a: SymbolicMatrix, b: SymbolicMatrix, chain: SseChain) -> bool:
    current = a
    for w in chain.links:
        if w.R.degree != 1 or not is_division_matrix(w.S):
            return False
        try:
            x, y = w.endpoints()
        except ShapeError:
            return False
        if x != current:
            return False
        current = y
    return current == b


# bounded search -------------------------------------------------------------


@dataclass(frozen=True)
class SearchBounds:
    max_dim: int = 3
    max_coef: int = 2

    def __post_init__(self):
        if self.max_dim < 1 or self.max_coef < 1:
            raise ValueError("search bounds must be positive")


def _division_from_map(sigma, rows: int) -> np.ndarray:
    s = np.zeros((rows, len(sigma)), dtype=np.int64)
    for j, r in enumerate(sigma):
        s[r, j] = 1
    return s


def _factor_through(cols: list, sigma, p: int):
    """Columns c_r with cols[j] == c_sigma(j) for all j, or None."""
    chosen = [None] * p
    for j, r in enumerate(sigma):
        if chosen[r] is None:
            chosen[r] = cols[j]
        elif chosen[r] != cols[j]:
            return None
    return chosen


def search_esse(a: SymbolicMatrix, b: SymbolicMatrix, bounds: SearchBounds = SearchBounds()):
    """Exhaustive search for an elementary equivalence witness from A to B.

    Division matrices are enumerated by their column -> row maps in
    lexicographic order, orientation 'RS' before 'SR'.  Once S is fixed,
    exactly one R can satisfy the first identity (each column of R is a
    column of the product), so enumerating S is exhaustive over all R whose
    coefficients stay within ``bounds.max_coef``.
    """
    if not (a.is_square and b.is_square) or a.degree != 1 or b.degree != 1:
        raise ShapeError("search_esse needs square degree-1 matrices")
    plans = []
    # 'RS': A = R·S with S (|B| x |A|); 'SR': A = S·R with S (|A| x |B|)
    if b.rows <= a.rows and b.rows <= bounds.max_dim:
        plans.append(("RS", b.rows, a.rows))
    if a.rows <= b.rows and b.rows <= bounds.max_dim:
        plans.append(("SR", a.rows, b.rows))
    total = sum(p**n for _, p, n in plans)
    if total > CANDIDATE_BUDGET:
        raise BudgetError(f"{total} candidate division matrices exceed the budget of {CANDIDATE_BUDGET}")
    for orientation, p, n in plans:
        known = a if orientation == "RS" else b
        cols = [tuple(known[i, j] for i in range(known.rows)) for j in range(n)]
        for sigma in itertools.product(range(p), repeat=n):
            if len(set(sigma)) != p:
                continue
            chosen = _factor_through(cols, sigma, p)
            if chosen is None:
                continue
            if any(c > bounds.max_coef for col in chosen for e in col for _, c in e.terms):
                continue
            r = SymbolicMatrix([[chosen[c][i] for c in range(p)] for i in range(known.rows)], known.alphabet, 1)
            w = EsseWitness(r, _division_from_map(sigma, p), orientation)
            if verify_esse(a, b, w):
                return w
    return None


# Williams factorization -----------------------------------------------------


@dataclass(frozen=True, eq=False)
class WilliamsFactorization:
    """M = U·D·V with U division, D diagonal, V amalgamation.

    ``positions`` lists the nonzero entries (i, j) of M in row-major order;
    they index the columns of U, the diagonal of D and the rows of V.
    """

    U: np.ndarray
    D: object
    V: np.ndarray
    positions: tuple

    def product(self):
        if isinstance(self.D, SymbolicMatrix):
            return mixed_mul(self.U, mixed_mul(self.V, self.D, "right"), "left")
        return self.U @ self.D @ self.V


def _nonzero_positions(nonzero) -> tuple:
    return tuple((i, j) for i in range(nonzero.shape[0]) for j in range(nonzero.shape[1]) if nonzero[i, j])


def _williams_frame(shape, positions):
    rows, cols = shape
    u = np.zeros((rows, len(positions)), dtype=np.int64)
    v = np.zeros((len(positions), cols), dtype=np.int64)
    for e, (i, j) in enumerate(positions):
        u[i, e] = 1
        v[e, j] = 1
    return u, v


def williams_factorize(m) -> WilliamsFactorization:
    """Williams factorization of a symbolic or nonnegative integral matrix."""
    if isinstance(m, SymbolicMatrix):
        nonzero = np.array([[bool(e) for e in row] for row in m.entries])
    else:
        m = as_integer_matrix(m)
        nonzero = m != 0
    if not nonzero.any(axis=1).all() or not nonzero.any(axis=0).all():
        raise DegeneracyError("Williams factorization needs a matrix without empty rows or columns")
    positions = _nonzero_positions(nonzero)
    u, v = _williams_frame(nonzero.shape, positions)
    if isinstance(m, SymbolicMatrix):
        d = SymbolicMatrix.diagonal([m[i, j] for i, j in positions], m.alphabet)
    else:
        d = np.diag([int(m[i, j]) for i, j in positions]).astype(np.int64)
    out = WilliamsFactorization(u, d, v, positions)
    got = out.product()
    if (got != m) if isinstance(m, SymbolicMatrix) else not np.array_equal(got, m):
        raise AssertionError("Williams factorization does not reproduce the matrix")
    return out


# diagonal refactorization ---------------------------------------------------


def _is_nondegenerate_diagonal(d: SymbolicMatrix) -> bool:
    return d.is_square and all(
        bool(d[i, j]) == (i == j) for i in range(d.rows) for j in range(d.cols)
    )


@dataclass(frozen=True, eq=False)
class DiagonalRefactorization:
    """C1 = D·X and C2 = X·D with D symbolic diagonal and X integral."""

    D: SymbolicMatrix
    X: np.ndarray
    C1: SymbolicMatrix
    C2: SymbolicMatrix

    def verify(self) -> bool:
        if not _is_nondegenerate_diagonal(self.D):
            return False
        try:
            return mixed_mul(self.X, self.D, "right") == self.C1 and mixed_mul(self.X, self.D, "left") == self.C2
        except (ShapeError, ValueError):
            return False


@dataclass(frozen=True, eq=False)
class SseDrResult:
    C1: SymbolicMatrix
    C2: SymbolicMatrix
    refactorization: DiagonalRefactorization
    row_witness: SplitWitness
    column_witness: SplitWitness
    checks: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return all(self.checks.values())


def sse_dr_construct(a: SymbolicMatrix, b: SymbolicMatrix, w: EsseWitness) -> SseDrResult:
    """Diagonal refactorization through an elementary equivalence A = R·S, B = S·R.

    With Williams factorizations R = U_R D_R V_R and S = U_S D_S V_S, set
    X = V_R U_S D_S V_S U_R, C1 = D_R·X and C2 = X·D_R.  Then C1 is a row
    splitting of A (A = U_R·(D_R V_R U_S D_S V_S)), C2 a column splitting
    of B (B = (U_S D_S V_S U_R D_R)·V_R), and (C1, C2) a diagonal
    refactorization.
    """
    if w.orientation != "RS":
        raise ValueError("sse_dr_construct needs an 'RS' witness (A = R·S); pass w.reversed() with A and B swapped")
    if not verify_esse(a, b, w):
        raise ValueError("witness does not certify A = R·S, B = S·R")
    for name, mat in (("A", a), ("B", b), ("R", w.R)):
        if mat.is_degenerate():
            raise DegeneracyError(f"{name} is degenerate")
    wr = williams_factorize(w.R)
    ws = williams_factorize(w.S)
    x = wr.V @ ws.U @ ws.D @ ws.V @ wr.U
    c1 = mixed_mul(x, wr.D, "right")
    c2 = mixed_mul(x, wr.D, "left")
    x1 = mixed_mul(wr.V @ ws.U @ ws.D @ ws.V, wr.D, "right")
    y2 = mixed_mul(ws.U @ ws.D @ ws.V @ wr.U, wr.D, "left")
    row = SplitWitness("row", "out", x1, wr.U, a, c1)
    col = SplitWitness("column", "in", y2, wr.V, b, c2)
    refac = DiagonalRefactorization(wr.D, x, c1, c2)
    checks = {
        "row_splitting": verify_split_witness(row),
        "diagonal_refactorization": refac.verify(),
        "column_splitting": verify_split_witness(col),
    }
    return SseDrResult(c1, c2, refac, row, col, checks)


# lifted conjugacy from diagonal sub-matrix data --------------------------------


@dataclass(frozen=True, eq=False)
class BlockConjugacyCertificate:
    """Row splitting A' of A and column splitting B' of B with A'·W ≃ W·B'.

    ``AW`` and ``WB`` hold the per-label signed products A'_a·W and W·B'_a.
    """

    E: np.ndarray
    k: int
    components: dict
    A: SymbolicMatrix
    B: SymbolicMatrix
    A_split: SymbolicMatrix
    B_split: SymbolicMatrix
    U: np.ndarray
    V: np.ndarray
    X: SymbolicMatrix
    Y: SymbolicMatrix
    W: np.ndarray
    AW: dict
    WB: dict
    checks: dict

    @property
    def verified(self) -> bool:
        return all(self.checks.values())


def _diag_block(d, n: int | None):
    arr = np.asarray(d)
    if arr.ndim == 1:
        return [int(x) for x in arr], False
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise FormError("the diagonal factor must be a vector or a square matrix")
    if np.count_nonzero(arr - np.diag(np.diag(arr))):
        raise FormError("the diagonal factor is not diagonal")
    return [int(x) for x in np.diag(arr)], n is not None and arr.shape[0] == n


def block_conjugacy_construct(components: Mapping, d, k: int | None = None, alphabet=None) -> BlockConjugacyCertificate:
    """Build the splittings and the conjugating matrix for A_a = D·C_a, B_a = C_a·D.

    ``components`` maps labels to the n x n integral matrices C_a.  ``d`` is
    either the k diagonal entries of E, a k x k diagonal E, or the full
    n x n diagonal D = diag(E, I_{n-k}) (then k is taken from the argument,
    or from the last diagonal entry different from 1).
    """
    comps = {x: as_integer_matrix(c) for x, c in components.items()}
    if not comps:
        raise ValueError("no components given")
    shapes = {c.shape for c in comps.values()}
    if len(shapes) != 1 or next(iter(shapes))[0] != next(iter(shapes))[1]:
        raise ShapeError("components must be square and of one size")
    n = next(iter(shapes))[0]
    diag, is_full = _diag_block(d, n)
    if is_full:
        if k is None:
            nontrivial = [i for i, x in enumerate(diag) if x != 1]
            k = nontrivial[-1] + 1 if nontrivial else n
        if any(x != 1 for x in diag[k:]):
            raise FormError("D must have an identity block after its first k entries")
        diag = diag[:k]
    k = len(diag)
    if not 1 <= k <= n:
        raise FormError(f"need 1 <= k <= n, got k={k}, n={n}")
    if any(x == 0 for x in diag):
        raise SingularError("E has a zero on its diagonal")
    if any(x < 0 for x in diag):
        raise FormError("E must be nonnegative for A and B to be symbolic matrices")
    e = np.diag(diag).astype(np.int64)
    ik, ir = np.eye(k, dtype=np.int64), np.eye(n - k, dtype=np.int64)
    zkr = np.zeros((k, n - k), dtype=np.int64)
    dmat = np.block([[e, zkr], [zkr.T, ir]])
    u = np.block([[ik, ik, zkr], [zkr.T, zkr.T, ir]])
    v = u.T.copy()
    w = np.block([[np.zeros((k, k), dtype=np.int64), ik, zkr], [ik, e - 2 * ik, zkr], [zkr.T, zkr.T, ir]])
    em = e - ik
    xs, ys, a_c, b_c, a2, b2 = {}, {}, {}, {}, {}, {}
    for lab, c in comps.items():
        c1, c2, c3, c4 = c[:k, :k], c[:k, k:], c[k:, :k], c[k:, k:]
        xs[lab] = np.block([[c1, c2], [em @ c1, em @ c2], [c3, c4]])
        ys[lab] = np.block([[c1, c1 @ em, c2], [c3, c3 @ em, c4]])
        a_c[lab] = dmat @ c
        b_c[lab] = c @ dmat
        a2[lab] = xs[lab] @ u
        b2[lab] = v @ ys[lab]
    alphabet = alphabet if alphabet is not None else list(comps)
    sym = lambda m, shape: recompose(m, alphabet=alphabet, shape=shape)  # noqa: E731
    a, b = sym(a_c, (n, n)), sym(b_c, (n, n))
    x, y = sym(xs, (n + k, n)), sym(ys, (n, n + k))
    a_split, b_split = sym(a2, (n + k, n + k)), sym(b2, (n + k, n + k))
    aw = {lab: m.astype(object) @ w.astype(object) for lab, m in a2.items()}
    wb = {lab: w.astype(object) @ m.astype(object) for lab, m in b2.items()}
    row = SplitWitness("row", "out", x, u, a, a_split)
    col = SplitWitness("column", "in", y, v, b, b_split)
    checks = {
        "A = U·X": mixed_mul(u, x, "left") == a,
        "A' = X·U": mixed_mul(u, x, "right") == a_split,
        "B = Y·V": mixed_mul(v, y, "right") == b,
        "B' = V·Y": mixed_mul(v, y, "left") == b_split,
        "W invertible": is_invertible(w),
        "A'W ~ WB'": matrix_conjugate_check(a_split, b_split, w),
        "row splitting": verify_split_witness(row),
        "column splitting": verify_split_witness(col),
    }
    return BlockConjugacyCertificate(e, k, comps, a, b, a_split, b_split, u, v, x, y, w, aw, wb, checks)


def _label_products(a: SymbolicMatrix, b: SymbolicMatrix, w: np.ndarray):
    ca = {lab: comp.astype(object) @ w for lab, comp in a.components().items()}
    cb = {lab: w @ comp.astype(object) for lab, comp in b.components().items()}
    return ca, cb


def matrix_conjugate_check(a: SymbolicMatrix, b: SymbolicMatrix, w) -> bool:
    """True iff W is invertible over Q and A·W ≃ W·B up to a label bijection."""
    w = as_rational_matrix(w)
    n = w.shape[0]
    if not (a.is_square and b.is_square) or w.shape != (n, n) or a.rows != n or b.rows != n:
        return False
    if a.degree != b.degree or not is_invertible(w):
        return False
    ca, cb = _label_products(a, b, w)
    return find_label_bijection(ca, cb, a.alphabet.labels, b.alphabet.labels) is not None


def _as_diagonal(wi) -> list:
    arr = as_rational_matrix([list(wi)]) if np.asarray(wi, dtype=object).ndim == 1 else as_rational_matrix(wi)
    if arr.shape[0] == 1 and np.asarray(wi, dtype=object).ndim == 1:
        return list(arr[0])
    if arr.shape[0] != arr.shape[1] or any(arr[i, j] != 0 for i in range(arr.shape[0]) for j in range(arr.shape[1]) if i != j):
        raise FormError("per-label conjugators must be diagonal")
    return [arr[i, i] for i in range(arr.shape[0])]


def conj_lift_diagonal(a: SymbolicMatrix, b: SymbolicMatrix, per_label_w: Mapping):
    """A diagonal W with A·W ≃ W·B from diagonal per-label conjugators.

    ``per_label_w[a]`` is a diagonal matrix (or its diagonal) with
    ``W_a^-1 · A_a · W_a == B_a``.  Candidate lifts are tried in a fixed
    order (each W_a, then the entrywise sum and product of the W_a and their
    inverses) and each is verified exactly; returns the first that
    verifies as a rational object array, or None.
    """
    n = a.rows
    ca, cb = decompose(a), decompose(b)
    diags = {}
    for lab in sorted(per_label_w):
        dg = _as_diagonal(per_label_w[lab])
        if len(dg) != n:
            raise ShapeError(f"conjugator for {lab} has size {len(dg)}, expected {n}")
        if any(x == 0 for x in dg):
            raise SingularError(f"conjugator for {lab} is singular")
        diags[lab] = dg
    for lab, dg in diags.items():
        wm = np.diag(np.array(dg, dtype=object))
        winv = np.diag(np.array([1 / x for x in dg], dtype=object))
        am = ca.get(lab, np.zeros((n, n), dtype=np.int64)).astype(object)
        bm = cb.get(lab, np.zeros((n, n), dtype=np.int64)).astype(object)
        if not (winv @ am @ wm == bm).all():
            raise ValueError(f"W_{lab} does not conjugate A_{lab} to B_{lab}")
    seeds = list(diags.values())
    total = [sum(col, Fraction(0)) for col in zip(*seeds)]
    prod = [np.prod(col) for col in zip(*seeds)]
    for extra in (total, prod):
        if all(x != 0 for x in extra):
            seeds.append(extra)
            seeds.append([1 / x for x in extra])
    seen = set()
    for dg in seeds:
        key = tuple(Fraction(x) for x in dg)
        if key in seen:
            continue
        seen.add(key)
        wm = np.diag(np.array(key, dtype=object))
        if matrix_conjugate_check(a, b, wm):
            return wm
    return None


def find_conjugating_permutation(m, nm) -> np.ndarray | None:
    """Lexicographically first permutation matrix P with P^-1·M·P == N."""
    m, nm = as_integer_matrix(m, nonneg=False), as_integer_matrix(nm, nonneg=False)
    if m.shape != nm.shape or m.shape[0] != m.shape[1]:
        return None
    n = m.shape[0]
    for perm in itertools.permutations(range(n)):
        p = np.zeros((n, n), dtype=np.int64)
        for i, j in enumerate(perm):
            p[i, j] = 1
        if np.array_equal(m @ p, p @ nm):
            return p
    return None
