"""Symbolic matrices over the semiring of formal label-word sums.

A symbolic matrix is a square (or, for factor matrices, rectangular) grid
whose entries are formal nonnegative-integer combinations of words over a
finite label alphabet.  A matrix of degree 1 is the labeled adjacency
matrix of a graph and splits into one integral sub-matrix per label:

    A = sum(a * A_a for a in alphabet)

Everything here is exact except :func:`entropy`.
"""

from __future__ import annotations

import math
import numbers
import re
from collections import Counter
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping

import numpy as np
from scipy.sparse.csgraph import connected_components

from .errors import AlphabetError, DegreeError, ShapeError

__all__ = [
    "Alphabet",
    "FormalSum",
    "SymbolicMatrix",
    "EMPTY",
    "parse_sum",
    "format_sum",
    "decompose",
    "recompose",
    "sym_mul",
    "mixed_mul",
    "count_periodic_words",
    "sym_equal_mod_bijection",
    "find_label_bijection",
    "relabel",
    "entropy",
    "as_integer_matrix",
    "as_rational_matrix",
    "is_division_matrix",
    "is_amalgamation_matrix",
    "is_invertible",
]

LABEL_RE = re.compile(r"[a-z][a-z0-9]*\Z")

Word = tuple  # tuple[str, ...], length >= 1


class Alphabet:
    """Finite label set, kept in lexicographic order of the names.

    Names must match ``[a-z][a-z0-9]*`` and no name may be a proper prefix
    of another, so that words written as plain concatenations tokenize
    uniquely.
    """

    def __init__(self, names: Iterable[str]):
        if isinstance(names, Alphabet):
            names = names.labels
        names = sorted(set(names))
        if not names:
            raise AlphabetError("an alphabet needs at least one label")
        for name in names:
            if not isinstance(name, str) or not LABEL_RE.match(name):
                raise AlphabetError(f"bad label name {name!r}; expected [a-z][a-z0-9]*")
        for a, b in zip(names, names[1:]):
            # sorted order puts a prefix directly before some extension of it
            if b.startswith(a):
                raise AlphabetError(f"label {a!r} is a prefix of {b!r}")
        self.labels = tuple(names)
        self._index = {name: i for i, name in enumerate(self.labels)}

    def index(self, name: str) -> int:
        return self._index[name]

    def union(self, other: "Alphabet | Iterable[str]") -> "Alphabet":
        other = other.labels if isinstance(other, Alphabet) else tuple(other)
        return Alphabet(self.labels + other)

    def tokenize(self, text: str) -> Word:
        """Split a concatenated word such as ``'a1a2'`` into labels."""
        out = []
        pos = 0
        while pos < len(text):
            match = None
            for name in self.labels:
                if text.startswith(name, pos) and (match is None or len(name) > len(match)):
                    match = name
            if match is None:
                raise AlphabetError(f"cannot read a label at {text[pos:]!r}")
            out.append(match)
            pos += len(match)
        if not out:
            raise AlphabetError("empty word")
        return tuple(out)

    def __contains__(self, name):
        return name in self._index

    def __iter__(self):
        return iter(self.labels)

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        return f"Alphabet({list(self.labels)!r})"


class FormalSum:
    """Immutable formal sum ``sum(c_w * w)`` with positive integer c_w.

    The empty sum stands for the null entry.  Terms are kept sorted by word.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict = {}
        for word, coef in items:
            word = (word,) if isinstance(word, str) else tuple(word)
            if not word:
                raise ValueError("formal sums have no empty word")
            if not isinstance(coef, numbers.Integral):
                raise TypeError(f"coefficient must be an integer, got {coef!r}")
            if coef < 0:
                raise ValueError(f"negative coefficient {coef} for word {word}")
            if coef:
                acc[word] = acc.get(word, 0) + int(coef)
        self._terms = tuple(sorted(acc.items()))

    @classmethod
    def of(cls, *labels: str) -> "FormalSum":
        """Sum of single-label words, e.g. ``FormalSum.of('a1', 'a1', 'a2')``."""
        return cls(Counter((name,) for name in labels))

    @property
    def terms(self):
        return self._terms

    def as_dict(self) -> dict:
        return dict(self._terms)

    def coefficient(self, word) -> int:
        word = (word,) if isinstance(word, str) else tuple(word)
        return dict(self._terms).get(word, 0)

    @property
    def mass(self) -> int:
        return sum(c for _, c in self._terms)

    @property
    def degrees(self) -> set:
        return {len(w) for w, _ in self._terms}

    def labels(self) -> set:
        return {x for w, _ in self._terms for x in w}

    def scale(self, k: int) -> "FormalSum":
        if k == 0:
            return EMPTY
        return FormalSum((w, c * k) for w, c in self._terms)

    def map_labels(self, mapping: Mapping[str, str]) -> "FormalSum":
        return FormalSum((tuple(mapping[x] for x in w), c) for w, c in self._terms)

    def reversed_words(self) -> "FormalSum":
        return FormalSum((w[::-1], c) for w, c in self._terms)

    def __add__(self, other):
        if not isinstance(other, FormalSum):
            return NotImplemented
        if not other._terms:
            return self
        if not self._terms:
            return other
        return FormalSum(list(self._terms) + list(other._terms))

    def __mul__(self, other):
        if isinstance(other, numbers.Integral):
            return self.scale(other)
        if not isinstance(other, FormalSum):
            return NotImplemented
        acc: dict = {}
        for w1, c1 in self._terms:
            for w2, c2 in other._terms:
                w = w1 + w2
                acc[w] = acc.get(w, 0) + c1 * c2
        return FormalSum(acc)

    def __rmul__(self, other):
        if isinstance(other, numbers.Integral):
            return self.scale(other)
        return NotImplemented

    def __bool__(self):
        return bool(self._terms)

    def __eq__(self, other):
        return isinstance(other, FormalSum) and self._terms == other._terms

    def __hash__(self):
        return hash(self._terms)

    def __repr__(self):
        return f"FormalSum({format_sum(self)!r})"

    def __str__(self):
        return format_sum(self)


EMPTY = FormalSum()

_TERM_RE = re.compile(r"\s*(\d*)\s*\*?\s*([a-z][a-z0-9]*)\s*\Z")


def parse_sum(text: str, alphabet: Alphabet | None = None) -> FormalSum:
    """Parse an entry like ``'2a1+a2'``; ``'.'`` (or ``'∅'``) is the empty sum.

    Without an alphabet every term is a coefficient followed by one label.
    With an alphabet, concatenated words are tokenized against it.
    """
    text = text.strip()
    if text in (".", "∅", "", "0"):
        return EMPTY
    acc: Counter = Counter()
    for raw in text.split("+"):
        if raw.strip().startswith("-"):
            raise ValueError(f"negative coefficient in {raw.strip()!r}")
        m = _TERM_RE.match(raw)
        if not m:
            raise ValueError(f"cannot parse term {raw.strip()!r}")
        coef = int(m.group(1)) if m.group(1) else 1
        body = m.group(2)
        if alphabet is None:
            word = (body,)
        else:
            try:
                word = alphabet.tokenize(body)
            except AlphabetError as exc:
                raise ValueError(f"unknown label in term {raw.strip()!r}: {exc}") from None
        acc[word] += coef
    return FormalSum(acc)


def format_sum(s: FormalSum) -> str:
    if not s:
        return "."
    parts = []
    for word, coef in s.terms:
        body = "".join(word)
        parts.append(body if coef == 1 else f"{coef}{body}")
    return "+".join(parts)


def _as_sum(value, alphabet) -> FormalSum:
    if isinstance(value, FormalSum):
        return value
    if value is None or (isinstance(value, numbers.Integral) and value == 0):
        return EMPTY
    if isinstance(value, str):
        return parse_sum(value, alphabet)
    raise TypeError(f"cannot use {value!r} as a matrix entry")


class SymbolicMatrix:
    """Immutable matrix of :class:`FormalSum` entries with a fixed degree.

    Every stored word has length ``degree``.  Entries may be given as
    FormalSum objects or as strings in the ``'2a1+a2'`` syntax.  When no
    alphabet is given it is inferred from the labels that occur.

    Equality compares shape, degree and entries; the declared alphabet is
    metadata and does not take part.
    """

    def __init__(self, entries, alphabet=None, degree: int | None = None):
        alpha = Alphabet(alphabet) if alphabet is not None else None
        rows = tuple(tuple(_as_sum(e, alpha) for e in row) for row in entries)
        if not rows or not rows[0]:
            raise ShapeError("a symbolic matrix needs at least one row and one column")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ShapeError("rows have different lengths")
        used = set().union(*(e.labels() for row in rows for e in row))
        if alpha is None:
            if not used:
                raise AlphabetError("cannot infer an alphabet from an all-empty matrix")
            alpha = Alphabet(used)
        elif not used <= set(alpha.labels):
            raise AlphabetError(f"labels {sorted(used - set(alpha.labels))} not in {alpha}")
        degs = set().union(*(e.degrees for row in rows for e in row))
        if len(degs) > 1:
            raise DegreeError(f"mixed word lengths {sorted(degs)} in one matrix")
        if degs:
            found = degs.pop()
            if degree is not None and degree != found:
                raise DegreeError(f"entries have degree {found}, expected {degree}")
            degree = found
        elif degree is None:
            degree = 1
        self._rows = rows
        self.alphabet = alpha
        self.degree = degree

    # construction helpers -------------------------------------------------

    @classmethod
    def empty(cls, rows: int, cols: int, alphabet, degree: int = 1) -> "SymbolicMatrix":
        return cls([[EMPTY] * cols for _ in range(rows)], alphabet, degree)

    @classmethod
    def diagonal(cls, entries, alphabet=None) -> "SymbolicMatrix":
        entries = [_as_sum(e, Alphabet(alphabet) if alphabet else None) for e in entries]
        n = len(entries)
        return cls([[entries[i] if i == j else EMPTY for j in range(n)] for i in range(n)], alphabet)

    @classmethod
    def from_components(cls, comps: Mapping, shape=None, alphabet=None, degree=None):
        """Build ``sum(w * M_w)`` from a word (or label) -> integer matrix map."""
        mats = {}
        for key, m in comps.items():
            word = (key,) if isinstance(key, str) else tuple(key)
            mats[word] = as_integer_matrix(m)
        shapes = {m.shape for m in mats.values()}
        if shape is not None:
            shapes.add(tuple(shape))
        if len(shapes) != 1:
            raise ShapeError(f"components have shapes {sorted(shapes)}")
        r, c = shapes.pop()
        grid = [[dict() for _ in range(c)] for _ in range(r)]
        for word, m in mats.items():
            for i, j in zip(*np.nonzero(m)):
                grid[i][j][word] = int(m[i, j])
        if alphabet is None:
            used = {x for w, m in mats.items() if m.any() for x in w}
            alphabet = used or {x for w in mats for x in w}
        return cls([[FormalSum(e) for e in row] for row in grid], alphabet, degree)

    # accessors ------------------------------------------------------------

    @property
    def shape(self) -> tuple:
        return (len(self._rows), len(self._rows[0]))

    @property
    def rows(self) -> int:
        return len(self._rows)

    @property
    def cols(self) -> int:
        return len(self._rows[0])

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    @property
    def entries(self) -> tuple:
        return self._rows

    def __getitem__(self, ij) -> FormalSum:
        i, j = ij
        return self._rows[i][j]

    @cached_property
    def _components(self) -> dict:
        out: dict = {}
        for i, row in enumerate(self._rows):
            for j, e in enumerate(row):
                for word, c in e.terms:
                    if word not in out:
                        out[word] = np.zeros(self.shape, dtype=np.int64)
                    out[word][i, j] += c
        return dict(sorted(out.items()))

    def components(self) -> dict:
        """Word -> integer matrix map (fresh copies, zero matrices omitted)."""
        return {w: m.copy() for w, m in self._components.items()}

    def total(self) -> np.ndarray:
        """Integral matrix obtained by forgetting labels."""
        out = np.zeros(self.shape, dtype=np.int64)
        for m in self._components.values():
            out += m
        return out

    def is_degenerate(self) -> bool:
        """True if some row or column is entirely empty."""
        t = self.total()
        return bool((t.sum(axis=1) == 0).any() or (t.sum(axis=0) == 0).any())

    def transpose(self) -> "SymbolicMatrix":
        """Time reversal: transpose the grid and reverse every word."""
        rows = [[self._rows[i][j].reversed_words() for i in range(self.rows)] for j in range(self.cols)]
        return SymbolicMatrix(rows, self.alphabet, self.degree)

    def with_alphabet(self, alphabet) -> "SymbolicMatrix":
        return SymbolicMatrix(self._rows, alphabet, self.degree)

    def __eq__(self, other):
        if not isinstance(other, SymbolicMatrix):
            return NotImplemented
        return self.degree == other.degree and self._rows == other._rows

    def __hash__(self):
        return hash((self.degree, self._rows))

    def __repr__(self):
        body = "; ".join(" | ".join(format_sum(e) for e in row) for row in self._rows)
        return f"SymbolicMatrix([{body}])"

    def __str__(self):
        cells = [[format_sum(e) for e in row] for row in self._rows]
        width = max(len(c) for row in cells for c in row)
        return "\n".join("  ".join(c.rjust(width) for c in row) for row in cells)


# integer / rational matrix helpers -----------------------------------------


def as_integer_matrix(m, nonneg: bool = True) -> np.ndarray:
    arr = np.asarray(m)
    if arr.ndim != 2:
        raise ShapeError(f"expected a 2-d matrix, got shape {arr.shape}")
    if arr.size and not all(float(x).is_integer() for x in arr.flat):
        raise ValueError("matrix has non-integer entries")
    out = arr.astype(np.int64)
    if nonneg and (out < 0).any():
        raise ValueError("matrix has negative entries")
    return out


def as_rational_matrix(m) -> np.ndarray:
    """Object array of Fractions; accepts ints, Fractions and 'p/q' strings."""
    rows = [[Fraction(x) if not isinstance(x, (float, np.floating)) else Fraction(x).limit_denominator()
             for x in row] for row in (m.tolist() if isinstance(m, np.ndarray) else m)]
    arr = np.empty((len(rows), len(rows[0]) if rows else 0), dtype=object)
    for i, row in enumerate(rows):
        if len(row) != arr.shape[1]:
            raise ShapeError("ragged rational matrix")
        for j, x in enumerate(row):
            arr[i, j] = x
    return arr


def is_division_matrix(s) -> bool:
    """0/1 matrix with exactly one 1 per column and at least one per row."""
    s = np.asarray(s)
    if s.ndim != 2 or not np.isin(s, (0, 1)).all():
        return False
    return bool((s.sum(axis=0) == 1).all() and (s.sum(axis=1) >= 1).all())


def is_amalgamation_matrix(s) -> bool:
    """0/1 matrix with exactly one 1 per row and at least one per column."""
    s = np.asarray(s)
    return s.ndim == 2 and is_division_matrix(s.T)


def is_invertible(w) -> bool:
    """Exact invertibility over the rationals."""
    import sympy

    w = as_rational_matrix(w)
    if w.shape[0] != w.shape[1]:
        return False
    return sympy.Matrix(w.tolist()).rank() == w.shape[0]


# decomposition --------------------------------------------------------------


def decompose(a: SymbolicMatrix) -> dict:
    """Label -> integral sub-matrix map of a degree-1 matrix.

    Labels whose sub-matrix is zero are omitted; the result is ordered by
    the alphabet.
    """
    if a.degree != 1:
        raise DegreeError(f"decompose needs a degree-1 matrix, got degree {a.degree}")
    return {w[0]: m for w, m in a.components().items()}


def recompose(m: Mapping, alphabet=None, shape=None) -> SymbolicMatrix:
    """Inverse of :func:`decompose`: ``sum(a * m[a])``."""
    shapes = {np.asarray(x).shape for x in m.values()}
    if shape is not None:
        shapes.add(tuple(shape))
    if len(shapes) != 1:
        raise ShapeError(f"sub-matrices have shapes {sorted(shapes)}")
    if alphabet is None:
        alphabet = list(m)
    return SymbolicMatrix.from_components(m, shape=shape, alphabet=alphabet, degree=1)


# products -------------------------------------------------------------------


def _joint_alphabet(a: SymbolicMatrix, b: SymbolicMatrix) -> Alphabet:
    return a.alphabet if a.alphabet == b.alphabet else a.alphabet.union(b.alphabet)


def sym_mul(a: SymbolicMatrix, b: SymbolicMatrix) -> SymbolicMatrix:
    """Product in the word semiring; words concatenate, so order matters."""
    if a.cols != b.rows:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    rows = []
    for i in range(a.rows):
        row = []
        for j in range(b.cols):
            acc = EMPTY
            for k in range(a.cols):
                x, y = a[i, k], b[k, j]
                if x and y:
                    acc = acc + x * y
            row.append(acc)
        rows.append(row)
    return SymbolicMatrix(rows, _joint_alphabet(a, b), a.degree + b.degree)


def mixed_mul(s, a: SymbolicMatrix, side: str = "left") -> SymbolicMatrix:
    """``S·A`` (side='left') or ``A·S`` (side='right') for integral S."""
    s = as_integer_matrix(s)
    if side == "left":
        if s.shape[1] != a.rows:
            raise ShapeError(f"cannot multiply {s.shape} by {a.shape}")
        shape = (s.shape[0], a.cols)
        comps = {w: s @ m for w, m in a.components().items()}
    elif side == "right":
        if a.cols != s.shape[0]:
            raise ShapeError(f"cannot multiply {a.shape} by {s.shape}")
        shape = (a.rows, s.shape[1])
        comps = {w: m @ s for w, m in a.components().items()}
    else:
        raise ValueError("side must be 'left' or 'right'")
    return SymbolicMatrix.from_components(comps, shape=shape, alphabet=a.alphabet, degree=a.degree)


# invariants -----------------------------------------------------------------


def count_periodic_words(a: SymbolicMatrix, n: int) -> int:
    """Coefficient mass of trace(A^n): labeled cycles of length n."""
    if not a.is_square:
        raise ShapeError("count_periodic_words needs a square matrix")
    if n < 1:
        raise ValueError("n must be positive")
    t = a.total().astype(object)
    p = t.copy()
    for _ in range(n - 1):
        p = p.dot(t)
    return int(sum(p[i, i] for i in range(a.rows)))


def _fingerprints(comps: Mapping, labels) -> dict:
    fp = {x: [] for x in labels}
    for word, m in comps.items():
        key = tuple(map(tuple, np.asarray(m).tolist()))
        for x in set(word):
            fp.setdefault(x, []).append((tuple(i for i, y in enumerate(word) if y == x), key))
    return {x: tuple(sorted(v)) for x, v in fp.items()}


def _canon_key(m):
    return tuple(map(tuple, np.asarray(m).tolist()))


def find_label_bijection(comps_a: Mapping, comps_b: Mapping, labels_a, labels_b) -> dict | None:
    """Lexicographically least label bijection carrying one component map to another.

    ``comps_*`` map words (tuples of labels) to matrices of any exact
    numeric type; zero matrices may be present or omitted.  Returns a dict
    ``{label_a: label_b}`` such that for every word w,
    ``comps_b[beta(w)] == comps_a[w]``, or None.  Candidate images are
    pruned by per-label fingerprints before the exhaustive search.
    """
    labels_a, labels_b = list(labels_a), list(labels_b)
    if len(labels_a) != len(labels_b):
        return None

    def nz(comps):
        return {tuple(w): _canon_key(m) for w, m in comps.items() if np.asarray(m).any()}

    ka, kb = nz(comps_a), nz(comps_b)
    if sorted(kb.values()) != sorted(ka.values()) or len(ka) != len(kb):
        return None
    fa = _fingerprints({w: comps_a[w] for w in comps_a if tuple(w) in ka}, labels_a)
    fb = _fingerprints({w: comps_b[w] for w in comps_b if tuple(w) in kb}, labels_b)
    options = {x: [y for y in labels_b if fb.get(y, ()) == fa.get(x, ())] for x in labels_a}

    def consistent(beta):
        for w, key in ka.items():
            if all(x in beta for x in w):
                if kb.get(tuple(beta[x] for x in w)) != key:
                    return False
        return True

    beta: dict = {}
    used: set = set()

    def search(k):
        if k == len(labels_a):
            return True
        x = labels_a[k]
        for y in options[x]:
            if y in used:
                continue
            beta[x] = y
            used.add(y)
            if consistent(beta) and search(k + 1):
                return True
            del beta[x]
            used.discard(y)
        return False

    return dict(beta) if search(0) else None


def sym_equal_mod_bijection(a: SymbolicMatrix, b: SymbolicMatrix) -> dict | None:
    """Label bijection beta with beta(A) == B entrywise, or None.

    The bijection runs between the two declared alphabets, which must have
    the same size.
    """
    if a.shape != b.shape or a.degree != b.degree:
        return None
    return find_label_bijection(a.components(), b.components(), a.alphabet.labels, b.alphabet.labels)


def relabel(a: SymbolicMatrix, mapping: Mapping[str, str], alphabet=None) -> SymbolicMatrix:
    """Apply a label map to every word of ``a``."""
    rows = [[e.map_labels(mapping) for e in row] for row in a.entries]
    if alphabet is None:
        alphabet = [mapping.get(x, x) for x in a.alphabet]
    return SymbolicMatrix(rows, alphabet, a.degree)


# entropy --------------------------------------------------------------------


def _perron_root(m: np.ndarray, rtol: float, max_iter: int) -> float:
    """Spectral radius of an irreducible nonnegative matrix.

    Iterates on M + I (primitive, same Perron vector) and stops when the
    Collatz-Wielandt bounds min(Px/x) <= rho+1 <= max(Px/x) agree.
    """
    n = m.shape[0]
    if n == 1:
        return float(m[0, 0])
    p = m.astype(float) + np.eye(n)
    x = np.ones(n)
    lo = hi = 0.0
    for _ in range(max_iter):
        y = p @ x
        ratios = y / x
        lo, hi = ratios.min(), ratios.max()
        if hi - lo <= rtol * hi:
            break
        x = y / y.max()
    return 0.5 * (lo + hi) - 1.0


def entropy(a: SymbolicMatrix, rtol: float = 1e-12, max_iter: int = 200_000) -> float:
    """Natural log of the spectral radius of the total matrix.

    The radius is the maximum over irreducible components, each computed by
    power iteration.  Returns ``-inf`` when the radius is 0.
    """
    if not a.is_square:
        raise ShapeError("entropy needs a square matrix")
    t = a.total()
    ncomp, labels = connected_components(t, directed=True, connection="strong")
    rho = 0.0
    for c in range(ncomp):
        idx = np.flatnonzero(labels == c)
        block = t[np.ix_(idx, idx)]
        if not block.any():
            continue
        rho = max(rho, _perron_root(block, rtol, max_iter))
    return math.log(rho) if rho > 0 else -math.inf
