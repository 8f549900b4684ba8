"""Text format for symbolic matrices and JSON certificates.

Matrix text::

    # comments start with '#'
    labels: a1 a2 a3 a4
    degree: 1            (optional, 1 by default)
    2a1+a2 | a2+a3
    a4     | a4

Entries are separated by '|', rows by newlines and '.' is the empty sum.
Without a ``labels:`` header the alphabet is inferred from single-label
terms.  Integral matrices use whitespace- or comma-separated integers, and
rational ones may contain ``p/q``.

Certificates are JSON objects ``{format, version, kind, labels, matrices,
meta}``; every matrix is ``{"type": "symbolic", "degree": d, "rows": [[entry,
...], ...]}``, ``{"type": "integer", "rows": ...}`` or ``{"type": "rational",
"rows": [["1/2", ...], ...]}``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

import numpy as np

from .closing import bi_closing_report
from .equivalence import (
    DiagonalRefactorization,
    EsseWitness,
    SseChain,
    matrix_conjugate_check,
    verify_esse,
    verify_sse_chain,
)
from .errors import ParseError, SoficMatError
from .splitting import SplitWitness, verify_split_witness
from .symalg import (
    Alphabet,
    SymbolicMatrix,
    as_integer_matrix,
    format_sum,
    is_amalgamation_matrix,
    is_division_matrix,
    is_invertible,
    mixed_mul,
    parse_sum,
)

__all__ = [
    "parse_matrix",
    "serialize_matrix",
    "parse_integer_matrix",
    "parse_rational_matrix",
    "format_integer_matrix",
    "Certificate",
    "certificate_to_json",
    "certificate_from_json",
    "verify_certificate",
    "load_schema",
    "CERTIFICATE_FORMAT",
]

CERTIFICATE_FORMAT = "soficmat-certificate"
CERTIFICATE_VERSION = 1

_HEADER_RE = re.compile(r"\s*(labels|degree)\s*:(.*)\Z")


def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].rstrip()


def parse_matrix(text: str) -> SymbolicMatrix:
    alphabet = None
    degree = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        head = _HEADER_RE.match(line)
        if head:
            if rows:
                raise ParseError(f"{head.group(1)} header after the matrix body", lineno, 1)
            key, value = head.group(1), head.group(2).strip()
            value_col = head.start(2) + len(head.group(2)) - len(head.group(2).lstrip()) + 1
            if key == "labels":
                try:
                    alphabet = Alphabet(value.replace(",", " ").split())
                except SoficMatError as exc:
                    raise ParseError(str(exc), lineno, value_col) from None
            else:
                if not value.isdigit() or int(value) < 1:
                    raise ParseError(f"bad degree {value!r}", lineno, value_col)
                degree = int(value)
            continue
        row = []
        col = 1
        for cell in line.split("|"):
            lead = len(cell) - len(cell.lstrip())
            try:
                row.append(parse_sum(cell, alphabet))
            except ValueError as exc:
                raise ParseError(str(exc), lineno, col + lead) from None
            col += len(cell) + 1
        if rows and len(row) != len(rows[0]):
            raise ParseError(f"row has {len(row)} entries, expected {len(rows[0])}", lineno, 1)
        rows.append(row)
    if not rows:
        raise ParseError("no matrix rows found")
    try:
        return SymbolicMatrix(rows, alphabet, degree)
    except SoficMatError as exc:
        raise ParseError(str(exc)) from None


def serialize_matrix(a: SymbolicMatrix) -> str:
    lines = ["labels: " + " ".join(a.alphabet.labels)]
    if a.degree != 1:
        lines.append(f"degree: {a.degree}")
    for row in a.entries:
        lines.append("|".join(format_sum(e) for e in row))
    return "\n".join(lines)


def _parse_numeric_rows(text: str, convert) -> list:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        row = []
        for tok in re.split(r"[\s,]+", line.strip("[] ")):
            if not tok:
                continue
            try:
                row.append(convert(tok.strip("[]")))
            except (ValueError, ZeroDivisionError):
                raise ParseError(f"not a number: {tok!r}", lineno, raw.find(tok) + 1) from None
        if rows and len(row) != len(rows[0]):
            raise ParseError(f"row has {len(row)} entries, expected {len(rows[0])}", lineno, 1)
        rows.append(row)
    if not rows:
        raise ParseError("no matrix rows found")
    return rows


def parse_integer_matrix(text: str) -> np.ndarray:
    return np.array(_parse_numeric_rows(text, int), dtype=np.int64)


def parse_rational_matrix(text: str) -> np.ndarray:
    rows = _parse_numeric_rows(text, Fraction)
    return np.array(rows, dtype=object).reshape(len(rows), len(rows[0]))


def format_integer_matrix(m) -> str:
    rows = [[str(x) for x in row] for row in np.asarray(m, dtype=object)]
    width = max(len(x) for row in rows for x in row)
    return "\n".join(" ".join(x.rjust(width) for x in row) for row in rows)


# certificates -------------------------------------------------------------------


@dataclass
class Certificate:
    kind: str
    matrices: dict
    meta: dict = field(default_factory=dict)

    @property
    def labels(self) -> list:
        out = set()
        for m in self.matrices.values():
            if isinstance(m, SymbolicMatrix):
                out.update(m.alphabet.labels)
        return sorted(out)


def _encode_matrix(m) -> dict:
    if isinstance(m, SymbolicMatrix):
        return {"type": "symbolic", "degree": m.degree,
                "labels": list(m.alphabet.labels),
                "rows": [[format_sum(e) for e in row] for row in m.entries]}
    arr = np.asarray(m, dtype=object)
    if all(isinstance(x, (int, np.integer)) or (isinstance(x, Fraction) and x.denominator == 1) for x in arr.flat):
        return {"type": "integer", "rows": [[int(x) for x in row] for row in arr]}
    return {"type": "rational", "rows": [[str(Fraction(x)) for x in row] for row in arr]}


def _decode_matrix(obj: dict, labels) -> object:
    kind = obj.get("type")
    rows = obj.get("rows")
    if not isinstance(rows, list) or not rows:
        raise ParseError("matrix without rows")
    if kind == "symbolic":
        alphabet = Alphabet(obj.get("labels") or labels)
        return SymbolicMatrix([[parse_sum(e, alphabet) for e in row] for row in rows],
                              alphabet, obj.get("degree"))
    if kind == "integer":
        return np.array(rows, dtype=np.int64)
    if kind == "rational":
        return np.array([[Fraction(x) for x in row] for row in rows], dtype=object)
    raise ParseError(f"unknown matrix type {kind!r}")


def certificate_to_json(cert: Certificate) -> dict:
    return {
        "format": CERTIFICATE_FORMAT,
        "version": CERTIFICATE_VERSION,
        "kind": cert.kind,
        "labels": cert.labels,
        "matrices": {name: _encode_matrix(m) for name, m in cert.matrices.items()},
        "meta": cert.meta,
    }


def certificate_from_json(obj) -> Certificate:
    if isinstance(obj, str):
        try:
            obj = json.loads(obj)
        except json.JSONDecodeError as exc:
            raise ParseError(f"certificate is not JSON: {exc.msg}", exc.lineno, exc.colno) from None
    if not isinstance(obj, dict) or obj.get("format") != CERTIFICATE_FORMAT:
        raise ParseError("not a soficmat certificate")
    if obj.get("version") != CERTIFICATE_VERSION:
        raise ParseError(f"unsupported certificate version {obj.get('version')!r}")
    labels = obj.get("labels", [])
    try:
        mats = {name: _decode_matrix(m, labels) for name, m in obj.get("matrices", {}).items()}
    except (SoficMatError, ValueError, TypeError) as exc:
        raise ParseError(f"bad matrix in certificate: {exc}") from None
    return Certificate(obj["kind"], mats, obj.get("meta", {}))


def _verify_split(m, meta, prefix=""):
    w = SplitWitness(meta.get(prefix + "kind", "row"), meta.get(prefix + "direction", "out"),
                     m[prefix + "R"], m[prefix + "S"], m[prefix + "A"], m[prefix + "B"])
    return verify_split_witness(w)


def _verify_williams(m, meta):
    u, d, v, target = m["U"], m["D"], m["V"], m["M"]
    if not (is_division_matrix(u) and is_amalgamation_matrix(v)):
        return False
    if isinstance(target, SymbolicMatrix):
        got = mixed_mul(u, mixed_mul(v, d, "right"), "left")
        if any(bool(d[i, j]) != (i == j) for i in range(d.rows) for j in range(d.cols)):
            return False
        return got == target
    d = as_integer_matrix(d)
    return np.count_nonzero(d - np.diag(np.diag(d))) == 0 and np.array_equal(u @ d @ v, target)


def _verify_chain(m, meta):
    links = [EsseWitness(m[f"R{i}"], m[f"S{i}"], o) for i, o in enumerate(meta["orientations"])]
    chain = SseChain(links)
    return chain.lag == meta.get("lag", chain.lag) and verify_sse_chain(m["A"], m["B"], chain)


def _verify_sse_dr(m, meta):
    if not verify_esse(m["A"], m["B"], EsseWitness(m["R"], m["S"], "RS")):
        return False
    row = SplitWitness("row", "out", m["R1"], m["S1"], m["A"], m["C1"])
    col = SplitWitness("column", "in", m["R2"], m["S2"], m["B"], m["C2"])
    refac = DiagonalRefactorization(m["D"], as_integer_matrix(m["X"]), m["C1"], m["C2"])
    return verify_split_witness(row) and verify_split_witness(col) and refac.verify()


def _verify_block_conjugacy(m, meta):
    row = SplitWitness("row", "out", m["X"], m["U"], m["A"], m["A_split"])
    col = SplitWitness("column", "in", m["Y"], m["V"], m["B"], m["B_split"])
    return (verify_split_witness(row) and verify_split_witness(col) and is_invertible(m["W"])
            and matrix_conjugate_check(m["A_split"], m["B_split"], m["W"]))


def _verify_closing(m, meta):
    return bi_closing_report(m["A"]).as_dict() == meta.get("report")


_VERIFIERS = {
    "split": _verify_split,
    "esse": lambda m, meta: verify_esse(m["A"], m["B"], EsseWitness(m["R"], m["S"], meta.get("orientation", "RS"))),
    "sse-chain": _verify_chain,
    "williams": _verify_williams,
    "sse-dr": _verify_sse_dr,
    "block-conjugacy": _verify_block_conjugacy,
    "mainthm": _verify_block_conjugacy,  # older tag for the same certificate
    "conjugacy": lambda m, meta: matrix_conjugate_check(m["A"], m["B"], m["W"]),
    "closing-report": _verify_closing,
}


def verify_certificate(cert: Certificate) -> bool:
    """Re-check a certificate from its stored matrices alone."""
    check = _VERIFIERS.get(cert.kind)
    if check is None:
        raise ParseError(f"unknown certificate kind {cert.kind!r}")
    try:
        return bool(check(cert.matrices, cert.meta))
    except KeyError as exc:
        raise ParseError(f"{cert.kind} certificate lacks {exc.args[0]!r}") from None
    except (SoficMatError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        return False


def load_schema(name: str) -> dict:
    """One of the JSON schemas shipped with the package ('certificate' or 'output')."""
    text = resources.files("soficmat").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)
