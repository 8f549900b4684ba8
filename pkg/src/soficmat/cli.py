"""Command-line front end.

Exit status: 0 when the property holds or the construction succeeds, 1 when
it fails or no witness exists, 2 on input errors.  Vertices are numbered
from 1 on the command line.  Certificates go to ``--out`` or, if the
``SOFICMAT_OUTPUT_DIR`` environment variable is set, to ``<dir>/<kind>.json``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import closing, equivalence, splitting
from .errors import ParseError, SoficMatError
from .formats import (
    Certificate,
    certificate_from_json,
    certificate_to_json,
    format_integer_matrix,
    parse_integer_matrix,
    parse_matrix,
    parse_rational_matrix,
    serialize_matrix,
    verify_certificate,
)
from .symalg import SymbolicMatrix, count_periodic_words, decompose, entropy, format_sum

OUTPUT_DIR_ENV = "SOFICMAT_OUTPUT_DIR"


class Outcome:
    """What a subcommand produced: status, text lines, JSON result, certificate."""

    def __init__(self, ok: bool, text: str, result: dict | None = None, certificate: Certificate | None = None):
        self.ok = ok
        self.text = text
        self.result = result or {}
        self.certificate = certificate


def _read(path: str, stdin) -> str:
    if path == "-":
        return stdin.read()
    return Path(path).read_text()


def _matrix(path, stdin) -> SymbolicMatrix:
    return parse_matrix(_read(path, stdin))


def _rows(m) -> list:
    return [[str(x) if not isinstance(x, (int, np.integer)) else int(x) for x in row] for row in np.asarray(m, dtype=object)]


def _sym_rows(a: SymbolicMatrix) -> list:
    return [[format_sum(e) for e in row] for row in a.entries]


def _vertex(v: int, n: int) -> int:
    if not 1 <= v <= n:
        raise ParseError(f"vertex {v} out of range 1..{n}")
    return v - 1


def _parse_blocks(text: str, n: int) -> list:
    """'a1,a2;a1@2,a4' -> [[a1, a2], [(a1, 1), a4]]; '@v' names the other endpoint (1-based)."""
    blocks = []
    for chunk in text.split(";"):
        items = []
        for tok in chunk.split(","):
            tok = tok.strip()
            if not tok:
                continue
            if "@" in tok:
                label, other = tok.split("@", 1)
                try:
                    items.append((label.strip(), _vertex(int(other), n)))
                except ValueError:
                    raise ParseError(f"bad edge reference {tok!r}") from None
            else:
                items.append(tok)
        blocks.append(items)
    return blocks


# subcommands --------------------------------------------------------------------


def cmd_decompose(args, stdin):
    a = _matrix(args.matrix, stdin)
    comps = decompose(a)
    lines = []
    for label in a.alphabet:
        m = comps.get(label, np.zeros(a.shape, dtype=np.int64))
        lines += [f"{label}:", format_integer_matrix(m)]
    result = {label: _rows(comps.get(label, np.zeros(a.shape, dtype=np.int64))) for label in a.alphabet}
    return Outcome(True, "\n".join(lines), {"components": result})


def _split_certificate(w: splitting.SplitWitness) -> Certificate:
    return Certificate("split", {"A": w.A, "B": w.B, "R": w.R, "S": w.S},
                       {"kind": w.kind, "direction": w.direction})


def cmd_split(args, stdin):
    a = _matrix(args.matrix, stdin)
    v = _vertex(args.vertex, a.rows)
    part = splitting.EdgePartition.from_labels(a, v, args.direction, _parse_blocks(args.blocks, a.rows))
    b, w = splitting.in_split(a, part) if args.direction == "in" else splitting.out_split(a, part)
    return Outcome(True, serialize_matrix(b), {"matrix": _sym_rows(b)}, _split_certificate(w))


def cmd_amalgamate(args, stdin):
    a = _matrix(args.matrix, stdin)
    u, v = _vertex(args.u, a.rows), _vertex(args.v, a.rows)
    c, w = splitting.amalgamate(a, u, v, args.direction)
    return Outcome(True, serialize_matrix(c), {"matrix": _sym_rows(c)}, _split_certificate(w))


def _esse_certificate(a, b, w: equivalence.EsseWitness) -> Certificate:
    return Certificate("esse", {"A": a, "B": b, "R": w.R, "S": w.S}, {"orientation": w.orientation})


def cmd_esse_verify(args, stdin):
    if args.cert:
        cert = certificate_from_json(_read(args.cert, stdin))
        if cert.kind != "esse":
            raise ParseError(f"expected an esse certificate, got {cert.kind!r}")
        ok = verify_certificate(cert)
    else:
        if not (args.b and args.r and args.s):
            raise ParseError("esse-verify needs A B R S files or --cert")
        a, b, r = (_matrix(p, stdin) for p in (args.a, args.b, args.r))
        s = parse_integer_matrix(_read(args.s, stdin))
        cert = _esse_certificate(a, b, equivalence.EsseWitness(r, s, args.orientation))
        ok = verify_certificate(cert)
    return Outcome(ok, "valid" if ok else "invalid", {"valid": ok})


def cmd_esse_search(args, stdin):
    a, b = _matrix(args.a, stdin), _matrix(args.b, stdin)
    w = equivalence.search_esse(a, b, equivalence.SearchBounds(args.max_dim, args.max_coef))
    if w is None:
        return Outcome(False, "no witness", {"found": False})
    text = "\n".join([f"witness found (orientation {w.orientation})", "R:", serialize_matrix(w.R),
                      "S:", format_integer_matrix(w.S)])
    result = {"found": True, "orientation": w.orientation, "R": _sym_rows(w.R), "S": _rows(w.S)}
    return Outcome(True, text, result, _esse_certificate(a, b, w))


def cmd_sse_verify(args, stdin):
    cert = certificate_from_json(_read(args.cert, stdin))
    if cert.kind not in ("sse-chain", "esse"):
        raise ParseError(f"expected an sse-chain certificate, got {cert.kind!r}")
    ok = verify_certificate(cert)
    lag = cert.meta.get("lag", 0)
    return Outcome(ok, f"valid (lag {lag})" if ok else "invalid", {"valid": ok, "lag": lag})


def cmd_williams(args, stdin):
    m = _matrix(args.matrix, stdin)
    f = equivalence.williams_factorize(m)
    text = "\n".join(["U:", format_integer_matrix(f.U), "D:", serialize_matrix(f.D),
                      "V:", format_integer_matrix(f.V)])
    positions = [[i + 1, j + 1] for i, j in f.positions]
    result = {"U": _rows(f.U), "D": _sym_rows(f.D), "V": _rows(f.V), "positions": positions}
    cert = Certificate("williams", {"M": m, "U": f.U, "D": f.D, "V": f.V}, {"positions": positions})
    return Outcome(True, text, result, cert)


def cmd_sse_dr(args, stdin):
    a, b = _matrix(args.a, stdin), _matrix(args.b, stdin)
    if args.witness:
        cert = certificate_from_json(_read(args.witness, stdin))
        if cert.kind != "esse":
            raise ParseError("--witness must be an esse certificate")
        w = equivalence.EsseWitness(cert.matrices["R"], cert.matrices["S"], cert.meta.get("orientation", "RS"))
    else:
        w = equivalence.search_esse(a, b, equivalence.SearchBounds(args.max_dim, args.max_coef))
        if w is None:
            return Outcome(False, "no elementary equivalence witness found", {"found": False})
    swapped = w.orientation == "SR"
    if swapped:
        a, b, w = b, a, w.reversed()
    res = equivalence.sse_dr_construct(a, b, w)
    d = res.refactorization
    text = "\n".join((["(roles of A and B swapped to get A = R·S)"] if swapped else [])
                     + ["C1:", serialize_matrix(res.C1), "C2:", serialize_matrix(res.C2),
                        "D:", serialize_matrix(d.D), "X:", format_integer_matrix(d.X)]
                     + [f"{k}: {'ok' if v else 'FAILED'}" for k, v in res.checks.items()])
    mats = {"A": a, "B": b, "R": w.R, "S": w.S, "C1": res.C1, "C2": res.C2, "D": d.D, "X": d.X,
            "R1": res.row_witness.R, "S1": res.row_witness.S,
            "R2": res.column_witness.R, "S2": res.column_witness.S}
    result = {"swapped": swapped, "C1": _sym_rows(res.C1), "C2": _sym_rows(res.C2), "checks": res.checks}
    return Outcome(res.verified, text, result, Certificate("sse-dr", mats, {"checks": res.checks}))


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise ParseError(f"expected comma-separated integers, got {text!r}") from None


def cmd_block_conjugacy(args, stdin):
    c = _matrix(args.matrix, stdin)
    comps = {x: m for x, m in splitting._full_components(c).items()}
    cert = equivalence.block_conjugacy_construct(comps, _int_list(args.e), alphabet=c.alphabet.labels)
    text = "\n".join(["A:", serialize_matrix(cert.A), "B:", serialize_matrix(cert.B),
                      "A':", serialize_matrix(cert.A_split), "B':", serialize_matrix(cert.B_split),
                      "W:", format_integer_matrix(cert.W)]
                     + [f"{k}: {'ok' if v else 'FAILED'}" for k, v in cert.checks.items()])
    mats = {"A": cert.A, "B": cert.B, "A_split": cert.A_split, "B_split": cert.B_split,
            "U": cert.U, "V": cert.V, "X": cert.X, "Y": cert.Y, "W": cert.W}
    result = {"k": cert.k, "A": _sym_rows(cert.A), "B": _sym_rows(cert.B), "W": _rows(cert.W),
              "checks": cert.checks}
    meta = {"k": cert.k, "E": [int(x) for x in np.diag(cert.E)], "checks": cert.checks}
    return Outcome(cert.verified, text, result, Certificate("block-conjugacy", mats, meta))


def _parse_w_option(items, n) -> dict:
    out = {}
    for item in items:
        if "=" not in item:
            raise ParseError(f"expected label=d1,d2,..., got {item!r}")
        label, values = item.split("=", 1)
        vals = parse_rational_matrix(values.replace(",", " "))[0]
        out[label.strip()] = list(vals)
    return out


def cmd_conj_lift(args, stdin):
    a, b = _matrix(args.a, stdin), _matrix(args.b, stdin)
    w = equivalence.conj_lift_diagonal(a, b, _parse_w_option(args.w, a.rows))
    if w is None:
        return Outcome(False, "no lift", {"found": False})
    return Outcome(True, format_integer_matrix(w), {"found": True, "W": _rows(w)},
                   Certificate("conjugacy", {"A": a, "B": b, "W": w}))


def cmd_closing(args, stdin):
    a = _matrix(args.matrix, stdin)
    rep = closing.bi_closing_report(a)
    lines = [rep.summary(), f"heuristic: {rep.heuristic_verdict}"] + [f"warning: {w}" for w in rep.warnings]
    return Outcome(rep.bi_closing, "\n".join(lines), rep.as_dict(),
                   Certificate("closing-report", {"A": a}, {"report": rep.as_dict()}))


def cmd_words(args, stdin):
    a = _matrix(args.matrix, stdin)
    count = count_periodic_words(a, args.n)
    return Outcome(True, str(count), {"n": args.n, "count": count})


def cmd_entropy(args, stdin):
    a = _matrix(args.matrix, stdin)
    h = entropy(a)
    return Outcome(True, repr(h), {"entropy": h if np.isfinite(h) else None})


def to_dot(a: SymbolicMatrix) -> str:
    lines = ["digraph G {"]
    lines += [f"  V{i + 1};" for i in range(a.rows)]
    for i in range(a.rows):
        for j in range(a.cols):
            for word, coef in a[i, j].terms:
                for _ in range(coef):
                    lines.append(f'  V{i + 1} -> V{j + 1} [label="{"".join(word)}"];')
    lines.append("}")
    return "\n".join(lines)


def cmd_dot(args, stdin):
    a = _matrix(args.matrix, stdin)
    text = to_dot(a)
    return Outcome(True, text, {"dot": text})


def cmd_verify(args, stdin):
    cert = certificate_from_json(_read(args.cert, stdin))
    ok = verify_certificate(cert)
    return Outcome(ok, f"{cert.kind}: {'valid' if ok else 'invalid'}", {"kind": cert.kind, "valid": ok})


# parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="soficmat", description="Symbolic matrices of sofic shifts.")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--out", help="write the certificate to this path")
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, func, help_text, matrices=("matrix",), aliases=()):
        sp = sub.add_parser(name, help=help_text, aliases=list(aliases))
        for m in matrices:
            if isinstance(m, tuple):
                sp.add_argument(m[0], type=m[1])
            else:
                sp.add_argument(m, help="file path, '-' for standard input")
        sp.set_defaults(func=func)
        # accept the global flags after the subcommand too
        sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        sp.add_argument("--out", default=argparse.SUPPRESS)
        return sp

    add("decompose", cmd_decompose, "integral sub-matrices per label")
    sp = add("split", cmd_split, "in- or out-split a vertex")
    sp.add_argument("--vertex", type=int, required=True)
    sp.add_argument("--direction", choices=("in", "out"), required=True)
    sp.add_argument("--blocks", required=True, help="edge blocks, e.g. 'a1,a2;a1@2,a4'")
    sp = add("amalgamate", cmd_amalgamate, "merge two vertices", ("matrix", ("u", int), ("v", int)))
    sp.add_argument("--direction", choices=("in", "out"), required=True)
    sp = add("esse-verify", cmd_esse_verify, "check an elementary equivalence witness", ())
    sp.add_argument("a", nargs="?")
    sp.add_argument("b", nargs="?")
    sp.add_argument("r", nargs="?")
    sp.add_argument("s", nargs="?")
    sp.add_argument("--orientation", choices=("RS", "SR"), default="RS")
    sp.add_argument("--cert")
    sp = add("esse-search", cmd_esse_search, "bounded search for a witness", ("a", "b"))
    sp.add_argument("--max-dim", type=int, default=3)
    sp.add_argument("--max-coef", type=int, default=2)
    sp = add("sse-verify", cmd_sse_verify, "check a strong shift equivalence chain", ("cert",))
    add("williams", cmd_williams, "Williams factorization")
    sp = add("sse-dr", cmd_sse_dr, "diagonal refactorization from an elementary equivalence", ("a", "b"))
    sp.add_argument("--witness")
    sp.add_argument("--max-dim", type=int, default=3)
    sp.add_argument("--max-coef", type=int, default=2)
    sp = add("block-conjugacy", cmd_block_conjugacy, "splittings and conjugator for D·C and C·D",
             aliases=("mainthm",))
    sp.add_argument("--e", required=True, help="diagonal of E, e.g. 2,3")
    sp = add("conj-lift", cmd_conj_lift, "lift diagonal per-label conjugators", ("a", "b"))
    sp.add_argument("--w", action="append", default=[], help="label=d1,d2,...  (repeatable)")
    add("closing", cmd_closing, "right/left/bi-closing report")
    sp = add("words", cmd_words, "number of periodic label words of length n")
    sp.add_argument("-n", type=int, required=True)
    add("entropy", cmd_entropy, "topological entropy")
    add("dot", cmd_dot, "graph-description export")
    add("verify", cmd_verify, "re-verify any certificate", ("cert",))
    return p


def _write_certificate(cert: Certificate, args) -> str | None:
    target = getattr(args, "out", None)
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        target = os.path.join(os.environ[OUTPUT_DIR_ENV], f"{cert.kind}.json")
    if target is None:
        return None
    Path(target).parent.mkdir(parents=True, exist_ok=True)
    Path(target).write_text(json.dumps(certificate_to_json(cert), indent=2) + "\n")
    return target


def run_command(argv=None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        outcome = args.func(args, stdin)
    except (SoficMatError, ValueError, OSError, KeyError) as exc:
        msg = str(exc) or type(exc).__name__
        if getattr(args, "json", False):
            print(json.dumps({"command": args.command, "ok": False, "exit": 2, "result": {}, "error": msg}), file=stdout)
        print(f"soficmat {args.command}: {msg}", file=stderr)
        return 2
    status = 0 if outcome.ok else 1
    written = _write_certificate(outcome.certificate, args) if outcome.certificate else None
    if getattr(args, "json", False):
        obj = {"command": args.command, "ok": outcome.ok, "exit": status, "result": outcome.result}
        if outcome.certificate is not None:
            obj["certificate"] = certificate_to_json(outcome.certificate)
        print(json.dumps(obj), file=stdout)
    else:
        print(outcome.text, file=stdout)
        if written:
            print(f"certificate written to {written}", file=stderr)
    return status


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
