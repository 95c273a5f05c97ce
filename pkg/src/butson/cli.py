"""Command-line front end.

Exit codes: 0 success, 1 matrix is not BH / equations fail / nothing found,
2 usage or parse error, 3 search stopped by its time budget.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bmatrix, petrescu, search
from .bmatrix import GridParseError, load_matrix
from .cyclo import CycElem
from .fixtures import named

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
DEFAULT_Q = 6
DEFAULT_S = 6


class UsageError(Exception):
    pass


def _read_matrix(spec: str, q: int | None):
    if spec.startswith("@"):
        try:
            M = named(spec)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from exc
        if q is not None and q != M.q:
            raise UsageError(f"{spec} has q={M.q}, not {q}")
        return M
    try:
        text = sys.stdin.read() if spec == "-" else Path(spec).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {spec}: {exc.strerror}") from exc
    try:
        return load_matrix(text, q)
    except GridParseError as exc:
        if "no modulus" in str(exc) and q is None:
            return load_matrix(text, DEFAULT_Q)
        raise


def _write(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _fmt_residual(r: CycElem) -> str:
    return "[" + " ".join(str(c) for c in r.coeffs) + "]"


def cmd_verify(args) -> int:
    M = _read_matrix(args.matrix, args.q)
    if not M.is_square:
        raise UsageError(f"matrix is {M.n_rows}x{M.n_cols}, not square")
    report = bmatrix.verify_bh(M)
    if args.json:
        print(json.dumps(report.to_json(), indent=2))
    else:
        print(report.summary())
        for i, k, r in report.violations:
            print(f"  rows {i},{k}: inner product {_fmt_residual(r)} != 0")
    return EXIT_OK if report.is_hadamard else EXIT_FAIL


def cmd_dephase(args) -> int:
    M = _read_matrix(args.matrix, args.q)
    if not M.is_square:
        raise UsageError("dephase needs a square matrix")
    D = bmatrix.dephase(M)
    text = bmatrix.dumps_document(D) if args.format == "json" else bmatrix.format_grid(D)
    _write(text, args.out)
    return EXIT_OK


def _report_lines(title: str, rep: petrescu.BlockReport) -> list[str]:
    lines = [title]
    for eq, ok in rep.status().items():
        lines.append(f"  {eq}: {'PASS' if ok else 'FAIL'}")
    for eq, i, j, r in rep.failures[:20]:
        lines.append(f"    {eq} at ({i},{j}): residual {_fmt_residual(r)}")
    if len(rep.failures) > 20:
        lines.append(f"    ... {len(rep.failures) - 20} more")
    return lines


def cmd_blocks(args) -> int:
    M = _read_matrix(args.matrix, args.q)
    s = args.s
    if s < 1 or M.shape != (3 * s + 1, 3 * s + 1):
        raise UsageError(f"order {M.n_rows} does not match --s {s} (need {3 * s + 1})")
    try:
        b = petrescu.extract_blocks(M, s)
    except petrescu.NotPetrescuFormError as exc:
        print(f"not in Petrescu form: {exc}")
        return EXIT_FAIL
    rep_a = petrescu.check_system_a(b)
    rep_d = petrescu.check_d(b.D, s)
    rep_diff = petrescu.check_difference(b.X, b.Y, s)
    try:
        S = petrescu.compute_x_plus_y(b.T, b.D, s)
        sum_ok = S == petrescu.SumMatrix.of_roots(b.X, b.Y)
        sum_msg = "PASS" if sum_ok else "FAIL (X+Y differs)"
    except ArithmeticError:
        sum_ok, sum_msg = False, "FAIL (not divisible by s+1)"
    t_fail = petrescu.t_gram_failures(b.T)
    lines = _report_lines("first system:", rep_a)
    lines += _report_lines("second system:", rep_d)
    lines.append(f"  X+Y = -TD*T*/(s+1): {sum_msg}")
    lines += _report_lines("", rep_diff)[1:]
    lines.append(f"T Gram identities: {'PASS' if not t_fail else 'FAIL ' + ', '.join(t_fail)}")
    print("\n".join(lines))
    ok = rep_a.passed and rep_d.passed and rep_diff.passed and sum_ok
    return EXIT_OK if ok else EXIT_FAIL


def cmd_search(args) -> int:
    try:
        cfg = search.SearchConfig(
            s=args.s,
            q=args.q if args.q is not None else DEFAULT_Q,
            max_d_candidates=args.max_d,
            max_t_candidates=args.max_t,
            max_solutions=args.max_solutions,
            time_budget=args.budget,
            workers=args.threads,
            prune=not args.no_prune,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    outcome = search.run_pipeline(cfg)
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    n = 3 * cfg.s + 1
    for k, sol in enumerate(outcome.solutions):
        if out_dir:
            path = out_dir / f"bh_{n}_{cfg.q}_{k:03d}.json"
            path.write_text(bmatrix.dumps_document(sol.matrix))
            print(f"wrote {path}")
        else:
            print(f"# solution {k}")
            sys.stdout.write(bmatrix.format_grid(sol.matrix))
    stats = outcome.stats.to_json()
    stats["truncated"] = outcome.truncated
    if out_dir:
        (out_dir / "stats.json").write_text(json.dumps(stats, indent=2) + "\n")
    print(json.dumps(stats), file=sys.stderr)
    if outcome.truncated:
        return EXIT_BUDGET
    return EXIT_OK if outcome.solutions else EXIT_FAIL


def cmd_gen_t(args) -> int:
    q = args.q if args.q is not None else DEFAULT_Q
    count = 0
    chunks = []
    for T in search.enumerate_t(args.s, q, args.max):
        count += 1
        if args.out:
            chunks.append(bmatrix.dumps_document(T))
    if args.out:
        # one document per line block; json lines would lose the canonical layout
        Path(args.out).write_text("".join(chunks))
    print(f"T candidates for s={args.s}, q={q}: {count}")
    return EXIT_OK if count else EXIT_FAIL


def cmd_decompose(args) -> int:
    q = args.q if args.q is not None else DEFAULT_Q
    if args.coeffs is not None:
        try:
            coeffs = [int(x) for x in args.coeffs.split(",")]
        except ValueError as exc:
            raise UsageError(f"bad --coeffs: {args.coeffs}") from exc
        if len(coeffs) > q:
            raise UsageError(f"--coeffs has {len(coeffs)} entries, q={q}")
        c = CycElem(q, tuple(coeffs + [0] * (q - len(coeffs))))
        pairs = petrescu.decompose_pair_sum(c)
        print(" ".join(f"{{{a},{b}}}" for a, b in pairs) if pairs else "none")
        return EXIT_OK if pairs else EXIT_FAIL
    if args.matrix is None:
        raise UsageError("give a matrix file or --coeffs")
    M = _read_matrix(args.matrix, args.q)
    s = args.s
    if M.shape != (3 * s + 1, 3 * s + 1):
        raise UsageError(f"order {M.n_rows} does not match --s {s}")
    try:
        b = petrescu.extract_blocks(M, s)
        S = petrescu.compute_x_plus_y(b.T, b.D, s)
    except petrescu.NotPetrescuFormError as exc:
        print(f"not in Petrescu form: {exc}")
        return EXIT_FAIL
    except ArithmeticError:
        print("X+Y not integral: -TD*T* is not divisible by s+1")
        return EXIT_FAIL
    ok = True
    for i in range(s):
        cells = []
        for j in range(s):
            pairs = petrescu.decompose_pair_sum(S[i, j])
            ok &= bool(pairs)
            cells.append("|".join(f"{a}{b}" for a, b in pairs) or "-")
        print(" ".join(f"{c:>8}" for c in cells))
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="butson", description="Butson-type Hadamard matrices BH(n,q)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def matrix_arg(sp, required=True):
        sp.add_argument("matrix", nargs=None if required else "?",
                        help="grid or JSON file, '-' for stdin, or a built-in like @w19")
        sp.add_argument("--q", type=int, default=None, help=f"root order (default {DEFAULT_Q})")

    sp = sub.add_parser("verify", help="check H H* = n I exactly")
    matrix_arg(sp)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("dephase", help="normalise first row and column")
    matrix_arg(sp)
    sp.add_argument("--format", choices=("grid", "json"), default="grid")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_dephase)

    sp = sub.add_parser("blocks", help="check both Petrescu equation systems")
    matrix_arg(sp)
    sp.add_argument("--s", type=int, default=DEFAULT_S)
    sp.set_defaults(func=cmd_blocks)

    sp = sub.add_parser("search", help="run the D / T / X,Y search")
    sp.add_argument("--s", type=int, default=DEFAULT_S)
    sp.add_argument("--q", type=int, default=None)
    sp.add_argument("--max-solutions", type=int, default=1, help="0 for all")
    sp.add_argument("--max-d", type=int, default=None)
    sp.add_argument("--max-t", type=int, default=None)
    sp.add_argument("--budget", type=float, default=None, help="wall-clock seconds")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--no-prune", action="store_true", help="debug: disable D pruning")
    sp.add_argument("--out", default=None, help="directory for solution files")
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("gen-t", help="enumerate normalised T blocks")
    sp.add_argument("--s", type=int, default=DEFAULT_S)
    sp.add_argument("--q", type=int, default=None)
    sp.add_argument("--max", type=int, default=None)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_gen_t)

    sp = sub.add_parser("decompose", help="split root sums into pairs of roots")
    matrix_arg(sp, required=False)
    sp.add_argument("--s", type=int, default=DEFAULT_S)
    sp.add_argument("--coeffs", default=None, help="comma-separated coefficients of zeta^0..")
    sp.set_defaults(func=cmd_decompose)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except GridParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
