"""Batch command-line front end.

Subcommands: sketch, apply, regress, leverage, lowrank, verify, bench.
Matrices travel as Matrix Market files, leverage scores as CSV, and
verification reports as JSON lines.  Exit codes: 0 success, 1 parameter or
parse error, 2 numerical failure, 3 verification did not pass.  Output
files are written to a temporary file and renamed on success, so a failed
run never leaves a partial result.  Diagnostics go to standard error only.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

from . import verify
from .exceptions import NumericalError, ParameterError
from .hashing import mix
from .matio import format_matrix_market, read_matrix_market, write_matrix_market
from .sketch import (
    KIND_TZ,
    KINDS,
    Sketch,
    SketchSpec,
    recommend_params,
    recommended_independence,
)
from .solvers import leverage_scores, low_rank, sketched_lstsq
from .validation import as_matrix, as_vector


class _Parser(argparse.ArgumentParser):
    """argparse that exits with code 1 (not 2) on bad usage."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _write_atomic(path: str, writer) -> None:
    """Run writer(tmp_path), then rename onto path; no partial outputs."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit_matrix(mat, path: str | None) -> None:
    if path is None:
        sys.stdout.write(format_matrix_market(mat))
        return
    _write_atomic(path, lambda tmp: write_matrix_market(mat, tmp))


def _emit_text(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return

    def writer(tmp):
        with open(tmp, "w", encoding="ascii") as fh:
            fh.write(text)

    _write_atomic(path, writer)


def _resolve_spec(args, n: int, dim: int) -> SketchSpec:
    """m/s from flags when given, otherwise from the accuracy parameters."""
    m, s = args.m, args.s
    if m is None or s is None:
        if args.eps is None:
            raise ParameterError("--eps is required when --m or --s is omitted")
        rec_m, rec_s = recommend_params(
            dim, args.eps, args.delta, args.kind, gamma=args.gamma, c_m=args.cm, c_s=args.cs
        )
        if m is None:
            m = rec_m
        if s is None:
            s = 1 if args.kind == KIND_TZ else min(rec_s, m)
        _info(f"chose m={m} s={s} for kind={args.kind} d={dim} eps={args.eps} delta={args.delta}")
    independence = args.independence
    if independence is None:
        independence = recommended_independence(dim, args.kind)
    return SketchSpec(kind=args.kind, m=int(m), n=n, s=int(s),
                      independence=independence, seed=args.seed)


def _add_common(p, kind=True, accuracy=True, size=True):
    if kind:
        p.add_argument("--kind", choices=KINDS, default=KIND_TZ, help="sketch construction")
    if accuracy:
        p.add_argument("--eps", type=float, default=None, help="target distortion in (0,1)")
        p.add_argument("--delta", type=float, default=1.0 / 3.0, help="failure probability")
        p.add_argument("--gamma", type=float, default=1.0, help="osnap-block row exponent")
        p.add_argument("--cm", type=float, default=1.0, help="multiplier on recommended m")
        p.add_argument("--cs", type=float, default=1.0, help="multiplier on recommended s")
    if size:
        p.add_argument("--m", type=int, default=None, help="sketch rows (default: recommended)")
        p.add_argument("--s", type=int, default=None, help="nonzeros per column (default: recommended)")
        p.add_argument("--independence", type=int, default=None,
                       help="hash independence degree (default: recommended)")
    p.add_argument("--seed", type=int, default=0, help="64-bit unsigned seed")
    p.add_argument("--output", default=None, help="output file (default: stdout)")
    p.add_argument("--threads", type=int, default=os.cpu_count(),
                   help="worker threads for trials; 1 forces serial")


def build_parser() -> _Parser:
    parser = _Parser(prog="sketchla", description=__doc__,
                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sketch", help="materialize a sketch as a Matrix Market file",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--n", type=int, required=True, help="number of sketch columns")
    p.add_argument("--d", type=int, default=None, help="subspace dimension for recommendation")
    _add_common(p)

    p = sub.add_parser("apply", help="apply a sketch to a matrix",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--input", required=True, help="Matrix Market input")
    p.add_argument("--d", type=int, default=None,
                   help="subspace dimension for recommendation (default: input columns)")
    _add_common(p)

    p = sub.add_parser("regress", help="sketched least squares",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--input", required=True, help="Matrix Market design matrix")
    p.add_argument("--rhs", required=True, help="Matrix Market right-hand side (n x 1)")
    p.add_argument("--repeats", type=int, default=1,
                   help="independent sketches; best solution by true residual wins")
    _add_common(p, size=False)

    p = sub.add_parser("leverage", help="approximate leverage scores (CSV index,score)",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--input", required=True, help="Matrix Market input")
    p.add_argument("--ct", type=float, default=8.0, help="multiplier on the projection width")
    _add_common(p, kind=False, size=False)

    p = sub.add_parser("lowrank", help="sketched rank-k approximation",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--input", required=True, help="Matrix Market input")
    p.add_argument("--k", type=int, required=True, help="target rank")
    _add_common(p, kind=False, size=False)

    p = sub.add_parser("verify", help="run a verification experiment (exit 3 when it fails)",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--experiment", required=True,
                   choices=["embedding", "frobenius", "product", "hash-independence"])
    p.add_argument("--n", type=int, default=200, help="input rows")
    p.add_argument("--d", type=int, default=4, help="subspace / left dimension")
    p.add_argument("--d2", type=int, default=None, help="right dimension (product experiment)")
    p.add_argument("--trials", type=int, default=100, help="Monte Carlo trials")
    p.add_argument("--k", type=int, default=2, help="independence degree (hash experiment)")
    p.add_argument("--p", type=int, default=5, help="prime modulus (hash experiment)")
    _add_common(p)

    p = sub.add_parser("bench", help="nnz-linearity wall-clock benchmark (exit 3 when it fails)",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--n", type=int, default=20000, help="input rows")
    p.add_argument("--d", type=int, default=8, help="input columns")
    p.add_argument("--nnz", type=int, nargs="+", default=[2000, 20000, 200000],
                   help="nnz levels (need >= 3 spanning >= 100x)")
    p.add_argument("--reps", type=int, default=3, help="timing repetitions per level")
    _add_common(p)
    return parser


def _cmd_sketch(args) -> int:
    dim = args.d if args.d is not None else 2
    spec = _resolve_spec(args, n=args.n, dim=dim)
    _emit_matrix(Sketch(spec).materialize(), args.output)
    return 0


def _cmd_apply(args) -> int:
    a = as_matrix(read_matrix_market(args.input), "input")
    dim = args.d if args.d is not None else a.shape[1]
    spec = _resolve_spec(args, n=a.shape[0], dim=dim)
    _emit_matrix(Sketch(spec).apply(a), args.output)
    return 0


def _cmd_regress(args) -> int:
    a = as_matrix(read_matrix_market(args.input), "input")
    b = as_vector(read_matrix_market(args.rhs), "rhs")
    if args.eps is None:
        raise ParameterError("--eps is required")
    result = sketched_lstsq(a, b, eps=args.eps, delta=args.delta, kind=args.kind,
                            seed=args.seed, repeats=args.repeats, gamma=args.gamma,
                            c_m=args.cm, c_s=args.cs)
    _info(f"chose m={result.spec.m} s={result.spec.s} kind={result.spec.kind}; "
          f"sketched residual {result.sketched_residual:.6e}")
    _emit_matrix(result.x.reshape(-1, 1), args.output)
    return 0


def _cmd_leverage(args) -> int:
    a = as_matrix(read_matrix_market(args.input), "input")
    if args.eps is None:
        raise ParameterError("--eps is required")
    result = leverage_scores(a, eps=args.eps, delta=args.delta, seed=args.seed,
                             c_m=args.cm, c_s=args.cs, c_t=args.ct)
    _info(f"chose m={result.spec.m} s={result.spec.s} (osnap-global)")
    lines = ["index,score"]
    lines += [f"{i},{score:.17g}" for i, score in enumerate(result.scores)]
    _emit_text("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_lowrank(args) -> int:
    a = as_matrix(read_matrix_market(args.input), "input")
    if args.eps is None:
        raise ParameterError("--eps is required")
    result = low_rank(a, k=args.k, eps=args.eps, delta=args.delta, seed=args.seed,
                      c_m=args.cm, c_s=args.cs)
    _info(f"rank-{args.k} Frobenius error {result.error:.6e}")
    if args.output is None:
        raise ParameterError("--output is required for lowrank (stem for _u/_s/_v files)")
    stem, ext = os.path.splitext(args.output)
    ext = ext or ".mtx"
    _emit_matrix(result.u, f"{stem}_u{ext}")
    _emit_matrix(result.sigma.reshape(-1, 1), f"{stem}_s{ext}")
    _emit_matrix(result.v, f"{stem}_v{ext}")
    return 0


def _cmd_verify(args) -> int:
    if args.experiment == "hash-independence":
        report = verify.hash_independence_exhaustive(args.k, args.p)
    elif args.experiment == "frobenius":
        if args.m is None:
            raise ParameterError("--m is required for the frobenius experiment")
        report = verify.frobenius_moment_check(args.n, args.d, args.m, args.trials,
                                               seed0=args.seed, threads=args.threads)
    elif args.experiment == "embedding":
        if args.eps is None:
            raise ParameterError("--eps is required for the embedding experiment")
        spec = _resolve_spec(args, n=args.n, dim=args.d)
        report = verify.embedding_success_rate(spec, args.n, args.d, args.eps, args.trials,
                                               seed0=args.seed, threads=args.threads)
    else:
        if args.eps is None:
            raise ParameterError("--eps is required for the product experiment")
        d2 = args.d2 if args.d2 is not None else args.d
        spec = _resolve_spec(args, n=args.n, dim=max(args.d, d2))
        a = verify.gaussian_matrix(args.n, args.d, mix(args.seed, 101))
        b = verify.gaussian_matrix(args.n, d2, mix(args.seed, 102))
        report = verify.matrix_product_error_check(a, b, spec, args.trials, args.eps,
                                                   seed0=args.seed, threads=args.threads)
    _emit_text(report.to_json() + "\n", args.output)
    _info(f"{report.experiment}: statistic={report.statistic:.6g} "
          f"threshold={report.threshold:.6g} passed={report.passed}")
    return 0 if report.passed else 3


def _cmd_bench(args) -> int:
    spec = _resolve_spec(args, n=args.n, dim=args.d)
    report = verify.nnz_scaling_benchmark(spec, args.nnz, reps=args.reps, d=args.d,
                                          seed0=args.seed)
    _emit_text(report.to_json() + "\n", args.output)
    _info(f"nnz scaling: worst time-ratio/nnz-ratio {report.statistic:.3f} "
          f"(passed={report.passed})")
    return 0 if report.passed else 3


_COMMANDS = {
    "sketch": _cmd_sketch,
    "apply": _cmd_apply,
    "regress": _cmd_regress,
    "leverage": _cmd_leverage,
    "lowrank": _cmd_lowrank,
    "verify": _cmd_verify,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
