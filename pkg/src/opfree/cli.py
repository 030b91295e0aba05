"""Command-line entry point.

Exit codes: 0 pass, 1 verification failure, 2 config error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .algebra import extended_flatten, extended_reshape
from .config import ConfigError, ExperimentConfig, default_config, load_config, parse_word
from .cumulants import freeness_check
from .io import matrix_to_json
from .limits import boolean_limit_moment, limit_oracle, semicircular_limit_moment
from .matmodel import convergence_sweep, decay_violations, sample_matrix, verify_matrix_cpm
from .partitions import CLASSES, PartitionSizeError, enumerate_class
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3
CSV_COLUMNS = ("word_id", "n", "mode", "deviation_norm", "stderr_norm", "wall_ms")
CLASS_ALIASES = {"nc": "noncrossing", "in": "interval", "nc2": "nc_pair", "in2": "interval_pair"}


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    Path(out).write_text(text)


def _config(args) -> ExperimentConfig:
    return load_config(args.config) if args.config else default_config()


def cmd_partitions(args) -> int:
    cls = CLASS_ALIASES.get(args.cls, args.cls)
    if cls not in CLASSES:
        raise ConfigError(f"unknown class {args.cls!r}; expected one of {CLASSES}")
    for name in args.verify or []:
        if name not in SUITES:
            raise ConfigError(f"unknown suite {name!r}; available: {', '.join(SUITES)}")
    try:
        count = len(enumerate_class(args.m, cls)) if args.m >= 2 or cls not in ("closed", "closed_nc") else 0
    except PartitionSizeError as exc:
        raise ConfigError(str(exc)) from exc
    report = {"m": args.m, "class": cls, "count": count, "suites": []}
    ok = True
    for name in args.verify or []:
        res = run_suite(name, args.m)
        report["suites"].append({"name": name, "passed": res.passed, "checked": res.checked, "failures": [str(f) for f in res.failures]})
        ok &= res.passed
    report["passed"] = ok
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_OK if ok else EXIT_FAIL


def _resolve_words(cfg: ExperimentConfig, word_arg: str | None):
    if word_arg is None:
        if not cfg.words:
            raise ConfigError("no words in config; pass --word")
        return list(cfg.words)
    try:
        return [cfg.word(word_arg)]
    except ConfigError:
        pass
    try:
        raw = json.loads(word_arg)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--word is neither a word id nor JSON: {word_arg!r}") from exc
    if isinstance(raw, list):
        raw = {"id": "cli", "matrix": raw}
    return [parse_word(raw, cfg.dim, cfg.models, cfg.profile, "cli")]


def cmd_limit(args) -> int:
    cfg = _config(args)
    words = _resolve_words(cfg, args.word)
    fn = semicircular_limit_moment if args.law == "free" else boolean_limit_moment
    results = []
    for spec in words:
        val = fn(spec.word, cfg.etas, cfg.profile)
        results.append({"word_id": spec.id, "law": args.law, "value": matrix_to_json(val)})
    _emit(json.dumps(results if len(results) > 1 else results[0], indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_converge(args) -> int:
    cfg = _config(args)
    if not cfg.words:
        raise ConfigError("converge needs words in the config")
    mode = args.mode or cfg.mode
    seed = cfg.seed if args.seed is None else args.seed
    law = args.law or cfg.law
    if law == "boolean" and mode != "exact":
        raise ConfigError("Boolean models support only --mode exact")

    def run(spec):
        return convergence_sweep(spec.word, cfg.models, cfg.diag, cfg.n_list, mode, cfg.trials, seed, law, spec.id)

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        rows = [r for batch in pool.map(run, cfg.words) for r in batch]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow([r.word_id, r.n, r.mode, f"{r.deviation_norm:.17g}", f"{r.stderr_norm:.17g}", f"{r.wall_ms:.3f}"])
    out = args.out or cfg.outputs.get("csv")
    _emit(buf.getvalue(), out)
    bad = decay_violations(rows)
    for b in bad:
        print(f"decay criterion failed: word {b[0]} n={b[1]}->{b[2]} deviation {b[3]:.3e}->{b[4]:.3e}", file=sys.stderr)
    return EXIT_FAIL if bad else EXIT_OK


def cmd_extended_check(args) -> int:
    cfg = _config(args)
    model = cfg.models[args.symbol] if args.symbol else next(iter(cfg.models.values()))
    rng = np.random.default_rng(cfg.seed if args.seed is None else args.seed)
    k = model.dim
    worst = 0.0
    for _ in range(args.samples):
        b = rng.standard_normal((args.N, args.N, k, k)) + 1j * rng.standard_normal((args.N, args.N, k, k))
        _, _, dev = verify_matrix_cpm(model, args.N, args.K, b)
        worst = max(worst, dev)
    y = sample_matrix(model, args.N * args.K, rng)
    a = extended_reshape(y, args.N)
    roundtrip = bool(np.array_equal(extended_flatten(a, args.N).data, y.data))
    adjoint_ok = all(
        np.array_equal(a.block(j, i), a.block(i, j).conj().T) for i in range(args.K) for j in range(args.K)
    )
    passed = worst < args.tol and roundtrip and adjoint_ok
    report = {"N": args.N, "K": args.K, "samples": args.samples, "max_deviation": worst,
              "reshape_roundtrip": roundtrip, "block_adjoint": adjoint_ok, "passed": passed}
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_freeness(args) -> int:
    cfg = _config(args)
    fams = [tuple(f.split(",")) for f in args.families] if args.families else None
    if fams is None:
        syms = list(cfg.models)
        if len(syms) < 2:
            raise ConfigError("freeness needs two matrix symbols or explicit --families")
        fams = [(syms[0],), tuple(syms[1:])]
    if len(fams) != 2:
        raise ConfigError("--families takes exactly two comma-separated lists")
    known = set(cfg.models) | set(cfg.profile.values)
    for s in (s for f in fams for s in f):
        if s not in known:
            raise ConfigError(f"unknown symbol {s!r} in --families")
    if not 1 <= args.max_len <= 6:
        raise ConfigError("--max-len must lie in 1..6")
    oracle = limit_oracle(cfg.etas, cfg.profile, args.law)
    report = freeness_check(oracle, tuple(fams), args.max_len, tol=args.tol, dim=cfg.dim,
                            seed=cfg.seed if args.seed is None else args.seed)
    expect = args.expect or ("free" if args.law == "free" else "not-free")
    matches = report.passed == (expect == "free")
    out = {"families": [list(f) for f in fams], "law": args.law, "max_len": args.max_len,
           "free": report.passed, "checked": report.checked, "worst": report.worst,
           "witness": None if report.witness is None else [list(report.witness[0]), report.witness[1]],
           "expect": expect, "passed": matches}
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK if matches else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON, schema opfree-1)")
    common.add_argument("--seed", type=int, help="base seed (overrides the config)")
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--mode", choices=("exact", "mc", "both"))
    common.add_argument("--threads", type=int, default=1)

    parser = argparse.ArgumentParser(prog="opfree", description="Operator-valued free probability toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("partitions", parents=[common], help="count a partition class and run lemma suites")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--class", dest="cls", default="all")
    p.add_argument("--verify", action="append", metavar="SUITE", help=f"one of: {', '.join(SUITES)}")
    p.set_defaults(func=cmd_partitions)

    p = sub.add_parser("limit", parents=[common], help="evaluate a limit mixed moment")
    p.add_argument("--word", help="word id from the config, or a JSON list / object")
    p.add_argument("--law", choices=("free", "boolean"), default="free")
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("converge", parents=[common], help="convergence sweep as CSV")
    p.add_argument("--law", choices=("conditional", "boolean"))
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("extended-check", parents=[common], help="second-moment check of the extended model")
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--K", type=int, default=2)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--symbol")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_extended_check)

    p = sub.add_parser("freeness", parents=[common], help="certify freeness by vanishing mixed cumulants")
    p.add_argument("--families", nargs=2, metavar="SYMS", help="two comma-separated symbol lists")
    p.add_argument("--max-len", type=int, default=4)
    p.add_argument("--law", choices=("free", "boolean"), default="free")
    p.add_argument("--expect", choices=("free", "not-free"))
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_freeness)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
