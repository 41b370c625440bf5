"""Command-line interface: ``pfair {toy,evaluate,verify-theorems,distance}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import divergences as dv
from .io import IngestError, evaluate, load_features, load_manifest
from .toy import ESTIMATORS, ToyConfig, run_toy

log = logging.getLogger("perceptual_fairness")


def _write_json(path: Path, data) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _cmd_toy(args: argparse.Namespace) -> int:
    config = ToyConfig(
        n_samples=args.samples,
        seed=args.seed,
        bw_adjust=args.bw_adjust,
        estimators=tuple(args.estimators),
    )
    result = run_toy(config)
    out = Path(args.out)
    _write_json(out, result.to_dict())
    out.with_suffix(".csv").write_text(result.to_csv())
    if not args.no_figures:
        from .plotting import toy_figure

        toy_figure(result, out.with_suffix(".png"))
    log.info("P(A=0) = %.6f; wrote %s", result.p_a0, out)
    return 0


def _report_csv(report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["group", "metric", "value"])
    for g, m in report.per_group.items():
        for name, v in m.gpi.items():
            w.writerow([g, f"gpi_{name}", repr(v)])
        for name in ("gp_hit_rate", "gp_nn", "gr_nn", "gpsnr"):
            v = getattr(m, name)
            if v is not None:
                w.writerow([g, name, repr(v)])
        for name, v in m.paired_means.items():
            w.writerow([g, f"mean_{name}", repr(v)])
    return buf.getvalue()


def _cmd_evaluate(args: argparse.Namespace) -> int:
    manifest = load_manifest(args.manifest)
    report = evaluate(manifest)
    out = Path(args.out) if args.out else manifest.output
    text = report.to_json()
    if out is None:
        sys.stdout.write(text)
        return 0
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    out.with_suffix(".csv").write_text(_report_csv(report))
    if not args.no_figures and report.disparity:
        from .plotting import report_figure

        report_figure(report, out.with_suffix(".png"))
    log.info("wrote %s", out)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    from .verify import verify_all

    summary = verify_all(args.trials, args.seed, args.theorem2_trials)
    text = json.dumps(summary, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if not summary["all_passed"]:
        log.error("theorem verification found violations")
        return 1
    return 0


def _cmd_distance(args: argparse.Namespace) -> int:
    a = load_features(args.a)
    b = load_features(args.b)
    if a.shape[1] != b.shape[1]:
        raise IngestError(f"{args.b}: dimension {b.shape[1]} differs from {args.a} ({a.shape[1]})")
    if args.metric in ("tv", "w1") and a.shape[1] != 1:
        raise IngestError(f"--metric {args.metric} needs 1-D features, got dimension {a.shape[1]}")
    if args.metric == "w1":
        value = dv.wasserstein1_empirical(a[:, 0], b[:, 0])
    elif args.metric == "tv":
        from .fairness import tv_kde_1d

        value = tv_kde_1d(a, b, args.bw_adjust, 4096)
    elif args.metric == "kid":
        value = dv.kid(a, b)
    else:
        value = dv.frechet_distance(dv.fit_gaussian_moments(a), dv.fit_gaussian_moments(b))
    print(repr(value))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pfair", description="Perceptual fairness evaluation tools.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("toy", help="run the scalar Gaussian toy experiment")
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--bw-adjust", type=float, default=2.0)
    p.add_argument("--estimators", nargs="+", choices=sorted(ESTIMATORS), default=["mmse", "posterior", "mse_pi"])
    p.add_argument("--out", default="toy.json", help="JSON path; .csv and .png are written alongside")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_toy)

    p = sub.add_parser("evaluate", help="evaluate groups listed in a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="override the manifest's output path")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("verify-theorems", help="run the seeded theorem property sweeps")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--theorem2-trials", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("distance", help="one divergence between two feature files")
    p.add_argument("--metric", required=True, choices=["tv", "w1", "kid", "fid"])
    p.add_argument("--bw-adjust", type=float, default=2.0)
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=_cmd_distance)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (IngestError, ValueError, OSError) as exc:
        print(f"pfair: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
