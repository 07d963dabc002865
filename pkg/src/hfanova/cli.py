"""Command-line entry points: global test, multiple contrast test, and the
simulation harness, with JSON or aligned-table output."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from .bootstrap import BootstrapConfig, bootstrap_matrix, default_workers
from .competitors import fmax_gpf_batch, l2b_fb_batch
from .core import Dataset, HypothesisFamily, build_contrasts, make_grid
from .errors import HfanovaError
from .estimate import estimate_moments
from .hotelling import gph_statistic
from .io import ingest_csv, read_matrix_csv
from .mct import _observed_ranks, mct_from_matrix
from .numerics import SeedSpec, empirical_quantile
from .simulate import METHODS, ScenarioSpec, StudyReport, format_table, run_study

_COMPETITOR_METHODS = ("Fmax", "GPF", "L2b", "Fb")


def _emit(payload: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(payload)
    else:
        sys.stdout.write(payload)


def _to_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _parse_contrast(value: str, k: int, block_sizes: Optional[str]) -> HypothesisFamily:
    if value.startswith("file:"):
        h = read_matrix_csv(value[len("file:"):], "hypothesis")
        if h.shape[1] != k:
            raise HfanovaError(
                f"hypothesis file has {h.shape[1]} columns but the data has {k} groups"
            )
        if block_sizes:
            sizes = [int(s) for s in block_sizes.split(",")]
            if sum(sizes) != h.shape[0]:
                raise HfanovaError(
                    f"--block-sizes sum to {sum(sizes)} but the hypothesis has {h.shape[0]} rows"
                )
            bounds = np.concatenate([[0], np.cumsum(sizes)])
            blocks = tuple(h[bounds[l]: bounds[l + 1]] for l in range(len(sizes)))
            return HypothesisFamily(blocks=blocks)
        return HypothesisFamily(blocks=(h,), labels=("global",))
    return build_contrasts(value, k=k)


def _load(args) -> tuple[Dataset, HypothesisFamily]:
    dataset = ingest_csv(args.input)
    if args.grid:
        if not args.grid.startswith("file:"):
            raise HfanovaError("--grid expects file:PATH")
        points = read_matrix_csv(args.grid[len("file:"):], "grid").ravel()
        if points.size != dataset.grid.m:
            raise HfanovaError(
                f"grid file has {points.size} points but the data has {dataset.grid.m} columns"
            )
        dataset = Dataset(grid=make_grid(points), samples=dataset.samples)
    family = _parse_contrast(args.contrast, dataset.k, getattr(args, "block_sizes", None))
    if args.c:
        if not args.c.startswith("file:"):
            raise HfanovaError("--c expects file:PATH")
        c = read_matrix_csv(args.c[len("file:"):], "target")
        family = family.with_c(c)
    return dataset, family


def cmd_test(args) -> int:
    dataset, family = _load(args)
    family = family.collapsed()
    config = BootstrapConfig(
        B=args.B, alpha=args.alpha, seed=SeedSpec(args.seed), workers=default_workers()
    )
    moments = estimate_moments(dataset, full_cov=True)
    observed = float(gph_statistic(dataset, family, moments=moments).per_block[0])
    matrix = bootstrap_matrix(dataset, family, config, moments=moments)
    column = matrix.stats[:, 0]
    critical = empirical_quantile(column, 1.0 - config.alpha)
    p_value = float(np.count_nonzero(column >= observed)) / config.B
    report = {
        "schema": "hfanova-global-test-report-v1",
        "kind": "global_test",
        "alpha": args.alpha,
        "B": args.B,
        "seed": args.seed,
        "contrast": args.contrast,
        "groups": dataset.k,
        "total_curves": dataset.n,
        "grid_points": dataset.grid.m,
        "statistic": observed,
        "critical_value": critical,
        "p_value": p_value,
        "reject": bool(observed > critical),
    }
    if args.format == "table":
        lines = [f"{key}: {report[key]}" for key in
                 ("statistic", "critical_value", "p_value", "reject")]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(_to_json(report), args.out)
    return 0


def cmd_mct(args) -> int:
    dataset, family = _load(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise HfanovaError(f"unknown method {m!r}; choose from {METHODS}")
    if "mGPH" not in methods:
        methods.insert(0, "mGPH")
    config = BootstrapConfig(
        B=args.B, alpha=args.alpha, seed=SeedSpec(args.seed), workers=default_workers()
    )
    moments = estimate_moments(dataset, full_cov=True)
    observed = gph_statistic(dataset, family, moments=moments).per_block
    matrix = bootstrap_matrix(dataset, family, config, moments=moments)
    result = mct_from_matrix(observed, matrix, config.alpha)

    R = family.R
    columns: dict[str, dict] = {
        "mGPH": {
            "statistic": [float(v) for v in result.observed],
            "critical_value": [float(v) for v in result.critical],
            "adjusted_p_percent": [100.0 * float(v) for v in result.adjusted_p],
            "reject": [bool(v) for v in result.local_reject],
        }
    }
    if "GPH" in methods:
        raw = _observed_ranks(matrix.stats, observed) / config.B
        columns["GPH"] = {
            "statistic": [float(v) for v in observed],
            "adjusted_p_percent": [100.0 * min(1.0, R * float(p)) for p in raw],
            "reject": [min(1.0, R * float(p)) <= args.alpha for p in raw],
        }
    competitor_results = {}
    if "Fmax" in methods or "GPF" in methods:
        fmax_res, gpf_res = fmax_gpf_batch(dataset, family, config)
        competitor_results["Fmax"] = fmax_res
        competitor_results["GPF"] = gpf_res
    if "L2b" in methods or "Fb" in methods:
        l2b_res, fb_res = l2b_fb_batch(dataset, family, config)
        competitor_results["L2b"] = l2b_res
        competitor_results["Fb"] = fb_res
    for name in _COMPETITOR_METHODS:
        if name in methods:
            res = competitor_results[name]
            columns[name] = {
                "statistic": [float(r.statistic) for r in res],
                "adjusted_p_percent": [
                    100.0 * min(1.0, R * float(r.p_value)) for r in res
                ],
                "reject": [min(1.0, R * float(r.p_value)) <= args.alpha for r in res],
            }

    report = {
        "schema": "hfanova-mct-report-v1",
        "kind": "mct",
        "alpha": args.alpha,
        "B": args.B,
        "seed": args.seed,
        "contrast": args.contrast,
        "hypotheses": list(family.labels),
        "beta_tilde": float(result.beta_tilde),
        "global_reject": bool(result.global_reject),
        "methods": {name: columns[name] for name in columns},
    }
    if args.format == "table":
        _emit(_mct_table(report) + "\n", args.out)
    else:
        _emit(_to_json(report), args.out)
    return 0


def _mct_table(report: dict) -> str:
    names = list(report["methods"])
    header = ["Hypothesis"] + names
    rows = []
    for i, label in enumerate(report["hypotheses"]):
        row = [label]
        for name in names:
            row.append(f"{report['methods'][name]['adjusted_p_percent'][i]:.1f}")
        rows.append(row)
    widths = [max(len(header[c]), *(len(r[c]) for r in rows)) for c in range(len(header))]
    lines = ["Adjusted p-values in %", "  ".join(h.rjust(w) for h, w in zip(header, widths))]
    for r in rows:
        lines.append("  ".join(v.rjust(w) for v, w in zip(r, widths)))
    return "\n".join(lines)


def cmd_simulate(args) -> int:
    spec = ScenarioSpec(
        distribution=args.distribution,
        size_factor=args.K,
        lambdas=args.pairing,
        scaling=args.scaling,
        contrast=args.contrast,
        alternative=args.alternative,
        reps=args.reps,
        B=args.B,
        alpha=args.alpha,
        seed=SeedSpec(args.seed),
    )
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    report: StudyReport = run_study(spec, methods=methods, workers=default_workers())
    print(f"study wall time: {report.wall_time:.1f}s", file=sys.stderr)
    if args.format == "table":
        _emit(format_table(report) + "\n", args.out)
    else:
        _emit(_to_json(report.to_json_dict()), args.out)
    return 0


def _add_common(p: argparse.ArgumentParser, b_default: int) -> None:
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--B", type=int, default=b_default, help="bootstrap replicates")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=("json", "table"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hfanova",
        description="Heteroscedastic functional ANOVA tests with bootstrap calibration",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="global test of one linear hypothesis")
    p_test.add_argument("--input", required=True, help="CSV data file")
    p_test.add_argument("--grid", default=None,
                        help="file:PATH with explicit grid points (overrides the header)")
    p_test.add_argument("--contrast", default="centering",
                        help="centering|dunnett|tukey|file:PATH (collapsed to one block)")
    p_test.add_argument("--c", default=None, help="file:PATH with target values (r x m)")
    _add_common(p_test, 1000)
    p_test.set_defaults(func=cmd_test)

    p_mct = sub.add_parser("mct", help="multiple contrast test with optional competitors")
    p_mct.add_argument("--input", required=True)
    p_mct.add_argument("--grid", default=None,
                       help="file:PATH with explicit grid points (overrides the header)")
    p_mct.add_argument("--contrast", default="tukey",
                       help="centering|dunnett|tukey|file:PATH")
    p_mct.add_argument("--block-sizes", default=None,
                       help="comma list of block row counts for file: hypotheses")
    p_mct.add_argument("--c", default=None, help="file:PATH with target values (r x m)")
    p_mct.add_argument("--methods", default="mGPH",
                       help="comma list from " + ",".join(METHODS))
    _add_common(p_mct, 1000)
    p_mct.set_defaults(func=cmd_mct)

    p_sim = sub.add_parser("simulate", help="Monte-Carlo rejection-rate study")
    p_sim.add_argument("--distribution", choices=("normal", "t5", "chisq5"),
                       default="normal")
    p_sim.add_argument("--pairing", choices=("homoscedastic", "positive_pairing",
                                             "negative_pairing"),
                       default="homoscedastic")
    p_sim.add_argument("--scaling", choices=("none", "inverse_shift"), default="none")
    p_sim.add_argument("--contrast", choices=("dunnett", "tukey"), default="dunnett")
    p_sim.add_argument("--alternative",
                       choices=("null", "A1", "A2", "A3", "A4", "A5", "A6"),
                       default="null")
    p_sim.add_argument("--reps", type=int, default=500)
    p_sim.add_argument("--K", type=int, default=1, choices=(1, 2, 4),
                       help="sample-size multiplier (null scenarios only)")
    p_sim.add_argument("--methods", default="mGPH,GPH")
    _add_common(p_sim, 500)
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HfanovaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
