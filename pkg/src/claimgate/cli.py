"""Command-line interface.

Exit codes: 0 success (flagged degenerate records included), 2 usage or
validation error, 1 internal error.  ``CLAIMGATE_SEED`` replaces the default
seed when ``--seed`` is not given.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .classification import (
    DEFAULT_K,
    ClassificationComparison,
    clamp_congruence,
    congruence_bounds,
    pfc_classification,
)
from .congruence import congruence_classification, congruence_segmentation, read_paired_csv
from .corpus import DEFAULT_THRESHOLDS, CorpusSchemaError, analyze_corpus, ingest_corpus
from .kernels import RngStream
from .planner import DEFAULT_BASE, band, build_grid, required_n
from .reporting import dumps, grid_csv, grid_svg_text, write_corpus_bundle
from .segmentation import SdImputationModel, SegmentationComparison, pfc_segmentation, resolve_sds
from .types import PRESET_NAMES, parse_congruence, preset

DEFAULT_SEED = 42


class UsageError(Exception):
    pass


def _default_seed() -> int:
    raw = os.environ.get("CLAIMGATE_SEED")
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        seed = int(raw)
    except ValueError:
        raise UsageError(f"CLAIMGATE_SEED must be an integer, got {raw!r}") from None
    return seed


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _scaled(value: float | None, scale: str) -> float | None:
    if value is None:
        return None
    return value / 100.0 if scale == "percent" else value


def _emit(args: argparse.Namespace, report: dict, lines: Sequence[str]) -> None:
    if args.json:
        sys.stdout.write(dumps(report))
    else:
        sys.stdout.write("\n".join(lines) + "\n")


def _base_config(args: argparse.Namespace, **extra: Any) -> dict:
    cfg = {"command": args.command, "version": __version__}
    cfg.update(extra)
    return cfg


def cmd_check_cls(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    cmp = ClassificationComparison(args.n, _scaled(args.acc_a, args.scale), _scaled(args.acc_b, args.scale))
    assumed = parse_congruence("classification", args.congruence)
    used = clamp_congruence(cmp, assumed)
    est = pfc_classification(cmp, used, args.k, RngStream(seed), round_counts=args.round_counts)
    lower, upper = congruence_bounds(cmp)
    config = _base_config(
        args, seed=seed, k=args.k, congruence=args.congruence, scale=args.scale,
        n=args.n, acc_a=args.acc_a, acc_b=args.acc_b, round_counts=args.round_counts,
    )
    report = {
        "config": config,
        "probability": est.probability,
        "std_err": est.std_err,
        "k": est.k,
        "method": est.method,
        "congruence": asdict(used),
        "congruence_requested": assumed.value,
        "congruence_bounds": [lower, upper],
        "band": band(est.probability),
    }
    _emit(args, report, [
        f"probability of false claims: {est.probability:.6f} (std err {est.std_err:.6f}, k={est.k})",
        f"congruence used: {used.value:g} ({used.provenance}{', clamped' if used.clamped else ''})",
        f"congruence bounds: [{lower:g}, {upper:g}]",
        f"band: {band(est.probability)}",
    ])
    return 0


def _imputation_model(args: argparse.Namespace) -> SdImputationModel:
    return SdImputationModel(coef=args.impute_coef, pi_quartiles=(args.pi_q1, args.pi_q3))


def cmd_check_seg(args: argparse.Namespace) -> int:
    if (args.sd_a is None) != (args.sd_b is None) and args.impute is None:
        raise UsageError("give both --sd-a and --sd-b, or use --impute")
    cmp = SegmentationComparison(
        args.n, _scaled(args.dsc_a, args.scale), _scaled(args.dsc_b, args.scale),
        _scaled(args.sd_a, args.scale), _scaled(args.sd_b, args.scale),
    )
    if args.impute is None and args.sd_a is None:
        raise UsageError("no SDs given: pass --sd-a/--sd-b or --impute point|q1|q3")
    sd_source = "reported" if args.impute is None else f"imputed-{args.impute}"
    model = _imputation_model(args)
    r = parse_congruence("segmentation", args.congruence)
    est = pfc_segmentation(cmp, r, sd_source, model)  # type: ignore[arg-type]
    sd_a, sd_b, imputed = resolve_sds(cmp, sd_source, model)  # type: ignore[arg-type]
    config = _base_config(
        args, congruence=args.congruence, scale=args.scale, sd_source=sd_source, n=args.n,
        dsc_a=args.dsc_a, dsc_b=args.dsc_b, sd_a=args.sd_a, sd_b=args.sd_b,
        imputation={"coef": model.coef, "pi_quartiles": list(model.pi_quartiles)},
    )
    report = {
        "config": config,
        "probability": est.probability,
        "method": est.method,
        "degenerate": est.degenerate,
        "congruence": asdict(r),
        "sds_used": [sd_a, sd_b],
        "sd_imputed": imputed,
        "band": band(est.probability),
    }
    _emit(args, report, [
        f"probability of false claims: {est.probability:.6g} (closed form{', degenerate' if est.degenerate else ''})",
        f"correlation used: {r.value:g} ({r.provenance})",
        f"SDs used: {sd_a:.6g}, {sd_b:.6g}{' (imputed)' if imputed else ''}",
        f"band: {band(est.probability)}",
    ])
    return 0


def cmd_corpus(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    presets = list(PRESET_NAMES) if args.presets == "all" else ["median"]
    thresholds = args.thresholds or list(DEFAULT_THRESHOLDS)
    try:
        records, rejections = ingest_corpus(args.input)
    except OSError as exc:
        raise UsageError(f"cannot read corpus: {exc}") from None
    model = _imputation_model(args)
    report = analyze_corpus(
        records, rejections, task=args.task, presets=presets, thresholds=thresholds,
        impute_variant=args.impute, k=args.k, seed=seed, model=model, workers=args.workers,
    )
    config = _base_config(
        args, input=Path(args.input).name, task=args.task, presets=presets, thresholds=thresholds,
        impute=args.impute, k=args.k, seed=seed,
        imputation={"coef": model.coef, "pi_quartiles": list(model.pi_quartiles)},
    )
    paths = write_corpus_bundle(report, args.out, config)
    for p in paths:
        print(p)
    return 0


def cmd_grid(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    base = args.base if args.base is not None else DEFAULT_BASE[args.task]
    model = _imputation_model(args)
    grid = build_grid(
        args.task, args.n_list, args.delta_list, base, None, args.k, seed,
        impute_variant=args.impute, model=model, workers=args.workers,
    )
    config = _base_config(
        args, task=args.task, n_list=args.n_list, delta_list=args.delta_list, base=base,
        k=args.k, seed=seed, impute=args.impute,
        imputation={"coef": model.coef, "pi_quartiles": list(model.pi_quartiles)},
    )
    text = grid_csv(grid, config)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.svg:
        Path(args.svg).write_text(grid_svg_text(grid, config))
    return 0


def cmd_required_n(args: argparse.Namespace) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    base = args.base if args.base is not None else DEFAULT_BASE[args.task]
    c = parse_congruence(args.task, args.congruence)
    res = required_n(
        args.task, args.delta, base, c, args.target, args.k, seed,
        impute_variant=args.impute, model=_imputation_model(args), n_cap=args.n_cap,
    )
    config = _base_config(
        args, task=args.task, delta=args.delta, base=base, congruence=args.congruence,
        target=args.target, k=args.k, seed=seed, impute=args.impute, n_cap=args.n_cap,
    )
    report = {"config": config, **asdict(res)}
    line = (
        f"required test-set size: {res.n} (pfc {res.probability:.4g})"
        if res.n is not None
        else f"target not reached below n = {args.n_cap} (exceeds-cap)"
    )
    _emit(args, report, [line])
    return 0


def cmd_congruence(args: argparse.Namespace) -> int:
    try:
        data = read_paired_csv(args.input, args.task)
    except OSError as exc:
        raise UsageError(f"cannot read paired-output file: {exc}") from None
    if args.task == "classification":
        c = congruence_classification(data)  # type: ignore[arg-type]
        acc = data.accuracies  # type: ignore[union-attr]
        extra = {"accuracy_a": acc[0], "accuracy_b": acc[1]}
    else:
        c = congruence_segmentation(data)  # type: ignore[arg-type]
        extra = {}
    report = {
        "config": _base_config(args, task=args.task, input=Path(args.input).name),
        "congruence": c.value, "n": len(data.correct_a if args.task == "classification" else data.dsc_a),  # type: ignore[union-attr]
        "presets": {p: preset(args.task, p).value for p in PRESET_NAMES},
        **extra,
    }
    _emit(args, report, [f"empirical congruence ({args.task}): {c.value:.6g}"])
    return 0


def _add_imputation(p: argparse.ArgumentParser, default: str | None = "point") -> None:
    p.add_argument("--impute", choices=("point", "q1", "q3"), default=default,
                   help="SD imputation variant for missing SDs")
    p.add_argument("--impute-coef", type=float, default=0.4, help="c in sd = c*sqrt(m(1-m))")
    p.add_argument("--pi-q1", type=float, default=0.7, help="lower prediction-interval multiplier")
    p.add_argument("--pi-q3", type=float, default=1.3, help="upper prediction-interval multiplier")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="claimgate", description="Probability of false outperformance claims.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-cls", help="single Accuracy comparison (Monte Carlo)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--acc-a", type=float, required=True, help="winner's accuracy")
    p.add_argument("--acc-b", type=float, required=True, help="runner-up's accuracy")
    p.add_argument("--congruence", default="median", help="value in [0,1] or median|q1|q3")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--scale", choices=("unit", "percent"), default="unit")
    p.add_argument("--round-counts", action="store_true", help="round discordant counts to integers")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check_cls)

    p = sub.add_parser("check-seg", help="single mean-DSC comparison (closed form)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--dsc-a", type=float, required=True)
    p.add_argument("--dsc-b", type=float, required=True)
    p.add_argument("--sd-a", type=float, default=None)
    p.add_argument("--sd-b", type=float, default=None)
    p.add_argument("--congruence", default="median", help="correlation in (-1,1] or median|q1|q3")
    p.add_argument("--scale", choices=("unit", "percent"), default="unit")
    p.add_argument("--json", action="store_true")
    _add_imputation(p, default=None)
    p.set_defaults(func=cmd_check_seg)

    p = sub.add_parser("corpus", help="analyse a corpus CSV of extracted comparisons")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="output directory for the report bundle")
    p.add_argument("--task", choices=("classification", "segmentation"), default=None)
    p.add_argument("--presets", choices=("all", "median"), default="all")
    p.add_argument("--thresholds", type=_float_list, default=None)
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    _add_imputation(p)
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("grid", help="probability grid over test-set sizes and deltas")
    p.add_argument("--task", choices=("classification", "segmentation"), required=True)
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--delta-list", type=_float_list, required=True)
    p.add_argument("--base", type=float, default=None, help="runner-up metric level (default 0.80)")
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None, help="CSV path (default stdout)")
    p.add_argument("--svg", default=None, help="also write an SVG heatmap")
    _add_imputation(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("required-n", help="minimum test-set size for a target probability")
    p.add_argument("--task", choices=("classification", "segmentation"), required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--base", type=float, default=None)
    p.add_argument("--congruence", default="median")
    p.add_argument("--target", type=float, default=0.05)
    p.add_argument("--k", type=int, default=DEFAULT_K)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-cap", type=int, default=10_000_000)
    p.add_argument("--json", action="store_true")
    _add_imputation(p)
    p.set_defaults(func=cmd_required_n)

    p = sub.add_parser("congruence", help="empirical congruence from a paired-output CSV (id,a,b)")
    p.add_argument("input")
    p.add_argument("--task", choices=("classification", "segmentation"), required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_congruence)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, CorpusSchemaError, ValueError) as exc:
        print(f"claimgate {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"claimgate {args.command}: internal error: {exc!r}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
