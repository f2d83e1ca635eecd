"""Command-line interface for the credit-network analysis pipeline."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import econometrics as econ
from . import report
from .core import derived_degrees
from .ingest import apply_consistency_filter, parse_sample, write_sample_csv
from .netstats import ccdf, summarize
from .nullmodel import (Variant, expected_metrics, fitness_spec_from_sample,
                        sample_ensemble)
from .pipeline import (RunConfig, default_grid, load_config_file, run)
from .synthgen import GenConfig, generate


def _add_input_args(parser):
    parser.add_argument("--edges", required=True)
    parser.add_argument("--firms", required=True)
    parser.add_argument("--banks", required=True)


def _parse_filtered(args):
    sample = parse_sample(args.edges, args.firms, args.banks)
    filtered, rep = apply_consistency_filter(sample)
    return filtered, rep


def _cmd_synth(args) -> int:
    config = GenConfig(
        n_firms=args.firms, n_banks=args.banks, seed=args.seed,
        target_density=args.density, attachment_boost=args.attachment_boost,
        fragmentation_penalty=args.fragmentation_penalty,
        noise_sd=args.noise_sd, balance_noise=args.balance_noise,
    )
    sample, truth = generate(config)
    write_sample_csv(sample, args.out)
    truth.save(os.path.join(args.out, "ground_truth.json"))
    print(f"wrote synthetic sample ({sample.network.n_links} links) to {args.out}")
    return 0


def _cmd_ingest(args) -> int:
    filtered, rep = _parse_filtered(args)
    os.makedirs(args.out, exist_ok=True)
    write_sample_csv(filtered, args.out)
    report.write_json(os.path.join(args.out, "filter_report.json"),
                      rep.to_json())
    print(f"kept {rep.kept_firms} firms, dropped {len(rep.dropped_firms)}; "
          f"{len(rep.isolated_banks)} banks left isolated")
    return 0


def _cmd_stats(args) -> int:
    filtered, _ = _parse_filtered(args)
    net = filtered.network
    stats = summarize(net)
    os.makedirs(args.out, exist_ok=True)
    report.write_json(os.path.join(args.out, "summary_stats.json"),
                      stats.to_json())
    k, h = derived_degrees(net)
    for label, values in (("firm_degrees", k), ("bank_degrees", h)):
        curve = ccdf(values)
        report.write_csv(os.path.join(args.out, f"ccdf_{label}.csv"),
                         ["value", "survival"],
                         zip(curve.values, curve.survival))
    print(report.canonical_json(stats.to_json()), end="")
    return 0


def _cmd_nullmodel(args) -> int:
    filtered, _ = _parse_filtered(args)
    variant = Variant.NETWORK_DRIVEN if args.variant == "network" \
        else Variant.BALANCE_DRIVEN
    spec = fitness_spec_from_sample(filtered, variant)
    ensemble = sample_ensemble(spec, args.samples, args.seed)
    expected = expected_metrics(spec)
    os.makedirs(args.out, exist_ok=True)
    report.write_json(
        os.path.join(args.out, f"nullmodel_{args.variant}.json"),
        {
            "spec": spec.to_json(),
            "seed": args.seed,
            "n_samples": args.samples,
            "expected_firm_degrees": expected.firm_degrees,
            "expected_bank_degrees": expected.bank_degrees,
            "ensemble": ensemble.to_json(),
        })
    print(f"calibrated z = {spec.z:.6e}")
    return 0


def _grid_for(args) -> tuple:
    stage = econ.Stage.LINK_FORMATION if args.stage == "1" \
        else econ.Stage.LOAN_SIZING
    model = {"m1": econ.Model.M1_GRAVITY, "m2": econ.Model.M2_NETWORK,
             "m3": econ.Model.M3_FULL}[args.model]
    variant = econ.DegreeVariant.A_WITH_DEGREE if args.variant == "a" \
        else econ.DegreeVariant.B_WITHOUT_DEGREE
    fe = econ.FixedEffects.BANK_DUMMIES if args.fixed_effects \
        else econ.FixedEffects.NONE
    return (econ.ModelSpec(stage, model, variant, fixed_effects=fe),)


def _cmd_regress(args) -> int:
    filtered, _ = _parse_filtered(args)
    spec = _grid_for(args)[0]
    design = econ.build_design(filtered, spec)
    if spec.stage is econ.Stage.LINK_FORMATION:
        fit = econ.fit_logit(design)
    elif spec.fixed_effects is econ.FixedEffects.BANK_DUMMIES:
        fit = econ.fit_ols_fixed_effects(design)
    else:
        fit = econ.fit_ols(design)
    os.makedirs(args.out, exist_ok=True)
    cell = spec.name()
    report.write_json(os.path.join(args.out, f"{cell}.json"), fit.to_json())
    table = fit.format_table(title=cell)
    report.write_text(os.path.join(args.out, f"{cell}.txt"), table)
    print(table, end="")
    return 0


def _cmd_placebo(args) -> int:
    filtered, _ = _parse_filtered(args)
    nulls = {
        econ.DegreeSource.NULL_NET:
            fitness_spec_from_sample(filtered, Variant.NETWORK_DRIVEN),
        econ.DegreeSource.NULL_BAL:
            fitness_spec_from_sample(filtered, Variant.BALANCE_DRIVEN),
    }
    stage = econ.Stage.LINK_FORMATION if args.stage == "1" \
        else econ.Stage.LOAN_SIZING
    os.makedirs(args.out, exist_ok=True)
    panel = [
        econ.ModelSpec(stage, econ.Model.M3_FULL),
        econ.ModelSpec(stage, econ.Model.M3_FULL, drop_network_strength=True),
        econ.ModelSpec(stage, econ.Model.M3_FULL,
                       degree_source=econ.DegreeSource.NULL_NET),
        econ.ModelSpec(stage, econ.Model.M3_FULL,
                       degree_source=econ.DegreeSource.NULL_BAL),
    ]
    status = 0
    for spec in panel:
        cell = spec.name()
        try:
            design = econ.build_design(filtered, spec, nulls)
            fit = econ.fit_logit(design) \
                if stage is econ.Stage.LINK_FORMATION else econ.fit_ols(design)
        except Exception as exc:
            print(f"{cell}: FAILED ({type(exc).__name__}: {exc})",
                  file=sys.stderr)
            status = 2
            continue
        report.write_json(os.path.join(args.out, f"{cell}.json"),
                          fit.to_json())
        report.write_text(os.path.join(args.out, f"{cell}.txt"),
                          fit.format_table(title=cell))
        print(f"{cell}: ok")
    return status


def _cmd_run(args) -> int:
    if args.config:
        config = load_config_file(args.config, out_dir=args.out)
    else:
        synth = None
        if args.edges is None:
            synth = GenConfig(seed=args.seed)
        config = RunConfig(
            out_dir=args.out,
            edges_path=args.edges,
            firm_attrs_path=args.firms,
            bank_attrs_path=args.banks,
            synth=synth,
            n_samples=args.samples,
            seed=args.seed,
        )
    bundle = run(config)
    if bundle.failures:
        for cell, err in sorted(bundle.failures.items()):
            print(f"{cell}: FAILED ({err})", file=sys.stderr)
        return 2
    print(f"wrote {len(bundle.files)} files to {bundle.out_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="creditnet",
        description="Bipartite credit networks: null models and regressions")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic sample")
    p.add_argument("--out", required=True)
    p.add_argument("--firms", type=int, default=60)
    p.add_argument("--banks", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float, default=0.12)
    p.add_argument("--attachment-boost", type=float, default=0.0)
    p.add_argument("--fragmentation-penalty", type=float, default=0.0)
    p.add_argument("--noise-sd", type=float, default=0.1)
    p.add_argument("--balance-noise", type=float, default=0.05)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("ingest", help="parse, filter and re-emit a sample")
    _add_input_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("stats", help="summary statistics and CCDFs")
    _add_input_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("nullmodel", help="calibrate a null model and sample")
    _add_input_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--variant", choices=["network", "balance"],
                   default="network")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=_cmd_nullmodel)

    p = sub.add_parser("regress", help="fit one regression specification")
    _add_input_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--stage", choices=["1", "2"], required=True)
    p.add_argument("--model", choices=["m1", "m2", "m3"], required=True)
    p.add_argument("--variant", choices=["a", "b"], default="a")
    p.add_argument("--fixed-effects", action="store_true")
    p.set_defaults(func=_cmd_regress)

    p = sub.add_parser("placebo", help="the four-column placebo panel")
    _add_input_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--stage", choices=["1", "2"], required=True)
    p.set_defaults(func=_cmd_placebo)

    p = sub.add_parser("run", help="full pipeline")
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--edges")
    p.add_argument("--firms")
    p.add_argument("--banks")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
