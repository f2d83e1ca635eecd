"""End-to-end orchestration: ingest, null models, regressions, reports.

A run is fully described by a :class:`RunConfig`; identical configurations
produce byte-identical output trees.
"""

from __future__ import annotations

import os
import traceback
from dataclasses import asdict, dataclass, field

import numpy as np

from . import econometrics as econ
from . import netstats, nullmodel, report
from .core import Sample, derived_degrees, derived_strengths
from .ingest import apply_consistency_filter, parse_sample, write_sample_csv
from .netstats import ccdf, compare, summarize
from .nullmodel import (Variant, bicm_from_network, fitness_spec_from_sample,
                        random_baseline, sample_ensemble)
from .synthgen import GenConfig, generate

__all__ = [
    "RunConfig",
    "ReportBundle",
    "default_grid",
    "run",
    "residual_diagnostics",
    "load_config_file",
]

NULL_VARIANT_NAMES = ("network", "balance", "bicm", "random")


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run depends on."""

    out_dir: str
    edges_path: str | None = None
    firm_attrs_path: str | None = None
    bank_attrs_path: str | None = None
    synth: GenConfig | None = None
    null_variants: tuple[str, ...] = ("network", "balance")
    n_samples: int = 10_000
    seed: int = 42
    n_bins: int = 10
    grid: tuple[econ.ModelSpec, ...] | None = None  # None -> default grid

    def __post_init__(self):
        has_files = all((self.edges_path, self.firm_attrs_path,
                         self.bank_attrs_path))
        if has_files == (self.synth is not None):
            raise ValueError("provide either the three CSV paths or a "
                             "synthetic generator config, not both")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        for v in self.null_variants:
            if v not in NULL_VARIANT_NAMES:
                raise ValueError(f"unknown null variant {v!r}")

    def to_json(self) -> dict:
        out = {
            "edges_path": self.edges_path,
            "firm_attrs_path": self.firm_attrs_path,
            "bank_attrs_path": self.bank_attrs_path,
            "synth": asdict(self.synth) if self.synth else None,
            "null_variants": list(self.null_variants),
            "n_samples": self.n_samples,
            "seed": self.seed,
            "n_bins": self.n_bins,
            "grid": [spec.name() for spec in self.grid] if self.grid else None,
        }
        return out


@dataclass
class ReportBundle:
    """Paths and statuses of everything a run emitted."""

    out_dir: str
    files: list[str] = field(default_factory=list)
    failures: dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.failures


def default_grid() -> tuple[econ.ModelSpec, ...]:
    """The replication grid: five specs per stage, placebo set, bank FE."""
    specs: list[econ.ModelSpec] = []
    for stage in (econ.Stage.LINK_FORMATION, econ.Stage.LOAN_SIZING):
        specs.append(econ.ModelSpec(stage, econ.Model.M1_GRAVITY))
        for model in (econ.Model.M2_NETWORK, econ.Model.M3_FULL):
            for variant in (econ.DegreeVariant.A_WITH_DEGREE,
                            econ.DegreeVariant.B_WITHOUT_DEGREE):
                specs.append(econ.ModelSpec(stage, model, variant))
        # placebo panel: empirical, empirical w/o strength, two null sources
        specs.append(econ.ModelSpec(stage, econ.Model.M3_FULL,
                                    drop_network_strength=True))
        specs.append(econ.ModelSpec(stage, econ.Model.M3_FULL,
                                    degree_source=econ.DegreeSource.NULL_NET))
        specs.append(econ.ModelSpec(stage, econ.Model.M3_FULL,
                                    degree_source=econ.DegreeSource.NULL_BAL))
    specs.append(econ.ModelSpec(econ.Stage.LOAN_SIZING, econ.Model.M3_FULL,
                                fixed_effects=econ.FixedEffects.BANK_DUMMIES))
    return tuple(specs)


def residual_diagnostics(fit: econ.FitResult, design: econ.DesignMatrix,
                         n_bins: int = 30) -> dict:
    """Residual histogram, moments, and scatters against key predictors."""
    if fit.residuals is None:
        raise econ.EconError("fit carries no stored residuals")
    resid = np.asarray(fit.residuals, dtype=float)
    m = resid.mean()
    centered = resid - m
    m2 = float((centered**2).mean())
    m3 = float((centered**3).mean())
    m4 = float((centered**4).mean())
    skew = m3 / m2**1.5 if m2 > 0 else 0.0
    kurt = m4 / m2**2 - 3.0 if m2 > 0 else 0.0
    counts, edges = np.histogram(resid, bins=n_bins)
    out = {
        "mean": float(m),
        "variance": m2,
        "skewness": float(skew),
        "excess_kurtosis": float(kurt),
        "histogram": {"counts": counts.tolist(), "edges": edges.tolist()},
        "scatters": {},
    }
    for col in ("ln_k", "ln_assets_firm"):
        if col in design.column_names:
            out["scatters"][col] = {
                "x": design.column(col).tolist(),
                "residuals": resid.tolist(),
            }
    return out


def _load_sample(config: RunConfig, bundle: ReportBundle):
    if config.synth is not None:
        sample, truth = generate(config.synth)
        input_dir = os.path.join(config.out_dir, "input")
        paths = write_sample_csv(sample, input_dir)
        truth.save(os.path.join(input_dir, "ground_truth.json"))
        bundle.files += [os.path.relpath(p, config.out_dir)
                         for p in paths.values()]
        bundle.files.append(os.path.join("input", "ground_truth.json"))
        return sample, paths
    sample = parse_sample(config.edges_path, config.firm_attrs_path,
                          config.bank_attrs_path)
    paths = {"edges": config.edges_path, "firms": config.firm_attrs_path,
             "banks": config.bank_attrs_path}
    return sample, paths


def _emit(bundle: ReportBundle, relpath: str, writer) -> None:
    path = os.path.join(bundle.out_dir, relpath)
    writer(path)
    bundle.files.append(relpath)


def _null_model(name: str, sample: Sample):
    if name == "network":
        return fitness_spec_from_sample(sample, Variant.NETWORK_DRIVEN)
    if name == "balance":
        return fitness_spec_from_sample(sample, Variant.BALANCE_DRIVEN)
    if name == "bicm":
        return bicm_from_network(sample.network)
    return random_baseline(sample.network)


def run(config: RunConfig) -> ReportBundle:
    """Execute the full pipeline; grid-cell failures do not abort the run."""
    os.makedirs(config.out_dir, exist_ok=True)
    bundle = ReportBundle(out_dir=config.out_dir)

    sample, input_paths = _load_sample(config, bundle)
    filtered, filter_report = apply_consistency_filter(sample)
    _emit(bundle, "filter_report.json",
          lambda p: report.write_json(p, filter_report.to_json()))

    net = filtered.network
    stats = summarize(net)
    _emit(bundle, "summary_stats.json",
          lambda p: report.write_json(p, stats.to_json()))

    k, h = derived_degrees(net)
    for label, values in (("firm_degrees", k), ("bank_degrees", h)):
        curve = ccdf(values)
        _emit(bundle, f"ccdf_{label}.csv",
              lambda p, c=curve: report.write_csv(
                  p, ["value", "survival"], zip(c.values, c.survival)))
        _emit(bundle, f"ccdf_{label}.svg",
              lambda p, c=curve, lab=label: report.write_text(
                  p, report.svg_scatter(
                      c.values, c.survival, title=f"CCDF of {lab}",
                      xlabel="value", ylabel="P(X >= x)",
                      log=bool(np.all(c.values > 0)))))

    # null models and ensembles
    null_specs: dict[str, object] = {}
    for name in config.null_variants:
        spec = _null_model(name, filtered)
        null_specs[name] = spec
        ensemble = sample_ensemble(spec, config.n_samples, config.seed)
        expected = nullmodel.expected_metrics(spec)
        summary = {
            "spec": spec.to_json(),
            "seed": config.seed,
            "n_samples": config.n_samples,
            "expected_firm_degrees": expected.firm_degrees,
            "expected_bank_degrees": expected.bank_degrees,
            "expected_firm_strengths": expected.firm_strengths,
            "expected_bank_strengths": expected.bank_strengths,
            "ensemble": ensemble.to_json(),
        }
        _emit(bundle, f"nullmodel_{name}.json",
              lambda p, s=summary: report.write_json(p, s))
        for side, emp, model_mean in (
                ("firms", k, ensemble.mean_firm_degrees),
                ("banks", h, ensemble.mean_bank_degrees)):
            try:
                cmp_stats = compare(emp, model_mean, n_bins=config.n_bins)
            except netstats.StatsError:
                continue
            rows = zip(cmp_stats.bin_edges[:-1], cmp_stats.bin_edges[1:],
                       cmp_stats.binned_means, cmp_stats.binned_stds,
                       cmp_stats.binned_p05, cmp_stats.binned_p95)
            _emit(bundle, f"comparison_{name}_{side}.csv",
                  lambda p, r=list(rows), cs=cmp_stats: report.write_csv(
                      p, ["bin_lo", "bin_hi", "mean", "std", "p05", "p95"], r))
            _emit(bundle, f"comparison_{name}_{side}.json",
                  lambda p, cs=cmp_stats: report.write_json(
                      p, {"pearson": cs.pearson, "spearman": cs.spearman}))
            _emit(bundle, f"comparison_{name}_{side}.svg",
                  lambda p, e=emp, mm=model_mean, n=name, sd=side:
                      report.write_text(p, report.svg_scatter(
                          e, mm, title=f"empirical vs {n} model ({sd})",
                          xlabel="empirical degree",
                          ylabel="expected degree", identity=True)))

    degree_nulls = {}
    if "network" in null_specs:
        degree_nulls[econ.DegreeSource.NULL_NET] = null_specs["network"]
    if "balance" in null_specs:
        degree_nulls[econ.DegreeSource.NULL_BAL] = null_specs["balance"]

    # regression grid
    grid = config.grid if config.grid is not None else default_grid()
    fits: dict[str, tuple[econ.FitResult, econ.DesignMatrix]] = {}
    for spec in grid:
        cell = spec.name()
        try:
            design = econ.build_design(filtered, spec, degree_nulls)
            if spec.stage is econ.Stage.LINK_FORMATION:
                fit = econ.fit_logit(design)
            elif spec.fixed_effects is econ.FixedEffects.BANK_DUMMIES:
                fit = econ.fit_ols_fixed_effects(design)
            else:
                fit = econ.fit_ols(design)
        except Exception as exc:  # recorded, never fatal for other cells
            bundle.failures[cell] = f"{type(exc).__name__}: {exc}"
            continue
        fits[cell] = (fit, design)
        _emit(bundle, os.path.join("regress", f"{cell}.json"),
              lambda p, f=fit: report.write_json(p, f.to_json()))
        _emit(bundle, os.path.join("regress", f"{cell}.txt"),
              lambda p, f=fit, c=cell: report.write_text(
                  p, f.format_table(title=c)))

    # diagnostics on the full loan-sizing model
    full_ols = "loan_sizing_m3_a"
    if full_ols in fits:
        fit, design = fits[full_ols]
        try:
            vif_values = econ.vif(design)
            _emit(bundle, "vif.json",
                  lambda p: report.write_json(p, vif_values))
        except econ.EconError as exc:
            bundle.failures["vif"] = f"{type(exc).__name__}: {exc}"
        diag = residual_diagnostics(fit, design)
        _emit(bundle, "residual_diagnostics.json",
              lambda p: report.write_json(p, diag))
        _emit(bundle, "residual_hist.csv",
              lambda p: report.write_csv(
                  p, ["bin_lo", "bin_hi", "count"],
                  zip(diag["histogram"]["edges"][:-1],
                      diag["histogram"]["edges"][1:],
                      diag["histogram"]["counts"])))
        _emit(bundle, "residual_hist.svg",
              lambda p: report.write_text(p, report.svg_histogram(
                  diag["histogram"]["counts"], diag["histogram"]["edges"],
                  title="loan-sizing residuals", xlabel="residual")))
        for col, data in diag["scatters"].items():
            _emit(bundle, f"residual_vs_{col}.csv",
                  lambda p, d=data: report.write_csv(
                      p, ["x", "residual"], zip(d["x"], d["residuals"])))

    manifest = {
        "config": config.to_json(),
        "config_hash": report.sha256_text(report.canonical_json(config.to_json())),
        "seed": config.seed,
        "inputs": {name: report.sha256_file(path)
                   for name, path in sorted(input_paths.items())},
        "failures": dict(sorted(bundle.failures.items())),
        "outputs": {rel: report.sha256_file(os.path.join(config.out_dir, rel))
                    for rel in sorted(bundle.files)},
    }
    report.write_json(os.path.join(config.out_dir, "manifest.json"), manifest)
    bundle.files.append("manifest.json")
    return bundle


def load_config_file(path: str, out_dir: str | None = None) -> RunConfig:
    """Parse the flat key=value run configuration format."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{line_no}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()

    synth = None
    if "synth_firms" in values:
        synth = GenConfig(
            n_firms=int(values.get("synth_firms", 60)),
            n_banks=int(values.get("synth_banks", 20)),
            seed=int(values.get("synth_seed", 0)),
            target_density=float(values.get("synth_density", 0.12)),
            attachment_boost=float(values.get("synth_attachment_boost", 0.0)),
            fragmentation_penalty=float(
                values.get("synth_fragmentation_penalty", 0.0)),
            noise_sd=float(values.get("synth_noise_sd", 0.1)),
            balance_noise=float(values.get("synth_balance_noise", 0.05)),
        )
    variants = tuple(v.strip() for v in
                     values.get("variants", "network,balance").split(",") if v.strip())
    return RunConfig(
        out_dir=out_dir or values.get("out", "out"),
        edges_path=values.get("edges"),
        firm_attrs_path=values.get("firms"),
        bank_attrs_path=values.get("banks"),
        synth=synth,
        null_variants=variants,
        n_samples=int(values.get("samples", 10_000)),
        seed=int(values.get("seed", 42)),
        n_bins=int(values.get("bins", 10)),
    )
