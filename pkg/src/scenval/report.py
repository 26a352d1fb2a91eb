"""Run the validators on a reference/candidate pair and write the results.

Output directory layout::

    summary.json            scalars, warnings, provenance, file manifest
    config.json             the resolved configuration (re-runnable)
    pdf_{full,marginal}_{reference,candidate}.csv
    acf_{reference,candidate}.csv
    psd_{reference,candidate}.csv
    mfdfa_{reference,candidate}.csv
    *.svg                   plots, unless disabled
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .autocorr import acf_panel
from .density import pdf_report
from .errors import ConfigError, DataError, ScenvalError
from .ingest import CleaningPolicy, clean_scenarios, load_scenario_csv
from .mfdfa import MfdfaConfig, mfdfa_report
from .plots import emit_plot_files
from .spectral import psd_report

logger = logging.getLogger(__name__)

VALIDATORS = ("pdf", "acf", "psd", "mfdfa")


class ValidatorError(ScenvalError):
    """A validator failed; ``validator`` names it and ``__cause__`` holds the reason."""

    def __init__(self, validator, cause):
        super().__init__(f"{validator} validator failed: {cause}")
        self.validator = validator
        self.cause = cause


@dataclass
class ValidationConfig:
    reference_csv: str
    candidate_csv: str
    dt_hours: float = 0.25
    validators: tuple = VALIDATORS
    output_dir: str = "scenval-out"
    seed: int = 0
    emit_plots: bool = True
    cleaning: dict = field(default_factory=lambda: {
        "drop_if_missing": True, "plausible_min": None, "plausible_max": None})
    pdf: dict = field(default_factory=lambda: {"n_points": 512, "log_floor": 1e-12})
    acf: dict = field(default_factory=lambda: {"n_examples": 4, "max_lag": None})
    psd: dict = field(default_factory=lambda: {
        "segment_len": None, "overlap_fraction": 0.5, "window": "hann"})
    mfdfa: dict = field(default_factory=lambda: {
        "q_values": [2, 4, 10, -2, -4, -10], "order": 1, "s_values": None, "s_max": None,
        "mode": "sliding", "variance_floor": 1e-30, "s_fit_range": None})

    def __post_init__(self):
        self.validators = tuple(self.validators)
        if not self.validators:
            raise ConfigError("select at least one validator")
        unknown = set(self.validators) - set(VALIDATORS)
        if unknown:
            raise ConfigError(f"unknown validator(s): {sorted(unknown)}")
        # always run in the fixed order
        self.validators = tuple(v for v in VALIDATORS if v in self.validators)
        if not (isinstance(self.dt_hours, (int, float)) and self.dt_hours > 0):
            raise ConfigError(f"dt_hours must be positive, got {self.dt_hours!r}")
        self.dt_hours = float(self.dt_hours)
        self.seed = int(self.seed)
        defaults = ValidationConfig.__dataclass_fields__
        for block in ("cleaning", "pdf", "acf", "psd", "mfdfa"):
            base = defaults[block].default_factory()
            extra = set(getattr(self, block)) - set(base)
            if extra:
                raise ConfigError(f"unknown key(s) in {block!r}: {sorted(extra)}")
            base.update(getattr(self, block))
            setattr(self, block, base)

    @classmethod
    def from_dict(cls, data: dict) -> "ValidationConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown configuration key(s): {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = asdict(self)
        d["validators"] = list(self.validators)
        return d

    def resolved(self) -> "ValidationConfig":
        """Copy with absolute paths, so the echo can be re-run from anywhere."""
        d = self.to_dict()
        for key in ("reference_csv", "candidate_csv", "output_dir"):
            d[key] = str(Path(d[key]).resolve())
        return ValidationConfig.from_dict(d)

    def mfdfa_config(self) -> MfdfaConfig:
        m = self.mfdfa
        return MfdfaConfig(
            q_values=tuple(m["q_values"]), order=m["order"],
            s_values=None if m["s_values"] is None else tuple(m["s_values"]),
            s_max=m["s_max"], mode=m["mode"], variance_floor=m["variance_floor"])


@dataclass
class Table:
    """A named numeric table, written as one CSV file."""

    name: str
    columns: dict

    def write(self, directory: Path) -> Path:
        path = directory / f"{self.name}.csv"
        names = list(self.columns)
        cols = [np.asarray(self.columns[k]) for k in names]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            for row in zip(*cols):
                w.writerow([_fmt(v) for v in row])
        return path


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


@dataclass
class ReportBundle:
    config: ValidationConfig
    provenance: dict
    results: dict = field(default_factory=dict)
    tables: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    comparisons: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    def warn(self, source: str, kind: str, message: str):
        entry = {"source": source, "kind": kind, "message": message}
        if entry not in self.warnings:
            self.warnings.append(entry)
            logger.info("%s: %s", source, message)

    def summary(self) -> dict:
        return {
            "provenance": self.provenance,
            "results": self.results,
            "warnings": self.warnings,
            "files": self.files,
        }


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _load(path, cfg: ValidationConfig, role: str, bundle: ReportBundle):
    raw = load_scenario_csv(path, cfg.dt_hours, label=role)
    policy = CleaningPolicy(**cfg.cleaning)
    clean, dropped = clean_scenarios(raw, policy)
    if dropped:
        bundle.warn("ingest", "dropped_scenarios",
                    f"{role}: dropped {dropped} of {raw.n_scenarios} scenarios")
    bundle.provenance["inputs"][role] = {
        "path": str(path), "sha256": _sha256(path),
        "n_scenarios": clean.n_scenarios, "scenario_len": clean.scenario_len,
        "dropped": dropped,
    }
    return clean


def _run_pdf(ref, cand, cfg, bundle):
    comp = pdf_report(ref, cand, n_points=int(cfg.pdf["n_points"]))
    floor = float(cfg.pdf["log_floor"])
    res = {}
    for kind in ("full", "marginal"):
        for role in ("reference", "candidate"):
            est = getattr(comp, f"{role}_{kind}")
            bundle.tables.append(Table(f"pdf_{kind}_{role}", {
                "x": est.grid, "density": est.density,
                "log10_density": est.log_density(floor)}))
            res[f"{kind}_{role}"] = {"bandwidth": est.bandwidth, "n_samples": est.n_samples,
                                     "integral": est.integral()}
    bundle.results["pdf"] = res
    return comp


def _run_acf(ref, cand, cfg, bundle):
    n = int(cfg.acf["n_examples"])
    if n > ref.n_scenarios:
        bundle.warn("acf", "n_examples_reduced",
                    f"n_examples reduced from {n} to {ref.n_scenarios} reference scenarios")
        n = ref.n_scenarios
    panel = acf_panel(ref, cand, n, cfg.acf["max_lag"], cfg.seed)
    skipped = panel.matches[0].skipped_degenerate if panel.matches else 0
    if skipped:
        bundle.warn("acf", "degenerate_skipped",
                    f"{skipped} constant candidate scenario(s) skipped in ACF matching")
    for role, k in (("reference", 0), ("candidate", 1)):
        ex, idx, lag, val = [], [], [], []
        for e, pair in enumerate(panel.pairs):
            c = pair[k]
            ex += [e] * c.lags.size
            idx += [c.scenario_index] * c.lags.size
            lag += c.lags.tolist()
            val += c.values.tolist()
        bundle.tables.append(Table(f"acf_{role}", {
            "example": np.array(ex, dtype=int), "scenario_index": np.array(idx, dtype=int),
            "lag": np.array(lag, dtype=int), "acf": np.array(val, dtype=float)}))
    bundle.results["acf"] = {
        "max_lag": panel.max_lag, "seed": panel.seed, "estimator": "biased (divisor T)",
        "mse_lags": f"0..{panel.max_lag}",
        "matches": [{"reference_index": m.reference_index,
                     "candidate_index": m.best_candidate_index, "mse": m.mse}
                    for m in panel.matches],
        "caveat": panel.caveat,
    }
    return panel


def _run_psd(ref, cand, cfg, bundle):
    p = cfg.psd
    comp = psd_report(ref, cand, p["segment_len"], float(p["overlap_fraction"]), p["window"])
    lo, hi = comp.valid_range
    res = {"valid_period_range_h": [lo, hi], "flag_period_above_h": comp.flag_bound}
    for role in ("reference", "candidate"):
        sp = getattr(comp, role)
        per = sp.periods
        in_range = (per >= lo - 1e-9 * hi) & (per <= hi + 1e-9 * hi)
        bundle.tables.append(Table(f"psd_{role}", {
            "frequency_per_h": sp.frequencies, "period_h": per, "psd": sp.psd,
            "flagged": sp.flagged, "in_valid_range": in_range}))
        if sp.single_segment_fallback:
            bundle.warn("psd", "single_segment",
                        f"{role}: only one Welch segment fits; spectrum is not averaged")
        res[role] = {"segment_len": sp.segment_len, "n_segments": sp.n_segments,
                     "overlap_fraction": sp.overlap_fraction, "window": sp.window,
                     "total_power": sp.total_power(), "flagged_bins": int(sp.flagged.sum())}
    n_flag = int(comp.reference.flagged.sum())
    if n_flag:
        bundle.warn("psd", "flag_zone",
                    f"{n_flag} bins with period > {comp.flag_bound:g} h may span "
                    "scenario junctions")
    bundle.results["psd"] = res
    return comp


def _run_mfdfa(ref, cand, cfg, bundle):
    mcfg = cfg.mfdfa_config()
    fit = cfg.mfdfa["s_fit_range"]
    comp = mfdfa_report(ref, cand, mcfg, None if fit is None else tuple(fit))
    res = {"q_values": list(mcfg.q_values), "order": mcfg.order, "mode": mcfg.mode}
    for role in ("reference", "candidate"):
        sf = getattr(comp, role)
        cols = {"s": sf.s_values, "flagged": sf.flagged_s, "n_segments": sf.n_segments,
                "clamped_segments": sf.clamped[0]}
        for i, q in enumerate(sf.q_values):
            cols[f"F_q{q:g}"] = sf.F[i]
        bundle.tables.append(Table(f"mfdfa_{role}", cols))
        clamps = int(sf.clamped[0].sum())
        if clamps:
            bundle.warn("mfdfa", "clamped_segments",
                        f"{role}: {clamps} segment variances raised to the floor "
                        f"{mcfg.variance_floor:g} (negative-q values are floor-dominated)")
        res[role] = {
            "hurst": {f"{q:g}": float(h) for q, h in zip(sf.q_values, sf.hurst)},
            "hurst_stderr": {f"{q:g}": float(e) for q, e in zip(sf.q_values, sf.hurst_stderr)},
            "fit_s_range": [int(sf.fit_s[0]), int(sf.fit_s[-1])],
            "clamped_segments": clamps,
        }
    if comp.reference.flagged_s.any():
        s0 = int(comp.reference.s_values[comp.reference.flagged_s][0])
        bundle.warn("mfdfa", "flag_zone",
                    f"segment lengths s >= {s0} (half a scenario) may span scenario "
                    "junctions and are excluded from the Hurst fit")
    bundle.results["mfdfa"] = res
    return comp


_RUNNERS = {"pdf": _run_pdf, "acf": _run_acf, "psd": _run_psd, "mfdfa": _run_mfdfa}


def build_bundle(cfg: ValidationConfig) -> ReportBundle:
    """Load the inputs and run the selected validators, without writing anything."""
    bundle = ReportBundle(cfg, {"tool": {"name": "scenval", "version": __version__},
                                "config": cfg.to_dict(), "inputs": {}})
    ref = _load(cfg.reference_csv, cfg, "reference", bundle)
    cand = _load(cfg.candidate_csv, cfg, "candidate", bundle)
    if ref.scenario_len != cand.scenario_len:
        raise DataError(
            f"scenario length mismatch: reference {ref.scenario_len}, "
            f"candidate {cand.scenario_len}")
    for name in cfg.validators:
        try:
            bundle.comparisons[name] = _RUNNERS[name](ref, cand, cfg, bundle)
        except ScenvalError as exc:
            raise ValidatorError(name, exc) from exc
    return bundle


def run_validation(cfg: ValidationConfig) -> ReportBundle:
    cfg = cfg.resolved()
    bundle = build_bundle(cfg)
    out = Path(cfg.output_dir)
    files = emit_plot_files(bundle, out, plots=cfg.emit_plots)
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    bundle.files = [str(Path(f).relative_to(out)) for f in files] + ["config.json",
                                                                      "summary.json"]
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(bundle.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return bundle
