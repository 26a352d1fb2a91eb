"""Acceptance criteria, one test each.

Every test prints a single ``[ACCEPT n] PASS|FAIL`` line to the terminal
(even under output capture) before asserting, so ``pytest -v`` output doubles
as the acceptance report.
"""

import math
import time

import numpy as np
import pytest

from scenval.autocorr import acf, acf_rows, best_match_by_acf
from scenval.cli import main
from scenval.density import kde_pdf
from scenval.ingest import affine_rescale, save_scenario_csv
from scenval.mfdfa import (MfdfaConfig, fluctuation_function, hurst_fit, log_spaced_scales,
                           mfdfa_report)
from scenval.scenario import TimeSeries, concatenate
from scenval.spectral import periodogram, psd_report, welch_psd
from scenval.synthetic import GeneratorSpec, as_scenario_set, generate

from conftest import ar1_set

pytestmark = pytest.mark.acceptance


def _verdict(capsys, n, title, checks):
    """Print one pass/fail line, then assert every named check."""
    ok = all(v for _, v in checks)
    failed = ", ".join(name for name, v in checks if not v)
    with capsys.disabled():
        print(f"\n[ACCEPT {n:2d}] {'PASS' if ok else 'FAIL'} {title}"
              + (f" (failed: {failed})" if failed else ""))
    for name, v in checks:
        assert v, name


def _q_monotone(surface, rtol=1e-9):
    order = np.argsort(surface.q_values)
    F = surface.F[order]
    return bool(np.all(F[1:] >= F[:-1] * (1 - rtol)))


def test_01_kde_normalization(capsys):
    rng = np.random.default_rng(1)
    draws = [rng.normal, rng.exponential, rng.standard_t, rng.uniform]
    t0 = time.perf_counter()
    integrals = []
    for i in range(50):
        n = int(rng.integers(10, 10_001))
        f = draws[i % 4]
        x = f(3, size=n) if i % 4 == 2 else f(size=n)
        integrals.append(kde_pdf(x).integral())
    elapsed = time.perf_counter() - t0
    integrals = np.array(integrals)
    _verdict(capsys, 1, f"KDE integral in [{integrals.min():.5f}, {integrals.max():.5f}], "
             f"{elapsed:.2f} s", [
                 ("integral >= 0.99", integrals.min() >= 0.99),
                 ("integral <= 1.01", integrals.max() <= 1.01),
                 ("runtime < 10 s", elapsed < 10)])


def test_02_kde_accuracy(capsys):
    x = generate(GeneratorSpec("white_gaussian", 10_000, 2024)).values
    grid = np.linspace(-3, 3, 601)
    truth = np.exp(-0.5 * grid ** 2) / math.sqrt(2 * math.pi)
    err = float(np.max(np.abs(kde_pdf(x, grid=grid).density - truth)))
    _verdict(capsys, 2, f"KDE max abs error {err:.4f} on [-3, 3]",
             [("max error <= 0.02", err <= 0.02)])


def test_03_acf_exactness_and_ar1_oracle(capsys):
    rng = np.random.default_rng(3)
    r0 = []
    for _ in range(100):
        T = int(rng.integers(2, 500))
        x = rng.normal(rng.uniform(-1e3, 1e3), 10 ** rng.uniform(-3, 3), T)
        r0.append(acf(x).values[0])
    x = generate(GeneratorSpec("ar1", 100_000, 8, {"phi": 0.8})).values
    r = acf(x, max_lag=10).values
    err = float(np.max(np.abs(r - 0.8 ** np.arange(11))))
    _verdict(capsys, 3, f"R(0)==1 for 100 scenarios; AR(1) max error {err:.4f}", [
        ("R(0) == 1 exactly", all(v == 1.0 for v in r0)),
        ("AR(1) error <= 0.02", err <= 0.02)])


def test_04_best_match_self_identification(capsys):
    s = ar1_set(500, seed=4, phi=0.7)
    hits = [best_match_by_acf(s.values[i], s, reference_index=i) for i in range(s.n_scenarios)]
    own = sum(m.best_candidate_index == i for i, m in enumerate(hits))
    zero = sum(m.mse == 0.0 for m in hits)
    _verdict(capsys, 4, f"self-match {own}/500 own index, {zero}/500 MSE 0", [
        ("own index returned", own == 500), ("MSE == 0", zero == 500)])


def test_05_psd_peak_and_parseval(capsys):
    dt = 0.25
    ts = generate(GeneratorSpec("sine", 4096, params={"period_steps": 6 / dt}, dt=dt))
    w = welch_psd(ts, segment_len=192)
    peak = w.frequencies[np.argmax(w.psd)]
    var = float(np.var(ts.values))
    welch_rel = abs(w.total_power() - var) / var
    pgram_rel = abs(periodogram(ts).total_power() - var) / var
    _verdict(capsys, 5, f"peak {peak:.4f}/h (df {w.df:.4f}), Parseval welch {welch_rel:.2e} "
             f"periodogram {pgram_rel:.2e}", [
                 ("peak within one bin", abs(peak - 1 / 6) <= w.df),
                 ("welch Parseval within 5%", welch_rel <= 0.05),
                 ("periodogram Parseval within 2%", pgram_rel <= 0.02)])


def test_06_psd_flag_rule(capsys):
    rep = psd_report(ar1_set(30, seed=6), ar1_set(30, seed=7, phi=0.5))
    exact, min_period = True, np.inf
    for sp in (rep.reference, rep.candidate):
        exact &= bool(np.array_equal(sp.flagged, sp.periods > 12.0))
        min_period = min(min_period, float(sp.periods.min()))
    n_flag = int(rep.reference.flagged.sum())
    _verdict(capsys, 6, f"{n_flag} bins flagged (period > 12 h), min period {min_period} h", [
        ("flagged iff period > 12 h", exact and n_flag > 0),
        ("bound is 12 h", rep.flag_bound == 12.0),
        ("no period below 0.5 h", min_period >= 0.5)])


def test_07_mfdfa_hurst_oracles(capsys):
    n = 2 ** 14
    cfg = MfdfaConfig(q_values=(2, 4, 10))
    t0 = time.perf_counter()
    white = hurst_fit(fluctuation_function(generate(GeneratorSpec("white_gaussian", n, 70)), cfg))
    walk = hurst_fit(fluctuation_function(generate(GeneratorSpec("random_walk", n, 71)), cfg))
    elapsed = time.perf_counter() - t0
    spread = float(np.ptp(white.hurst))
    _verdict(capsys, 7, f"h2 white {white.h(2):.3f}, walk {walk.h(2):.3f}, "
             f"white spread {spread:.3f}, {elapsed:.1f} s", [
                 ("white h(2) = 0.5 +- 0.1", abs(white.h(2) - 0.5) <= 0.1),
                 ("walk h(2) = 1.5 +- 0.1", abs(walk.h(2) - 1.5) <= 0.1),
                 ("white spread <= 0.15", spread <= 0.15),
                 ("q-monotone", _q_monotone(white) and _q_monotone(walk)),
                 ("runtime < 60 s", elapsed < 60)])


def test_08_mfdfa_structural_rules(capsys):
    dt = 0.25
    src = GeneratorSpec("ar1", 30 * 96, 5, {"phi": 0.95, "sigma": 0.01}, dt)
    ref = as_scenario_set(generate(src), 96)[0]
    quant = as_scenario_set(generate(GeneratorSpec("quantized_copy", src.n, params={
        "decimals": 2, "source": src}, dt=dt)), 96)[0]
    rep = mfdfa_report(ref, quant)
    s = rep.reference.s_values
    j = int(np.flatnonzero(~rep.reference.flagged_s)[0])
    ratio = rep.candidate.fq(-10)[j] / rep.reference.fq(-10)[j]
    clamped = int(rep.candidate.clamped[0, j])
    others = [fluctuation_function(generate(GeneratorSpec("white_gaussian", 4096, 80))),
              fluctuation_function(concatenate(ar1_set(50, seed=81, phi=0.9)))]
    monotone = all(_q_monotone(f) for f in (rep.reference, rep.candidate, *others))
    _verdict(capsys, 8, f"F_-10 ratio {ratio:.3g} at s={s[j]}, {clamped} clamped segments", [
        ("q-monotone", monotone),
        ("flagged iff s >= 48", bool(np.array_equal(rep.reference.flagged_s, s >= 48))),
        ("drop-off ratio <= 0.5", ratio <= 0.5),
        ("clamped_segments > 0", clamped > 0)])


def test_09_end_to_end_determinism(tmp_path, capsys):
    ref = as_scenario_set(generate(GeneratorSpec("ar1", 365 * 96, 90, {
        "phi": 0.9, "offset": 5.0}, 0.25)), 96, "reference")[0]
    cand = as_scenario_set(generate(GeneratorSpec("quantized_copy", 365 * 96, params={
        "decimals": 2, "source": GeneratorSpec("ar1", 365 * 96, 91, {
            "phi": 0.8, "sigma": 1.2, "offset": 5.0}, 0.25)}, dt=0.25)), 96, "candidate")[0]
    save_scenario_csv(ref, tmp_path / "ref.csv")
    save_scenario_csv(cand, tmp_path / "cand.csv")
    payloads, codes, times = [], [], []
    for run in ("a", "b"):
        t0 = time.perf_counter()
        codes.append(main(["validate", "--reference", str(tmp_path / "ref.csv"),
                           "--candidate", str(tmp_path / "cand.csv"), "--dt-hours", "0.25",
                           "--seed", "9", "--out", str(tmp_path / run)]))
        times.append(time.perf_counter() - t0)
        payloads.append({p.name: p.read_bytes() for p in sorted((tmp_path / run).glob("*.csv"))})
    stems = {name.rsplit("_", 1)[0] for name in payloads[0]}
    _verdict(capsys, 9, f"exit codes {codes}, {len(payloads[0])} CSVs, "
             f"runs {times[0]:.1f} s / {times[1]:.1f} s", [
                 ("exit 0", codes == [0, 0]),
                 ("all four validators", {"pdf_full", "pdf_marginal", "acf", "psd",
                                          "mfdfa"} <= stems),
                 ("byte-identical CSVs", payloads[0] == payloads[1]),
                 ("each run < 60 s", max(times) < 60)])


def _allclose(a, b, rtol, atol=0.0):
    return bool(np.allclose(a, b, rtol=rtol, atol=atol))


def test_10_invariance_suite(capsys):
    cfg = MfdfaConfig(s_values=log_spaced_scales(3, 96, 12))
    checks = {k: True for k in ("psd a^2", "psd mean", "mfdfa |a|", "mfdfa mean",
                                "acf mean", "affine round trip")}
    for seed in range(10):
        rng = np.random.default_rng(100 + seed)
        s = ar1_set(12, seed=200 + seed, phi=rng.uniform(-0.9, 0.9))
        a = rng.choice([-1, 1]) * 10 ** rng.uniform(-2, 2)
        c = rng.uniform(-50, 50)
        x = TimeSeries(s.values.ravel(), s.dt, s.scenario_len)
        ax = TimeSeries(a * x.values, s.dt, s.scenario_len)
        xc = TimeSeries(x.values + c, s.dt, s.scenario_len)

        p, pa, pc = (welch_psd(t) for t in (x, ax, xc))
        checks["psd a^2"] &= _allclose(pa.psd, a * a * p.psd, 1e-9)
        checks["psd mean"] &= _allclose(pc.psd, p.psd, 1e-9, 1e-9 * p.psd.max())

        f, fa, fc = (fluctuation_function(t, cfg) for t in (x, ax, xc))
        checks["mfdfa |a|"] &= _allclose(fa.F, abs(a) * f.F, 1e-9)
        checks["mfdfa mean"] &= _allclose(fc.F, f.F, 1e-9)

        r, _ = acf_rows(s.values)
        rc, _ = acf_rows(s.values + c)
        checks["acf mean"] &= _allclose(rc, r, 0, 1e-9)

        scaled, params = affine_rescale(s.with_values(a * s.values + c))
        back = params.inverse(scaled.values)
        checks["affine round trip"] &= _allclose(back, a * s.values + c, 1e-12,
                                                 1e-12 * np.abs(back).max())
    _verdict(capsys, 10, "invariance suite on 10 seeded inputs each", list(checks.items()))
