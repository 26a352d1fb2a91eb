"""CSV and SVG output for a :class:`~scenval.report.ReportBundle`."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DataError

_FLAG_STYLE = {"color": "0.85", "zorder": 0, "lw": 0}


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "scenval"
    return plt


def _save(plt, fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _plot_pdf(plt, comp, out, log_floor):
    paths = []
    for kind in ("full", "marginal"):
        ref = getattr(comp, f"reference_{kind}")
        cand = getattr(comp, f"candidate_{kind}")
        fig, (lin, log) = plt.subplots(1, 2, figsize=(9, 3.5))
        for est, name in ((ref, "reference"), (cand, "candidate")):
            lin.plot(est.grid, est.density, label=name)
            log.plot(est.grid, est.log_density(log_floor), label=name)
        xlabel = "daily mean" if kind == "marginal" else "value"
        lin.set(xlabel=xlabel, ylabel="PDF", title=f"{kind} PDF (linear)")
        log.set(xlabel=xlabel, ylabel="log10 PDF", title=f"{kind} PDF (log)")
        lin.legend()
        paths.append(_save(plt, fig, out / f"pdf_{kind}.svg"))
    return paths


def _plot_acf(plt, panel, out):
    n = max(1, len(panel.pairs))
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3), squeeze=False)
    for ax, (r, c), m in zip(axes[0], panel.pairs, panel.matches):
        ax.plot(r.lags, r.values, label=f"reference #{r.scenario_index}")
        ax.plot(c.lags, c.values, "--", label=f"candidate #{c.scenario_index}")
        ax.set(xlabel="lag [steps]", title=f"MSE {m.mse:.2e}")
        ax.legend(fontsize="small")
    axes[0][0].set_ylabel("ACF")
    return [_save(plt, fig, out / "acf_panel.svg")]


def _plot_psd(plt, comp, out):
    fig, ax = plt.subplots(figsize=(6, 4))
    for sp, name in ((comp.reference, "reference"), (comp.candidate, "candidate")):
        ax.loglog(sp.periods, sp.psd, label=name)
    per = comp.reference.periods
    if comp.reference.flagged.any():
        ax.axvspan(comp.flag_bound, per.max(), label="may span scenarios", **_FLAG_STYLE)
    ax.set(xlabel="period [h]", ylabel="PSD", title="Welch PSD")
    ax.invert_xaxis()
    ax.legend()
    return [_save(plt, fig, out / "psd.svg")]


def _plot_mfdfa(plt, comp, out):
    paths = []
    ref, cand = comp.reference, comp.candidate
    for sign, name in ((1, "positive"), (-1, "negative")):
        qs = [q for q in ref.q_values if np.sign(q) == sign]
        if not qs:
            continue
        fig, ax = plt.subplots(figsize=(6, 4))
        for q in qs:
            line, = ax.loglog(ref.s_values, ref.fq(q), label=f"reference q={q:g}")
            ax.loglog(cand.s_values, cand.fq(q), "--", color=line.get_color(),
                      label=f"candidate q={q:g}")
        if ref.flagged_s.any():
            ax.axvspan(ref.s_values[ref.flagged_s][0], ref.s_values[-1], **_FLAG_STYLE)
        ax.set(xlabel="segment length s [steps]", ylabel="F_q(s)",
               title=f"MFDFA, {name} q")
        ax.legend(fontsize="small")
        paths.append(_save(plt, fig, out / f"mfdfa_{name}_q.svg"))
    return paths


def emit_plot_files(bundle, output_dir, plots: bool = True) -> list:
    """Write every numeric table as CSV and, if ``plots``, one SVG per panel.

    Returns the list of written paths (CSV first, in validator order).
    """
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create output directory {out}: {exc}") from exc
    files = [t.write(out) for t in bundle.tables]
    if not plots:
        return files
    plt = _figure()
    comps = bundle.comparisons
    if "pdf" in comps:
        files += _plot_pdf(plt, comps["pdf"], out, float(bundle.config.pdf["log_floor"]))
    if "acf" in comps:
        files += _plot_acf(plt, comps["acf"], out)
    if "psd" in comps:
        files += _plot_psd(plt, comps["psd"], out)
    if "mfdfa" in comps:
        files += _plot_mfdfa(plt, comps["mfdfa"], out)
    return files
