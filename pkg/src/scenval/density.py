"""Gaussian kernel density estimates of full and marginal (daily-mean) PDFs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import ConfigError, DegenerateError
from .scenario import SampleCollection, ScenarioSet, daily_means, flatten_timesteps

DEFAULT_GRID_POINTS = 512
GRID_PAD_BANDWIDTHS = 3.0
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    n_samples: int
    kernel: str = "gaussian"

    def integral(self) -> float:
        return float(trapezoid(self.density, self.grid))

    def log_density(self, floor: float = 1e-12) -> np.ndarray:
        return log_density(self, floor)


def _values(samples):
    if isinstance(samples, SampleCollection):
        return samples.values
    return SampleCollection(samples).values


def default_bandwidth(samples) -> float:
    """Scott's rule, ``h = sigma * N**(-1/5)`` with the sample (ddof=1) std."""
    x = _values(samples)
    if x.size < 2:
        raise DegenerateError("bandwidth rule needs at least two samples")
    sigma = float(np.std(x, ddof=1))
    if not sigma > 0:
        raise DegenerateError("all samples are identical; bandwidth is undefined")
    return sigma * x.size ** -0.2


def default_grid(samples, bandwidth: float, n_points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    x = _values(samples)
    pad = GRID_PAD_BANDWIDTHS * bandwidth
    return np.linspace(x.min() - pad, x.max() + pad, n_points)


def _gaussian_sum(x, grid, h, chunk=1 << 22):
    out = np.empty(grid.size)
    step = max(1, chunk // max(x.size, 1))
    for i in range(0, grid.size, step):
        g = grid[i:i + step, None]
        out[i:i + step] = np.exp(-0.5 * ((g - x[None, :]) / h) ** 2).sum(axis=1)
    return out


def kde_pdf(samples, bandwidth: float | None = None, grid=None,
            n_points: int = DEFAULT_GRID_POINTS) -> DensityEstimate:
    """Evaluate a Gaussian KDE.

    Parameters
    ----------
    samples : SampleCollection or array_like
    bandwidth : float, optional
        Kernel standard deviation. Defaults to :func:`default_bandwidth`.
    grid : array_like, optional
        Strictly ascending evaluation points. Defaults to ``n_points``
        equispaced points covering ``[min - 3h, max + 3h]``.
    """
    x = _values(samples)
    if bandwidth is None:
        if x.size >= 2 and np.ptp(x) == 0:
            raise DegenerateError("all samples are identical; bandwidth is undefined")
        bandwidth = default_bandwidth(x)
    elif not (np.isfinite(bandwidth) and bandwidth > 0):
        raise ConfigError(f"bandwidth must be positive, got {bandwidth!r}")
    h = float(bandwidth)
    if grid is None:
        grid = default_grid(x, h, n_points)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ConfigError("evaluation grid must be strictly ascending with >= 2 points")
    density = _gaussian_sum(x, grid, h) * (_INV_SQRT_2PI / (h * x.size))
    return DensityEstimate(grid, density, h, int(x.size))


def log_density(est: DensityEstimate, floor: float = 1e-12) -> np.ndarray:
    return np.log10(np.maximum(est.density, floor))


@dataclass(frozen=True, eq=False)
class PdfComparison:
    """Full and marginal estimates for a reference and a candidate set.

    Within each pair (full, marginal) both curves share one grid.
    """

    reference_full: DensityEstimate
    candidate_full: DensityEstimate
    reference_marginal: DensityEstimate
    candidate_marginal: DensityEstimate


def _paired(ref: SampleCollection, cand: SampleCollection, n_points):
    h_ref = default_bandwidth(ref)
    h_cand = default_bandwidth(cand)
    lo = min(ref.values.min() - GRID_PAD_BANDWIDTHS * h_ref,
             cand.values.min() - GRID_PAD_BANDWIDTHS * h_cand)
    hi = max(ref.values.max() + GRID_PAD_BANDWIDTHS * h_ref,
             cand.values.max() + GRID_PAD_BANDWIDTHS * h_cand)
    grid = np.linspace(lo, hi, n_points)
    return kde_pdf(ref, h_ref, grid), kde_pdf(cand, h_cand, grid)


def pdf_report(reference: ScenarioSet, candidate: ScenarioSet,
               n_points: int = DEFAULT_GRID_POINTS) -> PdfComparison:
    rf, cf = _paired(flatten_timesteps(reference), flatten_timesteps(candidate), n_points)
    rm, cm = _paired(daily_means(reference), daily_means(candidate), n_points)
    return PdfComparison(rf, cf, rm, cm)
