"""One-sided power spectral density of concatenated scenario sets.

Both estimators return a density in ``signal**2 * h`` over frequencies in
``1/h`` and are normalised so that ``sum(psd) * df`` equals the variance of
the (mean-removed) input.  The DC bin is never reported.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DataError, DegenerateError
from .scenario import ScenarioSet, TimeSeries, concatenate

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Spectrum:
    frequencies: np.ndarray
    psd: np.ndarray
    dt: float
    method: str
    flagged: np.ndarray | None = None
    segment_len: int | None = None
    overlap_fraction: float | None = None
    window: str | None = None
    n_segments: int = 1
    single_segment_fallback: bool = False

    def __post_init__(self):
        if self.flagged is None:
            object.__setattr__(self, "flagged", np.zeros(self.frequencies.size, dtype=bool))

    @property
    def periods(self) -> np.ndarray:
        return 1.0 / self.frequencies

    @property
    def df(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0]) if self.frequencies.size > 1 \
            else float(self.frequencies[0])

    def total_power(self) -> float:
        return float(np.sum(self.psd) * self.df)

    def restrict(self, min_period: float, max_period: float) -> "Spectrum":
        """Keep only bins whose period lies in ``[min_period, max_period]``."""
        p = self.periods
        tol = 1e-9 * max_period
        keep = (p >= min_period - tol) & (p <= max_period + tol)
        return replace(self, frequencies=self.frequencies[keep], psd=self.psd[keep],
                       flagged=self.flagged[keep])


def _one_sided(power, seg_len):
    """Fold a two-sided |FFT|^2 (rfft bins 0..seg_len//2) onto positive frequencies."""
    out = power[..., 1:].copy()
    if seg_len % 2 == 0:
        out[..., :-1] *= 2.0  # Nyquist bin has no mirror
    else:
        out *= 2.0
    return out


def _series(ts):
    x = np.asarray(ts.values, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DataError("series contains non-finite values")
    if np.ptp(x) == 0:
        raise DegenerateError("spectrum of a constant series is undefined")
    return x


def periodogram(ts: TimeSeries) -> Spectrum:
    x = _series(ts)
    n = x.size
    if n < 4:
        raise DataError("periodogram needs at least 4 samples")
    d = x - x.mean()
    power = np.abs(np.fft.rfft(d)) ** 2 * (ts.dt / n)
    freqs = np.fft.rfftfreq(n, ts.dt)[1:]
    return Spectrum(freqs, _one_sided(power, n), ts.dt, "periodogram")


_WINDOWS = {
    "hann": lambda n: 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n),
    "boxcar": np.ones,
    "rectangular": np.ones,
}


def welch_psd(ts: TimeSeries, segment_len: int | None = None,
              overlap_fraction: float = 0.5, window: str = "hann") -> Spectrum:
    """Average of windowed, mean-removed segment periodograms.

    Parameters
    ----------
    segment_len : int, optional
        Defaults to twice the scenario length (or the whole series when the
        input has no scenario structure).
    overlap_fraction : float
        Fraction of a segment shared with the next one, in ``[0, 1)``.
    window : {"hann", "boxcar"}
        Periodic Hann or rectangular taper.  The density is divided by the
        window power ``sum(w**2)`` so the Parseval contract holds.

    When only one segment fits, the result is that segment's periodogram
    and ``single_segment_fallback`` is set.
    """
    x = _series(ts)
    n = x.size
    if segment_len is None:
        segment_len = 2 * ts.scenario_len if ts.scenario_len else n
        segment_len = min(segment_len, n)
    segment_len = int(segment_len)
    if segment_len < 4:
        raise ConfigError("segment_len must be at least 4")
    if segment_len > n:
        raise ConfigError(f"segment_len {segment_len} exceeds series length {n}")
    if not 0 <= overlap_fraction < 1:
        raise ConfigError("overlap_fraction must lie in [0, 1)")
    if window not in _WINDOWS:
        raise ConfigError(f"unknown window {window!r}; choose from {sorted(_WINDOWS)}")

    step = max(1, segment_len - int(round(overlap_fraction * segment_len)))
    starts = np.arange(0, n - segment_len + 1, step)
    w = _WINDOWS[window](segment_len)
    segs = np.lib.stride_tricks.sliding_window_view(x, segment_len)[starts]
    segs = segs - segs.mean(axis=1, keepdims=True)
    power = np.abs(np.fft.rfft(segs * w, axis=1)) ** 2 * (ts.dt / np.sum(w * w))
    # fixed-order mean keeps results reproducible
    psd = _one_sided(power, segment_len).mean(axis=0)
    fallback = starts.size < 2
    if fallback:
        logger.warning("only one Welch segment fits; returning a single-segment periodogram")
    freqs = np.fft.rfftfreq(segment_len, ts.dt)[1:]
    return Spectrum(freqs, psd, ts.dt, "welch", segment_len=segment_len,
                    overlap_fraction=float(overlap_fraction), window=window,
                    n_segments=int(starts.size), single_segment_fallback=bool(fallback))


def validity_bound(scenario_len: int, dt: float) -> float:
    """Longest period (h) not flagged: half the scenario duration."""
    return scenario_len * dt / 2.0


def flag_periods(spec: Spectrum, scenario_len: int, dt: float | None = None) -> Spectrum:
    """Flag bins whose period exceeds half the scenario duration.

    Periods that long mostly describe how scenarios were joined rather than
    the scenarios themselves.  ``scenario_len == 0`` flags nothing.
    """
    dt = spec.dt if dt is None else dt
    if scenario_len == 0:
        flagged = np.zeros(spec.frequencies.size, dtype=bool)
    else:
        if scenario_len < 2:
            raise ConfigError("scenario_len must be 0 or >= 2")
        flagged = spec.periods > validity_bound(scenario_len, dt)
    return replace(spec, flagged=flagged)


@dataclass(frozen=True, eq=False)
class PsdComparison:
    """Welch spectra of both sets on a shared frequency grid.

    ``valid_range`` is ``(2*dt, T*dt)``: from the Nyquist period up to the
    scenario duration.  The spectra themselves extend to the segment length
    so longer, flagged periods remain visible.
    """

    reference: Spectrum
    candidate: Spectrum
    valid_range: tuple
    flag_bound: float

    def restricted(self):
        lo, hi = self.valid_range
        return self.reference.restrict(lo, hi), self.candidate.restrict(lo, hi)


def psd_report(reference: ScenarioSet, candidate: ScenarioSet, segment_len: int | None = None,
               overlap_fraction: float = 0.5, window: str = "hann") -> PsdComparison:
    if reference.dt != candidate.dt:
        raise DataError(f"sampling intervals differ: {reference.dt} vs {candidate.dt}")
    if reference.scenario_len != candidate.scenario_len:
        raise DataError("reference and candidate scenarios differ in length")
    T, dt = reference.scenario_len, reference.dt
    series = [concatenate(reference), concatenate(candidate)]
    if segment_len is None:
        # one segment length for both sets keeps the bins comparable
        segment_len = min(2 * T, *(len(ts) for ts in series))
    out = [flag_periods(welch_psd(ts, segment_len, overlap_fraction, window), T, dt)
           for ts in series]
    return PsdComparison(out[0], out[1], (2.0 * dt, T * dt), validity_bound(T, dt))
