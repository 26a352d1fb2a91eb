"""Multifractal detrended fluctuation analysis (MFDFA).

Pipeline for one series ``x`` of length ``N``:

1. profile ``Y_i = sum_{k<=i} (x_k - mean(x))``
2. for every segment length ``s``, cut ``Y`` into segments (non-overlapping,
   or a window sliding one sample at a time), fit a polynomial of order
   ``m`` to each by least squares and keep the mean squared residual
   ``F2(v, s)``
3. ``F_q(s) = (mean_v F2(v, s)**(q/2))**(1/q)`` for each nonzero ``q``
4. ``h(q)`` is the slope of ``log2 F_q(s)`` against ``log2 s``.

Scenario sets are concatenated before the analysis.  Windows of at least
half a scenario are likely to straddle a junction between two scenarios,
so those segment lengths are flagged and left out of the Hurst fit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigError, DataError
from .scenario import ScenarioSet, TimeSeries, concatenate

DEFAULT_Q = (2.0, 4.0, 10.0, -2.0, -4.0, -10.0)
MODES = ("sliding", "nonoverlapping")

_EPS = np.finfo(float).eps
_CHUNK_ELEMENTS = 1 << 21


@dataclass(frozen=True, eq=False)
class Profile:
    values: np.ndarray
    source_len: int


def profile(ts) -> Profile:
    x = np.asarray(getattr(ts, "values", ts), dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DataError("profile needs a 1-d series with at least two samples")
    return Profile(np.cumsum(x - x.mean()), x.size)


@lru_cache(maxsize=1024)
def _basis(s: int, order: int) -> np.ndarray:
    """Orthonormal basis (s x (order+1)) of polynomials on abscissae 0..s-1."""
    t = np.arange(s, dtype=float)
    # scaling the abscissae only conditions the QR; the spanned space is the same
    u = (t - t.mean()) / s
    q, _ = np.linalg.qr(np.vander(u, order + 1, increasing=True))
    q.setflags(write=False)
    return q


def n_segments(n: int, s: int, mode: str) -> int:
    return n // s if mode == "nonoverlapping" else n - s + 1


def segment_variances(p, s: int, order: int = 1, mode: str = "sliding") -> np.ndarray:
    """Mean squared residual of an order-``order`` polynomial fit per segment.

    Residual variances that are indistinguishable from rounding noise
    (below ``(s * eps * max|segment|)**2``) are returned as exactly zero, so
    a profile that really is a polynomial of degree <= ``order`` gives 0.
    """
    y = np.asarray(getattr(p, "values", p), dtype=float)
    n = y.size
    s, order = int(s), int(order)
    if order < 1:
        raise ConfigError("detrending order must be >= 1")
    if s < order + 2:
        raise ConfigError(f"segment length {s} is below order + 2 = {order + 2}")
    if s > n:
        raise DataError(f"segment length {s} exceeds series length {n}")
    if mode == "sliding":
        windows = np.lib.stride_tricks.sliding_window_view(y, s)
    elif mode == "nonoverlapping":
        windows = y[: (n // s) * s].reshape(-1, s)
    else:
        raise ConfigError(f"unknown segmentation mode {mode!r}")

    basis = _basis(s, order)
    out = np.empty(windows.shape[0])
    rows = max(1, _CHUNK_ELEMENTS // s)
    for a in range(0, windows.shape[0], rows):
        w = windows[a:a + rows]
        noise = (s * _EPS * np.abs(w).max(axis=1)) ** 2
        w = w - w.mean(axis=1, keepdims=True)
        resid = w - (w @ basis) @ basis.T
        var = np.mean(resid * resid, axis=1)
        var[var <= noise] = 0.0
        out[a:a + rows] = var
    return out


@dataclass(frozen=True)
class MfdfaConfig:
    """Analysis settings.

    ``s_values=None`` means every integer from ``order + 2`` up to ``s_max``;
    ``s_max=None`` means the scenario length (or ``min(N // 4, 256)`` for a
    series without scenario structure).
    """

    q_values: tuple = DEFAULT_Q
    order: int = 1
    s_values: tuple | None = None
    s_max: int | None = None
    mode: str = "sliding"
    variance_floor: float = 1e-30

    def __post_init__(self):
        q = tuple(float(v) for v in self.q_values)
        if not q:
            raise ConfigError("at least one q value is required")
        if any(v == 0 or not np.isfinite(v) for v in q):
            raise ConfigError("q = 0 is not supported; use nonzero finite q values")
        object.__setattr__(self, "q_values", q)
        if int(self.order) < 1:
            raise ConfigError("detrending order must be >= 1")
        object.__setattr__(self, "order", int(self.order))
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.variance_floor > 0:
            raise ConfigError("variance_floor must be positive")
        if self.s_values is not None:
            s = tuple(int(v) for v in self.s_values)
            if not s:
                raise ConfigError("s_values is empty")
            if s[0] < self.order + 2:
                raise ConfigError(f"segment lengths must be >= order + 2 = {self.order + 2}")
            if any(b <= a for a, b in zip(s, s[1:])):
                raise ConfigError("s_values must be strictly ascending")
            object.__setattr__(self, "s_values", s)
        if self.s_max is not None and int(self.s_max) < self.order + 2:
            raise ConfigError("s_max is below order + 2")

    def resolve_scales(self, n: int, scenario_len: int = 0) -> np.ndarray:
        if self.s_values is not None:
            s = np.asarray(self.s_values)
        else:
            hi = self.s_max
            if hi is None:
                hi = scenario_len if scenario_len else min(n // 4, 256)
            s = np.arange(self.order + 2, int(hi) + 1)
        if s.size == 0:
            raise ConfigError("no segment lengths to analyse")
        if s[-1] > n:
            raise DataError(f"largest segment length {s[-1]} exceeds series length {n}")
        return s


def log_spaced_scales(lo: int, hi: int, n: int) -> tuple:
    """Roughly ``n`` distinct integers spread logarithmically over ``[lo, hi]``."""
    return tuple(int(v) for v in np.unique(np.round(np.geomspace(lo, hi, n)).astype(int)))


@dataclass(frozen=True, eq=False)
class FluctuationSurface:
    """``F[i, j] = F_{q_i}(s_j)`` plus bookkeeping.

    ``clamped[i, j]`` counts segments whose variance was raised to the
    floor before aggregation (identical across ``q`` for a given ``s``).
    """

    s_values: np.ndarray
    q_values: np.ndarray
    F: np.ndarray
    flagged_s: np.ndarray
    clamped: np.ndarray
    n_segments: np.ndarray
    scenario_len: int
    mode: str
    order: int
    hurst: np.ndarray | None = None
    hurst_stderr: np.ndarray | None = None
    hurst_intercept: np.ndarray | None = None
    fit_s: np.ndarray | None = None

    def fq(self, q: float) -> np.ndarray:
        return self.F[self._qi(q)]

    def h(self, q: float) -> float:
        if self.hurst is None:
            raise ValueError("run hurst_fit first")
        return float(self.hurst[self._qi(q)])

    def _qi(self, q):
        hits = np.flatnonzero(self.q_values == float(q))
        if hits.size == 0:
            raise KeyError(f"q={q} not in {self.q_values.tolist()}")
        return int(hits[0])


def flag_scales(s_values, scenario_len: int) -> np.ndarray:
    """Segment lengths of at least half a scenario; nothing when scenario_len is 0."""
    s = np.asarray(s_values)
    if not scenario_len:
        return np.zeros(s.size, dtype=bool)
    return s >= scenario_len / 2.0


def _power_mean(log_var, q):
    # (mean var**(q/2))**(1/q) evaluated in log space to stay finite at |q| = 10
    return np.exp((logsumexp(0.5 * q * log_var) - np.log(log_var.size)) / q)


def fluctuation_function(ts, cfg: MfdfaConfig = MfdfaConfig()) -> FluctuationSurface:
    if not isinstance(ts, TimeSeries):
        ts = TimeSeries(np.asarray(ts, dtype=float))
    if not np.all(np.isfinite(ts.values)):
        raise DataError("series contains non-finite values")
    p = profile(ts)
    s_values = cfg.resolve_scales(len(ts), ts.scenario_len)
    q = np.asarray(cfg.q_values)
    F = np.empty((q.size, s_values.size))
    clamped = np.empty((q.size, s_values.size), dtype=int)
    counts = np.empty(s_values.size, dtype=int)
    for j, s in enumerate(s_values):
        var = segment_variances(p, int(s), cfg.order, cfg.mode)
        low = var < cfg.variance_floor
        clamped[:, j] = int(low.sum())
        counts[j] = var.size
        log_var = np.log(np.where(low, cfg.variance_floor, var))
        for i, qi in enumerate(q):
            F[i, j] = _power_mean(log_var, qi)
    return FluctuationSurface(
        s_values=s_values, q_values=q, F=F,
        flagged_s=flag_scales(s_values, ts.scenario_len),
        clamped=clamped, n_segments=counts, scenario_len=ts.scenario_len,
        mode=cfg.mode, order=cfg.order,
    )


def hurst_fit(surface: FluctuationSurface, s_fit_range=None) -> FluctuationSurface:
    """Least-squares slope of log2 F_q(s) on log2 s over unflagged scales.

    ``s_fit_range`` is an inclusive ``(s_min, s_max)``; by default every
    unflagged scale is used.
    """
    s = surface.s_values
    use = ~surface.flagged_s
    if s_fit_range is not None:
        lo, hi = s_fit_range
        use &= (s >= lo) & (s <= hi)
    if use.sum() < 3:
        raise DataError(f"Hurst fit needs >= 3 unflagged scales, got {int(use.sum())}")
    x = np.log2(s[use].astype(float))
    xc = x - x.mean()
    sxx = np.sum(xc * xc)
    y = np.log2(surface.F[:, use])
    slope = (y - y.mean(axis=1, keepdims=True)) @ xc / sxx
    intercept = y.mean(axis=1) - slope * x.mean()
    resid = y - (intercept[:, None] + slope[:, None] * x[None, :])
    dof = x.size - 2
    stderr = np.sqrt(np.sum(resid * resid, axis=1) / dof / sxx) if dof > 0 \
        else np.zeros_like(slope)
    return replace(surface, hurst=slope, hurst_stderr=stderr,
                   hurst_intercept=intercept, fit_s=s[use])


@dataclass(frozen=True, eq=False)
class MfdfaComparison:
    reference: FluctuationSurface
    candidate: FluctuationSurface
    config: MfdfaConfig = field(default_factory=MfdfaConfig)


def mfdfa_report(reference: ScenarioSet, candidate: ScenarioSet,
                 cfg: MfdfaConfig = MfdfaConfig(), s_fit_range=None) -> MfdfaComparison:
    if reference.dt != candidate.dt:
        raise DataError(f"sampling intervals differ: {reference.dt} vs {candidate.dt}")
    if reference.scenario_len != candidate.scenario_len:
        raise DataError("reference and candidate scenarios differ in length")
    out = [hurst_fit(fluctuation_function(concatenate(s), cfg), s_fit_range)
           for s in (reference, candidate)]
    return MfdfaComparison(out[0], out[1], cfg)
