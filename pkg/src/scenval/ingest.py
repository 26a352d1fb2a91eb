"""Loading, cleaning and scaling of scenario sets stored as wide CSV.

File layout: one scenario per line, comma separated, ``.`` as decimal
separator, optional single header row.  Empty cells and ``nan`` (any case)
mark missing values and are loaded as NaN.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, EmptySetError, ParseError
from .scenario import ScenarioSet

logger = logging.getLogger(__name__)

_MISSING = {"", "nan"}


def _parse_cell(text):
    """Return a float, NaN for missing markers, or None if not numeric."""
    t = text.strip()
    if t.lower() in _MISSING:
        return np.nan
    try:
        return float(t)
    except ValueError:
        return None


def load_scenario_csv(path, dt: float, label: str | None = None) -> ScenarioSet:
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(f"{path}: no data rows")

    start = 0
    if any(_parse_cell(c) is None for c in rows[0]):
        start = 1
    if start >= len(rows):
        raise ParseError(f"{path}: header but no data rows")

    width = len(rows[start])
    if width < 2:
        raise ParseError(f"{path}: scenarios need at least 2 columns", row=start + 1)
    data = np.empty((len(rows) - start, width))
    for i, row in enumerate(rows[start:]):
        lineno = start + i + 1
        if len(row) != width:
            raise ParseError(
                f"{path}: ragged row with {len(row)} columns, expected {width}", row=lineno
            )
        for j, cell in enumerate(row):
            v = _parse_cell(cell)
            if v is None:
                raise ParseError(f"{path}: non-numeric cell {cell!r}", row=lineno, column=j + 1)
            data[i, j] = v
    return ScenarioSet(data, dt, path.stem if label is None else label)


def save_scenario_csv(scenarios: ScenarioSet, path, header: bool = False):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"t{i}" for i in range(scenarios.scenario_len)])
        for row in scenarios.values:
            w.writerow([repr(float(v)) for v in row])


@dataclass(frozen=True)
class CleaningPolicy:
    """Which scenarios count as faulty.

    Scenarios with missing or non-finite values are dropped when
    ``drop_if_missing`` is set; otherwise their presence is an error.
    Scenarios with any value outside ``[plausible_min, plausible_max]`` are
    always dropped.
    """

    drop_if_missing: bool = True
    plausible_min: float | None = None
    plausible_max: float | None = None

    def __post_init__(self):
        lo, hi = self.plausible_min, self.plausible_max
        if lo is not None and hi is not None and not lo < hi:
            raise ConfigError(f"plausible_min ({lo}) must be below plausible_max ({hi})")


def clean_scenarios(scenarios: ScenarioSet, policy: CleaningPolicy = CleaningPolicy()):
    """Drop faulty scenarios. Returns ``(clean_set, dropped_count)``."""
    x = scenarios.values
    finite = np.all(np.isfinite(x), axis=1)
    if not policy.drop_if_missing and not finite.all():
        raise DataError(
            f"{int((~finite).sum())} scenario(s) contain missing values "
            "and drop_if_missing is off"
        )
    keep = finite.copy()
    with np.errstate(invalid="ignore"):
        if policy.plausible_min is not None:
            keep &= np.all(x >= policy.plausible_min, axis=1)
        if policy.plausible_max is not None:
            keep &= np.all(x <= policy.plausible_max, axis=1)
    dropped = int((~keep).sum())
    if not keep.any():
        raise EmptySetError(f"all {len(keep)} scenarios of {scenarios.label!r} were dropped")
    if dropped:
        logger.info("dropped %d faulty scenario(s) from %r", dropped, scenarios.label)
    return scenarios.with_values(x[keep]), dropped


def capacity_factor_scale(scenarios: ScenarioSet, capacity) -> ScenarioSet:
    """Divide generation by installed capacity.

    ``capacity`` has length T (same profile for every scenario) or S*T
    (one value per time step, row-major), or shape (S, T).
    """
    cap = np.asarray(capacity, dtype=float)
    S, T = scenarios.values.shape
    if cap.size == T and cap.ndim <= 1:
        cap = np.broadcast_to(cap.reshape(1, T), (S, T))
    elif cap.size == S * T:
        cap = cap.reshape(S, T)
    else:
        raise DataError(f"capacity has {cap.size} values, expected {T} or {S * T}")
    if not np.all(np.isfinite(cap) & (cap > 0)):
        raise DataError("capacity must be strictly positive and finite")
    return scenarios.with_values(scenarios.values / cap)


@dataclass(frozen=True)
class AffineParams:
    """Parameters of ``y = lo + (x - data_min) * scale``."""

    data_min: float
    data_max: float
    target_lo: float
    target_hi: float

    @property
    def scale(self) -> float:
        return (self.target_hi - self.target_lo) / (self.data_max - self.data_min)

    def forward(self, x):
        return self.target_lo + (np.asarray(x, dtype=float) - self.data_min) * self.scale

    def inverse(self, y):
        return self.data_min + (np.asarray(y, dtype=float) - self.target_lo) / self.scale


def affine_rescale(scenarios: ScenarioSet, target_lo: float = -1.0, target_hi: float = 1.0):
    """Map the global range of the set linearly onto ``[target_lo, target_hi]``.

    The global (not per-scenario) extremes are used so that differences in
    level between scenarios survive.  Returns ``(scaled_set, AffineParams)``.
    """
    if not target_lo < target_hi:
        raise ConfigError("target_lo must be below target_hi")
    scenarios.require_finite()
    lo, hi = float(scenarios.values.min()), float(scenarios.values.max())
    if not hi > lo:
        raise DataError("cannot rescale a constant scenario set")
    params = AffineParams(lo, hi, float(target_lo), float(target_hi))
    y = params.forward(scenarios.values)
    # pin the endpoints exactly
    y[scenarios.values == lo] = target_lo
    y[scenarios.values == hi] = target_hi
    return scenarios.with_values(y), params
