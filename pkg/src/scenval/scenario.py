"""Scenario containers and the reshaping operations every validator builds on.

A :class:`ScenarioSet` holds ``S`` scenarios of ``T`` samples each, one per
row, in the order they were supplied (usually chronological).  Validators
that need a continuous signal (PSD, MFDFA) work on the row-major
concatenation, a :class:`TimeSeries` that remembers the scenario length so
that scale-dependent flagging rules can be applied later.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DataError


def _frozen_array(values, ndim):
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != ndim:
        raise DataError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScenarioSet:
    """``S x T`` matrix of scenarios sampled every ``dt`` hours.

    Missing values may be present as NaN until the set has been cleaned;
    the validators call :meth:`require_finite` before doing any work.
    """

    values: np.ndarray
    dt: float
    label: str = ""

    def __post_init__(self):
        values = _frozen_array(self.values, 2)
        if values.shape[0] < 1:
            raise DataError("a scenario set needs at least one scenario")
        if values.shape[1] < 2:
            raise DataError("scenarios need at least two time steps")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise DataError(f"sampling interval must be positive, got {self.dt!r}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def n_scenarios(self) -> int:
        return self.values.shape[0]

    @property
    def scenario_len(self) -> int:
        return self.values.shape[1]

    @property
    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def require_finite(self):
        if not self.is_finite:
            bad = int(np.sum(~np.all(np.isfinite(self.values), axis=1)))
            raise DataError(
                f"scenario set {self.label!r} has {bad} scenario(s) with missing "
                "or non-finite values; clean it first"
            )

    def with_values(self, values, label=None) -> "ScenarioSet":
        return ScenarioSet(values, self.dt, self.label if label is None else label)

    def __len__(self):
        return self.n_scenarios


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """A single series of ``N`` samples.

    ``scenario_len`` is the length ``T`` of the scenarios the series was
    concatenated from, or 0 when it has no scenario structure.
    """

    values: np.ndarray
    dt: float = 1.0
    scenario_len: int = 0

    def __post_init__(self):
        values = _frozen_array(self.values, 1)
        if values.size < 2:
            raise DataError("a time series needs at least two samples")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise DataError(f"sampling interval must be positive, got {self.dt!r}")
        if self.scenario_len < 0:
            raise DataError("scenario_len must be >= 0")
        if self.scenario_len and values.size % self.scenario_len:
            raise DataError(
                f"length {values.size} is not a multiple of scenario_len {self.scenario_len}"
            )
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "scenario_len", int(self.scenario_len))

    def __len__(self):
        return self.values.size


class Provenance(str, Enum):
    ALL_TIMESTEPS = "all_timesteps"
    DAILY_MEANS = "daily_means"


@dataclass(frozen=True, eq=False)
class SampleCollection:
    """Unordered samples fed to the density estimator."""

    values: np.ndarray
    provenance: Provenance = field(default=Provenance.ALL_TIMESTEPS)

    def __post_init__(self):
        values = _frozen_array(np.ravel(self.values), 1)
        if values.size == 0:
            raise DataError("sample collection is empty")
        if not np.all(np.isfinite(values)):
            raise DataError("sample collection contains non-finite values")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    def __len__(self):
        return self.values.size


def concatenate(scenarios: ScenarioSet) -> TimeSeries:
    """Join all scenarios, in stored order, into one series."""
    scenarios.require_finite()
    return TimeSeries(
        scenarios.values.reshape(-1), scenarios.dt, scenario_len=scenarios.scenario_len
    )


def flatten_timesteps(scenarios: ScenarioSet) -> SampleCollection:
    scenarios.require_finite()
    return SampleCollection(scenarios.values.reshape(-1), Provenance.ALL_TIMESTEPS)


def daily_means(scenarios: ScenarioSet) -> SampleCollection:
    """One sample per scenario: the mean over its time steps."""
    scenarios.require_finite()
    values = scenarios.values
    # clip guards against 1-ulp overshoot on constant rows
    means = np.clip(values.mean(axis=1), values.min(axis=1), values.max(axis=1))
    return SampleCollection(means, Provenance.DAILY_MEANS)
