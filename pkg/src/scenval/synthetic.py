"""Seeded generators for series with known statistical signatures.

Random numbers come from a counter-based SplitMix64 stream rather than
numpy's bit generators so that the exact sample values are pinned down by a
few lines of integer arithmetic and can be reproduced in any language:

* ``k``-th 64-bit word (k = 0, 1, ...)::

      z = seed + (k + 1) * 0x9E3779B97F4A7C15            (mod 2**64)
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9           (mod 2**64)
      z = (z ^ (z >> 27)) * 0x94D049BB133111EB           (mod 2**64)
      z =  z ^ (z >> 31)

  which is the output sequence of the reference SplitMix64 generator.
* uniform ``u_k = (z_k >> 11) * 2**-53`` in [0, 1).
* standard normals by Box-Muller on consecutive pairs
  ``(u_{2j}, u_{2j+1})``::

      r = sqrt(-2 ln(1 - u_{2j}))
      n_{2j} = r cos(2 pi u_{2j+1}),  n_{2j+1} = r sin(2 pi u_{2j+1})
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.signal import lfilter

from .errors import ConfigError, DataError
from .scenario import ScenarioSet, TimeSeries

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


def splitmix64(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Words ``offset .. offset+n-1`` of the SplitMix64 stream for ``seed``."""
    seed = np.uint64(int(seed) & _MASK64)
    k = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = seed + k * _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def uniform(seed: int, n: int) -> np.ndarray:
    return (splitmix64(seed, n) >> np.uint64(11)).astype(np.float64) * 2.0**-53


def standard_normal(seed: int, n: int) -> np.ndarray:
    m = (n + 1) // 2
    u = uniform(seed, 2 * m)
    r = np.sqrt(-2.0 * np.log1p(-u[0::2]))
    theta = 2.0 * np.pi * u[1::2]
    out = np.empty(2 * m)
    out[0::2] = r * np.cos(theta)
    out[1::2] = r * np.sin(theta)
    return out[:n]


def choose_without_replacement(seed: int, population: int, k: int) -> np.ndarray:
    """Partial Fisher-Yates shuffle driven by the uniform stream."""
    if not 0 <= k <= population:
        raise ConfigError(f"cannot draw {k} items from {population}")
    idx = np.arange(population)
    u = uniform(seed, k)
    for i in range(k):
        j = i + min(int(u[i] * (population - i)), population - i - 1)
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:k].copy()


class Kind(str, Enum):
    WHITE_GAUSSIAN = "white_gaussian"
    AR1 = "ar1"
    SINE = "sine"
    RANDOM_WALK = "random_walk"
    QUANTIZED_COPY = "quantized_copy"


@dataclass(frozen=True)
class GeneratorSpec:
    """What to generate.

    ``params`` keys by kind:

    - white_gaussian, random_walk: ``sigma`` (1.0)
    - ar1: ``phi``, ``sigma`` (1.0) -- innovation standard deviation
    - sine: ``amplitude`` (1.0), ``period_steps``
    - quantized_copy: ``decimals``, ``source`` (a nested GeneratorSpec)

    Every kind except quantized_copy also accepts ``offset`` (0.0), added
    after generation.
    """

    kind: Kind
    n: int
    seed: int = 0
    params: dict = field(default_factory=dict)
    dt: float = 1.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", Kind(self.kind))
        except ValueError as exc:
            raise ConfigError(f"unknown generator kind {self.kind!r}") from exc
        if self.n < 2:
            raise ConfigError("generated series need n >= 2")
        p = self.params
        if self.kind is Kind.AR1:
            if "phi" not in p or not abs(p["phi"]) < 1:
                raise ConfigError("ar1 needs |phi| < 1")
        if self.kind is Kind.SINE:
            if p.get("period_steps", 0) < 2:
                raise ConfigError("sine needs period_steps >= 2")
        if self.kind is Kind.QUANTIZED_COPY:
            if int(p.get("decimals", -1)) < 0:
                raise ConfigError("quantized_copy needs decimals >= 0")
            if not isinstance(p.get("source"), GeneratorSpec):
                raise ConfigError("quantized_copy needs a source GeneratorSpec")
        if p.get("sigma", 1.0) <= 0:
            raise ConfigError("sigma must be positive")


def quantize(values, decimals: int) -> np.ndarray:
    """Round half-to-even to ``decimals`` places, like stored measurement data."""
    return np.round(np.asarray(values, dtype=float), int(decimals))


def generate(spec: GeneratorSpec) -> TimeSeries:
    p = spec.params
    n = spec.n
    sigma = float(p.get("sigma", 1.0))
    if spec.kind is Kind.WHITE_GAUSSIAN:
        x = sigma * standard_normal(spec.seed, n)
    elif spec.kind is Kind.AR1:
        phi = float(p["phi"])
        e = sigma * standard_normal(spec.seed, n)
        # stationary start: x_0 ~ N(0, sigma^2 / (1 - phi^2))
        e[0] /= np.sqrt(1.0 - phi * phi)
        x = lfilter([1.0], [1.0, -phi], e)
    elif spec.kind is Kind.SINE:
        t = np.arange(n)
        x = float(p.get("amplitude", 1.0)) * np.sin(2.0 * np.pi * t / float(p["period_steps"]))
    elif spec.kind is Kind.RANDOM_WALK:
        x = np.cumsum(sigma * standard_normal(spec.seed, n))
    else:
        src = p["source"]
        if src.n != n:
            raise ConfigError("quantized_copy source must have the same length")
        return TimeSeries(quantize(generate(src).values, p["decimals"]), spec.dt)
    return TimeSeries(x + float(p.get("offset", 0.0)), spec.dt)


def as_scenario_set(ts: TimeSeries, scenario_len: int, label: str = ""):
    """Cut a series into consecutive scenarios.

    Returns ``(ScenarioSet, n_truncated)``; trailing samples that do not fill
    a whole scenario are dropped and counted.
    """
    scenario_len = int(scenario_len)
    n = len(ts)
    if scenario_len < 2:
        raise DataError("scenario_len must be >= 2")
    if scenario_len > n:
        raise DataError(f"scenario_len {scenario_len} exceeds series length {n}")
    s = n // scenario_len
    kept = ts.values[: s * scenario_len]
    return ScenarioSet(kept.reshape(s, scenario_len), ts.dt, label), n - s * scenario_len
