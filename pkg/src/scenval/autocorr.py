"""Per-scenario autocorrelation and best-match search by ACF distance.

The ACF is the Pearson-normalised auto-covariance with the biased
estimator (divisor ``T`` at every lag) and the scenario's own mean and
variance, so that ``R(0) == 1`` and ``|R(tau)| <= 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, DegenerateError
from .scenario import ScenarioSet
from .synthetic import choose_without_replacement

# Attached to every ACF panel; the best-match search says nothing about
# the scenarios it does not select.
MATCHING_CAVEAT = (
    "Best-match ACF comparison covers only the selected reference scenarios "
    "and their closest candidates; the rest of the candidate set, including "
    "outliers, is excluded, and a matching ACF does not imply the series come "
    "from the same process."
)

# above this many multiply-adds per row the lag products go through an FFT
_DIRECT_LIMIT = 50_000_000


@dataclass(frozen=True, eq=False)
class AcfCurve:
    lags: np.ndarray
    values: np.ndarray
    scenario_index: int = -1


@dataclass(frozen=True)
class MatchResult:
    reference_index: int
    best_candidate_index: int
    mse: float
    runner_up_mses: tuple = ()
    skipped_degenerate: int = 0


def _check_lag(T, max_lag):
    if T < 2:
        raise DataError("ACF needs at least two samples")
    if max_lag is None:
        return T - 1
    max_lag = int(max_lag)
    if not 1 <= max_lag <= T - 1:
        raise ConfigError(f"max_lag must lie in [1, {T - 1}], got {max_lag}")
    return max_lag


def acf_rows(values, max_lag: int | None = None):
    """ACF of every row of a 2-d array.

    Returns ``(acf, degenerate)`` where ``acf`` has shape ``(S, L+1)`` and
    rows flagged in ``degenerate`` (constant scenarios) are NaN.
    """
    x = np.atleast_2d(np.asarray(values, dtype=float))
    T = x.shape[1]
    L = _check_lag(T, max_lag)
    degenerate = np.ptp(x, axis=1) == 0
    d = x - x.mean(axis=1, keepdims=True)
    if (L + 1) * T <= _DIRECT_LIMIT:
        cov = np.empty((x.shape[0], L + 1))
        for tau in range(L + 1):
            cov[:, tau] = np.sum(d[:, : T - tau] * d[:, tau:], axis=1)
    else:
        nfft = 1 << int(np.ceil(np.log2(2 * T - 1)))
        f = np.fft.rfft(d, nfft, axis=1)
        cov = np.fft.irfft(f * f.conj(), nfft, axis=1)[:, : L + 1]
    with np.errstate(invalid="ignore", divide="ignore"):
        r = cov / cov[:, :1]
    r[degenerate] = np.nan
    return r, degenerate


def acf(scenario, max_lag: int | None = None, scenario_index: int = -1) -> AcfCurve:
    """Biased Pearson ACF of a single scenario for lags ``0..max_lag``."""
    r, degenerate = acf_rows(np.asarray(scenario, dtype=float)[None, :], max_lag)
    if degenerate[0]:
        raise DegenerateError("ACF is undefined for a constant scenario")
    return AcfCurve(np.arange(r.shape[1]), r[0], scenario_index)


def _best_match(r_ref, r_cand, degenerate, reference_index):
    usable = np.flatnonzero(~degenerate)
    if usable.size == 0:
        raise DegenerateError("every candidate scenario is constant")
    mse = np.mean((r_cand[usable] - r_ref[None, :]) ** 2, axis=1)
    # lexsort: primary key mse, ties broken by lowest index
    order = np.lexsort((usable, mse))
    best = order[0]
    return MatchResult(
        reference_index=reference_index,
        best_candidate_index=int(usable[best]),
        mse=float(mse[best]),
        runner_up_mses=tuple(float(m) for m in mse[order[1:]]),
        skipped_degenerate=int(degenerate.sum()),
    )


def best_match_by_acf(reference_scenario, candidates: ScenarioSet,
                      max_lag: int | None = None, reference_index: int = -1) -> MatchResult:
    """Find the candidate whose ACF is closest in mean squared error.

    The MSE averages over lags ``0..max_lag``; constant candidates are
    skipped and counted in ``skipped_degenerate``.
    """
    candidates.require_finite()
    ref = np.asarray(reference_scenario, dtype=float)
    if ref.size != candidates.scenario_len:
        raise DataError("reference and candidate scenarios differ in length")
    r_ref = acf(ref, max_lag).values
    r_cand, degenerate = acf_rows(candidates.values, max_lag)
    return _best_match(r_ref, r_cand, degenerate, reference_index)


@dataclass(frozen=True, eq=False)
class AcfPanel:
    pairs: list
    matches: list
    max_lag: int
    seed: int
    caveat: str = field(default=MATCHING_CAVEAT)


def acf_panel(reference: ScenarioSet, candidates: ScenarioSet, n_examples: int = 4,
              max_lag: int | None = None, rng_seed: int = 0) -> AcfPanel:
    """Pair randomly drawn reference scenarios with their best-matching candidates."""
    reference.require_finite()
    candidates.require_finite()
    if reference.scenario_len != candidates.scenario_len:
        raise DataError("reference and candidate scenarios differ in length")
    if n_examples > reference.n_scenarios:
        raise ConfigError(
            f"n_examples={n_examples} exceeds the {reference.n_scenarios} reference scenarios"
        )
    L = _check_lag(reference.scenario_len, max_lag)
    r_cand, degenerate = acf_rows(candidates.values, L)
    picks = choose_without_replacement(rng_seed, reference.n_scenarios, n_examples)
    pairs, matches = [], []
    for i in picks:
        ref_curve = acf(reference.values[i], L, int(i))
        m = _best_match(ref_curve.values, r_cand, degenerate, int(i))
        cand_curve = AcfCurve(ref_curve.lags, r_cand[m.best_candidate_index],
                              m.best_candidate_index)
        pairs.append((ref_curve, cand_curve))
        matches.append(m)
    return AcfPanel(pairs, matches, L, int(rng_seed))
