import numpy as np
import pytest

from scenval.errors import ConfigError, DataError
from scenval.scenario import TimeSeries, concatenate
from scenval.synthetic import (
    GeneratorSpec,
    as_scenario_set,
    choose_without_replacement,
    generate,
    splitmix64,
    standard_normal,
    uniform,
)

_M = (1 << 64) - 1


def _splitmix_scalar(seed, n):
    state, out = seed, []
    for _ in range(n):
        state = (state + 0x9E3779B97F4A7C15) & _M
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M
        out.append(z ^ (z >> 31))
    return out


def test_splitmix_known_vector():
    assert [int(v) for v in splitmix64(1234567, 3)] == [
        6457827717110365317, 3203168211198807973, 9817491932198370423]


@pytest.mark.parametrize("seed", [0, 1, 42, 2**63 + 17, _M])
def test_splitmix_matches_scalar_reference(seed):
    assert [int(v) for v in splitmix64(seed, 50)] == _splitmix_scalar(seed, 50)


def test_uniform_range_and_normal_pairs():
    u = uniform(5, 10_000)
    assert u.min() >= 0 and u.max() < 1
    z = standard_normal(5, 5)
    r = np.sqrt(-2 * np.log1p(-u[0]))
    assert z[0] == pytest.approx(r * np.cos(2 * np.pi * u[1]), rel=1e-15)
    assert z[1] == pytest.approx(r * np.sin(2 * np.pi * u[1]), rel=1e-15)
    # odd lengths are a prefix of the even stream
    np.testing.assert_array_equal(standard_normal(5, 4)[:3], standard_normal(5, 3))


def test_sine_quadrature_points():
    x = generate(GeneratorSpec("sine", 48, params={"amplitude": 1, "period_steps": 24})).values
    np.testing.assert_allclose(x[[0, 6, 12, 18]], [0, 1, 0, -1], atol=1e-12)


def test_ar1_phi_zero_is_white_noise():
    a = generate(GeneratorSpec("ar1", 1000, 9, {"phi": 0.0, "sigma": 2.0})).values
    w = generate(GeneratorSpec("white_gaussian", 1000, 9, {"sigma": 2.0})).values
    np.testing.assert_array_equal(a, w)


@pytest.mark.parametrize("kind,params", [
    ("white_gaussian", {}), ("ar1", {"phi": 0.5}), ("random_walk", {"sigma": 0.1}),
    ("sine", {"period_steps": 10})])
def test_determinism(kind, params):
    spec = GeneratorSpec(kind, 500, 77, params)
    np.testing.assert_array_equal(generate(spec).values, generate(spec).values)


def test_random_walk_is_cumulative_white_noise():
    w = generate(GeneratorSpec("white_gaussian", 100, 3)).values
    r = generate(GeneratorSpec("random_walk", 100, 3)).values
    np.testing.assert_allclose(r, np.cumsum(w))


def test_white_noise_moments():
    n, sigma = 100_000, 1.5
    x = generate(GeneratorSpec("white_gaussian", n, 123, {"sigma": sigma})).values
    assert abs(x.mean()) < 3 * sigma / np.sqrt(n)
    # standard error of the sample variance is sigma^2 * sqrt(2/n)
    assert abs(x.var() - sigma**2) < 3 * sigma**2 * np.sqrt(2 / n)


@pytest.mark.parametrize("phi", [0.5, 0.9, -0.7])
def test_ar1_stationary_variance(phi):
    x = generate(GeneratorSpec("ar1", 100_000, 4, {"phi": phi})).values
    assert x.var() == pytest.approx(1 / (1 - phi**2), rel=0.05)


def test_quantized_copy_rounds_half_even():
    src = GeneratorSpec("white_gaussian", 200, 8)
    q = generate(GeneratorSpec("quantized_copy", 200, 0, {"decimals": 2, "source": src}))
    np.testing.assert_array_equal(q.values, np.round(generate(src).values, 2))
    assert np.round(0.125, 2) == 0.12  # half-even on the binary value


@pytest.mark.parametrize("kind,params", [
    ("ar1", {"phi": 1.0}), ("ar1", {}), ("sine", {"period_steps": 1}),
    ("quantized_copy", {"decimals": 2}), ("nope", {}), ("white_gaussian", {"sigma": 0})])
def test_invalid_specs(kind, params):
    with pytest.raises(ConfigError):
        GeneratorSpec(kind, 100, 0, params)


def test_as_scenario_set_counts_and_round_trip():
    ts = TimeSeries(np.arange(192.0), 0.25)
    s, cut = as_scenario_set(ts, 96)
    assert s.n_scenarios == 2 and cut == 0
    s, cut = as_scenario_set(TimeSeries(np.arange(200.0), 0.25), 96)
    assert s.n_scenarios == 2 and cut == 8
    np.testing.assert_array_equal(concatenate(s).values, np.arange(192.0))
    with pytest.raises(DataError):
        as_scenario_set(TimeSeries(np.arange(50.0)), 96)


def test_choose_without_replacement():
    picks = choose_without_replacement(3, 100, 10)
    assert len(set(picks.tolist())) == 10
    np.testing.assert_array_equal(picks, choose_without_replacement(3, 100, 10))
    assert sorted(choose_without_replacement(1, 7, 7).tolist()) == list(range(7))
    with pytest.raises(ConfigError):
        choose_without_replacement(0, 3, 4)
