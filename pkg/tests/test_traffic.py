import math
import random

import numpy as np
import pytest

from ltecoex.traffic import (
    PoissonSource,
    RampProfile,
    next_interarrival,
    offered_load,
    ramp_rate,
)


def test_interarrival_mean():
    rng = random.Random(42)
    gaps = [next_interarrival(1.0, rng) for _ in range(100_000)]
    assert abs(np.mean(gaps) - 1000.0) <= 0.02 * 1000.0
    assert min(gaps) > 0


def test_zero_rate_is_silent():
    assert math.isinf(next_interarrival(0.0, random.Random(0)))
    src = PoissonSource(0.0, 20_000, random.Random(0))
    assert list(src.arrivals_until(10**12)) == []


def test_negative_rate_rejected():
    with pytest.raises(ValueError):
        next_interarrival(-1.0, random.Random(0))
    with pytest.raises(ValueError):
        PoissonSource(-0.5)


def test_offered_load_examples():
    assert offered_load(0.5, 20_000) == pytest.approx(10e6)
    assert offered_load(2.0, 20_000) == pytest.approx(40e6)
    assert offered_load(0.0, 20_000) == 0.0


def test_ramp_rate_examples():
    prof = RampProfile(0.01, 1.5, 100_000)
    assert ramp_rate(prof, 0) == pytest.approx(0.01)
    assert ramp_rate(prof, 100_000) == pytest.approx(1.5)
    assert ramp_rate(prof, 50_000) == pytest.approx(0.755)
    assert ramp_rate(prof, 250_000) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        ramp_rate(prof, -1)


def test_window_counts_are_poisson():
    # 10^5 one-millisecond windows at 1 arrival/ms
    src = PoissonSource(1.0, 1, random.Random(7))
    n = 100_000
    times = np.array(list(src.arrivals_until(n * 1000)))
    counts = np.bincount(((times - 1) // 1000).astype(int), minlength=n)[:n]
    assert abs(counts.mean() - 1.0) <= 0.05
    assert abs(counts.var() - 1.0) <= 0.05


def test_ramped_intensity_increases():
    prof = RampProfile(0.01, 1.5, 100_000)
    src = PoissonSource(0.0, 1, random.Random(3), ramp=prof)
    times = np.array(list(src.arrivals_until(100_000_000)))
    counts, _ = np.histogram(times, bins=5, range=(0, 100_000_000))
    # expected counts per 20 s bin: 20,000 * mean rate of the bin
    expected = [20_000 * ramp_rate(prof, 20_000 * i + 10_000) for i in range(5)]
    assert all(b > a for a, b in zip(counts, counts[1:]))
    assert np.allclose(counts, expected, rtol=0.05)


def test_arrival_times_monotone_integer():
    src = PoissonSource(2.0, 1, random.Random(1))
    times = list(src.arrivals_until(1_000_000))
    assert all(isinstance(t, int) for t in times)
    assert times == sorted(times)
