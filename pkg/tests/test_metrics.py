import math

import pytest

from ltecoex.metrics import (
    ComparisonTable,
    combined_throughput,
    cycle_throughput,
    loss_percent,
    mean_and_sem,
)


def test_cycle_throughput():
    assert cycle_throughput(10_000_000, 1000) == pytest.approx(10.0)
    assert cycle_throughput(0, 1000) == 0.0
    assert cycle_throughput(6_847_000, 1000) == pytest.approx(6.847)
    with pytest.raises(ValueError):
        cycle_throughput(1, 0)


def test_loss_percent_reference_rows():
    assert loss_percent(10.006, 9.814) == pytest.approx(1.92, abs=0.005)
    assert loss_percent(7.641, 6.847) == pytest.approx(10.39, abs=0.005)
    assert loss_percent(10.0, 10.0) == 0.0
    with pytest.raises(ValueError):
        loss_percent(0.0, 1.0)


def test_combined_throughput():
    assert combined_throughput(19.003, 6.885) == pytest.approx(25.888)
    assert combined_throughput(0, 0) == 0
    assert combined_throughput(1.5, 2.5) == combined_throughput(2.5, 1.5)


def test_mean_and_sem():
    m, se = mean_and_sem([1.0, 2.0, 3.0, 4.0])
    assert m == 2.5
    assert se == pytest.approx(math.sqrt(5 / 3) / 2)
    assert mean_and_sem([7.0]) == (7.0, 0.0)
    with pytest.raises(ValueError):
        mean_and_sem([])


def test_comparison_table():
    t = ComparisonTable("wlan")
    t.set(0.5, "best", 7.641)
    t.set(0.5, "adaptive", 6.847)
    assert t.get(0.5, "best") == 7.641
    row = t.as_rows()[0]
    assert row[:3] == [0.5, 7.641, 6.847] and math.isnan(row[3])
    with pytest.raises(KeyError):
        t.set(0.5, "mode5", 1.0)
    with pytest.raises(ValueError):
        t.set(0.5, "mode1", -1.0)
