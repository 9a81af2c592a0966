import logging

import pytest

from ltecoex.coexistence import (
    CycleConfig,
    SensingLedger,
    ThresholdTable,
    end_of_cycle,
    load_ratio,
    record_mute_subframe,
    select_spared_count,
)
from ltecoex.lte_mac import pattern_for_count
from ltecoex.phy import CcaResult


def test_record_counts_only_wlan_detection():
    led = SensingLedger()
    for r in (CcaResult.IDLE, CcaResult.ENERGY_BUSY, CcaResult.CARRIER_SENSED, CcaResult.WLAN_DETECTED):
        record_mute_subframe(led, r)
    assert (led.n_seize, led.n_listen) == (1, 4)


def test_load_ratio():
    assert load_ratio(SensingLedger(0, 100)) == 0.0
    assert load_ratio(SensingLedger(50, 100)) == 0.5
    assert load_ratio(SensingLedger(100, 100)) == 1.0


def test_load_ratio_empty_warns(caplog):
    with caplog.at_level(logging.WARNING):
        assert load_ratio(SensingLedger()) == 0.0
    assert caplog.records


@pytest.mark.parametrize(
    "gamma, k",
    [
        (0.0, 1),
        (0.05, 1),
        (0.08, 1),
        (0.0800001, 2),
        (0.16, 2),
        (0.24, 3),
        (0.86, 8),
        (0.94, 8),
        (0.99, 9),
        (1.0, 9),
    ],
)
def test_select_spared_count_printed_branches(gamma, k):
    assert select_spared_count(gamma) == k


def test_select_spared_count_rejects_out_of_range():
    with pytest.raises(ValueError):
        select_spared_count(1.01)
    with pytest.raises(ValueError):
        select_spared_count(-0.1)


def test_end_of_cycle():
    pat, led = end_of_cycle(SensingLedger(0, 500))
    assert pat == pattern_for_count(1)
    assert (led.n_seize, led.n_listen) == (0, 0)
    pat, _ = end_of_cycle(SensingLedger(800, 800))
    assert pat == pattern_for_count(9)


def test_threshold_table_validation():
    with pytest.raises(ValueError):
        ThresholdTable(gamma_max=(0.5, 0.2), spared=(1, 2))
    with pytest.raises(ValueError):
        ThresholdTable(gamma_max=(0.2,), spared=(1, 2))
    with pytest.raises(ValueError):
        ThresholdTable(gamma_max=(0.2, 0.4), spared=(3, 2))


def test_cycle_config():
    assert CycleConfig().t_c_us == 1_000_000
    with pytest.raises(ValueError):
        CycleConfig(t_c_ms=15)
    with pytest.raises(ValueError):
        CycleConfig(initial_spared=10)
