"""Acceptance criteria 1-11 at desk scale (20 s drops, 20 drops).

Each test records a one-line verdict that is printed in the terminal
summary, then asserts. Run alone with ``pytest tests/test_acceptance.py``.
"""

import math
import random
import time

import numpy as np
import pytest
from scipy.stats import kendalltau

import test_properties
from conftest import record_verdict
from ltecoex import cli
from ltecoex.coexistence import select_spared_count
from ltecoex.config import EXPERIMENTS, RunConfig
from ltecoex.experiments import TABLE_KINDS, arm_config, run_drops, run_grid
from ltecoex.lte_mac import FRAME_US, pattern_for_count, pattern_from_mode

DESK = RunConfig()  # 20,000 ms drops, 20 drops, seed_base 1
LAMBDAS = (0.5, 1.0, 1.5, 2.0)


def verdict(number, ok, detail):
    record_verdict(number, bool(ok), detail)
    assert ok, f"criterion {number}: {detail}"


@pytest.fixture(scope="session")
def grid():
    return run_grid(DESK, TABLE_KINDS, LAMBDAS)


def paired(grid, lam, kind_a, kind_b, metric):
    """Per-drop differences a - b of a throughput metric; (mean, SE)."""
    a = getattr(grid.summary(lam, kind_a), metric)
    b = getattr(grid.summary(lam, kind_b), metric)
    d = np.asarray(a) - np.asarray(b)
    return float(d.mean()), float(d.std(ddof=1) / math.sqrt(d.size))


# -- 1 ----------------------------------------------------------------------

def spared_oracle(g):
    """Branch list transcribed line by line (middle interpolated at 0.08 steps)."""
    if g <= 0.08:
        return 1
    elif g <= 0.16:
        return 2
    elif g <= 0.24:
        return 3
    elif g <= 0.32:
        return 4
    elif g <= 0.40:
        return 5
    elif g <= 0.48:
        return 6
    elif g <= 0.56:
        return 7
    elif g <= 0.86:
        return 8
    elif g <= 0.94:
        return 8
    else:
        return 9


def test_criterion_01_threshold_oracle():
    rng = random.Random(2024)
    points = [rng.random() for _ in range(10_000)]
    edges = [0.0, 0.08, 0.16, 0.24, 0.32, 0.40, 0.48, 0.56, 0.86, 0.94, 1.0]
    for e in edges:
        points += [e, math.nextafter(e, -1.0), math.nextafter(e, 2.0)]
    points = [p for p in points if 0.0 <= p <= 1.0]
    bad = [g for g in points if select_spared_count(g) != spared_oracle(g)]
    verdict(1, not bad, f"{len(points)} load ratios, {len(bad)} mismatches")


# -- 2 ----------------------------------------------------------------------

def test_criterion_02_table_patterns():
    pairs = {0: 0, 2: 1, 4: 2, 6: 3, 8: 4}
    bad = [k for k, m in pairs.items() if pattern_for_count(k) != pattern_from_mode(m)]
    verdict(2, not bad, f"counts {sorted(pairs)} vs modes 0-4, mismatches {bad}")


# -- 3 ----------------------------------------------------------------------

def test_criterion_03_lte_only_load_matching():
    t0 = time.perf_counter()
    means = {}
    for lam in (0.5, 1.0):
        drops = run_drops(arm_config(DESK, "lte_only", lam))
        means[lam] = float(np.mean([d.mean_lte_mbps for d in drops]))
    elapsed = time.perf_counter() - t0
    ok = (abs(means[0.5] - 10.0) <= 0.3 and abs(means[1.0] - 20.0) <= 0.6 and elapsed < 60)
    verdict(3, ok, f"LTE-only {means[0.5]:.3f} Mb/s @0.5, {means[1.0]:.3f} Mb/s @1.0, {elapsed:.1f} s")


# -- 4 ----------------------------------------------------------------------

def test_criterion_04_wlan_only_invariance(grid):
    vals = [grid.summary(lam, "wlan_only").mean_wlan_mbps for lam in LAMBDAS]
    spread = (max(vals) - min(vals)) / np.mean(vals) * 100
    verdict(4, spread < 2.0, f"WLAN-only {', '.join(f'{v:.3f}' for v in vals)} Mb/s, spread {spread:.2f}%")


# -- 5 ----------------------------------------------------------------------

def test_criterion_05_fixed_mode_ordering(grid):
    worst = []
    ok = True
    for lam in LAMBDAS:
        for lo, hi in (("mode1", "mode2"), ("mode2", "mode3"), ("mode3", "mode4")):
            gap, se = paired(grid, lam, hi, lo, "drop_wlan_mbps")
            ok &= gap > 0 and gap >= 2 * se
            worst.append((gap / se if se else math.inf, lam, lo, hi, gap, se))
    z, lam, lo, hi, gap, se = min(worst)
    verdict(5, ok, f"smallest gap {hi}-{lo} @{lam}: {gap:.4f} Mb/s = {z:.1f} x SE")


# -- 6 ----------------------------------------------------------------------

def test_criterion_06_adaptive_wlan_protection(grid):
    losses = [grid.summary(lam, "adaptive").loss_wlan_pct for lam in LAMBDAS]
    verdict(6, max(losses) <= 15.0, f"WLAN loss {', '.join(f'{x:.2f}' for x in losses)} %")


# -- 7 ----------------------------------------------------------------------

def test_criterion_07_adaptive_beats_mode4(grid):
    parts = []
    ok = True
    for lam in (1.0, 1.5, 2.0):
        a, b = grid.summary(lam, "adaptive"), grid.summary(lam, "mode4")
        d = (np.add(a.drop_lte_mbps, a.drop_wlan_mbps) - np.add(b.drop_lte_mbps, b.drop_wlan_mbps))
        gap, se = float(d.mean()), float(d.std(ddof=1) / math.sqrt(d.size))
        ok &= gap > 0 and gap >= 2 * se
        parts.append(f"@{lam}: +{gap:.3f} (SE {se:.3f})")
    verdict(7, ok, "adaptive - mode4 combined " + ", ".join(parts))


# -- 8 ----------------------------------------------------------------------

def test_criterion_08_tracking(grid):
    parts = []
    ok = True
    for lam in LAMBDAS:
        s = grid.summary(lam, "adaptive")
        tau_k = kendalltau(s.cycle_index, s.spared_count).statistic
        tau_g = kendalltau(s.cycle_index, s.gamma).statistic
        ok &= tau_k >= 0.5 and tau_g >= 0.0
        parts.append(f"@{lam}: tau_k={tau_k:.2f} tau_g={tau_g:.2f}")
    verdict(8, ok, "; ".join(parts))


# -- 9 ----------------------------------------------------------------------

def test_criterion_09_sensing_accounting(grid):
    frames = DESK.coexistence.t_c_ms * 1000 // FRAME_US
    checked = 0
    bad = 0
    for (lam, kind), drops in grid.results.items():
        if kind in ("lte_only", "wlan_only"):
            continue
        for d in drops:
            for c in d.cycles:
                checked += 1
                bad += c.n_listen != frames * c.spared_count or not 0.0 <= c.gamma <= 1.0
    verdict(9, checked > 0 and bad == 0, f"{checked} cycles checked, {bad} violations")


# -- 10 ---------------------------------------------------------------------

def test_criterion_10_determinism(tmp_path):
    flags = ["--drops", "2", "--duration-ms", "2000", "--seed", "3"]
    differing = []
    for name in EXPERIMENTS:
        a, b = tmp_path / name / "a", tmp_path / name / "b"
        assert cli.main(["run", name, *flags, "--out", str(a)]) == 0
        assert cli.main(["run", name, *flags, "--out", str(b)]) == 0
        for f in sorted(a.iterdir()):
            if f.read_bytes() != (b / f.name).read_bytes():
                differing.append(f"{name}/{f.name}")
    verdict(10, not differing, f"{len(EXPERIMENTS)} presets run twice, differing files: {differing or 'none'}")


# -- 11 ---------------------------------------------------------------------

PROPERTY_SUITES = (
    "test_chase_combining_monotone",
    "test_chase_combining_permutation_invariant",
    "test_dcf_counter_conservation",
    "test_packet_conservation",
    "test_pathloss_symmetric",
    "test_pathloss_monotone_along_ray",
)


def test_criterion_11_property_suites():
    counts = {}
    for name in PROPERTY_SUITES:
        fn = getattr(test_properties, name)
        counts[name] = fn._hypothesis_internal_use_settings.max_examples
        fn()  # raises on the first falsifying example
    ok = min(counts.values()) >= 1_000
    verdict(11, ok, f"{len(counts)} suites, min cases {min(counts.values())}, all passed")
