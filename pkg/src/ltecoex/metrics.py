"""Throughput accounting and comparisons against a baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np

TABLE_COLUMNS = ("best", "adaptive", "mode1", "mode2", "mode3", "mode4")


def cycle_throughput(delivered_bits: int, t_c_ms: float) -> float:
    """Goodput in Mb/s of ``delivered_bits`` over ``t_c_ms`` milliseconds."""
    if t_c_ms <= 0:
        raise ValueError("cycle duration must be positive")
    return delivered_bits / (t_c_ms / 1000.0) / 1e6


def loss_percent(baseline: float, value: float) -> float:
    if baseline <= 0:
        raise ValueError(f"baseline throughput must be positive, got {baseline}")
    return (baseline - value) / baseline * 100.0


def combined_throughput(lte_mbps: float, wlan_mbps: float) -> float:
    return lte_mbps + wlan_mbps


def mean_and_sem(values: Sequence[float]):
    """Sample mean and its standard error (0 for a single value)."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("no values")
    sem = float(arr.std(ddof=1) / math.sqrt(arr.size)) if arr.size > 1 else 0.0
    return float(arr.mean()), sem


@dataclass
class ComparisonTable:
    """Mean throughput (Mb/s) per LTE arrival rate and run kind for one system."""

    system: str
    rows: Dict[float, Dict[str, float]] = field(default_factory=dict)

    def set(self, lambda_l: float, column: str, value: float) -> None:
        if column not in TABLE_COLUMNS:
            raise KeyError(column)
        if value < 0:
            raise ValueError("throughput cannot be negative")
        self.rows.setdefault(lambda_l, {})[column] = value

    def get(self, lambda_l: float, column: str) -> float:
        return self.rows[lambda_l][column]

    def as_rows(self) -> List[List[float]]:
        return [[lam] + [self.rows[lam].get(c, float("nan")) for c in TABLE_COLUMNS] for lam in sorted(self.rows)]
