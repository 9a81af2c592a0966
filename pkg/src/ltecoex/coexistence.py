"""Adaptive mute-subframe controller.

LTE listens during its mute subframes, counts those in which a WLAN
transmission was present, and at the end of every reallocation cycle turns
the seized fraction into the number of subframes to spare next cycle.
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass
from typing import Tuple

from .lte_mac import FRAME_US, SubframePattern, pattern_for_count
from .phy import CcaResult

log = logging.getLogger(__name__)

# Printed branches at 0.08, 0.16, 0.24, 0.86 and 0.94; the elided middle is
# filled at the same 0.08 step. The two printed "spare 8" branches collapse
# into the 0.94 entry.
DEFAULT_GAMMA_MAX = (0.08, 0.16, 0.24, 0.32, 0.40, 0.48, 0.56, 0.94)
DEFAULT_SPARED = (1, 2, 3, 4, 5, 6, 7, 8)
CATCH_ALL_SPARED = 9


@dataclass
class SensingLedger:
    n_seize: int = 0
    n_listen: int = 0


@dataclass(frozen=True)
class ThresholdTable:
    gamma_max: Tuple[float, ...] = DEFAULT_GAMMA_MAX
    spared: Tuple[int, ...] = DEFAULT_SPARED
    catch_all: int = CATCH_ALL_SPARED

    def __post_init__(self):
        if len(self.gamma_max) != len(self.spared):
            raise ValueError("gamma_max and spared must have the same length")
        if any(not 0.0 <= g <= 1.0 for g in self.gamma_max):
            raise ValueError("gamma_max entries must lie in [0, 1]")
        if any(b <= a for a, b in zip(self.gamma_max, self.gamma_max[1:])):
            raise ValueError("gamma_max must be strictly increasing")
        seq = list(self.spared) + [self.catch_all]
        if any(b < a for a, b in zip(seq, seq[1:])):
            raise ValueError("spared counts must be non-decreasing")
        if any(not 1 <= k <= 9 for k in seq):
            raise ValueError("spared counts must be in 1..9")


@dataclass(frozen=True)
class CycleConfig:
    t_c_ms: int = 1000
    initial_spared: int = 5

    def __post_init__(self):
        if self.t_c_ms <= 0 or (self.t_c_ms * 1000) % FRAME_US:
            raise ValueError(f"t_c must be a positive multiple of the 10 ms frame, got {self.t_c_ms} ms")
        if not 0 <= self.initial_spared <= 9:
            raise ValueError("initial_spared must be in 0..9")

    @property
    def t_c_us(self) -> int:
        return self.t_c_ms * 1000


def record_mute_subframe(ledger: SensingLedger, cca_result: CcaResult) -> SensingLedger:
    """Count one mute subframe; it is seized only if ED and CS both fired."""
    ledger.n_listen += 1
    if cca_result is CcaResult.WLAN_DETECTED:
        ledger.n_seize += 1
    return ledger


def load_ratio(ledger: SensingLedger) -> float:
    if ledger.n_listen == 0:
        log.warning("no mute subframe was sensed this cycle; using load ratio 0")
        return 0.0
    return ledger.n_seize / ledger.n_listen


def select_spared_count(gamma: float, table: ThresholdTable = ThresholdTable()) -> int:
    """Subframes to spare: first entry whose ``gamma_max`` is >= ``gamma``."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"load ratio must be in [0, 1], got {gamma}")
    i = bisect.bisect_left(table.gamma_max, gamma)
    return table.spared[i] if i < len(table.spared) else table.catch_all


def end_of_cycle(
    ledger: SensingLedger, table: ThresholdTable = ThresholdTable()
) -> Tuple[SubframePattern, SensingLedger]:
    """Pattern for the next cycle and a fresh ledger."""
    k = select_spared_count(load_ratio(ledger), table)
    return pattern_for_count(k), SensingLedger()
