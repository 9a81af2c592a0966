"""Link-level abstraction: SINR, lagged MCS selection, HARQ chase combining, CCA."""

from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Collection, Deque, Iterable, List, Optional, Sequence, Tuple

import numpy as np

NOISE_FLOOR_DBM = -101.0


def db_to_lin(db: float) -> float:
    return 10.0 ** (db / 10.0)


def lin_to_db(lin: float) -> float:
    if lin <= 0.0:
        return -math.inf
    return 10.0 * math.log10(lin)


# Thresholds in 2 dB steps from -6 dB, efficiencies of the 4-bit CQI table.
DEFAULT_MCS_THRESHOLDS_DB = tuple(float(v) for v in range(-6, 23, 2))
DEFAULT_MCS_EFFICIENCIES = (
    0.1523, 0.2344, 0.3770, 0.6016, 0.8770, 1.1758, 1.4766, 1.9141,
    2.4063, 2.7305, 3.3223, 3.9023, 4.5234, 5.1152, 5.5547,
)


@dataclass(frozen=True)
class McsTable:
    thresholds_db: Tuple[float, ...] = DEFAULT_MCS_THRESHOLDS_DB
    efficiencies: Tuple[float, ...] = DEFAULT_MCS_EFFICIENCIES

    def __post_init__(self):
        if len(self.thresholds_db) != len(self.efficiencies) or not self.thresholds_db:
            raise ValueError("MCS table needs matching, non-empty thresholds and efficiencies")
        if any(b <= a for a, b in zip(self.thresholds_db, self.thresholds_db[1:])):
            raise ValueError("MCS thresholds must be strictly increasing")
        if any(b < a for a, b in zip(self.efficiencies, self.efficiencies[1:])):
            raise ValueError("MCS efficiencies must be non-decreasing")

    def __len__(self) -> int:
        return len(self.thresholds_db)

    def index_for(self, sinr_db: float) -> int:
        """Highest index whose threshold is <= ``sinr_db``, 0 if none."""
        return max(bisect.bisect_right(self.thresholds_db, sinr_db) - 1, 0)

    def tbs_bits(self, mcs: int, bandwidth_hz: float = 20e6, duration_s: float = 1e-3) -> int:
        """Transport-block size of one subframe at ``mcs``."""
        return int(self.efficiencies[mcs] * bandwidth_hz * duration_s)


@dataclass(frozen=True)
class CcaThresholds:
    ed_threshold: float = -62.0
    cs_threshold: float = -82.0

    def __post_init__(self):
        if self.cs_threshold > self.ed_threshold:
            raise ValueError("cs_threshold must not exceed ed_threshold")


class CcaResult(IntEnum):
    IDLE = 0
    ENERGY_BUSY = 1
    # a WLAN carrier is above the CS threshold but total energy is below ED
    CARRIER_SENSED = 2
    # total energy above ED and a WLAN carrier recognised
    WLAN_DETECTED = 3

    @property
    def busy(self) -> bool:
        return self is not CcaResult.IDLE


class Decode(IntEnum):
    FAILURE = 0
    SUCCESS = 1


@dataclass
class LinkQuality:
    """Time-stamped SINR samples of one link, oldest first."""

    noise_floor: float = NOISE_FLOOR_DBM
    maxlen: Optional[int] = 64
    sinr_history: Deque[Tuple[int, float]] = field(default_factory=deque)

    def __post_init__(self):
        self.sinr_history = deque(self.sinr_history, maxlen=self.maxlen)

    def record(self, t_us: int, sinr_db: float) -> None:
        if self.sinr_history and t_us <= self.sinr_history[-1][0]:
            raise ValueError(f"SINR sample at {t_us} us is not after {self.sinr_history[-1][0]} us")
        self.sinr_history.append((t_us, sinr_db))


@dataclass
class HarqProcess:
    mcs: int
    max_retx: int = 3
    attempt_sinrs: List[float] = field(default_factory=list)

    @property
    def attempts(self) -> int:
        return len(self.attempt_sinrs)

    @property
    def exhausted(self) -> bool:
        return self.attempts >= 1 + self.max_retx


def sinr_at(
    rx_dbm: np.ndarray,
    rx: int,
    tx: int,
    active: Iterable[int],
    noise_dbm: float = NOISE_FLOOR_DBM,
) -> float:
    """SINR (dB) at node ``rx`` for the signal of ``tx``.

    Every member of ``active`` other than ``tx`` counts as an interferer.
    """
    interference = db_to_lin(noise_dbm)
    for i in active:
        if i != tx:
            interference += db_to_lin(rx_dbm[i, rx])
    return rx_dbm[tx, rx] - lin_to_db(interference)


def select_mcs(
    samples: Sequence[Tuple[int, float]],
    now_us: int,
    table: McsTable,
    lag_us: int = 2000,
) -> int:
    """MCS from the newest SINR sample taken at or before ``now - lag``.

    Falls back to index 0 when no sample is old enough.
    """
    cutoff = now_us - lag_us
    for t, sinr in reversed(samples):
        if t <= cutoff:
            return table.index_for(sinr)
    return 0


def chase_combine(attempts: Sequence[float]) -> float:
    """Effective SINR of chase-combined attempts: linear sum, back to dB."""
    if not attempts:
        raise ValueError("chase combining needs at least one attempt")
    return lin_to_db(sum(db_to_lin(a) for a in attempts))


def attempt_decode(effective_sinr: float, mcs: int, table: McsTable) -> Decode:
    if not 0 <= mcs < len(table):
        raise IndexError(f"MCS index {mcs} out of range")
    return Decode.SUCCESS if effective_sinr >= table.thresholds_db[mcs] else Decode.FAILURE


def cca_assess(
    rx_dbm: np.ndarray,
    listener: int,
    active: Iterable[int],
    thresholds: CcaThresholds,
    wlan_nodes: Collection[int],
) -> CcaResult:
    """Clear channel assessment at ``listener`` combining ED and CS.

    ED compares the summed received power of all active transmitters with
    ``ed_threshold``; CS fires when a single WLAN transmitter is received at
    or above ``cs_threshold``.
    """
    total = 0.0
    carrier = False
    for i in active:
        if i == listener:
            continue
        p = rx_dbm[i, listener]
        total += db_to_lin(p)
        if i in wlan_nodes and p >= thresholds.cs_threshold:
            carrier = True
    energy = total > 0.0 and lin_to_db(total) >= thresholds.ed_threshold
    if energy and carrier:
        return CcaResult.WLAN_DETECTED
    if energy:
        return CcaResult.ENERGY_BUSY
    if carrier:
        return CcaResult.CARRIER_SENSED
    return CcaResult.IDLE
