"""WLAN DCF (CSMA/CA) backoff state machine and frame timing.

The state machine is slot driven: :func:`dcf_tick` advances one DIFS period
(in phase ``DIFS``) or one backoff slot (in phase ``BACKOFF``). The engine
uses :func:`dcf_idle_elapsed`, which applies a whole idle stretch at once and
is equivalent to ticking slot by slot.
"""

from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Deque, Tuple


class Phase(Enum):
    IDLE_NO_DATA = "idle"
    DIFS = "difs"
    BACKOFF = "backoff"
    TRANSMITTING = "tx"
    WAIT_ACK = "wait_ack"


@dataclass(frozen=True)
class DcfParams:
    slot: int = 9
    difs: int = 34
    sifs: int = 16
    cw_min: int = 15
    cw_max: int = 1023
    ack_duration: int = 44
    max_backoff_level: int = 6
    preamble: int = 20
    retry_limit: int = 7

    def __post_init__(self):
        if self.cw_min > self.cw_max:
            raise ValueError("cw_min must not exceed cw_max")
        if min(self.slot, self.difs, self.sifs, self.ack_duration) <= 0:
            raise ValueError("DCF durations must be positive")
        if self.preamble < 0 or self.max_backoff_level < 0 or self.retry_limit < 0:
            raise ValueError("preamble, max_backoff_level and retry_limit must be non-negative")


# 802.11a/g OFDM rate ladder and the SINR each rate needs.
DEFAULT_WLAN_RATES_MBPS = (6.0, 9.0, 12.0, 18.0, 24.0, 36.0, 48.0, 54.0)
DEFAULT_WLAN_RATE_THRESHOLDS_DB = (5.0, 6.0, 8.0, 11.0, 14.0, 18.0, 22.0, 24.0)


@dataclass(frozen=True)
class WlanRateTable:
    thresholds_db: Tuple[float, ...] = DEFAULT_WLAN_RATE_THRESHOLDS_DB
    rates_mbps: Tuple[float, ...] = DEFAULT_WLAN_RATES_MBPS

    def __post_init__(self):
        if len(self.thresholds_db) != len(self.rates_mbps) or not self.rates_mbps:
            raise ValueError("rate table needs matching, non-empty thresholds and rates")
        if any(b <= a for a, b in zip(self.thresholds_db, self.thresholds_db[1:])):
            raise ValueError("rate thresholds must be strictly increasing")
        if min(self.rates_mbps) <= 0:
            raise ValueError("rates must be positive")

    def index_for(self, sinr_db: float) -> int:
        return max(bisect.bisect_right(self.thresholds_db, sinr_db) - 1, 0)


@dataclass
class DcfState:
    backoff_level: int = 0
    backoff_counter: int = 0
    phase: Phase = Phase.IDLE_NO_DATA
    retries: int = 0
    queue: Deque[Any] = field(default_factory=deque)
    # idle backoff slots consumed, for counter-conservation checks
    decrements: int = 0
    dropped: int = 0


def contention_window(level: int, params: DcfParams) -> int:
    return min(params.cw_max, (params.cw_min + 1) * 2 ** level - 1)


def draw_backoff(level: int, params: DcfParams, rng) -> int:
    """Uniform integer in ``[0, CW(level)]``; ``rng`` follows ``random.Random``."""
    if not 0 <= level <= params.max_backoff_level:
        raise ValueError(f"backoff level {level} outside 0..{params.max_backoff_level}")
    return rng.randint(0, contention_window(level, params))


def dcf_tick(state: DcfState, channel_idle: bool, params: DcfParams) -> DcfState:
    """Advance one DIFS period (phase DIFS) or one backoff slot (phase BACKOFF)."""
    if state.phase is Phase.DIFS:
        if channel_idle:
            state.phase = Phase.BACKOFF
            if state.backoff_counter == 0:
                state.phase = Phase.TRANSMITTING
        return state
    if state.phase is not Phase.BACKOFF:
        raise ValueError(f"dcf_tick needs phase DIFS or BACKOFF, not {state.phase}")
    if not channel_idle:
        # frozen; DIFS must pass again before counting resumes
        state.phase = Phase.DIFS
        return state
    if state.backoff_counter > 0:
        state.backoff_counter -= 1
        state.decrements += 1
    if state.backoff_counter == 0:
        state.phase = Phase.TRANSMITTING
    return state


def time_to_transmit(state: DcfState, params: DcfParams) -> int:
    """Idle time (us) still needed before this station transmits."""
    wait = state.backoff_counter * params.slot
    if state.phase is Phase.DIFS:
        wait += params.difs
    return wait


def dcf_idle_elapsed(state: DcfState, elapsed_us: int, params: DcfParams) -> DcfState:
    """Apply ``elapsed_us`` of continuous idle channel, starting in phase DIFS.

    Only whole slots after DIFS decrement the counter. The station ends in
    TRANSMITTING if the counter reached zero, BACKOFF otherwise, or stays in
    DIFS if the DIFS period did not complete.
    """
    if state.phase is not Phase.DIFS:
        raise ValueError(f"idle stretch must start in phase DIFS, not {state.phase}")
    if elapsed_us < params.difs:
        return state
    n = min(state.backoff_counter, (elapsed_us - params.difs) // params.slot)
    state.backoff_counter -= n
    state.decrements += n
    state.phase = Phase.TRANSMITTING if state.backoff_counter == 0 else Phase.BACKOFF
    return state


def freeze(state: DcfState) -> DcfState:
    """Channel went busy: keep the counter, re-arm DIFS."""
    if state.phase in (Phase.BACKOFF, Phase.DIFS):
        state.phase = Phase.DIFS
    return state


def on_collision(state: DcfState, params: DcfParams, rng) -> DcfState:
    """Failed frame exchange: widen the window and redraw.

    Past ``retry_limit`` retries the head frame is discarded and the station
    restarts from level 0.
    """
    state.retries += 1
    if state.retries > params.retry_limit:
        if state.queue:
            state.queue.popleft()
        state.dropped += 1
        state.retries = 0
        state.backoff_level = 0
    else:
        state.backoff_level = min(state.backoff_level + 1, params.max_backoff_level)
    state.backoff_counter = draw_backoff(state.backoff_level, params, rng)
    state.phase = Phase.BACKOFF
    return state


def on_success(state: DcfState, params: DcfParams, rng) -> DcfState:
    state.backoff_level = 0
    state.retries = 0
    state.backoff_counter = draw_backoff(0, params, rng)
    if state.queue:
        state.queue.popleft()
    state.phase = Phase.BACKOFF
    return state


def data_airtime(payload_bits: int, phy_rate_bps: float, params: DcfParams) -> int:
    """Preamble plus payload airtime of one data frame, in whole microseconds."""
    if phy_rate_bps <= 0:
        raise ValueError("PHY rate must be positive")
    return params.preamble + math.ceil(payload_bits * 1e6 / phy_rate_bps - 1e-9)


def wlan_tx_duration(payload_bits: int, phy_rate_bps: float, params: DcfParams) -> int:
    """Airtime of a successful data + SIFS + ACK exchange (us)."""
    return data_airtime(payload_bits, phy_rate_bps, params) + params.sifs + params.ack_duration
