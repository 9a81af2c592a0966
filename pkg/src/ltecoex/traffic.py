"""Poisson packet arrivals, constant-rate or linearly ramped."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterator, Optional


@dataclass(frozen=True)
class RampProfile:
    start_rate: float = 0.01
    end_rate: float = 1.5
    duration_ms: float = 100_000.0

    def __post_init__(self):
        if self.start_rate < 0 or self.end_rate < 0:
            raise ValueError("ramp rates must be non-negative")
        if self.duration_ms <= 0:
            raise ValueError("ramp duration must be positive")


def ramp_rate(profile: RampProfile, t_ms: float) -> float:
    """Arrival rate (per ms) at ``t_ms``, held at ``end_rate`` after the ramp."""
    if t_ms < 0:
        raise ValueError("time must be non-negative")
    frac = min(t_ms / profile.duration_ms, 1.0)
    return profile.start_rate + (profile.end_rate - profile.start_rate) * frac


def next_interarrival(rate_per_ms: float, rng: random.Random) -> float:
    """Exponential gap in microseconds; ``inf`` for a silent source."""
    if rate_per_ms < 0:
        raise ValueError("arrival rate must be non-negative")
    if rate_per_ms == 0:
        return math.inf
    gap = 0.0
    while gap <= 0.0:
        gap = rng.expovariate(rate_per_ms) * 1000.0
    return gap


def offered_load(rate_per_ms: float, packet_bits: int) -> float:
    """Offered load in bit/s."""
    return rate_per_ms * packet_bits * 1000.0


class PoissonSource:
    """Arrival-time generator for one system's traffic.

    With a ramp profile, candidates are drawn at the peak rate and thinned
    against the instantaneous rate, which keeps the process an exact
    inhomogeneous Poisson process.
    """

    def __init__(self, rate: float = 0.0, packet_bits: int = 20_000,
                 rng: Optional[random.Random] = None, ramp: Optional[RampProfile] = None):
        if rate < 0:
            raise ValueError("arrival rate must be non-negative")
        self.rate = rate
        self.packet_bits = packet_bits
        self.ramp = ramp
        self.rng = rng or random.Random(0)
        self._peak = max(ramp.start_rate, ramp.end_rate) if ramp else rate
        self._t = 0.0  # continuous time of the last candidate, us
        self.next_arrival = self._advance()

    def rate_at(self, t_us: float) -> float:
        if self.ramp is None:
            return self.rate
        return ramp_rate(self.ramp, t_us / 1000.0)

    def _advance(self) -> float:
        while True:
            self._t += next_interarrival(self._peak, self.rng)
            if math.isinf(self._t) or self.ramp is None:
                return self._t
            if self.rng.random() * self._peak < self.rate_at(self._t):
                return self._t

    def pop(self) -> int:
        """Consume the next arrival and return its time in integer microseconds."""
        t = self.next_arrival
        self.next_arrival = self._advance()
        return math.ceil(t)

    def next_time_us(self) -> float:
        return math.ceil(self.next_arrival) if not math.isinf(self.next_arrival) else math.inf

    def arrivals_until(self, t_us: int) -> Iterator[int]:
        """Pop every arrival whose integer time is <= ``t_us``."""
        while self.next_time_us() <= t_us:
            yield self.pop()
