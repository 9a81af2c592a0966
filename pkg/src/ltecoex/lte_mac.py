"""LTE downlink MAC: subframe patterns and per-subframe HARQ transmission."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Deque, Dict, FrozenSet, List

from .phy import Decode, HarqProcess, McsTable, attempt_decode, chase_combine

SUBFRAME_US = 1000
SUBFRAMES_PER_FRAME = 10
FRAME_US = SUBFRAME_US * SUBFRAMES_PER_FRAME

# Mute subframes of the five preset configurations.
MODE_MUTE = {
    0: frozenset(),
    1: frozenset({1, 6}),
    2: frozenset({1, 2, 6, 7}),
    3: frozenset({1, 2, 4, 5, 6, 7}),
    4: frozenset({1, 2, 3, 4, 5, 6, 7, 8}),
}

# Order in which subframes are muted as the spared count grows. Prefixes of
# length 0, 2, 4, 6 and 8 reproduce the presets above.
MUTE_PRECEDENCE = (1, 6, 2, 7, 4, 5, 3, 8, 9)


class SubframeAction(Enum):
    TRANSMIT = "T"
    MUTE = "L"


@dataclass(frozen=True)
class SubframePattern:
    mute: FrozenSet[int] = frozenset()

    def __post_init__(self):
        mute = frozenset(self.mute)
        object.__setattr__(self, "mute", mute)
        if any(not 0 <= i < SUBFRAMES_PER_FRAME for i in mute):
            raise ValueError(f"subframe indices must be in 0..9, got {sorted(mute)}")
        if 0 in mute:
            raise ValueError("subframe 0 is reserved for transmission")

    @property
    def spared(self) -> int:
        return len(self.mute)

    def __str__(self) -> str:
        return "".join("L" if i in self.mute else "T" for i in range(SUBFRAMES_PER_FRAME))


def subframe_index(t_us: int) -> int:
    if t_us < 0:
        raise ValueError("time must be non-negative")
    return (t_us // SUBFRAME_US) % SUBFRAMES_PER_FRAME


def pattern_from_mode(mode: int) -> SubframePattern:
    if mode not in MODE_MUTE:
        raise ValueError(f"unknown subframe configuration mode {mode!r}; expected 0..4")
    return SubframePattern(MODE_MUTE[mode])


def pattern_for_count(k: int) -> SubframePattern:
    if not 0 <= k <= len(MUTE_PRECEDENCE):
        raise ValueError(f"spared subframe count must be in 0..9, got {k}")
    return SubframePattern(frozenset(MUTE_PRECEDENCE[:k]))


def lte_subframe_action(t_us: int, pattern: SubframePattern) -> SubframeAction:
    return SubframeAction.MUTE if subframe_index(t_us) in pattern.mute else SubframeAction.TRANSMIT


@dataclass
class Segment:
    packet_id: int
    bits: int
    last: bool


@dataclass
class TransportBlock:
    user: int
    mcs: int
    segments: List[Segment]
    harq: HarqProcess
    share: float = 1.0  # fraction of the subframe's resources it occupies

    @property
    def bits(self) -> int:
        return sum(s.bits for s in self.segments)


@dataclass
class LteTxState:
    """Pico downlink queues with one HARQ process per user.

    Packets queue per user. Each Transmit subframe is split between users:
    pending HARQ retransmissions are placed first at their original resource
    share, then users with new data are served in order of their oldest
    queued packet until the subframe is full. A user's block occupies
    ``bits / tbs(mcs)`` of the subframe.
    """

    table: McsTable = field(default_factory=McsTable)
    max_retx: int = 3
    bandwidth_hz: float = 20e6
    queues: Dict[int, Deque[List[int]]] = field(default_factory=dict)
    pending: Dict[int, TransportBlock] = field(default_factory=dict)
    scheduled: List[TransportBlock] = field(default_factory=list)
    next_packet_id: int = 0
    arrived_packets: int = 0
    arrived_bits: int = 0
    delivered_packets: int = 0
    delivered_bits: int = 0
    dropped_packets: int = 0
    dropped_bits: int = 0

    def enqueue(self, user: int, bits: int) -> int:
        if bits <= 0:
            raise ValueError("packet size must be positive")
        pid = self.next_packet_id
        self.next_packet_id += 1
        self.queues.setdefault(user, deque()).append([pid, bits])
        self.arrived_packets += 1
        self.arrived_bits += bits
        return pid

    def backlog_bits(self, user: int) -> int:
        return sum(rem for _, rem in self.queues.get(user, ()))

    @property
    def queued_bits(self) -> int:
        return sum(rem for q in self.queues.values() for _, rem in q)

    @property
    def queued_packets(self) -> int:
        """Packets not yet delivered or dropped (queued or in flight)."""
        return self.arrived_packets - self.delivered_packets - self.dropped_packets

    @property
    def inflight_bits(self) -> int:
        return sum(tb.bits for tb in self.pending.values())

    def has_data(self) -> bool:
        return bool(self.pending) or any(self.queues.values())

    def begin_subframe(self, mcs_for_user: Callable[[int], int]) -> List[TransportBlock]:
        """Schedule this subframe's blocks; an empty list means a silent subframe."""
        if self.scheduled:
            raise RuntimeError("previous subframe was not closed")
        blocks = list(self.pending.values())
        left = 1.0 - sum(tb.share for tb in blocks)
        waiting = sorted((q[0][0], u) for u, q in self.queues.items() if q and u not in self.pending)
        for _, user in waiting:
            if left <= 1e-9:
                break
            mcs = mcs_for_user(user)
            tbs = self.table.tbs_bits(mcs, self.bandwidth_hz)
            room = int(left * tbs)
            if room <= 0:
                continue
            q = self.queues[user]
            segments: List[Segment] = []
            used = 0
            while q and used < room:
                head = q[0]
                take = min(head[1], room - used)
                head[1] -= take
                used += take
                last = head[1] == 0
                segments.append(Segment(head[0], take, last))
                if last:
                    q.popleft()
            tb = TransportBlock(user, mcs, segments, HarqProcess(mcs, self.max_retx), used / tbs)
            left -= tb.share
            self.pending[user] = tb
            blocks.append(tb)
        self.scheduled = blocks
        return blocks

    def end_subframe(self, sinr_for_user: Callable[[int], float]) -> int:
        """Decode every scheduled block; return bits delivered."""
        delivered = 0
        for tb in self.scheduled:
            tb.harq.attempt_sinrs.append(sinr_for_user(tb.user))
            if attempt_decode(chase_combine(tb.harq.attempt_sinrs), tb.mcs, self.table) is Decode.SUCCESS:
                del self.pending[tb.user]
                bits = tb.bits
                self.delivered_bits += bits
                self.delivered_packets += sum(1 for s in tb.segments if s.last)
                delivered += bits
            elif tb.harq.exhausted:
                del self.pending[tb.user]
                self._drop(tb)
        self.scheduled = []
        return delivered

    def _drop(self, tb: TransportBlock) -> None:
        self.dropped_bits += tb.bits
        self.dropped_packets += len({s.packet_id for s in tb.segments})
        tail = tb.segments[-1]
        if not tail.last:
            # rest of a segmented packet is useless once a piece is lost
            q = self.queues[tb.user]
            if q and q[0][0] == tail.packet_id:
                self.dropped_bits += q.popleft()[1]


def transmit_subframe(state: LteTxState, mcs: int, sinr_db: float) -> int:
    """Serve one Transmit subframe at ``mcs`` and decode it at ``sinr_db``."""
    if not state.begin_subframe(lambda user: mcs):
        return 0
    return state.end_subframe(lambda user: sinr_db)
