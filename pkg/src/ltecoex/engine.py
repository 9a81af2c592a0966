"""Discrete-event core: one drop of LTE and WLAN sharing a channel.

Time is an integer number of microseconds. Events are ordered by
``(time, priority, sequence)``; subframe boundaries carry the highest
priority so a boundary is fully settled before anything else at that
instant.

Backoff slots are not scheduled one by one. While a station's channel stays
idle its backoff expiry time is known in closed form, so a single
``WLAN_SLOT_TICK`` event is scheduled for it and cancelled (by version
number) when the channel turns busy, at which point the slots already
elapsed are applied through :func:`wlan_mac.dcf_idle_elapsed`.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import random
from collections import deque
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from . import coexistence as coex
from .config import RunConfig
from .lte_mac import (
    SUBFRAME_US,
    SubframeAction,
    SubframePattern,
    LteTxState,
    lte_subframe_action,
    pattern_for_count,
    pattern_from_mode,
)
from .metrics import cycle_throughput, loss_percent, mean_and_sem
from .phy import CcaResult, cca_assess, select_mcs, sinr_at
from .topology import Topology, build_topology
from .traffic import PoissonSource
from .wlan_mac import (
    DcfState,
    Phase,
    data_airtime,
    dcf_idle_elapsed,
    draw_backoff,
    freeze,
    on_collision,
    on_success,
    time_to_transmit,
)

log = logging.getLogger(__name__)


class Kind(IntEnum):
    # a subframe boundary also closes the cycle and the drop when due
    SUBFRAME_BOUNDARY = 0
    PACKET_ARRIVAL = 1
    WLAN_SLOT_TICK = 2
    TX_END = 3
    ACK_END = 4


@dataclass(order=True)
class Event:
    time: int
    priority: int
    sequence: int
    kind: Kind = field(compare=False)
    payload: tuple = field(compare=False, default=())


@dataclass
class CycleRecord:
    cycle_index: int
    lte_mbps: float
    wlan_mbps: float
    spared_count: int
    gamma: float
    n_seize: int = 0
    n_listen: int = 0
    lte_bits: int = 0
    wlan_bits: int = 0


@dataclass
class DropResult:
    seed: int
    cycles: List[CycleRecord]
    lte_bits: int
    wlan_bits: int
    t_c_ms: int
    counters: Dict[str, int] = field(default_factory=dict)

    @property
    def mean_lte_mbps(self) -> float:
        return cycle_throughput(self.lte_bits, self.t_c_ms * len(self.cycles))

    @property
    def mean_wlan_mbps(self) -> float:
        return cycle_throughput(self.wlan_bits, self.t_c_ms * len(self.cycles))


@dataclass
class _Frame:
    user: int
    start: int
    data_end: int
    end: int
    interferers: set
    ok: bool = False


@dataclass
class _Station:
    node: int
    dcf: DcfState
    rng: random.Random
    busy: bool = False
    idle_since: int = 0
    version: int = 0
    frame: Optional[_Frame] = None
    delivered: int = 0
    arrivals: int = 0


class _Samples(Sequence):
    """Lazy per-user view of the shared measurement log as (t, SINR) pairs."""

    def __init__(self, sim: "Simulation", user: int):
        self.sim, self.user = sim, user

    def __len__(self):
        return len(self.sim.measurements)

    def __getitem__(self, i):
        t, interferers = self.sim.measurements[i]
        return t, self.sim.lte_sinr(self.user, interferers)


def _stream_seeds(seed: int, n: int) -> List[int]:
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


class Simulation:
    """World state of one drop; :meth:`step` processes one event."""

    def __init__(self, config: RunConfig, seed: int, topology: Optional[Topology] = None):
        self.config = config
        self.seed = seed
        sc, lte, wl, co = config.scenario, config.lte, config.wlan, config.coexistence
        self.duration_us = config.engine.duration_ms * 1000
        self.t_c_us = co.t_c_ms * 1000
        self.mode = co.mode
        seeds = _stream_seeds(seed, 6)
        if topology is None:
            topology = build_topology(
                sc.floor_plan(), sc.pathloss_model(), np.random.default_rng(seeds[0]),
                n_lte=sc.n_lte_users, n_wlan=sc.n_wlan_users, tx_power_dbm=sc.tx_power_dbm,
                antenna_gain_db=sc.antenna_gain_db, min_infra_distance=sc.min_infra_distance_m,
                infra_height=sc.infra_height_m, user_height=sc.user_height_m,
            )
        self.topology = topology
        self.rx = topology.rx_dbm
        self.noise = sc.noise_floor_dbm
        self.thresholds = config.cca.thresholds()
        self.pico = topology.pico.node_id
        self.ap_ids = [n.node_id for n in topology.aps]
        self.wlan_set = frozenset(self.ap_ids)
        self.lte_on = self.mode != "wlan_only"
        self.wlan_on = self.mode != "lte_only"
        self.mcs_table = lte.mcs_table()
        rates = wl.rate_table()

        # Users attach only when the interference-free link reaches the
        # lowest MCS (LTE) or rate (WLAN) threshold; others receive no traffic.
        self.lte_users = [
            n.node_id for n in topology.lte_users
            if sinr_at(self.rx, n.node_id, self.pico, (), self.noise) >= self.mcs_table.thresholds_db[0]
        ]
        self.serving_ap: Dict[int, int] = {}
        self.user_rate: Dict[int, float] = {}
        self.user_rate_threshold: Dict[int, float] = {}
        self.wlan_users = []
        for n in topology.wlan_users:
            u = n.node_id
            ap = max(self.ap_ids, key=lambda a: self.rx[a, u])
            sinr = sinr_at(self.rx, u, ap, (), self.noise)
            if sinr < rates.thresholds_db[0]:
                continue
            k = rates.index_for(sinr)
            self.wlan_users.append(u)
            self.serving_ap[u] = ap
            self.user_rate[u] = rates.rates_mbps[k] * 1e6
            self.user_rate_threshold[u] = rates.thresholds_db[k]

        # LTE side
        self.lte_state = LteTxState(self.mcs_table, lte.max_retx, lte.bandwidth_hz)
        self.lag_us = lte.mcs_lag_ms * 1000
        self.lte_source = PoissonSource(lte.arrival_rate_per_ms if self.lte_on else 0.0,
                                        lte.packet_bits, random.Random(seeds[1]))
        self.full_buffer = lte.full_buffer and self.lte_on
        self.occupy_idle = lte.occupy_idle_subframes
        self._lte_rr = itertools.cycle(self.lte_users) if self.lte_users else None
        self.measurements: deque = deque(maxlen=32)
        self._sinr_cache: Dict[Tuple[int, FrozenSet[int]], float] = {}
        self._samples = {u: _Samples(self, u) for u in self.lte_users}

        self.table = co.threshold_table()
        if self.mode == "adaptive":
            self.pattern = pattern_for_count(co.initial_spared)
        elif self.mode == "fixed":
            self.pattern = pattern_from_mode(co.fixed_mode)
        else:
            self.pattern = SubframePattern()
        self.ledger = coex.SensingLedger()

        # WLAN side
        self.dcf = wl.dcf_params()
        self.payload = wl.payload_bits
        self.wlan_source = PoissonSource(0.0, wl.payload_bits, random.Random(seeds[2]),
                                         ramp=wl.ramp_profile(config.engine.duration_ms)) if self.wlan_on else None
        self._wlan_rr = itertools.cycle(self.wlan_users) if self.wlan_users else None
        self.stations: Dict[int, _Station] = {}
        for j, ap in enumerate(self.ap_ids):
            rng = random.Random(seeds[3 + j] if j < 3 else seeds[3] + j)
            st = _Station(ap, DcfState(), rng)
            st.dcf.backoff_counter = draw_backoff(0, self.dcf, rng)
            self.stations[ap] = st

        # Channel-sense outcomes for every combination of active transmitters.
        self._ap_busy: Dict[Tuple[int, FrozenSet[int]], bool] = {}
        others_all = [self.pico] + self.ap_ids
        for ap in self.ap_ids:
            others = [o for o in others_all if o != ap]
            for r in range(len(others) + 1):
                for combo in itertools.combinations(others, r):
                    fs = frozenset(combo)
                    res = cca_assess(self.rx, ap, fs, self.thresholds, self.wlan_set)
                    self._ap_busy[ap, fs] = res.busy
        self._pico_cca: Dict[FrozenSet[int], CcaResult] = {}
        for r in range(len(self.ap_ids) + 1):
            for combo in itertools.combinations(self.ap_ids, r):
                fs = frozenset(combo)
                self._pico_cca[fs] = cca_assess(self.rx, self.pico, fs, self.thresholds, self.wlan_set)

        # dynamic state
        self.now = 0
        self.active: set = set()
        self.pico_on = False
        self.sf_start = 0
        self.sf_action: Optional[SubframeAction] = None
        self.sf_interferers: set = set()
        self.sf_cca = CcaResult.IDLE
        self.cycle_lte_bits = 0
        self.cycle_wlan_bits = 0
        self.records: List[CycleRecord] = []
        self.wlan_arrived_bits = 0
        self.wlan_delivered_bits = 0
        self.done = False
        self._queue: List[Event] = []
        self._seq = itertools.count()

        self.schedule(0, Kind.SUBFRAME_BOUNDARY)
        if self.wlan_source is not None:
            nt = self.wlan_source.next_time_us()
            if nt <= self.duration_us:
                self.schedule(int(nt), Kind.PACKET_ARRIVAL)

    # -- event queue -------------------------------------------------------

    def schedule(self, time: int, kind: Kind, payload: tuple = ()) -> None:
        if time < self.now:
            raise RuntimeError(f"cannot schedule {kind.name} at {time} us before now={self.now} us")
        heapq.heappush(self._queue, Event(time, 0 if kind is Kind.SUBFRAME_BOUNDARY else 1, next(self._seq), kind, payload))

    def step(self) -> Optional[Event]:
        """Process the earliest pending event; None once the drop is over."""
        if self.done or not self._queue:
            return None
        ev = heapq.heappop(self._queue)
        self.now = ev.time
        handler = self._handlers[ev.kind]
        handler(self, ev)
        return ev

    def run(self) -> DropResult:
        while not self.done and self._queue:
            self.step()
        return self.result()

    def result(self) -> DropResult:
        lte = self.lte_state
        counters = {
            "lte_attached_users": len(self.lte_users),
            "wlan_attached_users": len(self.wlan_users),
            "lte_arrived_bits": lte.arrived_bits,
            "lte_delivered_bits": lte.delivered_bits,
            "lte_dropped_bits": lte.dropped_bits,
            "lte_queued_bits": lte.queued_bits,
            "lte_inflight_bits": lte.inflight_bits,
            "lte_arrived_packets": lte.arrived_packets,
            "lte_delivered_packets": lte.delivered_packets,
            "lte_dropped_packets": lte.dropped_packets,
            "wlan_arrived_bits": self.wlan_arrived_bits,
            "wlan_delivered_bits": self.wlan_delivered_bits,
            "wlan_arrived_packets": sum(s.arrivals for s in self.stations.values()),
            "wlan_delivered_packets": sum(s.delivered for s in self.stations.values()),
            "wlan_dropped_packets": sum(s.dcf.dropped for s in self.stations.values()),
            "wlan_queued_packets": sum(len(s.dcf.queue) for s in self.stations.values()),
        }
        return DropResult(
            seed=self.seed,
            cycles=list(self.records),
            lte_bits=sum(r.lte_bits for r in self.records),
            wlan_bits=sum(r.wlan_bits for r in self.records),
            t_c_ms=self.config.coexistence.t_c_ms,
            counters=counters,
        )

    # -- link helpers ------------------------------------------------------

    def lte_sinr(self, user: int, interferers: FrozenSet[int]) -> float:
        key = (user, interferers)
        v = self._sinr_cache.get(key)
        if v is None:
            v = sinr_at(self.rx, user, self.pico, interferers | {self.pico}, self.noise)
            self._sinr_cache[key] = v
        return v

    def _mcs_for(self, user: int) -> int:
        return select_mcs(self._samples[user], self.now, self.mcs_table, self.lag_us)

    # -- LTE subframes -----------------------------------------------------

    def _on_subframe(self, ev: Event) -> None:
        t = ev.time
        if t > 0:
            self._close_subframe(t)
        if t > 0 and t % self.t_c_us == 0:
            self._on_cycle(t)
        if t >= self.duration_us:
            self.done = True
            return
        self._open_subframe(t)
        self._sense_all(t)
        self.schedule(t + SUBFRAME_US, Kind.SUBFRAME_BOUNDARY)

    def _open_subframe(self, t: int) -> None:
        self.sf_start = t
        if not self.lte_on:
            self.sf_action = None
            return
        lte = self.lte_state
        users = self.lte_users
        for _ in self.lte_source.arrivals_until(t):
            if users:
                lte.enqueue(next(self._lte_rr), self.lte_source.packet_bits)
        if self.full_buffer:
            self._top_up()
        self.sf_action = lte_subframe_action(t, self.pattern)
        aps_on = {a for a in self.active if a != self.pico}
        self.sf_interferers = set(aps_on)
        if self.sf_action is SubframeAction.MUTE:
            self.sf_cca = self._pico_cca[frozenset(aps_on)]
            return
        if lte.begin_subframe(self._mcs_for) or self.occupy_idle:
            self.pico_on = True
            self.active.add(self.pico)
            for st in self.stations.values():
                if st.frame is not None and st.frame.data_end > t:
                    st.frame.interferers.add(self.pico)

    def _top_up(self) -> None:
        lte = self.lte_state
        need = self.mcs_table.tbs_bits(len(self.mcs_table) - 1, lte.bandwidth_hz)
        for user in self.lte_users:
            while lte.backlog_bits(user) < need:
                lte.enqueue(user, self.lte_source.packet_bits)

    def _close_subframe(self, t: int) -> None:
        if self.sf_action is None:
            return
        if self.sf_action is SubframeAction.MUTE:
            coex.record_mute_subframe(self.ledger, self.sf_cca)
            return
        interferers = frozenset(self.sf_interferers)
        self.measurements.append((self.sf_start, interferers))
        if self.pico_on:
            bits = self.lte_state.end_subframe(lambda u: self.lte_sinr(u, interferers))
            self.cycle_lte_bits += bits
            self.pico_on = False
            self.active.discard(self.pico)

    def _on_cycle(self, t: int) -> None:
        idx = len(self.records)
        led = self.ledger
        spared = self.pattern.spared if self.lte_on else 0
        if self.mode == "adaptive":
            gamma = coex.load_ratio(led)
            self.pattern, self.ledger = coex.end_of_cycle(led, self.table)
        else:
            gamma = led.n_seize / led.n_listen if led.n_listen else 0.0
            self.ledger = coex.SensingLedger()
        t_c_ms = self.config.coexistence.t_c_ms
        self.records.append(CycleRecord(
            cycle_index=idx,
            lte_mbps=cycle_throughput(self.cycle_lte_bits, t_c_ms),
            wlan_mbps=cycle_throughput(self.cycle_wlan_bits, t_c_ms),
            spared_count=spared,
            gamma=gamma,
            n_seize=led.n_seize,
            n_listen=led.n_listen,
            lte_bits=self.cycle_lte_bits,
            wlan_bits=self.cycle_wlan_bits,
        ))
        self.cycle_lte_bits = 0
        self.cycle_wlan_bits = 0

    # -- WLAN --------------------------------------------------------------

    def _sense(self, st: _Station, t: int) -> None:
        """Re-evaluate one idle AP's channel and react to any transition."""
        if st.frame is not None:
            return
        others = frozenset(a for a in self.active if a != st.node)
        busy = self._ap_busy[st.node, others]
        was_busy = st.busy
        st.busy = busy
        dcf = st.dcf
        if dcf.phase not in (Phase.DIFS, Phase.BACKOFF):
            return
        if busy and not was_busy:
            st.version += 1
            dcf_idle_elapsed(dcf, t - st.idle_since, self.dcf)
            if dcf.phase is Phase.TRANSMITTING:
                # expired in the same slot another transmission began
                self._start_tx(st, t)
            else:
                freeze(dcf)
        elif not busy and was_busy:
            self._resume(st, t)

    def _resume(self, st: _Station, t: int) -> None:
        st.dcf.phase = Phase.DIFS
        st.idle_since = t
        st.version += 1
        self.schedule(t + time_to_transmit(st.dcf, self.dcf), Kind.WLAN_SLOT_TICK, (st.node, st.version))

    def _sense_all(self, t: int) -> None:
        for st in self.stations.values():
            self._sense(st, t)

    def _on_arrival(self, ev: Event) -> None:
        t = ev.time
        src = self.wlan_source
        for _ in src.arrivals_until(t):
            if self._wlan_rr is None:
                continue
            user = next(self._wlan_rr)
            st = self.stations[self.serving_ap[user]]
            st.dcf.queue.append(user)
            st.arrivals += 1
            self.wlan_arrived_bits += self.payload
            if st.dcf.phase is Phase.IDLE_NO_DATA:
                st.dcf.phase = Phase.DIFS
                if not st.busy:
                    self._resume(st, t)
        nt = src.next_time_us()
        if nt <= self.duration_us:
            self.schedule(int(nt), Kind.PACKET_ARRIVAL)

    def _on_slot_tick(self, ev: Event) -> None:
        node, version = ev.payload
        st = self.stations[node]
        if version != st.version:
            return
        dcf_idle_elapsed(st.dcf, ev.time - st.idle_since, self.dcf)
        if st.dcf.phase is not Phase.TRANSMITTING:
            raise RuntimeError(f"AP {node} backoff did not expire at {ev.time} us")
        self._start_tx(st, ev.time)

    def _start_tx(self, st: _Station, t: int) -> None:
        user = st.dcf.queue[0]
        data = data_airtime(self.payload, self.user_rate[user], self.dcf)
        end = t + data + self.dcf.sifs + self.dcf.ack_duration
        st.frame = _Frame(user, t, t + data, end, {a for a in self.active if a != st.node})
        st.version += 1
        for other in self.stations.values():
            if other.frame is not None and other is not st and other.frame.data_end > t:
                other.frame.interferers.add(st.node)
        self.active.add(st.node)
        if self.sf_action is not None:
            self.sf_interferers.add(st.node)
            if self.sf_action is SubframeAction.MUTE:
                aps_on = frozenset(a for a in self.active if a != self.pico)
                self.sf_cca = max(self.sf_cca, self._pico_cca[aps_on])
        self.schedule(t + data, Kind.TX_END, (st.node,))
        self.schedule(end, Kind.ACK_END, (st.node,))
        for other in self.stations.values():
            if other is not st:
                self._sense(other, t)

    def _on_tx_end(self, ev: Event) -> None:
        st = self.stations[ev.payload[0]]
        fr = st.frame
        if fr.interferers & self.wlan_set:
            fr.ok = False  # overlapping WLAN frames all fail
        else:
            sinr = sinr_at(self.rx, fr.user, st.node, fr.interferers | {st.node}, self.noise)
            fr.ok = sinr >= self.user_rate_threshold[fr.user]

    def _on_ack_end(self, ev: Event) -> None:
        t = ev.time
        st = self.stations[ev.payload[0]]
        fr = st.frame
        st.frame = None
        self.active.discard(st.node)
        if fr.ok:
            on_success(st.dcf, self.dcf, st.rng)
            st.delivered += 1
            self.wlan_delivered_bits += self.payload
            self.cycle_wlan_bits += self.payload
        else:
            on_collision(st.dcf, self.dcf, st.rng)
        if st.dcf.queue:
            freeze(st.dcf)
            st.busy = True  # forces _sense to treat a quiet channel as a fresh idle start
        else:
            st.dcf.phase = Phase.IDLE_NO_DATA
            st.busy = False
        self._sense_all(t)

    _handlers = {
        Kind.SUBFRAME_BOUNDARY: _on_subframe,
        Kind.PACKET_ARRIVAL: _on_arrival,
        Kind.WLAN_SLOT_TICK: _on_slot_tick,
        Kind.TX_END: _on_tx_end,
        Kind.ACK_END: _on_ack_end,
    }


def run_drop(config: RunConfig, seed: int) -> DropResult:
    """Simulate one drop; identical ``(config, seed)`` gives identical output."""
    return Simulation(config, seed).run()


@dataclass
class DropSummary:
    """Cross-drop aggregate of one run kind."""

    cycle_index: List[int]
    lte_mbps: List[float]
    wlan_mbps: List[float]
    spared_count: List[float]
    gamma: List[float]
    drop_lte_mbps: List[float]
    drop_wlan_mbps: List[float]
    mean_lte_mbps: float
    mean_wlan_mbps: float
    sem_lte_mbps: float
    sem_wlan_mbps: float
    loss_lte_pct: Optional[float] = None
    loss_wlan_pct: Optional[float] = None


def aggregate_drops(results: Sequence[DropResult], lte_baseline: Optional[float] = None,
                    wlan_baseline: Optional[float] = None) -> DropSummary:
    """Per-cycle and overall means across drops, plus losses against baselines.

    Baselines are mean throughputs (Mb/s) of the reference runs; a loss is
    reported only when its baseline is given and positive.
    """
    if not results:
        raise ValueError("need at least one drop result")
    n_cycles = {len(r.cycles) for r in results}
    if len(n_cycles) != 1:
        raise ValueError(f"drops have mismatched cycle counts: {sorted(n_cycles)}")

    def per_cycle(attr):
        arr = np.array([[getattr(c, attr) for c in r.cycles] for r in results], dtype=float)
        return arr.mean(axis=0).tolist()

    lte = [r.mean_lte_mbps for r in results]
    wlan = [r.mean_wlan_mbps for r in results]
    m_lte, se_lte = mean_and_sem(lte)
    m_wlan, se_wlan = mean_and_sem(wlan)
    return DropSummary(
        cycle_index=[c.cycle_index for c in results[0].cycles],
        lte_mbps=per_cycle("lte_mbps"),
        wlan_mbps=per_cycle("wlan_mbps"),
        spared_count=per_cycle("spared_count"),
        gamma=per_cycle("gamma"),
        drop_lte_mbps=lte,
        drop_wlan_mbps=wlan,
        mean_lte_mbps=m_lte,
        mean_wlan_mbps=m_wlan,
        sem_lte_mbps=se_lte,
        sem_wlan_mbps=se_wlan,
        loss_lte_pct=loss_percent(lte_baseline, m_lte) if lte_baseline else None,
        loss_wlan_pct=loss_percent(wlan_baseline, m_wlan) if wlan_baseline else None,
    )
