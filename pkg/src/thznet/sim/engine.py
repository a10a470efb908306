"""Single-threaded discrete-event engine.

Events are ordered by (time, sequence). Every node owns one transmitter
and a FIFO queue; relaying is store-and-forward with ideal scheduling, so
a hop takes size / min(link capacity, sender max rate) seconds.

The one random stream (``random.Random(seed)``) is consumed in a fixed
order: the initial traffic offsets for every source in id order, then
draws made by handlers as events execute.
"""
from __future__ import annotations

import enum
import heapq
import random
from collections import deque
from dataclasses import replace
from typing import TYPE_CHECKING, Any, NamedTuple, Optional

from ..errors import InvariantViolation, ScenarioError, TopologyError
from ..network import Mode, NodeRecord, Tier, Topology, build_topology, route_uplink
from .commands import BROADCAST, Command, apply_command
from .energy import IDLE, OFF, SLEEP, Rx, Tx, activity_cost, energy_step
from .report import MetricsReport, Packet

if TYPE_CHECKING:
    from ..scenario import Scenario


class EventKind(enum.IntEnum):
    Sense = 0
    TransmitStart = 1
    ReceiveComplete = 2
    Command = 3
    HarvestTick = 4
    MetricsFlush = 5


class Event(NamedTuple):
    time: float
    sequence: int
    kind: EventKind
    payload: Any


class DropReason(str, enum.Enum):
    CommandedOff = "CommandedOff"
    EnergyExhausted = "EnergyExhausted"
    NextHopOff = "NextHopOff"


_MODE_ACTIVITY = {Mode.Active: IDLE, Mode.Sleep: SLEEP, Mode.Off: OFF}


class _Node:
    __slots__ = (
        "record", "route", "queue", "busy", "tx_pending", "last_update",
        "consumed", "time_in_mode", "latest_value", "waiters",
    )

    def __init__(self, record: NodeRecord, route):
        self.record = record
        self.route = tuple(route)
        self.queue = deque()
        self.busy = False
        self.tx_pending = False
        self.last_update = 0.0
        self.consumed = 0.0
        self.time_in_mode = {m.value: 0.0 for m in Mode}
        self.latest_value: Optional[float] = None
        self.waiters: set[str] = set()


class Simulation:
    def __init__(self, scenario: Scenario, topology: Topology, seed: int, observer=None):
        self.scenario = scenario
        self.observer = observer  # called as observer(sim, event) after each event
        self.topology = topology
        self.seed = seed
        self.rng = random.Random(seed)
        self.now = 0.0
        self._seq = 0
        self._heap: list[Event] = []
        self.nodes = {nid: _Node(rec, route_uplink(topology, nid)) for nid, rec in sorted(topology.nodes.items())}
        self.rates = {
            link: min(budget.capacity, topology.nodes[link[0]].max_rate)
            for link, budget in topology.links.items()
        }
        self.busy_time = {link: 0.0 for link in topology.links}
        self.packets: list[Packet] = []
        self.delivered = 0
        self.dropped: dict[str, int] = {}
        self.ignored_commands = 0
        self.latency_sum = 0.0
        self.latency_max: Optional[float] = None
        self.events_processed = 0
        self.sleep_factor = scenario.sleep_power_factor
        h = scenario.horizon
        self.harvest_tick = scenario.harvest_tick or h / 100.0
        self.flush_interval = scenario.flush_interval or h / 10.0

    # -- scheduling ------------------------------------------------------------

    def schedule(self, time: float, kind: EventKind, payload=None):
        if time < self.now:
            raise InvariantViolation(f"{kind.name} scheduled at {time!r} before now={self.now!r}")
        self._seq += 1
        heapq.heappush(self._heap, Event(time, self._seq, kind, payload))

    def _schedule_if_within(self, time, kind, payload=None):
        if time <= self.scenario.horizon:
            self.schedule(time, kind, payload)

    # -- energy ----------------------------------------------------------------

    def _set_energy(self, node: _Node, state):
        if not (0.0 <= state.stored <= state.capacity):
            raise InvariantViolation(f"energy bound violated at {node.record.id}: {state.stored!r}")
        node.record = replace(node.record, energy=state)

    def _draw(self, node: _Node, dt: float, activity) -> None:
        state = node.record.energy
        available = state.stored + state.harvest_rate * dt
        node.consumed += min(activity_cost(state, dt, activity, self.sleep_factor), available)
        self._set_energy(node, energy_step(state, dt, activity, self.sleep_factor))

    def advance(self, node: _Node):
        dt = self.now - node.last_update
        if dt > 0:
            mode = node.record.mode
            self._draw(node, dt, _MODE_ACTIVITY[mode])
            node.time_in_mode[mode.value] += dt
        node.last_update = self.now

    # -- packets ---------------------------------------------------------------

    def _new_packet(self, node: _Node):
        pkt = Packet(
            len(self.packets), node.record.id, self.now, self.scenario.traffic.packet_size,
            node.route, node.latest_value,
        )
        self.packets.append(pkt)
        self._enqueue(node, pkt)

    def _drop(self, pkt: Packet, reason: DropReason):
        pkt.drop(reason.value)
        self.dropped[reason.value] = self.dropped.get(reason.value, 0) + 1

    def _enqueue(self, node: _Node, pkt: Packet):
        node.queue.append(pkt)
        self._kick(node)

    def _kick(self, node: _Node):
        if node.queue and not node.busy and not node.tx_pending and node.record.mode is Mode.Active:
            node.tx_pending = True
            self.schedule(self.now, EventKind.TransmitStart, node.record.id)

    # -- handlers --------------------------------------------------------------

    def _on_sense(self, nid):
        node = self.nodes[nid]
        if node.record.mode is Mode.Active:
            node.latest_value = self.rng.random()
            self._new_packet(node)
        t = self.scenario.traffic
        if t.model == "periodic":
            gap = t.interval + (t.jitter * self.rng.random() if t.jitter > 0 else 0.0)
        else:
            gap = self.rng.expovariate(t.rate)
        self._schedule_if_within(self.now + gap, EventKind.Sense, nid)

    def _on_transmit_start(self, nid):
        node = self.nodes[nid]
        node.tx_pending = False
        if node.busy or node.record.mode is not Mode.Active:
            return
        while node.queue:
            pkt = node.queue[0]
            nxt = self.nodes[pkt.path[pkt.hop + 1]]
            if nxt.record.mode is Mode.Off:
                node.queue.popleft()
                self._drop(pkt, DropReason.NextHopOff)
                continue
            if nxt.record.mode is Mode.Sleep:
                nxt.waiters.add(nid)
                return
            self.advance(node)
            cost = pkt.size * node.record.energy.tx_cost_per_bit
            if cost > node.record.energy.stored:
                node.queue.popleft()
                self._drop(pkt, DropReason.EnergyExhausted)
                continue
            node.queue.popleft()
            self._draw(node, 0.0, Tx(pkt.size))
            link = (nid, nxt.record.id)
            duration = pkt.size / self.rates[link]
            self.busy_time[link] += min(duration, self.scenario.horizon - self.now)
            node.busy = True
            self.schedule(self.now + duration, EventKind.ReceiveComplete, (pkt, nid, nxt.record.id))
            return

    def _on_receive_complete(self, payload):
        pkt, src_id, dst_id = payload
        src, dst = self.nodes[src_id], self.nodes[dst_id]
        src.busy = False
        self._kick(src)
        if dst.record.mode is Mode.Off:
            self._drop(pkt, DropReason.NextHopOff)
            return
        self.advance(dst)
        if pkt.size * dst.record.energy.rx_cost_per_bit > dst.record.energy.stored:
            self._drop(pkt, DropReason.EnergyExhausted)
            return
        self._draw(dst, 0.0, Rx(pkt.size))
        pkt.hop += 1
        if dst.record.tier is Tier.Gateway:
            pkt.deliver(self.now)
            self.delivered += 1
            latency = self.now - pkt.created_at
            self.latency_sum += latency
            self.latency_max = latency if self.latency_max is None else max(self.latency_max, latency)
        else:
            self._enqueue(dst, pkt)

    def _targets(self, cmd: Command):
        if cmd.target == BROADCAST:
            return [n for nid, n in self.nodes.items() if n.record.tier is Tier.NanoNode]
        return [self.nodes[cmd.target]]

    def _on_command(self, cmd: Command):
        for node in self._targets(cmd):
            self.advance(node)
            before = node.record.mode
            outcome = apply_command(node.record, cmd)
            node.record = outcome.node
            if outcome.ignored:
                self.ignored_commands += 1
            if outcome.drop_queue:
                while node.queue:
                    self._drop(node.queue.popleft(), DropReason.CommandedOff)
            if outcome.emit_reading:
                self._new_packet(node)
            if node.record.mode is not before and node.record.mode is not Mode.Sleep:
                self._kick(node)
                # held children retry: they transmit if we woke, drop if we went Off
                for wid in sorted(node.waiters):
                    self._kick(self.nodes[wid])
                node.waiters.clear()

    def _on_harvest_tick(self, _):
        for node in self.nodes.values():
            self.advance(node)
        self._schedule_if_within(self.now + self.harvest_tick, EventKind.HarvestTick)

    def in_flight(self) -> int:
        return sum(1 for p in self.packets if p.status == "InFlight")

    def check_conservation(self):
        generated = len(self.packets)
        dropped = sum(self.dropped.values())
        in_flight = self.in_flight()
        if generated != self.delivered + dropped + in_flight:
            raise InvariantViolation(
                f"packet conservation: {generated} != {self.delivered} + {dropped} + {in_flight}"
            )

    def _on_metrics_flush(self, _):
        self.check_conservation()
        self._schedule_if_within(self.now + self.flush_interval, EventKind.MetricsFlush)

    # -- main loop -------------------------------------------------------------

    def _prime(self):
        sc = self.scenario
        t = sc.traffic
        for sid in sc.source_ids():
            if t.model == "periodic":
                first = t.start + t.interval * self.rng.random()
            else:
                first = t.start + self.rng.expovariate(t.rate)
            self._schedule_if_within(first, EventKind.Sense, sid)
        for sc_cmd in sc.commands:
            self._schedule_if_within(sc_cmd.time, EventKind.Command, sc_cmd.command)
        self._schedule_if_within(self.harvest_tick, EventKind.HarvestTick)
        self._schedule_if_within(self.flush_interval, EventKind.MetricsFlush)

    def run(self) -> MetricsReport:
        handlers = {
            EventKind.Sense: self._on_sense,
            EventKind.TransmitStart: self._on_transmit_start,
            EventKind.ReceiveComplete: self._on_receive_complete,
            EventKind.Command: self._on_command,
            EventKind.HarvestTick: self._on_harvest_tick,
            EventKind.MetricsFlush: self._on_metrics_flush,
        }
        self._prime()
        heap = self._heap
        horizon = self.scenario.horizon
        while heap and heap[0].time <= horizon:
            ev = heapq.heappop(heap)
            self.now = ev.time
            handlers[ev.kind](ev.payload)
            self.events_processed += 1
            if self.observer is not None:
                self.observer(self, ev)
        self.now = self.scenario.horizon
        for node in self.nodes.values():
            self.advance(node)
        self.check_conservation()
        return self._report()

    def _report(self) -> MetricsReport:
        h = self.scenario.horizon
        return MetricsReport(
            seed=self.seed,
            horizon=h,
            generated=len(self.packets),
            delivered=self.delivered,
            in_flight=self.in_flight(),
            dropped_by_reason=dict(sorted(self.dropped.items())),
            latency_mean=self.latency_sum / self.delivered if self.delivered else None,
            latency_max=self.latency_max,
            ignored_commands=self.ignored_commands,
            events_processed=self.events_processed,
            energy_consumed={nid: n.consumed for nid, n in self.nodes.items()},
            energy_stored={nid: n.record.energy.stored for nid, n in self.nodes.items()},
            time_in_mode={nid: dict(n.time_in_mode) for nid, n in self.nodes.items()},
            link_utilization={f"{s}->{d}": self.busy_time[(s, d)] / h for s, d in sorted(self.busy_time)},
            packets=list(self.packets),
        )


def prepare(scenario: Scenario) -> Topology:
    """Validate ``scenario`` and wire its topology, raising ScenarioError on any problem."""
    from ..scenario import validate_scenario

    problems = validate_scenario(scenario)
    if problems:
        raise ScenarioError(problems)
    try:
        return build_topology(scenario)
    except TopologyError as exc:
        raise ScenarioError([str(exc)]) from None


def run(scenario: Scenario, seed: Optional[int] = None, topology: Optional[Topology] = None,
        observer=None) -> MetricsReport:
    """Execute ``scenario`` to its horizon; ``seed`` overrides the scenario's seed."""
    if topology is None:
        topology = prepare(scenario)
    seed = scenario.seed if seed is None else seed
    return Simulation(scenario, topology, seed, observer).run()
