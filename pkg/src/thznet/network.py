"""Four-tier nanonetwork: node records, tier wiring and uplink routing."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .channel import FrequencyBand, LinkBudget, NoiseEnvironment, link_budget
from .constants import DEFAULT_GRID_STEP, DEFAULT_SNR_THRESHOLD
from .errors import DomainError, TopologyError, UnknownNodeError
from .medium import MediumSpec


class Tier(enum.IntEnum):
    NanoNode = 0
    NanoRouter = 1
    NanoMicroInterface = 2
    Gateway = 3

    @property
    def parent_tier(self) -> Optional["Tier"]:
        return None if self is Tier.Gateway else Tier(self + 1)


class Mode(str, enum.Enum):
    Active = "Active"
    Sleep = "Sleep"
    Off = "Off"


@dataclass(frozen=True)
class EnergyState:
    stored: float
    capacity: float
    harvest_rate: float = 0.0
    tx_cost_per_bit: float = 0.0
    rx_cost_per_bit: float = 0.0
    idle_power: float = 0.0

    def __post_init__(self):
        if not (0 <= self.stored <= self.capacity):
            raise ValueError(f"energy must satisfy 0 <= stored <= capacity, got {self.stored!r}/{self.capacity!r}")
        for name in ("harvest_rate", "tx_cost_per_bit", "rx_cost_per_bit", "idle_power"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class TierDefaults:
    tx_power: float  # W
    max_rate: float  # bit/s
    energy: EnergyState


# Nano-scale devices harvest and spend tiny budgets; the interface and gateway
# are treated as effectively mains powered.
TIER_DEFAULTS = {
    Tier.NanoNode: TierDefaults(0.1, 1e6, EnergyState(1e-6, 1e-6, 1e-9, 1e-12, 1e-13, 1e-10)),
    Tier.NanoRouter: TierDefaults(1.0, 1e7, EnergyState(1e-3, 1e-3, 1e-6, 1e-12, 1e-13, 1e-8)),
    Tier.NanoMicroInterface: TierDefaults(10.0, 1e8, EnergyState(1e3, 1e3, 1.0, 1e-12, 1e-13, 1e-3)),
    Tier.Gateway: TierDefaults(10.0, 1e9, EnergyState(1e3, 1e3, 1.0, 1e-12, 1e-13, 1e-3)),
}


@dataclass(frozen=True)
class NodeRecord:
    id: str
    tier: Tier
    position: tuple[float, float, float]
    tx_power: float
    energy: EnergyState
    mode: Mode = Mode.Active
    max_rate: float = math.inf

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(x) for x in self.position))
        if len(self.position) != 3:
            raise ValueError("position must be a 3-vector")
        if self.tx_power < 0:
            raise ValueError("tx_power must be >= 0")
        if not self.max_rate > 0:
            raise ValueError("max_rate must be > 0")

    def distance_to(self, other: "NodeRecord") -> float:
        return math.dist(self.position, other.position)


class Feasibility(NamedTuple):
    feasible: bool
    budget: LinkBudget


def link_feasible(
    src: NodeRecord,
    dst: NodeRecord,
    medium: MediumSpec,
    band: FrequencyBand,
    env: NoiseEnvironment,
    snr_threshold: float = DEFAULT_SNR_THRESHOLD,
    grid_step: float = DEFAULT_GRID_STEP,
) -> Feasibility:
    if src.id == dst.id:
        raise DomainError("a link needs two distinct nodes")
    if abs(src.tier - dst.tier) != 1:
        raise DomainError(f"{src.id} ({src.tier.name}) and {dst.id} ({dst.tier.name}) are not adjacent tiers")
    budget = link_budget(medium, env, band, src.distance_to(dst), src.tx_power, grid_step)
    return Feasibility(budget.snr >= snr_threshold, budget)


@dataclass(frozen=True)
class Topology:
    nodes: dict  # id -> NodeRecord
    parent: dict  # child id -> parent id
    links: dict = field(default_factory=dict)  # (src, dst) -> LinkBudget

    @property
    def gateway(self) -> str:
        return next(n.id for n in self.nodes.values() if n.tier is Tier.Gateway)

    def children(self, node_id: str) -> list[str]:
        return sorted(c for c, p in self.parent.items() if p == node_id)


def validate_topology(topology: Topology) -> Topology:
    """Check tier and parent invariants; returns the topology unchanged."""
    gateways = [n.id for n in topology.nodes.values() if n.tier is Tier.Gateway]
    if len(gateways) != 1:
        raise TopologyError(f"exactly one Gateway required, found {len(gateways)}")
    for node in topology.nodes.values():
        if node.tier is Tier.Gateway:
            if node.id in topology.parent:
                raise TopologyError(f"gateway {node.id} must not have a parent")
            continue
        pid = topology.parent.get(node.id)
        if pid is None:
            raise TopologyError(f"node {node.id} has no uplink parent")
        if pid not in topology.nodes:
            raise TopologyError(f"node {node.id} has unknown parent {pid}")
        if topology.nodes[pid].tier != node.tier.parent_tier:
            raise TopologyError(f"link {node.id}->{pid} does not join adjacent tiers")
    for src, dst in topology.links:
        if topology.parent.get(src) != dst:
            raise TopologyError(f"link {src}->{dst} is not an uplink in the hierarchy")
    return topology


_TIE_RTOL = 1e-9


def wire(
    nodes,
    medium: MediumSpec,
    band: FrequencyBand,
    env: NoiseEnvironment,
    snr_threshold: float = DEFAULT_SNR_THRESHOLD,
    grid_step: float = DEFAULT_GRID_STEP,
    max_children: Optional[int] = None,
) -> Topology:
    """Attach every node to its nearest feasible parent one tier up.

    Distances within a relative 1e-9 count as ties, broken by smallest id.
    A NanoRouter already holding ``max_children`` nano-nodes is skipped;
    the bound does not apply to interfaces or the gateway.
    """
    by_id = {}
    for n in nodes:
        if n.id in by_id:
            raise TopologyError(f"duplicate node id {n.id}")
        by_id[n.id] = n
    gateways = sorted(i for i, n in by_id.items() if n.tier is Tier.Gateway)
    if len(gateways) != 1:
        raise TopologyError(f"exactly one Gateway required, found {len(gateways)}: {gateways}")

    parent, links = {}, {}
    load = {i: 0 for i in by_id}
    for tier in (Tier.NanoNode, Tier.NanoRouter, Tier.NanoMicroInterface):
        uppers = [n for n in by_id.values() if n.tier is tier.parent_tier]
        for node in sorted((n for n in by_id.values() if n.tier is tier), key=lambda n: n.id):
            ranked = sorted(uppers, key=lambda u: (node.distance_to(u), u.id))
            chosen = None
            i = 0
            while i < len(ranked) and chosen is None:
                d0 = node.distance_to(ranked[i])
                j = i
                while j < len(ranked) and node.distance_to(ranked[j]) <= d0 * (1 + _TIE_RTOL):
                    j += 1
                group = sorted(ranked[i:j], key=lambda u: u.id)
                snr_blocked = False
                for cand in group:
                    if cand.tier is Tier.NanoRouter and max_children is not None and load[cand.id] >= max_children:
                        continue
                    verdict = link_feasible(node, cand, medium, band, env, snr_threshold, grid_step)
                    if verdict.feasible:
                        chosen = (cand, verdict.budget)
                        break
                    snr_blocked = True
                if snr_blocked and chosen is None:
                    # SNR only falls with distance, so no farther parent can work
                    break
                i = j
            if chosen is None:
                raise TopologyError(f"orphan node {node.id}: no feasible {tier.parent_tier.name} parent")
            cand, budget = chosen
            parent[node.id] = cand.id
            links[(node.id, cand.id)] = budget
            load[cand.id] += 1
    return validate_topology(Topology(by_id, parent, links))


def build_topology(scenario) -> Topology:
    return wire(
        scenario.nodes,
        scenario.medium,
        scenario.band,
        scenario.env,
        scenario.snr_threshold,
        scenario.grid_step,
        scenario.max_children,
    )


def route_uplink(topology: Topology, node_id: str) -> list[str]:
    if node_id not in topology.nodes:
        raise UnknownNodeError(node_id)
    path = [node_id]
    while topology.nodes[path[-1]].tier is not Tier.Gateway:
        path.append(topology.parent[path[-1]])
    return path
