"""Scenario files: JSON documents describing a nanonetwork run.

Unknown keys are rejected at every level, and validation reports every
violated constraint at once through :class:`ScenarioError`.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .channel import FrequencyBand, NoiseEnvironment
from .constants import (
    DEFAULT_ELECTRONIC_NOISE_TEMPERATURE,
    DEFAULT_GRID_STEP,
    DEFAULT_REFERENCE_TEMPERATURE,
    DEFAULT_SLEEP_POWER_FACTOR,
    DEFAULT_SNR_THRESHOLD,
)
from .errors import MediumParseError, ScenarioError
from .medium import MediumSpec, load_medium
from .network import TIER_DEFAULTS, EnergyState, Mode, NodeRecord, Tier
from .sim.commands import BROADCAST, Command, CommandKind

TRAFFIC_MODELS = ("none", "periodic", "poisson")


@dataclass(frozen=True)
class TrafficSpec:
    """Synthetic sensing traffic.

    ``periodic``: first reading at start + U(0, interval), then every
    interval + U(0, jitter). ``poisson``: exponential gaps at ``rate``.
    ``sources`` of None means every NanoNode.
    """

    model: str = "none"
    packet_size: float = 1000.0  # bit
    interval: float = 1.0  # s
    jitter: float = 0.0  # s
    rate: float = 1.0  # 1/s
    start: float = 0.0  # s
    sources: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class ScheduledCommand:
    time: float
    command: Command


@dataclass(frozen=True)
class Scenario:
    medium: MediumSpec
    band: FrequencyBand
    nodes: tuple[NodeRecord, ...]
    horizon: float
    env: NoiseEnvironment = NoiseEnvironment()
    traffic: TrafficSpec = TrafficSpec()
    commands: tuple[ScheduledCommand, ...] = ()
    seed: int = 0
    snr_threshold: float = DEFAULT_SNR_THRESHOLD
    grid_step: float = DEFAULT_GRID_STEP
    max_children: Optional[int] = None
    sleep_power_factor: float = DEFAULT_SLEEP_POWER_FACTOR
    harvest_tick: Optional[float] = None  # s; None -> horizon / 100
    flush_interval: Optional[float] = None  # s; None -> horizon / 10
    medium_ref: str = field(default="", compare=False)

    def source_ids(self) -> list[str]:
        if self.traffic.model == "none":
            return []
        if self.traffic.sources is None:
            return sorted(n.id for n in self.nodes if n.tier is Tier.NanoNode)
        return sorted(self.traffic.sources)


def make_node(node_id, tier, position, *, tx_power=None, max_rate=None, mode=Mode.Active, **energy) -> NodeRecord:
    """NodeRecord with tier defaults for anything not given.

    ``energy`` keys are EnergyState field names; ``stored`` defaults to the
    (possibly overridden) capacity.
    """
    tier = Tier[tier] if isinstance(tier, str) else tier
    defaults = TIER_DEFAULTS[tier]
    base = defaults.energy
    if "capacity" in energy and "stored" not in energy:
        energy["stored"] = energy["capacity"]
    return NodeRecord(
        node_id,
        tier,
        tuple(position),
        defaults.tx_power if tx_power is None else tx_power,
        replace(base, **energy),
        Mode(mode),
        defaults.max_rate if max_rate is None else max_rate,
    )


def validate_scenario(scenario: Scenario) -> list[str]:
    problems = []
    if not scenario.horizon > 0:
        problems.append(f"horizon_s must be > 0, got {scenario.horizon!r}")
    ids = [n.id for n in scenario.nodes]
    seen = set()
    for i in ids:
        if i in seen:
            problems.append(f"duplicate node id {i!r}")
        seen.add(i)
    gateways = [n.id for n in scenario.nodes if n.tier is Tier.Gateway]
    if len(gateways) != 1:
        problems.append(f"exactly one Gateway required, found {len(gateways)}")
    tiers = {n.id: n.tier for n in scenario.nodes}
    t = scenario.traffic
    if t.model not in TRAFFIC_MODELS:
        problems.append(f"traffic.model must be one of {TRAFFIC_MODELS}, got {t.model!r}")
    if not t.packet_size > 0:
        problems.append("traffic.packet_size_bits must be > 0")
    if t.model == "periodic" and not t.interval > 0:
        problems.append("traffic.interval_s must be > 0")
    if t.jitter < 0:
        problems.append("traffic.jitter_s must be >= 0")
    if t.model == "poisson" and not t.rate > 0:
        problems.append("traffic.rate_hz must be > 0")
    if t.start < 0:
        problems.append("traffic.start_s must be >= 0")
    for s in t.sources or ():
        if s not in tiers:
            problems.append(f"traffic.sources: unknown node {s!r}")
        elif tiers[s] is Tier.Gateway:
            problems.append(f"traffic.sources: gateway {s!r} cannot originate packets")
    for i, sc in enumerate(scenario.commands):
        if sc.time < 0:
            problems.append(f"commands[{i}].time_s must be >= 0")
        if sc.command.target != BROADCAST and sc.command.target not in tiers:
            problems.append(f"commands[{i}].target: unknown node {sc.command.target!r}")
    if scenario.snr_threshold < 0:
        problems.append("snr_threshold must be >= 0")
    if not scenario.grid_step > 0:
        problems.append("grid_step_hz must be > 0")
    elif scenario.grid_step > scenario.band.width:
        problems.append("grid_step_hz must not exceed the band width")
    if scenario.max_children is not None and scenario.max_children < 1:
        problems.append("max_children must be >= 1")
    if not 0 <= scenario.sleep_power_factor <= 1:
        problems.append("sleep_power_factor must lie in [0, 1]")
    for name in ("harvest_tick", "flush_interval"):
        v = getattr(scenario, name)
        if v is not None and not v > 0:
            problems.append(f"{name}_s must be > 0")
    return problems


# -- JSON document -------------------------------------------------------------

_TOP = {
    "medium", "band", "env", "nodes", "traffic", "commands", "horizon_s", "seed",
    "snr_threshold", "grid_step_hz", "max_children", "sleep_power_factor",
    "harvest_tick_s", "flush_interval_s",
}
_BAND = {"f_low_hz", "f_high_hz"}
_ENV = {"reference_temperature_k", "electronic_noise_temperature_k"}
_NODE = {"id", "tier", "position_m", "tx_power_w", "max_rate_bps", "mode", "energy"}
_ENERGY = {
    "stored_j": "stored",
    "capacity_j": "capacity",
    "harvest_rate_w": "harvest_rate",
    "tx_cost_per_bit_j": "tx_cost_per_bit",
    "rx_cost_per_bit_j": "rx_cost_per_bit",
    "idle_power_w": "idle_power",
}
_TRAFFIC = {
    "model": "model",
    "packet_size_bits": "packet_size",
    "interval_s": "interval",
    "jitter_s": "jitter",
    "rate_hz": "rate",
    "start_s": "start",
    "sources": "sources",
}
_COMMAND = {"time_s", "kind", "target"}


class _Collector:
    def __init__(self):
        self.problems = []

    def keys(self, doc, allowed, where, required=()):
        if not isinstance(doc, dict):
            self.problems.append(f"{where}: expected an object")
            return False
        for k in sorted(set(doc) - set(allowed)):
            self.problems.append(f"{where}: unknown key {k!r}")
        for k in required:
            if k not in doc:
                self.problems.append(f"{where}: missing required key {k!r}")
        return True

    def number(self, doc, key, where, default=None):
        if key not in doc:
            return default
        v = doc[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.problems.append(f"{where}.{key}: expected a finite number, got {v!r}")
            return default
        return float(v)


def scenario_from_dict(doc, base_dir=None) -> Scenario:
    c = _Collector()
    if not c.keys(doc, _TOP, "scenario", required=("medium", "band", "nodes", "horizon_s")):
        raise ScenarioError(c.problems)

    medium, medium_ref = None, ""
    if isinstance(doc.get("medium"), str):
        medium_ref = doc["medium"]
        try:
            medium = load_medium(medium_ref, base_dir)
        except (OSError, MediumParseError) as exc:
            c.problems.append(f"medium: cannot load {medium_ref!r}: {exc}")
    elif "medium" in doc:
        c.problems.append("medium: expected a file path or builtin:<name> string")

    band = None
    if "band" in doc and c.keys(doc["band"], _BAND, "band", required=tuple(sorted(_BAND))):
        lo = c.number(doc["band"], "f_low_hz", "band")
        hi = c.number(doc["band"], "f_high_hz", "band")
        if lo is not None and hi is not None:
            if 0 < lo < hi:
                band = FrequencyBand(lo, hi)
            else:
                c.problems.append(f"band: need 0 < f_low_hz < f_high_hz, got {lo!r}, {hi!r}")

    env = NoiseEnvironment()
    if "env" in doc and c.keys(doc["env"], _ENV, "env"):
        t0 = c.number(doc["env"], "reference_temperature_k", "env", DEFAULT_REFERENCE_TEMPERATURE)
        te = c.number(doc["env"], "electronic_noise_temperature_k", "env", DEFAULT_ELECTRONIC_NOISE_TEMPERATURE)
        if t0 < 0 or te < 0:
            c.problems.append("env: temperatures must be >= 0 K")
        else:
            env = NoiseEnvironment(t0, te)

    nodes = []
    raw_nodes = doc.get("nodes", [])
    if not isinstance(raw_nodes, list):
        c.problems.append("nodes: expected a list")
        raw_nodes = []
    for i, nd in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        if not c.keys(nd, _NODE, where, required=("id", "tier", "position_m")):
            continue
        before = len(c.problems)
        nid = nd.get("id")
        if not isinstance(nid, str) or not nid or nid == BROADCAST:
            c.problems.append(f"{where}.id: expected a non-empty string other than {BROADCAST!r}")
        tier = nd.get("tier")
        if tier not in Tier.__members__:
            c.problems.append(f"{where}.tier: must be one of {list(Tier.__members__)}, got {tier!r}")
        pos = nd.get("position_m")
        if not (isinstance(pos, list) and len(pos) == 3 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) for x in pos
        )):
            c.problems.append(f"{where}.position_m: expected three finite numbers")
        mode = nd.get("mode", "Active")
        if mode not in Mode.__members__:
            c.problems.append(f"{where}.mode: must be one of {list(Mode.__members__)}, got {mode!r}")
        tx = c.number(nd, "tx_power_w", where)
        if tx is not None and tx < 0:
            c.problems.append(f"{where}.tx_power_w must be >= 0")
        rate = c.number(nd, "max_rate_bps", where)
        if rate is not None and not rate > 0:
            c.problems.append(f"{where}.max_rate_bps must be > 0")
        energy = {}
        if "energy" in nd and c.keys(nd["energy"], _ENERGY, f"{where}.energy"):
            for key, attr in _ENERGY.items():
                v = c.number(nd["energy"], key, f"{where}.energy")
                if v is not None:
                    if v < 0:
                        c.problems.append(f"{where}.energy.{key} must be >= 0")
                    energy[attr] = v
        if len(c.problems) > before:
            continue
        try:
            nodes.append(make_node(nid, tier, pos, tx_power=tx, max_rate=rate, mode=mode, **energy))
        except ValueError as exc:
            c.problems.append(f"{where}: {exc}")

    traffic = TrafficSpec()
    if "traffic" in doc and c.keys(doc["traffic"], _TRAFFIC, "traffic"):
        td = doc["traffic"]
        kw = {}
        for key, attr in _TRAFFIC.items():
            if key in ("model", "sources") or key not in td:
                continue
            v = c.number(td, key, "traffic")
            if v is not None:
                kw[attr] = v
        if "model" in td:
            kw["model"] = td["model"]
        if "sources" in td:
            src = td["sources"]
            if isinstance(src, list) and all(isinstance(s, str) for s in src):
                kw["sources"] = tuple(src)
            else:
                c.problems.append("traffic.sources: expected a list of node ids")
        traffic = TrafficSpec(**kw)

    commands = []
    raw_cmds = doc.get("commands", [])
    if not isinstance(raw_cmds, list):
        c.problems.append("commands: expected a list")
        raw_cmds = []
    for i, cd in enumerate(raw_cmds):
        where = f"commands[{i}]"
        if not c.keys(cd, _COMMAND, where, required=("time_s", "kind")):
            continue
        t = c.number(cd, "time_s", where)
        kind = cd.get("kind")
        if kind not in CommandKind.__members__:
            c.problems.append(f"{where}.kind: must be one of {list(CommandKind.__members__)}, got {kind!r}")
            continue
        target = cd.get("target", BROADCAST)
        if not isinstance(target, str):
            c.problems.append(f"{where}.target: expected a node id or {BROADCAST!r}")
            continue
        if t is not None:
            commands.append(ScheduledCommand(t, Command(CommandKind(kind), target)))

    horizon = c.number(doc, "horizon_s", "scenario", 0.0)
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        c.problems.append(f"seed: expected a non-negative integer, got {seed!r}")
        seed = 0
    max_children = doc.get("max_children")
    if max_children is not None and (isinstance(max_children, bool) or not isinstance(max_children, int)):
        c.problems.append("max_children: expected an integer or null")
        max_children = None

    if medium is None or band is None:
        if not c.problems:
            c.problems.append("scenario: medium and band are required")
        raise ScenarioError(c.problems)

    scenario = Scenario(
        medium=medium,
        band=band,
        nodes=tuple(nodes),
        horizon=horizon,
        env=env,
        traffic=traffic,
        commands=tuple(commands),
        seed=seed,
        snr_threshold=c.number(doc, "snr_threshold", "scenario", DEFAULT_SNR_THRESHOLD),
        grid_step=c.number(doc, "grid_step_hz", "scenario", DEFAULT_GRID_STEP),
        max_children=max_children,
        sleep_power_factor=c.number(doc, "sleep_power_factor", "scenario", DEFAULT_SLEEP_POWER_FACTOR),
        harvest_tick=c.number(doc, "harvest_tick_s", "scenario"),
        flush_interval=c.number(doc, "flush_interval_s", "scenario"),
        medium_ref=medium_ref,
    )
    problems = c.problems + validate_scenario(scenario)
    if problems:
        raise ScenarioError(problems)
    return scenario


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError([f"{path}: malformed JSON: {exc}"]) from None
    return scenario_from_dict(doc, base_dir=path.parent)


def scenario_to_dict(scenario: Scenario, medium_ref: Optional[str] = None) -> dict:
    """Inverse of :func:`scenario_from_dict`.

    The medium is written as ``medium_ref`` (or the reference it was loaded
    from); an inline medium has no file form, so a reference is required.
    """
    ref = medium_ref or scenario.medium_ref
    if not ref:
        raise ValueError("scenario_to_dict needs a medium reference")
    doc = {
        "medium": ref,
        "band": {"f_low_hz": scenario.band.f_low, "f_high_hz": scenario.band.f_high},
        "env": {
            "reference_temperature_k": scenario.env.reference_temperature,
            "electronic_noise_temperature_k": scenario.env.electronic_noise_temperature,
        },
        "nodes": [
            {
                "id": n.id,
                "tier": n.tier.name,
                "position_m": list(n.position),
                "tx_power_w": n.tx_power,
                "max_rate_bps": n.max_rate,
                "mode": n.mode.value,
                "energy": {key: getattr(n.energy, attr) for key, attr in _ENERGY.items()},
            }
            for n in scenario.nodes
        ],
        "traffic": {
            key: (list(getattr(scenario.traffic, attr)) if attr == "sources" else getattr(scenario.traffic, attr))
            for key, attr in _TRAFFIC.items()
            if not (attr == "sources" and scenario.traffic.sources is None)
        },
        "commands": [
            {"time_s": sc.time, "kind": sc.command.kind.value, "target": sc.command.target}
            for sc in scenario.commands
        ],
        "horizon_s": scenario.horizon,
        "seed": scenario.seed,
        "snr_threshold": scenario.snr_threshold,
        "grid_step_hz": scenario.grid_step,
        "max_children": scenario.max_children,
        "sleep_power_factor": scenario.sleep_power_factor,
    }
    if scenario.harvest_tick is not None:
        doc["harvest_tick_s"] = scenario.harvest_tick
    if scenario.flush_interval is not None:
        doc["flush_interval_s"] = scenario.flush_interval
    return doc


__all__ = [
    "Scenario",
    "ScheduledCommand",
    "TrafficSpec",
    "load_scenario",
    "make_node",
    "scenario_from_dict",
    "scenario_to_dict",
    "validate_scenario",
]
