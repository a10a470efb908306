import dataclasses
import json
import random

import pytest

from conftest import SCENARIOS, random_scenario
from thznet.errors import InvariantViolation, ScenarioError
from thznet.network import EnergyState, Mode, Tier
from thznet.scenario import ScheduledCommand, TrafficSpec, load_scenario, make_node
from thznet.sim import (
    IDLE,
    SLEEP,
    Command,
    CommandKind,
    EventKind,
    Rx,
    Simulation,
    Tx,
    apply_command,
    energy_step,
    prepare,
    run,
)


# -- energy --------------------------------------------------------------------

STATE = EnergyState(stored=1.0, capacity=4.0, harvest_rate=0.5, tx_cost_per_bit=0.25, rx_cost_per_bit=0.125, idle_power=0.1)


def test_energy_dt_zero_unchanged():
    assert energy_step(STATE, 0.0, IDLE) == STATE


def test_energy_clamps_at_capacity():
    assert energy_step(STATE, 100.0, IDLE).stored == 4.0


def test_energy_tx_boundary_hits_zero_exactly():
    # 8 bits * 0.25 J/bit == 1.0 J stored + 0.5 W * 2 s harvested
    assert energy_step(STATE, 2.0, Tx(8)).stored == 0.0


def test_energy_idle_and_sleep_draw():
    assert energy_step(STATE, 2.0, IDLE).stored == pytest.approx(1.0 + 1.0 - 0.2)
    assert energy_step(STATE, 2.0, SLEEP, sleep_factor=0.01).stored == pytest.approx(1.0 + 1.0 - 0.002)
    assert energy_step(STATE, 0.0, Rx(4)).stored == pytest.approx(0.5)


def test_energy_never_negative():
    assert energy_step(STATE, 0.0, Tx(1000)).stored == 0.0
    with pytest.raises(ValueError):
        energy_step(STATE, -1.0)


# -- commands ------------------------------------------------------------------

NODE = make_node("n", "NanoNode", (0, 0, 0))


@pytest.mark.parametrize(
    "start, kind, mode, emit, drop, ignored",
    [
        (Mode.Active, CommandKind.Sleep, Mode.Sleep, False, False, False),
        (Mode.Sleep, CommandKind.On, Mode.Active, False, False, False),
        (Mode.Active, CommandKind.Off, Mode.Off, False, True, False),
        (Mode.Off, CommandKind.On, Mode.Active, False, False, False),
        (Mode.Active, CommandKind.ReadValue, Mode.Active, True, False, False),
        (Mode.Off, CommandKind.ReadValue, Mode.Off, False, False, True),
        (Mode.Sleep, CommandKind.ReadValue, Mode.Sleep, False, False, True),
        (Mode.Off, CommandKind.Sleep, Mode.Off, False, False, True),
    ],
)
def test_apply_command(start, kind, mode, emit, drop, ignored):
    out = apply_command(dataclasses.replace(NODE, mode=start), Command(kind, "n"))
    assert (out.node.mode, out.emit_reading, out.drop_queue, out.ignored) == (mode, emit, drop, ignored)


# -- engine --------------------------------------------------------------------


@pytest.fixture
def chain():
    return load_scenario(SCENARIOS / "minimal_chain.json")


def test_empty_traffic(chain):
    sc = dataclasses.replace(chain, traffic=TrafficSpec("none"))
    rep = run(sc)
    assert (rep.generated, rep.delivered, rep.dropped, rep.in_flight) == (0, 0, 0, 0)
    assert rep.latency_mean is None and rep.ignored_commands == 0
    assert all(v > 0 for v in rep.energy_consumed.values())  # idle draw only
    assert all(u == 0 for u in rep.link_utilization.values())
    for nid, modes in rep.time_in_mode.items():
        assert modes["Active"] == pytest.approx(sc.horizon)


def test_chain_latency_is_sum_of_hops(chain):
    top = prepare(chain)
    size = chain.traffic.packet_size
    expected = 0.0
    for src, dst in [("n1", "r1"), ("r1", "i1"), ("i1", "gw")]:
        rate = min(top.links[(src, dst)].capacity, top.nodes[src].max_rate)
        expected += size / rate
    # capacities are tens of Tbit/s, so the node rate caps bind
    assert expected == pytest.approx(1000 / 1e6 + 1000 / 1e7 + 1000 / 1e8, rel=1e-15)
    rep = run(chain, topology=top)
    assert rep.generated == 10 and rep.delivered == 10
    for p in rep.packets:
        assert p.delivered_at - p.created_at == pytest.approx(expected, abs=1e-9)
        assert p.hop == 3


def test_determinism(chain):
    sc = load_scenario(SCENARIOS / "intrabody_health.json")
    a, b = run(sc, 5), run(sc, 5)
    assert a.to_json() == b.to_json() and a.packets_csv() == b.packets_csv()
    assert run(sc, 6).to_json() != a.to_json()


def test_sleep_holds_then_on_releases(chain):
    cmds = (
        ScheduledCommand(0.0, Command(CommandKind.Sleep, "r1")),
        ScheduledCommand(5.0, Command(CommandKind.On, "r1")),
    )
    sc = dataclasses.replace(chain, commands=cmds)
    rep = run(sc)
    assert rep.delivered == rep.generated and rep.dropped == 0
    held = [p for p in rep.packets if p.created_at < 5.0]
    assert held and all(p.delivered_at >= 5.0 for p in held)
    assert rep.time_in_mode["r1"]["Sleep"] == pytest.approx(5.0)


def test_off_drops_queue_and_upstream(chain):
    cmds = (
        ScheduledCommand(0.0, Command(CommandKind.Sleep, "r1")),
        ScheduledCommand(3.0, Command(CommandKind.Off, "n1")),
        ScheduledCommand(4.0, Command(CommandKind.On, "n1")),
        ScheduledCommand(6.0, Command(CommandKind.Off, "r1")),
    )
    rep = run(dataclasses.replace(chain, commands=cmds))
    assert rep.delivered == 0
    assert rep.dropped_by_reason.get("CommandedOff", 0) >= 1
    assert rep.dropped_by_reason.get("NextHopOff", 0) >= 1
    assert rep.generated == rep.dropped + rep.in_flight


def test_read_value_and_ignored(chain):
    cmds = (
        ScheduledCommand(0.5, Command(CommandKind.ReadValue, "n1")),
        ScheduledCommand(2.0, Command(CommandKind.Off, "n1")),
        ScheduledCommand(2.5, Command(CommandKind.ReadValue, "n1")),
    )
    sc = dataclasses.replace(chain, traffic=dataclasses.replace(chain.traffic, model="none"), commands=cmds)
    rep = run(sc)
    assert rep.generated == 1 and rep.delivered == 1 and rep.ignored_commands == 1
    assert rep.packets[0].value is None  # never sensed before the request


def test_energy_exhaustion_drops():
    nodes = (
        make_node("n1", "NanoNode", (0, 0, 0), capacity=2e-9, harvest_rate=0.0, idle_power=0.0, tx_cost_per_bit=1e-12),
        make_node("r1", "NanoRouter", (1e-3, 0, 0)),
        make_node("i1", "NanoMicroInterface", (2e-3, 0, 0)),
        make_node("gw", "Gateway", (3e-3, 0, 0)),
    )
    chain = load_scenario(SCENARIOS / "minimal_chain.json")
    rep = run(dataclasses.replace(chain, nodes=nodes))
    # 2e-9 J pays for exactly two 1000-bit transmissions
    assert rep.delivered == 2
    assert rep.dropped_by_reason == {"EnergyExhausted": rep.generated - 2}
    assert rep.energy_stored["n1"] == pytest.approx(0.0, abs=1e-24)


def test_in_flight_at_horizon_reported(chain):
    slow = tuple(dataclasses.replace(n, max_rate=100.0) if n.id == "r1" else n for n in chain.nodes)
    rep = run(dataclasses.replace(chain, nodes=slow))  # 10 s per router hop
    assert rep.in_flight > 0 and rep.dropped == 0
    assert rep.generated == rep.delivered + rep.in_flight


def test_invalid_scenario_fails_before_events(chain):
    bad = dataclasses.replace(chain, horizon=0.0, nodes=chain.nodes + (make_node("gw2", "Gateway", (0, 0, 1)),))
    with pytest.raises(ScenarioError) as info:
        run(bad)
    msgs = " | ".join(info.value.violations)
    assert "horizon" in msgs and "Gateway" in msgs


def test_orphan_becomes_scenario_error(chain):
    far = chain.nodes + (make_node("lost", "NanoNode", (1.0, 1.0, 1.0)),)
    with pytest.raises(ScenarioError, match="lost"):
        run(dataclasses.replace(chain, nodes=far))


def test_causality_guard(chain):
    sim = Simulation(chain, prepare(chain), 0)
    sim.now = 1.0
    with pytest.raises(InvariantViolation):
        sim.schedule(0.5, EventKind.Sense, "n1")


def test_poisson_traffic_and_broadcast():
    sc = load_scenario(SCENARIOS / "intrabody_health.json")
    rep = run(sc)
    assert rep.generated > 0
    for nid, modes in rep.time_in_mode.items():
        assert sum(modes.values()) == pytest.approx(sc.horizon)
        if nid.startswith("sensor"):
            assert modes["Sleep"] == pytest.approx(10.0)
        else:
            assert modes["Sleep"] == 0.0


def test_random_scenarios_conserve_and_bound():
    rng = random.Random(3)
    for _ in range(15):
        sc = random_scenario(rng, max_nodes=30)
        rep = run(sc)
        assert rep.generated == rep.delivered + rep.dropped + rep.in_flight
        for nid, node in prepare(sc).nodes.items():
            assert 0.0 <= rep.energy_stored[nid] <= node.energy.capacity


def test_no_harvest_never_delivers_more():
    rng = random.Random(99)
    for _ in range(15):
        sc = random_scenario(rng, max_nodes=30)
        starved = dataclasses.replace(sc, nodes=tuple(
            dataclasses.replace(n, energy=dataclasses.replace(n.energy, harvest_rate=0.0)) for n in sc.nodes
        ))
        assert run(starved).delivered <= run(sc).delivered


def test_report_json_schema(chain):
    doc = json.loads(run(chain).to_json())
    assert set(doc) == {
        "seed", "horizon_s", "generated", "delivered", "dropped", "dropped_by_reason", "in_flight",
        "latency_mean_s", "latency_max_s", "ignored_commands", "events_processed", "energy_consumed_j",
        "energy_stored_j", "time_in_mode_s", "link_utilization",
    }
    assert doc["link_utilization"]["n1->r1"] == pytest.approx(10 * 1e-3 / 10.0)
