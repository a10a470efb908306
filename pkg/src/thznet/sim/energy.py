"""Harvest/consume bookkeeping for a node's power unit."""
from __future__ import annotations

from dataclasses import replace
from typing import NamedTuple, Union

from ..network import EnergyState

IDLE = "idle"
SLEEP = "sleep"
OFF = "off"


class Tx(NamedTuple):
    bits: float


class Rx(NamedTuple):
    bits: float


Activity = Union[str, Tx, Rx]


def activity_cost(state: EnergyState, dt: float, activity: Activity, sleep_factor: float = 0.01) -> float:
    """Energy (J) demanded by ``activity`` over ``dt`` seconds.

    Transmit and receive costs are per bit and charged once, independent
    of ``dt``; idle and sleep are power draws over ``dt``. An Off node draws
    nothing.
    """
    if isinstance(activity, Tx):
        return activity.bits * state.tx_cost_per_bit
    if isinstance(activity, Rx):
        return activity.bits * state.rx_cost_per_bit
    if activity == IDLE:
        return state.idle_power * dt
    if activity == SLEEP:
        return state.idle_power * sleep_factor * dt
    if activity == OFF:
        return 0.0
    raise ValueError(f"unknown activity {activity!r}")


def energy_step(state: EnergyState, dt: float, activity: Activity = IDLE, sleep_factor: float = 0.01) -> EnergyState:
    """Advance the store by ``dt``: harvest, pay for ``activity``, clamp to [0, capacity].

    Callers refuse a transmission whose cost exceeds what is available
    instead of relying on the clamp.
    """
    if dt < 0:
        raise ValueError(f"dt must be >= 0, got {dt!r}")
    if dt == 0 and not isinstance(activity, (Tx, Rx)):
        return state
    stored = state.stored + state.harvest_rate * dt - activity_cost(state, dt, activity, sleep_factor)
    stored = min(max(stored, 0.0), state.capacity)
    return replace(state, stored=stored)
