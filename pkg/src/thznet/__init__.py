"""Terahertz-band channel model and discrete-event simulator for nanonetworks."""
from .channel import (
    FrequencyBand,
    LinkBudget,
    LinkGeometry,
    NoiseEnvironment,
    absorption_loss,
    channel_capacity,
    link_budget,
    molecular_noise_temperature,
    noise_power,
    noise_psd_curve,
    spreading_loss,
    total_path_loss_db,
    usable_bandwidth,
)
from .errors import DomainError, MediumParseError, ScenarioError, TopologyError, UnknownNodeError
from .medium import (
    AbsorptionLine,
    MediumSpec,
    absorption_coefficient,
    load_medium,
    parse_medium_spec,
    serialize_medium_spec,
    synthetic_air,
    vacuum,
)
from .network import EnergyState, Mode, NodeRecord, Tier, Topology, build_topology, link_feasible, route_uplink
from .scenario import Scenario, load_scenario

__version__ = "0.1.0"
