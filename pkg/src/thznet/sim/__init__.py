from .commands import BROADCAST, Command, CommandKind, CommandOutcome, apply_command
from .energy import IDLE, OFF, SLEEP, Rx, Tx, energy_step
from .engine import DropReason, Event, EventKind, Simulation, prepare, run
from .report import PACKET_CSV_COLUMNS, MetricsReport, Packet

__all__ = [
    "BROADCAST", "Command", "CommandKind", "CommandOutcome", "apply_command",
    "IDLE", "OFF", "SLEEP", "Rx", "Tx", "energy_step",
    "DropReason", "Event", "EventKind", "Simulation", "prepare", "run",
    "PACKET_CSV_COLUMNS", "MetricsReport", "Packet",
]
