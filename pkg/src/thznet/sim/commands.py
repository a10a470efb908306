"""Control commands a nano-router can issue and their effect on a node."""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from typing import NamedTuple

from ..network import Mode, NodeRecord

BROADCAST = "broadcast"


class CommandKind(str, enum.Enum):
    On = "On"
    Off = "Off"
    ReadValue = "ReadValue"
    Sleep = "Sleep"


@dataclass(frozen=True)
class Command:
    kind: CommandKind
    target: str = BROADCAST


class CommandOutcome(NamedTuple):
    node: NodeRecord
    emit_reading: bool  # enqueue one uplink packet with the latest sensed value
    drop_queue: bool  # discard queued packets (reason CommandedOff)
    ignored: bool


def apply_command(node: NodeRecord, cmd: Command) -> CommandOutcome:
    kind = CommandKind(cmd.kind)
    if kind is CommandKind.Off:
        return CommandOutcome(replace(node, mode=Mode.Off), False, True, False)
    if kind is CommandKind.Sleep:
        if node.mode is Mode.Off:
            return CommandOutcome(node, False, False, True)
        return CommandOutcome(replace(node, mode=Mode.Sleep), False, False, False)
    if kind is CommandKind.On:
        return CommandOutcome(replace(node, mode=Mode.Active), False, False, False)
    # ReadValue only answers from an awake node
    if node.mode is Mode.Active:
        return CommandOutcome(node, True, False, False)
    return CommandOutcome(node, False, False, True)
