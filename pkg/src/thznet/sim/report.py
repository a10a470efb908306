from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

PACKET_CSV_COLUMNS = ("id", "source", "created_at_s", "delivered_at_s", "drop_reason", "hops")


@dataclass
class Packet:
    id: int
    source: str
    created_at: float
    size: float
    path: tuple[str, ...]
    value: Optional[float] = None
    hop: int = 0  # index into path of the node currently holding the packet
    status: str = "InFlight"
    drop_reason: Optional[str] = None
    delivered_at: Optional[float] = None

    @property
    def hops_remaining(self) -> tuple[str, ...]:
        return self.path[self.hop + 1:]

    def deliver(self, now):
        if self.status != "InFlight":
            raise RuntimeError(f"packet {self.id} already {self.status}")
        self.status = "Delivered"
        self.delivered_at = now

    def drop(self, reason):
        if self.status != "InFlight":
            raise RuntimeError(f"packet {self.id} already {self.status}")
        self.status = "Dropped"
        self.drop_reason = reason


@dataclass
class MetricsReport:
    seed: int
    horizon: float
    generated: int = 0
    delivered: int = 0
    in_flight: int = 0
    dropped_by_reason: dict = field(default_factory=dict)
    latency_mean: Optional[float] = None
    latency_max: Optional[float] = None
    ignored_commands: int = 0
    events_processed: int = 0
    energy_consumed: dict = field(default_factory=dict)
    energy_stored: dict = field(default_factory=dict)
    time_in_mode: dict = field(default_factory=dict)
    link_utilization: dict = field(default_factory=dict)
    packets: list = field(default_factory=list, repr=False)

    @property
    def dropped(self) -> int:
        return sum(self.dropped_by_reason.values())

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "horizon_s": self.horizon,
            "generated": self.generated,
            "delivered": self.delivered,
            "dropped": self.dropped,
            "dropped_by_reason": dict(self.dropped_by_reason),
            "in_flight": self.in_flight,
            "latency_mean_s": self.latency_mean,
            "latency_max_s": self.latency_max,
            "ignored_commands": self.ignored_commands,
            "events_processed": self.events_processed,
            "energy_consumed_j": dict(self.energy_consumed),
            "energy_stored_j": dict(self.energy_stored),
            "time_in_mode_s": {k: dict(v) for k, v in self.time_in_mode.items()},
            "link_utilization": dict(self.link_utilization),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def packets_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(PACKET_CSV_COLUMNS)
        for p in self.packets:
            w.writerow([
                p.id,
                p.source,
                repr(p.created_at),
                "" if p.delivered_at is None else repr(p.delivered_at),
                p.drop_reason or "",
                p.hop,
            ])
        return buf.getvalue()
