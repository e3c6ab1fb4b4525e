"""
Simulation trace: the ordered transitions of a run plus a final summary.
"""

from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, Field

from btsalarm.errors import SimulationConfigError
from btsalarm.firmware.models import AlarmState, Thresholds


class TraceFormat(str, Enum):
    PLAIN = "plain"
    TSV = "tsv"


PLAIN_HEADER = "# t entity transition"
TSV_HEADER = "t_ms\tentity\ttransition"


class TraceRecord(BaseModel):
    """One transition: when, which part of the system, what changed"""
    t_ms: int = Field(..., ge=0)
    entity: str
    transition: str

    model_config = {"frozen": True}

    def plain(self) -> str:
        return f"t={self.t_ms} {self.entity} {self.transition}"

    def tsv(self) -> str:
        return f"{self.t_ms}\t{self.entity}\t{self.transition}"


class TraceSummary(BaseModel):
    """End-of-run state"""
    duration_ms: int
    alarm: Optional[AlarmState] = Field(None, description="None when the controller ended powered off")
    thresholds: Thresholds
    frames_sent: int = 0
    site_lines: List[str] = Field(default_factory=list)

    def lines(self) -> List[str]:
        out = [f"# end t={self.duration_ms} frames_sent={self.frames_sent}"]
        if self.alarm is None:
            out.append("# controller powered off")
        else:
            a = self.alarm
            out.append(
                f"# final temp={a.temp_status.name} smoke={_word(a.smoke_active)} "
                f"door={_word(a.door_active)} water={_word(a.water_active)} "
                f"relays=0x{a.relay_bits:X} storage={'FAULT' if a.storage_fault else 'OK'}"
            )
        out.append(f"# thresholds {self.thresholds}")
        out.extend(f"# {line}" for line in self.site_lines)
        return out


class Trace(BaseModel):
    records: List[TraceRecord] = Field(default_factory=list)
    summary: Optional[TraceSummary] = None

    def add(self, t_ms: int, entity: str, transition: str) -> None:
        self.records.append(TraceRecord(t_ms=t_ms, entity=entity, transition=transition))

    def find(self, entity: str, transition: str) -> Optional[TraceRecord]:
        """First record of entity whose transition starts with the given text"""
        for rec in self.records:
            if rec.entity == entity and rec.transition.startswith(transition):
                return rec
        return None


def _word(active: bool) -> str:
    return "ACTIVE" if active else "CLEAR"


def emit_trace(trace: Trace, fmt: str = TraceFormat.PLAIN.value) -> str:
    """
    Render a trace.

    Args:
        trace: Trace to render
        fmt: "plain" (t=<ms> <entity> <transition>) or "tsv"

    Returns:
        Header, one line per record, then summary comment lines; ends with a newline

    Raises:
        SimulationConfigError: On an unknown format
    """
    try:
        fmt = TraceFormat(fmt)
    except ValueError:
        raise SimulationConfigError(f"Unknown trace format: {fmt}")

    if fmt == TraceFormat.PLAIN:
        lines = [PLAIN_HEADER] + [r.plain() for r in trace.records]
    else:
        lines = [TSV_HEADER] + [r.tsv() for r in trace.records]

    if trace.summary is not None:
        lines.extend(trace.summary.lines())
    return "\n".join(lines) + "\n"
