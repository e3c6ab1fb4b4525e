"""
Append-only NMC alarm log.

One line per record:

    ts=<ms> site=<id> event=<KIND> flags=0x<hh> temp=<tenths>[ detail=<text>]
"""

import logging
import re
from collections import deque
from enum import Enum
from pathlib import Path
from typing import Deque, Iterable, Iterator, List, Optional, Union

from pydantic import BaseModel, Field

logger = logging.getLogger(__name__)


class EventKind(str, Enum):
    SITE_UP = "SITE_UP"
    SITE_DOWN = "SITE_DOWN"
    CRC_REJECT = "CRC_REJECT"
    SEQ_REJECT = "SEQ_REJECT"
    TEMP_ALERT_RAISE = "TEMP_ALERT_RAISE"
    TEMP_ALERT_CLEAR = "TEMP_ALERT_CLEAR"
    TEMP_DANGER_RAISE = "TEMP_DANGER_RAISE"
    TEMP_DANGER_CLEAR = "TEMP_DANGER_CLEAR"
    SMOKE_RAISE = "SMOKE_RAISE"
    SMOKE_CLEAR = "SMOKE_CLEAR"
    DOOR_RAISE = "DOOR_RAISE"
    DOOR_CLEAR = "DOOR_CLEAR"
    WATER_RAISE = "WATER_RAISE"
    WATER_CLEAR = "WATER_CLEAR"


class AlarmLogRecord(BaseModel):
    """One NMC event"""
    ts_ms: int = Field(..., ge=0)
    site_id: int = Field(..., ge=0, le=0xFFFF)
    kind: EventKind
    flags: int = Field(0, ge=0, le=0xFF)
    temp_tenths: int = 0
    detail: str = ""

    model_config = {"frozen": True}


_LINE_RE = re.compile(
    r'^ts=(?P<ts>\d+) site=(?P<site>\d+) event=(?P<kind>[A-Z_]+) '
    r'flags=0x(?P<flags>[0-9A-Fa-f]{2}) temp=(?P<temp>-?\d+)(?: detail=(?P<detail>\S+))?$'
)


def format_log_record(rec: AlarmLogRecord) -> str:
    line = (
        f"ts={rec.ts_ms} site={rec.site_id} event={rec.kind.value} "
        f"flags=0x{rec.flags:02x} temp={rec.temp_tenths}"
    )
    if rec.detail:
        line += f" detail={rec.detail.replace(' ', '_')}"
    return line


def parse_log_record(line: str) -> AlarmLogRecord:
    """
    Parse one log line.

    Raises:
        ValueError: If the line does not follow the log format
    """
    match = _LINE_RE.match(line.strip())
    if not match:
        raise ValueError(f"Not an alarm log line: {line!r}")
    return AlarmLogRecord(
        ts_ms=int(match.group('ts')),
        site_id=int(match.group('site')),
        kind=EventKind(match.group('kind')),
        flags=int(match.group('flags'), 16),
        temp_tenths=int(match.group('temp')),
        detail=match.group('detail') or "",
    )


class AlarmLog:
    """
    Append-only record list, optionally mirrored to a text file.

    With max_records set only the newest records stay in memory; the file,
    when there is one, keeps everything.
    """

    def __init__(self, path: Optional[Union[str, Path]] = None, max_records: Optional[int] = None):
        if max_records is not None and max_records <= 0:
            raise ValueError(f"max_records must be > 0, got {max_records}")
        self.path = Path(path) if path is not None else None
        self.max_records = max_records
        self._records: Deque[AlarmLogRecord] = deque(maxlen=max_records)
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[AlarmLogRecord]:
        return iter(self._records)

    @property
    def records(self) -> List[AlarmLogRecord]:
        return list(self._records)

    def extend(self, records: Iterable[AlarmLogRecord]) -> List[AlarmLogRecord]:
        """Append records; returns the ones appended"""
        new = list(records)
        if not new:
            return new
        self._records.extend(new)
        if self.path is not None:
            with open(self.path, 'a', encoding='utf-8') as f:
                for rec in new:
                    f.write(format_log_record(rec) + "\n")
        return new

    def query(
        self,
        site_id: Optional[int] = None,
        kind: Optional[EventKind] = None,
        limit: Optional[int] = None,
    ) -> List[AlarmLogRecord]:
        """Most recent records first, filtered by site and kind"""
        selected = [
            r for r in reversed(self._records)
            if (site_id is None or r.site_id == site_id) and (kind is None or r.kind == kind)
        ]
        return selected[:limit] if limit is not None else selected


def read_log_file(path: Union[str, Path]) -> List[AlarmLogRecord]:
    """Load every record of a log file, skipping blank lines"""
    records = []
    with open(path, 'r', encoding='utf-8') as f:
        for line in f:
            if line.strip():
                records.append(parse_log_record(line))
    return records
