"""
NMC aggregation service core: owns the site table, the alarm log and the
journal of accepted frames. Not thread-safe; callers serialize access (the
TCP server funnels every mutation through one writer task).
"""

import logging
from typing import List, Optional, Tuple, Union

from btsalarm.config import settings
from btsalarm.errors import FrameRejected, InputDomainError
from btsalarm.nmc.alarm_log import AlarmLog, AlarmLogRecord, EventKind
from btsalarm.nmc.protocol import NmcFrame, decode_frame
from btsalarm.nmc.state import (
    NmcTable, dump_site_table, fold_frames, heartbeat_sweep, ingest_frame, reject_record,
)
from btsalarm.nmc.stream import StreamItem

logger = logging.getLogger(__name__)


class NmcService:
    """Site table + alarm log, updated one frame or sweep at a time"""

    def __init__(
        self,
        log: Optional[AlarmLog] = None,
        offline_timeout_ms: Optional[int] = None,
        keep_journal: bool = True,
    ):
        """
        Args:
            log: Alarm log receiving every record (in-memory when None)
            offline_timeout_ms: Silence after which a site is declared down
                (settings.NMC_OFFLINE_TIMEOUT_MS when None)
            keep_journal: Keep (arrival_ms, frame) of every accepted frame so
                replay() can rebuild the table; long-running servers turn it off

        Raises:
            InputDomainError: If offline_timeout_ms is not positive
        """
        if offline_timeout_ms is None:
            offline_timeout_ms = settings.NMC_OFFLINE_TIMEOUT_MS
        if offline_timeout_ms <= 0:
            raise InputDomainError(f"offline timeout must be > 0 ms, got {offline_timeout_ms}")

        self.log = log if log is not None else AlarmLog()
        self.offline_timeout_ms = offline_timeout_ms
        self.table = NmcTable()
        self.keep_journal = keep_journal
        self.journal: List[Tuple[int, NmcFrame]] = []
        self.frames_accepted = 0
        self.last_sweep_ms: Optional[int] = None

    def accept(self, item: Union[bytes, StreamItem], arrival_ms: int) -> List[AlarmLogRecord]:
        """
        Ingest raw octets, a decoded frame or a stream reject.

        Returns:
            The log records this produced (already appended to the log)
        """
        if isinstance(item, (bytes, bytearray)):
            try:
                item = decode_frame(bytes(item))
            except FrameRejected as e:
                item = e

        if isinstance(item, FrameRejected):
            logger.warning(f"Frame rejected at {arrival_ms} ms: {item}")
            return self.log.extend([reject_record(item, arrival_ms)])

        records, self.table, accepted = ingest_frame(self.table, item, arrival_ms)
        if accepted:
            self.frames_accepted += 1
            if self.keep_journal:
                self.journal.append((arrival_ms, item))
        return self.log.extend(records)

    def sweep(self, now_ms: int) -> List[AlarmLogRecord]:
        """Run the heartbeat sweep; returns SITE_DOWN records"""
        records, self.table = heartbeat_sweep(self.table, now_ms, self.offline_timeout_ms)
        self.last_sweep_ms = now_ms
        return self.log.extend(records)

    def replay(self) -> NmcTable:
        """
        Fold the journal from scratch (must equal self.table).

        Raises:
            RuntimeError: If the service was built with keep_journal=False
        """
        if not self.keep_journal:
            raise RuntimeError("replay needs the frame journal, which is disabled for this service")
        return fold_frames(self.journal, self.last_sweep_ms, self.offline_timeout_ms)

    def dump(self) -> str:
        return dump_site_table(self.table)

    def count(self, kind: EventKind) -> int:
        return sum(1 for r in self.log if r.kind == kind)
