"""
NMC site table: per-site status folded from accepted frames.

All operations are pure: they return new tables and the log records the
transition produced, never mutating their input.
"""

import logging
from typing import Dict, Iterable, List, Optional, Tuple

from pydantic import BaseModel, Field

from btsalarm.errors import FrameRejected
from btsalarm.nmc.alarm_log import AlarmLogRecord, EventKind
from btsalarm.nmc.protocol import CHANNEL_FLAGS, STATUS_FLAGS, NmcFrame, decode_frame

logger = logging.getLogger(__name__)

DEFAULT_OFFLINE_TIMEOUT_MS = 35000
UNKNOWN_SITE = 0


class SiteState(BaseModel):
    """Latest known status of one BTS site"""
    site_id: int = Field(..., ge=0, le=0xFFFF)
    last_seq: int = Field(..., ge=0)
    last_frame_time_ms: int = Field(..., ge=0)
    flags: int = Field(0, ge=0, le=0xFF)
    temp_tenths: int = 0
    online: bool = True

    model_config = {"frozen": True}


class NmcTable(BaseModel):
    """Site table keyed by site id"""
    sites: Dict[int, SiteState] = Field(default_factory=dict)

    model_config = {"frozen": True}

    def get(self, site_id: int) -> Optional[SiteState]:
        return self.sites.get(site_id)

    def with_site(self, site: SiteState) -> 'NmcTable':
        sites = dict(self.sites)
        sites[site.site_id] = site
        return NmcTable(sites=sites)


def flag_transitions(old_flags: int, new_flags: int) -> List[EventKind]:
    """RAISE/CLEAR events for every status bit that changed, in bit order"""
    events = []
    changed = (old_flags ^ new_flags) & STATUS_FLAGS
    if not changed:
        return events
    for bit, channel in CHANNEL_FLAGS:
        if changed & bit:
            suffix = "RAISE" if new_flags & bit else "CLEAR"
            events.append(EventKind(f"{channel}_{suffix}"))
    return events


def reject_record(error: FrameRejected, arrival_ms: int, site_id: int = UNKNOWN_SITE) -> AlarmLogRecord:
    """Log record for a frame that failed decoding"""
    return AlarmLogRecord(
        ts_ms=arrival_ms,
        site_id=site_id,
        kind=EventKind.CRC_REJECT,
        detail=error.reason.value,
    )


def ingest_frame(
    table: NmcTable,
    frame: NmcFrame,
    arrival_ms: int,
) -> Tuple[List[AlarmLogRecord], NmcTable, bool]:
    """
    Apply one decoded frame.

    Returns:
        Tuple of (log records, updated table, whether the frame was accepted)
    """
    site = table.get(frame.site_id)

    def record(kind: EventKind, detail: str = "") -> AlarmLogRecord:
        return AlarmLogRecord(
            ts_ms=arrival_ms,
            site_id=frame.site_id,
            kind=kind,
            flags=frame.flags,
            temp_tenths=frame.temp_tenths,
            detail=detail,
        )

    if site is not None and frame.seq <= site.last_seq:
        logger.warning(f"Site {frame.site_id}: seq {frame.seq} <= last accepted {site.last_seq}, rejected")
        return [record(EventKind.SEQ_REJECT, f"seq={frame.seq},last={site.last_seq}")], table, False

    records = []
    old_flags = 0
    if site is None or not site.online:
        records.append(record(EventKind.SITE_UP))
        logger.info(f"Site {frame.site_id} is up")
    if site is not None:
        old_flags = site.flags

    records.extend(record(kind) for kind in flag_transitions(old_flags, frame.flags))

    updated = SiteState(
        site_id=frame.site_id,
        last_seq=frame.seq,
        last_frame_time_ms=arrival_ms,
        flags=frame.flags,
        temp_tenths=frame.temp_tenths,
        online=True,
    )
    return records, table.with_site(updated), True


def nmc_ingest(table: NmcTable, raw: bytes, arrival_ms: int) -> Tuple[List[AlarmLogRecord], NmcTable]:
    """
    Decode and apply one raw frame. Rejects are logged, never raised.

    Returns:
        Tuple of (log records, updated table)
    """
    try:
        frame = decode_frame(raw)
    except FrameRejected as e:
        logger.warning(f"Frame rejected at {arrival_ms} ms: {e}")
        return [reject_record(e, arrival_ms)], table

    records, table, _ = ingest_frame(table, frame, arrival_ms)
    return records, table


def heartbeat_sweep(
    table: NmcTable,
    now_ms: int,
    offline_timeout_ms: int = DEFAULT_OFFLINE_TIMEOUT_MS,
) -> Tuple[List[AlarmLogRecord], NmcTable]:
    """
    Mark online sites silent for more than offline_timeout_ms as offline.
    SITE_DOWN is logged once per outage.

    Returns:
        Tuple of (SITE_DOWN records, updated table)
    """
    records = []
    sites = None
    for site_id in sorted(table.sites):
        site = table.sites[site_id]
        if site.online and now_ms - site.last_frame_time_ms > offline_timeout_ms:
            if sites is None:
                sites = dict(table.sites)
            sites[site_id] = site.model_copy(update={"online": False})
            records.append(AlarmLogRecord(
                ts_ms=now_ms,
                site_id=site_id,
                kind=EventKind.SITE_DOWN,
                flags=site.flags,
                temp_tenths=site.temp_tenths,
                detail=f"silent={now_ms - site.last_frame_time_ms}ms",
            ))
            logger.warning(f"Site {site_id} is down, silent for {now_ms - site.last_frame_time_ms} ms")

    if sites is None:
        return records, table
    return records, NmcTable(sites=sites)


def fold_frames(
    accepted: Iterable[Tuple[int, NmcFrame]],
    now_ms: Optional[int] = None,
    offline_timeout_ms: int = DEFAULT_OFFLINE_TIMEOUT_MS,
) -> NmcTable:
    """
    Rebuild a table from the sequence of accepted (arrival_ms, frame) pairs,
    optionally followed by a sweep at now_ms.
    """
    table = NmcTable()
    for arrival_ms, frame in accepted:
        _, table, _ = ingest_frame(table, frame, arrival_ms)
    if now_ms is not None:
        _, table = heartbeat_sweep(table, now_ms, offline_timeout_ms)
    return table


def format_site(site: SiteState) -> str:
    return (
        f"site={site.site_id} online={'yes' if site.online else 'no'} seq={site.last_seq} "
        f"last_ms={site.last_frame_time_ms} flags=0x{site.flags:02x} temp={site.temp_tenths}"
    )


def dump_site_table(table: NmcTable) -> str:
    """One line per site, ordered by site id"""
    return "".join(format_site(table.sites[s]) + "\n" for s in sorted(table.sites))
