"""
API route handlers: read-only views of the NMC site table and alarm log
"""

import logging
from typing import Optional

from fastapi import APIRouter, HTTPException, Query
from fastapi.responses import PlainTextResponse

from btsalarm.api.models import EventResponse, EventsResponse, SiteResponse, SitesResponse
from btsalarm.nmc.alarm_log import EventKind, format_log_record
from btsalarm.nmc.protocol import CHANNEL_FLAGS
from btsalarm.nmc.service import NmcService

logger = logging.getLogger(__name__)

router = APIRouter()

# Global instance
_nmc_service: Optional[NmcService] = None


def get_nmc_service() -> NmcService:
    """Get or create the global NMC service instance"""
    global _nmc_service
    if _nmc_service is None:
        _nmc_service = NmcService()
    return _nmc_service


def set_nmc_service(service: NmcService) -> None:
    """Install the service the routes report on (the running server's)"""
    global _nmc_service
    _nmc_service = service


@router.get("/sites", response_model=SitesResponse)
async def list_sites():
    """
    Current site table, ordered by site id.

    Returns:
        SitesResponse with one entry per site ever seen
    """
    table = get_nmc_service().table
    sites = []
    for site_id in sorted(table.sites):
        site = table.sites[site_id]
        sites.append(SiteResponse(
            site_id=site.site_id,
            online=site.online,
            last_seq=site.last_seq,
            last_frame_time_ms=site.last_frame_time_ms,
            flags=site.flags,
            temp_c=site.temp_tenths / 10,
            active_alarms=[name for bit, name in CHANNEL_FLAGS if site.flags & bit],
        ))
    return SitesResponse(
        sites=sites,
        online=sum(1 for s in sites if s.online),
        total=len(sites),
    )


@router.get("/sites/dump", response_class=PlainTextResponse)
async def dump_sites():
    """Site table as text, one line per site"""
    return get_nmc_service().dump()


@router.get("/events", response_model=EventsResponse)
async def list_events(
    site: Optional[int] = Query(None, ge=0, le=0xFFFF, description="Only this site"),
    kind: Optional[str] = Query(None, description="Only this event kind, e.g. DOOR_RAISE"),
    limit: int = Query(100, ge=1, le=10000, description="Maximum records returned"),
):
    """
    Alarm log records, most recent first.

    Args:
        site: Optional site filter
        kind: Optional event kind filter
        limit: Maximum number of records

    Returns:
        EventsResponse with the matching records
    """
    event_kind = None
    if kind is not None:
        try:
            event_kind = EventKind(kind.upper())
        except ValueError:
            raise HTTPException(status_code=400, detail=f"Unknown event kind: {kind}")

    log = get_nmc_service().log
    records = log.query(site_id=site, kind=event_kind, limit=limit)
    logger.debug(f"Events query site={site} kind={kind} limit={limit}: {len(records)} records")

    return EventsResponse(
        events=[
            EventResponse(
                ts_ms=r.ts_ms,
                site_id=r.site_id,
                kind=r.kind.value,
                flags=r.flags,
                temp_tenths=r.temp_tenths,
                detail=r.detail,
                line=format_log_record(r),
            )
            for r in records
        ],
        total=len(log),
    )
