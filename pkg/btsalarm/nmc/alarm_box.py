"""
Alarm box: polls the controller's relay contacts and reports to the NMC.

A status frame goes out whenever the relay mask or the temperature band
changes; a heartbeat goes out every heartbeat interval. Both due in the same
poll coalesce into one frame with the heartbeat bit set.
"""

from typing import List, Tuple

from pydantic import BaseModel, Field

from btsalarm.firmware.models import (
    RELAY_DOOR, RELAY_SMOKE, RELAY_TEMP, RELAY_WATER, TempStatus,
)
from btsalarm.nmc.protocol import (
    FLAG_DOOR, FLAG_HEARTBEAT, FLAG_SMOKE, FLAG_TEMP_ALERT, FLAG_TEMP_DANGER,
    FLAG_WATER, NmcFrame,
)

DEFAULT_HEARTBEAT_INTERVAL_MS = 10000


class AlarmBoxState(BaseModel):
    """What the box remembers between polls"""
    site_id: int = Field(1, ge=0, le=0xFFFF)
    seq: int = Field(0, ge=0, le=0xFFFFFFFF)
    last_relays: int = Field(0, ge=0, le=0x0F)
    last_status: TempStatus = TempStatus.NORMAL
    last_heartbeat_ms: int = 0
    heartbeat_interval_ms: int = Field(DEFAULT_HEARTBEAT_INTERVAL_MS, gt=0)

    model_config = {"frozen": True}


def status_flags(relays: int, temp_status: TempStatus) -> int:
    """Map relay contacts and temperature severity onto frame flags"""
    flags = 0
    if relays & RELAY_TEMP or temp_status >= TempStatus.ALERT:
        flags |= FLAG_TEMP_ALERT
    if temp_status >= TempStatus.DANGER:
        flags |= FLAG_TEMP_DANGER | FLAG_TEMP_ALERT
    if relays & RELAY_SMOKE:
        flags |= FLAG_SMOKE
    if relays & RELAY_DOOR:
        flags |= FLAG_DOOR
    if relays & RELAY_WATER:
        flags |= FLAG_WATER
    return flags


def alarm_box_poll(
    box: AlarmBoxState,
    relays: int,
    temp_status: TempStatus,
    temp_tenths: int,
    clock_ms: int,
) -> Tuple[List[NmcFrame], AlarmBoxState]:
    """
    Poll the contacts once (called every firmware tick).

    Args:
        box: Box state from the previous poll
        relays: Relay nibble (bit0 temp, bit1 smoke, bit2 door, bit3 water)
        temp_status: Temperature severity line from the controller
        temp_tenths: Current temperature in tenths of °C
        clock_ms: Current time in milliseconds

    Returns:
        Tuple of (frames to send, updated box state)
    """
    changed = relays != box.last_relays or temp_status != box.last_status
    heartbeat_due = clock_ms - box.last_heartbeat_ms >= box.heartbeat_interval_ms

    if not changed and not heartbeat_due:
        return [], box

    flags = status_flags(relays, temp_status)
    update = {
        "last_relays": relays,
        "last_status": temp_status,
        "seq": (box.seq + 1) & 0xFFFFFFFF,
    }
    if heartbeat_due:
        flags |= FLAG_HEARTBEAT
        # stay on the interval grid even if polls were missed
        late_by = (clock_ms - box.last_heartbeat_ms) % box.heartbeat_interval_ms
        update["last_heartbeat_ms"] = clock_ms - late_by

    frame = NmcFrame(
        site_id=box.site_id,
        seq=update["seq"],
        timestamp_ms=clock_ms,
        flags=flags,
        temp_tenths=max(-0x8000, min(0x7FFF, temp_tenths)),
    )
    return [frame], box.model_copy(update=update)
