"""
Pydantic models for API requests and responses
"""

from pydantic import BaseModel, Field
from typing import List


class SiteResponse(BaseModel):
    """Current status of one BTS site"""
    site_id: int = Field(..., description="Alarm box site identifier")
    online: bool = Field(..., description="False once the site missed the offline timeout")
    last_seq: int = Field(..., description="Sequence number of the last accepted frame")
    last_frame_time_ms: int = Field(..., description="Arrival time of the last accepted frame")
    flags: int = Field(..., description="Flags octet of the last accepted frame")
    temp_c: float = Field(..., description="Last reported room temperature in °C")
    active_alarms: List[str] = Field(default_factory=list, description="Channels currently raised")

    class Config:
        json_schema_extra = {
            "example": {
                "site_id": 1,
                "online": True,
                "last_seq": 42,
                "last_frame_time_ms": 1700000000000,
                "flags": 9,
                "temp_c": 31.2,
                "active_alarms": ["TEMP_ALERT", "DOOR"]
            }
        }


class SitesResponse(BaseModel):
    """Site table"""
    sites: List[SiteResponse]
    online: int = Field(..., description="Number of sites currently online")
    total: int = Field(..., description="Number of sites ever seen")


class EventResponse(BaseModel):
    """One alarm log record"""
    ts_ms: int
    site_id: int
    kind: str
    flags: int
    temp_tenths: int
    detail: str = ""
    line: str = Field(..., description="Record in alarm log line format")


class EventsResponse(BaseModel):
    """Most recent alarm log records first"""
    events: List[EventResponse]
    total: int = Field(..., description="Records in the log before filtering")
