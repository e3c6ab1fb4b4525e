"""
Alarm box -> NMC wire format.

22 octets, big-endian, in this order:

    offset  size  field
    0       2     magic 0xB5 0x7A
    2       1     version (0x01)
    3       2     site_id
    5       4     seq
    9       8     timestamp_ms
    17      1     flags
    18      2     temp_tenths (signed)
    20      2     crc16 over octets 0..19

flags: bit0 temp_alert, bit1 temp_danger, bit2 smoke, bit3 door,
bit4 water, bit5 heartbeat, bits 6-7 reserved (zero).

Example:
    >>> raw = encode_frame(NmcFrame(site_id=1, seq=1, flags=FLAG_HEARTBEAT, temp_tenths=250))
    >>> raw[:9].hex(' ')
    'b5 7a 01 00 01 00 00 00 01'
"""

import struct

from pydantic import BaseModel, Field

from btsalarm.errors import EncodingError, FrameRejected, RejectReason
from btsalarm.nmc.crc import crc16_ccitt_false

MAGIC = b"\xB5\x7A"
VERSION = 0x01
FRAME_LEN = 22
BODY_LEN = 20

_BODY = struct.Struct(">2sBHIQBh")
_CRC = struct.Struct(">H")

# -- Flags -------------------------------------------------------------------

FLAG_TEMP_ALERT = 0x01
FLAG_TEMP_DANGER = 0x02
FLAG_SMOKE = 0x04
FLAG_DOOR = 0x08
FLAG_WATER = 0x10
FLAG_HEARTBEAT = 0x20
FLAG_RESERVED = 0xC0

STATUS_FLAGS = FLAG_TEMP_ALERT | FLAG_TEMP_DANGER | FLAG_SMOKE | FLAG_DOOR | FLAG_WATER

# Channel name per status flag, in bit order
CHANNEL_FLAGS = (
    (FLAG_TEMP_ALERT, "TEMP_ALERT"),
    (FLAG_TEMP_DANGER, "TEMP_DANGER"),
    (FLAG_SMOKE, "SMOKE"),
    (FLAG_DOOR, "DOOR"),
    (FLAG_WATER, "WATER"),
)


class NmcFrame(BaseModel):
    """Decoded alarm frame (magic, version and crc are implied)"""
    site_id: int = Field(..., ge=0, le=0xFFFF)
    seq: int = Field(..., ge=0, le=0xFFFFFFFF)
    timestamp_ms: int = Field(0, ge=0, le=0xFFFFFFFFFFFFFFFF)
    flags: int = Field(0, ge=0, le=0xFF)
    temp_tenths: int = Field(0, ge=-0x8000, le=0x7FFF)

    model_config = {"frozen": True}

    @property
    def is_heartbeat(self) -> bool:
        return bool(self.flags & FLAG_HEARTBEAT)

    @property
    def status_flags(self) -> int:
        return self.flags & STATUS_FLAGS


def flags_problem(flags: int) -> str:
    """Describe why a flags octet is illegal; empty string when legal"""
    if flags & FLAG_RESERVED:
        return f"reserved bits set in flags 0x{flags:02X}"
    if flags & FLAG_TEMP_DANGER and not flags & FLAG_TEMP_ALERT:
        return f"temp_danger without temp_alert in flags 0x{flags:02X}"
    return ""


def encode_frame(frame: NmcFrame) -> bytes:
    """
    Serialize a frame to its 22-octet wire form.

    Raises:
        EncodingError: If the flags violate the frame invariants
    """
    problem = flags_problem(frame.flags)
    if problem:
        raise EncodingError(problem)

    body = _BODY.pack(
        MAGIC, VERSION, frame.site_id, frame.seq,
        frame.timestamp_ms, frame.flags, frame.temp_tenths,
    )
    return body + _CRC.pack(crc16_ccitt_false(body))


def decode_frame(raw: bytes) -> NmcFrame:
    """
    Parse and validate one frame. Bytes after the 22nd are ignored.

    Checks run in order: length, magic, CRC, version, flags.

    Raises:
        FrameRejected: With the reason of the first failed check
    """
    if len(raw) < FRAME_LEN:
        raise FrameRejected(RejectReason.TRUNCATED, f"{len(raw)} of {FRAME_LEN} octets")

    raw = bytes(raw[:FRAME_LEN])
    if raw[:2] != MAGIC:
        raise FrameRejected(RejectReason.BAD_MAGIC, raw[:2].hex())

    body = raw[:BODY_LEN]
    (crc_recv,) = _CRC.unpack(raw[BODY_LEN:])
    crc_calc = crc16_ccitt_false(body)
    if crc_recv != crc_calc:
        raise FrameRejected(RejectReason.BAD_CRC, f"got 0x{crc_recv:04X}, expected 0x{crc_calc:04X}")

    _, version, site_id, seq, timestamp_ms, flags, temp_tenths = _BODY.unpack(body)
    if version != VERSION:
        raise FrameRejected(RejectReason.BAD_VERSION, f"version {version}")

    problem = flags_problem(flags)
    if problem:
        raise FrameRejected(RejectReason.BAD_FLAGS, problem)

    return NmcFrame(
        site_id=site_id,
        seq=seq,
        timestamp_ms=timestamp_ms,
        flags=flags,
        temp_tenths=temp_tenths,
    )
