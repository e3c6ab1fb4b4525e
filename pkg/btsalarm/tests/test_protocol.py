"""
Tests for the NMC wire protocol: CRC, frame codec and stream reassembly.
"""

import random

import pytest
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from btsalarm.errors import EncodingError, FrameRejected, RejectReason
from btsalarm.nmc.crc import crc16_ccitt_false
from btsalarm.nmc.protocol import FRAME_LEN, NmcFrame, decode_frame, encode_frame
from btsalarm.nmc.stream import FrameStreamDecoder


def _crc_bitwise(data: bytes) -> int:
    """Shift-register reference: poly 0x1021, init 0xFFFF, no reflection"""
    crc = 0xFFFF
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            crc = ((crc << 1) ^ 0x1021) if crc & 0x8000 else (crc << 1)
            crc &= 0xFFFF
    return crc


@pytest.mark.parametrize("data,expected", [(b"", 0xFFFF), (b"123456789", 0x29B1), (b"\x00", 0xE1F0)])
def test_crc_check_values(data, expected):
    assert crc16_ccitt_false(data) == expected
    assert _crc_bitwise(data) == expected


def test_crc_matches_bitwise_reference():
    rng = random.Random(11)
    for _ in range(500):
        data = bytes(rng.randrange(256) for _ in range(rng.randint(0, 64)))
        assert crc16_ccitt_false(data) == _crc_bitwise(data)


def test_encode_heartbeat_layout():
    """Test the byte layout of a heartbeat frame, site 1, seq 1, 25.0 °C."""
    raw = encode_frame(NmcFrame(site_id=1, seq=1, timestamp_ms=0, flags=0x20, temp_tenths=250))
    assert len(raw) == FRAME_LEN
    assert raw[:9] == bytes.fromhex("B57A010001" "00000001")
    assert raw[9:17] == bytes(8)
    assert raw[17] == 0x20
    assert raw[18:20] == bytes.fromhex("00FA")
    assert int.from_bytes(raw[20:], "big") == crc16_ccitt_false(raw[:20])


def test_encode_rejects_illegal_flags():
    with pytest.raises(EncodingError):
        encode_frame(NmcFrame(site_id=1, seq=1, flags=0x02))
    with pytest.raises(EncodingError):
        encode_frame(NmcFrame(site_id=1, seq=1, flags=0x40))


def _legal_flags():
    status = [f for f in range(32) if not (f & 0x02 and not f & 0x01)]
    return status + [f | 0x20 for f in status]


def test_round_trip_grid():
    """Test decode(encode(f)) == f over every legal flag mask, four temperatures and three seqs."""
    masks = _legal_flags()
    checked = 0
    for flags in range(64):
        for temp in (-100, 0, 250, 999):
            for seq in (0, 1, 0xFFFFFFFF):
                frame = NmcFrame(site_id=513, seq=seq, timestamp_ms=1_700_000_000_123, flags=flags, temp_tenths=temp)
                if flags not in masks:
                    with pytest.raises(EncodingError):
                        encode_frame(frame)
                    continue
                assert decode_frame(encode_frame(frame)) == frame
                checked += 1
    assert checked == len(masks) * 12


def test_single_bit_flips_always_rejected():
    """Test 1e4 random single-bit corruptions of valid frames are all rejected."""
    rng = random.Random(42)
    masks = _legal_flags()
    for _ in range(10_000):
        frame = NmcFrame(
            site_id=rng.randrange(0x10000),
            seq=rng.randrange(0x100000000),
            timestamp_ms=rng.randrange(1 << 48),
            flags=rng.choice(masks),
            temp_tenths=rng.randint(-400, 1500),
        )
        raw = bytearray(encode_frame(frame))
        bit = rng.randrange(FRAME_LEN * 8)
        raw[bit // 8] ^= 1 << (bit % 8)
        with pytest.raises(FrameRejected) as exc:
            decode_frame(bytes(raw))
        assert exc.value.reason in (RejectReason.BAD_CRC, RejectReason.BAD_MAGIC, RejectReason.BAD_FLAGS)


def _with_crc(body: bytes) -> bytes:
    return body + crc16_ccitt_false(body).to_bytes(2, "big")


def test_decode_reject_reasons():
    good = encode_frame(NmcFrame(site_id=1, seq=7, flags=0x08, temp_tenths=250))

    cases = {
        RejectReason.TRUNCATED: good[:21],
        RejectReason.BAD_MAGIC: b"\xB5\x7B" + good[2:],
        RejectReason.BAD_CRC: good[:20] + b"\x00\x00",
        RejectReason.BAD_VERSION: _with_crc(good[:2] + b"\x02" + good[3:20]),
        RejectReason.BAD_FLAGS: _with_crc(good[:17] + b"\x02" + good[18:20]),
    }
    for reason, raw in cases.items():
        with pytest.raises(FrameRejected) as exc:
            decode_frame(raw)
        assert exc.value.reason == reason, f"Expected {reason}, got {exc.value.reason}"

    assert decode_frame(good + b"\x99\x98").seq == 7


def test_stream_decoder_split_and_resync():
    """Test frames split across reads and garbage before/between frames."""
    frames = [NmcFrame(site_id=3, seq=s, flags=0x20, temp_tenths=200 + s) for s in range(1, 6)]
    wire = b"\x00\x11" + encode_frame(frames[0]) + encode_frame(frames[1]) + b"\xB5\xB5" + b"".join(
        encode_frame(f) for f in frames[2:]
    )

    decoder = FrameStreamDecoder()
    items = []
    for i in range(0, len(wire), 5):
        items.extend(decoder.feed(wire[i:i + 5]))

    decoded = [item for item in items if isinstance(item, NmcFrame)]
    rejects = [item for item in items if isinstance(item, FrameRejected)]
    assert decoded == frames
    assert rejects and all(r.reason == RejectReason.BAD_MAGIC for r in rejects)
    assert decoder.frames_decoded == 5
    assert decoder.pending == 0


def test_stream_decoder_recovers_after_corruption():
    """Test a corrupted frame is reported and the following frame still decodes."""
    first = bytearray(encode_frame(NmcFrame(site_id=9, seq=1, flags=0x04)))
    first[12] ^= 0x10
    second = encode_frame(NmcFrame(site_id=9, seq=2, flags=0x00))

    items = FrameStreamDecoder().feed(bytes(first) + second)
    assert any(isinstance(i, FrameRejected) and i.reason == RejectReason.BAD_CRC for i in items)
    assert [i for i in items if isinstance(i, NmcFrame)] == [NmcFrame(site_id=9, seq=2, flags=0x00)]
