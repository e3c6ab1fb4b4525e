"""
Tests for the alarm box and the NMC site table, liveness sweep and alarm log.
"""

import random

import pytest
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from btsalarm.errors import InputDomainError
from btsalarm.firmware.models import RELAY_DOOR, RELAY_SMOKE, RELAY_TEMP, RELAY_WATER, TempStatus
from btsalarm.nmc.alarm_box import AlarmBoxState, alarm_box_poll, status_flags
from btsalarm.nmc.alarm_log import (
    AlarmLog, AlarmLogRecord, EventKind, format_log_record, parse_log_record, read_log_file,
)
from btsalarm.nmc.protocol import FLAG_HEARTBEAT, NmcFrame, encode_frame
from btsalarm.nmc.service import NmcService
from btsalarm.nmc.state import (
    NmcTable, dump_site_table, fold_frames, heartbeat_sweep, ingest_frame, nmc_ingest,
)

NORMAL = TempStatus.NORMAL


def _poll_until(box, relays, until_ms, temp_status=NORMAL, start_ms=0, step_ms=10):
    frames = []
    for t in range(start_ms, until_ms + 1, step_ms):
        out, box = alarm_box_poll(box, relays, temp_status, 250, t)
        frames.extend(out)
    return frames, box


def test_alarm_box_heartbeat_every_10s():
    """Test stable relays over 10 s give exactly one heartbeat frame."""
    frames, box = _poll_until(AlarmBoxState(), 0, 10_000)
    assert len(frames) == 1
    assert frames[0].flags == FLAG_HEARTBEAT
    assert frames[0].timestamp_ms == 10_000
    assert frames[0].seq == 1

    frames, _ = _poll_until(box, 0, 60_000, start_ms=10_010)
    assert [f.timestamp_ms for f in frames] == [20_000, 30_000, 40_000, 50_000, 60_000]
    assert [f.seq for f in frames] == [2, 3, 4, 5, 6]


def test_alarm_box_change_frame():
    """Test a door relay rising at 5000 ms gives a change frame at 5000 with bit3."""
    box = AlarmBoxState(site_id=4)
    _, box = _poll_until(box, 0, 4_990)
    frames, box = alarm_box_poll(box, RELAY_DOOR, NORMAL, 250, 5_000)
    assert len(frames) == 1
    assert frames[0].flags == 0x08
    assert frames[0].site_id == 4
    assert not frames[0].is_heartbeat


def test_alarm_box_coalesces_changes():
    """Test door and water in one tick give one frame with both bits."""
    frames, _ = alarm_box_poll(AlarmBoxState(), RELAY_DOOR | RELAY_WATER, NORMAL, 250, 1_230)
    assert len(frames) == 1
    assert frames[0].flags == 0x18


def test_alarm_box_change_and_heartbeat_coalesce():
    frames, box = alarm_box_poll(AlarmBoxState(), RELAY_SMOKE, NORMAL, 250, 10_000)
    assert len(frames) == 1
    assert frames[0].flags == 0x04 | FLAG_HEARTBEAT
    assert box.last_heartbeat_ms == 10_000


def test_alarm_box_temperature_severity():
    """Test the temperature band travels in the frame while the relay stays binary."""
    assert status_flags(RELAY_TEMP, TempStatus.ALERT) == 0x01
    assert status_flags(RELAY_TEMP, TempStatus.DANGER) == 0x03
    assert status_flags(0, NORMAL) == 0

    box = AlarmBoxState()
    frames, box = alarm_box_poll(box, RELAY_TEMP, TempStatus.ALERT, 310, 100)
    assert frames[0].flags == 0x01
    frames, box = alarm_box_poll(box, RELAY_TEMP, TempStatus.DANGER, 460, 200)
    assert frames[0].flags == 0x03
    assert frames[0].seq == 2


def _frame(site, seq, flags=0, temp=250, ts=0):
    return NmcFrame(site_id=site, seq=seq, timestamp_ms=ts, flags=flags, temp_tenths=temp)


def _kinds(records):
    return [r.kind for r in records]


def test_ingest_examples():
    """Test fresh site raise, replay reject and clear."""
    records, table = nmc_ingest(NmcTable(), encode_frame(_frame(1, 1, 0x04)), 1_000)
    assert _kinds(records) == [EventKind.SITE_UP, EventKind.SMOKE_RAISE]
    assert table.get(1).flags == 0x04

    records, after = nmc_ingest(table, encode_frame(_frame(1, 1, 0x00)), 1_500)
    assert _kinds(records) == [EventKind.SEQ_REJECT]
    assert after == table

    records, table = nmc_ingest(table, encode_frame(_frame(1, 2, 0x00)), 2_000)
    assert _kinds(records) == [EventKind.SMOKE_CLEAR]
    assert table.get(1).last_seq == 2
    assert table.get(1).last_frame_time_ms == 2_000


def test_ingest_bad_octets_logs_crc_reject():
    raw = bytearray(encode_frame(_frame(1, 1)))
    raw[5] ^= 0x01
    records, table = nmc_ingest(NmcTable(), bytes(raw), 10)
    assert _kinds(records) == [EventKind.CRC_REJECT]
    assert records[0].detail == "BadCrc"
    assert records[0].site_id == 0
    assert table == NmcTable()


def test_ingest_transitions_in_bit_order():
    _, table = nmc_ingest(NmcTable(), encode_frame(_frame(2, 1, 0x00)), 0)
    records, _ = nmc_ingest(table, encode_frame(_frame(2, 2, 0x1B)), 10)
    assert _kinds(records) == [
        EventKind.TEMP_ALERT_RAISE, EventKind.TEMP_DANGER_RAISE, EventKind.DOOR_RAISE, EventKind.WATER_RAISE,
    ]


def test_heartbeat_sweep_examples():
    """Test 34 s silence is fine, 36 s logs one SITE_DOWN, 60 s adds nothing, a frame brings SITE_UP."""
    _, table = nmc_ingest(NmcTable(), encode_frame(_frame(1, 1)), 0)

    records, table = heartbeat_sweep(table, 34_000)
    assert records == []
    records, table = heartbeat_sweep(table, 35_000)
    assert records == [], "Exactly 35 s of silence is still inside the timeout"

    records, table = heartbeat_sweep(table, 36_000)
    assert _kinds(records) == [EventKind.SITE_DOWN]
    assert not table.get(1).online

    records, table = heartbeat_sweep(table, 60_000)
    assert records == []

    records, table = nmc_ingest(table, encode_frame(_frame(1, 2)), 61_000)
    assert _kinds(records) == [EventKind.SITE_UP]
    assert table.get(1).online


def test_site_liveness_alternates_over_random_silences():
    """Test SITE_DOWN/SITE_UP strictly alternate over 100 random silence patterns."""
    rng = random.Random(314)
    for pattern in range(100):
        service = NmcService()
        box = AlarmBoxState(site_id=pattern + 1)
        silences = []
        t = 0
        while len(silences) < 4:
            start = rng.randrange(t + 5_000, t + 60_000, 10)
            silences.append((start, start + rng.randrange(1_000, 90_000, 10)))
            t = silences[-1][1]
        horizon = t + 50_000

        for now in range(0, horizon + 1, 100):
            frames, box = alarm_box_poll(box, 0, NORMAL, 250, now)
            silent = any(s <= now < e for s, e in silences)
            if not silent:
                for frame in frames:
                    service.accept(frame, now)
            if now % 1_000 == 0:
                service.sweep(now)

        liveness = [r.kind for r in service.log if r.kind in (EventKind.SITE_UP, EventKind.SITE_DOWN)]
        assert liveness[0] == EventKind.SITE_UP
        for a, b in zip(liveness, liveness[1:]):
            assert a != b, f"Pattern {pattern}: liveness events do not alternate: {liveness}"
        assert service.count(EventKind.SEQ_REJECT) == 0


def test_silenced_site_goes_down_once_and_comes_back():
    """Test a site silenced for 60 s logs exactly one SITE_DOWN and one SITE_UP on resumption."""
    service = NmcService()
    box = AlarmBoxState(site_id=7)
    for now in range(0, 120_001, 10):
        frames, box = alarm_box_poll(box, 0, NORMAL, 250, now)
        if not 30_000 < now < 90_000:
            for frame in frames:
                service.accept(frame, now)
        if now % 1_000 == 0:
            service.sweep(now)

    down = service.log.query(kind=EventKind.SITE_DOWN)
    up = service.log.query(kind=EventKind.SITE_UP)
    assert len(down) == 1
    assert down[0].ts_ms == 66_000, "Last heartbeat at 30 s, down on the first sweep past 35 s of silence"
    assert len(up) == 2
    assert up[0].ts_ms == 90_000


def test_fold_replay_equals_live_table():
    """Test the live table equals the fold of its accepted-frame journal."""
    rng = random.Random(8)
    service = NmcService()
    seqs = {site: 0 for site in range(1, 6)}
    for now in range(0, 200_000, 250):
        site = rng.randint(1, 5)
        if rng.random() < 0.1:
            seq = seqs[site]
        else:
            seqs[site] += 1
            seq = seqs[site]
        service.accept(encode_frame(_frame(site, seq, rng.choice([0, 0x01, 0x03, 0x0C, 0x10]))), now)
        if now % 1_000 == 0:
            service.sweep(now)

    assert service.replay() == service.table
    assert fold_frames(service.journal, service.last_sweep_ms) == service.table


def test_accepted_seq_strictly_increasing():
    rng = random.Random(21)
    table = NmcTable()
    accepted = []
    for now in range(2_000):
        records, table, ok = ingest_frame(table, _frame(1, rng.randint(1, 500)), now)
        if ok:
            accepted.append(table.get(1).last_seq)
    assert accepted == sorted(set(accepted))


def test_log_line_round_trip():
    rec = AlarmLogRecord(ts_ms=5030, site_id=1, kind=EventKind.DOOR_RAISE, flags=0x08, temp_tenths=203)
    line = format_log_record(rec)
    assert line == "ts=5030 site=1 event=DOOR_RAISE flags=0x08 temp=203"
    assert parse_log_record(line) == rec

    reject = AlarmLogRecord(ts_ms=9, site_id=0, kind=EventKind.CRC_REJECT, detail="BadCrc")
    assert format_log_record(reject).endswith(" detail=BadCrc")
    assert parse_log_record(format_log_record(reject)) == reject

    with pytest.raises(ValueError):
        parse_log_record("garbage")


def test_alarm_log_file_and_query(tmp_path):
    path = tmp_path / "nmc" / "alarm.log"
    service = NmcService(log=AlarmLog(path))
    service.accept(encode_frame(_frame(1, 1, 0x04)), 100)
    service.accept(encode_frame(_frame(2, 1, 0x08)), 200)
    service.accept(encode_frame(_frame(1, 2, 0x00)), 300)

    assert read_log_file(path) == service.log.records
    newest = service.log.query(site_id=1, limit=1)
    assert newest[0].kind == EventKind.SMOKE_CLEAR
    assert [r.site_id for r in service.log.query(kind=EventKind.SITE_UP)] == [2, 1]


def test_dump_site_table():
    _, table = nmc_ingest(NmcTable(), encode_frame(_frame(12, 3, 0x09, temp=312)), 4_000)
    _, table = nmc_ingest(table, encode_frame(_frame(2, 1)), 4_100)
    assert dump_site_table(table) == (
        "site=2 online=yes seq=1 last_ms=4100 flags=0x00 temp=250\n"
        "site=12 online=yes seq=3 last_ms=4000 flags=0x09 temp=312\n"
    )


def test_long_running_service_keeps_memory_bounded(tmp_path):
    """Test a day of frames leaves no journal and only the newest log records in memory."""
    path = tmp_path / "alarm.log"
    service = NmcService(log=AlarmLog(path, max_records=100), keep_journal=False)

    day_ms = 24 * 3600 * 1000
    for seq, t in enumerate(range(10_000, day_ms + 1, 10_000), start=1):
        flags = FLAG_HEARTBEAT | (0x08 if seq % 2 else 0x00)
        service.accept(encode_frame(_frame(1, seq, flags, ts=t)), t)
        service.sweep(t)

    assert service.journal == []
    assert service.frames_accepted == 8_640
    assert len(service.log) == 100

    on_disk = read_log_file(path)
    assert len(on_disk) == 8_641, "SITE_UP plus one DOOR transition per frame"
    assert service.log.records == on_disk[-100:]
    assert service.log.query(limit=1)[0] == on_disk[-1]

    with pytest.raises(RuntimeError):
        service.replay()


def test_alarm_log_rejects_empty_memory_bound():
    with pytest.raises(ValueError):
        AlarmLog(max_records=0)


@pytest.mark.parametrize("timeout_ms", [0, -5])
def test_service_rejects_non_positive_timeout(timeout_ms):
    with pytest.raises(InputDomainError):
        NmcService(offline_timeout_ms=timeout_ms)


def test_service_timeout_defaults_from_settings():
    assert NmcService().offline_timeout_ms == 35_000
    assert NmcService(offline_timeout_ms=1).offline_timeout_ms == 1
