"""
Command line interface: python -m btsalarm <command> ...

Exit codes: 0 success, 1 input error, 2 connection failure.
"""

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Awaitable, List, Optional

from btsalarm.config import parse_host_port, settings
from btsalarm.errors import FrameRejected
from btsalarm.firmware.models import Thresholds
from btsalarm.mcu.eeprom import FACTORY_ALERT_C, FACTORY_DANGER_C, eeprom_factory, eeprom_from_bytes, eeprom_load, factory_bytes
from btsalarm.nmc.protocol import CHANNEL_FLAGS, NmcFrame, decode_frame, encode_frame

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_CONNECTION_ERROR = 2


def _setup_logging(level: Optional[str]) -> None:
    level = (level or settings.LOG_LEVEL).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        stream=sys.stderr,
    )


def _parse_hex(text: str) -> bytes:
    cleaned = "".join(text.split()).replace(":", "").replace("-", "")
    if cleaned.lower().startswith("0x"):
        cleaned = cleaned[2:]
    try:
        return bytes.fromhex(cleaned)
    except ValueError:
        raise ValueError(f"not a hex string: {text!r}")


def describe_frame(frame: NmcFrame) -> str:
    active = [name for bit, name in CHANNEL_FLAGS if frame.flags & bit] or ["none"]
    return (
        f"site={frame.site_id} seq={frame.seq} ts={frame.timestamp_ms} "
        f"flags=0x{frame.flags:02x} temp={frame.temp_tenths} "
        f"heartbeat={'yes' if frame.is_heartbeat else 'no'} alarms={','.join(active)}"
    )


def cmd_simulate(args: argparse.Namespace) -> int:
    from btsalarm.simulation.runner import SimulationConfig, Simulator
    from btsalarm.simulation.scenario import load_scenario
    from btsalarm.simulation.sinks import TcpFrameSink
    from btsalarm.simulation.trace import emit_trace

    events = load_scenario(args.scenario)

    eeprom_path = args.eeprom or settings.EEPROM_PATH
    eeprom = eeprom_load(eeprom_path) if eeprom_path else eeprom_factory()

    config = SimulationConfig(
        site_id=args.site_id if args.site_id is not None else settings.SITE_ID,
        jitter_max_ms=args.jitter_ms if args.jitter_ms is not None else settings.NMC_JITTER_MAX_MS,
    )

    sink = None
    if args.connect:
        host, port = parse_host_port(args.connect, settings.NMC_LISTEN_PORT)
        sink = TcpFrameSink(host, port)

    trace = Simulator(events, args.duration, seed=args.seed, eeprom=eeprom, sink=sink, config=config).run()
    text = emit_trace(trace, args.format)

    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding='utf-8')
        logger.info(f"Trace written to {out} ({len(trace.records)} records)")
    else:
        sys.stdout.write(text)
    return EXIT_OK


async def run_until_first_exits(*aws: Awaitable) -> None:
    """
    Run awaitables side by side until one of them finishes, then cancel the
    rest. uvicorn traps SIGINT and returns from serve(); the TCP listener
    must stop with it.
    """
    tasks = [asyncio.ensure_future(aw) for aw in aws]
    try:
        done, _ = await asyncio.wait(tasks, return_when=asyncio.FIRST_COMPLETED)
    finally:
        for task in tasks:
            if not task.done():
                task.cancel()
        await asyncio.gather(*tasks, return_exceptions=True)

    for task in done:
        if not task.cancelled() and task.exception() is not None:
            raise task.exception()


async def _serve(args: argparse.Namespace) -> None:
    from btsalarm.api.routes import set_nmc_service
    from btsalarm.nmc.alarm_log import AlarmLog
    from btsalarm.nmc.server import NmcServer
    from btsalarm.nmc.service import NmcService

    host, port = parse_host_port(args.listen, settings.NMC_LISTEN_PORT)
    # the log file is the durable record; memory holds only what the API serves
    service = NmcService(
        log=AlarmLog(max_records=settings.NMC_LOG_MEMORY_RECORDS),
        offline_timeout_ms=args.timeout_ms,
        keep_journal=False,
    )
    server = NmcServer(service, host=host, port=port, log_path=args.log, sweep_interval_ms=args.sweep_ms)
    await server.start()

    tasks = [server.serve_forever()]
    if args.http:
        import uvicorn
        from btsalarm.main import app

        set_nmc_service(service)
        api_host, api_port = parse_host_port(args.http, settings.API_PORT)
        http = uvicorn.Server(uvicorn.Config(app, host=api_host, port=api_port, log_level=settings.LOG_LEVEL.lower()))
        tasks.append(http.serve())
        logger.info(f"Status API on http://{api_host}:{api_port}/api/sites")

    try:
        await run_until_first_exits(*tasks)
    finally:
        await server.stop()


def cmd_nmc_serve(args: argparse.Namespace) -> int:
    try:
        asyncio.run(_serve(args))
    except KeyboardInterrupt:
        logger.info("Interrupted, shutting down")
    return EXIT_OK


def cmd_encode_frame(args: argparse.Namespace) -> int:
    frame = NmcFrame(
        site_id=args.site,
        seq=args.seq,
        timestamp_ms=args.ts,
        flags=args.flags,
        temp_tenths=args.temp,
    )
    print(encode_frame(frame).hex())
    return EXIT_OK


def cmd_decode_frame(args: argparse.Namespace) -> int:
    raw = _parse_hex(args.hex)
    try:
        frame = decode_frame(raw)
    except FrameRejected as e:
        print(f"reject reason={e.reason.value}: {e}")
        return EXIT_INPUT_ERROR
    print(describe_frame(frame))
    return EXIT_OK


def cmd_eeprom_init(args: argparse.Namespace) -> int:
    thresholds = Thresholds(t_alert=args.alert, t_danger=args.danger)
    img = eeprom_from_bytes(factory_bytes(thresholds.t_alert, thresholds.t_danger), backing_path=args.out)
    img.persist()
    logger.info(f"EEPROM image with thresholds {thresholds} written to {args.out}")
    return EXIT_OK


def _int(text: str) -> int:
    """Accept decimal or 0x-prefixed integers"""
    return int(text, 0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="btsalarm",
        description="BTS room multiple-alarm controller simulator and NMC service",
    )
    parser.add_argument("--log-level", default=None, help=f"Logging level (default {settings.LOG_LEVEL})")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="Replay a scenario and print the transition trace")
    sim.add_argument("--scenario", required=True, help="Scenario file")
    sim.add_argument("--duration", required=True, type=int, help="Run length in ms (multiple of the tick)")
    sim.add_argument("--eeprom", default=None, help="EEPROM image file (factory image when omitted)")
    sim.add_argument("--out", default=None, help="Trace output file (stdout when omitted)")
    sim.add_argument("--format", default="plain", choices=["plain", "tsv"], help="Trace format")
    sim.add_argument("--connect", default=None, help="Stream frames to an external NMC at host:port")
    sim.add_argument("--site-id", type=int, default=None, help=f"Alarm box site id (default {settings.SITE_ID})")
    sim.add_argument("--seed", type=int, default=0, help="Seed for NMC link jitter")
    sim.add_argument("--jitter-ms", type=int, default=None, help="Maximum in-process link delay in ms")
    sim.set_defaults(func=cmd_simulate)

    serve = sub.add_parser("nmc-serve", help="Run the NMC aggregation service")
    serve.add_argument(
        "--listen", default=f"{settings.NMC_LISTEN_HOST}:{settings.NMC_LISTEN_PORT}", help="TCP listen address",
    )
    serve.add_argument("--log", default=settings.NMC_LOG_PATH, help="Alarm log file")
    serve.add_argument("--timeout-ms", type=int, default=settings.NMC_OFFLINE_TIMEOUT_MS, help="Offline timeout")
    serve.add_argument("--sweep-ms", type=int, default=settings.NMC_SWEEP_INTERVAL_MS, help="Sweep interval")
    serve.add_argument("--http", default=None, help="Also serve the status API at host:port")
    serve.set_defaults(func=cmd_nmc_serve)

    enc = sub.add_parser("encode-frame", help="Encode an NMC frame and print it as hex")
    enc.add_argument("--site", type=_int, required=True)
    enc.add_argument("--seq", type=_int, required=True)
    enc.add_argument("--ts", type=_int, default=0, help="Timestamp in ms")
    enc.add_argument("--flags", type=_int, default=0)
    enc.add_argument("--temp", type=_int, default=0, help="Temperature in tenths of °C")
    enc.set_defaults(func=cmd_encode_frame)

    dec = sub.add_parser("decode-frame", help="Decode a hex NMC frame")
    dec.add_argument("hex", help="Frame octets in hex")
    dec.set_defaults(func=cmd_decode_frame)

    init = sub.add_parser("eeprom-init", help="Write a 256-byte EEPROM image")
    init.add_argument("--out", required=True, help="Image file to create")
    init.add_argument("--alert", type=int, default=FACTORY_ALERT_C)
    init.add_argument("--danger", type=int, default=FACTORY_DANGER_C)
    init.set_defaults(func=cmd_eeprom_init)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(args.log_level)

    try:
        return args.func(args)
    except ConnectionError as e:
        logger.error(str(e))
        return EXIT_CONNECTION_ERROR
    except (ValueError, FileNotFoundError) as e:
        logger.error(str(e))
        return EXIT_INPUT_ERROR
    except OSError as e:
        logger.error(f"{args.command} failed: {e}")
        return EXIT_CONNECTION_ERROR if args.command == "nmc-serve" else EXIT_INPUT_ERROR
