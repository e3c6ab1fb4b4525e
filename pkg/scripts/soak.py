"""
Multi-site Soak Script
Streams many simulated alarm boxes into one NMC over TCP and checks the final
site table against the replay of the accepted frames
"""

import argparse
import asyncio
import os
import random
import sys
import time
from pathlib import Path

# Add parent directory to path
sys.path.insert(0, str(Path(__file__).parent.parent))

import httpx
from dotenv import load_dotenv

from btsalarm.firmware.models import RELAY_DOOR, RELAY_SMOKE, RELAY_WATER, TempStatus
from btsalarm.nmc.alarm_box import AlarmBoxState, alarm_box_poll
from btsalarm.nmc.alarm_log import EventKind
from btsalarm.nmc.protocol import encode_frame
from btsalarm.nmc.server import NmcServer
from btsalarm.nmc.service import NmcService
from btsalarm.simulation.clock import VirtualClock

load_dotenv()

API_BASE_URL = os.getenv("API_BASE_URL", "http://localhost:8000")


async def stream_boxes(host: str, port: int, sites: int, duration_ms: int, clock: VirtualClock, seed: int) -> int:
    """Run every box over the same virtual timeline; returns frames sent"""
    rng = random.Random(seed)
    boxes = [AlarmBoxState(site_id=i + 1) for i in range(sites)]
    relays = [0] * sites
    writers = [(await asyncio.open_connection(host, port))[1] for _ in range(sites)]
    sent = 0

    while clock.now() <= duration_ms:
        now = clock.now()
        for i in range(sites):
            if rng.random() < 0.005:
                relays[i] ^= rng.choice([RELAY_SMOKE, RELAY_DOOR, RELAY_WATER])
            frames, boxes[i] = alarm_box_poll(boxes[i], relays[i], TempStatus.NORMAL, 240, now)
            for frame in frames:
                writers[i].write(encode_frame(frame))
                sent += 1
        if now % 1_000 == 0:
            await asyncio.gather(*(w.drain() for w in writers))
        clock.advance()

    for writer in writers:
        writer.close()
    await asyncio.gather(*(w.wait_closed() for w in writers))
    return sent


async def run_local(sites: int, duration_ms: int, seed: int, log_path: str) -> bool:
    clock = VirtualClock()
    service = NmcService()
    server = NmcServer(service, host="127.0.0.1", port=0, log_path=log_path, clock=clock.now)
    await server.start()

    start_time = time.time()
    try:
        sent = await stream_boxes("127.0.0.1", server.bound_port, sites, duration_ms, clock, seed)
        while server.connections:
            await asyncio.sleep(0.01)
        await server.drain()
    finally:
        await server.stop()
    elapsed = time.time() - start_time

    replay_ok = service.replay() == service.table
    seq_rejects = service.count(EventKind.SEQ_REJECT)
    print(f"  Sites:          {len(service.table.sites)}/{sites}")
    print(f"  Frames:         {service.frames_accepted} accepted / {sent} sent")
    print(f"  SEQ_REJECT:     {seq_rejects}")
    print(f"  Replay oracle:  {'match' if replay_ok else 'MISMATCH'}")
    print(f"  Runtime:        {elapsed:.2f}s")
    return replay_ok and seq_rejects == 0 and service.frames_accepted == sent


async def run_remote(host: str, port: int, sites: int, duration_ms: int, seed: int) -> bool:
    sent = await stream_boxes(host, port, sites, duration_ms, VirtualClock(), seed)
    print(f"  Frames sent:    {sent}")
    try:
        async with httpx.AsyncClient(base_url=API_BASE_URL, timeout=5) as client:
            health = (await client.get("/health")).json()
        print(f"  NMC reports:    {health['sites']} sites, {health['frames_accepted']} frames accepted")
    except httpx.HTTPError as e:
        print(f"  Status API not reachable at {API_BASE_URL}: {e}")
    return True


def main():
    parser = argparse.ArgumentParser(description="Soak an NMC with simulated alarm boxes")
    parser.add_argument("--sites", type=int, default=50)
    parser.add_argument("--duration", type=int, default=60_000, help="Virtual ms")
    parser.add_argument("--seed", type=int, default=50)
    parser.add_argument("--target", default=None, help="External NMC host:port (in-process when omitted)")
    parser.add_argument("--log", default="./data/nmc/soak.log", help="Alarm log for the in-process NMC")
    args = parser.parse_args()

    print("=" * 80)
    print(f"Soak: {args.sites} alarm boxes, {args.duration} virtual ms")
    print("=" * 80)

    if args.target:
        host, _, port = args.target.rpartition(":")
        ok = asyncio.run(run_remote(host or "127.0.0.1", int(port), args.sites, args.duration, args.seed))
    else:
        ok = asyncio.run(run_local(args.sites, args.duration, args.seed, args.log))

    print("✅ Soak passed" if ok else "❌ Soak failed")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
