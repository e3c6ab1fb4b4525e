"""
NMC TCP listener.

Every alarm box holds one stream connection and sends raw 22-octet frames.
Connection handlers only reassemble frames; all table and log mutations go
through a single writer task so the log is totally ordered.
"""

import asyncio
import logging
import time
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Tuple, Union

import aiofiles

from btsalarm.config import settings
from btsalarm.nmc.alarm_log import AlarmLogRecord, format_log_record
from btsalarm.nmc.service import NmcService
from btsalarm.nmc.stream import FrameStreamDecoder, StreamItem

logger = logging.getLogger(__name__)

READ_SIZE = 4096


def wall_clock_ms() -> int:
    return int(time.time() * 1000)


class _Op(Enum):
    FRAME = "frame"
    SWEEP = "sweep"


class NmcServer:
    """asyncio TCP front end for an NmcService"""

    def __init__(
        self,
        service: NmcService,
        host: Optional[str] = None,
        port: Optional[int] = None,
        log_path: Optional[Union[str, Path]] = None,
        sweep_interval_ms: Optional[int] = None,
        clock: Callable[[], int] = wall_clock_ms,
    ):
        """
        Args:
            service: Service owning the site table
            host: Listen address (NMC_LISTEN_HOST)
            port: Listen port, 0 picks a free one (NMC_LISTEN_PORT)
            log_path: Alarm log file appended by the writer task (none when None)
            sweep_interval_ms: Heartbeat sweep period (NMC_SWEEP_INTERVAL_MS)
            clock: Arrival clock in milliseconds
        """
        self.service = service
        self.host = host if host is not None else settings.NMC_LISTEN_HOST
        self.port = port if port is not None else settings.NMC_LISTEN_PORT
        self.log_path = Path(log_path) if log_path is not None else None
        self.sweep_interval_ms = sweep_interval_ms or settings.NMC_SWEEP_INTERVAL_MS
        self.clock = clock

        self.connections = 0
        self._server: Optional[asyncio.AbstractServer] = None
        self._queue: "asyncio.Queue[Tuple[_Op, Optional[StreamItem], int]]" = asyncio.Queue()
        self._writer_task: Optional[asyncio.Task] = None
        self._sweep_task: Optional[asyncio.Task] = None
        self._log_file = None

    @property
    def bound_port(self) -> int:
        """Actual listening port (useful when started with port 0)"""
        if self._server is None or not self._server.sockets:
            return self.port
        return self._server.sockets[0].getsockname()[1]

    async def start(self) -> None:
        if self.log_path is not None:
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            self._log_file = await aiofiles.open(self.log_path, 'a', encoding='utf-8')

        self._writer_task = asyncio.create_task(self._writer_loop())
        self._sweep_task = asyncio.create_task(self._sweep_loop())
        self._server = await asyncio.start_server(self._handle_connection, self.host, self.port)
        logger.info(f"NMC listening on {self.host}:{self.bound_port}, log {self.log_path or '(memory)'}")

    async def serve_forever(self) -> None:
        if self._server is None:
            await self.start()
        async with self._server:
            await self._server.serve_forever()

    async def drain(self) -> None:
        """Wait until every queued frame and sweep has been applied"""
        await self._queue.join()

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        for task in (self._sweep_task, self._writer_task):
            if task is not None:
                task.cancel()
                try:
                    await task
                except asyncio.CancelledError:
                    pass
        if self._log_file is not None:
            await self._log_file.close()
            self._log_file = None
        logger.info("NMC stopped")

    async def _handle_connection(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        peer = writer.get_extra_info('peername')
        self.connections += 1
        logger.info(f"Alarm box connected from {peer}. Active connections: {self.connections}")

        decoder = FrameStreamDecoder()
        try:
            while True:
                data = await reader.read(READ_SIZE)
                if not data:
                    break
                arrival = self.clock()
                for item in decoder.feed(data):
                    await self._queue.put((_Op.FRAME, item, arrival))
        except (ConnectionError, asyncio.IncompleteReadError) as e:
            logger.warning(f"Connection from {peer} failed: {e}")
        finally:
            self.connections -= 1
            writer.close()
            try:
                await writer.wait_closed()
            except ConnectionError:
                pass
            logger.info(
                f"Alarm box {peer} disconnected after {decoder.frames_decoded} frames "
                f"({decoder.rejects} rejects). Active connections: {self.connections}"
            )

    async def _sweep_loop(self) -> None:
        while True:
            await asyncio.sleep(self.sweep_interval_ms / 1000)
            await self._queue.put((_Op.SWEEP, None, self.clock()))

    async def _writer_loop(self) -> None:
        while True:
            op, item, clock_ms = await self._queue.get()
            try:
                if op == _Op.FRAME:
                    records = self.service.accept(item, clock_ms)
                else:
                    records = self.service.sweep(clock_ms)
                await self._append(records)
            except Exception as e:
                logger.exception(f"Unexpected error applying {op.value} at {clock_ms}: {e}")
            finally:
                self._queue.task_done()

    async def _append(self, records: list[AlarmLogRecord]) -> None:
        if not records or self._log_file is None:
            return
        await self._log_file.write("".join(format_log_record(r) + "\n" for r in records))
        await self._log_file.flush()
