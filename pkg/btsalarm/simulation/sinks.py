"""
Where the alarm box's frames go during a simulation.

InProcessNmc delivers them to an NmcService living in the simulator, with
optional seeded link jitter. TcpFrameSink streams them to an external NMC.
"""

import logging
import random
import socket
from abc import ABC, abstractmethod
from collections import deque
from typing import Deque, List, Optional, Tuple

from btsalarm.config import settings
from btsalarm.nmc.alarm_log import AlarmLogRecord
from btsalarm.nmc.protocol import NmcFrame, encode_frame
from btsalarm.nmc.service import NmcService

logger = logging.getLogger(__name__)


class FrameSink(ABC):
    """Receiver of alarm box frames, driven by the simulation clock"""

    frames_sent: int = 0

    @abstractmethod
    def send(self, frame: NmcFrame, clock_ms: int) -> None:
        """Hand one frame to the link"""

    @abstractmethod
    def tick(self, clock_ms: int) -> List[AlarmLogRecord]:
        """Advance the receiving side to clock_ms; returns NMC records produced"""

    @property
    def service(self) -> Optional[NmcService]:
        return None

    def close(self) -> None:
        pass


class InProcessNmc(FrameSink):
    """
    NMC in the simulator's own process.

    Frames cross the link as encoded octets so the codec is exercised. With
    jitter, each frame is delayed by a seeded whole number of ticks in
    0..jitter_max_ms but never overtakes the frame sent before it.
    """

    def __init__(
        self,
        service: Optional[NmcService] = None,
        jitter_max_ms: int = 0,
        seed: int = 0,
        tick_ms: Optional[int] = None,
        sweep_interval_ms: Optional[int] = None,
    ):
        self._service = service or NmcService()
        self.jitter_max_ms = jitter_max_ms
        self.tick_ms = tick_ms or settings.TICK_MS
        self.sweep_interval_ms = sweep_interval_ms or settings.NMC_SWEEP_INTERVAL_MS
        self._rng = random.Random(seed)
        self._pending: Deque[Tuple[int, bytes]] = deque()
        self._last_due_ms = 0
        self.frames_sent = 0

    @property
    def service(self) -> NmcService:
        return self._service

    def _delay(self) -> int:
        if self.jitter_max_ms <= 0:
            return 0
        return self._rng.randint(0, self.jitter_max_ms // self.tick_ms) * self.tick_ms

    def send(self, frame: NmcFrame, clock_ms: int) -> None:
        due_ms = max(clock_ms + self._delay(), self._last_due_ms)
        self._last_due_ms = due_ms
        self._pending.append((due_ms, encode_frame(frame)))
        self.frames_sent += 1

    def tick(self, clock_ms: int) -> List[AlarmLogRecord]:
        records: List[AlarmLogRecord] = []
        while self._pending and self._pending[0][0] <= clock_ms:
            _, raw = self._pending.popleft()
            records.extend(self._service.accept(raw, clock_ms))
        if clock_ms % self.sweep_interval_ms == 0:
            records.extend(self._service.sweep(clock_ms))
        return records


class TcpFrameSink(FrameSink):
    """Blocking stream to an external NMC; each send completes within the tick"""

    def __init__(self, host: str, port: int, timeout_s: float = 5.0):
        """
        Raises:
            ConnectionError: If the NMC cannot be reached
        """
        self.host = host
        self.port = port
        self.frames_sent = 0
        try:
            self._sock = socket.create_connection((host, port), timeout=timeout_s)
        except OSError as e:
            raise ConnectionError(f"Cannot connect to NMC at {host}:{port}: {e}") from e
        self._sock.setsockopt(socket.IPPROTO_TCP, socket.TCP_NODELAY, 1)
        logger.info(f"Connected to NMC at {host}:{port}")

    def send(self, frame: NmcFrame, clock_ms: int) -> None:
        try:
            self._sock.sendall(encode_frame(frame))
        except OSError as e:
            raise ConnectionError(f"Lost connection to NMC at {self.host}:{self.port}: {e}") from e
        self.frames_sent += 1

    def tick(self, clock_ms: int) -> List[AlarmLogRecord]:
        # the remote NMC keeps its own log
        return []

    def close(self) -> None:
        try:
            self._sock.shutdown(socket.SHUT_WR)
        except OSError:
            pass
        self._sock.close()
        logger.info(f"Closed NMC link after {self.frames_sent} frames")
