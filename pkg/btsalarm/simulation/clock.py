"""
Virtual clock for the simulator.

Time is integer milliseconds since the start of the scenario and only moves
when stepped; the wall clock is never consulted.
"""

import logging

from btsalarm.errors import SimulationConfigError

logger = logging.getLogger(__name__)


class VirtualClock:
    """Fixed-step millisecond clock"""

    def __init__(self, tick_ms: int = 10):
        if tick_ms <= 0:
            raise SimulationConfigError(f"tick must be > 0 ms, got {tick_ms}")
        self.tick_ms = tick_ms
        self._now_ms = 0

    def now(self) -> int:
        return self._now_ms

    @property
    def tick_index(self) -> int:
        return self._now_ms // self.tick_ms

    def advance(self) -> int:
        """Step one tick; returns the new time"""
        self._now_ms += self.tick_ms
        return self._now_ms

    def advance_to(self, target_ms: int) -> int:
        """
        Jump forward to target_ms; returns the new time.

        Raises:
            SimulationConfigError: If target_ms is in the past
        """
        if target_ms < self._now_ms:
            raise SimulationConfigError(f"Cannot move clock backwards from {self._now_ms} to {target_ms}")
        self._now_ms = target_ms
        return self._now_ms

    def reset(self) -> None:
        self._now_ms = 0
        logger.debug("VirtualClock reset to 0")
