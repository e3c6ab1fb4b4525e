"""
Frame reassembly over a byte stream.

Frames are fixed length, so the decoder only has to find the magic. After a
CRC failure it slides one octet past the suspected magic and scans again.
"""

import logging
from typing import List, Union

from btsalarm.errors import FrameRejected, RejectReason
from btsalarm.nmc.protocol import FRAME_LEN, MAGIC, NmcFrame, decode_frame

logger = logging.getLogger(__name__)

StreamItem = Union[NmcFrame, FrameRejected]


class FrameStreamDecoder:
    """Incremental decoder; feed() whatever the socket returned"""

    def __init__(self):
        self._buffer = bytearray()
        self.frames_decoded = 0
        self.rejects = 0

    @property
    def pending(self) -> int:
        """Octets held back waiting for the rest of a frame"""
        return len(self._buffer)

    def feed(self, data: bytes) -> List[StreamItem]:
        """
        Append received octets and extract every complete frame.

        Returns:
            Decoded frames and FrameRejected items, in stream order
        """
        self._buffer.extend(data)
        items: List[StreamItem] = []

        while True:
            start = self._buffer.find(MAGIC)
            if start < 0:
                # keep a trailing first magic octet, it may start the next frame
                keep = 1 if self._buffer[-1:] == MAGIC[:1] else 0
                skipped = len(self._buffer) - keep
                if skipped:
                    items.append(self._reject(RejectReason.BAD_MAGIC, f"skipped {skipped} octets"))
                    del self._buffer[:skipped]
                break

            if start > 0:
                items.append(self._reject(RejectReason.BAD_MAGIC, f"skipped {start} octets"))
                del self._buffer[:start]

            if len(self._buffer) < FRAME_LEN:
                break

            try:
                frame = decode_frame(bytes(self._buffer[:FRAME_LEN]))
            except FrameRejected as e:
                self.rejects += 1
                items.append(e)
                if e.reason == RejectReason.BAD_CRC:
                    del self._buffer[:1]
                else:
                    del self._buffer[:FRAME_LEN]
                continue

            del self._buffer[:FRAME_LEN]
            self.frames_decoded += 1
            items.append(frame)

        return items

    def _reject(self, reason: RejectReason, message: str) -> FrameRejected:
        self.rejects += 1
        logger.debug(f"Stream resync: {message}")
        return FrameRejected(reason, message)
