"""
Exception hierarchy shared by the simulator, firmware and NMC service.

Input problems are ValueError subclasses so callers can keep catching
ValueError; storage problems are OSError subclasses.
"""

from enum import Enum


class InputDomainError(ValueError):
    """A value lies outside the domain an operation accepts"""


class AddressError(ValueError):
    """EEPROM address outside 0..255"""


class EncodingError(ValueError):
    """A value cannot be encoded (display glyph, frame field)"""


class PinDirectionError(ValueError):
    """Firmware attempted to drive an input port"""


class SimulationConfigError(ValueError):
    """Invalid simulation parameters (duration, tick, jitter)"""


class ScenarioError(ValueError):
    """Malformed scenario line"""

    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"line {line_no}: {reason}")


class StorageError(OSError):
    """Persisting the EEPROM image failed"""


class RejectReason(str, Enum):
    """Why an NMC frame was refused"""
    TRUNCATED = "Truncated"
    BAD_MAGIC = "BadMagic"
    BAD_VERSION = "BadVersion"
    BAD_CRC = "BadCrc"
    BAD_FLAGS = "BadFlags"


class FrameRejected(ValueError):
    """Raised by decode_frame; carries the reject reason"""

    def __init__(self, reason: RejectReason, message: str = ""):
        self.reason = reason
        super().__init__(f"{reason.value}: {message}" if message else reason.value)
