"""
Byte-addressable data EEPROM with power-cycle persistence.

The persisted form is a raw 256-byte file: address N lives at offset N.
"""

import logging
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional, Tuple, Union

from btsalarm.errors import AddressError, InputDomainError, StorageError

logger = logging.getLogger(__name__)

EEPROM_SIZE = 256
ERASED = 0xFF

# EEPROM0 / EEPROM1
ADDR_ALERT = 0
ADDR_DANGER = 1

FACTORY_ALERT_C = 30
FACTORY_DANGER_C = 45


class EepromImage:
    """256 cells of data EEPROM, optionally mirrored to a file"""

    def __init__(self, data: Optional[bytes] = None, backing_path: Optional[Union[str, Path]] = None):
        """
        Args:
            data: Initial contents (exactly 256 bytes); factory image when None
            backing_path: File the image is persisted to on every write
        """
        if data is None:
            data = factory_bytes()
        if len(data) != EEPROM_SIZE:
            raise InputDomainError(f"EEPROM image must be {EEPROM_SIZE} bytes, got {len(data)}")
        self._cells = bytearray(data)
        self.backing_path = Path(backing_path) if backing_path is not None else None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EepromImage):
            return NotImplemented
        return self._cells == other._cells

    def __repr__(self) -> str:
        return f"EepromImage(alert={self._cells[ADDR_ALERT]}, danger={self._cells[ADDR_DANGER]}, path={self.backing_path})"

    def read(self, addr: int) -> int:
        _check_addr(addr)
        return self._cells[addr]

    def write(self, addr: int, value: int) -> None:
        self.write_many([(addr, value)])

    def write_many(self, cells: Iterable[Tuple[int, int]]) -> None:
        """
        Write several cells as one unit: either every cell reaches storage or
        none does.

        Raises:
            AddressError: If an address is outside 0..255
            InputDomainError: If a value is not an octet
            StorageError: If persistence fails (the image is left unchanged)
        """
        cells = list(cells)
        for addr, value in cells:
            _check_addr(addr)
            if not 0 <= value <= 255:
                raise InputDomainError(f"EEPROM value must be an octet, got {value}")

        previous = bytes(self._cells)
        for addr, value in cells:
            self._cells[addr] = value
        if self.backing_path is not None:
            try:
                self.persist()
            except StorageError:
                # cells keep their old values when the write never reached storage
                self._cells[:] = previous
                raise

    def to_bytes(self) -> bytes:
        return bytes(self._cells)

    def persist(self) -> None:
        """
        Write the image to backing_path durably (temp file, fsync, atomic replace).

        Raises:
            StorageError: If the file cannot be written
        """
        if self.backing_path is None:
            return

        path = self.backing_path
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp_name = tempfile.mkstemp(prefix=".eeprom-", dir=str(path.parent))
            try:
                with os.fdopen(fd, 'wb') as f:
                    f.write(self._cells)
                    f.flush()
                    os.fsync(f.fileno())
                os.replace(tmp_name, path)
            except BaseException:
                if os.path.exists(tmp_name):
                    os.unlink(tmp_name)
                raise
        except OSError as e:
            raise StorageError(f"Failed to persist EEPROM image to {path}: {e}") from e

        logger.debug(f"EEPROM image persisted to {path}")


def _check_addr(addr: int) -> None:
    if not 0 <= addr < EEPROM_SIZE:
        raise AddressError(f"EEPROM address must be in 0..{EEPROM_SIZE - 1}, got {addr}")


def factory_bytes(alert: int = FACTORY_ALERT_C, danger: int = FACTORY_DANGER_C) -> bytes:
    """Factory contents: thresholds at 0/1, every other cell erased (0xFF)"""
    cells = bytearray([ERASED] * EEPROM_SIZE)
    cells[ADDR_ALERT] = alert
    cells[ADDR_DANGER] = danger
    return bytes(cells)


def eeprom_factory(backing_path: Optional[Union[str, Path]] = None) -> EepromImage:
    return EepromImage(factory_bytes(), backing_path)


def eeprom_from_bytes(data: bytes, backing_path: Optional[Union[str, Path]] = None) -> EepromImage:
    return EepromImage(data, backing_path)


def eeprom_to_bytes(img: EepromImage) -> bytes:
    return img.to_bytes()


def eeprom_load(path: Union[str, Path]) -> EepromImage:
    """
    Load an image from its backing file.

    A missing file yields the factory image bound to that path; the file is
    created on the first write.

    Raises:
        InputDomainError: If the file is not exactly 256 bytes
        StorageError: If the file exists but cannot be read
    """
    path = Path(path)
    if not path.exists():
        logger.info(f"No EEPROM image at {path}, starting from factory contents")
        return eeprom_factory(path)

    try:
        data = path.read_bytes()
    except OSError as e:
        raise StorageError(f"Failed to read EEPROM image {path}: {e}") from e

    if len(data) != EEPROM_SIZE:
        raise InputDomainError(f"EEPROM file {path} must be {EEPROM_SIZE} bytes, got {len(data)}")
    return EepromImage(data, path)


def eeprom_read(img: EepromImage, addr: int) -> int:
    """
    Read one cell.

    Raises:
        AddressError: If addr is outside 0..255
    """
    return img.read(addr)


def eeprom_write(img: EepromImage, addr: int, value: int) -> EepromImage:
    """
    Write one cell; durable before return when the image has a backing file.

    Returns:
        The updated image

    Raises:
        AddressError: If addr is outside 0..255
        StorageError: If persistence fails
    """
    img.write(addr, value)
    return img


def eeprom_write_many(img: EepromImage, cells: Iterable[Tuple[int, int]]) -> EepromImage:
    """
    Write several cells with a single durable persist.

    Raises:
        AddressError: If an address is outside 0..255
        StorageError: If persistence fails; no cell is changed
    """
    img.write_many(cells)
    return img


def eeprom_power_cycle(img: EepromImage) -> EepromImage:
    """
    Model a power cycle: contents come back from the backing file, or from the
    cells themselves when the image is memory-only (EEPROM is non-volatile).
    """
    if img.backing_path is not None and img.backing_path.exists():
        return eeprom_load(img.backing_path)
    return EepromImage(img.to_bytes(), img.backing_path)
