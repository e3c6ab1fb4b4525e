"""
CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, xorout 0x0000.

Check value: crc16_ccitt_false(b"123456789") == 0x29B1
"""

from typing import List

CRC16_POLY = 0x1021
CRC16_INIT = 0xFFFF


def _build_table() -> List[int]:
    table = []
    for byte in range(256):
        crc = byte << 8
        for _ in range(8):
            if crc & 0x8000:
                crc = ((crc << 1) ^ CRC16_POLY) & 0xFFFF
            else:
                crc = (crc << 1) & 0xFFFF
        table.append(crc)
    return table


_TABLE = _build_table()


def crc16_ccitt_false(data: bytes, init: int = CRC16_INIT) -> int:
    """
    Compute the CRC over a byte sequence (table driven, MSB first).

    Args:
        data: Bytes-like object
        init: Starting register value

    Returns:
        16-bit CRC
    """
    crc = init
    for byte in data:
        crc = ((crc << 8) & 0xFFFF) ^ _TABLE[((crc >> 8) ^ byte) & 0xFF]
    return crc
