"""
GPIO ports B, C and D and the controller pin map.

PORT B  seven-segment segments (gfedcba on bits 0..6)
PORT C  inputs: RC1 SET, RC2 UP, RC3 DOWN, RC5 smoke, RC6 door, RC7 water
PORT D  outputs: bits 0..2 digit commons, bits 4..7 relays (temp, smoke, door, water)
"""

from enum import Enum

from pydantic import BaseModel, Field

from btsalarm.errors import InputDomainError, PinDirectionError

# PORT C inputs
RC_SET = 1
RC_UP = 2
RC_DOWN = 3
RC_SMOKE = 5
RC_DOOR = 6
RC_WATER = 7

# PORT D outputs
RD_DIGIT_COMMONS = (0, 1, 2)
RD_RELAY_SHIFT = 4

# AN0
TEMPERATURE_CHANNEL = 0


class Port(str, Enum):
    B = "B"
    C = "C"
    D = "D"


OUTPUT_PORTS = frozenset({Port.B, Port.D})


class GpioState(BaseModel):
    """Pin levels of the three ports used by the controller"""
    port_b: int = Field(0, ge=0, le=0xFF)
    port_c: int = Field(0, ge=0, le=0xFF)
    port_d: int = Field(0, ge=0, le=0xFF)

    model_config = {"frozen": True}

    def relay_bits(self) -> int:
        """Relay nibble as driven on PORT D (bit0 temp .. bit3 water)"""
        return (self.port_d >> RD_RELAY_SHIFT) & 0x0F

    def commons(self) -> int:
        return self.port_d & 0x07


def _port_field(port: Port) -> str:
    return f"port_{port.value.lower()}"


def gpio_read_pin(gpio: GpioState, port: Port, bit: int) -> bool:
    """Return the level of one pin"""
    if not 0 <= bit <= 7:
        raise InputDomainError(f"pin index must be in 0..7, got {bit}")
    return bool((getattr(gpio, _port_field(port)) >> bit) & 1)


def gpio_write_port(gpio: GpioState, port: Port, value: int) -> GpioState:
    """
    Drive an output port.

    Raises:
        PinDirectionError: If port is the input port C
        InputDomainError: If value is not an 8-bit mask
    """
    if port not in OUTPUT_PORTS:
        raise PinDirectionError(f"PORT {port.value} is an input port")
    if not 0 <= value <= 0xFF:
        raise InputDomainError(f"port value must be 8-bit, got {value}")
    return gpio.model_copy(update={_port_field(port): value})


def gpio_set_inputs(gpio: GpioState, port_c: int) -> GpioState:
    """Field side: latch the levels presented on PORT C"""
    if not 0 <= port_c <= 0xFF:
        raise InputDomainError(f"port value must be 8-bit, got {port_c}")
    return gpio.model_copy(update={"port_c": port_c})


def pin_mask(*bits: int) -> int:
    mask = 0
    for bit in bits:
        mask |= 1 << bit
    return mask
