"""
Sensor transfer functions: scenario truth in, electrical levels out.
"""

from enum import IntEnum

from pydantic import BaseModel, Field

from btsalarm.errors import InputDomainError

LM35_MV_PER_C = 10.0
LM35_MAX_MV = 1500.0  # 150 °C, top of the linear region

TEMP_ENVELOPE_MIN_C = -40.0
TEMP_ENVELOPE_MAX_C = 150.0

DEFAULT_SMOKE_THRESHOLD = 0.07


class Level(IntEnum):
    """Logic level on an MCU input pin"""
    LOW = 0
    HIGH = 1


class SensorFrame(BaseModel):
    """Physical truth in the room at one tick"""
    temp_c: float = Field(25.0, ge=TEMP_ENVELOPE_MIN_C, le=TEMP_ENVELOPE_MAX_C)
    smoke_obscuration: float = Field(0.0, ge=0.0, le=1.0)
    door_open: bool = False
    water_wet: bool = False

    model_config = {"frozen": True}


class SampledLevels(BaseModel):
    """What the sensors present to the controller for one SensorFrame"""
    lm35_mv: float
    smoke: Level
    door: Level
    water: Level

    model_config = {"frozen": True}


def lm35_output(temp_c: float) -> float:
    """
    LM35 output voltage: 10 mV/°C, clamped to 0..1500 mV.

    Negative temperatures clamp to 0 mV in the single-supply wiring.
    """
    return min(max(LM35_MV_PER_C * temp_c, 0.0), LM35_MAX_MV)


def smoke_sample(obscuration: float, threshold: float = DEFAULT_SMOKE_THRESHOLD) -> Level:
    """
    Photoelectric detector output: HIGH once the beam obscuration reaches the
    threshold (inclusive).

    Raises:
        InputDomainError: If obscuration is outside [0, 1]
    """
    if not 0.0 <= obscuration <= 1.0:
        raise InputDomainError(f"smoke obscuration must be in [0, 1], got {obscuration}")
    return Level.HIGH if obscuration >= threshold else Level.LOW


def reed_sample(door_open: bool) -> Level:
    """
    Reed switch behind the opto-coupler. The door magnet holds the reed closed,
    the opto-coupler conducts and pulls the pin LOW; opening the door releases
    the reed and the pin goes HIGH.
    """
    return Level.HIGH if door_open else Level.LOW


def water_sample(wet: bool) -> Level:
    """Conductive seepage probe: wet floor pulls the sense line HIGH"""
    return Level.HIGH if wet else Level.LOW


def sample_frame(frame: SensorFrame, smoke_threshold: float = DEFAULT_SMOKE_THRESHOLD) -> SampledLevels:
    """Run every sensor model on one frame of room truth"""
    return SampledLevels(
        lm35_mv=lm35_output(frame.temp_c),
        smoke=smoke_sample(frame.smoke_obscuration, smoke_threshold),
        door=reed_sample(frame.door_open),
        water=water_sample(frame.water_wet),
    )
