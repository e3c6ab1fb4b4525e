"""
Firmware data types: thresholds, statuses, alarm outputs and settings FSM.
"""

from enum import Enum, IntEnum
from typing import Optional, Tuple

from pydantic import BaseModel, Field, model_validator

from btsalarm.mcu.display import BLANK_FRAME, DisplayFrame
from btsalarm.mcu.eeprom import FACTORY_ALERT_C, FACTORY_DANGER_C
from btsalarm.mcu.gpio import GpioState
from btsalarm.sensors.debounce import Debouncer

THRESHOLD_MIN_C = 0
THRESHOLD_MAX_C = 100


class Thresholds(BaseModel):
    """Alert (EEPROM0) and danger (EEPROM1) thresholds in whole °C"""
    t_alert: int = Field(FACTORY_ALERT_C, ge=THRESHOLD_MIN_C, le=THRESHOLD_MAX_C)
    t_danger: int = Field(FACTORY_DANGER_C, ge=THRESHOLD_MIN_C, le=THRESHOLD_MAX_C)

    model_config = {"frozen": True}

    @model_validator(mode='after')
    def alert_not_above_danger(self) -> 'Thresholds':
        if self.t_alert > self.t_danger:
            raise ValueError(f"t_alert ({self.t_alert}) must not exceed t_danger ({self.t_danger})")
        return self

    def __str__(self) -> str:
        return f"{self.t_alert}/{self.t_danger}"


FACTORY_THRESHOLDS = Thresholds()


class TempStatus(IntEnum):
    """Temperature band, ordered NORMAL < ALERT < DANGER"""
    NORMAL = 0
    ALERT = 1
    DANGER = 2


# relay_bits layout
RELAY_TEMP = 0x1
RELAY_SMOKE = 0x2
RELAY_DOOR = 0x4
RELAY_WATER = 0x8


class AlarmState(BaseModel):
    """Per-channel alarm statuses and the relay nibble driven to the alarm box"""
    temp_status: TempStatus = TempStatus.NORMAL
    smoke_active: bool = False
    door_active: bool = False
    water_active: bool = False
    relay_bits: int = Field(0, ge=0, le=0x0F)
    temp_c: float = 0.0
    storage_fault: bool = False

    model_config = {"frozen": True}

    @model_validator(mode='after')
    def relays_mirror_channels(self) -> 'AlarmState':
        if self.relay_bits != relay_bits_for(self.temp_status, self.smoke_active, self.door_active, self.water_active):
            raise ValueError(f"relay bits 0x{self.relay_bits:X} disagree with channel states")
        return self


def relay_bits_for(temp_status: TempStatus, smoke: bool, door: bool, water: bool) -> int:
    bits = 0
    if temp_status >= TempStatus.ALERT:
        bits |= RELAY_TEMP
    if smoke:
        bits |= RELAY_SMOKE
    if door:
        bits |= RELAY_DOOR
    if water:
        bits |= RELAY_WATER
    return bits


class SettingsMode(str, Enum):
    RUN = "RUN"
    EDIT_ALERT = "EDIT_ALERT"
    EDIT_DANGER = "EDIT_DANGER"


class Button(IntEnum):
    """Setting switches; lower value wins when pressed together"""
    SET = 0
    UP = 1
    DOWN = 2


class SettingsFsm(BaseModel):
    """Button-driven threshold editor"""
    mode: SettingsMode = SettingsMode.RUN
    pending: Thresholds = FACTORY_THRESHOLDS
    blink_phase: bool = True

    model_config = {"frozen": True}


class FirmwareState(BaseModel):
    """Everything the controller keeps in RAM between ticks"""
    fsm: SettingsFsm = Field(default_factory=SettingsFsm)
    thresholds: Thresholds = FACTORY_THRESHOLDS
    door_debouncer: Debouncer = Field(default_factory=Debouncer)
    water_debouncer: Debouncer = Field(default_factory=Debouncer)
    prev_buttons: int = Field(0, ge=0, le=0xFF)
    tick: int = Field(0, ge=0)
    alarm: AlarmState = Field(default_factory=AlarmState)
    display: DisplayFrame = BLANK_FRAME

    model_config = {"frozen": True}


class TickResult(BaseModel):
    """Outputs of one firmware tick"""
    alarm: AlarmState
    display: DisplayFrame
    gpio: GpioState
    state: FirmwareState
    eeprom_writes: Tuple[Tuple[int, int], ...] = ()
    committed: Optional[Thresholds] = None

    model_config = {"frozen": True}
