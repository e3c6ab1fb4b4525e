"""
The controller main loop, one call per 10 ms tick.

Each tick reads the sensor pins on PORT C and the AN0 conversion, decodes and
classifies the temperature against the EEPROM thresholds, runs the settings
menu on button edges, drives the relays on the PORT D high nibble and
refreshes the multiplexed display.
"""

import logging
from typing import FrozenSet, List, Optional, Tuple

from pydantic import BaseModel, Field

from btsalarm.config import settings
from btsalarm.errors import StorageError
from btsalarm.firmware.classify import classify_temperature, decode_temperature, round_half_up
from btsalarm.firmware.models import (
    AlarmState, Button, FirmwareState, SettingsFsm, SettingsMode, Thresholds,
    TickResult, relay_bits_for,
)
from btsalarm.firmware.settings_fsm import EepromWrite, load_thresholds, settings_step
from btsalarm.mcu.adc import AdcConfig
from btsalarm.mcu.display import DisplayFrame, display_multiplex
from btsalarm.mcu.eeprom import EepromImage, eeprom_write_many
from btsalarm.mcu.gpio import (
    RC_DOOR, RC_DOWN, RC_SET, RC_SMOKE, RC_UP, RC_WATER, RD_RELAY_SHIFT,
    GpioState, Port, gpio_write_port, pin_mask,
)
from btsalarm.sensors.debounce import Debouncer, debounce_step
from btsalarm.sensors.models import Level

logger = logging.getLogger(__name__)

BUTTON_PINS = {Button.SET: RC_SET, Button.UP: RC_UP, Button.DOWN: RC_DOWN}
BUTTON_MASK = pin_mask(RC_SET, RC_UP, RC_DOWN)


class FirmwareConfig(BaseModel):
    """Build-time constants of the controller program"""
    adc: AdcConfig = Field(default_factory=lambda: AdcConfig(vref_mv=settings.ADC_VREF_MV))
    debounce_run: int = Field(default_factory=lambda: settings.DEBOUNCE_RUN, ge=1, le=255)
    blink_ticks: int = Field(default_factory=lambda: settings.BLINK_TICKS, gt=0)
    display_subticks: int = Field(default_factory=lambda: settings.DISPLAY_SUBTICKS_PER_TICK, gt=0)

    model_config = {"frozen": True}


def firmware_boot(eeprom: EepromImage, cfg: Optional[FirmwareConfig] = None) -> FirmwareState:
    """
    Power-on: declare the channel variables and read the preset thresholds
    from the EEPROM.
    """
    cfg = cfg or FirmwareConfig()
    thresholds = load_thresholds(eeprom)
    logger.info(f"Firmware boot with thresholds {thresholds}")
    return FirmwareState(
        fsm=SettingsFsm(pending=thresholds),
        thresholds=thresholds,
        door_debouncer=Debouncer(required_run=cfg.debounce_run),
        water_debouncer=Debouncer(required_run=cfg.debounce_run),
    )


def buttons_from_port(port_c: int, previous: int) -> FrozenSet[Button]:
    """Buttons whose pin rose since the previous sample"""
    edges = (port_c & ~previous) & BUTTON_MASK
    if not edges:
        return frozenset()
    return frozenset(b for b, pin in BUTTON_PINS.items() if edges & (1 << pin))


def _apply_writes(eeprom: EepromImage, writes: List[EepromWrite]) -> bool:
    """Perform the commit as one EEPROM update; False when persistence failed"""
    try:
        eeprom_write_many(eeprom, writes)
    except StorageError as e:
        logger.error(f"EEPROM commit failed: {e}")
        return False
    return True


def _display_value(temp_c: float, fsm: SettingsFsm) -> Tuple[int, bool]:
    if fsm.mode == SettingsMode.EDIT_ALERT:
        return fsm.pending.t_alert, fsm.blink_phase
    if fsm.mode == SettingsMode.EDIT_DANGER:
        return fsm.pending.t_danger, fsm.blink_phase
    return round_half_up(temp_c), True


def firmware_tick(
    gpio: GpioState,
    adc_code: int,
    state: FirmwareState,
    eeprom: EepromImage,
    cfg: Optional[FirmwareConfig] = None,
) -> TickResult:
    """
    Run one 10 ms pass of the controller program.

    Args:
        gpio: Port levels at the start of the tick (PORT C carries the inputs)
        adc_code: AN0 conversion result for this tick
        state: Firmware RAM from the previous tick
        eeprom: Data EEPROM (written only when a settings commit happens)
        cfg: Firmware constants

    Returns:
        TickResult with the alarm state, display frame, driven GPIO and new RAM
    """
    cfg = cfg or FirmwareConfig()
    port_c = gpio.port_c

    # Discrete channels
    smoke_active = bool((port_c >> RC_SMOKE) & 1)
    door_db, door_level = debounce_step(state.door_debouncer, Level((port_c >> RC_DOOR) & 1))
    water_db, water_level = debounce_step(state.water_debouncer, Level((port_c >> RC_WATER) & 1))

    # Settings menu
    buttons = buttons_from_port(port_c, state.prev_buttons)
    fsm, writes = settings_step(state.fsm, buttons, eeprom)

    thresholds = state.thresholds
    storage_fault = state.alarm.storage_fault
    committed: Optional[Thresholds] = None
    if writes:
        if _apply_writes(eeprom, writes):
            thresholds = fsm.pending
            committed = thresholds
            storage_fault = False
            logger.info(f"Thresholds {thresholds} stored in EEPROM")
        else:
            # Run mode must mirror what is actually persisted
            thresholds = load_thresholds(eeprom)
            fsm = fsm.model_copy(update={"pending": thresholds})
            storage_fault = True

    if fsm.mode != SettingsMode.RUN:
        blink_phase = (state.tick // cfg.blink_ticks) % 2 == 0
        if blink_phase != fsm.blink_phase:
            fsm = fsm.model_copy(update={"blink_phase": blink_phase})

    # Temperature
    temp_c = decode_temperature(adc_code, cfg.adc)
    temp_status = classify_temperature(temp_c, thresholds)

    relays = relay_bits_for(temp_status, smoke_active, door_level == Level.HIGH, water_level == Level.HIGH)
    alarm = AlarmState(
        temp_status=temp_status,
        smoke_active=smoke_active,
        door_active=door_level == Level.HIGH,
        water_active=water_level == Level.HIGH,
        relay_bits=relays,
        temp_c=temp_c,
        storage_fault=storage_fault,
    )

    # Display: several 5 ms strobes per firmware tick
    value, visible = _display_value(temp_c, fsm)
    display: DisplayFrame = state.display
    first_subtick = state.tick * cfg.display_subticks
    for sub in range(cfg.display_subticks):
        display = display_multiplex(value, display, first_subtick + sub, visible)

    out = gpio_write_port(gpio, Port.B, display.port_b())
    out = gpio_write_port(out, Port.D, display.commons() | (relays << RD_RELAY_SHIFT))

    new_state = FirmwareState(
        fsm=fsm,
        thresholds=thresholds,
        door_debouncer=door_db,
        water_debouncer=water_db,
        prev_buttons=port_c & BUTTON_MASK,
        tick=state.tick + 1,
        alarm=alarm,
        display=display,
    )
    return TickResult(
        alarm=alarm,
        display=display,
        gpio=out,
        state=new_state,
        eeprom_writes=tuple(writes),
        committed=committed,
    )
