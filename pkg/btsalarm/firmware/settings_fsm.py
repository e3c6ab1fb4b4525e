"""
Settings menu: SET walks Run -> EditAlert -> EditDanger -> Run, UP/DOWN
adjust the field being edited, and leaving EditDanger stores both
thresholds in the EEPROM.
"""

import logging
from typing import AbstractSet, List, Optional, Tuple

from btsalarm.firmware.models import (
    FACTORY_THRESHOLDS, THRESHOLD_MAX_C, THRESHOLD_MIN_C,
    Button, SettingsFsm, SettingsMode, Thresholds,
)
from btsalarm.mcu.eeprom import ADDR_ALERT, ADDR_DANGER, EepromImage

logger = logging.getLogger(__name__)

EepromWrite = Tuple[int, int]


def load_thresholds(eeprom: EepromImage) -> Thresholds:
    """
    Read EEPROM0/EEPROM1. Contents that do not form a valid pair (erased
    cells, alert above danger) fall back to the factory thresholds.
    """
    alert = eeprom.read(ADDR_ALERT)
    danger = eeprom.read(ADDR_DANGER)
    if THRESHOLD_MIN_C <= alert <= danger <= THRESHOLD_MAX_C:
        return Thresholds(t_alert=alert, t_danger=danger)

    logger.warning(
        f"EEPROM thresholds {alert}/{danger} are invalid, "
        f"using factory thresholds {FACTORY_THRESHOLDS}"
    )
    return FACTORY_THRESHOLDS


def resolve_button(buttons: AbstractSet[Button]) -> Optional[Button]:
    """Simultaneous presses resolve SET > UP > DOWN"""
    return min(buttons) if buttons else None


def _adjust(pending: Thresholds, mode: SettingsMode, delta: int) -> Thresholds:
    alert, danger = pending.t_alert, pending.t_danger
    if mode == SettingsMode.EDIT_ALERT:
        alert = min(max(alert + delta, THRESHOLD_MIN_C), danger)
    else:
        danger = min(max(danger + delta, alert), THRESHOLD_MAX_C)

    if alert == pending.t_alert and danger == pending.t_danger:
        return pending
    return Thresholds(t_alert=alert, t_danger=danger)


def settings_step(
    fsm: SettingsFsm,
    buttons: AbstractSet[Button],
    eeprom: EepromImage,
) -> Tuple[SettingsFsm, List[EepromWrite]]:
    """
    Advance the settings menu by one button edge.

    Args:
        fsm: Current menu state
        buttons: Button edges seen this tick (usually zero or one)
        eeprom: Data EEPROM, read when entering the menu

    Returns:
        Tuple of (updated fsm, EEPROM writes to perform as (addr, value) pairs)
    """
    button = resolve_button(buttons)
    if button is None:
        return fsm, []

    if button == Button.SET:
        if fsm.mode == SettingsMode.RUN:
            persisted = load_thresholds(eeprom)
            return SettingsFsm(mode=SettingsMode.EDIT_ALERT, pending=persisted, blink_phase=True), []
        if fsm.mode == SettingsMode.EDIT_ALERT:
            return fsm.model_copy(update={"mode": SettingsMode.EDIT_DANGER, "blink_phase": True}), []

        pending = fsm.pending
        writes = [(ADDR_ALERT, pending.t_alert), (ADDR_DANGER, pending.t_danger)]
        return SettingsFsm(mode=SettingsMode.RUN, pending=pending, blink_phase=True), writes

    if fsm.mode == SettingsMode.RUN:
        return fsm, []

    delta = 1 if button == Button.UP else -1
    pending = _adjust(fsm.pending, fsm.mode, delta)
    if pending is fsm.pending:
        return fsm, []
    return fsm.model_copy(update={"pending": pending}), []
