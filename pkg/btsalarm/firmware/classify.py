"""
Temperature decoding and three-band classification.
"""

import math

from btsalarm.errors import InputDomainError
from btsalarm.firmware.models import TempStatus, Thresholds
from btsalarm.mcu.adc import ADC_MAX_CODE, ADC_STEPS, DEFAULT_ADC, AdcConfig
from btsalarm.sensors.models import LM35_MV_PER_C


def decode_temperature(code: int, cfg: AdcConfig = DEFAULT_ADC) -> float:
    """
    Invert the LM35 + ADC chain: code * vref_mv / 1024 / 10 °C.

    Raises:
        InputDomainError: If code is outside 0..1023
    """
    if not 0 <= code <= ADC_MAX_CODE:
        raise InputDomainError(f"ADC code must be in 0..{ADC_MAX_CODE}, got {code}")
    return code * cfg.vref_mv / ADC_STEPS / LM35_MV_PER_C


def classify_temperature(temp_c: float, th: Thresholds) -> TempStatus:
    """
    temp >= t_danger -> DANGER, else temp >= t_alert -> ALERT, else NORMAL.
    Both boundaries are inclusive.
    """
    if temp_c >= th.t_danger:
        return TempStatus.DANGER
    if temp_c >= th.t_alert:
        return TempStatus.ALERT
    return TempStatus.NORMAL


def round_half_up(value: float) -> int:
    return math.floor(value + 0.5)


def to_tenths(temp_c: float) -> int:
    """°C to the signed tenths carried in NMC frames"""
    return round_half_up(temp_c * 10)
