"""
10-bit successive-approximation ADC model.
"""

import math
from typing import Mapping

from pydantic import BaseModel, Field, field_validator

from btsalarm.errors import InputDomainError

ADC_MAX_CODE = 1023
ADC_STEPS = 1024


class AdcConfig(BaseModel):
    """ADC configuration: fixed 10-bit resolution, configurable reference"""
    resolution_bits: int = Field(10, description="Converter resolution (fixed)")
    vref_mv: int = Field(5000, gt=0, description="Reference voltage in millivolts")
    channels: int = Field(8, description="Analog input channels AN0..AN7")

    model_config = {"frozen": True}

    @field_validator('resolution_bits')
    @classmethod
    def resolution_is_ten_bits(cls, v: int) -> int:
        if v != 10:
            raise ValueError(f"only a 10-bit converter is modelled, got {v}")
        return v

    @field_validator('channels')
    @classmethod
    def eight_channels(cls, v: int) -> int:
        if v != 8:
            raise ValueError(f"the converter has 8 channels, got {v}")
        return v


DEFAULT_ADC = AdcConfig()


def adc_convert(vin_mv: float, cfg: AdcConfig = DEFAULT_ADC) -> int:
    """
    Convert an input voltage to a 10-bit code.

    code = floor(vin_mv * 1024 / vref_mv), clamped to 0..1023.

    Args:
        vin_mv: Input voltage in millivolts
        cfg: ADC configuration

    Returns:
        Conversion code in 0..1023

    Raises:
        InputDomainError: If vin_mv is negative
    """
    if vin_mv < 0:
        raise InputDomainError(f"ADC input must be >= 0 mV, got {vin_mv}")

    code = math.floor(vin_mv * ADC_STEPS / cfg.vref_mv)
    return min(code, ADC_MAX_CODE)


def adc_select(levels_mv: Mapping[int, float], channel: int, cfg: AdcConfig = DEFAULT_ADC) -> int:
    """
    Sample one analog channel. Unconnected channels read 0 mV.

    Args:
        levels_mv: Voltage present on each wired channel (AN index -> mV)
        channel: Channel to convert (0..7)
        cfg: ADC configuration

    Returns:
        Conversion code of the selected channel
    """
    if not 0 <= channel < cfg.channels:
        raise InputDomainError(f"ADC channel must be in 0..{cfg.channels - 1}, got {channel}")
    return adc_convert(levels_mv.get(channel, 0.0), cfg)
