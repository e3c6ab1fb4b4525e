"""
Configuration management using Pydantic settings
"""

from typing import Optional, Tuple
from pydantic_settings import BaseSettings
from pydantic import field_validator


class Settings(BaseSettings):
    """Application settings loaded from environment variables"""

    # Application
    ENVIRONMENT: str = "development"
    LOG_LEVEL: str = "INFO"

    # Controller timing
    TICK_MS: int = 10
    BLINK_TICKS: int = 25  # edit-mode blink half period (2 Hz at 10 ms ticks)
    DISPLAY_SUBTICKS_PER_TICK: int = 2  # 5 ms digit strobe

    # Peripherals and sensors
    ADC_VREF_MV: int = 5000
    SMOKE_THRESHOLD: float = 0.07
    DEBOUNCE_RUN: int = 3
    EEPROM_PATH: Optional[str] = None

    # Alarm box
    SITE_ID: int = 1
    HEARTBEAT_INTERVAL_MS: int = 10000

    # NMC service
    NMC_LISTEN_HOST: str = "0.0.0.0"
    NMC_LISTEN_PORT: int = 7050
    NMC_OFFLINE_TIMEOUT_MS: int = 35000
    NMC_SWEEP_INTERVAL_MS: int = 1000
    NMC_LOG_PATH: str = "./data/nmc/alarm.log"
    NMC_JITTER_MAX_MS: int = 0
    NMC_LOG_MEMORY_RECORDS: int = 10000  # newest records the status API can serve

    # HTTP status API
    API_HOST: str = "0.0.0.0"
    API_PORT: int = 8000

    @field_validator(
        'TICK_MS', 'BLINK_TICKS', 'DISPLAY_SUBTICKS_PER_TICK', 'ADC_VREF_MV',
        'HEARTBEAT_INTERVAL_MS', 'NMC_OFFLINE_TIMEOUT_MS', 'NMC_SWEEP_INTERVAL_MS',
        'NMC_LOG_MEMORY_RECORDS',
    )
    @classmethod
    def must_be_positive(cls, v: int) -> int:
        """Intervals, periods and the ADC reference must be strictly positive"""
        if v <= 0:
            raise ValueError(f"must be > 0, got {v}")
        return v

    @field_validator('DEBOUNCE_RUN')
    @classmethod
    def debounce_in_range(cls, v: int) -> int:
        if not 1 <= v <= 255:
            raise ValueError(f"DEBOUNCE_RUN must be in 1..255, got {v}")
        return v

    @field_validator('SMOKE_THRESHOLD')
    @classmethod
    def smoke_threshold_in_range(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"SMOKE_THRESHOLD must be in [0, 1], got {v}")
        return v

    @field_validator('NMC_JITTER_MAX_MS')
    @classmethod
    def jitter_not_negative(cls, v: int) -> int:
        if v < 0:
            raise ValueError(f"NMC_JITTER_MAX_MS must be >= 0, got {v}")
        return v

    model_config = {
        "env_file": ".env",
        "case_sensitive": True,
        "extra": "ignore"
    }


def parse_host_port(value: str, default_port: int) -> Tuple[str, int]:
    """
    Parse "host:port", "host" or ":port" into a (host, port) tuple.

    Args:
        value: Address string from the command line or environment
        default_port: Port used when the string carries none

    Returns:
        Tuple of (host, port)

    Raises:
        ValueError: If the port is not an integer in 0..65535 (0 binds any free port)
    """
    value = value.strip()
    if not value:
        raise ValueError("address must not be empty")

    host, sep, port_text = value.rpartition(':')
    if not sep:
        host, port_text = value, ""

    if not port_text:
        port = default_port
    else:
        try:
            port = int(port_text)
        except ValueError:
            raise ValueError(f"invalid port in address {value!r}")

    if not 0 <= port <= 65535:
        raise ValueError(f"port out of range in address {value!r}")

    return host or "0.0.0.0", port


settings = Settings()
