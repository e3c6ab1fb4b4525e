"""
Scenario scripts.

One event per line:

    <at_ms> <channel> <value>
    <start_ms>..<end_ms> ramp temp <a>→<b>

Channels and values: temp <°C>, smoke <0..1>, door open|closed,
water wet|dry, button set|up|down, power off|on. '#' starts a comment.
"""

import logging
import re
from enum import Enum
from pathlib import Path
from typing import List, Optional, Tuple, Union

from pydantic import BaseModel, Field

from btsalarm.errors import ScenarioError
from btsalarm.sensors.models import TEMP_ENVELOPE_MAX_C, TEMP_ENVELOPE_MIN_C

logger = logging.getLogger(__name__)


class Channel(str, Enum):
    TEMP = "temp"
    SMOKE = "smoke"
    DOOR = "door"
    WATER = "water"
    BUTTON = "button"
    POWER = "power"


_WORD_VALUES = {
    Channel.DOOR: {"open": True, "closed": False},
    Channel.WATER: {"wet": True, "dry": False},
    Channel.BUTTON: {"set": "set", "up": "up", "down": "down"},
    Channel.POWER: {"off": "off", "on": "on"},
}

_TIME_RE = re.compile(r'^\d+$')
_RANGE_RE = re.compile(r'^(\d+)\.\.(\d+)$')
_ARROW_RE = re.compile(r'\s*(?:→|->)\s*')


class ScenarioEvent(BaseModel):
    """
    One timed input. For a ramp, value is the start temperature, reached at
    at_ms, and target is reached at until_ms.
    """
    at_ms: int = Field(..., ge=0)
    channel: Channel
    value: Union[bool, float, str]
    until_ms: Optional[int] = Field(None, ge=0)
    target: Optional[float] = None
    line_no: int = 0

    model_config = {"frozen": True}

    @property
    def is_ramp(self) -> bool:
        return self.until_ms is not None

    def describe(self) -> str:
        if self.is_ramp:
            return f"{self.channel.value}={self.value:g}->{self.target:g} until={self.until_ms}"
        if isinstance(self.value, bool):
            words = {v: k for k, v in _WORD_VALUES[self.channel].items()}
            return f"{self.channel.value}={words[self.value]}"
        if isinstance(self.value, float):
            return f"{self.channel.value}={self.value:g}"
        return f"{self.channel.value}={self.value}"


def _parse_number(text: str, line_no: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ScenarioError(line_no, f"{what} must be a number, got {text!r}")
    if value != value or value in (float('inf'), float('-inf')):
        raise ScenarioError(line_no, f"{what} must be finite, got {text!r}")
    return value


def _parse_temp(text: str, line_no: int) -> float:
    value = _parse_number(text, line_no, "temperature")
    if not TEMP_ENVELOPE_MIN_C <= value <= TEMP_ENVELOPE_MAX_C:
        raise ScenarioError(
            line_no,
            f"temperature {value:g} out of [{TEMP_ENVELOPE_MIN_C:g}, {TEMP_ENVELOPE_MAX_C:g}] °C",
        )
    return value


def _parse_value(channel: Channel, text: str, line_no: int) -> Union[bool, float, str]:
    if channel == Channel.TEMP:
        return _parse_temp(text, line_no)
    if channel == Channel.SMOKE:
        value = _parse_number(text, line_no, "smoke obscuration")
        if not 0.0 <= value <= 1.0:
            raise ScenarioError(line_no, f"obscuration {value:g} out of [0,1]")
        return value

    words = _WORD_VALUES[channel]
    word = text.lower()
    if word not in words:
        raise ScenarioError(line_no, f"{channel.value} value must be one of {'/'.join(words)}, got {text!r}")
    return words[word]


def _parse_channel(text: str, line_no: int) -> Channel:
    try:
        return Channel(text.lower())
    except ValueError:
        raise ScenarioError(line_no, f"unknown channel {text!r}")


def _parse_ramp(tokens: List[str], line_no: int) -> ScenarioEvent:
    match = _RANGE_RE.match(tokens[0])
    if not match:
        raise ScenarioError(line_no, f"malformed ramp interval {tokens[0]!r}")
    start, end = int(match.group(1)), int(match.group(2))
    if end < start:
        raise ScenarioError(line_no, f"ramp ends ({end}) before it starts ({start})")

    if len(tokens) < 4:
        raise ScenarioError(line_no, "ramp needs a channel and <a>→<b>")
    channel = _parse_channel(tokens[2], line_no)
    if channel != Channel.TEMP:
        raise ScenarioError(line_no, f"ramp is only supported for temp, got {channel.value}")

    parts = _ARROW_RE.split(" ".join(tokens[3:]).strip())
    if len(parts) != 2 or not all(parts):
        raise ScenarioError(line_no, f"malformed ramp values {' '.join(tokens[3:])!r}, expected <a>→<b>")

    return ScenarioEvent(
        at_ms=start,
        channel=channel,
        value=_parse_temp(parts[0], line_no),
        until_ms=end,
        target=_parse_temp(parts[1], line_no),
        line_no=line_no,
    )


def parse_scenario(text: str) -> List[ScenarioEvent]:
    """
    Parse a scenario script.

    Args:
        text: Script contents

    Returns:
        Events sorted stably by at_ms

    Raises:
        ScenarioError: With the offending line number on malformed time,
            unknown channel or out-of-domain value
    """
    events: List[ScenarioEvent] = []

    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue

        tokens = line.split()
        if len(tokens) >= 2 and tokens[1].lower() == "ramp":
            events.append(_parse_ramp(tokens, line_no))
            continue

        if len(tokens) != 3:
            raise ScenarioError(line_no, f"expected '<at_ms> <channel> <value>', got {line!r}")

        at_text, channel_text, value_text = tokens
        if not _TIME_RE.match(at_text):
            raise ScenarioError(line_no, f"malformed time {at_text!r}")

        channel = _parse_channel(channel_text, line_no)
        events.append(ScenarioEvent(
            at_ms=int(at_text),
            channel=channel,
            value=_parse_value(channel, value_text, line_no),
            line_no=line_no,
        ))

    events.sort(key=lambda e: e.at_ms)
    logger.debug(f"Parsed {len(events)} scenario events")
    return events


def load_scenario(path: Union[str, Path]) -> List[ScenarioEvent]:
    """
    Read and parse a scenario file.

    Raises:
        FileNotFoundError: If the file does not exist
        ScenarioError: On malformed content
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Scenario file not found: {path}")
    return parse_scenario(path.read_text(encoding='utf-8'))


def ramp_value(event: ScenarioEvent, t_ms: int) -> Tuple[float, bool]:
    """
    Interpolated ramp temperature at t_ms.

    Returns:
        Tuple of (temperature, whether the ramp has finished)
    """
    if t_ms >= event.until_ms:
        return event.target, True
    span = event.until_ms - event.at_ms
    frac = (t_ms - event.at_ms) / span
    return event.value + (event.target - event.value) * frac, False
