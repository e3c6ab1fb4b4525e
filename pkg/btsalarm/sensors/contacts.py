"""
Isolation stage between a field contact and an MCU input pin.

The door reed switch and the water probe reach the controller through an
opto-isolated input whose output is registered once per tick: the pin shows
the level the contact had on the previous tick.
"""

from typing import Tuple

from pydantic import BaseModel

from btsalarm.sensors.models import Level


class ContactInput(BaseModel):
    """One-sample propagation register"""
    held: Level = Level.LOW

    model_config = {"frozen": True}


def contact_step(c: ContactInput, raw: Level) -> Tuple[ContactInput, Level]:
    """
    Clock the register.

    Returns:
        Tuple of (updated register, level presented on the pin this tick)
    """
    raw = Level(raw)
    if raw == c.held:
        return c, c.held
    return ContactInput(held=raw), c.held
