"""
Run-length debouncer for contact inputs (door, water).
"""

from typing import Tuple

from pydantic import BaseModel, Field

from btsalarm.sensors.models import Level

DEFAULT_REQUIRED_RUN = 3


class Debouncer(BaseModel):
    """
    Accepts a new level only after required_run consecutive samples of it.

    run_length counts consecutive samples equal to candidate that differ from
    last_stable; it resets whenever a sample matches last_stable again.
    """
    required_run: int = Field(DEFAULT_REQUIRED_RUN, ge=1, le=255)
    last_stable: Level = Level.LOW
    run_length: int = Field(0, ge=0)
    candidate: Level = Level.LOW

    model_config = {"frozen": True}


def debounce_step(d: Debouncer, raw: Level) -> Tuple[Debouncer, Level]:
    """
    Feed one raw sample.

    Args:
        d: Current debouncer state
        raw: Sampled pin level

    Returns:
        Tuple of (updated Debouncer, stable level after this sample)
    """
    raw = Level(raw)

    if raw == d.last_stable:
        if d.run_length == 0:
            return d, d.last_stable
        return d.model_copy(update={"run_length": 0, "candidate": raw}), d.last_stable

    run = d.run_length + 1 if raw == d.candidate and d.run_length > 0 else 1
    if run >= d.required_run:
        updated = d.model_copy(update={"last_stable": raw, "run_length": 0, "candidate": raw})
        return updated, raw

    return d.model_copy(update={"run_length": run, "candidate": raw}), d.last_stable
