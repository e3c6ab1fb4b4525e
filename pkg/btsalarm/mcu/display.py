"""
Three-digit multiplexed seven-segment display.

Segments are on PORT B in gfedcba order (active-high); the digit commons are
PORT D bits 0..2. One digit is strobed per 5 ms display sub-tick.
"""

from typing import Tuple, Union

from pydantic import BaseModel, Field, field_validator

from btsalarm.errors import EncodingError

BLANK = " "
DASH = "-"

Glyph = Union[int, str]

SEGMENT_TABLE = {
    0: 0x3F,
    1: 0x06,
    2: 0x5B,
    3: 0x4F,
    4: 0x66,
    5: 0x6D,
    6: 0x7D,
    7: 0x07,
    8: 0x7F,
    9: 0x6F,
    DASH: 0x40,
    BLANK: 0x00,
}

VALID_MASKS = frozenset(SEGMENT_TABLE.values())

DIGITS = 3
DISPLAY_MIN = -9
DISPLAY_MAX = 999


class DisplayFrame(BaseModel):
    """Segment masks for the three digits and the digit currently strobed"""
    digit_masks: Tuple[int, int, int] = (0x00, 0x00, 0x00)
    active_digit: int = Field(0, ge=0, le=DIGITS - 1)

    model_config = {"frozen": True}

    @field_validator('digit_masks')
    @classmethod
    def masks_are_glyphs(cls, v: Tuple[int, int, int]) -> Tuple[int, int, int]:
        for mask in v:
            if mask not in VALID_MASKS:
                raise ValueError(f"0x{mask:02X} is not a glyph of the encoding table")
        return v

    def port_b(self) -> int:
        """Segment levels presented on PORT B for the active digit"""
        return self.digit_masks[self.active_digit]

    def commons(self) -> int:
        """Digit-common bits on PORT D (one-hot)"""
        return 1 << self.active_digit


BLANK_FRAME = DisplayFrame()


def render_digit(value: Glyph) -> int:
    """
    Encode one glyph.

    Args:
        value: 0..9, BLANK or DASH

    Returns:
        8-bit segment mask

    Raises:
        EncodingError: For anything outside the table
    """
    if isinstance(value, bool):
        raise EncodingError(f"cannot render {value!r}")
    try:
        return SEGMENT_TABLE[value]
    except (KeyError, TypeError):
        raise EncodingError(f"cannot render {value!r} on a seven-segment digit")


def encode_number(value: int) -> Tuple[int, int, int]:
    """
    Right-align an integer on three digits with leading blanks.
    Values outside -9..999 show "---".
    """
    if not DISPLAY_MIN <= value <= DISPLAY_MAX:
        dash = render_digit(DASH)
        return (dash, dash, dash)

    if value < 0:
        return (render_digit(BLANK), render_digit(DASH), render_digit(-value))

    glyphs = [BLANK] * DIGITS
    text = str(value)
    for i, ch in enumerate(reversed(text)):
        glyphs[DIGITS - 1 - i] = int(ch)
    return tuple(render_digit(g) for g in glyphs)


def display_multiplex(temp_c: int, frame: DisplayFrame, tick: int, visible: bool = True) -> DisplayFrame:
    """
    Refresh the display for one 5 ms sub-tick.

    Args:
        temp_c: Whole-degree value to show
        frame: Previous frame (kept for API symmetry; the masks are recomputed)
        tick: Display sub-tick counter; the strobed digit is tick mod 3
        visible: False blanks all digits (edit-mode blink off phase)

    Returns:
        The new DisplayFrame
    """
    masks = encode_number(temp_c) if visible else BLANK_FRAME.digit_masks
    active = tick % DIGITS
    if frame.digit_masks == masks and frame.active_digit == active:
        return frame
    return DisplayFrame(digit_masks=masks, active_digit=active)
