"""
Tests for the peripheral models: ADC, data EEPROM, GPIO ports and display.
"""

import pytest
import sys
from pathlib import Path

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from btsalarm.errors import AddressError, EncodingError, InputDomainError, PinDirectionError, StorageError
from btsalarm.mcu.adc import AdcConfig, adc_convert, adc_select
from btsalarm.mcu.display import (
    BLANK, BLANK_FRAME, DASH, SEGMENT_TABLE, DisplayFrame, display_multiplex, encode_number, render_digit,
)
from btsalarm.mcu.eeprom import (
    EEPROM_SIZE, ERASED, EepromImage, eeprom_factory, eeprom_from_bytes, eeprom_load, eeprom_power_cycle,
    eeprom_read, eeprom_to_bytes, eeprom_write, eeprom_write_many,
)
from btsalarm.mcu.gpio import GpioState, Port, gpio_read_pin, gpio_set_inputs, gpio_write_port


@pytest.mark.parametrize("vin_mv,expected", [(0, 0), (250, 51), (5000, 1023), (6000, 1023)])
def test_adc_convert_examples(vin_mv, expected):
    """Test floor quantization with full-scale clamp."""
    assert adc_convert(vin_mv) == expected, f"adc_convert({vin_mv}) should be {expected}"


def test_adc_negative_input_rejected():
    with pytest.raises(InputDomainError):
        adc_convert(-0.1)


def test_adc_monotone_and_quantization_error():
    """Test monotonicity over 0..5500 mV and the one-LSB quantization bound below vref."""
    vref = 5000
    lsb = vref / 1024
    previous = -1
    for vin in range(0, 5501):
        code = adc_convert(vin)
        assert code >= previous, f"ADC not monotone at {vin} mV"
        previous = code
        if vin < vref:
            assert abs(vin - code * lsb) < lsb, f"Quantization error too large at {vin} mV"


def test_adc_config_invariants():
    """Test the converter is fixed at 10 bits and needs a positive reference."""
    assert AdcConfig().vref_mv == 5000
    assert adc_convert(1650, AdcConfig(vref_mv=3300)) == 512

    with pytest.raises(ValueError):
        AdcConfig(resolution_bits=12)
    with pytest.raises(ValueError):
        AdcConfig(vref_mv=0)


def test_adc_select_channels():
    """Test only the selected channel is converted; unwired channels read zero."""
    levels = {0: 250.0, 3: 1000.0}
    assert adc_select(levels, 0) == 51
    assert adc_select(levels, 3) == 204
    assert adc_select(levels, 5) == 0

    with pytest.raises(InputDomainError):
        adc_select(levels, 8)


def test_eeprom_factory_image():
    """Test factory thresholds at addresses 0/1 and erased cells elsewhere."""
    img = eeprom_factory()
    assert eeprom_read(img, 0) == 30
    assert eeprom_read(img, 1) == 45
    assert all(eeprom_read(img, a) == ERASED for a in range(2, EEPROM_SIZE))
    assert len(eeprom_to_bytes(img)) == EEPROM_SIZE


def test_eeprom_read_after_write_all_addresses():
    """Test read-after-write for all 256 addresses with boundary values."""
    img = eeprom_factory()
    for addr in range(EEPROM_SIZE):
        for value in (0, 1, 2, 127, 128, 253, 254, 255):
            eeprom_write(img, addr, value)
            assert eeprom_read(img, addr) == value, f"Cell {addr} did not hold {value}"


def test_eeprom_bounds():
    img = eeprom_factory()
    with pytest.raises(AddressError):
        eeprom_write(img, 256, 1)
    with pytest.raises(AddressError):
        eeprom_read(img, -1)
    with pytest.raises(InputDomainError):
        eeprom_write(img, 0, 256)
    with pytest.raises(InputDomainError):
        eeprom_from_bytes(b"\x00" * 255)


def test_eeprom_power_cycle_in_memory():
    """Test write(0, 35); power cycle; read(0) == 35 without a backing file."""
    img = eeprom_write(eeprom_factory(), 0, 35)
    rebooted = eeprom_power_cycle(img)
    assert eeprom_read(rebooted, 0) == 35
    assert rebooted == img
    assert rebooted is not img


def test_eeprom_persistence_with_file(tmp_path):
    """Test writes are durable in the backing file and survive a reload."""
    path = tmp_path / "eeprom.bin"
    img = eeprom_load(path)
    assert not path.exists(), "A missing image should only be created on first write"
    assert eeprom_read(img, 0) == 30

    eeprom_write(img, 0, 35)
    assert path.stat().st_size == EEPROM_SIZE
    assert path.read_bytes()[0] == 35

    rebooted = eeprom_power_cycle(img)
    assert eeprom_read(rebooted, 0) == 35
    assert eeprom_to_bytes(rebooted) == path.read_bytes()

    # idempotent write keeps the file intact
    eeprom_write(rebooted, 0, 35)
    assert eeprom_to_bytes(eeprom_load(path)) == eeprom_to_bytes(rebooted)


def test_eeprom_load_wrong_length(tmp_path):
    path = tmp_path / "short.bin"
    path.write_bytes(b"\x1e\x2d")
    with pytest.raises(InputDomainError):
        eeprom_load(path)


def test_eeprom_storage_failure_rolls_back(tmp_path):
    """Test a failed persist raises StorageError and leaves the cell unchanged."""
    blocker = tmp_path / "not_a_dir"
    blocker.write_text("x")
    img = EepromImage(backing_path=blocker / "eeprom.bin")

    with pytest.raises(StorageError):
        eeprom_write(img, 0, 40)
    assert eeprom_read(img, 0) == 30


def test_eeprom_write_many_is_all_or_nothing(tmp_path):
    """Test a multi-cell write lands with one persist or not at all."""
    path = tmp_path / "eeprom.bin"
    img = eeprom_load(path)
    eeprom_write_many(img, [(0, 32), (1, 47)])
    assert path.read_bytes()[:2] == bytes([32, 47])

    with pytest.raises(AddressError):
        eeprom_write_many(img, [(0, 33), (256, 1)])
    assert (eeprom_read(img, 0), eeprom_read(img, 1)) == (32, 47), "Validation happens before any cell changes"

    blocker = tmp_path / "not_a_dir"
    blocker.write_text("x")
    stuck = EepromImage(backing_path=blocker / "eeprom.bin")
    with pytest.raises(StorageError):
        eeprom_write_many(stuck, [(0, 33), (1, 46)])
    assert eeprom_to_bytes(stuck) == eeprom_to_bytes(eeprom_factory())


@pytest.mark.parametrize("value,mask", [(0, 0x3F), (8, 0x7F), (BLANK, 0x00), (DASH, 0x40), (2, 0x5B), (9, 0x6F)])
def test_render_digit_table(value, mask):
    assert render_digit(value) == mask


@pytest.mark.parametrize("value", [10, -1, "x", None, True])
def test_render_digit_rejects(value):
    with pytest.raises(EncodingError):
        render_digit(value)


def test_display_examples():
    """Test right alignment, leading blanks, negatives and overflow."""
    two, five, seven = SEGMENT_TABLE[2], SEGMENT_TABLE[5], SEGMENT_TABLE[7]

    frame = display_multiplex(25, BLANK_FRAME, 4)
    assert frame.digit_masks == (0x00, two, five)
    assert frame.active_digit == 4 % 3

    assert display_multiplex(7, BLANK_FRAME, 0).digit_masks == (0x00, 0x00, seven)
    assert display_multiplex(1000, BLANK_FRAME, 0).digit_masks == (0x40, 0x40, 0x40)
    assert display_multiplex(-10, BLANK_FRAME, 0).digit_masks == (0x40, 0x40, 0x40)
    assert encode_number(-5) == (0x00, 0x40, five)
    assert display_multiplex(25, BLANK_FRAME, 0, visible=False).digit_masks == (0x00, 0x00, 0x00)


def test_display_strobe_reconstructs_number():
    """Test 3 consecutive sub-ticks show every digit of the number exactly once."""
    decode = {mask: glyph for glyph, mask in SEGMENT_TABLE.items()}
    for value in (0, 7, 25, 100, 999, -3):
        frame = BLANK_FRAME
        shown = {}
        for tick in range(10, 13):
            frame = display_multiplex(value, frame, tick)
            assert frame.commons() == 1 << frame.active_digit
            shown[frame.active_digit] = decode[frame.port_b()]
        text = "".join(str(shown[i]) for i in range(3)).strip()
        assert text == str(value), f"Strobed digits {shown} do not spell {value}"


def test_display_frame_rejects_unknown_mask():
    with pytest.raises(ValueError):
        DisplayFrame(digit_masks=(0x01, 0x00, 0x00))


def test_gpio_ports():
    """Test direction checks and pin reads."""
    gpio = gpio_set_inputs(GpioState(), 0b1010_0000)
    assert gpio_read_pin(gpio, Port.C, 5)
    assert not gpio_read_pin(gpio, Port.C, 6)
    assert gpio_read_pin(gpio, Port.C, 7)

    out = gpio_write_port(gpio, Port.D, 0b0101_0001)
    assert out.relay_bits() == 0b0101
    assert out.commons() == 0b001
    assert out.port_c == gpio.port_c

    with pytest.raises(PinDirectionError):
        gpio_write_port(gpio, Port.C, 0)
    with pytest.raises(InputDomainError):
        gpio_write_port(gpio, Port.B, 0x100)
    with pytest.raises(ValueError):
        GpioState(port_b=256)
