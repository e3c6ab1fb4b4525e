"""
Scenario-driven simulation loop.

Every 10 ms tick, in order: scenario events due at this tick are applied,
the room truth is sampled by the sensors, the controller runs one firmware
tick (when powered), the alarm box polls the relays and the NMC link is
advanced. Each state change lands in the trace.
"""

import logging
from typing import List, Optional, Set

from pydantic import BaseModel, Field

from btsalarm.config import settings
from btsalarm.errors import SimulationConfigError
from btsalarm.firmware.classify import to_tenths
from btsalarm.firmware.controller import BUTTON_PINS, FirmwareConfig, firmware_boot, firmware_tick
from btsalarm.firmware.models import AlarmState, Button, FirmwareState, SettingsFsm, TempStatus, Thresholds
from btsalarm.firmware.settings_fsm import load_thresholds
from btsalarm.mcu.adc import adc_select
from btsalarm.mcu.eeprom import EepromImage, eeprom_factory, eeprom_power_cycle
from btsalarm.mcu.gpio import RC_DOOR, RC_SMOKE, RC_WATER, TEMPERATURE_CHANNEL, GpioState, gpio_set_inputs
from btsalarm.nmc.alarm_box import AlarmBoxState, alarm_box_poll
from btsalarm.nmc.alarm_log import AlarmLogRecord
from btsalarm.nmc.protocol import NmcFrame
from btsalarm.sensors.contacts import ContactInput, contact_step
from btsalarm.sensors.models import SampledLevels, SensorFrame, sample_frame
from btsalarm.simulation.clock import VirtualClock
from btsalarm.simulation.scenario import Channel, ScenarioEvent, ramp_value
from btsalarm.simulation.sinks import FrameSink, InProcessNmc
from btsalarm.simulation.trace import Trace, TraceSummary

logger = logging.getLogger(__name__)

_BUTTON_WORDS = {"set": Button.SET, "up": Button.UP, "down": Button.DOWN}


class SimulationConfig(BaseModel):
    """Knobs of one simulation run"""
    tick_ms: int = Field(default_factory=lambda: settings.TICK_MS, gt=0)
    site_id: int = Field(default_factory=lambda: settings.SITE_ID, ge=0, le=0xFFFF)
    heartbeat_interval_ms: int = Field(default_factory=lambda: settings.HEARTBEAT_INTERVAL_MS, gt=0)
    smoke_threshold: float = Field(default_factory=lambda: settings.SMOKE_THRESHOLD, ge=0.0, le=1.0)
    jitter_max_ms: int = Field(default_factory=lambda: settings.NMC_JITTER_MAX_MS, ge=0)
    firmware: FirmwareConfig = Field(default_factory=FirmwareConfig)


def _word(active: bool) -> str:
    return "ACTIVE" if active else "CLEAR"


class Simulator:
    """
    One run over a fixed scenario. Exposes the EEPROM, the firmware RAM and
    the frame sink after run() for inspection.
    """

    def __init__(
        self,
        events: List[ScenarioEvent],
        duration_ms: int,
        seed: int = 0,
        eeprom: Optional[EepromImage] = None,
        sink: Optional[FrameSink] = None,
        config: Optional[SimulationConfig] = None,
    ):
        """
        Args:
            events: Scenario events, sorted by at_ms
            duration_ms: Last simulated instant, a multiple of the tick
            seed: Seeds the NMC link jitter (no effect when jitter is off)
            eeprom: Starting EEPROM (factory image when None)
            sink: Frame receiver (in-process NMC when None)
            config: Run configuration

        Raises:
            SimulationConfigError: If duration_ms is negative or off the tick grid
        """
        self.config = config or SimulationConfig()
        tick_ms = self.config.tick_ms
        if duration_ms < 0 or duration_ms % tick_ms != 0:
            raise SimulationConfigError(f"duration must be a non-negative multiple of {tick_ms} ms, got {duration_ms}")

        self.events = sorted(events, key=lambda e: e.at_ms)
        self.duration_ms = duration_ms
        self.clock = VirtualClock(tick_ms)
        self.eeprom = eeprom if eeprom is not None else eeprom_factory()
        self.sink = sink or InProcessNmc(
            jitter_max_ms=self.config.jitter_max_ms,
            seed=seed,
            tick_ms=tick_ms,
        )
        self.trace = Trace()

        # room truth
        self.temp_c = SensorFrame().temp_c
        self.smoke = 0.0
        self.door_open = False
        self.water_wet = False
        self.ramp: Optional[ScenarioEvent] = None
        self._levels: Optional[SampledLevels] = None

        # hardware
        self.door_contact = ContactInput()
        self.water_contact = ContactInput()
        self.gpio = GpioState()
        self.powered = True
        self.state: Optional[FirmwareState] = None
        self.alarm = AlarmState()
        self.relays = 0
        self.box = AlarmBoxState(
            site_id=self.config.site_id,
            heartbeat_interval_ms=self.config.heartbeat_interval_ms,
        )

    def run(self) -> Trace:
        logger.info(f"Simulation start: {len(self.events)} events, {self.duration_ms} ms, site {self.config.site_id}")

        self.state = firmware_boot(self.eeprom, self.config.firmware)
        self.trace.add(0, "boot", f"thresholds={self.state.thresholds} site={self.config.site_id}")

        next_event = 0
        t = self.clock.now()
        while t <= self.duration_ms:
            pressed: Set[Button] = set()
            while next_event < len(self.events) and self.events[next_event].at_ms <= t:
                self._apply(self.events[next_event], t, pressed)
                next_event += 1

            self._step(t, pressed)
            if t == self.duration_ms:
                break
            t = self.clock.advance()

        self.sink.close()
        self.trace.summary = self._summary()
        logger.info(f"Simulation finished: {len(self.trace.records)} trace records, {self.sink.frames_sent} frames")
        return self.trace

    def _apply(self, event: ScenarioEvent, t: int, pressed: Set[Button]) -> None:
        self.trace.add(t, "input", event.describe())
        channel = event.channel

        if channel == Channel.TEMP:
            self.temp_c = event.value
            self.ramp = event if event.is_ramp else None
        elif channel == Channel.SMOKE:
            self.smoke = event.value
        elif channel == Channel.DOOR:
            self.door_open = event.value
        elif channel == Channel.WATER:
            self.water_wet = event.value
        elif channel == Channel.BUTTON:
            pressed.add(_BUTTON_WORDS[event.value])
        elif channel == Channel.POWER:
            if event.value == "off" and self.powered:
                self._power_off(t)
            elif event.value == "on" and not self.powered:
                self._power_on(t)

    def _power_off(self, t: int) -> None:
        self.powered = False
        self.state = None
        self.gpio = GpioState()
        self.alarm = AlarmState()
        self.trace.add(t, "power", "off")

    def _power_on(self, t: int) -> None:
        self.powered = True
        self.eeprom = eeprom_power_cycle(self.eeprom)
        self.state = firmware_boot(self.eeprom, self.config.firmware)
        self.trace.add(t, "power", f"on thresholds={self.state.thresholds}")

    def _port_c(self, pressed: Set[Button]) -> int:
        if self.ramp is not None:
            self.temp_c, done = ramp_value(self.ramp, self.clock.now())
            if done:
                self.ramp = None

        frame = SensorFrame(
            temp_c=self.temp_c,
            smoke_obscuration=self.smoke,
            door_open=self.door_open,
            water_wet=self.water_wet,
        )
        self._levels = sample_frame(frame, self.config.smoke_threshold)
        self.door_contact, door_pin = contact_step(self.door_contact, self._levels.door)
        self.water_contact, water_pin = contact_step(self.water_contact, self._levels.water)

        port_c = (self._levels.smoke << RC_SMOKE) | (door_pin << RC_DOOR) | (water_pin << RC_WATER)
        for button in pressed:
            port_c |= 1 << BUTTON_PINS[button]
        return port_c

    def _step(self, t: int, pressed: Set[Button]) -> None:
        port_c = self._port_c(pressed)

        if self.powered:
            adc_code = adc_select({TEMPERATURE_CHANNEL: self._levels.lm35_mv}, TEMPERATURE_CHANNEL, self.config.firmware.adc)
            result = firmware_tick(
                gpio_set_inputs(self.gpio, port_c), adc_code, self.state, self.eeprom, self.config.firmware,
            )
            self._record_fsm(t, self.state.fsm, result.state.fsm, result.committed, bool(result.eeprom_writes))
            self._record_alarm(t, self.alarm, result.alarm)
            self.state = result.state
            self.gpio = result.gpio
            self.alarm = result.alarm

        relays = self.gpio.relay_bits()
        if relays != self.relays:
            self.trace.add(t, "relays", f"mask=0x{relays:X}")
            self.relays = relays

        temp_status = self.alarm.temp_status if self.powered else TempStatus.NORMAL
        temp_tenths = to_tenths(self.alarm.temp_c)
        frames, self.box = alarm_box_poll(self.box, relays, temp_status, temp_tenths, t)
        for frame in frames:
            self._record_frame(t, frame)
            self.sink.send(frame, t)

        for record in self.sink.tick(t):
            self._record_nmc(t, record)

    def _record_fsm(
        self, t: int, old: SettingsFsm, new: SettingsFsm, committed: Optional[Thresholds], wrote: bool,
    ) -> None:
        if old.mode != new.mode or old.pending != new.pending:
            self.trace.add(t, "fsm", f"mode={new.mode.value} pending={new.pending}")
        if committed is not None:
            self.trace.add(t, "fsm", f"commit thresholds={committed}")
        elif wrote:
            self.trace.add(t, "fsm", f"commit failed thresholds={new.pending}")

    def _record_alarm(self, t: int, old: AlarmState, new: AlarmState) -> None:
        if old.temp_status != new.temp_status:
            self.trace.add(t, "firmware", f"temp={new.temp_status.name} decoded={new.temp_c:.2f}")
        if old.smoke_active != new.smoke_active:
            self.trace.add(t, "firmware", f"smoke={_word(new.smoke_active)}")
        if old.door_active != new.door_active:
            self.trace.add(t, "firmware", f"door={_word(new.door_active)}")
        if old.water_active != new.water_active:
            self.trace.add(t, "firmware", f"water={_word(new.water_active)}")
        if old.storage_fault != new.storage_fault:
            self.trace.add(t, "firmware", f"storage={'FAULT' if new.storage_fault else 'OK'}")

    def _record_frame(self, t: int, frame: NmcFrame) -> None:
        kind = "heartbeat" if frame.is_heartbeat else "status"
        self.trace.add(
            t, "alarm_box",
            f"frame seq={frame.seq} flags=0x{frame.flags:02x} temp={frame.temp_tenths} kind={kind}",
        )

    def _record_nmc(self, t: int, record: AlarmLogRecord) -> None:
        text = f"site={record.site_id} event={record.kind.value}"
        if record.detail:
            text += f" detail={record.detail}"
        self.trace.add(t, "nmc", text)

    def _summary(self) -> TraceSummary:
        thresholds = self.state.thresholds if self.powered else load_thresholds(self.eeprom)
        service = self.sink.service
        return TraceSummary(
            duration_ms=self.duration_ms,
            alarm=self.alarm if self.powered else None,
            thresholds=thresholds,
            frames_sent=self.sink.frames_sent,
            site_lines=service.dump().splitlines() if service is not None else [],
        )


def run_simulation(
    events: List[ScenarioEvent],
    duration_ms: int,
    seed: int = 0,
    eeprom: Optional[EepromImage] = None,
    sink: Optional[FrameSink] = None,
    config: Optional[SimulationConfig] = None,
) -> Trace:
    """
    Run a scenario from power-on to duration_ms.

    Args:
        events: Parsed scenario events
        duration_ms: Run length in ms; must sit on the tick grid
        seed: Link jitter seed
        eeprom: Starting EEPROM image (factory when None)
        sink: Frame receiver (in-process NMC when None)
        config: Run configuration

    Returns:
        Trace with records and terminal summary

    Raises:
        SimulationConfigError: On a bad duration
    """
    return Simulator(events, duration_ms, seed, eeprom, sink, config).run()
