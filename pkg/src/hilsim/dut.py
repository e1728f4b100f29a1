"""Virtual device-under-test.

Exposes a HAL-style peripheral API through a structured line shell: every
command is synchronous and answers with one JSON dictionary carrying a
``result`` of Success, Error, or Timeout. A seeded-fault library reproduces
five driver bug classes (CWE 474, 394, 480, 460, 835) behind per-family
flags; with all flags off the device behaves correctly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

from hilsim.sim.bus import I2cSlaveModel, SpiSlaveModel, UartModel
from hilsim.sim.clock import EventScheduler
from hilsim.sim.trace import TraceUnit

RESULT_SUCCESS = "Success"
RESULT_ERROR = "Error"
RESULT_TIMEOUT = "Timeout"

# errno-style codes returned in data/error_code
EIO = 5
ENXIO = 6
EAGAIN = 11
ENODEV = 19
EINVAL = 22

# simulated-time deadline after which a command counts as hung
COMMAND_DEADLINE_NS = 1_000_000_000
# fixed per-command transport/parse overhead on the simulated clock
COMMAND_OVERHEAD_NS = 1_000_000

DEFAULT_I2C_BITRATE = 100_000
DEFAULT_SPI_BITRATE = 1_000_000
DEFAULT_UART_BITRATE = 115_200

METADATA = "dut_periph 0.1.0"


@dataclass
class FaultConfig:
    """Seeded driver bugs, one flag per bug class. All off by default."""

    extra_read_byte: bool = False  # CWE474: reads one byte too many, discards it
    swallow_error_return: bool = False  # CWE394: failures still report Success
    inverted_status_check: bool = False  # CWE480: register writes always fail
    missing_error_cleanup: bool = False  # CWE460: lockup after failed-address read
    stop_while_busy_hang: bool = False  # CWE835: second consecutive write hangs

    @classmethod
    def flag_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def from_json(cls, text: str) -> "FaultConfig":
        doc = json.loads(text)
        known = set(cls.flag_names())
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown fault flags: {sorted(unknown)}")
        return cls(**{k: bool(v) for k, v in doc.items()})

    def enabled(self) -> list[str]:
        return [name for name in self.flag_names() if getattr(self, name)]


class _Hang(Exception):
    """Internal marker: the command would never return."""


class _I2cError(Exception):
    def __init__(self, code: int):
        super().__init__(f"bus error {-code}")
        self.code = code


class DutDevice:
    """One DUT session wired to the reference device's peripheral models."""

    def __init__(
        self,
        scheduler: EventScheduler,
        i2c: I2cSlaveModel,
        spi: SpiSlaveModel,
        uart: UartModel,
        trace: TraceUnit,
        faults: FaultConfig | None = None,
        clock_ppm_error: float = 0.0,
        handler_overhead_ns: int = 30_000,
        pin_map: dict[int, int] | None = None,
    ):
        self.scheduler = scheduler
        self.clock = scheduler.clock
        self.i2c = i2c
        self.spi = spi
        self.uart = uart
        self.trace = trace
        self.faults = faults or FaultConfig()
        self.clock_ppm_error = clock_ppm_error
        self.handler_overhead_ns = handler_overhead_ns
        # DUT pin index -> reference-device trace pin; identity for pins 0-2
        self.pin_map = {0: 0, 1: 1, 2: 2} if pin_map is None else dict(pin_map)
        self.reset()

    def reset(self) -> None:
        """Session reset: bus state and hang latches, faults stay configured."""
        self._i2c_ready = False
        self._spi_ready = False
        self._spi_mode = 0
        self._spi_bitrate = DEFAULT_SPI_BITRATE
        self._uart_ready = False
        self._uart_bitrate = DEFAULT_UART_BITRATE
        self._i2c_bitrate = DEFAULT_I2C_BITRATE
        self._hung = False
        self._write_streak = 0
        self._pin_levels: dict[int, int] = {}

    # -- DUT-local clock model ------------------------------------------

    def _dut_interval(self, interval_ns: int) -> int:
        """Map a DUT-clock interval onto the simulated clock."""
        return round(interval_ns * (1.0 + self.clock_ppm_error / 1e6))

    # -- shell ----------------------------------------------------------

    def handle_line(self, line: str) -> str:
        line = line.strip()
        self.clock.advance(COMMAND_OVERHEAD_NS)
        try:
            fields_out = self._dispatch(line)
        except _Hang:
            self.clock.advance(COMMAND_DEADLINE_NS)
            fields_out = {"result": RESULT_TIMEOUT}
        except _I2cError as exc:
            if self.faults.swallow_error_return:
                fields_out = {"data": 0, "result": RESULT_SUCCESS}
            else:
                fields_out = {"data": -exc.code, "result": RESULT_ERROR, "error_code": -exc.code}
        except Exception:
            fields_out = {"result": RESULT_ERROR, "error_code": -EINVAL}
        response = {"cmd": [line]}
        response.update(fields_out)
        if "result" not in response:
            response["result"] = RESULT_SUCCESS
        return json.dumps(response)

    def _dispatch(self, line: str) -> dict:
        parts = line.split()
        if not parts:
            raise _I2cError(EINVAL)
        handler = getattr(self, f"_cmd_{parts[0]}", None)
        if handler is None:
            return {"result": RESULT_ERROR, "error_code": -EINVAL, "data": -EINVAL}
        return handler([_to_int(a) for a in parts[1:]])

    # -- infrastructure -------------------------------------------------

    def _cmd_sync(self, args) -> dict:
        return {"result": RESULT_SUCCESS}

    def _cmd_reset(self, args) -> dict:
        self.reset()
        return {"result": RESULT_SUCCESS}

    def _cmd_get_metadata(self, args) -> dict:
        return {"data": METADATA, "result": RESULT_SUCCESS}

    # -- I2C ------------------------------------------------------------

    def _i2c_guard(self) -> None:
        if self._hung:
            raise _Hang()
        if not self._i2c_ready:
            raise _I2cError(ENODEV)

    def _cmd_i2c_init(self, args) -> dict:
        if self._hung:
            raise _Hang()
        self._i2c_bitrate = args[0] if args else DEFAULT_I2C_BITRATE
        self._i2c_ready = True
        self._write_streak = 0
        return {"result": RESULT_SUCCESS}

    def _cmd_i2c_read_reg(self, args) -> dict:
        addr, reg = args[0], args[1]
        length = args[2] if len(args) > 2 else 1
        self._i2c_guard()
        self._write_streak = 0
        wire_length = length + 1 if self.faults.extra_read_byte else length
        result = self.i2c.read_reg(addr, reg, wire_length, self._i2c_bitrate)
        if result.status == "addr-nack":
            if self.faults.missing_error_cleanup:
                self._hung = True
            raise _I2cError(ENXIO)
        if result.status == "data-nack":
            raise _I2cError(EIO)
        return {"data": list(result.data[:length]), "result": RESULT_SUCCESS}

    def _cmd_i2c_write_reg(self, args) -> dict:
        addr, reg, data = args[0], args[1], bytes(args[2:])
        self._i2c_guard()
        if self.faults.stop_while_busy_hang:
            self._write_streak += 1
            if self._write_streak >= 2:
                raise _Hang()
        else:
            self._write_streak = 0
        if self.faults.inverted_status_check:
            # status poll predicate is inverted: the ready state looks busy
            raise _I2cError(EINVAL)
        result = self.i2c.write_reg(addr, reg, data, self._i2c_bitrate)
        if result.status == "addr-nack":
            raise _I2cError(ENXIO)
        if result.status == "data-nack":
            raise _I2cError(EIO)
        return {"result": RESULT_SUCCESS}

    def _cmd_i2c_read_bytes(self, args) -> dict:
        addr, length = args[0], args[1]
        self._i2c_guard()
        self._write_streak = 0
        result = self.i2c.read_bytes(addr, length, self._i2c_bitrate)
        if not result.ok:
            raise _I2cError(ENXIO if result.status == "addr-nack" else EIO)
        return {"data": list(result.data), "result": RESULT_SUCCESS}

    def _cmd_i2c_write_bytes(self, args) -> dict:
        addr, data = args[0], bytes(args[1:])
        self._i2c_guard()
        result = self.i2c.write_bytes(addr, data, self._i2c_bitrate)
        if not result.ok:
            raise _I2cError(ENXIO if result.status == "addr-nack" else EIO)
        return {"result": RESULT_SUCCESS}

    # -- SPI ------------------------------------------------------------

    def _cmd_spi_init(self, args) -> dict:
        self._spi_mode = args[0] if args else 0
        self._spi_bitrate = args[1] if len(args) > 1 else DEFAULT_SPI_BITRATE
        if self._spi_mode not in (0, 1, 2, 3):
            raise _I2cError(EINVAL)
        self._spi_ready = True
        return {"result": RESULT_SUCCESS}

    def _cmd_spi_transfer(self, args) -> dict:
        if not self._spi_ready:
            raise _I2cError(ENODEV)
        result = self.spi.transfer(bytes(args), self._spi_bitrate, mode=self._spi_mode)
        if not result.ok:
            raise _I2cError(EINVAL)
        return {"data": list(result.data), "result": RESULT_SUCCESS}

    # -- UART -----------------------------------------------------------

    def _cmd_uart_init(self, args) -> dict:
        self._uart_bitrate = args[0] if args else DEFAULT_UART_BITRATE
        self._uart_ready = True
        return {"result": RESULT_SUCCESS}

    def _cmd_uart_write(self, args) -> dict:
        if not self._uart_ready:
            raise _I2cError(ENODEV)
        reply = self.uart.process(bytes(args), self._uart_bitrate)
        return {"data": list(reply), "result": RESULT_SUCCESS}

    # -- GPIO / timers --------------------------------------------------

    def _ref_pin(self, pin: int) -> int:
        if pin not in self.pin_map:
            raise _I2cError(EINVAL)
        return self.pin_map[pin]

    def _drive_pin(self, pin: int, level: int) -> None:
        self.trace.record_edge(self._ref_pin(pin), level)
        self._pin_levels[pin] = level

    def _cmd_gpio_set(self, args) -> dict:
        pin, level = args[0], args[1]
        self._drive_pin(pin, level)
        self.trace.publish()
        return {"result": RESULT_SUCCESS}

    def _cmd_gpio_toggle(self, args) -> dict:
        pin = args[0]
        level = 1 - self._pin_levels.get(pin, 0)
        self._drive_pin(pin, level)
        self.trace.publish()
        return {"result": RESULT_SUCCESS}

    def _cmd_timer_bench(self, args) -> dict:
        """Fire n virtual timers at one target time, toggling a pin per handler.

        Handlers at an already-claimed target queue behind each other, so the
        k-th handler runs about k handler-overheads past the target.
        """
        n_timers, period_ns, pin = args[0], args[1], args[2]
        if n_timers < 1:
            raise _I2cError(EINVAL)
        ref_pin = self._ref_pin(pin)
        target = self.clock.now + self._dut_interval(period_ns)
        for i in range(n_timers):
            fire_at = target + (i + 1) * self.handler_overhead_ns
            self.scheduler.schedule_at(fire_at, lambda p=pin: self._toggle_now(p))
        self.scheduler.run_until_idle()
        self.trace.publish()
        return {"result": RESULT_SUCCESS, "data": target}

    def _cmd_timer_trace(self, args) -> dict:
        """Toggle a pin every period for n edges, timed by the DUT clock."""
        n_edges, period_ns, pin = args[0], args[1], args[2]
        if n_edges < 1:
            raise _I2cError(EINVAL)
        self._ref_pin(pin)
        base = self.clock.now
        for k in range(1, n_edges + 1):
            fire_at = base + self._dut_interval(k * period_ns) + self.handler_overhead_ns
            self.scheduler.schedule_at(fire_at, lambda p=pin: self._toggle_now(p))
        self.scheduler.run_until_idle()
        self.trace.publish()
        return {"result": RESULT_SUCCESS, "data": n_edges}

    def _toggle_now(self, pin: int) -> None:
        level = 1 - self._pin_levels.get(pin, 0)
        self._drive_pin(pin, level)


def _to_int(token: str) -> int:
    return int(token, 16) if token.lower().startswith("0x") else int(token)
