"""One simulated test-node pair: reference device + DUT on a shared scheduler."""

from __future__ import annotations

from dataclasses import dataclass

from hilsim.dut import DutDevice, FaultConfig
from hilsim.refdev import ReferenceDevice
from hilsim.reference import reference_layout
from hilsim.sim.bus import I2cSlaveModel, SpiSlaveModel, UartModel
from hilsim.sim.clock import EventScheduler
from hilsim.sim.trace import TraceUnit


@dataclass
class BenchConfig:
    seed: int = 0
    faults: FaultConfig | None = None
    dut_clock_ppm_error: float = 0.0
    handler_overhead_ns: int = 30_000
    pin_map: dict | None = None


class Bench:
    """Builds and owns the wired pair; fully isolated from other benches."""

    def __init__(self, config: BenchConfig | None = None):
        self.config = config or BenchConfig()
        self.scheduler = EventScheduler()
        self.clock = self.scheduler.clock
        layout = reference_layout()
        self.refdev = ReferenceDevice(layout)
        regs = self.refdev.regs
        self.i2c = I2cSlaveModel(regs, self.clock)
        self.spi = SpiSlaveModel(regs, self.clock)
        self.uart = UartModel(regs, self.clock)
        self.trace = TraceUnit(regs, self.clock, seed=self.config.seed)
        self.refdev.register_init_hook("i2c", self._reinit_i2c)
        self.refdev.register_init_hook("spi", self._reinit_spi)
        self.refdev.register_init_hook("uart", self._reinit_uart)
        self.refdev.register_init_hook("timer", self._reinit_trace)
        self.refdev.register_init_hook("trace", self._clear_trace)
        self.dut = DutDevice(
            self.scheduler,
            self.i2c,
            self.spi,
            self.uart,
            self.trace,
            faults=self.config.faults,
            clock_ppm_error=self.config.dut_clock_ppm_error,
            handler_overhead_ns=self.config.handler_overhead_ns,
            pin_map=self.config.pin_map,
        )

    # models read config from the register file owned by the refdev; rebind
    # in case reset() replaced the file
    def _reinit_i2c(self) -> None:
        self.i2c.regs = self.refdev.regs
        self.i2c.reinit()

    def _reinit_spi(self) -> None:
        self.spi.regs = self.refdev.regs
        self.spi.reinit()

    def _reinit_uart(self) -> None:
        self.uart.regs = self.refdev.regs
        self.uart.reinit()

    def _reinit_trace(self) -> None:
        self.trace.regs = self.refdev.regs
        self.trace.reinit()

    def _clear_trace(self) -> None:
        self.trace.regs = self.refdev.regs
        self.trace.clear()

    def reset(self) -> None:
        """Reset both devices, as a harness setup phase does."""
        self.refdev.reset()
        self.dut.reset()
