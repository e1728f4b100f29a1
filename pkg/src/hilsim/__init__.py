"""Software-only HiL testing stack.

A register-map code generator, a virtual reference device speaking a
line-oriented serial register protocol, simulated bus/GPIO peripherals on a
deterministic nanosecond clock, a fault-injectable virtual device-under-test,
and a test harness that drives them.
"""

__version__ = "0.1.0"
