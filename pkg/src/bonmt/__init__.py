"""Best-of-N test-time-scaling harness for machine translation."""

__version__ = "0.1.0"
