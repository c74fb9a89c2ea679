"""Exceptions raised by the simulator core."""


class ConfigurationError(ValueError):
    """Invalid configuration value; the message names the offending field."""


class CalibrationError(ConfigurationError):
    """Requested actual SINR cannot be reached with the given strategy."""


class LatencyDivergenceError(ValueError):
    """Closed-form retransmission latency diverges (BLER >= 1)."""
