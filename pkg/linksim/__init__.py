"""Link-level simulator for pilot-aware interference and its effect on link adaptation and HARQ latency."""

__version__ = "0.1.0"
