"""Power unit conversions. Core modules work in linear milliwatts."""

import numpy as np


def db_to_linear(value_db):
    return np.power(10.0, np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    """10*log10 with -inf for zero power."""
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(value, dtype=float))


def dbm_to_mw(value_dbm) -> float:
    return float(db_to_linear(value_dbm))


def mw_to_dbm(value_mw) -> float:
    return float(linear_to_db(value_mw))
