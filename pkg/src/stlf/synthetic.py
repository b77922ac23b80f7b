"""Seeded synthetic half-hourly load, for demos and end-to-end checks."""

from __future__ import annotations

from datetime import datetime

import numpy as np

from .series import DEFAULT_SAMPLING_PERIOD, TimeSeries, regular_timestamps

PER_DAY = 48
PER_WEEK = 7 * PER_DAY


def synthetic_load(n: int = 1490, seed: int = 0, noise: float = 0.05, level: float = 1000.0,
                   start: datetime = datetime(2020, 1, 1, 0, 30)) -> TimeSeries:
    """Daily sinusoid with weekly amplitude modulation plus Gaussian noise.

    ``noise`` is the noise standard deviation as a fraction of the standard
    deviation of the noise-free signal.
    """
    t = np.arange(n)
    daily = np.sin(2 * np.pi * t / PER_DAY - np.pi / 2)
    weekly = 1.0 + 0.3 * np.sin(2 * np.pi * t / PER_WEEK)
    clean = level * (1.0 + 0.35 * daily * weekly + 0.1 * np.sin(2 * np.pi * t / PER_WEEK))
    rng = np.random.default_rng(seed)
    values = clean + noise * clean.std() * rng.standard_normal(n)
    return TimeSeries(values, regular_timestamps(start, n), DEFAULT_SAMPLING_PERIOD)
