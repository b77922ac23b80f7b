"""Empirical wavelet transform with Meyer-type filters.

Filters are defined on ``|omega|`` in ``[0, pi]`` (normalized angular frequency).
With boundaries ``w_1 < ... < w_{N-1}`` there are ``N`` filters: the scaling
filter below ``w_1`` and one wavelet per band ``[w_n, w_{n+1}]`` where
``w_N = pi``. The squared responses sum to one at every frequency, so analysis
followed by synthesis with the same real filters is the identity.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np

from .errors import ConfigError, DataError, ShapeError, SizingError

DEFAULT_GRID_SIZE = 4096


def beta(x):
    """Transition polynomial ``x^4 (35 - 84x + 70x^2 - 20x^3)``, clamped to [0, 1].

    Accepts scalars or arrays and returns the same kind.
    """
    xa = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    out = xa**4 * (35.0 - 84.0 * xa + 70.0 * xa**2 - 20.0 * xa**3)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class EwtBoundaries:
    """Band edges in (0, pi). ``fallback`` marks a uniform segmentation used
    because the spectrum had too few local maxima."""

    omegas: np.ndarray
    fallback: bool = False

    def __post_init__(self):
        w = np.asarray(self.omegas, dtype=float).reshape(-1)
        if w.size and (w[0] <= 0.0 or w[-1] >= np.pi or np.any(np.diff(w) <= 0.0)):
            raise ConfigError(f"boundaries must be strictly increasing inside (0, pi): {w}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "omegas", w)

    @property
    def num_components(self) -> int:
        return self.omegas.size + 1

    def __eq__(self, other):
        if not isinstance(other, EwtBoundaries):
            return NotImplemented
        return np.array_equal(self.omegas, other.omegas) and self.fallback == other.fallback


def gamma_bound(boundaries: EwtBoundaries) -> float:
    """Largest admissible transition ratio, ``min (w_{n+1}-w_n)/(w_{n+1}+w_n)`` with ``w_N = pi``."""
    w = boundaries.omegas
    if w.size == 0:
        return 1.0
    edges = np.append(w, np.pi)
    return float(np.min((edges[1:] - edges[:-1]) / (edges[1:] + edges[:-1])))


def _local_maxima(mag: np.ndarray) -> np.ndarray:
    """Indices ``i`` (interior) with ``mag[i-1] < mag[i] >= mag[i+1]``."""
    left = mag[1:-1] > mag[:-2]
    right = mag[1:-1] >= mag[2:]
    return np.flatnonzero(left & right) + 1


def detect_boundaries(window, num_components: int) -> EwtBoundaries:
    """Segment the magnitude spectrum of ``window`` into ``num_components`` bands.

    The ``num_components`` largest local maxima strictly inside (0, pi) are kept
    (ties go to the lower frequency), and a boundary is placed halfway between
    each pair of neighbouring maxima. If the spectrum has fewer maxima, (0, pi)
    is split uniformly and the result is flagged with ``fallback=True``.
    """
    x = np.asarray(window, dtype=float)
    if num_components < 1:
        raise ConfigError(f"num_components must be >= 1, got {num_components}")
    if x.size < 2 * num_components:
        raise SizingError(
            f"window of length {x.size} is too short for {num_components} components"
        )
    if num_components == 1:
        return EwtBoundaries(np.empty(0))

    mag = np.abs(np.fft.rfft(x))
    freqs = 2.0 * np.pi * np.arange(mag.size) / x.size
    peaks = _local_maxima(mag)
    peaks = peaks[(freqs[peaks] > 0.0) & (freqs[peaks] < np.pi)]
    if peaks.size < num_components:
        uniform = np.pi * np.arange(1, num_components) / num_components
        return EwtBoundaries(uniform, fallback=True)

    # stable sort on -magnitude keeps the lower frequency first among ties
    strongest = peaks[np.argsort(-mag[peaks], kind="stable")[:num_components]]
    kept = np.sort(freqs[strongest])
    return EwtBoundaries(0.5 * (kept[:-1] + kept[1:]))


@dataclass(frozen=True, eq=False)
class EwtFilterBank:
    boundaries: EwtBoundaries
    gamma: float
    grid_size: int = DEFAULT_GRID_SIZE

    @property
    def num_filters(self) -> int:
        return self.boundaries.num_components

    @cached_property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, np.pi, self.grid_size)

    @cached_property
    def _sampled(self) -> np.ndarray:
        return self.response(self.grid)

    @property
    def scaling_filter(self) -> np.ndarray:
        return self._sampled[0]

    @property
    def wavelet_filters(self) -> np.ndarray:
        return self._sampled[1:]

    def response(self, omega) -> np.ndarray:
        """Filter responses at frequencies ``omega``; shape ``(num_filters, len(omega))``.

        Only ``|omega|`` matters; the responses are real and even.
        """
        aw = np.abs(np.asarray(omega, dtype=float))
        edges = self.boundaries.omegas
        out = np.zeros((edges.size + 1, aw.size))
        if edges.size == 0:
            out[0] = 1.0
            return out
        g = self.gamma

        # beta of the normalized position inside each transition band; the falling
        # edge is written as sin(pi/2 (1 - b)) so both plateaus are hit exactly
        b = [beta((aw - (1.0 - g) * wn) / (2.0 * g * wn)) for wn in edges]
        lower = [(1.0 - g) * wn for wn in edges]
        upper = [(1.0 + g) * wn for wn in edges]

        def rising(n, sel):
            return np.sin(0.5 * np.pi * b[n][sel])

        def falling(n, sel):
            return np.sin(0.5 * np.pi * (1.0 - b[n][sel]))

        # transition bands are open intervals so the band edges take plateau values exactly
        scaling = np.zeros_like(aw)
        scaling[aw <= lower[0]] = 1.0
        sel = (aw > lower[0]) & (aw < upper[0])
        scaling[sel] = falling(0, sel)
        out[0] = scaling
        # wavelets; the last one stays flat up to pi
        for n in range(edges.size):
            resp = np.zeros_like(aw)
            resp[aw >= upper[n]] = 1.0
            sel = (aw > lower[n]) & (aw < upper[n])
            resp[sel] = rising(n, sel)
            if n + 1 < edges.size:
                sel = (aw > lower[n + 1]) & (aw < upper[n + 1])
                resp[sel] = falling(n + 1, sel)
                resp[aw >= upper[n + 1]] = 0.0
            out[n + 1] = resp
        return out

    def partition_error(self) -> float:
        """``max |sum of squared responses - 1|`` over the sampling grid."""
        return float(np.max(np.abs(np.sum(self._sampled**2, axis=0) - 1.0)))

    def to_csv(self, path) -> None:
        """Dump the sampled filters (one column per filter) for plotting."""
        names = ["omega", "scaling"] + [f"wavelet{n}" for n in range(1, self.num_filters)]
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(names)
            for i, w in enumerate(self.grid):
                writer.writerow([repr(float(w))] + [repr(float(v)) for v in self._sampled[:, i]])


def build_filter_bank(
    boundaries: EwtBoundaries,
    gamma: Union[float, str] = "auto",
    grid_size: int = DEFAULT_GRID_SIZE,
) -> EwtFilterBank:
    """Meyer-type bank for ``boundaries``.

    ``gamma="auto"`` uses half of the admissible maximum. An explicit gamma above
    the admissible bound raises :class:`ConfigError`.
    """
    if grid_size < 2:
        raise ConfigError(f"grid_size must be >= 2, got {grid_size}")
    bound = gamma_bound(boundaries)
    if isinstance(gamma, str):
        if gamma != "auto":
            raise ConfigError(f"gamma must be a number or 'auto', got {gamma!r}")
        gamma = 0.5 * bound
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise ConfigError(f"gamma must lie in (0, 1), got {gamma}")
    if gamma > bound:
        raise ConfigError(f"gamma {gamma} exceeds the admissible bound {bound:.6g} for these boundaries")
    return EwtFilterBank(boundaries, gamma, int(grid_size))


@dataclass(frozen=True, eq=False)
class EwtComponents:
    """Sub-series of one window: scaling component first, then wavelets by ascending frequency."""

    sub_series: np.ndarray
    bank: EwtFilterBank = field(repr=False)

    def __len__(self) -> int:
        return self.sub_series.shape[0]


def _bin_frequencies(n: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(n // 2 + 1) / n


def decompose(window, bank: EwtFilterBank) -> EwtComponents:
    """Split ``window`` into one sub-series per filter of ``bank``.

    The filters are evaluated exactly at the window's FFT bin frequencies (no
    zero padding), so every component has the window's length.
    """
    x = np.asarray(window, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise SizingError("decompose needs a one-dimensional window of length >= 2")
    if not np.all(np.isfinite(x)):
        raise DataError("window contains non-finite values")
    spectrum = np.fft.rfft(x)
    filters = bank.response(_bin_frequencies(x.size))
    comps = np.fft.irfft(spectrum[None, :] * filters, n=x.size, axis=1)
    return EwtComponents(comps, bank)


def reconstruct(components: EwtComponents, bank: EwtFilterBank | None = None) -> np.ndarray:
    """Synthesis with the analysis filters; inverts :func:`decompose`."""
    bank = components.bank if bank is None else bank
    comps = np.asarray(components.sub_series, dtype=float)
    if comps.ndim != 2 or comps.shape[0] != bank.num_filters:
        raise ShapeError(
            f"expected {bank.num_filters} components, got array of shape {comps.shape}"
        )
    n = comps.shape[1]
    filters = bank.response(_bin_frequencies(n))
    spectra = np.fft.rfft(comps, axis=1)
    return np.fft.irfft(np.sum(spectra * filters, axis=0), n=n)


def ewt(window, num_components: int = 2, gamma: Union[float, str] = "auto") -> EwtComponents:
    """Detect boundaries on ``window`` and decompose it in one call."""
    bank = build_filter_bank(detect_boundaries(window, num_components), gamma)
    return decompose(window, bank)
