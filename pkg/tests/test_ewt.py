import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import beta_ref, meyer_bank_ref, random_feasible_bank
from stlf.errors import ConfigError, DataError, ShapeError
from stlf.ewt import (
    EwtBoundaries, EwtComponents, beta, build_filter_bank, decompose, detect_boundaries,
    ewt, gamma_bound, reconstruct,
)


def bank_for(edges, gamma="auto", grid=4096):
    return build_filter_bank(EwtBoundaries(np.asarray(edges, float)), gamma, grid)


# beta kernel

def test_beta_endpoints_and_midpoint():
    assert beta(0.0) == 0.0
    assert beta(1.0) == 1.0
    assert beta(0.5) == 0.5


def test_beta_clamps():
    assert beta(-3.0) == 0.0 and beta(7.0) == 1.0


def test_beta_matches_polynomial(rng):
    x = rng.uniform(0, 1, 200)
    assert np.allclose(beta(x), [beta_ref(v) for v in x], atol=1e-15)


@given(st.floats(0.0, 1.0))
def test_beta_symmetry(x):
    assert abs(beta(x) + beta(1.0 - x) - 1.0) <= 1e-12


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_beta_monotone(a, b):
    lo, hi = sorted((a, b))
    assert beta(lo) <= beta(hi) + 1e-15


# filter bank

def test_plateau_values():
    bank = bank_for([np.pi / 2], 0.1)
    r = bank.response([0.0, np.pi])
    assert r[0].tolist() == [1.0, 0.0]
    assert r[1].tolist() == [0.0, 1.0]


def test_transition_edges():
    w1, g = 1.0, 0.2
    bank = bank_for([w1], g)
    r = bank.response([(1 - g) * w1, (1 + g) * w1])
    assert r[0, 0] == 1.0 and r[0, 1] == 0.0


def test_responses_match_piecewise_oracle(rng):
    for _ in range(20):
        edges, g = random_feasible_bank(rng)
        bank = bank_for(edges, g)
        omegas = np.concatenate([rng.uniform(0, np.pi, 200), (1 - g) * edges, (1 + g) * edges])
        got = bank.response(omegas)
        want = np.array([meyer_bank_ref(w, list(edges), g) for w in omegas]).T
        assert np.max(np.abs(got - want)) <= 1e-12


def test_partition_of_unity_random_banks(rng):
    for _ in range(50):
        edges, g = random_feasible_bank(rng)
        assert bank_for(edges, g).partition_error() <= 1e-10


def test_auto_gamma_is_half_the_bound():
    edges = EwtBoundaries(np.array([0.5, 1.5]))
    # bound = min((1.5-0.5)/2, (pi-1.5)/(pi+1.5))
    expected = min(1.0 / 2.0, (np.pi - 1.5) / (np.pi + 1.5))
    assert gamma_bound(edges) == pytest.approx(expected, rel=1e-15)
    assert build_filter_bank(edges).gamma == pytest.approx(expected / 2, rel=1e-15)


def test_gamma_above_bound_names_bound():
    with pytest.raises(ConfigError, match="admissible bound"):
        bank_for([0.5, 0.6], 0.4)


def test_filters_are_even():
    bank = bank_for([0.7, 2.0])
    w = np.linspace(0, np.pi, 50)
    assert np.array_equal(bank.response(w), bank.response(-w))


def test_csv_dump(tmp_path):
    bank = bank_for([1.0], grid=16)
    bank.to_csv(tmp_path / "fb.csv")
    rows = (tmp_path / "fb.csv").read_text().splitlines()
    assert rows[0] == "omega,scaling,wavelet1" and len(rows) == 17


# boundary detection

def test_two_tone_boundary_between_peaks():
    T = 512
    t = np.arange(T)
    x = np.sin(2 * np.pi * 5 * t / T) + np.sin(2 * np.pi * 40 * t / T)
    # FFT oracle: locate the two largest bins
    mag = np.abs(np.fft.rfft(x))
    peaks = np.sort(np.argsort(mag)[-2:])
    lo, hi = 2 * np.pi * peaks / T
    b = detect_boundaries(x, 2)
    assert b.omegas.size == 1 and not b.fallback
    assert lo < b.omegas[0] < hi
    assert b.omegas[0] == pytest.approx((lo + hi) / 2)


def test_single_band_has_no_boundaries():
    assert detect_boundaries(np.arange(10.0), 1).omegas.size == 0


@given(st.integers(0, 2**31))
def test_noise_gives_one_boundary(seed):
    x = np.random.default_rng(seed).normal(size=128)
    b = detect_boundaries(x, 2)
    assert b.omegas.size == 1 and 0 < b.omegas[0] < np.pi


def test_fallback_on_flat_spectrum():
    b = detect_boundaries(np.ones(64), 3)
    assert b.fallback
    assert np.allclose(b.omegas, [np.pi / 3, 2 * np.pi / 3])


def test_ties_go_to_lower_frequency():
    T = 256
    t = np.arange(T)
    x = sum(np.cos(2 * np.pi * f * t / T) for f in (10, 30, 50))
    b = detect_boundaries(x, 2)
    # three equal peaks, the two lowest are kept
    assert b.omegas[0] == pytest.approx(2 * np.pi * 20 / T)


def test_detect_boundaries_sizing():
    with pytest.raises(Exception):
        detect_boundaries(np.ones(3), 2)


# decomposition

def test_low_tone_stays_in_scaling_band():
    T = 512
    bank = bank_for([1.0], 0.2)
    x = np.cos(2 * np.pi * 20 * np.arange(T) / T)  # 0.245 rad/sample < 0.8
    comps = decompose(x, bank).sub_series
    assert np.linalg.norm(comps[0] - x) / np.linalg.norm(x) <= 1e-8
    assert np.max(np.abs(comps[1])) <= 1e-10


def test_zero_window_and_count():
    bank = bank_for([0.5, 1.5])
    comps = decompose(np.zeros(64), bank)
    assert len(comps) == 3 and not comps.sub_series.any()


def test_nonfinite_window_rejected():
    with pytest.raises(DataError):
        decompose(np.array([1.0, np.inf, 2.0]), bank_for([1.0]))


def test_round_trip_random_signals(rng):
    for _ in range(100):
        edges, g = random_feasible_bank(rng)
        x = rng.normal(size=256)
        rec = reconstruct(decompose(x, bank_for(edges, g)))
        assert np.linalg.norm(rec - x) / np.linalg.norm(x) <= 1e-8


@given(arrays(float, st.integers(4, 200), elements=st.floats(-1e3, 1e3)))
def test_round_trip_property(x):
    bank = bank_for([0.9, 2.1])
    rec = reconstruct(decompose(x, bank))
    assert np.linalg.norm(rec - x) <= 1e-8 * max(np.linalg.norm(x), 1e-300) + 1e-12


@given(st.integers(0, 2**31), st.floats(-5, 5), st.floats(-5, 5))
def test_linearity(seed, a, b):
    r = np.random.default_rng(seed)
    x, y = r.normal(size=100), r.normal(size=100)
    bank = bank_for([0.6, 1.9])
    lhs = decompose(a * x + b * y, bank).sub_series
    rhs = a * decompose(x, bank).sub_series + b * decompose(y, bank).sub_series
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


@given(st.integers(0, 2**31), st.integers(8, 300))
def test_energy_partition(seed, n):
    r = np.random.default_rng(seed)
    x = r.normal(size=n)
    edges, g = random_feasible_bank(r)
    comps = decompose(x, bank_for(edges, g)).sub_series
    energy = np.sum(comps**2)
    ref = np.sum(x**2)
    assert ref * (1 - 1e-8) <= energy <= ref * (1 + 1e-8)


def test_single_band_identity(rng):
    x = rng.normal(size=50)
    comps = ewt(x, 1)
    assert len(comps) == 1
    assert np.allclose(comps.sub_series[0], x, atol=1e-12)
    assert np.allclose(reconstruct(comps), x, atol=1e-12)


def test_reconstruct_zero_and_shape_mismatch():
    bank = bank_for([1.0])
    assert not reconstruct(EwtComponents(np.zeros((2, 16)), bank)).any()
    with pytest.raises(ShapeError):
        reconstruct(EwtComponents(np.zeros((3, 16)), bank))


def test_boundaries_validated():
    with pytest.raises(ConfigError):
        EwtBoundaries(np.array([1.0, 0.5]))
    with pytest.raises(ConfigError):
        EwtBoundaries(np.array([np.pi]))
