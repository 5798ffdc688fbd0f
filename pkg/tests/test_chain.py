import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from photon_chain_lab.chain import (
    ChainSpec,
    CouplingVector,
    Explicit,
    Mirror,
    StaticDisorder,
    TimeSliced,
    UniformEdges,
    apply_static_disorder,
    build_couplings,
    single_particle_matrix,
    time_sliced_couplings,
)


def test_mirror_couplings_n4():
    k = build_couplings(ChainSpec(4, Mirror(1.0))).as_array()
    np.testing.assert_allclose(k, [math.sqrt(3), 2.0, math.sqrt(3)], atol=1e-15)


def test_uniform_edges_layout():
    k = build_couplings(ChainSpec(6, UniformEdges(1.0, 0.3))).values
    assert k == (0.3, 1.0, 1.0, 1.0, 0.3)


def test_two_channel_uniform_edges_is_single_K():
    assert build_couplings(ChainSpec(2, UniformEdges(1.0, 0.7))).values == (0.7,)


@pytest.mark.parametrize("n", range(2, 16))
def test_mirror_is_exact_palindrome(n):
    k = build_couplings(ChainSpec(n, Mirror())).values
    assert k == k[::-1]


@pytest.mark.parametrize("bad", [
    dict(n_channels=1),
    dict(n_channels=5, profile=UniformEdges(1.0, 0.0)),
    dict(n_channels=5, profile=Mirror(-1.0)),
    dict(n_channels=4, profile=Explicit((1.0, 2.0))),
])
def test_invalid_specs_rejected(bad):
    with pytest.raises(ValueError):
        ChainSpec(**bad)


def test_negative_sigma_rejected():
    with pytest.raises(ValueError):
        StaticDisorder(-0.01)
    with pytest.raises(ValueError):
        TimeSliced(steps=0)


@given(st.integers(2, 14), st.floats(0.01, 5.0))
def test_mirror_scales_with_J(n, J):
    base = build_couplings(ChainSpec(n, Mirror(1.0))).as_array()
    np.testing.assert_allclose(build_couplings(ChainSpec(n, Mirror(J))).as_array(), J * base, rtol=1e-14)


def test_mirror_spectrum_is_equally_spaced():
    # h has eigenvalues -(N-1), -(N-3), ..., N-1 in units of J
    for n in (2, 5, 9, 12):
        ev = np.linalg.eigvalsh(single_particle_matrix(build_couplings(ChainSpec(n, Mirror()))))
        np.testing.assert_allclose(ev, np.arange(-(n - 1), n, 2), atol=1e-12)


def test_static_disorder_deterministic_and_trial_dependent():
    k = build_couplings(ChainSpec(9, UniformEdges(1.0, 0.3)))
    a = apply_static_disorder(k, 0.05, seed=3, trial=7)
    b = apply_static_disorder(k, 0.05, seed=3, trial=7)
    c = apply_static_disorder(k, 0.05, seed=3, trial=8)
    assert a == b and a != c
    assert apply_static_disorder(k, 0.0, seed=3) == k


def test_static_disorder_statistics():
    k = CouplingVector((1.0,) * 10)
    rel = np.array([np.array(apply_static_disorder(k, 0.05, 1, i).values) - 1 for i in range(4000)]).ravel()
    assert abs(rel.mean()) < 0.003
    assert abs(rel.std() - 0.05) < 0.002


def test_time_sliced_single_step_reduces_to_static_draw():
    k = build_couplings(ChainSpec(7, Mirror()))
    sliced = time_sliced_couplings(k, TimeSliced(1, 0.05, 0.0), seed=4, trial=2)
    static = apply_static_disorder(k, 0.05, seed=4, trial=2).as_array()
    np.testing.assert_allclose(sliced[0], static, rtol=0, atol=1e-15)


def test_time_sliced_shape_and_spread():
    k = CouplingVector((1.0,) * 8)
    ks = time_sliced_couplings(k, TimeSliced(100, 0.04, 0.02), seed=1, trial=0)
    assert ks.shape == (100, 8)
    # per-coupling static offset is shared across slices; slice-to-slice spread is temporal
    assert abs(np.std(ks - ks.mean(axis=0), axis=0).mean() - 0.02) < 0.004


def test_explicit_profile_roundtrip():
    vals = (0.5, 1.0, 1.5)
    assert build_couplings(ChainSpec(4, Explicit(vals))).values == vals
