import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from majoranon import dynamics as dy
from majoranon import fields as fl
from majoranon import reference as rf
from majoranon.errors import ResourceError
from conftest import random_field


def test_derivative_of_constant_is_zero():
    g = fl.make_grid(1, [16], [5.0])
    d = rf.spectral_derivative(g, 0)
    np.testing.assert_allclose(d @ np.ones(16), 0, atol=1e-13)


def test_derivative_of_lattice_tones():
    g = fl.make_grid(1, [32], [2 * np.pi])
    x = g.axes[0]
    d = rf.spectral_derivative(g, 0)
    np.testing.assert_allclose(d @ np.sin(x), np.cos(x), atol=1e-13)
    # every non-Nyquist tone is differentiated exactly
    for j in range(1, 16):
        np.testing.assert_allclose(d @ np.sin(j * x), j * np.cos(j * x), atol=1e-11)
    # the Nyquist tone is annihilated
    np.testing.assert_allclose(d @ np.cos(16 * x), 0, atol=1e-11)


def test_derivative_is_antisymmetric_and_matches_fft():
    g = fl.make_grid(2, [8, 12], [3.0, 5.0])
    rng = np.random.default_rng(0)
    u = rng.normal(size=g.shape)
    for axis in range(2):
        d = rf.spectral_derivative(g, axis)
        np.testing.assert_allclose(d, -d.T, atol=1e-14)
        k = 2 * np.pi * np.fft.fftfreq(g.n[axis], d=g.dx[axis])
        k[g.n[axis] // 2] = 0
        shape = [1, 1]
        shape[axis] = g.n[axis]
        expected = np.fft.ifft(1j * k.reshape(shape) * np.fft.fft(u, axis=axis), axis=axis).real
        np.testing.assert_allclose((d @ u.ravel()).reshape(g.shape), expected, atol=1e-12)


def test_derivative_rejects_bad_axis():
    with pytest.raises(ValueError):
        rf.spectral_derivative(fl.make_grid(1, [8], [1.0]), 1)


@pytest.mark.parametrize("kind", [dy.Majorana(0.7), dy.DiracMajorana(0.3, 1.2), dy.Dirac(1.0, -1),
                                  dy.Weyl(), dy.Dirac(0.5, 1, -1)], ids=lambda k: k.name)
def test_generator_is_real_antisymmetric(kind):
    g = fl.make_grid(2, [6, 8], [4.0, 5.0])
    m = rf.dense_generator(g, kind).matrix
    assert m.dtype == float and m.shape == (4 * g.size,) * 2
    np.testing.assert_allclose(m, -m.T, atol=1e-13)


def test_generator_spectrum_matches_dispersion():
    m = 0.7
    g = fl.make_grid(1, [8], [6.0])
    ev = np.linalg.eigvals(rf.dense_generator(g, dy.Majorana(m)).matrix)
    assert np.abs(ev.real).max() < 1e-12
    energy = np.sqrt(g.p_axes[0] ** 2 + m**2)
    np.testing.assert_allclose(np.sort(ev.imag), np.sort(np.concatenate([energy, energy, -energy, -energy])),
                               atol=1e-12)


def test_massless_tone_moves_rigidly():
    # right mover: psi = e^{ikx} (1, 1) evolves into e^{ik(x - t)} (1, 1)
    g = fl.make_grid(1, [16], [2 * np.pi])
    x = g.axes[0]
    f = fl.SpinorField(g, np.stack([np.exp(3j * x)] * 2))
    out = rf.dense_evolve(f, dy.Weyl(), 0.4)
    np.testing.assert_allclose(out.values, np.stack([np.exp(3j * (x - 0.4))] * 2), atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 1000), st.floats(-30, 30))
def test_expm_against_scipy(seed, scale):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(12, 12)) * scale
    ours, ref = rf.expm(a), scipy.linalg.expm(a)
    np.testing.assert_allclose(ours, ref, rtol=1e-10, atol=1e-10 * max(1.0, np.abs(ref).max()))


def test_expm_small_cases():
    np.testing.assert_array_equal(rf.expm(np.zeros((3, 3))), np.eye(3))
    t = 1.3
    rot = rf.expm(np.array([[0.0, -t], [t, 0.0]]))
    np.testing.assert_allclose(rot, [[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]], atol=1e-15)
    with pytest.raises(ValueError):
        rf.expm(np.ones((2, 3)))


def test_propagator_is_orthogonal_and_identity_at_zero():
    g = fl.make_grid(1, [32], [10.0])
    p = rf.dense_propagator(g, dy.Majorana(1.0), 3.0).matrix
    np.testing.assert_allclose(p @ p.T, np.eye(p.shape[0]), atol=1e-10)
    np.testing.assert_allclose(rf.dense_propagator(g, dy.Majorana(1.0), 0.0).matrix, np.eye(p.shape[0]), atol=0)


def test_oracle_matches_per_mode_backends():
    g = fl.make_grid(2, [8, 8], [6.0, 6.0])
    f = random_field(g, 3)
    kind = dy.DiracMajorana(0.6, 0.9)
    oracle = rf.dense_evolve(f, kind, 1.7)
    np.testing.assert_allclose(oracle.values, dy.evolve(f, kind, "expanded", 1.7).values, atol=1e-10)
    np.testing.assert_allclose(oracle.values, dy.evolve(f, kind, "decomposed", 1.7).values, atol=1e-10)


def test_cap_enforced():
    g = fl.make_grid(2, [16, 16], [4.0, 4.0])
    with pytest.raises(ResourceError):
        rf.dense_generator(g, dy.Weyl(), cap=255)
    assert rf.dense_generator(g, dy.Weyl(), cap=256).matrix.shape == (1024, 1024)
