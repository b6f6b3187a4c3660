import numpy as np
import pytest
from conftest import sine_state
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from preshock import spectral
from preshock.euler_core import (
    DegenerateStateError,
    Params,
    StateField,
    default_exponents,
    diff_riemann,
    exponent_violations,
    polar_reconstruction,
    primitive_from_riemann,
    rhs,
    riemann_from_primitive,
    specific_vorticity,
    wave_speeds,
)

finite = st.floats(-50, 50, allow_nan=False)


def constant(n, w, z, k, a):
    one = np.ones(n)
    return StateField(0.0, w * one, z * one, k * one, a * one)


def test_riemann_examples():
    w, z = riemann_from_primitive(1.0, 0.5)
    assert (w, z) == (1.5, 0.5)
    assert riemann_from_primitive(0.0, 0.0) == (0.0, 0.0)


def test_riemann_shape_mismatch():
    with pytest.raises(ValueError):
        riemann_from_primitive(np.zeros(3), np.zeros(4))


@given(arrays(float, 16, elements=finite), arrays(float, 16, elements=finite))
def test_riemann_round_trip(b, c):
    b2, c2 = primitive_from_riemann(*riemann_from_primitive(b, c))
    np.testing.assert_allclose(b2, b, atol=1e-13)
    np.testing.assert_allclose(c2, c, atol=1e-13)


def test_wave_speed_examples():
    np.testing.assert_allclose(wave_speeds(1.0, 0.0), (1 / 3, 2 / 3, 1.0))
    np.testing.assert_allclose(wave_speeds(3.0, 3.0), (4.0, 4.0, 4.0))
    np.testing.assert_allclose(wave_speeds(2.0, -1.0), (-1 / 3, 2 / 3, 5 / 3))


@given(finite, st.floats(1e-3, 20))
def test_wave_speeds_ordered_when_sound_speed_positive(z, c):
    l1, l2, l3 = wave_speeds(z + 2 * c, z)
    assert l1 < l2 < l3


def test_rhs_constant_states():
    t = rhs(constant(16, 1.0, 0.0, 0.0, 0.0))
    np.testing.assert_allclose(t.dw, 0, atol=1e-15)
    np.testing.assert_allclose(t.dz, 0, atol=1e-15)
    np.testing.assert_allclose(t.dk, 0, atol=1e-15)
    np.testing.assert_allclose(t.da, 1 / 6, atol=1e-15)
    a0 = 0.3
    t = rhs(constant(16, 1.0, 0.0, 0.0, a0))
    np.testing.assert_allclose(t.dw, -8 / 3 * a0, atol=1e-15)


def _fd_rhs(s: StateField):
    """The azimuthal system written out with second-order centred differences."""
    h = 2 * np.pi / s.n

    def dx(f):
        return (np.roll(f, -1) - np.roll(f, 1)) / (2 * h)

    w, z, k, a = s.w, s.z, s.k, s.a
    c = (w - z) / 2
    kt = dx(k)
    dw = -(w + z / 3) * dx(w) - 8 / 3 * a * w + c ** 2 * kt / 6
    dz = -(w / 3 + z) * dx(z) - 8 / 3 * a * z + c ** 2 * kt / 6
    dk = -2 * (w + z) / 3 * kt
    da = -2 * (w + z) / 3 * dx(a) - 4 / 3 * a ** 2 + (w + z) ** 2 / 3 - 2 * c ** 2 / 3
    return np.stack([dw, dz, dk, da])


def test_rhs_matches_finite_differences_at_second_order():
    errs = []
    for n in (64, 128, 256):
        s = sine_state(n)
        errs.append(np.max(np.abs(rhs(s, dealias=False).stacked() - _fd_rhs(s))))
    rates = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(rates > 1.9)


def test_rhs_rejects_degenerate_state():
    with pytest.raises(DegenerateStateError):
        rhs(constant(8, 1.0, 1.0, 0.0, 0.0))


def test_diff_riemann_cases():
    s = sine_state(64)
    flat = StateField(0, s.w, s.z, np.full(64, 0.3), s.a)
    qw, qz = diff_riemann(flat)
    np.testing.assert_allclose(qw, spectral.derivative(s.w), atol=1e-12)
    np.testing.assert_allclose(qz, spectral.derivative(s.z), atol=1e-12)
    sonic = StateField(0, s.w, s.w, s.k, s.a)
    np.testing.assert_allclose(diff_riemann(sonic)[0], spectral.derivative(s.w), atol=1e-12)
    qw, qz = diff_riemann(s)
    np.testing.assert_allclose(qw + qz, spectral.derivative(s.w + s.z), atol=1e-12)


def test_specific_vorticity_cases():
    np.testing.assert_allclose(specific_vorticity(constant(8, 1.0, 0.0, 0.0, 0.0)), 16.0)
    n = 64
    x = spectral.grid(n)
    w, z = 1.0 + 0.2 * np.sin(x), -1.0 + 0.1 * np.cos(2 * x)
    a = spectral.antiderivative(w + z)
    s = StateField(0, w, z, 0.1 * np.cos(x), a)
    np.testing.assert_allclose(specific_vorticity(s), 0.0, atol=1e-12)


def test_polar_reconstruction():
    s = sine_state(32)
    ur, ut, sig, S = polar_reconstruction(s, 1.0)
    np.testing.assert_array_equal(ur, s.a)
    np.testing.assert_array_equal(ut, s.b)
    np.testing.assert_array_equal(sig, s.c)
    np.testing.assert_array_equal(S, s.k)
    one = np.ones(4)
    assert np.all(polar_reconstruction(StateField(0, 1.5 * one, 0.5 * one, 0 * one, 0 * one), 2.0)[1] == 2.0)
    with pytest.raises(ValueError):
        polar_reconstruction(s, 0.0)


@settings(max_examples=30)
@given(st.floats(0.1, 10))
def test_entropy_independent_of_radius(r):
    s = sine_state(16)
    np.testing.assert_array_equal(polar_reconstruction(s, r)[3], polar_reconstruction(s, 1.0)[3])


@given(st.floats(0.01, 0.99))
def test_default_exponents_admissible(mu):
    assert exponent_violations(default_exponents(mu), mu) == []


def test_params_validation():
    p = Params(eps=0.1)
    assert Params.from_dict(p.to_dict()) == p
    with pytest.raises(ValueError):
        Params(eps=0.0)
    with pytest.raises(ValueError):
        Params(eps=0.1, gamma=1.4)
    with pytest.raises(ValueError):
        Params(eps=0.1, n_grid=7)
    bad = list(default_exponents(0.25))
    bad[13] = 0.0   # k_1 below mu
    with pytest.raises(ValueError, match="k_1"):
        Params(eps=0.1, exponents=bad)


def test_state_field_checks_shapes():
    with pytest.raises(ValueError):
        StateField(0, np.zeros(4), np.zeros(5), np.zeros(4), np.zeros(4))
    s = sine_state(8)
    np.testing.assert_array_equal(StateField.from_stacked(0.0, s.stacked()).w, s.w)
