import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modlab.rng import make_rng
from modlab.spectral import (DispersionSymbol, Norm, SpectralField, boundary_mass_fraction,
                             cube_project, dyadic_levels, dyadic_multiplier, dyadic_project,
                             is_admissible, japanese, mixed_spacetime_norm, norm_eval, propagate_linear,
                             psi0, random_field, warn_if_boundary_mass)

SYMBOLS = [DispersionSymbol("schroedinger"), DispersionSymbol("airy"), DispersionSymbol("fractional", 2.5)]

seeds = st.integers(0, 2**32 - 1)


def field(seed, N=64, d=1, L=2 * math.pi, real=False):
    return random_field(make_rng(seed, 1), N, d, L, real_valued=real)


# --- representation --------------------------------------------------------

@given(seeds, st.sampled_from([(16, 1), (64, 1), (16, 2)]), st.floats(0.5, 50.0))
def test_parseval(seed, shape, L):
    N, d = shape
    f = field(seed, N, d, L)
    u = f.physical()
    phys = math.sqrt(np.sum(np.abs(u) ** 2) * f.dx**d)
    assert phys == pytest.approx(f.l2(), rel=1e-12)
    back = SpectralField.from_physical(u, L)
    np.testing.assert_allclose(back.coeffs, f.coeffs, atol=1e-13)


@given(seeds)
def test_real_field_is_conjugate_symmetric(seed):
    f = field(seed, 32, real=True)
    assert f.is_conjugate_symmetric()
    assert np.isrealobj(f.physical())


@pytest.mark.parametrize("shape", [(12,), (8, 16), (4, 4, 4)])
def test_invalid_shapes_rejected(shape):
    with pytest.raises(ValueError):
        SpectralField(np.zeros(shape))


# --- linear flow -----------------------------------------------------------

@pytest.mark.parametrize("symbol", SYMBOLS, ids=lambda s: s.kind)
@given(seed=seeds, dw=st.floats(-1e3, 1e3))
def test_unitarity(symbol, seed, dw):
    f = field(seed, 64, real=False)
    g = propagate_linear(f, symbol, dw)
    assert abs(g.l2() - f.l2()) <= 1e-12 * f.l2()


@pytest.mark.parametrize("symbol", SYMBOLS, ids=lambda s: s.kind)
@given(seed=seeds, a=st.floats(-10, 10), b=st.floats(-10, 10))
def test_group_law(symbol, seed, a, b):
    f = field(seed, 32)
    two = propagate_linear(propagate_linear(f, symbol, a), symbol, b)
    one = propagate_linear(f, symbol, a + b)
    np.testing.assert_allclose(two.coeffs, one.coeffs, atol=1e-9)


def test_zero_increment_is_identity():
    f = field(0)
    assert propagate_linear(f, SYMBOLS[0], 0.0) is f


def test_single_mode_phase_flip():
    c = np.zeros(16, complex)
    c[1] = 1.0
    g = propagate_linear(SpectralField(c), DispersionSymbol("schroedinger"), math.pi)
    assert g.coeffs[1] == pytest.approx(-1.0, abs=1e-15)


def test_airy_symbol_is_odd_cube():
    f = field(0, 16)
    ph = DispersionSymbol("airy").phase(f)
    k = f.wavenumbers()[0]
    np.testing.assert_array_equal(ph, k**3)


def test_free_gaussian_closed_form():
    # u_t = -i u_xx on a large box; Gaussian of variance sigma^2 spreads with complex width
    L, N, sigma, t = 32 * math.pi, 1024, 1.0, 1.0
    x = np.arange(N) * L / N - L / 2
    u0 = np.exp(-x**2 / (2 * sigma**2)).astype(complex)
    f = SpectralField.from_physical(u0, L)
    got = propagate_linear(f, DispersionSymbol("schroedinger"), t).physical()
    s2 = sigma**2 - 2j * t
    exact = sigma / np.sqrt(s2) * np.exp(-x**2 / (2 * s2))
    err = math.sqrt(np.sum(np.abs(got - exact) ** 2) * L / N)
    assert err <= 1e-8


# --- dyadic projectors -----------------------------------------------------

def test_psi0_shape():
    x = np.linspace(-1.5, 1.5, 3001)
    v = psi0(x)
    assert np.all(v[np.abs(x) <= 0.5] == 1.0)
    assert np.all(v[np.abs(x) >= 1.0] == 0.0)
    np.testing.assert_array_equal(v, psi0(-x))
    pos = x >= 0
    assert np.all(np.diff(v[pos]) <= 0)


def test_p1_keeps_zero_mode():
    c = np.zeros(16, complex)
    c[0] = 2.5
    f = SpectralField(c)
    np.testing.assert_array_equal(dyadic_project(f, 1).coeffs, c)


@given(seeds, st.sampled_from([(64, 1, 2 * math.pi), (32, 2, 2 * math.pi), (64, 1, 20.0)]))
def test_blocks_partition_unity(seed, shape):
    N, d, L = shape
    f = field(seed, N, d, L)
    total = sum(dyadic_project(f, M).coeffs for M in dyadic_levels(f))
    np.testing.assert_allclose(total, f.coeffs, atol=1e-12)


@pytest.mark.parametrize("N", [1, 2, 4, 8, 16])
def test_projector_support(N):
    f = field(3, 64)
    m = dyadic_multiplier(f, N, "up_to")
    assert np.all(m[f.abs_xi() > N] == 0)
    b = dyadic_multiplier(f, N, "block")
    assert np.all(b[f.abs_xi() > N] == 0)
    if N >= 2:
        assert np.all(b[f.abs_xi() <= N / 4] == 0)


@given(seeds, st.floats(-5, 5), st.sampled_from([1, 2, 4, 8]))
def test_flow_commutes_with_projection(seed, dw, N):
    f = field(seed, 32)
    s = DispersionSymbol("schroedinger")
    a = dyadic_project(propagate_linear(f, s, dw), N)
    b = propagate_linear(dyadic_project(f, N), s, dw)
    # both diagonal; only the multiplication order differs
    np.testing.assert_allclose(a.coeffs, b.coeffs, rtol=1e-15, atol=1e-17)


def test_non_dyadic_rejected():
    with pytest.raises(ValueError):
        dyadic_project(field(0), 3)


def test_cube_projector_half_open():
    f = field(0, 16)
    g = cube_project(f, 0, 4)
    n = f.modes()[0]
    keep = (n >= -2) & (n < 2)
    np.testing.assert_array_equal(g.coeffs[keep], f.coeffs[keep])
    assert np.all(g.coeffs[~keep] == 0)


# --- norms -----------------------------------------------------------------

@pytest.mark.parametrize("n", [0, 1, 3, -5])
@pytest.mark.parametrize("s", [-1.0, 0.0, 0.5, 2.0])
def test_single_mode_norms(n, s):
    c = np.zeros(16, complex)
    c[n] = 1.0
    f = SpectralField(c)
    expected = float(japanese(n)) ** s
    assert norm_eval(f, f"H{s}") == pytest.approx(expected, rel=1e-14)
    for r in ("1", "2", "3", "inf"):
        assert norm_eval(f, f"FL({s},{r})") == pytest.approx(expected, rel=1e-14)


@given(seeds)
def test_l2_h0_fl02_agree(seed):
    f = field(seed, 64)
    a, b, c = norm_eval(f, "L2"), norm_eval(f, "H0"), norm_eval(f, "FL(0,2)")
    assert a == pytest.approx(b, rel=1e-12)
    assert b == pytest.approx(c, rel=1e-12)


def test_besov_equivalent_to_sobolev():
    # ratio B^s_{2,2} / H^s stays within fixed constants; the sweep fixes them at [0.5, 2]
    ratios = []
    for seed in range(50):
        f = field(seed, 128)
        for s in (-1.0, 0.0, 1.0):
            ratios.append(norm_eval(f, f"B({s},2,2)") / norm_eval(f, f"H{s}"))
    assert 0.5 <= min(ratios) and max(ratios) <= 2.0


def test_linf_is_grid_max():
    f = field(1, 64)
    assert norm_eval(f, "Linf") == pytest.approx(np.abs(f.physical()).max(), rel=1e-15)


@pytest.mark.parametrize("tag", ["X2", "L0.5", "B(0,0.5,2)"])
def test_unsupported_norms(tag):
    with pytest.raises(ValueError):
        norm_eval(field(0, 16), tag)


def test_norm_tag_roundtrip():
    for tag in ("L4", "Linf", "H-0.5", "FL(1,inf)", "B(0.5,2,1)"):
        assert str(Norm.parse(tag)) == tag


# --- space-time norms ------------------------------------------------------

@pytest.mark.parametrize("p", [1.0, 2.0, 4.0, math.inf])
def test_constant_in_time_series(p):
    f = field(2, 32)
    t = np.linspace(0, 1, 11)
    got = mixed_spacetime_norm([f] * t.size, t, p, "L4")
    assert got == pytest.approx(norm_eval(f, "L4"), rel=1e-12)


@pytest.mark.parametrize("order", ["time_outside", "space_outside"])
def test_single_mode_l4(order):
    a, T, L = 0.7 + 0.2j, 1.3, 2 * math.pi
    c = np.zeros(32, complex)
    c[3] = a * math.sqrt(L)        # physical amplitude a
    f0 = SpectralField(c)
    s = DispersionSymbol("schroedinger")
    t = np.linspace(0, T, 201)
    series = [propagate_linear(f0, s, ti) for ti in t]
    got = mixed_spacetime_norm(series, t, 4.0, "L4", order)
    assert got == pytest.approx((T * L) ** 0.25 * abs(a), rel=1e-12)


def test_periodic_l4_strichartz_bounded():
    s = DispersionSymbol("schroedinger")
    T = 2 * math.pi
    t = np.linspace(0, T, 513)
    vals = []
    for seed in range(100):
        f = random_field(make_rng(seed, 1), 64, n_max=16)
        vals.append(mixed_spacetime_norm([propagate_linear(f, s, ti) for ti in t], t, 4.0, "L4"))
    # lossless periodic estimate; constant fixed by this sweep
    assert max(vals) <= 2.0


def test_mismatched_grids_rejected():
    f = field(0, 16)
    with pytest.raises(ValueError, match="mismatched"):
        mixed_spacetime_norm([f, f], [0.0, 0.5, 1.0], 2.0, "L2")
    with pytest.raises(ValueError, match="mismatched"):
        mixed_spacetime_norm([f, f, f], [0.0, 0.1, 1.0], 2.0, "L2")


@pytest.mark.parametrize("p, q, d, ok", [
    (4, math.inf, 1, True), (8, 4, 1, True), (2, 6, 3, True), (math.inf, 2, 1, True),
    (4, 4, 1, False), (2, math.inf, 2, False), (1, 4, 1, False),
])
def test_admissibility(p, q, d, ok):
    assert is_admissible(p, q, d) is ok


def test_boundary_mass_warning():
    narrow = SpectralField.from_physical(np.exp(-((np.arange(64) - 32.0) ** 2) / 0.5).astype(complex))
    assert boundary_mass_fraction(narrow) > 1e-8
    with pytest.warns(RuntimeWarning):
        assert warn_if_boundary_mass(narrow)
    wide = random_field(make_rng(0, 1), 64, n_max=4)
    assert not warn_if_boundary_mass(wide)
