import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from diracsobolev.clifford import dirac_matrices
from diracsobolev.field import (
    ScalarField,
    constant_spinor,
    gaussian,
    lp_norm,
    make_grid,
    mollified_delta,
    random_bandlimited,
    sample,
    spinor_from_scalar,
)
from diracsobolev.psido import (
    CUBE_INV_R,
    CutoffSpec,
    MatrixSymbol,
    ScalarSymbol,
    apply_matrix_multiplier,
    apply_scalar_multiplier,
    derivative,
    dirac_apply,
    dirac_inverse_kernel,
    dirac_inverse_spectral,
    dirac_kernel,
    dirac_operator_symbol,
    green_convolve,
    green_kernel,
    green_samples,
    periodic_convolve,
    periodic_convolve_direct,
    standard_symbols,
)

ALPHA, BETA = dirac_matrices()
SMALL = make_grid(16, 20.0)
SYMS = standard_symbols()


def _rel2(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def _plane_wave(grid, modes):
    xi = 2 * np.pi * np.asarray(modes) / grid.box_length
    f = sample(lambda x, y, z: np.exp(1j * (xi[0] * x + xi[1] * y + xi[2] * z)), grid)
    return f, xi


def test_unit_symbol_is_identity():
    f = random_bandlimited(SMALL, np.random.default_rng(0), ncomp=1)
    one = ScalarSymbol("one", lambda x, y, z: np.ones_like(x + y + z))
    np.testing.assert_allclose(apply_scalar_multiplier(one, f).values, f.values, atol=1e-13)


def test_identity_matrix_symbol():
    f = random_bandlimited(SMALL, np.random.default_rng(1))
    eye = MatrixSymbol("I", lambda x, y, z: np.eye(4)[:, :, None, None, None] + 0 * (x + y + z))
    np.testing.assert_allclose(apply_matrix_multiplier(eye, f).values, f.values, atol=1e-13)


@pytest.mark.parametrize("modes", [(1, 0, 0), (2, -3, 1), (0, 0, 5)])
def test_bessel_inverse_eigenfunction(modes):
    f, xi = _plane_wave(SMALL, modes)
    out = apply_scalar_multiplier(SYMS["bessel_inv"], f)
    np.testing.assert_allclose(out.values, f.values / (1 + xi @ xi), atol=1e-13)


@pytest.mark.parametrize("modes", [(1, 2, 3), (0, -1, 4)])
def test_r_smooth_eigenfunction(modes):
    f, xi = _plane_wave(SMALL, modes)
    out = apply_scalar_multiplier(SYMS["r_smooth_3"], f)
    np.testing.assert_allclose(out.values, 1j * xi[2] / np.sqrt(1 + xi @ xi) * f.values, atol=1e-13)


def test_dirac_symbol_on_plane_wave():
    s, xi = _plane_wave(SMALL, (1, -2, 3))
    u = np.array([1, 0.5j, -1, 2])
    out = apply_matrix_multiplier(dirac_operator_symbol(mass_term=True), spinor_from_scalar(s, u))
    v = (sum(a * x for a, x in zip(ALPHA, xi)) + BETA) @ u
    np.testing.assert_allclose(out.values, v[:, None, None, None] * s.values[None], atol=1e-12)


def test_nonfinite_symbol_rejected():
    bad = ScalarSymbol("bad", lambda x, y, z: 1 / (x * x + y * y + z * z))
    f = random_bandlimited(SMALL, np.random.default_rng(2), ncomp=1)
    with np.errstate(divide="ignore"), pytest.raises(ValueError, match="not finite"):
        apply_scalar_multiplier(bad, f)


def test_riesz_zero_at_origin():
    assert SYMS["riesz_1"](0.0, 0.0, 0.0) == 0


def test_nyquist_plane_zeroed_for_odd_symbols():
    n = SMALL.n
    f = ScalarField(SMALL, np.cos(np.pi * np.arange(n))[:, None, None] * np.ones(SMALL.shape))
    assert not np.any(np.abs(derivative(f, 0).values) > 1e-14)


@pytest.mark.parametrize("j", [1, 2, 3])
def test_r_smooth_composition(j):
    g = random_bandlimited(SMALL, np.random.default_rng(j), ncomp=1)
    twice = apply_scalar_multiplier(SYMS[f"r_smooth_{j}"], apply_scalar_multiplier(SYMS["r_smooth_3"], g))
    once = apply_scalar_multiplier(SYMS[f"second_order_{j}3"], g)
    assert _rel2(twice.values, once.values) <= 1e-12


@pytest.mark.parametrize("a, b", [("laplacian", "bessel_inv"), ("d_1", "riesz_2"), ("r_smooth_2", "bessel_half_inv")])
def test_multiplier_composition_commutes(a, b):
    f = random_bandlimited(SMALL, np.random.default_rng(5), ncomp=1)
    s1, s2 = SYMS[a], SYMS[b]
    ab = apply_scalar_multiplier(s2, apply_scalar_multiplier(s1, f))
    ba = apply_scalar_multiplier(s1, apply_scalar_multiplier(s2, f))
    joint = apply_scalar_multiplier(s1 * s2, f)
    assert _rel2(ab.values, joint.values) <= 1e-12
    assert _rel2(ba.values, joint.values) <= 1e-12


def test_cutoff_profile():
    c = CutoffSpec(1.0, 2.0)
    rho = np.linspace(0, 3, 301)
    prof = c.profile(rho)
    assert np.all(prof[rho <= 1] == 1) and np.all(prof[rho >= 2] == 0)
    assert np.all(np.diff(prof) <= 0)
    with pytest.raises(ValueError):
        CutoffSpec(2.0, 1.0)


def test_cutoff_minus_smooth_bounded_on_delta_family():
    grid = make_grid(64, 20.0)
    eps = [20 / 8, 20 / 16, 20 / 32, 20 / 64]
    outs = {}
    for name, syms in (("cut", standard_symbols(CutoffSpec(0.25, 0.5))), ("smooth", SYMS)):
        outs[name] = []
        for e in eps:
            d = mollified_delta(grid, e)
            diff = apply_scalar_multiplier(syms["r_cutoff_1"], d) - apply_scalar_multiplier(syms["r_smooth_1"], d)
            outs[name].append(lp_norm(diff, 1) / lp_norm(d, 1))
    steps = np.diff(outs["cut"])
    # increments shrink geometrically, so the sequence stays bounded
    assert np.all(steps[1:] <= 0.5 * steps[:-1])
    assert max(outs["cut"]) <= 1.5


def test_dirac_inverse_constant_spinor():
    c = np.array([1, 2j, -1, 0.5])
    out = dirac_inverse_spectral(constant_spinor(SMALL, c))
    np.testing.assert_allclose(out.values, (BETA @ c)[:, None, None, None] * np.ones((4,) + SMALL.shape), atol=1e-13)


def test_symbol_inverse_small_grid():
    f = random_bandlimited(SMALL, np.random.default_rng(6))
    back = dirac_inverse_spectral(dirac_apply(f, mass_term=True))
    assert _rel2(back.values, f.values) <= 1e-12


def test_dirac_apply_constant_is_zero():
    out = dirac_apply(constant_spinor(SMALL, [1, 1, 1, 1]))
    assert np.max(np.abs(out.values)) <= 1e-13
    out = dirac_apply(constant_spinor(SMALL, [1, 1, 1, 1]), scheme="centered_difference")
    assert not np.any(out.values)


def test_dirac_apply_unknown_scheme():
    with pytest.raises(ValueError):
        dirac_apply(constant_spinor(SMALL, [1, 0, 0, 0]), scheme="upwind")


def test_centered_difference_second_order():
    errs = []
    for n in (32, 64):
        grid = make_grid(n, 20.0)
        f = spinor_from_scalar(gaussian(grid, 1.5), [1, 1j, 0, -1])
        diff = dirac_apply(f, mass_term=True) - dirac_apply(f, mass_term=True, scheme="centered_difference")
        errs.append(lp_norm(diff, 2))
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)


def test_derivative_of_plane_wave():
    f, xi = _plane_wave(SMALL, (2, 0, -1))
    np.testing.assert_allclose(derivative(f, 2).values, 1j * xi[2] * f.values, atol=1e-13)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(0, 2))
def test_derivative_keeps_real_data_real(seed, axis):
    f = random_bandlimited(make_grid(8, 5.0), np.random.default_rng(seed), max_mode=3, ncomp=1, real=True)
    assert np.max(np.abs(derivative(f, axis).values.imag)) <= 1e-13


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dirac_operator_is_symmetric(seed):
    # <(alpha.p) f, g> = <f, (alpha.p) g>
    rng = np.random.default_rng(seed)
    grid = make_grid(8, 5.0)
    f, g = (random_bandlimited(grid, rng, max_mode=3) for _ in range(2))
    lhs = np.vdot(dirac_apply(f).values, g.values)
    rhs = np.vdot(f.values, dirac_apply(g).values)
    assert abs(lhs - rhs) <= 1e-10 * (1 + abs(lhs))


def test_green_value_and_errors():
    assert green_kernel([1.0, 0.0, 0.0]) == pytest.approx(np.exp(-1) / (4 * np.pi))
    assert green_kernel([0.0, 0.0, 1.0]) == pytest.approx(0.0292749, abs=1e-7)
    with pytest.raises(ValueError):
        green_kernel([0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        dirac_kernel([0.0, 0.0, 0.0])


def test_green_monotone_along_ray():
    t = np.linspace(0.05, 10, 200)
    vals = green_kernel(np.outer([0.3, -0.5, 0.8], t))
    assert np.all(np.diff(vals) < 0)


def test_green_integral_is_one():
    grid = make_grid(64, 20.0)
    assert grid.cell_volume * green_samples(grid).sum() == pytest.approx(1.0, rel=0.01)


def test_cube_inverse_radius_integral():
    v, _ = integrate.nquad(lambda x, y, z: 1 / np.sqrt(x * x + y * y + z * z), [[0, 0.5]] * 3)
    assert CUBE_INV_R == pytest.approx(8 * v, rel=1e-10)


def test_green_convolution_matches_symbol():
    grid = make_grid(64, 20.0)
    f = gaussian(grid, 1.5)
    spectral = apply_scalar_multiplier(SYMS["bessel_inv"], f)
    quad = green_convolve(f)
    assert lp_norm(quad - spectral, 1) / lp_norm(spectral, 1) <= 0.02


@pytest.mark.parametrize("n", [8, 16])
def test_direct_convolution_oracle(n):
    grid = make_grid(n, 10.0)
    f = gaussian(grid, 1.5)
    np.testing.assert_allclose(green_convolve(f, direct=True).values, green_convolve(f).values, atol=1e-14)
    rng = np.random.default_rng(n)
    k, v = rng.standard_normal((2,) + grid.shape)
    np.testing.assert_allclose(periodic_convolve_direct(k, v, 0.5), periodic_convolve(k, v, 0.5), atol=1e-12)


def test_direct_convolution_size_limit():
    with pytest.raises(ValueError):
        periodic_convolve_direct(np.zeros((18, 18, 18)), np.zeros((18, 18, 18)), 1.0)


def test_dirac_kernel_beta_block():
    K = dirac_kernel([0.0, 1.0, 0.0])
    np.testing.assert_allclose(np.diag(K), np.diag(BETA) * np.exp(-1) / (4 * np.pi), atol=1e-16)


def test_dirac_kernel_reflection():
    x = np.array([0.4, -1.3, 0.9])
    r = np.linalg.norm(x)
    even = BETA * np.exp(-r) / (4 * np.pi * r)
    np.testing.assert_allclose(dirac_kernel(x) + dirac_kernel(-x), 2 * even, atol=1e-15)


def _fd_kernel(x, h):
    out = BETA * green_kernel(x)
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        out = out - 1j * ALPHA[j] * (green_kernel(x + e) - green_kernel(x - e)) / (2 * h)
    return out


@pytest.mark.parametrize("x", [(0.7, -0.4, 1.1), (2.0, 0.1, 0.0), (-0.3, -0.3, 0.3)])
def test_dirac_kernel_finite_differences(x):
    x = np.array(x)
    K = dirac_kernel(x)
    e1 = np.abs(_fd_kernel(x, 1e-2) - K).max()
    e2 = np.abs(_fd_kernel(x, 5e-3) - K).max()
    assert e1 / e2 == pytest.approx(4, rel=0.02)


def test_kernel_zero_input():
    out = dirac_inverse_kernel(constant_spinor(SMALL, [0, 0, 0, 0]))
    assert not np.any(out.values)


def test_kernel_l1_bound_on_smooth_family():
    grid = make_grid(32, 20.0)
    consts = []
    for i in range(10):
        rng = np.random.default_rng([3, i])
        u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        g = spinor_from_scalar(gaussian(grid, rng.uniform(1.0, 2.5), 10 + rng.uniform(-2, 2, 3)), u)
        consts.append(lp_norm(dirac_inverse_kernel(g), 1) / lp_norm(g, 1))
    assert max(consts) / min(consts) <= 2.0
    assert max(consts) <= 10.0


def test_young_bound_along_delta_family():
    # ||K e_1||_1 = 1 (beta part) + 1 (x_3 part) + pi/2 (x_1 + i x_2 part)
    young = 2 + np.pi / 2
    grid = make_grid(64, 20.0)
    consts = []
    for e in (2.5, 1.25, 0.625, 0.3125):
        d = mollified_delta(grid, e)
        g = spinor_from_scalar(d, [1, 0, 0, 0])
        consts.append(lp_norm(dirac_inverse_spectral(g), 1) / lp_norm(g, 1))
    assert np.all(np.diff(consts) > 0)
    assert max(consts) <= young


def test_kernel_matches_spectral_small():
    grid = make_grid(32, 20.0)
    g = spinor_from_scalar(gaussian(grid, 1.5), [1, -1j, 0.5, 0])
    k = dirac_inverse_kernel(g)
    s = dirac_inverse_spectral(g)
    assert lp_norm(k - s, 1) / lp_norm(s, 1) <= 0.03
