import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diracsobolev.experiments import fit_log_divergence
from diracsobolev.field import (
    ScalarField,
    SpinorField,
    constant_spinor,
    gaussian,
    lp_norm,
    make_grid,
    mollified_delta,
    random_bandlimited,
    sample,
)
from diracsobolev.norms import (
    dirac_lp,
    dirac_sobolev_constant,
    dirac_sobolev_norm,
    gradient_lp,
    local_hardy_norm,
    norm_report,
    sobolev_norm,
)

GRID = make_grid(16, 20.0)


@pytest.mark.parametrize("p, expected", [(1, 2.0), (2, 2.0), (3, 10 ** (1 / 3))])
def test_dirac_sobolev_constant(p, expected):
    assert dirac_sobolev_constant(p) == pytest.approx(expected)


@pytest.mark.parametrize("p", [1, 2, 3.5])
def test_constant_spinor(p):
    c = np.array([1, -2j, 0, 0.5])
    f = constant_spinor(GRID, c)
    expected = (np.abs(c) ** p).sum() ** (1 / p) * GRID.volume ** (1 / p)
    assert sobolev_norm(f, p) == pytest.approx(expected, rel=1e-12)
    assert dirac_sobolev_norm(f, p) == pytest.approx(lp_norm(f, p), rel=1e-12)


def test_plane_wave_sobolev_value():
    xi = 2 * np.pi * np.array([1, -2, 2]) / GRID.box_length
    s = sample(lambda x, y, z: np.exp(1j * (xi[0] * x + xi[1] * y + xi[2] * z)), GRID)
    zero = np.zeros(GRID.shape)
    f = SpinorField(GRID, np.stack([s.values, zero, zero, zero]))
    assert sobolev_norm(f, 2) == pytest.approx(np.sqrt(GRID.volume * (1 + xi @ xi)), rel=1e-12)


def test_zero_field():
    f = constant_spinor(GRID, [0, 0, 0, 0])
    assert dirac_sobolev_norm(f, 1) == 0
    r = norm_report(f, 1)
    assert (r.lp, r.sobolev, r.dirac_sobolev, r.ratio) == (0, 0, 0, 1.0)
    assert local_hardy_norm(ScalarField(GRID, np.zeros(GRID.shape))) == 0


@pytest.mark.parametrize("p", [0.5, np.inf])
def test_rejects_bad_p(p):
    f = constant_spinor(GRID, [1, 0, 0, 0])
    for fn in (sobolev_norm, dirac_sobolev_norm, norm_report):
        with pytest.raises(ValueError):
            fn(f, p)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_p2_equality(seed):
    f = random_bandlimited(GRID, np.random.default_rng(seed), max_mode=4)
    r = norm_report(f, 2)
    assert abs(r.ratio - 1) <= 1e-10
    assert r.dirac_lp == pytest.approx(r.grad_lp, rel=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1.0, 1.5, 2.0, 3.0]))
def test_one_sided_bound(seed, p):
    f = random_bandlimited(GRID, np.random.default_rng(seed), max_mode=3)
    assert dirac_lp(f, p) <= 3 ** ((p - 1) / p) * gradient_lp(f, p) + 1e-9
    assert dirac_sobolev_norm(f, p) <= dirac_sobolev_constant(p) * sobolev_norm(f, p) * (1 + 1e-12)


def _trig_poly(grid, seed):
    rng = np.random.default_rng(seed)
    modes = rng.integers(-3, 4, size=(6, 3))
    amps = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))

    def fn(x, y, z):
        out = 0
        for m, a in zip(modes, amps):
            out = out + a[:, None, None, None] * np.exp(2j * np.pi * (m[0] * x + m[1] * y + m[2] * z) / grid.box_length)
        return list(out)

    return sample(fn, grid)


@pytest.mark.parametrize("p, tol", [(2, 1e-10), (4, 1e-10), (1, 1e-5), (3, 1e-5)])
def test_refinement_invariance_band_limited(p, tol):
    # even p: |f|^p is itself a trigonometric polynomial, so the rectangle rule is exact;
    # odd p: the modulus has kinks at zeros and the quadrature only converges
    coarse, fine = (norm_report(_trig_poly(make_grid(n, 20.0), 9), p) for n in (32, 64))
    assert fine.sobolev == pytest.approx(coarse.sobolev, rel=tol)
    assert fine.dirac_sobolev == pytest.approx(coarse.dirac_sobolev, rel=tol)


def test_hardy_gaussian_refinement():
    vals = [local_hardy_norm(gaussian(make_grid(n, 20.0), 1.5, normalize=True)) for n in (32, 64)]
    assert vals[1] == pytest.approx(vals[0], rel=0.01)
    assert np.isfinite(vals[1]) and vals[1] > 1


def test_hardy_log_divergence():
    grid = make_grid(64, 20.0)
    eps = 20.0 / np.array([4, 8, 16, 32, 64])
    vals = [local_hardy_norm(mollified_delta(grid, e)) for e in eps]
    assert np.all(np.diff(vals) > 0)
    c, _, r2 = fit_log_divergence(eps, vals)
    assert c > 0 and r2 >= 0.9


def test_axis_plane_wave_is_tight_at_p1():
    xi = 2 * np.pi * 3 / GRID.box_length
    s = sample(lambda x, y, z: np.cos(xi * y) + 0 * x, GRID)
    f = SpinorField(GRID, np.stack([s.values, 2 * s.values, 0 * s.values, -s.values]))
    assert dirac_lp(f, 1) == pytest.approx(gradient_lp(f, 1), rel=1e-12)
