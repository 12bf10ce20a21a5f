"""Fourier multipliers and the kernel representation of the inverse Dirac operator.

Every multiplier acts through the FFT lattice of the field's grid. Symbols
that are odd in ``xi`` are evaluated with the unpaired Nyquist frequency
mapped to zero, so first-derivative-type operators annihilate the Nyquist
planes and map real data to real data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.fft as sfft

from .clifford import dirac_matrices, dirac_symbol, inverse_symbol
from .field import AXES, GridSpec, ScalarField, SpinorField

__all__ = [
    "ScalarSymbol",
    "MatrixSymbol",
    "CutoffSpec",
    "CUBE_INV_R",
    "apply_scalar_multiplier",
    "apply_matrix_multiplier",
    "derivative",
    "dirac_apply",
    "dirac_operator_symbol",
    "inverse_dirac_symbol",
    "standard_symbols",
    "dirac_inverse_spectral",
    "green_kernel",
    "dirac_kernel",
    "green_samples",
    "dirac_kernel_samples",
    "periodic_convolve",
    "periodic_convolve_direct",
    "green_convolve",
    "dirac_inverse_kernel",
]


@dataclass(frozen=True)
class ScalarSymbol:
    """A scalar Fourier multiplier ``evaluator(xi1, xi2, xi3)``.

    ``odd`` marks symbols whose imaginary part is odd in ``xi``; those are
    evaluated on the Nyquist-free lattice.
    """

    name: str
    evaluator: Callable = field(repr=False)
    odd: bool = False

    def __call__(self, xi1, xi2, xi3):
        return self.evaluator(xi1, xi2, xi3)

    def __mul__(self, other: "ScalarSymbol") -> "ScalarSymbol":
        a, b = self.evaluator, other.evaluator
        return ScalarSymbol(
            f"{self.name}*{other.name}",
            lambda x, y, z: a(x, y, z) * b(x, y, z),
            self.odd != other.odd,
        )

    def on_grid(self, grid: GridSpec) -> np.ndarray:
        vals = np.asarray(self(*grid.wavevectors(zero_nyquist=self.odd)), dtype=complex)
        vals = np.broadcast_to(vals, grid.shape)
        if not np.all(np.isfinite(vals)):
            raise ValueError(f"symbol {self.name!r} is not finite on the frequency lattice")
        return vals


@dataclass(frozen=True)
class MatrixSymbol:
    """A 4x4 matrix multiplier; ``evaluator`` returns shape ``(4, 4) + broadcast``."""

    name: str
    evaluator: Callable = field(repr=False)
    odd: bool = False

    def __call__(self, xi1, xi2, xi3):
        return self.evaluator(xi1, xi2, xi3)


@dataclass(frozen=True)
class CutoffSpec:
    """Radial low-frequency cutoff: 1 for ``|xi| <= r0``, 0 for ``|xi| >= r1``."""

    r0: float = 1.0
    r1: float = 2.0

    def __post_init__(self):
        if not 0 <= self.r0 < self.r1:
            raise ValueError("cutoff radii must satisfy 0 <= r0 < r1")

    def profile(self, rho):
        t = np.clip((np.asarray(rho, dtype=float) - self.r0) / (self.r1 - self.r0), 0.0, 1.0)
        with np.errstate(divide="ignore"):
            a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
            b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
        return b / (a + b)


def _spectrum(values):
    return sfft.fftn(values, axes=AXES)


def _inverse(spec):
    return sfft.ifftn(spec, axes=AXES)


def apply_scalar_multiplier(s: ScalarSymbol, f):
    """``ifft(s(xi) * fft(f))``; spinors are multiplied componentwise."""
    return type(f)(f.grid, _inverse(_spectrum(f.values) * s.on_grid(f.grid)))


# slabs keep the (4, 4, ...) symbol array small on large grids
_SLAB_BYTES = 64 * 2**20


def apply_matrix_multiplier(S: MatrixSymbol, f: SpinorField) -> SpinorField:
    """Per-frequency 4x4 matrix-vector product on the four component spectra."""
    grid = f.grid
    spec = _spectrum(f.values)
    out = np.empty_like(spec)
    k1, k2, k3 = grid.wavevectors(zero_nyquist=S.odd)
    n = grid.n
    step = max(1, _SLAB_BYTES // (16 * 16 * n * n))
    for lo in range(0, n, step):
        sl = slice(lo, lo + step)
        m = S(k1[sl], k2, k3)
        m = np.broadcast_to(m, (4, 4) + spec[:, sl].shape[1:])
        if not np.all(np.isfinite(m)):
            raise ValueError(f"symbol {S.name!r} is not finite on the frequency lattice")
        out[:, sl] = np.einsum("ab...,b...->a...", m, spec[:, sl])
    return SpinorField(grid, _inverse(out))


def dirac_operator_symbol(mass_term: bool = False) -> MatrixSymbol:
    name = "alpha.xi+beta" if mass_term else "alpha.xi"
    return MatrixSymbol(name, lambda x, y, z: dirac_symbol((x, y, z), mass_term), odd=True)


def inverse_dirac_symbol() -> MatrixSymbol:
    return MatrixSymbol("(alpha.xi+beta)/(1+|xi|^2)", lambda x, y, z: inverse_symbol((x, y, z)),
                        odd=True)


def derivative(f, axis: int):
    """Spectral partial derivative along ``axis`` (0, 1, 2)."""
    return apply_scalar_multiplier(_DERIVATIVES[axis], f)


def _centered_difference(values: np.ndarray, axis: int, h: float) -> np.ndarray:
    return (np.roll(values, -1, axis=axis) - np.roll(values, 1, axis=axis)) / (2 * h)


def dirac_apply(f: SpinorField, mass_term: bool = False, scheme: str = "spectral") -> SpinorField:
    """``(alpha.p) f = -i sum_j alpha_j d_j f``, plus ``beta f`` if ``mass_term``.

    ``scheme`` is ``"spectral"`` (matrix symbol on the FFT lattice) or
    ``"centered_difference"`` (second-order periodic differences).
    """
    if scheme == "spectral":
        return apply_matrix_multiplier(dirac_operator_symbol(mass_term), f)
    if scheme != "centered_difference":
        raise ValueError(f"unknown scheme {scheme!r}")
    alpha, beta = dirac_matrices()
    out = np.zeros_like(f.values)
    for j in range(3):
        d = _centered_difference(f.values, axis=1 + j, h=f.grid.h)
        out += -1j * np.tensordot(alpha[j], d, axes=(1, 0))
    if mass_term:
        out += np.tensordot(beta, f.values, axes=(1, 0))
    return SpinorField(f.grid, out)


def _norm(x, y, z):
    return np.sqrt(x * x + y * y + z * z)


def _component(j):
    return lambda x, y, z: (x, y, z)[j]


def _make_derivative(j):
    c = _component(j)
    return ScalarSymbol(f"d_{j + 1}", lambda x, y, z: 1j * c(x, y, z), odd=True)


_DERIVATIVES = tuple(_make_derivative(j) for j in range(3))


def _riesz(j):
    c = _component(j)

    def ev(x, y, z):
        r = _norm(x, y, z)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(r > 0, 1j * c(x, y, z) / np.where(r > 0, r, 1.0), 0.0)

    return ScalarSymbol(f"riesz_{j + 1}", ev, odd=True)


def _r_smooth(j):
    c = _component(j)
    return ScalarSymbol(
        f"r_smooth_{j + 1}",
        lambda x, y, z: 1j * c(x, y, z) / np.sqrt(1 + x * x + y * y + z * z),
        odd=True,
    )


def _r_cutoff(j, cutoff: CutoffSpec):
    riesz = _riesz(j).evaluator
    return ScalarSymbol(
        f"r_cutoff_{j + 1}",
        lambda x, y, z: (1 - cutoff.profile(_norm(x, y, z))) * riesz(x, y, z),
        odd=True,
    )


def _second_order(j, k):
    cj, ck = _component(j), _component(k)
    return ScalarSymbol(
        f"second_order_{j + 1}{k + 1}",
        lambda x, y, z: -cj(x, y, z) * ck(x, y, z) / (1 + x * x + y * y + z * z),
    )


def standard_symbols(cutoff: CutoffSpec | None = None) -> dict[str, ScalarSymbol]:
    """Named scalar symbols used throughout the package.

    Keys: ``laplacian``, ``bessel_inv``, ``bessel_half_inv``, ``d_j``,
    ``riesz_j``, ``r_smooth_j``, ``r_cutoff_j`` and ``second_order_jk``
    (``j, k`` in 1..3). ``riesz_j`` is defined as 0 at ``xi = 0``.
    """
    cutoff = cutoff or CutoffSpec()
    out = {
        "laplacian": ScalarSymbol("laplacian", lambda x, y, z: -(x * x + y * y + z * z)),
        "bessel_inv": ScalarSymbol("bessel_inv", lambda x, y, z: 1 / (1 + x * x + y * y + z * z)),
        "bessel_half_inv": ScalarSymbol(
            "bessel_half_inv", lambda x, y, z: (1 + x * x + y * y + z * z) ** -0.5
        ),
    }
    for j in range(3):
        out[f"d_{j + 1}"] = _DERIVATIVES[j]
        out[f"riesz_{j + 1}"] = _riesz(j)
        out[f"r_smooth_{j + 1}"] = _r_smooth(j)
        out[f"r_cutoff_{j + 1}"] = _r_cutoff(j, cutoff)
        for k in range(3):
            out[f"second_order_{j + 1}{k + 1}"] = _second_order(j, k)
    return out


def dirac_inverse_spectral(g: SpinorField) -> SpinorField:
    """``(alpha.p + beta)^{-1} g`` through its matrix symbol."""
    return apply_matrix_multiplier(inverse_dirac_symbol(), g)


# -- kernels ------------------------------------------------------------------

#: integral of 1/|x| over the unit cube centred at the origin
CUBE_INV_R = 3 * np.log(2 + np.sqrt(3)) - np.pi / 2


def _radius(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape[0] != 3:
        raise ValueError("positions must have a leading axis of length 3")
    r = np.sqrt((y * y).sum(axis=0))
    if np.any(r == 0):
        raise ValueError("kernel is singular at the origin")
    return r


def green_kernel(y) -> float | np.ndarray:
    """``exp(-|y|) / (4 pi |y|)``, the Green function of ``1 - Laplacian``."""
    r = _radius(y)
    out = np.exp(-r) / (4 * np.pi * r)
    return float(out) if out.ndim == 0 else out


def dirac_kernel(x) -> np.ndarray:
    """Kernel of ``(alpha.p + beta)^{-1}`` at a nonzero point ``x`` (4x4)."""
    x = np.asarray(x, dtype=float)
    r = float(_radius(x))
    alpha, beta = dirac_matrices()
    radial = 1 / r**3 + 1 / r**2
    k = sum(1j * a * (xj * radial) for a, xj in zip(alpha, x)) + beta / r
    return k * np.exp(-r) / (4 * np.pi)


def _origin_inv_r_average(h: float) -> float:
    """Cell average of ``exp(-r)/r`` over the origin cell, to first order in ``r``."""
    return CUBE_INV_R / h - 1.0


def green_samples(grid: GridSpec) -> np.ndarray:
    """``G`` at the circular-convolution displacements; origin cell replaced by its average."""
    x, y, z = grid.displacements()
    r = np.sqrt(x * x + y * y + z * z)
    r[0, 0, 0] = 1.0
    out = np.exp(-r) / (4 * np.pi * r)
    out[0, 0, 0] = _origin_inv_r_average(grid.h) / (4 * np.pi)
    return out


def dirac_kernel_samples(grid: GridSpec):
    """Scalar parts ``(k_0, k_1, k_2, k_3)`` with ``K = (beta k_0 + sum_j i alpha_j k_j) / 4 pi``.

    ``k_0 = exp(-r)/r`` and ``k_j = x_j (1/r^3 + 1/r^2) exp(-r)``. On the origin
    cell the odd parts average to zero and ``k_0`` takes its cell average.
    """
    x, y, z = grid.displacements()
    r = np.sqrt(x * x + y * y + z * z)
    r[0, 0, 0] = 1.0
    decay = np.exp(-r)
    k0 = decay / r
    k0[0, 0, 0] = _origin_inv_r_average(grid.h)
    radial = (1 / r**3 + 1 / r**2) * decay
    ks = [np.broadcast_to(c * radial, grid.shape).copy() for c in (x, y, z)]
    for kj in ks:
        kj[0, 0, 0] = 0.0
    return (k0, *ks)


def periodic_convolve(kernel: np.ndarray, values: np.ndarray, h: float) -> np.ndarray:
    """``h^3 sum_m kernel[m] values[i - m]`` (circular), via FFT."""
    return _inverse(_spectrum(kernel) * _spectrum(values)) * h**3


def periodic_convolve_direct(kernel: np.ndarray, values: np.ndarray, h: float) -> np.ndarray:
    """Direct-sum circular convolution, for small grids (``n <= 16``)."""
    n = kernel.shape[0]
    if n > 16:
        raise ValueError("direct convolution is limited to n <= 16")
    out = np.zeros(kernel.shape, dtype=complex)
    kflat = kernel.ravel()
    idx = np.arange(n)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                shifted = values[np.ix_((i - idx) % n, (j - idx) % n, (k - idx) % n)]
                out[i, j, k] = kflat @ shifted.ravel()
    return out * h**3


def green_convolve(f: ScalarField, direct: bool = False) -> ScalarField:
    """``G * f`` by quadrature with the sampled Green function."""
    conv = periodic_convolve_direct if direct else periodic_convolve
    return ScalarField(f.grid, conv(green_samples(f.grid), f.values, f.grid.h))


def dirac_inverse_kernel(g: SpinorField) -> SpinorField:
    """``(alpha.p + beta)^{-1} g`` as the periodic convolution ``K * g``."""
    grid = g.grid
    alpha, beta = dirac_matrices()
    k0, *ks = dirac_kernel_samples(grid)
    gh = _spectrum(g.values)
    acc = np.tensordot(beta, gh * _spectrum(k0), axes=(1, 0))
    for a, kj in zip(alpha, ks):
        acc += np.tensordot(1j * a, gh * _spectrum(kj), axes=(1, 0))
    del gh
    return SpinorField(grid, _inverse(acc) * (grid.h**3 / (4 * np.pi)))
