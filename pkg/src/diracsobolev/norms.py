"""Sobolev, Dirac-Sobolev and local Hardy norms on the periodic box."""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft

from .field import NormReport, ScalarField, SpinorField, lp_norm
from .psido import apply_scalar_multiplier, dirac_apply, standard_symbols

__all__ = [
    "gradient_lp",
    "dirac_lp",
    "sobolev_norm",
    "dirac_sobolev_norm",
    "local_hardy_norm",
    "norm_report",
    "dirac_sobolev_constant",
]


def _check_p(p):
    if not p >= 1 or not np.isfinite(p):
        raise ValueError(f"p must be a finite real >= 1, got {p!r}")


def _sum_p(values: np.ndarray, p: float) -> float:
    a = np.abs(values)
    if p == 1:
        return float(a.sum())
    if p == 2:
        return float((a * a).sum())
    return float((a**p).sum())


def _gradient_sum_p(f: SpinorField, p: float) -> float:
    """``sum_x sum_j sum_k |d_j f_k(x)|^p`` (no cell volume)."""
    grid = f.grid
    k = grid.wavevectors(zero_nyquist=True)
    total = 0.0
    for comp in f.values:
        spec = sfft.fftn(comp)
        for j in range(3):
            total += _sum_p(sfft.ifftn(spec * (1j * k[j])), p)
    return total


def gradient_lp(f: SpinorField, p: float) -> float:
    """``||grad f||_p`` with ``|grad f|_p^p = sum_j sum_k |d_j f_k|^p``."""
    _check_p(p)
    return (f.grid.cell_volume * _gradient_sum_p(f, p)) ** (1 / p)


def dirac_lp(f: SpinorField, p: float) -> float:
    """``||(alpha.p) f||_p`` (spectral scheme)."""
    return lp_norm(dirac_apply(f), p)


def _combine(a: float, b: float, p: float) -> float:
    return (a**p + b**p) ** (1 / p)


def sobolev_norm(f: SpinorField, p: float) -> float:
    _check_p(p)
    return _combine(lp_norm(f, p), gradient_lp(f, p), p)


def dirac_sobolev_norm(f: SpinorField, p: float) -> float:
    _check_p(p)
    return _combine(lp_norm(f, p), dirac_lp(f, p), p)


def dirac_sobolev_constant(p: float) -> float:
    """``(1 + 3^(p-1))^(1/p)``, a bound on Dirac-Sobolev over Sobolev norm."""
    return (1 + 3 ** (p - 1)) ** (1 / p)


def local_hardy_norm(f: ScalarField) -> float:
    """``||f||_1 + sum_j ||r'_j f||_1`` with ``r'_j = d_j (1 - Laplacian)^(-1/2)``."""
    syms = standard_symbols()
    total = lp_norm(f, 1)
    for j in (1, 2, 3):
        total += lp_norm(apply_scalar_multiplier(syms[f"r_smooth_{j}"], f), 1)
    return total


def norm_report(f: SpinorField, p: float) -> NormReport:
    """All norms of ``f`` at exponent ``p``; the ratio of the zero field is 1."""
    _check_p(p)
    lp = lp_norm(f, p)
    grad = gradient_lp(f, p)
    dirac = dirac_lp(f, p)
    s = _combine(lp, grad, p)
    d = _combine(lp, dirac, p)
    ratio = 1.0 if s == 0 and d == 0 else s / d
    return NormReport(p=float(p), lp=lp, grad_lp=grad, dirac_lp=dirac, sobolev=s,
                      dirac_sobolev=d, ratio=ratio)

