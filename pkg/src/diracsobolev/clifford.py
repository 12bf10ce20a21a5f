"""Dirac and Pauli matrices and the momentum-space symbols of the Dirac operator."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

__all__ = [
    "PAULI",
    "ZERO2",
    "ONE2",
    "DiracMatrices",
    "dirac_matrices",
    "apply_matrix",
    "vec_p_norm",
    "dirac_symbol",
    "inverse_symbol",
]

ZERO2 = np.zeros((2, 2), dtype=complex)
ONE2 = np.eye(2, dtype=complex)

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

for _m in (ZERO2, ONE2, *PAULI):
    _m.setflags(write=False)


class DiracMatrices(NamedTuple):
    alpha: tuple[np.ndarray, np.ndarray, np.ndarray]
    beta: np.ndarray

    def gammas(self) -> tuple[np.ndarray, ...]:
        """alpha_1, alpha_2, alpha_3, beta: the four mutually anticommuting matrices."""
        return (*self.alpha, self.beta)


def _frozen(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


_ALPHA = tuple(_frozen(np.block([[ZERO2, s], [s, ZERO2]])) for s in PAULI)
_BETA = _frozen(np.block([[ONE2, ZERO2], [ZERO2, -ONE2]]))
_MATRICES = DiracMatrices(alpha=_ALPHA, beta=_BETA)


def dirac_matrices() -> DiracMatrices:
    """Return ``(alpha, beta)`` in the standard (Dirac) representation.

    ``alpha[j]`` has the Pauli matrix ``sigma_{j+1}`` in both off-diagonal
    2x2 blocks, ``beta = diag(1, 1, -1, -1)``. The arrays are read-only.
    """
    return _MATRICES


def apply_matrix(m: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Matrix-vector product; ``a`` may carry extra trailing axes (batched)."""
    return np.tensordot(m, a, axes=(1, 0))


def vec_p_norm(a: np.ndarray, p: float) -> float | np.ndarray:
    """``(sum_k |a_k|^p)^(1/p)`` over the leading axis of ``a``."""
    if not p >= 1 or not np.isfinite(p):
        raise ValueError(f"p must be a finite real >= 1, got {p!r}")
    mag = np.abs(np.asarray(a))
    if p == 1:
        return mag.sum(axis=0)
    if p == 2:
        return np.sqrt((mag * mag).sum(axis=0))
    return (mag**p).sum(axis=0) ** (1.0 / p)


def dirac_symbol(xi, mass_term: bool = True) -> np.ndarray:
    """``sum_j xi_j alpha_j`` (``+ beta`` if ``mass_term``).

    ``xi`` is a length-3 sequence; each entry may be an array of frequencies,
    in which case the result has shape ``(4, 4) + broadcast shape``.
    """
    xi = [np.asarray(x, dtype=float) for x in xi]
    if len(xi) != 3:
        raise ValueError("xi must have three components")
    shape = np.broadcast_shapes(*(x.shape for x in xi))
    out = np.zeros((4, 4) + shape, dtype=complex)
    for a_j, x_j in zip(_ALPHA, xi):
        out += a_j.reshape((4, 4) + (1,) * len(shape)) * x_j
    if mass_term:
        out += _BETA.reshape((4, 4) + (1,) * len(shape))
    return out


def inverse_symbol(xi) -> np.ndarray:
    """Symbol of ``(alpha.p + beta)^{-1}``: ``(alpha.xi + beta) / (1 + |xi|^2)``."""
    xi = [np.asarray(x, dtype=float) for x in xi]
    weight = 1.0 / (1.0 + xi[0] ** 2 + xi[1] ** 2 + xi[2] ** 2)
    return dirac_symbol(xi, mass_term=True) * weight
