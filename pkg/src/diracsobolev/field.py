"""Scalar and 4-spinor fields sampled on a periodic cubic box.

Fields store their samples as read-only complex arrays indexed ``[ix, iy, iz]``
(spinors carry a leading component axis of length 4). Position ``(ix, iy, iz)``
sits at ``(ix, iy, iz) * h`` in ``[0, L)^3``.
"""

from __future__ import annotations

import io
import os
import struct
from dataclasses import dataclass
from typing import BinaryIO, Callable, Union

import numpy as np
import scipy.fft as sfft

from .clifford import vec_p_norm

__all__ = [
    "GridSpec",
    "ScalarField",
    "SpinorField",
    "NormReport",
    "SupportError",
    "DSF1FormatError",
    "make_grid",
    "sample",
    "lp_norm",
    "fft_forward",
    "fft_inverse",
    "rescale_field",
    "gaussian",
    "mollified_delta",
    "bump",
    "random_bandlimited",
    "constant_spinor",
    "spinor_from_scalar",
    "dsf1_store",
    "dsf1_load",
]

AXES = (-3, -2, -1)


class SupportError(ValueError):
    """A rescaled field does not fit inside its target box."""


class DSF1FormatError(ValueError):
    """Malformed DSF1 stream."""


@dataclass(frozen=True)
class GridSpec:
    """``n`` points per axis on a periodic cube of side ``box_length``."""

    n: int
    box_length: float

    @property
    def h(self) -> float:
        return self.box_length / self.n

    @property
    def volume(self) -> float:
        return self.box_length**3

    @property
    def cell_volume(self) -> float:
        return self.h**3

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    def frequencies(self) -> np.ndarray:
        """Angular frequencies ``2 pi k / L`` per axis, in FFT order."""
        return 2 * np.pi * sfft.fftfreq(self.n, d=self.h)

    def wavevectors(self, zero_nyquist: bool = False):
        """Broadcastable ``(xi_1, xi_2, xi_3)`` over the frequency lattice.

        With ``zero_nyquist`` the unpaired index ``-n/2`` is mapped to the
        zero frequency, which keeps odd symbols consistent with real data.
        """
        k = self.frequencies()
        if zero_nyquist:
            k = k.copy()
            k[self.n // 2] = 0.0
        return (k[:, None, None], k[None, :, None], k[None, None, :])

    def coordinates(self):
        x = np.arange(self.n) * self.h
        return (x[:, None, None], x[None, :, None], x[None, None, :])

    def centered_coordinates(self, center=None):
        """Minimum-image displacements from ``center`` (default: box center)."""
        L = self.box_length
        if center is None:
            center = (L / 2,) * 3
        x = np.arange(self.n) * self.h
        out = []
        for axis, c in enumerate(center):
            d = (x - c + L / 2) % L - L / 2
            shape = [1, 1, 1]
            shape[axis] = self.n
            out.append(d.reshape(shape))
        return tuple(out)

    def displacements(self):
        """Displacements ``m h`` for ``m`` in FFT order (circular-convolution layout)."""
        m = np.fft.fftfreq(self.n, d=1.0 / self.n)
        d = m * self.h
        return (d[:, None, None], d[None, :, None], d[None, None, :])


def make_grid(n: int, box_length: float) -> GridSpec:
    if int(n) != n or n < 4 or n % 2:
        raise ValueError(f"n must be an even integer >= 4, got {n!r}")
    if not box_length > 0 or not np.isfinite(box_length):
        raise ValueError(f"box length must be positive and finite, got {box_length!r}")
    return GridSpec(int(n), float(box_length))


def _freeze(values: np.ndarray) -> np.ndarray:
    values = np.array(values, dtype=complex, copy=True)
    if not np.all(np.isfinite(values)):
        raise ValueError("field samples must be finite")
    values.setflags(write=False)
    return values


class _Field:
    grid: GridSpec
    values: np.ndarray

    def _new(self, values):
        return type(self)(self.grid, values)

    def _check_other(self, other):
        if type(other) is not type(self) or other.grid != self.grid:
            raise ValueError("fields must share type and grid")

    def __add__(self, other):
        self._check_other(other)
        return self._new(self.values + other.values)

    def __sub__(self, other):
        self._check_other(other)
        return self._new(self.values - other.values)

    def __mul__(self, c):
        return self._new(self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self._new(-self.values)

    @property
    def real_valued(self) -> bool:
        return bool(np.all(self.values.imag == 0))


@dataclass(frozen=True, eq=False)
class ScalarField(_Field):
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = _freeze(self.values)
        if v.shape != self.grid.shape:
            raise ValueError(f"expected shape {self.grid.shape}, got {v.shape}")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class SpinorField(_Field):
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = _freeze(self.values)
        if v.shape != (4,) + self.grid.shape:
            raise ValueError(f"expected shape {(4,) + self.grid.shape}, got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def components(self) -> tuple[ScalarField, ...]:
        return tuple(ScalarField(self.grid, c) for c in self.values)

    @classmethod
    def from_components(cls, comps) -> "SpinorField":
        comps = list(comps)
        if len(comps) != 4:
            raise ValueError("a spinor needs exactly four components")
        grid = comps[0].grid
        if any(c.grid != grid for c in comps):
            raise ValueError("components must share one grid")
        return cls(grid, np.stack([c.values for c in comps]))


Field = Union[ScalarField, SpinorField]


@dataclass(frozen=True)
class NormReport:
    p: float
    lp: float
    grad_lp: float
    dirac_lp: float
    sobolev: float
    dirac_sobolev: float
    ratio: float


def sample(fn: Callable, grid: GridSpec) -> Field:
    """Evaluate ``fn(x, y, z)`` on the grid points.

    ``fn`` is called once with broadcastable coordinate arrays and must return
    either a scalar array or a length-4 sequence of arrays (a spinor).
    """
    x, y, z = grid.coordinates()
    out = fn(x, y, z)
    if isinstance(out, (list, tuple)):
        if len(out) != 4:
            raise ValueError("spinor-valued fn must return four components")
        vals = np.stack([np.broadcast_to(np.asarray(c, dtype=complex), grid.shape) for c in out])
        return SpinorField(grid, vals)
    out = np.asarray(out, dtype=complex)
    if out.shape == (4,) + grid.shape:
        return SpinorField(grid, out)
    return ScalarField(grid, np.broadcast_to(out, grid.shape))


def lp_norm(f: Field, p: float) -> float:
    """Rectangle-rule ``L^p`` norm; spinors use the pointwise vector ``p``-norm."""
    if not p >= 1 or not np.isfinite(p):
        raise ValueError(f"p must be a finite real >= 1, got {p!r}")
    v = f.values if isinstance(f, SpinorField) else f.values[None]
    if p == 2:
        s = np.vdot(v, v).real
        return float(np.sqrt(f.grid.cell_volume * s))
    pointwise = vec_p_norm(v, p)
    return float((f.grid.cell_volume * np.sum(pointwise**p)) ** (1.0 / p))


def fft_forward(f: Field) -> Field:
    """Unitary 3D DFT of each component; the result lives on the FFT-ordered lattice."""
    return type(f)(f.grid, sfft.fftn(f.values, axes=AXES, norm="ortho"))


def fft_inverse(f: Field) -> Field:
    return type(f)(f.grid, sfft.ifftn(f.values, axes=AXES, norm="ortho"))


# -- generators ---------------------------------------------------------------

_IMAGES = np.arange(-3, 4)


def _check_scale(grid: GridSpec, scale: float, what: str):
    if not scale > 0:
        raise ValueError(f"{what} must be positive, got {scale!r}")
    if scale > grid.box_length / 4:
        raise ValueError(f"{what}={scale} exceeds L/4={grid.box_length / 4}")


def _periodized_gaussian_1d(grid: GridSpec, c: float, width: float) -> np.ndarray:
    L = grid.box_length
    x = np.arange(grid.n) * grid.h
    d = (x - c + L / 2) % L - L / 2
    d = d[:, None] + _IMAGES[None, :] * L
    return np.exp(-(d**2) / (2 * width**2)).sum(axis=1)


def _center(grid: GridSpec, center):
    if center is None:
        return (grid.box_length / 2,) * 3
    return tuple(float(c) for c in center)


def gaussian(grid: GridSpec, width: float, center=None, normalize: bool = False) -> ScalarField:
    """Periodized Gaussian ``exp(-|x-c|^2 / (2 width^2))``.

    With ``normalize`` the amplitude is ``(2 pi width^2)^(-3/2)`` so the
    continuum integral is one.
    """
    _check_scale(grid, width, "width")
    c = _center(grid, center)
    gx, gy, gz = (_periodized_gaussian_1d(grid, ci, width) for ci in c)
    vals = gx[:, None, None] * gy[None, :, None] * gz[None, None, :]
    if normalize:
        vals = vals * (2 * np.pi * width**2) ** -1.5
    return ScalarField(grid, vals)


def mollified_delta(grid: GridSpec, eps: float, center=None) -> ScalarField:
    """Periodized Gaussian of width ``eps`` rescaled to unit discrete mass."""
    g = gaussian(grid, eps, center).values.real
    g = g / (grid.cell_volume * g.sum())
    return ScalarField(grid, g)


def bump(grid: GridSpec, radius: float, center=None) -> ScalarField:
    """Smooth compact bump ``exp(1 - 1/(1 - r^2/radius^2))``, zero for ``r >= radius``."""
    _check_scale(grid, radius, "radius")
    dx, dy, dz = grid.centered_coordinates(_center(grid, center))
    s = (dx**2 + dy**2 + dz**2) / radius**2
    vals = np.zeros(grid.shape)
    inside = s < 1
    vals[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside]))
    return ScalarField(grid, vals)


def random_bandlimited(grid: GridSpec, rng: np.random.Generator, max_mode: int = 4,
                       ncomp: int = 4, real: bool = False) -> Field:
    """Random trigonometric polynomial with integer modes ``|k_i| <= max_mode``.

    ``max_mode`` must stay below ``n/2`` so the Nyquist planes carry no content.
    """
    if not 0 <= max_mode < grid.n // 2:
        raise ValueError(f"max_mode must lie in [0, n/2), got {max_mode}")
    n = grid.n
    spec = np.zeros((ncomp,) + grid.shape, dtype=complex)
    idx = np.r_[0 : max_mode + 1, n - max_mode : n] if max_mode else np.array([0])
    block = rng.standard_normal((ncomp, idx.size, idx.size, idx.size, 2))
    spec[np.ix_(range(ncomp), idx, idx, idx)] = block[..., 0] + 1j * block[..., 1]
    vals = sfft.ifftn(spec, axes=AXES, norm="ortho")
    if real:
        vals = vals.real
    if ncomp == 1:
        return ScalarField(grid, vals[0])
    return SpinorField(grid, vals)


def constant_spinor(grid: GridSpec, c) -> SpinorField:
    c = np.asarray(c, dtype=complex).reshape(4, 1, 1, 1)
    return SpinorField(grid, np.broadcast_to(c, (4,) + grid.shape))


def spinor_from_scalar(f: ScalarField, u) -> SpinorField:
    """The spinor ``f(x) u`` for a constant 4-vector ``u``."""
    u = np.asarray(u, dtype=complex).reshape(4, 1, 1, 1)
    return SpinorField(f.grid, u * f.values[None])


# -- rescaling ----------------------------------------------------------------


def _interp_matrix(src: GridSpec, points: np.ndarray) -> np.ndarray:
    """Rows evaluate the trigonometric interpolant at ``points`` from FFT coefficients."""
    k = src.frequencies()
    e = np.exp(1j * points[:, None] * k[None, :])
    # split the unpaired Nyquist mode evenly between +-k_N
    e[:, src.n // 2] = np.cos(points * k[src.n // 2])
    return e / src.n


def rescale_field(f: Field, R: float, target: GridSpec | None = None,
                  check_support: bool = True, tol: float = 1e-6) -> Field:
    """``g(x) = R^3 f(R x)`` about the box centers, sampled on ``target``.

    ``f`` is evaluated through its trigonometric interpolant. The default
    target is the box of side ``L/R`` with the same ``n``, on which the
    target samples coincide with the source samples. With ``check_support``
    a :class:`SupportError` is raised when the largest sample on the target
    box faces exceeds ``tol`` times the largest sample overall.
    """
    if not R >= 1:
        raise ValueError(f"R must be >= 1, got {R!r}")
    src = f.grid
    if target is None:
        target = make_grid(src.n, src.box_length / R)
    pts = src.box_length / 2 + R * (np.arange(target.n) * target.h - target.box_length / 2)
    E = _interp_matrix(src, pts)
    vals = f.values if isinstance(f, SpinorField) else f.values[None]
    coef = sfft.fftn(vals, axes=AXES)
    out = np.einsum("ia,jb,kc,sabc->sijk", E, E, E, coef, optimize=True) * R**3
    if isinstance(f, ScalarField):
        out = out[0]
        g = ScalarField(target, out)
    else:
        g = SpinorField(target, out)
    if check_support:
        mags = np.abs(out)
        peak = mags.max()
        faces = max(
            np.take(mags, idx, axis=ax).max() for ax in (-3, -2, -1) for idx in (0, -1)
        )
        if peak > 0 and faces > tol * peak:
            raise SupportError(
                f"rescaled field reaches the box boundary: face/peak = {faces / peak:.3e} > {tol:g}"
            )
    return g


# -- DSF1 serialization -------------------------------------------------------

MAGIC = b"DSF1"
VERSION = 1
_HEADER = struct.Struct("<4sIIdI")


def _open(target, mode):
    if isinstance(target, (str, os.PathLike)):
        return open(target, mode), True
    return target, False


def dsf1_store(f: Field, sink: Union[str, os.PathLike, BinaryIO]) -> None:
    """Write ``f`` as DSF1: header, then complex128 samples, x fastest, per component."""
    vals = f.values if isinstance(f, SpinorField) else f.values[None]
    ncomp = vals.shape[0]
    header = _HEADER.pack(MAGIC, VERSION, f.grid.n, f.grid.box_length, ncomp)
    # order="F" on each [ix, iy, iz] block puts ix fastest
    payload = b"".join(np.asarray(c, dtype="<c16").ravel(order="F").tobytes() for c in vals)
    fh, owned = _open(sink, "wb")
    try:
        fh.write(header)
        fh.write(payload)
    finally:
        if owned:
            fh.close()


def dsf1_load(source: Union[str, os.PathLike, BinaryIO, bytes]) -> Field:
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    fh, owned = _open(source, "rb")
    try:
        head = fh.read(_HEADER.size)
        if len(head) < _HEADER.size:
            raise DSF1FormatError("truncated header")
        magic, version, n, L, ncomp = _HEADER.unpack(head)
        if magic != MAGIC:
            raise DSF1FormatError(f"bad magic {magic!r}")
        if version != VERSION:
            raise DSF1FormatError(f"unsupported version {version}")
        if ncomp not in (1, 4):
            raise DSF1FormatError(f"ncomp must be 1 or 4, got {ncomp}")
        try:
            grid = make_grid(n, L)
        except ValueError as exc:
            raise DSF1FormatError(str(exc)) from exc
        count = ncomp * n**3
        body = fh.read(count * 16)
        if len(body) != count * 16:
            raise DSF1FormatError(f"expected {count} samples, got {len(body) // 16}")
        if fh.read(1):
            raise DSF1FormatError("trailing bytes after payload")
    finally:
        if owned:
            fh.close()
    data = np.frombuffer(body, dtype="<c16").reshape(ncomp, n, n, n)
    # undo the x-fastest layout
    vals = data.transpose(0, 3, 2, 1).astype(complex)
    if ncomp == 1:
        return ScalarField(grid, vals[0])
    return SpinorField(grid, vals)
