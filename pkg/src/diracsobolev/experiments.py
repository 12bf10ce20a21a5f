"""Reproducible numerical experiments on Sobolev versus Dirac-Sobolev norms.

Each experiment returns an :class:`ExperimentReport` (or a :class:`RatioCurve`
that can be turned into one). Random members are drawn from
``numpy.random.default_rng([seed, index])`` so results never depend on the
order in which members are evaluated.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.fft as sfft

from .field import (
    GridSpec,
    SpinorField,
    bump,
    gaussian,
    lp_norm,
    make_grid,
    mollified_delta,
    random_bandlimited,
    rescale_field,
    spinor_from_scalar,
)
from .norms import dirac_sobolev_constant, local_hardy_norm, norm_report
from .psido import (
    CutoffSpec,
    apply_scalar_multiplier,
    dirac_apply,
    dirac_inverse_spectral,
    derivative,
    standard_symbols,
)

__all__ = [
    "IDENTITY_TOL",
    "Verdict",
    "ExperimentReport",
    "RatioCurve",
    "fit_log_divergence",
    "verify_identities",
    "verify_reconstruction",
    "make_family",
    "equivalence_probe",
    "p1_witness_curve",
    "p1_witness_report",
    "scaling_transfer",
    "ds_inequality_probe",
    "ratio_maximize",
    "ratio_maximize_report",
    "default_witness",
]

IDENTITY_TOL = 1e-9


def _clean(v):
    if isinstance(v, (np.floating, np.integer)):
        v = v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    return v


@dataclass(frozen=True)
class Verdict:
    check: str
    passed: bool
    margin: float


@dataclass
class ExperimentReport:
    name: str
    params: dict
    rows: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    seed: int = 0

    def add_row(self, label: str, **values):
        self.rows.append((label, values))

    def check(self, name: str, passed: bool, margin: float):
        self.verdicts.append(Verdict(name, bool(passed), float(margin)))

    def check_at_most(self, name: str, value: float, limit: float):
        """Pass iff ``value <= limit``; the margin is ``limit - value``."""
        self.check(name, value <= limit, limit - value)

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "params": _clean(dict(sorted(self.params.items()))),
            "rows": [{"label": lbl, "values": _clean(vals)} for lbl, vals in self.rows],
            "verdicts": [
                {"check": v.check, "pass": v.passed, "margin": _clean(v.margin)}
                for v in self.verdicts
            ],
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        keys: list[str] = []
        for _, vals in self.rows:
            keys.extend(k for k in vals if k not in keys)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["label", *keys])
        for lbl, vals in self.rows:
            writer.writerow([lbl, *(_fmt(vals.get(k, "")) for k in keys)])
        return buf.getvalue()


def _fmt(v):
    v = _clean(v)
    return repr(v) if isinstance(v, float) else v


@dataclass
class RatioCurve:
    """Sobolev / Dirac-Sobolev ratios along a one-parameter family."""

    parameters: np.ndarray
    ratios: np.ndarray
    p: float = 1.0
    slope: Optional[float] = None
    intercept: Optional[float] = None
    r_squared: Optional[float] = None
    hardy: Optional[np.ndarray] = None
    best_field: Optional[SpinorField] = None

    @property
    def strictly_increasing(self) -> bool:
        return bool(np.all(np.diff(self.ratios) > 0))


def fit_log_divergence(eps, values):
    """Least-squares fit ``values ~ c log(1/eps) + d``; returns ``(c, d, R^2)``."""
    x = np.log(1 / np.asarray(eps, dtype=float))
    y = np.asarray(values, dtype=float)
    c, d = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (c * x + d)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(c), float(d), r2


# -- spectral identity checks -------------------------------------------------


def _rel(lhs: np.ndarray, rhs: np.ndarray) -> float:
    scale = max(np.linalg.norm(lhs), np.linalg.norm(rhs))
    if scale == 0:
        return 0.0
    return float(np.linalg.norm(lhs - rhs) / scale)


class _Spectral:
    """Component spectra with lattice symbols, for exact identity algebra."""

    def __init__(self, grid: GridSpec):
        k = grid.wavevectors(zero_nyquist=True)
        self.d = [1j * kj for kj in k]
        self.lap = -(k[0] ** 2 + k[1] ** 2 + k[2] ** 2)
        self.one_minus_lap = 1 - self.lap


def verify_identities(f: SpinorField, g: SpinorField | None = None) -> ExperimentReport:
    """Componentwise identities linking ``f`` and ``g = (alpha.p) f``.

    Checks the four first-order rows ``i g_k = ...`` and the twelve
    third-order rows ``Laplacian d_j f_k = ...``. Passing ``g`` substitutes a
    (possibly corrupted) right-hand side, which should then fail.
    """
    grid = f.grid
    if g is None:
        g = dirac_apply(f)
    F = sfft.fftn(f.values, axes=(-3, -2, -1))
    IG = 1j * sfft.fftn(g.values, axes=(-3, -2, -1))
    s = _Spectral(grid)
    d1, d2, d3 = s.d
    report = ExperimentReport("verify_identities", {"n": grid.n, "box_length": grid.box_length})

    first_order = {
        "ig1": (IG[0], (d1 - 1j * d2) * F[3] + d3 * F[2]),
        "ig2": (IG[1], (d1 + 1j * d2) * F[2] - d3 * F[3]),
        "ig3": (IG[2], (d1 - 1j * d2) * F[1] + d3 * F[0]),
        "ig4": (IG[3], (d1 + 1j * d2) * F[0] - d3 * F[1]),
    }
    worst = 0.0
    for label, (lhs, rhs) in first_order.items():
        r = _rel(lhs, rhs)
        worst = max(worst, r)
        report.add_row(label, residual=r)

    # (target component, g-index in the (d1 +- i d2) term, sign of i d2, g-index in d3 term, sign)
    third_order = {
        4: (0, +1, 1, -1),
        3: (1, -1, 0, +1),
        2: (2, +1, 3, -1),
        1: (3, -1, 2, +1),
    }
    for k, (a, sa, b, sb) in third_order.items():
        for j in range(3):
            dj = s.d[j]
            lhs = s.lap * dj * F[k - 1]
            rhs = dj * (d1 + sa * 1j * d2) * IG[a] + sb * dj * d3 * IG[b]
            r = _rel(lhs, rhs)
            worst = max(worst, r)
            report.add_row(f"lap_d{j + 1}_f{k}", residual=r)
    report.check_at_most("all_residuals", worst, IDENTITY_TOL)
    return report


def verify_reconstruction(g: SpinorField, f: SpinorField | None = None) -> ExperimentReport:
    """Check that ``f = (alpha.p + beta)^{-1} g`` satisfies the solved system.

    Rows ``(1 - Laplacian) f_k = ...`` and their differentiated forms
    ``d_j f_k = ...`` are always checked. When only ``g_2`` is nonzero, the
    extra rows compare ``d_j f_4`` with ``i r'_j r'_3 g_2`` computed by
    applying the two multipliers in sequence.
    """
    grid = g.grid
    if f is None:
        f = dirac_inverse_spectral(g)
    F = sfft.fftn(f.values, axes=(-3, -2, -1))
    G = sfft.fftn(g.values, axes=(-3, -2, -1))
    s = _Spectral(grid)
    d1, d2, d3 = s.d
    report = ExperimentReport("verify_reconstruction", {"n": grid.n, "box_length": grid.box_length})
    rhs = {
        1: -1j * (d1 - 1j * d2) * G[3] - 1j * d3 * G[2] + G[0],
        2: -1j * (d1 + 1j * d2) * G[2] + 1j * d3 * G[3] + G[1],
        3: -1j * (d1 - 1j * d2) * G[1] - 1j * d3 * G[0] - G[2],
        4: -1j * (d1 + 1j * d2) * G[0] + 1j * d3 * G[1] - G[3],
    }
    worst = 0.0
    for k, r_k in rhs.items():
        r = _rel(s.one_minus_lap * F[k - 1], r_k)
        worst = max(worst, r)
        report.add_row(f"helmholtz_f{k}", residual=r)
    for k, r_k in rhs.items():
        for j in range(3):
            dj = s.d[j]
            r = _rel(dj * F[k - 1], dj * r_k / s.one_minus_lap)
            worst = max(worst, r)
            report.add_row(f"d{j + 1}_f{k}", residual=r)

    only_g2 = not np.any(g.values[[0, 2, 3]])
    if only_g2:
        syms = standard_symbols()
        g2 = g.components[1]
        r3 = apply_scalar_multiplier(syms["r_smooth_3"], g2)
        for j in range(3):
            lhs = derivative(f.components[3], j).values
            twice = apply_scalar_multiplier(syms[f"r_smooth_{j + 1}"], r3).values
            second = apply_scalar_multiplier(syms[f"second_order_{j + 1}3"], g2).values
            r_a = _rel(lhs, 1j * second)
            r_b = _rel(twice, second)
            worst = max(worst, r_a, r_b)
            report.add_row(f"d{j + 1}_f4_from_g2", residual=r_a)
            report.add_row(f"r{j + 1}r3_composition", residual=r_b)
    report.params["only_g2"] = only_g2
    report.check_at_most("all_residuals", worst, IDENTITY_TOL)
    return report


# -- families -----------------------------------------------------------------

FAMILIES = ("bandlimited", "gaussian", "bump")


def _random_unit_spinor(rng) -> np.ndarray:
    u = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    return u / np.linalg.norm(u)


def _member(family: str, grid: GridSpec, rng: np.random.Generator) -> SpinorField:
    L = grid.box_length
    if family == "bandlimited":
        return random_bandlimited(grid, rng, max_mode=min(4, grid.n // 2 - 1))
    if family == "gaussian":
        width = rng.uniform(0.06, 0.1) * L
        center = L / 2 + rng.uniform(-0.1, 0.1, size=3) * L
        return spinor_from_scalar(gaussian(grid, width, center), _random_unit_spinor(rng))
    if family == "bump":
        radius = rng.uniform(0.2, 0.25) * L
        center = L / 2 + rng.uniform(-0.05, 0.05, size=3) * L
        return spinor_from_scalar(bump(grid, radius, center), _random_unit_spinor(rng))
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")


def make_family(family: str, grid: GridSpec, n_samples: int, seed: int) -> list[SpinorField]:
    """``n_samples`` members; member ``i`` uses the RNG stream ``(seed, i)``."""
    if n_samples < 1:
        raise ValueError("family must have at least one member")
    return [_member(family, grid, np.random.default_rng([seed, i])) for i in range(n_samples)]


def equivalence_probe(p: float, family: str = "bandlimited", n_samples: int = 8, seed: int = 0,
                      grid: GridSpec | None = None) -> ExperimentReport:
    """Empirical constants ``C1 = min S/D`` and ``C2 = max S/D`` over a family.

    ``S`` is the Sobolev norm and ``D`` the Dirac-Sobolev norm. Checks that
    ``D/S`` never exceeds ``(1 + 3^(p-1))^(1/p)``; at ``p = 2`` also that both
    constants equal one.
    """
    grid = grid or make_grid(32, 20.0)
    members = make_family(family, grid, n_samples, seed)
    report = ExperimentReport(
        "equivalence_probe",
        {"p": p, "family": family, "n_samples": n_samples, "n": grid.n,
         "box_length": grid.box_length},
        seed=seed,
    )
    ratios = []
    for i, f in enumerate(members):
        r = norm_report(f, p)
        ratios.append(r.ratio)
        report.add_row(f"member_{i}", sobolev=r.sobolev, dirac_sobolev=r.dirac_sobolev,
                       ratio=r.ratio)
    c1, c2 = min(ratios), max(ratios)
    report.add_row("constants", C1_hat=c1, C2_hat=c2, dirac_by_sobolev_max=1 / c1)
    report.check_at_most("dirac_by_sobolev_bound", 1 / c1, dirac_sobolev_constant(p))
    if p == 2:
        report.check_at_most("parseval_equality", max(abs(c1 - 1), abs(c2 - 1)), 1e-9)
    report.check("finite_constants", math.isfinite(c1) and math.isfinite(c2) and c1 > 0, c1)
    return report


# -- p = 1 witness ------------------------------------------------------------


def _witness_source(grid: GridSpec, eps: float) -> SpinorField:
    d = mollified_delta(grid, eps)
    zero = np.zeros(grid.shape)
    return SpinorField(grid, np.stack([zero, d.values, zero, zero]))


def _check_eps(eps_list, grid: GridSpec):
    eps = np.asarray(eps_list, dtype=float)
    if eps.size < 4:
        raise ValueError("need at least four eps values")
    if np.any(np.diff(eps) >= 0):
        raise ValueError("eps values must be strictly decreasing")
    lo, hi = grid.h, grid.box_length / 8
    bad = eps[(eps < lo * (1 - 1e-12)) | (eps > hi * (1 + 1e-12))]
    if bad.size:
        raise ValueError(
            f"eps {bad.tolist()} outside [h, L/8] = [{lo:g}, {hi:g}] for n={grid.n}, L={grid.box_length:g}"
        )
    return eps


def p1_witness_curve(eps_list, grid: GridSpec, p: float = 1.0) -> RatioCurve:
    """Norm ratio of ``f = (alpha.p + beta)^{-1} (0, delta_eps, 0, 0)`` along ``eps``.

    Also records the local Hardy norm of ``delta_eps`` and fits the ratio
    against ``log(1/eps)``.
    """
    eps = _check_eps(eps_list, grid)
    ratios, hardy = [], []
    for e in eps:
        g = _witness_source(grid, e)
        f = dirac_inverse_spectral(g)
        ratios.append(norm_report(f, p).ratio)
        hardy.append(local_hardy_norm(g.components[1]))
    c, d, r2 = fit_log_divergence(eps, ratios)
    return RatioCurve(parameters=eps, ratios=np.array(ratios), p=p, slope=c, intercept=d,
                      r_squared=r2, hardy=np.array(hardy))


def p1_witness_report(eps_list, grid: GridSpec, min_r_squared: float = 0.9) -> ExperimentReport:
    curve = p1_witness_curve(eps_list, grid, p=1.0)
    control = p1_witness_curve(eps_list, grid, p=2.0)
    report = ExperimentReport(
        "p1_witness",
        {"eps_list": [float(e) for e in curve.parameters], "n": grid.n,
         "box_length": grid.box_length},
    )
    for e, r1, r2, hn in zip(curve.parameters, curve.ratios, control.ratios, curve.hardy):
        report.add_row(f"eps={e:.6g}", eps=e, ratio_p1=r1, ratio_p2=r2, hardy_norm=hn)
    report.add_row("fit", slope=curve.slope, intercept=curve.intercept, r_squared=curve.r_squared)
    steps = np.diff(curve.ratios)
    report.check("p1_strictly_increasing", curve.strictly_increasing, float(steps.min()))
    report.check("p1_log_fit", curve.r_squared >= min_r_squared, curve.r_squared - min_r_squared)
    report.check_at_most("p2_ratio_near_one", float(np.max(np.abs(control.ratios - 1))), 0.1)
    return report


def default_witness(grid: GridSpec, eps: float | None = None) -> SpinorField:
    """A compactly supported field with Sobolev/Dirac-Sobolev ratio above one at ``p = 1``.

    The inverse Dirac image of ``(0, delta_eps, 0, 0)``, multiplied by a smooth
    radial window that is one up to ``L/4`` and zero beyond ``0.45 L``.
    """
    eps = eps if eps is not None else 4 * grid.h
    L = grid.box_length
    f = dirac_inverse_spectral(_witness_source(grid, eps))
    dx, dy, dz = grid.centered_coordinates()
    window = CutoffSpec(0.25 * L, 0.45 * L).profile(np.sqrt(dx**2 + dy**2 + dz**2))
    return SpinorField(grid, f.values * window[None])


def _l1_parts(f: SpinorField):
    l1 = lp_norm(f, 1)
    grads = [lp_norm(derivative(f, j), 1) for j in range(3)]
    dirac = lp_norm(dirac_apply(f), 1)
    return l1, grads, dirac


def scaling_transfer(f: SpinorField, R_list, tol: float = 1e-6) -> ExperimentReport:
    """Check how ``L^1`` norms transform under ``g(x) = R^3 f(R x)``.

    Each ``g`` lives on the box of side ``L/R``. Expected: ``||g||_1 = ||f||_1``,
    ``||d_j g||_1 = R ||d_j f||_1`` and ``||(alpha.p) g||_1 = R ||(alpha.p) f||_1``.
    The ``p = 1`` norm ratio then tends to ``||grad f||_1 / ||(alpha.p) f||_1``.
    """
    R_list = [float(r) for r in R_list]
    if not R_list or any(r < 1 for r in R_list):
        raise ValueError("R values must be >= 1")
    l1, grads, dirac = _l1_parts(f)
    limit = sum(grads) / dirac if dirac > 0 else float("inf")
    report = ExperimentReport(
        "scaling_transfer",
        {"R_list": R_list, "n": f.grid.n, "box_length": f.grid.box_length},
    )
    worst = {"l1_invariance": 0.0, "derivative_scaling": 0.0, "dirac_scaling": 0.0}
    gaps = []
    for R in R_list:
        g = rescale_field(f, R)
        gl1, ggrads, gdirac = _l1_parts(g)
        s = gl1 + sum(ggrads)
        d = gl1 + gdirac
        worst["l1_invariance"] = max(worst["l1_invariance"], abs(gl1 - l1) / l1)
        worst["derivative_scaling"] = max(
            worst["derivative_scaling"],
            *(abs(a - R * b) / (R * b) for a, b in zip(ggrads, grads)),
        )
        worst["dirac_scaling"] = max(worst["dirac_scaling"], abs(gdirac - R * dirac) / (R * dirac))
        gaps.append(abs(s / d - limit))
        report.add_row(f"R={R:g}", R=R, l1=gl1, grad_l1=sum(ggrads), dirac_l1=gdirac, ratio=s / d)
    report.add_row("limit", derivative_ratio=limit)
    for name, value in worst.items():
        report.check_at_most(name, value, tol)
    if len(R_list) > 1 and R_list[-1] > R_list[0]:
        report.check("ratio_approaches_limit", gaps[-1] <= gaps[0], gaps[0] - gaps[-1])
    return report


def ds_inequality_probe(p: float, k: float, family: str = "bump", n_samples: int = 4,
                        seed: int = 0, grid: GridSpec | None = None,
                        stability_tol: float = 0.05) -> ExperimentReport:
    """Empirical constant in ``||f||_k <= C ||(alpha.p) f||_p``.

    ``C_hat`` is the family maximum of the quotient, measured on ``grid`` and
    on its refinement with twice as many points; the relative change is the
    stability check. Requires ``1 <= k < p (p + 3) / 3``.
    """
    upper = p * (p + 3) / 3
    if not (1 <= k < upper):
        raise ValueError(f"k={k} outside the admissible range [1, {upper:g}) for p={p}")
    grid = grid or make_grid(32, 20.0)
    fine = make_grid(2 * grid.n, grid.box_length)
    report = ExperimentReport(
        "ds_inequality",
        {"p": p, "k": k, "family": family, "n_samples": n_samples, "n": grid.n,
         "box_length": grid.box_length},
        seed=seed,
    )
    c_hat = {}
    for label, gr in (("coarse", grid), ("fine", fine)):
        quotients = []
        for i, f in enumerate(make_family(family, gr, n_samples, seed)):
            q = lp_norm(f, k) / lp_norm(dirac_apply(f), p)
            quotients.append(q)
            report.add_row(f"{label}_member_{i}", n=gr.n, quotient=q)
        c_hat[label] = max(quotients)
    drift = abs(c_hat["fine"] - c_hat["coarse"]) / c_hat["fine"]
    report.add_row("constants", C_hat_coarse=c_hat["coarse"], C_hat_fine=c_hat["fine"],
                   relative_drift=drift)
    report.check("finite_constant", math.isfinite(c_hat["fine"]), c_hat["fine"])
    report.check_at_most("refinement_stable", drift, stability_tol)
    return report


# -- ratio search -------------------------------------------------------------


def _subspace(grid: GridSpec, rng: np.random.Generator, dim: int, max_mode: int) -> np.ndarray:
    """``dim`` random spinor plane waves with integer modes ``|k_i| <= max_mode``."""
    x = grid.coordinates()
    out = np.empty((dim, 4) + grid.shape, dtype=complex)
    for i in range(dim):
        k = rng.integers(-max_mode, max_mode + 1, size=3)
        phase = sum(2 * np.pi * kj * xj / grid.box_length for kj, xj in zip(k, x))
        out[i] = _random_unit_spinor(rng)[:, None, None, None] * np.exp(1j * phase)[None]
    return out


def ratio_maximize(p: float, init: SpinorField, steps: int = 200, step_size: float = 0.05,
                   seed: int = 0, subspace_dim: int = 4, fd_step: float = 1e-4,
                   stall_window: int = 40) -> RatioCurve:
    """Projected ascent of ``S/D`` on the sphere ``D = 1``.

    Every step draws a random low-frequency spectral subspace, estimates the
    gradient there by central differences and takes a normalized step. Steps
    that do not improve the ratio are rejected and halve the step size; after
    ``stall_window`` consecutive rejections the search stops early.
    """
    if p not in (1, 2, 1.0, 2.0):
        raise ValueError("ratio_maximize supports p in {1, 2}")
    if not np.any(init.values):
        raise ValueError("initial field must be nonzero")
    grid = init.grid
    rng = np.random.default_rng(seed)

    def ratio_of(values):
        return norm_report(SpinorField(grid, values), p).ratio

    def normalize(values):
        return values / norm_report(SpinorField(grid, values), p).dirac_sobolev

    current = normalize(init.values)
    best = ratio_of(current)
    trajectory = [best]
    size = step_size
    stalled = 0
    scale = np.sqrt(grid.volume)
    max_mode = max(1, min(3, grid.n // 4))
    for _ in range(steps):
        basis = _subspace(grid, rng, subspace_dim, max_mode) / scale
        grad = np.array([
            (ratio_of(current + fd_step * b) - ratio_of(current - fd_step * b)) / (2 * fd_step)
            for b in basis
        ])
        gnorm = np.linalg.norm(grad)
        improved = False
        if gnorm > 0:
            direction = np.tensordot(grad / gnorm, basis, axes=(0, 0))
            candidate = normalize(current + size * direction)
            value = ratio_of(candidate)
            if value > best:
                current, best, improved = candidate, value, True
        if improved:
            stalled = 0
            size = min(size * 1.5, step_size * 4)
        else:
            stalled += 1
            size *= 0.5
        trajectory.append(best)
        if stalled >= stall_window:
            break
    return RatioCurve(parameters=np.arange(len(trajectory), dtype=float),
                      ratios=np.array(trajectory), p=float(p),
                      best_field=SpinorField(grid, current))


def ratio_maximize_report(p: float, grid: GridSpec, steps: int, step_size: float,
                          seed: int) -> ExperimentReport:
    init = spinor_from_scalar(gaussian(grid, grid.box_length / 10),
                              _random_unit_spinor(np.random.default_rng([seed, 0])))
    curve = ratio_maximize(p, init, steps=steps, step_size=step_size, seed=seed)
    report = ExperimentReport(
        "ratio_maximize",
        {"p": p, "steps": steps, "step_size": step_size, "n": grid.n,
         "box_length": grid.box_length},
        seed=seed,
    )
    for t, r in zip(curve.parameters, curve.ratios):
        report.add_row(f"step_{int(t)}", step=int(t), ratio=r)
    drops = np.diff(curve.ratios)
    report.check("monotone_trajectory", bool(np.all(drops >= 0)),
                 float(drops.min()) if drops.size else 0.0)
    if p == 2:
        report.check_at_most("p2_pinned", float(np.max(np.abs(curve.ratios - 1))), 1e-6)
    return report
