"""Command-line experiment runner.

Exit status: 0 all verdicts pass, 1 some verdict failed, 2 unknown experiment
or invalid parameters, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import experiments as ex
from .field import make_grid, random_bandlimited

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


@dataclass
class RunConfig:
    experiment: str
    n: int = 64
    box_length: float = 20.0
    p: float = 1.0
    eps_list: Optional[list[float]] = None
    r_list: Optional[list[float]] = None
    k: Optional[float] = None
    seed: int = 0
    out_path: Optional[str] = None
    format: str = "json"
    family: Optional[str] = None
    samples: int = 8
    steps: int = 100
    step_size: float = 0.05


@dataclass(frozen=True)
class _Entry:
    runner: Callable[[RunConfig], ex.ExperimentReport]
    summary: str
    params: str
    relation: str


def _grid(cfg: RunConfig):
    return make_grid(cfg.n, cfg.box_length)


def default_eps_list(n: int, box_length: float) -> list[float]:
    """Four dyadic widths ending at the smallest ``L / 2^m`` not below ``h``."""
    m = int(np.floor(np.log2(n) + 1e-12))
    smallest = box_length / 2**m
    return [8 * smallest, 4 * smallest, 2 * smallest, smallest]


def _modes(cfg):
    return max(0, min(4, cfg.n // 2 - 1))


def _identities(cfg):
    f = random_bandlimited(_grid(cfg), np.random.default_rng(cfg.seed), max_mode=_modes(cfg))
    rep = ex.verify_identities(f)
    rep.seed = cfg.seed
    return rep


def _reconstruction(cfg):
    g = random_bandlimited(_grid(cfg), np.random.default_rng(cfg.seed), max_mode=_modes(cfg))
    rep = ex.verify_reconstruction(g)
    rep.seed = cfg.seed
    return rep


def _equivalence(cfg):
    return ex.equivalence_probe(cfg.p, cfg.family or "bandlimited", cfg.samples, cfg.seed,
                                _grid(cfg))


def _witness(cfg):
    eps = cfg.eps_list or default_eps_list(cfg.n, cfg.box_length)
    rep = ex.p1_witness_report(eps, _grid(cfg))
    rep.seed = cfg.seed
    return rep


def _scaling(cfg):
    R = cfg.r_list or [1.0, 2.0, 4.0, 8.0]
    rep = ex.scaling_transfer(ex.default_witness(_grid(cfg)), R)
    rep.seed = cfg.seed
    return rep


def _ds_inequality(cfg):
    k = cfg.k if cfg.k is not None else 1.0
    return ex.ds_inequality_probe(cfg.p, k, cfg.family or "bump", min(cfg.samples, 4), cfg.seed,
                                  _grid(cfg))


def _maximize(cfg):
    return ex.ratio_maximize_report(cfg.p, _grid(cfg), cfg.steps, cfg.step_size, cfg.seed)


EXPERIMENTS: dict[str, _Entry] = {
    "verify_identities": _Entry(
        _identities,
        "first- and third-order component identities of g = (alpha.p) f on a random band-limited f",
        "--n --box-length --seed",
        "i g1 = (d1 - i d2) f4 + d3 f3;  Lap d_j f4 = (d_j d1 + i d_j d2)(i g1) - d_j d3 (i g2)",
    ),
    "verify_reconstruction": _Entry(
        _reconstruction,
        "solved system for f = (alpha.p + beta)^-1 g on a random band-limited g",
        "--n --box-length --seed",
        "(1 - Lap) f1 = -i(d1 - i d2) g4 - i d3 g3 + g1;  d_j f4 = i d_j d3 (1 - Lap)^-1 g2",
    ),
    "equivalence_probe": _Entry(
        _equivalence,
        "empirical min/max of the Sobolev to Dirac-Sobolev norm ratio over a random family",
        "--p --family {bandlimited,gaussian,bump} --samples --seed --n --box-length",
        "C1 ||f||_D,1,p <= ||f||_S,1,p <= C2 ||f||_D,1,p",
    ),
    "p1_witness": _Entry(
        _witness,
        "p=1 norm ratio of (alpha.p + beta)^-1 (0, delta_eps, 0, 0) as eps shrinks",
        "--eps-list (decreasing, within [h, L/8], at least four) --n --box-length",
        "||f||_S,1,1 / ||f||_D,1,1 ~ c log(1/eps) + d",
    ),
    "scaling_transfer": _Entry(
        _scaling,
        "L1 norms of g(x) = R^3 f(R x) for a compact p=1 witness f",
        "--r-list (values >= 1) --n --box-length",
        "||g||_1 = ||f||_1,  ||d_j g||_1 = R ||d_j f||_1",
    ),
    "ds_inequality": _Entry(
        _ds_inequality,
        "empirical constant of the Dirac-Sobolev inequality and its stability under refinement",
        "--p --k (1 <= k < p(p+3)/3) --family --samples --seed --n --box-length",
        "||f||_k <= C ||(alpha.p) f||_p",
    ),
    "ratio_maximize": _Entry(
        _maximize,
        "projected ascent of the p-norm ratio from a Gaussian start (p in {1, 2})",
        "--p --steps --step-size --seed --n --box-length",
        "maximize ||f||_S,1,p subject to ||f||_D,1,p = 1",
    ),
}


def list_experiments() -> str:
    lines = []
    for name in sorted(EXPERIMENTS):
        e = EXPERIMENTS[name]
        lines.append(name)
        lines.append(f"    {e.summary}")
        lines.append(f"    params:   {e.params}")
        lines.append(f"    relation: {e.relation}")
    return "\n".join(lines) + "\n"


def _write_atomic(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    entry = EXPERIMENTS.get(cfg.experiment)
    if entry is None:
        print(f"unknown experiment {cfg.experiment!r}; available: {', '.join(sorted(EXPERIMENTS))}",
              file=stderr)
        return EXIT_USAGE
    if cfg.format not in ("json", "csv"):
        print(f"unknown format {cfg.format!r}", file=stderr)
        return EXIT_USAGE
    try:
        report = entry.runner(cfg)
    except ValueError as exc:
        print(f"invalid parameters for {cfg.experiment}: {exc}", file=stderr)
        return EXIT_USAGE
    text = report.to_json() if cfg.format == "json" else report.to_csv()
    try:
        if cfg.out_path:
            _write_atomic(cfg.out_path, text)
        else:
            stdout.write(text)
    except OSError as exc:
        print(f"cannot write report: {exc}", file=stderr)
        return EXIT_IO
    for v in report.verdicts:
        if not v.passed:
            print(f"FAIL {v.check} (margin {v.margin:.3e})", file=stderr)
    return EXIT_OK if report.passed else EXIT_FAILED


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="diracsobolev",
        description="Run a named Sobolev / Dirac-Sobolev experiment and write its report.",
    )
    ap.add_argument("--experiment", help="experiment name (see --list)")
    ap.add_argument("--list", action="store_true", help="list experiments and exit")
    ap.add_argument("--n", type=int, default=64, help="grid points per axis (even, >= 4)")
    ap.add_argument("--box-length", type=float, default=20.0, help="periodic box side L")
    ap.add_argument("--p", type=float, default=1.0, help="norm exponent")
    ap.add_argument("--eps-list", type=_floats, help="comma-separated mollifier widths")
    ap.add_argument("--r-list", type=_floats, help="comma-separated scale factors")
    ap.add_argument("--k", type=float, help="exponent on the left of the Dirac-Sobolev inequality")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="report file (default: stdout)")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--family", choices=ex.FAMILIES, help="test-field family")
    ap.add_argument("--samples", type=int, default=8, help="family size")
    ap.add_argument("--steps", type=int, default=100, help="ascent steps for ratio_maximize")
    ap.add_argument("--step-size", type=float, default=0.05)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.list:
        sys.stdout.write(list_experiments())
        return EXIT_OK
    if not args.experiment:
        print("--experiment is required (see --list)", file=sys.stderr)
        return EXIT_USAGE
    cfg = RunConfig(
        experiment=args.experiment, n=args.n, box_length=args.box_length, p=args.p,
        eps_list=args.eps_list, r_list=args.r_list, k=args.k, seed=args.seed,
        out_path=args.out, format=args.format, family=args.family, samples=args.samples,
        steps=args.steps, step_size=args.step_size,
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
