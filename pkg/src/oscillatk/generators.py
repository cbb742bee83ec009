"""Seeded families of test functions for the inequality lab.

Every family is deterministic given (seed, size): the stream is a
PCG64 generator keyed on the full seed material, so check trials can be
regenerated from the witness record alone.
"""
from __future__ import annotations

import numpy as np

from .grid import GridFunction
from .steps import StepFunction

__all__ = ["generate", "FAMILIES"]

FAMILIES = (
    "random-step",
    "indicator",
    "log-singularity",
    "tent",
    "random-lipschitz",
    "random-bmo-grid",
    "plane-2d",
)


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _midpoints(n: int) -> np.ndarray:
    h = 1.0 / n
    return (np.arange(n) + 0.5) * h


def _random_step(rng: np.random.Generator, size: int) -> StepFunction:
    values = rng.lognormal(0.0, 1.0, size)
    flip = rng.random(size) < 0.3
    values[flip] *= -1.0
    masses = rng.lognormal(0.0, 1.0, size)
    return StepFunction(values, masses)


def _log_singularity(n: int) -> GridFunction:
    x = _midpoints(n)
    return GridFunction(1, n, 1.0 / n, np.log(1.0 / x))


def _tent(n: int) -> GridFunction:
    # slope +-1, peak 0.4 at x = 1/2, support [0.1, 0.9]
    x = _midpoints(n)
    return GridFunction(1, n, 1.0 / n, np.maximum(0.4 - np.abs(x - 0.5), 0.0))


def _random_lipschitz(rng: np.random.Generator, n: int, dim: int) -> GridFunction:
    """Max of a few random cones: exactly 1-Lipschitz, vanishing near the
    boundary of the unit cube."""
    n_cones = int(rng.integers(3, 8))
    x = _midpoints(n)
    if dim == 1:
        vals = np.zeros(n)
        for _ in range(n_cones):
            c = rng.uniform(0.15, 0.85)
            reach = min(c, 1.0 - c)
            a = rng.uniform(0.3, 0.95) * reach
            np.maximum(vals, a - np.abs(x - c), out=vals)
    else:
        xx, yy = np.meshgrid(x, x, indexing="ij")
        vals = np.zeros((n, n))
        for _ in range(n_cones):
            cx, cy = rng.uniform(0.15, 0.85, 2)
            reach = min(cx, 1.0 - cx, cy, 1.0 - cy)
            a = rng.uniform(0.3, 0.95) * reach
            np.maximum(vals, a - np.hypot(xx - cx, yy - cy), out=vals)
    return GridFunction(dim, n, 1.0 / n, np.maximum(vals, 0.0).ravel())


def _random_bmo_grid(rng: np.random.Generator, n: int, dim: int) -> GridFunction:
    """Sums of signed log-distance singularities plus a bounded smooth
    part; the BMO seminorm stays bounded under refinement."""
    n_sing = int(rng.integers(1, 4))
    x = _midpoints(n)
    # centers sit on a coarse lattice and the singularities are truncated
    # at scale 1/64: members are bounded with multi-scale oscillation down
    # to that scale, so every L^p norm is refinement-stable at the grid
    # sizes the checks use (an untruncated log^p needs h ~ e^-p to resolve)
    floor = 1.0 / 64.0
    if dim == 1:
        vals = np.zeros(n)
        for _ in range(n_sing):
            c = rng.integers(0, 65) / 64.0
            w = rng.uniform(0.3, 1.0) * rng.choice((-1.0, 1.0))
            vals += w * np.log(1.0 / np.maximum(np.abs(x - c), floor))
        vals += rng.uniform(-1.0, 1.0) * np.sin(2.0 * np.pi * rng.integers(1, 4) * x)
        vals += rng.uniform(-2.0, 2.0)
    else:
        xx, yy = np.meshgrid(x, x, indexing="ij")
        vals = np.zeros((n, n))
        for _ in range(n_sing):
            cx, cy = rng.integers(0, 65, 2) / 64.0
            w = rng.uniform(0.3, 1.0) * rng.choice((-1.0, 1.0))
            vals += w * np.log(1.0 / np.maximum(np.hypot(xx - cx, yy - cy), floor))
        vals += rng.uniform(-2.0, 2.0)
    return GridFunction(dim, n, 1.0 / n, vals.ravel())


def _plane_2d(rng: np.random.Generator, n: int) -> GridFunction:
    a, b = rng.uniform(-2.0, 2.0, 2)
    x = _midpoints(n)
    xx, yy = np.meshgrid(x, x, indexing="ij")
    return GridFunction(2, n, 1.0 / n, (a * xx + b * yy).ravel())


def generate(family: str, seed, size: int, dim: int = 1):
    """Build a seeded member of a family.

    ``size`` is the atom count for step families and the per-axis cell
    count for grid families; ``dim`` selects 1-d or 2-d for the families
    that support both.  Deterministic: identical arguments give bit-equal
    objects.
    """
    rng = _rng(seed)
    if family == "random-step":
        return _random_step(rng, max(int(size), 1))
    if family == "indicator":
        return StepFunction(np.asarray([1.0]), np.asarray([1.0]))
    if family == "log-singularity":
        return _log_singularity(max(int(size), 2))
    if family == "tent":
        return _tent(max(int(size), 4))
    if family == "random-lipschitz":
        return _random_lipschitz(rng, max(int(size), 4), dim)
    if family == "random-bmo-grid":
        return _random_bmo_grid(rng, max(int(size), 2), dim)
    if family == "plane-2d":
        return _plane_2d(rng, max(int(size), 2))
    raise ValueError(f"unknown family {family!r}")
