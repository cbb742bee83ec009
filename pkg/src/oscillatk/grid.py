"""Grid-sampled functions on cubes: averages, mean oscillation, the sharp
maximal function, BMO seminorms, discrete gradients and conversion to the
step-function model.

A GridFunction samples a piecewise-constant function on the cube
``Q0 = [0, N h]^n`` (n = 1 or 2) with uniform cell width h; each cell
carries mass h^n.  The cube family over which the sharp function takes its
supremum is grid-aligned: all subintervals in 1-d (up to a size cap, above
which only dyadic lengths at all translations are used) and all squares
with dyadic side lengths at all translations in 2-d.  The coarsened
families compute a lower bound for the all-cubes supremum; refinement
stability of the downstream checks guards against that gap.

The per-window oscillation kernels come from the compiled extension when
it is importable, otherwise from the pure-numpy twin.  Set
``OSCILLATK_FORCE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from .steps import StepFunction

if os.environ.get("OSCILLATK_FORCE_PYTHON"):
    from . import _sharp_py as _kern
else:
    try:
        from . import _sharp as _kern  # type: ignore[attr-defined]
    except ImportError:
        from . import _sharp_py as _kern

#: which kernel backend got selected at import ("compiled" or "python")
KERNEL_BACKEND: str = _kern.BACKEND

#: largest N for which the 1-d family keeps every subinterval length
ALL_LENGTHS_CAP = 4096

__all__ = [
    "GridFunction",
    "Cube",
    "CubeFamily",
    "cube_mean",
    "mean_oscillation_p",
    "sharp_function",
    "bmo_seminorm",
    "gradient_magnitude",
    "to_step",
    "KERNEL_BACKEND",
]


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples of a function on the cube [0, N h]^n, row-major for n = 2."""

    dim: int
    n_side: int
    h: float
    values: np.ndarray

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if self.n_side < 1:
            raise ValueError("n_side must be >= 1")
        if not (self.h > 0):
            raise ValueError("h must be > 0")
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64).ravel())
        if v.size != self.n_side ** self.dim:
            raise ValueError("values length must be n_side ** dim")
        if v.size and not np.all(np.isfinite(v)):
            raise ValueError("all values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def cell_mass(self) -> float:
        return self.h ** self.dim

    @property
    def cube_measure(self) -> float:
        """|Q0| = (N h)^n."""
        return (self.n_side * self.h) ** self.dim

    @cached_property
    def grid(self) -> np.ndarray:
        """Values shaped (N,) or (N, N)."""
        if self.dim == 1:
            return self.values
        return self.values.reshape(self.n_side, self.n_side)

    def to_json(self) -> dict:
        return {"dim": self.dim, "n_side": self.n_side, "h": float(self.h),
                "values": [float(v) for v in self.values]}

    @classmethod
    def from_json(cls, obj: dict) -> "GridFunction":
        return cls(int(obj["dim"]), int(obj["n_side"]), float(obj["h"]),
                   np.asarray(obj["values"], dtype=np.float64))


@dataclass(frozen=True)
class Cube:
    """Grid-aligned subcube: ``side`` whole cells starting at cell ``start``."""

    start: tuple[int, ...]
    side: int

    def __post_init__(self):
        if self.side < 1 or any(s < 0 for s in self.start):
            raise ValueError("cube must have side >= 1 and non-negative start")


class CubeFamily:
    """The family of subcubes over which suprema are taken.

    1-d: every grid-aligned subinterval, unless ``n_side`` exceeds the
    cap, in which case lengths are coarsened to dyadic (plus the full
    interval).  2-d: squares with dyadic side lengths at all translations,
    plus the full cube.  Always contains Q0 and all single cells.
    """

    def __init__(self, f: GridFunction, all_lengths_cap: int = ALL_LENGTHS_CAP):
        self.dim = f.dim
        self.n_side = f.n_side
        n = f.n_side
        if f.dim == 1 and n <= all_lengths_cap:
            lengths = list(range(1, n + 1))
        else:
            lengths = []
            L = 1
            while L <= n:
                lengths.append(L)
                L *= 2
            if lengths[-1] != n:
                lengths.append(n)
        self.lengths = np.asarray(lengths, dtype=np.int64)
        self.is_exhaustive = len(lengths) == n

    def __iter__(self) -> Iterator[Cube]:
        n = self.n_side
        for L in self.lengths:
            L = int(L)
            if self.dim == 1:
                for i in range(n - L + 1):
                    yield Cube((i,), L)
            else:
                for i in range(n - L + 1):
                    for j in range(n - L + 1):
                        yield Cube((i, j), L)

    def __len__(self) -> int:
        n = self.n_side
        per = [(n - int(L) + 1) ** self.dim for L in self.lengths]
        return int(sum(per))


def _cube_slice(f: GridFunction, Q: Cube) -> np.ndarray:
    if len(Q.start) != f.dim:
        raise ValueError("cube dimension does not match the grid")
    for s in Q.start:
        if s + Q.side > f.n_side:
            raise ValueError("cube extends outside Q0")
    if f.dim == 1:
        (i,) = Q.start
        return f.grid[i:i + Q.side]
    i, j = Q.start
    return f.grid[i:i + Q.side, j:j + Q.side]


def cube_mean(f: GridFunction, Q: Cube) -> float:
    """Average of f over the cube (cells are equal-measure, so a plain mean)."""
    return float(_cube_slice(f, Q).mean())


def mean_oscillation_p(f: GridFunction, Q: Cube, p: float = 1.0) -> float:
    """``{ (1/|Q|) integral_Q |f - f_Q|^p }^{1/p}`` for p >= 1, exact cell sum."""
    if p < 1:
        raise ValueError("p must be >= 1")
    cells = _cube_slice(f, Q)
    dev = np.abs(cells - cells.mean())
    if p == 1.0:
        return float(dev.mean())
    if p == 2.0:
        return float(np.sqrt((dev * dev).mean()))
    return float((dev ** p).mean() ** (1.0 / p))


def sharp_function(f: GridFunction, p: float = 1.0) -> GridFunction:
    """Sharp maximal function: at each cell, the max of
    :func:`mean_oscillation_p` over family cubes containing the cell."""
    if p < 1:
        raise ValueError("p must be >= 1")
    fam = CubeFamily(f)
    if f.dim == 1:
        sharp, _ = _kern.sharp1d(f.values, float(p), fam.lengths, True)
    else:
        sharp, _ = _kern.sharp2d(f.grid, float(p), fam.lengths, True)
    return GridFunction(f.dim, f.n_side, f.h, np.asarray(sharp).ravel())


def bmo_seminorm(f: GridFunction, p: float = 1.0) -> float:
    """``max_Q mean_oscillation_p(f, Q)`` over the family; equals the sup
    of the sharp function without materializing it."""
    if p < 1:
        raise ValueError("p must be >= 1")
    fam = CubeFamily(f)
    if f.dim == 1:
        _, bmo = _kern.sharp1d(f.values, float(p), fam.lengths, False)
    else:
        _, bmo = _kern.sharp2d(f.grid, float(p), fam.lengths, False)
    return float(bmo)


def gradient_magnitude(f: GridFunction) -> GridFunction:
    """Euclidean norm of forward differences divided by h (backward at the
    far boundary)."""
    g = f.grid
    if f.dim == 1:
        d = np.empty_like(g)
        d[:-1] = np.diff(g)
        d[-1] = d[-2] if f.n_side > 1 else 0.0
        mag = np.abs(d) / f.h
    else:
        dx = np.empty_like(g)
        dx[:-1, :] = np.diff(g, axis=0)
        dx[-1, :] = dx[-2, :] if f.n_side > 1 else 0.0
        dy = np.empty_like(g)
        dy[:, :-1] = np.diff(g, axis=1)
        dy[:, -1] = dy[:, -2] if f.n_side > 1 else 0.0
        mag = np.hypot(dx, dy) / f.h
    return GridFunction(f.dim, f.n_side, f.h, mag.ravel())


def to_step(f: GridFunction) -> StepFunction:
    """One atom per cell with mass h^n, consecutive equal values merged.

    Preserves every integral of |f|^q for the piecewise-constant
    interpretation exactly.
    """
    v = f.values
    if not v.size:
        return StepFunction(np.empty(0), np.empty(0))
    starts = np.empty(v.size, dtype=bool)
    starts[0] = True
    starts[1:] = v[1:] != v[:-1]
    runs = np.diff(np.append(np.flatnonzero(starts), v.size))
    return StepFunction(v[starts], runs * f.cell_mass)
