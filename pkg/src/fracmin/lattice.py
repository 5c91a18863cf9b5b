"""Computational grid, cell geometry and region algebra.

Cells are axis-aligned cubes of side ``h``.  The cell with integer index
``i`` has its center at ``(i + offset) * h``; ``offset`` is 0 for the usual
node-centred lattice and 0.5 for a staggered lattice whose centers avoid the
coordinate axes.  Membership of a cell in a geometric region is decided by
its center only.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.spatial.distance import pdist


@dataclass(frozen=True)
class LatticeSpec:
    dim: int
    h: float
    extent: tuple[tuple[int, int], ...]
    s: float
    offset: float = 0.0

    def __post_init__(self):
        extent = tuple((int(lo), int(hi)) for lo, hi in self.extent)
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "offset", float(self.offset))
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if len(extent) != self.dim:
            raise ValueError("extent must have one (lo, hi) range per axis")
        if not self.h > 0 or not np.isfinite(self.h):
            raise ValueError(f"cell spacing must be positive, got {self.h}")
        if not 0 < self.s < 1:
            raise ValueError(f"fractional exponent must lie in (0, 1), got {self.s}")
        for lo, hi in extent:
            if hi < lo:
                raise ValueError(f"empty index range [{lo}..{hi}]")

    @classmethod
    def square(cls, dim: int, h: float, half_width: float, s: float, offset: float = 0.0):
        """Box symmetric about the origin.

        With ``offset=0`` the outermost centers sit at +-half_width; with
        ``offset=0.5`` the outermost cell edges do.
        """
        n = int(round(half_width / h))
        rng = (-n, n) if offset == 0.0 else (-n, n - 1)
        return cls(dim, h, (rng,) * dim, s, offset)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(hi - lo + 1 for lo, hi in self.extent)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))

    @property
    def lower(self) -> np.ndarray:
        return np.array([lo for lo, _ in self.extent])

    @property
    def indices(self) -> np.ndarray:
        return _indices(self.extent)

    @property
    def centers(self) -> np.ndarray:
        return _centers(self.extent, self.offset, self.h)

    @property
    def box_bounds(self) -> np.ndarray:
        """(dim, 2) array of the physical box edges."""
        ext = np.array(self.extent, dtype=float)
        return (ext + self.offset + np.array([-0.5, 0.5])) * self.h

    def flat_index(self, cell: Sequence[int]) -> int:
        cell = tuple(int(c) for c in np.atleast_1d(cell))
        if len(cell) != self.dim:
            raise ValueError(f"cell {cell} has wrong dimension")
        for c, (lo, hi) in zip(cell, self.extent):
            if not lo <= c <= hi:
                raise ValueError(f"cell {cell} lies outside the box")
        return int(np.ravel_multi_index(tuple(c - lo for c, (lo, _) in zip(cell, self.extent)),
                                         self.shape))

    def flat_indices(self, cells: np.ndarray) -> np.ndarray:
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, self.dim)
        rel = cells - self.lower
        shape = np.array(self.shape)
        if np.any(rel < 0) or np.any(rel >= shape):
            raise ValueError("cells outside the box")
        return np.ravel_multi_index(tuple(rel.T), self.shape)

    def with_s(self, s: float) -> "LatticeSpec":
        return LatticeSpec(self.dim, self.h, self.extent, s, self.offset)


@functools.lru_cache(maxsize=32)
def _indices(extent):
    axes = [np.arange(lo, hi + 1) for lo, hi in extent]
    grid = np.meshgrid(*axes, indexing="ij")
    out = np.stack([g.ravel() for g in grid], axis=1).astype(np.int64)
    out.setflags(write=False)
    return out


@functools.lru_cache(maxsize=32)
def _centers(extent, offset, h):
    out = (_indices(extent) + offset) * h
    out.setflags(write=False)
    return out


class Region:
    """A subset of the box cells, stored as a boolean mask in C order."""

    __slots__ = ("spec", "mask")

    def __init__(self, spec: LatticeSpec, mask):
        mask = np.asarray(mask, dtype=bool).ravel()
        if mask.shape != (spec.n_cells,):
            raise ValueError("region mask does not match the box")
        mask = mask.copy()
        mask.setflags(write=False)
        self.spec = spec
        self.mask = mask

    @classmethod
    def from_cells(cls, spec: LatticeSpec, cells: Iterable[Sequence[int]]):
        mask = np.zeros(spec.n_cells, dtype=bool)
        cells = list(cells)
        if cells:
            mask[spec.flat_indices(np.array(cells))] = True
        return cls(spec, mask)

    @classmethod
    def empty(cls, spec: LatticeSpec):
        return cls(spec, np.zeros(spec.n_cells, dtype=bool))

    @property
    def flat(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    @property
    def cells(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self.spec.indices[self.mask]]

    @property
    def centers(self) -> np.ndarray:
        return self.spec.centers[self.mask]

    def __len__(self):
        return int(self.mask.sum())

    def __contains__(self, cell):
        try:
            return bool(self.mask[self.spec.flat_index(cell)])
        except ValueError:
            return False

    def _check(self, other: "Region"):
        if other.spec != self.spec:
            raise ValueError("regions live on different lattices")

    def __or__(self, other):
        self._check(other)
        return Region(self.spec, self.mask | other.mask)

    def __and__(self, other):
        self._check(other)
        return Region(self.spec, self.mask & other.mask)

    def __sub__(self, other):
        self._check(other)
        return Region(self.spec, self.mask & ~other.mask)

    def __invert__(self):
        return Region(self.spec, ~self.mask)

    def __le__(self, other):
        self._check(other)
        return not np.any(self.mask & ~other.mask)

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash((self.spec, self.mask.tobytes()))

    def __repr__(self):
        return f"Region({len(self)} of {self.spec.n_cells} cells)"


def build_box(spec: LatticeSpec) -> Region:
    return Region(spec, np.ones(spec.n_cells, dtype=bool))


def ball_region(spec: LatticeSpec, center, radius: float) -> Region:
    if not radius > 0:
        raise ValueError("radius must be positive")
    center = np.asarray(center, dtype=float).reshape(spec.dim)
    dist = np.linalg.norm(spec.centers - center, axis=1)
    return Region(spec, dist < radius)


def ring_region(spec: LatticeSpec, omega: Region, width: float) -> Region:
    """Box cells outside ``omega`` whose center lies within ``width`` of some omega center."""
    if not width > 0:
        raise ValueError("ring width must be positive")
    if omega.spec != spec:
        raise ValueError("omega lives on a different lattice")
    if len(omega) == 0:
        return Region.empty(spec)
    tree = cKDTree(omega.centers)
    dist, _ = tree.query(spec.centers, k=1)
    return Region(spec, (dist < width) & ~omega.mask)


def diameter(omega: Region, spec: LatticeSpec | None = None) -> float:
    """Largest center-to-center distance plus one cell spacing."""
    spec = spec or omega.spec
    pts = omega.centers
    if len(pts) == 0:
        raise ValueError("diameter of an empty region")
    if len(pts) == 1:
        return spec.h
    if spec.dim == 2 and len(pts) > 3:
        try:
            pts = pts[ConvexHull(pts).vertices]
        except QhullError:  # collinear points; fall through to all pairs
            pass
    return float(pdist(pts).max()) + spec.h


def fits_in_box(spec: LatticeSpec, omega: Region, width: float) -> bool:
    """Whether every point within ``width`` of an omega center lies in the box."""
    pts = omega.centers
    if len(pts) == 0:
        return True
    bounds = spec.box_bounds
    return bool(np.all(pts.min(axis=0) - width >= bounds[:, 0] - 1e-12)
                and np.all(pts.max(axis=0) + width <= bounds[:, 1] + 1e-12))
