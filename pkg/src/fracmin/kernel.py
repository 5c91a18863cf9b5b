"""Singular interaction weights between cells and the beyond-box tail.

The weight between distinct cells a, b is ``h**(2n) * (h*|a-b|)**-(n+s)``:
the kernel at the center distance times both cell volumes.  Weights depend
only on the index offset, so they are tabulated once per offset.
"""
from __future__ import annotations

import enum
import math

import numpy as np

from .lattice import LatticeSpec

SPHERE_MEASURE = {1: 2.0, 2: 2.0 * math.pi}


class Ambient(enum.Enum):
    """Occupancy of the datum beyond the computational box."""

    EMPTY = "empty"
    FULL = "full"

    @property
    def level(self) -> float:
        return 1.0 if self is Ambient.FULL else 0.0

    @classmethod
    def parse(cls, text):
        if isinstance(text, cls):
            return text
        return cls(str(text).lower())


def kernel_weight(spec: LatticeSpec, sq_dist):
    """Weight for an integer squared index distance (0 maps to 0)."""
    n = spec.dim
    sq = np.asarray(sq_dist, dtype=float)
    with np.errstate(divide="ignore"):
        w = spec.h ** (2 * n) * (spec.h * np.sqrt(sq)) ** (-(n + spec.s))
    return np.where(sq > 0, w, 0.0)


class WeightTable:
    """Offset-keyed pair weights plus optional beyond-box tails.

    ``boxed=True`` drops every interaction with the region beyond the box;
    the tails are then unavailable.  Otherwise the tail integral of every box
    cell is computed eagerly with shell parameters ``kappa`` and ``refine``.
    """

    def __init__(self, spec: LatticeSpec, boxed: bool = True, kappa: float = 4.0,
                 refine: int = 6, strategy: str = "offset"):
        if strategy not in ("offset", "direct"):
            raise ValueError(f"unknown strategy {strategy!r}")
        if kappa < 2:
            raise ValueError("kappa must be at least 2")
        if refine < 0:
            raise ValueError("refine must be non-negative")
        self.spec = spec
        self.boxed = bool(boxed)
        self.kappa = float(kappa)
        self.refine = int(refine)
        self.strategy = strategy

        spans = np.array(spec.shape) - 1
        axes = [np.arange(-L, L + 1) for L in spans]
        grid = np.meshgrid(*axes, indexing="ij")
        sq = sum(g.astype(np.int64) ** 2 for g in grid)
        self._table = kernel_weight(spec, sq)
        self._table.setflags(write=False)
        self._flat_table = self._table.ravel()
        # cell key such that key[a] - key[b] + _zero indexes the flat table
        strides = np.ones(spec.dim, dtype=np.int64)
        for k in range(spec.dim - 2, -1, -1):
            strides[k] = strides[k + 1] * (2 * spans[k + 1] + 1)
        rel = spec.indices - spec.lower
        self._key = rel @ strides
        self._zero = int(spans @ strides)
        self._tails = None
        if not self.boxed:
            self._tails = ambient_tail_integrals(spec, spec.centers, self.kappa, self.refine)
            self._tails.setflags(write=False)

    @property
    def max_weight(self) -> float:
        return float(self._flat_table.max()) if self._flat_table.size > 1 else 0.0

    @property
    def offset_table(self) -> np.ndarray:
        return self._table

    def weight(self, a, b) -> float:
        spec = self.spec
        ia, ib = spec.flat_index(a), spec.flat_index(b)
        if self.strategy == "direct":
            d = spec.indices[ia] - spec.indices[ib]
            return float(kernel_weight(spec, int(d @ d)))
        return float(self._flat_table[self._key[ia] - self._key[ib] + self._zero])

    def block(self, rows, cols, table=None) -> np.ndarray:
        """Dense weight matrix between flat cell indices ``rows`` and ``cols``."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        if self.strategy == "direct" and table is None:
            idx = self.spec.indices
            d = idx[rows][:, None, :] - idx[cols][None, :, :]
            return kernel_weight(self.spec, np.einsum("ijk,ijk->ij", d, d))
        flat = self._flat_table if table is None else np.asarray(table).ravel()
        return flat[self._key[rows][:, None] - self._key[cols][None, :] + self._zero]

    def quantized_table(self, scale: int) -> np.ndarray:
        return np.rint(self._table * float(scale)).astype(np.int64)

    @property
    def tails(self) -> np.ndarray:
        """Beyond-box kernel integral for every box cell."""
        if self._tails is None:
            raise ValueError("ambient interactions are disabled for a boxed weight table")
        return self._tails

    @property
    def tail_weights(self) -> np.ndarray:
        """Tails multiplied by the cell volume, in the same units as pair weights."""
        return self.spec.h ** self.spec.dim * self.tails

    def ambient_tail(self, a) -> float:
        return float(self.tails[self.spec.flat_index(a)])


def _directions(dim: int, refine: int):
    if dim == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    m = 16 * 2 ** refine
    theta = (np.arange(m) + 0.5) * (2 * math.pi / m)
    return np.stack([np.cos(theta), np.sin(theta)], axis=1), np.full(m, 2 * math.pi / m)


def ambient_tail_integrals(spec: LatticeSpec, points, kappa: float = 4.0, refine: int = 6):
    """Approximate integral of |x-y|^-(n+s) over y beyond the box, per point x.

    The region beyond the box is split into the shell inside the ball of
    radius R = kappa*half_width + |x - box center| around x, integrated by the
    midpoint rule in (angle, log radius) with refinement ``refine``, and the
    exact remainder sigma(n) R^-s / s outside that ball.
    """
    s = spec.s
    points = np.atleast_2d(np.asarray(points, dtype=float))
    bounds = spec.box_bounds
    center = bounds.mean(axis=1)
    half_width = float((bounds[:, 1] - bounds[:, 0]).max() / 2)
    dirs, dw = _directions(spec.dim, refine)
    n_panels = 2 ** refine
    out = np.empty(len(points))
    for start in range(0, len(points), 256):
        x = points[start:start + 256]
        radius = kappa * half_width + np.linalg.norm(x - center, axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            hi = (bounds[:, 1][None, :] - x)[:, None, :] / dirs[None, :, :]
            lo = (bounds[:, 0][None, :] - x)[:, None, :] / dirs[None, :, :]
        along = np.where(dirs[None, :, :] > 0, hi, lo)
        along = np.where(dirs[None, :, :] == 0, np.inf, along)
        exit_dist = along.min(axis=2)
        # midpoint rule for the integral of exp(-s*tau) over [log exit, log R]
        a = np.log(exit_dist)
        dt = (np.log(radius)[:, None] - a) / n_panels
        q = np.exp(-s * dt)
        geom = np.where(np.abs(1 - q) > 1e-15, (1 - q ** n_panels) / (1 - q), n_panels)
        shell = dt * np.exp(-s * (a + 0.5 * dt)) * geom
        out[start:start + 256] = shell @ dw + SPHERE_MEASURE[spec.dim] * radius ** (-s) / s
    return out
