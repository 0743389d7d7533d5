"""Multi-dimensional Chebyshev meshes over hyper-rectangles.

Evaluation collapses one dimension at a time, last dimension first: each
collapse runs the 1-D barycentric formula once per remaining fiber, so a
(m1, ..., md) tensor costs m1*...*m_{d-1} + ... + m1 + 1 one-dimensional
evaluations per point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cheb1d import (
    ChebyshevGrid,
    ClampCounter,
    Domain1D,
    _clamp_coordinate,
    barycentric_eval,
    barycentric_eval_many,
    chebyshev_points,
)
from .errors import ArgumentError, ConfigurationError, DomainError, ParameterError, SamplingError

__all__ = [
    "HyperRectangle",
    "ChebyshevMesh",
    "ChebyshevTensor",
    "build_mesh",
    "build_tensor",
    "eval_tensor",
    "eval_tensor_many",
    "eval_call_count",
]


@dataclass(frozen=True)
class HyperRectangle:
    """Cartesian product of 1-D closed intervals."""

    dims: tuple[Domain1D, ...]

    def __post_init__(self) -> None:
        if len(self.dims) == 0:
            raise DomainError("hyper-rectangle needs at least one dimension")
        object.__setattr__(self, "dims", tuple(self.dims))

    @property
    def ndim(self) -> int:
        return len(self.dims)

    def contains(self, x) -> bool:
        return all(d.contains(float(v)) for d, v in zip(self.dims, x))


@dataclass(frozen=True)
class ChebyshevMesh:
    """One Chebyshev grid per dimension; the mesh is their Cartesian product."""

    grids: tuple[ChebyshevGrid, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "grids", tuple(self.grids))
        if not self.grids:
            raise DomainError("mesh needs at least one grid")

    @property
    def ndim(self) -> int:
        return len(self.grids)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(g.size for g in self.grids)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    @property
    def box(self) -> HyperRectangle:
        return HyperRectangle(tuple(g.domain for g in self.grids))


@dataclass(frozen=True)
class ChebyshevTensor:
    """Function samples on a Chebyshev mesh, stored row-major by multi-index."""

    mesh: ChebyshevMesh
    values: np.ndarray

    def __post_init__(self) -> None:
        if tuple(self.values.shape) != self.mesh.shape:
            raise ArgumentError(
                f"values shape {self.values.shape} does not match mesh shape {self.mesh.shape}"
            )


def build_mesh(box: HyperRectangle, points_per_dim) -> ChebyshevMesh:
    """Mesh with the requested number of points in each dimension."""
    counts = [int(m) for m in points_per_dim]
    if len(counts) != box.ndim:
        raise ConfigurationError(
            f"{len(counts)} point counts for a {box.ndim}-dimensional box"
        )
    if any(m < 1 for m in counts):
        raise ParameterError(f"points per dimension must be >= 1, got {counts}")
    grids = tuple(chebyshev_points(m - 1, d) for m, d in zip(counts, box.dims))
    return ChebyshevMesh(grids=grids)


def build_tensor(f, mesh: ChebyshevMesh) -> ChebyshevTensor:
    """Sample f on every mesh node (exactly mesh.size calls), row-major order."""
    values = np.empty(mesh.shape)
    node_axes = [g.nodes for g in mesh.grids]
    point = np.empty(mesh.ndim)
    for idx in np.ndindex(*mesh.shape):
        for d, j in enumerate(idx):
            point[d] = node_axes[d][j]
        v = f(point.copy())
        if not math.isfinite(v):
            raise SamplingError(f"f returned non-finite value {v!r} at mesh index {idx}")
        values[idx] = v
    values.flags.writeable = False
    return ChebyshevTensor(mesh=mesh, values=values)


def eval_tensor(t: ChebyshevTensor, x, clamp_counter: ClampCounter | None = None) -> float:
    """Evaluate the tensor interpolant at a point by recursive 1-D reduction."""
    grids = t.mesh.grids
    d = len(grids)
    x = np.asarray(x, dtype=float)
    if x.shape != (d,):
        raise ArgumentError(f"point of dimension {x.shape} for a {d}-dimensional tensor")
    coords = [_clamp_coordinate(float(x[i]), grids[i].domain, clamp_counter) for i in range(d)]
    work = t.values
    for axis in range(d - 1, 0, -1):
        g = grids[axis]
        flat = work.reshape(-1, g.size)
        out = np.empty(flat.shape[0])
        for r in range(flat.shape[0]):
            out[r] = barycentric_eval(g.nodes, g.weights, flat[r], coords[axis])
        work = out.reshape(work.shape[:-1])
    g = grids[0]
    return barycentric_eval(g.nodes, g.weights, work.reshape(-1), coords[0])


def eval_tensor_many(
    t: ChebyshevTensor, xs, clamp_counter: ClampCounter | None = None
) -> np.ndarray:
    """Evaluate the tensor at each row of xs.

    One-dimensional tensors take a vectorized path; higher dimensions loop
    over rows through eval_tensor.
    """
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != t.mesh.ndim:
        raise ArgumentError(
            f"expected points of shape (s, {t.mesh.ndim}), got {xs.shape}"
        )
    if not np.isfinite(xs).all():
        raise ArgumentError("evaluation points must be finite")
    if t.mesh.ndim == 1:
        g = t.mesh.grids[0]
        col = xs[:, 0]
        clipped = np.clip(col, g.domain.lo, g.domain.hi)
        if clamp_counter is not None:
            clamp_counter.record(int(np.count_nonzero(clipped != col)))
        return barycentric_eval_many(g.nodes, g.weights, t.values, clipped)
    return np.array([eval_tensor(t, row, clamp_counter) for row in xs])


def eval_call_count(dims) -> int:
    """Number of 1-D barycentric evaluations one eval_tensor call performs."""
    dims = [int(m) for m in dims]
    if not dims:
        raise ArgumentError("dims must be non-empty")
    if any(m < 1 for m in dims):
        raise ParameterError(f"points per dimension must be >= 1, got {dims}")
    count = 1
    prefix = 1
    for m in dims[:-1]:
        prefix *= m
        count += prefix
    return count
