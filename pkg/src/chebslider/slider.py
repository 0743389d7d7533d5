"""Chebyshev Sliders: additive collections of low-dimensional slides.

A slider partitions the input coordinates into slides, builds one Chebyshev
tensor per slide for the restriction of f through a pivot point z, and
evaluates as

    f(x) ~ v + sum_i (s_i(x restricted to slide i) - v),    v = f(z).

Slide domains are symmetrized around the pivot (covering the requested box),
so with an odd number of points per dimension the pivot coordinate is the
middle mesh node and the slider reproduces v at z exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .cheb1d import ChebyshevGrid, ClampCounter, Domain1D, chebyshev_points_centered
from .chebtensor import (
    ChebyshevMesh,
    ChebyshevTensor,
    HyperRectangle,
    build_tensor,
    eval_tensor,
    eval_tensor_many,
)
from .errors import ArgumentError, ConfigurationError, SamplingError

__all__ = [
    "SliderConfig",
    "Slide",
    "Slider",
    "build_slider",
    "eval_slider",
    "eval_slider_many",
    "slider_call_count",
    "parse_slider_tuple",
    "slider_to_dict",
    "slider_from_dict",
    "save_slider",
    "load_slider",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SliderConfig:
    """Slide dimensions (their sum must equal the input dimension) and mesh sizes.

    points_per_dim is either one count shared by every slide dimension or a
    per-slide list. permutation, when given, reorders the input coordinates
    before they are assigned to slides in blocks.
    """

    slide_dims: tuple[int, ...]
    points_per_dim: int | tuple[int, ...] = 5
    permutation: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "slide_dims", tuple(int(d) for d in self.slide_dims))
        if not self.slide_dims or any(d < 1 for d in self.slide_dims):
            raise ConfigurationError(f"slide dimensions must be positive, got {self.slide_dims}")
        if isinstance(self.points_per_dim, (tuple, list)):
            pts = tuple(int(p) for p in self.points_per_dim)
            if len(pts) != len(self.slide_dims):
                raise ConfigurationError(
                    f"{len(pts)} point counts for {len(self.slide_dims)} slides"
                )
            object.__setattr__(self, "points_per_dim", pts)
        else:
            pts = (int(self.points_per_dim),) * len(self.slide_dims)
        if any(p < 1 for p in pts):
            raise ConfigurationError(f"points per dimension must be >= 1, got {pts}")
        if self.permutation is not None:
            perm = tuple(int(i) for i in self.permutation)
            if sorted(perm) != list(range(self.total_dim)):
                raise ConfigurationError(
                    f"permutation must reorder 0..{self.total_dim - 1}, got {perm}"
                )
            object.__setattr__(self, "permutation", perm)

    @property
    def total_dim(self) -> int:
        return sum(self.slide_dims)

    def points_for_slide(self, i: int) -> int:
        if isinstance(self.points_per_dim, tuple):
            return self.points_per_dim[i]
        return int(self.points_per_dim)

    def as_tuple_string(self) -> str:
        return "{" + ",".join(str(d) for d in self.slide_dims) + "}"


@dataclass(frozen=True)
class Slide:
    """One member of the partition: the coordinates it varies and its tensor."""

    coord_indices: tuple[int, ...]
    tensor: ChebyshevTensor


@dataclass(frozen=True)
class Slider:
    pivot: np.ndarray
    pivot_value: float
    slides: tuple[Slide, ...]
    box: HyperRectangle
    build_call_count: int

    @property
    def ndim(self) -> int:
        return len(self.pivot)


def parse_slider_tuple(text: str, total_dim: int | None = None) -> tuple[int, ...]:
    """Parse a slide-dimension tuple such as "1,1,1", "1x20", "3,1x17" or "3,1x*".

    A trailing "x*" repeats the value until total_dim is reached (total_dim
    required in that case).
    """
    dims: list[int] = []
    tokens = [t.strip() for t in text.strip().strip("{}").split(",") if t.strip()]
    if not tokens:
        raise ConfigurationError(f"empty slider tuple: {text!r}")
    for pos, tok in enumerate(tokens):
        if "x" in tok:
            val_s, count_s = tok.split("x", 1)
            val = int(val_s)
            if count_s == "*":
                if pos != len(tokens) - 1:
                    raise ConfigurationError(f"'x*' is only allowed in the last entry: {text!r}")
                if total_dim is None:
                    raise ConfigurationError("'x*' needs a known total dimension")
                remaining = total_dim - sum(dims)
                if remaining < 0 or remaining % val != 0:
                    raise ConfigurationError(
                        f"tuple {text!r} cannot fill dimension {total_dim}"
                    )
                dims.extend([val] * (remaining // val))
                continue
            dims.extend([val] * int(count_s))
        else:
            dims.append(int(tok))
    if total_dim is not None and sum(dims) != total_dim:
        raise ConfigurationError(
            f"tuple {text!r} sums to {sum(dims)}, expected {total_dim}"
        )
    return tuple(dims)


def _slide_partition(config: SliderConfig, n: int) -> list[tuple[int, ...]]:
    if config.total_dim != n:
        raise ConfigurationError(
            f"slide dimensions sum to {config.total_dim}, input dimension is {n}"
        )
    order = config.permutation if config.permutation is not None else tuple(range(n))
    parts: list[tuple[int, ...]] = []
    at = 0
    for d in config.slide_dims:
        parts.append(tuple(order[at : at + d]))
        at += d
    return parts


def build_slider(f, box: HyperRectangle, pivot, config: SliderConfig) -> Slider:
    """Build all slides of f through the pivot point.

    Costs exactly 1 + sum over slides of the slide's mesh size calls to f.
    """
    n = box.ndim
    pivot = np.asarray(pivot, dtype=float).copy()
    if pivot.shape != (n,):
        raise ArgumentError(f"pivot of shape {pivot.shape} for a {n}-dimensional box")
    if not box.contains(pivot):
        raise ArgumentError("pivot must lie inside the box")
    parts = _slide_partition(config, n)

    v = float(f(pivot.copy()))
    if not math.isfinite(v):
        raise SamplingError(f"f returned non-finite value {v!r} at the pivot")
    calls = 1

    # Symmetric envelope of each requested interval around the pivot: the
    # pivot sits on the middle node whenever the point count is odd.
    grid_for: dict[int, ChebyshevGrid] = {}
    for i, coords in enumerate(parts):
        m = config.points_for_slide(i)
        for j in coords:
            d = box.dims[j]
            half = max(pivot[j] - d.lo, d.hi - pivot[j])
            grid_for[j] = chebyshev_points_centered(m - 1, float(pivot[j]), half)

    slides: list[Slide] = []
    for i, coords in enumerate(parts):
        mesh = ChebyshevMesh(tuple(grid_for[j] for j in coords))
        idx = np.asarray(coords, dtype=int)

        def restriction(y, _idx=idx):
            z = pivot.copy()
            z[_idx] = y
            return f(z)

        tensor = build_tensor(restriction, mesh)
        calls += mesh.size
        slides.append(Slide(coord_indices=coords, tensor=tensor))

    actual_box = HyperRectangle(tuple(grid_for[j].domain for j in range(n)))
    pivot.flags.writeable = False
    return Slider(
        pivot=pivot,
        pivot_value=v,
        slides=tuple(slides),
        box=actual_box,
        build_call_count=calls,
    )


def eval_slider(s: Slider, x, clamp_counter: ClampCounter | None = None) -> float:
    """Evaluate the slider at x: v plus the per-slide deviations from v."""
    x = np.asarray(x, dtype=float)
    if x.shape != (s.ndim,):
        raise ArgumentError(f"point of shape {x.shape} for a {s.ndim}-dimensional slider")
    v = s.pivot_value
    acc = v
    for slide in s.slides:
        acc += eval_tensor(slide.tensor, x[list(slide.coord_indices)], clamp_counter) - v
    return acc


def eval_slider_many(s: Slider, xs, clamp_counter: ClampCounter | None = None) -> np.ndarray:
    """Evaluate the slider at each row of xs."""
    xs = np.asarray(xs, dtype=float)
    if xs.ndim != 2 or xs.shape[1] != s.ndim:
        raise ArgumentError(f"expected points of shape (s, {s.ndim}), got {xs.shape}")
    v = s.pivot_value
    out = np.full(xs.shape[0], v * (1 - len(s.slides)))
    for slide in s.slides:
        out += eval_tensor_many(slide.tensor, xs[:, list(slide.coord_indices)], clamp_counter)
    return out


def slider_call_count(s: Slider) -> int:
    """Pricer calls spent building the slider (pivot plus all slide meshes)."""
    return s.build_call_count


def slider_to_dict(s: Slider) -> dict:
    """JSON-serializable document; values flattened row-major, bit-exact round-trip."""
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "chebyshev_slider",
        "pivot": s.pivot.tolist(),
        "pivot_value": s.pivot_value,
        "build_call_count": s.build_call_count,
        "slides": [
            {
                "coord_indices": list(slide.coord_indices),
                "domains": [[g.domain.lo, g.domain.hi] for g in slide.tensor.mesh.grids],
                "nodes": [g.nodes.tolist() for g in slide.tensor.mesh.grids],
                "values": np.asarray(slide.tensor.values).reshape(-1).tolist(),
            }
            for slide in s.slides
        ],
    }


def _grid_from_nodes(nodes: list[float], domain: list[float]) -> ChebyshevGrid:
    arr = np.asarray(nodes, dtype=float)
    arr.flags.writeable = False
    return ChebyshevGrid(
        degree=arr.size - 1,
        domain=Domain1D(float(domain[0]), float(domain[1])),
        nodes=arr,
    )


def slider_from_dict(doc: dict) -> Slider:
    if doc.get("kind") != "chebyshev_slider":
        raise ArgumentError(f"not a slider document: kind={doc.get('kind')!r}")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ArgumentError(f"unsupported schema_version {doc.get('schema_version')!r}")
    pivot = np.asarray(doc["pivot"], dtype=float)
    slides = []
    for sd in doc["slides"]:
        grids = tuple(
            _grid_from_nodes(nd, dom) for nd, dom in zip(sd["nodes"], sd["domains"])
        )
        mesh = ChebyshevMesh(grids)
        values = np.asarray(sd["values"], dtype=float).reshape(mesh.shape)
        values.flags.writeable = False
        slides.append(
            Slide(coord_indices=tuple(int(i) for i in sd["coord_indices"]),
                  tensor=ChebyshevTensor(mesh=mesh, values=values))
        )
    n = pivot.size
    dims: list[Domain1D | None] = [None] * n
    for slide in slides:
        for j, g in zip(slide.coord_indices, slide.tensor.mesh.grids):
            dims[j] = g.domain
    if any(d is None for d in dims):
        raise ArgumentError("slider document does not cover every coordinate")
    pivot.flags.writeable = False
    return Slider(
        pivot=pivot,
        pivot_value=float(doc["pivot_value"]),
        slides=tuple(slides),
        box=HyperRectangle(tuple(dims)),
        build_call_count=int(doc["build_call_count"]),
    )


def save_slider(s: Slider, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(slider_to_dict(s), fh)


def load_slider(path) -> Slider:
    with open(path, encoding="utf-8") as fh:
        return slider_from_dict(json.load(fh))
