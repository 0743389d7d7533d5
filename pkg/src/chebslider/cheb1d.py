"""One-dimensional Chebyshev grids and stable barycentric evaluation.

Nodes are the extreme points cos(j*pi/n) mapped onto an arbitrary interval
and stored in ascending order. Interpolants are kept in node-value form and
evaluated with the barycentric formula, whose weights for this node family
reduce to an alternating sign pattern with the two end weights halved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, DomainError, ParameterError, SamplingError

__all__ = [
    "Domain1D",
    "ChebyshevGrid",
    "ChebyshevInterpolant1D",
    "ErrorBoundParams",
    "ClampCounter",
    "chebyshev_points",
    "chebyshev_points_centered",
    "barycentric_eval",
    "barycentric_eval_many",
    "build_interpolant",
    "eval_barycentric",
    "eval_barycentric_many",
    "error_bound",
]


@dataclass(frozen=True)
class Domain1D:
    """Closed interval [lo, hi] with lo < hi, both finite."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise DomainError(f"interval bounds must be finite, got [{self.lo}, {self.hi}]")
        if not self.lo < self.hi:
            raise DomainError(f"interval requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def from_unit(self, u):
        """Affine image in [lo, hi] of a point u in [-1, 1]."""
        return self.mid + 0.5 * self.width * np.asarray(u, dtype=float)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass
class ClampCounter:
    """Counts evaluations whose argument fell outside the fitted domain.

    Out-of-domain points are clamped to the nearest endpoint; callers that
    care pass a counter down and read it back after evaluating.
    """

    count: int = 0

    def record(self, n: int = 1) -> None:
        self.count += n

    def __bool__(self) -> bool:
        return self.count > 0


def _sign_weights(n: int) -> np.ndarray:
    # Barycentric weights for Chebyshev extreme points, up to a common factor
    # that cancels in the formula: alternating signs, halved at both ends.
    w = np.ones(n + 1)
    w[1::2] = -1.0
    w[0] *= 0.5
    w[-1] *= 0.5
    w.flags.writeable = False
    return w


@dataclass(frozen=True)
class ChebyshevGrid:
    """degree + 1 Chebyshev points on a domain, ascending, endpoints included."""

    degree: int
    domain: Domain1D
    nodes: np.ndarray
    weights: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self) -> None:
        if self.weights is None:
            object.__setattr__(self, "weights", _sign_weights(self.degree))

    @property
    def size(self) -> int:
        return self.degree + 1


def _unit_points(n: int) -> np.ndarray:
    # sin form of cos(j*pi/n), ascending in j; exactly antisymmetric and
    # exactly zero at the midpoint for even n.
    j = np.arange(n + 1)
    return np.sin(np.pi * (2 * j - n) / (2 * n))


def chebyshev_points(n: int, domain: Domain1D) -> ChebyshevGrid:
    """Grid of the n+1 Chebyshev points of the interval, ascending.

    n = 0 degenerates to the single midpoint node.
    """
    if n < 0:
        raise ParameterError(f"degree must be non-negative, got {n}")
    if n == 0:
        nodes = np.array([domain.mid])
    else:
        nodes = domain.mid + 0.5 * domain.width * _unit_points(n)
        nodes[0] = domain.lo
        nodes[-1] = domain.hi
    nodes.flags.writeable = False
    return ChebyshevGrid(degree=n, domain=domain, nodes=nodes)


def chebyshev_points_centered(n: int, center: float, halfwidth: float) -> ChebyshevGrid:
    """Grid on [center - halfwidth, center + halfwidth].

    Mapping is applied around `center` directly, so for even n the middle
    node equals `center` bit-exactly. Used by slide construction, where the
    pivot must be reproduced without interpolation error.
    """
    if n < 0:
        raise ParameterError(f"degree must be non-negative, got {n}")
    if not (math.isfinite(center) and math.isfinite(halfwidth)) or halfwidth <= 0.0:
        raise DomainError(f"invalid center/halfwidth: {center}, {halfwidth}")
    if n == 0:
        nodes = np.array([center])
        domain = Domain1D(center - halfwidth, center + halfwidth)
    else:
        nodes = center + halfwidth * _unit_points(n)
        domain = Domain1D(float(nodes[0]), float(nodes[-1]))
    nodes.flags.writeable = False
    return ChebyshevGrid(degree=n, domain=domain, nodes=nodes)


@dataclass(frozen=True)
class ChebyshevInterpolant1D:
    """Function samples on a Chebyshev grid; evaluated by the barycentric formula."""

    grid: ChebyshevGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        if len(self.values) != self.grid.size:
            raise ArgumentError(
                f"got {len(self.values)} values for a grid of {self.grid.size} nodes"
            )

    def _scalar_view(self):
        # Python-float tuples for the scalar hot path; built once per
        # interpolant (idempotent, so the unsynchronized write is benign).
        view = getattr(self, "_view", None)
        if view is None:
            view = (
                tuple(map(float, self.grid.nodes)),
                tuple(map(float, self.grid.weights)),
                tuple(map(float, self.values)),
            )
            object.__setattr__(self, "_view", view)
        return view


def build_interpolant(f, grid: ChebyshevGrid) -> ChebyshevInterpolant1D:
    """Sample f once per node (exactly grid.size calls)."""
    values = np.empty(grid.size)
    for j, x in enumerate(grid.nodes):
        v = f(float(x))
        if not math.isfinite(v):
            raise SamplingError(f"f returned non-finite value {v!r} at node x={x!r}")
        values[j] = v
    values.flags.writeable = False
    return ChebyshevInterpolant1D(grid=grid, values=values)


def barycentric_eval(nodes: np.ndarray, weights: np.ndarray, values: np.ndarray, x: float) -> float:
    """Barycentric formula at a scalar x; an exact node hit returns the stored value.

    If x sits so close to a node that 1/(x - node) overflows, the nearest
    node's value is returned (an overflow guard, not an accuracy window).
    """
    diff = x - nodes
    hit = np.nonzero(diff == 0.0)[0]
    if hit.size:
        return float(values[hit[0]])
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        w = weights / diff
        out = float((w @ values) / w.sum())
    if not math.isfinite(out):
        return float(values[np.argmin(np.abs(diff))])
    return out


def barycentric_eval_many(
    nodes: np.ndarray, weights: np.ndarray, values: np.ndarray, xs: np.ndarray
) -> np.ndarray:
    """Vectorized barycentric evaluation over a 1-D array of points."""
    xs = np.asarray(xs, dtype=float)
    diff = xs[:, None] - nodes[None, :]
    hits = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        w = weights / diff
        out = (w @ values) / w.sum(axis=1)
    hit_rows = hits.any(axis=1)
    if hit_rows.any():
        out[hit_rows] = values[hits[hit_rows].argmax(axis=1)]
    overflow = ~np.isfinite(out)
    if overflow.any():
        out[overflow] = values[np.argmin(np.abs(diff[overflow]), axis=1)]
    return out


def _clamp_coordinate(x: float, domain: Domain1D, clamp_counter: ClampCounter | None) -> float:
    if not math.isfinite(x):
        raise ArgumentError(f"evaluation point must be finite, got {x!r}")
    if x < domain.lo:
        if clamp_counter is not None:
            clamp_counter.record()
        return domain.lo
    if x > domain.hi:
        if clamp_counter is not None:
            clamp_counter.record()
        return domain.hi
    return x


def eval_barycentric(
    p: ChebyshevInterpolant1D, x: float, clamp_counter: ClampCounter | None = None
) -> float:
    """Evaluate the interpolant at x.

    Points outside the domain are clamped to the nearest endpoint; pass a
    ClampCounter to observe how often that happened.
    """
    x = _clamp_coordinate(float(x), p.grid.domain, clamp_counter)
    nodes, weights, values = p._scalar_view()
    num = 0.0
    den = 0.0
    for xi, wi, vi in zip(nodes, weights, values):
        d = x - xi
        if d == 0.0:
            return vi
        q = wi / d
        num += q * vi
        den += q
    out = num / den
    if not math.isfinite(out):
        # 1/(x - node) overflowed: x is within ~1e-300 of a node.
        return barycentric_eval(p.grid.nodes, p.grid.weights, p.values, x)
    return out


def eval_barycentric_many(
    p: ChebyshevInterpolant1D, xs, clamp_counter: ClampCounter | None = None
) -> np.ndarray:
    """Evaluate the interpolant at an array of points, clamping out-of-domain ones."""
    xs = np.asarray(xs, dtype=float)
    if not np.isfinite(xs).all():
        raise ArgumentError("evaluation points must be finite")
    lo, hi = p.grid.domain.lo, p.grid.domain.hi
    clipped = np.clip(xs, lo, hi)
    if clamp_counter is not None:
        clamp_counter.record(int(np.count_nonzero(clipped != xs)))
    return barycentric_eval_many(p.grid.nodes, p.grid.weights, p.values, clipped)


@dataclass(frozen=True)
class ErrorBoundParams:
    """Bernstein-ellipse radius rho and sup bound M of |f| on that ellipse."""

    rho: float
    M: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.rho) and self.rho > 1.0):
            raise ParameterError(f"rho must be > 1, got {self.rho}")
        if not (math.isfinite(self.M) and self.M >= 0.0):
            raise ParameterError(f"M must be >= 0, got {self.M}")


def error_bound(params: ErrorBoundParams, n: int) -> float:
    """Sup-norm bound 4*M*rho**(-n) / (rho - 1) for an analytic function."""
    if n < 0:
        raise ParameterError(f"degree must be non-negative, got {n}")
    return 4.0 * params.M * params.rho ** (-n) / (params.rho - 1.0)
