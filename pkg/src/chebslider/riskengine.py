"""Scenario P&L distributions, Expected Shortfall and validation statistics.

Implements the benchmark protocol: price the portfolio on every
historic shock (brute force), build an Orthogonal Chebyshev Slider from the
10-day shocks, evaluate it on each liquidity horizon, and compare the two
P&L distributions through ES relative error, call savings, correlation and a
two-sample Kolmogorov-Smirnov test.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cheb1d import ClampCounter
from .errors import ArgumentError, ParameterError, UnknownFactorError
from .orthopca import (
    OrthogonalSlider,
    PcaBlockSpec,
    build_orthogonal_slider,
    eval_orthogonal_slider_many,
    reconstruct_through,
)
from .pricers import ShockedPortfolioPricer
from .slider import SliderConfig

__all__ = [
    "ScenarioSet",
    "PnlDistribution",
    "EsReport",
    "RatioBacktestSeries",
    "SyntheticBlock",
    "SyntheticSpec",
    "RunResult",
    "PerTradeSliders",
    "generate_synthetic_history",
    "apply_liquidity_horizon",
    "pnl_distribution",
    "expected_shortfall",
    "es_tail_size",
    "correlation",
    "ks_two_sample",
    "kolmogorov_sf",
    "savings",
    "rolling_ratio_backtest",
    "run_es_analysis",
    "write_scenarios",
    "read_scenarios",
]

RATIO_FORMULA = "mean(rt)/mean(ht); var(rt, ddof=1)/var(ht, ddof=1)"


@dataclass(frozen=True)
class ScenarioSet:
    """Labelled shock vectors over a named risk-factor list."""

    labels: tuple[str, ...]
    shocks: np.ndarray
    factor_names: tuple[str, ...]
    horizon: str = "10d"

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "factor_names", tuple(self.factor_names))
        s = np.asarray(self.shocks, dtype=float)
        if s.ndim != 2 or s.shape[0] < 1:
            raise ArgumentError(f"shocks must be a non-empty matrix, got shape {s.shape}")
        if len(self.labels) != s.shape[0]:
            raise ArgumentError("one label per scenario required")
        if len(self.factor_names) != s.shape[1]:
            raise ArgumentError("one factor name per column required")
        if len(set(self.factor_names)) != len(self.factor_names):
            raise ArgumentError("factor names must be unique")
        if not np.isfinite(s).all():
            raise ArgumentError("shocks must be finite")
        s.flags.writeable = False
        object.__setattr__(self, "shocks", s)

    @property
    def count(self) -> int:
        return self.shocks.shape[0]

    @property
    def n_factors(self) -> int:
        return self.shocks.shape[1]


@dataclass(frozen=True)
class PnlDistribution:
    """Per-scenario P&L (scenario value minus base value); losses negative."""

    values: np.ndarray
    source: str  # "brute" | "pca_repriced" | "slider"

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ArgumentError(f"P&L must be a non-empty vector, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise ArgumentError("P&L values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class EsReport:
    horizon: str
    es_brute: float
    es_slider: float
    relative_error: float
    savings: float
    correlation: float
    ks_statistic: float
    ks_p_value: float
    pca_dims: tuple[int, ...]
    slider_tuple: tuple[int, ...]
    points_per_dim: int
    alpha: float
    scenario_count: int
    es_tail_size: int
    build_calls: int
    incremental_calls: int
    clamped_evaluations: int

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "es_brute": self.es_brute,
            "es_slider": self.es_slider,
            "relative_error": self.relative_error,
            "savings": self.savings,
            "correlation": self.correlation,
            "ks_statistic": self.ks_statistic,
            "ks_p_value": self.ks_p_value,
            "pca_dims": list(self.pca_dims),
            "slider_tuple": list(self.slider_tuple),
            "points_per_dim": self.points_per_dim,
            "alpha": self.alpha,
            "scenario_count": self.scenario_count,
            "es_tail_size": self.es_tail_size,
            "build_calls": self.build_calls,
            "incremental_calls": self.incremental_calls,
            "clamped_evaluations": self.clamped_evaluations,
        }


@dataclass(frozen=True)
class RatioBacktestSeries:
    """Rolling ratio-of-statistics between risk-theoretical and hypothetical P&L."""

    mean_ratio: np.ndarray
    mean_defined: np.ndarray
    variance_ratio: np.ndarray
    variance_defined: np.ndarray
    window: int
    formula: str = RATIO_FORMULA

    def __len__(self) -> int:
        return self.mean_ratio.size


# ---------------------------------------------------------------------------
# Synthetic shock history
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SyntheticBlock:
    """Gaussian shock block in an orthonormal cosine loading basis.

    Give either an equicorrelation `corr` (variance spectrum
    [1+(p-1)*corr, 1-corr, ..., 1-corr]) or an explicit `spectrum` of
    per-component variances. `scale` multiplies the resulting shocks.
    """

    name: str
    factor_names: tuple[str, ...]
    scale: float
    corr: float | None = None
    spectrum: tuple[float, ...] | None = None
    horizons: tuple[str, ...] = ("10d",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "factor_names", tuple(self.factor_names))
        object.__setattr__(self, "horizons", tuple(self.horizons))
        if not self.factor_names:
            raise ParameterError(f"block {self.name!r} has no factors")
        if (self.corr is None) == (self.spectrum is None):
            raise ParameterError(
                f"block {self.name!r}: give exactly one of corr or spectrum"
            )
        if self.spectrum is not None:
            object.__setattr__(self, "spectrum", tuple(float(v) for v in self.spectrum))
            if len(self.spectrum) > len(self.factor_names):
                raise ParameterError(f"block {self.name!r}: spectrum longer than block")

    @property
    def size(self) -> int:
        return len(self.factor_names)

    def variances(self) -> np.ndarray:
        p = self.size
        if self.corr is not None:
            lam = np.full(p, 1.0 - self.corr)
            lam[0] = 1.0 + (p - 1) * self.corr
        else:
            lam = np.zeros(p)
            lam[: len(self.spectrum)] = self.spectrum
        if np.any(lam < 0):
            raise ParameterError(
                f"block {self.name!r}: implied covariance is not positive semi-definite"
            )
        return lam


@dataclass(frozen=True)
class SyntheticSpec:
    blocks: tuple[SyntheticBlock, ...]
    count: int
    block_corr: np.ndarray | None = None  # correlation of the blocks' leading scores

    def __post_init__(self) -> None:
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if self.count < 1:
            raise ParameterError(f"scenario count must be >= 1, got {self.count}")
        if self.block_corr is not None:
            c = np.asarray(self.block_corr, dtype=float)
            b = len(self.blocks)
            if c.shape != (b, b):
                raise ParameterError(f"block_corr must be {b}x{b}, got {c.shape}")
            object.__setattr__(self, "block_corr", c)

    @property
    def factor_names(self) -> tuple[str, ...]:
        return tuple(n for b in self.blocks for n in b.factor_names)

    def shocked_factors(self, horizon: str) -> tuple[str, ...]:
        return tuple(
            n for b in self.blocks if horizon in b.horizons for n in b.factor_names
        )


def _cosine_basis(p: int) -> np.ndarray:
    # Orthonormal DCT rows; the first row is constant, matching the flat
    # leading factor of highly correlated curves.
    basis = np.empty((p, p))
    i = np.arange(p)
    basis[0] = 1.0 / math.sqrt(p)
    for j in range(1, p):
        basis[j] = math.sqrt(2.0 / p) * np.cos(np.pi * j * (2 * i + 1) / (2 * p))
    return basis


def _psd_factor(corr: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(corr)
    if np.any(vals < -1e-10):
        raise ParameterError("block correlation matrix is not positive semi-definite")
    return vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None)))


def generate_synthetic_history(spec: SyntheticSpec, seed: int) -> ScenarioSet:
    """Deterministic Gaussian shock history with block structure."""
    rng = np.random.default_rng(seed)
    s = spec.count
    latents = [rng.standard_normal((s, b.size)) for b in spec.blocks]
    if spec.block_corr is not None and len(spec.blocks) > 1:
        fac = _psd_factor(spec.block_corr)
        lead = np.column_stack([xi[:, 0] for xi in latents]) @ fac.T
        for bi, xi in enumerate(latents):
            xi[:, 0] = lead[:, bi]
    cols = []
    for b, xi in zip(spec.blocks, latents):
        lam = b.variances()
        basis = _cosine_basis(b.size)
        cols.append((xi * np.sqrt(lam)) @ basis * b.scale)
    shocks = np.hstack(cols)
    labels = tuple(f"scn{i:05d}" for i in range(s))
    return ScenarioSet(
        labels=labels, shocks=shocks, factor_names=spec.factor_names, horizon="10d"
    )


def apply_liquidity_horizon(
    scen: ScenarioSet, shocked_factors, base_shock, horizon: str
) -> ScenarioSet:
    """Freeze every factor outside `shocked_factors` at its base-shock value."""
    names = list(scen.factor_names)
    index = {n: i for i, n in enumerate(names)}
    shocked = set()
    for n in shocked_factors:
        if n not in index:
            raise UnknownFactorError(f"unknown risk factor {n!r}")
        shocked.add(index[n])
    base_shock = np.asarray(base_shock, dtype=float)
    if base_shock.shape != (scen.n_factors,):
        raise ArgumentError(
            f"base shock of shape {base_shock.shape}, expected ({scen.n_factors},)"
        )
    shocks = np.array(scen.shocks)
    frozen = [i for i in range(scen.n_factors) if i not in shocked]
    shocks[:, frozen] = base_shock[frozen]
    return ScenarioSet(
        labels=scen.labels, shocks=shocks, factor_names=scen.factor_names, horizon=horizon
    )


# ---------------------------------------------------------------------------
# P&L and statistics
# ---------------------------------------------------------------------------

def _thread_count() -> int:
    try:
        return max(1, int(os.environ.get("CHEBSLIDER_THREADS", "1")))
    except ValueError:
        return 1


def _evaluate_rows(evaluator, shocks: np.ndarray) -> np.ndarray:
    threads = _thread_count()
    if threads > 1 and shocks.shape[0] > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return np.fromiter(
                pool.map(evaluator, shocks), dtype=float, count=shocks.shape[0]
            )
    out = np.empty(shocks.shape[0])
    for i, row in enumerate(shocks):
        try:
            out[i] = evaluator(row)
        except Exception as exc:
            raise type(exc)(f"scenario {i}: {exc}") from exc
    return out


def pnl_distribution(
    evaluator,
    scen: ScenarioSet,
    base_shock,
    source: str,
    base_value: float | None = None,
    batch_evaluator=None,
) -> PnlDistribution:
    """P&L_i = value(shock_i) - value(base_shock).

    Pass base_value when the base valuation is already known, so brute-force
    call accounting stays at exactly one call per scenario.
    """
    base_shock = np.asarray(base_shock, dtype=float)
    if base_shock.shape != (scen.n_factors,):
        raise ArgumentError(
            f"base shock of shape {base_shock.shape}, expected ({scen.n_factors},)"
        )
    if base_value is None:
        base_value = float(evaluator(base_shock))
    if batch_evaluator is not None:
        values = np.asarray(batch_evaluator(scen.shocks), dtype=float)
    else:
        values = _evaluate_rows(evaluator, scen.shocks)
    return PnlDistribution(values=values - base_value, source=source)


def es_tail_size(count: int, alpha: float) -> int:
    """ceil((1 - alpha) * count), robust against floating error, at least 1."""
    if count < 1:
        raise ArgumentError(f"need at least one observation, got {count}")
    if not 0.0 < alpha < 1.0:
        raise ArgumentError(f"alpha must be in (0, 1), got {alpha}")
    q = (1.0 - alpha) * count
    return max(1, int(math.ceil(q - 1e-9)))


def expected_shortfall(pnl, alpha: float = 0.975) -> float:
    """Average loss over the worst ceil((1-alpha)*s) P&L values, sign-flipped.

    Losses are negative P&L; the result is positive when the tail is losing.
    """
    values = pnl.values if isinstance(pnl, PnlDistribution) else np.asarray(pnl, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ArgumentError("P&L distribution must be a non-empty vector")
    t = es_tail_size(values.size, alpha)
    worst = np.sort(values)[:t]
    return float(-worst.mean())


def correlation(a, b) -> float:
    """Pearson correlation of two P&L distributions."""
    x = a.values if isinstance(a, PnlDistribution) else np.asarray(a, dtype=float)
    y = b.values if isinstance(b, PnlDistribution) else np.asarray(b, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or x.size < 2:
        raise ArgumentError("correlation needs two equal-length vectors of size >= 2")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = float(np.sqrt(xc @ xc))
    sy = float(np.sqrt(yc @ yc))
    if sx == 0.0 or sy == 0.0:
        raise ArgumentError("correlation undefined for zero-variance input")
    return float((xc @ yc) / (sx * sy))


def kolmogorov_sf(lam: float) -> float:
    """Survival function of the Kolmogorov distribution, Q(lam) = 2*sum (-1)^(j-1) exp(-2 j^2 lam^2)."""
    if lam <= 0.0:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 101):
        term = math.exp(-2.0 * j * j * lam * lam)
        total += sign * term
        if term < 1e-16:
            break
        sign = -sign
    return min(1.0, max(0.0, 2.0 * total))


def ks_two_sample(a, b) -> tuple[float, float]:
    """Two-sample KS statistic and asymptotic p-value.

    D is the sup distance between the two empirical CDFs; the p-value is the
    Kolmogorov survival function at sqrt(na*nb/(na+nb)) * D.
    """
    x = np.sort(a.values if isinstance(a, PnlDistribution) else np.asarray(a, dtype=float))
    y = np.sort(b.values if isinstance(b, PnlDistribution) else np.asarray(b, dtype=float))
    if x.size == 0 or y.size == 0:
        raise ArgumentError("both samples must be non-empty")
    both = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, both, side="right") / x.size
    cdf_y = np.searchsorted(y, both, side="right") / y.size
    d = float(np.max(np.abs(cdf_x - cdf_y)))
    n_eff = x.size * y.size / (x.size + y.size)
    p = kolmogorov_sf(math.sqrt(n_eff) * d)
    return d, p


def savings(build_calls: int, brute_calls: int) -> float:
    """1 - build_calls / brute_calls, floored at zero."""
    if brute_calls <= 0:
        raise ArgumentError(f"brute_calls must be positive, got {brute_calls}")
    if build_calls < 0:
        raise ArgumentError(f"build_calls must be non-negative, got {build_calls}")
    return max(0.0, 1.0 - build_calls / brute_calls)


def rolling_ratio_backtest(hypothetical, risk_theoretical, window: int) -> RatioBacktestSeries:
    """Rolling mean(rt)/mean(ht) and var(rt)/var(ht) over a sliding window.

    Windows whose hypothetical denominator is zero are flagged undefined and
    carry NaN.
    """
    ht = np.asarray(
        hypothetical.values if isinstance(hypothetical, PnlDistribution) else hypothetical,
        dtype=float,
    )
    rt = np.asarray(
        risk_theoretical.values
        if isinstance(risk_theoretical, PnlDistribution)
        else risk_theoretical,
        dtype=float,
    )
    if ht.shape != rt.shape or ht.ndim != 1:
        raise ArgumentError("series must be equal-length vectors")
    if window < 1:
        raise ArgumentError(f"window must be >= 1, got {window}")
    if window > ht.size:
        raise ArgumentError(f"window {window} longer than series of length {ht.size}")
    m = ht.size - window + 1
    mean_ratio = np.full(m, np.nan)
    mean_defined = np.zeros(m, dtype=bool)
    var_ratio = np.full(m, np.nan)
    var_defined = np.zeros(m, dtype=bool)
    ddof = 1 if window > 1 else 0
    for i in range(m):
        hw = ht[i : i + window]
        rw = rt[i : i + window]
        mh = hw.mean()
        if mh != 0.0:
            mean_ratio[i] = rw.mean() / mh
            mean_defined[i] = True
        vh = hw.var(ddof=ddof)
        if vh != 0.0:
            var_ratio[i] = rw.var(ddof=ddof) / vh
            var_defined[i] = True
    return RatioBacktestSeries(
        mean_ratio=mean_ratio,
        mean_defined=mean_defined,
        variance_ratio=var_ratio,
        variance_defined=var_defined,
        window=window,
    )


# ---------------------------------------------------------------------------
# End-to-end run
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PerTradeSliders:
    """One orthogonal slider per trade; evaluations sum across trades."""

    sliders: tuple[OrthogonalSlider, ...]

    def eval_many(self, shocks, clamp_counter: ClampCounter | None = None) -> np.ndarray:
        total = eval_orthogonal_slider_many(self.sliders[0], shocks, clamp_counter)
        for s in self.sliders[1:]:
            total = total + eval_orthogonal_slider_many(s, shocks, clamp_counter)
        return total


@dataclass
class RunResult:
    slider: OrthogonalSlider | PerTradeSliders
    reports: dict[str, EsReport]
    pnl: dict[str, dict[str, PnlDistribution]]  # horizon -> source -> series
    labels: dict[str, tuple[str, ...]]
    base_value: float
    build_calls: int


def _relative_error(es_brute: float, es_slider: float) -> float:
    if es_brute == 0.0:
        return math.inf if es_slider != 0.0 else 0.0
    return abs(es_slider - es_brute) / abs(es_brute)


def run_es_analysis(
    pricer,
    scenarios: ScenarioSet,
    base_shock,
    block_spec: PcaBlockSpec,
    config: SliderConfig,
    alpha: float = 0.975,
    horizons: dict[str, tuple[str, ...] | None] | None = None,
    diagnostic: bool = False,
    domain_pad: float = 0.01,
    per_trade: bool = False,
) -> RunResult:
    """Full brute-vs-slider comparison on the 10-day history plus reuse horizons.

    `horizons` maps a horizon tag to the factor names shocked at that
    horizon (None means all; the 10-day entry is implied). The slider is
    built once, on the 10-day shocks, and reused everywhere else.

    With per_trade=True one slider is built per trade (single-trade pricers,
    so each build costs 1 + sum of slide mesh sizes trade valuations) and
    evaluations sum across trades; build_calls stays in portfolio-valuation
    equivalents, which is unchanged.
    """
    base_shock = np.asarray(base_shock, dtype=float)
    horizons = dict(horizons or {})
    horizons.setdefault(scenarios.horizon, None)

    base_value = float(pricer(base_shock))
    brute_10d = pnl_distribution(
        pricer, scenarios, base_shock, "brute", base_value=base_value
    )

    calls_before_build = pricer.call_count
    if per_trade:
        if not isinstance(pricer, ShockedPortfolioPricer):
            raise ArgumentError("per_trade runs need a ShockedPortfolioPricer")
        sliders = []
        for trade in pricer.portfolio:
            sub = ShockedPortfolioPricer([trade], pricer.market, factors=pricer.factors)
            sliders.append(
                build_orthogonal_slider(
                    sub, scenarios.shocks, block_spec, config, base_shock,
                    domain_pad=domain_pad,
                )
            )
        oslider: OrthogonalSlider | PerTradeSliders = PerTradeSliders(tuple(sliders))
        build_calls = sliders[0].slider.build_call_count
    else:
        oslider = build_orthogonal_slider(
            pricer, scenarios.shocks, block_spec, config, base_shock,
            domain_pad=domain_pad,
        )
        build_calls = pricer.call_count - calls_before_build

    points = (
        config.points_per_dim
        if isinstance(config.points_per_dim, int)
        else max(config.points_per_dim)
    )
    pca_dims = tuple(b.k for b in block_spec.blocks)

    reports: dict[str, EsReport] = {}
    pnl: dict[str, dict[str, PnlDistribution]] = {}
    labels: dict[str, tuple[str, ...]] = {}

    for horizon, shocked in horizons.items():
        if shocked is None:
            scen_h = scenarios if horizon == scenarios.horizon else ScenarioSet(
                labels=scenarios.labels,
                shocks=scenarios.shocks,
                factor_names=scenarios.factor_names,
                horizon=horizon,
            )
        else:
            scen_h = apply_liquidity_horizon(scenarios, shocked, base_shock, horizon)

        if horizon == scenarios.horizon:
            brute = brute_10d
            horizon_build_calls = build_calls
        else:
            brute = pnl_distribution(
                pricer, scen_h, base_shock, "brute", base_value=base_value
            )
            horizon_build_calls = 0

        clamp = ClampCounter()
        calls_before_eval = pricer.call_count
        if isinstance(oslider, PerTradeSliders):
            slider_values = oslider.eval_many(scen_h.shocks, clamp)
        else:
            slider_values = eval_orthogonal_slider_many(oslider, scen_h.shocks, clamp)
        incremental = pricer.call_count - calls_before_eval  # slider reuse: 0
        slider_pnl = PnlDistribution(values=slider_values - base_value, source="slider")

        series = {"brute": brute, "slider": slider_pnl}
        if diagnostic:
            proj = oslider.sliders[0] if isinstance(oslider, PerTradeSliders) else oslider
            repriced_shocks = reconstruct_through(proj, scen_h.shocks)
            repriced = _evaluate_rows(pricer, repriced_shocks)
            series["pca_repriced"] = PnlDistribution(
                values=repriced - base_value, source="pca_repriced"
            )

        es_b = expected_shortfall(brute, alpha)
        es_s = expected_shortfall(slider_pnl, alpha)
        d, p = ks_two_sample(brute, slider_pnl)
        reports[horizon] = EsReport(
            horizon=horizon,
            es_brute=es_b,
            es_slider=es_s,
            relative_error=_relative_error(es_b, es_s),
            savings=savings(horizon_build_calls, scen_h.count),
            correlation=correlation(brute, slider_pnl),
            ks_statistic=d,
            ks_p_value=p,
            pca_dims=pca_dims,
            slider_tuple=config.slide_dims,
            points_per_dim=int(points),
            alpha=alpha,
            scenario_count=scen_h.count,
            es_tail_size=es_tail_size(scen_h.count, alpha),
            build_calls=horizon_build_calls,
            incremental_calls=incremental,
            clamped_evaluations=clamp.count,
        )
        pnl[horizon] = series
        labels[horizon] = scen_h.labels

    return RunResult(
        slider=oslider,
        reports=reports,
        pnl=pnl,
        labels=labels,
        base_value=base_value,
        build_calls=build_calls,
    )


# ---------------------------------------------------------------------------
# Scenario CSV files
# ---------------------------------------------------------------------------

def write_scenarios(scen: ScenarioSet, path) -> None:
    """CSV with header "label,<factor names...>", one row per scenario."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", *scen.factor_names])
        for label, row in zip(scen.labels, scen.shocks):
            writer.writerow([label, *(repr(float(v)) for v in row)])


def read_scenarios(path, horizon: str = "10d") -> ScenarioSet:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "label":
            raise ArgumentError("scenario CSV must start with a 'label' header column")
        names = tuple(header[1:])
        labels = []
        rows = []
        for line in reader:
            if not line:
                continue
            labels.append(line[0])
            rows.append([float(v) for v in line[1:]])
    return ScenarioSet(
        labels=tuple(labels),
        shocks=np.asarray(rows, dtype=float),
        factor_names=names,
        horizon=horizon,
    )
