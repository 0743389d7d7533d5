"""Reference pricing oracles: linear-discounting swaps and Black-76 swaptions.

These stand in for Front Office pricers. Curves interpolate log discount
factors linearly in time (flat zero rate before the first tenor, constant
forward past the last); the vol surface interpolates bilinearly with flat
extrapolation. A ShockedPortfolioPricer maps an additive shock vector to the
portfolio value and counts every valuation.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import (
    ArgumentError,
    ConfigurationError,
    MissingCurveError,
    ModelDomainError,
    ParameterError,
)

__all__ = [
    "ZeroCurve",
    "VolSurface",
    "Market",
    "SwapTrade",
    "SwaptionTrade",
    "RiskFactor",
    "InstrumentedPricer",
    "ShockedPortfolioPricer",
    "price_swap",
    "price_swaption_black",
    "price_trade",
    "par_swap_rate",
    "swap_annuity",
    "market_risk_factors",
    "shocked_pricer",
    "load_market",
    "save_market",
    "load_portfolio",
    "save_portfolio",
]

VALID_FREQUENCIES = (0.25, 0.5, 1.0)
VOL_FLOOR = 1e-4


@dataclass(frozen=True)
class ZeroCurve:
    """Continuously compounded zero rates at strictly increasing tenors."""

    tenors: np.ndarray
    zero_rates: np.ndarray

    def __post_init__(self) -> None:
        tenors = np.asarray(self.tenors, dtype=float)
        rates = np.asarray(self.zero_rates, dtype=float)
        if tenors.ndim != 1 or tenors.shape != rates.shape or tenors.size == 0:
            raise ParameterError("tenors and zero_rates must be equal-length 1-D arrays")
        if not (np.all(np.diff(tenors) > 0) and np.all(tenors > 0)):
            raise ParameterError("tenors must be positive and strictly increasing")
        if not np.isfinite(rates).all():
            raise ParameterError("zero rates must be finite")
        knots_t = np.concatenate(([0.0], tenors))
        knots_y = np.concatenate(([0.0], -rates * tenors))
        for a in (tenors, rates, knots_t, knots_y):
            a.flags.writeable = False
        object.__setattr__(self, "tenors", tenors)
        object.__setattr__(self, "zero_rates", rates)
        object.__setattr__(self, "_knots_t", knots_t)
        object.__setattr__(self, "_knots_y", knots_y)

    def log_discount(self, t):
        t = np.asarray(t, dtype=float)
        kt, ky = self._knots_t, self._knots_y
        y = np.interp(t, kt, ky)
        over = t > kt[-1]
        if np.any(over):
            slope = (ky[-1] - ky[-2]) / (kt[-1] - kt[-2])
            y = np.where(over, ky[-1] + slope * (t - kt[-1]), y)
        return y

    def discount(self, t):
        return np.exp(self.log_discount(t))

    def forward(self, t1, t2):
        """Simply compounded forward rate over [t1, t2]."""
        t1 = np.asarray(t1, dtype=float)
        t2 = np.asarray(t2, dtype=float)
        tau = t2 - t1
        return (np.exp(self.log_discount(t1) - self.log_discount(t2)) - 1.0) / tau


@dataclass(frozen=True)
class VolSurface:
    """Lognormal implied vols on an expiry x tenor grid, bilinear lookup."""

    expiries: np.ndarray
    tenors: np.ndarray
    vols: np.ndarray

    def __post_init__(self) -> None:
        e = np.asarray(self.expiries, dtype=float)
        t = np.asarray(self.tenors, dtype=float)
        v = np.asarray(self.vols, dtype=float)
        if e.ndim != 1 or t.ndim != 1 or v.shape != (e.size, t.size):
            raise ParameterError(
                f"vols must have shape (len(expiries), len(tenors)); got {v.shape}"
            )
        if not (np.all(np.diff(e) > 0) and np.all(np.diff(t) > 0)):
            raise ParameterError("surface axes must be strictly increasing")
        if not (np.isfinite(v).all() and np.all(v > 0)):
            raise ParameterError("vols must be finite and positive")
        for a in (e, t, v):
            a.flags.writeable = False
        object.__setattr__(self, "expiries", e)
        object.__setattr__(self, "tenors", t)
        object.__setattr__(self, "vols", v)

    def vol(self, expiry: float, tenor: float) -> float:
        i0, i1, wi = _bracket(self.expiries, expiry)
        j0, j1, wj = _bracket(self.tenors, tenor)
        v = self.vols
        return float(
            (1 - wi) * ((1 - wj) * v[i0, j0] + wj * v[i0, j1])
            + wi * ((1 - wj) * v[i1, j0] + wj * v[i1, j1])
        )


def _bracket(axis: np.ndarray, x: float) -> tuple[int, int, float]:
    # Clamped linear weights along one axis.
    if x <= axis[0]:
        return 0, 0, 0.0
    if x >= axis[-1]:
        return axis.size - 1, axis.size - 1, 0.0
    i1 = int(np.searchsorted(axis, x, side="right"))
    i0 = i1 - 1
    w = (x - axis[i0]) / (axis[i1] - axis[i0])
    return i0, i1, float(w)


@dataclass(frozen=True)
class Market:
    curves: dict[str, ZeroCurve]
    surface: VolSurface | None = None


@dataclass(frozen=True)
class SwapTrade:
    """Fixed-for-floating swap; payer=True pays fixed, receives floating."""

    notional: float
    fixed_rate: float
    maturity: float
    frequency: float
    payer: bool
    discount_curve: str = "discount"
    forecast_curve: str = "forecast"
    start: float = 0.0

    def __post_init__(self) -> None:
        if self.frequency not in VALID_FREQUENCIES:
            raise ConfigurationError(
                f"frequency must be one of {VALID_FREQUENCIES}, got {self.frequency}"
            )
        if not (self.maturity > self.start >= 0.0):
            raise ConfigurationError(
                f"need maturity > start >= 0, got start={self.start}, maturity={self.maturity}"
            )
        nper = (self.maturity - self.start) / self.frequency
        if abs(nper - round(nper)) > 1e-8:
            raise ConfigurationError(
                f"maturity {self.maturity} is not a whole number of {self.frequency}y "
                f"periods from start {self.start}"
            )
        times = self.start + self.frequency * np.arange(1, int(round(nper)) + 1)
        times[-1] = self.maturity
        times.flags.writeable = False
        object.__setattr__(self, "_times", times)

    @property
    def payment_times(self) -> np.ndarray:
        return self._times


@dataclass(frozen=True)
class SwaptionTrade:
    """European option (expiry) on a forward-starting swap."""

    expiry: float
    underlying: SwapTrade
    strike: float
    payer: bool

    def __post_init__(self) -> None:
        if self.expiry <= 0:
            raise ConfigurationError(f"expiry must be positive, got {self.expiry}")
        if self.underlying.start != self.expiry:
            raise ConfigurationError(
                f"underlying swap must start at the option expiry "
                f"({self.underlying.start} != {self.expiry})"
            )
        if self.underlying.maturity <= self.expiry:
            raise ConfigurationError("underlying maturity must exceed the option expiry")
        if self.strike <= 0:
            raise ConfigurationError(f"strike must be positive, got {self.strike}")

    @property
    def tenor(self) -> float:
        return self.underlying.maturity - self.expiry


def _get_curve(curves: dict[str, ZeroCurve], cid: str) -> ZeroCurve:
    try:
        return curves[cid]
    except KeyError:
        raise MissingCurveError(f"curve {cid!r} not in market") from None


def _legs(trade: SwapTrade, curves: dict[str, ZeroCurve]):
    disc = _get_curve(curves, trade.discount_curve)
    fore = _get_curve(curves, trade.forecast_curve)
    times = trade.payment_times
    prev = np.concatenate(([trade.start], times[:-1]))
    tau = times - prev
    fwd = fore.forward(prev, times)
    df = disc.discount(times)
    annuity = float(np.sum(tau * df))
    float_pv = float(np.sum(tau * fwd * df))
    return float_pv, annuity


def price_swap(trade: SwapTrade, curves: dict[str, ZeroCurve]) -> float:
    """PV of the swap: floating leg minus fixed leg, signed by direction."""
    float_pv, annuity = _legs(trade, curves)
    pv = trade.notional * (float_pv - trade.fixed_rate * annuity)
    return pv if trade.payer else -pv


def swap_annuity(trade: SwapTrade, curves: dict[str, ZeroCurve]) -> float:
    return _legs(trade, curves)[1]


def par_swap_rate(trade: SwapTrade, curves: dict[str, ZeroCurve]) -> float:
    """Fixed rate that sets the swap PV to zero."""
    float_pv, annuity = _legs(trade, curves)
    return float_pv / annuity


def _norm_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def price_swaption_black(
    trade: SwaptionTrade, curves: dict[str, ZeroCurve], surface: VolSurface
) -> float:
    """Black-76 on the forward par swap rate, bilinear vol lookup."""
    float_pv, annuity = _legs(trade.underlying, curves)
    forward = float_pv / annuity
    if forward <= 0.0:
        raise ModelDomainError(
            f"forward swap rate {forward} is not positive; lognormal model undefined"
        )
    sigma = surface.vol(trade.expiry, trade.tenor)
    std = sigma * math.sqrt(trade.expiry)
    k = trade.strike
    if std == 0.0:
        intrinsic = max(forward - k, 0.0) if trade.payer else max(k - forward, 0.0)
        return trade.underlying.notional * annuity * intrinsic
    d1 = (math.log(forward / k) + 0.5 * std * std) / std
    d2 = d1 - std
    if trade.payer:
        black = forward * _norm_cdf(d1) - k * _norm_cdf(d2)
    else:
        black = k * _norm_cdf(-d2) - forward * _norm_cdf(-d1)
    return trade.underlying.notional * annuity * black


def price_trade(trade, market: Market) -> float:
    if isinstance(trade, SwaptionTrade):
        if market.surface is None:
            raise ConfigurationError("swaption pricing needs a vol surface")
        return price_swaption_black(trade, market.curves, market.surface)
    if isinstance(trade, SwapTrade):
        return price_swap(trade, market.curves)
    raise ArgumentError(f"unknown trade type {type(trade).__name__}")


@dataclass(frozen=True)
class RiskFactor:
    """One shockable market coordinate."""

    name: str
    kind: str  # "rate" or "vol"
    curve_id: str | None
    index: tuple[int, ...]


def market_risk_factors(market: Market) -> list[RiskFactor]:
    """All curve points, then all vol points, in deterministic order."""
    factors: list[RiskFactor] = []
    for cid in sorted(market.curves):
        curve = market.curves[cid]
        for i, tenor in enumerate(curve.tenors):
            factors.append(RiskFactor(f"rate:{cid}:{tenor:g}", "rate", cid, (i,)))
    if market.surface is not None:
        s = market.surface
        for i, e in enumerate(s.expiries):
            for j, t in enumerate(s.tenors):
                factors.append(RiskFactor(f"vol:{e:g}x{t:g}", "vol", None, (i, j)))
    return factors


class InstrumentedPricer:
    """Wraps any shock->value callable, counting calls (thread-safe)."""

    def __init__(self, fn):
        self.fn = fn
        self.call_count = 0
        self._lock = threading.Lock()

    def __call__(self, x) -> float:
        with self._lock:
            self.call_count += 1
        return self.fn(x)

    def reset(self) -> None:
        with self._lock:
            self.call_count = 0


class ShockedPortfolioPricer:
    """Portfolio value as a function of an additive shock vector.

    Rate shocks add to zero rates, vol shocks add to surface vols (floored at
    VOL_FLOOR; floor events are counted, not raised). Each call increments
    call_count by one and trade_call_count by the number of trades.
    """

    def __init__(self, portfolio, market: Market, factors: list[RiskFactor] | None = None):
        self.portfolio = list(portfolio)
        self.market = market
        self.factors = list(factors) if factors is not None else market_risk_factors(market)
        self.call_count = 0
        self.trade_call_count = 0
        self.floored_vol_count = 0
        self._lock = threading.Lock()
        self._rate_slices: dict[str, list[tuple[int, int]]] = {}
        self._vol_entries: list[tuple[int, tuple[int, int]]] = []
        for pos, f in enumerate(self.factors):
            if f.kind == "rate":
                if f.curve_id not in market.curves:
                    raise MissingCurveError(f"factor {f.name!r} references unknown curve")
                self._rate_slices.setdefault(f.curve_id, []).append((pos, f.index[0]))
            elif f.kind == "vol":
                if market.surface is None:
                    raise ConfigurationError(f"factor {f.name!r} needs a vol surface")
                self._vol_entries.append((pos, f.index))  # type: ignore[arg-type]
            else:
                raise ConfigurationError(f"unknown factor kind {f.kind!r}")

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    @property
    def factor_names(self) -> list[str]:
        return [f.name for f in self.factors]

    def shocked_market(self, shock) -> tuple[Market, int]:
        """The market after applying the shock, plus the number of floored vols."""
        shock = np.asarray(shock, dtype=float)
        if shock.shape != (self.n_factors,):
            raise ArgumentError(
                f"shock of shape {shock.shape}, expected ({self.n_factors},)"
            )
        curves: dict[str, ZeroCurve] = {}
        for cid, base in self.market.curves.items():
            entries = self._rate_slices.get(cid)
            if not entries:
                curves[cid] = base
                continue
            rates = np.array(base.zero_rates)
            for pos, i in entries:
                rates[i] += shock[pos]
            curves[cid] = ZeroCurve(tenors=base.tenors, zero_rates=rates)
        surface = self.market.surface
        floored = 0
        if surface is not None and self._vol_entries:
            vols = np.array(surface.vols)
            for pos, (i, j) in self._vol_entries:
                vols[i, j] += shock[pos]
            floored = int(np.count_nonzero(vols < VOL_FLOOR))
            np.maximum(vols, VOL_FLOOR, out=vols)
            surface = VolSurface(expiries=surface.expiries, tenors=surface.tenors, vols=vols)
        return Market(curves=curves, surface=surface), floored

    def __call__(self, shock) -> float:
        market, floored = self.shocked_market(shock)
        total = 0.0
        for trade in self.portfolio:
            total += price_trade(trade, market)
        with self._lock:
            self.call_count += 1
            self.trade_call_count += len(self.portfolio)
            self.floored_vol_count += floored
        return total

    def reset_counters(self) -> None:
        with self._lock:
            self.call_count = 0
            self.trade_call_count = 0
            self.floored_vol_count = 0


def shocked_pricer(portfolio, market: Market) -> ShockedPortfolioPricer:
    """Shock-vector -> portfolio-value pricer over the market's full factor list."""
    return ShockedPortfolioPricer(portfolio, market)


# ---------------------------------------------------------------------------
# Market / portfolio files (JSON, schema version 1)
# ---------------------------------------------------------------------------

def save_market(market: Market, path) -> None:
    doc = {
        "version": 1,
        "curves": {
            cid: {"tenors": c.tenors.tolist(), "zero_rates": c.zero_rates.tolist()}
            for cid, c in market.curves.items()
        },
        "vol_surface": None
        if market.surface is None
        else {
            "expiries": market.surface.expiries.tolist(),
            "tenors": market.surface.tenors.tolist(),
            "vols": market.surface.vols.tolist(),
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)


def load_market(path) -> Market:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    curves = {
        cid: ZeroCurve(
            tenors=np.asarray(c["tenors"], dtype=float),
            zero_rates=np.asarray(c["zero_rates"], dtype=float),
        )
        for cid, c in doc["curves"].items()
    }
    surf = doc.get("vol_surface")
    surface = None
    if surf is not None:
        surface = VolSurface(
            expiries=np.asarray(surf["expiries"], dtype=float),
            tenors=np.asarray(surf["tenors"], dtype=float),
            vols=np.asarray(surf["vols"], dtype=float),
        )
    return Market(curves=curves, surface=surface)


def _swap_to_dict(t: SwapTrade) -> dict:
    return {
        "type": "swap",
        "notional": t.notional,
        "fixed_rate": t.fixed_rate,
        "maturity": t.maturity,
        "frequency": t.frequency,
        "payer": t.payer,
        "discount_curve": t.discount_curve,
        "forecast_curve": t.forecast_curve,
        "start": t.start,
    }


def _swap_from_dict(d: dict) -> SwapTrade:
    return SwapTrade(
        notional=float(d["notional"]),
        fixed_rate=float(d["fixed_rate"]),
        maturity=float(d["maturity"]),
        frequency=float(d["frequency"]),
        payer=bool(d["payer"]),
        discount_curve=d.get("discount_curve", "discount"),
        forecast_curve=d.get("forecast_curve", "forecast"),
        start=float(d.get("start", 0.0)),
    )


def save_portfolio(portfolio, path) -> None:
    trades = []
    for t in portfolio:
        if isinstance(t, SwaptionTrade):
            trades.append(
                {
                    "type": "swaption",
                    "expiry": t.expiry,
                    "strike": t.strike,
                    "payer": t.payer,
                    "underlying": _swap_to_dict(t.underlying),
                }
            )
        else:
            trades.append(_swap_to_dict(t))
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"version": 1, "trades": trades}, fh, indent=2)


def load_portfolio(path) -> list:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    out = []
    for d in doc["trades"]:
        if d["type"] == "swap":
            out.append(_swap_from_dict(d))
        elif d["type"] == "swaption":
            out.append(
                SwaptionTrade(
                    expiry=float(d["expiry"]),
                    strike=float(d["strike"]),
                    payer=bool(d["payer"]),
                    underlying=_swap_from_dict(d["underlying"]),
                )
            )
        else:
            raise ConfigurationError(f"unknown trade type {d['type']!r}")
    return out
