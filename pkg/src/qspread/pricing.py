"""Martingale pricing of European payoffs and arbitrage verdicts.

Prices are zero-rate expectations of the payoff under the terminal law:
the exact spread lattice law, or a normal law (flat volatility) whose
call/put/digital values have the usual normal-model closed forms.  Custom
payoffs are piecewise linear tables; their normal-model expectation is
summed segment by segment in closed form, so no quadrature tolerance
enters.

An arbitrage verdict evaluates P(f > 0) and P(f >= 0) through the terminal
outcome law.  On a lattice law the probabilities are exact sums; on a
normal law they come from a quantile grid and the verdict is evidence, not
proof.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .spread import LatticeDistribution, SpreadParams, lattice_law, moment

__all__ = [
    "Payoff",
    "NormalLaw",
    "ArbitrageCheck",
    "PriceReport",
    "price_gaussian",
    "price_spread",
    "arbitrage_check",
    "implied_vol_smile",
    "SmileResult",
    "arbitrage_sweep",
]

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


def _norm_pdf(d: float) -> float:
    return math.exp(-0.5 * d * d) / _SQRT2PI


def _norm_cdf(d: float) -> float:
    return 0.5 * math.erfc(-d / _SQRT2)


@dataclass(frozen=True)
class Payoff:
    """European payoff: call/put/digital_call by strike, or a custom
    piecewise-linear table (clamped to its end values outside the range)."""

    kind: str
    strike: float | None = None
    table: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.kind in ("call", "put", "digital_call"):
            if self.strike is None:
                raise ValueError(f"{self.kind} payoff needs a strike")
        elif self.kind == "custom":
            if not self.table or len(self.table) < 2:
                raise ValueError("custom payoff needs a table of >= 2 points")
            xs = [x for x, _ in self.table]
            if any(b <= a for a, b in zip(xs, xs[1:])):
                raise ValueError("custom payoff table must be strictly increasing in x")
            if not all(math.isfinite(x) and math.isfinite(v) for x, v in self.table):
                raise ValueError("custom payoff table must be finite")
        else:
            raise ValueError(f"unknown payoff kind {self.kind!r}")

    @classmethod
    def call(cls, strike: float) -> "Payoff":
        return cls("call", strike=strike)

    @classmethod
    def put(cls, strike: float) -> "Payoff":
        return cls("put", strike=strike)

    @classmethod
    def digital_call(cls, strike: float) -> "Payoff":
        return cls("digital_call", strike=strike)

    @classmethod
    def custom(cls, table: Iterable[tuple[float, float]]) -> "Payoff":
        return cls("custom", table=tuple((float(x), float(v)) for x, v in table))

    @classmethod
    def identity(cls, lo: float, hi: float) -> "Payoff":
        return cls.custom([(lo, lo), (hi, hi)])

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        if self.kind == "call":
            out = np.maximum(arr - self.strike, 0.0)
        elif self.kind == "put":
            out = np.maximum(self.strike - arr, 0.0)
        elif self.kind == "digital_call":
            out = (arr > self.strike).astype(float)
        else:
            xs = np.array([p[0] for p in self.table])
            vs = np.array([p[1] for p in self.table])
            out = np.interp(arr, xs, vs)
        return float(out) if np.isscalar(x) else out


@dataclass(frozen=True)
class NormalLaw:
    """Normal terminal law (mean, std); std = 0 is the point mass."""

    mean: float
    std: float


@dataclass(frozen=True)
class ArbitrageCheck:
    verdict: str  # "arbitrage" | "no_arbitrage_weak_evidence"
    p_positive: float
    p_nonnegative: float
    method: str


@dataclass(frozen=True)
class PriceReport:
    price: float
    model: str  # "gaussian" | "spread"
    moments: dict
    arbitrage: ArbitrageCheck
    diagnostics: dict = field(default_factory=dict)


def _normal_moments(mean: float, std: float) -> dict:
    var = std * std
    return {"mean": mean, "variance": var, "mu3": 0.0, "mu4": 3.0 * var * var}


def _lattice_moments(law: LatticeDistribution) -> dict:
    return {
        "mean": law.mean(),
        "variance": law.variance(),
        "mu3": law.central_moment(3),
        "mu4": law.central_moment(4),
    }


def _normal_expectation(payoff: Payoff, mean: float, std: float) -> float:
    if std == 0.0:
        return payoff(mean)
    if payoff.kind == "call":
        d = (mean - payoff.strike) / std
        return (mean - payoff.strike) * _norm_cdf(d) + std * _norm_pdf(d)
    if payoff.kind == "put":
        d = (payoff.strike - mean) / std
        return (payoff.strike - mean) * _norm_cdf(d) + std * _norm_pdf(d)
    if payoff.kind == "digital_call":
        return _norm_cdf((mean - payoff.strike) / std)
    return _piecewise_linear_normal_expectation(payoff.table, mean, std)


def _piecewise_linear_normal_expectation(table, mean: float, std: float) -> float:
    """Exact expectation of a clamped piecewise-linear function under
    N(mean, std^2), summed segment by segment."""
    xs = [p[0] for p in table]
    vs = [p[1] for p in table]
    zs = [(x - mean) / std for x in xs]
    total = vs[0] * _norm_cdf(zs[0])                 # left clamp
    total += vs[-1] * (1.0 - _norm_cdf(zs[-1]))      # right clamp
    for i in range(len(xs) - 1):
        lo, hi = xs[i], xs[i + 1]
        b = (vs[i + 1] - vs[i]) / (hi - lo)
        a = vs[i] - b * lo
        alpha, beta = zs[i], zs[i + 1]
        dphi = _norm_cdf(beta) - _norm_cdf(alpha)
        total += a * dphi + b * (mean * dphi + std * (_norm_pdf(alpha) - _norm_pdf(beta)))
    return total


def arbitrage_check(f: Callable, law, value_tol: float = 0.0,
                    prob_tol: float = 1e-12, grid_size: int = 20001) -> ArbitrageCheck:
    """Quantum-arbitrage test through the outcome law: flag `arbitrage`
    iff P(f >= 0) = 1 (within prob_tol) and P(f > 0) > 0."""
    if isinstance(law, LatticeDistribution):
        vals = np.asarray(f(law.positions()), dtype=float)
        p_pos = float(law.probs[vals > value_tol].sum())
        p_nonneg = float(law.probs[vals >= -value_tol].sum())
        method = "exact-lattice"
    elif isinstance(law, NormalLaw):
        if law.std == 0.0:
            v = float(f(np.array([law.mean]))[0])
            p_pos = 1.0 if v > value_tol else 0.0
            p_nonneg = 1.0 if v >= -value_tol else 0.0
        else:
            from scipy import special

            u = (np.arange(grid_size) + 0.5) / grid_size
            x = law.mean + law.std * special.ndtri(u)
            vals = np.asarray(f(x), dtype=float)
            p_pos = float(np.mean(vals > value_tol))
            p_nonneg = float(np.mean(vals >= -value_tol))
        method = "quantile-grid-evidence"
    else:
        raise TypeError(f"unsupported law {type(law).__name__}")
    is_arb = p_nonneg >= 1.0 - prob_tol and p_pos > 0.0
    verdict = "arbitrage" if is_arb else "no_arbitrage_weak_evidence"
    return ArbitrageCheck(verdict, p_pos, p_nonneg, method)


def price_gaussian(payoff: Payoff, vol_eff: float, t: float, x0: float,
                   drift_mode: str = "martingale") -> PriceReport:
    """Expectation under normal(x0 + m, vol_eff^2 t); m = 0 in martingale
    mode, m = -vol_eff^2 t / 2 under the classical backward-equation drift."""
    if vol_eff < 0:
        raise ValueError("vol_eff must be nonnegative")
    if drift_mode not in ("martingale", "classical_pde"):
        raise ValueError(f"unknown drift_mode {drift_mode!r}")
    m = 0.0 if drift_mode == "martingale" else -0.5 * vol_eff * vol_eff * t
    mean = x0 + m
    std = vol_eff * math.sqrt(t)
    price = _normal_expectation(payoff, mean, std)
    law = NormalLaw(mean, std)
    check = arbitrage_check(lambda x: payoff(x) - price, law)
    return PriceReport(
        price=price,
        model="gaussian",
        moments=_normal_moments(mean, std),
        arbitrage=check,
        diagnostics={"drift_mode": drift_mode, "mean": mean, "std": std},
    )


def price_spread(payoff: Payoff, params: SpreadParams,
                 tail_mass: float = 1e-14) -> PriceReport:
    """Sum of the payoff over the lattice atoms (the zero spread width
    limit routes to the exact normal law)."""
    if params.eps == 0.0:
        base = price_gaussian(payoff, params.vol, params.t, params.x0, "martingale")
        diag = dict(base.diagnostics)
        diag["eps_zero_normal_limit"] = True
        return replace(base, model="spread", diagnostics=diag)
    law = lattice_law(params, tail_mass=tail_mass)
    xs = law.positions()
    vals = np.asarray(payoff(xs), dtype=float)
    price = float(law.probs @ vals)
    truncated = law.truncated_mass()
    edge = max(abs(vals[0]), abs(vals[-1]))
    dominated = truncated * edge > max(1e-12, 1e-9 * abs(price))
    check = arbitrage_check(lambda x: payoff(x) - price, law)
    return PriceReport(
        price=price,
        model="spread",
        moments=_lattice_moments(law),
        arbitrage=check,
        diagnostics={
            "atoms": int(len(law.ns)),
            "truncated_mass": truncated,
            "truncation_dominated": bool(dominated),
        },
    )


@dataclass(frozen=True)
class SmileResult:
    rows: tuple[tuple[float, float], ...]  # (strike, implied vol)
    no_root: tuple[float, ...]             # strikes priced below intrinsic


def _bachelier_call(vol: float, strike: float, t: float, x0: float) -> float:
    std = vol * math.sqrt(t)
    if std == 0.0:
        return max(x0 - strike, 0.0)
    d = (x0 - strike) / std
    return (x0 - strike) * _norm_cdf(d) + std * _norm_pdf(d)


def implied_vol_smile(params: SpreadParams, strikes: Sequence[float],
                      price_tol: float = 1e-10) -> SmileResult:
    """Flat-model volatility matching the spread call price per strike,
    root-found by bisection to `price_tol` on the price."""
    rows = []
    no_root = []
    if params.eps == 0.0:
        return SmileResult(tuple((k, params.vol) for k in strikes), ())
    law = lattice_law(params)
    xs = law.positions()
    for strike in strikes:
        target = float(law.probs @ np.maximum(xs - strike, 0.0))
        intrinsic = max(params.x0 - strike, 0.0)
        if target < intrinsic - 1e-12:
            no_root.append(strike)
            continue
        lo, hi = 0.0, max(1.0, params.vol)
        for _ in range(120):
            if _bachelier_call(hi, strike, params.t, params.x0) >= target:
                break
            hi *= 2.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            value = _bachelier_call(mid, strike, params.t, params.x0)
            if abs(value - target) <= price_tol and hi - lo <= 1e-10:
                break
            if value < target:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        rows.append((strike, 0.5 * (lo + hi)))
    return SmileResult(tuple(rows), tuple(no_root))


def arbitrage_sweep(payoff: Payoff, params: SpreadParams,
                    w_o_grid: Sequence[float]) -> list[tuple[float, str]]:
    """Evidence sweep for state-universal non-arbitrage: reprice the payoff
    for each seller weight (delta = 1 - 2 w_o) and check payoff - price.

    A finite sweep can only ever provide evidence, never a proof.
    """
    out = []
    for w_o in w_o_grid:
        p = replace(params, delta=1.0 - 2.0 * w_o)
        report = price_spread(payoff, p)
        out.append((w_o, report.arbitrage.verdict))
    return out
