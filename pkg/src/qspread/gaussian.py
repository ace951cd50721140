"""State-dependent variance of the extended Gaussian model.

The mid-price variance over horizon t is

    (vx^2 + ve^2/4) t + cos(2theta) vx ve (w_o - w_b) t
        + sin(2theta) (2 <psi_o|psi_b>) vx ve t

which is linear in t, grows when the rotation leans bearish (theta > 0)
and shrinks when it leans bullish, producing a natural volatility skew.
The formula can go negative for extreme parameter mixes; callers are
expected to report that as a model-domain violation rather than clamp.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import models
from .algebra import evolution_differential, qsd_power
from .market import MarketState, overlap

__all__ = [
    "GaussianModelParams",
    "variance",
    "variance_via_ito",
    "skew_profile",
    "classical_pde_coefficients",
]

import math


@dataclass(frozen=True)
class GaussianModelParams:
    """Volatilities (price/sqrt(time)), rotation angle, and horizon."""

    vol_x: float
    vol_eps: float
    rotation_angle: float
    t: float

    def __post_init__(self):
        if self.vol_x < 0 or self.vol_eps < 0:
            raise ValueError("volatilities must be nonnegative")
        if self.t < 0:
            raise ValueError("horizon must be nonnegative")


def variance(params: GaussianModelParams, state: MarketState) -> float:
    """Closed-form mid-price variance; may be negative outside the model's
    domain (callers flag, never clamp)."""
    vx, ve = params.vol_x, params.vol_eps
    c2 = math.cos(2.0 * params.rotation_angle)
    s2 = math.sin(2.0 * params.rotation_angle)
    ov2 = 2.0 * overlap(state)
    base = vx * vx + 0.25 * ve * ve
    return (base + c2 * vx * ve * (state.w_o - state.w_b) + s2 * ov2 * vx * ve) * params.t


_EXT_DIFFERENTIAL = evolution_differential(models.extended_model())
_EXT_DT_MATRIX = qsd_power(_EXT_DIFFERENTIAL, 2).c_dt


def variance_via_ito(params: GaussianModelParams, state: MarketState) -> float:
    """Variance obtained by contracting the dt matrix of the squared
    symbolic differential against the state (dual route to `variance`)."""
    subs = models.extended_subs(params.vol_x, params.vol_eps, params.rotation_angle)
    numeric = _EXT_DT_MATRIX.substitute(subs)
    ov = overlap(state)
    gram = ((state.w_o, ov), (ov, state.w_b))
    total = 0j
    for i in range(2):
        for j in range(2):
            total += numeric.entry(i, j).constant_value().to_complex() * gram[i][j]
    if abs(total.imag) > 1e-10:
        raise ValueError("variance contraction has nonreal value")
    return total.real * params.t


def skew_profile(params: GaussianModelParams, state: MarketState,
                 angles: Iterable[float]) -> list[tuple[float, float]]:
    """Variance per rotation angle; strictly increasing on (-pi/4, pi/4)
    for balanced identical-packet states."""
    rows = []
    for theta in angles:
        p = GaussianModelParams(params.vol_x, params.vol_eps, theta, params.t)
        rows.append((theta, variance(p, state)))
    return rows


def classical_pde_coefficients(vol: float) -> tuple[float, float]:
    """(drift, diffusion) = (-vol^2/2, vol^2/2) of the single-factor
    backward equation dV/dt - vol^2/2 dV/dx + vol^2/2 d2V/dx2 = 0."""
    if vol < 0:
        raise ValueError("volatility must be nonnegative")
    half_var = 0.5 * vol * vol
    return -half_var, half_var
