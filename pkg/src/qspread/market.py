"""Direct-sum market state built from two Gaussian wavepackets.

The seller component ``psi_o`` and buyer component ``psi_b`` live on the
(x, e) plane; each is the real nonnegative amplitude sqrt(w * N(mu, Sigma))
with diagonal covariance, and the squared norms w_o + w_b sum to one.
Overlaps and expectations of affine operator matrices then have closed
Gaussian forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .algebra import OpMatrix

__all__ = [
    "WavepacketParams",
    "MarketState",
    "norms",
    "overlap",
    "expect_operator",
    "rotated_price_expectation",
]


@dataclass(frozen=True)
class WavepacketParams:
    """Gaussian packet on the (x, e) plane: mean (x_mid, eps0), standard
    deviations (spread_x, spread_eps)."""

    x_mid: float
    eps0: float
    spread_x: float
    spread_eps: float

    def __post_init__(self):
        if self.spread_x <= 0 or self.spread_eps <= 0:
            raise ValueError("wavepacket standard deviations must be positive")
        if self.eps0 < 0:
            raise ValueError("mean spread eps0 must be nonnegative")


@dataclass(frozen=True)
class MarketState:
    """Seller/buyer pair (psi_o, psi_b) with weights w_o + w_b = 1.

    Amplitudes are taken real and nonnegative, so all overlaps are real.
    """

    w_o: float
    w_b: float
    packet_o: WavepacketParams
    packet_b: WavepacketParams

    def __post_init__(self):
        if not (0.0 <= self.w_o <= 1.0 and 0.0 <= self.w_b <= 1.0):
            raise ValueError("weights must lie in [0, 1]")
        if abs(self.w_o + self.w_b - 1.0) > 1e-12:
            raise ValueError("weights must sum to one")

    @classmethod
    def from_weight(cls, w_o: float, packet_o: WavepacketParams,
                    packet_b: WavepacketParams | None = None) -> "MarketState":
        return cls(w_o, 1.0 - w_o, packet_o, packet_b or packet_o)

    @classmethod
    def balanced(cls, packet: WavepacketParams) -> "MarketState":
        return cls(0.5, 0.5, packet, packet)


def norms(state: MarketState) -> tuple[float, float]:
    """Squared norms (w_o, w_b) of the two components."""
    return state.w_o, state.w_b


def _overlap_1d(mu1, s1, mu2, s2):
    """Integral of sqrt(N(mu1,s1^2) * N(mu2,s2^2)) over the line, and the
    mean of the (Gaussian-shaped) integrand."""
    ssq = s1 * s1 + s2 * s2
    coeff = math.sqrt(2.0 * s1 * s2 / ssq) * math.exp(-((mu1 - mu2) ** 2) / (4.0 * ssq))
    mean = (mu1 * s2 * s2 + mu2 * s1 * s1) / ssq
    return coeff, mean


def _cross_moments(state: MarketState):
    """(overlap, overlap-weighted means) of psi_o psi_b in x and e."""
    po, pb = state.packet_o, state.packet_b
    bx, mx = _overlap_1d(po.x_mid, po.spread_x, pb.x_mid, pb.spread_x)
    be, me = _overlap_1d(po.eps0, po.spread_eps, pb.eps0, pb.spread_eps)
    amp = math.sqrt(state.w_o * state.w_b) * bx * be
    return amp, amp * mx, amp * me


def overlap(state: MarketState) -> float:
    """Inner product <psi_o|psi_b> in closed Gaussian form."""
    return _cross_moments(state)[0]


def _gram(state: MarketState):
    """The 2x2 Gram-type matrices (<i|j>, <i|x|j>, <i|e|j>)."""
    ov, ovx, ove = _cross_moments(state)
    po, pb = state.packet_o, state.packet_b
    g = ((state.w_o, ov), (ov, state.w_b))
    gx = ((state.w_o * po.x_mid, ovx), (ovx, state.w_b * pb.x_mid))
    ge = ((state.w_o * po.eps0, ove), (ove, state.w_b * pb.eps0))
    return g, gx, ge


def _expect_affine(state: MarketState, affine) -> float:
    """Expectation of a 2x2 matrix whose (i, j) entry is a + b*x + c*e,
    given as complex triples (a, b, c)."""
    g, gx, ge = _gram(state)
    total = 0j
    for i in range(2):
        for j in range(2):
            a, b, c = affine[i][j]
            total += a * g[i][j] + b * gx[i][j] + c * ge[i][j]
    if abs(total.imag) > 1e-10:
        raise ValueError(f"expectation has nonreal value {total!r}")
    return total.real


def expect_operator(state: MarketState, matrix: OpMatrix) -> float:
    """Expectation <psi|A|psi> of a matrix with entries affine in x and e.

    Entries containing derivatives, higher powers, or unbound scalar
    symbols are rejected.
    """
    affine = []
    for i in range(2):
        row = []
        for j in range(2):
            a, b, c = matrix.entry(i, j).affine_xe()
            row.append((a.to_complex(), b.to_complex(), c.to_complex()))
        affine.append(row)
    return _expect_affine(state, affine)


def rotated_price_expectation(state: MarketState, rotation_angle: float) -> float:
    """Expected trade price after rotating the state from buyers to sellers.

    Conjugating the price operator diag(x + e/2, x - e/2) by the rotation
    gives

        [[x + cos(2t)*e/2, -sin(2t)*e/2],
         [-sin(2t)*e/2, x - cos(2t)*e/2]]

    whose expectation for a balanced identical-packet state is
    x_mid - sin(2t)*eps0/2.
    """
    c2 = math.cos(2.0 * rotation_angle)
    s2 = math.sin(2.0 * rotation_angle)
    affine = (
        ((0.0, 1.0, 0.5 * c2), (0.0, 0.0, -0.5 * s2)),
        ((0.0, 0.0, -0.5 * s2), (0.0, 1.0, -0.5 * c2)),
    )
    return _expect_affine(state, affine)
