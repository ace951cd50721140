"""Evolution-operator presets for the three market models.

Scalar symbol conventions: ``s`` is the single-factor volatility, ``sx``
and ``se`` the mid-price and spread volatilities, ``c2``/``s2`` the cosine
and sine of the doubled rotation angle (their squares reduce through
sin^2 = 1 - cos^2).
"""

from __future__ import annotations

import math
from fractions import Fraction

from .algebra import CI, EvolutionSpec, Generator, NCPoly, OpMatrix

_HALF = Fraction(1, 2)

X = NCPoly.generator(Generator.POS_X)
E = NCPoly.generator(Generator.POS_EPS)
DX = NCPoly.generator(Generator.DER_X)
DE = NCPoly.generator(Generator.DER_EPS)


def classical_model(vol: str = "s") -> EvolutionSpec:
    """Single-factor mid-price diffusion embedded on the diagonal.

    H = i vol^2/2 Dx, L = -i vol Dx, S = I, X = x.
    """
    s = NCPoly.scalar(vol)
    h = CI * _HALF * s * s * DX
    l = -CI * s * DX
    return EvolutionSpec(
        H=OpMatrix.diag(h, h),
        L=OpMatrix.diag(l, l),
        S=OpMatrix.identity(),
        X=OpMatrix.diag(X, X),
    )


def extended_model(vol_x: str = "sx", vol_eps: str = "se") -> EvolutionSpec:
    """Two-coordinate diffusion with the rotation folded into X.

    H = 0, L = diag(-i sx Dx - i se De), S = I and

        X = [[x + c2*e/2,  s2*e/2],
             [ s2*e/2, x - c2*e/2]].

    The +s2 off-diagonal (rather than -s2) is what makes the dt matrix of
    the squared differential come out as

        [[sx^2 + se^2/4 + c2 sx se,  s2 sx se],
         [ s2 sx se, sx^2 + se^2/4 - c2 sx se]],

    the form the state-dependent variance and the bear-market skew rest on.
    """
    sx = NCPoly.scalar(vol_x)
    se = NCPoly.scalar(vol_eps)
    c2 = NCPoly.scalar("c2")
    s2 = NCPoly.scalar("s2")
    l = -CI * sx * DX - CI * se * DE
    half_e = _HALF * E
    return EvolutionSpec(
        H=OpMatrix.zero(),
        L=OpMatrix.diag(l, l),
        S=OpMatrix.identity(),
        X=OpMatrix((
            (X + c2 * half_e, s2 * half_e),
            (s2 * half_e, X - c2 * half_e),
        )),
    )


def spread_model(vol: str = "s") -> EvolutionSpec:
    """Mid-price diffusion with spread crossings via a quarter-turn S.

    H = 0, L = diag(-i s Dx), S = R(pi/2), X = diag(x + e/2, x - e/2).
    """
    s = NCPoly.scalar(vol)
    l = -CI * s * DX
    return EvolutionSpec(
        H=OpMatrix.zero(),
        L=OpMatrix.diag(l, l),
        S=OpMatrix(((0, -1), (1, 0))),
        X=OpMatrix.diag(X + _HALF * E, X - _HALF * E),
    )


def rotation_matrix(cos_name: str = "ct", sin_name: str = "st") -> OpMatrix:
    """Symbolic rotation [[c, -s], [s, c]]; with the default names the
    product R*R reduces exactly to the identity."""
    c = NCPoly.scalar(cos_name)
    s = NCPoly.scalar(sin_name)
    return OpMatrix(((c, -s), (s, c)))


def extended_subs(vol_x: float, vol_eps: float, rotation_angle: float) -> dict:
    """Numeric substitution map for the extended model symbols."""
    return {
        "sx": vol_x,
        "se": vol_eps,
        "c2": math.cos(2.0 * rotation_angle),
        "s2": math.sin(2.0 * rotation_angle),
    }

PRESETS = {
    "classical": classical_model,
    "extended": extended_model,
    "spread": spread_model,
}
