"""Normal-ordered operator algebra for the two-component market model.

The market carries two position symbols, the mid-price ``x`` and the
bid-offer width ``e``, together with their formal derivatives ``Dx`` and
``De``.  Everything in this module reduces to the rewrite rules

    Dx*x -> x*Dx + 1        De*e -> e*De + 1

with every other generator pair commuting.  Polynomials are held in
canonical normal order (position symbols left of derivatives, no zero
coefficients), so symbolic identities are decided by plain dict equality.

Coefficients are exact: complex rationals times monomials in named
commuting scalars such as ``s``/``sx``/``se`` (volatilities) or
``c2``/``s2`` (cosine and sine of a doubled rotation angle).  Squares of
registered sine symbols are rewritten through sin^2 = 1 - cos^2 so that
rotated operators land on one canonical form.  Numeric evaluation happens
only through :meth:`NCPoly.substitute`, which embeds floats exactly as
dyadic rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Mapping


class Generator(Enum):
    """The four noncommuting generators."""

    POS_X = "x"
    POS_EPS = "e"
    DER_X = "Dx"
    DER_EPS = "De"

    @property
    def is_derivative(self) -> bool:
        return self in (Generator.DER_X, Generator.DER_EPS)

    @property
    def adjoint_sign(self) -> int:
        """Formal adjoint: positions are self-adjoint, derivatives skew."""
        return -1 if self.is_derivative else 1


# sine symbol -> cosine symbol; sin^2 is rewritten to 1 - cos^2.
PYTHAGOREAN_PAIRS = {"s2": "c2", "st": "ct"}

_IDENTITY_WORD = ((), 0, 0, 0, 0)


class ExactComplex:
    """Complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, Fraction) else Fraction(re)
        self.im = im if isinstance(im, Fraction) else Fraction(im)

    @classmethod
    def coerce(cls, value):
        if isinstance(value, ExactComplex):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, (int, float, Rational)):
            return cls(Fraction(value))
        return None

    def __add__(self, other):
        other = ExactComplex.coerce(other)
        if other is None:
            return NotImplemented
        return ExactComplex(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = ExactComplex.coerce(other)
        if other is None:
            return NotImplemented
        return ExactComplex(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = ExactComplex.coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = ExactComplex.coerce(other)
        if other is None:
            return NotImplemented
        return ExactComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __neg__(self):
        return ExactComplex(-self.re, -self.im)

    def conjugate(self):
        return ExactComplex(self.re, -self.im)

    def __eq__(self, other):
        other = ExactComplex.coerce(other)
        if other is None:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def to_complex(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"ExactComplex({self.re!r}, {self.im!r})"


CZERO = ExactComplex(0)
CONE = ExactComplex(1)
CI = ExactComplex(0, 1)


def _merge_scalars(s1, s2):
    if not s1:
        return s2
    if not s2:
        return s1
    merged = dict(s1)
    for name, power in s2:
        merged[name] = merged.get(name, 0) + power
    return tuple(sorted(merged.items()))


def _reduce_trig(scalars):
    """Expand sin^2 -> 1 - cos^2 for registered pairs.

    Returns a list of (scalars, integer multiplier) pairs summing to the
    input monomial.
    """
    for name, power in scalars:
        cos_name = PYTHAGOREAN_PAIRS.get(name)
        if cos_name is None or power < 2:
            continue
        m, rem = divmod(power, 2)
        rest = dict(scalars)
        if rem:
            rest[name] = rem
        else:
            del rest[name]
        out = []
        for j in range(m + 1):
            entry = dict(rest)
            if j:
                entry[cos_name] = entry.get(cos_name, 0) + 2 * j
            mult = math.comb(m, j) * (-1) ** j
            for reduced, sub_mult in _reduce_trig(tuple(sorted(entry.items()))):
                out.append((reduced, mult * sub_mult))
        return out
    return [(scalars, 1)]


def _reorder_coeffs(n_der, n_pos):
    """Coefficients for D^c x^a = sum_k k! C(c,k) C(a,k) x^(a-k) D^(c-k)."""
    if n_der == 0 or n_pos == 0:
        return ((0, 1),)
    return tuple(
        (k, math.factorial(k) * math.comb(n_der, k) * math.comb(n_pos, k))
        for k in range(min(n_der, n_pos) + 1)
    )


def _add_term(terms, word, coeff):
    for scalars, mult in _reduce_trig(word[0]):
        key = (scalars,) + word[1:]
        acc = terms.get(key)
        acc = coeff * mult if acc is None else acc + coeff * mult
        if acc:
            terms[key] = acc
        else:
            terms.pop(key, None)


class NCPoly:
    """Noncommutative polynomial in x, e, Dx, De over exact scalars.

    Words are stored as (scalars, nx, ne, ndx, nde) where ``scalars`` is a
    sorted tuple of (symbol, power) pairs and the generator part reads
    x^nx e^ne Dx^ndx De^nde.  Instances are treated as immutable.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms) if terms else {}

    # -- constructors --------------------------------------------------

    @classmethod
    def zero(cls) -> "NCPoly":
        return cls()

    @classmethod
    def constant(cls, value) -> "NCPoly":
        coeff = ExactComplex.coerce(value)
        if coeff is None:
            raise TypeError(f"cannot build constant from {value!r}")
        return cls({_IDENTITY_WORD: coeff}) if coeff else cls()

    @classmethod
    def generator(cls, gen: Generator, power: int = 1) -> "NCPoly":
        if power < 0:
            raise ValueError("generator powers must be nonnegative")
        if power == 0:
            return cls.constant(1)
        idx = {Generator.POS_X: 1, Generator.POS_EPS: 2,
               Generator.DER_X: 3, Generator.DER_EPS: 4}[gen]
        word = [(), 0, 0, 0, 0]
        word[idx] = power
        return cls({tuple(word): CONE})

    @classmethod
    def scalar(cls, name: str, power: int = 1) -> "NCPoly":
        if name in {g.value for g in Generator} or name == "i":
            raise ValueError(f"{name!r} is reserved and cannot name a scalar")
        if power < 0:
            raise ValueError("scalar powers must be nonnegative")
        if power == 0:
            return cls.constant(1)
        terms: dict = {}
        _add_term(terms, (((name, power),), 0, 0, 0, 0), CONE)
        return cls(terms)

    @staticmethod
    def _coerce(value):
        if isinstance(value, NCPoly):
            return value
        coeff = ExactComplex.coerce(value)
        if coeff is None:
            return None
        return NCPoly.constant(coeff)

    # -- ring operations -----------------------------------------------

    def __add__(self, other):
        other = NCPoly._coerce(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for word, coeff in other.terms.items():
            acc = out.get(word)
            acc = coeff if acc is None else acc + coeff
            if acc:
                out[word] = acc
            else:
                out.pop(word, None)
        return NCPoly(out)

    __radd__ = __add__

    def __sub__(self, other):
        other = NCPoly._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = NCPoly._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __neg__(self):
        return NCPoly({word: -coeff for word, coeff in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, OpMatrix):
            return NotImplemented
        other = NCPoly._coerce(other)
        if other is None:
            return NotImplemented
        out: dict = {}
        for (s1, x1, e1, dx1, de1), c1 in self.terms.items():
            for (s2, x2, e2, dx2, de2), c2 in other.terms.items():
                base = c1 * c2
                scalars = _merge_scalars(s1, s2)
                for k, ck in _reorder_coeffs(dx1, x2):
                    for l, cl in _reorder_coeffs(de1, e2):
                        word = (scalars, x1 + x2 - k, e1 + e2 - l,
                                dx1 + dx2 - k, de1 + de2 - l)
                        _add_term(out, word, base * (ck * cl))
        return NCPoly(out)

    def __rmul__(self, other):
        # scalars commute with everything we accept on the left
        other = NCPoly._coerce(other)
        if other is None:
            return NotImplemented
        return other * self

    def adjoint(self) -> "NCPoly":
        """Formal adjoint: reverse words, conjugate, Dx -> -Dx, De -> -De."""
        out: dict = {}
        for (scalars, nx, ne, ndx, nde), coeff in self.terms.items():
            cc = coeff.conjugate()
            if (ndx + nde) % 2:
                cc = -cc
            # reversed word Dx^ndx x^nx De^nde e^ne, re-normal-ordered
            for k, ck in _reorder_coeffs(ndx, nx):
                for l, cl in _reorder_coeffs(nde, ne):
                    word = (scalars, nx - k, ne - l, ndx - k, nde - l)
                    _add_term(out, word, cc * (ck * cl))
        return NCPoly(out)

    def substitute(self, values: Mapping[str, object]) -> "NCPoly":
        """Replace scalar symbols by exact numeric values (floats embed
        exactly as dyadic rationals)."""
        out: dict = {}
        for (scalars, nx, ne, ndx, nde), coeff in self.terms.items():
            mult = CONE
            remaining = []
            for name, power in scalars:
                if name in values:
                    mult = mult * ExactComplex(Fraction(values[name]) ** power)
                else:
                    remaining.append((name, power))
            _add_term(out, (tuple(remaining), nx, ne, ndx, nde), coeff * mult)
        return NCPoly(out)

    # -- queries ---------------------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        other = NCPoly._coerce(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    __hash__ = None

    def free_scalars(self) -> frozenset:
        names = set()
        for (scalars, *_rest) in self.terms:
            names.update(name for name, _ in scalars)
        return frozenset(names)

    def has_generators(self) -> bool:
        return any(word[1:] != (0, 0, 0, 0) for word in self.terms)

    def has_derivatives(self) -> bool:
        return any(word[3] or word[4] for word in self.terms)

    def is_numeric_constant(self) -> bool:
        return all(word == _IDENTITY_WORD for word in self.terms)

    def constant_value(self) -> ExactComplex:
        if not self.terms:
            return CZERO
        if not self.is_numeric_constant():
            raise ValueError("polynomial is not a numeric constant")
        return self.terms[_IDENTITY_WORD]

    def affine_xe(self):
        """Decompose an affine polynomial a + b*x + c*e.

        Raises ValueError on derivative terms, higher degrees, or unbound
        scalar symbols.
        """
        a = b = c = CZERO
        for (scalars, nx, ne, ndx, nde), coeff in self.terms.items():
            if ndx or nde:
                raise ValueError("entry contains derivative generators")
            if scalars:
                raise ValueError(
                    f"entry has unbound scalar symbols: {[n for n, _ in scalars]}"
                )
            if (nx, ne) == (0, 0):
                a = a + coeff
            elif (nx, ne) == (1, 0):
                b = b + coeff
            elif (nx, ne) == (0, 1):
                c = c + coeff
            else:
                raise ValueError("entry is not affine in x and e")
        return a, b, c

    def __repr__(self):
        from . import opsyntax

        return f"NCPoly({opsyntax.format_poly(self)!r})"


class OpMatrix:
    """2x2 matrix of noncommutative polynomials."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = tuple(tuple(row) for row in rows)
        if len(rows) != 2 or any(len(row) != 2 for row in rows):
            raise ValueError("operator matrices are 2x2")
        coerced = []
        for row in rows:
            entries = []
            for entry in row:
                poly = NCPoly._coerce(entry)
                if poly is None:
                    raise TypeError(f"cannot coerce matrix entry {entry!r}")
                entries.append(poly)
            coerced.append(tuple(entries))
        self.rows = tuple(coerced)

    @classmethod
    def zero(cls) -> "OpMatrix":
        return cls(((0, 0), (0, 0)))

    @classmethod
    def identity(cls) -> "OpMatrix":
        return cls(((1, 0), (0, 1)))

    @classmethod
    def diag(cls, a, b) -> "OpMatrix":
        return cls(((a, 0), (0, b)))

    def entry(self, i: int, j: int) -> NCPoly:
        return self.rows[i][j]

    def __add__(self, other):
        if not isinstance(other, OpMatrix):
            return NotImplemented
        return OpMatrix(
            tuple(
                tuple(a + b for a, b in zip(ra, rb))
                for ra, rb in zip(self.rows, other.rows)
            )
        )

    def __sub__(self, other):
        if not isinstance(other, OpMatrix):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return OpMatrix(tuple(tuple(-e for e in row) for row in self.rows))

    def __matmul__(self, other):
        if not isinstance(other, OpMatrix):
            return NotImplemented
        a, b = self.rows, other.rows
        return OpMatrix((
            (a[0][0] * b[0][0] + a[0][1] * b[1][0],
             a[0][0] * b[0][1] + a[0][1] * b[1][1]),
            (a[1][0] * b[0][0] + a[1][1] * b[1][0],
             a[1][0] * b[0][1] + a[1][1] * b[1][1]),
        ))

    def __mul__(self, other):
        # scalar multiplication only; matrix products use @
        scalar = NCPoly._coerce(other)
        if scalar is None:
            return NotImplemented
        return OpMatrix(tuple(tuple(scalar * e for e in row) for row in self.rows))

    __rmul__ = __mul__

    def adjoint(self) -> "OpMatrix":
        a = self.rows
        return OpMatrix((
            (a[0][0].adjoint(), a[1][0].adjoint()),
            (a[0][1].adjoint(), a[1][1].adjoint()),
        ))

    def mpow(self, k: int) -> "OpMatrix":
        if k < 0:
            raise ValueError("matrix powers must be nonnegative")
        out = OpMatrix.identity()
        for _ in range(k):
            out = out @ self
        return out

    def substitute(self, values: Mapping[str, object]) -> "OpMatrix":
        return OpMatrix(
            tuple(tuple(e.substitute(values) for e in row) for row in self.rows)
        )

    def has_generators(self) -> bool:
        return any(e.has_generators() for row in self.rows for e in row)

    def free_scalars(self) -> frozenset:
        names = set()
        for row in self.rows:
            for e in row:
                names |= e.free_scalars()
        return frozenset(names)

    def __eq__(self, other):
        if not isinstance(other, OpMatrix):
            return NotImplemented
        return self.rows == other.rows

    __hash__ = None

    def __repr__(self):
        from . import opsyntax

        return f"OpMatrix({opsyntax.format_matrix(self)!r})"


def commutator(a: OpMatrix, b: OpMatrix) -> OpMatrix:
    """AB - BA."""
    return a @ b - b @ a


@dataclass(frozen=True)
class EvolutionSpec:
    """Operators (H, L, S, X) driving the unitary evolution.

    H is the Hamiltonian, L the coupling to the noise, S the scattering
    matrix (restricted to constant entries so unitarity stays decidable),
    and X the price operator.
    """

    H: OpMatrix
    L: OpMatrix
    S: OpMatrix
    X: OpMatrix

    def __post_init__(self):
        if self.H != self.H.adjoint():
            raise ValueError("H must be self-adjoint")
        if self.S.has_generators():
            raise ValueError("S must have constant entries (no generators)")
        if self.S.adjoint() @ self.S != OpMatrix.identity():
            raise ValueError("S must satisfy S*S = I exactly")


@dataclass(frozen=True)
class GeneratorCoeffs:
    """Coefficients (theta_drift, alpha, alpha_dag, lam) of the price flow."""

    theta_drift: OpMatrix
    alpha: OpMatrix
    alpha_dag: OpMatrix
    lam: OpMatrix


_HALF = Fraction(1, 2)


def generator_coeffs(spec: EvolutionSpec) -> GeneratorCoeffs:
    """Derive the process coefficients from (H, L, S, X):

        theta_drift = i[H,X] - (L*LX + XL*L - 2 L*XL)/2
        alpha       = [L*,X] S
        alpha_dag   = S* [X,L]
        lam         = S*XS - X
    """
    H, L, S, X = spec.H, spec.L, spec.S, spec.X
    L_adj = L.adjoint()
    S_adj = S.adjoint()
    theta = CI * commutator(H, X) - _HALF * (
        L_adj @ L @ X + X @ L_adj @ L - 2 * (L_adj @ X @ L)
    )
    alpha = commutator(L_adj, X) @ S
    alpha_dag = S_adj @ commutator(X, L)
    lam = S_adj @ X @ S - X
    return GeneratorCoeffs(theta, alpha, alpha_dag, lam)


@dataclass(frozen=True)
class QSDifferential:
    """Formal sum c_dt*dt + c_dA*dA + c_dAdag*dAdag + c_dLambda*dLambda."""

    c_dt: OpMatrix
    c_dA: OpMatrix
    c_dAdag: OpMatrix
    c_dLambda: OpMatrix

    @classmethod
    def zero(cls) -> "QSDifferential":
        z = OpMatrix.zero()
        return cls(z, z, z, z)

    def __add__(self, other):
        if not isinstance(other, QSDifferential):
            return NotImplemented
        return QSDifferential(
            self.c_dt + other.c_dt,
            self.c_dA + other.c_dA,
            self.c_dAdag + other.c_dAdag,
            self.c_dLambda + other.c_dLambda,
        )

    def __mul__(self, other):
        scalar = NCPoly._coerce(other)
        if scalar is None:
            return NotImplemented
        return QSDifferential(
            scalar * self.c_dt, scalar * self.c_dA,
            scalar * self.c_dAdag, scalar * self.c_dLambda,
        )

    __rmul__ = __mul__


def evolution_differential(spec: EvolutionSpec) -> QSDifferential:
    """The differential of the evolved price operator."""
    c = generator_coeffs(spec)
    return QSDifferential(c.theta_drift, c.alpha, c.alpha_dag, c.lam)


def ito_mul(d1: QSDifferential, d2: QSDifferential) -> QSDifferential:
    """Quantum Ito product of two differentials.

    Nonzero basis products (rows act from the left):
        dA*dAdag = dt   dA*dLambda = dA
        dLambda*dAdag = dAdag   dLambda*dLambda = dLambda
    Everything else vanishes; operator coefficients multiply in order.
    """
    return QSDifferential(
        c_dt=d1.c_dA @ d2.c_dAdag,
        c_dA=d1.c_dA @ d2.c_dLambda,
        c_dAdag=d1.c_dLambda @ d2.c_dAdag,
        c_dLambda=d1.c_dLambda @ d2.c_dLambda,
    )


def qsd_power(d: QSDifferential, k: int) -> QSDifferential:
    """k-fold Ito product of a differential with itself; rejects k < 1."""
    if k < 1:
        raise ValueError("qsd_power requires k >= 1")
    out = d
    for _ in range(k - 1):
        out = ito_mul(out, d)
    return out


def qsd_power_closed_form(coeffs: GeneratorCoeffs, k: int) -> QSDifferential:
    """Closed form of the k-th power for k >= 2:

        dt: alpha lam^(k-2) alpha_dag     dA: alpha lam^(k-1)
        dAdag: lam^(k-1) alpha_dag        dLambda: lam^k
    """
    if k < 1:
        raise ValueError("qsd_power_closed_form requires k >= 1")
    if k == 1:
        return QSDifferential(coeffs.theta_drift, coeffs.alpha,
                              coeffs.alpha_dag, coeffs.lam)
    lam = coeffs.lam
    return QSDifferential(
        c_dt=coeffs.alpha @ lam.mpow(k - 2) @ coeffs.alpha_dag,
        c_dA=coeffs.alpha @ lam.mpow(k - 1),
        c_dAdag=lam.mpow(k - 1) @ coeffs.alpha_dag,
        c_dLambda=lam.mpow(k),
    )
