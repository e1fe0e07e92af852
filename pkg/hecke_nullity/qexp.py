"""Truncated q-expansions and the Hecke operator on them.

This is the independent check on the modular symbols engine: Hecke
operators act here directly on coefficients, and the test forms come
from Eisenstein series, Delta and eta quotients.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import sympy

from hecke_nullity.characters import DirichletCharacter, trivial_character
from hecke_nullity.dimension import gamma0_index
from hecke_nullity.exactalg import format_rational, to_rational
from hecke_nullity.exceptions import (
    InsufficientPrecisionError,
    NonIntegralLeadingPowerError,
    NotPrimeError,
    PreconditionError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QSeries:
    """Cusp form q-expansion a_1 q + ... + a_B q^B.

    weight, level and character are advisory tags.
    """

    coefficients: Tuple[Fraction, ...]
    weight: int = 0
    level: int = 1
    character: str = "trivial"

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(to_rational(a) for a in self.coefficients))

    @property
    def precision(self) -> int:
        return len(self.coefficients)

    def coefficient(self, n: int) -> Fraction:
        if n < 1:
            raise ValueError(f"Cusp forms have no coefficient at q^{n}")
        if n > self.precision:
            raise InsufficientPrecisionError(f"a_{n} requested from a series known to precision {self.precision}")
        return self.coefficients[n - 1]

    def __getitem__(self, n: int) -> Fraction:
        return self.coefficient(n)

    def truncate(self, B: int) -> "QSeries":
        if B > self.precision:
            raise InsufficientPrecisionError(f"Cannot extend precision {self.precision} to {B}")
        return QSeries(self.coefficients[:B], self.weight, self.level, self.character)

    def _common(self, other: "QSeries") -> int:
        return min(self.precision, other.precision)

    def __add__(self, other: "QSeries") -> "QSeries":
        B = self._common(other)
        return QSeries(
            [a + b for a, b in zip(self.coefficients[:B], other.coefficients[:B])],
            self.weight,
            self.level,
            self.character,
        )

    def __sub__(self, other: "QSeries") -> "QSeries":
        return self + other.scale(-1)

    def scale(self, c) -> "QSeries":
        c = to_rational(c)
        return QSeries([c * a for a in self.coefficients], self.weight, self.level, self.character)

    def __mul__(self, other: "QSeries") -> "QSeries":
        """Truncated product; the result starts at q^2."""
        B = self._common(other)
        out = [Fraction(0)] * B
        for i, a in enumerate(self.coefficients[:B], start=1):
            if not a:
                continue
            for j, b in enumerate(other.coefficients[: B - i], start=1):
                if b:
                    out[i + j - 1] += a * b
        return QSeries(out, self.weight + other.weight, max(self.level, other.level), self.character)

    def agrees_with(self, other: "QSeries", B: Optional[int] = None) -> bool:
        """Coefficientwise equality up to B (default: the common precision)."""
        B = self._common(other) if B is None else B
        if B > self._common(other):
            raise InsufficientPrecisionError(f"Cannot compare to precision {B}")
        return self.coefficients[:B] == other.coefficients[:B]

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "coefficients": [format_rational(a) for a in self.coefficients],
            "weight": self.weight,
            "level": self.level,
            "character": self.character,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QSeries":
        coefficients = [to_rational(a) for a in data["coefficients"]]
        if len(coefficients) != int(data["precision"]):
            raise ValueError("Precision does not match the coefficient count")
        return cls(tuple(coefficients), int(data["weight"]), int(data["level"]), data["character"])


def sturm_bound(k: int, N: int) -> int:
    """floor(k * [SL2(Z) : Gamma0(N)] / 12)."""
    return k * gamma0_index(N) // 12


def hecke_qexp(
    f: QSeries, p: int, k: int, chi: Optional[DirichletCharacter] = None, precision: Optional[int] = None
) -> QSeries:
    """Apply T_p coefficientwise: b_n = a_{np} + p^(k-1) chi(p) a_{n/p}.

    Arguments
    ---------
    f : QSeries
        Input series.
    p : int
        Prime.
    k : int
        Weight.
    chi : DirichletCharacter, optional
        Nebentypus; trivial mod 1 when omitted.
    precision : int, optional
        Output precision B'; defaults to the largest one f supports.

    Returns
    -------
    QSeries
    """
    if not sympy.isprime(p):
        raise NotPrimeError(f"{p} is not prime")
    chi = chi if chi is not None else trivial_character()
    B = f.precision // p if precision is None else precision
    if f.precision < p * B:
        raise InsufficientPrecisionError(
            f"T_{p} to precision {B} needs {p * B} coefficients, only {f.precision} known"
        )
    twist = p ** (k - 1) * chi(p)
    out = []
    for n in range(1, B + 1):
        b = f.coefficient(n * p)
        if n % p == 0 and twist:
            b += twist * f.coefficient(n // p)
        out.append(b)
    return QSeries(tuple(out), f.weight, f.level, f.character)


def hecke_eigenvalue(f: QSeries, p: int, k: int, chi: Optional[DirichletCharacter] = None) -> Fraction:
    """a_p / a_1 for a normalized eigenform, checked against hecke_qexp."""
    a1 = f.coefficient(1)
    if not a1:
        raise PreconditionError("Series is not normalized (a_1 = 0)")
    lam = f.coefficient(p) / a1
    image = hecke_qexp(f, p, k, chi)
    if not image.agrees_with(f.truncate(image.precision).scale(lam)):
        raise PreconditionError(f"Series is not a T_{p} eigenform to precision {image.precision}")
    return lam


# Power series with constant term, used internally as plain lists.


def _multiply(a: Sequence[int], b: Sequence[int], B: int) -> List[int]:
    out = [0] * (B + 1)
    for i, x in enumerate(a[: B + 1]):
        if x:
            for j, y in enumerate(b[: B + 1 - i]):
                if y:
                    out[i + j] += x * y
    return out


def _power(a: Sequence[int], e: int, B: int) -> List[int]:
    out = [1] + [0] * B
    for _ in range(e):
        out = _multiply(out, a, B)
    return out


def _euler_factor(series: List[int], step: int, exponent: int, B: int) -> None:
    """Multiply in place by (1 - x^step)^exponent modulo x^(B+1)."""
    if exponent >= 0:
        for _ in range(exponent):
            for i in range(B, step - 1, -1):
                series[i] -= series[i - step]
    else:
        for _ in range(-exponent):
            for i in range(step, B + 1):
                series[i] += series[i - step]


def eisenstein_series(k: int, B: int) -> List[int]:
    """E_k = 1 - (2k / B_k) sum sigma_{k-1}(n) q^n to q^B, constant term 1."""
    if k < 4 or k % 2:
        raise PreconditionError(f"Eisenstein series needs even k >= 4, got {k}")
    factor = Fraction(-2 * k) / Fraction(str(sympy.bernoulli(k)))
    if factor.denominator != 1:
        raise PreconditionError(f"E_{k} does not have integral coefficients")
    factor = int(factor)
    return [1] + [factor * int(sympy.divisor_sigma(n, k - 1)) for n in range(1, B + 1)]


def delta_qexp(B: int) -> QSeries:
    """Delta = q prod (1 - q^n)^24."""
    return eta_quotient([(1, 24)], 1, B)


def eta_quotient(spec: Sequence[Tuple[int, int]], N: int, B: int) -> QSeries:
    """q^(sum d r / 24) prod_(d, r) prod_n (1 - q^(dn))^r to precision B.

    Arguments
    ---------
    spec : list of (d, r)
        Divisors and exponents.
    N : int
        Level tag.
    B : int
        Precision.

    Returns
    -------
    QSeries
    """
    total = sum(d * r for d, r in spec)
    if total % 24:
        raise NonIntegralLeadingPowerError(f"sum d*r = {total} is not divisible by 24")
    shift = total // 24
    if shift < 1:
        raise PreconditionError(f"Eta quotient starts at q^{shift}, not a cusp form at infinity")
    weight = sum(r for _, r in spec) // 2
    length = max(B - shift, 0)
    series = [1] + [0] * length
    for d, r in spec:
        for n in range(1, length // d + 1):
            _euler_factor(series, d * n, r, length)
    coefficients = [Fraction(0)] * B
    for i, a in enumerate(series):
        if shift + i <= B:
            coefficients[shift + i - 1] = Fraction(a)
    logger.debug(f"Eta quotient {spec} to precision {B}")
    return QSeries(tuple(coefficients), weight, N, "trivial")


def victor_miller_basis(k: int, B: int) -> List[QSeries]:
    """Echelon basis of S_k(1): row i is q^(i+1) + O(q^(d+1)).

    Arguments
    ---------
    k : int
        Even weight.
    B : int
        Precision.

    Returns
    -------
    list of QSeries
    """
    if k % 2:
        raise PreconditionError(f"Level one forms have even weight, got {k}")
    d = k // 12 - (1 if k % 12 == 2 else 0)
    if k < 12 or d <= 0:
        return []
    e4 = eisenstein_series(4, B)
    e6 = eisenstein_series(6, B)
    delta = [0] + [int(a) for a in delta_qexp(B).coefficients]

    rows = []
    for j in range(1, d + 1):
        rest = k - 12 * j
        b = 1 if rest % 4 else 0
        a = (rest - 6 * b) // 4
        series = _power(delta, j, B)
        series = _multiply(series, _power(e4, a, B), B)
        if b:
            series = _multiply(series, e6, B)
        rows.append(series)

    for j in range(1, d):
        pivot = rows[j]
        for i in range(j):
            factor = rows[i][j + 1]
            if factor:
                rows[i] = [x - factor * y for x, y in zip(rows[i], pivot)]

    return [QSeries(tuple(Fraction(x) for x in row[1:]), k, 1, "trivial") for row in rows]
