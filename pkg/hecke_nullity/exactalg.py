"""Exact linear algebra over the rationals.

Every other module reduces its questions to ranks, kernels and
characteristic polynomials of RationalMatrix objects built here.
Rational scalars are fractions.Fraction, which always sits in lowest
terms with a positive denominator.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import sympy

from hecke_nullity.exceptions import NonIntegralCharpolyError, NonSquareMatrixError, ZeroPolynomialError
from hecke_nullity.types import INFINITE_SLOPE, Slope

logger = logging.getLogger(__name__)

Rational = Fraction
Scalar = Union[int, Fraction]


def to_rational(value: Union[int, str, Fraction]) -> Fraction:
    """Coerce an int, Fraction or "num/den" string to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"Cannot interpret {value!r} as a rational")


def format_rational(value: Scalar) -> str:
    """Exact string form: "n" for integers, "n/d" otherwise."""
    value = to_rational(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _lcm(values: Iterable[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


class RationalMatrix:
    """Dense immutable matrix of Fractions, stored row-major."""

    __slots__ = ("_rows", "_cols", "_entries")

    def __init__(self, rows: int, cols: int, entries: Sequence[Scalar]):
        if rows < 0 or cols < 0:
            raise ValueError(f"Invalid matrix shape {rows}x{cols}")
        if len(entries) != rows * cols:
            raise ValueError(
                f"Expected {rows * cols} entries for a {rows}x{cols} matrix, got {len(entries)}"
            )
        self._rows = rows
        self._cols = cols
        self._entries = tuple(to_rational(e) for e in entries)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Scalar]], cols: Optional[int] = None) -> "RationalMatrix":
        """Build a matrix from a list of rows.

        cols must be given when rows is empty and the width matters.
        """
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        for r in rows:
            if len(r) != cols:
                raise ValueError("Ragged rows")
        return cls(len(rows), cols, [e for r in rows for e in r])

    @classmethod
    def zero(cls, rows: int, cols: int) -> "RationalMatrix":
        return cls(rows, cols, [0] * (rows * cols))

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])

    @classmethod
    def vstack(cls, blocks: Sequence["RationalMatrix"], cols: Optional[int] = None) -> "RationalMatrix":
        """Stack matrices with equal column counts on top of each other."""
        if cols is None:
            cols = blocks[0].cols if blocks else 0
        rows = []
        for block in blocks:
            if block.cols != cols:
                raise ValueError(f"Cannot stack a {block.rows}x{block.cols} block into width {cols}")
            rows.extend(block.to_rows())
        return cls.from_rows(rows, cols=cols)

    @property
    def rows(self) -> int:
        return self._rows

    @property
    def cols(self) -> int:
        return self._cols

    @property
    def entries(self) -> Tuple[Fraction, ...]:
        return self._entries

    @property
    def shape(self) -> Tuple[int, int]:
        return (self._rows, self._cols)

    def is_square(self) -> bool:
        return self._rows == self._cols

    def is_zero(self) -> bool:
        return not any(self._entries)

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        i, j = index
        if not (0 <= i < self._rows and 0 <= j < self._cols):
            raise IndexError(f"Index {index} out of range for shape {self.shape}")
        return self._entries[i * self._cols + j]

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self._entries[i * self._cols : (i + 1) * self._cols]

    def to_rows(self) -> List[List[Fraction]]:
        return [list(self.row(i)) for i in range(self._rows)]

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(
            self._cols,
            self._rows,
            [self._entries[i * self._cols + j] for j in range(self._cols) for i in range(self._rows)],
        )

    def scale(self, c: Scalar) -> "RationalMatrix":
        c = to_rational(c)
        return RationalMatrix(self._rows, self._cols, [c * e for e in self._entries])

    def shift(self, lam: Scalar) -> "RationalMatrix":
        """Return self - lam * I."""
        if not self.is_square():
            raise NonSquareMatrixError(f"Cannot shift a {self._rows}x{self._cols} matrix")
        lam = to_rational(lam)
        n = self._cols
        return RationalMatrix(
            n, n, [e - lam if k // n == k % n else e for k, e in enumerate(self._entries)]
        )

    def __add__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise ValueError(f"Shape mismatch: {self.shape} + {other.shape}")
        return RationalMatrix(self._rows, self._cols, [a + b for a, b in zip(self._entries, other._entries)])

    def __sub__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.shape != other.shape:
            raise ValueError(f"Shape mismatch: {self.shape} - {other.shape}")
        return RationalMatrix(self._rows, self._cols, [a - b for a, b in zip(self._entries, other._entries)])

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self._cols != other._rows:
            raise ValueError(f"Shape mismatch: {self.shape} @ {other.shape}")
        other_rows = other.to_rows()
        out = []
        for i in range(self._rows):
            acc = [Fraction(0)] * other._cols
            for t, a in enumerate(self.row(i)):
                if not a:
                    continue
                for j, b in enumerate(other_rows[t]):
                    if b:
                        acc[j] += a * b
            out.extend(acc)
        return RationalMatrix(self._rows, other._cols, out)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self.shape == other.shape and self._entries == other._entries

    def __hash__(self) -> int:
        return hash((self._rows, self._cols, self._entries))

    def __repr__(self) -> str:
        body = ", ".join("[" + ", ".join(format_rational(e) for e in self.row(i)) + "]" for i in range(self._rows))
        return f"RationalMatrix({self._rows}x{self._cols}: [{body}])"

    def to_dict(self) -> dict:
        """JSON-ready form {rows, cols, entries} with exact strings."""
        return {
            "rows": self._rows,
            "cols": self._cols,
            "entries": [format_rational(e) for e in self._entries],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RationalMatrix":
        return cls(int(data["rows"]), int(data["cols"]), [to_rational(e) for e in data["entries"]])


class IntPolynomial:
    """Polynomial with integer coefficients, coefficient index = degree."""

    __slots__ = ("_coefficients",)

    def __init__(self, coefficients: Sequence[int]):
        coefficients = [int(c) for c in coefficients]
        while coefficients and coefficients[-1] == 0:
            coefficients.pop()
        self._coefficients = tuple(coefficients)

    @property
    def coefficients(self) -> Tuple[int, ...]:
        return self._coefficients

    def degree(self) -> int:
        """Degree, with -1 for the zero polynomial."""
        return len(self._coefficients) - 1

    def is_zero(self) -> bool:
        return not self._coefficients

    def __getitem__(self, i: int) -> int:
        if 0 <= i < len(self._coefficients):
            return self._coefficients[i]
        return 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IntPolynomial):
            return NotImplemented
        return self._coefficients == other._coefficients

    def __hash__(self) -> int:
        return hash(self._coefficients)

    def __mul__(self, other: "IntPolynomial") -> "IntPolynomial":
        if self.is_zero() or other.is_zero():
            return IntPolynomial([])
        out = [0] * (len(self._coefficients) + len(other._coefficients) - 1)
        for i, a in enumerate(self._coefficients):
            if a:
                for j, b in enumerate(other._coefficients):
                    out[i + j] += a * b
        return IntPolynomial(out)

    def __call__(self, value):
        """Evaluate by Horner's rule at a scalar or a square RationalMatrix."""
        if isinstance(value, RationalMatrix):
            if not value.is_square():
                raise NonSquareMatrixError("Can only evaluate a polynomial at a square matrix")
            n = value.rows
            identity = RationalMatrix.identity(n)
            result = RationalMatrix.zero(n, n)
            for c in reversed(self._coefficients):
                result = result @ value + identity.scale(c)
            return result
        result = Fraction(0)
        for c in reversed(self._coefficients):
            result = result * value + c
        return result

    def to_sympy(self, x: Optional[sympy.Symbol] = None) -> sympy.Poly:
        x = x if x is not None else sympy.Symbol("x")
        return sympy.Poly(list(reversed(self._coefficients)) or [0], x, domain="ZZ")

    def to_list(self) -> List[str]:
        return [str(c) for c in self._coefficients]

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        terms = []
        for i in range(self.degree(), -1, -1):
            c = self._coefficients[i]
            if not c:
                continue
            mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
            mag = abs(c)
            body = str(mag) if (mag != 1 or i == 0) else ""
            if body and mono:
                body += "*"
            sign = "-" if c < 0 else "+"
            terms.append((sign, body + mono))
        first_sign, first = terms[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, term in terms[1:]:
            out += f" {sign} {term}"
        return out

    def __repr__(self) -> str:
        return f"IntPolynomial({list(self._coefficients)})"


def _integral_rows(m: RationalMatrix) -> List[List[int]]:
    """Scale each row by the lcm of its denominators; row spaces are unchanged."""
    out = []
    for i in range(m.rows):
        row = m.row(i)
        scale = _lcm(e.denominator for e in row)
        out.append([int(e * scale) for e in row])
    return out


def _bareiss_echelon(rows: List[List[int]], ncols: int) -> Tuple[List[List[int]], List[int]]:
    """Fraction-free forward elimination.

    Pivot for each column is the first nonzero entry at or below the
    current row, so the result depends only on the input.
    """
    rows = [r[:] for r in rows]
    n = len(rows)
    pivots: List[int] = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == n:
            break
        piv = next((i for i in range(r, n) if rows[i][c]), None)
        if piv is None:
            continue
        if piv != r:
            rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        pivot_row = rows[r]
        for i in range(r + 1, n):
            row = rows[i]
            a = row[c]
            if a:
                rows[i] = [0] * (c + 1) + [
                    (p * row[j] - a * pivot_row[j]) // prev for j in range(c + 1, ncols)
                ]
            elif p != prev:
                rows[i] = [x * p // prev for x in row]
        prev = p
        pivots.append(c)
        r += 1
    return rows[:r], pivots


def rank(m: RationalMatrix) -> int:
    """Rank over Q by fraction-free elimination."""
    if m.rows == 0 or m.cols == 0:
        return 0
    _, pivots = _bareiss_echelon(_integral_rows(m), m.cols)
    return len(pivots)


def rref(m: RationalMatrix) -> Tuple[RationalMatrix, Tuple[int, ...]]:
    """Reduced row echelon form without zero rows, and its pivot columns."""
    if m.rows == 0 or m.cols == 0:
        return RationalMatrix.zero(0, m.cols), ()
    echelon, pivots = _bareiss_echelon(_integral_rows(m), m.cols)
    reduced = [[Fraction(x) for x in row] for row in echelon]
    for idx in range(len(pivots) - 1, -1, -1):
        c = pivots[idx]
        row = reduced[idx]
        p = row[c]
        if p != 1:
            row = [x / p for x in row]
            reduced[idx] = row
        support = [j for j in range(c, m.cols) if row[j]]
        for i in range(idx):
            factor = reduced[i][c]
            if factor:
                target = reduced[i]
                for j in support:
                    target[j] -= factor * row[j]
    return RationalMatrix.from_rows(reduced, cols=m.cols), tuple(pivots)


def nullspace(m: RationalMatrix) -> RationalMatrix:
    """Basis of {v : m v = 0} as the rows of a matrix in reduced echelon form."""
    n = m.cols
    reduced, pivots = rref(m)
    pivot_set = set(pivots)
    free = [j for j in range(n) if j not in pivot_set]
    vectors = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -reduced[i, f]
        vectors.append(v)
    if not vectors:
        return RationalMatrix.zero(0, n)
    basis, _ = rref(RationalMatrix.from_rows(vectors, cols=n))
    return basis


def nullity(m: RationalMatrix) -> int:
    return m.cols - rank(m)


def coordinates_in_rowspace(
    basis: RationalMatrix, pivots: Sequence[int], vector: Sequence[Scalar], check: bool = True
) -> List[Fraction]:
    """Coordinates of vector with respect to a reduced echelon basis.

    With an RREF basis the coordinate on row i is the vector's entry at
    pivot column i. When check is set the reconstruction is verified and
    a ValueError is raised for vectors outside the row space.
    """
    coords = [to_rational(vector[c]) for c in pivots]
    if check:
        recon = [Fraction(0)] * basis.cols
        for i, a in enumerate(coords):
            if a:
                for j, b in enumerate(basis.row(i)):
                    if b:
                        recon[j] += a * b
        if any(to_rational(v) != r for v, r in zip(vector, recon)):
            raise ValueError("Vector does not lie in the row space")
    return coords


def charpoly(m: RationalMatrix) -> IntPolynomial:
    """Characteristic polynomial det(xI - m) by Berkowitz's division-free method."""
    if not m.is_square():
        raise NonSquareMatrixError(f"charpoly needs a square matrix, got {m.rows}x{m.cols}")
    n = m.rows
    a = m.to_rows()
    # poly holds det(xI - A[i:, i:]) in decreasing powers of x.
    poly: List[Fraction] = [Fraction(1)]
    for i in range(n - 1, -1, -1):
        size = n - i
        row = a[i][i + 1 :]
        col = [a[t][i] for t in range(i + 1, n)]
        sub = [r[i + 1 :] for r in a[i + 1 :]]
        toeplitz = [Fraction(1), -a[i][i]]
        v = col
        for _ in range(size - 1):
            toeplitz.append(-sum((r * x for r, x in zip(row, v)), Fraction(0)))
            v = [sum((s * x for s, x in zip(srow, v)), Fraction(0)) for srow in sub]
        new_poly = []
        for r in range(size + 1):
            acc = Fraction(0)
            for c in range(min(r + 1, len(poly))):
                acc += toeplitz[r - c] * poly[c]
            new_poly.append(acc)
        poly = new_poly
    if any(c.denominator != 1 for c in poly):
        raise NonIntegralCharpolyError(f"Characteristic polynomial has non-integral coefficients: {poly}")
    return IntPolynomial([int(c) for c in reversed(poly)])


def valuation(n: Scalar, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    n = to_rational(n)
    if n == 0:
        raise ValueError("Valuation of zero is infinite")
    return int(sympy.multiplicity(p, abs(n.numerator))) - int(sympy.multiplicity(p, n.denominator))


def newton_slopes(f: IntPolynomial, p: int) -> Tuple[Slope, ...]:
    """Valuations at p of the roots of f, with multiplicity, in ascending order.

    Zero roots are reported as INFINITE_SLOPE and sort last.
    """
    if f.is_zero():
        raise ZeroPolynomialError("Newton polygon of the zero polynomial is undefined")
    coefficients = f.coefficients
    zeros = next(i for i, c in enumerate(coefficients) if c)
    points = [(i - zeros, valuation(c, p)) for i, c in enumerate(coefficients[zeros:]) if c]

    hull: List[Tuple[int, int]] = []
    for pt in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (x2 - x1) * (pt[1] - y1) - (y2 - y1) * (pt[0] - x1) <= 0:
                hull.pop()
            else:
                break
        hull.append(pt)

    slopes: List[Slope] = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slopes.extend([Fraction(y1 - y2, x2 - x1)] * (x2 - x1))
    slopes.sort()
    slopes.extend([INFINITE_SLOPE] * zeros)
    return tuple(slopes)


def format_slope(slope: Slope) -> str:
    if slope == INFINITE_SLOPE:
        return "inf"
    return format_rational(slope)


@dataclass(frozen=True)
class DeligneCheck:
    """Outcome of bounding the complex roots of a Hecke polynomial."""

    q: int
    k: int
    upper: Fraction
    largest_modulus: str
    holds: bool
    method: str

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "k": self.k,
            "upper": format_rational(self.upper),
            "largest_modulus": self.largest_modulus,
            "holds": self.holds,
            "method": self.method,
        }


DELIGNE_SCALE = 10**7
DELIGNE_TOLERANCE = Fraction(1, 10**6)
DELIGNE_REFINEMENTS = 6


def _sqrt_above(x: Fraction) -> Fraction:
    """A rational within 1e-7 above sqrt(x)."""
    return Fraction(math.isqrt(x.numerator * DELIGNE_SCALE**2 // x.denominator) + 1, DELIGNE_SCALE)


def _fraction(x: sympy.Expr) -> Fraction:
    return Fraction(int(x.p), int(x.q))


def _square_range(a: Fraction, b: Fraction) -> Tuple[Fraction, Fraction]:
    lo, hi = sorted((a * a, b * b))
    if a <= 0 <= b or b <= 0 <= a:
        lo = Fraction(0)
    return lo, hi


def _isolating_boxes(poly: sympy.Poly, eps: Fraction) -> List[Tuple[Fraction, Fraction, Fraction, Fraction]]:
    """Rational boxes (x0, y0, x1, y1), one around each root of a square-free poly."""
    real, complex_ = poly.intervals(all=True, eps=sympy.Rational(eps.numerator, eps.denominator), sqf=True)
    boxes = [(_fraction(s), Fraction(0), _fraction(t), Fraction(0)) for s, t in real]
    for lo, hi in complex_:
        x0, y0 = lo.as_real_imag()
        x1, y1 = hi.as_real_imag()
        boxes.append((_fraction(x0), _fraction(y0), _fraction(x1), _fraction(y1)))
    return boxes


def deligne_check(f: IntPolynomial, q: int, k: int) -> DeligneCheck:
    """Check every complex root of f has modulus at most 2 q^((k-1)/2).

    Real-rooted polynomials are certified by Sturm counting on the
    rational interval [-R, R] where R exceeds the bound by less than
    1e-7. Otherwise every root is enclosed in a rational box, refined
    until the box lies inside or outside the disc of radius
    2 q^((k-1)/2) + 1e-6. A box still straddling that circle after the
    last refinement counts as a violation.
    """
    if f.is_zero():
        raise ZeroPolynomialError("Cannot bound the roots of the zero polynomial")
    bound_sq = 4 * q ** (k - 1)
    upper = _sqrt_above(Fraction(bound_sq))
    if f.degree() <= 0:
        return DeligneCheck(q, k, upper, "0", True, "trivial")

    poly = f.to_sympy().sqf_part()
    degree = poly.degree()
    sym_upper = sympy.Rational(upper.numerator, upper.denominator)
    if poly.count_roots() == degree:
        inside = poly.count_roots(-sym_upper, sym_upper)
        largest = Fraction(0)
        for (lo, hi), _ in poly.intervals(eps=sympy.Rational(1, DELIGNE_SCALE)):
            for end in (lo, hi):
                largest = max(largest, abs(_fraction(end)))
        check = DeligneCheck(q, k, upper, format_rational(largest), inside == degree, "sturm")
    else:
        # radius within 1e-7 below the bound plus tolerance
        limit_sq = (upper - Fraction(1, DELIGNE_SCALE) + DELIGNE_TOLERANCE) ** 2
        eps = Fraction(1, DELIGNE_SCALE)
        for _ in range(DELIGNE_REFINEMENTS):
            outside = straddling = 0
            largest_sq = Fraction(0)
            for x0, y0, x1, y1 in _isolating_boxes(poly, eps):
                x_lo, x_hi = _square_range(x0, x1)
                y_lo, y_hi = _square_range(y0, y1)
                largest_sq = max(largest_sq, x_hi + y_hi)
                if x_lo + y_lo > limit_sq:
                    outside += 1
                elif x_hi + y_hi > limit_sq:
                    straddling += 1
            if outside or not straddling:
                break
            eps /= 1000
        if straddling and not outside:
            logger.warning(f"Deligne check q={q} k={k}: {straddling} roots undecided at width {eps}")
        holds = not outside and not straddling
        check = DeligneCheck(q, k, upper, format_rational(_sqrt_above(largest_sq)), holds, "isolation")
    logger.debug(f"Deligne check q={q} k={k}: {check}")
    return check
