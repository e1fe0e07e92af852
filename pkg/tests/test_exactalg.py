import logging
import random
import sys
from fractions import Fraction

import pytest

from hecke_nullity.exactalg import (
    IntPolynomial,
    RationalMatrix,
    charpoly,
    coordinates_in_rowspace,
    deligne_check,
    format_rational,
    format_slope,
    newton_slopes,
    nullity,
    nullspace,
    rank,
    rref,
    to_rational,
    valuation,
)
from hecke_nullity.exceptions import NonIntegralCharpolyError, NonSquareMatrixError, ZeroPolynomialError
from hecke_nullity.types import INFINITE_SLOPE


def setup_module(module):
    logging.basicConfig(stream=sys.stdout, level=logging.DEBUG)
    logging.getLogger("").handlers = []


def M(rows):
    return RationalMatrix.from_rows(rows)


@pytest.mark.parametrize(
    "rows, expected",
    [
        ([[1, 0], [0, 1]], 2),
        ([[0, 0, 0], [0, 0, 0], [0, 0, 0]], 0),
        ([[1, 2], [2, 4]], 1),
        ([["1/2", "1/3"], ["3", "2"]], 1),
    ],
)
def test_rank(rows, expected):
    assert rank(M(rows)) == expected


def test_rank_empty():
    assert rank(RationalMatrix.zero(0, 3)) == 0
    assert nullity(RationalMatrix.zero(0, 3)) == 3


def test_rref():
    reduced, pivots = rref(M([[2, 4, 2], [1, 3, 2]]))
    assert pivots == (0, 1)
    assert reduced == M([[1, 0, -1], [0, 1, 1]])


def test_nullspace_identity():
    assert nullspace(RationalMatrix.identity(2)).rows == 0


def test_nullspace_zero():
    assert nullspace(RationalMatrix.zero(3, 3)) == RationalMatrix.identity(3)


def test_nullspace_rank_one():
    basis = nullspace(M([[1, 2], [2, 4]]))
    assert basis.rows == 1
    # Proportional to (-2, 1).
    assert basis.row(0)[0] == -2 * basis.row(0)[1]
    assert basis.row(0) == (Fraction(1), Fraction(-1, 2))


def test_nullspace_annihilates():
    m = M([[1, 2, 3, 4], [2, 4, 6, 8], [0, 1, 1, 0]])
    basis = nullspace(m)
    assert basis.rows == 2
    assert (m @ basis.transpose()).is_zero()


def test_random_rank_nullity():
    rng = random.Random(1234)
    for _ in range(25):
        rows, cols = rng.randint(1, 6), rng.randint(1, 6)
        m = M([[Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(cols)] for _ in range(rows)])
        basis = nullspace(m)
        assert rank(m) + basis.rows == cols
        if basis.rows:
            assert (m @ basis.transpose()).is_zero()


def test_coordinates_in_rowspace():
    basis, pivots = rref(M([[1, 1, 0], [0, 1, 1]]))
    assert coordinates_in_rowspace(basis, pivots, [2, 3, 1]) == [2, 3]
    with pytest.raises(ValueError):
        coordinates_in_rowspace(basis, pivots, [1, 0, 0])


@pytest.mark.parametrize(
    "rows, expected",
    [
        ([[-24]], [24, 1]),
        ([[1, 0], [0, 1]], [1, -2, 1]),
        ([[0, 1], [1, 0]], [-1, 0, 1]),
        ([[1, 2], [3, 4]], [-2, -5, 1]),
    ],
)
def test_charpoly(rows, expected):
    assert charpoly(M(rows)) == IntPolynomial(expected)


def test_cayley_hamilton():
    rng = random.Random(7)
    for n in range(1, 6):
        m = M([[rng.randint(-5, 5) for _ in range(n)] for _ in range(n)])
        assert charpoly(m)(m).is_zero()


def test_charpoly_errors():
    with pytest.raises(NonSquareMatrixError):
        charpoly(M([[1, 2]]))
    with pytest.raises(NonIntegralCharpolyError):
        charpoly(M([["1/2"]]))


def test_polynomial_str_and_product():
    assert str(IntPolynomial([24, 1])) == "x + 24"
    assert str(IntPolynomial([-1, 0, 1])) == "x^2 - 1"
    assert IntPolynomial([0, 1]) * IntPolynomial([-5, 1]) == IntPolynomial([0, -5, 1])
    assert IntPolynomial([1, 2, 0, 0]).degree() == 1


def test_valuation():
    assert valuation(24, 2) == 3
    assert valuation(Fraction(5, 8), 2) == -3
    assert valuation(4830, 5) == 1
    with pytest.raises(ValueError):
        valuation(0, 3)


@pytest.mark.parametrize(
    "coefficients, p, expected",
    [
        ([24, 1], 2, (Fraction(3),)),
        ([0, 0, 1], 5, (INFINITE_SLOPE, INFINITE_SLOPE)),
        ([0, -5, 1], 5, (Fraction(1), INFINITE_SLOPE)),
        ([-4830, 1], 5, (Fraction(1),)),
        # x^2 + 2: one segment of slope 1/2 at p = 2
        ([2, 0, 1], 2, (Fraction(1, 2), Fraction(1, 2))),
    ],
)
def test_newton_slopes(coefficients, p, expected):
    assert newton_slopes(IntPolynomial(coefficients), p) == expected


def test_newton_slopes_multiplicative():
    f = IntPolynomial([24, 1])
    g = IntPolynomial([0, -5, 1])
    for p in (2, 3, 5):
        assert newton_slopes(f * g, p) == tuple(sorted(newton_slopes(f, p) + newton_slopes(g, p)))


def test_newton_slopes_zero():
    with pytest.raises(ZeroPolynomialError):
        newton_slopes(IntPolynomial([]), 2)


def test_format_helpers():
    assert format_rational(Fraction(6, 4)) == "3/2"
    assert format_rational(-3) == "-3"
    assert format_slope(INFINITE_SLOPE) == "inf"
    assert to_rational("-7/14") == Fraction(-1, 2)


def test_deligne_real_roots():
    # tau(2) = -24 against 2 * 2^(11/2) ~ 90.5
    check = deligne_check(IntPolynomial([24, 1]), 2, 12)
    assert check.holds
    assert check.method == "sturm"


def test_deligne_complex_roots():
    # x^2 + x + 2 has roots of modulus sqrt(2) <= 2 sqrt(2)
    check = deligne_check(IntPolynomial([2, 1, 1]), 2, 2)
    assert check.holds
    assert check.method == "isolation"


def test_deligne_root_on_the_circle():
    # x^2 + 8 has roots +-2 sqrt(2) i, exactly on the bound for q = 2, k = 2
    check = deligne_check(IntPolynomial([8, 0, 1]), 2, 2)
    assert check.holds
    assert check.method == "isolation"
    assert 8 <= Fraction(check.largest_modulus) ** 2 <= 8 + Fraction(1, 10**5)


@pytest.mark.parametrize(
    "coefficients, holds",
    [
        ([-2, 1, 0, 1], True),  # (x - 1)(x^2 + x + 2)
        ([-8, -2, -3, 1], False),  # (x - 4)(x^2 + x + 2)
        ([9, 0, 1], False),  # +-3i
    ],
)
def test_deligne_mixed_roots(coefficients, holds):
    check = deligne_check(IntPolynomial(coefficients), 2, 2)
    assert check.holds is holds
    assert check.method == "isolation"



def test_deligne_fails():
    check = deligne_check(IntPolynomial([-100, 1]), 2, 12)
    assert not check.holds
    check = deligne_check(IntPolynomial([100, 0, 1]), 2, 2)
    assert not check.holds


def test_deligne_constant():
    assert deligne_check(IntPolynomial([1]), 3, 4).method == "trivial"
    with pytest.raises(ZeroPolynomialError):
        deligne_check(IntPolynomial([]), 3, 4)


def test_matrix_dict():
    m = M([["1/2", 0], [3, -4]])
    assert m.to_dict() == {"rows": 2, "cols": 2, "entries": ["1/2", "0", "3", "-4"]}
    assert RationalMatrix.from_dict(m.to_dict()) == m
