import logging
import sys
from fractions import Fraction

import pytest

from hecke_nullity.characters import parse_character
from hecke_nullity.exceptions import (
    InsufficientPrecisionError,
    NonIntegralLeadingPowerError,
    NotPrimeError,
    PreconditionError,
)
from hecke_nullity.qexp import (
    QSeries,
    delta_qexp,
    eisenstein_series,
    eta_quotient,
    hecke_eigenvalue,
    hecke_qexp,
    sturm_bound,
    victor_miller_basis,
)

TAU = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]


def setup_module(module):
    logging.basicConfig(stream=sys.stdout, level=logging.DEBUG)
    logging.getLogger("").handlers = []


def test_delta():
    delta = delta_qexp(10)
    assert list(delta.coefficients) == TAU
    assert delta.weight == 12


def test_eta_delta_is_victor_miller():
    (vm,) = victor_miller_basis(12, 6)
    assert list(vm.coefficients) == TAU[:6]
    assert vm.agrees_with(eta_quotient([(1, 24)], 1, 6))


def test_victor_miller_shapes():
    assert victor_miller_basis(4, 10) == []
    assert victor_miller_basis(14, 10) == []
    (f,) = victor_miller_basis(16, 3)
    assert list(f.coefficients) == [1, 216, -3348]
    basis = victor_miller_basis(24, 5)
    assert len(basis) == 2
    assert basis[0].coefficients[:2] == (1, 0)
    assert basis[1].coefficients[:2] == (0, 1)


def test_eisenstein_series():
    assert eisenstein_series(4, 3) == [1, 240, 2160, 6720]
    assert eisenstein_series(6, 2) == [1, -504, -16632]
    with pytest.raises(PreconditionError):
        eisenstein_series(2, 3)


def test_eta_quotients():
    f = eta_quotient([(3, 8)], 9, 8)
    assert list(f.coefficients) == [1, 0, 0, -8, 0, 0, 20, 0]
    assert f.weight == 4
    g = eta_quotient([(3, 2), (9, 2)], 27, 5)
    assert list(g.coefficients) == [1, 0, 0, -2, 0]
    assert g.weight == 2
    h = eta_quotient([(1, 24)], 1, 3)
    assert list(h.coefficients) == [1, -24, 252]


def test_eta_quotient_errors():
    with pytest.raises(NonIntegralLeadingPowerError):
        eta_quotient([(1, 1)], 1, 5)
    with pytest.raises(PreconditionError):
        eta_quotient([(1, 24), (2, -12)], 2, 5)


@pytest.mark.parametrize("k, N, expected", [(12, 1, 1), (4, 9, 4), (2, 27, 6), (2, 11, 2)])
def test_sturm_bound(k, N, expected):
    assert sturm_bound(k, N) == expected


@pytest.mark.parametrize("p, eigenvalue, B", [(2, -24, 20), (5, 4830, 10), (3, 252, 10)])
def test_delta_is_eigenform(p, eigenvalue, B):
    delta = delta_qexp(p * B)
    image = hecke_qexp(delta, p, 12, precision=B)
    assert image.agrees_with(delta.truncate(B).scale(eigenvalue))
    assert hecke_eigenvalue(delta, p, 12) == eigenvalue


def test_hecke_zero_series():
    zero = QSeries(tuple([0] * 20), 12)
    assert hecke_qexp(zero, 2, 12).is_zero()


def test_cm_eta_killed_by_inert_primes():
    f = eta_quotient([(3, 8)], 9, 60)
    chi = parse_character("trivial", 9)
    for p in (2, 5, 11):
        assert hecke_qexp(f, p, 4, chi).is_zero()
    assert hecke_eigenvalue(f, 7, 4, chi) == 20


def test_weight_two_level_27():
    f = eta_quotient([(3, 2), (9, 2)], 27, 60)
    chi = parse_character("trivial", 27)
    assert hecke_eigenvalue(f, 5, 2, chi) == 0
    assert hecke_eigenvalue(f, 7, 2, chi) == -1


def test_hecke_qexp_errors():
    with pytest.raises(InsufficientPrecisionError):
        hecke_qexp(delta_qexp(10), 5, 12, precision=10)
    with pytest.raises(NotPrimeError):
        hecke_qexp(delta_qexp(10), 4, 12)


def test_not_an_eigenform():
    f, _ = victor_miller_basis(24, 20)
    with pytest.raises(PreconditionError):
        hecke_eigenvalue(f, 2, 24)


def test_series_arithmetic():
    delta = delta_qexp(6)
    assert (delta - delta).is_zero()
    assert (delta + delta).agrees_with(delta.scale(2))
    square = delta * delta
    assert square.weight == 24
    assert list(square.coefficients) == [0, 1, -48, 1080, -15040, 143820]
    assert delta[5] == 4830
    with pytest.raises(InsufficientPrecisionError):
        delta.coefficient(7)
    with pytest.raises(InsufficientPrecisionError):
        delta.agrees_with(delta_qexp(10), 8)


def test_series_dict():
    f = QSeries((Fraction(1, 2), 0, -3), 4, 9, "trivial")
    assert f.to_dict() == {
        "precision": 3,
        "coefficients": ["1/2", "0", "-3"],
        "weight": 4,
        "level": 9,
        "character": "trivial",
    }
    assert QSeries.from_dict(f.to_dict()) == f
