"""Weight reduction: from k to a small weight k' with at least as large an a_p = 0 multiplicity.

k - 1 is matched modulo p^2 - 1 against b + pa or a + bp with
0 <= a < b <= p - 1. The digits (a, b) determine one or two candidate
pairs (i, k'), one of which always has k' <= (p + 3) / 2.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import sympy

from hecke_nullity.characters import DirichletCharacter
from hecke_nullity.dimension import check_parity
from hecke_nullity.exceptions import InvariantViolation, NoDecompositionError, NotPrimeError, PreconditionError
from hecke_nullity.mult import check_prime_level, multiplicity_full, multiplicity_new

logger = logging.getLogger(__name__)

B_PLUS_PA = "b+pa"
A_PLUS_BP = "a+bp"


@dataclass(frozen=True)
class WeightReduction:
    """Digits (a, b), the matching congruence form, and the candidate (i, k') pairs."""

    p: int
    k: int
    a: int
    b: int
    form: str
    options: Tuple[Tuple[int, int], ...]
    chosen: Tuple[int, int]

    @property
    def i(self) -> int:
        return self.chosen[0]

    @property
    def k_prime(self) -> int:
        return self.chosen[1]

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "k": self.k,
            "a": self.a,
            "b": self.b,
            "form": self.form,
            "options": [list(option) for option in self.options],
            "chosen": list(self.chosen),
        }


def decompositions(p: int, k: int) -> List[Tuple[int, int, str]]:
    """Every (a, b, form) with 0 <= a < b <= p - 1 matching k - 1 mod p^2 - 1."""
    modulus = p * p - 1
    target = (k - 1) % modulus
    found = []
    for a in range(p):
        for b in range(a + 1, p):
            if (b + p * a) % modulus == target:
                found.append((a, b, B_PLUS_PA))
            if (a + b * p) % modulus == target:
                found.append((a, b, A_PLUS_BP))
    return found


def weight_options(p: int, a: int, b: int) -> Tuple[Tuple[int, int], ...]:
    if b - a != 1:
        return ((a, 1 + b - a), (b - 1, p + 2 + a - b))
    return ((a, 2),)


def reduce_weight(p: int, k: int) -> WeightReduction:
    """Find the weight reduction of k at the odd prime p.

    Arguments
    ---------
    p : int
        Odd prime. p = 3 is accepted here; the bound needs p >= 5.
    k : int
        Even weight, at least 2.

    Returns
    -------
    WeightReduction
    """
    if not sympy.isprime(p):
        raise NotPrimeError(f"{p} is not prime")
    if p == 2:
        raise PreconditionError("Weight reduction needs an odd prime")
    if k < 2 or k % 2:
        raise PreconditionError(f"Weight reduction needs an even weight k >= 2, got {k}")

    found = decompositions(p, k)
    if not found:
        raise NoDecompositionError(f"No (a, b) matches k - 1 = {k - 1} modulo {p * p - 1}")
    if len(found) > 1:
        raise InvariantViolation(f"Decomposition of k={k} at p={p} is not unique: {found}")
    a, b, form = found[0]

    options = weight_options(p, a, b)
    small = [option for option in options if 2 * option[1] <= p + 3]
    if not small:
        raise InvariantViolation(f"No option in {options} has k' <= (p + 3) / 2 for p={p}")
    chosen = min(small)
    if chosen[1] < 2 or (p >= 5 and chosen[1] > p - 1):
        raise InvariantViolation(f"Chosen weight {chosen[1]} is out of range for p={p}")

    reduction = WeightReduction(p=p, k=k, a=a, b=b, form=form, options=options, chosen=chosen)
    logger.debug(f"Weight reduction p={p} k={k}: {reduction.to_dict()}")
    return reduction


@dataclass(frozen=True)
class BoundCheck:
    """Comparison of the a_p = 0 multiplicities at k and at its reduced weight."""

    p: int
    N: int
    character: str
    k: int
    k_prime: int
    m_k_new: int
    m_kprime_new: int
    holds: bool
    m_k_full: int
    m_kprime_full: int
    full_holds: bool

    @property
    def verdicts_agree(self) -> bool:
        return self.holds == self.full_holds

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "N": self.N,
            "character": self.character,
            "k": self.k,
            "k_prime": self.k_prime,
            "m_k_new": self.m_k_new,
            "m_kprime_new": self.m_kprime_new,
            "holds": self.holds,
            "m_k_full": self.m_k_full,
            "m_kprime_full": self.m_kprime_full,
            "full_holds": self.full_holds,
            "verdicts_agree": self.verdicts_agree,
        }


def verify_bound(
    p: int,
    chi: DirichletCharacter,
    N: int,
    k: int,
    cache_dir: Optional[str] = None,
    method: str = "auto",
) -> BoundCheck:
    """Compare m(0, k) with m(0, k') on new and full subspaces.

    The verdict is returned rather than raised; callers decide whether a
    failing verdict is fatal.

    Arguments
    ---------
    p : int
        Prime, at least 5, not dividing N.
    chi : DirichletCharacter
        Even nebentypus.
    N : int
        Level.
    k : int
        Even weight.
    cache_dir : str, optional
        Hecke matrix cache.
    method : str
        Heilbronn set.

    Returns
    -------
    BoundCheck
    """
    if p < 5:
        raise PreconditionError(f"The weight bound needs p >= 5, got {p}")
    check_prime_level(p, N)
    check_parity(k, chi.lift(N))
    reduction = reduce_weight(p, k)
    kp = reduction.k_prime

    m_k_new = multiplicity_new(p, 0, k, chi, N, cache_dir, method)
    m_kp_new = multiplicity_new(p, 0, kp, chi, N, cache_dir, method)
    m_k_full = multiplicity_full(p, 0, k, chi, N, cache_dir, method)
    m_kp_full = multiplicity_full(p, 0, kp, chi, N, cache_dir, method)

    check = BoundCheck(
        p=p,
        N=N,
        character=chi.spec,
        k=k,
        k_prime=kp,
        m_k_new=m_k_new,
        m_kprime_new=m_kp_new,
        holds=m_k_new <= m_kp_new,
        m_k_full=m_k_full,
        m_kprime_full=m_kp_full,
        full_holds=m_k_full <= m_kp_full,
    )
    if not check.holds:
        logger.error(f"Bound fails at p={p} N={N} k={k}: m_new(0, {k}) = {m_k_new} > m_new(0, {kp}) = {m_kp_new}")
    elif not check.verdicts_agree:
        logger.warning(f"New and full verdicts differ at p={p} N={N} k={k}: {check.to_dict()}")
    return check
