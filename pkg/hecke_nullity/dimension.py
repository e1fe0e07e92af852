"""Closed-form dimensions of cusp form spaces.

Cohen-Oesterle's formula for S_k(Gamma0(N), chi) with chi trivial or
quadratic. It is independent of modular symbols and is used to check
every space they produce.
"""

import logging
from fractions import Fraction

import sympy

from hecke_nullity.characters import DirichletCharacter
from hecke_nullity.exceptions import ParityMismatchError, UnsupportedWeightError

logger = logging.getLogger(__name__)


def gamma0_index(N: int) -> int:
    """[SL2(Z) : Gamma0(N)] = N * prod_{p | N} (1 + 1/p)."""
    index = N
    for p in sympy.primefactors(N):
        index = index // p * (p + 1)
    return index


def _local_factor(r: int, s: int, p: int) -> int:
    if 2 * s <= r:
        if r % 2 == 0:
            return p ** (r // 2) + p ** (r // 2 - 1)
        return 2 * p ** ((r - 1) // 2)
    return 2 * p ** (r - s)


def _gamma4(k: int) -> Fraction:
    if k % 4 == 2:
        return Fraction(-1, 4)
    if k % 4 == 0:
        return Fraction(1, 4)
    return Fraction(0)


def _gamma3(k: int) -> Fraction:
    if k % 3 == 2:
        return Fraction(-1, 3)
    if k % 3 == 0:
        return Fraction(1, 3)
    return Fraction(0)


def check_parity(k: int, chi: DirichletCharacter) -> None:
    if chi.parity != (-1) ** k:
        raise ParityMismatchError(f"chi(-1) = {chi.parity} but (-1)^k = {(-1) ** k} for k={k}")


def dim_cusp(N: int, k: int, chi: DirichletCharacter) -> int:
    """dim S_k(N, chi) for k >= 2.

    Arguments
    ---------
    N : int
        Level.
    k : int
        Weight.
    chi : DirichletCharacter
        Nebentypus, lifted to modulus N.

    Returns
    -------
    int
    """
    if k < 2:
        raise UnsupportedWeightError(f"Weight {k} is not supported")
    chi = chi.lift(N)
    check_parity(k, chi)

    total = Fraction((k - 1) * gamma0_index(N), 12)
    product = 1
    for p, r in sympy.factorint(N).items():
        s = 0
        f = chi.conductor
        while f % p == 0:
            f //= p
            s += 1
        product *= _local_factor(r, s, p)
    total -= Fraction(product, 2)

    g4 = _gamma4(k)
    if g4:
        total += g4 * sum(chi(x) for x in range(N) if (x * x + 1) % N == 0)
    g3 = _gamma3(k)
    if g3:
        total += g3 * sum(chi(x) for x in range(N) if (x * x + x + 1) % N == 0)
    if k == 2 and chi.is_trivial():
        total += 1

    if total.denominator != 1 or total < 0:
        raise ValueError(f"Dimension formula produced {total} for N={N}, k={k}, chi={chi}")
    logger.debug(f"dim S_{k}({N}, {chi}) = {total}")
    return int(total)


def dimension_envelope(N: int, k: int, chi: DirichletCharacter) -> dict:
    """The leading term alpha(N) k / 12 and how far dim_cusp sits from it."""
    envelope = Fraction(gamma0_index(N) * k, 12)
    dim = dim_cusp(N, k, chi)
    return {"dimension": dim, "envelope": envelope, "deviation": dim - envelope}
