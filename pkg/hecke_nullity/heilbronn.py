"""Heilbronn-type matrix sets realising T_n on Manin symbols.

Both sets act on the right of Manin symbols and give the same operator
on the quotient; Cremona's set for a prime is much smaller, Merel's
description works for every n.
"""

import logging
from functools import lru_cache
from typing import Tuple

import sympy

from hecke_nullity.exceptions import NotPrimeError
from hecke_nullity.types import Matrix2

logger = logging.getLogger(__name__)


def _round_half_away(a: int, b: int) -> int:
    """Round a/b to the nearest integer, halves away from zero."""
    q, r = divmod(abs(a), abs(b))
    if 2 * r >= abs(b):
        q += 1
    return q if (a >= 0) == (b >= 0) else -q


@lru_cache(maxsize=None)
def heilbronn_cremona(p: int) -> Tuple[Matrix2, ...]:
    """Cremona's Heilbronn matrices of determinant p, for p prime."""
    if not sympy.isprime(p):
        raise NotPrimeError(f"Cremona's Heilbronn set needs a prime, got {p}")
    if p == 2:
        return ((1, 0, 0, 2), (2, 0, 0, 1), (2, 1, 0, 1), (1, 0, 1, 2))
    out = [(1, 0, 0, p)]
    for r in range(-(p // 2), p // 2 + 1):
        x1, x2, y1, y2 = p, -r, 0, 1
        a, b = -p, r
        out.append((x1, x2, y1, y2))
        while b != 0:
            q = _round_half_away(a, b)
            c = a - b * q
            a = -b
            b = c
            x3 = q * x2 - x1
            x1, x2 = x2, x3
            y3 = q * y2 - y1
            y1, y2 = y2, y3
            out.append((x1, x2, y1, y2))
    logger.debug(f"Cremona Heilbronn set for p={p} has {len(out)} matrices")
    return tuple(out)


@lru_cache(maxsize=None)
def heilbronn_merel(n: int) -> Tuple[Matrix2, ...]:
    """Merel's set: [a b; c d] with ad - bc = n, a > b >= 0, d > c >= 0."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    out = []
    for a in range(1, n + 1):
        for d in range(1, n + 1):
            bc = a * d - n
            if bc < 0:
                continue
            if bc == 0:
                out.extend((a, b, 0, d) for b in range(a))
                out.extend((a, 0, c, d) for c in range(1, d))
                continue
            for b in sympy.divisors(bc):
                if b >= a:
                    break
                c = bc // b
                if c < d:
                    out.append((a, b, c, d))
    logger.debug(f"Merel Heilbronn set for n={n} has {len(out)} matrices")
    return tuple(out)


def heilbronn(n: int, method: str = "auto") -> Tuple[Matrix2, ...]:
    """Pick a Heilbronn set for T_n.

    Arguments
    ---------
    n : int
        Operator index.
    method : str
        "cremona", "merel" or "auto" (Cremona for primes, Merel otherwise).
    """
    if method == "auto":
        method = "cremona" if sympy.isprime(n) else "merel"
    if method == "cremona":
        return heilbronn_cremona(n)
    if method == "merel":
        return heilbronn_merel(n)
    raise ValueError(f"Unknown Heilbronn method {method!r}")
