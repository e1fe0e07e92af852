"""The projective line P^1(Z/N) with scalar bookkeeping.

Each class is represented by the lexicographically first pair (c, d)
of its orbit under the units of Z/N. Normalising a pair returns both
the representative and the unit that carries the representative to it,
which is what the character twist of the Manin relations needs.
"""

import logging
import math
from typing import Dict, List, Optional, Tuple

import sympy

try:
    from sympy.core.intfunc import igcdex
except ImportError:  # sympy < 1.13
    from sympy.core.numbers import igcdex

logger = logging.getLogger(__name__)


class P1List:
    """Orbit representatives of primitive pairs mod N under (Z/N)^*."""

    def __init__(self, N: int):
        if N < 1:
            raise ValueError(f"Level must be positive, got {N}")
        self.N = N
        units = [u for u in range(N) if math.gcd(u, N) == 1] if N > 1 else [0]
        self.units = tuple(units)
        self._list: List[Tuple[int, int]] = []
        self._lookup: Dict[Tuple[int, int], Tuple[int, int]] = {}
        stabilizers: List[Tuple[int, ...]] = []
        for c in range(N):
            for d in range(N):
                if (c, d) in self._lookup or math.gcd(math.gcd(c, d), N) != 1:
                    continue
                index = len(self._list)
                self._list.append((c, d))
                stab = []
                for s in units:
                    key = ((s * c) % N, (s * d) % N) if N > 1 else (0, 0)
                    if key == (c, d):
                        stab.append(s)
                    self._lookup.setdefault(key, (index, s))
                stabilizers.append(tuple(stab))
        self.stabilizers = tuple(stabilizers)
        logger.debug(f"P1(Z/{N}) has {len(self._list)} elements")

    def __len__(self) -> int:
        return len(self._list)

    def __getitem__(self, index: int) -> Tuple[int, int]:
        return self._list[index]

    def __iter__(self):
        return iter(self._list)

    def normalize(self, c: int, d: int) -> Optional[Tuple[int, int]]:
        """Return (index, s) with (c, d) = s * representative, or None off P^1."""
        return self._lookup.get((c % self.N, d % self.N) if self.N > 1 else (0, 0))


def p1_size(N: int) -> int:
    """#P^1(Z/N) = N * prod_{p | N} (1 + 1/p)."""
    size = N
    for p in sympy.primefactors(N):
        size = size // p * (p + 1)
    return size


def lift_to_sl2(c: int, d: int, N: int) -> Tuple[int, int, int, int]:
    """A matrix (a, b, c', d') in SL2(Z) whose bottom row reduces to (c, d) mod N."""
    c %= N
    d %= N
    if N == 1:
        return (1, 0, 0, 1)
    c_lift = c if c else N
    d_lift = d
    while math.gcd(c_lift, d_lift) != 1:
        d_lift += N
    # a*d' - b*c' = 1
    x, y, _ = _igcdex(d_lift, c_lift)
    return (x, -y, c_lift, d_lift)


def _igcdex(a: int, b: int) -> Tuple[int, int, int]:
    x, y, g = igcdex(a, b)
    return int(x), int(y), int(g)
