"""Arithmetic in the maximal order of an imaginary quadratic field.

Elements are pairs (x, y) meaning x + y*w with w = (D + sqrt(D)) / 2,
so w^2 = D*w - (D^2 - D)/4.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, List, Tuple

try:
    from sympy.core.intfunc import igcdex
except ImportError:  # sympy < 1.13
    from sympy.core.numbers import igcdex

from hecke_nullity.types import OrderElement

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadraticOrder:
    """O_D for a negative fundamental discriminant D."""

    D: int

    @property
    def c(self) -> int:
        return (self.D * self.D - self.D) // 4

    def mul(self, a: OrderElement, b: OrderElement) -> OrderElement:
        x1, y1 = a
        x2, y2 = b
        return (x1 * x2 - self.c * y1 * y2, x1 * y2 + x2 * y1 + self.D * y1 * y2)

    def power(self, a: OrderElement, e: int) -> OrderElement:
        out = (1, 0)
        for _ in range(e):
            out = self.mul(out, a)
        return out

    def norm(self, a: OrderElement) -> int:
        x, y = a
        return x * x + self.D * x * y + self.c * y * y

    def conj(self, a: OrderElement) -> OrderElement:
        x, y = a
        return (x + self.D * y, -y)

    def from_sqrt(self, u: int, v: int) -> OrderElement:
        """The element (u + v sqrt(D)) / 2, which must be integral."""
        # (u + v sqrt(D)) / 2 = (u - vD)/2 + v w
        if (u - v * self.D) % 2:
            raise ValueError(f"({u} + {v} sqrt({self.D}))/2 is not in O_D")
        return ((u - v * self.D) // 2, v)

    def elements_of_norm_at_most(self, B: int) -> Iterator[OrderElement]:
        """All elements with 1 <= norm <= B."""
        # 4 N = (2x + D y)^2 + |D| y^2
        ymax = math.isqrt(4 * B // -self.D) if B > 0 else 0
        for y in range(-ymax, ymax + 1):
            rest = 4 * B + self.D * y * y
            if rest < 0:
                continue
            root = math.isqrt(rest)
            # |2x + D y| <= root
            lo = -((root + self.D * y) // 2) - 1
            hi = (root - self.D * y) // 2 + 1
            for x in range(lo, hi + 1):
                n = self.norm((x, y))
                if 1 <= n <= B:
                    yield (x, y)

    @cached_property
    def units(self) -> Tuple[OrderElement, ...]:
        return tuple(sorted(a for a in self.elements_of_norm_at_most(1)))


def _hnf(v1: OrderElement, v2: OrderElement) -> Tuple[int, int, int]:
    """Hermite form (a, b, g) of the lattice spanned by v1, v2: basis (a, 0), (b, g)."""
    x1, y1 = v1
    x2, y2 = v2
    s, t, g = (int(z) for z in igcdex(y1, y2))
    if g == 0:
        raise ValueError("Degenerate lattice")
    bx = s * x1 + t * x2
    ax = (y2 // g) * x1 - (y1 // g) * x2
    a = abs(ax)
    if a == 0:
        raise ValueError("Degenerate lattice")
    return a, bx % a, abs(g)


class ResidueRing:
    """O_D / (m) for a nonzero element m, with canonical residues."""

    def __init__(self, order: QuadraticOrder, modulus: OrderElement):
        if modulus == (0, 0):
            raise ValueError("Modulus must be nonzero")
        self.order = order
        self.modulus = modulus
        self.norm = order.norm(modulus)
        a, b, g = _hnf(modulus, order.mul(modulus, (0, 1)))
        if a * g != self.norm:
            raise ValueError(f"Lattice index {a * g} does not match norm {self.norm}")
        self._a, self._b, self._g = a, b, g

    def reduce(self, z: OrderElement) -> OrderElement:
        x, y = z
        q = y // self._g
        x -= q * self._b
        y -= q * self._g
        return (x % self._a, y)

    def elements(self) -> List[OrderElement]:
        return sorted({self.reduce((x, y)) for x in range(self._a) for y in range(self._g)})

    @cached_property
    def unit_residues(self) -> Tuple[OrderElement, ...]:
        one = self.reduce((1, 0))
        elements = self.elements()
        units = []
        for r in elements:
            if any(self.reduce(self.order.mul(r, s)) == one for s in elements):
                units.append(r)
        return tuple(units)

    def is_unit(self, z: OrderElement) -> bool:
        return self.reduce(z) in self._unit_set

    @cached_property
    def _unit_set(self) -> frozenset:
        return frozenset(self.unit_residues)
