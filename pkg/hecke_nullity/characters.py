"""Quadratic and trivial Dirichlet characters.

Characters are value tables on residues mod their modulus. Only the
trivial character and Kronecker characters of fundamental discriminants
are supported, so every value lies in {-1, 0, 1}.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import sympy
from sympy.ntheory import jacobi_symbol
from sympy.ntheory.factor_ import core

from hecke_nullity.exceptions import CharacterSpecError, NotPrimeError, RamifiedPrimeError

logger = logging.getLogger(__name__)

TRIVIAL = "trivial"
KRONECKER = "kronecker"


def kronecker(D: int, n: int) -> int:
    """The Kronecker symbol (D | n)."""
    if n == 0:
        return 1 if D in (1, -1) else 0
    result = 1
    if n < 0:
        n = -n
        if D < 0:
            result = -result
    twos = 0
    while n % 2 == 0:
        n //= 2
        twos += 1
    if twos:
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5) and twos % 2 == 1:
            result = -result
    if n == 1:
        return result
    return result * int(jacobi_symbol(D % n, n))


def is_fundamental(D: int) -> bool:
    """Whether D is the discriminant of a quadratic field."""
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return core(abs(D)) == abs(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and core(abs(m)) == abs(m)
    return False


def fundamental_discriminant(d: int) -> int:
    """Discriminant of Q(sqrt(d)) for a squarefree d != 0, 1.

    A value that is already a fundamental discriminant is returned as is.
    """
    if is_fundamental(d):
        return d
    if d in (0, 1) or core(abs(d)) != abs(d):
        raise CharacterSpecError(f"{d} is neither squarefree nor a fundamental discriminant")
    return d if d % 4 == 1 else 4 * d


@dataclass(frozen=True)
class FundamentalDiscriminant:
    """Discriminant of an imaginary quadratic field."""

    D: int

    def __post_init__(self):
        if self.D >= 0 or not is_fundamental(self.D):
            raise CharacterSpecError(f"{self.D} is not a negative fundamental discriminant")

    def __int__(self) -> int:
        return self.D

    def __abs__(self) -> int:
        return -self.D


def _check_prime(q: int) -> None:
    if not sympy.isprime(q):
        raise NotPrimeError(f"{q} is not prime")


def is_inert(D: int, q: int) -> bool:
    """Whether the prime q stays prime in Q(sqrt(D))."""
    D = int(D)
    _check_prime(q)
    if D % q == 0:
        raise RamifiedPrimeError(f"{q} ramifies in Q(sqrt({D}))")
    return kronecker(D, q) == -1


@dataclass(frozen=True)
class DirichletCharacter:
    """A trivial or Kronecker character with an explicit value table.

    Arguments
    ---------
    modulus : int
        Positive modulus; a multiple of |D| for Kronecker characters.
    kind : str
        "trivial" or "kronecker".
    D : int, optional
        Fundamental discriminant of a Kronecker character.
    """

    modulus: int
    kind: str = TRIVIAL
    D: Optional[int] = None
    table: Tuple[int, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if self.modulus < 1:
            raise CharacterSpecError(f"Modulus must be positive, got {self.modulus}")
        if self.kind == TRIVIAL:
            if self.D is not None:
                raise CharacterSpecError("The trivial character carries no discriminant")
            values = tuple(1 if math.gcd(n, self.modulus) == 1 else 0 for n in range(self.modulus))
        elif self.kind == KRONECKER:
            if self.D is None or self.D == 1 or not is_fundamental(self.D):
                raise CharacterSpecError(f"{self.D} is not a fundamental discriminant")
            if self.modulus % abs(self.D):
                raise CharacterSpecError(f"Modulus {self.modulus} is not a multiple of |{self.D}|")
            values = tuple(
                kronecker(self.D, n) if math.gcd(n, self.modulus) == 1 else 0 for n in range(self.modulus)
            )
        else:
            raise CharacterSpecError(f"Unknown character kind {self.kind!r}")
        object.__setattr__(self, "table", values)

    def __call__(self, n: int) -> int:
        return self.table[n % self.modulus]

    @property
    def parity(self) -> int:
        return self(-1)

    @property
    def conductor(self) -> int:
        return 1 if self.kind == TRIVIAL else abs(self.D)

    def is_trivial(self) -> bool:
        return self.kind == TRIVIAL

    def lift(self, modulus: int) -> "DirichletCharacter":
        """The same primitive character viewed modulo a multiple of its conductor."""
        if modulus % self.conductor:
            raise CharacterSpecError(f"Conductor {self.conductor} does not divide {modulus}")
        if modulus == self.modulus:
            return self
        return DirichletCharacter(modulus, self.kind, self.D)

    @property
    def spec(self) -> str:
        """Spec string, without the modulus suffix when it is the natural one."""
        base = TRIVIAL if self.kind == TRIVIAL else f"{KRONECKER}:{self.D}"
        return base

    def __str__(self) -> str:
        if self.modulus == self.conductor:
            return self.spec
        return f"{self.spec};mod:{self.modulus}"


def trivial_character(modulus: int = 1) -> DirichletCharacter:
    return DirichletCharacter(modulus)


def kronecker_character(D: int, modulus: Optional[int] = None) -> DirichletCharacter:
    D = fundamental_discriminant(D)
    return DirichletCharacter(modulus if modulus is not None else abs(D), KRONECKER, D)


def parse_character(spec: str, modulus: Optional[int] = None) -> DirichletCharacter:
    """Parse "trivial", "kronecker:D" or either with a ";mod:N" suffix.

    Arguments
    ---------
    spec : str
        Character spec string.
    modulus : int, optional
        Modulus to lift to when the spec has no explicit one.

    Returns
    -------
    DirichletCharacter
    """
    parts = [s.strip() for s in spec.strip().split(";") if s.strip()]
    if not parts:
        raise CharacterSpecError("Empty character spec")
    explicit_modulus = None
    for extra in parts[1:]:
        key, _, value = extra.partition(":")
        if key != "mod":
            raise CharacterSpecError(f"Unknown character option {extra!r}")
        try:
            explicit_modulus = int(value)
        except ValueError:
            raise CharacterSpecError(f"Bad modulus in {spec!r}")

    head = parts[0].lower()
    if head == TRIVIAL:
        chi = trivial_character()
    elif head.startswith(KRONECKER + ":"):
        try:
            d = int(head.split(":", 1)[1])
        except ValueError:
            raise CharacterSpecError(f"Bad discriminant in {spec!r}")
        chi = kronecker_character(d)
    else:
        raise CharacterSpecError(f"Cannot parse character spec {spec!r}")

    target = explicit_modulus if explicit_modulus is not None else modulus
    if target is not None:
        chi = chi.lift(target)
    logger.debug(f"Parsed character {spec!r} as {chi}")
    return chi


def conductor(chi: DirichletCharacter) -> int:
    return chi.conductor
