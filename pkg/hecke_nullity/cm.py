"""CM forms: construction from Hecke characters and counting through joint kernels.

A Hecke character of O_D (class number one) with conductor (m) and
infinity type w sends (alpha) to alpha^w eps(alpha), where eps is a
character of (O/m)^* with values in the units of O. Its theta series is
a cusp form of weight w + 1 and level |D| N(m).

CM forms with a_p = 0 are counted without constructing them: a form
killed by T_q for every inert q up to the twisted Sturm bound has CM by
D, and p inert in D forces a_p = 0.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import pandas as pd
import sympy

from hecke_nullity.characters import (
    DirichletCharacter,
    FundamentalDiscriminant,
    is_fundamental,
    is_inert,
    kronecker_character,
    trivial_character,
)
from hecke_nullity.dimension import dim_cusp
from hecke_nullity.exactalg import RationalMatrix, nullspace, rank, rref
from hecke_nullity.exceptions import (
    ClassNumberNotOneError,
    CMOverlapError,
    InsufficientPrecisionError,
    InvariantViolation,
    NonRationalCoefficientError,
    PreconditionError,
    RamifiedPrimeError,
    UnitInconsistencyError,
)
from hecke_nullity.mult import admissible_levels, check_query, get_hecke_matrix, invert_levels, multiplicity_new
from hecke_nullity.qexp import QSeries, sturm_bound
from hecke_nullity.quadratic import QuadraticOrder, ResidueRing
from hecke_nullity.types import OrderElement

logger = logging.getLogger(__name__)

CLASS_NUMBER_ONE = (-3, -4, -7, -8, -11, -19, -43, -67, -163)


def class_number_one_discriminants() -> Tuple[int, ...]:
    return CLASS_NUMBER_ONE


@dataclass(frozen=True)
class HeckeCharacterSpec:
    """Hecke character (alpha) -> alpha^w eps(alpha) of O_D with conductor (m).

    Arguments
    ---------
    D : int
        Negative fundamental discriminant of class number one.
    conductor : OrderElement
        Generator m of the conductor, as (x, y) meaning x + y*omega.
    w : int
        Infinity type; the form has weight w + 1.
    epsilon : tuple of (residue, unit) pairs, optional
        Values of eps on (O/m)^*. When omitted eps is forced by the units.
    allow_ramified : bool
        Permit conductors sharing a prime with D.
    """

    D: int
    conductor: OrderElement
    w: int
    epsilon: Optional[Tuple[Tuple[OrderElement, OrderElement], ...]] = None
    allow_ramified: bool = False
    order: QuadraticOrder = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        FundamentalDiscriminant(self.D)
        if self.w < 1:
            raise PreconditionError(f"Infinity type must be positive, got {self.w}")
        if tuple(self.conductor) == (0, 0):
            raise PreconditionError("Conductor must be nonzero")
        object.__setattr__(self, "conductor", tuple(self.conductor))
        object.__setattr__(self, "order", QuadraticOrder(self.D))

    @property
    def conductor_norm(self) -> int:
        return self.order.norm(self.conductor)

    @property
    def level(self) -> int:
        return abs(self.D) * self.conductor_norm

    @property
    def weight(self) -> int:
        return self.w + 1


def parse_conductor(D: int, text: str) -> OrderElement:
    """Read "u,v" as the element (u + v sqrt(D)) / 2."""
    try:
        u, v = (int(part) for part in text.split(","))
    except ValueError:
        raise PreconditionError(f"Conductor must be given as u,v; got {text!r}")
    try:
        return QuadraticOrder(D).from_sqrt(u, v)
    except ValueError as e:
        raise PreconditionError(str(e))


def _check_class_number(D: int) -> None:
    if D not in CLASS_NUMBER_ONE:
        raise ClassNumberNotOneError(f"Q(sqrt({D})) does not have class number one")


def epsilon_table(spec: HeckeCharacterSpec) -> Dict[OrderElement, OrderElement]:
    """Values of eps on every unit residue modulo the conductor.

    Raises UnitInconsistencyError when eps(u) u^w = 1 fails for a unit u,
    when the table misses a residue, or when it is not multiplicative.
    """
    _check_class_number(spec.D)
    order = spec.order
    ring = ResidueRing(order, spec.conductor)
    residues = ring.unit_residues

    forced: Dict[OrderElement, OrderElement] = {}
    for u in order.units:
        r = ring.reduce(u)
        if r not in residues:
            raise UnitInconsistencyError(f"Unit {u} is not invertible modulo the conductor")
        value = order.power(order.conj(u), spec.w)
        if forced.setdefault(r, value) != value:
            raise UnitInconsistencyError(
                f"Units reducing to {r} force different values of eps for w={spec.w}"
            )

    if spec.epsilon is None:
        table = forced
    else:
        table = {ring.reduce(r): tuple(value) for r, value in spec.epsilon}
        for r, value in forced.items():
            if table.get(r) != value:
                raise UnitInconsistencyError(f"eps({r}) = {table.get(r)} but the units force {value}")
        for value in table.values():
            if order.norm(value) != 1:
                raise UnitInconsistencyError(f"eps takes the non-unit value {value}")

    missing = [r for r in residues if r not in table]
    if missing:
        raise UnitInconsistencyError(f"eps is not determined on residues {missing}; supply its values")
    for r in residues:
        for s in residues:
            product = ring.reduce(order.mul(r, s))
            if table[product] != order.mul(table[r], table[s]):
                raise UnitInconsistencyError(f"eps is not multiplicative at {r} * {s}")
    return table


def cm_qexp(spec: HeckeCharacterSpec, B: int) -> QSeries:
    """q-expansion of the CM form attached to spec, to precision B.

    Arguments
    ---------
    spec : HeckeCharacterSpec

    B : int
        Precision.

    Returns
    -------
    QSeries
        Weight w + 1, level |D| N(m), nebentypus inferred from the coefficients.
    """
    _check_class_number(spec.D)
    if not spec.allow_ramified and math.gcd(spec.conductor_norm, spec.D) != 1:
        raise RamifiedPrimeError(
            f"Conductor {spec.conductor} is not prime to D={spec.D}; set allow_ramified to permit it"
        )
    order = spec.order
    ring = ResidueRing(order, spec.conductor)
    table = epsilon_table(spec)
    nunits = len(order.units)

    sums = [[0, 0] for _ in range(B + 1)]
    for alpha in order.elements_of_norm_at_most(B):
        if not ring.is_unit(alpha):
            continue
        x, y = order.mul(order.power(alpha, spec.w), table[ring.reduce(alpha)])
        n = order.norm(alpha)
        sums[n][0] += x
        sums[n][1] += y

    coefficients = []
    for n in range(1, B + 1):
        x, y = sums[n]
        if y or x % nunits:
            raise NonRationalCoefficientError(f"a_{n} = ({x} + {y} omega) / {nunits} is not an integer")
        coefficients.append(Fraction(x // nunits))

    for q in sympy.primerange(2, B + 1):
        if spec.D % q and is_inert(spec.D, q) and coefficients[q - 1]:
            raise InvariantViolation(f"a_{q} = {coefficients[q - 1]} for q inert in Q(sqrt({spec.D}))")

    series = QSeries(tuple(coefficients), spec.weight, spec.level, "unknown")
    try:
        character = infer_nebentypus(series, spec.weight, spec.level).spec
    except (InsufficientPrecisionError, PreconditionError) as e:
        logger.info(f"Nebentypus left undetermined: {e}")
        character = "unknown"
    logger.debug(f"CM form D={spec.D} m={spec.conductor} w={spec.w} to precision {B}")
    return QSeries(tuple(coefficients), spec.weight, spec.level, character)


def _nebentypus_candidates(level: int, k: int) -> List[DirichletCharacter]:
    candidates = [trivial_character()]
    for d in sympy.divisors(level):
        for D in (-d, d):
            if d > 1 and is_fundamental(D):
                candidates.append(kronecker_character(D))
    return [chi for chi in candidates if chi.parity == (-1) ** k]


def infer_nebentypus(f: QSeries, weight: int, level: int) -> DirichletCharacter:
    """The trivial or quadratic character matching chi(q) q^(k-1) = a_q^2 - a_(q^2).

    Only primes q not dividing the level with q^2 within the precision
    are used. The result is primitive.
    """
    observed = {}
    for q in sympy.primerange(2, math.isqrt(f.precision) + 1):
        if level % q == 0:
            continue
        observed[q] = (f[q] ** 2 - f[q * q]) / Fraction(q ** (weight - 1))
    if not observed:
        raise InsufficientPrecisionError(f"Precision {f.precision} is too small to read the nebentypus")

    matches = [chi for chi in _nebentypus_candidates(level, weight) if all(chi(q) == v for q, v in observed.items())]
    if not matches:
        raise PreconditionError(f"No trivial or quadratic character matches {observed}")
    if len(matches) > 1:
        raise InsufficientPrecisionError(f"Characters {[str(m) for m in matches]} all match to precision {f.precision}")
    return matches[0]


def cm_discriminants(N: int) -> List[FundamentalDiscriminant]:
    """Negative fundamental discriminants D with |D| dividing N, by increasing |D|."""
    return [FundamentalDiscriminant(-d) for d in sympy.divisors(N) if is_fundamental(-d)]


def inert_primes(D: int, bound: int, exclude: int) -> List[int]:
    """Primes q <= bound inert in Q(sqrt(D)) and not dividing exclude."""
    return [q for q in sympy.primerange(2, bound + 1) if exclude % q and D % q and is_inert(D, q)]


def joint_kernel(
    k: int,
    chi: DirichletCharacter,
    M: int,
    primes: Iterable[int],
    cache_dir: Optional[str] = None,
    method: str = "auto",
) -> RationalMatrix:
    """Echelon basis of the common kernel of T_q, q in primes, on S_k(M, chi).

    Rows are coordinates in the plus-space basis of level M.
    """
    d = dim_cusp(M, k, chi.lift(M))
    kernel = RationalMatrix.identity(d)
    for q in primes:
        if kernel.rows == 0:
            break
        T = get_hecke_matrix(M, k, chi, q, cache_dir=cache_dir, method=method).matrix
        combos = nullspace((kernel @ T).transpose())
        if combos.rows == 0:
            kernel = RationalMatrix.zero(0, d)
        else:
            kernel, _ = rref(combos @ kernel)
        logger.debug(f"Joint kernel at M={M} k={k} after T_{q}: dimension {kernel.rows}")
    return kernel


@dataclass(frozen=True)
class CMCountReport:
    """CM newforms with a_p = 0, per discriminant, against the new a_p = 0 count."""

    p: int
    k: int
    N: int
    character: str
    counts: Dict[int, int]
    m_new: int

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def equal(self) -> bool:
        return self.total == self.m_new

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "k": self.k,
            "N": self.N,
            "character": self.character,
            "counts": {str(D): m for D, m in self.counts.items()},
            "total": self.total,
            "m_new": self.m_new,
            "equal": self.equal,
        }


def _check_overlap(kernels: Dict[int, RationalMatrix]) -> None:
    blocks = [K for K in kernels.values() if K.rows]
    if len(blocks) < 2:
        return
    stacked = RationalMatrix.vstack(blocks)
    if rank(stacked) != stacked.rows:
        raise CMOverlapError(f"Joint kernels for discriminants {sorted(kernels)} intersect")


def multiplicity_cm(
    p: int,
    k: int,
    chi: DirichletCharacter,
    N: int,
    cache_dir: Optional[str] = None,
    method: str = "auto",
) -> CMCountReport:
    """Count CM newforms in S_k(N, chi) with a_p = 0.

    Arguments
    ---------
    p : int
        Prime not dividing N.
    k : int
        Weight.
    chi : DirichletCharacter
        Nebentypus.
    N : int
        Level.
    cache_dir : str, optional
        Hecke matrix cache.
    method : str
        Heilbronn set.

    Returns
    -------
    CMCountReport
    """
    chi = check_query(p, k, chi, N)
    m_new = multiplicity_new(p, 0, k, chi, N, cache_dir, method)

    counts: Dict[int, int] = {}
    kernels: Dict[int, RationalMatrix] = {}
    for disc in cm_discriminants(N):
        D = int(disc)
        if not is_inert(D, p):
            logger.info(f"p={p} splits in Q(sqrt({D})); no CM forms by {D} counted")
            counts[D] = 0
            continue
        primes = inert_primes(D, sturm_bound(k, N * D * D), p * N)
        levels = {
            M: joint_kernel(k, chi, M, primes, cache_dir, method)
            for M in admissible_levels(N, chi)
            if M % abs(D) == 0
        }
        count = invert_levels({M: K.rows for M, K in levels.items()}, N)
        if count < 0:
            raise InvariantViolation(f"Negative CM count {count} for D={D} at N={N}")
        counts[D] = count
        kernels[D] = levels[N]
        logger.info(f"CM by {D}: {count} newforms with a_{p} = 0 at N={N} k={k}")

    _check_overlap(kernels)
    report = CMCountReport(p=p, k=k, N=N, character=chi.spec, counts=counts, m_new=m_new)
    if report.total > m_new:
        raise InvariantViolation(f"m_cm = {report.total} exceeds m_new = {m_new} at p={p} N={N} k={k}")
    return report


def verify_conjecture(
    p: int,
    chi: DirichletCharacter,
    N: int,
    k_range: Sequence[int],
    cache_dir: Optional[str] = None,
    method: str = "auto",
) -> pd.DataFrame:
    """Table of (k, m_new, m_cm, equal) over the weights in k_range of the right parity."""
    rows = []
    for k in k_range:
        if chi.parity != (-1) ** k or k < 2:
            continue
        report = multiplicity_cm(p, k, chi, N, cache_dir, method)
        if not report.equal:
            logger.warning(f"p={p} N={N} k={k}: m_new = {report.m_new} but m_cm = {report.total}")
        rows.append({"k": k, "m_new": report.m_new, "m_cm": report.total, "equal": report.equal})
    return pd.DataFrame(rows, columns=["k", "m_new", "m_cm", "equal"], dtype=object)
