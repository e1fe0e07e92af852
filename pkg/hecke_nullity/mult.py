"""Eigenvalue multiplicities of T_p on cusp forms.

m_full is the nullity of T_p - lambda on the plus cuspidal symbols,
which has the dimension of S_k(N, chi). m_new comes from m_full at every
admissible divisor level by inverting the old-form multiplicities
sigma_0(N/M).
"""

import collections
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from hecke_nullity import io
from hecke_nullity.characters import DirichletCharacter
from hecke_nullity.dimension import check_parity, dim_cusp
from hecke_nullity.exactalg import (
    Scalar,
    charpoly,
    format_rational,
    format_slope,
    newton_slopes,
    nullity,
    to_rational,
)
from hecke_nullity.exceptions import InvariantViolation, NotPrimeError, PDividesLevelError
from hecke_nullity.modsym import HeckeMatrix, build_space, hecke_matrix
from hecke_nullity.types import INFINITE_SLOPE, Slope

logger = logging.getLogger(__name__)


def beta(n: int) -> int:
    """Dirichlet inverse of the divisor-count function."""
    out = 1
    for _, e in sympy.factorint(n).items():
        if e == 1:
            out *= -2
        elif e >= 3:
            return 0
    return out


def sigma0(n: int) -> int:
    return int(sympy.divisor_count(n))


def admissible_levels(N: int, chi: DirichletCharacter) -> List[int]:
    """Divisors M of N at which chi is defined, ascending."""
    return [M for M in sympy.divisors(N) if M % chi.conductor == 0]


def check_prime_level(p: int, N: int) -> None:
    if not sympy.isprime(p):
        raise NotPrimeError(f"{p} is not prime")
    if N % p == 0:
        raise PDividesLevelError(f"p={p} divides N={N}")


def get_hecke_matrix(
    N: int,
    k: int,
    chi: DirichletCharacter,
    q: int,
    sign: int = 1,
    cache_dir: Optional[str] = None,
    method: str = "auto",
) -> HeckeMatrix:
    """T_q on S_k(N, chi), read from the cache when possible.

    Arguments
    ---------
    N : int
        Level.
    k : int
        Weight.
    chi : DirichletCharacter
        Nebentypus; lifted to N.
    q : int
        Prime.
    sign : int
        Star eigenvalue of the symbol subspace.
    cache_dir : str, optional
        Cache directory or URL. Nothing is cached when omitted.
    method : str
        Heilbronn set used on a cache miss.

    Returns
    -------
    HeckeMatrix
    """
    chi = chi.lift(N)
    cached = io.load_cached_hecke_matrix(N, k, str(chi), sign, q, cache_dir)
    if cached is not None:
        return cached
    matrix = hecke_matrix(build_space(N, k, chi), q, sign, method)
    if cache_dir:
        io.write_hecke_matrix(matrix, cache_dir)
    return matrix


def _matrix_key(N: int, k: int, chi: DirichletCharacter, q: int) -> str:
    return io.make_name("hecke", N, k, str(chi.lift(N)), 1, q)


def check_query(p: int, k: int, chi: DirichletCharacter, N: int) -> DirichletCharacter:
    check_prime_level(p, N)
    chi = chi.lift(N)
    check_parity(k, chi)
    return chi


def multiplicity_full(
    p: int,
    lam: Scalar,
    k: int,
    chi: DirichletCharacter,
    N: int,
    cache_dir: Optional[str] = None,
    method: str = "auto",
) -> int:
    """Multiplicity of lam as an eigenvalue of T_p on S_k(N, chi).

    Arguments
    ---------
    p : int
        Prime not dividing N.
    lam : int, str or Fraction
        Rational eigenvalue.
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
    int
    """
    chi = check_query(p, k, chi, N)
    if dim_cusp(N, k, chi) == 0:
        return 0
    T = get_hecke_matrix(N, k, chi, p, cache_dir=cache_dir, method=method).matrix
    m = nullity(T.shift(to_rational(lam)))
    logger.debug(f"m_full(p={p}, lambda={lam}, k={k}, {chi}, N={N}) = {m}")
    return m


def levels_full(
    p: int,
    lam: Scalar,
    k: int,
    chi: DirichletCharacter,
    N: int,
    cache_dir: Optional[str] = None,
    method: str = "auto",
) -> Dict[int, int]:
    """m_full at every admissible divisor level of N."""
    check_query(p, k, chi, N)
    return {M: multiplicity_full(p, lam, k, chi, M, cache_dir, method) for M in admissible_levels(N, chi)}


def invert_levels(values: Dict[int, int], N: int) -> int:
    """The new part at N of a function given at every admissible level M | N."""
    return sum(beta(N // M) * value for M, value in values.items() if N % M == 0)


def multiplicity_new(
    p: int,
    lam: Scalar,
    k: int,
    chi: DirichletCharacter,
    N: int,
    cache_dir: Optional[str] = None,
    method: str = "auto",
) -> int:
    """Number of newforms of level exactly N with a_p = lam."""
    values = levels_full(p, lam, k, chi, N, cache_dir, method)
    m = invert_levels(values, N)
    if m < 0:
        raise InvariantViolation(f"Negative new multiplicity {m} from level multiplicities {values}")
    return m


def dim_new(N: int, k: int, chi: DirichletCharacter) -> int:
    return sum(beta(N // M) * dim_cusp(M, k, chi) for M in admissible_levels(N, chi))


def slope_profile(
    p: int,
    k: int,
    chi: DirichletCharacter,
    N: int,
    cache_dir: Optional[str] = None,
    method: str = "auto",
) -> Tuple[Slope, ...]:
    """Newton slopes at p of the characteristic polynomial of T_p."""
    chi = check_query(p, k, chi, N)
    if dim_cusp(N, k, chi) == 0:
        return ()
    T = get_hecke_matrix(N, k, chi, p, cache_dir=cache_dir, method=method).matrix
    return newton_slopes(charpoly(T), p)


def check_divisor_consistency(values: Dict[int, int], N: int) -> bool:
    """m_full(N) = sum over M of sigma_0(N/M) m_new(M), with every m_new(M) >= 0."""
    new = {M: invert_levels({L: v for L, v in values.items() if M % L == 0}, M) for M in values}
    if any(m < 0 for m in new.values()):
        return False
    return values[N] == sum(sigma0(N // M) * m for M, m in new.items())


@dataclass(frozen=True)
class MultiplicityReport:
    """Multiplicity of lam under T_p on S_k(N, chi), with its new part."""

    p: int
    lam: Fraction
    k: int
    N: int
    character: str
    dim_full: int
    dim_new: int
    m_full: int
    m_new: int
    slopes: Tuple[Slope, ...]
    levels: Dict[int, int] = field(default_factory=dict)
    provenance: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "lambda": format_rational(self.lam),
            "k": self.k,
            "N": self.N,
            "character": self.character,
            "dimensions": {"full": self.dim_full, "new": self.dim_new},
            "multiplicity": {"full": self.m_full, "new": self.m_new},
            "levels": {str(M): m for M, m in sorted(self.levels.items())},
            "slopes": [format_slope(s) for s in self.slopes],
            "provenance": list(self.provenance),
        }


def multiplicity_report(
    p: int,
    lam: Scalar,
    k: int,
    chi: DirichletCharacter,
    N: int,
    cache_dir: Optional[str] = None,
    method: str = "auto",
) -> MultiplicityReport:
    """Full and new multiplicities, slopes and per-level data for one query.

    Raises InvariantViolation when the divisor consistency check fails,
    when a dimension bound is broken, or when the slope-infinity count
    disagrees with the eigenvalue-0 multiplicity.
    """
    lam = to_rational(lam)
    chi = check_query(p, k, chi, N)
    values = levels_full(p, lam, k, chi, N, cache_dir, method)
    m_full = values[N]
    m_new = invert_levels(values, N)
    full_dim = dim_cusp(N, k, chi)
    new_dim = dim_new(N, k, chi)
    slopes = slope_profile(p, k, chi, N, cache_dir, method)

    if not check_divisor_consistency(values, N):
        raise InvariantViolation(f"Level multiplicities {values} are not divisor consistent at N={N}")
    if not (0 <= m_new <= new_dim <= full_dim and m_full <= full_dim):
        raise InvariantViolation(
            f"Bounds broken: m_full={m_full}, m_new={m_new}, dim_new={new_dim}, dim_full={full_dim}"
        )
    if lam == 0 and sum(1 for s in slopes if s == INFINITE_SLOPE) != m_full:
        raise InvariantViolation(f"Slope profile {slopes} does not match m_full={m_full}")

    provenance = tuple(_matrix_key(M, k, chi, p) for M in values if dim_cusp(M, k, chi) > 0)
    logger.info(f"p={p} lambda={lam} k={k} {chi} N={N}: m_full={m_full} m_new={m_new}")
    return MultiplicityReport(
        p=p,
        lam=lam,
        k=k,
        N=N,
        character=chi.spec,
        dim_full=full_dim,
        dim_new=new_dim,
        m_full=m_full,
        m_new=m_new,
        slopes=slopes,
        levels=values,
        provenance=provenance,
    )


def boundedness_summary(rows: Sequence[dict]) -> List[dict]:
    """Per (p, N, character), the largest m_new over k and the least k attaining it.

    Arguments
    ---------
    rows : list of dict
        Sweep rows with keys "p", "N", "character", "k", "m_new".

    Returns
    -------
    list of dict
        One summary per group, in order of first appearance.
    """
    groups: Dict[tuple, List[dict]] = collections.OrderedDict()
    for row in rows:
        groups.setdefault((row["p"], row["N"], row.get("character", "trivial")), []).append(row)

    summaries = []
    for (p, N, character), members in groups.items():
        best = max(int(r["m_new"]) for r in members)
        first_k = min(int(r["k"]) for r in members if int(r["m_new"]) == best)
        summaries.append(
            {
                "p": p,
                "N": N,
                "character": character,
                "max_m_new": best,
                "first_k": first_k,
                "p_plus_1": p + 1,
                "attained_by_p_plus_1": first_k <= p + 1,
            }
        )
    return summaries
