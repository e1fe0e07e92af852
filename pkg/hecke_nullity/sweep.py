"""Sweeps over (p, N, k) grids for the weight bound and the CM count.

Each grid point becomes one row: the a_p multiplicities, the reduced
weight and its multiplicity, the bound verdict and the CM count. Rows
always come back in grid order.
"""

import concurrent.futures
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import pandas as pd
import sympy
from tqdm.auto import tqdm

from hecke_nullity.characters import parse_character
from hecke_nullity.cm import multiplicity_cm
from hecke_nullity.exactalg import format_rational, to_rational
from hecke_nullity.exceptions import NotPrimeError, PDividesLevelError, PreconditionError
from hecke_nullity.mult import multiplicity_report
from hecke_nullity.weightred import verify_bound

logger = logging.getLogger(__name__)

COLUMNS = [
    "p",
    "N",
    "k",
    "character",
    "lambda",
    "dim_full",
    "dim_new",
    "m_full",
    "m_new",
    "k_prime",
    "m_new_kprime",
    "theorem",
    "m_cm",
    "conjecture_equal",
]

FORMATS = ("csv", "json")


def parse_int_list(text: str) -> Tuple[int, ...]:
    """Parse "2,5,7" into a tuple of ints."""
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise PreconditionError(f"Expected a comma-separated list of integers, got {text!r}")


def parse_k_range(text: str) -> Tuple[int, ...]:
    """Parse a weight range "lo:hi" (inclusive) or a comma list. Empty text gives no weights."""
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        lo, _, hi = text.partition(":")
        try:
            return tuple(range(int(lo), int(hi) + 1))
        except ValueError:
            raise PreconditionError(f"Bad weight range {text!r}")
    return parse_int_list(text)


@dataclass(frozen=True)
class SweepConfig:
    """A validated sweep request.

    Arguments
    ---------
    p_list : tuple of int
        Primes.
    N_list : tuple of int
        Levels; no p may divide any N.
    k_values : tuple of int
        Candidate weights; those of the wrong parity for the character are skipped.
    character : str
        Character spec.
    lam : Fraction
        Eigenvalue whose multiplicity is reported.
    fmt : str
        "csv" or "json".
    cache_dir : str, optional
        Hecke matrix cache.
    jobs : int
        Worker processes; 1 runs inline.
    cm : bool
        Whether to count CM forms.
    """

    p_list: Tuple[int, ...]
    N_list: Tuple[int, ...]
    k_values: Tuple[int, ...]
    character: str = "trivial"
    lam: Fraction = Fraction(0)
    fmt: str = "csv"
    cache_dir: Optional[str] = None
    jobs: int = 1
    cm: bool = True

    def __post_init__(self):
        object.__setattr__(self, "lam", to_rational(self.lam))
        for p in self.p_list:
            if not sympy.isprime(p):
                raise NotPrimeError(f"{p} is not prime")
            for N in self.N_list:
                if N % p == 0:
                    raise PDividesLevelError(f"p={p} divides N={N}")
        for N in self.N_list:
            if N < 1:
                raise PreconditionError(f"Levels must be positive, got {N}")
            parse_character(self.character, N)
        if self.fmt not in FORMATS:
            raise PreconditionError(f"Unknown format {self.fmt!r}")
        if self.jobs < 1:
            raise PreconditionError(f"jobs must be at least 1, got {self.jobs}")

    def grid(self) -> List[Tuple[int, int, int]]:
        """Grid points (p, N, k) in output order."""
        parity = parse_character(self.character).parity
        weights = [k for k in self.k_values if k >= 2 and (-1) ** k == parity]
        return [(p, N, k) for p in self.p_list for N in self.N_list for k in weights]

    def to_dict(self) -> dict:
        return {
            "p": list(self.p_list),
            "N": list(self.N_list),
            "k": list(self.k_values),
            "character": self.character,
            "lambda": format_rational(self.lam),
            "cm": self.cm,
        }


def sweep_row(
    p: int,
    N: int,
    k: int,
    character: str,
    lam: Fraction,
    cache_dir: Optional[str] = None,
    cm: bool = True,
) -> dict:
    """Compute one sweep row.

    The weight-reduction and CM columns count eigenvalue 0 only and are
    left as None for any other lam.
    """
    chi = parse_character(character, N)
    report = multiplicity_report(p, lam, k, chi, N, cache_dir)
    row = {
        "p": p,
        "N": N,
        "k": k,
        "character": chi.spec,
        "lambda": format_rational(lam),
        "dim_full": report.dim_full,
        "dim_new": report.dim_new,
        "m_full": report.m_full,
        "m_new": report.m_new,
        "k_prime": None,
        "m_new_kprime": None,
        "theorem": None,
        "m_cm": None,
        "conjecture_equal": None,
    }
    if lam == 0 and p >= 5 and k % 2 == 0:
        check = verify_bound(p, chi, N, k, cache_dir)
        row.update(k_prime=check.k_prime, m_new_kprime=check.m_kprime_new, theorem=check.holds)
    if lam == 0 and cm:
        counted = multiplicity_cm(p, k, chi, N, cache_dir)
        row.update(m_cm=counted.total, conjecture_equal=counted.equal)
    logger.info(f"Row p={p} N={N} k={k}: {row}")
    return row


def run_sweep(config: SweepConfig, progress: bool = False) -> pd.DataFrame:
    """Run every grid point of a sweep.

    Arguments
    ---------
    config : SweepConfig

    progress : bool
        Show a progress bar.

    Returns
    -------
    pd.DataFrame
        One row per grid point, in grid order, with exact values.
    """
    points = config.grid()
    logger.info(f"Sweeping {len(points)} grid points with {config.jobs} job(s)")
    results = {}
    with tqdm(total=len(points), disable=not progress) as bar:
        if config.jobs == 1:
            for point in points:
                results[point] = sweep_row(*point, config.character, config.lam, config.cache_dir, config.cm)
                bar.update(1)
        else:
            with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as executor:
                futures = {
                    executor.submit(
                        sweep_row, *point, config.character, config.lam, config.cache_dir, config.cm
                    ): point
                    for point in points
                }
                for future in concurrent.futures.as_completed(futures):
                    results[futures[future]] = future.result()
                    bar.update(1)
    rows = [results[point] for point in points]
    return pd.DataFrame(rows, columns=COLUMNS, dtype=object)


def theorem_failures(table: pd.DataFrame) -> pd.DataFrame:
    """Rows whose bound verdict is False."""
    if table.empty:
        return table
    return table[table["theorem"].map(lambda v: v is False)]
