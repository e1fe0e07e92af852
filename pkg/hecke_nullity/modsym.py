"""Modular symbols for Gamma0(N) with a quadratic character.

A space is presented by Manin symbols [X^j Y^(k-2-j), (c:d)] modulo the
two-term relation x + xS = 0, the three-term relation x + xT + xT^2 = 0
and the character scalars [P, (lc, ld)] = chi(l) [P, (c, d)]. The
cuspidal subspace is the kernel of the boundary map to cusp symbols,
and Hecke matrices are computed on its +1 part for the star involution.

Quotient vectors are dicts {basis position: Fraction}; basis positions
index the surviving raw generators in (j, P^1 index) order.
"""

import collections
import hashlib
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple

import sympy

from hecke_nullity.characters import DirichletCharacter
from hecke_nullity.dimension import check_parity, dim_cusp
from hecke_nullity.exactalg import (
    RationalMatrix,
    charpoly,
    coordinates_in_rowspace,
    deligne_check,
    DeligneCheck,
    nullspace,
    rref,
)
from hecke_nullity.exceptions import InvariantViolation, NotPrimeError, PDividesLevelError, UnsupportedWeightError
from hecke_nullity.heilbronn import heilbronn
from hecke_nullity.p1 import P1List, lift_to_sl2
from hecke_nullity.types import Matrix2

logger = logging.getLogger(__name__)

# Bumped whenever a cached matrix would change meaning.
SCHEMA_VERSION = 1

# Counts of expensive operations, reported by the CLI at -vv.
OPERATION_COUNTS: collections.Counter = collections.Counter()

SIGMA: Matrix2 = (0, -1, 1, 0)
TAU: Matrix2 = (0, -1, 1, -1)
TAU_SQUARED: Matrix2 = (-1, 1, -1, 0)

Vector = Dict[int, Fraction]


@lru_cache(maxsize=4096)
def _polynomial_action(k: int, g: Matrix2) -> Tuple[Tuple[int, ...], ...]:
    """Row j holds the coefficients of X^m Y^(k-2-m) in (aX+bY)^j (cX+dY)^(k-2-j)."""
    a, b, c, d = g
    w = k - 2

    def powers(x: int, y: int) -> List[List[int]]:
        # out[i][m] = coefficient of X^m Y^(i-m) in (xX + yY)^i
        return [[comb(i, m) * x**m * y ** (i - m) for m in range(i + 1)] for i in range(w + 1)]

    left = powers(a, b)
    right = powers(c, d)
    rows = []
    for j in range(w + 1):
        u, v = left[j], right[w - j]
        row = [0] * (w + 1)
        for s, x in enumerate(u):
            if x:
                for t, y in enumerate(v):
                    if y:
                        row[s + t] += x * y
        rows.append(tuple(row))
    return tuple(rows)


def _add_scaled(target: Vector, source: Vector, factor) -> None:
    for key, value in source.items():
        new = target.get(key, 0) + factor * value
        if new:
            target[key] = new
        else:
            target.pop(key, None)


def _sparse_rref(rows: Sequence[Dict[int, int]]) -> Dict[int, Vector]:
    """Fully reduced echelon form of sparse rows, keyed by pivot column."""
    pivots: Dict[int, Vector] = {}
    for raw in rows:
        r: Vector = {c: Fraction(v) for c, v in raw.items() if v}
        while r:
            c = min(r)
            prow = pivots.get(c)
            if prow is None:
                inv = 1 / r[c]
                pivots[c] = {j: v * inv for j, v in r.items()}
                break
            _add_scaled(r, prow, -r[c])
    for c in sorted(pivots, reverse=True):
        row = pivots[c]
        for j in sorted(j for j in row if j != c and j in pivots):
            factor = row.get(j)
            if factor:
                _add_scaled(row, pivots[j], -factor)
    return pivots


class _CuspTable:
    """Cusp classes {g(oo)} for Gamma0(N) with the character scalar."""

    def __init__(self, N: int, chi: DirichletCharacter):
        self.N = N
        self.chi = chi
        self.reps: List[Matrix2] = []
        self.killed: List[bool] = []

    def _scalars(self, h2: Matrix2, h1: Matrix2):
        """chi(gamma) for every gamma = h2 T^y h1^-1 in Gamma0(N), y mod N."""
        a1, b1, c1, d1 = h1
        _, _, c2, d2 = h2
        for y in range(self.N):
            lower = c2 * y + d2
            if (c2 * d1 - c1 * lower) % self.N == 0:
                yield self.chi(a1 * lower - c2 * b1)

    def coordinate(self, g: Matrix2) -> Optional[Tuple[int, int]]:
        """(cusp index, scalar) with e(g) = scalar * e(rep), or None if e(g) = 0."""
        for index, rep in enumerate(self.reps):
            scalar = next(self._scalars(g, rep), None)
            if scalar is not None:
                return None if self.killed[index] else (index, scalar)
        killed = any(s != 1 for s in self._scalars(g, g))
        self.reps.append(g)
        self.killed.append(killed)
        return None if killed else (len(self.reps) - 1, 1)

    def __len__(self) -> int:
        return len(self.reps)


@dataclass(frozen=True)
class HeckeMatrix:
    """Matrix of T_n on a signed cuspidal subspace, rows are images of basis vectors."""

    n: int
    matrix: RationalMatrix
    level: int
    weight: int
    character: str
    sign: int
    fingerprint: str
    heilbronn: str = field(default="auto", compare=False)

    @property
    def dimension(self) -> int:
        return self.matrix.rows

    def provenance(self) -> dict:
        return {
            "n": self.n,
            "level": self.level,
            "weight": self.weight,
            "character": self.character,
            "sign": self.sign,
            "fingerprint": self.fingerprint,
            "schema": SCHEMA_VERSION,
        }


class ManinSymbolSpace:
    """Presented space of weight-k modular symbols for Gamma0(N) and chi.

    Use build_space rather than constructing directly; it validates the
    input and caches spaces per process.
    """

    def __init__(self, N: int, k: int, chi: DirichletCharacter):
        self.N = N
        self.k = k
        self.character = chi
        self.p1 = P1List(N)
        self.n1 = len(self.p1)
        self.ngens = (k - 1) * self.n1
        self._hecke_images: Dict[Tuple[int, str], Dict[int, Vector]] = {}
        self._signed: Dict[int, Tuple[RationalMatrix, Tuple[int, ...]]] = {}

        self._present()
        self._cut_cuspidal()
        OPERATION_COUNTS["space built"] += 1
        logger.info(
            f"Built modular symbols N={N} k={k} chi={chi}: {self.ngens} generators, "
            f"dimension {self.dimension}, cuspidal {self.cuspidal_basis.rows}"
        )

    # Presentation.

    def generator(self, index: int) -> Tuple[int, Tuple[int, int]]:
        j, idx = divmod(index, self.n1)
        return j, self.p1[idx]

    def act(self, index: int, g: Matrix2) -> List[Tuple[int, int]]:
        """Raw generator combination for generator * g."""
        j, idx = divmod(index, self.n1)
        c, d = self.p1[idx]
        a11, a12, a21, a22 = g
        found = self.p1.normalize(c * a11 + d * a21, c * a12 + d * a22)
        if found is None:
            return []
        idx2, s = found
        scalar = self.character(s)
        row = _polynomial_action(self.k, g)[j]
        return [(m * self.n1 + idx2, scalar * coef) for m, coef in enumerate(row) if coef]

    def _present(self) -> None:
        chi = self.character
        dead_classes = {
            idx for idx, stab in enumerate(self.p1.stabilizers) if any(chi(t) != 1 for t in stab)
        }

        # Two-term relations: mod[i] = (rep, sign) with x_i = sign * x_rep.
        mod: List[Optional[Tuple[int, int]]] = [None] * self.ngens
        for i in range(self.ngens):
            if i % self.n1 in dead_classes:
                mod[i] = (i, 0)
        for i in range(self.ngens):
            if mod[i] is not None:
                continue
            ((j, c),) = self.act(i, SIGMA)
            if j == i:
                mod[i] = (i, 1) if c == -1 else (i, 0)
            elif mod[j] is not None:
                rep, sign = mod[j]
                mod[i] = (rep, -c * sign)
            else:
                mod[i] = (i, 1)
                mod[j] = (i, -c)
        free1 = [i for i in range(self.ngens) if mod[i] == (i, 1)]
        column = {g: col for col, g in enumerate(free1)}

        # Three-term relations in the coordinates left by the two-term ones.
        rows = []
        for i in range(self.ngens):
            row: Dict[int, int] = collections.defaultdict(int)
            for g, coef in [(i, 1)] + self.act(i, TAU) + self.act(i, TAU_SQUARED):
                rep, sign = mod[g]
                if sign:
                    row[column[rep]] += sign * coef
            rows.append(row)
        pivots = _sparse_rref(rows)

        free2 = [col for col in range(len(free1)) if col not in pivots]
        position = {col: pos for pos, col in enumerate(free2)}
        column_vectors: List[Vector] = []
        for col in range(len(free1)):
            if col in position:
                column_vectors.append({position[col]: Fraction(1)})
            else:
                column_vectors.append({position[f]: -v for f, v in pivots[col].items() if f != col})

        self.basis_gens: Tuple[int, ...] = tuple(free1[col] for col in free2)
        self.dimension = len(free2)
        self._gen_vectors: List[Vector] = []
        for i in range(self.ngens):
            rep, sign = mod[i]
            if sign == 0:
                self._gen_vectors.append({})
            elif sign == 1:
                self._gen_vectors.append(column_vectors[column[rep]])
            else:
                self._gen_vectors.append({p: -v for p, v in column_vectors[column[rep]].items()})
        logger.debug(
            f"Two-term relations leave {len(free1)} of {self.ngens} generators, "
            f"three-term relations leave {self.dimension}"
        )

    def to_vector(self, combination: Sequence[Tuple[int, int]]) -> Vector:
        """Quotient vector of a raw generator combination."""
        out: Vector = {}
        for g, coef in combination:
            if coef:
                _add_scaled(out, self._gen_vectors[g], coef)
        return out

    def _dense(self, v: Vector) -> List[Fraction]:
        row = [Fraction(0)] * self.dimension
        for p, x in v.items():
            row[p] = x
        return row

    # Boundary and cuspidal subspace.

    def boundary_matrix(self) -> RationalMatrix:
        """Rows are boundary images of the quotient basis, columns live cusp classes."""
        cusps = _CuspTable(self.N, self.character)
        images = []
        for gen in self.basis_gens:
            j, (c, d) = self.generator(gen)
            g = lift_to_sl2(c, d, self.N)
            image: Dict[int, int] = collections.defaultdict(int)
            if j == self.k - 2:
                found = cusps.coordinate(g)
                if found:
                    image[found[0]] += found[1]
            if j == 0:
                a, b, c2, d2 = g
                found = cusps.coordinate((b, -a, d2, -c2))
                if found:
                    image[found[0]] -= found[1]
            images.append(image)
        live = sorted({c for image in images for c, v in image.items() if v})
        where = {c: i for i, c in enumerate(live)}
        rows = []
        for image in images:
            row = [0] * len(live)
            for c, v in image.items():
                if v:
                    row[where[c]] = v
            rows.append(row)
        logger.debug(f"{len(cusps)} cusp classes, {len(live)} reached by the boundary map")
        return RationalMatrix.from_rows(rows, cols=len(live))

    def _cut_cuspidal(self) -> None:
        boundary = self.boundary_matrix()
        if boundary.cols == 0:
            basis = RationalMatrix.identity(self.dimension)
        else:
            basis = nullspace(boundary.transpose())
        self.cuspidal_basis, self.cuspidal_pivots = rref(basis) if basis.rows else (basis, ())

    def _restrict(self, images: List[Vector], basis: RationalMatrix, pivots: Tuple[int, ...]) -> RationalMatrix:
        rows = []
        for image in images:
            rows.append(coordinates_in_rowspace(basis, pivots, self._dense(image)))
        return RationalMatrix.from_rows(rows, cols=basis.rows)

    def _apply(self, basis_row: Sequence[Fraction], images: Dict[int, Vector]) -> Vector:
        out: Vector = {}
        for p, x in enumerate(basis_row):
            if x:
                _add_scaled(out, images[p], x)
        return out

    # Star involution.

    def _star_images(self) -> Dict[int, Vector]:
        images = {}
        for p, gen in enumerate(self.basis_gens):
            j, (c, d) = self.generator(gen)
            idx2, s = self.p1.normalize(-c, d)
            coef = -((-1) ** j) * self.character(s)
            images[p] = self.to_vector([(j * self.n1 + idx2, coef)])
        return images

    def star_matrix(self) -> RationalMatrix:
        """Star involution on the cuspidal subspace, in its echelon basis."""
        images = self._star_images()
        rows = [self._apply(self.cuspidal_basis.row(i), images) for i in range(self.cuspidal_basis.rows)]
        return self._restrict(rows, self.cuspidal_basis, self.cuspidal_pivots)

    def signed_basis(self, sign: int = 1) -> Tuple[RationalMatrix, Tuple[int, ...]]:
        """Echelon basis (in quotient coordinates) of the sign-eigenspace of star on cusp symbols."""
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {sign}")
        if sign not in self._signed:
            star = self.star_matrix()
            n = star.rows
            if n == 0:
                self._signed[sign] = (RationalMatrix.zero(0, self.dimension), ())
            else:
                kernel = nullspace(star.shift(sign).transpose())
                if kernel.rows == 0:
                    self._signed[sign] = (RationalMatrix.zero(0, self.dimension), ())
                else:
                    self._signed[sign] = rref(kernel @ self.cuspidal_basis)
        return self._signed[sign]

    @property
    def plus_dimension(self) -> int:
        return self.signed_basis(1)[0].rows

    @property
    def minus_dimension(self) -> int:
        return self.signed_basis(-1)[0].rows

    def fingerprint(self, sign: int = 1) -> str:
        basis, _ = self.signed_basis(sign)
        payload = json.dumps(
            {"N": self.N, "k": self.k, "chi": str(self.character), "sign": sign, "basis": basis.to_dict()},
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    # Hecke operators.

    def hecke_images(self, n: int, method: str = "auto", positions: Optional[Sequence[int]] = None) -> Dict[int, Vector]:
        """T_n applied to quotient basis generators, as quotient vectors."""
        cache = self._hecke_images.setdefault((n, method), {})
        matrices = heilbronn(n, method)
        wanted = range(self.dimension) if positions is None else positions
        for p in wanted:
            if p in cache:
                continue
            gen = self.basis_gens[p]
            raw: Dict[int, int] = collections.defaultdict(int)
            for h in matrices:
                for g, coef in self.act(gen, h):
                    raw[g] += coef
            cache[p] = self.to_vector(list(raw.items()))
        return cache

    def hecke_on_basis(self, n: int, basis: RationalMatrix, pivots: Tuple[int, ...], method: str = "auto") -> RationalMatrix:
        """Matrix of T_n on an invariant subspace given by an echelon basis."""
        support = sorted({p for i in range(basis.rows) for p, x in enumerate(basis.row(i)) if x})
        images = self.hecke_images(n, method, support)
        rows = [self._apply(basis.row(i), images) for i in range(basis.rows)]
        try:
            return self._restrict(rows, basis, pivots)
        except ValueError:
            raise InvariantViolation(f"T_{n} does not preserve the subspace (N={self.N}, k={self.k})")


def build_space(N: int, k: int, chi: DirichletCharacter) -> ManinSymbolSpace:
    """Construct (or fetch from the per-process cache) a space of modular symbols.

    Arguments
    ---------
    N : int
        Level.
    k : int
        Weight, at least 2.
    chi : DirichletCharacter
        Nebentypus; it is lifted to modulus N.

    Returns
    -------
    ManinSymbolSpace
    """
    if k < 2:
        raise UnsupportedWeightError(f"Weight {k} < 2 is not supported")
    if N < 1:
        raise ValueError(f"Level must be positive, got {N}")
    chi = chi.lift(N)
    check_parity(k, chi)
    return _build_space(N, k, chi)


@lru_cache(maxsize=64)
def _build_space(N: int, k: int, chi: DirichletCharacter) -> ManinSymbolSpace:
    space = ManinSymbolSpace(N, k, chi)
    expected = dim_cusp(N, k, chi)
    cuspidal = space.cuspidal_basis.rows
    if cuspidal != 2 * expected:
        raise InvariantViolation(
            f"Cuspidal symbols have dimension {cuspidal}, expected 2 * {expected} (N={N}, k={k}, chi={chi})"
        )
    if space.plus_dimension != expected or space.minus_dimension != expected:
        raise InvariantViolation(
            f"Star eigenspaces have dimensions {space.plus_dimension}/{space.minus_dimension}, "
            f"expected {expected} (N={N}, k={k}, chi={chi})"
        )
    return space


def hecke_matrix(space: ManinSymbolSpace, q: int, sign: int = 1, method: str = "auto") -> HeckeMatrix:
    """Exact matrix of T_q on the signed cuspidal subspace."""
    if not sympy.isprime(q):
        raise NotPrimeError(f"{q} is not prime")
    basis, pivots = space.signed_basis(sign)
    matrix = space.hecke_on_basis(q, basis, pivots, method)
    OPERATION_COUNTS["hecke_matrix computed"] += 1
    logger.debug(f"T_{q} on N={space.N} k={space.k} sign={sign}: {matrix.rows}x{matrix.cols}")
    return HeckeMatrix(
        n=q,
        matrix=matrix,
        level=space.N,
        weight=space.k,
        character=str(space.character),
        sign=sign,
        fingerprint=space.fingerprint(sign),
        heilbronn=method,
    )


def hecke_matrix_minus(space: ManinSymbolSpace, q: int, method: str = "auto") -> HeckeMatrix:
    """T_q on the minus part of the cuspidal symbols."""
    return hecke_matrix(space, q, sign=-1, method=method)


def star_matrix(space: ManinSymbolSpace) -> RationalMatrix:
    return space.star_matrix()


def minus_basis(space: ManinSymbolSpace) -> RationalMatrix:
    return space.signed_basis(-1)[0]


def cuspidal_dimension(space: ManinSymbolSpace) -> int:
    return space.cuspidal_basis.rows


def plus_dimension(space: ManinSymbolSpace) -> int:
    return space.plus_dimension


def deligne_check_space(space: ManinSymbolSpace, q: int) -> DeligneCheck:
    """Bound the roots of charpoly(T_q) on the plus space."""
    if space.N % q == 0:
        raise PDividesLevelError(f"Deligne's bound is checked only for q not dividing {space.N}")
    f = charpoly(hecke_matrix(space, q).matrix)
    return deligne_check(f, q, space.k)
