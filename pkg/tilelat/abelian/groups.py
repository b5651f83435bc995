"""
Finitely generated subgroups of Q^(omega) treated as integer lattices.

A list of rational generators is scaled by the lcm q of its denominators
and written over the union of its supports, which turns membership,
bases and chain extension into questions about an integer matrix.
"""
from fractions import Fraction
from math import lcm
from typing import Dict, List, Optional, Sequence, Union

import structlog

from tilelat.abelian.models import IntegerMatrix, NormalFormResult
from tilelat.abelian.normal_forms import hnf, inverse_unimodular, smith
from tilelat.builder.models import Subgroup
from tilelat.enumerate.checks import verify_separation
from tilelat.enumerate.models import Certificate
from tilelat.errors import ChainNotNested, TorsionQuotient
from tilelat.exactvec import PowThreshold, RationalLike, SparseVector

logger = structlog.get_logger("abelian")


class MembershipOracle:
    """Solves sum n_i g_i = v over the integers for one fixed generator list.

    The Hermite form is computed once; each query is a forward
    substitution down its pivots.
    """

    def __init__(self, generators: Sequence[SparseVector]):
        self.generators = list(generators)
        self.coordinates: List[int] = sorted(set().union(*(g.support for g in self.generators)))
        self._column: Dict[int, int] = {c: j for j, c in enumerate(self.coordinates)}
        self.scale = lcm(*(value.denominator for g in self.generators for _, value in g.entries))
        self._form: Optional[NormalFormResult] = None
        self._pivots: List[int] = []
        if self.coordinates:
            self._form = hnf(IntegerMatrix.from_rows(self.integer_rows(self.generators)))
            for row in self._form.H.entries[: self._form.rank]:
                self._pivots.append(next(j for j, x in enumerate(row) if x))

    def integer_rows(self, vectors: Sequence[SparseVector]) -> List[List[int]]:
        rows = []
        for v in vectors:
            row = [0] * len(self.coordinates)
            for index, value in v.entries:
                row[self._column[index]] = int(value * self.scale)
            rows.append(row)
        return rows

    @property
    def rank(self) -> int:
        return self._form.rank if self._form is not None else 0

    def hermite_basis(self) -> List[SparseVector]:
        """Nonzero Hermite rows divided by the scale, a canonical basis of the group"""
        if self._form is None:
            return []
        return [
            SparseVector({c: Fraction(x, self.scale) for c, x in zip(self.coordinates, row) if x})
            for row in self._form.H.entries[: self._form.rank]
        ]

    def solve(self, v: SparseVector) -> Optional[List[int]]:
        """Integer coefficients n with sum n_i g_i = v, or None when v is not in the group"""
        k = len(self.generators)
        if not v:
            return [0] * k
        if not v.support <= self._column.keys():
            return None
        scaled = {index: value * self.scale for index, value in v.entries}
        if any(value.denominator != 1 for value in scaled.values()):
            return None
        b = [0] * len(self.coordinates)
        for index, value in scaled.items():
            b[self._column[index]] = int(value)

        H = self._form.H.entries
        y = []
        for i, pivot_col in enumerate(self._pivots):
            t, remainder = divmod(b[pivot_col], H[i][pivot_col])
            if remainder:
                return None
            y.append(t)
            if t:
                b = [x - t * h for x, h in zip(b, H[i])]
        if any(b):
            return None
        U = self._form.U.entries
        return [sum(y[i] * U[i][j] for i in range(len(y))) for j in range(k)]


def subgroup_membership(generators: Sequence[SparseVector], v: SparseVector) -> Optional[List[int]]:
    """Integer coefficients expressing v over the generators, or None"""
    return MembershipOracle(generators).solve(v)


def same_group(a: Sequence[SparseVector], b: Sequence[SparseVector]) -> bool:
    """Mutual membership: every vector of a lies in <b> and vice versa"""
    in_b, in_a = MembershipOracle(b), MembershipOracle(a)
    return all(in_b.solve(v) is not None for v in a) and all(in_a.solve(v) is not None for v in b)


def free_basis(generators: Sequence[SparseVector], canonical: bool = False) -> List[SparseVector]:
    """A basis of the free abelian group the generators span.

    Independent inputs come back unchanged unless a canonical (Hermite)
    basis is requested; dependent inputs always get the Hermite basis.
    """
    nonzero = [g for g in generators if g]
    if not nonzero:
        return []
    oracle = MembershipOracle(nonzero)
    if not canonical and oracle.rank == len(nonzero):
        return nonzero
    basis = oracle.hermite_basis()
    logger.debug("free_basis", generators=len(nonzero), rank=len(basis))
    return basis


def extend_basis(chain: Sequence[Sequence[SparseVector]]) -> List[List[SparseVector]]:
    """Nested bases B_0 ⊆ B_1 ⊆ ... for a chain D_0 ⊆ D_1 ⊆ ... of subgroups.

    Each level keeps the previous level's basis and adds a complement taken
    from the Smith decomposition of the previous basis written in a basis of
    the current group.

    Raises:
        ChainNotNested: some D_i is not contained in D_(i+1)
        TorsionQuotient: D_(i+1)/D_i has torsion, so no nested basis exists
    """
    bases: List[List[SparseVector]] = []
    previous: List[SparseVector] = []
    for level, generators in enumerate(chain):
        current = free_basis(generators, canonical=True)
        if not previous:
            bases.append(current)
            previous = current
            continue

        oracle = MembershipOracle(current)
        relations = []
        for b in previous:
            coefficients = oracle.solve(b)
            if coefficients is None:
                raise ChainNotNested("group is not contained in its successor", level=level, generator=b)
            relations.append(coefficients)

        snf = smith(IntegerMatrix.from_rows(relations))
        torsion = [f for f in snf.invariant_factors if f != 1]
        if torsion:
            raise TorsionQuotient("quotient has torsion; no nested basis exists", level=level, factor=torsion[0])

        # relations = U^-1 [I_k | 0] V^-1, so rows k.. of V^-1 complete the previous basis
        inverse = inverse_unimodular(snf.V)
        complement = []
        for row in inverse.entries[len(previous):]:
            vector = SparseVector()
            for n, b in zip(row, current):
                if n:
                    vector = vector + b * n
            complement.append(vector)
        extended = previous + complement
        logger.debug("basis_extended", level=level, kept=len(previous), added=len(complement))
        bases.append(extended)
        previous = extended
    return bases


def is_discrete(generators: Sequence[SparseVector], r: Union[PowThreshold, RationalLike], p: int) -> Certificate:
    """Separation certificate for the group spanned by generators, via its Hermite basis"""
    basis = free_basis(generators, canonical=True)
    return verify_separation(Subgroup.from_generators(basis, p), r)
