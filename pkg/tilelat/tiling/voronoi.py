"""
Voronoi cells of a subgroup of l_2 as exact half-space polytopes.

For a site d and a neighbour h the bisector constraint ||x - d|| <= ||x - h||
expands to <x, h - d> <= (||h||^2 - ||d||^2) / 2. A cell certified r-dense
lies in d + rB, so neighbours farther than 2r contribute only inactive
constraints and the cutoff is 2r.
"""
import random
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple, Union

import structlog

from tilelat.builder.models import Subgroup
from tilelat.enumerate.checks import issue_certificate
from tilelat.enumerate.models import BallQuery, Certificate, CertificateKind
from tilelat.enumerate.search import enumerate_group_ball
from tilelat.errors import DensityNotCertified, InclusionViolation, UnsupportedNorm
from tilelat.exactvec import PowThreshold, RationalLike, SparseVector, format_rational, norm_pow
from tilelat.tiling.models import CellMembership, HalfSpace, HPolytope

logger = structlog.get_logger("voronoi")


def voronoi_cell(D: Subgroup, d: SparseVector, r_dense: Union[PowThreshold, RationalLike],
                 density: Optional[Certificate] = None) -> HPolytope:
    """H-polytope of the Voronoi cell of site d (p = 2 only).

    Args:
        D: the subgroup
        d: an element of D
        r_dense: squared density radius r^2
        density: density certificate backing r_dense on the probed region;
            a failed certificate makes the cell uncertified

    Raises:
        UnsupportedNorm: p != 2
        DensityNotCertified: no neighbours or no density proof; the
            best-effort polytope rides on the exception
    """
    if D.p != 2:
        raise UnsupportedNorm("Voronoi cells are computed for p = 2 only", p=D.p)
    r_dense = PowThreshold.of(r_dense)
    cutoff = r_dense.scaled(2, 2)
    neighbours = enumerate_group_ball(D, BallQuery(center=d, radius=cutoff)).elements()
    d_sq = norm_pow(d, 2)
    halfspaces = [
        HalfSpace(normal=h - d, offset=(norm_pow(h, 2) - d_sq) / 2)
        for h in neighbours
        if h != d
    ]
    cell = HPolytope(center=d, halfspaces=halfspaces, cutoff=cutoff)
    if not halfspaces:
        logger.warning("cell_without_neighbours", site=d, cutoff=cutoff.c)
        raise DensityNotCertified(
            "no neighbour within 2r; the group is not r-dense around the site",
            polytope=cell.model_copy(update={"certified": False}),
        )
    if density is not None and density.kind != CertificateKind.DENSITY_OK:
        raise DensityNotCertified(
            "density radius is not certified", polytope=cell.model_copy(update={"certified": False})
        )
    logger.debug("voronoi_cell", site=d, halfspaces=len(halfspaces))
    return cell


def cell_membership(cell: HPolytope, x: SparseVector) -> CellMembership:
    on_boundary = False
    for halfspace in cell.halfspaces:
        slack = halfspace.slack(x)
        if slack < 0:
            return CellMembership.OUTSIDE
        if slack == 0:
            on_boundary = True
    return CellMembership.BOUNDARY if on_boundary else CellMembership.INTERIOR


def translation_consistent(D: Subgroup, d: SparseVector, r_dense: Union[PowThreshold, RationalLike]) -> bool:
    """Whether the cell at d has exactly the constraints of the cell at 0 shifted by d"""
    at_site = voronoi_cell(D, d, r_dense)
    shifted = voronoi_cell(D, SparseVector(), r_dense).translated(d)
    return at_site.constraint_set() == shifted.constraint_set()


def inclusion_check(cell: HPolytope, R_sep: Union[PowThreshold, RationalLike], r_dense: Union[PowThreshold, RationalLike],
                    directions: Sequence[SparseVector]) -> Certificate:
    """Certify (R/2)B <= V <= rB around the cell's center.

    The inner inclusion is proved for every half-space: its plane lies at
    distance >= R/2. The outer inclusion is checked along each direction v:
    the ray exits the cell at t* = min offset / <v, normal> and needs
    t* ||v|| <= r. Both compare squares of rationals.

    Raises:
        InclusionViolation: with the offending half-space or direction
    """
    R_sq = PowThreshold.of(R_sep).c
    r_sq = PowThreshold.of(r_dense).c
    center = cell.center

    for halfspace in cell.halfspaces:
        offset = halfspace.slack(center)
        if offset < 0 or offset * offset < R_sq / 4 * norm_pow(halfspace.normal, 2):
            logger.warning("inner_inclusion_violated", normal=halfspace.normal, offset=halfspace.offset)
            raise InclusionViolation("bisector lies closer than R/2", halfspace=halfspace)

    worst = Fraction(0)
    for v in directions:
        if not v:
            raise ValueError("directions must be nonzero")
        exits = []
        for halfspace in cell.halfspaces:
            rate = v.dot(halfspace.normal)
            if rate > 0:
                exits.append(halfspace.slack(center) / rate)
        if not exits:
            logger.warning("outer_inclusion_unbounded", direction=v)
            raise InclusionViolation("cell is unbounded along direction", direction=v)
        t = min(exits)
        reach = t * t * norm_pow(v, 2)
        if reach > r_sq:
            logger.warning("outer_inclusion_violated", direction=v, reach=reach)
            raise InclusionViolation("ray leaves rB before leaving the cell", direction=v)
        worst = max(worst, reach)

    bound = {
        "inner": format_rational(R_sq),
        "outer": format_rational(r_sq),
        "halfspaces": len(cell.halfspaces),
        "directions": len(directions),
        "max_exit_pow": format_rational(worst),
    }
    return issue_certificate(Certificate(kind=CertificateKind.INCLUSION_OK, count=len(directions), bound=bound), "inclusion")


def neighbour_directions(cell: HPolytope, r_dense: Union[PowThreshold, RationalLike], count: int,
                         seed: int = 0) -> List[SparseVector]:
    """Seeded directions drawn from the normals h - d with ||h - d|| <= 2r.

    The ray along such a normal leaves the cell by the bisector of h, at
    distance ||h - d|| / 2 <= r, so every one of them passes the outer check.
    """
    limit = PowThreshold.of(r_dense).scaled(2, 2).c
    short = sorted(
        (h.normal for h in cell.halfspaces if norm_pow(h.normal, 2) <= limit),
        key=lambda normal: normal.sort_key(),
    )
    if not short:
        return []
    rng = random.Random(seed)
    return [rng.choice(short) for _ in range(count)]


def in_metric_cell(D: Subgroup, x: SparseVector) -> bool:
    """x in V_0 = {x : ||x|| <= ||x - h|| for all h in D}, for any p.

    Exact: no element may lie strictly closer to x than the origin does.
    """
    query = BallQuery(center=x, radius=PowThreshold(c=norm_pow(x, D.p)), strict=True)
    return len(enumerate_group_ball(D, query)) == 0


def nonconvexity_witness(D: Subgroup, points: Sequence[SparseVector]
                         ) -> Optional[Tuple[SparseVector, SparseVector, SparseVector]]:
    """Two sample points of V_0 whose midpoint leaves V_0, or None"""
    inside: List[SparseVector] = [x for x in points if in_metric_cell(D, x)]
    for a, b in combinations(inside, 2):
        midpoint = (a + b) * Fraction(1, 2)
        if not in_metric_cell(D, midpoint):
            logger.info("nonconvexity_witness", a=a, b=b, midpoint=midpoint, p=D.p)
            return a, b, midpoint
    return None
