"""
Ball tilings {d + rB : d in D}: which tiles contain a point, which tiles
touch, and how those counts behave as a build grows.
"""
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from itertools import islice
from typing import List, Optional, Sequence, Tuple, Union

import structlog

from tilelat.abelian.groups import MembershipOracle
from tilelat.builder.builder import fold_lp
from tilelat.builder.models import EnumerationScheme, Subgroup
from tilelat.builder.schemes import iter_candidates
from tilelat.config import get_settings
from tilelat.enumerate.checks import issue_certificate, nearest_elements, pick_witness
from tilelat.enumerate.models import BallQuery, Certificate, CertificateKind
from tilelat.enumerate.search import enumerate_group_ball
from tilelat.errors import ContactViolation, EmptyBall, NoWitnessAtStage, UnsupportedNorm
from tilelat.exactvec import (
    Ordering,
    PowThreshold,
    RationalLike,
    SparseVector,
    compare_root_sum,
    distance_pow,
    format_rational,
    root_sum_bound,
)
from tilelat.tiling.models import StageGrowth, TileCount

logger = structlog.get_logger("tiles")

_HALF = Fraction(1, 2)


def tiles_containing(D: Subgroup, x: SparseVector, tile_radius: Union[PowThreshold, RationalLike],
                     threads: Optional[int] = None) -> List[SparseVector]:
    """Every d in D with ||x - d|| <= tile_radius"""
    query = BallQuery(center=x, radius=PowThreshold.of(tile_radius))
    return enumerate_group_ball(D, query, threads=threads).elements()


def tile_counts(D: Subgroup, points: Sequence[SparseVector],
                tile_radius: Union[PowThreshold, RationalLike]) -> List[TileCount]:
    """Number of tiles containing each sample point, in sample order"""
    radius = PowThreshold.of(tile_radius)
    threads = get_settings().threads

    def count(x: SparseVector) -> TileCount:
        return TileCount(point=x, count=len(tiles_containing(D, x, radius, threads=1)))

    if threads <= 1:
        return [count(x) for x in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(count, points))


def verify_vertex_contact(D: Subgroup) -> Certificate:
    """Check that every element of l_1-norm exactly 2 is +-2e_a.

    Raises:
        UnsupportedNorm: p != 1
        ContactViolation: with the offending norm-2 element
    """
    if D.p != 1:
        raise UnsupportedNorm("vertex contact is an l_1 property", p=D.p)
    query = BallQuery(radius=PowThreshold(c=Fraction(2)))
    result = enumerate_group_ball(D, query)
    contacts = [point for point in result if point.distance_pow == 2]
    bad = [point for point in contacts if len(point.element) != 1]
    if bad:
        witness = pick_witness(bad)
        raise ContactViolation("norm-2 element is not a doubled basis vector", witness=witness.element)
    bound = result.bound(query)
    bound["contacts"] = [point.element.to_json() for point in contacts]
    return issue_certificate(Certificate(kind=CertificateKind.CONTACT_OK, count=len(contacts), bound=bound), "vertex_contact")


def verify_point_finiteness(D: Subgroup, samples: Sequence[SparseVector],
                            tile_radius: Union[PowThreshold, RationalLike], bound: int = 2) -> Certificate:
    """Check that no sample point lies in more than `bound` tiles"""
    counts = tile_counts(D, samples, tile_radius)
    worst = max(counts, key=lambda c: c.count, default=None)
    details = {
        "tile_radius": format_rational(PowThreshold.of(tile_radius).c),
        "samples": len(samples),
        "max_tiles": bound,
    }
    if worst is not None and worst.count > bound:
        logger.warning("point_finiteness_violated", point=worst.point, tiles=worst.count)
        return issue_certificate(
            Certificate(kind=CertificateKind.POINT_FINITE_VIOLATED, witness=worst.point, count=worst.count, bound=details),
            "point_finiteness",
        )
    return issue_certificate(
        Certificate(kind=CertificateKind.POINT_FINITE_OK, count=worst.count if worst else 0, bound=details),
        "point_finiteness",
    )


def disjointness_witness(D: Subgroup, tile_radius: Union[PowThreshold, RationalLike]
                         ) -> Tuple[SparseVector, SparseVector]:
    """Two distinct tiles d + rB and 2h + rB that intersect.

    Walks the generators for some d with d/2 outside D and an h within r of
    d/2; then ||d - 2h|| <= 2r. When no generator works, scans D ∩ 2rB for
    y != 0 with y/2 outside D and returns (y, 0). Every pair found that way
    has d - 2h of that form, so an empty scan means no witness exists at
    this stage.

    Raises:
        NoWitnessAtStage: no such pair in the current group
    """
    radius = PowThreshold.of(tile_radius)
    p = D.p
    doubled = radius.scaled(2, p)
    membership = MembershipOracle(D.generators)

    for d in D.generators:
        half = d * _HALF
        if membership.solve(half) is not None:
            continue
        try:
            h = nearest_elements(D, half, radius)[0].element
        except EmptyBall:
            continue
        pair = (d, h * 2)
        logger.info("disjointness_witness", route="generators", d=pair[0], h2=pair[1])
        return _checked(pair, doubled, p)

    for point in enumerate_group_ball(D, BallQuery(radius=doubled)):
        y = point.element
        if y and membership.solve(y * _HALF) is None:
            logger.info("disjointness_witness", route="scan", d=y)
            return _checked((y, SparseVector()), doubled, p)
    raise NoWitnessAtStage("every element of D within 2r has its half in D", radius=radius.c)


def _checked(pair: Tuple[SparseVector, SparseVector], doubled: PowThreshold, p: int) -> Tuple[SparseVector, SparseVector]:
    d, h2 = pair
    if d == h2 or distance_pow(d, h2, p) > doubled.c:
        raise NoWitnessAtStage("candidate tiles do not intersect", witness=d)
    return pair


def star_degree(D: Subgroup, tile_radius: Union[PowThreshold, RationalLike]) -> int:
    """Number of tiles meeting the central tile: nonzero h with ||h|| <= 2r"""
    query = BallQuery(radius=PowThreshold.of(tile_radius).scaled(2, D.p))
    return sum(1 for point in enumerate_group_ball(D, query) if point.element)


def local_tile_count(D: Subgroup, x: SparseVector, delta: Union[PowThreshold, RationalLike],
                     tile_radius: Union[PowThreshold, RationalLike]) -> int:
    """Tiles meeting the delta-ball around x: ||x - d|| <= r + delta (p = 2 only)"""
    if D.p != 2:
        raise UnsupportedNorm("local tile counts are computed for p = 2 only", p=D.p)
    r, delta = PowThreshold.of(tile_radius).c, PowThreshold.of(delta).c
    query = BallQuery(center=x, radius=root_sum_bound(r, delta, 2))
    return sum(
        1
        for point in enumerate_group_ball(D, query)
        if compare_root_sum(point.distance_pow, r, delta, 2) != Ordering.GREATER
    )


def stage_growth(p: int, scheme: EnumerationScheme, stages: Sequence[int],
                 tile_radius: Union[PowThreshold, RationalLike],
                 count_radius: Optional[Union[PowThreshold, RationalLike]] = None) -> List[StageGrowth]:
    """Star degree and ball counts at increasing build stages of one exact l_p run"""
    stages = sorted(set(stages))
    radius = PowThreshold.of(count_radius) if count_radius is not None else PowThreshold.of(tile_radius).scaled(2, p)
    candidates = iter_candidates(scheme)
    state = Subgroup.trivial(p, scheme=scheme)
    rows = []
    for stage in stages:
        state = fold_lp(state, islice(candidates, stage - state.steps_consumed))
        ball = enumerate_group_ball(state, BallQuery(radius=radius))
        rows.append(
            StageGrowth(
                steps=state.steps_consumed,
                generators=state.rank,
                star_degree=star_degree(state, tile_radius),
                ball_count=len(ball),
                radius=radius.c,
            )
        )
        logger.info("stage_measured", steps=state.steps_consumed, star_degree=rows[-1].star_degree)
    return rows
