from fractions import Fraction
from typing import List, Optional, Sequence, Union

import structlog

from tilelat.builder.models import Subgroup
from tilelat.enumerate.models import BallPoint, BallQuery, Certificate, CertificateKind, NearestElement
from tilelat.enumerate.search import enumerate_group_ball
from tilelat.errors import EmptyBall
from tilelat.exactvec import PowThreshold, RationalLike, SparseVector, distance_pow, format_rational
from tilelat.observability.metrics import record_certificate

logger = structlog.get_logger("checks")


def issue_certificate(certificate: Certificate, check: str) -> Certificate:
    record_certificate(certificate.kind.value)
    logger.info("certificate_issued", check=check, certificate=certificate.kind.value, count=certificate.count)
    return certificate


def pick_witness(points: Sequence[BallPoint]) -> BallPoint:
    """Minimal-distance point, preferring a positive first nonzero entry"""
    best = min(point.distance_pow for point in points)
    tied = [point for point in points if point.distance_pow == best]
    for point in tied:
        if point.element and point.element.entries[0][1] > 0:
            return point
    return tied[0]


def verify_separation(D: Subgroup, threshold: Union[PowThreshold, RationalLike], strict: bool = False,
                      coefficient_box: Optional[int] = None) -> Certificate:
    """Check that every nonzero element has norm >= threshold (> threshold when strict).

    Args:
        D: the subgroup
        threshold: p-th power c of the separation radius
        strict: demand (c^(1/p)+)-separation
        coefficient_box: fallback bound when D has no triangular frame

    Returns:
        SeparationOK, or SeparationViolated with a minimal-norm witness
    """
    threshold = PowThreshold.of(threshold)
    # violators are the nonzero points with norm < c (non-strict) or <= c (strict)
    query = BallQuery(radius=threshold, strict=not strict)
    result = enumerate_group_ball(D, query, coefficient_box=coefficient_box)
    bound = result.bound(query)
    bound.update({"threshold": format_rational(threshold.c), "separation": "strict" if strict else "non-strict"})
    violators = [point for point in result if point.element]
    if not violators:
        return issue_certificate(Certificate(kind=CertificateKind.SEPARATION_OK, bound=bound), "separation")
    witness = pick_witness(violators)
    logger.warning("separation_violated", witness=witness.element, norm_pow=witness.distance_pow)
    return issue_certificate(
        Certificate(
            kind=CertificateKind.SEPARATION_VIOLATED,
            witness=witness.element,
            coefficients=list(witness.coefficients),
            bound=bound,
        ),
        "separation",
    )


def nearest_elements(D: Subgroup, x: SparseVector, search_radius: Union[PowThreshold, RationalLike]) -> List[NearestElement]:
    """Elements of D within search_radius of x, nearest first.

    Raises:
        EmptyBall: nothing within the radius; the caller should enlarge it
    """
    radius = PowThreshold.of(search_radius)
    result = enumerate_group_ball(D, BallQuery(center=x, radius=radius))
    if not len(result):
        raise EmptyBall("no group element within the search radius", witness=x, radius=radius.c)
    return [NearestElement(point.element, point.distance_pow) for point in result]


def verify_density(D: Subgroup, targets: Sequence[SparseVector], r: Union[PowThreshold, RationalLike]) -> Certificate:
    """Check that every target has a group element within r"""
    r = PowThreshold.of(r)
    worst = Fraction(0)
    for target in targets:
        try:
            nearest = nearest_elements(D, target, r)
        except EmptyBall:
            logger.warning("density_gap", target=target, radius=r.c)
            return issue_certificate(
                Certificate(
                    kind=CertificateKind.DENSITY_GAP,
                    witness=target,
                    bound={"radius": format_rational(r.c), "targets": len(targets)},
                ),
                "density",
            )
        worst = max(worst, nearest[0].distance_pow)
    bound = {"radius": format_rational(r.c), "targets": len(targets), "max_distance_pow": format_rational(worst)}
    return issue_certificate(Certificate(kind=CertificateKind.DENSITY_OK, bound=bound), "density")


def count_in_ball(D: Subgroup, radius: Union[PowThreshold, RationalLike]) -> Certificate:
    """Exact |D ∩ radius * B|"""
    query = BallQuery(radius=PowThreshold.of(radius))
    result = enumerate_group_ball(D, query)
    return issue_certificate(Certificate(kind=CertificateKind.COUNT_EXACT, count=len(result), bound=result.bound(query)), "count")


def separated_subset(points: Sequence[SparseVector], r: Union[PowThreshold, RationalLike], strict: bool = True,
                     *, p: int) -> List[SparseVector]:
    """Greedy r-separated subset: keep a point unless it lies in the r-ball of an earlier pick"""
    c = PowThreshold.of(r).c
    picked: List[SparseVector] = []
    for point in points:
        far = True
        for other in picked:
            d = distance_pow(point, other, p)
            if d < c or (strict and d == c):
                far = False
                break
        if far:
            picked.append(point)
    return picked


def kottman_witness(p: int, k: int) -> List[SparseVector]:
    """k unit vectors with pairwise distance exactly 2^(1/p): the first k basis vectors"""
    if k < 2:
        raise ValueError("k must be >= 2")
    return [SparseVector.basis(i) for i in range(k)]
