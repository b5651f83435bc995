from fractions import Fraction
from itertools import islice
from typing import Iterable, Optional, Union

import structlog

from tilelat.abelian.groups import MembershipOracle
from tilelat.builder.models import (
    BoundedGeneratingSet,
    EnumerationScheme,
    GeneratorRecord,
    Subgroup,
    epsilon_for_step,
)
from tilelat.builder.oracles import NormOracle, get_norm_oracle
from tilelat.builder.schemes import iter_candidates
from tilelat.enumerate.checks import nearest_elements
from tilelat.enumerate.models import BallQuery
from tilelat.enumerate.search import enumerate_group_ball
from tilelat.errors import ConfigError, EmptyBall, GenerationGapWitness, RieszOracleUnavailable
from tilelat.exactvec import (
    Ordering,
    PowThreshold,
    RationalLike,
    SparseVector,
    compare_root_sum,
    root_sum_bound,
)
from tilelat.observability.metrics import record_build_step

logger = structlog.get_logger("builder")

_UNIT = PowThreshold(c=Fraction(1))


def _has_element_within(state: Subgroup, u: SparseVector, threshold: PowThreshold) -> bool:
    try:
        nearest_elements(state, u, threshold)
    except EmptyBall:
        return False
    return True


def _skipped(state: Subgroup, u: SparseVector) -> Subgroup:
    seen = tuple(sorted(set(state.seen) | u.support))
    return state.model_copy(update={"steps_consumed": state.steps_consumed + 1, "seen": seen})


def _appended(state: Subgroup, u: SparseVector, fresh: int, x: SparseVector,
              epsilon: Optional[Fraction] = None) -> Subgroup:
    g = u + x
    record = GeneratorRecord(step=state.steps_consumed, fresh_index=fresh, u=u, g=g, epsilon=epsilon)
    seen = tuple(sorted(set(state.seen) | u.support | x.support))
    return state.model_copy(
        update={
            "records": state.records + (record,),
            "steps_consumed": state.steps_consumed + 1,
            "seen": seen,
        }
    )


def step_lp(state: Subgroup, u: SparseVector) -> Subgroup:
    """Process one target in the exact l_p construction.

    Skips u when some d in D has ||u - d||_p <= 1; otherwise appends
    g = u + e_fresh with fresh the smallest coordinate outside every support
    seen so far.
    """
    if state.mode != "exact_lp":
        raise ConfigError("step_lp needs an exact_lp subgroup", mode=state.mode)
    if _has_element_within(state, u, _UNIT):
        record_build_step(state.mode, added=False)
        logger.debug("build_step", step=state.steps_consumed, outcome="skipped")
        return _skipped(state, u)
    fresh = state.fresh_coordinate(u)
    record_build_step(state.mode, added=True)
    logger.debug("build_step", step=state.steps_consumed, outcome="added", fresh=fresh)
    return _appended(state, u, fresh, SparseVector.basis(fresh))


def fold_lp(state: Subgroup, candidates: Iterable[SparseVector]) -> Subgroup:
    for u in candidates:
        state = step_lp(state, u)
    return state


def build_lp(p: int, scheme: EnumerationScheme, steps: int) -> Subgroup:
    """Fold step_lp over the first `steps` candidates of the scheme"""
    if steps < 1:
        raise ConfigError("steps must be >= 1", steps=steps)
    state = Subgroup.trivial(p, scheme=scheme)
    state = fold_lp(state, islice(iter_candidates(scheme), steps))
    logger.info("build_finished", **state.summary())
    return state


def step_riesz(state: Subgroup, u: SparseVector, eps: RationalLike,
               oracle: Optional[NormOracle] = None) -> Subgroup:
    """Process one target in the Riesz-mode construction.

    Skips u when some d has ||u - d|| <= 1 + eps; otherwise appends u + x
    for the oracle's Riesz witness x.

    Raises:
        RieszOracleUnavailable: the oracle cannot produce an exact witness
    """
    if state.mode != "riesz_general":
        raise ConfigError("step_riesz needs a riesz_general subgroup", mode=state.mode)
    eps = Fraction(eps)
    if eps < 0:
        raise ConfigError("eps must be non-negative")
    oracle = oracle or get_norm_oracle("lp", state.p)
    threshold = oracle.skip_threshold(eps)
    if _has_element_within(state, u, threshold):
        record_build_step(state.mode, added=False)
        return _skipped(state, u)

    fresh = state.fresh_coordinate(u)
    witness = oracle.riesz_witness(set(state.seen) | u.support, fresh, eps)
    if oracle.norm_pow(witness) > threshold.c:
        raise RieszOracleUnavailable("oracle witness exceeds 1 + eps", norm_pow=oracle.norm_pow(witness))
    record_build_step(state.mode, added=True)
    logger.debug("build_step", step=state.steps_consumed, outcome="added", fresh=fresh, eps=eps)
    return _appended(state, u, fresh, witness, epsilon=eps)


def build_riesz(p: int, scheme: EnumerationScheme, steps: int, eps: RationalLike,
                schedule: str = "fixed", oracle_name: str = "lp") -> Subgroup:
    """Fold step_riesz over the scheme; the dyadic schedule uses eps_n = 2^-n at step n"""
    if steps < 1:
        raise ConfigError("steps must be >= 1", steps=steps)
    if schedule not in ("fixed", "dyadic"):
        raise ConfigError(f"unknown epsilon schedule '{schedule}'")
    oracle = get_norm_oracle(oracle_name, p)
    state = Subgroup.trivial(
        p, mode="riesz_general", scheme=scheme, epsilon=Fraction(eps), epsilon_schedule=schedule
    )
    for n, u in enumerate(islice(iter_candidates(scheme), steps), start=1):
        state = step_riesz(state, u, epsilon_for_step(Fraction(eps), schedule, n), oracle)
    logger.info("build_finished", **state.summary())
    return state


def bounded_generators(D: Subgroup, r: Union[PowThreshold, RationalLike], eps: RationalLike) -> BoundedGeneratingSet:
    """S = {d in D : ||d|| <= 2r + eps} with a certificate that S generates D.

    Args:
        D: a subgroup certified r-dense on its processed targets
        r: p-th power of the density radius
        eps: positive rational slack

    Returns:
        The set S and, for each original generator, integer coefficients over S

    Raises:
        GenerationGapWitness: a generator is not an integer combination of S
    """
    r = PowThreshold.of(r)
    eps = Fraction(eps)
    p = D.p
    two_r_pow = r.c * 2 ** p
    eps_pow = eps ** p
    result = enumerate_group_ball(D, BallQuery(radius=root_sum_bound(two_r_pow, eps_pow, p)))
    elements = [
        point.element
        for point in result
        if compare_root_sum(point.distance_pow, two_r_pow, eps_pow, p) != Ordering.GREATER
    ]
    membership = MembershipOracle(elements)
    expressions = []
    for g in D.generators:
        coefficients = membership.solve(g)
        if coefficients is None:
            logger.warning("generation_gap", generator=g, bounded_elements=len(elements))
            raise GenerationGapWitness("generator is not in the span of the bounded elements", generator=g)
        expressions.append(coefficients)
    logger.info("bounded_generators_certified", elements=len(elements), generators=D.rank)
    return BoundedGeneratingSet(elements=elements, expressions=expressions, r=r.c, epsilon=eps)
