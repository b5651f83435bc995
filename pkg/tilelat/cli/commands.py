"""
Command handlers. Each takes a validated RunConfig, writes its artifact and
returns the process exit code: 0 when every check passed, 1 on a verified
violation. Configuration and storage errors propagate to the caller.
"""
import csv
import io
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import structlog
from pydantic import BaseModel

from tilelat.abelian.groups import MembershipOracle, free_basis, subgroup_membership
from tilelat.builder.builder import build_lp, build_riesz
from tilelat.builder.models import EnumerationScheme, Subgroup
from tilelat.builder.schemes import enumerate_candidates, sample_directions, sample_points
from tilelat.cli.models import RunConfig
from tilelat.cli.storage import (
    document,
    dumps,
    group_payload,
    load_generators,
    load_group,
    write_json_atomic,
    write_text_atomic,
)
from tilelat.enumerate.checks import verify_density, verify_separation
from tilelat.enumerate.models import Certificate
from tilelat.errors import CertificationError, ConfigError, DensityNotCertified
from tilelat.exactvec import PowThreshold, SparseVector
from tilelat.observability.logging import get_audit_logger
from tilelat.tiling.report import CSV_HEADER, build_report, report_csv_rows
from tilelat.tiling.tiles import stage_growth, verify_point_finiteness, verify_vertex_contact
from tilelat.tiling.voronoi import inclusion_check, neighbour_directions, translation_consistent, voronoi_cell

logger = structlog.get_logger("cli")


def _emit(config: RunConfig, payload: Dict[str, Any]) -> None:
    if config.out:
        write_json_atomic(config.out, payload)
    else:
        sys.stdout.write(dumps(payload))


def _jsonable(value: Any) -> Any:
    if isinstance(value, SparseVector):
        return value.to_json()
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json")
    return value


def _violation(config: RunConfig, check: str, exc: CertificationError, **extra: Any) -> int:
    witness = _jsonable(exc.witness)
    get_audit_logger().log_violation(check, type(exc).__name__, exc.message, witness=witness)
    _emit(config, document(config, violation={**exc.to_dict(), "witness": witness}, **extra))
    return exc.exit_code


def _processed_targets(D: Subgroup) -> List[SparseVector]:
    if D.scheme is None or D.steps_consumed == 0:
        raise ConfigError("density checks need a built group with its enumeration scheme")
    return enumerate_candidates(D.scheme, D.steps_consumed)


def _sites(D: Subgroup) -> List[SparseVector]:
    """Tile centers the samples start from: 0 and +-g for every generator"""
    return [SparseVector()] + [g * s for g in D.generators for s in (1, -1)]


def _issued(config: RunConfig, check: str, certificate: Certificate, **extra: Any) -> int:
    get_audit_logger().log_certificate(check, certificate.kind.value, certificate.count, certificate.bound)
    _emit(config, document(config, certificate=certificate.to_json(), **extra))
    return 0 if certificate.ok else 1


def cmd_build(config: RunConfig) -> int:
    """Build a group (exact l_p, Riesz mode or inline generators) and write it"""
    scheme = EnumerationScheme(kind=config.scheme, seed=config.seed)
    if config.generators:
        D = Subgroup.from_generators(config.generators, config.p)
    elif config.mode == "riesz":
        D = build_riesz(config.p, scheme, config.steps, config.eps, schedule=config.eps_schedule)
    else:
        D = build_lp(config.p, scheme, config.steps)
    if config.out:
        write_json_atomic(config.out, document(config, **group_payload(D)))
    sys.stdout.write(dumps(D.summary()))
    return 0


def cmd_verify(config: RunConfig) -> int:
    D = load_group(config.group)
    check = config.check
    try:
        if check == "separation":
            certificate = verify_separation(D, config.threshold, strict=config.strict)
        elif check == "density":
            certificate = verify_density(D, _processed_targets(D), config.radius)
        elif check == "vertex-contact":
            certificate = verify_vertex_contact(D)
        else:
            samples = sample_points(config.seed, config.samples, _sites(D), config.radius, D.p)
            certificate = verify_point_finiteness(D, samples, config.radius, bound=config.max_tiles)
    except CertificationError as exc:
        return _violation(config, check, exc)
    return _issued(config, check, certificate)


def cmd_voronoi(config: RunConfig) -> int:
    """Voronoi cell of a site with its inclusion certificate (p = 2)"""
    D = load_group(config.group)
    site = config.site or SparseVector()
    if site and subgroup_membership(D.generators, site) is None:
        raise ConfigError("--site is not an element of the group", site=site.to_json())
    density: Optional[Certificate] = None
    if D.scheme is not None and D.steps_consumed:
        density = verify_density(D, _processed_targets(D), config.r_dense)
    try:
        cell = voronoi_cell(D, site, config.r_dense, density=density)
    except DensityNotCertified as exc:
        polytope = exc.polytope.to_json() if exc.polytope is not None else None
        return _violation(config, "voronoi", exc, polytope=polytope)

    extra: Dict[str, Any] = {"polytope": cell.to_json()}
    if density is not None:
        extra["density"] = density.to_json()
    if site:
        extra["translation_consistent"] = translation_consistent(D, site, config.r_dense)
    if config.direction_source == "neighbours":
        directions = neighbour_directions(cell, config.r_dense, config.directions, seed=config.seed)
    else:
        directions = sample_directions(config.seed, config.directions, D.coordinates())
    try:
        certificate = inclusion_check(cell, config.r_sep, config.r_dense, directions)
    except CertificationError as exc:
        return _violation(config, "inclusion", exc, **extra)
    return _issued(config, "inclusion", certificate, **extra)


def cmd_report(config: RunConfig) -> int:
    """Tiling report as JSON, with a CSV of the same counts next to it"""
    D = load_group(config.group)
    tile_radius = PowThreshold.of(config.tile_radius)
    radii = [PowThreshold.of(r) for r in config.radii]
    samples = sample_points(config.seed, config.samples, _sites(D), tile_radius, D.p)
    delta = PowThreshold.of(config.delta) if config.delta is not None else None
    growth = []
    if config.stages:
        if D.scheme is None:
            raise ConfigError("--stages needs a built group with its enumeration scheme")
        growth = stage_growth(D.p, D.scheme, config.stages, tile_radius)
    try:
        report = build_report(D, tile_radius, radii, samples, delta=delta, growth=growth)
    except CertificationError as exc:
        return _violation(config, "report", exc)

    _emit(config, document(config, report=report.model_dump(mode="json")))
    if config.out:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(report_csv_rows(report))
        write_text_atomic(str(Path(config.out).with_suffix(".csv")), buffer.getvalue())
    return 0


def cmd_basis(config: RunConfig) -> int:
    """Free basis of the generated group plus a two-way membership transcript"""
    generators = load_generators(config.generators_file)
    basis = free_basis(generators, canonical=config.canonical)
    over_basis, over_generators = MembershipOracle(basis), MembershipOracle(generators)
    transcript = {
        "generators_in_basis": [over_basis.solve(g) for g in generators],
        "basis_in_generators": [over_generators.solve(b) for b in basis],
    }
    verified = all(c is not None for part in transcript.values() for c in part)
    _emit(
        config,
        document(
            config,
            basis=[b.to_json() for b in basis],
            rank=len(basis),
            transcript=transcript,
            verified=verified,
        ),
    )
    if not verified:
        logger.error("basis_not_verified", generators=len(generators), rank=len(basis))
        return 1
    return 0


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "build": cmd_build,
    "verify": cmd_verify,
    "voronoi": cmd_voronoi,
    "report": cmd_report,
    "basis": cmd_basis,
}
