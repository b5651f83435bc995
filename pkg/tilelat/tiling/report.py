from typing import List, Optional, Sequence

import structlog

from tilelat.builder.models import Subgroup
from tilelat.enumerate.checks import count_in_ball
from tilelat.errors import ContactViolation, NoWitnessAtStage
from tilelat.exactvec import PowThreshold, SparseVector, format_rational
from tilelat.tiling.models import BallCount, StageGrowth, TileCount, TilingReport
from tilelat.tiling.tiles import (
    disjointness_witness,
    local_tile_count,
    star_degree,
    tile_counts,
    verify_vertex_contact,
)

logger = structlog.get_logger("report")

CSV_HEADER = ["section", "radius_pow", "point", "count", "steps", "generators", "approx_radius"]


def build_report(D: Subgroup, tile_radius: PowThreshold, radii: Sequence[PowThreshold],
                 samples: Sequence[SparseVector], delta: Optional[PowThreshold] = None,
                 growth: Sequence[StageGrowth] = ()) -> TilingReport:
    """Collect star degree, ball counts, witnesses and sample counts for one group"""
    notes: List[str] = []
    report = TilingReport(
        p=D.p,
        tile_radius=tile_radius.c,
        star_degree=star_degree(D, tile_radius),
        ball_counts=[BallCount(radius=r.c, count=count_in_ball(D, r).count) for r in radii],
        point_finiteness_samples=tile_counts(D, samples, tile_radius),
        stage_growth=list(growth),
    )

    try:
        report.disjointness_witness = disjointness_witness(D, tile_radius)
    except NoWitnessAtStage as exc:
        notes.append(f"disjointness: {exc.message}")

    if D.p == 1:
        try:
            report.vertex_contact = verify_vertex_contact(D)
        except ContactViolation as exc:
            notes.append(f"vertex contact: {exc.message} ({exc.witness.to_json()})")
    if D.p == 2 and delta is not None:
        report.local_tile_counts = [
            TileCount(point=x, count=local_tile_count(D, x, delta, tile_radius)) for x in samples
        ]
    report.notes = notes
    logger.info("report_built", star_degree=report.star_degree, samples=len(samples), notes=len(notes))
    return report


def _approx(value) -> str:
    # display only
    return f"{float(value):.6g}"


def report_csv_rows(report: TilingReport) -> List[List[str]]:
    """Flat rows for external plotting; the approx_radius column is a float rendering"""
    p = report.p
    rows = [["star_degree", format_rational(report.tile_radius), "", str(report.star_degree), "", "", ""]]
    for entry in report.ball_counts:
        rows.append(["ball_count", format_rational(entry.radius), "", str(entry.count), "", "",
                     _approx(float(entry.radius) ** (1 / p))])
    for entry in report.point_finiteness_samples:
        rows.append(["tiles_containing", format_rational(report.tile_radius), str(entry.point.to_json()),
                     str(entry.count), "", "", ""])
    for entry in report.local_tile_counts:
        rows.append(["local_tile_count", format_rational(report.tile_radius), str(entry.point.to_json()),
                     str(entry.count), "", "", ""])
    for entry in report.stage_growth:
        rows.append(["stage_growth", format_rational(entry.radius), "", str(entry.star_degree),
                     str(entry.steps), str(entry.generators), _approx(float(entry.radius) ** (1 / p))])
    return rows
