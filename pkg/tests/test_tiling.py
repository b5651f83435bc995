"""
Tests for Voronoi cells and ball tilings

Tests:
- Voronoi half-spaces, membership, translation and symmetry
- inclusion certificates (R/2)B <= V_0 <= rB
- tiles containing a point, vertex contact and point finiteness
- disjointness witnesses, star degree, local counts and stage growth
- metric cells for p != 2
- the tiling report
"""
import time
from fractions import Fraction

import pytest

from tests.conftest import e, vec
from tilelat.builder.builder import build_lp
from tilelat.builder.models import Subgroup
from tilelat.builder.schemes import sample_directions, sample_points
from tilelat.enumerate.checks import count_in_ball, verify_density
from tilelat.enumerate.models import CertificateKind
from tilelat.errors import (
    ContactViolation,
    DensityNotCertified,
    InclusionViolation,
    NoWitnessAtStage,
    UnsupportedNorm,
)
from tilelat.exactvec import PowThreshold, SparseVector, distance_pow
from tilelat.tiling.models import CellMembership, HalfSpace, HPolytope
from tilelat.tiling.report import CSV_HEADER, build_report, report_csv_rows
from tilelat.tiling.tiles import (
    disjointness_witness,
    local_tile_count,
    stage_growth,
    star_degree,
    tile_counts,
    tiles_containing,
    verify_point_finiteness,
    verify_vertex_contact,
)
from tilelat.tiling.voronoi import (
    cell_membership,
    in_metric_cell,
    inclusion_check,
    neighbour_directions,
    nonconvexity_witness,
    translation_consistent,
    voronoi_cell,
)


@pytest.fixture
def square_cell(square_lattice) -> HPolytope:
    return voronoi_cell(square_lattice, SparseVector(), 2)


class TestVoronoiCell:
    """Exact half-space description of V_d"""

    def test_square_halfspaces(self, square_cell):
        for normal in (e(0, 2), e(0, -2), e(1, 2), e(1, -2)):
            assert HalfSpace(normal=normal, offset=2) in square_cell.halfspaces, f"missing bisector of {normal}"
        assert len(square_cell.halfspaces) == 8, "four axis and four diagonal neighbours within 2r"
        assert square_cell.certified

    @pytest.mark.parametrize(
        "x, expected",
        [
            (SparseVector(), CellMembership.INTERIOR),
            (vec(1, 1), CellMembership.BOUNDARY),
            (vec(Fraction(3, 2), 0), CellMembership.OUTSIDE),
            (vec(Fraction(1, 2), Fraction(-1, 2)), CellMembership.INTERIOR),
        ],
    )
    def test_membership(self, square_cell, x, expected):
        assert cell_membership(square_cell, x) == expected

    def test_trivial_group(self):
        with pytest.raises(DensityNotCertified) as info:
            voronoi_cell(Subgroup.trivial(2), SparseVector(), 1)
        assert info.value.polytope is not None and not info.value.polytope.certified

    def test_failed_density_certificate(self):
        D = Subgroup.from_generators([e(0, 2)], 2)
        gap = verify_density(D, [e(1, 3)], 1)
        assert gap.kind == CertificateKind.DENSITY_GAP
        with pytest.raises(DensityNotCertified) as info:
            voronoi_cell(D, SparseVector(), 1, density=gap)
        assert info.value.polytope.halfspaces, "the best-effort polytope is still attached"

    def test_needs_p2(self, square_lattice_l1):
        with pytest.raises(UnsupportedNorm):
            voronoi_cell(square_lattice_l1, SparseVector(), 2)

    def test_translation(self, square_lattice):
        assert translation_consistent(square_lattice, vec(2, -2), 2)

    def test_translation_and_symmetry_on_build(self, grid_scheme):
        D = build_lp(2, grid_scheme, 30)
        zero = SparseVector()
        cell = voronoi_cell(D, zero, 1)
        normals = {(h.normal, h.offset) for h in cell.halfspaces}
        assert normals == {(-n, offset) for n, offset in normals}, "V_0 = -V_0"

        points = sample_points(3, 200, [zero] + D.generators, 1, 2)
        for site in D.generators:
            at_site = voronoi_cell(D, site, 1)
            assert at_site.constraint_set() == cell.translated(site).constraint_set()
            for x in points[:40]:
                assert cell_membership(at_site, site + x) == cell_membership(cell, x)
        for x in points:
            assert cell_membership(cell, -x) == cell_membership(cell, x)


class TestInclusion:
    """(R/2)B <= V_0 <= rB"""

    def test_square_lattice(self, square_cell):
        directions = sample_directions(0, 100, [0, 1]) + [vec(1, 1)]
        certificate = inclusion_check(square_cell, 4, 2, directions)
        assert certificate.kind == CertificateKind.INCLUSION_OK
        assert certificate.bound["max_exit_pow"] == "2/1", "the corner (1, 1) is the farthest exit"

    def test_plane_too_close(self):
        cell = HPolytope(center=SparseVector(), halfspaces=[HalfSpace(normal=e(0), offset=1)], cutoff=PowThreshold(c=4))
        with pytest.raises(InclusionViolation) as info:
            inclusion_check(cell, 9, 1, [])
        assert info.value.halfspace.normal == e(0)

    def test_unbounded_direction(self):
        cell = HPolytope(center=SparseVector(), halfspaces=[HalfSpace(normal=e(0), offset=1)], cutoff=PowThreshold(c=4))
        with pytest.raises(InclusionViolation) as info:
            inclusion_check(cell, 4, 1, [e(0, -1)])
        assert info.value.direction == e(0, -1)

    def test_outer_violation(self, square_cell):
        with pytest.raises(InclusionViolation):
            inclusion_check(square_cell, 4, 1, [vec(1, 1)])

    def test_translated_cell(self, square_lattice):
        cell = voronoi_cell(square_lattice, vec(2, 2), 2)
        assert inclusion_check(cell, 4, 2, sample_directions(1, 20, [0, 1])).ok

    def test_build_inclusion(self, lp2_build):
        started = time.perf_counter()
        cell = voronoi_cell(lp2_build, SparseVector(), 1)
        directions = neighbour_directions(cell, 1, 100, seed=0)
        certificate = inclusion_check(cell, 2, 1, directions)
        elapsed = time.perf_counter() - started
        assert certificate.kind == CertificateKind.INCLUSION_OK
        assert certificate.count == 100 and len(set(directions)) > 1
        assert elapsed < 120, f"cell and inclusion took {elapsed:.1f}s"

        # no element uses a fresh coordinate, so the cell is unbounded along it
        with pytest.raises(InclusionViolation) as info:
            inclusion_check(cell, 2, 1, [e(lp2_build.fresh_coordinate())])
        assert info.value.direction == e(lp2_build.fresh_coordinate())


class TestTiles:
    """Tiles d + rB containing points"""

    def test_midpoint_of_line(self, line_lattice):
        assert tiles_containing(line_lattice, e(0), 1) == [SparseVector(), e(0, 2)]
        assert tiles_containing(line_lattice, SparseVector(), 1) == [SparseVector()]

    def test_counts_keep_order(self, line_lattice):
        points = [e(0), SparseVector(), e(0, 3)]
        assert [c.count for c in tile_counts(line_lattice, points, 1)] == [2, 1, 2]

    def test_vertex_contact_on_build(self, lp1_build):
        certificate = verify_vertex_contact(lp1_build)
        assert certificate.kind == CertificateKind.CONTACT_OK
        assert certificate.count >= 2, "the half target (1, 1/2) puts some +-2e_a in D"
        for entry in certificate.bound["contacts"]:
            assert len(entry) == 1 and entry[0][1] in ("2/1", "-2/1"), f"contact {entry} is not +-2e_a"

    def test_vertex_contact_violation(self):
        with pytest.raises(ContactViolation) as info:
            verify_vertex_contact(Subgroup.from_generators([vec(1, 1)], 1))
        assert info.value.witness == vec(1, 1)

    def test_vertex_contact_trivial(self):
        certificate = verify_vertex_contact(Subgroup.trivial(1))
        assert certificate.ok and certificate.count == 0

    def test_vertex_contact_needs_l1(self, square_lattice):
        with pytest.raises(UnsupportedNorm):
            verify_vertex_contact(square_lattice)

    def test_point_finiteness_on_build(self, lp1_build):
        sites = [SparseVector()] + lp1_build.generators
        samples = sample_points(0, 200, sites, 1, 1)
        counts = tile_counts(lp1_build, samples, 1)
        assert all(c.count >= 1 for c in counts), "every sample lies in the tile it was drawn from"
        doubled = SparseVector.from_json(verify_vertex_contact(lp1_build).bound["contacts"][0])
        assert len(tiles_containing(lp1_build, doubled * Fraction(1, 2), 1)) == 2, "a contact point lies in two tiles"
        certificate = verify_point_finiteness(lp1_build, samples, 1)
        assert certificate.kind == CertificateKind.POINT_FINITE_OK
        assert certificate.count == max(c.count for c in counts) <= 2

    def test_point_finiteness_violation(self, square_lattice_l1):
        samples = [vec(Fraction(1, 2), 0), vec(1, 1)]
        certificate = verify_point_finiteness(square_lattice_l1, samples, 2)
        assert certificate.kind == CertificateKind.POINT_FINITE_VIOLATED
        assert certificate.witness == vec(1, 1) and certificate.count == 4


class TestDisjointness:
    """Distinct tiles that meet"""

    def test_line(self, line_lattice):
        assert disjointness_witness(line_lattice, 1) == (e(0, 2), SparseVector())

    def test_square_l1(self, square_lattice_l1):
        d, h2 = disjointness_witness(square_lattice_l1, 1)
        assert d != h2 and distance_pow(d, h2, 1) == 2

    def test_trivial(self):
        with pytest.raises(NoWitnessAtStage):
            disjointness_witness(Subgroup.trivial(1), 1)

    def test_l1_build(self, lp1_build):
        d, h2 = disjointness_witness(lp1_build, 1)
        assert d == vec(2, 1), "g_1 / 2 = (1, 1/2) was a target, so g_1 gives the witness"
        assert d != h2
        assert distance_pow(d, h2, 1) <= 2, "tiles of radius 1 meet only when centers are within 2"

    def test_early_l1_stage_has_none(self, grid_scheme):
        with pytest.raises(NoWitnessAtStage):
            disjointness_witness(build_lp(1, grid_scheme, 50), 1)


class TestCounts:
    """Star degree, local tile counts and growth across stages"""

    def test_star_degree(self, square_lattice_l1):
        assert star_degree(square_lattice_l1, 1) == 4
        assert star_degree(Subgroup.trivial(1), 1) == 0

    def test_local_tile_count(self, square_lattice):
        assert local_tile_count(square_lattice, vec(1, 1), Fraction(1, 100), 2) == 4
        assert local_tile_count(square_lattice, SparseVector(), Fraction(1, 100), 2) == 1

    def test_local_tile_count_needs_p2(self, square_lattice_l1):
        with pytest.raises(UnsupportedNorm):
            local_tile_count(square_lattice_l1, SparseVector(), 1, 1)

    def test_stage_growth(self, grid_scheme):
        rows = stage_growth(1, grid_scheme, [100, 25, 50], 1)
        assert [row.steps for row in rows] == [25, 50, 100]
        for earlier, later in zip(rows, rows[1:]):
            assert earlier.star_degree <= later.star_degree, "groups are nested across stages"
            assert earlier.ball_count <= later.ball_count
            assert earlier.generators <= later.generators

    def test_l1_star_degree_grows(self, grid_scheme):
        rows = stage_growth(1, grid_scheme, [50, 100, 200, 400], 1)
        degrees = [row.star_degree for row in rows]
        assert degrees == sorted(degrees)
        assert degrees[0] == 0 and degrees[-1] > degrees[0], f"star degree should grow, got {degrees}"

    def test_stage_matches_direct_count(self, grid_scheme, lp1_build):
        (row,) = stage_growth(1, grid_scheme, [200], 1)
        assert row.generators == lp1_build.rank
        assert row.star_degree == star_degree(lp1_build, 1)
        assert row.ball_count == count_in_ball(lp1_build, 2).count


class TestMetricCells:
    """V_0 membership for any p"""

    def test_line(self, line_lattice):
        assert in_metric_cell(line_lattice, e(0)), "the midpoint ties with 2e_0"
        assert not in_metric_cell(line_lattice, e(0, Fraction(3, 2)))

    def test_l2_cells_are_convex(self, square_lattice):
        points = [vec(1, 0), vec(0, 1), vec(Fraction(1, 2), Fraction(1, 2)), vec(-1, -1)]
        assert nonconvexity_witness(square_lattice, points) is None

    def test_l1_cell_is_not_convex(self):
        D = Subgroup.from_generators([vec(2, 2)], 1)
        a, b = vec(-1, 5), vec(5, -1)
        assert in_metric_cell(D, a) and in_metric_cell(D, b)
        assert nonconvexity_witness(D, [a, b]) == (a, b, vec(2, 2))


class TestReport:
    """TilingReport assembly and CSV rows"""

    def test_square_lattice(self, square_lattice):
        radius = PowThreshold(c=1)
        samples = [SparseVector(), vec(1, 1)]
        report = build_report(
            square_lattice, radius, [PowThreshold(c=4)], samples, delta=PowThreshold(c=Fraction(1, 100))
        )
        assert report.star_degree == 4
        assert [entry.count for entry in report.ball_counts] == [5]
        assert report.disjointness_witness == (e(0, 2), SparseVector())
        assert report.vertex_contact is None, "vertex contact is an l_1 measurement"
        assert [entry.count for entry in report.point_finiteness_samples] == [1, 0]
        assert [entry.count for entry in report.local_tile_counts] == [1, 0]

        rows = report_csv_rows(report)
        assert all(len(row) == len(CSV_HEADER) for row in rows)
        assert rows[0][:4] == ["star_degree", "1/1", "", "4"]

    def test_trivial_group_notes(self):
        report = build_report(Subgroup.trivial(1), PowThreshold(c=1), [], [])
        assert report.star_degree == 0
        assert report.disjointness_witness is None and report.notes
        assert report.vertex_contact.count == 0

    def test_contact_violation_becomes_a_note(self):
        D = Subgroup.from_generators([vec(1, 1)], 1)
        report = build_report(D, PowThreshold(c=1), [], [])
        assert report.vertex_contact is None
        assert any(note.startswith("vertex contact") for note in report.notes)
