"""
Tests for exhaustive ball enumeration and the certificates built on it

Tests:
- enumerate_group_ball examples, routes and oracle equivalence with brute force
- separation, density and counting certificates
- separated subsets and Kottman witnesses
"""
from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tests.conftest import e, vec
from tilelat.builder.builder import build_lp
from tilelat.builder.models import Subgroup
from tilelat.enumerate.checks import (
    count_in_ball,
    kottman_witness,
    nearest_elements,
    separated_subset,
    verify_density,
    verify_separation,
)
from tilelat.enumerate.models import BallQuery, CertificateKind
from tilelat.enumerate.search import coefficient_range, enumerate_group_ball, triangular_frame
from tilelat.errors import BoundUnderivable, EmptyBall, UnsupportedNorm
from tilelat.exactvec import PowThreshold, SparseVector, distance_pow, norm_pow
from tilelat.tiling.tiles import verify_vertex_contact


def ball(D, c, center=None, strict=False, **kwargs):
    query = BallQuery(center=center or SparseVector(), radius=PowThreshold(c=Fraction(c)), strict=strict)
    return enumerate_group_ball(D, query, **kwargs)


# ─── Strategies ──────────────────────────────────────────────────────────────

small_entries = st.builds(Fraction, st.integers(min_value=-3, max_value=3), st.sampled_from([1, 2]))
pivot_scales = st.sampled_from([Fraction(1), Fraction(2), Fraction(-1), Fraction(-2)])
couplings = st.sampled_from([Fraction(0), Fraction(1, 2), Fraction(-1, 2)])


@st.composite
def framed_generators(draw):
    """Up to three generators with a triangular frame on pivots 3, 4, 5.

    Generator k has free entries on coordinates 0..2, a pivot 3 + k and
    couplings of size <= 1/2 on earlier pivots, which keeps every
    coefficient of an element of norm <= 2 within |n| <= 6.
    """
    count = draw(st.integers(min_value=1, max_value=3))
    generators = []
    for k in range(count):
        entries = {i: draw(small_entries) for i in range(3)}
        for j in range(k):
            entries[3 + j] = draw(couplings)
        entries[3 + k] = draw(pivot_scales)
        generators.append(SparseVector(entries))
    return generators


class TestEnumerateGroupBall:
    """Exhaustive enumeration of D ∩ ball"""

    def test_square_lattice(self, square_lattice):
        result = ball(square_lattice, 4)
        assert set(result.elements()) == {SparseVector(), e(0, 2), e(0, -2), e(1, 2), e(1, -2)}
        assert result.certified and result.route == "fresh"

    def test_multiples_of_three(self):
        D = Subgroup.from_generators([e(0, 3)], 1)
        assert ball(D, 2).elements() == [SparseVector()]

    def test_single_generator(self):
        g = vec(2, 1)
        D = Subgroup.from_generators([g], 2)
        assert set(ball(D, 5).elements()) == {SparseVector(), g, -g}

    def test_canonical_order(self, square_lattice):
        distances = [point.distance_pow for point in ball(square_lattice, 8)]
        assert distances == sorted(distances), "points must come nearest first"

    def test_strict_excludes_boundary(self, square_lattice):
        assert len(ball(square_lattice, 4, strict=True)) == 1

    def test_coefficients_match_elements(self, lp2_build):
        for point in ball(lp2_build, 3):
            assert lp2_build.element(point.coefficients) == point.element

    def test_threads_do_not_change_result(self, lp2_build):
        single = ball(lp2_build, 3, threads=1)
        pooled = ball(lp2_build, 3, threads=4)
        assert single.points == pooled.points

    def test_gram_route_agrees(self, grid_scheme):
        D = build_lp(2, grid_scheme, 30)
        center = vec(Fraction(1, 2), Fraction(-3, 4))
        fresh = ball(D, 4, center=center)
        gram = ball(D, 4, center=center, route="gram")
        assert fresh.elements() == gram.elements()

    @pytest.mark.parametrize("strict", [False, True])
    def test_free_levels_agree_with_gram(self, grid_scheme, strict):
        D = build_lp(2, grid_scheme, 60)
        newest = D.records[-1].fresh_index
        centers = [SparseVector(), vec(Fraction(1, 2), 1), e(0) + e(newest, Fraction(1, 2)), D.generators[3]]
        for center in centers:
            fresh = ball(D, 4, center=center, strict=strict)
            gram = ball(D, 4, center=center, strict=strict, route="gram")
            assert fresh.elements() == gram.elements(), f"routes disagree around {center}"
            for point in fresh:
                assert D.element(point.coefficients) == point.element

    def test_no_frame_needs_box(self):
        D = Subgroup.from_generators([vec(1, 1), vec(1, -1)], 2)
        assert triangular_frame(D) is None
        with pytest.raises(BoundUnderivable):
            ball(D, 2)
        boxed = ball(D, 2, coefficient_box=3)
        assert not boxed.certified
        assert set(boxed.elements()) == {SparseVector(), vec(1, 1), vec(1, -1), vec(-1, -1), vec(-1, 1)}

    def test_gram_route_limits(self):
        with pytest.raises(UnsupportedNorm):
            ball(Subgroup.from_generators([e(0)], 1), 1, route="gram")
        with pytest.raises(BoundUnderivable):
            ball(Subgroup.from_generators([e(0), e(0, 2)], 2), 1, route="gram")

    def test_coefficient_range(self):
        assert coefficient_range(Fraction(0), Fraction(2), Fraction(4), 2) == [-1, 0, 1]
        assert coefficient_range(Fraction(1, 2), Fraction(1), Fraction(1, 2), 1) == [-1, 0]
        assert coefficient_range(Fraction(0), Fraction(1), Fraction(-1), 2) == []

    @given(generators=framed_generators())
    @settings(max_examples=100, deadline=None)
    def test_matches_brute_force(self, generators):
        """Frame enumeration equals a brute-force coefficient box, p in {1, 2}"""
        box = range(-6, 7)
        elements = set()
        for coefficients in product(box, repeat=len(generators)):
            x = SparseVector()
            for n, g in zip(coefficients, generators):
                x = x + g * n
            elements.add(x)
        for p, radii in ((1, (1, Fraction(3, 2), 2)), (2, (1, 2, 4))):
            D = Subgroup.from_generators(generators, p)
            for c in radii:
                expected = {x for x in elements if norm_pow(x, p) <= c}
                found = set(ball(D, c).elements())
                assert found == expected, f"p={p}, c={c}: {found ^ expected}"


class TestSeparation:
    """verify_separation certificates and witnesses"""

    def test_l1_square_strict(self, square_lattice_l1):
        certificate = verify_separation(square_lattice_l1, 2, strict=True)
        assert certificate.kind == CertificateKind.SEPARATION_VIOLATED
        assert certificate.witness == e(0, 2), f"witness should be 2e_0, got {certificate.witness}"
        assert verify_separation(square_lattice_l1, 2).ok, "non-strict c=2 holds"

    def test_threshold_above_minimum(self, square_lattice):
        certificate = verify_separation(square_lattice, 9)
        assert not certificate.ok and certificate.witness == e(0, 2)
        assert certificate.coefficients == [1, 0]

    def test_lp2_build_strict(self, lp2_build):
        assert verify_separation(lp2_build, 2, strict=True).kind == CertificateKind.SEPARATION_OK

    def test_lp1_build(self, lp1_build):
        assert verify_separation(lp1_build, 2).ok, "non-strict 2-separation holds"
        strict = verify_separation(lp1_build, 2, strict=True)
        assert strict.kind == CertificateKind.SEPARATION_VIOLATED
        (index, value), = strict.witness.entries
        assert value == 2, f"witness must be 2e_a, got {strict.witness}"
        assert lp1_build.element(strict.coefficients) == strict.witness
        assert verify_vertex_contact(lp1_build).count >= 2

    def test_trivial_group(self):
        assert verify_separation(Subgroup.trivial(2), 100).ok


class TestNearestAndDensity:
    """nearest_elements, verify_density and count_in_ball"""

    def test_midpoint_of_line(self, line_lattice):
        nearest = nearest_elements(line_lattice, e(0), 1)
        assert [(n.element, n.distance_pow) for n in nearest] == [(SparseVector(), 1), (e(0, 2), 1)]

    def test_member_at_radius_zero(self, square_lattice):
        d = vec(2, -2)
        assert [(n.element, n.distance_pow) for n in nearest_elements(square_lattice, d, 0)] == [(d, 0)]

    def test_single_generator_nearest(self):
        D = Subgroup.from_generators([vec(2, 1)], 2)
        nearest = nearest_elements(D, e(0, 2), 1)
        assert [(n.element, n.distance_pow) for n in nearest] == [(vec(2, 1), 1)]

    def test_empty_ball(self, line_lattice):
        with pytest.raises(EmptyBall):
            nearest_elements(line_lattice, e(0), Fraction(1, 2))

    def test_density_gap(self):
        certificate = verify_density(Subgroup.trivial(2), [e(0, 3)], 1)
        assert certificate.kind == CertificateKind.DENSITY_GAP and certificate.witness == e(0, 3)

    def test_density_square(self, square_lattice):
        certificate = verify_density(square_lattice, [vec(1, 1)], 2)
        assert certificate.kind == CertificateKind.DENSITY_OK
        assert certificate.bound["max_distance_pow"] == "2/1"

    def test_count(self, square_lattice):
        assert count_in_ball(square_lattice, 4).count == 5
        assert count_in_ball(Subgroup.trivial(1), 7).count == 1

    def test_counts_grow_with_stage(self, grid_scheme):
        small, large = build_lp(2, grid_scheme, 50), build_lp(2, grid_scheme, 150)
        assert count_in_ball(small, 9).count <= count_in_ball(large, 9).count


class TestKottman:
    """Separated subsets and unit sequences at distance 2^(1/p)"""

    def test_separated_subset(self):
        points = [SparseVector(), e(0), e(0, 3)]
        assert separated_subset(points, 2, p=1) == [SparseVector(), e(0, 3)]

    def test_far_points_kept(self):
        points = [e(0, 5 * k) for k in range(4)]
        assert separated_subset(points, 1, p=2) == points

    def test_cluster_collapses(self):
        points = [e(0, Fraction(k, 10)) for k in range(5)]
        assert len(separated_subset(points, 1, p=2)) == 1

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_kottman_witness(self, p):
        witness = kottman_witness(p, 100)
        assert len(witness) == 100
        assert all(norm_pow(v, p) == 1 for v in witness)
        assert all(distance_pow(a, b, p) == 2 for a, b in combinations(witness, 2))

    def test_kottman_needs_two(self):
        with pytest.raises(ValueError):
            kottman_witness(2, 1)
