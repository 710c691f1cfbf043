"""Finite base-change arithmetic: splitting degrees, volume/residual scaling, pushforward."""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tropmass.basechange import (
    face_base_change,
    kappa_scaling_check,
    model_base_change,
    pushforward_identity_check,
)
from tropmass.lattice import simplex_volume
from tropmass.measure import assemble_limit_measure
from tropmass.model import Component, Stratum, WeightedSncModel, annulus, coordinate_pencil


def edge_model(b0, b1, a0=0, a1=0):
    return WeightedSncModel(
        components=(Component("E0", b0, Fraction(a0)), Component("E1", b1, Fraction(a1))),
        strata=(Stratum(("E0",)), Stratum(("E1",)), Stratum(("E0", "E1"))),
    )


class TestFaceBaseChange:
    def test_doubled_edge_order_two(self):
        r = face_base_change((2, 2), 2)
        assert (r.e, r.fg, r.b_prime) == (1, 2, 1)
        assert r.volume_scale == 2
        assert r.residual_scale == Fraction(1, 4)
        assert r.consistent

    def test_coprime_point(self):
        r = face_base_change((3,), 2)
        assert (r.e, r.fg, r.b_prime) == (2, 1, 3)

    def test_semistable(self):
        for m in (1, 2, 5):
            r = face_base_change((1, 1, 1), m)
            assert (r.e, r.fg, r.b_prime) == (m, 1, 1)
            assert r.volume_scale == m**2

    def test_explicit_g(self):
        r = face_base_change((4, 4), 4, g=2)
        assert (r.fg, r.g, r.f) == (4, 2, 2)
        assert r.e * r.f * r.g == 4

    def test_invalid_g(self):
        with pytest.raises(ValueError, match="divide"):
            face_base_change((2, 2), 2, g=4)

    def test_efg_product_grid(self):
        for b0, b1, m in product(range(1, 7), range(1, 7), range(1, 13)):
            r = face_base_change((b0, b1), m)
            assert r.e * r.f * r.g == m
            assert r.e == r.e_lattice_check

    @given(
        st.lists(st.integers(1, 9), min_size=1, max_size=4),
        st.integers(1, 12),
    )
    def test_lattice_cross_check(self, b, m):
        r = face_base_change(tuple(b), m)
        assert r.e == r.e_lattice_check == m // math.gcd(m, math.gcd(*b))

    def test_volume_scaling_via_chart(self):
        # The pulled-back simplex is the m-fold dilation: its chart image
        # scales by m^p while the chart density is unchanged.
        from tropmass.lattice import chart_volume, normalized_density_chart

        for b, m in [((2, 2), 2), ((2, 3), 6), ((1, 2, 3), 4)]:
            p = len(b) - 1
            dil = Fraction(m) ** p * chart_volume(b) * normalized_density_chart(b)
            r = face_base_change(b, m)
            assert dil == r.volume_scale * simplex_volume(b)


class TestModelBaseChange:
    def test_table_rows(self):
        report = model_base_change(coordinate_pencil(2), 3)
        rows = report.rows()
        assert len(rows) == 6
        assert all(r["e"] == "3" and r["fg"] == "1" for r in rows)

    def test_unknown_face_in_g_choices(self):
        with pytest.raises(ValueError, match="unknown faces"):
            model_base_change(annulus(), 2, {"E0&E9": 1})


class TestPushforwardIdentity:
    def test_reduced_face_trivial(self):
        measure = assemble_limit_measure(annulus(), {"E0&E1": 1.0})
        check = pushforward_identity_check(measure, 5)
        assert check.passed
        assert all(row["discrepancy"] == 0 for row in check.per_face)

    def test_doubled_edge_worked_example(self):
        measure = assemble_limit_measure(edge_model(2, 2), {"E0&E1": 1.0})
        check = pushforward_identity_check(measure, 2)
        (row,) = check.per_face
        assert row["lhs"] == Fraction(1, 2) == row["rhs"]
        assert check.passed

    def test_exhaustive_grid(self):
        for b0, b1, m in product(range(1, 5), range(1, 5), range(1, 7)):
            measure = assemble_limit_measure(edge_model(b0, b1), {"E0&E1": 1.0})
            assert pushforward_identity_check(measure, m).passed, (b0, b1, m)

    def test_with_nondefault_g(self):
        measure = assemble_limit_measure(edge_model(4, 4), {"E0&E1": 1.0})
        check = pushforward_identity_check(measure, 4, {"E0&E1": 2})
        assert check.passed

    @given(st.integers(1, 9), st.integers(1, 9), st.integers(1, 12))
    def test_identity_property(self, b0, b1, m):
        measure = assemble_limit_measure(edge_model(b0, b1), {"E0&E1": 1.0})
        assert pushforward_identity_check(measure, m).passed


class TestKappaScaling:
    def test_zero_minimum_preserved(self):
        for m in (1, 2, 7):
            assert kappa_scaling_check(coordinate_pencil(2), m)

    def test_half_slope_doubles(self):
        model = edge_model(1, 2, a0=0, a1=1)  # kappa = [0, 1/2]
        assert kappa_scaling_check(model, 2)

    def test_identity_base_change(self):
        assert kappa_scaling_check(edge_model(3, 5, a0=1, a1=2), 1)

    @given(
        st.integers(1, 6),
        st.integers(1, 6),
        st.fractions(min_value=-3, max_value=3),
        st.fractions(min_value=-3, max_value=3),
        st.integers(1, 10),
    )
    def test_scaling_property(self, b0, b1, a0, a1, m):
        assert kappa_scaling_check(edge_model(b0, b1, a0, a1), m)
