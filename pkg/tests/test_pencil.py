"""Tests for the plane-curve pencil sampler."""

from __future__ import annotations

import math

import numpy as np
import pytest

from tropmass.measure import TWO_PI, assemble_limit_measure
from tropmass.model import coordinate_pencil as coordinate_pencil_model
from tropmass.pencil import (
    HypersurfacePencil,
    PencilError,
    predicted_edge_mass,
    sample_pencil,
    smoothness_check,
)
from tropmass.sampler import fit_mass_asymptotics


class TestPencilConfig:
    def test_unknown_preset_rejected(self):
        with pytest.raises(PencilError, match="preset"):
            HypersurfacePencil("banana")

    def test_epsilon_range(self):
        with pytest.raises(PencilError):
            HypersurfacePencil.coordinate(epsilon=0.0)
        with pytest.raises(PencilError):
            HypersurfacePencil.coordinate(epsilon=0.6)

    def test_coefficients(self):
        assert HypersurfacePencil.coordinate().coefficients(1e-3) == (1e-4, 1.0)
        assert HypersurfacePencil.fermat().coefficients(1e-3) == (1.0, 1e-4)

    def test_singular_radius(self):
        assert HypersurfacePencil.coordinate().singular_radius == pytest.approx(10 / 3)
        assert HypersurfacePencil.fermat().singular_radius == pytest.approx(30.0)

    def test_patch_labels(self):
        assert HypersurfacePencil.coordinate().patch_labels == (
            "E1&E2",
            "E0&E2",
            "E0&E1",
        )
        assert HypersurfacePencil.fermat().patch_labels == (
            "patch-0",
            "patch-1",
            "patch-2",
        )

    def test_t_validation(self):
        pen = HypersurfacePencil.coordinate(epsilon=0.5)
        # Singular radius 2/3; refuse |t| within a factor 3 of it.
        with pytest.raises(PencilError, match="singular"):
            pen.validate_t(0.3)
        with pytest.raises(PencilError):
            pen.validate_t(0.0)
        with pytest.raises(PencilError):
            pen.validate_t(0.6)

    def test_sampling_dimension_guard(self):
        with pytest.raises(NotImplementedError):
            sample_pencil(HypersurfacePencil.coordinate(n=3), 1e-3, 10_000, seed=0)

    def test_sample_count_floor(self):
        with pytest.raises(ValueError, match="sample count"):
            sample_pencil(HypersurfacePencil.coordinate(), 1e-3, 10, seed=0)

    def test_predicted_edge_mass(self):
        assert predicted_edge_mass(HypersurfacePencil.coordinate()) == 1.0
        with pytest.raises(PencilError):
            predicted_edge_mass(HypersurfacePencil.fermat())


class TestResidueFormGluing:
    def test_patch_transition_preserves_residue_form(self):
        # Exact identity: with (s, w) = (v/u, 1/u) one has
        # ds ^ dw = w^3 du ^ dv and F0 = w^3 F2 on the overlap, so the
        # residue forms of the two patches coincide on the curve.
        pen = HypersurfacePencil.coordinate()
        a, b = pen.coefficients(1e-3)
        u = 0.31 + 0.22j
        coeffs = [a, 0.0, b * u, a * (1 + u**3)]
        roots = np.roots(coeffs)
        for v in roots:
            f2_u = 3 * a * u**2 + b * v
            f2_v = 3 * a * v**2 + b * u
            dv_du = -f2_u / f2_v
            s, w = v / u, 1 / u
            ds_du = (dv_du * u - v) / u**2
            f0_w = 3 * a * w**2 + b * s
            ratio = ds_du / f0_w * f2_v
            assert ratio == pytest.approx(1.0, rel=1e-9)


@pytest.fixture(scope="module")
def run():
    return sample_pencil(HypersurfacePencil.coordinate(), 1e-5, 150_000, seed=11)


class TestCoordinatePencil:

    def test_edge_masses_equal_within_sigma(self, run):
        for i in range(3):
            for j in range(i + 1, 3):
                a, b = run.patches[i], run.patches[j]
                gap = abs(a.mass_raw - b.mass_raw)
                assert gap < 3 * math.hypot(a.stderr_raw, b.stderr_raw)

    def test_edge_uniformity_ks(self, run):
        for p in run.patches:
            assert p.ks_uniform is not None
            assert 0 < p.ks_uniform < 0.02

    def test_edge_mass_matches_local_annulus(self, run):
        # Finite-t closed form: each edge sees the annulus u v ~ t eps, of
        # log-length log(1/(|t| eps)), so the normalized mass is
        # log(1/(t eps)) / log(1/t) up to o(1).
        expected = math.log(1.0 / (1e-5 * run.epsilon)) / math.log(1.0 / 1e-5)
        for p in run.patches:
            assert p.mass == pytest.approx(expected, abs=0.01)

    def test_no_root_failures_and_positive_points(self, run):
        assert run.n_failures == 0
        for p in run.patches:
            assert p.n_points > 0
            assert p.hist_masses.sum() == pytest.approx(p.mass, rel=1e-9)

    def test_total_normalized_converges_to_limit_total(self):
        pen = HypersurfacePencil.coordinate()
        limit = sum(predicted_edge_mass(pen) for _ in range(3))
        vals = []
        for k in (3, 5, 7):
            t = 10.0**-k
            res = sample_pencil(pen, t, 60_000, seed=13)
            lam = 1.0 / math.log(1.0 / t)
            vals.append(res.total_normalized)
            assert abs(
                res.total_normalized - limit * (1.0 + lam * math.log(1.0 / pen.epsilon))
            ) < 0.05
        assert vals[0] > vals[1] > vals[2]
        assert abs(vals[-1] - limit) < 0.5

    def test_limit_total_matches_skeletal_measure(self):
        measure = assemble_limit_measure(coordinate_pencil_model(2))
        assert measure.total_mass == pytest.approx(3.0)
        pen = HypersurfacePencil.coordinate()
        assert sum(predicted_edge_mass(pen) for _ in range(3)) == measure.total_mass

    def test_gradient_floor_is_geometric(self, run):
        # The gradient minimum sits at the curve corners where
        # |grad F| ~ sqrt(2 |t| eps).
        assert run.gradient_min == pytest.approx(
            math.sqrt(2.0 * 1e-5 * run.epsilon), rel=0.2
        )

    def test_determinism(self):
        pen = HypersurfacePencil.coordinate()
        a = sample_pencil(pen, 1e-4, 20_000, seed=5)
        b = sample_pencil(pen, 1e-4, 20_000, seed=5)
        assert a.total_raw == b.total_raw
        c = sample_pencil(pen, 1e-4, 20_000, seed=5, shards=2, threads=2)
        d = sample_pencil(pen, 1e-4, 20_000, seed=5, shards=2)
        assert c.total_raw == d.total_raw

    def test_phase_near_invariance(self):
        # Unlike the monomial models, the pencil fiber volume depends on
        # arg t -- but only at order |t|, far below the leading log term.
        pen = HypersurfacePencil.coordinate()
        a = sample_pencil(pen, 1e-4, 20_000, seed=5)
        b = sample_pencil(pen, 1e-4 * np.exp(0.9j), 20_000, seed=5)
        assert b.total_raw == pytest.approx(a.total_raw, rel=1e-3)


class TestFermatPencil:
    def test_mass_constant_no_log_growth(self):
        pen = HypersurfacePencil.fermat()
        r2 = sample_pencil(pen, 1e-2, 60_000, seed=7)
        r7 = sample_pencil(pen, 1e-7, 60_000, seed=8)
        assert r2.n_failures == 0
        gap = abs(r2.total_raw - r7.total_raw)
        assert gap < 3 * math.hypot(r2.total_raw_stderr, r7.total_raw_stderr)
        assert r2.total_raw > 1.0

    def test_fit_shows_no_logarithm(self):
        pen = HypersurfacePencil.fermat()
        pts = [
            (10.0**-k, sample_pencil(pen, 10.0**-k, 30_000, seed=k).total_raw)
            for k in range(2, 8)
        ]
        fit = fit_mass_asymptotics(pts)
        assert fit.d_hat == 0
        assert fit.confident
        assert abs(fit.kappa_min_hat) < 0.01
        assert fit.c_hat > 1.0

    def test_no_ks_for_smooth_fibers(self):
        res = sample_pencil(HypersurfacePencil.fermat(), 1e-3, 20_000, seed=1)
        assert all(p.ks_uniform is None for p in res.patches)

    def test_mass_matches_elliptic_period_oracle(self):
        # At t = 0 the fiber is the Fermat cubic 1 + u^3 + v^3 = 0, which maps
        # to the j = 0 curve y^2 = x^3 - 432 by x = -12/(u+v), y = 36(u-v)/(u+v)
        # with dx/y = -du/F_v exactly.  The total measure is therefore the
        # covolume of the hexagonal period lattice: Omega^2 * sqrt(3)/2 with
        # real period Omega = (2/3) * 432**(-1/6) * B(1/6, 1/2).
        omega = (
            (2.0 / 3.0)
            * 432.0 ** (-1.0 / 6.0)
            * math.gamma(1.0 / 6.0)
            * math.gamma(0.5)
            / math.gamma(2.0 / 3.0)
        )
        covolume = omega * omega * math.sqrt(3.0) / 2.0
        assert covolume == pytest.approx(2.7028760880, abs=1e-9)
        res = sample_pencil(HypersurfacePencil.fermat(), 1e-3, 100_000, seed=2)
        assert abs(res.total_raw - covolume) < 4 * res.total_raw_stderr
        assert abs(res.total_raw - covolume) / covolume < 0.02


class TestSmoothness:
    def test_coordinate_pencil_clears_discriminant(self):
        rep = smoothness_check(HypersurfacePencil.coordinate(), 1e-3, seed=3)
        assert rep.passed
        assert rep.singular_radius == pytest.approx(10 / 3)
        assert rep.gradient_min > 1e-4

    def test_fermat_large_t_still_smooth(self):
        rep = smoothness_check(HypersurfacePencil.fermat(), 0.5, seed=3)
        assert rep.passed
        assert rep.gradient_min > 1.0
