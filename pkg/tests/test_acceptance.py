"""Acceptance suite: ten end-to-end checks, one line of output each.

Each test drives the corresponding named suite of the command-line harness
(``tropmass verify --suite NAME``) at full, non-quick sample sizes with a
fixed seed, prints exactly one ``ACCEPTANCE n: PASS/FAIL`` line, and fails if
any check inside the suite fails or a stated time budget is exceeded.  The
lines are emitted with output capture disabled, so plain
``pytest tests/test_acceptance.py`` shows them as the checks complete.
"""

from __future__ import annotations

import time

from tropmass.cli import SUITES

SEED = 0


def run_suite(capfd, number: int, label: str, suite_name: str, budget: float | None = None):
    t0 = time.perf_counter()
    verdicts = SUITES[suite_name](seed=SEED)
    elapsed = time.perf_counter() - t0
    failures = [v for v in verdicts if not v.passed]
    over_budget = budget is not None and elapsed >= budget
    status = "PASS" if not failures and not over_budget else "FAIL"
    with capfd.disabled():
        print(
            f"\nACCEPTANCE {number}: {status} - {label} "
            f"({len(verdicts)} checks, {elapsed:.2f}s)",
            flush=True,
        )
    assert not failures, "; ".join(
        f"{v.name}: {v.detail} (discrepancy {v.discrepancy:.4g}, limit {v.limit:g})"
        for v in failures
    )
    if budget is not None:
        assert elapsed < budget, f"{elapsed:.2f}s exceeds the {budget:.0f}s budget"
    return verdicts


def test_01_simplex_volume_matches_lattice_index_oracle(capfd):
    run_suite(capfd, 1, "simplex volumes match the lattice-index oracle exactly", "lattice", budget=1.0)


def test_02_annulus_unit_mass_and_asymptotic_fit(capfd):
    run_suite(capfd, 2, "annulus carries unit mass; fit recovers (d, kappa, c)", "annulus-mass", budget=60.0)


def test_03_twisted_chart_mass_converges_to_pi(capfd):
    run_suite(capfd, 3, "twisted chart mass converges to pi; closed form exact", "chart-residual")


def test_04_pushforward_histogram_uniform_on_half_interval(capfd):
    run_suite(capfd, 4, "pushforward: total 1/2, uniform on [0, 1/2]", "pushforward")


def test_05_positive_decay_rate_rescaled_mass_bounded(capfd):
    run_suite(capfd, 5, "rescaled mass stays bounded on a decaying chart", "decay")


def test_06_polar_identities_for_random_trig_polynomials(capfd):
    run_suite(capfd, 6, "polar identities for random trigonometric polynomials", "polar")


def test_07_base_change_splitting_and_pushforward_exact(capfd):
    run_suite(capfd, 7, "base-change splitting and pushforward identities exact", "base-change", budget=1.0)


def test_08_coordinate_pencil_edge_masses_and_residues(capfd):
    run_suite(capfd, 8, "pencil: equal edge masses, uniform edges, constant residue", "pencil", budget=300.0)


def test_09_hybrid_limits_and_seminorm_identities(capfd):
    run_suite(capfd, 9, "hybrid limit membership and seminorm identities", "hybrid")


def test_10_non_semistable_skeleton_weights_non_uniform(capfd):
    run_suite(capfd, 10, "non-semistable skeleton gives a non-uniform limit measure", "regression")
