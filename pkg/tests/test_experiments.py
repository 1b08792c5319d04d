"""
Tests for wehrl/experiments.py
"""

import math

import numpy as np
from pytest import approx, mark, raises

from wehrl.config import SweepConfig
from wehrl.errors import ConfigError, DomainError
from wehrl.experiments import (STATUS_EXTREMAL, STATUS_LINEAR, STATUS_OK, STATUS_SUB_THRESHOLD, STATUS_VIOLATION,
                               StabilityRecord, Stopwatch, ball_radius, differential_inequality_audit,
                               flag_ratio_collapse, fock_limit_check, fock_norm_squared, fock_oracle,
                               generate_items, generate_state_items, sharpness_family, sharpness_polynomial,
                               summarize, sweep_concentration_stability, sweep_lieb_solovej,
                               sweep_state_stability, sweep_wehrl_stability)
from wehrl.formats import save_poly
from wehrl.functionals import ConvexFn
from wehrl.polyspace import AffinePoly, HomPoly, affine_from_coeff_map, basis_size


def small_config(**changes):
    base = dict(d=1, N=3, count=3, phi=['power:2', 'xlogx'], samples=20_000, workers=1, random_regions=2,
                asymmetry_samples=5_000, audit_samples=20_000)
    base.update(changes)
    return SweepConfig(**base)


def test_items_are_reproducible():
    first = generate_items(small_config())
    second = generate_items(small_config())
    assert [item.seed for item in first] == [item.seed for item in second]
    for a, b in zip(first, second):
        np.testing.assert_array_equal(a.poly.coeffs, b.poly.coeffs)
    assert len({item.seed for item in first}) == 3
    other = generate_items(small_config(seed=1))
    assert not np.allclose(other[0].poly.coeffs, first[0].poly.coeffs)


def test_near_kernel_items():
    items = generate_items(small_config(generator='near_kernel', count=4, eps_min=0.01, eps_max=0.5))
    assert [item.eps for item in items] == approx(list(np.geomspace(0.01, 0.5, 4)))
    for item in items:
        assert item.poly.norm() == approx(1.0)


def test_file_items_are_normalized(tmp_path):
    path = str(tmp_path / "q.json")
    save_poly(HomPoly.monomial(1, 3, (2, 1), 3.0), path)
    items = generate_items(small_config(generator='file', poly_file=path))
    assert len(items) == 1
    assert items[0].poly.norm() == approx(1.0)


def test_state_items():
    states = generate_state_items(small_config(state_rank=10))
    assert all(item.state.rank == basis_size(1, 3) for item in states)
    coherent = generate_state_items(small_config(generator='kernel'))
    assert all(item.state.rank == 1 and item.eps == 0.0 for item in coherent)


def test_lieb_solovej_sweep_has_no_violations():
    config = small_config(phi=['xlogx', 'power:2', 'hinge:0.3', 'hinge:0.7'], count=4)
    records = sweep_lieb_solovej(config)
    assert len(records) == 4 * (4 + 2)
    assert all(rec.status == STATUS_OK for rec in records)
    assert {rec.functional for rec in records} == {"entropy", "concentration"}


def test_wehrl_sweep_excludes_linear():
    records = sweep_wehrl_stability(small_config(phi=['linear', 'power:2']))
    linear = [rec for rec in records if rec.parameter == 'linear']
    assert len(linear) == 3
    assert all(rec.status == STATUS_LINEAR and rec.deficit is None for rec in linear)
    for rec in records:
        if rec.parameter == 'power:2':
            assert rec.deficit > 0
            assert rec.ratio == approx(rec.deficit / rec.D2)
            assert rec.implied_constant == approx(1.0 / rec.ratio)


def test_wehrl_sweep_is_independent_of_workers():
    serial = [rec.to_row() for rec in sweep_wehrl_stability(small_config())]
    parallel = [rec.to_row() for rec in sweep_wehrl_stability(small_config(workers=3))]
    assert serial == parallel


def test_kernel_items_are_extremal():
    records = sweep_wehrl_stability(small_config(generator='kernel', count=2, phi=['power:2']))
    assert all(rec.status == STATUS_EXTREMAL and rec.ratio is None for rec in records)


def test_debug_callback_reports_items():
    messages = []
    sweep_wehrl_stability(small_config(count=2, phi=['power:2']), debug_callback=messages.append)
    assert len(messages) == 2
    assert all(m.startswith("sweep-wehrl: item") for m in messages)


def test_pooled_progress_counts_each_item_once():
    messages = []
    sweep_wehrl_stability(small_config(count=5, phi=['power:2'], workers=3), debug_callback=messages.append)
    counts = sorted(m.rsplit("(", 1)[1] for m in messages)
    assert counts == sorted(f"{k}/5)" for k in range(1, 6))


def test_concentration_sweep():
    config = small_config(d=2, count=2, omegas=[0.1])
    records = sweep_concentration_stability(config)
    assert len(records) == 2 * (1 + 2)
    assert all(rec.status != STATUS_VIOLATION for rec in records)
    main = [rec for rec in records if rec.functional == "concentration"]
    assert all(rec.coefficient > 0 and rec.alpha > 0 for rec in main)
    regions = [rec for rec in records if rec.functional == "region"]
    assert all(rec.asymmetry2 is not None for rec in regions)


def test_concentration_sweep_needs_omega_below_omega_tilde():
    with raises(ConfigError):
        sweep_concentration_stability(small_config(d=2, omegas=[0.5]))


def test_state_sweep():
    config = small_config(N=2, count=2, phi=['power:2', 'linear'], omegas=[0.1], generator='near_kernel',
                          eps_min=0.1, eps_max=0.3)
    records = sweep_state_stability(config)
    assert len(records) == 2 * 3
    assert [rec.status for rec in records if rec.parameter == 'linear'] == [STATUS_LINEAR] * 2
    entropy = [rec for rec in records if rec.functional == "state_entropy" and rec.parameter == 'power:2']
    assert all(rec.deficit > 0 and rec.D2 > 0 for rec in entropy)


def record(ratio, D2=0.01, status=STATUS_OK, parameter='xlogx'):
    return StabilityRecord("wehrl", 0, "entropy", parameter, 1, 3, D2=D2, deficit=ratio * D2, ratio=ratio,
                           status=status)


def test_flag_ratio_collapse():
    records = [record(1.0), record(1.2), record(0.9), record(1e-5), record(1e-5, D2=1e-4)]
    assert flag_ratio_collapse(records) == 1
    assert records[3].status == STATUS_SUB_THRESHOLD
    assert records[4].status == STATUS_OK


def test_summarize():
    records = [record(1.0), record(0.5), record(2.0, status=STATUS_VIOLATION),
               StabilityRecord("wehrl", 1, "entropy", "linear", 1, 3, status=STATUS_LINEAR)]
    summary = summarize(records, 1.5)
    assert summary["min_ratio"] == 0.5
    assert summary["max_ratio"] == 2.0
    assert summary["violations"] == 1
    assert summary["records"] == 4
    assert summary["statuses"] == {STATUS_LINEAR: 1, STATUS_OK: 2, STATUS_VIOLATION: 1}
    assert summarize([], 0.0)["min_ratio"] is None
    assert Stopwatch().elapsed() >= 0.0


def test_audit_warns_about_small_samples(caplog):
    records = differential_inequality_audit(small_config(d=2, N=5, count=1))
    assert "may be inconclusive" in caplog.text
    assert len(records) == 1
    assert records[0].samples == 20_000
    assert records[0].ode_status in ("pass", "violations", "inconclusive")


def test_sharpness_polynomial():
    Q = sharpness_polynomial(2, 6, 0.1)
    assert Q.norm() == approx(1.0)
    assert Q.terms()[(5, 1, 0)] == approx(0.1 / math.sqrt(1.0 + 0.01 / 6))
    with raises(DomainError):
        sharpness_polynomial(2, 6, 1.5)


def test_sharpness_family_rows():
    report = sharpness_family(1, 4, [0.0, 0.1, 0.2], phi=ConvexFn.power(2.0))
    assert [row["eps"] for row in report.rows] == [0.0, 0.1, 0.2]
    assert report.rows[0]["D"] == approx(0.0, abs=1e-6)
    assert report.rows[0]["entropy_deficit"] == 0.0
    assert 0 < report.rows[1]["D"] < report.rows[2]["D"]
    assert report.summary()["phi"] == "power:2"


@mark.slow
def test_sharpness_scaling():
    report = sharpness_family(2, 6, [0.025, 0.05, 0.1, 0.2], n=200_000, seed=3)
    assert report.status == STATUS_OK
    assert abs(report.slope_deficit - 2.0 * report.slope_distance) <= 0.2
    assert report.ratio_spread < 2.0


def test_fock_norm_and_radius():
    assert fock_norm_squared(affine_from_coeff_map(2, 1)) == 1.0
    f = AffinePoly.from_terms(1, 2, {(0,): 1.0, (2,): 1.0})
    assert fock_norm_squared(f) == approx(1.0 + 2.0 / math.pi ** 2)
    assert ball_radius(1, 1.0) == approx(1.0 / math.sqrt(math.pi))
    assert math.pi ** 2 * ball_radius(2, 3.0) ** 4 / 2 == approx(3.0)
    with raises(DomainError):
        ball_radius(1, 0.0)


def test_fock_oracle_for_constant():
    oracle = fock_oracle(affine_from_coeff_map(1, 1), 1.0, ConvexFn.xlogx(), 50_000, 4)
    assert abs(oracle["concentration"] - (1.0 - math.exp(-1.0))) <= 5 * oracle["concentration_stderr"]
    assert abs(oracle["entropy"] - 1.0) <= 5 * oracle["entropy_stderr"]
    assert oracle["T"] == approx(1.0)
    assert oracle["D"] == approx(0.0, abs=1e-4)


def test_fock_limit_converges():
    report = fock_limit_check(affine_from_coeff_map(1, 1), [4, 16], n=50_000, seed=5)
    assert report.converging
    first, last = report.rows
    assert first["concentration"] == approx(1.0 - 0.8 ** 5)
    assert last["entropy"] == approx(16 / 17, rel=1e-6)
    with raises(DomainError):
        fock_limit_check(affine_from_coeff_map(1, 1), [16, 4])


@mark.slow
def test_fock_limit_at_large_degree():
    report = fock_limit_check(affine_from_coeff_map(1, 1), [64, 256], n=200_000, seed=6)
    err = report.oracle["concentration_stderr"]
    for row in report.rows:
        assert abs(row["concentration_gap"]) <= 0.003 + 5 * err
    assert report.converging


@mark.slow
@mark.parametrize("d N".split(), [(1, 4), (2, 4), (2, 8)])
def test_lieb_solovej_suite(d, N):
    config = SweepConfig(d=d, N=N, count=200, phi=['xlogx', 'power:2', 'hinge:0.3', 'hinge:0.7'],
                         samples=200_000, random_regions=2)
    records = sweep_lieb_solovej(config)
    assert summarize(records, 0.0)["violations"] == 0


@mark.slow
def test_stability_positivity_near_kernels():
    config = SweepConfig(d=2, N=8, count=100, generator='near_kernel', eps_min=0.01, eps_max=0.5,
                         omegas=[0.1], omega_tilde=0.3, phi=['xlogx'], random_regions=0)
    records = sweep_concentration_stability(config)
    resolved = [rec for rec in records if rec.D2 is not None and math.sqrt(rec.D2) > 0.05]
    assert resolved
    for rec in resolved:
        assert rec.deficit > 4 * rec.deficit_stderr
        assert rec.ratio > 0


@mark.slow
def test_differential_inequality_audit():
    config = SweepConfig(d=2, N=5, count=20, audit_samples=10_000_000)
    records = differential_inequality_audit(config)
    assert all(rec.ode_violations == 0 for rec in records)
