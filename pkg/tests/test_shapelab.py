import math

import numpy as np
import pytest

from mixedplap import OperatorParams, ShapeSpec, build_mesh, hardy_constants, match_volume
from mixedplap.eigensolver import solve_second_eigenvalue
from mixedplap.fucik import PathOptions
from mixedplap.shapelab import (
    _map,
    describe_shape,
    domain_monotonicity_check,
    faber_krahn_experiment,
    hong_krahn_szego_experiment,
    nodal_domain_bound_check,
)

P2 = OperatorParams(N=2, p=2.0, s=0.5, theta=0.5)


def _fk_shapes(res):
    return [match_volume(ShapeSpec.disk((0.0, 0.0), 1.0, res), math.pi),
            match_volume(ShapeSpec.rectangle(-0.5, 0.5, -0.5, 0.5, res), math.pi),
            match_volume(ShapeSpec.rectangle(-1.0, 1.0, -0.5, 0.5, res), math.pi)]


# -- Faber-Krahn -----------------------------------------------------------------------
def test_faber_krahn_disk_is_smallest():
    report = faber_krahn_experiment(math.pi, _fk_shapes(20), P2)
    assert report.holds
    lams = {row["kind"] + str(i): row["lambda1"] for i, row in enumerate(report.rows)}
    assert min(lams, key=lams.get) == "disk0"
    for row in report.rows:
        assert abs(row["volume_mismatch"]) < 1e-12
        assert row["status"] == "converged"


def test_faber_krahn_with_hardy_term_centred_on_origin():
    params = OperatorParams(N=2, p=1.8, s=0.5, theta=0.75)
    probe = build_mesh(ShapeSpec.disk((0.0, 0.0), 1.0, 16), params)
    mu = 0.5 * hardy_constants(params, probe.origin_status).mu_max
    params = OperatorParams(N=2, p=1.8, s=0.5, theta=0.75, mu=mu)
    shapes = [match_volume(ShapeSpec.disk((0.3, 0.2), 1.0, 16), math.pi),
              match_volume(ShapeSpec.rectangle(0.0, 1.0, 0.0, 1.0, 16), math.pi)]
    report = faber_krahn_experiment(math.pi, shapes, params)
    assert report.holds
    assert all(row["shape"].startswith(("disk(c=(0,0)", "rectangle(-")) for row in report.rows)


def test_faber_krahn_rejects_volume_mismatch():
    shapes = [match_volume(ShapeSpec.disk((0.0, 0.0), 1.0, 12), math.pi),
              ShapeSpec.rectangle(-1.0, 1.0, -1.0, 1.0, 12)]
    report = faber_krahn_experiment(math.pi, shapes, P2)
    assert report.rows[1]["status"] == "rejected"
    assert np.isnan(report.rows[1]["lambda1"])
    assert report.verdict("ball_minimal").note.startswith("vacuous")


def test_faber_krahn_needs_a_ball():
    shapes = _fk_shapes(12)[1:]
    with pytest.raises(ValueError):
        faber_krahn_experiment(math.pi, shapes, P2)


def test_faber_krahn_workers_give_same_rows():
    a = faber_krahn_experiment(math.pi, _fk_shapes(12), P2)
    b = faber_krahn_experiment(math.pi, _fk_shapes(12), P2, workers=2)
    assert a.rows == b.rows


# -- domain monotonicity ---------------------------------------------------------------
def test_nested_disks():
    inner = ShapeSpec.disk((0.0, 0.0), 0.8, 16)
    outer = ShapeSpec.disk((0.0, 0.0), 1.0, 16)
    res = domain_monotonicity_check(inner, outer, P2)
    assert res.strict_subset and res.holds
    assert res.lambda_inner > res.lambda_outer


def test_equal_domains_are_not_strict():
    spec = ShapeSpec.disk((0.0, 0.0), 0.8, 12)
    res = domain_monotonicity_check(spec, spec, P2)
    assert not res.strict_subset
    assert res.holds and abs(res.margin) <= 2 * res.tolerance


def test_non_nested_domains_are_rejected():
    with pytest.raises(ValueError):
        domain_monotonicity_check(ShapeSpec.disk((0.5, 0.0), 0.8, 12), ShapeSpec.disk((0.0, 0.0), 0.8, 12), P2)


# -- Hong-Krahn-Szego ------------------------------------------------------------------
@pytest.fixture(scope="module")
def hks_report():
    return hong_krahn_szego_experiment(1.0, [2.5, 4.0], P2, resolution=16)


def test_hks_lambda2_above_single_ball(hks_report):
    assert hks_report.verdict("lambda2_above_ball").holds
    assert hks_report.verdict("nonincreasing").holds
    ball = hks_report.rows[0]["lambda1_ball"]
    for row in hks_report.rows[1:]:
        assert row["lambda2"] > ball
        assert row["status"] == "converged"


def test_hks_approaches_ball_value(hks_report):
    assert hks_report.verdict("limit_within_rtol").holds
    lam2 = [row["lambda2"] for row in hks_report.rows[1:]]
    assert lam2[0] > lam2[1]


def test_hks_rejects_bad_separations():
    with pytest.raises(ValueError):
        hong_krahn_szego_experiment(1.0, [1.5], P2, resolution=8)
    with pytest.raises(ValueError):
        hong_krahn_szego_experiment(1.0, [4.0, 3.0], P2, resolution=8)


def test_hks_in_one_dimension():
    params = OperatorParams(N=1, p=2.0, s=0.3, theta=0.32)
    report = hong_krahn_szego_experiment(0.5, [1.5, 3.0], params, resolution=24)
    assert report.holds


# -- nodal domains ---------------------------------------------------------------------
def test_nodal_bound_for_second_eigenfunction():
    params = OperatorParams(N=1, p=2.5, s=0.5, theta=0.5)
    mesh = build_mesh(ShapeSpec.interval(0.0, 1.0, 48), params)
    sec = solve_second_eigenvalue(mesh, params, path_opts=PathOptions(n_points=17, n_seeds=1))
    bound = nodal_domain_bound_check(sec.lam, sec.psi, mesh, params, residual=sec.residual)
    assert bound.holds and not bound.skipped
    assert bound.margin > 0
    assert sec.first.lam < min(bound.lambda_pos, bound.lambda_neg)


def test_nodal_bound_needs_sign_change(unit_interval_mesh):
    mesh, params = unit_interval_mesh
    with pytest.raises(ValueError):
        nodal_domain_bound_check(10.0, np.ones(mesh.n_nodes), mesh, params)


# -- helpers ---------------------------------------------------------------------------
def test_map_preserves_order():
    assert _map(lambda x: x * x, range(7), workers=3) == [x * x for x in range(7)]


def test_describe_shape():
    assert describe_shape(ShapeSpec.disk((0.0, 0.0), 1.0)) == "disk(c=(0,0),r=1)"
    assert describe_shape(ShapeSpec.interval(0.0, 1.5)) == "interval(0,1.5)"
    assert describe_shape(ShapeSpec.rectangle(0.0, 1.0, 0.0, 2.0)) == "rectangle(0,1,0,2)"
