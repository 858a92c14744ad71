import numpy as np
import pytest
from scipy import optimize

from mixedplap import OperatorParams, ShapeSpec, build_mesh, energy
from mixedplap.eigensolver import solve_first_eigenpair, solve_second_eigenvalue
from mixedplap.fucik import (
    PathOptions,
    fucik_curve,
    mountain_pass_level,
    path_estimate_gap,
    path_family,
    trivial_lines,
    verify_fucik_point,
)

from oracles import p_pi


def local_fucik_c(d, p, length=1.0):
    """First nontrivial Fucik curve of the 1-D p-Laplacian, as ``beta = c(d)``.

    A positive hump of length l solves the problem with eigenvalue
    ``(p-1) (pi_p / l)^p``; the two humps must fill the interval.
    """
    def hump(lam):
        return p_pi(p) * ((p - 1) / lam) ** (1.0 / p)

    lam1 = (p - 1) * (p_pi(p) / length) ** p
    return optimize.brentq(lambda c: hump(c) + hump(c + d) - length, lam1 * (1 + 1e-12), 1e6 * lam1)


@pytest.fixture(scope="module")
def local_problem():
    params = OperatorParams(N=1, p=2.0, s=0.3, theta=0.32, a_nl=0.0)
    mesh = build_mesh(ShapeSpec.interval(0.0, 1.0, 128), params)
    first = solve_first_eigenpair(mesh, params)
    return mesh, params, first


@pytest.fixture(scope="module")
def mixed_problem():
    params = OperatorParams(N=1, p=2.5, s=0.5, theta=0.5)
    mesh = build_mesh(ShapeSpec.interval(0.0, 1.0, 48), params)
    first = solve_first_eigenpair(mesh, params)
    return mesh, params, first


# -- closed form for the local operator ------------------------------------------------
def test_local_curve_matches_closed_form(local_problem):
    mesh, params, first = local_problem
    grid = [0.0, 20.0, 60.0]
    curve = fucik_curve(grid, mesh, params, first.phi, first.lam, PathOptions(n_points=17, n_seeds=1))
    # the continuum oracle carries the O(h^2) discretisation error of each hump:
    # about 2e-4 relative for a hump of 64 cells, growing as the humps shrink with d
    for pt in curve.points:
        assert pt.converged
        assert pt.c == pytest.approx(local_fucik_c(pt.d, 2.0), rel=1e-3)


def test_local_curve_closed_form_at_p3():
    params = OperatorParams(N=1, p=3.0, s=0.3, theta=0.32, a_nl=0.0)
    mesh = build_mesh(ShapeSpec.interval(0.0, 1.0, 64), params)
    first = solve_first_eigenpair(mesh, params)
    state = mountain_pass_level(50.0, mesh, params, first.phi,
                                PathOptions(n_points=17, n_seeds=1, max_iters=400))
    assert state.level == pytest.approx(local_fucik_c(50.0, 3.0), rel=2e-3)


def test_closed_form_oracle_endpoints():
    # d = 0 gives the second eigenvalue 2^p lambda_1
    for p in (1.5, 2.0, 3.0):
        lam1 = (p - 1) * p_pi(p) ** p
        assert local_fucik_c(0.0, p) == pytest.approx(2**p * lam1, rel=1e-10)
    assert local_fucik_c(0.0, 2.0) == pytest.approx(4 * np.pi**2, rel=1e-10)


# -- the mixed operator ----------------------------------------------------------------
def test_level_at_zero_is_second_eigenvalue(mixed_problem):
    mesh, params, first = mixed_problem
    opts = PathOptions(n_points=17, n_seeds=1)
    second = solve_second_eigenvalue(mesh, params, path_opts=opts, first=first)
    state = mountain_pass_level(0.0, mesh, params, first.phi, opts)
    assert state.level == pytest.approx(second.lam, rel=1e-10)
    assert second.margin > 0


@pytest.fixture(scope="module")
def mixed_curve(mixed_problem):
    mesh, params, first = mixed_problem
    grid = [0.0, 1.0, 5.0, 20.0]
    return fucik_curve(grid, mesh, params, first.phi, first.lam, PathOptions(n_points=17, n_seeds=1))


def test_curve_is_monotone_and_lipschitz(mixed_curve):
    assert mixed_curve.monotone
    assert min(mixed_curve.lipschitz_gaps) >= -1e-5


def test_curve_lies_above_trivial_lines(mixed_curve):
    lam1 = mixed_curve.lambda1
    for pt in mixed_curve.points:
        assert pt.converged
        assert pt.beta > lam1 and pt.alpha > lam1 + pt.d


def test_curve_points_solve_the_fucik_problem(mixed_curve, mixed_problem):
    mesh, params, _ = mixed_problem
    for pt, state in zip(mixed_curve.points, mixed_curve.states):
        assert pt.residual < 1e-4
        assert verify_fucik_point(pt.alpha, pt.beta, state.maximizer, mesh, params) == pytest.approx(pt.residual)
        u = state.maximizer
        assert np.any(u > 0) and np.any(u < 0)


def test_explicit_paths_stay_below_the_level(mixed_curve, mixed_problem):
    mesh, params, _ = mixed_problem
    for pt, state in zip(mixed_curve.points, mixed_curve.states):
        gap = path_estimate_gap(state.maximizer, pt.c, pt.d, mesh, params)
        assert gap <= 1e-6 * pt.c


def test_reflected_points(mixed_curve):
    for (a, b), pt in zip(mixed_curve.reflected(), mixed_curve.points):
        assert (a, b) == (pt.c, pt.d + pt.c)


# -- helpers ---------------------------------------------------------------------------
def test_path_family_endpoints(unit_interval_mesh):
    mesh, _ = unit_interval_mesh
    x = mesh.nodes[:, 0]
    u = np.sin(2 * np.pi * x)
    up, um = np.maximum(u, 0), np.maximum(-u, 0)
    n = lambda v: energy.normalize(v, mesh)  # noqa: E731
    np.testing.assert_allclose(path_family(u, 1, 0.0, mesh), n(u))
    np.testing.assert_allclose(path_family(u, 1, 1.0, mesh), n(up))
    np.testing.assert_allclose(path_family(u, 2, 0.0, mesh), n(up))
    np.testing.assert_allclose(path_family(u, 2, 1.0, mesh), n(um))
    np.testing.assert_allclose(path_family(u, 3, 1.0, mesh), n(u))
    np.testing.assert_allclose(path_family(u, 3, 0.0, mesh), n(-um))
    for which in (1, 2, 3):
        for t in (0.2, 0.7):
            assert energy.lp_norm(path_family(u, which, t, mesh), mesh) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        path_family(np.abs(u), 1, 0.5, mesh)
    with pytest.raises(ValueError):
        path_family(u, 4, 0.5, mesh)


def test_trivial_lines():
    vertical, horizontal = trivial_lines(10.0, [0.0, 2.0])
    assert vertical == [(10.0, 10.0), (10.0, 8.0)]
    assert horizontal == [(10.0, 10.0), (12.0, 10.0)]


def test_grid_validation(mixed_problem):
    mesh, params, first = mixed_problem
    with pytest.raises(ValueError):
        fucik_curve([1.0, 0.0], mesh, params, first.phi, first.lam)
    with pytest.raises(ValueError):
        fucik_curve([-1.0], mesh, params, first.phi, first.lam)
    with pytest.raises(ValueError):
        mountain_pass_level(-1.0, mesh, params, first.phi)
