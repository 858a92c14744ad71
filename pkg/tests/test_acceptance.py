"""Acceptance criteria, each at its stated tolerance.

Every criterion records named sub-checks; at the end of the session one
``PASS``/``FAIL`` line per criterion is printed (see ``conftest.py``), and
each sub-check is also a separate assertion so a failure names what broke.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest
from scipy import linalg

from mixedplap import OperatorParams, ShapeSpec, build_mesh, cli, energy, hardy_constants, match_volume
from mixedplap.eigensolver import SolveOptions, solve_first_eigenpair, solve_second_eigenvalue
from mixedplap.fucik import PathOptions, fucik_curve
from mixedplap.shapelab import (
    domain_monotonicity_check,
    faber_krahn_experiment,
    hong_krahn_szego_experiment,
    nodal_domain_bound_check,
)
from mixedplap.suite import gradient_suite, run_check_suite

from oracles import dense_eigenvalues, nonlocal_matrix

pytestmark = pytest.mark.slow

TITLES = {
    1: "local control (pi^2, 4 pi^2)",
    2: "nonlocal control (dense oracle)",
    3: "gradient fidelity",
    4: "inequality suites",
    5: "eigenstructure of the mixed operator",
    6: "Fucik curve",
    7: "shape claims",
    8: "determinism of check",
}

# criterion -> list of (sub-check name, passed, detail)
RESULTS: dict = {k: [] for k in TITLES}


def record(criterion, name, passed, detail=""):
    RESULTS[criterion].append((name, bool(passed), detail))
    print(f"  criterion {criterion} / {name}: {'ok' if passed else 'FAILED'} {detail}")
    return bool(passed)


def summary_lines():
    lines = []
    for k, title in TITLES.items():
        subs = RESULTS[k]
        if not subs:
            lines.append(f"criterion {k} ({title}): NOT RUN")
            continue
        failed = [name for name, ok, _ in subs if not ok]
        verdict = "PASS" if not failed else "FAIL"
        tail = f" [failed: {', '.join(failed)}]" if failed else ""
        lines.append(f"criterion {k} ({title}): {verdict}{tail}")
    return lines


def _failed(criterion):
    return [f"{n}: {d}" for n, ok, d in RESULTS[criterion] if not ok]


# -- 1 ---------------------------------------------------------------------------------
def test_criterion_1_local_control():
    params = OperatorParams(N=1, p=2.0, s=0.5, theta=0.5, a_nl=0.0)
    mesh = build_mesh(ShapeSpec.interval(0.0, 1.0, 512), params)
    t0 = time.perf_counter()
    second = solve_second_eigenvalue(mesh, params, path_opts=PathOptions(n_points=17, n_seeds=1))
    elapsed = time.perf_counter() - t0
    lam1, lam2 = second.first.lam, second.lam
    oracle = dense_eigenvalues(mesh, params, 2)
    record(1, "lambda1 within 1% of pi^2", abs(lam1 / math.pi**2 - 1) < 0.01, f"lambda1={lam1:.6f}")
    record(1, "lambda2 within 2% of 4 pi^2", abs(lam2 / (4 * math.pi**2) - 1) < 0.02, f"lambda2={lam2:.6f}")
    record(1, "lambda1 matches dense oracle", abs(lam1 / oracle[0] - 1) < 1e-6, f"oracle={oracle[0]:.8f}")
    record(1, "lambda2 matches dense oracle", abs(lam2 / oracle[1] - 1) < 1e-6, f"oracle={oracle[1]:.8f}")
    record(1, "runtime < 60 s", elapsed < 60, f"{elapsed:.1f} s")
    assert not _failed(1), _failed(1)


# -- 2 ---------------------------------------------------------------------------------
def test_criterion_2_nonlocal_control():
    params = OperatorParams(N=1, p=2.0, s=0.5, theta=0.5, a_loc=0.0)
    mesh = build_mesh(ShapeSpec.interval(0.0, 1.0, 128), params)
    t0 = time.perf_counter()
    res = solve_first_eigenpair(mesh, params)
    elapsed = time.perf_counter() - t0
    # generalized problem  B u = lambda h I u  for the assembled form
    B = nonlocal_matrix(mesh)
    oracle = linalg.eigh(B, mesh.cell_volume * np.eye(mesh.n_nodes), eigvals_only=True,
                         subset_by_index=[0, 0])[0]
    rel = abs(res.lam / oracle - 1)
    record(2, "rel. error < 1e-4", rel < 1e-4, f"lambda1={res.lam:.8f} oracle={oracle:.8f} rel={rel:.2e}")
    record(2, "runtime < 30 s", elapsed < 30, f"{elapsed:.1f} s")
    assert not _failed(2), _failed(2)


# -- 3 ---------------------------------------------------------------------------------
def test_criterion_3_gradient_fidelity():
    res = gradient_suite(np.random.default_rng(3), n_fields=20)
    combos = {(d["p"], d["d"], d["mu"] > 0) for d in res.detail}
    record(3, "covers p in {2,3}, d in {0,1}, mu in {0, 0.5 mu0}", len(combos) == 8, f"{len(combos)} combinations")
    record(3, "max rel. error < 1e-5", res.worst < 1e-5, f"worst={res.worst:.2e} over {res.trials} fields")
    assert not _failed(3), _failed(3)


# -- 4 ---------------------------------------------------------------------------------
def test_criterion_4_inequality_suites():
    rc = cli.build_run_config(cli.load_config(None))
    mesh = build_mesh(rc.shape, rc.params)
    results = run_check_suite(4, mesh, rc.params, n_hardy=100, n_picone=1000, n_sigma=50, n_split=100,
                              n_path=10_000, n_grad=1)
    by_name = {r.property: r for r in results}
    hardy = by_name["interpolated_hardy"]
    record(4, "interpolated Hardy, 100 fields per config, slack 1e-2",
           hardy.passed and hardy.trials >= 100, f"worst={hardy.worst:.3g} trials={hardy.trials}")
    pic = by_name["discrete_picone"]
    record(4, "Picone >= -1e-12 over 1000 pairs", pic.trials == 1000 and pic.worst <= 1e-12,
           f"min L={-pic.worst:.3g}")
    sig = by_name["sigma_path_convexity"]
    record(4, "sigma_t convexity slack <= 1e-10", sig.worst <= 1e-10, f"worst={sig.worst:.3g}")
    spl = by_name["splitting"]
    record(4, "splitting exact to 1e-12", spl.worst <= 1e-12, f"worst={spl.worst:.3g}")
    path = by_name["path_lemma"]
    record(4, "path lemma over 1e4 samples", path.trials == 10_000 and path.worst <= 1e-12,
           f"worst={path.worst:.3g}")
    assert not _failed(4), _failed(4)


# -- 5 ---------------------------------------------------------------------------------
def _eigenstructure(label, mesh, params, n_restarts=10):
    runs = [solve_first_eigenpair(mesh, params, SolveOptions(seed=k)) for k in range(n_restarts)]
    lams = np.array([r.lam for r in runs])
    ref = runs[0]
    lam_spread = float(np.max(np.abs(lams / ref.lam - 1)))
    phi_spread = max(energy.lp_norm(r.phi - ref.phi, mesh) for r in runs)
    record(5, f"{label}: all restarts usable", all(r.status in ("converged", "stagnated") for r in runs),
           ",".join(sorted({r.status for r in runs})))
    record(5, f"{label}: phi1 > 0", min(r.min_value for r in runs) > 0,
           f"min={min(r.min_value for r in runs):.3g}")
    record(5, f"{label}: restarts agree on lambda1 (1e-6)", lam_spread < 1e-6, f"spread={lam_spread:.2e}")
    record(5, f"{label}: restarts agree on phi1 (Lp 1e-4)", phi_spread < 1e-4, f"spread={phi_spread:.2e}")
    sec = solve_second_eigenvalue(mesh, params, path_opts=PathOptions(n_points=17, n_seeds=1), first=ref)
    record(5, f"{label}: lambda2 > lambda1", sec.margin > 0 and sec.converged,
           f"lambda1={ref.lam:.6f} lambda2={sec.lam:.6f} margin={sec.margin:.4g}")
    record(5, f"{label}: second eigenfunction changes sign", sec.sign_changing)
    bound = nodal_domain_bound_check(sec.lam, sec.psi, mesh, params, residual=sec.residual)
    record(5, f"{label}: nodal bound", bound.holds,
           f"lambda(O+)={bound.lambda_pos:.6f} lambda(O-)={bound.lambda_neg:.6f} margin={bound.margin:.4g}")


def test_criterion_5_eigenstructure():
    params = OperatorParams(N=1, p=2.5, s=0.5, theta=0.5)
    _eigenstructure("1-D mu=0", build_mesh(ShapeSpec.interval(0.0, 1.0, 128), params), params)
    # the origin is a corner of the rectangle: the punctured Hardy regime applies for p > N
    base = OperatorParams(N=2, p=2.5, s=0.5, theta=0.6)
    spec = ShapeSpec.rectangle(0.0, 1.5, 0.0, 1.0, 24)
    probe = build_mesh(spec, base)
    mu0 = hardy_constants(base, probe.origin_status).mu_max
    params = replace(base, mu=0.5 * mu0)
    _eigenstructure("2-D mu=0.5 mu0", build_mesh(spec, params), params)
    assert not _failed(5), _failed(5)


# -- 6 ---------------------------------------------------------------------------------
@pytest.fixture(scope="module")
def fucik_runs():
    params = OperatorParams(N=1, p=2.5, s=0.5, theta=0.5)
    mesh = build_mesh(ShapeSpec.interval(0.0, 1.0, 128), params)
    t0 = time.perf_counter()
    first = solve_first_eigenpair(mesh, params)
    grid = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0 * first.lam]
    second = solve_second_eigenvalue(mesh, params, first=first)
    curves = {n: fucik_curve(grid, mesh, params, first.phi, first.lam, PathOptions(n_points=n))
              for n in (17, 33)}
    return first, second, curves, time.perf_counter() - t0


def test_criterion_6_fucik_curve(fucik_runs):
    first, second, curves, elapsed = fucik_runs
    c33 = curves[33]
    tol = PathOptions().tol
    pts = c33.points
    record(6, "c(0) matches lambda2 to 2%", abs(pts[0].c / second.lam - 1) < 0.02,
           f"c(0)={pts[0].c:.6f} lambda2={second.lam:.6f}")
    steps_ok = all(b.c <= a.c + 2 * tol and abs(a.c - b.c) <= (b.d - a.d) + 2 * tol for a, b in zip(pts[:-1], pts[1:]))
    record(6, "c nonincreasing and |dc| <= dd + 2 tol", steps_ok, f"min Lipschitz gap={min(c33.lipschitz_gaps):.4g}")
    bad = [pt.d for pt in pts if pt.converged and pt.residual > 1e-5]
    record(6, "converged points have residual <= 1e-5", not bad and all(pt.converged for pt in pts),
           f"max residual={max(pt.residual for pt in pts):.2e}")
    diff = max(abs(a.c / b.c - 1) for a, b in zip(curves[17].points, pts))
    record(6, "17- and 33-point paths agree to 2%", diff < 0.02, f"max rel diff={diff:.2e}")
    record(6, "runtime < 10 min", elapsed < 600, f"{elapsed:.0f} s")
    assert not _failed(6), _failed(6)


def test_criterion_6_far_end_near_lambda1(fucik_runs):
    # For the purely local p = 2 problem the exact curve pi/sqrt(c+d) + pi/sqrt(c) = 1 gives
    # c(50 lambda1) = 1.35 lambda1, so this sub-check cannot hold for the continuum problem;
    # it is kept at its stated tolerance (see the decisions ledger).
    first, _, curves, _ = fucik_runs
    far = curves[33].points[-1]
    ratio = far.c / first.lam
    record(6, "c(50 lambda1) within 5% of lambda1", abs(ratio - 1) < 0.05,
           f"c={far.c:.4f} lambda1={first.lam:.4f} ratio={ratio:.4f}")
    assert abs(ratio - 1) < 0.05, f"c(50 lambda1) / lambda1 = {ratio:.4f}"


# -- 7 ---------------------------------------------------------------------------------
def test_criterion_7_shape_claims():
    t0 = time.perf_counter()
    p2 = OperatorParams(N=2, p=2.0, s=0.5, theta=0.5)
    shapes = [match_volume(ShapeSpec.disk((0.0, 0.0), 1.0, 48), math.pi),
              match_volume(ShapeSpec.rectangle(-0.5, 0.5, -0.5, 0.5, 48), math.pi)]
    fk = faber_krahn_experiment(math.pi, shapes, p2)
    v = fk.verdict("ball_minimal")
    record(7, "Faber-Krahn, p=2, mu=0", v.holds, f"margin={v.margin:.4g} tol={v.tolerance:.3g}")

    base = OperatorParams(N=2, p=1.8, s=0.5, theta=0.75)
    mu0 = hardy_constants(base, "interior").mu_max
    hardy_params = replace(base, mu=0.5 * mu0)
    fk_mu = faber_krahn_experiment(math.pi, shapes, hardy_params)
    v = fk_mu.verdict("ball_minimal")
    record(7, "Faber-Krahn, p=1.8, mu=0.5 mu0", v.holds, f"margin={v.margin:.4g} tol={v.tolerance:.3g}")

    mono = domain_monotonicity_check(ShapeSpec.disk((0.0, 0.0), 0.8, 48), ShapeSpec.disk((0.0, 0.0), 1.0, 48), p2)
    record(7, "nested disks strictly ordered", mono.holds and mono.strict_subset,
           f"{mono.lambda_inner:.6f} > {mono.lambda_outer:.6f}")

    hks = hong_krahn_szego_experiment(1.0, [2.5, 4.0, 6.0], p2, resolution=48)
    above = hks.verdict("lambda2_above_ball")
    record(7, "HKS lambda2(two disks) > lambda1(disk)", above.holds,
           f"min margin={above.margin:.4g} tol={above.tolerance:.3g}")
    lim = hks.verdict("limit_within_rtol")
    record(7, "HKS within 5% at largest separation", lim.holds, f"rel gap={lim.tolerance - lim.margin:.3g}")
    elapsed = time.perf_counter() - t0
    record(7, "runtime < 20 min", elapsed < 1200, f"{elapsed:.0f} s")
    assert not _failed(7), _failed(7)


# -- 8 ---------------------------------------------------------------------------------
def test_criterion_8_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    codes = [cli.main(["check", "--seed", "11", "--out", str(d)]) for d in (a, b)]
    record(8, "check exits 0", codes == [0, 0], f"exit codes {codes}")
    same = (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()
    record(8, "results.csv byte-identical", same)
    assert not _failed(8), _failed(8)
