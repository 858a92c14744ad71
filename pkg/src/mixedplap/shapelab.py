"""Shape experiments: Faber-Krahn, domain monotonicity, nodal domains, two balls.

Every experiment returns rows of plain dictionaries (ready for CSV) together
with a list of :class:`Verdict` objects.  A verdict only "holds" when its
margin beats the combined solver tolerance of the numbers it compares.  The
tolerance attached to an eigenvalue is ``residual * max(1, |Omega|)``, a bound
on the eigenvalue error implied by the sup-norm Euler-Lagrange defect of a
unit-norm eigenfunction.
"""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .eigensolver import (
    SolveOptions,
    nodal_domains,
    solve_first_eigenpair,
    solve_second_eigenvalue,
)
from .fucik import PathOptions
from .hardy import OperatorParams
from .mesh import ShapeSpec, build_mesh, match_volume, restrict_mesh

log = logging.getLogger(__name__)

__all__ = [
    "Verdict",
    "ExperimentReport",
    "eigen_tolerance",
    "faber_krahn_experiment",
    "domain_monotonicity_check",
    "hong_krahn_szego_experiment",
    "nodal_domain_bound_check",
    "describe_shape",
]


@dataclass
class Verdict:
    name: str
    holds: bool
    margin: float
    tolerance: float
    note: str = ""


@dataclass
class ExperimentReport:
    name: str
    rows: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return all(v.holds for v in self.verdicts)

    def verdict(self, name) -> Verdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)


def _map(fn, items, workers: int = 1) -> list:
    """Ordered map, optionally on a thread pool (the heavy kernels release the GIL)."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def eigen_tolerance(residual: float, mesh) -> float:
    return float(residual) * max(1.0, mesh.volume)


def _fmt(x: float) -> str:
    # coordinates that are zero up to roundoff (e.g. after centring) print as 0
    return f"{0.0 if abs(x) < 1e-12 else x:.6g}"


def describe_shape(spec: ShapeSpec) -> str:
    if spec.kind == "interval":
        return f"interval({_fmt(spec.bounds[0])},{_fmt(spec.bounds[1])})"
    if spec.kind == "rectangle":
        return "rectangle(" + ",".join(_fmt(b) for b in spec.bounds) + ")"
    c = ",".join(_fmt(x) for x in spec.center)
    if spec.kind == "disk":
        return f"disk(c=({c}),r={_fmt(spec.radius)})"
    c2 = ",".join(_fmt(x) for x in spec.center2)
    return f"two_disks(c=({c}),c2=({c2}),r={_fmt(spec.radius)})"


def _centered(spec: ShapeSpec) -> ShapeSpec:
    """Translate so the centroid sits at the origin (lattice anchored at the origin)."""
    shifted = spec.translated(-spec.centroid)
    if spec.kind == "interval":
        shifted = dataclasses.replace(shifted, anchor=(shifted.bounds[0],))
    return shifted


# -----------------------------------------------------------------------------------
def faber_krahn_experiment(volume: float, shapes, params: OperatorParams,
                           opts: SolveOptions | None = None, center_origin: bool | None = None,
                           volume_rtol: float = 0.02, workers: int = 1) -> ExperimentReport:
    """Compare ``lambda_1`` of equal-volume shapes; the ball should be the smallest.

    With ``mu > 0`` the shapes are centred on the Hardy singularity unless
    ``center_origin=False``; centring moves the lattice, so centred shapes are
    volume-matched again afterwards (about the origin, which stays the
    centroid).  Shapes whose discrete volume misses ``volume``
    by more than ``volume_rtol`` are rejected (kept as rows, excluded from the
    verdict).
    """
    opts = opts or SolveOptions()
    if center_origin is None:
        center_origin = params.mu > 0
    report = ExperimentReport("faber-krahn")
    jobs = []
    for spec in shapes:
        if center_origin:
            spec = match_volume(_centered(spec), volume)
        mesh = build_mesh(spec, params)
        mismatch = (mesh.volume - volume) / volume
        row = {"shape": describe_shape(spec), "kind": spec.kind, "n_nodes": mesh.n_nodes,
               "volume": mesh.volume, "volume_mismatch": mismatch}
        report.rows.append(row)
        if abs(mismatch) > volume_rtol:
            row.update(lambda1=float("nan"), residual=float("nan"), status="rejected")
            log.warning("rejecting %s: volume mismatch %.3g", row["shape"], mismatch)
            continue
        jobs.append((spec, mesh, row))
    solved = _map(lambda job: solve_first_eigenpair(job[1], params, opts), jobs, workers)
    results = []
    for (spec, mesh, row), res in zip(jobs, solved):
        row.update(lambda1=res.lam, residual=res.residual, status=res.status)
        results.append((spec, mesh, res))
    balls = [x for x in results if x[0].kind in ("disk", "interval")]
    others = [x for x in results if x[0].kind not in ("disk", "interval")]
    if len(results) <= 1:
        report.verdicts.append(Verdict("ball_minimal", True, float("inf"), 0.0, "vacuous: one shape"))
        return report
    if not balls:
        raise ValueError("faber_krahn_experiment needs a disk (or interval) among the shapes")
    _, bmesh, bres = balls[0]
    others = others + balls[1:]
    gaps = [(o[2].lam - bres.lam, eigen_tolerance(o[2].residual, o[1]) + eigen_tolerance(bres.residual, bmesh))
            for o in others]
    margin, tol = min(gaps)
    note = ""
    if params.mu > 0 and params.theta < 1:
        note = "observed only: the symmetrization argument covers the weight |x|^-p (theta = 1)"
    report.verdicts.append(Verdict("ball_minimal", bool(margin > tol), float(margin), float(tol), note))
    return report


# -----------------------------------------------------------------------------------
@dataclass
class MonotonicityResult:
    lambda_inner: float
    lambda_outer: float
    margin: float
    tolerance: float
    strict_subset: bool
    holds: bool


def domain_monotonicity_check(inner: ShapeSpec, outer: ShapeSpec, params: OperatorParams,
                              opts: SolveOptions | None = None) -> MonotonicityResult:
    """``lambda_1(inner) - lambda_1(outer)`` on a common lattice.

    The outer shape is put on the inner shape's lattice (same ``h`` and
    anchor) so that node sets are nested; containment is verified on the
    node sets.
    """
    opts = opts or SolveOptions()
    outer = dataclasses.replace(outer, h=inner.cell_size, anchor=tuple(inner.lattice_anchor))
    m_in = build_mesh(inner, params)
    m_out = build_mesh(outer, params)
    found = m_out.lookup(m_in.index)
    if np.any(found < 0):
        raise ValueError("inner shape is not contained in the outer shape at the common lattice")
    strict = m_out.n_nodes > m_in.n_nodes
    r_in = solve_first_eigenpair(m_in, params, opts)
    r_out = solve_first_eigenpair(m_out, params, opts)
    margin = r_in.lam - r_out.lam
    tol = eigen_tolerance(r_in.residual, m_in) + eigen_tolerance(r_out.residual, m_out)
    holds = bool(margin > tol) if strict else bool(abs(margin) <= 2 * tol)
    return MonotonicityResult(r_in.lam, r_out.lam, float(margin), float(tol), strict, holds)


# -----------------------------------------------------------------------------------
def _snap(x, h):
    return float(np.round(x / h) * h)


def hong_krahn_szego_experiment(r: float, separations, params: OperatorParams, resolution: int = 48,
                                opts: SolveOptions | None = None, path_opts: PathOptions | None = None,
                                limit_rtol: float = 0.05, workers: int = 1) -> ExperimentReport:
    """``lambda_2`` of two disjoint balls of radius ``r`` against ``lambda_1`` of one ball.

    ``separations`` are center distances (each > 2r).  Centers are snapped to
    lattice vertices so that every ball carries exactly the cell pattern of
    the reference ball.
    """
    opts = opts or SolveOptions()
    path_opts = path_opts or PathOptions(n_points=17, n_seeds=1)
    separations = [float(x) for x in separations]
    if any(b < a for a, b in zip(separations[:-1], separations[1:])):
        raise ValueError("separations must be ascending")
    N = params.N
    origin = (0.0,) * N
    single = ShapeSpec.disk(origin, r, resolution)
    h = single.cell_size
    m1 = build_mesh(single, params)
    r1 = solve_first_eigenpair(m1, params, opts)
    tol1 = eigen_tolerance(r1.residual, m1)
    report = ExperimentReport("hong-krahn-szego")
    report.rows.append({"shape": describe_shape(single), "separation": float("nan"), "n_nodes": m1.n_nodes,
                        "lambda1_ball": r1.lam, "lambda2": float("nan"), "residual": r1.residual,
                        "margin": float("nan"), "status": r1.status})
    meshes = []
    for D in separations:
        half = _snap(0.5 * D, h)
        if 2 * half <= 2 * r + 1e-12:
            raise ValueError(f"separation {D} does not keep the balls disjoint")
        c1 = (-half,) + (0.0,) * (N - 1)
        c2 = (half,) + (0.0,) * (N - 1)
        spec = ShapeSpec.two_disks(c1, c2, r, resolution)
        meshes.append((half, spec, build_mesh(spec, params)))
    seconds = _map(lambda job: solve_second_eigenvalue(job[2], params, opts, path_opts), meshes, workers)
    lam2s, tols = [], []
    for (half, spec, mesh), sec in zip(meshes, seconds):
        tol = eigen_tolerance(sec.residual, mesh) + tol1
        lam2s.append(sec.lam)
        tols.append(tol)
        report.rows.append({"shape": describe_shape(spec), "separation": 2 * half, "n_nodes": mesh.n_nodes,
                            "lambda1_ball": r1.lam, "lambda2": sec.lam, "residual": sec.residual,
                            "margin": sec.lam - r1.lam,
                            "status": "converged" if sec.converged else "not_converged"})
    margins = [l2 - r1.lam for l2 in lam2s]
    k = int(np.argmin(margins))
    report.verdicts.append(Verdict("lambda2_above_ball", bool(margins[k] > tols[k]), float(margins[k]),
                                   float(tols[k])))
    drops = [a - b for a, b in zip(lam2s[:-1], lam2s[1:])]
    worst = min(drops) if drops else 0.0
    report.verdicts.append(Verdict("nonincreasing", bool(worst >= -max(tols)), float(worst), float(max(tols))))
    rel = abs(lam2s[-1] - r1.lam) / r1.lam
    report.verdicts.append(Verdict("limit_within_rtol", bool(rel < limit_rtol), float(limit_rtol - rel),
                                   float(limit_rtol)))
    return report


# -----------------------------------------------------------------------------------
@dataclass
class NodalBound:
    lam: float
    lambda_pos: float
    lambda_neg: float
    margin: float
    tolerance: float
    holds: bool
    skipped: list


def nodal_domain_bound_check(lam: float, phi, mesh, params: OperatorParams,
                             opts: SolveOptions | None = None, residual: float = 0.0) -> NodalBound:
    """Check ``lam > max(lambda_1(Omega+), lambda_1(Omega-))`` on restricted meshes.

    ``residual`` is the Euler-Lagrange defect of ``(lam, phi)`` and enters the
    tolerance.
    """
    opts = opts or SolveOptions()
    phi = np.asarray(phi, dtype=float)
    nd = nodal_domains(phi, mesh)
    if nd.n_pos == 0 or nd.n_neg == 0:
        raise ValueError("phi must change sign")
    lams, tol, skipped = {}, eigen_tolerance(residual, mesh), []
    for name, mask in (("pos", nd.mask_pos), ("neg", nd.mask_neg)):
        if mask.sum() < 2:
            log.warning("nodal domain %s has fewer than 2 nodes; skipped", name)
            skipped.append(name)
            lams[name] = float("-inf")
            continue
        sub = restrict_mesh(mesh, mask)
        res = solve_first_eigenpair(sub, params, opts)
        lams[name] = res.lam
        tol += eigen_tolerance(res.residual, sub)
    top = max(lams.values())
    margin = lam - top
    return NodalBound(float(lam), lams["pos"], lams["neg"], float(margin), float(tol), bool(margin > tol),
                      skipped)
