"""Mountain-pass levels and the first nontrivial curve of the Fucik spectrum.

For ``d >= 0`` let ``c(d)`` be the smallest, over paths on the unit L^p sphere
joining ``-phi_1`` to ``phi_1``, of the largest value of ``J_d`` on the path.
Critical points of ``J_d`` on the sphere at level ``c`` solve

    -Delta_p u + (-Delta_p)^s u - mu |u|^(p-2) u / |x|^(p theta)
        = (d + c) (u^+)^(p-1) - c (u^-)^(p-1),

so ``(d + c(d), c(d))`` and its mirror image ``(c(d), d + c(d))`` lie in the
Fucik spectrum.  At ``d = 0`` the level is the second eigenvalue.

The level is computed with a climbing-image string method: the path is a
chain of points on the sphere, relaxed by preconditioned descent steps and
re-spaced to equal L^p arc length after every sweep, while the highest point
is pushed uphill along the path and downhill across it.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np

from . import energy
from ._sphere import Preconditioner, tangent_direction
from .hardy import validate_params

log = logging.getLogger(__name__)

__all__ = [
    "PathOptions",
    "PathState",
    "FucikPoint",
    "PathCollapseError",
    "mountain_pass_level",
    "fucik_curve",
    "verify_fucik_point",
    "path_family",
    "trivial_lines",
    "path_estimate_gap",
]


class PathCollapseError(RuntimeError):
    """The discrete path degenerated (consecutive points coincide)."""


@dataclass
class PathOptions:
    n_points: int = 33
    perturbation: float = 0.1
    n_seeds: int = 3
    seed: int = 0
    tol: float = 1e-5
    max_iters: int = 3000
    step: float = 0.5
    climb_after: int = 10
    refresh: int = 1
    precond_floor: float | None = None
    min_spacing: float = 1e-10

    def floor_for(self, p: float) -> float:
        """Relative floor of the lagged metric weights.

        For ``p > 2`` the weights ``|grad u|^(p-2)`` vanish where the field is
        flat; a generous floor keeps the metric well conditioned.  For ``p < 2``
        the weights blow up instead and only a small floor is needed.
        """
        if self.precond_floor is not None:
            return self.precond_floor
        return 0.1 if p > 2 else 1e-4

    def __post_init__(self):
        if self.n_points < 5:
            raise ValueError("a path needs at least 5 points")
        if not (self.tol > 0 and self.max_iters > 0 and self.step > 0 and self.n_seeds > 0):
            raise ValueError("path options must be positive")


@dataclass
class PathState:
    d: float
    points: np.ndarray
    energies: np.ndarray
    imax: int
    level: float
    residual: float
    converged: bool
    iterations: int
    seed: int | None = None
    levels_by_seed: dict = field(default_factory=dict)

    @property
    def maximizer(self) -> np.ndarray:
        return self.points[self.imax]


@dataclass
class FucikPoint:
    d: float
    c: float
    residual: float
    converged: bool

    @property
    def alpha(self) -> float:
        return self.d + self.c

    @property
    def beta(self) -> float:
        return self.c


# -----------------------------------------------------------------------------------
# path geometry
# -----------------------------------------------------------------------------------
def _arc_lengths(points, mesh):
    seg = np.array([energy.lp_norm(b - a, mesh) for a, b in zip(points[:-1], points[1:])])
    return np.concatenate([[0.0], np.cumsum(seg)])


def _resample(points, mesh, lo, hi):
    """Re-space points[lo..hi] (inclusive) to equal arc length, endpoints kept."""
    seg = points[lo:hi + 1]
    n = len(seg)
    if n <= 2:
        return
    s = _arc_lengths(seg, mesh)
    total = s[-1]
    if not total > 0:
        raise PathCollapseError("path segment has zero length")
    targets = np.linspace(0.0, total, n)
    new = seg.copy()
    for k in range(1, n - 1):
        j = int(np.searchsorted(s, targets[k], side="right")) - 1
        j = min(max(j, 0), n - 2)
        w = (targets[k] - s[j]) / (s[j + 1] - s[j]) if s[j + 1] > s[j] else 0.0
        new[k] = energy.normalize((1 - w) * seg[j] + w * seg[j + 1], mesh)
    points[lo + 1:hi] = new[1:-1]


def _initial_path(phi1, mesh, params, opts, rng):
    """``normalize((1-t)(-phi_1) + t phi_1)`` bent off the diameter at the midpoint."""
    n, p = opts.n_points, mesh.p
    # a smooth random direction: one inverse application of the p = 2 operator
    smoother = Preconditioner(mesh, params, adaptive=False).solver()
    w = smoother(rng.standard_normal(mesh.n_nodes))
    Fphi = energy.F(phi1, p)
    w = w - (Fphi @ w) / (Fphi @ phi1) * phi1
    w = energy.normalize(w, mesh)
    t = np.linspace(0.0, 1.0, n)
    pts = np.empty((n, mesh.n_nodes))
    for k, tk in enumerate(t):
        pts[k] = (2 * tk - 1) * phi1 + opts.perturbation * np.sin(np.pi * tk) * w
        pts[k] = energy.normalize(pts[k], mesh)
    pts[0], pts[-1] = -phi1, phi1
    return pts


# -----------------------------------------------------------------------------------
# the string method
# -----------------------------------------------------------------------------------
def _climb_update(u, g, r, J, prev, nxt, d, mesh, params, step):
    """Descend across the path, maximise along it (Newton on a finite-difference curvature)."""
    p, hN = mesh.p, mesh.cell_volume
    Fu = energy.F(u, p)
    tau = nxt - prev
    tau = tau - (Fu @ tau) / (Fu @ u) * u
    nt = energy.lp_norm(tau, mesh)
    if not nt > 0:
        return energy.normalize(u - step * r, mesh)
    tau = tau / nt
    w_tau = hN * float(tau @ tau)
    r_perp = r - hN * float(r @ tau) / w_tau * tau
    slope = p * hN * float(g @ tau)
    delta = 1e-3
    f_plus = energy.j_d(energy.normalize(u + delta * tau, mesh), d, mesh, params)
    f_minus = energy.j_d(energy.normalize(u - delta * tau, mesh), d, mesh, params)
    curv = (f_plus - 2.0 * J + f_minus) / delta**2
    s_max = 0.25 * min(energy.lp_norm(u - prev, mesh), energy.lp_norm(nxt - u, mesh))
    if curv < 0:
        s = -slope / curv
    else:
        s = np.sign(slope) * s_max
    s = float(np.clip(s, -s_max, s_max))
    v = energy.normalize(u + s * tau, mesh)
    return _descend(v, r_perp, energy.j_d(v, d, mesh, params), d, mesh, params, step)


def _descend(u, r, J, d, mesh, params, step, max_halvings: int = 12):
    """Step along ``-r`` on the sphere, halving until ``J_d`` does not increase.

    For ``p > 2`` the lagged metric degenerates where the field is flat, and
    an unchecked step can overshoot badly; at ``p = 2`` the first trial is
    normally accepted.
    """
    slack = 4.0 * np.finfo(float).eps * max(abs(J), 1.0)
    t = step
    for _ in range(max_halvings):
        v = energy.normalize(u - t * r, mesh)
        if energy.j_d(v, d, mesh, params) <= J + slack:
            return v
        t *= 0.5
    return u


def _relax(points, d, mesh, params, opts, prec):
    """Run the string iteration on ``points`` in place; returns a PathState."""
    n = len(points)
    p = mesh.p
    E = np.array([energy.j_d(x, d, mesh, params) for x in points])
    solvers = [None] * n
    res = np.inf
    converged = False
    it = 0
    imax = 1 + int(np.argmax(E[1:-1]))
    for it in range(opts.max_iters + 1):
        imax = 1 + int(np.argmax(E[1:-1]))
        climbing = it >= opts.climb_after
        grads = [None] * n
        for k in range(1, n - 1):
            grads[k] = energy.grad_j_d(points[k], d, mesh, params)
        u = points[imax]
        res = float(np.max(np.abs(grads[imax] - E[imax] * energy.F(u, p))))
        if climbing and res <= opts.tol:
            converged = True
            break
        if it == opts.max_iters:
            break
        for k in range(1, n - 1):
            if solvers[k] is None or it % opts.refresh == 0:
                solvers[k] = prec.solver(points[k])
            r, _ = tangent_direction(grads[k], energy.F(points[k], p), solvers[k])
            if climbing and k == imax:
                points[k] = _climb_update(points[k], grads[k], r, E[k], points[k - 1], points[k + 1],
                                          d, mesh, params, opts.step)
            else:
                points[k] = _descend(points[k], r, E[k], d, mesh, params, opts.step)
        if climbing:
            _resample(points, mesh, 0, imax)
            _resample(points, mesh, imax, n - 1)
        else:
            _resample(points, mesh, 0, n - 1)
        spacing = np.diff(_arc_lengths(points, mesh))
        if spacing.min() < opts.min_spacing:
            raise PathCollapseError(
                "consecutive path points coincide; increase n_points or the perturbation")
        E = np.array([energy.j_d(x, d, mesh, params) for x in points])
    imax = 1 + int(np.argmax(E[1:-1]))
    return PathState(d, points, E, imax, float(E[imax]), res, converged, it)


def mountain_pass_level(d, mesh, params, phi1, path_opts: PathOptions | None = None,
                        init=None) -> PathState:
    """String-method estimate of ``c(d)``.

    Several random bends of the initial path are tried (``n_seeds``) and the
    lowest converged level is kept.  ``init`` (an array of path points)
    replaces the random initial paths, which is how :func:`fucik_curve`
    continues in ``d``.  The result is an upper bound for the discrete
    mountain-pass level.
    """
    opts = path_opts or PathOptions()
    if d < 0:
        raise ValueError("d must be nonnegative")
    validate_params(params, mesh)
    phi1 = energy.normalize(np.asarray(phi1, dtype=float), mesh)
    prec = Preconditioner(mesh, params, floor=opts.floor_for(mesh.p))
    candidates = []
    if init is not None:
        pts = np.array(init, dtype=float, copy=True)
        if pts.shape[0] != opts.n_points:
            pts = _reinterpolate(pts, opts.n_points, mesh)
        pts[0], pts[-1] = -phi1, phi1
        state = _relax(pts, d, mesh, params, opts, prec)
        state.seed = None
        candidates.append(state)
    else:
        collapsed = []
        for k in range(opts.n_seeds):
            seed = opts.seed + k
            rng = np.random.default_rng(seed)
            pts = _initial_path(phi1, mesh, params, opts, rng)
            try:
                state = _relax(pts, d, mesh, params, opts, prec)
            except PathCollapseError as exc:
                log.info("seed %d collapsed at d=%g: %s", seed, d, exc)
                collapsed.append(exc)
                continue
            state.seed = seed
            candidates.append(state)
        if not candidates:
            raise collapsed[-1]
    good = [c for c in candidates if c.converged] or candidates
    best = min(good, key=lambda c: c.level)
    best.levels_by_seed = {c.seed: c.level for c in candidates}
    if not best.converged:
        log.warning("string method did not converge at d=%g (residual %.3e)", d, best.residual)
    return best


def _reinterpolate(points, n, mesh):
    """Resample a path to ``n`` points at equal arc length."""
    s = _arc_lengths(points, mesh)
    targets = np.linspace(0.0, s[-1], n)
    out = np.empty((n, points.shape[1]))
    for k, tk in enumerate(targets):
        j = min(int(np.searchsorted(s, tk, side="right")) - 1, len(points) - 2)
        w = (tk - s[j]) / (s[j + 1] - s[j]) if s[j + 1] > s[j] else 0.0
        out[k] = energy.normalize((1 - w) * points[j] + w * points[j + 1], mesh)
    return out


def verify_fucik_point(alpha, beta, u, mesh, params) -> float:
    """Sup-norm defect of ``T u = alpha (u^+)^(p-1) - beta (u^-)^(p-1)``."""
    u = np.asarray(u, dtype=float)
    p = mesh.p
    g = energy.grad_j_d(u, 0.0, mesh, params)
    rhs = alpha * np.maximum(u, 0.0) ** (p - 1) - beta * np.maximum(-u, 0.0) ** (p - 1)
    return float(np.max(np.abs(g - rhs)))


@dataclass
class FucikCurve:
    points: list
    states: list
    lambda1: float
    monotone: bool
    lipschitz_gaps: list

    def reflected(self) -> list:
        """Mirror images ``(c, d + c)`` of the curve points."""
        return [(pt.beta, pt.alpha) for pt in self.points]


def fucik_curve(d_grid, mesh, params, phi1=None, lambda1=None, path_opts: PathOptions | None = None,
                continuation: bool = True) -> FucikCurve:
    """``c(d)`` on an ascending grid, with monotonicity and Lipschitz diagnostics.

    With ``continuation`` the converged path at one ``d`` seeds the next one.
    Failures at single grid points are recorded (``converged=False``), not raised.
    """
    from .eigensolver import solve_first_eigenpair

    d_grid = [float(x) for x in d_grid]
    if any(b < a for a, b in zip(d_grid[:-1], d_grid[1:])):
        raise ValueError("d_grid must be sorted ascending")
    if any(x < 0 for x in d_grid):
        raise ValueError("d must be nonnegative")
    opts = path_opts or PathOptions()
    if phi1 is None or lambda1 is None:
        first = solve_first_eigenpair(mesh, params)
        phi1, lambda1 = first.phi, first.lam
    points, states = [], []
    prev = None
    for d in d_grid:
        candidates = []
        if continuation and prev is not None and prev.converged:
            try:
                candidates.append(mountain_pass_level(d, mesh, params, phi1, opts, init=prev.points))
            except PathCollapseError as exc:
                log.info("continuation collapsed at d=%g: %s", d, exc)
        # fresh random paths guard against continuation sticking to a higher branch;
        # one seed suffices when the continued path converged
        n_fresh = 1 if (candidates and candidates[0].converged) else opts.n_seeds
        try:
            candidates.append(mountain_pass_level(d, mesh, params, phi1,
                                                  dataclasses.replace(opts, n_seeds=n_fresh)))
        except PathCollapseError as exc:
            log.warning("path collapsed at d=%g: %s", d, exc)
        if not candidates:
            points.append(FucikPoint(d, float("nan"), float("nan"), False))
            states.append(None)
            continue
        good = [c for c in candidates if c.converged] or candidates
        state = min(good, key=lambda c: c.level)
        res = verify_fucik_point(d + state.level, state.level, state.maximizer, mesh, params)
        points.append(FucikPoint(d, state.level, res, state.converged))
        states.append(state)
        prev = state
    gaps = []
    monotone = True
    for a, b in zip(points[:-1], points[1:]):
        gaps.append((b.d - a.d) - abs(a.c - b.c))
        if not b.c <= a.c + 2 * opts.tol:
            monotone = False
    return FucikCurve(points, states, float(lambda1), monotone, gaps)


def path_family(u, which: int, t: float, mesh):
    """The three explicit paths used to compare ``c(d)`` with other Fucik points.

    ``which = 1``: ``u^+ - (1-t) u^-``; ``which = 2``:
    ``((1-t)(u^+)^p + t (u^-)^p)^(1/p)``; ``which = 3``: ``t u^+ - u^-``.
    Each is returned normalised on the sphere.
    """
    u = np.asarray(u, dtype=float)
    up, um = np.maximum(u, 0.0), np.maximum(-u, 0.0)
    if not (up.any() and um.any()):
        raise ValueError("path_family needs a sign-changing field")
    p = mesh.p
    if which == 1:
        v = up - (1 - t) * um
    elif which == 2:
        v = ((1 - t) * up**p + t * um**p) ** (1.0 / p)
    elif which == 3:
        v = t * up - um
    else:
        raise ValueError("which must be 1, 2 or 3")
    return energy.normalize(v, mesh)


def path_estimate_gap(u, level, d, mesh, params, n_t: int = 50) -> float:
    """``max over the three paths of J_d(gamma(t)) - level`` (should be <= 0)."""
    worst = -np.inf
    for which in (1, 2, 3):
        for t in np.linspace(0.0, 1.0, n_t):
            if which == 3 and t == 0.0:
                v = path_family(u, 3, 0.0, mesh)
            else:
                v = path_family(u, which, t, mesh)
            worst = max(worst, energy.j_d(v, d, mesh, params) - level)
    return float(worst)


def trivial_lines(lambda1: float, d_grid):
    """The two trivial families ``(lambda_1, lambda_1 - d)`` and ``(lambda_1 + d, lambda_1)``."""
    vertical = [(lambda1, lambda1 - d) for d in d_grid]
    horizontal = [(lambda1 + d, lambda1) for d in d_grid]
    return vertical, horizontal
