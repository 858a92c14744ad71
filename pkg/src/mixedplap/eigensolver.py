"""First and second eigenvalues of the mixed operator.

The first eigenpair minimises ``J_0`` on the unit L^p sphere.  We run a
preconditioned projected gradient method with Armijo backtracking; the
iterate is replaced by its absolute value after every step (this never
raises the energy) and renormalised.  Convergence is declared on the sup
norm of the discrete Euler-Lagrange defect ``grad J_0(u) - lambda F(u)``.

The second eigenvalue is the mountain-pass level of ``J_0`` between
``-phi_1`` and ``phi_1``; it is computed with the string method in
:mod:`mixedplap.fucik`.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import energy
from ._sphere import Preconditioner, tangent_direction
from .hardy import validate_params
from .mesh import components

log = logging.getLogger(__name__)

__all__ = [
    "SolveOptions",
    "EigenResult",
    "SecondEigenResult",
    "NodalDomains",
    "solve_first_eigenpair",
    "euler_lagrange_residual",
    "solve_second_eigenvalue",
    "nodal_domains",
]


@dataclass
class SolveOptions:
    tol_residual: float = 1e-7
    max_iters: int = 50_000
    initial_step: float | None = None
    shrink: float = 0.5
    armijo: float = 1e-4
    seed: int = 0
    precond_floor: float = 1e-4
    stagnation_window: int = 50
    stagnation_rtol: float = 1e-13
    shift: float = 0.98
    keep_history: bool = False

    def __post_init__(self):
        if not (self.tol_residual > 0 and self.max_iters > 0 and self.armijo > 0
                and self.precond_floor > 0 and self.stagnation_window > 0):
            raise ValueError("solver options must be positive")
        if self.initial_step is not None and not self.initial_step > 0:
            raise ValueError("initial step must be positive")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink factor must lie in (0, 1)")

    def first_step(self, p: float) -> float:
        """Default trial step: the lagged operator overestimates the Hessian by ``p - 1``."""
        if self.initial_step is not None:
            return self.initial_step
        return min(1.0, 1.0 / (p - 1.0))


@dataclass
class EigenResult:
    lam: float
    phi: np.ndarray
    residual: float
    iterations: int
    converged: bool
    status: str = "converged"
    breakdown: energy.EnergyBreakdown | None = None
    history: list = field(default_factory=list)

    @property
    def min_value(self) -> float:
        return float(self.phi.min())


def euler_lagrange_residual(phi, lam, mesh, params, d: float = 0.0) -> float:
    """``max_i |grad J_d(phi)_i - lam F(phi_i)|``."""
    g = energy.grad_j_d(phi, d, mesh, params)
    return float(np.max(np.abs(g - lam * energy.F(phi, mesh.p))))


def _armijo_step(u, J, g, r, d, mesh, params, opts, absolute):
    """Backtracking along ``-r`` on the sphere; returns (u, J, step) or None."""
    hN, p = mesh.cell_volume, mesh.p
    slope = p * hN * float(g @ r)
    slack = 4.0 * np.finfo(float).eps * max(abs(J), 1.0)
    t = opts.first_step(p)
    while t > 1e-14:
        v = u - t * r
        if absolute:
            v = np.abs(v)
        v = energy.normalize(v, mesh)
        Jv = energy.j_d(v, d, mesh, params)
        if Jv <= J - opts.armijo * t * slope + slack:
            return v, Jv, t
        t *= opts.shrink
    return None


def solve_first_eigenpair(mesh, params, opts: SolveOptions | None = None, u0=None) -> EigenResult:
    """Minimise the Rayleigh quotient; returns the positive first eigenfunction."""
    opts = opts or SolveOptions()
    validate_params(params, mesh)
    p = mesh.p
    if u0 is None:
        rng = np.random.default_rng(opts.seed)
        u0 = rng.uniform(0.5, 1.5, mesh.n_nodes)
    u = energy.normalize(np.abs(np.asarray(u0, dtype=float)), mesh)
    prec = Preconditioner(mesh, params, floor=opts.precond_floor)
    J = energy.j_d(u, 0.0, mesh, params)
    g = energy.grad_j_d(u, 0.0, mesh, params)
    history = [J] if opts.keep_history else []
    recent = [J]
    status = "max_iters"
    it = 0
    res = np.inf
    while True:
        Fu = energy.F(u, p)
        res = float(np.max(np.abs(g - J * Fu)))
        if res <= opts.tol_residual:
            status = "converged"
            break
        if it >= opts.max_iters:
            break
        if not prec.adaptive and opts.shift and prec.shift == 0.0 and len(recent) > 2:
            # once the energy has settled, shift the fixed operator towards lambda_1
            # (J never drops below lambda_1 on the sphere, so the shift stays safe)
            if abs(recent[-2] - J) <= 1e-4 * abs(J):
                prec.set_shift(opts.shift * J)
        if p < 2 and len(recent) > opts.stagnation_window:
            if abs(recent[0] - J) <= opts.stagnation_rtol * max(abs(J), 1.0):
                # typical for p < 2, where |t|^p is not twice differentiable at
                # coincident nodal values and the residual has a rounding floor
                status = "stagnated"
                break
            recent.pop(0)
        r, _ = tangent_direction(g, Fu, prec.solver(u))
        step = _armijo_step(u, J, g, r, 0.0, mesh, params, opts, absolute=True)
        if step is None:
            status = "line_search"
            break
        it += 1
        u, J, _ = step
        g = energy.grad_j_d(u, 0.0, mesh, params)
        recent.append(J)
        if opts.keep_history:
            history.append(J)
    converged = status == "converged"
    if status == "stagnated":
        log.info("first eigenpair stagnated at residual %.3e after %d iterations", res, it)
    elif not converged:
        log.warning("first eigenpair %s: residual %.3e after %d iterations", status, res, it)
    return EigenResult(J, u, res, it, converged, status, energy.energy_breakdown(u, 0.0, mesh, params),
                       history)


@dataclass
class NodalDomains:
    mask_pos: np.ndarray
    mask_neg: np.ndarray
    n_pos: int
    n_neg: int
    pieces_pos: list
    pieces_neg: list


def nodal_domains(phi, mesh) -> NodalDomains:
    """Connected components of ``{phi > 0}`` and ``{phi < 0}`` under lattice adjacency."""
    phi = np.asarray(phi)
    pos, neg = phi > 0, phi < 0
    cp = components(mesh, pos) if pos.any() else []
    cn = components(mesh, neg) if neg.any() else []
    return NodalDomains(pos, neg, len(cp), len(cn), cp, cn)


@dataclass
class SecondEigenResult:
    lam: float
    psi: np.ndarray
    residual: float
    converged: bool
    first: EigenResult
    path: object
    margin: float
    sign_changing: bool

    @property
    def strict(self) -> bool:
        return self.margin > 0


def solve_second_eigenvalue(mesh, params, opts: SolveOptions | None = None, path_opts=None,
                            first: EigenResult | None = None) -> SecondEigenResult:
    """``lambda_2`` as the mountain-pass level of ``J_0`` between ``-phi_1`` and ``phi_1``."""
    from .fucik import PathOptions, mountain_pass_level

    opts = opts or SolveOptions()
    path_opts = path_opts or PathOptions()
    if first is None:
        first = solve_first_eigenpair(mesh, params, opts)
    state = mountain_pass_level(0.0, mesh, params, first.phi, path_opts)
    psi = state.points[state.imax]
    sign_changing = bool(np.any(psi > 0) and np.any(psi < 0))
    return SecondEigenResult(state.level, psi.copy(), state.residual, state.converged, first, state,
                             state.level - first.lam, sign_changing)
