"""Randomised property suites for the discrete energies and inequalities.

Each suite draws its random inputs from a ``numpy.random.Generator`` seeded
by the caller, so the outcome is a deterministic function of the seed.  A
suite returns a :class:`PropertyResult` holding the worst value seen and
the tolerance it was compared against; per-trial values are kept for the
``hardy`` subcommand, which reports one row per trial.

Sign conventions: ``worst`` is always oriented so that *larger is worse*,
and a property passes when ``worst <= tolerance``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from . import energy
from .hardy import OperatorParams, check_interpolated_hardy, hardy_constants
from .mesh import ShapeSpec, build_mesh

__all__ = [
    "PropertyResult",
    "random_bump_field",
    "hardy_suite",
    "picone_suite",
    "sigma_path_suite",
    "splitting_suite",
    "path_lemma_suite",
    "homogeneity_suite",
    "gradient_suite",
    "run_check_suite",
    "DEFAULT_HARDY_CONFIGS",
]


@dataclass
class PropertyResult:
    property: str
    trials: int
    worst: float
    tolerance: float
    detail: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.worst <= self.tolerance)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def row(self) -> dict:
        return {"property": self.property, "trials": self.trials, "worst": self.worst,
                "tolerance": self.tolerance, "verdict": self.verdict}


# -----------------------------------------------------------------------------------
def _boundary_distance(mesh) -> np.ndarray:
    """Euclidean distance (in units of h) from each node to the nearest absent cell."""
    lo = mesh.index.min(axis=0) - 1
    shape = tuple(mesh.index.max(axis=0) - lo + 2)
    grid = np.zeros(shape, dtype=bool)
    rel = tuple((mesh.index - lo).T)
    grid[rel] = True
    return ndimage.distance_transform_edt(grid)[rel]


def random_bump_field(mesh, rng: np.random.Generator, n_bumps: int | None = None,
                      nonnegative: bool = False) -> np.ndarray:
    """A sum of Gaussian bumps, tapered to zero towards the boundary of the mesh.

    The taper is a smoothstep of the distance to the complement, so the field
    is smooth inside and vanishes in the outermost cell layer.
    """
    nodes = mesh.nodes
    if n_bumps is None:
        n_bumps = int(rng.integers(1, 5))
    lo, hi = nodes.min(axis=0), nodes.max(axis=0)
    diam = float(np.max(hi - lo)) + mesh.h
    u = np.zeros(mesh.n_nodes)
    for _ in range(n_bumps):
        c = rng.uniform(lo, hi)
        w = rng.uniform(0.08, 0.35) * diam
        a = rng.uniform(0.2, 1.0) if nonnegative else rng.normal()
        u += a * np.exp(-np.sum((nodes - c) ** 2, axis=1) / (2 * w * w))
    dist = _boundary_distance(mesh)
    ramp = np.clip((dist - 1.0) / max(0.15 * diam / mesh.h, 1.0), 0.0, 1.0)
    return u * ramp * ramp * (3 - 2 * ramp)


# -----------------------------------------------------------------------------------
# The 1-D configuration uses s = 0.25: on (0, 1) the origin is a boundary point,
# and the punctured inequality degenerates when p s = N (see the decisions ledger).
DEFAULT_HARDY_CONFIGS = (
    ("interval(0,1)", ShapeSpec.interval(0.0, 1.0, 128),
     OperatorParams(N=1, p=2.0, s=0.25, theta=0.4)),
    ("disk(0,1)", ShapeSpec.disk((0.0, 0.0), 1.0, 32),
     OperatorParams(N=2, p=1.5, s=0.5, theta=0.7)),
)


def hardy_suite(rng: np.random.Generator, n_fields: int = 100, configs=DEFAULT_HARDY_CONFIGS,
                tol_rel: float = 1e-2) -> PropertyResult:
    """Interpolated Hardy inequality on random bump fields.

    ``worst`` is the largest ``-slack`` (relative violation); each detail
    entry records one trial.
    """
    detail = []
    worst = -np.inf
    for label, spec, params in configs:
        mesh = build_mesh(spec, params)
        consts = hardy_constants(params, mesh.origin_status)
        for k in range(n_fields):
            u = random_bump_field(mesh, rng)
            chk = check_interpolated_hardy(u, mesh, params, consts, tol_rel=tol_rel)
            worst = max(worst, -chk.slack)
            detail.append({"config": label, "trial": k, "lhs": chk.lhs, "rhs": chk.rhs,
                           "slack": chk.slack, "tolerance": tol_rel,
                           "verdict": "pass" if chk.holds else "fail"})
    return PropertyResult("interpolated_hardy", len(detail), float(worst), tol_rel, detail)


def picone_suite(rng: np.random.Generator, n_pairs: int = 1000, n_nodes: int = 24,
                 tol: float = 1e-12) -> PropertyResult:
    """Discrete Picone identity for random ``u >= 0`` and ``v > 0``; ``worst`` is ``-min L``."""
    worst = -np.inf
    for _ in range(n_pairs):
        p = rng.uniform(1.1, 4.0)
        u = rng.uniform(0.0, 2.0, n_nodes)
        u[rng.random(n_nodes) < 0.2] = 0.0
        v = rng.uniform(0.05, 2.0, n_nodes)
        L = energy.picone_terms(u, v, p)
        worst = max(worst, -float(L.min()))
    return PropertyResult("discrete_picone", n_pairs, float(worst), tol)


def sigma_path_suite(rng: np.random.Generator, mesh, n_pairs: int = 50, t_grid=(0.25, 0.5, 0.75),
                     tol: float = 1e-10) -> PropertyResult:
    """Convexity of the nonlocal energy along ``sigma_t``; ``worst`` is the largest relative excess."""
    worst = -np.inf
    for _ in range(n_pairs):
        u = np.abs(random_bump_field(mesh, rng))
        v = np.abs(random_bump_field(mesh, rng))
        scale = max(1.0, energy.nonlocal_energy(u, mesh), energy.nonlocal_energy(v, mesh))
        slack = energy.sigma_path_energy_check(u, v, t_grid, mesh)
        worst = max(worst, -float(slack.min()) / scale)
    return PropertyResult("sigma_path_convexity", n_pairs * len(t_grid), float(worst), tol)


def splitting_suite(rng: np.random.Generator, mesh, n_fields: int = 100,
                    tol: float = 1e-12) -> PropertyResult:
    """``[u]^p >= [u+]^p + [u-]^p``; ``worst`` is ``-gap / max(1, [u]^p)``."""
    worst = -np.inf
    for _ in range(n_fields):
        u = random_bump_field(mesh, rng) + rng.normal(0.0, 0.05, mesh.n_nodes)
        lhs = energy.nonlocal_energy(u, mesh)
        worst = max(worst, -energy.splitting_gap(u, mesh) / max(1.0, lhs))
    return PropertyResult("splitting", n_fields, float(worst), tol)


def path_lemma_suite(rng: np.random.Generator, n_samples: int = 10_000, tol: float = 1e-12) -> PropertyResult:
    """Scalar lemma ``g(t) <= g(1)`` for ``U V <= 0`` and real ``t``."""
    p = rng.uniform(1.1, 5.0, n_samples)
    U = rng.normal(size=n_samples) * rng.uniform(0.1, 10.0, n_samples)
    V = -np.sign(U) * np.abs(rng.normal(size=n_samples)) * rng.uniform(0.1, 10.0, n_samples)
    V[rng.random(n_samples) < 0.05] = 0.0
    t = rng.uniform(-3.0, 3.0, n_samples)
    excess = -energy.path_lemma_gap(U, V, t, p)
    scale = np.maximum(1.0, np.abs(U - V) ** p + np.abs(U - t * V) ** p)
    return PropertyResult("path_lemma", n_samples, float(np.max(excess / scale)), tol)


def homogeneity_suite(rng: np.random.Generator, mesh, n_fields: int = 10, factors=(-2.0, 0.5, 3.0),
                      tol: float = 1e-12) -> PropertyResult:
    """Each energy term scales like ``|t|^p`` (the ``u+`` term like ``t^p`` for ``t > 0`` only)."""
    p = mesh.p
    terms = [energy.local_energy, energy.nonlocal_energy, energy.hardy_energy]
    worst = 0.0
    for _ in range(n_fields):
        u = random_bump_field(mesh, rng)
        base = [f(u, mesh) for f in terms]
        pos = energy.positive_part_energy(u, mesh)
        for t in factors:
            for f, b in zip(terms, base):
                want = abs(t) ** p * b
                worst = max(worst, abs(f(t * u, mesh) - want) / max(1.0, abs(want)))
            if t > 0:
                want = t**p * pos
                worst = max(worst, abs(energy.positive_part_energy(t * u, mesh) - want) / max(1.0, want))
    return PropertyResult("homogeneity", n_fields * len(factors), float(worst), tol)


def gradient_suite(rng: np.random.Generator, n_fields: int = 20, n_nodes: int = 64, s: float = 0.3,
                   theta: float = 0.32, ps=(2.0, 3.0), ds=(0.0, 1.0), mu_fractions=(0.0, 0.5),
                   eps: float = 1e-6, tol: float = 1e-5) -> PropertyResult:
    """Central finite differences of ``J_d`` against ``p h^N grad_j_d`` on ``(0, 1)``.

    Fields are uniform on ``(0.1, 1.1)``, away from the kink of ``F``.
    ``worst`` is the largest ``max|fd - exact| / max|exact|``.
    """
    spec = ShapeSpec.interval(0.0, 1.0, n_nodes)
    worst = 0.0
    trials = 0
    detail = []
    for p in ps:
        base = OperatorParams(N=1, p=p, s=s, theta=theta)
        mesh = build_mesh(spec, base)
        mu0 = hardy_constants(base, mesh.origin_status).mu_max
        for frac in mu_fractions:
            params = replace(base, mu=frac * mu0)
            for d in ds:
                for _ in range(n_fields):
                    u = rng.uniform(0.1, 1.1, mesh.n_nodes)
                    exact = p * mesh.cell_volume * energy.grad_j_d(u, d, mesh, params)
                    fd = np.empty_like(u)
                    for i in range(mesh.n_nodes):
                        e = np.zeros_like(u)
                        e[i] = eps
                        fd[i] = (energy.j_d(u + e, d, mesh, params) - energy.j_d(u - e, d, mesh, params)) / (2 * eps)
                    err = float(np.max(np.abs(fd - exact)) / np.max(np.abs(exact)))
                    worst = max(worst, err)
                    trials += 1
                detail.append({"p": p, "d": d, "mu": params.mu})
    return PropertyResult("gradient_fd", trials, float(worst), tol, detail)


# -----------------------------------------------------------------------------------
def run_check_suite(seed: int, mesh, params: OperatorParams, n_hardy: int = 100, n_picone: int = 1000,
                    n_sigma: int = 50, n_split: int = 100, n_path: int = 10_000,
                    n_grad: int = 20) -> list[PropertyResult]:
    """The full property suite on one reference mesh.

    Every suite gets its own child generator spawned from ``seed``, so
    changing the size of one suite never shifts the draws of another.
    """
    names = ("hardy", "picone", "sigma", "split", "path", "homog", "grad")
    rngs = dict(zip(names, (np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(len(names)))))
    return [
        hardy_suite(rngs["hardy"], n_hardy),
        picone_suite(rngs["picone"], n_picone),
        sigma_path_suite(rngs["sigma"], mesh, n_sigma),
        splitting_suite(rngs["split"], mesh, n_split),
        path_lemma_suite(rngs["path"], n_path),
        homogeneity_suite(rngs["homog"], mesh),
        gradient_suite(rngs["grad"], n_grad),
    ]
