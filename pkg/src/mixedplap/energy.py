"""Discrete energies, their gradients and the elementary inequalities.

All functions take a field ``u`` (one value per mesh node) and a
:class:`~mixedplap.mesh.Mesh`.  Integrals are Riemann sums over cells, so
``lp_norm(u) = (h^N sum |u_i|^p)**(1/p)``.

The functional minimised on the unit L^p sphere is

    J_d(u) = a_loc * local(u) + a_nl * nonlocal(u) - mu * hardy(u) - d * int (u^+)^p

and ``grad_j_d`` returns the *density* ``(1/p) dJ_d/du_i / h^N``, which is
the discrete version of

    -Delta_p u + (-Delta_p)^s u - mu |u|^(p-2) u / |x|^(p theta) - d (u^+)^(p-1).

A critical point of ``J_d`` on the sphere therefore satisfies
``grad_j_d(u) = J_d(u) * F(u)`` with ``F(t) = |t|^(p-2) t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

__all__ = [
    "F",
    "lp_norm",
    "normalize",
    "local_energy",
    "nonlocal_energy",
    "hardy_energy",
    "positive_part_energy",
    "EnergyBreakdown",
    "j_d",
    "energy_breakdown",
    "grad_j_d",
    "rayleigh",
    "check_discrete_picone",
    "picone_terms",
    "sigma_path_energy_check",
    "splitting_gap",
    "path_lemma_gap",
]

_ROW_CHUNK = 1024


def F(u, p):
    """``|u|**(p-2) * u`` with ``F(0) = 0``."""
    u = np.asarray(u, dtype=float)
    return np.sign(u) * np.abs(u) ** (p - 1)


def lp_norm(u, mesh) -> float:
    return float((mesh.cell_volume * np.sum(np.abs(u) ** mesh.p)) ** (1.0 / mesh.p))


def normalize(u, mesh):
    n = lp_norm(u, mesh)
    if not n > 0:
        raise ValueError("cannot normalise the zero field")
    return np.asarray(u, dtype=float) / n


# -----------------------------------------------------------------------------------
# local part
# -----------------------------------------------------------------------------------
@dataclass
class _LocalOps:
    grad: sparse.csr_matrix  # faces x nodes, difference quotients with the zero value on boundary faces
    measure: np.ndarray  # weight of each face in the p = 2 form (1 interior, 1/2 boundary)
    cells: sparse.csr_matrix | None  # cells x faces incidence (2-D only)


def _local_ops(mesh) -> _LocalOps:
    """Face difference operator of the cell-centred scheme.

    The Dirichlet value sits on the boundary face, half a cell away from the
    last node, so a boundary face carries the quotient ``-+2 u / h``.
    """
    cached = mesh.__dict__.get("_local_ops")
    if cached is not None:
        return cached
    M, dim, h = mesh.n_nodes, mesh.dim, mesh.h
    rows, cols, vals, bnd = [], [], [], []
    nfaces = 0
    # face ids seen from each node, per axis and direction (needed for 2-D cells)
    plus = np.full((M, dim), -1, dtype=np.int64)
    minus = np.full((M, dim), -1, dtype=np.int64)
    node_ids = np.arange(M)
    for k in range(dim):
        e = np.zeros(dim, dtype=np.int64)
        e[k] = 1
        up = mesh.lookup(mesh.index + e)
        down = mesh.lookup(mesh.index - e)
        # every node owns the face on its + side (interior or boundary)
        fid = nfaces + node_ids
        nfaces += M
        plus[:, k] = fid
        has_up = up >= 0
        minus[up[has_up], k] = fid[has_up]
        rows += [fid, fid[has_up]]
        cols += [node_ids, up[has_up]]
        vals += [np.where(has_up, -1.0 / h, -2.0 / h), np.full(int(has_up.sum()), 1.0 / h)]
        bnd.append(~has_up)
        # boundary faces on the - side of nodes without a lower neighbour
        lone = node_ids[down < 0]
        fid2 = nfaces + np.arange(len(lone))
        nfaces += len(lone)
        minus[lone, k] = fid2
        rows.append(fid2)
        cols.append(lone)
        vals.append(np.full(len(lone), 2.0 / h))
        bnd.append(np.ones(len(lone), dtype=bool))
    grad = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(nfaces, M))
    measure = np.where(np.concatenate(bnd), 0.5, 1.0)
    cells = None
    if dim >= 2:
        crow = np.concatenate([node_ids] * (2 * dim))
        ccol = np.concatenate([f for k in range(dim) for f in (plus[:, k], minus[:, k])])
        cells = sparse.csr_matrix((np.ones(len(crow)), (crow, ccol)), shape=(M, nfaces))
    ops = _LocalOps(grad, measure, cells)
    mesh.__dict__["_local_ops"] = ops
    return ops


def _local_parts(u, mesh):
    ops = _local_ops(mesh)
    D = ops.grad @ u
    if ops.cells is None:
        return ops, D, None
    q = 0.5 * (ops.cells @ (D * D))
    return ops, D, q


def local_energy(u, mesh) -> float:
    """``int |grad u|^p`` by finite differences, zero on the boundary faces.

    1-D: ``h * sum_f m_f |D_f u|^p`` over all faces, with ``m_f = 1/2`` on the
    two boundary half cells.  2-D: every cell gets ``|grad u|^2`` as half the
    sum of its four squared face differences, and the energy is
    ``h^2 sum_c |grad u|_c^p``.  At ``p = 2`` both reduce to the standard
    cell-centred five-point form.
    """
    ops, D, q = _local_parts(u, mesh)
    if q is None:
        return float(mesh.h * np.sum(ops.measure * np.abs(D) ** mesh.p))
    return float(mesh.cell_volume * np.sum(q ** (0.5 * mesh.p)))


def _local_face_weights(D, q, mesh, floor=0.0):
    """Weights ``omega_f`` with ``(1/p) d(local)/dD_f = h^N omega_f D_f`` (1-D: ``h^N = h``)."""
    p = mesh.p
    ops = _local_ops(mesh)
    if q is None:
        a = np.abs(D)
        if floor > 0:
            a = np.maximum(a, floor * max(a.max(), 1e-300))
        with np.errstate(divide="ignore"):
            w = np.where(a > 0, a ** (p - 2), 0.0)
        return ops.measure * w
    qq = q
    if floor > 0:
        qq = np.maximum(q, (floor**2) * max(q.max(), 1e-300))
    with np.errstate(divide="ignore"):
        cw = np.where(qq > 0, qq ** (0.5 * p - 1.0), 0.0)
    return 0.5 * (ops.cells.T @ cw)


def _local_gradient(u, mesh):
    """``(1/p) d(local)/du``, i.e. the sum-form gradient (no division by h^N)."""
    ops, D, q = _local_parts(u, mesh)
    w = _local_face_weights(D, q, mesh)
    return mesh.cell_volume * (ops.grad.T @ (w * D))


# -----------------------------------------------------------------------------------
# nonlocal part
# -----------------------------------------------------------------------------------
def _pairwise_sum(u, mesh, fn):
    """``sum_{i != j} K_ij fn(u_i - u_j)`` accumulated in fixed row blocks."""
    K = mesh.kernel_weights
    total = 0.0
    for a in range(0, len(u), _ROW_CHUNK):
        diff = u[a:a + _ROW_CHUNK, None] - u[None, :]
        total += float(np.sum(K[a:a + _ROW_CHUNK] * fn(diff)))
    return total


def nonlocal_energy(u, mesh) -> float:
    """Gagliardo seminorm ``[u]_{s,p}^p`` of the zero extension of ``u``.

    ``sum_{i != j} K_ij |u_i - u_j|^p + 2 h^N sum_i w_i |u_i|^p``; the second
    sum accounts for pairs with one point outside the domain.
    """
    u = np.asarray(u, dtype=float)
    p = mesh.p
    tail = 2.0 * mesh.cell_volume * float(np.sum(mesh.tail_weights * np.abs(u) ** p))
    if p == 2.0:
        inner = 2.0 * float(u @ (mesh.kernel_laplacian @ u))
    else:
        inner = _pairwise_sum(u, mesh, lambda t: np.abs(t) ** p)
    return inner + tail


def _nonlocal_gradient(u, mesh):
    """Sum-form ``(1/p) d(nonlocal)/du``."""
    p = mesh.p
    tail = 2.0 * mesh.cell_volume * mesh.tail_weights * F(u, p)
    if p == 2.0:
        return 2.0 * (mesh.kernel_laplacian @ u) + tail
    K = mesh.kernel_weights
    out = np.empty_like(u)
    for a in range(0, len(u), _ROW_CHUNK):
        diff = u[a:a + _ROW_CHUNK, None] - u[None, :]
        out[a:a + _ROW_CHUNK] = 2.0 * np.sum(K[a:a + _ROW_CHUNK] * F(diff, p), axis=1)
    return out + tail


# -----------------------------------------------------------------------------------
# potential terms and the full functional
# -----------------------------------------------------------------------------------
def hardy_energy(u, mesh) -> float:
    """``int |u|^p / |x|^(p theta)`` with cell-averaged weights."""
    a = np.abs(np.asarray(u, dtype=float)) ** mesh.p
    w = mesh.hardy_weights
    nz = a > 0
    return float(mesh.cell_volume * np.sum(w[nz] * a[nz]))


def positive_part_energy(u, mesh) -> float:
    """``int (u^+)^p``."""
    return float(mesh.cell_volume * np.sum(np.maximum(u, 0.0) ** mesh.p))


@dataclass
class EnergyBreakdown:
    local: float
    nonlocal_: float
    hardy: float
    positive: float
    total: float


def energy_breakdown(u, d, mesh, params) -> EnergyBreakdown:
    u = np.asarray(u, dtype=float)
    loc = local_energy(u, mesh) if params.a_loc else 0.0
    nl = nonlocal_energy(u, mesh) if params.a_nl else 0.0
    hd = hardy_energy(u, mesh) if params.mu else 0.0
    pos = positive_part_energy(u, mesh) if d else 0.0
    total = params.a_loc * loc + params.a_nl * nl - params.mu * hd - d * pos
    return EnergyBreakdown(loc, nl, hd, pos, total)


def j_d(u, d, mesh, params) -> float:
    """The functional ``J_d(u)``; ``J_0`` is the eigenvalue energy."""
    return energy_breakdown(u, d, mesh, params).total


def grad_j_d(u, d, mesh, params):
    """Gradient density ``(1/p) dJ_d/du / h^N``."""
    u = np.asarray(u, dtype=float)
    p = mesh.p
    g = np.zeros_like(u)
    if params.a_loc:
        g += params.a_loc * _local_gradient(u, mesh)
    if params.a_nl:
        g += params.a_nl * _nonlocal_gradient(u, mesh)
    g /= mesh.cell_volume
    if params.mu:
        nz = u != 0
        g[nz] -= params.mu * mesh.hardy_weights[nz] * F(u[nz], p)
    if d:
        g -= d * np.maximum(u, 0.0) ** (p - 1)
    return g


def rayleigh(u, mesh, params) -> float:
    """``J_0(u) / ||u||_p^p``."""
    return j_d(u, 0.0, mesh, params) / lp_norm(u, mesh) ** mesh.p


# -----------------------------------------------------------------------------------
# elementary inequalities used by the theory
# -----------------------------------------------------------------------------------
def picone_terms(u, v, p):
    """Matrix ``L[i, j] = |u_i-u_j|^p - F(v_i-v_j) (u_i^p/v_i^(p-1) - u_j^p/v_j^(p-1))``.

    Needs ``u >= 0`` and ``v > 0``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u < 0) or np.any(v <= 0):
        raise ValueError("Picone's identity needs u >= 0 and v > 0")
    ratio = u**p / v ** (p - 1)
    return np.abs(u[:, None] - u[None, :]) ** p - F(v[:, None] - v[None, :], p) * (
        ratio[:, None] - ratio[None, :])


def check_discrete_picone(u, v, mesh=None, p=None) -> float:
    """Smallest Picone term over all node pairs (nonnegative in exact arithmetic)."""
    if p is None:
        p = mesh.p
    return float(picone_terms(u, v, p).min())


def sigma_path_energy_check(u, v, t_grid, mesh):
    """Slack of ``[sigma_t]^p <= (1-t)[v]^p + t [u]^p`` along ``sigma_t = ((1-t) v^p + t u^p)^(1/p)``.

    ``u`` and ``v`` must be nonnegative.  Returns an array of
    ``(1-t)[v]^p + t[u]^p - [sigma_t]^p`` over ``t_grid``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(u < 0) or np.any(v < 0):
        raise ValueError("sigma_t needs nonnegative fields")
    p = mesh.p
    eu, ev = nonlocal_energy(u, mesh), nonlocal_energy(v, mesh)
    out = []
    for t in np.asarray(t_grid, dtype=float):
        sig = ((1 - t) * v**p + t * u**p) ** (1.0 / p)
        out.append((1 - t) * ev + t * eu - nonlocal_energy(sig, mesh))
    return np.asarray(out)


def splitting_gap(u, mesh) -> float:
    """``[u]^p - [u^+]^p - [u^-]^p``, which is never negative."""
    u = np.asarray(u, dtype=float)
    return nonlocal_energy(u, mesh) - nonlocal_energy(np.maximum(u, 0), mesh) - nonlocal_energy(
        np.maximum(-u, 0), mesh)


def path_lemma_gap(U, V, t, p):
    """``g(1) - g(t)`` for ``g(t) = |U - tV|^p + F(U - V) V |t|^p``; nonnegative when ``UV <= 0``."""
    U, V, t = (np.asarray(a, dtype=float) for a in (U, V, t))

    def g(tt):
        return np.abs(U - tt * V) ** p + F(U - V, p) * V * np.abs(tt) ** p

    return g(1.0) - g(t)
