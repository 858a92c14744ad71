"""Shared numerics for descent on the unit L^p sphere.

The metric used for steepest descent is a lagged, p-weighted version of the
(positive part of the) operator itself: a Kacanov-type linearisation
``P(u)`` with ``P(u) u = (1/p) d(local + nonlocal)/du`` up to small floors.
At ``p = 2`` it is the fixed matrix of the quadratic form, so a unit step
of the projected gradient is exactly an inverse power iteration.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg

from . import energy


class Preconditioner:
    """Cholesky factors of ``P(u)`` (sum form, i.e. not divided by ``h^N``)."""

    def __init__(self, mesh, params, floor: float = 1e-2, adaptive: bool | None = None):
        self.mesh = mesh
        self.params = params
        self.floor = floor
        self.adaptive = (mesh.p != 2.0) if adaptive is None else adaptive
        self._fixed = None
        self.shift = 0.0
        self.n_factorizations = 0

    def matrix(self, u=None) -> np.ndarray:
        mesh, params = self.mesh, self.params
        p, hN = mesh.p, mesh.cell_volume
        M = mesh.n_nodes
        P = np.zeros((M, M))
        weighted = u is not None and p != 2.0
        if params.a_loc:
            ops = energy._local_ops(mesh)
            if weighted:
                _, D, q = energy._local_parts(u, mesh)
                w = energy._local_face_weights(D, q, mesh, floor=self.floor)
            else:
                w = ops.measure
            G = ops.grad
            P += params.a_loc * hN * (G.T @ (G.multiply(w[:, None]))).toarray()
        if params.a_nl:
            K = mesh.kernel_weights
            tails = mesh.tail_weights.copy()
            if weighted:
                scale = max(np.abs(u).max(), 1e-300)
                delta = self.floor * scale
                W = K * np.maximum(np.abs(u[:, None] - u[None, :]), delta) ** (p - 2)
                tails = tails * np.maximum(np.abs(u), delta) ** (p - 2)
                A = -W
                A[np.diag_indices_from(A)] += W.sum(axis=1)
            else:
                A = mesh.kernel_laplacian
            P += params.a_nl * (2.0 * A)
            P[np.diag_indices_from(P)] += params.a_nl * 2.0 * hN * tails
        return P

    def factor(self, u=None):
        if not self.adaptive:
            if self._fixed is None:
                self._fixed = linalg.cho_factor(self.matrix(None), lower=True, check_finite=False)
                self.n_factorizations += 1
            return self._fixed
        self.n_factorizations += 1
        return linalg.cho_factor(self.matrix(u), lower=True, check_finite=False)

    def set_shift(self, sigma: float) -> bool:
        """Use ``P - sigma h^N I`` (fixed operator only); returns False if that is not SPD.

        With ``sigma`` just below the smallest eigenvalue this turns the unit
        step into a shifted inverse iteration.
        """
        if self.adaptive or sigma <= 0:
            return False
        A = self.matrix(None)
        A[np.diag_indices_from(A)] -= sigma * self.mesh.cell_volume
        try:
            cf = linalg.cho_factor(A, lower=True, check_finite=False)
        except linalg.LinAlgError:
            return False
        self._fixed = cf
        self.shift = sigma
        self.n_factorizations += 1
        return True

    def solver(self, u=None):
        """Return ``v -> h^N P(u)^{-1} v`` (maps gradient densities to fields)."""
        cf = self.factor(u)
        hN = self.mesh.cell_volume

        def solve(v):
            return hN * linalg.cho_solve(cf, v, check_finite=False)

        return solve


def tangent_direction(g, Fu, solve):
    """Preconditioned Riemannian gradient on the sphere.

    ``r = P^{-1} g - alpha P^{-1} F(u)`` with ``alpha`` chosen so that
    ``<F(u), r> = 0``, the tangency condition for ``||u||_p = 1``.  Also
    returns ``y = P^{-1} F(u)``.
    """
    z = solve(g)
    y = solve(Fu)
    alpha = float(Fu @ z) / float(Fu @ y)
    return z - alpha * y, y


def retract(u, mesh):
    return energy.normalize(u, mesh)
