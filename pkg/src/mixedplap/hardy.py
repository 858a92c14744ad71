"""Operator parameters, Hardy constants and the admissible range of ``mu``.

The weighted inequality behind the whole package reads, for ``s <= theta <= 1``,

    int |u|^p / |x|^(p theta)
        <= (theta - s) / ((1 - s) C_H) * int |grad u|^p
         + (1 - theta) / ((1 - s) C_{N,p,s}) * [u]_{s,p}^p

with the classical constant ``C_H = ((N - p) / p)**p`` and the sharp
fractional constant ``C_{N,p,s}`` computed by :func:`fractional_hardy_constant`.
Consequently the energy stays coercive for ``0 <= mu < mu_max(theta)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import special

from . import energy

__all__ = [
    "OperatorParams",
    "HardyConstants",
    "InadmissibleError",
    "classical_hardy_constant",
    "psi_kernel",
    "fractional_hardy_constant",
    "hardy_constants",
    "mu_max",
    "admissibility",
    "validate_params",
    "check_interpolated_hardy",
]


class InadmissibleError(ValueError):
    """``mu`` (or the exponent set) lies outside the range where the energy is coercive."""


@dataclass(frozen=True)
class OperatorParams:
    """Exponents and coefficients of the mixed operator.

    ``a_loc`` and ``a_nl`` switch the local and the nonlocal part on or off
    (they are the weights in front of the two seminorms).
    """

    N: int = 1
    p: float = 2.0
    s: float = 0.5
    theta: float = 0.5
    mu: float = 0.0
    a_loc: float = 1.0
    a_nl: float = 1.0

    def __post_init__(self):
        if self.N not in (1, 2):
            raise ValueError("only N = 1 and N = 2 are implemented")
        if not self.p > 1:
            raise ValueError("p must exceed 1")
        if not 0 < self.s < 1:
            raise ValueError("s must lie in (0, 1)")
        if not self.s <= self.theta <= 1:
            raise ValueError("theta must lie in [s, 1]")
        if self.mu < 0:
            raise InadmissibleError("mu must be nonnegative")
        if self.a_loc < 0 or self.a_nl < 0 or self.a_loc + self.a_nl == 0:
            raise ValueError("a_loc and a_nl must be nonnegative and not both zero")

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class HardyConstants:
    C_H: float
    C_Nps: float
    mu_max: float
    xi: float
    regime: str = "classical"


def classical_hardy_constant(N: int, p: float) -> float:
    """``|(N - p) / p|**p``; the constant degenerates to zero at ``p = N``."""
    return abs((N - p) / p) ** p


# -----------------------------------------------------------------------------------
# the kernel Psi and the sharp fractional constant
# -----------------------------------------------------------------------------------
def _sphere_area(k: int) -> float:
    """Surface measure of the unit sphere S^k in R^(k+1)."""
    return 2.0 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


def _psi_eps(eps, N, sigma):
    """Psi at ``r = 1 - eps``, written in ``eps`` so that r -> 1 stays accurate."""
    eps = np.asarray(eps, dtype=float)
    r = 1.0 - eps
    if N == 1:
        return eps ** (-1.0 - sigma) + (2.0 - eps) ** (-1.0 - sigma)
    a = 0.5 * (N + sigma)
    out = np.empty_like(eps)
    t, wt = np.polynomial.legendre.leggauss(20)
    for n, (e, rr) in enumerate(zip(eps.ravel(), r.ravel())):
        # graded partition of [0, pi]: the integrand peaks at omega = 0 with width ~ e
        w0 = max(min(e, 1.0), 1e-300)
        edges = [0.0]
        step = w0
        while step < math.pi:
            edges.append(step)
            step *= 2.0
        edges.append(math.pi)
        edges = np.asarray(edges)
        lo, hi = edges[:-1], edges[1:]
        om = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * t[None, :]
        base = e * e + 4.0 * rr * np.sin(0.5 * om) ** 2
        f = base ** (-a)
        if N > 2:
            f = f * np.sin(om) ** (N - 2)
        out.ravel()[n] = float(np.sum(0.5 * (hi - lo)[:, None] * f * wt[None, :]))
    return _sphere_area(N - 2) * out


def psi_kernel(r, N: int, p: float, s: float):
    """The angular kernel of the sharp fractional Hardy constant.

    For ``N = 1`` this is ``(1 - r)**(-1 - ps) + (1 + r)**(-1 - ps)``; for
    ``N >= 2`` it is the integral over the sphere
    ``|S^(N-2)| int_{-1}^{1} (1 - t^2)^((N-3)/2) (1 - 2 r t + r^2)^(-(N+ps)/2) dt``.
    """
    r = np.asarray(r, dtype=float)
    if np.any((r < 0) | (r >= 1)):
        raise ValueError("psi_kernel needs 0 <= r < 1")
    return _psi_eps(1.0 - r, N, p * s)


def _outer_integrand(x, N, p, s, near_one):
    """Integrand of the outer r-integral; ``x`` is ``1 - r`` when ``near_one`` else ``r``."""
    sigma = p * s
    q = (N - sigma) / p
    if near_one:
        eps = x
        logr = np.log1p(-eps)
        r_pow = np.exp((sigma - 1.0) * logr)
        gap = np.abs(np.expm1(q * logr)) ** p
        return r_pow * gap * _psi_eps(eps, N, sigma)
    r = x
    gap = np.abs(1.0 - r**q) ** p
    return r ** (sigma - 1.0) * gap * _psi_eps(1.0 - r, N, sigma)


def fractional_hardy_constant(N: int, p: float, s: float) -> float:
    """Sharp constant ``C_{N,p,s} = 2 int_0^1 r^(ps-1) |1 - r^((N-ps)/p)|^p Psi(r) dr``.

    (0, 1) is split into dyadic pieces accumulating at both ends, each piece
    integrated with Gauss-Legendre; the neglected end pieces are below
    ``1e-15`` relative.  Returns 0 when ``ps = N``.
    """
    sigma = p * s
    if abs(N - sigma) < 1e-14:
        return 0.0
    t, wt = np.polynomial.legendre.leggauss(16)

    def pieces(edges, near_one):
        lo, hi = edges[:-1], edges[1:]
        x = 0.5 * (lo + hi)[:, None] + 0.5 * (hi - lo)[:, None] * t[None, :]
        f = _outer_integrand(x.ravel(), N, p, s, near_one).reshape(x.shape)
        return float(np.sum(0.5 * (hi - lo)[:, None] * f * wt[None, :]))

    # near r = 0 the integrand behaves like r^(ps-1) (or r^(N-1) when ps > N),
    # near r = 1 like (1-r)^(p-1-ps); the innermost pieces are replaced by
    # their leading power law
    a0 = min(sigma, N)
    a1 = p - sigma
    k0 = int(min(55.0 / a0, 240)) + 4
    k1 = int(min(55.0 / a1, 240)) + 4
    left = 0.5 ** np.arange(k0, -1, -1)[:-1]
    left = np.append(left, 0.5)
    right = 0.5 ** np.arange(k1, 0, -1)
    right = np.append(right, 0.5)
    total = pieces(left, False) + pieces(right, True)
    r0, e0 = left[0], right[0]
    total += _outer_integrand(np.array([r0]), N, p, s, False)[0] * r0 / a0
    total += _outer_integrand(np.array([e0]), N, p, s, True)[0] * e0 / a1
    return 2.0 * total


# -----------------------------------------------------------------------------------
# admissible range
# -----------------------------------------------------------------------------------
def mu_max(theta: float, N: int, p: float, s: float, C_H=None, C_Nps=None) -> float:
    """Upper end of the admissible ``mu`` range for the weight ``|x|**(-p theta)``."""
    if not s <= theta <= 1:
        raise ValueError("theta must lie in [s, 1]")
    if C_H is None:
        C_H = classical_hardy_constant(N, p)
    if C_Nps is None:
        C_Nps = fractional_hardy_constant(N, p, s)
    if theta == s:
        return float(C_Nps)
    if theta == 1:
        return float(C_H)
    return float(min(C_H * (1 - s) / (theta - s), C_Nps * (1 - s) / (1 - theta)))


def admissibility(params: OperatorParams, origin_status: str = "interior") -> str:
    """Decide which Hardy regime applies, raising :class:`InadmissibleError` if none does.

    ``"classical"``: the origin may sit inside the domain; needs ``p < N``.
    ``"punctured"``: the origin is not an interior point of the domain, so
    the inequalities hold on functions vanishing near it; needs ``p != N``
    and ``ps != N``.
    """
    N, p, s = params.N, params.p, params.s
    if origin_status == "interior":
        if p < N:
            return "classical"
        raise InadmissibleError(
            f"mu > 0 with the origin inside the domain needs p < N (got p={p}, N={N})")
    if abs(p - N) < 1e-14 or abs(p * s - N) < 1e-14:
        raise InadmissibleError("the Hardy constants vanish when p = N or p s = N")
    return "punctured"


def hardy_constants(params: OperatorParams, origin_status: str = "interior") -> HardyConstants:
    """Constants for ``params``; the regime is only checked when ``mu > 0``."""
    N, p, s, theta = params.N, params.p, params.s, params.theta
    regime = "classical" if (p < N or origin_status == "interior") else "punctured"
    if params.mu > 0:
        regime = admissibility(params, origin_status)
    C_H = classical_hardy_constant(N, p)
    C_Nps = fractional_hardy_constant(N, p, s)
    xi = (theta - s) / (1 - s)
    return HardyConstants(C_H, C_Nps, mu_max(theta, N, p, s, C_H, C_Nps), xi, regime)


def validate_params(params: OperatorParams, mesh=None) -> HardyConstants:
    """Check ``mu < mu_max`` (and the regime) before any solve."""
    status = "interior" if mesh is None else mesh.origin_status
    if mesh is not None:
        if mesh.dim != params.N:
            raise ValueError(f"mesh dimension {mesh.dim} differs from N={params.N}")
        if (mesh.p, mesh.s, mesh.theta) != (params.p, params.s, params.theta):
            raise ValueError("mesh was built for different exponents")
    consts = hardy_constants(params, status)
    if params.mu > 0:
        if not params.mu < consts.mu_max:
            raise InadmissibleError(
                f"mu={params.mu:.6g} is not below mu_max={consts.mu_max:.6g} for theta={params.theta}")
        if mesh is not None and not np.all(np.isfinite(mesh.hardy_weights)):
            raise InadmissibleError("the Hardy weight is not integrable on a cell touching the origin")
    return consts


@dataclass
class HardyCheck:
    lhs: float
    rhs: float
    slack: float
    holds: bool


def check_interpolated_hardy(u, mesh, params: OperatorParams, constants: HardyConstants | None = None,
                             tol_rel: float = 1e-2) -> HardyCheck:
    """Evaluate both sides of the interpolated Hardy inequality for a discrete field.

    ``slack = (rhs - lhs) / rhs``; the check holds when ``slack >= -tol_rel``.
    """
    if constants is None:
        constants = hardy_constants(params, mesh.origin_status)
    s, theta = params.s, params.theta
    lhs = energy.hardy_energy(u, mesh)
    rhs = 0.0
    if theta > s:
        rhs += (theta - s) / ((1 - s) * constants.C_H) * energy.local_energy(u, mesh)
    if theta < 1:
        rhs += (1 - theta) / ((1 - s) * constants.C_Nps) * energy.nonlocal_energy(u, mesh)
    slack = (rhs - lhs) / rhs if rhs > 0 else (0.0 if lhs == 0 else -np.inf)
    return HardyCheck(float(lhs), float(rhs), float(slack), bool(slack >= -tol_rel))
