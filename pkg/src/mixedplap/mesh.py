"""Uniform cell lattices on simple shapes, plus the weights the energies need.

A shape is described by a :class:`ShapeSpec`.  :func:`build_mesh` lays a
uniform lattice of square cells of side ``h`` over it and keeps every cell
that lies entirely inside the closed shape.  The nodes are the cell
midpoints and a discrete field is simply a 1-D array holding one value per
node.  Fields are understood to vanish outside the kept cells.

Besides the node coordinates a :class:`Mesh` carries three weight arrays:

``kernel_weights``
    ``K[i, j] = h**(2N) / |x_i - x_j|**(N + p s)`` with a zero diagonal (a
    midpoint rule for the double integral of the Gagliardo seminorm).
``tail_weights``
    ``w[i] = integral over R^N minus Omega_h of |x_i - y|**(-N - p s) dy``,
    where ``Omega_h`` is the union of kept cells.  In 1-D this is a closed
    form; in 2-D it is assembled from exact integrals over lattice cells.
``hardy_weights``
    cell averages of ``|y|**(-p theta)``.  They are finite whenever the cell
    stays away from the origin or ``p theta < N``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, ndimage, special

__all__ = [
    "ShapeSpec",
    "Mesh",
    "build_mesh",
    "restrict_mesh",
    "match_volume",
    "tail_weight_at",
    "components",
]

_KINDS = ("interval", "rectangle", "disk", "two_disks")
_GEOM_TOL = 1e-12


def _as_tuple(x):
    if x is None:
        return None
    if np.isscalar(x):
        return (float(x),)
    return tuple(float(v) for v in x)


@dataclass(frozen=True)
class ShapeSpec:
    """Geometry plus lattice resolution.

    ``resolution`` is the number of cells across the shape: across the
    interval or the longest rectangle side, or across one disk diameter.  An
    explicit ``h`` overrides it, which is how nested shapes are put on a
    common lattice.  ``anchor`` is a lattice vertex; by default it is the
    left end of an interval and the origin otherwise.

    A ``disk`` (or ``two_disks``) with one-dimensional centers is an interval
    (or a union of two intervals).
    """

    kind: str
    resolution: int = 64
    bounds: tuple | None = None
    center: tuple | None = None
    center2: tuple | None = None
    radius: float | None = None
    h: float | None = None
    anchor: tuple | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown shape kind {self.kind!r}; expected one of {_KINDS}")
        object.__setattr__(self, "bounds", _as_tuple(self.bounds))
        object.__setattr__(self, "center", _as_tuple(self.center))
        object.__setattr__(self, "center2", _as_tuple(self.center2))
        object.__setattr__(self, "anchor", _as_tuple(self.anchor))
        if self.h is None and int(self.resolution) < 1:
            raise ValueError("resolution must be a positive integer")
        if self.h is not None and not self.h > 0:
            raise ValueError("cell size h must be positive")
        if self.kind == "interval":
            if self.bounds is None or len(self.bounds) != 2 or not self.bounds[0] < self.bounds[1]:
                raise ValueError("interval needs bounds=(a, b) with a < b")
        elif self.kind == "rectangle":
            b = self.bounds
            if b is None or len(b) != 4 or not (b[0] < b[1] and b[2] < b[3]):
                raise ValueError("rectangle needs bounds=(x0, x1, y0, y1) with x0 < x1, y0 < y1")
        else:
            if self.center is None or self.radius is None or not self.radius > 0:
                raise ValueError(f"{self.kind} needs a center and a positive radius")
            if len(self.center) not in (1, 2):
                raise ValueError("only 1-D and 2-D shapes are supported")
            if self.kind == "two_disks":
                if self.center2 is None or len(self.center2) != len(self.center):
                    raise ValueError("two_disks needs center2 of the same dimension as center")
        if self.anchor is not None and len(self.anchor) != self.dim:
            raise ValueError("anchor dimension does not match the shape")

    # -- convenience constructors -------------------------------------------------
    @classmethod
    def interval(cls, a: float, b: float, resolution: int = 64, **kw) -> "ShapeSpec":
        return cls("interval", resolution, bounds=(a, b), **kw)

    @classmethod
    def rectangle(cls, x0, x1, y0, y1, resolution: int = 48, **kw) -> "ShapeSpec":
        return cls("rectangle", resolution, bounds=(x0, x1, y0, y1), **kw)

    @classmethod
    def disk(cls, center, radius: float, resolution: int = 48, **kw) -> "ShapeSpec":
        return cls("disk", resolution, center=center, radius=radius, **kw)

    @classmethod
    def two_disks(cls, center, center2, radius: float, resolution: int = 48, **kw) -> "ShapeSpec":
        return cls("two_disks", resolution, center=center, center2=center2, radius=radius, **kw)

    # -- derived geometry ------------------------------------------------------------
    @property
    def dim(self) -> int:
        if self.kind == "interval":
            return 1
        if self.kind == "rectangle":
            return 2
        return len(self.center)

    @property
    def cell_size(self) -> float:
        if self.h is not None:
            return float(self.h)
        if self.kind == "interval":
            extent = self.bounds[1] - self.bounds[0]
        elif self.kind == "rectangle":
            extent = max(self.bounds[1] - self.bounds[0], self.bounds[3] - self.bounds[2])
        else:
            extent = 2.0 * self.radius
        return extent / int(self.resolution)

    @property
    def lattice_anchor(self) -> np.ndarray:
        if self.anchor is not None:
            return np.asarray(self.anchor, dtype=float)
        if self.kind == "interval":
            return np.array([self.bounds[0]])
        return np.zeros(self.dim)

    def pieces(self) -> list[tuple[str, np.ndarray]]:
        """Convex pieces as ``("box", lo, hi)`` or ``("ball", center, radius)``."""
        if self.kind == "interval":
            return [("box", np.array([self.bounds[0]]), np.array([self.bounds[1]]))]
        if self.kind == "rectangle":
            b = self.bounds
            return [("box", np.array([b[0], b[2]]), np.array([b[1], b[3]]))]
        centers = [self.center] if self.kind == "disk" else [self.center, self.center2]
        out = []
        for c in centers:
            c = np.asarray(c, dtype=float)
            if self.dim == 1:
                out.append(("box", c - self.radius, c + self.radius))
            else:
                out.append(("ball", c, float(self.radius)))
        return out

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        los, his = [], []
        for kind, a, b in self.pieces():
            if kind == "box":
                los.append(a)
                his.append(b)
            else:
                los.append(a - b)
                his.append(a + b)
        return np.min(los, axis=0), np.max(his, axis=0)

    @property
    def area(self) -> float:
        """Exact measure of the continuous shape (overlapping disks counted once)."""
        if self.kind in ("interval", "rectangle"):
            lo, hi = self.pieces()[0][1:]
            return float(np.prod(hi - lo))
        if self.dim == 1:
            lo, hi = self.bounding_box()
            if self.kind == "disk":
                return 2.0 * self.radius
            gap = abs(self.center[0] - self.center2[0]) - 2 * self.radius
            return 4.0 * self.radius + min(gap, 0.0)
        single = math.pi * self.radius**2
        if self.kind == "disk":
            return single
        d = float(np.linalg.norm(np.subtract(self.center, self.center2)))
        r = self.radius
        if d >= 2 * r:
            return 2 * single
        lens = 2 * r**2 * math.acos(d / (2 * r)) - 0.5 * d * math.sqrt(4 * r**2 - d**2)
        return 2 * single - lens

    def contains(self, points) -> np.ndarray:
        """Closed-set membership for an array of points of shape (..., dim)."""
        pts = np.asarray(points, dtype=float)
        inside = np.zeros(pts.shape[:-1], dtype=bool)
        for piece in self.pieces():
            inside |= _in_piece(pts, piece, 0.0)
        return inside

    def translated(self, shift) -> "ShapeSpec":
        shift = np.asarray(_as_tuple(shift))
        kw = {}
        if self.bounds is not None:
            b = np.asarray(self.bounds)
            kw["bounds"] = tuple(b + np.repeat(shift, 2))
        if self.center is not None:
            kw["center"] = tuple(np.asarray(self.center) + shift)
        if self.center2 is not None:
            kw["center2"] = tuple(np.asarray(self.center2) + shift)
        if self.kind == "interval" and self.anchor is None:
            kw["anchor"] = tuple(self.lattice_anchor + shift)
        return dataclasses.replace(self, **kw)

    @property
    def centroid(self) -> np.ndarray:
        lo, hi = self.bounding_box()
        if self.kind in ("interval", "rectangle", "disk"):
            return 0.5 * (lo + hi)
        return 0.5 * (np.asarray(self.center) + np.asarray(self.center2))


def _in_piece(pts, piece, slack):
    kind, a, b = piece
    if kind == "box":
        return np.all((pts >= a - slack) & (pts <= b + slack), axis=-1)
    return np.sum((pts - a) ** 2, axis=-1) <= (b + slack) ** 2


def _cell_corners(lo, h, dim):
    offsets = np.array(np.meshgrid(*([[0.0, 1.0]] * dim), indexing="ij")).reshape(dim, -1).T
    return lo[:, None, :] + h * offsets[None, :, :]


# -----------------------------------------------------------------------------------
# lattice integrals of |y|**(-power)
# -----------------------------------------------------------------------------------
def _exterior_quadrant(X, Y, sigma):
    """Integral of r**(-2-sigma) over {x > X, y > Y}, for X, Y >= 0 not both zero."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    a = 0.5 * (sigma + 1.0)
    full = special.beta(a, 0.5)
    rr = X**2 + Y**2
    with np.errstate(divide="ignore", invalid="ignore"):
        s2 = np.where(rr > 0, Y**2 / rr, 0.0)
        c2 = np.where(rr > 0, X**2 / rr, 0.0)
        ty = np.where(Y > 0, Y ** (-sigma) * special.betainc(a, 0.5, s2), 0.0)
        tx = np.where(X > 0, X ** (-sigma) * special.betainc(a, 0.5, c2), 0.0)
    return full * (tx + ty) / (2.0 * sigma)


def _gauss_cell_integral(cx, cy, half, power, order=8):
    """Tensor Gauss-Legendre integral of r**(-power) over squares of half-width ``half``."""
    t, wt = np.polynomial.legendre.leggauss(order)
    gx = cx[..., None, None] + half * t[:, None]
    gy = cy[..., None, None] + half * t[None, :]
    vals = (gx**2 + gy**2) ** (-0.5 * power)
    return half**2 * np.einsum("...ij,i,j->...", vals, wt, wt)


def _unit_cell_table(nx, ny, sigma):
    """I[a, b] = integral of r**(-2-sigma) over the unit cell centred at (a, b), a, b >= 0.

    The entry (0, 0) holds the integral over the complement of the unit cell.
    """
    a = np.arange(nx + 1, dtype=float)[:, None] * np.ones((1, ny + 1))
    b = np.ones((nx + 1, 1)) * np.arange(ny + 1, dtype=float)[None, :]
    table = np.empty_like(a)
    near = np.maximum(a, b) <= 8
    # near cells: inclusion-exclusion of exterior quadrants, folding cells that
    # straddle an axis into twice their half
    an, bn = a[near], b[near]
    x0 = np.where(an == 0, 0.0, an - 0.5)
    x1 = an + 0.5
    y0 = np.where(bn == 0, 0.0, bn - 0.5)
    y1 = bn + 0.5
    fac = np.where(an == 0, 2.0, 1.0) * np.where(bn == 0, 2.0, 1.0)
    with np.errstate(invalid="ignore"):
        val = (
            _exterior_quadrant(x0, y0, sigma)
            - _exterior_quadrant(x1, y0, sigma)
            - _exterior_quadrant(x0, y1, sigma)
            + _exterior_quadrant(x1, y1, sigma)
        )
    table[near] = fac * val
    far = ~near
    table[far] = _gauss_cell_integral(a[far], b[far], 0.5, 2.0 + sigma)
    outside = 4.0 * (
        _exterior_quadrant(0.5, 0.0, sigma)
        + _exterior_quadrant(0.0, 0.5, sigma)
        - _exterior_quadrant(0.5, 0.5, sigma)
    )
    table[0, 0] = outside
    return table


def _corner_rect_integral(A, B, power):
    """Integral of r**(-power) over [0, A] x [0, B] for power < 2."""
    if A <= 0 or B <= 0:
        return 0.0
    phi = math.atan2(B, A)
    e = 2.0 - power
    i1 = integrate.quad(lambda t: math.cos(t) ** (-e), 0.0, phi, epsabs=0, epsrel=1e-13)[0]
    i2 = integrate.quad(lambda t: math.sin(t) ** (-e), phi, 0.5 * math.pi, epsabs=0, epsrel=1e-13)[0]
    return (A**e * i1 + B**e * i2) / e


def _rect_integral_near_origin(x0, x1, y0, y1, power):
    total = 0.0
    for u0, u1, su in _fold(x0, x1):
        for v0, v1, sv in _fold(y0, y1):
            total += (
                _corner_rect_integral(u1, v1, power)
                - _corner_rect_integral(u0, v1, power)
                - _corner_rect_integral(u1, v0, power)
                + _corner_rect_integral(u0, v0, power)
            )
    return total


def _fold(lo, hi):
    """Split [lo, hi] at zero and reflect into pieces [u0, u1] with 0 <= u0 < u1."""
    out = []
    if hi > 0:
        out.append((max(lo, 0.0), hi, 1))
    if lo < 0:
        out.append((max(-hi, 0.0), -lo, -1))
    return out


# -----------------------------------------------------------------------------------
# the mesh
# -----------------------------------------------------------------------------------
class Mesh:
    """Lattice discretisation of a shape for a given exponent set.

    Most users obtain one from :func:`build_mesh`.  The attributes are plain
    numpy arrays and are not meant to be modified in place.
    """

    def __init__(self, spec, p, s, theta, h, index, anchor, kernel_weights, tail_weights,
                 hardy_weights, origin_status):
        self.spec = spec
        self.p = float(p)
        self.s = float(s)
        self.theta = float(theta)
        self.h = float(h)
        self.index = np.asarray(index, dtype=np.int64)
        self.anchor = np.asarray(anchor, dtype=float)
        self.kernel_weights = kernel_weights
        self.tail_weights = tail_weights
        self.hardy_weights = hardy_weights
        self.origin_status = origin_status

    def __repr__(self):
        return (f"Mesh(kind={self.spec.kind!r}, dim={self.dim}, n_nodes={self.n_nodes}, "
                f"h={self.h:.4g}, origin={self.origin_status})")

    @property
    def dim(self) -> int:
        return self.index.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.index.shape[0]

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def volume(self) -> float:
        return self.n_nodes * self.cell_volume

    @cached_property
    def nodes(self) -> np.ndarray:
        return self.anchor + (self.index + 0.5) * self.h

    @property
    def sigma(self) -> float:
        return self.p * self.s

    @cached_property
    def _grid(self):
        lo = self.index.min(axis=0) - 2
        shape = tuple(self.index.max(axis=0) - lo + 3)
        grid = -np.ones(shape, dtype=np.int64)
        grid[tuple((self.index - lo).T)] = np.arange(self.n_nodes)
        return lo, grid

    def lookup(self, idx) -> np.ndarray:
        """Node numbers of lattice cells ``idx`` (shape (..., dim)); -1 when absent."""
        lo, grid = self._grid
        rel = np.asarray(idx) - lo
        ok = np.all((rel >= 0) & (rel < np.array(grid.shape)), axis=-1)
        out = -np.ones(rel.shape[:-1], dtype=np.int64)
        out[ok] = grid[tuple(rel[ok].T)]
        return out

    @cached_property
    def kernel_laplacian(self) -> np.ndarray:
        """``diag(K 1) - K``: the matrix of the pairwise part at p = 2."""
        K = self.kernel_weights
        L = -K.copy()
        L[np.diag_indices_from(L)] += K.sum(axis=1)
        return L

    def masked(self, field, fill=np.nan) -> np.ndarray:
        """Scatter a field into a dense lattice array (for plotting)."""
        lo = self.index.min(axis=0)
        shape = tuple(self.index.max(axis=0) - lo + 1)
        out = np.full(shape, fill, dtype=float)
        out[tuple((self.index - lo).T)] = field
        return out


def _lattice_cells(spec: ShapeSpec, h: float, anchor: np.ndarray) -> np.ndarray:
    lo, hi = spec.bounding_box()
    kmin = np.floor((lo - anchor) / h).astype(int) - 1
    kmax = np.ceil((hi - anchor) / h).astype(int) + 1
    axes = [np.arange(a, b + 1) for a, b in zip(kmin, kmax)]
    idx = np.array(np.meshgrid(*axes, indexing="ij")).reshape(spec.dim, -1).T
    corners = _cell_corners(anchor + idx * h, h, spec.dim)
    keep = np.zeros(len(idx), dtype=bool)
    slack = _GEOM_TOL * max(h, 1.0)
    for piece in spec.pieces():
        keep |= np.all(_in_piece(corners, piece, slack), axis=1)
    return idx[keep]


def _origin_status(index, anchor, h, lookup) -> str:
    o = -anchor / h
    choices = []
    for oc in o:
        r = round(oc)
        if abs(oc - r) < 1e-9:
            choices.append([r - 1, r])
        else:
            choices.append([math.floor(oc)])
    cells = np.array(np.meshgrid(*choices, indexing="ij")).reshape(len(o), -1).T
    present = lookup(cells) >= 0
    if present.all():
        return "interior"
    if present.any():
        return "boundary"
    return "exterior"


def _kernel(index, h, sigma):
    dim = index.shape[1]
    diff = (index[:, None, :] - index[None, :, :]).astype(float)
    dist2 = np.einsum("ijk,ijk->ij", diff, diff)
    np.fill_diagonal(dist2, 1.0)
    K = h ** (dim - sigma) * dist2 ** (-0.5 * (dim + sigma))
    np.fill_diagonal(K, 0.0)
    return K


def _tails_1d(index, anchor, h, sigma):
    x = anchor[0] + (index[:, 0] + 0.5) * h
    k = np.sort(index[:, 0])
    breaks = np.nonzero(np.diff(k) > 1)[0]
    starts = np.concatenate([[k[0]], k[breaks + 1]])
    ends = np.concatenate([k[breaks], [k[-1]]]) + 1
    L = anchor[0] + starts * h
    R = anchor[0] + ends * h
    w = (x - L[0]) ** (-sigma) / sigma + (R[-1] - x) ** (-sigma) / sigma
    for A, B in zip(R[:-1], L[1:]):  # bounded gaps [A, B]
        left = x <= A
        w += np.where(
            left,
            (np.abs(A - x) ** (-sigma) - np.abs(B - x) ** (-sigma)) / sigma,
            (np.abs(x - B) ** (-sigma) - np.abs(x - A) ** (-sigma)) / sigma,
        )
    return w


def _tails_2d(index, h, sigma, chunk=512):
    span = index.max(axis=0) - index.min(axis=0)
    table = _unit_cell_table(int(span[0]), int(span[1]), sigma)
    M = len(index)
    covered = np.empty(M)
    for start in range(0, M, chunk):
        blk = index[start:start + chunk]
        da = np.abs(blk[:, None, 0] - index[None, :, 0])
        db = np.abs(blk[:, None, 1] - index[None, :, 1])
        vals = table[da, db]
        rows = np.arange(len(blk))
        vals[rows, start + rows] = 0.0
        covered[start:start + chunk] = vals.sum(axis=1)
    return h ** (-sigma) * (table[0, 0] - covered)


def _hardy_1d(index, anchor, h, power):
    left = anchor[0] + index[:, 0] * h
    right = left + h
    out = np.empty(len(index))
    for n, (l, r) in enumerate(zip(left, right)):
        if abs(l) < 1e-12 * h:
            l = 0.0
        if abs(r) < 1e-12 * h:
            r = 0.0
        if power == 0:
            out[n] = 1.0
            continue
        if l < 0 < r:
            if power >= 1:
                out[n] = np.inf
            else:
                out[n] = ((-l) ** (1 - power) + r ** (1 - power)) / ((1 - power) * h)
            continue
        a, b = (l, r) if l >= 0 else (-r, -l)
        if a == 0 and power >= 1:
            out[n] = np.inf
        elif power == 1:
            out[n] = math.log(b / a) / h
        else:
            out[n] = (b ** (1 - power) - a ** (1 - power)) / ((1 - power) * h)
    return out


def _hardy_2d(index, anchor, h, power):
    if power == 0:
        return np.ones(len(index))
    lo = anchor + index * h
    centers = lo + 0.5 * h
    # distance from the origin to each cell
    gap = np.maximum(np.maximum(lo, -(lo + h)), 0.0)
    dist = np.hypot(gap[:, 0], gap[:, 1])
    out = _gauss_cell_integral(centers[:, 0], centers[:, 1], 0.5 * h, power, order=6) / h**2
    for n in np.nonzero(dist < 3 * h)[0]:
        if dist[n] < 1e-12 * h:
            if power >= 2:
                out[n] = np.inf
                continue
        elif power >= 2:
            out[n] = _gauss_cell_integral(np.array([centers[n, 0]]), np.array([centers[n, 1]]),
                                          0.5 * h, power, order=24)[0] / h**2
            continue
        x0, y0 = lo[n]
        out[n] = _rect_integral_near_origin(x0, x0 + h, y0, y0 + h, power) / h**2
    return out


def build_mesh(spec: ShapeSpec, params) -> Mesh:
    """Discretise ``spec`` for the exponents ``params.p``, ``params.s``, ``params.theta``.

    Raises ``ValueError`` for empty meshes and for lattices that put a node
    exactly at the origin.
    """
    h = spec.cell_size
    anchor = spec.lattice_anchor
    index = _lattice_cells(spec, h, anchor)
    if len(index) == 0:
        raise ValueError("no lattice cell fits inside the shape; increase the resolution")
    nodes = anchor + (index + 0.5) * h
    if np.any(np.all(np.abs(nodes) < 1e-12 * max(h, 1.0), axis=1)):
        raise ValueError("a mesh node coincides with the origin; shift the shape or the lattice")
    p, s, theta = float(params.p), float(params.s), float(params.theta)
    sigma = p * s
    if spec.dim == 1:
        tails = _tails_1d(index, anchor, h, sigma)
        hardy = _hardy_1d(index, anchor, h, p * theta)
    else:
        tails = _tails_2d(index, h, sigma)
        hardy = _hardy_2d(index, anchor, h, p * theta)
    mesh = Mesh(spec, p, s, theta, h, index, anchor, _kernel(index, h, sigma), tails, hardy, "")
    mesh.origin_status = _origin_status(index, anchor, h, mesh.lookup)
    return mesh


def restrict_mesh(mesh: Mesh, mask) -> Mesh:
    """Sub-mesh on the nodes selected by ``mask``.

    The removed nodes become exterior: their pairwise couplings are folded
    into the tail weights, so a field supported on the sub-mesh has the same
    energy on both meshes.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (mesh.n_nodes,):
        raise ValueError("mask must have one entry per node")
    if not mask.any():
        raise ValueError("empty sub-mesh")
    K = mesh.kernel_weights
    extra = K[np.ix_(mask, ~mask)].sum(axis=1) / mesh.cell_volume
    sub = Mesh(
        mesh.spec, mesh.p, mesh.s, mesh.theta, mesh.h, mesh.index[mask], mesh.anchor,
        np.ascontiguousarray(K[np.ix_(mask, mask)]), mesh.tail_weights[mask] + extra,
        mesh.hardy_weights[mask], mesh.origin_status,
    )
    return sub


def components(mesh: Mesh, mask) -> list[np.ndarray]:
    """Connected pieces (lattice face adjacency) of the node set ``mask``.

    Returns a list of boolean node masks, largest first.
    """
    mask = np.asarray(mask, dtype=bool)
    lo = mesh.index.min(axis=0)
    shape = tuple(mesh.index.max(axis=0) - lo + 1)
    grid = np.zeros(shape, dtype=bool)
    rel = tuple((mesh.index - lo).T)
    grid[rel] = mask
    labels, n = ndimage.label(grid)
    node_labels = labels[rel]
    out = [node_labels == k for k in range(1, n + 1)]
    out.sort(key=lambda m: -int(m.sum()))
    return out


def match_volume(spec: ShapeSpec, volume: float) -> ShapeSpec:
    """Rescale ``spec`` so that its *discrete* volume equals ``volume``.

    The resolution is kept fixed while the shape and its lattice are scaled
    about the anchor, so the pattern of kept cells does not change and the
    discrete volume scales exactly.
    """
    base_h = spec.cell_size
    anchor = spec.lattice_anchor
    n_cells = len(_lattice_cells(spec, base_h, anchor))
    discrete = n_cells * base_h**spec.dim
    k = (volume / discrete) ** (1.0 / spec.dim)
    kw = {}
    if spec.bounds is not None:
        b = np.asarray(spec.bounds).reshape(-1, 2)
        kw["bounds"] = tuple((anchor[:, None] + k * (b - anchor[:, None])).ravel())
    if spec.center is not None:
        kw["center"] = tuple(anchor + k * (np.asarray(spec.center) - anchor))
    if spec.center2 is not None:
        kw["center2"] = tuple(anchor + k * (np.asarray(spec.center2) - anchor))
    if spec.radius is not None:
        kw["radius"] = spec.radius * k
    if spec.h is not None:
        kw["h"] = spec.h * k
    if spec.anchor is not None or spec.kind == "interval":
        kw["anchor"] = tuple(anchor)
    return dataclasses.replace(spec, **kw)


# -----------------------------------------------------------------------------------
# continuous tails, independent of any lattice
# -----------------------------------------------------------------------------------
def _ray_inside_intervals(x, e, spec):
    """Parameter intervals [t0, t1] (t >= 0) where x + t e lies in the shape."""
    segs = []
    for kind, a, b in spec.pieces():
        if kind == "ball":
            d = x - a
            bb = float(e @ d)
            cc = float(d @ d) - b * b
            disc = bb * bb - cc
            if disc <= 0:
                continue
            r = math.sqrt(disc)
            t0, t1 = -bb - r, -bb + r
        else:
            t0, t1 = -np.inf, np.inf
            for k in range(len(x)):
                if abs(e[k]) < 1e-300:
                    if not (a[k] <= x[k] <= b[k]):
                        t0, t1 = 1.0, 0.0
                    continue
                u = (a[k] - x[k]) / e[k]
                v = (b[k] - x[k]) / e[k]
                t0, t1 = max(t0, min(u, v)), min(t1, max(u, v))
        t0 = max(t0, 0.0)
        if t1 > t0:
            segs.append((t0, t1))
    segs.sort()
    merged = []
    for t0, t1 in segs:
        if merged and t0 <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], t1))
        else:
            merged.append((t0, t1))
    return merged


def tail_weight_at(x, spec: ShapeSpec, s: float, p: float) -> float:
    """``integral over R^N minus Omega of |x - y|**(-N - p s) dy`` for x inside the shape.

    Uses the continuous shape (not its lattice).  In 1-D the answer is in
    closed form; in 2-D it is an angular integral of exact radial integrals.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (spec.dim,):
        raise ValueError("point dimension does not match the shape")
    if not spec.contains(x):
        raise ValueError("x must lie inside the shape")
    sigma = p * s
    if sigma <= 0:
        raise ValueError("p * s must be positive")

    def exterior(segs):
        if not segs:
            raise ValueError("x must lie in the interior of the shape")
        total = 0.0
        for (_, a), (b, _) in zip(segs[:-1], segs[1:]):
            total += a ** (-sigma) - b ** (-sigma)
        return total + segs[-1][1] ** (-sigma)

    if spec.dim == 1:
        val = 0.0
        for e in (np.array([1.0]), np.array([-1.0])):
            segs = _ray_inside_intervals(x, e, spec)
            val += exterior(segs) / sigma
        return float(val)

    def f(phi):
        e = np.array([math.cos(phi), math.sin(phi)])
        return exterior(_ray_inside_intervals(x, e, spec)) / sigma

    breaks = []
    for kind, a, b in spec.pieces():
        if kind == "box":
            for cx in (a[0], b[0]):
                for cy in (a[1], b[1]):
                    breaks.append(math.atan2(cy - x[1], cx - x[0]) % (2 * math.pi))
        else:
            d = a - x
            dn = float(np.hypot(*d))
            base = math.atan2(d[1], d[0])
            if dn > b:
                half = math.asin(b / dn)
                breaks += [(base - half) % (2 * math.pi), (base + half) % (2 * math.pi)]
    breaks = sorted(set(b for b in breaks if 0 < b < 2 * math.pi))
    pts = [0.0] + breaks + [2 * math.pi]
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi - lo > 1e-14:
            total += integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-12, limit=200)[0]
    return float(total)
