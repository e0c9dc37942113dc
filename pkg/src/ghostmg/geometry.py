"""Uniform box grid, node classification and ghost-point geometry.

The grid covers [-1, 1]^d with spacing h = 2/N and (N+1)^d nodes.  Against a
level set phi each node gets exactly one label:

* INTERNAL     phi < 0, strictly inside the box
* ELIMINATED   value prescribed there (box-boundary nodes inside the domain,
               plus every node of the faces a case declares as data faces)
* GHOST        not internal/eliminated, with an internal axis neighbor
* INACTIVE     everything else

Each ghost carries its boundary projection Q, the outward unit normal, the
normalized boundary distance theta = |G - Q|/h and an upwind 3^d interpolation
block with the ghost at a corner so the block encloses Q.

Where the boundary runs nearly tangent to a grid line (a circle apex, say),
an upwind block can pick up an exterior node that has no internal neighbor
of its own.  Such nodes are promoted to ghosts too, so every value a ghost
row reads is an unknown or prescribed data; the promotion repeats until the
ghost set is closed under row support.  Promoted ghosts do not carry a
boundary condition (their row linearly extrapolates along the dominant
normal axis), so they skip the projection machinery: Q is the node itself
and theta is zero by convention.
"""

from dataclasses import dataclass, field

import numpy as np

INTERNAL = np.uint8(0)
GHOST = np.uint8(1)
INACTIVE = np.uint8(2)
ELIMINATED = np.uint8(3)

FACE_LOW = 0
FACE_HIGH = 1

PROJECTION_TOL = 1e-10
THETA_CLAMP = 1.0 - 1e-9
# tensor weight below this is treated as an exact structural zero
WEIGHT_TOL = 1e-13
# promoted ghosts sit up to a couple of cells from the boundary
PROJECTION_ETA_MAX = 3.0
MAX_CLOSURE_ROUNDS = 64
# beyond this raw theta the relaxation formula is out of its validity
# range; a level containing such a ghost is treated as under-resolved
THETA_TRUST = 1.6


class ResolutionError(RuntimeError):
    """Grid too coarse: a ghost stencil leaves the box or needs an inactive node."""


class DegenerateGradientError(RuntimeError):
    """|grad(phi)| ~ 0 where a normal direction is required."""


class ProjectionError(RuntimeError):
    """No boundary crossing found between a ghost and its inward ray."""


@dataclass(frozen=True)
class UniformGrid:
    """Nodes x_i = -1 + i*h per axis, i = 0..N, h = 2/N."""

    d: int
    N: int

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.N < 2 or self.N % 2 != 0:
            raise ValueError(f"N must be even and >= 2, got {self.N}")

    @property
    def h(self):
        return 2.0 / self.N

    @property
    def shape(self):
        return (self.N + 1,) * self.d

    @property
    def n_nodes(self):
        return (self.N + 1) ** self.d

    @property
    def axis_coords(self):
        return -1.0 + self.h * np.arange(self.N + 1)

    def coords(self):
        """All node coordinates, shape (n_nodes, d), C-order flat indexing."""
        axes = np.meshgrid(*([self.axis_coords] * self.d), indexing="ij")
        return np.stack([a.ravel() for a in axes], axis=-1)

    def multi_coords(self, multis):
        """Coordinates of integer multi-indices with shape (..., d)."""
        return -1.0 + self.h * np.asarray(multis, dtype=float)

    def flat_index(self, multis):
        multis = np.asarray(multis)
        return np.ravel_multi_index(tuple(multis[..., k] for k in range(self.d)), self.shape)

    def multi_index(self, flats):
        parts = np.unravel_index(np.asarray(flats), self.shape)
        return np.stack(parts, axis=-1)

    @property
    def strides(self):
        """Flat-index step per axis."""
        return np.array([(self.N + 1) ** (self.d - 1 - k) for k in range(self.d)], dtype=np.int64)


@dataclass
class GhostInfo:
    """Geometry attached to one ghost node."""

    index: int
    multi: tuple
    point: np.ndarray
    Q: np.ndarray
    n: np.ndarray
    theta: float
    stencil: np.ndarray
    block_low: tuple
    # |G - Q|/h before clamping into [0, 1); can slightly exceed 1 on
    # curved boundaries where the normal ray is longer than the axis gap
    theta_raw: float = float("nan")
    # promoted ghosts carry an extrapolation row instead of a boundary row
    promoted: bool = False
    dtau: float = float("nan")


@dataclass
class GridClassification:
    grid: UniformGrid
    phi: object
    labels: np.ndarray
    phi_values: np.ndarray
    internal_idx: np.ndarray
    ghost_idx: np.ndarray
    eliminated_idx: np.ndarray
    inactive_idx: np.ndarray
    ghosts: list = field(default_factory=list)
    # array views of the ghost metadata, aligned with ghost_idx
    ghost_Q: np.ndarray = None
    ghost_n: np.ndarray = None
    ghost_theta: np.ndarray = None
    ghost_theta_raw: np.ndarray = None
    ghost_stencil: np.ndarray = None
    ghost_block_low: np.ndarray = None
    ghost_promoted: np.ndarray = None

    @property
    def n_ghosts(self):
        return len(self.ghost_idx)


def raw_gradient(phi, points, h):
    """grad(phi) at points (..., d): analytic when the shape provides it,
    otherwise central differences with step h."""
    g = phi.gradient(points)
    if g is not None:
        return np.asarray(g, dtype=float)
    points = np.asarray(points, dtype=float)
    d = points.shape[-1]
    out = np.empty_like(points)
    for k in range(d):
        step = np.zeros(d)
        step[k] = h
        out[..., k] = (phi(points + step) - phi(points - step)) / (2.0 * h)
    return out


def compute_normal(phi, points, h):
    """Outward unit normal grad(phi)/|grad(phi)| at points (..., d)."""
    g = raw_gradient(phi, points, h)
    norm = np.linalg.norm(g, axis=-1)
    if np.any(norm < 1e-12):
        raise DegenerateGradientError(
            f"level-set gradient vanishes (min |grad| = {norm.min():.3e})"
        )
    return g / norm[..., None]


def lagrange_quad(t):
    """Quadratic Lagrange basis on nodes {0, 1, 2} at t, shape (..., 3)."""
    t = np.asarray(t, dtype=float)
    return np.stack(
        [(t - 1.0) * (t - 2.0) / 2.0, t * (2.0 - t), t * (t - 1.0) / 2.0], axis=-1
    )


def lagrange_quad_deriv(t):
    """Derivatives of the quadratic Lagrange basis at t, shape (..., 3)."""
    t = np.asarray(t, dtype=float)
    return np.stack([t - 1.5, 2.0 - 2.0 * t, t - 0.5], axis=-1)


def tensor_weights(factors):
    """Fold per-axis factor triples (ng, d, 3) into (ng, 3^d), C-ordered
    (axis 0 slowest), matching the stencil block layout."""
    ng, d, _ = factors.shape
    if ng == 0:
        return np.zeros((0, 3**d))
    w = np.ones((ng, 1))
    for k in range(d):
        w = (w[:, :, None] * factors[:, k, None, :]).reshape(ng, -1)
    return w


def project_to_boundary(phi, points, normals, h):
    """First boundary crossings Q = G - eta*h*n along the inward ray.

    Returns (Q, eta).  Regular ghosts cross within one spacing; promoted
    ones may need eta up to a few.  Sampling in steps of 0.25 brackets the
    first sign change, bisection narrows it, a few Newton steps polish it
    to |phi(Q)| <= 1e-12 * scale.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    normals = np.atleast_2d(np.asarray(normals, dtype=float))
    ng = points.shape[0]

    def psi(eta):
        return phi(points - eta[:, None] * h * normals)

    n_samples = int(PROJECTION_ETA_MAX / 0.25) + 1
    samples = np.linspace(0.0, PROJECTION_ETA_MAX, n_samples)
    vals = np.stack([psi(np.full(ng, s)) for s in samples])
    if np.any(vals[0] < 0.0):
        raise ProjectionError("projection started from a point inside the domain")

    lo = np.zeros(ng)
    hi = np.full(ng, np.nan)
    done = vals[0] == 0.0  # ghost already on the boundary
    eta = np.zeros(ng)
    bracketed = done.copy()
    for k in range(n_samples - 1):
        hit = (~bracketed) & (vals[k] > 0.0) & (vals[k + 1] <= 0.0)
        lo[hit] = samples[k]
        hi[hit] = samples[k + 1]
        bracketed |= hit

    missing = ~bracketed
    if np.any(missing):
        # non-monotone phi along the ray: fall back to scalar Newton from 0.5
        for g in np.flatnonzero(missing):
            e = _newton_scalar(phi, points[g], normals[g], h)
            eta[g] = e
            done[g] = True
            bracketed[g] = True

    active = bracketed & ~done
    if np.any(active):
        a_lo = lo[active]
        a_hi = hi[active]
        pts = points[active]
        nrm = normals[active]
        for _ in range(48):
            mid = 0.5 * (a_lo + a_hi)
            v = phi(pts - mid[:, None] * h * nrm)
            neg = v <= 0.0
            a_hi[neg] = mid[neg]
            a_lo[~neg] = mid[~neg]
        e = 0.5 * (a_lo + a_hi)
        # Newton polish
        scale = np.maximum(1.0, np.abs(phi(pts)))
        for _ in range(6):
            q = pts - e[:, None] * h * nrm
            v = phi(q)
            if np.all(np.abs(v) <= 1e-12 * scale):
                break
            grad = raw_gradient(phi, q, h)
            dpsi = -h * (grad * nrm).sum(axis=-1)
            step = np.where(np.abs(dpsi) > 1e-300, v / dpsi, 0.0)
            e = np.clip(e - step, 0.0, PROJECTION_ETA_MAX)
        eta[active] = e

    Q = points - eta[:, None] * h * normals
    if np.any(np.abs(phi(Q)) > PROJECTION_TOL * np.maximum(1.0, np.abs(vals[0]))):
        worst = np.abs(phi(Q)).max()
        raise ProjectionError(f"projection residual {worst:.3e} above tolerance")
    return Q, eta


def _newton_scalar(phi, point, normal, h):
    eta = 0.5
    for _ in range(60):
        q = point - eta * h * normal
        v = float(phi(q[None, :])[0])
        if abs(v) <= 1e-12 * max(1.0, abs(float(phi(point[None, :])[0]))):
            if -1e-9 <= eta < PROJECTION_ETA_MAX:
                return min(max(eta, 0.0), PROJECTION_ETA_MAX)
            break
        grad = raw_gradient(phi, q[None, :], h)[0]
        dpsi = -h * float(grad @ normal)
        if dpsi == 0.0:
            break
        eta -= v / dpsi
        if not -0.5 <= eta <= PROJECTION_ETA_MAX + 0.5:
            break
    raise ProjectionError("no boundary crossing along the inward normal ray")


def upwind_stencil(grid, multi, normal):
    """Lower corner of the 3^d block for a ghost at multi with outward normal.

    Axes with a positive normal component extend inward ({i-2..i}), negative
    ones extend the other way ({i..i+2}), zero components stay centered.
    """
    multi = np.asarray(multi)
    lows = np.where(normal > 0.0, multi - 2, np.where(normal < 0.0, multi, multi - 1))
    if np.any(lows < 0) or np.any(lows + 2 > grid.N):
        raise ResolutionError(
            f"ghost stencil at node {tuple(int(m) for m in multi)} leaves the box"
        )
    return lows


def _stencil_flats(grid, lows):
    """Flat indices of the 3^d blocks with lower corners lows (ng, d)."""
    d = grid.d
    offsets = np.stack(np.meshgrid(*([np.arange(3)] * d), indexing="ij"), axis=-1)
    offsets = offsets.reshape(-1, d)  # C-order, axis 0 slowest
    blocks = lows[:, None, :] + offsets[None, :, :]
    return (blocks * grid.strides[None, None, :]).sum(axis=-1), offsets


def extrapolation_row_weights(cls):
    """Row coefficients (ng, 3^d) extrapolating each ghost from the interior.

    Along the axis with the largest |normal| component the ghost sits at an
    end of its block, so the second-difference triple (1, -2, 1) over the
    block reads the ghost with weight 1 and extrapolates it linearly from
    the two nodes behind it; the other axes pass through the ghost's own
    plane.  Only promoted ghosts use these rows.
    """
    grid = cls.grid
    idx = cls.ghost_idx
    ng = len(idx)
    if ng == 0:
        return np.zeros((0, 3**grid.d))
    offsets = grid.multi_index(idx) - cls.ghost_block_low  # each in {0, 1, 2}
    dom = np.argmax(np.abs(cls.ghost_n), axis=1)
    factors = np.zeros((ng, grid.d, 3))
    rows = np.arange(ng)
    factors[rows[:, None], np.arange(grid.d)[None, :], offsets] = 1.0
    factors[rows, dom, :] = (1.0, -2.0, 1.0)
    return tensor_weights(factors)


def ghost_row_support(cls):
    """Boolean mask (ng, 3^d): stencil entries a ghost row may read.

    Regular rows take the union of the value interpolant and every
    directional-derivative variant, covering both boundary-condition
    kinds; promoted rows read their extrapolation triple.
    """
    grid = cls.grid
    t = (cls.ghost_Q - grid.multi_coords(cls.ghost_block_low)) / grid.h
    values = lagrange_quad(t)
    derivs = lagrange_quad_deriv(t)
    support = np.abs(tensor_weights(values)) > WEIGHT_TOL
    for k in range(grid.d):
        factors = values.copy()
        factors[:, k, :] = derivs[:, k, :]
        support |= np.abs(tensor_weights(factors)) > WEIGHT_TOL
    prom = cls.ghost_promoted
    if prom.any():
        support[prom] = np.abs(extrapolation_row_weights(cls)[prom]) > WEIGHT_TOL
    return support


def classify(grid, phi, eliminated_faces=()):
    """Label every node and build the ghost geometry.

    eliminated_faces lists (axis, FACE_LOW/FACE_HIGH) pairs whose entire node
    set carries prescribed values regardless of the level-set sign; on top of
    that, any box-boundary node with phi < 0 is eliminated.  Labels depend
    only on the sign of phi at the nodes, except that exterior nodes pulled
    into some ghost's interpolation block are promoted to ghosts themselves.
    """
    pts = grid.coords()
    phi_vals = np.asarray(phi(pts), dtype=float)
    shape = grid.shape

    on_boundary = np.zeros(shape, dtype=bool)
    for k in range(grid.d):
        sl = [slice(None)] * grid.d
        sl[k] = 0
        on_boundary[tuple(sl)] = True
        sl[k] = grid.N
        on_boundary[tuple(sl)] = True

    face_mask = np.zeros(shape, dtype=bool)
    for axis, side in eliminated_faces:
        sl = [slice(None)] * grid.d
        sl[axis] = 0 if side == FACE_LOW else grid.N
        face_mask[tuple(sl)] = True

    neg = (phi_vals < 0.0).reshape(shape)
    eliminated = face_mask | (on_boundary & neg)
    internal = neg & ~eliminated

    has_internal_neighbor = np.zeros(shape, dtype=bool)
    for k in range(grid.d):
        lo = [slice(None)] * grid.d
        hi = [slice(None)] * grid.d
        lo[k] = slice(None, -1)
        hi[k] = slice(1, None)
        has_internal_neighbor[tuple(lo)] |= internal[tuple(hi)]
        has_internal_neighbor[tuple(hi)] |= internal[tuple(lo)]

    ghost = ~internal & ~eliminated & has_internal_neighbor

    labels = np.full(shape, INACTIVE, dtype=np.uint8)
    labels[internal] = INTERNAL
    labels[eliminated] = ELIMINATED
    labels[ghost] = GHOST
    labels = labels.ravel()

    cls = GridClassification(
        grid=grid,
        phi=phi,
        labels=labels,
        phi_values=phi_vals,
        internal_idx=np.flatnonzero(labels == INTERNAL),
        ghost_idx=np.flatnonzero(labels == GHOST),
        eliminated_idx=np.flatnonzero(labels == ELIMINATED),
        inactive_idx=np.flatnonzero(labels == INACTIVE),
    )
    promoted_flats = np.zeros(0, dtype=np.int64)
    for _ in range(MAX_CLOSURE_ROUNDS):
        _attach_ghost_geometry(cls, phi, promoted_flats)
        hit = ghost_row_support(cls) & (cls.labels[cls.ghost_stencil] == INACTIVE)
        referenced = cls.ghost_stencil[hit]
        if referenced.size == 0:
            return cls
        # close the ghost set under row support: every value a ghost row
        # may read must be an unknown or prescribed data
        referenced = np.unique(referenced)
        promoted_flats = np.union1d(promoted_flats, referenced)
        cls.labels[referenced] = GHOST
        cls.ghost_idx = np.flatnonzero(cls.labels == GHOST)
        cls.inactive_idx = np.flatnonzero(cls.labels == INACTIVE)
    raise ResolutionError("ghost closure did not terminate; refine the grid")


def _attach_ghost_geometry(cls, phi, promoted_flats):
    grid = cls.grid
    h = grid.h
    idx = cls.ghost_idx
    ng = len(idx)
    if ng == 0:
        cls.ghost_Q = np.zeros((0, grid.d))
        cls.ghost_n = np.zeros((0, grid.d))
        cls.ghost_theta = np.zeros(0)
        cls.ghost_theta_raw = np.zeros(0)
        cls.ghost_promoted = np.zeros(0, dtype=bool)
        cls.ghost_stencil = np.zeros((0, 3**grid.d), dtype=np.int64)
        cls.ghost_block_low = np.zeros((0, grid.d), dtype=np.int64)
        cls.ghosts = []
        return

    multis = grid.multi_index(idx)
    pts = grid.multi_coords(multis)
    normals = compute_normal(phi, pts, h)
    promoted = np.isin(idx, promoted_flats)
    regular = ~promoted
    # promoted ghosts carry an extrapolation row: no boundary point, no theta
    Q = pts.copy()
    eta = np.zeros(ng)
    if regular.any():
        Q[regular], eta[regular] = project_to_boundary(
            phi, pts[regular], normals[regular], h
        )
    theta = np.minimum(eta, THETA_CLAMP)

    lows = np.empty((ng, grid.d), dtype=np.int64)
    for g in range(ng):
        lows[g] = upwind_stencil(grid, multis[g], normals[g])
    stencils, _ = _stencil_flats(grid, lows)

    cls.ghost_Q = Q
    cls.ghost_n = normals
    cls.ghost_theta = theta
    cls.ghost_theta_raw = eta
    cls.ghost_promoted = promoted
    cls.ghost_stencil = stencils
    cls.ghost_block_low = lows
    cls.ghosts = [
        GhostInfo(
            index=int(idx[g]),
            multi=tuple(int(m) for m in multis[g]),
            point=pts[g],
            Q=Q[g],
            n=normals[g],
            theta=float(theta[g]),
            stencil=stencils[g],
            block_low=tuple(int(b) for b in lows[g]),
            theta_raw=float(eta[g]),
            promoted=bool(promoted[g]),
        )
        for g in range(ng)
    ]
