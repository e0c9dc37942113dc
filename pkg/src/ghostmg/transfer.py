"""Grid transfer: restriction of the two residual families, error
interpolation, and the inactive-band extrapolation that glues them together.

Interior and ghost residuals scale differently (h^-2 vs h^0 or h^-1) and are
never mixed.  Interior residuals restrict by full weighting when the 3^d
block holds no ghost/inactive node (eliminated rows contribute their exact
zero residual), otherwise by the plain average over the internal nodes of
the block.  Ghost residuals are first transported from the ghost layer into
the inactive band along the outward normal, then restricted by full
weighting masked to ghost/inactive in-box nodes and renormalized; on blocks
fully inside the ghost/inactive region this is plain full weighting, on a
straight boundary column it degenerates to the tangential [1 2 1]/4 rule,
and in 1D to direct injection.  Coarse errors are extended into the coarse
inactive band the same way before d-linear interpolation.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    GHOST,
    INACTIVE,
    INTERNAL,
    THETA_TRUST,
    ProjectionError,
    ResolutionError,
    UniformGrid,
    classify,
    compute_normal,
)

BAND_CELLS = 3
EXTRAP_STEPS = 6


class EmptyStencil(RuntimeError):
    """A restriction block contains no node of the required family."""


def _fw_weights(d):
    """Tensor-product full-weighting row [1 2 1]/4 per axis, C-ordered."""
    w = np.array([1.0])
    for _ in range(d):
        w = np.multiply.outer(w, np.array([0.25, 0.5, 0.25])).ravel()
    return w


def _blocks_around(grid, centers):
    """3^d blocks centered at fine multis (m, d); returns (flat, valid).

    Out-of-box positions get a clamped dummy index and valid = False.
    """
    d = grid.d
    offsets = np.stack(np.meshgrid(*([np.arange(-1, 2)] * d), indexing="ij"), axis=-1)
    offsets = offsets.reshape(-1, d)
    multis = centers[:, None, :] + offsets[None, :, :]
    valid = ((multis >= 0) & (multis <= grid.N)).all(axis=-1)
    clamped = np.clip(multis, 0, grid.N)
    flat = (clamped * grid.strides[None, None, :]).sum(axis=-1)
    return flat, valid


class InteriorRestriction:
    """Fine interior residual -> coarse internal nodes."""

    def __init__(self, fine_cls, coarse_cls):
        fine_grid = fine_cls.grid
        self.coarse_cls = coarse_cls
        ci = coarse_cls.internal_idx
        centers = 2 * coarse_cls.grid.multi_index(ci)
        blocks, valid = _blocks_around(fine_grid, centers)
        if not valid.all():
            raise ResolutionError("interior restriction block leaves the box")
        labels = fine_cls.labels[blocks]
        mixed = ((labels == GHOST) | (labels == INACTIVE)).any(axis=1)
        weights = np.broadcast_to(_fw_weights(fine_grid.d), blocks.shape).copy()
        if np.any(mixed):
            internal = labels[mixed] == INTERNAL
            counts = internal.sum(axis=1)
            if np.any(counts == 0):
                raise EmptyStencil("no internal node under a coarse internal node")
            weights[mixed] = internal / counts[:, None]
        self.coarse_idx = ci
        self.blocks = blocks
        self.weights = weights

    def apply(self, r_fine):
        """r_fine is a full fine array, zero away from internal nodes."""
        out = np.zeros(self.coarse_cls.grid.n_nodes)
        if len(self.coarse_idx):
            out[self.coarse_idx] = (self.weights * r_fine[self.blocks]).sum(axis=1)
        return out


class GhostRestriction:
    """Extended fine ghost residual -> coarse ghost nodes."""

    def __init__(self, fine_cls, coarse_cls):
        fine_grid = fine_cls.grid
        cg = coarse_cls.ghost_idx
        centers = 2 * coarse_cls.grid.multi_index(cg)
        blocks, valid = _blocks_around(fine_grid, centers)
        labels = fine_cls.labels[blocks]
        keep = valid & ((labels == GHOST) | (labels == INACTIVE))
        # full weighting masked to the ghost/inactive nodes and renormalized:
        # on a straight boundary column this is the tangential [1 2 1]/4 rule
        weights = np.broadcast_to(_fw_weights(fine_grid.d), blocks.shape) * keep
        sums = weights.sum(axis=1)
        if np.any(sums <= 0.0):
            raise EmptyStencil("no ghost/inactive node under a coarse ghost")
        self.coarse_idx = cg
        self.blocks = blocks
        self.weights = weights / sums[:, None]

    def apply(self, r_ext_fine):
        """r_ext_fine carries ghost residuals plus the extrapolated band."""
        values = np.zeros(len(self.coarse_idx))
        if len(self.coarse_idx):
            values = (self.weights * r_ext_fine[self.blocks]).sum(axis=1)
        return values


class ErrorInterpolation:
    """d-linear coarse-to-fine interpolation onto internal and ghost nodes."""

    def __init__(self, fine_cls, coarse_cls):
        fine_grid = fine_cls.grid
        d = fine_grid.d
        targets = np.concatenate([fine_cls.internal_idx, fine_cls.ghost_idx])
        multis = fine_grid.multi_index(targets)
        base = multis // 2
        odd = multis % 2
        offsets = np.stack(np.meshgrid(*([np.arange(2)] * d), indexing="ij"), axis=-1)
        offsets = offsets.reshape(-1, d)
        # weight per corner: 1/2 on odd axes, indicator(offset==0) on even ones
        w = np.ones((len(targets), 2**d))
        src = np.empty((len(targets), 2**d), dtype=np.int64)
        strides = coarse_cls.grid.strides
        for c, off in enumerate(offsets):
            contrib = np.where(odd == 1, 0.5, (off == 0).astype(float)[None, :])
            w[:, c] = contrib.prod(axis=1)
            corner = base + np.where(odd == 1, off[None, :], 0)
            src[:, c] = (corner * strides[None, :]).sum(axis=1)
        self.targets = targets
        self.src = src
        self.weights = w

    def apply(self, e_coarse):
        """Full coarse array -> increments aligned with self.targets."""
        return (self.weights * e_coarse[self.src]).sum(axis=1)


class ExtrapolationPlan:
    """Transport ghost-family values into the inactive band along the normal.

    The band holds the inactive nodes within BAND_CELLS axis steps of a
    ghost.  Values seed by a breadth-first pass (each node averages its
    already-assigned axis neighbors), then EXTRAP_STEPS explicit transport
    steps with one-sided inward differences and step 0.5h sharpen the
    profile.  Both stages reproduce constants exactly.
    """

    def __init__(self, cls):
        grid = cls.grid
        self.cls = cls
        depth = np.full(grid.n_nodes, -1, dtype=np.int64)
        depth[cls.ghost_idx] = 0
        inactive = cls.labels == INACTIVE

        self.bfs_groups = []
        frontier = cls.ghost_idx
        band = []
        for level in range(1, BAND_CELLS + 1):
            if len(frontier) == 0:
                break
            multis = grid.multi_index(frontier).reshape(-1, grid.d)
            reach = []
            for k in range(grid.d):
                for sign in (-1, 1):
                    mt = multis.copy()
                    mt[:, k] += sign
                    inside = (mt[:, k] >= 0) & (mt[:, k] <= grid.N)
                    reach.append((mt[inside] * grid.strides[None, :]).sum(axis=1))
            cand = np.unique(np.concatenate(reach)) if reach else np.zeros(0, np.int64)
            fresh = cand[(depth[cand] == -1) & inactive[cand]]
            if len(fresh) == 0:
                break
            depth[fresh] = level
            nbrs, mask = self._assigned_neighbors(grid, fresh, depth, level)
            self.bfs_groups.append((fresh, nbrs, mask))
            band.append(fresh)
            frontier = fresh

        if band:
            self.band_idx = np.concatenate(band)
        else:
            self.band_idx = np.zeros(0, dtype=np.int64)
        self._build_transport(cls, grid)

    @staticmethod
    def _assigned_neighbors(grid, idx, depth, level):
        multis = grid.multi_index(idx)
        nbrs = np.empty((len(idx), 2 * grid.d), dtype=np.int64)
        mask = np.zeros((len(idx), 2 * grid.d), dtype=bool)
        for k in range(grid.d):
            for j, sign in enumerate((-1, 1)):
                col = 2 * k + j
                mt = multis.copy()
                mt[:, k] += sign
                inside = (mt[:, k] >= 0) & (mt[:, k] <= grid.N)
                flats = np.where(inside, (mt * grid.strides[None, :]).sum(axis=1), 0)
                ok = inside & (depth[flats] >= 0) & (depth[flats] < level)
                nbrs[:, col] = np.where(ok, flats, idx)
                mask[:, col] = ok
        if np.any(mask.sum(axis=1) == 0):
            raise ResolutionError("band node with no assigned neighbor")
        return nbrs, mask

    def _build_transport(self, cls, grid):
        idx = self.band_idx
        if len(idx) == 0:
            self.trans_nbrs = np.zeros((0, grid.d), dtype=np.int64)
            self.trans_absn = np.zeros((0, grid.d))
            return
        pts = grid.multi_coords(grid.multi_index(idx))
        normals = compute_normal(cls.phi, pts, grid.h)
        multis = grid.multi_index(idx)
        nbrs = np.empty((len(idx), grid.d), dtype=np.int64)
        absn = np.abs(normals)
        for k in range(grid.d):
            step = np.sign(normals[:, k]).astype(np.int64)
            mt = multis[:, k] - step
            inside = (mt >= 0) & (mt <= grid.N) & (step != 0)
            target = idx - step * grid.strides[k]
            nbrs[:, k] = np.where(inside, target, idx)
            absn[~inside, k] = 0.0  # no variation where there is no neighbor
        self.trans_nbrs = nbrs
        self.trans_absn = absn

    def apply(self, values):
        """Return a copy of values with the band filled from the ghost layer."""
        out = values.copy()
        for idx, nbrs, mask in self.bfs_groups:
            out[idx] = (out[nbrs] * mask).sum(axis=1) / mask.sum(axis=1)
        idx = self.band_idx
        if len(idx) == 0:
            return out
        for _ in range(EXTRAP_STEPS):
            diffs = out[idx][:, None] - out[self.trans_nbrs]
            out[idx] = out[idx] - 0.5 * (self.trans_absn * diffs).sum(axis=1)
        return out


@dataclass
class Level:
    """One grid level plus the operators that talk to the next coarser one."""

    cls: object
    extrap: ExtrapolationPlan
    down_interior: InteriorRestriction = None
    down_ghost: GhostRestriction = None
    up_interp: ErrorInterpolation = None


def build_hierarchy(grid, phi, eliminated_faces=(), max_levels=None, coarsest_min=4):
    """Classify levels fine to coarse, halving N, and wire the transfer plans.

    Coarsening stops at coarsest_min, at an odd N, at max_levels, or where a
    coarse classification fails to resolve the boundary.  At least two
    levels are required.
    """
    fine = classify(grid, phi, eliminated_faces)
    if fine.n_ghosts and fine.ghost_theta_raw.max() > THETA_TRUST:
        raise ResolutionError(
            "finest grid leaves a ghost farther than the relaxation formula "
            "trusts; refine the grid"
        )
    classifications = [fine]
    N = grid.N
    while True:
        if max_levels is not None and len(classifications) >= max_levels:
            break
        if N % 2 != 0 or N // 2 < coarsest_min:
            break
        try:
            coarse = classify(UniformGrid(grid.d, N // 2), phi, eliminated_faces)
        except (ResolutionError, ProjectionError):
            break
        if coarse.n_ghosts and coarse.ghost_theta_raw.max() > THETA_TRUST:
            break
        classifications.append(coarse)
        N //= 2

    if len(classifications) < 2:
        raise ResolutionError("cannot build a second level; grid too coarse")

    levels = [Level(cls=c, extrap=ExtrapolationPlan(c)) for c in classifications]
    for l in range(len(levels) - 1):
        fine, coarse = levels[l].cls, levels[l + 1].cls
        levels[l].down_interior = InteriorRestriction(fine, coarse)
        levels[l].down_ghost = GhostRestriction(fine, coarse)
        levels[l].up_interp = ErrorInterpolation(fine, coarse)
    return levels
