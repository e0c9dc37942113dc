"""Discrete operators: interior stencil, ghost rows, sparse assembly.

Interior rows are the standard 2d+1 point Laplacian (2d/h^2 on the diagonal,
-1/h^2 to the axis neighbors), optionally shifted by +1 for the reaction
equation u - lap(u) = f.  Each ghost node carries one extra row: the
tensor-product quadratic interpolant over its upwind 3^d block, evaluated at
the boundary projection Q (Dirichlet) or differentiated along the outward
normal at Q (Neumann, which brings in a 1/h).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .geometry import (
    ELIMINATED,
    INACTIVE,
    WEIGHT_TOL,
    ResolutionError,
    compute_normal,
    extrapolation_row_weights,
    lagrange_quad,
    lagrange_quad_deriv,
    tensor_weights,
)
from .kinds import BC_DIRICHLET, BC_NEUMANN, PDE_REACTION, check_bc, check_pde


@dataclass(frozen=True)
class ProblemSpec:
    """Continuous problem data.  Callables take point arrays (..., d);
    None means identically zero (the homogeneous measurement setup)."""

    pde: str
    bc: str
    f: object = None
    g_box: object = None
    g_gamma: object = None

    def __post_init__(self):
        check_pde(self.pde)
        check_bc(self.bc)

    @property
    def reaction(self):
        return 1.0 if self.pde == PDE_REACTION else 0.0


@dataclass
class GhostRow:
    ghost_index: int
    stencil: np.ndarray
    coeffs: np.ndarray
    rhs: float


def bc_coeffs_1d(bc, theta, h):
    """One-dimensional ghost-row coefficients (c_-2, c_-1, c_0).

    Dirichlet: quadratic interpolation weights at distance theta*h inward of
    the ghost.  Neumann: derivative of that interpolant, carrying 1/h.
    """
    check_bc(bc)
    t = 2.0 - float(theta)
    if bc == BC_DIRICHLET:
        w = lagrange_quad(t)
        return float(w[0]), float(w[1]), float(w[2])
    w = lagrange_quad_deriv(t) / h
    return float(w[0]), float(w[1]), float(w[2])


def ghost_row_weights(cls, bc):
    """Row coefficients for every ghost, shape (n_ghosts, 3^d).

    Columns follow the stored stencil order (C-order over the 3^d block).
    """
    grid = cls.grid
    h = grid.h
    t = (cls.ghost_Q - grid.multi_coords(cls.ghost_block_low)) / h
    if bc == BC_DIRICHLET:
        w = tensor_weights(lagrange_quad(t))
    else:
        # directional derivative: sum_k n_k * (1/h) * L'(t_k) x prod L(t_m)
        n_at_Q = compute_normal(cls.phi, cls.ghost_Q, h)
        values = lagrange_quad(t)  # (ng, d, 3)
        derivs = lagrange_quad_deriv(t)
        w = np.zeros((len(cls.ghost_idx), 3**grid.d))
        for k in range(grid.d):
            factors = values.copy()
            factors[:, k, :] = derivs[:, k, :]
            w += (n_at_Q[:, k] / h)[:, None] * tensor_weights(factors)
    prom = cls.ghost_promoted
    if prom.any():
        w[prom] = extrapolation_row_weights(cls)[prom]
    return w


def build_ghost_row(ghost, bc, grid, phi, g_gamma=None):
    """GhostRow for a single ghost (thin wrapper over the vectorized path)."""
    check_bc(bc)
    h = grid.h
    if ghost.promoted:
        # extrapolation row: same triple as the vectorized path, rhs 0
        offs = np.asarray(ghost.multi) - np.asarray(ghost.block_low)
        dom = int(np.argmax(np.abs(ghost.n)))
        factors = np.zeros((grid.d, 3))
        factors[np.arange(grid.d), offs] = 1.0
        factors[dom, :] = (1.0, -2.0, 1.0)
        coeffs = tensor_weights(factors[None, :, :])[0]
        return GhostRow(
            ghost_index=ghost.index, stencil=ghost.stencil, coeffs=coeffs, rhs=0.0
        )
    t = (ghost.Q - grid.multi_coords(np.asarray(ghost.block_low))) / h
    if bc == BC_DIRICHLET:
        coeffs = tensor_weights(lagrange_quad(t)[None, :, :])[0]
    else:
        n_at_Q = compute_normal(phi, ghost.Q[None, :], h)[0]
        values = lagrange_quad(t)  # (d, 3)
        derivs = lagrange_quad_deriv(t)
        coeffs = np.zeros(3**grid.d)
        for k in range(grid.d):
            factors = values.copy()
            factors[k, :] = derivs[k, :]
            coeffs += (n_at_Q[k] / h) * tensor_weights(factors[None, :, :])[0]
    rhs = float(g_gamma(ghost.Q[None, :])[0]) if g_gamma is not None else 0.0
    return GhostRow(ghost_index=ghost.index, stencil=ghost.stencil, coeffs=coeffs, rhs=rhs)


def check_ghost_rows(cls, weights):
    """Reject rows whose nonzero coefficients touch inactive nodes."""
    hit = (cls.labels[cls.ghost_stencil] == INACTIVE) & (np.abs(weights) > WEIGHT_TOL)
    if np.any(hit):
        g = int(np.flatnonzero(hit.any(axis=1))[0])
        raise ResolutionError(
            f"ghost row at flat index {int(cls.ghost_idx[g])} needs an inactive node"
        )


def internal_neighbors(cls):
    """Flat indices of the 2d axis neighbors of every internal node, (ni, 2d)."""
    grid = cls.grid
    idx = cls.internal_idx
    nbrs = np.empty((len(idx), 2 * grid.d), dtype=np.int64)
    for k, s in enumerate(grid.strides):
        nbrs[:, 2 * k] = idx - s
        nbrs[:, 2 * k + 1] = idx + s
    return nbrs


def apply_operator(u, spec, cls):
    """Matvec of the interior rows; zero away from internal nodes."""
    grid = cls.grid
    h2 = grid.h**2
    idx = cls.internal_idx
    nbrs = internal_neighbors(cls)
    out = np.zeros_like(u)
    diag = 2.0 * grid.d / h2 + spec.reaction
    out[idx] = diag * u[idx] - u[nbrs].sum(axis=1) / h2
    return out


def node_values(func, grid, flat_idx):
    """Evaluate a data callable at grid nodes; None gives zeros."""
    if func is None:
        return np.zeros(len(flat_idx))
    pts = grid.multi_coords(grid.multi_index(flat_idx))
    return np.asarray(func(pts), dtype=float)


def assemble_system(spec, cls):
    """Sparse system over the active nodes (internal then ghost, flat order).

    Returns (A, b, active_idx).  Prescribed values (box data g_box on
    eliminated nodes) are folded into b; inactive nodes never enter.
    """
    grid = cls.grid
    h2 = grid.h**2
    labels = cls.labels
    active_idx = np.concatenate([cls.internal_idx, cls.ghost_idx])
    col_of = np.full(grid.n_nodes, -1, dtype=np.int64)
    col_of[active_idx] = np.arange(len(active_idx))

    g_box_vals = np.zeros(grid.n_nodes)
    if spec.g_box is not None and len(cls.eliminated_idx):
        g_box_vals[cls.eliminated_idx] = node_values(spec.g_box, grid, cls.eliminated_idx)

    rows, cols, vals = [], [], []
    b = np.zeros(len(active_idx))

    ni = len(cls.internal_idx)
    nbrs = internal_neighbors(cls)
    diag = 2.0 * grid.d / h2 + spec.reaction
    b[:ni] = node_values(spec.f, grid, cls.internal_idx)
    rows.append(np.arange(ni))
    cols.append(np.arange(ni))
    vals.append(np.full(ni, diag))
    for k in range(2 * grid.d):
        nb = nbrs[:, k]
        keep = col_of[nb] >= 0
        rows.append(np.flatnonzero(keep))
        cols.append(col_of[nb[keep]])
        vals.append(np.full(keep.sum(), -1.0 / h2))
        elim = labels[nb] == ELIMINATED
        if np.any(elim):
            b[np.flatnonzero(elim)] += g_box_vals[nb[elim]] / h2

    weights = ghost_row_weights(cls, spec.bc)
    check_ghost_rows(cls, weights)
    if spec.g_gamma is not None and cls.n_ghosts:
        b[ni:] = np.asarray(spec.g_gamma(cls.ghost_Q), dtype=float)
        b[ni:][cls.ghost_promoted] = 0.0  # extrapolation rows are homogeneous
    for g in range(cls.n_ghosts):
        st = cls.ghost_stencil[g]
        w = weights[g]
        keep = (np.abs(w) > 0.0) & (col_of[st] >= 0)
        rows.append(np.full(keep.sum(), ni + g))
        cols.append(col_of[st[keep]])
        vals.append(w[keep])
        elim = (labels[st] == ELIMINATED) & (np.abs(w) > 0.0)
        if np.any(elim):
            b[ni + g] -= float(w[elim] @ g_box_vals[st[elim]])

    A = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(active_idx), len(active_idx)),
    )
    return A, b, active_idx


def export_matrix_text(A, path):
    """Write a COO listing 'row col value' per line, 0-based indices."""
    coo = A.tocoo()
    with open(path, "w", encoding="ascii") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {v:.17g}\n")
