"""Combined smoother: interior Gauss-Seidel plus one ghost relaxation pass.

One smoothing step sweeps all internal nodes in lexicographic order with
point Gauss-Seidel, then sweeps the ghost rows once in lexicographic order,
each ghost moving by dtau times its current row residual (freshest neighbor
values, its own old value on the diagonal).  Equivalent to a Richardson step
preconditioned by the block lower triangle of the system with the ghost
diagonal replaced by 1/dtau.

The interior sweep runs as an anti-diagonal wavefront: nodes on i1+...+id = s
only read values from s-1 (already updated) and s+1 (still old), so updating
one diagonal at a time with vector operations reproduces the sequential
lexicographic sweep value for value.
"""

from dataclasses import dataclass

import numpy as np

from . import blfa
from .kinds import BC_NEUMANN, VARIANT_POLY, check_bc
from .operators import check_ghost_rows, ghost_row_weights, internal_neighbors

DTAU_CONSTANT = "constant"
DTAU_BLFA = "blfa"
DTAU_BLFA_POLY = "blfa-poly"
DTAU_MODES = (DTAU_CONSTANT, DTAU_BLFA, DTAU_BLFA_POLY)


@dataclass(frozen=True)
class SmootherConfig:
    """dtau assignment mode plus pre/post smoothing counts.

    dtau_value is read in constant mode only; for Neumann rows it is the
    dimensionless dtau/h (the smoother scales by the level spacing).
    """

    dtau_mode: str = DTAU_BLFA
    dtau_value: float = 1.0
    nu1: int = 2
    nu2: int = 1

    def __post_init__(self):
        if self.dtau_mode not in DTAU_MODES:
            raise ValueError(f"unknown dtau mode: {self.dtau_mode!r}")
        if self.nu1 < 0 or self.nu2 < 0 or self.nu1 + self.nu2 == 0:
            raise ValueError("need nu1, nu2 >= 0 with at least one sweep")


def assign_dtau(cls, bc, config, default_variant=VARIANT_POLY):
    """Per-ghost dtau array for a classified level; also fills GhostInfo.dtau."""
    check_bc(bc)
    h = cls.grid.h
    if config.dtau_mode == DTAU_CONSTANT:
        value = config.dtau_value * h if bc == BC_NEUMANN else config.dtau_value
        dtau = np.full(cls.n_ghosts, value)
    else:
        variant = VARIANT_POLY if config.dtau_mode == DTAU_BLFA_POLY else default_variant
        dtau = np.empty(cls.n_ghosts)
        for g in range(cls.n_ghosts):
            if cls.ghost_promoted[g]:
                dtau[g] = 1.0
                continue
            query = blfa.BlfaQuery(
                bc=bc,
                d=cls.grid.d,
                theta=float(cls.ghost_theta_raw[g]),
                h=h,
                variant=variant,
            )
            dtau[g] = blfa.dtau_opt(query)
    # extrapolation rows have a unit own-coefficient, so dtau = 1 relaxes
    # them exactly; boundary tuning never applies to promoted ghosts
    dtau[cls.ghost_promoted] = 1.0
    for g, info in enumerate(cls.ghosts):
        info.dtau = float(dtau[g])
    return dtau


class SweepPlan:
    """Precomputed index machinery for smoothing and residuals on one level."""

    def __init__(self, cls, spec, dtau):
        grid = cls.grid
        self.cls = cls
        self.h2 = grid.h**2
        # diagonal of the interior row times h^2
        self.denom = 2.0 * grid.d + spec.reaction * self.h2
        self.internal_idx = cls.internal_idx
        self.internal_nbrs = internal_neighbors(cls)

        multis = grid.multi_index(cls.internal_idx)
        sums = multis.sum(axis=1) if grid.d > 1 else multis.ravel()
        order = np.argsort(sums, kind="stable")
        self.diagonals = []
        if len(order):
            sorted_sums = sums[order]
            cuts = np.flatnonzero(np.diff(sorted_sums)) + 1
            for chunk in np.split(order, cuts):
                self.diagonals.append(
                    (cls.internal_idx[chunk], self.internal_nbrs[chunk])
                )

        weights = ghost_row_weights(cls, spec.bc)
        check_ghost_rows(cls, weights)
        self.ghost_idx = cls.ghost_idx
        self.ghost_stencil = cls.ghost_stencil
        self.ghost_coeffs = weights
        self.ghost_dtau = np.asarray(dtau, dtype=float)

    def residual_internal(self, u, f):
        """f - A u on the internal nodes, as an (n_internal,) array."""
        idx = self.internal_idx
        return (
            f[idx]
            - (self.denom / self.h2) * u[idx]
            + u[self.internal_nbrs].sum(axis=1) / self.h2
        )

    def residual_ghost(self, u, g):
        """Ghost-row residuals g - B u, as an (n_ghosts,) array."""
        if len(self.ghost_idx) == 0:
            return np.zeros(0)
        return g - (self.ghost_coeffs * u[self.ghost_stencil]).sum(axis=1)


def gs_lex_sweep(u, f, plan):
    """One lexicographic Gauss-Seidel sweep over the internal nodes."""
    h2 = plan.h2
    inv = 1.0 / plan.denom
    for idx, nbrs in plan.diagonals:
        u[idx] = (h2 * f[idx] + u[nbrs].sum(axis=1)) * inv


def ghost_relax_sweep(u, g, plan):
    """One pass over the ghost rows in lexicographic order, freshest values."""
    st = plan.ghost_stencil
    co = plan.ghost_coeffs
    dt = plan.ghost_dtau
    gi = plan.ghost_idx
    for t in range(len(gi)):
        u[gi[t]] += dt[t] * (g[t] - co[t] @ u[st[t]])


def smooth(u, f, g, plan, count):
    """count combined sweeps (interior pass then ghost pass, in place)."""
    for _ in range(count):
        gs_lex_sweep(u, f, plan)
        ghost_relax_sweep(u, g, plan)
