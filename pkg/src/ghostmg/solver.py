"""Multigrid cycles and the asymptotic convergence-factor measurement.

A cycle smooths (nu1 pre, nu2 post), forms the two residual families,
extends the ghost residual into the inactive band, restricts both families,
solves or recurses on the coarse error equation, extends the coarse error,
interpolates and corrects.  The convergence factor rho is the mean residual
reduction over cycles 11..15 of the homogeneous problem started from a
seeded random field, the protocol every reported number uses.
"""

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse.linalg import splu

from .kinds import VARIANT_POLY
from .operators import assemble_system, node_values
from .rng import XorShift64Star
from .smoothing import SmootherConfig, SweepPlan, assign_dtau, smooth
from .transfer import build_hierarchy

log = logging.getLogger(__name__)

SCHEME_TWO_GRID = "two-grid"
SCHEME_V = "v"
SCHEME_W = "w"
SCHEMES = (SCHEME_TWO_GRID, SCHEME_V, SCHEME_W)

NORM_INF = "inf"
NORM_L2 = "l2"

# measurement protocol constants
RHO_WINDOW = (11, 15)
MIN_CYCLES_FOR_RHO = 16
DIVERGENCE_FACTOR = 1e6
RENORM_THRESHOLD = 1e-250


class DivergenceDetected(RuntimeError):
    """Residual grew by more than DIVERGENCE_FACTOR over the initial one."""


class CoarseSolveError(RuntimeError):
    """The coarsest-level system could not be factorized."""


@dataclass(frozen=True)
class CycleConfig:
    scheme: str = SCHEME_TWO_GRID
    cycles: int = MIN_CYCLES_FOR_RHO
    norm: str = NORM_INF
    coarse_solver: str = "direct"  # or "sweeps"
    coarse_sweeps: int = 500

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown cycling scheme: {self.scheme!r}")
        if self.norm not in (NORM_INF, NORM_L2):
            raise ValueError(f"unknown norm: {self.norm!r}")

    @property
    def gamma(self):
        return 2 if self.scheme == SCHEME_W else 1

    @property
    def max_levels(self):
        return 2 if self.scheme == SCHEME_TWO_GRID else None


@dataclass
class CycleReport:
    residual_norms: list
    rho_sequence: list
    rho_asymptotic: float
    diverged: bool
    cycles_run: int
    scheme: str
    n_levels: int
    norm: str
    seed: int

    def to_dict(self):
        return {
            "residual_norms": [float(v) for v in self.residual_norms],
            "rho_sequence": [float(v) for v in self.rho_sequence],
            "rho_asymptotic": None
            if self.rho_asymptotic is None
            else float(self.rho_asymptotic),
            "diverged": self.diverged,
            "cycles_run": self.cycles_run,
            "scheme": self.scheme,
            "n_levels": self.n_levels,
            "norm": self.norm,
            "seed": self.seed,
        }


class MultigridSolver:
    """Cycling machinery bound to one hierarchy and one problem."""

    def __init__(self, levels, spec, smoother=None, cycle=None, default_variant=VARIANT_POLY):
        self.levels = levels
        self.spec = spec
        self.smoother = smoother or SmootherConfig()
        self.cycle_cfg = cycle or CycleConfig()
        self.plans = []
        for level in levels:
            dtau = assign_dtau(level.cls, spec.bc, self.smoother, default_variant)
            self.plans.append(SweepPlan(level.cls, spec, dtau))
        self._coarse_lu = None

        fine = levels[0].cls
        grid = fine.grid
        self.f_fine = np.zeros(grid.n_nodes)
        self.f_fine[fine.internal_idx] = node_values(spec.f, grid, fine.internal_idx)
        if fine.n_ghosts and spec.g_gamma is not None:
            self.g_fine = np.asarray(spec.g_gamma(fine.ghost_Q), dtype=float)
            self.g_fine[fine.ghost_promoted] = 0.0  # extrapolation rows
        else:
            self.g_fine = np.zeros(fine.n_ghosts)
        self.eliminated_values = np.zeros(grid.n_nodes)
        if len(fine.eliminated_idx) and spec.g_box is not None:
            self.eliminated_values[fine.eliminated_idx] = node_values(
                spec.g_box, grid, fine.eliminated_idx
            )

    # ----- residuals -------------------------------------------------

    def residuals(self, u, f_full, g, level=0):
        plan = self.plans[level]
        return plan.residual_internal(u, f_full), plan.residual_ghost(u, g)

    def residual_norm(self, u, f_full, g, level=0):
        r_int, r_g = self.residuals(u, f_full, g, level)
        if self.cycle_cfg.norm == NORM_L2:
            return math.sqrt(float((r_int**2).sum() + (r_g**2).sum()))
        m = float(np.abs(r_int).max()) if len(r_int) else 0.0
        if len(r_g):
            m = max(m, float(np.abs(r_g).max()))
        return m

    # ----- coarse solve ----------------------------------------------

    def _coarsest_matrix(self):
        if self._coarse_lu is None:
            cls = self.levels[-1].cls
            bare = replace(self.spec, f=None, g_box=None, g_gamma=None)
            A, _, active = assemble_system(bare, cls)
            try:
                self._coarse_lu = (splu(A.tocsc()), active)
            except RuntimeError as exc:
                raise CoarseSolveError(f"coarsest factorization failed: {exc}") from exc
        return self._coarse_lu

    def coarse_solve(self, f_full, g):
        cls = self.levels[-1].cls
        e = np.zeros(cls.grid.n_nodes)
        if self.cycle_cfg.coarse_solver == "sweeps":
            smooth(e, f_full, g, self.plans[-1], self.cycle_cfg.coarse_sweeps)
            return e
        lu, active = self._coarsest_matrix()
        rhs = np.concatenate([f_full[cls.internal_idx], g])
        e[active] = lu.solve(rhs)
        return e

    # ----- cycling ----------------------------------------------------

    def _cycle(self, level, u, f_full, g):
        plan = self.plans[level]
        lv = self.levels[level]
        cls = lv.cls
        smooth(u, f_full, g, plan, self.smoother.nu1)

        r_int, r_g = self.residuals(u, f_full, g, level)
        r_int_full = np.zeros(cls.grid.n_nodes)
        r_int_full[cls.internal_idx] = r_int
        r_g_full = np.zeros(cls.grid.n_nodes)
        r_g_full[cls.ghost_idx] = r_g
        r_g_ext = lv.extrap.apply(r_g_full)

        f_coarse = lv.down_interior.apply(r_int_full)
        g_coarse = lv.down_ghost.apply(r_g_ext)

        coarse_cls = self.levels[level + 1].cls
        # promoted rows are homogeneous extrapolation constraints on every
        # level, so the restricted boundary residual must not leak into them
        g_coarse[coarse_cls.ghost_promoted] = 0.0
        if level + 1 == len(self.levels) - 1:
            e = self.coarse_solve(f_coarse, g_coarse)
        else:
            e = np.zeros(coarse_cls.grid.n_nodes)
            for _ in range(self.cycle_cfg.gamma):
                self._cycle(level + 1, e, f_coarse, g_coarse)

        e_ext = self.levels[level + 1].extrap.apply(e)
        u[lv.up_interp.targets] += lv.up_interp.apply(e_ext)
        smooth(u, f_full, g, plan, self.smoother.nu2)

    def run_cycle(self, u):
        """One full cycle on the finest level, in place."""
        self._cycle(0, u, self.f_fine, self.g_fine)

    def initial_field(self, seed):
        """Seeded uniform(-1,1) values on the full grid, then prescribed
        values on eliminated nodes and zeros on inactive ones."""
        cls = self.levels[0].cls
        rng = XorShift64Star(seed)
        u = rng.uniform_symmetric(cls.grid.n_nodes)
        u[cls.eliminated_idx] = self.eliminated_values[cls.eliminated_idx]
        u[cls.inactive_idx] = 0.0
        return u

    def solve(self, u=None, cycles=None, tol=0.0, seed=42):
        """Run cycles, tracking residual norms; returns (u, CycleReport)."""
        cfg = self.cycle_cfg
        cycles = cfg.cycles if cycles is None else cycles
        if u is None:
            u = self.initial_field(seed)
        ln_scale = 0.0
        ln_norms = []

        def record():
            n = self.residual_norm(u, self.f_fine, self.g_fine)
            ln_norms.append((math.log(n) if n > 0.0 else -math.inf) + ln_scale)

        record()
        diverged = False
        ran = 0
        for m in range(cycles):
            self.run_cycle(u)
            record()
            ran = m + 1
            if ln_norms[-1] - ln_norms[0] > math.log(DIVERGENCE_FACTOR):
                diverged = True
                log.warning("residual grew %.1e-fold; stopping", DIVERGENCE_FACTOR)
                break
            peak = float(np.abs(u).max())
            if 0.0 < peak < RENORM_THRESHOLD:
                # keep the iterate away from denormals; ratios are preserved
                u *= 1e250
                ln_scale -= math.log(1e250)
            if tol > 0.0 and ln_norms[-1] - ln_norms[0] < math.log(tol):
                break

        norms = [math.exp(v) if v > -math.inf else 0.0 for v in ln_norms]
        rho_seq = [
            math.exp(ln_norms[i + 1] - ln_norms[i]) if ln_norms[i] > -math.inf else 0.0
            for i in range(len(ln_norms) - 1)
        ]
        lo, hi = RHO_WINDOW
        rho = None
        if diverged:
            rho = 1.0
        elif ran >= MIN_CYCLES_FOR_RHO:
            rho = float(np.mean(rho_seq[lo : hi + 1]))
        report = CycleReport(
            residual_norms=norms,
            rho_sequence=rho_seq,
            rho_asymptotic=rho,
            diverged=diverged,
            cycles_run=ran,
            scheme=cfg.scheme,
            n_levels=len(self.levels),
            norm=cfg.norm,
            seed=seed,
        )
        return u, report


def build_solver(grid, phi, spec, eliminated_faces=(), smoother=None, cycle=None,
                 default_variant=VARIANT_POLY, coarsest_min=4):
    """Hierarchy + solver in one call."""
    cycle = cycle or CycleConfig()
    levels = build_hierarchy(
        grid, phi, eliminated_faces, max_levels=cycle.max_levels, coarsest_min=coarsest_min
    )
    return MultigridSolver(levels, spec, smoother, cycle, default_variant)


def measure_rho(solver, seed=42, cycles=MIN_CYCLES_FOR_RHO):
    """Asymptotic convergence factor of the homogeneous problem.

    Forces zero data (the iterate is the error), runs at least 16 cycles
    from the seeded random field and averages the residual reduction over
    cycles 11..15.  A diverging run reports rho = 1.
    """
    cycles = max(cycles, MIN_CYCLES_FOR_RHO)
    saved = solver.f_fine, solver.g_fine, solver.eliminated_values
    solver.f_fine = np.zeros_like(solver.f_fine)
    solver.g_fine = np.zeros_like(solver.g_fine)
    solver.eliminated_values = np.zeros_like(solver.eliminated_values)
    try:
        _, report = solver.solve(cycles=cycles, seed=seed)
    finally:
        solver.f_fine, solver.g_fine, solver.eliminated_values = saved
    return report
