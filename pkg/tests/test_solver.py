"""Cycling machinery: fixed-point anchors, dual-route solves, reporting.

The multigrid result is checked against a direct sparse solve of the same
assembled system (independent route), convergence factors are pinned to
frozen deterministic values, and the measurement protocol's bookkeeping
(data restoration, divergence guard, windowed averaging) is exercised.
"""

import numpy as np
import pytest
from scipy.sparse.linalg import spsolve

from ghostmg.cases import build_case
from ghostmg.operators import ProblemSpec, assemble_system
from ghostmg.smoothing import SmootherConfig
from ghostmg.solver import (
    MIN_CYCLES_FOR_RHO,
    RHO_WINDOW,
    CycleConfig,
    build_solver,
    measure_rho,
)


def zero(p):
    return np.zeros(len(p))


def homogeneous_spec(pde="poisson", bc="dirichlet"):
    return ProblemSpec(pde=pde, bc=bc, f=zero, g_box=zero, g_gamma=zero)


def make_solver(case, N, theta=0.5, spec=None, smoother=None, cycle=None):
    setup = build_case(case, N, theta=theta)
    spec = spec or homogeneous_spec(bc=setup.default_bc)
    return build_solver(setup.grid, setup.phi, spec, setup.eliminated_faces,
                        smoother=smoother or SmootherConfig(),
                        cycle=cycle or CycleConfig(),
                        default_variant=setup.default_variant)


# ----- frozen convergence anchors --------------------------------------


def test_two_grid_straight_boundary_anchor():
    solver = make_solver("vline", 64)
    report = measure_rho(solver)
    assert not report.diverged
    assert report.rho_asymptotic == pytest.approx(0.1098159571428157, rel=1e-3)
    assert len(solver.levels) == 2


@pytest.mark.parametrize("scheme,expected", [("v", 0.1996689590143284),
                                             ("w", 0.19126214971430816)])
def test_multilevel_schemes_on_circle(scheme, expected):
    solver = make_solver("circle", 32, cycle=CycleConfig(scheme=scheme))
    assert len(solver.levels) == 4
    report = measure_rho(solver)
    assert not report.diverged
    assert report.rho_asymptotic == pytest.approx(expected, rel=1e-3)
    assert report.rho_asymptotic < 0.25


# ----- dual-route solve -------------------------------------------------


@pytest.mark.parametrize("case,bc,pde", [("vline", "dirichlet", "poisson"),
                                         ("circle", "dirichlet", "poisson"),
                                         ("line30", "neumann", "reaction")])
def test_solve_matches_direct_sparse_solve(case, bc, pde):
    def u_exact(p):
        return np.sin(p[:, 0]) * np.exp(0.5 * p[:, 1])

    def f(p):
        # -lap(u) (+ u for the reaction equation)
        lap = (-1.0 + 0.25) * u_exact(p)
        val = -lap
        if pde == "reaction":
            val = val + u_exact(p)
        return val

    def g_neu(p, n):
        # directional derivative of the manufactured field along the normal
        return (np.cos(p[:, 0]) * np.exp(0.5 * p[:, 1]) * n[:, 0]
                + 0.5 * u_exact(p) * n[:, 1])

    setup = build_case(case, 32)
    spec = ProblemSpec(pde=pde, bc=bc, f=f, g_box=u_exact,
                       g_gamma=u_exact if bc == "dirichlet" else None)

    solver = build_solver(setup.grid, setup.phi, spec, setup.eliminated_faces,
                          cycle=CycleConfig(scheme="v", cycles=40),
                          default_variant=setup.default_variant)
    cls = solver.levels[0].cls
    if bc == "neumann":
        solver.g_fine = g_neu(cls.ghost_Q, cls.ghost_n)
        solver.g_fine[cls.ghost_promoted] = 0.0

    # independent route: direct solve of the assembled sparse system; the
    # assembled ghost rhs already holds the eliminated-node lift, so the
    # boundary data is added on top rather than substituted
    A, b, active = assemble_system(spec, cls)
    b = b.copy()
    if bc == "neumann":
        b[len(cls.internal_idx):] += solver.g_fine
    direct = np.zeros(cls.grid.n_nodes)
    direct[active] = spsolve(A.tocsc(), b)
    direct[cls.eliminated_idx] = solver.eliminated_values[cls.eliminated_idx]

    u, report = solver.solve(cycles=40, tol=1e-12, seed=7)
    assert report.residual_norms[-1] <= 1e-10 * max(1.0, report.residual_norms[0])
    err = np.abs(u[active] - direct[active]).max()
    assert err <= 1e-8


# ----- measurement protocol ---------------------------------------------


def test_measure_rho_restores_problem_data():
    solver = make_solver("vline", 16)
    f0 = solver.f_fine.copy()
    solver.f_fine[:] = 3.0
    solver.g_fine[:] = -2.0
    r1 = measure_rho(solver, seed=5)
    assert np.all(solver.f_fine == 3.0) and np.all(solver.g_fine == -2.0)
    r2 = measure_rho(solver, seed=5)
    assert r1.rho_asymptotic == r2.rho_asymptotic
    assert r1.residual_norms == r2.residual_norms
    solver.f_fine = f0


def test_measure_rho_window_matches_sequence():
    solver = make_solver("vline", 16)
    report = measure_rho(solver)
    lo, hi = RHO_WINDOW
    want = float(np.mean(report.rho_sequence[lo:hi + 1]))
    assert report.rho_asymptotic == pytest.approx(want, rel=1e-14)
    assert report.cycles_run >= MIN_CYCLES_FOR_RHO
    assert len(report.residual_norms) == report.cycles_run + 1


def test_divergence_guard():
    solver = make_solver(
        "vline", 32,
        smoother=SmootherConfig(dtau_mode="constant", dtau_value=50.0))
    report = measure_rho(solver)
    assert report.diverged
    assert report.rho_asymptotic == 1.0
    assert report.cycles_run < MIN_CYCLES_FOR_RHO


def test_initial_field_is_seeded_and_masked():
    solver = make_solver("circle", 16)
    cls = solver.levels[0].cls
    u1 = solver.initial_field(9)
    u2 = solver.initial_field(9)
    np.testing.assert_array_equal(u1, u2)
    assert np.abs(u1[cls.internal_idx]).max() <= 1.0
    np.testing.assert_array_equal(u1[cls.inactive_idx], 0.0)
    np.testing.assert_array_equal(
        u1[cls.eliminated_idx], solver.eliminated_values[cls.eliminated_idx])
    assert not np.array_equal(u1, solver.initial_field(10))


def test_report_to_dict_roundtrip():
    import json

    solver = make_solver("vline", 16)
    report = measure_rho(solver)
    d = report.to_dict()
    text = json.dumps(d)
    back = json.loads(text)
    assert back["scheme"] == "two-grid"
    assert back["rho_asymptotic"] == pytest.approx(report.rho_asymptotic)
    assert back["n_levels"] == 2
    assert back["diverged"] is False


def test_cycle_config_validation():
    with pytest.raises(ValueError):
        CycleConfig(scheme="fmg")
    with pytest.raises(ValueError):
        CycleConfig(norm="l7")
    assert CycleConfig(scheme="two-grid").max_levels == 2
    assert CycleConfig(scheme="v").max_levels is None
