"""Fourier analysis of the ghost-point relaxation on a plane boundary.

Near-boundary error modes of the lexicographic Gauss-Seidel + ghost update
smoother behave, on a half-space, like discrete plane waves that decay away
from the boundary with rate p(alpha) per grid layer, where alpha are the
tangential frequencies.  The ghost update multiplies such a mode by an
amplification factor 1 - dtau*g0 (Dirichlet) or 1 - (dtau/h)*g0 (Neumann),
with g0 > 0 depending only on the normalized boundary distance theta and on
p.  Minimizing the worst amplification over the high-frequency range yields
a closed-form optimal dtau per ghost point; that is what dtau_opt returns.
"""

import math
from dataclasses import dataclass

from .kinds import (
    BC_DIRICHLET,
    BC_NEUMANN,
    VARIANT_EXP,
    VARIANT_POLY,
    check_bc,
    check_variant,
)


class DomainError(ValueError):
    """Decay-rate argument outside the range where arccosh is real."""


class AllZeroSlopes(ValueError):
    """minimax_lines needs at least one strictly positive slope."""


# regular ghosts have theta in [0, 1); ghosts promoted into the stencil
# closure sit farther out, and the corner values of g0 keep their sign up
# to about theta = 1.65 for both boundary-condition kinds
THETA_FORMULA_MAX = 1.65


@dataclass(frozen=True)
class BlfaQuery:
    """Everything the boundary symbol depends on.

    bc        boundary condition kind at the ghost ("dirichlet"/"neumann")
    d         space dimension (1, 2 or 3)
    theta     normalized distance of the ghost to the boundary; [0, 1) for
              regular ghosts, up to THETA_FORMULA_MAX for promoted ones
    h         grid spacing (only scales the Neumann result)
    variant   "poly" for the quadratic-interpolant symbol, "exp" for the
              pure-mode approximation
    """

    bc: str
    d: int
    theta: float
    h: float = 1.0
    variant: str = VARIANT_POLY

    def __post_init__(self):
        check_bc(self.bc)
        check_variant(self.variant)
        if self.d < 1:
            raise ValueError(f"dimension must be >= 1, got {self.d}")
        if not 0.0 <= self.theta <= THETA_FORMULA_MAX:
            raise ValueError(
                f"theta must lie in [0, {THETA_FORMULA_MAX}], got {self.theta}"
            )
        if self.h <= 0.0:
            raise ValueError(f"grid spacing must be positive, got {self.h}")


def symbol_p(alphas):
    """Decay rate per layer of the mode with tangential frequencies alphas.

    alphas has d-1 entries; the rate is arccosh(d - sum(cos(alpha_i))),
    evaluated as log(z + sqrt(z^2 - 1)) which is exact at z = 1.
    """
    alphas = tuple(float(a) for a in alphas)
    d = len(alphas) + 1
    z = d - sum(math.cos(a) for a in alphas)
    if z < 1.0:
        raise DomainError(f"arccosh argument {z} < 1 for alphas={alphas}")
    return math.log(z + math.sqrt(z * z - 1.0))


def symbol_p_continuous(alphas):
    """Continuum guess p = sum(alphas).  Tabulated for comparison only;
    the solver never uses it (it badly overestimates the decay)."""
    return float(sum(alphas))


def bc_coeffs_dimensionless(bc, theta):
    """(c_-2, c_-1, c_0) of the one-dimensional ghost row, h factored out.

    Dirichlet rows carry no h; Neumann rows are the returned triple times
    1/h.  Quadratic interpolation through the ghost and its two inward
    neighbors, evaluated (or differentiated) at distance theta*h inward.
    """
    check_bc(bc)
    t = float(theta)
    if bc == BC_DIRICHLET:
        return (t * (t - 1.0) / 2.0, t * (2.0 - t), (1.0 - t) * (2.0 - t) / 2.0)
    return (0.5 - t, 2.0 * (t - 1.0), 1.5 - t)


def g0(query, p):
    """Boundary symbol g0 at decay rate p, per query.bc/theta/variant."""
    e = math.exp(-float(p))
    theta = query.theta
    if query.variant == VARIANT_EXP:
        if query.bc == BC_DIRICHLET:
            return math.exp(-p * theta)
        return p * math.exp(-p * theta)
    c2, c1, c0 = bc_coeffs_dimensionless(query.bc, theta)
    return c0 + c1 * e + c2 * e * e


def amplification(query, alphas, dtau):
    """Per-sweep boundary-mode amplification 1 - dtau_hat * g0.

    dtau is the dimensional relaxation parameter; for Neumann rows the
    symbol sees dtau/h.
    """
    if len(alphas) != max(query.d, 2) - 1:
        raise ValueError(
            f"expected {max(query.d, 2) - 1} tangential frequencies, got {len(alphas)}"
        )
    p = symbol_p(alphas)
    dtau_hat = dtau / query.h if query.bc == BC_NEUMANN else dtau
    return 1.0 - dtau_hat * g0(query, p)


def corner_points(d):
    """Frequency corners where the high-range extrema of g0 sit.

    For dimension d these are A_r = (pi/2 repeated r times, 0 elsewhere)
    for r = 1..d-1 plus A_d = (pi, ..., pi), each of length d-1.
    """
    if d < 2:
        raise ValueError("corner set is defined for d >= 2")
    corners = []
    for r in range(1, d):
        corners.append(tuple([math.pi / 2.0] * r + [0.0] * (d - 1 - r)))
    corners.append(tuple([math.pi] * (d - 1)))
    return corners


def minimax_lines(slopes):
    """Minimize max_i |1 - m_i x| over x for nonnegative slopes m_i.

    Returns (x_star, value); x_star = 2/(m_max + m_min) balances the two
    extreme lines, attaining (m_max - m_min)/(m_max + m_min).
    """
    ms = [float(m) for m in slopes]
    if not ms:
        raise AllZeroSlopes("no slopes given")
    if min(ms) < 0.0:
        raise ValueError("slopes must be nonnegative")
    m_max, m_min = max(ms), min(ms)
    if m_max == 0.0:
        raise AllZeroSlopes("all slopes vanish, every x is equally bad")
    x_star = 2.0 / (m_max + m_min)
    value = max(abs(1.0 - m * x_star) for m in ms)
    return x_star, value


def dtau_opt(query):
    """Optimal ghost relaxation parameter for one ghost point.

    Parameters
    ----------
    query : BlfaQuery
        Boundary condition, dimension, normalized distance theta, spacing h
        and symbol variant.

    Returns
    -------
    float
        The dtau minimizing the worst high-frequency boundary amplification.
        Dirichlet: 2/(g0_min + g0_max) over the corner set; Neumann: the
        same expression times h (the symbol scales with 1/h there).

    Notes
    -----
    g0 has no stationary points inside the high-frequency region, so its
    range there is spanned by the corner values; the minimax over lines
    x -> |1 - g0 x| is then explicit.  d = 1 reuses the d = 2 corner pair.
    """
    d_eff = max(query.d, 2)
    gs = [abs(g0(query, symbol_p(a))) for a in corner_points(d_eff)]
    x_star, _ = minimax_lines(gs)
    if query.bc == BC_NEUMANN:
        return query.h * x_star
    return x_star
