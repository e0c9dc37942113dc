"""Named test domains on the [-1, 1]^d box.

Each case builds a grid, a level set and the list of box faces that carry
prescribed boundary data for every node (on top of the generic rule that a
box-boundary node inside the domain is eliminated).  Rectangular cases take
the boundary offset parameter theta; curved ones ignore it.
"""

import math
from dataclasses import dataclass

from .geometry import FACE_HIGH, FACE_LOW, UniformGrid
from .kinds import BC_DIRICHLET, BC_NEUMANN, VARIANT_EXP, VARIANT_POLY
from .levelsets import Ellipsoid, Flower, HalfSpace, Sphere, axis_halfspace


@dataclass(frozen=True)
class CaseSetup:
    name: str
    grid: UniformGrid
    phi: object
    eliminated_faces: tuple
    default_variant: str
    default_bc: str
    uses_theta: bool


@dataclass(frozen=True)
class CaseDef:
    name: str
    d: int
    description: str
    default_variant: str
    default_bc: str
    uses_theta: bool
    builder: object

    def build(self, N, theta=0.5):
        grid = UniformGrid(self.d, N)
        phi, faces = self.builder(grid, float(theta))
        return CaseSetup(
            name=self.name,
            grid=grid,
            phi=phi,
            eliminated_faces=tuple(faces),
            default_variant=self.default_variant,
            default_bc=self.default_bc,
            uses_theta=self.uses_theta,
        )


def _interval(grid, theta):
    _check_theta(theta)
    return axis_halfspace(1, 1.0 - theta * grid.h), [(0, FACE_LOW)]


def _vline(grid, theta):
    _check_theta(theta)
    faces = [(0, FACE_LOW), (1, FACE_LOW), (1, FACE_HIGH)]
    return axis_halfspace(2, 1.0 - theta * grid.h), faces


def _plane3d(grid, theta):
    _check_theta(theta)
    faces = [
        (0, FACE_LOW),
        (1, FACE_LOW),
        (1, FACE_HIGH),
        (2, FACE_LOW),
        (2, FACE_HIGH),
    ]
    return axis_halfspace(3, 1.0 - theta * grid.h), faces


def _circle(grid, theta):
    center = (math.sqrt(3.0) / 40.0, -0.05)
    return Sphere(center, math.sqrt(2.0) / 2.0), []


def _flower(grid, theta):
    return Flower(r1=0.5, r2=0.2), []


def _line30(grid, theta):
    # boundary line at 30 degrees, shifted with h so the node pattern near it
    # stays fixed under refinement
    offset = (-1.0 + 0.7 * grid.h) / 2.0
    return HalfSpace((0.5, math.sqrt(3.0) / 2.0), offset), []


def _ellipsoid(grid, theta):
    center = (math.sqrt(2.0) / 20.0, math.sqrt(3.0) / 40.0, -math.sqrt(2.0) / 50.0)
    return Ellipsoid(center, (0.686, 0.386, 0.586)), []


def _check_theta(theta):
    if not 0.0 <= theta < 1.0:
        raise ValueError(f"theta must lie in [0, 1), got {theta}")


REGISTRY = {
    c.name: c
    for c in [
        CaseDef(
            "interval",
            1,
            "1D interval (-1, 1 - theta*h), ghost at the right end",
            VARIANT_POLY,
            BC_DIRICHLET,
            True,
            _interval,
        ),
        CaseDef(
            "vline",
            2,
            "2D strip cut by the vertical line x = 1 - theta*h",
            VARIANT_POLY,
            BC_DIRICHLET,
            True,
            _vline,
        ),
        CaseDef(
            "plane3d",
            3,
            "3D box cut by the plane x = 1 - theta*h",
            VARIANT_POLY,
            BC_DIRICHLET,
            True,
            _plane3d,
        ),
        CaseDef(
            "circle",
            2,
            "disc of radius sqrt(2)/2 centered near the origin",
            VARIANT_EXP,
            BC_DIRICHLET,
            False,
            _circle,
        ),
        CaseDef(
            "flower",
            2,
            "five-petal star r = 0.5 + 0.2 sin(5 gamma)",
            VARIANT_EXP,
            BC_DIRICHLET,
            False,
            _flower,
        ),
        CaseDef(
            "line30",
            2,
            "half-plane under a 30-degree line, mixed box/line data",
            VARIANT_EXP,
            BC_NEUMANN,
            False,
            _line30,
        ),
        CaseDef(
            "ellipsoid",
            3,
            "ellipsoid with semiaxes (0.686, 0.386, 0.586)",
            VARIANT_EXP,
            BC_DIRICHLET,
            False,
            _ellipsoid,
        ),
    ]
}


def get_case(name):
    try:
        return REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(REGISTRY))
        raise KeyError(f"unknown case {name!r}; known cases: {known}") from None


def build_case(name, N, theta=0.5):
    return get_case(name).build(N, theta)
