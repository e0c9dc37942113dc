"""Level-set descriptions of the computational domains.

A domain is the region where phi < 0 inside the box [-1, 1]^d.  Shapes
evaluate phi on arrays of points with shape (..., d) and, when an analytic
gradient is cheap, provide it; otherwise geometry.compute_normal falls back
to central differences.
"""

import numpy as np


class LevelSet:
    """Base class: callable phi with an optional analytic gradient."""

    d = None

    def __call__(self, points):
        raise NotImplementedError

    def gradient(self, points):
        """Return grad(phi) with shape (..., d), or None when not available."""
        return None


class Constant(LevelSet):
    """phi == value everywhere; value < 0 makes the whole box interior."""

    def __init__(self, d, value=-1.0):
        self.d = int(d)
        self.value = float(value)

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        return np.full(points.shape[:-1], self.value)


class HalfSpace(LevelSet):
    """phi = coeffs . x + offset; the domain is the side where it is negative."""

    def __init__(self, coeffs, offset):
        self.coeffs = np.asarray(coeffs, dtype=float)
        self.offset = float(offset)
        self.d = self.coeffs.size

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        return points @ self.coeffs + self.offset

    def gradient(self, points):
        points = np.asarray(points, dtype=float)
        return np.broadcast_to(self.coeffs, points.shape).copy()


def axis_halfspace(d, cutoff, axis=0):
    """phi = x_axis - cutoff: interval end (d=1), vertical line (d=2) or plane (d=3)."""
    coeffs = np.zeros(d)
    coeffs[axis] = 1.0
    return HalfSpace(coeffs, -float(cutoff))


class Sphere(LevelSet):
    """phi = sum((x - center)^2) - R^2 (quadratic form, not signed distance)."""

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.d = self.center.size

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        return ((points - self.center) ** 2).sum(axis=-1) - self.radius**2

    def gradient(self, points):
        points = np.asarray(points, dtype=float)
        return 2.0 * (points - self.center)


class Ellipsoid(LevelSet):
    """phi = sum(((x_k - c_k)/a_k)^2) - 1."""

    def __init__(self, center, semiaxes):
        self.center = np.asarray(center, dtype=float)
        self.semiaxes = np.asarray(semiaxes, dtype=float)
        self.d = self.center.size

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        return (((points - self.center) / self.semiaxes) ** 2).sum(axis=-1) - 1.0

    def gradient(self, points):
        points = np.asarray(points, dtype=float)
        return 2.0 * (points - self.center) / self.semiaxes**2


class Flower(LevelSet):
    """Five-petal star r(gamma) = r1 + r2 sin(5 gamma), centered at the origin.

    phi = r - r1 - r2 * Im((x + i y)^5) / r^5, written out in powers of x, y.
    """

    d = 2

    def __init__(self, r1=0.5, r2=0.2):
        self.r1 = float(r1)
        self.r2 = float(r2)

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        x = points[..., 0]
        y = points[..., 1]
        r = np.sqrt(x * x + y * y)
        s = y**5 + 5.0 * x**4 * y - 10.0 * x**2 * y**3
        # s/r^5 = sin(5*gamma) is bounded; at the origin phi tends to -r1
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(r > 0.0, s / r**5, 0.0)
        return r - self.r1 - self.r2 * ratio

    def gradient(self, points):
        points = np.asarray(points, dtype=float)
        x = points[..., 0]
        y = points[..., 1]
        r = np.sqrt(x * x + y * y)
        s = y**5 + 5.0 * x**4 * y - 10.0 * x**2 * y**3
        sx = 20.0 * x**3 * y - 20.0 * x * y**3
        sy = 5.0 * y**4 + 5.0 * x**4 - 30.0 * x**2 * y**2
        # direction is undefined at the origin (deep inside the domain and
        # never queried for a normal); return a finite placeholder there
        with np.errstate(divide="ignore", invalid="ignore"):
            gx = np.where(
                r > 0.0, x / r - self.r2 * (sx / r**5 - 5.0 * s * x / r**7), 1.0
            )
            gy = np.where(
                r > 0.0, y / r - self.r2 * (sy / r**5 - 5.0 * s * y / r**7), 0.0
            )
        return np.stack([gx, gy], axis=-1)
