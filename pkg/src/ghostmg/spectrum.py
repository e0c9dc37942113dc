"""Discrete Fourier analysis of the ghost-layer residual.

After a few smoothing sweeps on the homogeneous problem the residual left on
a straight ghost column is a clean probe of which tangential frequencies the
ghost relaxation fails to damp: a well-tuned dtau leaves low-frequency
content (handled by the coarse grid), a detuned one leaves high frequencies
that no coarse grid can see.
"""

import math
from dataclasses import dataclass

import numpy as np

from .rng import XorShift64Star
from .smoothing import SweepPlan, smooth

DEFAULT_SWEEPS = 10


@dataclass
class SpectrumReport:
    alphas: np.ndarray
    amplitudes: np.ndarray
    coefficients: np.ndarray
    alphas_full: np.ndarray
    high_low_ratio: float
    energy_high_low_ratio: float

    def to_dict(self):
        return {
            "alphas": [float(a) for a in self.alphas],
            "amplitudes": [float(a) for a in self.amplitudes],
            "high_low_ratio": float(self.high_low_ratio),
            "energy_high_low_ratio": float(self.energy_high_low_ratio),
        }


def boundary_spectrum(r_bdy):
    """DFT of the ghost-column residual r_j, j = 1..n in tangential order.

    Frequencies alpha_k = -pi + 2 pi k / n, k = 1..n; coefficients
    R_k = (1/n) sum_j r_j exp(-i alpha_k j).  Real input makes the spectrum
    conjugate-symmetric, so the report keeps 2|R_k| on alpha in (0, pi) and
    the ratio of the peak above pi/2 to the peak below.
    """
    r = np.asarray(r_bdy, dtype=float)
    n = len(r)
    if n < 4:
        raise ValueError("need at least 4 boundary samples")
    k = np.arange(1, n + 1)
    alphas_full = -math.pi + 2.0 * math.pi * k / n
    j = np.arange(1, n + 1)
    phases = np.exp(-1j * np.outer(alphas_full, j))
    coeffs = phases @ r / n

    keep = (alphas_full > 0.0) & (alphas_full < math.pi)
    alphas = alphas_full[keep]
    amplitudes = 2.0 * np.abs(coeffs[keep])

    high = alphas > math.pi / 2.0
    low = alphas < math.pi / 2.0
    if not np.any(high) or not np.any(low):
        raise ValueError("too few samples to split the frequency ranges")
    high_low = float(amplitudes[high].max() / amplitudes[low].max())
    energy = float((amplitudes[high] ** 2).sum() / (amplitudes[low] ** 2).sum())
    return SpectrumReport(
        alphas=alphas,
        amplitudes=amplitudes,
        coefficients=coeffs,
        alphas_full=alphas_full,
        high_low_ratio=high_low,
        energy_high_low_ratio=energy,
    )


def ghost_residual_probe(cls, spec, dtau, seed=42, sweeps=DEFAULT_SWEEPS):
    """Ghost residuals after `sweeps` smoothing steps on the homogeneous
    problem from the seeded random field, in ghost (lexicographic) order."""
    dtau_vec = np.full(cls.n_ghosts, float(dtau))
    plan = SweepPlan(cls, spec, dtau_vec)
    rng = XorShift64Star(seed)
    u = rng.uniform_symmetric(cls.grid.n_nodes)
    u[cls.eliminated_idx] = 0.0
    u[cls.inactive_idx] = 0.0
    f = np.zeros(cls.grid.n_nodes)
    g = np.zeros(cls.n_ghosts)
    smooth(u, f, g, plan, sweeps)
    return plan.residual_ghost(u, g)
