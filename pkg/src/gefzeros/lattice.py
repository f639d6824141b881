"""Perturbed integer lattice ``{w + zeta_w : w in Z^2}`` with stretched
exponential displacement tails ``P{|zeta_w| > t} = exp(-t^nu)``.

Used as a comparison law for counting fluctuations.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .gaussian_core import SeedLineage, uniforms

__all__ = [
    "LatticeConfig",
    "lattice_margin",
    "escape_bound",
    "lattice_sites",
    "sample_perturbed_lattice",
    "lattice_count",
    "lattice_counts",
    "write_points_csv",
]

R_MAX_LIMIT = 64.0
ESCAPE_TARGET = 1e-9
MAX_SITES = 4_000_000


@dataclass(frozen=True)
class LatticeConfig:
    nu: float
    R_max: float
    lineage: SeedLineage

    def __post_init__(self):
        if not self.nu > 0:
            raise ValueError("nu must be positive")
        if not 0 < self.R_max <= R_MAX_LIMIT:
            raise ValueError(f"R_max must lie in (0, {R_MAX_LIMIT:g}]")


def escape_bound(nu: float, R: float, margin: float) -> float:
    """Upper bound on the expected number of sites with ``|w| > R + margin``
    whose perturbed point lands in the closed disk of radius ``R``.

    Uses ``#{|w| <= s} <= pi (s + 1/sqrt 2)^2`` and summation by parts.
    """
    def integrand(t):
        return math.pi * (R + t + 0.7072) ** 2 * nu * t ** (nu - 1) * math.exp(-t ** nu)

    # split at the bulk of the tail so quad sees the peak
    mid = margin + 4.0 * max(1.0, math.log(1e20) ** (1.0 / nu))
    a, _ = integrate.quad(integrand, margin, mid, limit=200)
    b, _ = integrate.quad(integrand, mid, np.inf, limit=200)
    return a + b


def lattice_margin(nu: float, R_max: float) -> float:
    """``(log(size * 1e9))^{1/nu}`` with ``size`` the number of sites used,
    widened if needed until :func:`escape_bound` is at most ``1e-9``."""
    m = 1.0
    for _ in range(50):
        size = math.pi * (R_max + m + 1.0) ** 2
        new = math.log(size / ESCAPE_TARGET) ** (1.0 / nu)
        if abs(new - m) < 1e-9:
            break
        m = new
    while escape_bound(nu, R_max, m) > ESCAPE_TARGET:
        m *= 1.05
    return m


def lattice_sites(radius: float) -> np.ndarray:
    """Integer points with ``|w| <= radius`` as complex numbers, row-major order."""
    n = int(math.floor(radius))
    side = 2 * n + 1
    if side * side > MAX_SITES:
        raise ValueError("lattice too large for desk scale; increase nu or lower R_max")
    x, y = np.meshgrid(np.arange(-n, n + 1), np.arange(-n, n + 1), indexing="ij")
    w = (x + 1j * y).ravel().astype(np.complex128)
    return w[np.abs(w) <= radius]


def sample_perturbed_lattice(config: LatticeConfig, *, zero_displacement: bool = False
                             ) -> np.ndarray:
    """One realisation of the perturbed lattice near the disk of radius ``R_max``.

    Displacement moduli come from the inverse CDF ``t = (-log u)^{1/nu}``
    and angles are uniform, all from the config's lineage.  Returns complex
    points, one per site with ``|w| <= R_max + margin``.
    """
    sites = lattice_sites(config.R_max + lattice_margin(config.nu, config.R_max))
    if zero_displacement:
        return sites.copy()
    n = sites.size
    u = uniforms(config.lineage, 2 * n, open_left=True)
    t = (-np.log(u[:n])) ** (1.0 / config.nu)
    return sites + t * np.exp(2j * np.pi * u[n:])


def lattice_count(points, R: float) -> int:
    """Number of points with modulus at most ``R``."""
    return int(np.count_nonzero(np.abs(np.asarray(points)) <= R))


def lattice_counts(nu: float, R_list, n_samples: int, lineage: SeedLineage,
                   indices=None) -> np.ndarray:
    """Counts ``n(R)`` for each ``R`` in ``R_list``, shape ``(n, len(R_list))``.

    Sample ``i`` uses ``lineage.child(i)``, so rows do not depend on which
    other indices are run.
    """
    R_list = [float(R) for R in R_list]
    R_max = max(R_list)
    indices = np.arange(n_samples) if indices is None else np.asarray(indices)
    out = np.empty((len(indices), len(R_list)), dtype=np.int64)
    for j, i in enumerate(indices):
        pts = sample_perturbed_lattice(LatticeConfig(nu, R_max, lineage.child(int(i))))
        mod = np.abs(pts)
        out[j] = [np.count_nonzero(mod <= R) for R in R_list]
    return out


def write_points_csv(points, path) -> None:
    """Write points as ``x,y`` rows with a header line."""
    pts = np.asarray(points)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for p in pts:
            writer.writerow([repr(float(p.real)), repr(float(p.imag))])
