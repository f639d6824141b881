"""Greedy selection of well-separated indices on a cycle.

Given non-negative integers ``m_0..m_{N-1}`` and ``Q >= 1``, pick ``J'`` with

    |j - k|_* >= Q (sqrt m_j + sqrt m_k)       for distinct j, k in J'
    sum_j m_j <= 5 Q sum_{j in J'} m_j^{3/2}

where ``|j - k|_*`` is the distance on the cycle of length ``N``.  Indices
are 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SeparationInstance",
    "SeparationResult",
    "cyclic_distance",
    "select_separated",
    "verify_selection",
]

_REL_TOL = 1e-12


@dataclass(frozen=True)
class SeparationInstance:
    m: tuple[int, ...]
    Q: float

    def __post_init__(self):
        m = tuple(int(v) for v in self.m)
        if len(m) < 1:
            raise ValueError("need at least one index")
        if any(v < 0 for v in m):
            raise ValueError("m must be non-negative")
        if not self.Q >= 1:
            raise ValueError("Q must be >= 1")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "Q", float(self.Q))

    @property
    def N(self) -> int:
        return len(self.m)


@dataclass(frozen=True)
class SeparationResult:
    J_prime: tuple[int, ...]
    separation_ok: bool
    mass_ratio: float

    @property
    def certificate(self) -> dict:
        return {"separation_ok": self.separation_ok, "mass_ratio": self.mass_ratio}


def cyclic_distance(j: int, k: int, N: int) -> int:
    d = abs(j - k) % N
    return min(d, N - d)


def _mass_sides(m: np.ndarray, Q: float, chosen) -> tuple[float, float]:
    lhs = float(m.sum())
    rhs = 5.0 * Q * math.fsum(float(m[j]) ** 1.5 for j in chosen)
    return lhs, rhs


def _mass_ratio(lhs: float, rhs: float) -> float:
    if rhs == 0:
        return 0.0 if lhs == 0 else math.inf
    return lhs / rhs


def select_separated(instance: SeparationInstance) -> SeparationResult:
    """Greedy construction: repeatedly claim the unclaimed index with the
    largest ``m`` (smallest index on ties) and retire every unclaimed index
    at cyclic distance strictly between 0 and ``2 Q sqrt(m)`` from it.

    The running mass inequality is asserted after every step.
    """
    m = np.asarray(instance.m, dtype=np.int64)
    N, Q = instance.N, instance.Q
    covered = np.zeros(N, dtype=bool)
    idx = np.arange(N)
    chosen = []
    covered_mass = 0
    chosen_mass = 0.0
    while not covered.all():
        free = np.flatnonzero(~covered)
        # argmax returns the first maximum, i.e. the smallest index
        j = int(free[np.argmax(m[free])])
        chosen.append(j)
        d = np.abs(idx - j) % N
        d = np.minimum(d, N - d)
        new = (~covered) & (((d > 0) & (d < 2.0 * Q * math.sqrt(m[j]))) | (idx == j))
        covered_mass += int(m[new].sum())
        covered |= new
        chosen_mass += float(m[j]) ** 1.5
        assert covered_mass <= 5.0 * Q * chosen_mass * (1 + _REL_TOL), "greedy mass step"
    J = tuple(sorted(chosen))
    lhs, rhs = _mass_sides(m, Q, J)
    return SeparationResult(J, _separated(instance, J), _mass_ratio(lhs, rhs))


def _separated(instance: SeparationInstance, J) -> bool:
    N, Q, m = instance.N, instance.Q, instance.m
    roots = [math.sqrt(m[j]) for j in J]
    for a in range(len(J)):
        for b in range(a + 1, len(J)):
            need = Q * (roots[a] + roots[b])
            if cyclic_distance(J[a], J[b], N) < need * (1 - _REL_TOL):
                return False
    return True


def verify_selection(instance: SeparationInstance, J_prime) -> bool:
    """Independent check of both conclusions for a proposed ``J'``."""
    J = [int(j) for j in J_prime]
    if len(set(J)) != len(J) or any(not 0 <= j < instance.N for j in J):
        return False
    if not _separated(instance, J):
        return False
    lhs, rhs = _mass_sides(np.asarray(instance.m, dtype=np.int64), instance.Q, J)
    return lhs <= rhs * (1 + _REL_TOL)
