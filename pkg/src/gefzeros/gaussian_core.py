"""Seeded complex Gaussian coefficients and variance profiles.

Random streams are addressed by ``(master_seed, sample_index, stream_tag)``.
Each triple keys a Philox-4x64 counter-based generator:

    key = (master_seed mod 2**64, (sample_index << 8) | stream_tag)

so draws for one sample never depend on how many other samples were drawn or
in what order.  Standard complex Gaussians are produced from pairs of raw
64-bit words ``(x1, x2)`` by

    u1 = 1 - (x1 >> 11) * 2**-53        (in (0, 1])
    u2 = (x2 >> 11) * 2**-53            (in [0, 1))
    zeta = sqrt(-log u1) * exp(2j*pi*u2)

which is Box-Muller written directly in polar form: ``|zeta|**2 = -log u1`` is
exactly Exp(1) and the phase is uniform, i.e. ``zeta = (g1 + i g2)/sqrt(2)``
with ``g1, g2`` independent standard normals.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

__all__ = [
    "ProfileKind",
    "VarianceProfile",
    "SeedLineage",
    "profile_value",
    "profile_array",
    "complex_normals",
    "uniforms",
    "sample_coefficients",
    "coefficient_batch",
    "STREAM_COEFFS",
    "STREAM_AUX",
]

# stream tags; coefficient draws always use STREAM_COEFFS so every module sees
# the same f for a given (master_seed, sample_index)
STREAM_COEFFS = 0
STREAM_AUX = 1

_MASK64 = (1 << 64) - 1
_TWO_M53 = 2.0 ** -53


class ProfileKind(str, Enum):
    CONSTANT_ONE = "constant_one"
    JLM_BANDED = "jlm_banded"
    EXPLICIT_TABLE = "explicit_table"


@dataclass(frozen=True)
class VarianceProfile:
    """Coefficient standard deviations ``a_k`` of a Gaussian Taylor series.

    Use the constructors :meth:`constant`, :meth:`jlm` and :meth:`table`
    rather than filling fields by hand.  For the banded profile the index
    sets are stored as inclusive ranges ``(lo, hi)``.
    """

    kind: ProfileKind = ProfileKind.CONSTANT_ONE
    R: float | None = None
    alpha: float | None = None
    j_minus: tuple[int, int] | None = None
    j_plus: tuple[int, int] | None = None
    values: tuple[float, ...] | None = None

    def __post_init__(self):
        kind = ProfileKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ProfileKind.JLM_BANDED:
            if self.R is None or self.alpha is None:
                raise ValueError("jlm_banded profile needs R and alpha")
            if self.j_minus is None or self.j_plus is None:
                raise ValueError("jlm_banded profile needs j_minus and j_plus")
            if self.R ** (self.alpha - 1.0) > 1.0:
                raise ValueError("R**(alpha-1) must not exceed 1")
            object.__setattr__(self, "j_minus", tuple(int(v) for v in self.j_minus))
            object.__setattr__(self, "j_plus", tuple(int(v) for v in self.j_plus))
        elif kind is ProfileKind.EXPLICIT_TABLE:
            if self.values is None:
                raise ValueError("explicit_table profile needs values")
            vals = tuple(float(v) for v in self.values)
            if any(v < 0 or not math.isfinite(v) for v in vals):
                raise ValueError("profile values must be finite and non-negative")
            object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls) -> "VarianceProfile":
        return cls(ProfileKind.CONSTANT_ONE)

    @classmethod
    def jlm(cls, R: float, alpha: float) -> "VarianceProfile":
        """Banded profile that pushes zeros out of the disk of radius ``R``.

        ``J_-`` is the ``N = floor(R)`` consecutive integers starting at
        ``ceil(R**2 - 2R) + 1`` and ``J_+`` the ``N`` integers starting at
        ``ceil(R**2 + R) + 1``.
        """
        if R < 2:
            raise ValueError("jlm_banded profile needs R >= 2")
        if not 0.5 < alpha < 1:
            raise ValueError("alpha must lie in (1/2, 1)")
        n = int(math.floor(R))
        lo_m = int(math.ceil(R * R - 2 * R)) + 1
        lo_p = int(math.ceil(R * R + R)) + 1
        return cls(
            ProfileKind.JLM_BANDED,
            R=float(R),
            alpha=float(alpha),
            j_minus=(lo_m, lo_m + n - 1),
            j_plus=(lo_p, lo_p + n - 1),
        )

    @classmethod
    def table(cls, values: Sequence[float]) -> "VarianceProfile":
        return cls(ProfileKind.EXPLICIT_TABLE, values=tuple(values))

    @property
    def tilt(self) -> float:
        """``R**(alpha-1)``, the relative variance shift on the bands."""
        if self.kind is not ProfileKind.JLM_BANDED:
            return 0.0
        return self.R ** (self.alpha - 1.0)

    def special_indices(self) -> np.ndarray:
        """Indices where ``a_k != 1`` could hold (all indices for a table)."""
        if self.kind is ProfileKind.CONSTANT_ONE:
            return np.empty(0, dtype=np.int64)
        if self.kind is ProfileKind.JLM_BANDED:
            lo, hi = self.j_minus
            lo2, hi2 = self.j_plus
            return np.concatenate([np.arange(lo, hi + 1), np.arange(lo2, hi2 + 1)])
        return np.arange(len(self.values))

    def to_dict(self) -> dict:
        if self.kind is ProfileKind.CONSTANT_ONE:
            return {"kind": self.kind.value}
        if self.kind is ProfileKind.JLM_BANDED:
            return {
                "kind": self.kind.value,
                "R": self.R,
                "alpha": self.alpha,
                "j_minus": list(self.j_minus),
                "j_plus": list(self.j_plus),
            }
        return {"kind": self.kind.value, "values": list(self.values)}

    @classmethod
    def from_dict(cls, d: dict) -> "VarianceProfile":
        kind = ProfileKind(d["kind"])
        if kind is ProfileKind.CONSTANT_ONE:
            return cls.constant()
        if kind is ProfileKind.JLM_BANDED:
            return cls(kind, R=d["R"], alpha=d["alpha"],
                       j_minus=tuple(d["j_minus"]), j_plus=tuple(d["j_plus"]))
        return cls.table(d["values"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "VarianceProfile":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SeedLineage:
    master_seed: int
    sample_index: int = 0
    stream_tag: int = 0

    def __post_init__(self):
        if self.sample_index < 0:
            raise ValueError("sample_index must be non-negative")
        if not 0 <= self.stream_tag < 256:
            raise ValueError("stream_tag must be in [0, 256)")

    def key(self) -> tuple[int, int]:
        return (self.master_seed & _MASK64,
                ((self.sample_index << 8) | self.stream_tag) & _MASK64)

    def bit_generator(self) -> np.random.Philox:
        return np.random.Philox(key=np.array(self.key(), dtype=np.uint64))

    def child(self, sample_index: int, stream_tag: int | None = None) -> "SeedLineage":
        tag = self.stream_tag if stream_tag is None else stream_tag
        return SeedLineage(self.master_seed, sample_index, tag)

    def to_dict(self) -> dict:
        return {"master_seed": self.master_seed, "sample_index": self.sample_index,
                "stream_tag": self.stream_tag}


def uniforms(lineage: SeedLineage, n: int, *, open_left: bool = False) -> np.ndarray:
    """``n`` doubles from the lineage's stream, in [0, 1) or (0, 1]."""
    raw = lineage.bit_generator().random_raw(n)
    u = (raw >> np.uint64(11)).astype(np.float64) * _TWO_M53
    return 1.0 - u if open_left else u


def complex_normals(lineage: SeedLineage, n: int) -> np.ndarray:
    """``n`` i.i.d. standard complex Gaussians (density ``exp(-|w|^2)/pi``)."""
    raw = lineage.bit_generator().random_raw(2 * n).reshape(n, 2) if n else np.empty((0, 2), np.uint64)
    u = (raw >> np.uint64(11)).astype(np.float64) * _TWO_M53
    modulus = np.sqrt(-np.log1p(-u[:, 0]))
    return modulus * np.exp(2j * np.pi * u[:, 1])


def profile_value(profile: VarianceProfile, k: int) -> float:
    if k < 0:
        raise ValueError("k must be non-negative")
    kind = profile.kind
    if kind is ProfileKind.CONSTANT_ONE:
        return 1.0
    if kind is ProfileKind.EXPLICIT_TABLE:
        if k >= len(profile.values):
            raise IndexError("index beyond table")
        return profile.values[k]
    lo, hi = profile.j_minus
    if lo <= k <= hi:
        return math.sqrt(1.0 + profile.tilt)
    lo, hi = profile.j_plus
    if lo <= k <= hi:
        return math.sqrt(1.0 - profile.tilt)
    return 1.0


def profile_array(profile: VarianceProfile, K: int) -> np.ndarray:
    """``a_0 .. a_K`` as an array."""
    if profile.kind is ProfileKind.CONSTANT_ONE:
        return np.ones(K + 1)
    if profile.kind is ProfileKind.EXPLICIT_TABLE:
        if K >= len(profile.values):
            raise IndexError("index beyond table")
        return np.asarray(profile.values[: K + 1], dtype=float)
    a = np.ones(K + 1)
    t = profile.tilt
    lo, hi = profile.j_minus
    a[lo: hi + 1] = math.sqrt(1.0 + t)
    lo, hi = profile.j_plus
    a[lo: hi + 1] = math.sqrt(1.0 - t)
    return a


def sample_coefficients(profile: VarianceProfile, K: int, lineage: SeedLineage,
                        *, r_valid: float | None = None, eps_amp: float | None = None,
                        eps_prob: float | None = None):
    """Draw ``c_k = zeta_k * a_k`` for ``k = 0..K``.

    Returns a :class:`~gefzeros.series.SeriesSample`.  When ``r_valid`` is
    omitted the largest radius certified by ``K`` at the default error
    targets is used.
    """
    from .series import SeriesSample, certified_radius, DEFAULT_EPS_AMP, DEFAULT_EPS_PROB

    if K < 0:
        raise ValueError("K must be non-negative")
    eps_amp = DEFAULT_EPS_AMP if eps_amp is None else eps_amp
    eps_prob = DEFAULT_EPS_PROB if eps_prob is None else eps_prob
    coeffs = complex_normals(lineage, K + 1) * profile_array(profile, K)
    if r_valid is None:
        r_valid = certified_radius(K, eps_amp, eps_prob)
    return SeriesSample(coeffs, r_valid=r_valid, eps_amp=eps_amp, eps_prob=eps_prob,
                        lineage=lineage)


def coefficient_batch(profile: VarianceProfile, K: int, lineage: SeedLineage,
                      indices) -> np.ndarray:
    """Coefficient rows ``c_0..c_K`` for each sample index, shape ``(n, K+1)``.

    Row ``j`` equals ``sample_coefficients(profile, K, lineage.child(indices[j]))``.
    """
    indices = np.asarray(indices, dtype=np.int64)
    a = profile_array(profile, K)
    out = np.empty((indices.size, K + 1), dtype=np.complex128)
    for j, i in enumerate(indices):
        out[j] = complex_normals(lineage.child(int(i)), K + 1)
    return out * a
