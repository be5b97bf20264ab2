"""Sample-set containers shared by the regression and learning code.

A SpacetimeSample pins down one scalar channel observation site: where
the antenna sits, when it sampled, and which polarization it measures.
A SampleSet is an ordered collection of them; its ordering is the
row/column ordering of every matrix assembled from it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .kernel import KernelParams

#: polarization vectors must be unit length to this tolerance.
POLARIZATION_TOL = 1e-9

#: mixed-kernel weights must sit on the probability simplex to this
#: tolerance.
SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class SpacetimeSample:
    """One observation/prediction site: position [m], time [s], and a
    real unit polarization vector."""

    position: np.ndarray
    time: float = 0.0
    polarization: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "polarization", np.asarray(self.polarization, dtype=float).reshape(3))
        if not np.isfinite(self.position).all():
            raise ValueError("position must be finite")
        norm = np.linalg.norm(self.polarization)
        if abs(norm - 1.0) > POLARIZATION_TOL:
            raise ValueError(f"polarization must be unit length, got norm {norm!r}")


class SampleSet:
    """Ordered, non-empty collection of spacetime samples.

    Internally stored as dense arrays (positions ``(N, 3)``, times
    ``(N,)``, polarizations ``(N, 3)``) so kernel matrices can be
    assembled without per-entry Python overhead.
    """

    def __init__(self, samples: Sequence[SpacetimeSample]):
        samples = list(samples)
        if not samples:
            raise ValueError("SampleSet must contain at least one sample")
        self.positions = np.stack([s.position for s in samples])
        self.times = np.array([s.time for s in samples], dtype=float)
        self.polarizations = np.stack([s.polarization for s in samples])

    @classmethod
    def from_arrays(cls, positions, times=None, polarizations=None) -> "SampleSet":
        positions = np.asarray(positions, dtype=float).reshape(-1, 3)
        n = len(positions)
        if n == 0:
            raise ValueError("SampleSet must contain at least one sample")
        if times is None:
            times = np.zeros(n)
        times = np.broadcast_to(np.asarray(times, dtype=float), (n,)).copy()
        if polarizations is None:
            polarizations = np.array([0.0, 1.0, 0.0])
        polarizations = np.asarray(polarizations, dtype=float)
        if polarizations.ndim == 1:
            polarizations = np.broadcast_to(polarizations, (n, 3)).copy()
        norms = np.linalg.norm(polarizations, axis=1)
        if np.any(np.abs(norms - 1.0) > POLARIZATION_TOL):
            raise ValueError("all polarizations must be unit vectors")
        obj = cls.__new__(cls)
        obj.positions = positions
        obj.times = times
        obj.polarizations = polarizations
        return obj

    def __len__(self) -> int:
        return len(self.positions)

    def __getitem__(self, i: int) -> SpacetimeSample:
        return SpacetimeSample(self.positions[i], float(self.times[i]), self.polarizations[i])

    def permuted(self, order) -> "SampleSet":
        order = np.asarray(order, dtype=int)
        return SampleSet.from_arrays(
            self.positions[order], self.times[order], self.polarizations[order]
        )

    def translated(self, offset) -> "SampleSet":
        return SampleSet.from_arrays(
            self.positions + np.asarray(offset, dtype=float), self.times, self.polarizations
        )


@dataclass(frozen=True)
class MixedKernel:
    """Convex combination of correlation sub-kernels sharing one sigma^2."""

    sub_params: tuple
    weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sub_params", tuple(self.sub_params))
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float).reshape(-1))
        if len(self.sub_params) < 1:
            raise ValueError("MixedKernel needs at least one sub-kernel")
        if len(self.weights) != len(self.sub_params):
            raise ValueError("one weight per sub-kernel required")
        if np.any(self.weights < -SIMPLEX_TOL):
            raise ValueError("weights must be non-negative")
        if abs(self.weights.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"weights must sum to 1, got {self.weights.sum()!r}")
        s2 = {p.sigma2 for p in self.sub_params}
        if len(s2) > 1:
            raise ValueError("sub-kernels must share a single sigma2")

    @classmethod
    def single(cls, params: KernelParams) -> "MixedKernel":
        return cls((params,), np.array([1.0]))

    @property
    def n_kernels(self) -> int:
        return len(self.sub_params)

    @property
    def sigma2(self) -> float:
        return self.sub_params[0].sigma2
