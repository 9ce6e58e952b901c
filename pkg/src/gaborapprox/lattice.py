"""Index arithmetic on the phase-space lattice sqrt(pi/k) * Z^{2d}."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

MAX_DIMENSION = 3


class DimensionError(ValueError):
    """An index or point does not match the dimension of its FrameParams."""


class EmptyBallError(ValueError):
    """The truncation ball does not reach past the origin (needs k^{1/2} D >= sqrt(pi))."""


@dataclass(frozen=True)
class FrameParams:
    """Scaling ``k >= 1`` and space dimension ``d`` of the frame."""

    k: float = 1.0
    d: int = 1

    def __post_init__(self):
        if not math.isfinite(self.k) or self.k < 1:
            raise ValueError(f"scaling k must be >= 1, got {self.k}")
        if int(self.d) != self.d or not 1 <= self.d <= MAX_DIMENSION:
            raise ValueError(f"dimension d must be an integer in [1, {MAX_DIMENSION}], got {self.d}")
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "d", int(self.d))

    @property
    def spacing(self) -> float:
        """Lattice step sqrt(pi / k), shared by positions and frequencies."""
        return math.sqrt(math.pi / self.k)


@dataclass(frozen=True, order=True)
class LatticeIndex:
    """Integer label ``[m, n]`` of one coherent state."""

    m: tuple[int, ...]
    n: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(v) for v in self.m)
        n = tuple(int(v) for v in self.n)
        if len(m) != len(n):
            raise DimensionError(f"m and n must have equal length, got {len(m)} and {len(n)}")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)

    @classmethod
    def origin(cls, d: int = 1) -> "LatticeIndex":
        return cls((0,) * d, (0,) * d)

    @classmethod
    def from_vector(cls, q: Sequence[int]) -> "LatticeIndex":
        """Build from the concatenated integer vector ``[m, n]``."""
        q = tuple(int(v) for v in q)
        if len(q) % 2:
            raise DimensionError("concatenated index must have even length")
        d = len(q) // 2
        return cls(q[:d], q[d:])

    @property
    def d(self) -> int:
        return len(self.m)

    @property
    def vector(self) -> tuple[int, ...]:
        return self.m + self.n

    def squared_norm(self) -> int:
        return sum(v * v for v in self.vector)

    def __add__(self, other: "LatticeIndex") -> "LatticeIndex":
        return LatticeIndex.from_vector([a + b for a, b in zip(self.vector, other.vector)])

    def __sub__(self, other: "LatticeIndex") -> "LatticeIndex":
        return LatticeIndex.from_vector([a - b for a, b in zip(self.vector, other.vector)])


@dataclass(frozen=True)
class PhasePoint:
    x: tuple[float, ...]
    xi: tuple[float, ...]

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.x + self.xi):
            raise ValueError("phase point entries must be finite")


def check_index(params: FrameParams, idx: LatticeIndex) -> None:
    if idx.d != params.d:
        raise DimensionError(f"index has dimension {idx.d}, frame has d={params.d}")


def lattice_point(params: FrameParams, idx: LatticeIndex) -> PhasePoint:
    """Phase-space point ``sqrt(pi/k) * [m, n]`` labelled by ``idx``."""
    check_index(params, idx)
    s = params.spacing
    return PhasePoint(tuple(s * v for v in idx.m), tuple(s * v for v in idx.n))


def index_norm(params: FrameParams, idx: LatticeIndex) -> float:
    """Euclidean norm ``(|x^{k,m}|^2 + |xi^{k,n}|^2)^{1/2}`` of the lattice point."""
    check_index(params, idx)
    return params.spacing * math.sqrt(idx.squared_norm())


def index_radius(params: FrameParams, D: float) -> float:
    """Phase-space radius ``D`` expressed in integer index units."""
    return D / params.spacing


def _integer_ball(dim: int, radius: float) -> list[tuple[int, ...]]:
    r = int(math.floor(radius + 1e-12))
    bound = radius * radius * (1 + 1e-12)
    out = []
    for q in itertools.product(range(-r, r + 1), repeat=dim):
        if sum(v * v for v in q) <= bound:
            out.append(q)
    return out


def enumerate_ball(params: FrameParams, D: float, strict: bool = True) -> list[LatticeIndex]:
    """All lattice indices with ``index_norm <= D``, in lexicographic order.

    Parameters
    ----------
    params : FrameParams
    D : float
        Phase-space radius.
    strict : bool
        Require the summation set to reach past the origin, i.e.
        ``k^{1/2} D >= sqrt(pi)`` (equality admits the four nearest
        neighbours). With ``strict=False`` any ``D >= 0`` is accepted and the
        ball always contains the origin.
    """
    if not math.isfinite(D) or D < 0:
        raise ValueError(f"radius D must be finite and nonnegative, got {D}")
    if strict and not math.sqrt(params.k) * D >= math.sqrt(math.pi) * (1 - 1e-12):
        raise EmptyBallError(
            f"need k^(1/2) D > sqrt(pi) (the ball must reach past the origin); got k^(1/2) D = {math.sqrt(params.k) * D:.6g}"
        )
    qs = _integer_ball(2 * params.d, index_radius(params, D))
    return [LatticeIndex.from_vector(q) for q in sorted(qs)]


def index_array(indices: Iterable[LatticeIndex]) -> np.ndarray:
    """Stack indices into an integer array of shape ``(N, 2d)``."""
    rows = [idx.vector for idx in indices]
    if not rows:
        return np.zeros((0, 0), dtype=np.int64)
    return np.asarray(rows, dtype=np.int64)


def dilate(indices: Iterable[LatticeIndex], radius: float, d: int) -> list[LatticeIndex]:
    """Indices within ``radius`` index units of any of ``indices``, sorted."""
    offsets = np.asarray(_integer_ball(2 * d, radius), dtype=np.int64)
    centers = index_array(indices)
    if centers.size == 0:
        return []
    pts = (centers[:, None, :] + offsets[None, :, :]).reshape(-1, 2 * d)
    pts = np.unique(pts, axis=0)
    return [LatticeIndex.from_vector(q) for q in pts.tolist()]
