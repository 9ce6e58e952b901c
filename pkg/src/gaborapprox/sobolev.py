"""Sobolev norms H^p_k and the weighted norms

    ||v||^2 = sum_{[a] <= p} sum_{q=0}^{p-[a]} k^{-2[a]} || |x|^q d^a v ||^2

evaluated from analytic derivatives sampled on a quadrature grid, plus a
Fourier-side evaluation of H^p_k for cross-checking.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lattice import DimensionError, FrameParams
from .mixtures import GaussianMixture, GridSpec, QuadratureGrid, default_grid, grid_points, check_guard_band, trapezoid_weights
from .quadrature import weighted_fourier

MAX_NORM_ORDER = 4


class AliasingWarning(RuntimeWarning):
    """Spectral mass near the edge of the discrete frequency band."""


@dataclass(frozen=True)
class NormSpec:
    p: int
    grid: GridSpec | None = None

    def __post_init__(self):
        if not 0 <= self.p <= MAX_NORM_ORDER:
            raise ValueError(f"norm order must be in [0, {MAX_NORM_ORDER}], got {self.p}")


@dataclass(frozen=True)
class CoordinateProduct:
    """Exact representation of ``x^e u`` for a mixture ``u`` and exponent vector ``e``."""

    base: GaussianMixture
    powers: tuple[int, ...]

    @property
    def params(self) -> FrameParams:
        return self.base.params

    def max_center(self) -> float:
        return self.base.max_center()

    def max_frequency(self) -> float:
        return self.base.max_frequency()

    def evaluate(self, x, a: Sequence[int] | None = None) -> np.ndarray:
        pts = np.asarray(x, dtype=float).reshape(-1, self.params.d)
        d = self.params.d
        a = tuple(a) if a is not None else (0,) * d
        out = np.zeros(len(pts), dtype=complex)
        # Leibniz over each axis: d^b x^e = e!/(e-b)! x^{e-b}
        for b in itertools.product(*[range(min(ai, ei) + 1) for ai, ei in zip(a, self.powers)]):
            coef = 1.0
            mono = np.ones(len(pts))
            for j in range(d):
                coef *= math.comb(a[j], b[j]) * math.perm(self.powers[j], b[j])
                mono = mono * pts[:, j] ** (self.powers[j] - b[j])
            rest = tuple(ai - bi for ai, bi in zip(a, b))
            out += coef * mono * self.base.evaluate(pts, rest)
        return out


def multiply_by_coordinate(u, j: int) -> CoordinateProduct:
    """``x_j u`` as a mixture times a monomial (closed form, no resampling)."""
    base = u.base if isinstance(u, CoordinateProduct) else u
    powers = list(u.powers) if isinstance(u, CoordinateProduct) else [0] * base.params.d
    if not 0 <= j < base.params.d:
        raise DimensionError(f"axis {j} out of range for d={base.params.d}")
    powers[j] += 1
    return CoordinateProduct(base, tuple(powers))


def multi_indices(d: int, p: int):
    """All ``a`` in N^d with ``[a] <= p``."""
    return [a for a in itertools.product(range(p + 1), repeat=d) if sum(a) <= p]


def _grid_for(u, spec: NormSpec | None, p: int) -> GridSpec:
    if spec is not None and spec.grid is not None:
        return spec.grid
    # the |x|^{2q} weight pushes mass outward by ~sqrt(q/k)
    extra = math.sqrt(p / u.params.k) if p else 0.0
    return default_grid(u.params, [u], extra_width=extra)


def _norm_terms(u, p: int, grid: GridSpec, weighted: bool) -> float:
    params = u.params
    check_guard_band(params, grid, u.max_center())
    pts = grid_points(params, grid)
    w = trapezoid_weights(grid, params.d)
    r2 = np.sum(pts * pts, axis=1)
    terms = []
    for a in multi_indices(params.d, p):
        vals = np.abs(u.evaluate(pts, a)) ** 2 * w
        scale = params.k ** (-2 * sum(a))
        qmax = p - sum(a) if weighted else 0
        for q in range(qmax + 1):
            terms.append(scale * math.fsum(vals * r2**q))
    return math.fsum(terms)


def weighted_sobolev_norm(u, spec: NormSpec | int) -> float:
    """Weighted norm of a mixture (or :class:`CoordinateProduct`) of order ``spec.p``."""
    spec = spec if isinstance(spec, NormSpec) else NormSpec(int(spec))
    return math.sqrt(_norm_terms(u, spec.p, _grid_for(u, spec, spec.p), weighted=True))


def sobolev_norm(u, spec: NormSpec | int) -> float:
    """Unweighted ``H^p_k`` norm ``(sum_{[a]<=p} k^{-2[a]} ||d^a u||^2)^{1/2}``."""
    spec = spec if isinstance(spec, NormSpec) else NormSpec(int(spec))
    return math.sqrt(_norm_terms(u, spec.p, _grid_for(u, spec, 0), weighted=False))


def sobolev_norm_fourier(f: QuadratureGrid, p: int, tail_tol: float = 1e-8) -> float:
    """``H^p_k`` norm as ``(sum_{[a]<=p} ||xi^a F_k f||^2)^{1/2}`` on a discrete transform.

    Emits :class:`AliasingWarning` when more than ``tail_tol`` of the spectral
    mass sits in the outer eighth of the frequency band.
    """
    if not 0 <= p <= MAX_NORM_ORDER:
        raise ValueError(f"norm order must be in [0, {MAX_NORM_ORDER}], got {p}")
    params = f.params
    freq_axes, F = weighted_fourier(f.samples, f.axes, params.k)
    dxi = freq_axes[0][1] - freq_axes[0][0]
    mesh = np.meshgrid(*freq_axes, indexing="ij")
    power = np.abs(F) ** 2 * dxi**params.d
    total_mass = math.fsum(power.ravel())
    if total_mass > 0:
        edge = 0.75 * max(np.max(np.abs(ax)) for ax in freq_axes)
        outer = np.zeros(F.shape, dtype=bool)
        for m in mesh:
            outer |= np.abs(m) > edge
        tail = math.fsum(power[outer].ravel()) / total_mass
        if tail > tail_tol:
            warnings.warn(f"spectral tail mass {tail:.2e} exceeds {tail_tol:.0e}; grid may alias", AliasingWarning)
    terms = []
    for a in multi_indices(params.d, p):
        mono = np.ones(F.shape)
        for j, aj in enumerate(a):
            mono = mono * mesh[j] ** (2 * aj)
        terms.append(math.fsum((mono * power).ravel()))
    return math.sqrt(math.fsum(terms))
