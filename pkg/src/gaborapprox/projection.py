"""The truncated projector Pi_D u = sum_{|(x_m, xi_n)| <= D} (u, Psi*_{m,n}) Psi_{m,n}."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dual import RichardsonConfig, dual_coefficients
from .frame import CoefficientMap, synthesis
from .lattice import enumerate_ball
from .mixtures import GUARD_WIDTHS, GaussianMixture, grid_norm, sample_to_grid
from .sobolev import NormSpec, weighted_sobolev_norm


@dataclass(frozen=True)
class ProjectionSpec:
    """Truncation radius ``D`` (phase-space units) and the dual solver settings.

    Any ``D > 0`` is accepted: the ball always contains the origin. The
    ``k^{1/2} D > sqrt(pi)`` rule (a ball reaching past the origin) is enforced
    by :func:`gaborapprox.lattice.enumerate_ball` in strict mode only.
    """

    D: float
    solver: RichardsonConfig = field(default_factory=RichardsonConfig)

    def __post_init__(self):
        if not (math.isfinite(self.D) and self.D > 0):
            raise ValueError(f"D must be positive, got {self.D}")


def project_with_coefficients(u: GaussianMixture, spec: ProjectionSpec) -> tuple[GaussianMixture, CoefficientMap]:
    coeffs = dual_coefficients(u, spec.D, spec.solver)
    return synthesis(coeffs), coeffs


def project(u: GaussianMixture, spec: ProjectionSpec) -> GaussianMixture:
    """``Pi_D u`` as a mixture supported on the ball of radius ``D``."""
    return project_with_coefficients(u, spec)[0]


def approximation_error(u: GaussianMixture, spec: ProjectionSpec, p: int = 0) -> float:
    """Weighted ``Hhat^p_k`` norm of ``u - Pi_D u``."""
    return weighted_sobolev_norm(u - project(u, spec), NormSpec(p))


def l2_error_grid(u: GaussianMixture, spec: ProjectionSpec) -> float:
    """Grid-L2 cross-check of ``||u - Pi_D u||``."""
    return grid_norm(sample_to_grid(u - project(u, spec)))


def _sphere_rule(d: int, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Directions on S^{d-1} and weights summing to its area."""
    if d == 1:
        return np.array([[-1.0], [1.0]]), np.array([1.0, 1.0])
    phi = 2 * math.pi * np.arange(nodes) / nodes
    if d == 2:
        return np.stack([np.cos(phi), np.sin(phi)], axis=1), np.full(nodes, 2 * math.pi / nodes)
    t, wt = np.polynomial.legendre.leggauss(max(nodes // 2, 8))
    st = np.sqrt(1 - t * t)
    dirs = np.stack([np.multiply.outer(st, np.cos(phi)).ravel(), np.multiply.outer(st, np.sin(phi)).ravel(),
                     np.repeat(t, nodes)], axis=1)
    return dirs, np.repeat(wt, nodes) * (2 * math.pi / nodes)


def far_field_norm(v: GaussianMixture, radius: float, nodes_per_panel: int = 16) -> float:
    """``||v||_{L2(|x| > radius)}``.

    Radial composite Gauss-Legendre on ``[radius, r_max]`` times a spectrally
    accurate rule on the sphere; a tensor grid would be only first-order
    accurate because of the sharp cut at ``|x| = radius``.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if not v.terms:
        return 0.0
    params = v.params
    d, sk = params.d, math.sqrt(params.k)
    Q, _ = v.arrays()
    reach = float(np.max(np.linalg.norm(Q[:, :d], axis=1))) * params.spacing
    r_max = max(radius, reach) + GUARD_WIDTHS / sk
    if r_max <= radius:
        return 0.0
    # |v|^2 oscillates at up to twice the largest frequency
    omega = 2 * params.k * v.max_frequency() * math.sqrt(d)
    panel = min(0.5 / sk, math.pi / max(omega, 1e-300))
    panels = max(1, math.ceil((r_max - radius) / panel))
    t, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    edges = np.linspace(radius, r_max, panels + 1)
    half = 0.5 * np.diff(edges)
    r = (0.5 * (edges[:-1] + edges[1:])[:, None] + half[:, None] * t[None, :]).ravel()
    wr = (half[:, None] * w[None, :]).ravel() * r ** (d - 1)
    dirs, wd = _sphere_rule(d, math.ceil(r_max * (omega + 12 * sk)) + 16)
    total = []
    for ri, wi in zip(r, wr):
        vals = np.abs(v.evaluate(ri * dirs)) ** 2
        total.append(wi * math.fsum(vals * wd))
    return math.sqrt(math.fsum(total))


def dual_tail_norm(u: GaussianMixture, spec: ProjectionSpec, outer_radius: float) -> float:
    """l2 norm of the dual coefficients with ``D < |(x_m, xi_n)| <= outer_radius``."""
    coeffs = dual_coefficients(u, outer_radius, spec.solver)
    inside = set(enumerate_ball(u.params, spec.D, strict=False))
    _, v = CoefficientMap(u.params, {i: c for i, c in coeffs.entries.items() if i not in inside}).arrays()
    return math.sqrt(math.fsum(np.abs(v) ** 2))
