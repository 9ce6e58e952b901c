"""Analysis T_k, synthesis T_k*, the frame operator T_k* T_k and frame-bound estimates."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .lattice import FrameParams, LatticeIndex, check_index, dilate, enumerate_ball, index_array, index_norm
from .mixtures import (
    R_GRAM,
    GaussianMixture,
    GUARD_WIDTHS,
    ParamsMismatchError,
    QuadratureGrid,
    TruncationRiskError,
    trapezoid_weights,
)
from .quadrature import complex_fsum
from .states import gram_block, state_values


class FrameBoundsConvergenceError(RuntimeError):
    def __init__(self, message: str, gap: float):
        super().__init__(f"{message} (last Rayleigh-quotient change {gap:.3e})")
        self.gap = gap


@dataclass(frozen=True)
class CoefficientMap:
    """Sparse sequence indexed by the lattice, e.g. ``(u, Psi_{m,n})``."""

    params: FrameParams
    entries: Mapping[LatticeIndex, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for idx, v in self.entries.items():
            check_index(self.params, idx)
            v = complex(v)
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise ValueError(f"non-finite coefficient at {idx}")
            clean[idx] = v
        object.__setattr__(self, "entries", dict(sorted(clean.items())))

    @classmethod
    def from_arrays(cls, params: FrameParams, Q: np.ndarray, values: np.ndarray) -> "CoefficientMap":
        return cls(params, {LatticeIndex.from_vector(q): v for q, v in zip(np.asarray(Q).tolist(), values.tolist())})

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, idx: LatticeIndex) -> complex:
        return self.entries.get(idx, 0.0 + 0.0j)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.entries:
            return np.zeros((0, 2 * self.params.d), dtype=np.int64), np.zeros(0, dtype=complex)
        return index_array(self.entries), np.fromiter(self.entries.values(), dtype=complex, count=len(self.entries))

    def norm(self) -> float:
        _, v = self.arrays()
        return math.sqrt(math.fsum(np.abs(v) ** 2))

    def restricted(self, indices: Iterable[LatticeIndex]) -> "CoefficientMap":
        keep = set(indices)
        return CoefficientMap(self.params, {i: v for i, v in self.entries.items() if i in keep})

    def weighted_sum(self, p: int) -> float:
        """``sum (|x^{k,m}|^2 + |xi^{k,n}|^2)^p |c_{m,n}|^2``."""
        Q, v = self.arrays()
        if len(Q) == 0:
            return 0.0
        r2 = self.params.spacing**2 * np.sum(Q * Q, axis=1)
        return math.fsum(r2**p * np.abs(v) ** 2)

    def to_json(self) -> str:
        return json.dumps({
            "k": self.params.k,
            "d": self.params.d,
            "entries": [{"m": list(i.m), "n": list(i.n), "re": v.real, "im": v.imag}
                        for i, v in self.entries.items()],
        })

    @classmethod
    def from_json(cls, text: str) -> "CoefficientMap":
        obj = json.loads(text)
        params = FrameParams(obj["k"], obj["d"])
        return cls(params, {LatticeIndex(tuple(e["m"]), tuple(e["n"])): complex(e["re"], e["im"])
                            for e in obj.get("entries", [])})


@dataclass(frozen=True)
class FrameBounds:
    """Frame constants: ``alpha_sq ||u||^2 <= sum |(u, Psi)|^2 <= beta_sq ||u||^2``."""

    alpha_sq: float
    beta_sq: float

    def __post_init__(self):
        if not (0 < self.alpha_sq <= self.beta_sq and math.isfinite(self.beta_sq)):
            raise ValueError(f"need 0 < alpha_sq <= beta_sq, got {self.alpha_sq}, {self.beta_sq}")

    @property
    def gamma(self) -> float:
        return (self.beta_sq - self.alpha_sq) / (self.beta_sq + self.alpha_sq)

    @property
    def relaxation(self) -> float:
        """Richardson step ``2 / (alpha^2 + beta^2)`` on the frame operator."""
        return 2.0 / (self.alpha_sq + self.beta_sq)

    def widened(self, margin: float = 0.05) -> "FrameBounds":
        return FrameBounds(self.alpha_sq * (1 - margin), self.beta_sq * (1 + margin))


def _window_array(params: FrameParams, window: Sequence[LatticeIndex]) -> np.ndarray:
    for idx in window:
        check_index(params, idx)
    return index_array(window).reshape(-1, 2 * params.d)


def analysis(u: GaussianMixture, window: Sequence[LatticeIndex], r_gram: float = R_GRAM) -> CoefficientMap:
    """Coefficients ``(u, Psi_idx)`` for every ``idx`` in ``window`` (closed form)."""
    W = _window_array(u.params, window)
    Qu, wu = u.arrays()
    if len(Qu) == 0 or len(W) == 0:
        return CoefficientMap(u.params, {i: 0.0 for i in window})
    vals = wu @ gram_block(Qu, W, r_gram)
    return CoefficientMap.from_arrays(u.params, W, vals)


def analysis_grid(f: QuadratureGrid, window: Sequence[LatticeIndex]) -> CoefficientMap:
    """Coefficients ``(f, Psi_idx)`` by trapezoid quadrature of sampled ``f``."""
    params = f.params
    W = _window_array(params, window)
    if len(W) == 0:
        return CoefficientMap(params, {})
    reach = float(np.max(np.abs(W[:, : params.d]))) * params.spacing
    need = reach + GUARD_WIDTHS / math.sqrt(params.k)
    if f.spec.half_width < need * (1 - 1e-12):
        raise TruncationRiskError(f"grid half-width {f.spec.half_width:.4g} < {need:.4g} needed for window")
    pts = f.points()
    fw = f.samples.ravel() * trapezoid_weights(f.spec, params.d)
    vals = np.empty(len(W), dtype=complex)
    step = max(1, 2_000_000 // len(pts))
    for s in range(0, len(W), step):
        # (f, Psi) = int f conj(Psi)
        block = np.conj(state_values(params, W[s:s + step], pts))
        vals[s:s + step] = block @ fw
    return CoefficientMap.from_arrays(params, W, vals)


def synthesis(c: CoefficientMap) -> GaussianMixture:
    """``T_k* c = sum c_idx Psi_idx``."""
    return GaussianMixture(c.params, dict(c.entries))


def frame_window(u: GaussianMixture, support_radius: float | None = None, r_gram: float = R_GRAM) -> list[LatticeIndex]:
    """Indices within ``r_gram`` index units of a center of ``u``, optionally capped
    to the phase-space ball of radius ``support_radius``."""
    window = dilate(u.indices, r_gram, u.params.d)
    if support_radius is not None:
        window = [i for i in window if index_norm(u.params, i) <= support_radius * (1 + 1e-12)]
    return window


def frame_apply(u: GaussianMixture, support_radius: float | None = None, r_gram: float = R_GRAM) -> GaussianMixture:
    """``(T_k* T_k) u = sum (u, Psi) Psi`` over the window reached by the Gram truncation."""
    if not u.terms:
        return GaussianMixture(u.params, {})
    return synthesis(analysis(u, frame_window(u, support_radius, r_gram), r_gram))


def _rayleigh_power(M: np.ndarray, iterations: int, rtol: float, rng) -> float:
    x = rng.standard_normal(M.shape[0]) + 1j * rng.standard_normal(M.shape[0])
    x /= np.linalg.norm(x)
    prev = None
    gap = math.inf
    for _ in range(iterations):
        y = M @ x
        rq = float(np.real(np.vdot(x, y)))
        if prev is not None:
            gap = abs(rq - prev) / max(abs(rq), 1e-300)
            if gap <= rtol:
                return rq
        prev = rq
        x = y / np.linalg.norm(y)
    raise FrameBoundsConvergenceError("power iteration did not converge", gap)


def compressed_frame_operator(params: FrameParams, lattice_radius: float, margin: float = R_GRAM,
                              rank_tol: float = 1e-9) -> np.ndarray:
    """Matrix of ``T_k* T_k`` compressed to span{Psi_q : |q| <= lattice_radius}.

    The span is given an orthonormal basis from the eigendecomposition of its
    Gram matrix; numerically null directions (relative eigenvalue below
    ``rank_tol``) are redundancy of the frame and are dropped. Analysis runs
    over the index ball dilated by ``margin``.
    """
    S = index_array(enumerate_ball(params, lattice_radius * params.spacing, strict=False))
    W = index_array(enumerate_ball(params, (lattice_radius + margin) * params.spacing, strict=False))
    G_sw = gram_block(S, W)
    G_ss = gram_block(S, S)
    # ||u||^2 = c^H conj(G_ss) c ; ||T u||^2 = c^H conj(G_sw) G_sw^T c
    lam, V = np.linalg.eigh(np.conj(G_ss))
    keep = lam > rank_tol * lam.max()
    E = V[:, keep] / np.sqrt(lam[keep])
    A = np.conj(G_sw) @ G_sw.T
    M = E.conj().T @ A @ E
    return 0.5 * (M + M.conj().T)


def estimate_frame_bounds(params: FrameParams, lattice_radius: int = 6, iterations: int = 50000,
                          rtol: float = 1e-10, seed: int = 0) -> FrameBounds:
    """Extremal Rayleigh quotients of the compressed frame operator.

    ``beta_sq`` comes from power iteration, ``alpha_sq`` from power iteration
    on ``beta_sq I - M`` (no linear solves). The top of the spectrum is dense,
    so the Rayleigh quotient creeps: a step change of ``rtol`` leaves an error
    of roughly ``1e3 * rtol``.
    """
    if lattice_radius < 4:
        raise ValueError("lattice_radius must be >= 4")
    if iterations < 50:
        raise ValueError("iterations must be >= 50")
    if params.d > 1:
        # states and lattice factor over coordinates, so T*T is the d-fold
        # tensor power of the 1-d frame operator and its extremal spectral
        # values are powers of the 1-d ones
        b1 = estimate_frame_bounds(FrameParams(params.k, 1), lattice_radius, iterations, rtol, seed)
        return FrameBounds(b1.alpha_sq**params.d, b1.beta_sq**params.d)
    M = compressed_frame_operator(params, lattice_radius)
    rng = np.random.default_rng(seed)
    beta_sq = _rayleigh_power(M, iterations, rtol, rng)
    shift = beta_sq * 1.01
    low = _rayleigh_power(shift * np.eye(len(M)) - M, iterations, rtol, rng)
    alpha_sq = shift - low
    return FrameBounds(alpha_sq, beta_sq)


def analysis_norm_sq(u: GaussianMixture, window: Sequence[LatticeIndex], r_gram: float = R_GRAM) -> float:
    _, v = analysis(u, window, r_gram).arrays()
    return math.fsum(np.abs(v) ** 2)


def frame_pairing(u: GaussianMixture, v: GaussianMixture, r_gram: float = R_GRAM) -> complex:
    """``(T_k* T_k u, v)`` without materialising the intermediate mixture."""
    if u.params != v.params:
        raise ParamsMismatchError(f"{u.params} != {v.params}")
    window = sorted(set(frame_window(u, None, r_gram)) | set(frame_window(v, None, r_gram)))
    _, cu = analysis(u, window, r_gram).arrays()
    _, cv = analysis(v, window, r_gram).arrays()
    return complex_fsum(cu * np.conj(cv))
