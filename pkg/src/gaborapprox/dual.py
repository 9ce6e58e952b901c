"""Applying S_k = (T_k* T_k)^{-1} by Richardson iteration, and dual-frame quantities.

Dual states ``Psi* = S_k Psi`` have no closed form; they only exist through
``richardson_dual_apply``. Results for single states are memoised.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .frame import CoefficientMap, FrameBounds, analysis, estimate_frame_bounds
from .lattice import FrameParams, LatticeIndex, dilate, enumerate_ball, index_array
from .mixtures import PRUNE_EPS, R_GRAM, GaussianMixture, mixture_inner_product
from .states import gram_block

SAFETY_MARGIN = 0.05
# Truncating the frame operator to a window leaves slowly contracting boundary
# modes; the residual they hold decays like e^{-1.6 margin}. 18 index units put
# that floor near 1e-14 (1-d). In d >= 2 such windows get large, so callers
# there usually trade accuracy for a smaller margin.
SUPPORT_MARGIN = 18.0


class RichardsonError(RuntimeError):
    def __init__(self, message: str, residual: float, iters: int):
        super().__init__(f"{message}: residual {residual:.3e} after {iters} iterations")
        self.residual = residual
        self.iters = iters


@lru_cache(maxsize=None)
def default_bounds(d: int) -> FrameBounds:
    """Frame bounds estimated at lattice radius 8 (they do not depend on k)."""
    return estimate_frame_bounds(FrameParams(1.0, d), lattice_radius=8)


@dataclass(frozen=True)
class RichardsonConfig:
    bounds: FrameBounds | None = None
    tol: float = 1e-10
    max_iter: int = 500
    support_margin: float = SUPPORT_MARGIN
    safety: float = SAFETY_MARGIN
    r_gram: float = R_GRAM

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.support_margin < 0:
            raise ValueError("support_margin must be nonnegative")

    def resolved_bounds(self, d: int) -> FrameBounds:
        return self.bounds if self.bounds is not None else default_bounds(d)

    def step(self, d: int) -> float:
        b = self.resolved_bounds(d).widened(self.safety)
        if not b.gamma < 1:
            raise ValueError(f"invalid frame bounds: gamma = {b.gamma} >= 1")
        return b.relaxation


@dataclass
class RichardsonResult:
    v: GaussianMixture
    residual: float
    iters: int
    history: list[float] = field(default_factory=list)


def frame_matrix(Q: np.ndarray, r_gram: float = R_GRAM, chunk: int = 512) -> sp.csr_matrix:
    """Sparse matrix of ``T*T`` on mixtures supported on the rows of ``Q``:
    coefficients of ``T*T u`` are ``H @ c_u`` with ``H[b, a] = (Psi_a, Psi_b)``."""
    blocks = []
    for s in range(0, len(Q), chunk):
        # rows b, columns a
        G = gram_block(Q[s:s + chunk], Q, r_gram)
        blocks.append(sp.csr_matrix(np.conj(G)))
    return sp.vstack(blocks, format="csr")


class SolverWindow:
    """Fixed index window on which the frame operator is truncated."""

    def __init__(self, params: FrameParams, indices: Sequence[LatticeIndex], r_gram: float = R_GRAM):
        self.params = params
        self.indices = list(indices)
        self.Q = index_array(self.indices).reshape(-1, 2 * params.d)
        self.position = {idx: i for i, idx in enumerate(self.indices)}
        self.H = frame_matrix(self.Q, r_gram)

    @classmethod
    def around(cls, params: FrameParams, seeds: Iterable[LatticeIndex], margin: float,
               r_gram: float = R_GRAM) -> "SolverWindow":
        return cls(params, dilate(seeds, margin, params.d), r_gram)

    def vector(self, u: GaussianMixture) -> np.ndarray:
        c = np.zeros(len(self.indices), dtype=complex)
        for idx, w in u.terms.items():
            try:
                c[self.position[idx]] += w
            except KeyError:
                raise ValueError(f"mixture term {idx} lies outside the solver window") from None
        return c

    def mixture(self, c: np.ndarray, prune_eps: float = PRUNE_EPS) -> GaussianMixture:
        return GaussianMixture.from_arrays(self.params, self.Q, c, prune_eps)

    def solve(self, c0: np.ndarray, cfg: RichardsonConfig) -> tuple[np.ndarray, float, int, list[float]]:
        """Richardson iteration ``v <- v + tau (u - T*T v)`` on coefficient vectors.

        The residual is measured through analysis, ``||T r|| / ||T u||``: the
        plain L2 norm of a mixture cannot be evaluated below ~sqrt(eps) from its
        coefficients, since they drift along the (redundant) null space of the
        Gram matrix. Both norms agree up to the frame bounds.
        """
        tau = cfg.step(self.params.d)
        H = self.H
        t0 = np.linalg.norm(H @ c0)
        v = np.zeros_like(c0)
        history = []
        if t0 == 0:
            return v, 0.0, 0, history
        for it in range(cfg.max_iter + 1):
            r = c0 - H @ v
            res = float(np.linalg.norm(H @ r) / t0)
            history.append(res)
            if res <= cfg.tol:
                return v, res, it, history
            if it == cfg.max_iter:
                break
            v = v + tau * r
        raise RichardsonError("Richardson iteration did not reach tolerance", history[-1], cfg.max_iter)


def richardson_dual_apply(u: GaussianMixture, cfg: RichardsonConfig | None = None,
                          window: SolverWindow | None = None) -> RichardsonResult:
    """Approximate ``S_k u`` as a mixture on a window around the support of ``u``."""
    cfg = cfg or RichardsonConfig()
    if not u.terms:
        raise ValueError("cannot apply the dual to the zero mixture")
    if window is None:
        window = SolverWindow.around(u.params, u.indices, cfg.support_margin, cfg.r_gram)
    c, res, iters, hist = window.solve(window.vector(u), cfg)
    return RichardsonResult(window.mixture(c), res, iters, hist)


def dual_coefficients(u: GaussianMixture, D: float, cfg: RichardsonConfig | None = None) -> CoefficientMap:
    """``(u, Psi*_idx) = (S_k u, Psi_idx)`` for all ``idx`` in the ball of radius ``D``.

    The solver window extends ``support_margin`` index units beyond both the
    ball and the support of ``u``.
    """
    cfg = cfg or RichardsonConfig()
    ball = enumerate_ball(u.params, D, strict=False)
    if not u.terms:
        return CoefficientMap(u.params, {})
    window = SolverWindow.around(u.params, sorted(set(ball) | set(u.indices)), cfg.support_margin, cfg.r_gram)
    c, _, _, _ = window.solve(window.vector(u), cfg)
    # analysis coefficients of v on the window are H @ c
    values = window.H @ c
    return CoefficientMap(u.params, {idx: values[window.position[idx]] for idx in ball})


class _DualCache:
    """Memo of ``S_k Psi_idx``; concurrent reads and inserts are serialised."""

    def __init__(self):
        self._lock = threading.Lock()
        self._store: dict = {}

    def get(self, params: FrameParams, idx: LatticeIndex, cfg: RichardsonConfig) -> GaussianMixture:
        key = (params, idx, cfg)
        with self._lock:
            hit = self._store.get(key)
        if hit is not None:
            return hit
        v = richardson_dual_apply(GaussianMixture.single(params, idx), cfg).v
        with self._lock:
            # first writer wins so content is deterministic
            return self._store.setdefault(key, v)

    def clear(self):
        with self._lock:
            self._store.clear()


dual_state_cache = _DualCache()


def dual_state(params: FrameParams, idx: LatticeIndex, cfg: RichardsonConfig | None = None) -> GaussianMixture:
    return dual_state_cache.get(params, idx, cfg or RichardsonConfig())


def dual_gram_entry(params: FrameParams, a: LatticeIndex, b: LatticeIndex,
                    cfg: RichardsonConfig | None = None) -> complex:
    """``(Psi*_a, Psi*_b)``."""
    cfg = cfg or RichardsonConfig()
    return mixture_inner_product(dual_state(params, a, cfg), dual_state(params, b, cfg), cfg.r_gram)


def dual_primal_overlap(params: FrameParams, a: LatticeIndex, b: LatticeIndex,
                        cfg: RichardsonConfig | None = None) -> complex:
    """``(Psi*_a, Psi_b) = (S_k Psi_a, Psi_b)``."""
    cfg = cfg or RichardsonConfig()
    return analysis(dual_state(params, a, cfg), [b], cfg.r_gram)[b]
