"""Desk-scale experiments: convergence sweeps, coefficient decay, dual-Gram decay,
the distant-state sharpness construction and frame-bound tables."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dual import RichardsonConfig, RichardsonError, dual_coefficients, dual_gram_entry
from .frame import analysis, estimate_frame_bounds
from .lattice import FrameParams, LatticeIndex, dilate, enumerate_ball, index_norm
from .mixtures import GaussianMixture, mixture_inner_product
from .projection import ProjectionSpec, project
from .sobolev import MAX_NORM_ORDER, NormSpec, weighted_sobolev_norm

DECAY_MARGIN = 12.0


# -- test functions ---------------------------------------------------------

def coherent_state(params: FrameParams, m: Sequence[int] | None = None, n: Sequence[int] | None = None) -> GaussianMixture:
    d = params.d
    idx = LatticeIndex(tuple(m) if m is not None else (0,) * d, tuple(n) if n is not None else (0,) * d)
    return GaussianMixture.single(params, idx)


def random_mixture(params: FrameParams, terms: int = 3, radius: float = 2.0, seed: int = 0) -> GaussianMixture:
    """Unit-norm mixture of ``terms`` distinct states with index norm ``<= radius``."""
    rng = np.random.default_rng(seed)
    pool = enumerate_ball(params, radius * params.spacing, strict=False)
    picks = rng.choice(len(pool), size=min(terms, len(pool)), replace=False)
    weights = rng.standard_normal(len(picks)) + 1j * rng.standard_normal(len(picks))
    u = GaussianMixture(params, {pool[i]: w for i, w in zip(sorted(picks), weights)})
    return u.scaled(1 / math.sqrt(mixture_inner_product(u, u).real))


def distant_state(params: FrameParams, D: float) -> GaussianMixture:
    """``Psi_{k,m*,0}`` with ``m* = (2 ceil(k^{1/2} D), 0, ..., 0)``."""
    m = (2 * math.ceil(math.sqrt(params.k) * D),) + (0,) * (params.d - 1)
    return coherent_state(params, m)


TEST_FUNCTIONS: dict[str, Callable[..., GaussianMixture]] = {
    "psi00": lambda params, seed=0, D=None: coherent_state(params),
    "mixture": lambda params, seed=0, D=None: random_mixture(params, 3, 2.0, seed),
    "distant": lambda params, seed=0, D=None: distant_state(params, D),
}


# -- fitting ----------------------------------------------------------------

def fit_loglog(x: Sequence[float], y: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line through ``(log x, log y)``: ``(slope, intercept, r_squared)``."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    if len(lx) < 2:
        return math.nan, math.nan, math.nan
    A = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


# -- convergence sweep ------------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    params: FrameParams
    D_values: tuple[float, ...]
    p: int = 0
    r: int = 1
    test_function: str = "psi00"
    seed: int = 0
    solver: RichardsonConfig = field(default_factory=RichardsonConfig)
    jobs: int = 1

    def __post_init__(self):
        D = tuple(float(v) for v in self.D_values)
        if len(D) < 3:
            raise ValueError("a sweep needs at least 3 D values")
        if any(b <= a for a, b in zip(D, D[1:])):
            raise ValueError("D values must be strictly ascending")
        if D[0] <= 0:
            raise ValueError("D values must be positive")
        if self.p < 0 or self.r < 0 or self.p + self.r > MAX_NORM_ORDER:
            raise ValueError(f"need p, r >= 0 and p + r <= {MAX_NORM_ORDER}")
        if self.test_function not in TEST_FUNCTIONS:
            raise ValueError(f"unknown test function {self.test_function!r}; choose from {sorted(TEST_FUNCTIONS)}")
        object.__setattr__(self, "D_values", D)


@dataclass
class ReportRow:
    D: float
    error: float
    norm_ratio: float
    slope_running: float
    wall_time_ms: float
    failure: str | None = None


@dataclass
class SweepResult:
    rows: list[ReportRow]
    slope: float
    r_squared: float

    @property
    def errors(self) -> list[float]:
        return [row.error for row in self.rows]


def _sweep_cell(cfg: SweepConfig, u: GaussianMixture, reference: float, D: float) -> ReportRow:
    t0 = time.perf_counter()
    try:
        err = weighted_sobolev_norm(u - project(u, ProjectionSpec(D, cfg.solver)), NormSpec(cfg.p))
        failure = None
    except RichardsonError as exc:
        err, failure = math.nan, str(exc)
    ms = 1000 * (time.perf_counter() - t0)
    return ReportRow(D, err, err * D**cfg.r / reference, math.nan, ms, failure)


def run_convergence_sweep(cfg: SweepConfig) -> SweepResult:
    """``||u - Pi_D u||_{Hhat^p}`` for each D; slope fitted over the upper half of D."""
    u = TEST_FUNCTIONS[cfg.test_function](cfg.params, seed=cfg.seed, D=cfg.D_values[-1])
    reference = weighted_sobolev_norm(u, NormSpec(cfg.p + cfg.r))
    with ThreadPoolExecutor(max_workers=max(1, cfg.jobs)) as pool:
        rows = list(pool.map(lambda D: _sweep_cell(cfg, u, reference, D), cfg.D_values))
    ok = [row for row in rows if row.failure is None and row.error > 0]
    for i, row in enumerate(rows):
        prefix = [r for r in rows[: i + 1] if r in ok]
        if len(prefix) >= 2:
            row.slope_running = fit_loglog([r.D for r in prefix], [r.error for r in prefix])[0]
    half = cfg.D_values[len(cfg.D_values) // 2:]
    upper = [r for r in ok if r.D in half]
    slope, _, r2 = fit_loglog([r.D for r in upper], [r.error for r in upper]) if len(upper) >= 2 else (math.nan, 0, math.nan)
    return SweepResult(rows, slope, r2)


# -- decay reports ----------------------------------------------------------

@dataclass
class DecayRow:
    p: int
    weighted_sum: float
    norm_sq: float
    ratio: float


def _decay_window(u: GaussianMixture, margin: float) -> list[LatticeIndex]:
    return dilate(u.indices, margin, u.params.d)


def run_coefficient_decay(u: GaussianMixture, ps: Sequence[int], margin: float = DECAY_MARGIN) -> list[DecayRow]:
    """``S_p = sum (|x_m|^2 + |xi_n|^2)^p |(u, Psi)|^2`` against ``||u||^2_{Hhat^p}``."""
    if not u.terms:
        return [DecayRow(p, 0.0, 0.0, math.nan) for p in ps]
    coeffs = analysis(u, _decay_window(u, margin))
    rows = []
    for p in ps:
        s = coeffs.weighted_sum(p)
        nsq = weighted_sobolev_norm(u, NormSpec(p)) ** 2
        rows.append(DecayRow(p, s, nsq, s / nsq))
    return rows


def run_dual_decay(u: GaussianMixture, ps: Sequence[int], solver: RichardsonConfig | None = None,
                   margin: float = DECAY_MARGIN) -> list[DecayRow]:
    """Same as :func:`run_coefficient_decay` with the dual coefficients ``(u, Psi*)``."""
    if not u.terms:
        return [DecayRow(p, 0.0, 0.0, math.nan) for p in ps]
    reach = max(index_norm(u.params, i) for i in u.indices) + margin
    coeffs = dual_coefficients(u, reach * u.params.spacing, solver)
    rows = []
    for p in ps:
        s = coeffs.weighted_sum(p)
        nsq = weighted_sobolev_norm(u, NormSpec(p)) ** 2
        rows.append(DecayRow(p, s, nsq, s / nsq))
    return rows


def dual_gram_profile(params: FrameParams, count: int = 6, solver: RichardsonConfig | None = None) -> list[float]:
    """``|(Psi*_0, Psi*_q)|`` along ``q = (m=(j,0..), n=0)`` for ``j < count``."""
    origin = LatticeIndex.origin(params.d)
    out = []
    for j in range(count):
        q = LatticeIndex((j,) + (0,) * (params.d - 1), (0,) * params.d)
        out.append(abs(dual_gram_entry(params, origin, q, solver)))
    return out


# -- sharpness --------------------------------------------------------------

@dataclass
class SharpnessReport:
    D: float
    p: int
    r: int
    m_star: tuple[int, ...]
    u_norm_p: float
    u_norm_pr: float
    projection_norm: float
    error: float
    ratio: float


def run_sharpness(params: FrameParams, p: int, r: int, D: float, solver: RichardsonConfig | None = None) -> SharpnessReport:
    """Distant state ``u = Psi_{k,m*,0}``: error, norms and ``error D^r / ||u||_{Hhat^{p+r}}``."""
    if D < 1 / math.sqrt(params.k):
        raise ValueError("need D >= k^(-1/2)")
    u = distant_state(params, D)
    proj = project(u, ProjectionSpec(D, solver or RichardsonConfig()))
    np_ = weighted_sobolev_norm(u, NormSpec(p))
    npr = weighted_sobolev_norm(u, NormSpec(p + r))
    err = weighted_sobolev_norm(u - proj, NormSpec(p))
    pn = weighted_sobolev_norm(proj, NormSpec(p)) if proj.terms else 0.0
    return SharpnessReport(D, p, r, u.indices[0].m, np_, npr, pn, err, err * D**r / npr)


# -- frame bounds -----------------------------------------------------------

@dataclass
class FrameBoundsRow:
    radius: int
    alpha_sq: float
    beta_sq: float
    gamma: float


def run_frame_bounds(params: FrameParams, radii: Sequence[int]) -> list[FrameBoundsRow]:
    out = []
    for R in radii:
        b = estimate_frame_bounds(params, int(R))
        out.append(FrameBoundsRow(int(R), b.alpha_sq, b.beta_sq, b.gamma))
    return out


def as_records(rows) -> list[dict]:
    return [asdict(r) for r in rows]
