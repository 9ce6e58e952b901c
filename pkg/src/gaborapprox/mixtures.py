"""Test-function representations: closed-form Gaussian mixtures and sampled grids."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .lattice import FrameParams, LatticeIndex, check_index, index_array
from .quadrature import complex_fsum, uniform_axis
from .states import gram_block, state_values

PRUNE_EPS = 1e-16
# e^{-pi/4 * 50} ~ 1e-17: pairs beyond 7 index units are below double rounding
R_GRAM = 7.0
GUARD_WIDTHS = 8.0


class ParamsMismatchError(ValueError):
    """Two objects built on different FrameParams were combined."""


class TruncationRiskError(ValueError):
    """A grid does not leave the required guard band around a mixture."""


class GridGeometryError(ValueError):
    """Two grids do not share the same nodes."""


@dataclass(frozen=True)
class GaussianMixture:
    """Finite sum ``sum_q w_q Psi_{k,q}``; ``terms`` maps LatticeIndex -> complex weight."""

    params: FrameParams
    terms: Mapping[LatticeIndex, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for idx, w in self.terms.items():
            check_index(self.params, idx)
            w = complex(w)
            if not (math.isfinite(w.real) and math.isfinite(w.imag)):
                raise ValueError(f"non-finite weight at {idx}")
            if abs(w) >= PRUNE_EPS:
                clean[idx] = w
        object.__setattr__(self, "terms", dict(sorted(clean.items())))

    @classmethod
    def single(cls, params: FrameParams, idx: LatticeIndex, weight: complex = 1.0) -> "GaussianMixture":
        return cls(params, {idx: weight})

    @classmethod
    def from_arrays(cls, params: FrameParams, Q: np.ndarray, weights: np.ndarray,
                    prune_eps: float = PRUNE_EPS) -> "GaussianMixture":
        terms = {}
        for q, w in zip(np.asarray(Q).tolist(), np.asarray(weights).tolist()):
            if abs(w) >= prune_eps:
                terms[LatticeIndex.from_vector(q)] = w
        return cls(params, terms)

    def __len__(self):
        return len(self.terms)

    @property
    def indices(self) -> list[LatticeIndex]:
        return list(self.terms)

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """``(Q, w)``: index rows of shape ``(N, 2d)`` and weights of shape ``(N,)``."""
        if not self.terms:
            return np.zeros((0, 2 * self.params.d), dtype=np.int64), np.zeros(0, dtype=complex)
        return index_array(self.terms), np.fromiter(self.terms.values(), dtype=complex, count=len(self.terms))

    def scaled(self, alpha: complex) -> "GaussianMixture":
        return GaussianMixture(self.params, {i: alpha * w for i, w in self.terms.items()})

    def __add__(self, other: "GaussianMixture") -> "GaussianMixture":
        return mixture_combine(1.0, self, 1.0, other)

    def __sub__(self, other: "GaussianMixture") -> "GaussianMixture":
        return mixture_combine(1.0, self, -1.0, other)

    def max_center(self) -> float:
        """Largest ``|x^{k,m}|_inf`` over the terms (0 for the empty mixture)."""
        Q, _ = self.arrays()
        if len(Q) == 0:
            return 0.0
        return float(np.max(np.abs(Q[:, : self.params.d]))) * self.params.spacing

    def max_frequency(self) -> float:
        Q, _ = self.arrays()
        if len(Q) == 0:
            return 0.0
        return float(np.max(np.abs(Q[:, self.params.d:]))) * self.params.spacing

    def evaluate(self, x, a: Sequence[int] | None = None) -> np.ndarray:
        """Point values (or ``a``-th derivative) at points of shape ``(P, d)``."""
        pts = np.asarray(x, dtype=float).reshape(-1, self.params.d)
        Q, w = self.arrays()
        if len(Q) == 0:
            return np.zeros(len(pts), dtype=complex)
        out = np.zeros(len(pts), dtype=complex)
        # chunk over states to bound memory
        step = max(1, 2_000_000 // max(len(pts), 1))
        for s in range(0, len(Q), step):
            out += w[s:s + step] @ state_values(self.params, Q[s:s + step], pts, a)
        return out

    def to_json(self) -> str:
        return json.dumps(mixture_to_dict(self))

    @classmethod
    def from_json(cls, text: str) -> "GaussianMixture":
        return mixture_from_dict(json.loads(text))


def _check_params(u, v) -> None:
    if u.params != v.params:
        raise ParamsMismatchError(f"{u.params} != {v.params}")


def mixture_combine(alpha: complex, u: GaussianMixture, beta: complex, v: GaussianMixture,
                    prune_eps: float = PRUNE_EPS) -> GaussianMixture:
    """Termwise ``alpha u + beta v``; merged weights below ``prune_eps`` are dropped."""
    _check_params(u, v)
    terms = {i: alpha * w for i, w in u.terms.items()}
    for i, w in v.terms.items():
        terms[i] = terms.get(i, 0.0) + beta * w
    return GaussianMixture(u.params, {i: w for i, w in terms.items() if abs(w) >= prune_eps})


def mixture_inner_product(u: GaussianMixture, v: GaussianMixture, r_gram: float = R_GRAM) -> complex:
    """``(u, v) = sum_{a,b} w_a conj(w_b) (Psi_a, Psi_b)``, dropping pairs beyond ``r_gram``."""
    _check_params(u, v)
    Qu, wu = u.arrays()
    Qv, wv = v.arrays()
    if len(Qu) == 0 or len(Qv) == 0:
        return 0.0 + 0.0j
    G = gram_block(Qu, Qv, r_gram)
    return complex_fsum(wu[:, None] * G * np.conj(wv)[None, :])


def mixture_to_dict(u: GaussianMixture) -> dict:
    return {
        "k": u.params.k,
        "d": u.params.d,
        "terms": [
            {"m": list(i.m), "n": list(i.n), "re": w.real, "im": w.imag}
            for i, w in u.terms.items()
        ],
    }


def mixture_from_dict(obj: Mapping) -> GaussianMixture:
    params = FrameParams(obj["k"], obj["d"])
    terms = {}
    for t in obj.get("terms", []):
        idx = LatticeIndex(tuple(t["m"]), tuple(t["n"]))
        terms[idx] = terms.get(idx, 0.0) + complex(t["re"], t["im"])
    return GaussianMixture(params, terms)


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid ``[-L, L]^d`` with ``nodes_per_axis`` nodes per axis."""

    half_width: float
    nodes_per_axis: int

    def __post_init__(self):
        if self.nodes_per_axis < 2:
            raise ValueError("nodes_per_axis must be >= 2")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")

    @property
    def spacing(self) -> float:
        return 2 * self.half_width / (self.nodes_per_axis - 1)

    def axis(self) -> np.ndarray:
        return uniform_axis(self.half_width, self.nodes_per_axis)


def default_grid(params: FrameParams, mixtures: Iterable[GaussianMixture] = (), extra_width: float = 0.0,
                 max_frequency: float | None = None) -> GridSpec:
    """Grid wide enough for all mixtures plus a ``8 k^{-1/2}`` guard band.

    Spacing is at most ``0.25 k^{-1/2}`` and small enough that products of two
    states (frequency difference up to twice the largest ``|xi_n|``) are resolved.
    """
    mixtures = list(mixtures)
    sk = math.sqrt(params.k)
    center = max([u.max_center() for u in mixtures] + [0.0])
    xi_max = max([u.max_frequency() for u in mixtures] + [0.0])
    if max_frequency is not None:
        xi_max = max(xi_max, max_frequency)
    L = center + GUARD_WIDTHS / sk + extra_width
    h = 0.25 / sk
    # trapezoid aliasing error ~ exp(-(2 pi/h - omega)^2 / 4k); keep exponent >= ~60
    h = min(h, 2 * math.pi / (2 * params.k * xi_max + 16 * sk))
    nodes = int(math.ceil(2 * L / h)) + 1
    return GridSpec(L, nodes)


@dataclass(frozen=True)
class QuadratureGrid:
    params: FrameParams
    spec: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        shape = (self.spec.nodes_per_axis,) * self.params.d
        if self.samples.shape != shape:
            raise GridGeometryError(f"samples have shape {self.samples.shape}, expected {shape}")

    @property
    def axes(self) -> list[np.ndarray]:
        return [self.spec.axis()] * self.params.d

    @property
    def cell_volume(self) -> float:
        return self.spec.spacing ** self.params.d

    def points(self) -> np.ndarray:
        return grid_points(self.params, self.spec)

    def __add__(self, other: "QuadratureGrid") -> "QuadratureGrid":
        _check_geometry(self, other)
        return QuadratureGrid(self.params, self.spec, self.samples + other.samples)

    def scaled(self, alpha: complex) -> "QuadratureGrid":
        return QuadratureGrid(self.params, self.spec, alpha * self.samples)

    def to_csv(self) -> str:
        """CSV dump with columns ``x1..xd, re, im`` (LF line endings)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{j + 1}" for j in range(self.params.d)] + ["re", "im"])
        for p, v in zip(self.points(), self.samples.ravel()):
            writer.writerow([repr(float(c)) for c in p] + [repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()


def grid_points(params: FrameParams, spec: GridSpec) -> np.ndarray:
    ax = spec.axis()
    mesh = np.meshgrid(*([ax] * params.d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def trapezoid_weights(spec: GridSpec, d: int) -> np.ndarray:
    """Flattened composite-trapezoid weights (halved endpoints) times the cell volume."""
    w1 = np.ones(spec.nodes_per_axis)
    w1[0] = w1[-1] = 0.5
    w = w1
    for _ in range(d - 1):
        w = np.multiply.outer(w, w1)
    return w.ravel() * spec.spacing**d


def zero_grid(params: FrameParams, spec: GridSpec) -> QuadratureGrid:
    return QuadratureGrid(params, spec, np.zeros((spec.nodes_per_axis,) * params.d, dtype=complex))


def check_guard_band(params: FrameParams, spec: GridSpec, centers: float) -> None:
    need = centers + GUARD_WIDTHS / math.sqrt(params.k)
    if spec.half_width < need * (1 - 1e-12):
        raise TruncationRiskError(
            f"grid half-width {spec.half_width:.4g} leaves less than 8 k^(-1/2) around "
            f"centers at {centers:.4g}; need L >= {need:.4g}"
        )


def sample_to_grid(u: GaussianMixture, spec: GridSpec | None = None, a: Sequence[int] | None = None) -> QuadratureGrid:
    """Point values of ``u`` (or of its ``a``-th derivative) on a tensor grid."""
    if spec is None:
        spec = default_grid(u.params, [u])
    check_guard_band(u.params, spec, u.max_center())
    vals = u.evaluate(grid_points(u.params, spec), a)
    return QuadratureGrid(u.params, spec, vals.reshape((spec.nodes_per_axis,) * u.params.d))


def _check_geometry(f: QuadratureGrid, g: QuadratureGrid) -> None:
    if f.params != g.params or f.spec != g.spec:
        raise GridGeometryError("grids do not share geometry")


def grid_inner_product(f: QuadratureGrid, g: QuadratureGrid) -> complex:
    """Composite trapezoid approximation of ``int f conj(g)``.

    Endpoint weights are halved; with the guard band the samples there are
    negligible anyway, and for Gaussians the uniform rule is spectrally accurate.
    """
    _check_geometry(f, g)
    w = np.ones(f.spec.nodes_per_axis)
    w[0] = w[-1] = 0.5
    prod = f.samples * np.conj(g.samples)
    for ax in range(f.params.d):
        shape = [1] * f.params.d
        shape[ax] = -1
        prod = prod * w.reshape(shape)
    return complex_fsum(prod) * f.cell_volume


def grid_norm(f: QuadratureGrid) -> float:
    return math.sqrt(max(grid_inner_product(f, f).real, 0.0))
