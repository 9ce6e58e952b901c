"""Quadrature substrates: tensor Gauss-Hermite rules, uniform grids, discrete F_k."""

from __future__ import annotations

import itertools
import math
from typing import Callable, Sequence

import numpy as np


def complex_fsum(values) -> complex:
    """Compensated sum of complex values (order-insensitive to rounding)."""
    v = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(v.real), math.fsum(v.imag))


def hermite_rule(nodes: int, center: Sequence[float], scale: float):
    """Tensor Gauss-Hermite rule for ``int f(x) dx`` around ``center``.

    The weight ``exp(-|x-c|^2/scale^2)`` is divided back out, so the rule
    integrates plain functions that are Gaussian-like on the ``scale`` length.
    """
    t, w = np.polynomial.hermite.hermgauss(nodes)
    d = len(center)
    pts = np.array(list(itertools.product(t, repeat=d)))
    wts = np.prod(np.array(list(itertools.product(w, repeat=d))), axis=1)
    x = np.asarray(center, dtype=float)[None, :] + scale * pts
    wts = wts * scale**d * np.exp(np.sum(pts * pts, axis=1))
    return x, wts


def gauss_hermite_integral(
    f: Callable[[np.ndarray], np.ndarray],
    center: Sequence[float],
    scale: float,
    nodes: int = 64,
    rtol: float = 1e-13,
    max_nodes: int = 256,
) -> complex:
    """Adaptive tensor Gauss-Hermite integral: doubles the node count until two
    successive estimates agree to ``rtol``."""
    prev = None
    n = nodes
    while True:
        x, w = hermite_rule(n, center, scale)
        val = complex_fsum(w * f(x))
        if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1e-300):
            return val
        if n >= max_nodes:
            return val
        prev = val
        n *= 2


def uniform_axis(half_width: float, nodes: int, center: float = 0.0) -> np.ndarray:
    if nodes < 2:
        raise ValueError("need at least two nodes per axis")
    return np.linspace(center - half_width, center + half_width, nodes)


def weighted_fourier(samples: np.ndarray, axes: Sequence[np.ndarray], k: float):
    """Discrete approximation of ``F_k v(xi) = (k/2pi)^{d/2} int v(x) exp(-i k x.xi) dx``.

    ``samples`` lives on the tensor grid ``axes`` (uniform, even node counts are
    not required). Returns ``(freq_axes, values)`` with frequencies in the same
    units as ``xi``.
    """
    values = np.asarray(samples, dtype=complex)
    freq_axes = []
    for ax_id, x in enumerate(axes):
        N = len(x)
        h = x[1] - x[0]
        dxi = 2 * math.pi / (N * h * k)
        ell = np.arange(N) - N // 2
        xi = ell * dxi
        # sum_j v_j exp(-i k (x0 + j h) xi_l) with xi_l = (l - N//2) dxi
        j = np.arange(N)
        pre = np.exp(1j * math.pi * j * 2 * (N // 2) / N)
        shape = [1] * values.ndim
        shape[ax_id] = N
        values = np.fft.fft(values * pre.reshape(shape), axis=ax_id)
        post = h * np.exp(-1j * k * x[0] * xi) * math.sqrt(k / (2 * math.pi))
        values = values * post.reshape(shape)
        freq_axes.append(xi)
    return freq_axes, values
