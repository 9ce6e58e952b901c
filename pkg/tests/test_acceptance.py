"""Acceptance criteria, each checked at its stated tolerance.

Every test prints one PASS/FAIL line (collected again in the terminal summary).
"""

import math
import time

import numpy as np

from gaborapprox import (
    FrameParams,
    GaussianMixture,
    LatticeIndex,
    ProjectionSpec,
    RichardsonConfig,
    dual_gram_entry,
    estimate_frame_bounds,
    far_field_norm,
    fourier_transform_state,
    mixture_inner_product,
    project,
    richardson_dual_apply,
    state_inner_product,
)
from gaborapprox.experiments import (
    SweepConfig,
    random_mixture,
    run_coefficient_decay,
    run_convergence_sweep,
    run_dual_decay,
    run_sharpness,
)
from gaborapprox.frame import analysis_norm_sq, frame_window
from gaborapprox.projection import l2_error_grid
from gaborapprox.quadrature import gauss_hermite_integral, weighted_fourier
from gaborapprox.states import GaussianState, evaluate_state_derivative

from oracles import psi

SQPI = math.sqrt(math.pi)


def idx(m, n):
    return LatticeIndex((m,), (n,))


def test_gram_modulus_law(acceptance):
    t0 = time.perf_counter()
    worst, pairs = 0.0, 0
    offsets = [(dm, dn) for dm in range(-4, 5) for dn in range(-4, 5) if dm * dm + dn * dn <= 18]
    for k in (1.0, 4.0):
        params = FrameParams(k, 1)
        for m in range(-3, 4):
            for n in range(-3, 4):
                for dm, dn in offsets:
                    v = state_inner_product(params, idx(m, n), idx(m + dm, n + dn))
                    worst = max(worst, abs(abs(v) - math.exp(-math.pi / 4 * (dm * dm + dn * dn))))
                    pairs += 1
    elapsed = time.perf_counter() - t0
    acceptance("1 Gram modulus law", worst <= 1e-12 and elapsed < 1.0,
               f"{pairs} pairs, max deviation {worst:.2e} (<= 1e-12), {elapsed:.2f} s (< 1 s)")


def test_closed_form_vs_quadrature(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240)
    worst, count = 0.0, 0
    while count < 100:
        k = (1.0, 4.0)[count % 2]
        a = rng.integers(-3, 4, size=2)
        delta = rng.integers(-3, 4, size=2)
        if delta @ delta > 9:
            continue
        b = a + delta
        s = math.sqrt(math.pi / k)
        mid = 0.5 * s * (a[0] + b[0])

        def integrand(x, a=a, b=b, k=k):
            x = x[:, 0]
            return psi(k, a[0], a[1], x) * np.conj(psi(k, b[0], b[1], x))

        ref = gauss_hermite_integral(integrand, [mid], 1 / math.sqrt(k))
        got = state_inner_product(FrameParams(k, 1), idx(*a), idx(*b))
        worst = max(worst, abs(got - ref) / abs(ref))
        count += 1
    elapsed = time.perf_counter() - t0
    acceptance("2 closed form vs quadrature", worst <= 1e-8 and elapsed < 30,
               f"100 pairs, max relative error {worst:.2e} (<= 1e-8), {elapsed:.1f} s (< 30 s)")


def test_derivative_recursion(acceptance):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(50):
        k = (1.0, 4.0)[i % 2]
        params = FrameParams(k, 1)
        m, n = rng.integers(-3, 4, size=2)
        state = GaussianState(params, idx(m, n))
        x = math.sqrt(math.pi / k) * m + rng.uniform(-2, 2) / math.sqrt(k)
        h = 1e-4 / math.sqrt(k)
        for p in (1, 2, 3):
            lower = evaluate_state_derivative(state, (p - 1,), np.array([x - h, x + h]))
            fd = (lower[1] - lower[0]) / (2 * h)
            exact = evaluate_state_derivative(state, (p,), x)
            worst = max(worst, abs(fd - exact) / abs(exact))
    acceptance("3 derivative recursion", worst <= 1e-6,
               f"50 points x p=1..3, max relative error {worst:.2e} (<= 1e-6)")


def test_fourier_identity(acceptance):
    N, L = 4096, 40.0
    x = np.linspace(-L, L, N, endpoint=False)
    labels = [(0, 0), (1, 0), (0, 1), (1, 1), (-1, 2), (2, -1), (3, 0), (0, -3), (-2, -2), (2, 3)]
    worst = 0.0
    for m, n in labels:
        freq, F = weighted_fourier(psi(1.0, m, n, x), [x], 1.0)
        ph, img = fourier_transform_state(FrameParams(1.0, 1), idx(m, n))
        ref = ph * psi(1.0, img.m[0], img.n[0], freq[0])
        worst = max(worst, np.linalg.norm(F - ref) / np.linalg.norm(ref))
    acceptance("4 Fourier identity", worst <= 1e-6,
               f"10 indices on 4096 nodes, max relative L2 error {worst:.2e} (<= 1e-6)")


def test_frame_reconstruction(acceptance):
    t0 = time.perf_counter()
    params = FrameParams(1.0, 1)
    pool = [q for q in (idx(m, n) for m in range(-2, 3) for n in range(-2, 3)) if q.squared_norm() <= 4]
    rng = np.random.default_rng(5)
    errs, iters, residuals = [], [], []
    for _ in range(10):
        picks = rng.choice(len(pool), size=rng.integers(1, 6), replace=False)
        u = GaussianMixture(params, {pool[i]: complex(*rng.normal(size=2)) for i in picks})
        u = u.scaled(1 / math.sqrt(mixture_inner_product(u, u).real))
        res = richardson_dual_apply(u, RichardsonConfig(tol=1e-10, max_iter=500))
        iters.append(res.iters)
        residuals.append(res.residual)
        errs.append(l2_error_grid(u, ProjectionSpec(6 * SQPI)))
    elapsed = time.perf_counter() - t0
    ok = max(errs) <= 1e-7 and max(residuals) <= 1e-10 and max(iters) <= 500 and elapsed < 120
    acceptance("5 frame reconstruction", ok,
               f"max L2 error {max(errs):.2e} (<= 1e-7); Richardson residual {max(residuals):.1e} "
               f"in <= {max(iters)} iterations (<= 500); {elapsed:.1f} s (< 120 s)")


def test_frame_bounds(acceptance):
    b6 = estimate_frame_bounds(FrameParams(1.0, 1), 6)
    b8 = estimate_frame_bounds(FrameParams(1.0, 1), 8)
    b4k = estimate_frame_bounds(FrameParams(4.0, 1), 8)
    radius_dev = max(abs(b8.alpha_sq / b6.alpha_sq - 1), abs(b8.beta_sq / b6.beta_sq - 1))
    k_dev = max(abs(b4k.alpha_sq / b8.alpha_sq - 1), abs(b4k.beta_sq / b8.beta_sq - 1))
    params = FrameParams(1.0, 1)
    rng = np.random.default_rng(6)
    worst_lo, worst_hi = math.inf, 0.0
    for _ in range(50):
        t = {idx(*rng.integers(-3, 4, size=2)): complex(*rng.normal(size=2)) for _ in range(rng.integers(1, 6))}
        u = GaussianMixture(params, t)
        u = u.scaled(1 / math.sqrt(mixture_inner_product(u, u).real))
        q = analysis_norm_sq(u, frame_window(u))
        worst_lo = min(worst_lo, q / b8.alpha_sq)
        worst_hi = max(worst_hi, q / b8.beta_sq)
    ok = radius_dev < 0.01 and k_dev < 0.02 and worst_lo >= 0.98 and worst_hi <= 1.02
    acceptance("6 frame bounds", ok,
               f"alpha^2={b8.alpha_sq:.4f}, beta^2={b8.beta_sq:.4f}; radius 6->8 change {radius_dev:.2%} (< 1%); "
               f"k=1 vs 4 change {k_dev:.2%} (< 2%); 50 mixtures: min S/alpha^2 {worst_lo:.3f}, "
               f"max S/beta^2 {worst_hi:.3f} (2% slack)")


def test_rate_shape(acceptance):
    t0 = time.perf_counter()
    cfg = SweepConfig(FrameParams(1.0, 1), (1.5, 2.0, 2.5, 3.0, 3.5, 4.0), p=0)
    res = run_convergence_sweep(cfg)
    elapsed = time.perf_counter() - t0
    monotone = all(b <= a for a, b in zip(res.errors, res.errors[1:]))
    ok = res.slope < -6 and res.r_squared >= 0.98 and monotone and elapsed < 600
    acceptance("7 rate shape", ok,
               f"slope {res.slope:.3f} (< -6), R^2 {res.r_squared:.3f} (>= 0.98), monotone={monotone}, "
               f"errors {[f'{e:.3g}' for e in res.errors]}, {elapsed:.1f} s (< 600 s)")


def test_coefficient_decay(acceptance):
    tests = {"psi00": lambda p: GaussianMixture.single(p, LatticeIndex.origin(1)),
             "mixture": lambda p: random_mixture(p, 3, 2.0, 0)}
    spreads, finite = {}, True
    for name, make in tests.items():
        ratios = {k: [r.ratio for r in run_coefficient_decay(make(FrameParams(k, 1)), [1, 2])] for k in (1.0, 4.0)}
        finite &= all(math.isfinite(v) for vs in ratios.values() for v in vs)
        for i, p in enumerate((1, 2)):
            a, b = ratios[1.0][i], ratios[4.0][i]
            spreads[f"{name} p={p}"] = max(a, b) / min(a, b)
    ok = finite and max(spreads.values()) < 2
    acceptance("8 coefficient decay", ok,
               f"finite={finite}; k=1 vs 4 ratio spread " + ", ".join(f"{n}: {v:.2f}" for n, v in spreads.items())
               + " (< 2)")


def test_dual_coefficient_decay(acceptance):
    params = FrameParams(1.0, 1)
    sums = [r.weighted_sum for r in run_dual_decay(GaussianMixture.single(params, LatticeIndex.origin(1)), [1, 2])]
    finite = all(math.isfinite(s) for s in sums)
    prof = [abs(dual_gram_entry(params, idx(0, 0), idx(j, 0))) for j in range(6)]
    decreasing = all(b < a for a, b in zip(prof, prof[1:]))
    acceptance("9 dual coefficient decay", finite and decreasing,
               f"S*_1={sums[0]:.4g}, S*_2={sums[1]:.4g} finite={finite}; |dual Gram(0,j)| "
               f"{[f'{v:.3g}' for v in prof]} strictly decreasing={decreasing}")


def test_sharpness(acceptance):
    params = FrameParams(1.0, 1)
    lines, ok = [], True
    for r in (1, 2):
        reps = [run_sharpness(params, 0, r, D) for D in (3.0, 4.0, 5.0)]
        proj_ok = all(rep.projection_norm <= 1e-3 * rep.u_norm_p for rep in reps)
        err_ok = all(rep.error >= 0.9 * rep.u_norm_p for rep in reps)
        ratios = [rep.ratio for rep in reps]
        spread = max(ratios) / min(ratios)
        ok &= proj_ok and err_ok and min(ratios) > 0 and spread < 4
        lines.append(f"r={r}: max |Pi u|/|u| {max(rep.projection_norm for rep in reps):.1e}, "
                     f"min err/|u| {min(rep.error for rep in reps):.4f}, ratios "
                     f"{[f'{v:.4f}' for v in ratios]} spread {spread:.3f} (< 4)")
    acceptance("10 sharpness", ok, "; ".join(lines))


def test_far_field(acceptance):
    params = FrameParams(1.0, 1)
    D = 2.0
    v = project(GaussianMixture.single(params, LatticeIndex.origin(1)), ProjectionSpec(D))
    mass = far_field_norm(v, 2 * D) ** 2
    acceptance("11 far-field smallness", mass <= 1e-6, f"mass on |x| > {2 * D:g} is {mass:.2e} (<= 1e-6)")
