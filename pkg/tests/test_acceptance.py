"""Acceptance criteria, one test each.

Every test records a single ``PASS``/``FAIL`` line (printed immediately and
repeated in the terminal summary) before asserting.
"""

import time

import numpy as np
import pytest

from panelid.estimate import fit, limit_objective, pack, unpack
from panelid.ident_check import (
    check_alpha_identification,
    check_ar_panel,
    check_differenced,
    check_fixed_effects_levels,
    roots_match,
    verify_sigma_equality,
)
from panelid.model_core import build_sigma, make_theta, random_theta
from panelid.poly_minors import (
    ExclusionMinor,
    MinorCalculus,
    det_minor_poly,
    enumerate_minors,
    jtilde_poly,
    off_diag_O_poly,
)
from panelid.simulate import gen_panel

import oracles
from acceptance_log import record

SEED = 20240601


def report(n, title, ok, detail, started, budget):
    elapsed = time.perf_counter() - started
    within = elapsed <= budget
    line = f"{'PASS' if ok and within else 'FAIL'} criterion {n}: {title} | {detail} | {elapsed:.1f}s (budget {budget:.0f}s)"
    record(line)
    print(line)
    assert ok, line
    assert within, line


def test_criterion_1_master_determinant_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 1)
    worst, n_checks = 0.0, 0
    for r in (1, 2):
        for T in (4, 6, 8):
            minors = enumerate_minors(T, r + 1, 0)
            if not minors:
                continue
            k = r + 1
            for _ in range(10):
                th = random_theta("Baseline", T, r, rng)
                xs = rng.uniform(-2, 2, 2 * k + 1)
                dense = [oracles.dense_O(th, x) for x in xs]
                for m in minors:
                    p = det_minor_poly(th, m)
                    R, C = m.zero_based()
                    for x, O in zip(xs, dense):
                        M = O[np.ix_(R, C)]
                        scale = float(np.prod(np.linalg.norm(M, axis=1)))
                        worst = max(worst, abs(p(x) - np.linalg.det(M)) / max(scale, 1e-300))
                        n_checks += 1
    report(1, "minor polynomials vs dense determinants", worst <= 1e-9,
           f"{n_checks} evaluations, worst relative error {worst:.2e} (tol 1e-9)", t0, 10)


def test_criterion_2_closed_form_conformance():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 2)
    worst_o = worst_det = worst_bc = worst_a_corrected = 0.0
    reference_a_gap = 0.0
    for _ in range(5):
        th = random_theta("Baseline", 4, 1, rng)
        at = rng.uniform(-1.5, 1.5)
        ref = oracles.o_entries_closed_form(th, at)
        for (i, j), val in ref.items():
            got = off_diag_O_poly(th, i, j)(at)
            worst_o = max(worst_o, abs(got - val) / (1 + abs(val)))
        d = oracles.det_12_34(th, at)
        got = det_minor_poly(th, ExclusionMinor((1, 2), (3, 4)))(at)
        worst_det = max(worst_det, abs(got - d) / (1 + abs(d)))
        jt = jtilde_poly(th, ExclusionMinor((2, 3), (1, 4))).coeffs
        a, b, c = oracles.jt_23_14_reference(th)
        scale = 1 + np.abs(jt).max()
        worst_bc = max(worst_bc, abs(jt[1] - b) / scale, abs(jt[0] - c) / scale)
        extra = th.alpha * th.d_diag[0] * th.factors[1, 0] ** 2 * th.psi[0, 0]
        worst_a_corrected = max(worst_a_corrected, abs(jt[2] - (a + extra)) / scale)
        reference_a_gap = max(reference_a_gap, abs(jt[2] - a) / scale)
    ok = max(worst_o, worst_det, worst_bc, worst_a_corrected) <= 1e-10
    report(2, "closed-form O entries and 2x2 minor coefficients", ok,
           f"O entries {worst_o:.1e}, (1,2),(3,4) determinant {worst_det:.1e}, "
           f"(2,3),(1,4) linear/constant {worst_bc:.1e}, leading with alpha*d1*f2^2*Psi term {worst_a_corrected:.1e} "
           f"(reference leading coefficient off by up to {reference_a_gap:.1e}, documented)", t0, 1)


def test_criterion_3_degree_bounds():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 3)
    violations, n_polys = 0, 0
    for draw in range(500):
        r = 1 + draw % 2
        T = 2 * (r + 1) + int(rng.integers(0, 2))
        th = random_theta("Baseline", T, r, rng)
        mc = MinorCalculus(th)
        for k in range(1, r + 2):
            for m in enumerate_minors(T, k, 0):
                deg = mc.jtilde(m).degree()
                n_polys += 1
                if not (max(0, k - r) <= deg <= 2 * k - 1):
                    violations += 1
    report(3, "degree bounds on Jt", violations == 0,
           f"{n_polys} polynomials over 500 draws, {violations} violations", t0, 30)


def test_criterion_4_baseline_identification():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 4)
    counts = {}
    for r, T in ((1, 4), (2, 6)):
        ok = 0
        for _ in range(200):
            th = random_theta("Baseline", T, r, rng)
            rep = check_alpha_identification(th)
            if rep.identified and len(rep.common_roots) == 1 and roots_match(rep.common_roots[0], th.alpha):
                ok += 1
        counts[(r, T)] = ok
    detail = ", ".join(f"r_bar={r} T={T}: {v}/200" for (r, T), v in counts.items())
    report(4, "baseline identification", all(v == 200 for v in counts.values()), detail, t0, 60)


def test_criterion_5_variant_identification_and_planted_cases():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 5)
    counts = {"FixedEffectsLevels": 0, "Differenced": 0, "ArPanel": 0}
    for _ in range(100):
        counts["FixedEffectsLevels"] += check_fixed_effects_levels(random_theta("FixedEffectsLevels", 6, 2, rng)).identified
        counts["Differenced"] += check_differenced(random_theta("Differenced", 6, 1, rng)).identified
    for i in range(100):
        th = random_theta("ArPanel", 4, 1, rng, alpha=1.0 if i < 25 else None)
        counts["ArPanel"] += check_ar_panel(th).identified

    planted = {}
    fe = random_theta("FixedEffectsLevels", 6, 2, rng)
    fe_bad = make_theta("FixedEffectsLevels", fe.alpha, fe.factors, [[1.0, 0.5], [0.5, 0.25]], d=fe.d_diag)
    rep = check_fixed_effects_levels(fe_bad)
    planted["singular Psi"] = (not rep.identified) and rep.has_label("Case 1': Psi singular")
    # (alpha-1)(d1 + Psi fg^2) + Psi fg = 0 at alpha=0.5, Psi=1, d1=0.75 has root fg=1.5
    ar = make_theta("ArPanel", 0.5, [1.5, 1.0, 1.0, 1.0], 1.0, d=[0.75, 1.3, 0.9, 1.1])
    rep = check_ar_panel(ar)
    planted["unit-root manifold"] = (not rep.identified) and rep.has_label("α̃=1 candidate on the unit-root manifold")
    base = make_theta("Baseline", 0.5, [1.0, 0.8, -0.5, -0.25], 1.0, d=[1.0, 1.2, 0.8, 1.0])
    rep = check_alpha_identification(base)
    planted["f4 = alpha f3"] = rep.has_label("Case 3 candidate root f4/f3 coincides with alpha (Case 4)")

    ok = counts["FixedEffectsLevels"] == 100 and counts["Differenced"] == 100 and counts["ArPanel"] == 100
    ok = ok and all(planted.values())
    detail = ", ".join(f"{k}: {v}/100" for k, v in counts.items()) + "; planted " + ", ".join(
        f"{k}={'ok' if v else 'MISSED'}" for k, v in planted.items()
    )
    report(5, "variant identification and degenerate labels", ok, detail, t0, 120)


def test_criterion_6_tridiagonal_count():
    t0 = time.perf_counter()
    counts = [len(enumerate_minors(2 * (r + 1) + 1, r + 1, 1)) for r in (1, 2, 3)]
    base = len(enumerate_minors(4, 2, 0))
    report(6, "minor enumeration counts", counts == [1, 1, 1] and base == 3,
           f"tridiagonal counts {counts}, T=4 k=2 count {base}", t0, 1)


def _param_gap(a, b):
    gaps = [abs(a.alpha - b.alpha), np.abs(a.factors - b.factors).max(), np.abs(a.psi - b.psi).max()]
    if a.d_extra is not None:
        gaps.append(np.abs(np.subtract(a.d_extra, b.d_extra)).max())
    else:
        gaps.append(np.abs(a.d_diag - b.d_diag).max())
    return float(max(gaps))


def test_criterion_7_noiseless_recovery():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 7)
    designs = [("Baseline", 6, 2, None), ("FixedEffectsLevels", 6, 2, None), ("Differenced", 6, 1, None),
               ("ArPanel", 4, 1, None), ("ArPanel", 4, 1, 1.0)]
    worst = {}
    for variant, T, r, alpha in designs:
        key = variant + (" alpha=1" if alpha == 1.0 else "")
        w = 0.0
        for _ in range(20):
            th = random_theta(variant, T, r, rng, alpha=alpha)
            res = fit(build_sigma(th), r, variant)
            w = max(w, _param_gap(res.theta_hat, th) if res.converged else np.inf)
        worst[key] = w
    detail = ", ".join(f"{k} worst {v:.1e}" for k, v in worst.items())
    report(7, "noiseless recovery within 1e-4", all(v <= 1e-4 for v in worst.values()), detail, t0, 300)


def test_criterion_8_monte_carlo_consistency():
    t0 = time.perf_counter()
    theta0 = make_theta("Baseline", 0.5, [1.0, 0.8, -0.5, 1.2, 0.3, -0.9], 1.0, d=[1.0, 1.2, 0.8, 1.0, 1.5, 0.9])
    delta = np.linspace(-0.5, 0.5, 6)
    ss = np.random.SeedSequence(SEED + 8)
    rmse, bias = {}, {}
    for n, child in zip((500, 2000, 8000), ss.spawn(3)):
        seeds = child.generate_state(50, dtype=np.uint64)
        errs = []
        for s in seeds:
            res = fit(gen_panel(theta0, delta, n, int(s)), 1, "Baseline")
            errs.append(res.theta_hat.alpha - theta0.alpha)
        errs = np.array(errs)
        rmse[n] = float(np.sqrt(np.mean(errs**2)))
        bias[n] = float(errs.mean())
    ok = rmse[500] > rmse[2000] > rmse[8000] and abs(bias[8000]) <= 0.01
    detail = ", ".join(f"N={n}: rmse {rmse[n]:.4f} bias {bias[n]:+.4f}" for n in rmse)
    report(8, "RMSE of alpha decreasing in N", ok, detail, t0, 900)


def test_criterion_9_limit_objective_uniqueness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 9)
    theta0 = make_theta("Baseline", 0.5, [1.0, 0.8, -0.5, 1.2, 0.3, -0.9], 1.0, d=[1.0, 1.2, 0.8, 1.0, 1.5, 0.9])
    top = limit_objective(theta0, theta0)
    v0 = pack(theta0)
    accepted, failures, smallest_gap = 0, 0, np.inf
    while accepted < 1000:
        scale = 10 ** rng.uniform(-6.5, -0.5)
        th = unpack(v0 + scale * rng.normal(size=v0.size), theta0)
        gap = verify_sigma_equality(th, theta0)
        if gap < 1e-6:
            continue
        accepted += 1
        smallest_gap = min(smallest_gap, gap)
        if not limit_objective(th, theta0) < top:
            failures += 1
    report(9, "limit objective strictly below its value at the truth", failures == 0,
           f"{accepted} perturbations (smallest Sigma gap {smallest_gap:.1e}), {failures} failures", t0, 10)
