import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from panelid.model_core import build_D, build_L, build_omega, make_theta, random_theta
from panelid.poly_minors import (
    AlphaPoly,
    ExclusionMinor,
    MinorCalculus,
    RankConditionError,
    build_J_poly,
    check_degree_bounds,
    det_minor_poly,
    enumerate_minors,
    jtilde_poly,
    off_diag_O_poly,
    poly_add,
    poly_degree,
    poly_eval,
    poly_mul,
)

import oracles


def rel_err(x, y, scale):
    return abs(x - y) / max(scale, 1e-300)


# -- AlphaPoly -------------------------------------------------------------------


def test_mul_difference_of_squares():
    p = poly_mul(AlphaPoly([1, 1]), AlphaPoly([1, -1]))
    assert p == AlphaPoly([1, 0, -1])


def test_horner_eval():
    assert poly_eval(AlphaPoly([2, -3, 1]), 3.0) == 2.0


def test_zero_degree_sentinel():
    z = AlphaPoly([0.0, 0.0])
    assert z.is_zero()
    assert z.coeffs.size == 0
    assert poly_degree(z) == -math.inf


def test_trailing_trim_is_relative():
    p = AlphaPoly([1.0, 2.0, 1e-13])
    assert p.degree() == 1
    assert AlphaPoly([1e-14]).is_zero()  # below 1e-11 * (1 + max|c|)


def test_add_cancels_to_zero():
    p = AlphaPoly([1, 2, 3])
    assert poly_add(p, -p).is_zero()


def test_json_layout():
    p = AlphaPoly([0.5, -1.0, 2.0])
    assert json.loads(json.dumps(p.to_list())) == [0.5, -1.0, 2.0]
    assert AlphaPoly.from_list(p.to_list()) == p


coeffs = st.lists(st.floats(-10, 10), min_size=1, max_size=6)


@settings(max_examples=80, deadline=None)
@given(a=coeffs, b=coeffs, x=st.floats(-3, 3))
def test_ring_ops_agree_with_evaluation(a, b, x):
    p, q = AlphaPoly(a), AlphaPoly(b)
    scale = 1 + sum(abs(c) for c in a) * 3**len(a) + sum(abs(c) for c in b) * 3**len(b)
    assert abs(poly_add(p, q)(x) - (np.polyval(a[::-1], x) + np.polyval(b[::-1], x))) <= 1e-9 * scale
    assert abs(poly_mul(p, q)(x) - np.polyval(a[::-1], x) * np.polyval(b[::-1], x)) <= 1e-9 * scale**2


# -- enumeration ---------------------------------------------------------------


def test_enumerate_T4_k2():
    ms = enumerate_minors(4, 2, 0)
    assert len(ms) == 3
    assert ms[0] == ExclusionMinor((1, 2), (3, 4))


def test_enumerate_tridiagonal_unique():
    ms = enumerate_minors(5, 2, 1)
    assert ms == [ExclusionMinor((1, 2), (4, 5), 1)]


def test_enumerate_infeasible():
    assert enumerate_minors(3, 2, 0) == []


@pytest.mark.parametrize("r_bar", [1, 2, 3])
def test_tridiagonal_count_at_boundary(r_bar):
    assert len(enumerate_minors(2 * (r_bar + 1) + 1, r_bar + 1, 1)) == 1


def test_enumeration_is_transpose_free_and_complete():
    # brute force over all ordered pairs, then identify transposes
    import itertools

    T, k = 6, 2
    seen = set()
    for R in itertools.combinations(range(1, T + 1), k):
        for C in itertools.combinations(range(1, T + 1), k):
            if set(R) & set(C):
                continue
            seen.add(min((R, C), (C, R)))
    got = enumerate_minors(T, k, 0)
    assert len(got) == len(seen)
    assert {(m.rows, m.cols) for m in got} == {min(p, p[::-1]) for p in seen}
    assert got == sorted(got, key=lambda m: (m.rows, m.cols))


def test_minor_rejects_band_overlap():
    with pytest.raises(ValueError):
        ExclusionMinor((1, 2), (2, 3))
    with pytest.raises(ValueError):
        ExclusionMinor((1, 2), (3, 4), band=1)


# -- J and O entries -------------------------------------------------------------


def test_J_first_row_has_no_linear_term(rng):
    th = random_theta("Baseline", 5, 1, rng)
    J = build_J_poly(th)
    for c in range(5):
        assert J[0, c].degree() <= 0
        assert J[c, 0].degree() <= 0


def test_J_generic_entries_nonzero(rng):
    th = random_theta("Baseline", 5, 1, rng)
    J = build_J_poly(th)
    for r in range(2, 5):
        for c in range(1, 5):
            assert not J[r, c].is_zero()


def test_J_at_true_alpha(rng):
    th = random_theta("Baseline", 6, 2, rng)
    L = build_L(th.alpha, 6)
    om = oracles.dense_omega(th)
    ref = L @ om + om @ L.T
    J = build_J_poly(th)
    for r in range(6):
        for c in range(6):
            assert abs(J[r, c](th.alpha) - ref[r, c]) <= 1e-12 * (1 + abs(ref).max())


def test_O_at_true_alpha_is_omega(rng):
    th = random_theta("Baseline", 5, 1, rng)
    om = oracles.dense_omega(th)
    assert abs(off_diag_O_poly(th, 2, 4)(th.alpha) - om[1, 3]) <= 1e-13


def test_O_rejects_in_band_entries(rng):
    th = random_theta("Baseline", 5, 1, rng)
    with pytest.raises(ValueError):
        off_diag_O_poly(th, 3, 3)
    thd = random_theta("Differenced", 6, 1, rng)
    with pytest.raises(ValueError):
        off_diag_O_poly(thd, 3, 4)


@pytest.mark.parametrize("ij", [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])
def test_o_entries_closed_form_entries(rng, ij):
    for _ in range(5):
        th = random_theta("Baseline", 4, 1, rng)
        at = rng.uniform(-1.5, 1.5)
        got = off_diag_O_poly(th, *ij)(at)
        ref = oracles.o_entries_closed_form(th, at)[ij]
        dense = oracles.dense_O(th, at)[ij[0] - 1, ij[1] - 1]
        assert rel_err(got, ref, 1 + abs(ref)) <= 1e-10
        assert rel_err(got, dense, 1 + abs(dense)) <= 1e-10


def test_O_degree_at_most_two(rng):
    th = random_theta("Baseline", 6, 2, rng)
    for r in range(1, 7):
        for c in range(1, 7):
            if r != c:
                assert off_diag_O_poly(th, r, c).degree() <= 2


# -- Jt recursion --------------------------------------------------------------


def test_jtilde_base_case(rng):
    th = random_theta("Baseline", 5, 1, rng)
    J = build_J_poly(th)
    for m in enumerate_minors(5, 1, 0):
        assert jtilde_poly(th, m) == J[m.rows[0] - 1, m.cols[0] - 1]


def test_eq16_closed_form(rng):
    m = ExclusionMinor((1, 2), (3, 4))
    for _ in range(5):
        th = random_theta("Baseline", 4, 1, rng)
        p = det_minor_poly(th, m)
        for at in rng.uniform(-2, 2, 4):
            ref = oracles.det_12_34(th, at)
            assert rel_err(p(at), ref, 1 + abs(ref)) <= 1e-10


def test_eq17_coefficients_b_c_match_and_a_has_extra_term(rng):
    m = ExclusionMinor((2, 3), (1, 4))
    for _ in range(5):
        th = random_theta("Baseline", 4, 1, rng)
        jt = jtilde_poly(th, m).coeffs  # constant first
        a, b, c = oracles.jt_23_14_reference(th)
        scale = 1 + np.abs(jt).max()
        assert rel_err(jt[1], b, scale) <= 1e-10
        assert rel_err(jt[0], c, scale) <= 1e-10
        # the reference leading coefficient omits alpha * d1 * f2^2 * Psi
        extra = th.alpha * th.d_diag[0] * th.factors[1, 0] ** 2 * th.psi[0, 0]
        assert rel_err(jt[2], a + extra, scale) <= 1e-10
        # the dense determinant agrees with the corrected form, not the reference one
        x = 0.37
        dense, _ = oracles.dense_minor_det(th, (2, 3), (1, 4), x)
        corrected = (th.alpha - x) * ((a + extra) * x**2 + b * x + c)
        assert rel_err(dense, corrected, 1 + abs(dense)) <= 1e-9


def test_eq22_closed_form(rng):
    m = ExclusionMinor((1, 2, 3), (4, 5, 6))
    for _ in range(5):
        th = random_theta("FixedEffectsLevels", 6, 2, rng)
        p = det_minor_poly(th, m)
        for at in rng.uniform(-2, 2, 4):
            ref = oracles.fe_det_123_456(th, at)
            assert rel_err(p(at), ref, 1 + abs(ref)) <= 1e-9


def test_fe_cross_minor_degree_and_unit_value(rng):
    m = ExclusionMinor((1, 5, 6), (2, 3, 4))
    for _ in range(5):
        th = random_theta("FixedEffectsLevels", 6, 2, rng)
        jt = jtilde_poly(th, m)
        assert jt.degree() == 4
        ref = oracles.fe_cross_at_one(th)
        assert rel_err(jt(1.0), ref, 1 + abs(ref)) <= 1e-9


@pytest.mark.parametrize("alpha", [1.0, 0.4, -0.7])
def test_ar_closed_forms(rng, alpha):
    m = ExclusionMinor((1, 2), (3, 4))
    th = random_theta("ArPanel", 4, 1, rng, alpha=alpha)
    p = det_minor_poly(th, m)
    for at in rng.uniform(-2, 2, 5):
        ref = oracles.ar_det_12_34(th, at)
        assert rel_err(p(at), ref, 1 + abs(ref)) <= 1e-10


def _master_check(th, rng, n_probe=None):
    band = 1 if th.d_extra is not None else 0
    worst = 0.0
    for m in enumerate_minors(th.big_t, th.r_bar + 1, band):
        p = det_minor_poly(th, m)
        xs = rng.uniform(-2, 2, n_probe or 2 * m.k + 1)
        for x in xs:
            dense, M = oracles.dense_minor_det(th, m.rows, m.cols, x)
            scale = float(np.prod(np.linalg.norm(M, axis=1)))
            worst = max(worst, rel_err(p(x), dense, scale))
    return worst


@pytest.mark.parametrize(
    "variant,T,r", [("Baseline", 4, 1), ("Baseline", 6, 2), ("Baseline", 7, 2), ("Differenced", 7, 1), ("FixedEffectsLevels", 7, 2)]
)
def test_master_dense_oracle(rng, variant, T, r):
    for _ in range(3):
        assert _master_check(random_theta(variant, T, r, rng), rng) <= 1e-9


def test_jtilde_times_factor_matches_dense(rng):
    th = random_theta("Baseline", 6, 2, rng)
    for m in enumerate_minors(6, 3, 0)[:4]:
        jt = jtilde_poly(th, m)
        for x in rng.uniform(-2, 2, 7):
            dense, M = oracles.dense_minor_det(th, m.rows, m.cols, x)
            scale = float(np.prod(np.linalg.norm(M, axis=1)))
            assert rel_err(jt(x) * (th.alpha - x), dense, scale) <= 1e-9


def test_transpose_symmetry(rng):
    th = random_theta("Baseline", 6, 2, rng)
    for m in enumerate_minors(6, 3, 0):
        assert det_minor_poly(th, m).allclose(det_minor_poly(th, m.transpose()), rtol=1e-10)


def test_root_at_alpha(rng):
    th = random_theta("Baseline", 6, 2, rng)
    for m in enumerate_minors(6, 3, 0):
        p = det_minor_poly(th, m)
        assert abs(p(th.alpha)) <= 1e-12 * (1 + np.abs(p.coeffs).sum())


def test_omega_minors_vanish_above_r_bar(rng):
    for r in (1, 2):
        th = random_theta("Baseline", 8, r, rng)
        om = build_omega(th)
        low = om - build_D(th)
        for m in enumerate_minors(8, r + 1, 0):
            R, C = m.zero_based()
            M = om[np.ix_(R, C)]
            scale = float(np.prod(np.linalg.norm(M, axis=1)))
            assert abs(np.linalg.det(M)) <= 1e-9 * scale
            # exclusion minors only see the off-diagonal part, which is F Psi F'
            assert np.array_equal(M, low[np.ix_(R, C)])


def test_rank_condition_violation_is_raised(rng):
    th = random_theta("Baseline", 6, 2, rng)
    fake = make_theta("Baseline", th.alpha, th.factors[:, :1], [[1.0]], d=th.d_diag)
    # one-factor theta asked about a 2x2 minor is fine, but a theta whose
    # Omega has rank-2 off-diagonal structure must fail for k = 2 > r_bar = 1
    bad = make_theta("Baseline", th.alpha, th.factors[:, :1], [[1.0]], d=th.d_diag)
    mc = MinorCalculus(bad)
    mc.omega = build_omega(th)  # inject a two-factor Omega
    with pytest.raises(RankConditionError):
        mc.det_minor(ExclusionMinor((1, 2), (3, 4)))
    assert det_minor_poly(fake, ExclusionMinor((1, 2), (3, 4))).degree() <= 3


# -- degree bounds -------------------------------------------------------------


def test_degree_bounds_k1(rng):
    th = random_theta("Baseline", 4, 1, rng)
    for m in enumerate_minors(4, 1, 0):
        assert 0 <= jtilde_poly(th, m).degree() <= 1
        assert check_degree_bounds(th, m)


def test_degree_bounds_k2(rng):
    for _ in range(10):
        th = random_theta("Baseline", 4, 1, rng)
        for m in enumerate_minors(4, 2, 0):
            assert 1 <= jtilde_poly(th, m).degree() <= 3
            assert check_degree_bounds(th, m)


def test_degree_bound_fe_cross(rng):
    th = random_theta("FixedEffectsLevels", 6, 2, rng)
    m = ExclusionMinor((1, 5, 6), (2, 3, 4))
    assert jtilde_poly(th, m).degree() == 4
    assert check_degree_bounds(th, m)


def test_zero_polynomial_fails_degree_bound(rng):
    th = random_theta("Baseline", 4, 1, rng)
    th0 = make_theta("Baseline", th.alpha, th.factors, [[1e-14]], d=th.d_diag)
    assert not check_degree_bounds(th0, ExclusionMinor((1, 2), (3, 4)))
