"""Identification verdicts built on exclusion-minor polynomials.

A competing autoregressive coefficient ``a`` can only be observationally
equivalent to the truth if every exclusion minor of ``O(a)`` of size
``r_bar + 1`` vanishes. Each such determinant is ``(alpha - a) Jt(a)``, so
any alternative must be a common real root of all minor polynomials. The
checks below compute those roots, intersect them, and record every
candidate that was examined together with the numbers that ruled it in or
out.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npp

from .model_core import Theta, Variant, build_sigma, min_periods
from .poly_minors import (
    AlphaPoly,
    ExclusionMinor,
    MinorCalculus,
    band_for,
    enumerate_minors,
)

__all__ = [
    "DegeneratePolynomialError",
    "CaseEntry",
    "MinorSummary",
    "IdentReport",
    "real_roots",
    "roots_match",
    "cluster_roots",
    "check_alpha_identification",
    "check_fixed_effects_levels",
    "check_differenced",
    "check_ar_panel",
    "check_theta",
    "verify_sigma_equality",
    "ar_manifold_value",
    "fe_unit_root_factors",
]

ROOT_MATCH_RTOL = 1e-7
RESIDUAL_RTOL = 1e-10
# Imaginary parts below this (relative) are attributed to round-off in the
# companion eigenvalues of a simple real root.
_IMAG_RTOL = 1e-7
# Eigenvalues of a root of multiplicity m scatter by roughly eps**(1/m); the
# merge radius is generous, merging is then gated by derivative tests.
_MERGE_RTOL = 1e-3
_DERIV_RTOL = 1e-7
_PSI_SINGULAR_RTOL = 1e-10
_EVAL_RTOL = 1e-9


class DegeneratePolynomialError(ValueError):
    """Root finding was asked for the zero polynomial."""


# -- roots -------------------------------------------------------------------


def _abs_scale(c: np.ndarray, x: complex) -> float:
    return float(np.sum(np.abs(c) * np.abs(x) ** np.arange(c.size)))


def _newton_polish(c: np.ndarray, x: float, iters: int = 8) -> float:
    dc = npp.polyder(c)
    best, best_res = x, abs(npp.polyval(x, c))
    for _ in range(iters):
        d = npp.polyval(x, dc)
        if d == 0:
            break
        x = x - npp.polyval(x, c) / d
        res = abs(npp.polyval(x, c))
        if res < best_res:
            best, best_res = x, res
        else:
            break
    return float(best)


def _is_multiple_root(c: np.ndarray, mu: float, m: int) -> bool:
    for j in range(m):
        dj = npp.polyder(c, j) if j else c
        if dj.size == 0:
            continue
        if abs(npp.polyval(mu, dj)) > _DERIV_RTOL * max(_abs_scale(dj, mu), 1e-300):
            return False
    return True


def real_roots(p: AlphaPoly) -> list[float]:
    """Sorted distinct real roots of ``p``.

    Roots come from companion-matrix eigenvalues. Groups of nearby
    eigenvalues that pass a multiplicity test (the first ``m - 1``
    derivatives vanish at their mean) are merged into one root; isolated
    near-real eigenvalues are Newton polished and kept only if the residual
    is at most ``1e-10`` times ``sum |c_i| |x|^i``.
    """
    if p.is_zero():
        raise DegeneratePolynomialError("the zero polynomial has no isolated roots")
    c = p.coeffs
    if c.size == 1:
        return []
    z = npp.polyroots(c)
    z = z[np.argsort(z.real)]
    used = np.zeros(z.size, dtype=bool)
    out: list[float] = []
    for i in range(z.size):
        if used[i]:
            continue
        group = [i]
        for j in range(z.size):
            if j != i and not used[j] and abs(z[j] - z[i]) <= _MERGE_RTOL * (1 + abs(z[i])):
                group.append(j)
        cand: Optional[float] = None
        if len(group) > 1:
            mu = complex(np.mean(z[group]))
            if abs(mu.imag) <= _IMAG_RTOL * (1 + abs(mu)) and _is_multiple_root(c, mu.real, len(group)):
                cand = mu.real
            else:
                group = [i]
        used[group] = True
        if cand is None:
            zi = z[i]
            if abs(zi.imag) > _IMAG_RTOL * (1 + abs(zi)):
                continue
            cand = _newton_polish(c, zi.real)
        if abs(npp.polyval(cand, c)) <= RESIDUAL_RTOL * max(_abs_scale(c, cand), 1e-300):
            out.append(float(cand))
    return cluster_roots(out)


def roots_match(x: float, y: float, rtol: float = ROOT_MATCH_RTOL) -> bool:
    return abs(x - y) <= rtol * (1 + abs(x))


def cluster_roots(xs: Iterable[float], rtol: float = ROOT_MATCH_RTOL) -> list[float]:
    """Sort and merge values that agree under :func:`roots_match`."""
    out: list[float] = []
    for x in sorted(xs):
        if out and roots_match(out[-1], x, rtol):
            continue
        out.append(float(x))
    return out


# -- report types ------------------------------------------------------------


@dataclass
class CaseEntry:
    """One examined case: a label, its outcome and the supporting numbers."""

    label: str
    status: str
    evidence: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"label": self.label, "status": self.status, "evidence": _jsonable(self.evidence)}


@dataclass
class MinorSummary:
    minor: ExclusionMinor
    degree: float
    roots: list[float]
    zero_poly: bool
    jtilde: AlphaPoly

    def to_dict(self) -> dict:
        deg = self.degree if math.isfinite(self.degree) else None
        return {
            "minor": self.minor.to_dict(),
            "degree": deg,
            "roots": list(self.roots),
            "zero_poly": self.zero_poly,
            "jtilde": self.jtilde.to_list(),
        }


@dataclass
class IdentReport:
    identified: bool
    alpha_true: float
    common_roots: list[float]
    minors_used: list[ExclusionMinor]
    per_minor: list[MinorSummary]
    case_log: list[CaseEntry]
    variant: Variant = Variant.BASELINE

    def labels(self) -> list[str]:
        return [c.label for c in self.case_log]

    def has_label(self, prefix: str) -> bool:
        return any(c.label.startswith(prefix) for c in self.case_log)

    def to_dict(self) -> dict:
        return {
            "identified": self.identified,
            "alpha_true": self.alpha_true,
            "common_roots": list(self.common_roots),
            "minors": [m.to_dict() for m in self.minors_used],
            "per_minor": [p.to_dict() for p in self.per_minor],
            "case_log": [c.to_dict() for c in self.case_log],
            "variant": self.variant.value,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, AlphaPoly):
        return x.to_list()
    if isinstance(x, ExclusionMinor):
        return x.to_dict()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


# -- shared machinery --------------------------------------------------------


def _summarize(mc: MinorCalculus, minor: ExclusionMinor) -> MinorSummary:
    jt = mc.jtilde(minor)
    mc.det_minor(minor)  # enforces the vanishing Omega minor for k > r_bar
    zero = jt.is_zero()
    roots = [] if zero else cluster_roots(real_roots(jt) + [mc.alpha])
    return MinorSummary(minor, jt.degree(), roots, zero, jt)


def _eval_rel(p: AlphaPoly, x: float) -> tuple[float, float]:
    """``p(x)`` and its magnitude relative to ``sum |c_i| |x|^i``."""
    val = p(x)
    scale = _abs_scale(p.coeffs, x) if p.coeffs.size else 0.0
    return float(val), (abs(val) / scale if scale > 0 else 0.0)


def _intersect(per_minor: Sequence[MinorSummary]) -> list[float]:
    live = [pm for pm in per_minor if not pm.zero_poly]
    if not live:
        return []
    common = list(live[0].roots)
    for pm in live[1:]:
        common = [x for x in common if any(roots_match(x, y) for y in pm.roots)]
    return cluster_roots(common)


def _psi_singular(theta: Theta) -> bool:
    if theta.r_bar == 0:
        return True
    w = np.linalg.eigvalsh(theta.psi)
    return bool(w[0] <= _PSI_SINGULAR_RTOL * (1 + abs(w[-1])))


def _regime_entry(theta: Theta) -> Optional[CaseEntry]:
    need = min_periods(theta.variant, theta.r_bar)
    if theta.big_t < need:
        return CaseEntry(
            "below-assumption regime",
            "info",
            {"T": theta.big_t, "required_T": need},
        )
    return None


def _verdict(alpha: float, common: Sequence[float], per_minor: Sequence[MinorSummary]) -> bool:
    if any(pm.zero_poly for pm in per_minor):
        return False
    return len(common) == 1 and roots_match(common[0], alpha)


def _candidate_entries(
    per_minor: Sequence[MinorSummary], alpha: float, labeler
) -> list[CaseEntry]:
    """One entry per spurious real root, with the minors that eliminate it."""
    out = []
    seen: list[float] = []
    for i, pm in enumerate(per_minor):
        if pm.zero_poly:
            continue
        for x in pm.roots:
            if roots_match(x, alpha) or any(roots_match(x, s) for s in seen):
                continue
            seen.append(x)
            witnesses = {}
            for other in per_minor:
                if other.zero_poly or other is pm:
                    continue
                val, rel = _eval_rel(other.jtilde, x)
                witnesses[str(other.minor)] = {"jtilde": val, "relative": rel}
            killed = any(
                not any(roots_match(x, y) for y in other.roots)
                for other in per_minor
                if not other.zero_poly and other is not pm
            )
            out.append(
                CaseEntry(
                    labeler(pm.minor, x),
                    "eliminated" if killed else "unresolved",
                    {"root": x, "from_minor": str(pm.minor), "other_minors": witnesses},
                )
            )
    return out


def _generic_label(minor: ExclusionMinor, x: float) -> str:
    return f"candidate root {x:.10g} of minor {minor}"


def _baseline_r1_labels(theta: Theta):
    """Case labels for the single-factor baseline minor (1,2),(3,4)."""
    F = theta.factors[:, 0]
    ratio = F[3] / F[2] if F[2] != 0 else math.inf

    def label(minor: ExclusionMinor, x: float) -> str:
        if minor.rows == (1, 2) and minor.cols == (3, 4) and roots_match(x, ratio):
            return "Case 3 candidate root f4/f3"
        return _generic_label(minor, x)

    return label, ratio


def _zero_poly_entries(theta: Theta, per_minor: Sequence[MinorSummary]) -> list[CaseEntry]:
    zeros = [pm for pm in per_minor if pm.zero_poly]
    if not zeros:
        return []
    ev = {
        "zero_minors": [str(pm.minor) for pm in zeros],
        "psi_eigenvalues": np.linalg.eigvalsh(theta.psi).tolist() if theta.r_bar else [],
    }
    if _psi_singular(theta):
        if theta.variant is Variant.FIXED_EFFECTS_LEVELS:
            label = "Case 1': Psi singular (Psi12^2 = Psi11*Psi22)"
        elif theta.variant is Variant.AR_PANEL:
            label = "Case 1'': Psi=0"
        else:
            label = "Case 1: Ψ=0" if theta.r_bar == 1 else "Case 1: Psi singular"
        return [CaseEntry(label, "flagged", ev)]
    if theta.variant is Variant.BASELINE and theta.r_bar == 1 and theta.big_t >= 4:
        a, d = theta.alpha, theta.d_diag
        f2 = theta.factors[1, 0]
        gap = d[1] - a * d[0] * f2
        ev["d2 - alpha*d1*f2"] = gap
        if abs(gap) <= 1e-8 * (abs(d[1]) + abs(a * d[0] * f2)):
            return [CaseEntry("Case 2: f2 = d2/(alpha d1)", "flagged", ev)]
    if theta.variant in (Variant.FIXED_EFFECTS_LEVELS, Variant.AR_PANEL):
        return []  # the variant checks attach their own labels
    return [CaseEntry("degenerate configuration: zero Jt polynomial", "flagged", ev)]


# -- public checks -----------------------------------------------------------


def check_alpha_identification(
    theta: Theta,
    n_minors: int = 2,
    minors: Optional[Sequence[ExclusionMinor]] = None,
) -> IdentReport:
    """Intersect the real roots of the first ``n_minors`` exclusion minors.

    Intended for the baseline and fixed-effects designs; the band of the
    minors follows the error structure of ``theta``. Pass ``n_minors=None``
    (or an explicit ``minors`` list) to use every available minor.
    """
    band = band_for(theta)
    if minors is None:
        pool = enumerate_minors(theta.big_t, theta.r_bar + 1, band)
        if n_minors is not None:
            if n_minors < 2:
                raise ValueError("n_minors must be at least 2")
            pool = pool[:n_minors]
        minors = pool
    minors = list(minors)
    if len(minors) < 2:
        raise ValueError(
            f"need at least 2 exclusion minors of size {theta.r_bar + 1} (band {band}) "
            f"but T={theta.big_t} admits {len(minors)}"
        )
    mc = MinorCalculus(theta)
    per_minor = [_summarize(mc, m) for m in minors]
    common = _intersect(per_minor)
    log: list[CaseEntry] = []
    regime = _regime_entry(theta)
    if regime:
        log.append(regime)
    log += _zero_poly_entries(theta, per_minor)

    labeler = _generic_label
    if theta.variant is Variant.BASELINE and theta.r_bar == 1 and theta.big_t >= 4:
        labeler, ratio = _baseline_r1_labels(theta)
        if roots_match(ratio, theta.alpha) and any(
            pm.minor.rows == (1, 2) and pm.minor.cols == (3, 4) for pm in per_minor
        ):
            log.append(
                CaseEntry(
                    "Case 3 candidate root f4/f3 coincides with alpha (Case 4)",
                    "merged",
                    {"f4/f3": ratio, "alpha": theta.alpha},
                )
            )
    log += _candidate_entries(per_minor, theta.alpha, labeler)
    identified = _verdict(theta.alpha, common, per_minor)
    if not identified and not any(pm.zero_poly for pm in per_minor):
        log.append(
            CaseEntry(
                "spurious common root",
                "flagged",
                {"common_roots": common, "alpha": theta.alpha},
            )
        )
    return IdentReport(identified, theta.alpha, common, minors, per_minor, log, theta.variant)


def fe_unit_root_factors(theta: Theta) -> dict[str, float]:
    """Factors of the cross minor ``(1,5,6),(2,3,4)`` at ``a = 1`` for ``T = 6``.

    Returns the plane term in ``(f2, f3, f4)``, the quadratic ``P(f_gamma)``
    with its coefficients, and their product. The product equals ``Jt(1)``
    for that minor.
    """
    a = theta.alpha
    d = theta.d_diag
    F = theta.factors
    f_gamma = F[0, 0]
    # free column is (f1, ..., f4, 0, 1); indices f_t are 1-based
    f2, f3, f4 = F[1, 1], F[2, 1], F[3, 1]
    p11, p12, p22 = theta.psi[0, 0], theta.psi[0, 1], theta.psi[1, 1]
    det_psi = p11 * p22 - p12**2
    plane = d[3] * f2 - d[3] * f3 - a * d[2] * f2 + a * d[2] * f4 + a**2 * d[1] * f3 - a**2 * d[1] * f4
    qa, qb, qc = (a - 1) * det_psi, det_psi, (a - 1) * d[0] * p22
    quad = qa * f_gamma**2 + qb * f_gamma + qc
    return {
        "plane": plane,
        "P_a": qa,
        "P_b": qb,
        "P_c": qc,
        "P_value": quad,
        "product": plane * quad,
    }


def _fe_leading_factor(theta: Theta) -> float:
    a, d, F = theta.alpha, theta.d_diag, theta.factors
    fg = F[0, 0]
    f1, f2, f3 = F[0, 1], F[1, 1], F[2, 1]
    return d[2] * f1 - a * d[1] * f1 - d[2] * f2 * fg + a**2 * d[0] * f2 - a**2 * d[0] * f3 + a * d[1] * f3 * fg


def check_fixed_effects_levels(theta: Theta) -> IdentReport:
    """Identification with individual effects in levels (two factors).

    Candidate alternatives are the real roots of the minor
    ``(1,2,3),(4,5,6)``: ``1``, ``-1/f4`` and ``alpha`` when ``T = 6``. Each
    spurious candidate is tested against the cross minor
    ``(1,5,6),(2,3,4)``.
    """
    if theta.variant is not Variant.FIXED_EFFECTS_LEVELS:
        raise ValueError("check_fixed_effects_levels needs a FixedEffectsLevels theta")
    if theta.big_t < 6:
        raise ValueError(f"FixedEffectsLevels needs T >= 6, got {theta.big_t}")
    primary = ExclusionMinor((1, 2, 3), (4, 5, 6))
    cross = ExclusionMinor((1, 5, 6), (2, 3, 4))
    mc = MinorCalculus(theta)
    per_minor = [_summarize(mc, primary), _summarize(mc, cross)]
    common = _intersect(per_minor)
    log: list[CaseEntry] = []
    alpha = theta.alpha
    d = theta.d_diag

    if alpha != 1.0:
        ratios = d[1:] - alpha * d[:-1]
        ok = bool(np.any(np.abs(ratios) > 1e-12 * (1 + np.abs(d[1:]))))
        log.append(
            CaseEntry(
                "variance screen: some d_t != alpha d_{t-1}",
                "satisfied" if ok else "violated",
                {"d_t - alpha d_{t-1}": ratios},
            )
        )
    log += _zero_poly_entries(theta, per_minor)
    if any(pm.zero_poly for pm in per_minor) and not _psi_singular(theta):
        if per_minor[0].zero_poly and theta.big_t == 6:
            log.append(
                CaseEntry(
                    "Case 2': leading factor of the primary minor vanishes",
                    "flagged",
                    {"factor": _fe_leading_factor(theta)},
                )
            )
        else:
            log.append(
                CaseEntry(
                    "degenerate configuration: zero Jt polynomial",
                    "flagged",
                    {"zero_minors": [str(pm.minor) for pm in per_minor if pm.zero_poly]},
                )
            )

    f4 = theta.factors[3, 1]
    neg_inv_f4 = -1.0 / f4 if f4 != 0 else math.inf
    cross_jt = per_minor[1].jtilde
    candidates: list[tuple[str, float]] = []
    if not per_minor[0].zero_poly:
        for x in per_minor[0].roots:
            if roots_match(x, alpha):
                continue
            if roots_match(x, 1.0):
                candidates.append(("Case 4' α̃=1 candidate", x))
            elif roots_match(x, neg_inv_f4):
                candidates.append(("Case 3' α̃=-1/f4 candidate", x))
            else:
                candidates.append((f"candidate root {x:.10g}", x))
    for label, x in candidates:
        ev: dict[str, Any] = {"root": x}
        if per_minor[1].zero_poly:
            status = "unresolved"
        else:
            val, rel = _eval_rel(cross_jt, x)
            ev.update({"cross_minor": str(cross), "cross_jtilde": val, "relative": rel})
            status = "confirmed" if any(roots_match(x, y) for y in per_minor[1].roots) else "eliminated"
        if label.startswith("Case 4'") and theta.big_t == 6:
            fac = fe_unit_root_factors(theta)
            ev["factorization"] = fac
            ev["factorization_gap"] = abs(fac["product"] - cross_jt(1.0))
        log.append(CaseEntry(label, status, ev))
    if alpha == 1.0:
        log.append(CaseEntry("Case 5': α̃=alpha=1", "info", {"note": "unit candidate coincides with alpha"}))

    identified = _verdict(alpha, common, per_minor)
    if not identified and not any(pm.zero_poly for pm in per_minor):
        log.append(CaseEntry("spurious common root", "flagged", {"common_roots": common}))
    return IdentReport(identified, alpha, common, [primary, cross], per_minor, log, theta.variant)


def check_differenced(theta: Theta, n_minors: int = 2) -> IdentReport:
    """Intersection check with tridiagonal exclusion minors."""
    if theta.variant is not Variant.DIFFERENCED:
        raise ValueError("check_differenced needs a Differenced theta")
    pool = enumerate_minors(theta.big_t, theta.r_bar + 1, 1)
    if len(pool) < 2:
        raise ValueError(
            f"differenced T={theta.big_t} admits {len(pool)} tridiagonal exclusion minor(s) "
            f"of size {theta.r_bar + 1}; at least 2 are needed"
        )
    return check_alpha_identification(theta, n_minors=n_minors)


def ar_manifold_value(theta: Theta) -> dict[str, float]:
    """Condition under which ``a = 1`` could mimic an ``alpha != 1`` AR panel.

    ``closed_form`` is ``(alpha-1)((alpha-1)(d1 + Psi fg^2) + Psi fg)``.
    ``substitution`` solves the (1,1), (2,1), (3,1) moment equations at
    ``a = 1`` in order (``d1~``, then ``Psi~ fg~``) and returns the residual
    of the third equation, computed from ``Sigma(theta)`` directly.
    """
    a = theta.alpha
    d1 = theta.d_diag[0]
    psi = theta.psi[0, 0]
    fg = theta.factors[0, 0]
    closed = (a - 1) * ((a - 1) * (d1 + psi * fg**2) + psi * fg)
    scale = abs(a - 1) * (abs(a - 1) * (d1 + psi * fg**2) + psi * abs(fg))
    S = build_sigma(theta, check=False)
    s11, s21, s31 = S[0, 0], S[1, 0], S[2, 0]
    # with a = 1: s11 = d1~ + Psi~ fg~^2, s21 = s11 + Psi~ fg~, s31 = s11 + 2 Psi~ fg~
    psi_fg = s21 - s11
    substitution = s31 - (s11 + 2.0 * psi_fg)
    return {
        "closed_form": closed,
        "substitution": substitution,
        "scale": scale,
        "psi_fg_tilde": psi_fg,
        "d1_plus_psi_fg2_tilde": s11,
    }


def check_ar_panel(theta: Theta) -> IdentReport:
    """Single-factor AR panel with individual effects, ``alpha = 1`` allowed."""
    if theta.variant is not Variant.AR_PANEL:
        raise ValueError("check_ar_panel needs an ArPanel theta")
    if theta.big_t < 4:
        raise ValueError(f"ArPanel needs T >= 4, got {theta.big_t}")
    alpha = theta.alpha
    psi = theta.psi[0, 0]
    d1, d2 = theta.d_diag[0], theta.d_diag[1]
    fg = theta.factors[0, 0]
    primary = ExclusionMinor((1, 2), (3, 4))
    mc = MinorCalculus(theta)
    pm = _summarize(mc, primary)
    per_minor = [pm]
    det_poly = mc.det_minor(primary)
    log: list[CaseEntry] = []
    log += _zero_poly_entries(theta, per_minor)

    if alpha == 1.0:
        closed = AlphaPoly(psi * (d1 - d2 * fg) * np.array([1.0, -2.0, 1.0]))
        log.append(
            CaseEntry(
                "unit-root closed form Psi(a-1)^2(d1-d2 fg)",
                "confirmed" if det_poly.allclose(closed, rtol=1e-9) else "mismatch",
                {"computed": det_poly.coeffs, "closed_form": closed.coeffs},
            )
        )
        if pm.zero_poly and not _psi_singular(theta):
            log.append(CaseEntry("Case 2'': f_gamma = d1/d2", "flagged", {"d1 - d2 fg": d1 - d2 * fg}))
        common = list(pm.roots)
        if not pm.zero_poly:
            log.append(
                CaseEntry(
                    "Case 3'': α̃=alpha=1",
                    "confirmed" if common == [1.0] or (len(common) == 1 and roots_match(common[0], 1.0)) else "unresolved",
                    {"roots": common},
                )
            )
        identified = _verdict(alpha, common, per_minor)
        return IdentReport(identified, alpha, common, [primary], per_minor, log, theta.variant)

    closed = AlphaPoly(psi * (alpha * d1 - d2 * fg) * npp.polyfromroots([alpha, 1.0]))
    log.append(
        CaseEntry(
            "closed form Psi(a-alpha)(a-1)(alpha d1 - d2 fg)",
            "confirmed" if det_poly.allclose(closed, rtol=1e-9) else "mismatch",
            {"computed": det_poly.coeffs, "closed_form": closed.coeffs},
        )
    )
    if pm.zero_poly and not _psi_singular(theta):
        log.append(
            CaseEntry(
                "Case 2'': f_gamma = alpha d1/d2",
                "flagged",
                {"alpha d1 - d2 fg": alpha * d1 - d2 * fg},
            )
        )
        return IdentReport(False, alpha, [], [primary], per_minor, log, theta.variant)

    survivors = [alpha]
    for x in pm.roots:
        if roots_match(x, alpha):
            continue
        ev: dict[str, Any] = {"root": x}
        if roots_match(x, 1.0):
            man = ar_manifold_value(theta)
            ev["manifold"] = man
            # the other 2x2 minors at a = 1 carry the same information
            others = {}
            for m in enumerate_minors(theta.big_t, 2, 0):
                if m == primary:
                    continue
                val, rel = _eval_rel(mc.det_minor(m), 1.0)
                others[str(m)] = {"det": val, "relative": rel}
            ev["other_minors_at_1"] = others
            on_manifold = abs(man["closed_form"]) <= 1e-9 * max(man["scale"], 1e-300)
            if on_manifold:
                survivors.append(x)
                log.append(CaseEntry("α̃=1 candidate on the unit-root manifold", "confirmed", ev))
            else:
                log.append(CaseEntry("α̃=1 candidate", "eliminated", ev))
        else:
            survivors.append(x)
            log.append(CaseEntry(f"candidate root {x:.10g}", "unresolved", ev))
    common = cluster_roots(survivors)
    identified = _verdict(alpha, common, per_minor)
    return IdentReport(identified, alpha, common, [primary], per_minor, log, theta.variant)


def check_theta(theta: Theta, n_minors: int = 2) -> IdentReport:
    """Dispatch to the check matching ``theta.variant``."""
    v = theta.variant
    if v is Variant.FIXED_EFFECTS_LEVELS:
        return check_fixed_effects_levels(theta)
    if v is Variant.DIFFERENCED:
        return check_differenced(theta, n_minors=n_minors)
    if v is Variant.AR_PANEL:
        return check_ar_panel(theta)
    return check_alpha_identification(theta, n_minors=n_minors)


def verify_sigma_equality(theta_a: Theta, theta_b: Theta) -> float:
    """Largest absolute entry of ``Sigma(theta_a) - Sigma(theta_b)``."""
    if theta_a.big_t != theta_b.big_t:
        raise ValueError(f"dimension mismatch: T={theta_a.big_t} vs T={theta_b.big_t}")
    gap = build_sigma(theta_a, check=False) - build_sigma(theta_b, check=False)
    return float(np.max(np.abs(gap)))
