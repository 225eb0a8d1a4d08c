"""Concentrated Gaussian quasi-maximum likelihood.

After concentrating out the mean, the per-unit objective is::

    f(theta) = 1/2 ln|Sigma(theta)| + 1/2 tr(Sigma(theta)^{-1} S)

which is minimized over an unconstrained parameter vector (see
:func:`pack`). Gradients are analytic; with
``G = (Sigma^{-1} - Sigma^{-1} S Sigma^{-1}) / 2`` and ``H = Gamma' G Gamma``:

* ``df/dF = 2 H F Psi``, ``df/dPsi = F' H F``, ``df/dd_t = H_tt``
* ``df/dalpha = 2 tr(G dGamma Omega Gamma')`` with ``dGamma = Gamma S1 Gamma``
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize

from .model_core import (
    Normalization,
    Theta,
    Variant,
    build_B,
    build_D,
    build_gamma,
    build_omega,
    build_sigma,
    make_theta,
    min_periods,
)
from .poly_minors import enumerate_minors
from .simulate import PanelSample, sample_cov

__all__ = [
    "BARRIER",
    "FitOptions",
    "FitResult",
    "neg_quasi_loglik",
    "limit_objective",
    "pack",
    "unpack",
    "n_free_params",
    "objective_and_grad",
    "numeric_gradient",
    "start_points",
    "fit",
    "recover_delta",
]

BARRIER = 1e10


# -- objective ---------------------------------------------------------------


def _chol_or_none(m: np.ndarray) -> Optional[np.ndarray]:
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        return None


def _barrier(sigma: np.ndarray) -> float:
    w = np.linalg.eigvalsh((sigma + sigma.T) / 2.0)
    scale = max(float(np.max(np.abs(w))), 1e-300) if np.all(np.isfinite(w)) else 1.0
    neg = -float(w[0]) / scale if np.all(np.isfinite(w)) else 1.0
    return BARRIER * (1.0 + max(neg, 0.0))


def neg_quasi_loglik(
    theta: Theta,
    s_n: np.ndarray,
    strict: bool = False,
    return_flag: bool = False,
):
    """``1/2 ln|Sigma(theta)| + 1/2 tr(Sigma(theta)^{-1} s_n)``.

    When ``Sigma(theta)`` is not PD the value is ``BARRIER`` times one plus
    the relative size of its most negative eigenvalue, or a
    ``ValueError`` with ``strict=True``. With ``return_flag=True`` returns
    ``(value, is_pd)``.
    """
    s_n = np.asarray(s_n, dtype=float)
    sigma = build_sigma(theta, check=False)
    if s_n.shape != sigma.shape:
        raise ValueError(f"s_n has shape {s_n.shape}, expected {sigma.shape}")
    c = _chol_or_none(sigma) if np.all(np.isfinite(sigma)) else None
    if c is None:
        if strict:
            raise ValueError("Sigma(theta) is not positive definite")
        val = _barrier(sigma) if np.all(np.isfinite(sigma)) else BARRIER * 2
        return (val, False) if return_flag else val
    logdet = 2.0 * float(np.sum(np.log(np.diag(c))))
    x = np.linalg.solve(c, s_n)
    x = np.linalg.solve(c, x.T)  # C^{-1} S C^{-T}
    val = 0.5 * logdet + 0.5 * float(np.trace(x))
    return (val, True) if return_flag else val


def limit_objective(theta: Theta, theta0: Theta) -> float:
    """Population objective ``-ln|Sigma(theta)| - tr(Sigma(theta0) Sigma(theta)^{-1})``."""
    sigma = build_sigma(theta)
    sigma0 = build_sigma(theta0)
    c = np.linalg.cholesky(sigma)
    logdet = 2.0 * float(np.sum(np.log(np.diag(c))))
    inv = np.linalg.solve(c.T, np.linalg.solve(c, np.eye(sigma.shape[0])))
    return -logdet - float(np.sum(sigma0 * inv))


# -- parameterization --------------------------------------------------------


def _norm_for(variant: Variant) -> Normalization:
    return {
        Variant.BASELINE: Normalization.TOP_BLOCK_IDENTITY,
        Variant.DIFFERENCED: Normalization.TOP_BLOCK_IDENTITY,
        Variant.FIXED_EFFECTS_LEVELS: Normalization.TAIL,
        Variant.AR_PANEL: Normalization.NONE,
    }[variant]


def _free_f_mask(variant: Variant, big_t: int, r_bar: int) -> np.ndarray:
    mask = np.zeros((big_t, r_bar), dtype=bool)
    if variant in (Variant.BASELINE, Variant.DIFFERENCED):
        mask[r_bar:, :] = True
    elif variant is Variant.FIXED_EFFECTS_LEVELS:
        mask[0, 0] = True
        mask[: big_t - 2, 1] = True
    else:
        mask[0, 0] = True
    return mask


def _fixed_f(variant: Variant, big_t: int, r_bar: int) -> np.ndarray:
    f = np.zeros((big_t, r_bar))
    if variant in (Variant.BASELINE, Variant.DIFFERENCED):
        f[:r_bar, :] = np.eye(r_bar)
    elif variant is Variant.FIXED_EFFECTS_LEVELS:
        f[:, 0] = 1.0
        f[-1, 1] = 1.0
    else:
        f[:, 0] = 1.0
    return f


def n_free_params(variant: Variant, big_t: int, r_bar: int) -> int:
    variant = Variant(variant)
    nd = 3 if variant is Variant.DIFFERENCED else big_t
    return 1 + int(_free_f_mask(variant, big_t, r_bar).sum()) + r_bar * (r_bar + 1) // 2 + nd


def _tril_idx(r: int):
    return np.tril_indices(r)


def pack(theta: Theta) -> np.ndarray:
    """Unconstrained vector ``(alpha, free F, log-Cholesky Psi, log d)``.

    Free F entries are taken row-major. The Cholesky factor is stored row
    by row over its lower triangle with the diagonal on the log scale.
    Differenced points store ``(log sigma2, log sigma1_sq, sigma_c)``
    in place of ``log d``.
    """
    mask = _free_f_mask(theta.variant, theta.big_t, theta.r_bar)
    parts = [np.array([theta.alpha]), theta.factors[mask]]
    if theta.r_bar:
        c = np.linalg.cholesky(theta.psi)
        c[np.diag_indices(theta.r_bar)] = np.log(np.diag(c))
        parts.append(c[_tril_idx(theta.r_bar)])
    if theta.variant is Variant.DIFFERENCED:
        s2, s1, sc = theta.d_extra
        parts.append(np.array([math.log(s2), math.log(s1), sc]))
    else:
        parts.append(np.log(theta.d_diag))
    return np.concatenate(parts)


def unpack(v: Sequence[float] | np.ndarray, template: Theta) -> Theta:
    """Inverse of :func:`pack`; ``template`` supplies variant, T and r_bar."""
    v = np.asarray(v, dtype=float).reshape(-1)
    variant, T, r = template.variant, template.big_t, template.r_bar
    n = n_free_params(variant, T, r)
    if v.size != n:
        raise ValueError(f"template mismatch: vector has {v.size} entries, {variant.value} T={T} r_bar={r} needs {n}")
    alpha, F, psi, d, d_extra, _ = _split(v, variant, T, r)
    return Theta(
        alpha=alpha,
        big_t=T,
        r_bar=r,
        factors=F,
        psi=psi,
        d_diag=d,
        d_extra=d_extra,
        variant=variant,
        normalization=_norm_for(variant),
    )


def _split(v: np.ndarray, variant: Variant, T: int, r: int):
    mask = _free_f_mask(variant, T, r)
    nf = int(mask.sum())
    i = 0
    alpha = float(v[i])
    i += 1
    F = _fixed_f(variant, T, r)
    F[mask] = v[i : i + nf]
    i += nf
    nc = r * (r + 1) // 2
    C = np.zeros((r, r))
    C[_tril_idx(r)] = v[i : i + nc]
    i += nc
    di = np.diag_indices(r)
    C[di] = np.exp(C[di])
    psi = C @ C.T
    if variant is Variant.DIFFERENCED:
        d_extra = (math.exp(v[i]), math.exp(v[i + 1]), float(v[i + 2]))
        d = np.ones(T)
    else:
        d_extra = None
        d = np.exp(v[i : i + T])
    return alpha, F, psi, d, d_extra, C


class _Problem:
    """Objective and analytic gradient in packed coordinates."""

    def __init__(self, s: np.ndarray, variant: Variant, r_bar: int):
        self.s = np.asarray(s, dtype=float)
        self.T = self.s.shape[0]
        self.variant = Variant(variant)
        self.r = r_bar
        self.mask = _free_f_mask(self.variant, self.T, r_bar)
        self.nf = int(self.mask.sum())
        self.n = n_free_params(self.variant, self.T, r_bar)
        self.shift = np.eye(self.T, k=-1)
        self.nfev = 0

    def theta(self, v: np.ndarray, template: Theta) -> Theta:
        return unpack(v, template)

    def value_grad(self, v: np.ndarray) -> tuple[float, np.ndarray]:
        self.nfev += 1
        T, r = self.T, self.r
        with np.errstate(over="ignore", invalid="ignore"):
            alpha, F, psi, d, d_extra, C = _split(v, self.variant, T, r)
        if self.variant is Variant.DIFFERENCED:
            s2, s1, sc = d_extra
            D = s2 * (2 * np.eye(T) - np.eye(T, k=1) - np.eye(T, k=-1))
            D[0, 0] = s1
            if T > 1:
                D[0, 1] = D[1, 0] = sc
        else:
            D = np.diag(d)
        G_ = build_gamma(alpha, T)
        omega = F @ psi @ F.T + D
        sigma = G_ @ omega @ G_.T
        sigma = (sigma + sigma.T) / 2
        if not np.all(np.isfinite(sigma)):
            return 2 * BARRIER, np.zeros(self.n)
        c = _chol_or_none(sigma)
        if c is None:
            return _barrier(sigma), np.zeros(self.n)
        cinv = np.linalg.solve(c, np.eye(T))
        sinv = cinv.T @ cinv
        val = float(np.sum(np.log(np.diag(c)))) + 0.5 * float(np.sum(sinv * self.s))
        if not math.isfinite(val):
            return 2 * BARRIER, np.zeros(self.n)
        g = 0.5 * (sinv - sinv @ self.s @ sinv)
        H = G_.T @ g @ G_
        grad = np.empty(self.n)
        dgam = G_ @ self.shift @ G_
        grad[0] = 2.0 * float(np.sum(g * (dgam @ omega @ G_.T)))
        i = 1
        grad[i : i + self.nf] = (2.0 * H @ F @ psi)[self.mask]
        i += self.nf
        if r:
            gC = 2.0 * (F.T @ H @ F) @ C
            di = np.diag_indices(r)
            gC[di] *= C[di]
            nc = r * (r + 1) // 2
            grad[i : i + nc] = gC[_tril_idx(r)]
            i += nc
        if self.variant is Variant.DIFFERENCED:
            hd = np.diag(H)
            off = np.diag(H, k=1)
            grad[i] = (2.0 * hd[1:].sum() - 2.0 * off[1:].sum()) * s2
            grad[i + 1] = H[0, 0] * s1
            grad[i + 2] = 2.0 * H[0, 1] if T > 1 else 0.0
        else:
            grad[i : i + T] = np.diag(H) * d
        return val, grad

    def value(self, v: np.ndarray) -> float:
        return self.value_grad(v)[0]


def objective_and_grad(v: np.ndarray, s: np.ndarray, template: Theta) -> tuple[float, np.ndarray]:
    """Packed-space objective and its analytic gradient."""
    return _Problem(s, template.variant, template.r_bar).value_grad(np.asarray(v, dtype=float))


def numeric_gradient(fun, v: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    """Central differences with step ``rel_step * (1 + |v_j|)``."""
    v = np.asarray(v, dtype=float)
    g = np.empty_like(v)
    for j in range(v.size):
        h = rel_step * (1.0 + abs(v[j]))
        e = np.zeros_like(v)
        e[j] = h
        g[j] = (fun(v + e) - fun(v - e)) / (2.0 * h)
    return g


# -- results -----------------------------------------------------------------


@dataclass
class FitOptions:
    """Optimizer settings.

    ``gtol`` bounds the final numeric-gradient norm relative to
    ``1 + |objective|``; ``n_starts`` deterministic starts are tried, plus
    ``n_random_starts`` jittered ones drawn from ``seed``.
    """

    n_starts: int = 8
    n_random_starts: int = 0
    seed: Optional[int] = None
    max_iter: int = 2000
    gtol: float = 1e-6
    polish: bool = True
    early_stop: bool = True
    extra_starts: list = field(default_factory=list)

    @classmethod
    def from_dict(cls, doc: Optional[dict]) -> "FitOptions":
        if not doc:
            return cls()
        known = {k: doc[k] for k in ("n_starts", "n_random_starts", "seed", "max_iter", "gtol", "polish", "early_stop") if k in doc}
        return cls(**known)


@dataclass
class FitResult:
    theta_hat: Theta
    loglik: float
    n_iterations: int
    converged: bool
    gradient_norm: float
    start_points_tried: int
    objective: float = float("nan")
    n_units: Optional[int] = None
    message: str = ""
    start_objectives: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "theta_hat": self.theta_hat.to_dict(),
            "loglik": self.loglik,
            "objective": self.objective,
            "n_iterations": self.n_iterations,
            "converged": self.converged,
            "gradient_norm": self.gradient_norm,
            "start_points_tried": self.start_points_tried,
            "start_objectives": [o if math.isfinite(o) else None for o in self.start_objectives],
            "n_units": self.n_units,
            "message": self.message,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


# -- starting values ---------------------------------------------------------


def _lag1_alpha(s: np.ndarray) -> float:
    num = float(np.sum(np.diag(s, k=-1)))
    den = float(np.sum(np.diag(s)[:-1]))
    return num / den if den > 0 else 0.0


def _minor_alphas(s: np.ndarray, r_bar: int, band: int, k: int = 3) -> list[float]:
    """Local minima of the summed squared exclusion-minor determinants of B S B'."""
    T = s.shape[0]
    minors = enumerate_minors(T, r_bar + 1, band)
    if not minors:
        return []
    grid = np.linspace(-1.5, 1.5, 301)
    crit = np.empty(grid.size)
    idx = [m.zero_based() for m in minors]
    for n, a in enumerate(grid):
        B = build_B(a, T)
        om = B @ s @ B.T
        dg = np.sqrt(np.abs(np.diag(om)))
        om = om / np.outer(dg, dg)
        crit[n] = sum(np.linalg.det(om[np.ix_(R, C)]) ** 2 for R, C in idx)
    mins = [i for i in range(1, grid.size - 1) if crit[i] <= crit[i - 1] and crit[i] <= crit[i + 1]]
    mins.sort(key=lambda i: crit[i])
    out = []
    for i in mins[:k]:
        # refine by golden-section-like parabola on the neighbors
        x0, x1, x2 = grid[i - 1], grid[i], grid[i + 1]
        y0, y1, y2 = crit[i - 1], crit[i], crit[i + 1]
        den = y0 - 2 * y1 + y2
        out.append(float(x1 + 0.5 * (x1 - x0) * (y0 - y2) / den) if den > 0 else float(x1))
    return out


def _principal_factor(om: np.ndarray, r: int, iters: int = 30) -> tuple[np.ndarray, np.ndarray]:
    """``om ~ L L' + diag(u)`` by iterated principal factoring."""
    T = om.shape[0]
    u = np.diag(om) / 2.0
    floor = 1e-3 * np.maximum(np.diag(om), 1e-8)
    L = np.zeros((T, r))
    for _ in range(iters):
        w, V = np.linalg.eigh(om - np.diag(u))
        w, V = w[::-1][:r], V[:, ::-1][:, :r]
        L = V * np.sqrt(np.maximum(w, 1e-8))
        u = np.maximum(np.diag(om) - np.sum(L**2, axis=1), floor)
    return L, u


def _nearest_pd(psi: np.ndarray, floor: float = 1e-4) -> np.ndarray:
    psi = (psi + psi.T) / 2
    w, V = np.linalg.eigh(psi)
    w = np.maximum(w, floor * max(1.0, float(np.max(np.abs(w)))))
    return (V * w) @ V.T


def _spectral_start(s: np.ndarray, alpha: float, variant: Variant, r: int) -> Optional[Theta]:
    T = s.shape[0]
    B = build_B(alpha, T)
    om = B @ s @ B.T
    om = (om + om.T) / 2
    L, u = _principal_factor(om, r) if r else (np.zeros((T, 0)), np.diag(om).copy())
    d_extra = None
    try:
        if variant in (Variant.BASELINE, Variant.DIFFERENCED):
            top = L[:r, :]
            if abs(np.linalg.det(top)) < 1e-10:
                return None
            F = L @ np.linalg.inv(top)
            psi = top @ top.T
            F[:r, :] = np.eye(r)
            if variant is Variant.DIFFERENCED:
                resid = om - L @ L.T
                s2 = max(float(np.mean(np.diag(resid)[1:])) / 2.0, 1e-3)
                s1 = max(float(resid[0, 0]), s2)
                sc = float(np.clip(resid[0, 1], -0.9 * math.sqrt(s1 * s2), 0.9 * math.sqrt(s1 * s2)))
                d_extra = (s2, s1, sc)
        elif variant is Variant.FIXED_EFFECTS_LEVELS:
            a, *_ = np.linalg.lstsq(L[1:, :], np.ones(T - 1), rcond=None)
            b = np.linalg.solve(L[-2:, :], np.array([0.0, 1.0]))
            A = np.column_stack([a, b])
            if abs(np.linalg.det(A)) < 1e-10:
                return None
            F = L @ A
            Ai = np.linalg.inv(A)
            psi = Ai @ Ai.T
            F[1:, 0] = 1.0
            F[-2:, 1] = (0.0, 1.0)
        else:
            c = float(np.mean(L[1:, 0]))
            if abs(c) < 1e-8:
                return None
            F = L / c
            psi = np.array([[c * c]])
            F[1:, 0] = 1.0
    except np.linalg.LinAlgError:
        return None
    psi = _nearest_pd(psi)
    return make_theta(variant, alpha, F, psi, d=np.maximum(u, 1e-3), d_extra=d_extra)


def start_points(s: np.ndarray, r_bar: int, variant: Variant, n_starts: int = 8) -> list[Theta]:
    """Deterministic starts: lag-1 alpha, minor-based alphas, then a spread grid.

    Each alpha is completed by a principal-factor decomposition of
    ``B(alpha) S B(alpha)'`` rotated into the variant's normalization.
    """
    variant = Variant(variant)
    band = 1 if variant is Variant.DIFFERENCED else 0
    alphas = [_lag1_alpha(s)] + _minor_alphas(s, r_bar, band)
    for a in np.linspace(-0.8, 1.1, 8):
        alphas.append(float(a))
    chosen: list[float] = []
    for a in alphas:
        if all(abs(a - b) > 0.05 for b in chosen):
            chosen.append(float(np.clip(a, -1.5, 1.5)))
        if len(chosen) >= n_starts:
            break
    out = []
    for a in chosen:
        th = _spectral_start(s, a, variant, r_bar)
        if th is not None:
            out.append(th)
    return out


# -- optimizer ---------------------------------------------------------------


def _fd_hessian(prob: _Problem, v: np.ndarray) -> np.ndarray:
    n = v.size
    Hm = np.empty((n, n))
    for j in range(n):
        h = 1e-5 * (1.0 + abs(v[j]))
        e = np.zeros(n)
        e[j] = h
        Hm[:, j] = (prob.value_grad(v + e)[1] - prob.value_grad(v - e)[1]) / (2 * h)
    return (Hm + Hm.T) / 2


def _newton_polish(prob: _Problem, v: np.ndarray, f: float, iters: int = 15) -> tuple[np.ndarray, float, int]:
    used = 0
    for _ in range(iters):
        val, g = prob.value_grad(v)
        if np.max(np.abs(g)) <= 1e-13 * (1 + abs(val)):
            break
        Hm = _fd_hessian(prob, v)
        w, V = np.linalg.eigh(Hm)
        w = np.maximum(np.abs(w), 1e-10 * max(1.0, float(np.max(np.abs(w)))))
        step = -(V @ ((V.T @ g) / w))
        t = 1.0
        improved = False
        for _ls in range(30):
            cand = v + t * step
            fc = prob.value(cand)
            if fc <= f:
                v, f, improved = cand, fc, True
                break
            t *= 0.5
        used += 1
        if not improved:
            break
    return v, f, used


def _cov_input(panel_or_cov) -> tuple[np.ndarray, Optional[int]]:
    if isinstance(panel_or_cov, PanelSample):
        return sample_cov(panel_or_cov, divisor="N"), panel_or_cov.n_units
    if isinstance(panel_or_cov, tuple) and len(panel_or_cov) == 2:
        s, n = panel_or_cov
        return np.asarray(s, dtype=float), (None if n is None else int(n))
    return np.asarray(panel_or_cov, dtype=float), None


def fit(
    panel_or_cov: Union[PanelSample, tuple, np.ndarray],
    r_bar: int,
    variant: Variant | str = Variant.BASELINE,
    options: Optional[FitOptions | dict] = None,
) -> FitResult:
    """Minimize the concentrated quasi-likelihood from several starts.

    ``panel_or_cov`` is a :class:`PanelSample` (covariance taken with
    divisor ``N``), a ``(S, N)`` pair, or a bare ``T x T`` matrix.
    """
    variant = Variant(variant)
    opts = options if isinstance(options, FitOptions) else FitOptions.from_dict(options)
    s, n_units = _cov_input(panel_or_cov)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValueError("covariance input must be a square matrix")
    s = (s + s.T) / 2
    T = s.shape[0]
    if variant is Variant.FIXED_EFFECTS_LEVELS:
        r_bar = 2
    elif variant is Variant.AR_PANEL:
        r_bar = 1
    need = min_periods(variant, r_bar)
    if T < need:
        raise ValueError(f"{variant.value} with r_bar={r_bar} needs T >= {need}, got T={T}")

    prob = _Problem(s, variant, r_bar)
    starts = start_points(s, r_bar, variant, opts.n_starts)
    starts += [st if isinstance(st, Theta) else Theta.from_dict(st) for st in opts.extra_starts]
    if opts.n_random_starts:
        rng = np.random.default_rng(opts.seed)
        base = starts[0] if starts else None
        for _ in range(opts.n_random_starts):
            if base is None:
                break
            v0 = pack(base) + rng.normal(scale=0.3, size=prob.n)
            starts.append(unpack(v0, base))

    # the unconstrained minimum of 1/2 ln|Sigma| + 1/2 tr(Sigma^{-1} S) over all PD Sigma
    c = _chol_or_none(s)
    lower = float(np.sum(np.log(np.diag(c)))) + T / 2 if c is not None else -math.inf

    best = None
    tried = 0
    objs: list[float] = []
    for st in starts:
        tried += 1
        v0 = pack(st)
        f0 = prob.value(v0)
        if f0 >= BARRIER:
            objs.append(math.inf)
            continue
        res = minimize(
            prob.value_grad,
            v0,
            jac=True,
            method="BFGS",
            options={"maxiter": opts.max_iter, "gtol": 1e-9 * (1 + abs(f0))},
        )
        v, f, nit = res.x, float(res.fun), int(res.nit)
        if opts.polish and f < BARRIER:
            v, f, extra = _newton_polish(prob, v, f)
            nit += extra
        objs.append(f)
        if best is None or f < best[1]:
            best = (v, f, nit)
        if opts.early_stop and f - lower <= 1e-12 * (1 + abs(f)) and tried >= 1:
            break

    template = make_theta(variant, 0.0, _fixed_f(variant, T, r_bar), np.eye(r_bar), d=np.ones(T),
                          d_extra=(1.0, 1.0, 0.0) if variant is Variant.DIFFERENCED else None)
    if best is None or best[1] >= BARRIER:
        theta_hat = starts[0] if starts else template
        return FitResult(theta_hat, -math.inf, 0, False, math.inf, tried, math.inf, n_units,
                         "no start produced a positive definite Sigma", objs)
    v, f, nit = best
    gnum = numeric_gradient(prob.value, v)
    gnorm = float(np.linalg.norm(gnum))
    converged = gnorm <= opts.gtol * (1 + abs(f))
    theta_hat = unpack(v, template)
    msg = "converged" if converged else f"gradient norm {gnorm:.3e} above tolerance"
    return FitResult(theta_hat, -f, nit, converged, gnorm, tried, f, n_units, msg, objs)


def recover_delta(panel: PanelSample, theta_hat: Theta) -> np.ndarray:
    """Convenience estimate ``B(alpha_hat) ybar`` of the time effects (not part of the QMLE)."""
    return build_B(theta_hat.alpha, theta_hat.big_t) @ panel.y.mean(axis=0)
