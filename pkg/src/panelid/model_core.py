"""Structural parameter point and the second-moment matrices of the model.

The model for unit ``i`` stacked over ``T`` periods is::

    B y_i = delta + F lambda_i + eps_i,      Gamma = B^{-1}
    Sigma(theta) = Gamma (F Psi F' + D) Gamma' = Gamma Omega Gamma'

All matrices are small dense ``float64`` arrays. Indices in this module are
0-based; the minor machinery in :mod:`panelid.poly_minors` uses the 1-based
convention of the identification literature.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Sequence

import numpy as np

__all__ = [
    "Variant",
    "Normalization",
    "Theta",
    "NotPositiveDefiniteError",
    "build_B",
    "build_gamma",
    "build_L",
    "build_Q",
    "build_D",
    "build_omega",
    "build_sigma",
    "is_pd",
    "validate_normalization",
    "renormalize",
    "min_periods",
    "make_theta",
    "random_theta",
]


class Variant(str, enum.Enum):
    BASELINE = "Baseline"
    FIXED_EFFECTS_LEVELS = "FixedEffectsLevels"
    DIFFERENCED = "Differenced"
    AR_PANEL = "ArPanel"


class Normalization(str, enum.Enum):
    TOP_BLOCK_IDENTITY = "TopBlockIdentity"
    TAIL = "Tail"
    NONE = "None"


class NotPositiveDefiniteError(ValueError):
    """Raised when a covariance matrix that must be PD is not."""


PD_RTOL = 1e-10
_NORM_ATOL = 1e-12


def _as_matrix(x: Any, rows: int, cols: int, name: str) -> np.ndarray:
    a = np.array(x, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1 and cols == 1:
        a = a.reshape(-1, 1)
    if a.shape != (rows, cols):
        raise ValueError(f"{name} must have shape ({rows}, {cols}), got {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class Theta:
    """Structural parameter point ``(alpha, F, Psi, D)`` plus variant metadata.

    ``factors`` always holds the full ``T x r_bar`` matrix, normalized block
    included. For the differenced variant ``d_extra = (sigma2, sigma1_sq,
    sigma_c)`` parameterizes the tridiagonal error covariance and
    ``d_diag`` is ignored; ``big_t`` is then the length of the differenced
    series.
    """

    alpha: float
    big_t: int
    r_bar: int
    factors: np.ndarray
    psi: np.ndarray
    d_diag: np.ndarray
    d_extra: Optional[tuple[float, float, float]] = None
    variant: Variant = Variant.BASELINE
    normalization: Normalization = Normalization.TOP_BLOCK_IDENTITY

    def __post_init__(self) -> None:
        big_t, r_bar = int(self.big_t), int(self.r_bar)
        if big_t < 1:
            raise ValueError("T must be a positive integer")
        if r_bar < 0:
            raise ValueError("r_bar must be nonnegative")
        object.__setattr__(self, "big_t", big_t)
        object.__setattr__(self, "r_bar", r_bar)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "normalization", Normalization(self.normalization))
        f = _as_matrix(self.factors, big_t, r_bar, "factors")
        p = _as_matrix(self.psi, r_bar, r_bar, "psi")
        d = np.array(self.d_diag, dtype=float).reshape(-1)
        if self.variant is Variant.DIFFERENCED:
            if self.d_extra is None:
                raise ValueError("Differenced variant requires d_extra=(sigma2, sigma1_sq, sigma_c)")
            d = np.ones(big_t)  # unused; canonical value keeps comparisons exact
        elif d.size != big_t:
            raise ValueError(f"d_diag must have length T={big_t}, got {d.size}")
        if self.d_extra is not None:
            extra = tuple(float(v) for v in self.d_extra)
            if len(extra) != 3:
                raise ValueError("d_extra must be a triple (sigma2, sigma1_sq, sigma_c)")
            object.__setattr__(self, "d_extra", extra)
        for arr in (f, p, d):
            arr.setflags(write=False)
        object.__setattr__(self, "factors", f)
        object.__setattr__(self, "psi", p)
        object.__setattr__(self, "d_diag", d)

    # -- structural checks -------------------------------------------------

    def invariant_violations(self) -> list[str]:
        """Structural invariants other than the normalization."""
        out = []
        if not np.allclose(self.psi, self.psi.T, atol=1e-12):
            out.append("psi is not symmetric")
        elif self.r_bar > 0 and np.linalg.eigvalsh(self.psi).min() <= 0:
            out.append("psi is not positive definite")
        if self.variant is Variant.DIFFERENCED:
            sigma2, sigma1_sq, _ = self.d_extra
            if sigma2 <= 0 or sigma1_sq <= 0:
                out.append("d_extra variances must be positive")
        elif np.any(self.d_diag <= 0):
            out.append("d_diag entries must be strictly positive")
        if self.variant is Variant.FIXED_EFFECTS_LEVELS and self.r_bar != 2:
            out.append("FixedEffectsLevels requires r_bar = 2")
        if self.variant is Variant.AR_PANEL and self.r_bar != 1:
            out.append("ArPanel requires r_bar = 1")
        if self.big_t < min_periods(self.variant, self.r_bar):
            out.append(
                f"T={self.big_t} below the minimum {min_periods(self.variant, self.r_bar)} "
                f"for {self.variant.value}"
            )
        return out

    def validate(self) -> "Theta":
        problems = self.invariant_violations() + validate_normalization(self)
        if problems:
            raise ValueError("invalid Theta: " + "; ".join(problems))
        return self

    @property
    def level_periods(self) -> int:
        """Number of periods in levels (differenced data loses one)."""
        return self.big_t + 1 if self.variant is Variant.DIFFERENCED else self.big_t

    def with_alpha(self, alpha: float) -> "Theta":
        return replace(self, alpha=float(alpha))

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "T": self.big_t,
            "r_bar": self.r_bar,
            "F": self.factors.tolist(),
            "Psi": self.psi.tolist(),
            "d": self.d_diag.tolist(),
            "d_extra": list(self.d_extra) if self.d_extra is not None else None,
            "variant": self.variant.value,
            "normalization": self.normalization.value,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Theta":
        r_bar = int(doc["r_bar"])
        big_t = int(doc["T"])
        factors = np.array(doc["F"], dtype=float).reshape(big_t, r_bar)
        return cls(
            alpha=doc["alpha"],
            big_t=big_t,
            r_bar=r_bar,
            factors=factors,
            psi=np.array(doc["Psi"], dtype=float).reshape(r_bar, r_bar),
            d_diag=doc.get("d") if doc.get("d") is not None else np.ones(big_t),
            d_extra=tuple(doc["d_extra"]) if doc.get("d_extra") is not None else None,
            variant=Variant(doc.get("variant", "Baseline")),
            normalization=Normalization(doc.get("normalization", "TopBlockIdentity")),
        )

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "Theta":
        return cls.from_dict(json.loads(text))

    def allclose(self, other: "Theta", atol: float = 1e-12) -> bool:
        if (self.variant, self.big_t, self.r_bar) != (other.variant, other.big_t, other.r_bar):
            return False
        ok = (
            abs(self.alpha - other.alpha) <= atol
            and np.allclose(self.factors, other.factors, rtol=0, atol=atol)
            and np.allclose(self.psi, other.psi, rtol=0, atol=atol)
        )
        if self.variant is Variant.DIFFERENCED:
            ok = ok and np.allclose(self.d_extra, other.d_extra, rtol=0, atol=atol)
        else:
            ok = ok and np.allclose(self.d_diag, other.d_diag, rtol=0, atol=atol)
        return bool(ok)


def min_periods(variant: Variant, r_bar: int) -> int:
    """Smallest admissible T (for Differenced: in differences, i.e. levels - 1)."""
    variant = Variant(variant)
    if variant is Variant.BASELINE:
        return 2 * (r_bar + 1)
    if variant is Variant.FIXED_EFFECTS_LEVELS:
        return 6
    if variant is Variant.DIFFERENCED:
        return 2 * (r_bar + 1) + 2
    return 4


# -- builders ----------------------------------------------------------------


def build_B(alpha: float, big_t: int) -> np.ndarray:
    """Unit lower-bidiagonal matrix with ``-alpha`` on the first subdiagonal."""
    if big_t < 1:
        raise ValueError("big_t must be >= 1")
    return np.eye(big_t) - alpha * np.eye(big_t, k=-1)


def _toeplitz_lower(first_col: np.ndarray) -> np.ndarray:
    n = first_col.size
    idx = np.subtract.outer(np.arange(n), np.arange(n))
    out = np.zeros((n, n))
    mask = idx >= 0
    out[mask] = first_col[idx[mask]]
    return out


def build_gamma(alpha: float, big_t: int) -> np.ndarray:
    """``Gamma = B^{-1}``: ``Gamma[r, c] = alpha**(r - c)`` for ``r >= c``."""
    if big_t < 1:
        raise ValueError("big_t must be >= 1")
    powers = np.ones(big_t)
    for k in range(1, big_t):
        powers[k] = powers[k - 1] * alpha
    return _toeplitz_lower(powers)


def build_L(alpha: float, big_t: int) -> np.ndarray:
    """Strictly lower Toeplitz matrix with ``Q(alpha, a) = I + (alpha - a) L``."""
    if big_t < 1:
        raise ValueError("big_t must be >= 1")
    col = np.zeros(big_t)
    if big_t > 1:
        col[1:] = build_gamma(alpha, big_t - 1)[:, 0]
    return _toeplitz_lower(col)


def build_Q(alpha: float, alpha_probe: float, big_t: int) -> np.ndarray:
    """``Gamma(alpha_probe)^{-1} Gamma(alpha)`` via the Toeplitz decomposition."""
    return np.eye(big_t) + (alpha - alpha_probe) * build_L(alpha, big_t)


def build_D(theta: Theta) -> np.ndarray:
    """Idiosyncratic covariance: diagonal, or tridiagonal for differenced data."""
    if theta.variant is not Variant.DIFFERENCED:
        return np.diag(theta.d_diag)
    sigma2, sigma1_sq, sigma_c = theta.d_extra
    n = theta.big_t
    D = np.diag(np.full(n, 2.0 * sigma2)) - sigma2 * (np.eye(n, k=1) + np.eye(n, k=-1))
    D[0, 0] = sigma1_sq
    if n > 1:
        D[0, 1] = D[1, 0] = sigma_c
    return D


def is_pd(m: np.ndarray, rtol: float = PD_RTOL) -> bool:
    """Scale-aware PD test: smallest eigenvalue above ``rtol * trace / T``."""
    n = m.shape[0]
    if n == 0:
        return True
    w = np.linalg.eigvalsh((m + m.T) / 2.0)
    return bool(w[0] > rtol * max(np.trace(m) / n, 0.0)) and bool(np.all(np.isfinite(w)))


def build_omega(theta: Theta, check: bool = True) -> np.ndarray:
    """``Omega = F Psi F' + D`` (``D`` tridiagonal for the differenced variant)."""
    F = theta.factors
    omega = F @ theta.psi @ F.T + build_D(theta)
    omega = (omega + omega.T) / 2.0
    if check and not is_pd(omega):
        raise NotPositiveDefiniteError("Omega is not positive definite")
    return omega


def build_sigma(theta: Theta, check: bool = True) -> np.ndarray:
    """Population covariance ``Gamma Omega Gamma'`` of the observed vector."""
    G = build_gamma(theta.alpha, theta.big_t)
    sigma = G @ build_omega(theta, check=check) @ G.T
    return (sigma + sigma.T) / 2.0


# -- normalization -----------------------------------------------------------


def validate_normalization(theta: Theta, atol: float = _NORM_ATOL) -> list[str]:
    """List the normalization constraints ``theta`` violates (empty if none)."""
    F, r = theta.factors, theta.r_bar
    T = theta.big_t
    out: list[str] = []
    v, n = theta.variant, theta.normalization

    if v in (Variant.BASELINE, Variant.DIFFERENCED):
        if n is not Normalization.TOP_BLOCK_IDENTITY:
            out.append(f"{v.value} requires TopBlockIdentity normalization, got {n.value}")
        if r and T >= r and not np.allclose(F[:r, :], np.eye(r), rtol=0, atol=atol):
            out.append(f"top {r}x{r} block of factors is not the identity: {F[:r, :].tolist()}")
    elif v is Variant.FIXED_EFFECTS_LEVELS:
        if n is not Normalization.TAIL:
            out.append(f"FixedEffectsLevels requires Tail normalization, got {n.value}")
        if r != 2:
            out.append("FixedEffectsLevels requires r_bar = 2")
        else:
            if not np.allclose(F[1:, 0], 1.0, rtol=0, atol=atol):
                out.append("first factor column must be (f_gamma, 1, ..., 1)")
            if T >= 2 and not np.allclose(F[-2:, 1], [0.0, 1.0], rtol=0, atol=atol):
                out.append(f"last two entries of the free factor must be (0, 1), got {F[-2:, 1].tolist()}")
            if T >= 2 and abs(F[-2, 1] - F[-1, 1]) <= atol:
                out.append("f_{T-1} must differ from f_T")
    elif v is Variant.AR_PANEL:
        if n is not Normalization.NONE:
            out.append(f"ArPanel takes no rotation normalization, got {n.value}")
        if r != 1:
            out.append("ArPanel requires r_bar = 1")
        elif not np.allclose(F[1:, 0], 1.0, rtol=0, atol=atol):
            out.append("ArPanel factor must be (f_gamma, 1, ..., 1)")
    return out


def renormalize(theta: Theta) -> Theta:
    """Rotate ``(F, Psi)`` into the variant's normalized representation.

    ``F Psi F'`` is unchanged. Baseline/Differenced use ``F F_1^{-1}``;
    FixedEffectsLevels uses the rotation ``[[1, b], [0, d]]`` that puts
    ``(0, 1)`` in the last two entries of the free column.
    """
    F, psi = theta.factors, theta.psi
    v = theta.variant
    if v in (Variant.BASELINE, Variant.DIFFERENCED):
        top = F[: theta.r_bar, :]
        A = np.linalg.inv(top)
        norm = Normalization.TOP_BLOCK_IDENTITY
    elif v is Variant.FIXED_EFFECTS_LEVELS:
        f_prev, f_last = F[-2, 1], F[-1, 1]
        if abs(f_last - f_prev) < 1e-14:
            raise ValueError("tail normalization needs f_{T-1} != f_T")
        dd = 1.0 / (f_last - f_prev)
        A = np.array([[1.0, -f_prev * dd], [0.0, dd]])
        norm = Normalization.TAIL
    else:
        return theta
    A_inv = np.linalg.inv(A)
    new_f = F @ A
    new_psi = A_inv @ psi @ A_inv.T
    new_psi = (new_psi + new_psi.T) / 2.0
    if v is Variant.FIXED_EFFECTS_LEVELS:
        new_f[1:, 0] = 1.0
        new_f[-2:, 1] = (0.0, 1.0)
    else:
        new_f[: theta.r_bar, :] = np.eye(theta.r_bar)
    return replace(theta, factors=new_f, psi=new_psi, normalization=norm)


def make_theta(
    variant: Variant | str,
    alpha: float,
    factors: Sequence | np.ndarray,
    psi: Sequence | np.ndarray | float,
    d: Sequence | np.ndarray | None = None,
    d_extra: Optional[Sequence[float]] = None,
) -> Theta:
    """Convenience constructor that infers T, r_bar and the normalization."""
    variant = Variant(variant)
    f = np.array(factors, dtype=float)
    if f.ndim == 1:
        f = f.reshape(-1, 1)
    big_t, r_bar = f.shape
    norm = {
        Variant.BASELINE: Normalization.TOP_BLOCK_IDENTITY,
        Variant.DIFFERENCED: Normalization.TOP_BLOCK_IDENTITY,
        Variant.FIXED_EFFECTS_LEVELS: Normalization.TAIL,
        Variant.AR_PANEL: Normalization.NONE,
    }[variant]
    return Theta(
        alpha=alpha,
        big_t=big_t,
        r_bar=r_bar,
        factors=f,
        psi=np.atleast_2d(np.array(psi, dtype=float)),
        d_diag=np.ones(big_t) if d is None else d,
        d_extra=tuple(d_extra) if d_extra is not None else None,
        variant=variant,
        normalization=norm,
    )


def random_theta(
    variant: Variant | str,
    big_t: int,
    r_bar: int,
    rng: np.random.Generator,
    alpha: Optional[float] = None,
) -> Theta:
    """Draw a generic parameter point for ``variant``.

    Free factor entries are standard normal, ``Psi = A A' + I/2`` with ``A``
    standard normal, ``d_t ~ U(0.5, 2)`` and ``alpha ~ U(-0.95, 0.95)`` unless
    given. For differenced data ``sigma_c = c * sigma2`` with
    ``c ~ U(-0.9, 0.9)`` and ``sigma1_sq >= sigma2``, which keeps the
    implied level errors well defined.
    """
    variant = Variant(variant)
    if variant is Variant.FIXED_EFFECTS_LEVELS:
        r_bar = 2
    elif variant is Variant.AR_PANEL:
        r_bar = 1
    a = rng.uniform(-0.95, 0.95) if alpha is None else float(alpha)
    A = rng.standard_normal((r_bar, r_bar))
    psi = A @ A.T + 0.5 * np.eye(r_bar)
    d = rng.uniform(0.5, 2.0, size=big_t)
    d_extra = None
    if variant in (Variant.BASELINE, Variant.DIFFERENCED):
        F = rng.standard_normal((big_t, r_bar))
        F[:r_bar, :] = np.eye(r_bar)
        if variant is Variant.DIFFERENCED:
            sigma2 = rng.uniform(0.5, 2.0)
            sigma1_sq = sigma2 * rng.uniform(1.0, 2.0)
            d_extra = (sigma2, sigma1_sq, rng.uniform(-0.9, 0.9) * sigma2)
    elif variant is Variant.FIXED_EFFECTS_LEVELS:
        F = np.ones((big_t, 2))
        F[0, 0] = rng.standard_normal()
        F[:, 1] = rng.standard_normal(big_t)
        F[-2:, 1] = (0.0, 1.0)
    else:
        F = np.ones((big_t, 1))
        F[0, 0] = rng.standard_normal()
    return make_theta(variant, a, F, psi, d=d, d_extra=d_extra)
