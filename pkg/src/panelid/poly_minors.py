"""Polynomials in the probe coefficient and exclusion-minor determinants.

For a probe autoregressive coefficient ``a`` the transformed covariance is::

    O(a) = Q Omega Q' - D~,      Q = I + (alpha - a) L
         = Omega - D~ + (alpha - a) J(a),
    J(a) = L Omega + Omega L' + (alpha - a) L Omega L'

Entries of ``O`` outside the band where ``D~`` lives are polynomials in
``a`` alone. The determinant of an exclusion minor ``(R, C)`` of ``O``
splits as ``det(M^Omega_{R,C}) + (alpha - a) * Jt_{R,C}(a)`` where ``Jt`` is
built by Laplace expansion along the last row of ``R``.

Minor indices are 1-based throughout this module, matching the usual
``R = (1, 2), C = (3, 4)`` notation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as npp

from .model_core import Theta, Variant, build_L, build_omega

__all__ = [
    "AlphaPoly",
    "ExclusionMinor",
    "RankConditionError",
    "MinorCalculus",
    "poly_add",
    "poly_mul",
    "poly_eval",
    "poly_degree",
    "enumerate_minors",
    "build_J_poly",
    "off_diag_O_poly",
    "jtilde_poly",
    "det_minor_poly",
    "check_degree_bounds",
    "band_for",
    "hadamard_scale",
]

POLY_TOL = 1e-11
CORANK_RTOL = 1e-9


def _trim(coeffs: np.ndarray, tol: float = POLY_TOL) -> np.ndarray:
    c = np.asarray(coeffs, dtype=float).reshape(-1)
    if c.size == 0:
        return c
    thresh = tol * (1.0 + np.max(np.abs(c)))
    nz = np.nonzero(np.abs(c) > thresh)[0]
    if nz.size == 0:
        return np.zeros(0)
    return c[: nz[-1] + 1].copy()


class AlphaPoly:
    """Dense real polynomial in the probe coefficient, constant term first.

    Trailing coefficients below ``1e-11 * (1 + max|c|)`` are dropped on
    construction, so the zero polynomial has no coefficients and degree
    ``-inf``.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs: Iterable[float] = ()):
        c = _trim(np.fromiter(coeffs, dtype=float) if not isinstance(coeffs, np.ndarray) else coeffs)
        c.setflags(write=False)
        self._c = c

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @classmethod
    def constant(cls, value: float) -> "AlphaPoly":
        return cls(np.array([value], dtype=float))

    @classmethod
    def from_roots(cls, roots: Sequence[float], lead: float = 1.0) -> "AlphaPoly":
        return cls(lead * npp.polyfromroots(roots))

    def degree(self) -> Union[int, float]:
        return self._c.size - 1 if self._c.size else -math.inf

    def is_zero(self) -> bool:
        return self._c.size == 0

    def __call__(self, x):
        return poly_eval(self, x)

    def __add__(self, other):
        return poly_add(self, _coerce(other))

    __radd__ = __add__

    def __neg__(self):
        return AlphaPoly(-self._c)

    def __sub__(self, other):
        return poly_add(self, -_coerce(other))

    def __rsub__(self, other):
        return poly_add(_coerce(other), -self)

    def __mul__(self, other):
        return poly_mul(self, _coerce(other))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, AlphaPoly):
            return NotImplemented
        return self._c.shape == other._c.shape and bool(np.all(self._c == other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def allclose(self, other: "AlphaPoly", rtol: float = 1e-10) -> bool:
        """Coefficient-wise comparison relative to the larger coefficient scale."""
        n = max(self._c.size, other._c.size)
        a = np.zeros(n)
        b = np.zeros(n)
        a[: self._c.size] = self._c
        b[: other._c.size] = other._c
        scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0), 1e-300)
        return bool(np.all(np.abs(a - b) <= rtol * scale))

    def to_list(self) -> list[float]:
        return self._c.tolist()

    @classmethod
    def from_list(cls, coeffs: Sequence[float]) -> "AlphaPoly":
        return cls(np.asarray(coeffs, dtype=float))

    def __repr__(self) -> str:
        return f"AlphaPoly({self._c.tolist()})"


def _coerce(x) -> AlphaPoly:
    if isinstance(x, AlphaPoly):
        return x
    return AlphaPoly.constant(float(x))


def poly_add(p: AlphaPoly, q: AlphaPoly) -> AlphaPoly:
    return AlphaPoly(npp.polyadd(p.coeffs, q.coeffs) if p.coeffs.size and q.coeffs.size
                     else (p.coeffs if p.coeffs.size else q.coeffs))


def poly_mul(p: AlphaPoly, q: AlphaPoly) -> AlphaPoly:
    if p.is_zero() or q.is_zero():
        return AlphaPoly()
    return AlphaPoly(npp.polymul(p.coeffs, q.coeffs))


def poly_eval(p: AlphaPoly, x):
    """Horner evaluation; works elementwise on arrays."""
    x = np.asarray(x, dtype=float)
    acc = np.zeros_like(x)
    for c in p.coeffs[::-1]:
        acc = acc * x + c
    return acc if acc.ndim else float(acc)


def poly_degree(p: AlphaPoly) -> Union[int, float]:
    return p.degree()


# -- exclusion minors -----------------------------------------------------------


@dataclass(frozen=True, order=True)
class ExclusionMinor:
    """Square minor with 1-based row set ``rows`` and column set ``cols``.

    ``band=0`` excludes the main diagonal (``R`` and ``C`` disjoint);
    ``band=1`` excludes the whole tridiagonal band (``|r - c| >= 2``).
    """

    rows: tuple[int, ...]
    cols: tuple[int, ...]
    band: int = 0

    def __post_init__(self):
        rows = tuple(int(r) for r in self.rows)
        cols = tuple(int(c) for c in self.cols)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)
        if len(rows) != len(cols) or not rows:
            raise ValueError("rows and cols must be nonempty and of equal size")
        if any(b <= a for a, b in zip(rows, rows[1:])) or any(b <= a for a, b in zip(cols, cols[1:])):
            raise ValueError("rows and cols must be strictly increasing")
        if min(rows + cols) < 1:
            raise ValueError("indices are 1-based")
        if self.band not in (0, 1):
            raise ValueError("band must be 0 or 1")
        if any(abs(r - c) <= self.band for r in rows for c in cols):
            raise ValueError(f"minor {rows},{cols} touches the excluded band (band={self.band})")

    @property
    def k(self) -> int:
        return len(self.rows)

    def fits(self, big_t: int) -> bool:
        return max(self.rows + self.cols) <= big_t

    def transpose(self) -> "ExclusionMinor":
        return ExclusionMinor(self.cols, self.rows, self.band)

    def zero_based(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return tuple(r - 1 for r in self.rows), tuple(c - 1 for c in self.cols)

    def to_dict(self) -> dict:
        return {"rows": list(self.rows), "cols": list(self.cols)}

    @classmethod
    def from_dict(cls, doc: dict, band: int = 0) -> "ExclusionMinor":
        return cls(tuple(doc["rows"]), tuple(doc["cols"]), int(doc.get("band", band)))

    def __str__(self) -> str:
        return f"({','.join(map(str, self.rows))}),({','.join(map(str, self.cols))})"


def band_for(theta: Theta) -> int:
    """Excluded band width implied by the error covariance of ``theta``."""
    return 1 if theta.variant is Variant.DIFFERENCED else 0


def enumerate_minors(big_t: int, k: int, band: int = 0) -> list[ExclusionMinor]:
    """All exclusion minors of size ``k`` of a symmetric ``T x T`` matrix.

    Transposed pairs are identified; the representative keeps the smallest
    index in ``rows``. Order is lexicographic in ``(rows, cols)``.
    """
    if band not in (0, 1):
        raise ValueError("band must be 0 or 1")
    if k < 1 or big_t < 1:
        return []
    if (band == 0 and 2 * k > big_t) or (band == 1 and big_t < 2 * k + 1):
        return []
    idx = range(1, big_t + 1)
    out = []
    for rows in itertools.combinations(idx, k):
        blocked = {r + s for r in rows for s in range(-band, band + 1)}
        free = [c for c in idx if c not in blocked]
        for cols in itertools.combinations(free, k):
            if min(rows) < min(cols):
                out.append(ExclusionMinor(rows, cols, band))
    return out


# -- J and the Laplace recursion ------------------------------------------------


def hadamard_scale(m: np.ndarray) -> float:
    """Product of row norms: an upper bound on ``|det(m)|``."""
    if m.size == 0:
        return 1.0
    return float(np.prod(np.linalg.norm(m, axis=1)))


class RankConditionError(ValueError):
    """An exclusion minor of Omega larger than r_bar has nonzero determinant."""


class MinorCalculus:
    """Cached ``Omega`` and ``J`` for one parameter point.

    ``J = J0 + J1 * a`` with ``J0 = L Omega + Omega L' + alpha L Omega L'``
    and ``J1 = -L Omega L'``.
    """

    def __init__(self, theta: Theta):
        self.theta = theta
        self.alpha = theta.alpha
        self.band = band_for(theta)
        self.omega = build_omega(theta, check=False)
        L = build_L(theta.alpha, theta.big_t)
        lo = L @ self.omega
        lol = lo @ L.T
        self.j0 = lo + lo.T + theta.alpha * lol
        self.j1 = -lol
        self._shift = np.array([theta.alpha, -1.0])

    def j_coeffs(self, r: int, c: int) -> np.ndarray:
        """0-based entry of J as ``[const, linear]``."""
        return np.array([self.j0[r, c], self.j1[r, c]])

    def o_coeffs(self, r: int, c: int) -> np.ndarray:
        """0-based off-band entry of O: ``Omega[r, c] + (alpha - a) J[r, c]``."""
        return npp.polyadd([self.omega[r, c]], npp.polymul(self._shift, self.j_coeffs(r, c)))

    def _check(self, minor: ExclusionMinor) -> None:
        if minor.band != self.band:
            raise ValueError(f"minor band {minor.band} does not match the error structure (band {self.band})")
        if not minor.fits(self.theta.big_t):
            raise ValueError(f"minor {minor} exceeds T={self.theta.big_t}")

    def jtilde_coeffs(self, rows: tuple[int, ...], cols: tuple[int, ...], memo: dict | None = None) -> np.ndarray:
        """Raw coefficient array of ``Jt_{R,C}`` (0-based index tuples)."""
        if memo is None:
            memo = {}
        key = (rows, cols)
        hit = memo.get(key)
        if hit is not None:
            return hit
        k = len(rows)
        if k == 1:
            out = self.j_coeffs(rows[0], cols[0])
        else:
            rk, sub_rows = rows[-1], rows[:-1]
            out = np.zeros(1)
            for j, cj in enumerate(cols):
                sub_cols = cols[:j] + cols[j + 1:]
                det_om = np.linalg.det(self.omega[np.ix_(sub_rows, sub_cols)])
                jt_sub = self.jtilde_coeffs(sub_rows, sub_cols, memo)
                jrc = self.j_coeffs(rk, cj)
                term = npp.polyadd(jrc * det_om, self.omega[rk, cj] * jt_sub)
                term = npp.polyadd(term, npp.polymul(self._shift, npp.polymul(jrc, jt_sub)))
                # (-1)^(i+j) with 1-based i = k and j+1
                if (k + j + 1) % 2:
                    term = -term
                out = npp.polyadd(out, term)
        memo[key] = out
        return out

    def jtilde(self, minor: ExclusionMinor) -> AlphaPoly:
        self._check(minor)
        rows, cols = minor.zero_based()
        return AlphaPoly(self.jtilde_coeffs(rows, cols))

    def omega_minor_det(self, minor: ExclusionMinor) -> tuple[float, float]:
        """``det(M^Omega_{R,C})`` and its Hadamard scale."""
        rows, cols = minor.zero_based()
        m = self.omega[np.ix_(rows, cols)]
        return float(np.linalg.det(m)), hadamard_scale(m)

    def det_minor(self, minor: ExclusionMinor) -> AlphaPoly:
        self._check(minor)
        rows, cols = minor.zero_based()
        jt = self.jtilde_coeffs(rows, cols)
        det_om, scale = self.omega_minor_det(minor)
        if minor.k > self.theta.r_bar:
            if abs(det_om) > CORANK_RTOL * max(scale, 1e-300):
                raise RankConditionError(
                    f"det of Omega minor {minor} is {det_om:.3e} (scale {scale:.3e}) "
                    f"but must vanish for k={minor.k} > r_bar={self.theta.r_bar}"
                )
            det_om = 0.0
        return AlphaPoly(npp.polyadd([det_om], npp.polymul(self._shift, jt)))


def build_J_poly(theta: Theta) -> np.ndarray:
    """``T x T`` object array whose entries are the degree-<=1 polynomials of J."""
    mc = MinorCalculus(theta)
    T = theta.big_t
    out = np.empty((T, T), dtype=object)
    for r in range(T):
        for c in range(T):
            out[r, c] = AlphaPoly(mc.j_coeffs(r, c))
    return out


def off_diag_O_poly(theta: Theta, r: int, c: int) -> AlphaPoly:
    """Entry ``(r, c)`` (1-based) of O, valid only outside the excluded band."""
    band = band_for(theta)
    if abs(r - c) <= band:
        raise ValueError(
            f"entry ({r},{c}) lies in the band |r-c| <= {band}; it depends on the unknown error covariance"
        )
    if not (1 <= r <= theta.big_t and 1 <= c <= theta.big_t):
        raise IndexError(f"entry ({r},{c}) outside a {theta.big_t}x{theta.big_t} matrix")
    return AlphaPoly(MinorCalculus(theta).o_coeffs(r - 1, c - 1))


def jtilde_poly(theta: Theta, minor: ExclusionMinor) -> AlphaPoly:
    return MinorCalculus(theta).jtilde(minor)


def det_minor_poly(theta: Theta, minor: ExclusionMinor) -> AlphaPoly:
    """``det(M^O_{R,C})`` as a polynomial in the probe coefficient.

    Raises :class:`RankConditionError` when ``k > r_bar`` and the Omega minor
    does not vanish.
    """
    return MinorCalculus(theta).det_minor(minor)


def check_degree_bounds(theta: Theta, minor: ExclusionMinor, jt: AlphaPoly | None = None) -> bool:
    """``max(0, k - r_bar) <= deg(Jt) <= 2k - 1``; a zero ``Jt`` fails."""
    if jt is None:
        jt = jtilde_poly(theta, minor)
    k = minor.k
    deg = jt.degree()
    return max(0, k - theta.r_bar) <= deg <= 2 * k - 1
