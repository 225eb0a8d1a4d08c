"""Panel generation from the stacked model and sample second moments.

Each unit ``i`` is generated from::

    y_i = Gamma (delta + F lambda_i + eps_i)

so the first period is drawn directly with its own ``(delta_1, f_1, d_1)``
rather than by burn-in. Every unit owns a Philox substream keyed by the
seed with the unit index in the counter, so a panel is bit-identical for a
given seed regardless of how units are batched.
"""

from __future__ import annotations

import csv
import io
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from scipy.stats import norm, qmc

from .model_core import Theta, Variant, build_D, build_gamma

__all__ = [
    "LoadingSpec",
    "PanelSample",
    "unit_generator",
    "draw_components",
    "gen_panel",
    "sample_cov",
    "write_csv",
    "read_csv",
    "write_binary",
    "read_binary",
    "BINARY_MAGIC",
]

BINARY_MAGIC = b"PNLS"
BINARY_VERSION = 1
_U64_MASK = (1 << 64) - 1
_SQRT3 = float(np.sqrt(3.0))


@dataclass(frozen=True)
class LoadingSpec:
    """Distribution of loadings and idiosyncratic errors.

    ``kind`` is ``"normal"`` (Cholesky of Psi), ``"uniform"`` (independent
    unit-variance uniforms mapped through the Cholesky factor) or
    ``"fixed"`` (a deterministic low-discrepancy grid whitened so its
    sample covariance is exactly Psi). ``errors`` is ``"normal"`` or
    ``"uniform"``. ``mean`` defaults to zero.
    """

    kind: str = "normal"
    mean: Optional[tuple[float, ...]] = None
    errors: str = "normal"

    def __post_init__(self):
        if self.kind not in ("normal", "uniform", "fixed"):
            raise ValueError(f"unknown loading distribution {self.kind!r}")
        if self.errors not in ("normal", "uniform"):
            raise ValueError(f"unknown error distribution {self.errors!r}")
        if self.mean is not None:
            object.__setattr__(self, "mean", tuple(float(m) for m in self.mean))

    @classmethod
    def from_dict(cls, doc: Union[dict, str, None]) -> "LoadingSpec":
        if doc is None:
            return cls()
        if isinstance(doc, str):
            return cls(kind=doc)
        return cls(kind=doc.get("kind", "normal"), mean=doc.get("mean"), errors=doc.get("errors", "normal"))

    def to_dict(self) -> dict:
        return {"kind": self.kind, "mean": list(self.mean) if self.mean else None, "errors": self.errors}


@dataclass
class PanelSample:
    """``N x T`` outcome matrix plus the parameters and seed that made it."""

    y: np.ndarray
    theta_used: Theta
    delta: np.ndarray
    seed: int
    variant: Variant
    loading_spec: LoadingSpec = field(default_factory=LoadingSpec)

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if self.y.ndim != 2 or self.y.shape[0] < 2:
            raise ValueError("a panel needs a 2-D y with at least two units")
        if self.y.shape[1] != self.theta_used.big_t:
            raise ValueError(f"y has {self.y.shape[1]} periods but theta has T={self.theta_used.big_t}")

    @property
    def n_units(self) -> int:
        return self.y.shape[0]

    @property
    def big_t(self) -> int:
        return self.y.shape[1]


def unit_generator(seed: int, unit: int) -> np.random.Generator:
    """Philox stream for ``unit``: key = seed, unit index in the top counter word."""
    if seed < 0 or seed > _U64_MASK:
        raise ValueError("seed must be an unsigned 64-bit integer")
    counter = np.array([0, 0, 0, unit], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=seed, counter=counter))


def _fixed_loadings(n: int, chol: np.ndarray) -> np.ndarray:
    r = chol.shape[0]
    if n <= r:
        raise ValueError("fixed loadings need more units than factors")
    pts = qmc.Halton(d=r, scramble=False).random(n + 1)[1:]
    z = norm.ppf(pts)
    z -= z.mean(axis=0)
    cov = z.T @ z / (n - 1)
    z = z @ np.linalg.inv(np.linalg.cholesky(cov)).T
    return z @ chol.T


def _diff_error_params(theta: Theta) -> tuple[float, float, float]:
    sigma2, sigma1_sq, sigma_c = theta.d_extra
    resid = sigma1_sq - sigma_c**2 / sigma2
    if sigma2 <= 0 or resid < 0:
        raise ValueError(
            "d_extra is not generated by differenced white noise: need sigma2 > 0 and "
            "sigma1_sq >= sigma_c^2 / sigma2"
        )
    return sigma2, sigma_c / sigma2, float(np.sqrt(resid))


def draw_components(
    theta: Theta,
    n_units: int,
    seed: int,
    loading_spec: LoadingSpec | dict | str | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Loadings (``N x r_bar``) and idiosyncratic errors (``N x T``).

    Per unit the stream yields the loading draws first, then the errors.
    For differenced data the level shocks ``u_1..u_T`` (variance
    ``sigma2``) are drawn and differenced; the initial error is
    ``-(sigma_c/sigma2) u_1 + sqrt(sigma1_sq - sigma_c^2/sigma2) e`` which
    has variance ``sigma1_sq`` and covariance ``sigma_c`` with
    ``u_2 - u_1``.
    """
    spec = loading_spec if isinstance(loading_spec, LoadingSpec) else LoadingSpec.from_dict(loading_spec)
    if n_units < 2:
        raise ValueError("n_units must be at least 2")
    T, r = theta.big_t, theta.r_bar
    chol = np.linalg.cholesky(theta.psi) if r else np.zeros((0, 0))
    mean = np.zeros(r) if spec.mean is None else np.asarray(spec.mean, dtype=float)
    if mean.shape != (r,):
        raise ValueError(f"loading mean must have length r_bar={r}")
    diff = theta.variant is Variant.DIFFERENCED
    if diff:
        sigma2, proj, extra_sd = _diff_error_params(theta)
    else:
        sd = np.sqrt(theta.d_diag)

    z_load = np.empty((n_units, r))
    raw_err = np.empty((n_units, T + 1 if diff else T))
    for i in range(n_units):
        g = unit_generator(seed, i)
        if spec.kind == "normal":
            z_load[i] = g.standard_normal(r)
        elif spec.kind == "uniform":
            z_load[i] = g.uniform(-_SQRT3, _SQRT3, r)
        if spec.errors == "normal":
            raw_err[i] = g.standard_normal(raw_err.shape[1])
        else:
            raw_err[i] = g.uniform(-_SQRT3, _SQRT3, raw_err.shape[1])

    if spec.kind == "fixed":
        loadings = _fixed_loadings(n_units, chol) + mean
    else:
        loadings = z_load @ chol.T + mean

    if diff:
        u = raw_err[:, :T] * np.sqrt(sigma2)
        e = raw_err[:, T]
        errors = np.empty((n_units, T))
        errors[:, 0] = -proj * u[:, 0] + extra_sd * e
        errors[:, 1:] = u[:, 1:] - u[:, :-1]
    else:
        errors = raw_err * sd
    return loadings, errors


def gen_panel(
    theta: Theta,
    delta: Sequence[float] | np.ndarray | None,
    n_units: int,
    seed: int,
    loading_spec: LoadingSpec | dict | str | None = None,
) -> PanelSample:
    """Simulate ``n_units`` independent units from ``theta``."""
    spec = loading_spec if isinstance(loading_spec, LoadingSpec) else LoadingSpec.from_dict(loading_spec)
    T = theta.big_t
    delta = np.zeros(T) if delta is None else np.asarray(delta, dtype=float).reshape(-1)
    if delta.size != T:
        raise ValueError(f"delta must have length T={T}")
    loadings, errors = draw_components(theta, n_units, seed, spec)
    G = build_gamma(theta.alpha, T)
    y = (delta + loadings @ theta.factors.T + errors) @ G.T
    return PanelSample(y, theta, delta.copy(), int(seed), theta.variant, spec)


def sample_cov(panel: PanelSample | np.ndarray, divisor: str = "N-1") -> np.ndarray:
    """Centered cross-product matrix divided by ``N - 1`` or ``N``."""
    y = panel.y if isinstance(panel, PanelSample) else np.asarray(panel, dtype=float)
    n = y.shape[0]
    if n < 2:
        raise ValueError("need at least two units")
    if divisor in ("N-1", "N - 1", n - 1):
        div = n - 1
    elif divisor in ("N", n):
        div = n
    else:
        raise ValueError("divisor must be 'N-1' or 'N'")
    yc = y - y.mean(axis=0)
    s = yc.T @ yc / div
    return (s + s.T) / 2.0


# -- export -----------------------------------------------------------------


def write_csv(panel: PanelSample | np.ndarray, path: Union[str, Path, io.TextIOBase]) -> None:
    """CSV with header ``unit,t1..tT``; values round-trip exactly."""
    y = panel.y if isinstance(panel, PanelSample) else np.asarray(panel, dtype=float)
    header = ["unit"] + [f"t{t + 1}" for t in range(y.shape[1])]

    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for i, row in enumerate(y):
            w.writerow([i + 1] + [repr(float(v)) for v in row])

    if isinstance(path, (str, Path)):
        with open(path, "w", newline="") as fh:
            _write(fh)
    else:
        _write(path)


def read_csv(path: Union[str, Path]) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "unit":
        raise ValueError("not a panel CSV (missing 'unit' header)")
    return np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=float)


def write_binary(panel: PanelSample | np.ndarray, path: Union[str, Path]) -> None:
    """``PNLS`` magic, version byte, ``N`` and ``T`` as u64, row-major f64 (all little-endian)."""
    y = panel.y if isinstance(panel, PanelSample) else np.asarray(panel, dtype=float)
    n, t = y.shape
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<BQQ", BINARY_VERSION, n, t))
        fh.write(np.ascontiguousarray(y, dtype="<f8").tobytes())


def read_binary(path: Union[str, Path]) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != BINARY_MAGIC:
        raise ValueError("bad magic: not a PNLS panel file")
    version, n, t = struct.unpack_from("<BQQ", data, 4)
    if version != BINARY_VERSION:
        raise ValueError(f"unsupported PNLS version {version}")
    offset = 4 + struct.calcsize("<BQQ")
    body = np.frombuffer(data, dtype="<f8", count=n * t, offset=offset)
    return body.reshape(n, t).astype(float)
