"""Large-dimensional predictions for the unfoldings of a spiked tensor.

For an observation ``T = P + noise / sqrt(N)`` with i.i.d. standard Gaussian
noise, the Gram matrix of the mode-``l`` unfolding, centered by ``mu_l`` and
scaled by ``sigma``, has a semicircle bulk on [-2, 2]. A signal direction with
squared singular value ``s2`` and ratio ``rho = s2 / sigma > 1`` produces an
isolated eigenvalue at ``rho + 1/rho`` whose eigenvector has squared overlap
``1 - 1/rho**2`` with the signal subspace.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .tensor_core import TuckerFactors

__all__ = [
    "ScalePair",
    "SpikePrediction",
    "scales",
    "sigma_n",
    "semicircle_pdf",
    "semicircle_cdf",
    "semicircle_quantile",
    "stieltjes_sc",
    "spike_prediction",
    "predicted_mean_alignment",
    "phase_transitions",
    "ks_distance",
    "count_outliers",
    "noise_contraction_bound",
    "hooi_convergence_diagnostic",
]


@dataclass(frozen=True)
class ScalePair:
    """Centering ``mu`` (mode dependent) and spread ``sigma`` of a mode Gram spectrum."""

    mu: float
    sigma: float


@dataclass(frozen=True)
class SpikePrediction:
    rho: float
    xi: Optional[float]
    zeta_plus: float

    @property
    def detectable(self) -> bool:
        return self.xi is not None


def sigma_n(dims: Sequence[int], n_param: float) -> float:
    """``sqrt(prod(dims)) / N``."""
    return math.sqrt(math.prod(int(n) for n in dims)) / n_param


def scales(dims: Sequence[int], n_param: float, mode: int) -> ScalePair:
    """``mu = prod_{l != mode} n_l / N`` and ``sigma = sqrt(prod n_l) / N``."""
    dims = [int(n) for n in dims]
    if not 0 <= mode < len(dims):
        raise ValueError(f"mode {mode} out of range for {len(dims)} dims")
    mu = math.prod(dims[:mode] + dims[mode + 1:]) / n_param
    return ScalePair(mu=mu, sigma=sigma_n(dims, n_param))


def semicircle_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.sqrt(np.clip(4.0 - x * x, 0.0, None)) / (2.0 * np.pi)
    return out if out.ndim else float(out)


def semicircle_cdf(x):
    x = np.asarray(x, dtype=np.float64)
    xc = np.clip(x, -2.0, 2.0)
    out = 0.5 + (xc * np.sqrt(4.0 - xc * xc) + 4.0 * np.arcsin(xc / 2.0)) / (4.0 * np.pi)
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def semicircle_quantile(p, tol: float = 1e-14):
    """Inverse of :func:`semicircle_cdf` by bisection (vectorized)."""
    p = np.asarray(p, dtype=np.float64)
    lo = np.full(p.shape, -2.0)
    hi = np.full(p.shape, 2.0)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = semicircle_cdf(mid) < p
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
        if np.max(hi - lo, initial=0.0) < tol:
            break
    out = 0.5 * (lo + hi)
    return out if out.ndim else float(out)


def stieltjes_sc(z) -> complex:
    """Stieltjes transform of the semicircle law, the root of ``m^2 + z m + 1 = 0``.

    Off the real axis the root with ``Im(z) Im(m) > 0`` is returned; on the
    real axis outside [-2, 2] it is the root of modulus below one.
    """
    z = complex(z)
    if z.imag == 0.0 and abs(z.real) <= 2.0:
        raise ValueError(f"z = {z.real} lies on the support [-2, 2]")
    root = np.sqrt(z * z - 4.0)
    # the roots multiply to 1: take the large one without cancellation
    big = (-z - root) / 2.0 if (z.conjugate() * root).real >= 0 else (-z + root) / 2.0
    m1, m2 = 1.0 / big, big
    if z.imag != 0.0:
        return m1 if z.imag * m1.imag > 0 else m2
    return m1 if abs(m1) < 1.0 else m2


def spike_prediction(s_sq: float, sigma: float) -> SpikePrediction:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rho = float(s_sq) / sigma
    if rho > 1.0:
        return SpikePrediction(rho=rho, xi=rho + 1.0 / rho, zeta_plus=1.0 - 1.0 / rho**2)
    return SpikePrediction(rho=rho, xi=None, zeta_plus=0.0)


def predicted_mean_alignment(signal_sv_sq: Sequence[float], sigma: float) -> float:
    """``(1/r) sum_q max(0, 1 - (sigma / s_q^2)^2)``."""
    s2 = np.asarray(signal_sv_sq, dtype=np.float64)
    if s2.size == 0:
        raise ValueError("need at least one singular value")
    return float(np.mean([spike_prediction(v, sigma).zeta_plus for v in s2]))


def phase_transitions(signal_sv_sq: Sequence[float], sigma: float) -> np.ndarray:
    """SNR multipliers ``omega = sigma / s_q^2`` at which each direction detaches."""
    s2 = np.asarray(signal_sv_sq, dtype=np.float64)
    with np.errstate(divide="ignore"):
        return np.where(s2 > 0, sigma / s2, np.inf)


def ks_distance(esd) -> float:
    """Kolmogorov-Smirnov distance between a sample and the semicircle law."""
    x = np.sort(np.asarray(esd, dtype=np.float64).ravel())
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    f = semicircle_cdf(x)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(n) / n
    return float(max(upper.max(), lower.max(), 0.0))


def count_outliers(esd, epsilon: float) -> int:
    """Number of centered-scaled eigenvalues above ``2 + epsilon``."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return int(np.count_nonzero(np.asarray(esd, dtype=np.float64) > 2.0 + epsilon))


def noise_contraction_bound(
    dims: Sequence[int],
    ranks: Sequence[int],
    delta: float,
    c_universal: float = 1.0,
) -> float:
    """High-probability bound on ``sup ||noise(A1, ..., Ad)||_F^2`` over Stiefel factors.

    ``c_universal`` is the unquantified universal constant of the covering
    argument; it enters only through ``log(c * d / log(3/2))``.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if c_universal <= 0:
        raise ValueError("c_universal must be positive")
    if len(dims) != len(ranks):
        raise ValueError("dims and ranks differ in length")
    d = len(dims)
    dof = sum(r * (n - (r + 1) / 2) for n, r in zip(dims, ranks))
    expo = 0.5 * math.prod(ranks) - 1.0
    if expo < 700.0:
        tail = math.log((1.0 / delta) * max(1.0, math.exp(expo)))
    else:
        tail = math.log(1.0 / delta) + expo
    return 16.0 * (dof * math.log(c_universal * d / math.log(1.5)) + tail)


def hooi_convergence_diagnostic(signal: TuckerFactors, inits: Sequence[np.ndarray]) -> float:
    """Smallest signal energy left along any single true direction after contraction.

    For every mode ``l`` and direction ``q`` this is
    ``||P(U_1, ..., x_q^(l), ..., U_d)||_F``, with ``P`` contracted on the
    initial bases in every mode but ``l``. Computed on the core via the small
    cross-Gram matrices ``U_l.T @ X_l``.
    """
    if len(inits) != len(signal.factors):
        raise ValueError("one initial basis per mode is required")
    cross = []
    for k, (u, x) in enumerate(zip(inits, signal.factors)):
        u = np.asarray(u, dtype=np.float64)
        if u.ndim != 2 or u.shape[0] != x.shape[0]:
            raise ValueError(f"init {k} has shape {u.shape}, ambient dimension is {x.shape[0]}")
        cross.append(x.T @ u)
    best = math.inf
    for k in range(len(cross)):
        mats = [c if j != k else None for j, c in enumerate(cross)]
        part = signal.core
        for j, c in enumerate(mats):
            if c is not None:
                part = np.moveaxis(np.tensordot(part, c, axes=(j, 0)), -1, j)
        # part[..., q, ...] along mode k is the contraction with x_q
        slab = np.moveaxis(part, k, 0).reshape(part.shape[k], -1)
        best = min(best, float(np.min(np.linalg.norm(slab, axis=1))))
    return best
