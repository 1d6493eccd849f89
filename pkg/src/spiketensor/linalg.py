"""Dominant singular subspaces via Gram eigendecomposition, and subspace metrics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralResult",
    "gram_spectrum",
    "dominant_left_subspace",
    "full_gram_spectrum",
    "orthonormalize",
    "is_orthonormal",
    "principal_angles",
    "mean_alignment",
]


@dataclass(frozen=True)
class SpectralResult:
    """Eigenvalues in non-increasing order with matching orthonormal eigenvectors."""

    values: np.ndarray
    basis: np.ndarray


def gram_spectrum(gram, r: int | None = None) -> SpectralResult:
    """Top-``r`` eigenpairs of a symmetric positive semi-definite matrix.

    Uses LAPACK's dense symmetric solver on the full matrix; ``r=None`` keeps
    every eigenpair.
    """
    gram = np.asarray(gram, dtype=np.float64)
    n = gram.shape[0]
    if gram.ndim != 2 or gram.shape[1] != n:
        raise ValueError(f"Gram matrix must be square, got shape {gram.shape}")
    r = n if r is None else int(r)
    if not 1 <= r <= n:
        raise ValueError(f"requested {r} eigenpairs of a {n}x{n} matrix")
    # symmetrize against rounding in the accumulated product
    vals, vecs = np.linalg.eigh(0.5 * (gram + gram.T))
    order = np.argsort(vals)[::-1][:r]
    return SpectralResult(values=vals[order], basis=np.ascontiguousarray(vecs[:, order]))


def dominant_left_subspace(m, r: int) -> SpectralResult:
    """Top-``r`` left singular vectors of ``m`` and the squared singular values.

    The ``rows x rows`` Gram matrix ``m @ m.T`` is diagonalized instead of
    taking an SVD of the (typically very wide) matrix itself.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("expected a matrix")
    if not 1 <= r <= min(m.shape):
        raise ValueError(f"rank {r} exceeds min dimension of a {m.shape[0]}x{m.shape[1]} matrix")
    return gram_spectrum(m @ m.T, r)


def full_gram_spectrum(m) -> SpectralResult:
    """All eigenvalues (and eigenvectors) of ``m @ m.T``, non-increasing."""
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    return gram_spectrum(m @ m.T)


def orthonormalize(m, rtol: float = 1e-12) -> np.ndarray:
    """Orthonormal basis of the column span of ``m`` by Householder QR.

    Columns are signed so that ``R`` has a positive diagonal, which makes the
    output unique. Raises ``ValueError`` on numerically rank-deficient input.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.shape[1] > m.shape[0]:
        raise ValueError(f"cannot orthonormalize {m.shape[1]} columns in dimension {m.shape[0]}")
    q, rmat = np.linalg.qr(m)
    diag = np.diag(rmat)
    mags = np.abs(diag)
    if mags.max(initial=0.0) == 0.0 or mags.min() < rtol * mags.max():
        raise ValueError("matrix is numerically rank deficient")
    return q * np.where(diag < 0, -1.0, 1.0)


def is_orthonormal(u, atol: float = 1e-10) -> bool:
    u = np.asarray(u, dtype=np.float64)
    return bool(np.max(np.abs(u.T @ u - np.eye(u.shape[1])), initial=0.0) <= atol)


def _cross(x, u) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    x = x[:, None] if x.ndim == 1 else x
    u = u[:, None] if u.ndim == 1 else u
    if x.shape[0] != u.shape[0]:
        raise ValueError(f"ambient dimensions differ: {x.shape[0]} vs {u.shape[0]}")
    return x.T @ u


def principal_angles(x, u) -> np.ndarray:
    """Principal angles between ``span(x)`` and ``span(u)``, non-decreasing.

    Both inputs must have orthonormal columns. The cosines are the singular
    values of ``x.T @ u``; they are clipped to [0, 1] before ``arccos``.
    """
    s = np.linalg.svd(_cross(x, u), compute_uv=False)
    return np.arccos(np.clip(s, 0.0, 1.0))


def mean_alignment(x, u) -> float:
    """``||x.T @ u||_F^2 / r``, the mean squared cosine of the principal angles."""
    c = _cross(x, u)
    if c.shape[0] != c.shape[1]:
        raise ValueError(f"column counts differ: {c.shape[0]} vs {c.shape[1]}")
    return float(np.sum(c * c) / c.shape[0])
