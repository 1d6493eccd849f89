"""Truncated MLSVD and higher-order orthogonal iteration (HOOI)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .linalg import gram_spectrum
from .tensor_core import TuckerFactors, as_tensor, contract, frob_norm, mode_gram, unfold

__all__ = [
    "HooiReport",
    "truncated_mlsvd",
    "hooi",
    "hooi_sweep",
    "reconstruct",
    "reconstruction_error",
    "procrustes_align",
    "core_proportionality_check",
]


def _check_ranks(shape: Sequence[int], ranks: Sequence[int]) -> list[int]:
    ranks = [int(r) for r in ranks]
    if len(ranks) != len(shape):
        raise ValueError(f"{len(ranks)} ranks given for a {len(shape)}-way tensor")
    for n, r in zip(shape, ranks):
        if not 1 <= r <= n:
            raise ValueError(f"rank {r} is not in [1, {n}]")
    return ranks


def truncated_mlsvd(t, ranks: Sequence[int]) -> TuckerFactors:
    """Project ``t`` onto the dominant ``r_l``-dimensional subspace of each unfolding.

    Factors are the top eigenvectors of the mode Gram matrices and the core is
    ``t`` contracted on them.
    """
    t = as_tensor(t)
    ranks = _check_ranks(t.shape, ranks)
    factors = [gram_spectrum(mode_gram(t, k), r).basis for k, r in enumerate(ranks)]
    return TuckerFactors(contract(t, factors), factors)


@dataclass
class HooiReport:
    factors: TuckerFactors
    iterations: int
    objective_trace: list = field(default_factory=list)
    converged: bool = False


def _mode_update(t: np.ndarray, factors: list, k: int, r: int) -> np.ndarray:
    # n_k x prod_{l != k} r_l matrix equal to unfold(t, k) @ kron(other factors)
    partial = contract(t, [u if j != k else None for j, u in enumerate(factors)])
    m = unfold(partial, k)
    return gram_spectrum(m @ m.T, r).basis


def hooi_sweep(t, factors: Sequence[np.ndarray], ranks: Sequence[int], scheme: str = "gauss_seidel") -> list:
    """One pass over all modes; returns the new factor list."""
    current = list(factors)
    if scheme == "gauss_seidel":
        for k, r in enumerate(ranks):
            current[k] = _mode_update(t, current, k, r)
        return current
    if scheme == "jacobi":
        return [_mode_update(t, list(factors), k, r) for k, r in enumerate(ranks)]
    raise ValueError(f"unknown update scheme {scheme!r}")


def hooi(
    t,
    ranks: Sequence[int],
    init: Optional[TuckerFactors] = None,
    tol: float = 1e-8,
    max_iter: int = 100,
    scheme: str = "gauss_seidel",
    callback: Optional[Callable[[int, list], None]] = None,
) -> HooiReport:
    """Alternating maximization of ``||t(U1, ..., Ud)||_F`` over orthonormal factors.

    Starts from ``init`` (truncated MLSVD by default). Each iteration updates
    every mode in turn with the freshest factors of the other modes
    (``scheme="jacobi"`` uses the previous iterate for all of them instead).
    Stops once the core norm changes by less than ``tol`` relative, or after
    ``max_iter`` iterations. ``callback(t, factors)`` is invoked after every
    iteration ``t >= 1``.
    """
    t = as_tensor(t)
    ranks = _check_ranks(t.shape, ranks)
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be at least 1")
    if init is None:
        init = truncated_mlsvd(t, ranks)
    elif list(init.ranks) != ranks or init.dims != t.shape:
        raise ValueError("initial factors do not match the tensor shape and ranks")

    factors = list(init.factors)
    core = contract(t, factors)
    trace = [frob_norm(core)]
    converged = False
    iterations = 0
    while iterations < max_iter:
        factors = hooi_sweep(t, factors, ranks, scheme)
        core = contract(t, factors)
        value = frob_norm(core)
        if not math.isfinite(value):
            raise FloatingPointError("HOOI objective is not finite")
        iterations += 1
        if callback is not None:
            callback(iterations, factors)
        previous = trace[-1]
        trace.append(value)
        if previous == 0.0 or abs(value - previous) < tol * previous:
            converged = True
            break
    return HooiReport(
        factors=TuckerFactors(core, factors),
        iterations=iterations,
        objective_trace=trace,
        converged=converged,
    )


def reconstruct(f: TuckerFactors) -> np.ndarray:
    return f.full()


def reconstruction_error(t, f: TuckerFactors) -> float:
    t = as_tensor(t)
    if t.shape != f.dims:
        raise ValueError(f"tensor shape {t.shape} does not match factors {f.dims}")
    return frob_norm(t - f.full())


def procrustes_align(estimate: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Orthogonal ``O`` minimizing ``||estimate @ O - target||_F``."""
    v, _, wt = np.linalg.svd(estimate.T @ target)
    return v @ wt


def core_proportionality_check(f: TuckerFactors, truth: TuckerFactors, floor: float = 1e-8) -> np.ndarray:
    """Entrywise ratios of the estimated core to the true core after basis alignment.

    Each estimated factor is rotated by the Procrustes solution onto the true
    factor and the estimated core is rotated accordingly. Entries where the
    true core is below ``floor * max|core|`` are returned as NaN.
    """
    if f.ranks != truth.ranks:
        raise ValueError(f"rank mismatch: {f.ranks} vs {truth.ranks}")
    rotations = [procrustes_align(u, x) for u, x in zip(f.factors, truth.factors)]
    aligned = contract(f.core, rotations)
    h = truth.core
    keep = np.abs(h) > floor * np.max(np.abs(h), initial=0.0)
    out = np.full(h.shape, np.nan)
    out[keep] = aligned[keep] / h[keep]
    return out
