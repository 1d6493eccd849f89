"""Dense tensor algebra: unfoldings, Kronecker products, contractions, Tucker format.

Tensors are plain C-ordered ``numpy.ndarray`` objects of float64. Modes are
0-based axes. The mode-``k`` unfolding has the mode-``k`` fibers as columns,
with the remaining indices enumerated lexicographically, smallest remaining
mode slowest. With this convention

    unfold(outer(x, y, z), 0) == x[:, None] * kron(y, z)[None, :]

and more generally, for ``T = tucker_to_full(G, [U, V, W])``,

    unfold(T, 1) == V @ unfold(G, 1) @ kron(U, W).T
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "TuckerFactors",
    "as_tensor",
    "unfold",
    "fold",
    "kron",
    "outer",
    "mode_product",
    "contract",
    "tucker_to_full",
    "frob_inner",
    "frob_norm",
    "mode_gram",
    "cpd_rank_bounds",
]


def as_tensor(t) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if t.ndim < 1 or 0 in t.shape:
        raise ValueError(f"tensor must have d >= 1 and positive dimensions, got shape {t.shape}")
    return t


def _check_mode(t: np.ndarray, mode: int) -> int:
    if not 0 <= mode < t.ndim:
        raise ValueError(f"mode {mode} out of range for a {t.ndim}-way tensor")
    return mode


def unfold(t, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding, an ``n_mode x prod(other dims)`` matrix."""
    t = as_tensor(t)
    _check_mode(t, mode)
    return np.moveaxis(t, mode, 0).reshape(t.shape[mode], -1)


def fold(m, mode: int, shape: Sequence[int]) -> np.ndarray:
    """Inverse of :func:`unfold`."""
    m = np.asarray(m, dtype=np.float64)
    shape = tuple(int(n) for n in shape)
    if not 0 <= mode < len(shape):
        raise ValueError(f"mode {mode} out of range for shape {shape}")
    rest = shape[:mode] + shape[mode + 1:]
    expected = (shape[mode], int(np.prod(rest, dtype=np.int64)))
    if m.ndim != 2 or m.shape != expected:
        raise ValueError(f"matrix of shape {m.shape} cannot be folded to {shape} along mode {mode}")
    return np.ascontiguousarray(np.moveaxis(m.reshape((shape[mode],) + rest), 0, mode))


def kron(a, b) -> np.ndarray:
    """Kronecker product; block ``(i, j)`` of the result is ``a[i, j] * b``."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    return np.kron(a, b)


def outer(vectors: Sequence) -> np.ndarray:
    """Rank-one tensor ``x1 ⊗ x2 ⊗ ... ⊗ xd``."""
    if len(vectors) == 0:
        raise ValueError("outer product needs at least one vector")
    vs = [np.asarray(v, dtype=np.float64).ravel() for v in vectors]
    return reduce(np.multiply.outer, vs)


def mode_product(t: np.ndarray, mat: np.ndarray, mode: int) -> np.ndarray:
    """Contract axis ``mode`` of ``t`` with the rows of ``mat`` (``n x p``).

    The contracted axis is replaced by one of length ``p`` at the same position.
    """
    if mat.shape[0] != t.shape[mode]:
        raise ValueError(
            f"matrix with {mat.shape[0]} rows cannot contract mode {mode} of size {t.shape[mode]}"
        )
    out = np.tensordot(t, mat, axes=(mode, 0))
    return np.ascontiguousarray(np.moveaxis(out, -1, mode))


def contract(t, mats: Sequence[Optional[np.ndarray]]) -> np.ndarray:
    """Multilinear contraction ``T(A1, ..., Ad)``.

    Entry ``(j1, ..., jd)`` of the result is
    ``sum_{i1..id} T[i1..id] * prod_l A_l[i_l, j_l]``. A ``None`` entry leaves
    that mode untouched. Modes are processed in order of decreasing shrink
    factor so the intermediate tensors stay as small as possible.
    """
    t = as_tensor(t)
    if len(mats) != t.ndim:
        raise ValueError(f"need {t.ndim} matrices, got {len(mats)}")
    todo = []
    for k, a in enumerate(mats):
        if a is None:
            continue
        a = np.asarray(a, dtype=np.float64)
        if a.ndim == 1:
            a = a[:, None]
        if a.ndim != 2 or a.shape[0] != t.shape[k]:
            raise ValueError(f"matrix for mode {k} has shape {a.shape}, expected ({t.shape[k]}, p)")
        todo.append((k, a))
    todo.sort(key=lambda ka: ka[1].shape[1] / ka[1].shape[0])
    out = t
    for k, a in todo:
        out = mode_product(out, a, k)
    return out


def tucker_to_full(core, factors: Sequence[np.ndarray]) -> np.ndarray:
    """Expand ``[[core; U1, ..., Ud]]`` into a dense tensor."""
    core = as_tensor(core)
    if len(factors) != core.ndim:
        raise ValueError(f"need {core.ndim} factors, got {len(factors)}")
    mats = []
    for k, u in enumerate(factors):
        u = np.asarray(u, dtype=np.float64)
        if u.ndim != 2 or u.shape[1] != core.shape[k]:
            raise ValueError(f"factor {k} has shape {u.shape}, core mode size is {core.shape[k]}")
        mats.append(u.T)
    return contract(core, mats)


def frob_inner(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.dot(a.ravel(), b.ravel()))


def frob_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=np.float64).ravel()))


def mode_gram(t, mode: int, block_bytes: int = 1 << 26) -> np.ndarray:
    """``unfold(t, mode) @ unfold(t, mode).T`` without materializing the unfolding.

    The tensor is viewed as ``(A, n, B)`` around the requested mode; blocks of
    the leading index are gathered into ``n x (a*B)`` slabs of at most
    ``block_bytes`` so peak extra memory stays bounded for large tensors.
    """
    t = as_tensor(t)
    _check_mode(t, mode)
    n = t.shape[mode]
    lead = int(np.prod(t.shape[:mode], dtype=np.int64))
    trail = int(np.prod(t.shape[mode + 1:], dtype=np.int64))
    t = np.ascontiguousarray(t)
    if lead == 1:
        m = t.reshape(n, trail)
        return m @ m.T
    if trail == 1:
        m = t.reshape(lead, n)
        return m.T @ m
    view = t.reshape(lead, n, trail)
    step = max(1, block_bytes // (8 * n * trail))
    gram = np.zeros((n, n))
    for start in range(0, lead, step):
        slab = view[start:start + step].transpose(1, 0, 2).reshape(n, -1)
        gram += slab @ slab.T
    return gram


def cpd_rank_bounds(ranks: Sequence[int]) -> tuple[int, int]:
    """Bounds on the CP rank implied by a multilinear rank.

    ``max_l r_l <= R <= min_l prod_{l' != l} r_l'``.
    """
    ranks = [int(r) for r in ranks]
    if not ranks:
        raise ValueError("ranks must be non-empty")
    if min(ranks) < 1:
        raise ValueError(f"ranks must be positive, got {ranks}")
    if len(ranks) == 1:
        return ranks[0], ranks[0]
    total = int(np.prod(ranks))
    return max(ranks), min(total // r for r in ranks)


@dataclass(frozen=True)
class TuckerFactors:
    """Core tensor plus one factor matrix per mode, ``[[core; U1, ..., Ud]]``."""

    core: np.ndarray
    factors: tuple

    def __post_init__(self):
        core = as_tensor(self.core)
        factors = tuple(np.asarray(u, dtype=np.float64) for u in self.factors)
        if len(factors) != core.ndim:
            raise ValueError(f"core is {core.ndim}-way but {len(factors)} factors were given")
        for k, u in enumerate(factors):
            if u.ndim != 2 or u.shape[1] != core.shape[k]:
                raise ValueError(f"factor {k} has shape {u.shape}, core mode size is {core.shape[k]}")
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "factors", factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(u.shape[0] for u in self.factors)

    @property
    def ranks(self) -> tuple[int, ...]:
        return self.core.shape

    def full(self) -> np.ndarray:
        return tucker_to_full(self.core, self.factors)
