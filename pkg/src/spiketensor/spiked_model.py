"""Sampling from the spiked tensor model ``T = P + noise / sqrt(N)``.

Randomness comes from numpy's ``Generator`` on the PCG64 bit generator,
which produces identical streams on every platform for a given seed. Per-task
seeds are derived from a base seed and an integer key path through
``numpy.random.SeedSequence`` so that concurrent tasks never share a stream.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .linalg import orthonormalize
from .rmt_theory import sigma_n
from .tensor_core import TuckerFactors, frob_norm

__all__ = [
    "RNG_ALGORITHM",
    "SpikedInstance",
    "make_rng",
    "derive_seed",
    "haar_basis",
    "make_signal",
    "rescale_signal",
    "sample_observation",
    "sample_instance",
]

RNG_ALGORITHM = "PCG64 via numpy.random.Generator; seeds from SeedSequence(base, spawn_key)"

# noise entries drawn per call; fixed so the stream does not depend on memory
_NOISE_BLOCK = 1 << 22


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def derive_seed(base_seed: int, *key: int) -> int:
    """64-bit seed for the task identified by ``key`` under ``base_seed``."""
    ss = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def haar_basis(n: int, r: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed ``n x r`` matrix with orthonormal columns."""
    if not 1 <= r <= n:
        raise ValueError(f"cannot draw {r} orthonormal columns in dimension {n}")
    return orthonormalize(rng.standard_normal((n, r)))


def rescale_signal(signal: TuckerFactors, energy: float) -> TuckerFactors:
    """Same factors, core rescaled so that ``||P||_F^2 == energy``."""
    norm = frob_norm(signal.core)
    if energy == 0.0 or norm == 0.0:
        return TuckerFactors(np.zeros_like(signal.core), signal.factors)
    return TuckerFactors(signal.core * (np.sqrt(energy) / norm), signal.factors)


def make_signal(
    dims: Sequence[int],
    ranks: Sequence[int],
    n_param: float,
    omega: float,
    rng: np.random.Generator,
) -> TuckerFactors:
    """Random Tucker signal with ``||P||_F^2 = omega * sigma_N``.

    The core has i.i.d. standard normal entries before rescaling and the
    factors are independent Haar bases, drawn in that order.
    """
    dims = [int(n) for n in dims]
    ranks = [int(r) for r in ranks]
    if len(dims) != len(ranks):
        raise ValueError("dims and ranks differ in length")
    for n, r in zip(dims, ranks):
        if not 1 <= r <= n:
            raise ValueError(f"rank {r} is not in [1, {n}]")
    if omega < 0:
        raise ValueError("omega must be non-negative")
    core = rng.standard_normal(ranks)
    factors = [haar_basis(n, r, rng) for n, r in zip(dims, ranks)]
    return rescale_signal(TuckerFactors(core, factors), omega * sigma_n(dims, n_param))


@dataclass(frozen=True)
class SpikedInstance:
    signal: TuckerFactors
    observed: np.ndarray
    n_param: float
    omega: float
    seed: Optional[int] = None


def sample_observation(
    signal: TuckerFactors,
    n_param: float,
    rng: np.random.Generator,
    seed: Optional[int] = None,
) -> SpikedInstance:
    """Draw ``T = full(signal) + G / sqrt(N)`` with ``G`` i.i.d. standard normal.

    Noise is generated in fixed-size blocks and added in place, so the peak
    footprint is one dense tensor plus one block.
    """
    t = signal.full()
    flat = t.reshape(-1)
    scale = 1.0 / np.sqrt(n_param)
    for start in range(0, flat.size, _NOISE_BLOCK):
        stop = min(start + _NOISE_BLOCK, flat.size)
        flat[start:stop] += scale * rng.standard_normal(stop - start)
    omega = frob_norm(signal.core) ** 2 / sigma_n(signal.dims, n_param)
    return SpikedInstance(signal=signal, observed=t, n_param=n_param, omega=omega, seed=seed)


def sample_instance(
    dims: Sequence[int],
    ranks: Sequence[int],
    n_param: float,
    omega: float,
    seed: int,
) -> SpikedInstance:
    """Signal and noise from a single seed; fully reproducible from its arguments."""
    rng = make_rng(seed)
    signal = make_signal(dims, ranks, n_param, omega, rng)
    return sample_observation(signal, n_param, rng, seed=seed)
