"""Monte-Carlo experiments comparing simulated spiked tensors with theory.

Every task (one trial at one grid point) owns a seed derived from
``base_seed`` and its integer key, so tasks may run in any order on any
number of workers; results are sorted by key before aggregation and output.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Optional

import numpy as np

from ..decomposition import hooi, truncated_mlsvd
from ..linalg import gram_spectrum, mean_alignment
from ..rmt_theory import (
    count_outliers,
    hooi_convergence_diagnostic,
    ks_distance,
    noise_contraction_bound,
    predicted_mean_alignment,
    phase_transitions,
    scales,
    semicircle_pdf,
    sigma_n,
    spike_prediction,
)
from ..spiked_model import derive_seed, make_rng, make_signal, rescale_signal, sample_instance, sample_observation
from ..tensor_core import TuckerFactors, frob_norm, mode_gram, unfold
from .config import ExperimentConfig, scaled_dims

log = logging.getLogger(__name__)

# first element of every derived-seed key, one per experiment
_KEY_ESD, _KEY_SWEEP_SIGNAL, _KEY_SWEEP, _KEY_SCALING = 1, 2, 3, 4

HIST_RANGE = (-2.5, 2.5)


def _pool_map(fn: Callable, tasks: list, threads: int) -> list:
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, tasks))


def signal_sv_sq(signal: TuckerFactors, mode: int) -> np.ndarray:
    """Squared singular values of the mode unfolding of the signal, non-increasing."""
    return np.linalg.svd(unfold(signal.core, mode), compute_uv=False) ** 2


# ---------------------------------------------------------------- esd


def _esd_trial(cfg: ExperimentConfig, trial: int) -> list[dict]:
    seed = derive_seed(cfg.base_seed, _KEY_ESD, trial)
    dims, ranks = cfg.dims, cfg.ranks
    n_param = cfg.n_for(dims)
    inst = sample_instance(dims, ranks, n_param, cfg.omega, seed)
    edges = np.linspace(*HIST_RANGE, cfg.bins + 1)
    centers = 0.5 * (edges[1:] + edges[:-1])
    width = edges[1] - edges[0]
    rows = []
    for k in range(len(dims)):
        sp = scales(dims, n_param, k)
        spec = gram_spectrum(mode_gram(inst.observed, k))
        z = (spec.values - sp.mu) / sp.sigma
        preds = [spike_prediction(s2, sp.sigma) for s2 in signal_sv_sq(inst.signal, k)]
        top = z[: ranks[k]]
        bulk = np.concatenate([top[top <= 2.0 + cfg.epsilon_outlier], z[ranks[k]:]])
        summary = {
            "ks_distance": ks_distance(bulk),
            "n_outliers": count_outliers(z, cfg.epsilon_outlier),
            "n_predicted": sum(p.rho > 1.0 for p in preds),
            "n_predicted_visible": sum(p.xi is not None and p.xi > 2.0 + cfg.epsilon_outlier for p in preds),
        }
        base = {"trial": trial, "seed": seed, "mode": k + 1}
        counts, _ = np.histogram(z, bins=edges)
        density = counts / (z.size * width)
        for b, (c, dens) in enumerate(zip(centers, density)):
            rows.append({**base, "kind": "hist", "index": b + 1, "x": c, "empirical": dens,
                         "theoretical": semicircle_pdf(c), "rho": None, **summary})
        x = inst.signal.factors[k]
        for q, p in enumerate(preds):
            rows.append({**base, "kind": "spike_position", "index": q + 1, "x": None, "empirical": z[q],
                         "theoretical": p.xi, "rho": p.rho, **summary})
        for q, p in enumerate(preds):
            overlap = float(np.sum((x.T @ spec.basis[:, q]) ** 2))
            rows.append({**base, "kind": "spike_alignment", "index": q + 1, "x": None, "empirical": overlap,
                         "theoretical": p.zeta_plus, "rho": p.rho, **summary})
    log.info("esd trial %d done (seed %d)", trial, seed)
    return rows


ESD_COLUMNS = ["experiment", "trial", "seed", "mode", "kind", "index", "x", "empirical", "theoretical", "rho",
               "ks_distance", "n_outliers", "n_predicted", "n_predicted_visible"]


def run_esd(cfg: ExperimentConfig, threads: int = 1) -> list[dict]:
    """Spectrum of each mode Gram matrix against the semicircle and spike predictions."""
    if cfg.experiment != "esd":
        raise ValueError("config is not an esd experiment")
    per_trial = _pool_map(lambda j: _esd_trial(cfg, j), list(range(cfg.trials)), threads)
    rows = [r for chunk in per_trial for r in chunk]
    order = {"hist": 0, "spike_position": 1, "spike_alignment": 2}
    rows.sort(key=lambda r: (r["trial"], r["mode"], order[r["kind"]], r["index"]))
    return [{"experiment": "esd", **r} for r in rows]


# ---------------------------------------------------------------- alignment sweep


def sweep_base_signal(cfg: ExperimentConfig) -> TuckerFactors:
    """The fixed signal with ``||P||_F^2 == sigma_N`` shared by every sweep point."""
    rng = make_rng(derive_seed(cfg.base_seed, _KEY_SWEEP_SIGNAL))
    return make_signal(cfg.dims, cfg.ranks, cfg.n_for(cfg.dims), 1.0, rng)


def _sweep_trial(cfg: ExperimentConfig, base: TuckerFactors, task: tuple) -> dict:
    i, j = task
    omega = cfg.omega_grid[i]
    seed = derive_seed(cfg.base_seed, _KEY_SWEEP, i, j)
    n_param = cfg.n_for(cfg.dims)
    signal = rescale_signal(base, omega * frob_norm(base.core) ** 2)
    inst = sample_observation(signal, n_param, make_rng(seed), seed=seed)
    init = truncated_mlsvd(inst.observed, cfg.ranks)
    rep = hooi(inst.observed, cfg.ranks, init=init, tol=cfg.tol, max_iter=cfg.max_iter, scheme=cfg.scheme)
    return {
        "task": task,
        "mlsvd": [mean_alignment(x, u) for x, u in zip(base.factors, init.factors)],
        "hooi": [mean_alignment(x, u) for x, u in zip(base.factors, rep.factors.factors)],
    }


SWEEP_COLUMNS = ["experiment", "mode", "omega", "estimator", "trials", "mean", "std", "theoretical",
                 "first_transition", "n_transitions_below"]


def run_alignment_sweep(cfg: ExperimentConfig, threads: int = 1) -> list[dict]:
    """Mean subspace alignment of MLSVD and HOOI against theory across an SNR grid."""
    if cfg.experiment != "alignment_sweep":
        raise ValueError("config is not an alignment_sweep experiment")
    base = sweep_base_signal(cfg)
    sigma = sigma_n(cfg.dims, cfg.n_for(cfg.dims))
    tasks = [(i, j) for i in range(len(cfg.omega_grid)) for j in range(cfg.trials)]
    results = _pool_map(lambda t: _sweep_trial(cfg, base, t), tasks, threads)
    results.sort(key=lambda r: r["task"])
    rows = []
    for k in range(len(cfg.dims)):
        s2 = signal_sv_sq(base, k)
        transitions = phase_transitions(s2, sigma)
        for i, omega in enumerate(cfg.omega_grid):
            chunk = [r for r in results if r["task"][0] == i]
            theory = predicted_mean_alignment(omega * s2, sigma)
            for est in ("mlsvd", "hooi"):
                vals = np.array([r[est][k] for r in chunk])
                rows.append({
                    "experiment": "alignment_sweep",
                    "mode": k + 1,
                    "omega": omega,
                    "estimator": est,
                    "trials": len(vals),
                    "mean": float(vals.mean()),
                    "std": float(vals.std()),
                    "theoretical": theory if est == "mlsvd" else None,
                    "first_transition": float(transitions.min()),
                    "n_transitions_below": int(np.sum(transitions < omega)),
                })
    return rows


# ---------------------------------------------------------------- hooi scaling


def _scaling_trial(cfg: ExperimentConfig, task: tuple) -> list[dict]:
    i, j = task
    n_grid_value = cfg.n_grid[i]
    dims = scaled_dims(cfg.dim_ratios, n_grid_value)
    n_param = cfg.n_for(dims)
    seed = derive_seed(cfg.base_seed, _KEY_SCALING, i, j)
    inst = sample_instance(dims, cfg.ranks, n_param, cfg.omega, seed)
    sigma = sigma_n(dims, n_param)
    t = inst.observed
    init = truncated_mlsvd(t, cfg.ranks)
    first: dict = {}

    def keep_first(it, factors):
        if it == 1:
            first["factors"] = list(factors)

    rep = hooi(t, cfg.ranks, init=init, tol=cfg.tol, max_iter=cfg.max_iter, scheme=cfg.scheme, callback=keep_first)
    l_n = hooi_convergence_diagnostic(inst.signal, init.factors)
    p_norm = frob_norm(inst.signal.core)
    rows = []
    for k, x in enumerate(inst.signal.factors):
        a0 = mean_alignment(x, init.factors[k])
        a1 = mean_alignment(x, first["factors"][k])
        rows.append({
            "experiment": "hooi_scaling",
            "n_param": n_param,
            "dims": "x".join(str(n) for n in dims),
            "trial": j,
            "seed": seed,
            "mode": k + 1,
            "sigma": sigma,
            "align_init": a0,
            "align_init_theory": predicted_mean_alignment(signal_sv_sq(inst.signal, k), sigma),
            "align_iter1": a1,
            "align_iter1_theory": 1.0,
            "rescaled_gap": (1.0 - a1) * math.sqrt(sigma),
            "rescaled_gap_theory": None,
            "l_n": l_n,
            "sqrt_signal_norm": math.sqrt(p_norm),
            "iterations": rep.iterations,
            "iterations_theory": None,
            "converged": int(rep.converged),
        })
    log.info("hooi_scaling N=%s trial %d: %d iterations", n_param, j, rep.iterations)
    return rows


SCALING_COLUMNS = ["experiment", "n_param", "dims", "trial", "seed", "mode", "sigma", "align_init",
                   "align_init_theory", "align_iter1", "align_iter1_theory", "rescaled_gap", "rescaled_gap_theory",
                   "l_n", "sqrt_signal_norm", "iterations", "iterations_theory", "converged"]


def run_hooi_scaling(cfg: ExperimentConfig, threads: int = 1) -> list[dict]:
    """Alignment at initialization and after one HOOI iteration as the tensor grows."""
    if cfg.experiment != "hooi_scaling":
        raise ValueError("config is not a hooi_scaling experiment")
    tasks = [(i, j) for i in range(len(cfg.n_grid)) for j in range(cfg.trials)]
    chunks = _pool_map(lambda t: _scaling_trial(cfg, t), tasks, threads)
    rows = [r for c in chunks for r in c]
    rows.sort(key=lambda r: (r["n_param"], r["trial"], r["mode"]))
    return rows


# ---------------------------------------------------------------- predict


PREDICT_COLUMNS = ["experiment", "kind", "mode", "s2", "mu", "sigma", "rho", "xi", "zeta_plus", "bound", "delta",
                   "c_universal"]


def predict(cfg: ExperimentConfig, threads: int = 1) -> list[dict]:
    """Pure theory: scales per mode, spike table for ``cfg.s2``, noise contraction bound."""
    dims = cfg.dims
    n_param = cfg.n_for(dims)
    rows = []
    blank = {c: None for c in PREDICT_COLUMNS}
    for k in range(len(dims)):
        sp = scales(dims, n_param, k)
        rows.append({**blank, "experiment": "predict", "kind": "scales", "mode": k + 1, "mu": sp.mu,
                     "sigma": sp.sigma})
    sigma = sigma_n(dims, n_param)
    for s2 in cfg.s2:
        p = spike_prediction(s2, sigma)
        rows.append({**blank, "experiment": "predict", "kind": "spike", "s2": s2, "sigma": sigma, "rho": p.rho,
                     "xi": p.xi, "zeta_plus": p.zeta_plus})
    rows.append({**blank, "experiment": "predict", "kind": "noise_bound",
                 "bound": noise_contraction_bound(dims, cfg.ranks, cfg.delta, cfg.c_universal),
                 "delta": cfg.delta, "c_universal": cfg.c_universal})
    return rows


RUNNERS = {
    "esd": (run_esd, ESD_COLUMNS),
    "alignment_sweep": (run_alignment_sweep, SWEEP_COLUMNS),
    "hooi_scaling": (run_hooi_scaling, SCALING_COLUMNS),
    "predict": (predict, PREDICT_COLUMNS),
}


def run(cfg: ExperimentConfig, threads: int = 1) -> tuple[list[dict], list[str]]:
    fn, columns = RUNNERS[cfg.experiment]
    return fn(cfg, threads=threads), columns
