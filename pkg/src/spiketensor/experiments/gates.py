"""Pass/fail comparisons between simulated records and theory.

Each gate returns ``GateResult`` objects; ``--check`` on the command line
turns any failure into exit status 1. Default thresholds are the acceptance
tolerances of the project.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import spearmanr


@dataclass(frozen=True)
class GateResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def _select(rows, **match):
    return [r for r in rows if all(r.get(k) == v for k, v in match.items())]


def semicircle_gate(rows: Sequence[dict], ks_tol: float = 0.05, trials: Optional[int] = None) -> list[GateResult]:
    """Per mode, mean bulk KS distance over the first ``trials`` trials below ``ks_tol``."""
    out = []
    for mode in sorted({r["mode"] for r in rows}):
        per_trial = {}
        for r in _select(rows, mode=mode, kind="hist"):
            if trials is None or r["trial"] < trials:
                per_trial[r["trial"]] = r["ks_distance"]
        mean_ks = float(np.mean(list(per_trial.values())))
        out.append(GateResult(f"semicircle mode {mode}", mean_ks < ks_tol,
                              f"mean KS {mean_ks:.4f} over {len(per_trial)} trials (< {ks_tol})"))
    return out


def _spike_gate(rows, kind, tol, rho_min, fraction, label):
    pairs = [r for r in rows if r["kind"] == kind and r["rho"] is not None and r["rho"] > rho_min]
    if not pairs:
        return GateResult(label, False, f"no directions with rho > {rho_min}")
    hits = sum(abs(r["empirical"] - r["theoretical"]) <= tol for r in pairs)
    frac = hits / len(pairs)
    return GateResult(label, frac >= fraction,
                      f"{hits}/{len(pairs)} = {frac:.3f} within +-{tol} (need >= {fraction})")


def spike_position_gate(rows, tol=0.15, rho_min=1.2, fraction=0.9) -> GateResult:
    return _spike_gate(rows, "spike_position", tol, rho_min, fraction, "spike positions")


def spike_alignment_gate(rows, tol=0.07, rho_min=1.2, fraction=0.9) -> GateResult:
    return _spike_gate(rows, "spike_alignment", tol, rho_min, fraction, "spike alignments")


def outlier_count_gate(rows, mode: Optional[int] = None, min_trials: int = 8) -> GateResult:
    """Outliers above ``2 + epsilon`` equal the number of directions with ``rho > 1``."""
    mode = mode or max(r["mode"] for r in rows)
    per_trial = {}
    for r in _select(rows, mode=mode, kind="spike_position"):
        per_trial[r["trial"]] = (r["n_outliers"], r["n_predicted"], r["n_predicted_visible"])
    hits = sum(o == p for o, p, _ in per_trial.values())
    detail = ", ".join(f"t{t}:{o}/{p}(visible {v})" for t, (o, p, v) in sorted(per_trial.items()))
    return GateResult(f"outlier count mode {mode}", hits >= min_trials,
                      f"{hits}/{len(per_trial)} trials exact (need >= {min_trials}); outliers/predicted: {detail}")


def esd_gates(rows: Sequence[dict]) -> list[GateResult]:
    return [
        *semicircle_gate(rows, trials=5),
        spike_position_gate(rows),
        spike_alignment_gate(rows),
        outlier_count_gate(rows),
    ]


def sweep_gates(rows: Sequence[dict], tol: float = 0.08, above: float = 1.5, below: float = 0.5,
                floor: float = 0.1) -> list[GateResult]:
    out = []
    for mode in sorted({r["mode"] for r in rows}):
        ml = {r["omega"]: r for r in _select(rows, mode=mode, estimator="mlsvd")}
        ho = {r["omega"]: r for r in _select(rows, mode=mode, estimator="hooi")}
        first = next(iter(ml.values()))["first_transition"]
        bad_hi = [w for w, r in ml.items() if w >= above * first and abs(r["mean"] - r["theoretical"]) > tol]
        n_hi = sum(w >= above * first for w in ml)
        bad_lo = [w for w, r in ml.items() if w < below * first and r["mean"] >= floor]
        n_lo = sum(w < below * first for w in ml)
        bad_h = [w for w in ml if ho[w]["mean"] < ml[w]["mean"]]
        out.append(GateResult(f"sweep mode {mode} theory match", not bad_hi,
                              f"{n_hi - len(bad_hi)}/{n_hi} grid points with omega >= {above}x{first:.3f} "
                              f"within +-{tol}; failing omegas {bad_hi}"))
        out.append(GateResult(f"sweep mode {mode} below transition", not bad_lo,
                              f"{n_lo - len(bad_lo)}/{n_lo} grid points below {below}x transition under {floor}; "
                              f"failing omegas {bad_lo}"))
        out.append(GateResult(f"sweep mode {mode} hooi >= mlsvd", not bad_h,
                              f"{len(ml) - len(bad_h)}/{len(ml)} grid points; failing omegas {bad_h}"))
    return out


def scaling_gates(rows: Sequence[dict], max_spearman: float = 0.2) -> list[GateResult]:
    by_n = defaultdict(list)
    iters = defaultdict(dict)
    for r in rows:
        by_n[r["n_param"]].append(r)
        iters[r["n_param"]][r["trial"]] = r["iterations"]
    ns = sorted(by_n)
    gaps = []
    for n in ns:
        chunk = by_n[n]
        sigma = chunk[0]["sigma"]
        gaps.append((1.0 - float(np.mean([r["align_iter1"] for r in chunk]))) * math.sqrt(sigma))
    rho = float(spearmanr(ns, gaps)[0]) if len(ns) > 1 else float("nan")
    gap_detail = ", ".join(f"N={n:g}:{g:.3f}" for n, g in zip(ns, gaps))
    med = {n: float(np.median(list(iters[n].values()))) for n in ns}
    return [
        GateResult("rescaled first-iteration gap has no increasing trend", rho <= max_spearman,
                   f"Spearman {rho:.3f} (<= {max_spearman}); {gap_detail}"),
        GateResult("median iterations non-increasing", med[ns[-1]] <= med[ns[0]],
                   f"median at N={ns[-1]:g}: {med[ns[-1]]} vs N={ns[0]:g}: {med[ns[0]]}"),
    ]


GATES = {
    "esd": esd_gates,
    "alignment_sweep": sweep_gates,
    "hooi_scaling": scaling_gates,
}


def check(experiment: str, rows: Sequence[dict]) -> list[GateResult]:
    gate = GATES.get(experiment)
    return gate(rows) if gate else []
