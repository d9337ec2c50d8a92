"""Seeded Monte Carlo engine.

Per gate: draw the pair count from Poisson(pair mean) by inverse CDF, give
each pair a joint (slot, port) outcome, thin each photon by its channel and
detector efficiency, and OR in per-slot background clicks (dark counts plus
noise photons, sampled jointly over the slots of one detector).

Gates are cut into fixed shards of SHARD_GATES; shard k draws from
PCG64(seed ^ k), so results do not depend on the thread count. Within a
block the draw order is: pair-count uniforms, background uniforms (gate x
detector), then three uniforms per pair (outcome, signal thinning, idler
thinning).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from ..config import ExperimentConfig
from ..records import CountRecord
from ..source import poisson_cdf_table
from ._kernels import get_kernels
from .analytic import _require_analyzers
from .model import DetectionModel, build_model

SHARD_GATES = 1 << 22
BLOCK_GATES = 1 << 18
POINT_SEED_SHIFT = 32


def default_threads() -> int:
    env = os.environ.get("TBSIM_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"TBSIM_THREADS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValueError("TBSIM_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


def background_pattern_cdf(probs: np.ndarray) -> np.ndarray:
    """CDF over the 2**n click patterns of independent per-slot Bernoullis.

    Bit j of the pattern index is set when slot j clicks.
    """
    n = len(probs)
    pats = np.arange(1 << n)
    bits = (pats[:, None] >> np.arange(n)) & 1
    p = np.where(bits == 1, probs, 1.0 - probs).prod(axis=1)
    return np.cumsum(p)


class _Tables:
    def __init__(self, m: DetectionModel):
        self.n_slots = m.n_slots
        self.pair_cdf = poisson_cdf_table(m.pair_mean)
        bs, bi = m.background_click_probs()
        self.bg_cdf_s = background_pattern_cdf(bs)
        self.bg_cdf_i = background_pattern_cdf(bi)
        self.out_cdf = np.cumsum(m.outcome_probs)
        self.s_slot = m.s_slot
        self.i_slot = m.i_slot
        self.alpha_s = float(m.alpha_s)
        self.alpha_i = float(m.alpha_i)


def _run_shard(t: _Tables, n_gates: int, seed: int, kernels) -> CountRecord:
    count_pairs, tally = kernels
    rng = np.random.Generator(np.random.PCG64(seed))
    rec = CountRecord.empty(t.n_slots)
    done = 0
    while done < n_gates:
        b = min(BLOCK_GATES, n_gates - done)
        counts = count_pairs(rng.random(b), t.pair_cdf)
        u_bg = rng.random((b, 2))
        u_pair = rng.random((int(counts.sum()), 3))
        tally(
            counts, u_bg, u_pair, t.bg_cdf_s, t.bg_cdf_i, t.out_cdf, t.s_slot, t.i_slot,
            t.alpha_s, t.alpha_i, rec.singles_s, rec.singles_i, rec.coincidences,
        )
        done += b
    rec.gates = n_gates
    # every ordered pair of distinct gates in the shard is a shifted-gate trial
    rec.accidentals = np.outer(rec.singles_s, rec.singles_i) - rec.coincidences
    rec.accidental_trials = n_gates * (n_gates - 1)
    return rec


def run_model(
    m: DetectionModel,
    n_gates: int,
    seed: int,
    threads: Optional[int] = None,
    backend: Optional[str] = None,
    config_hash: str = "",
) -> CountRecord:
    if not isinstance(n_gates, (int, np.integer)) or n_gates < 1:
        raise ValueError(f"n_gates must be a positive integer, got {n_gates!r}")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    kernels = get_kernels(backend)
    t = _Tables(m)
    shards = [(k, min(SHARD_GATES, n_gates - k * SHARD_GATES)) for k in range(-(-n_gates // SHARD_GATES))]
    threads = threads or default_threads()

    def work(item):
        k, n = item
        return _run_shard(t, n, seed ^ k, kernels)

    if threads == 1 or len(shards) == 1:
        parts = [work(s) for s in shards]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, shards))
    total = CountRecord.empty(m.n_slots)
    for p in parts:
        total = total.merge(p)
    total.config_hash = config_hash
    total.meta = {"seed": int(seed), "pair_mean": float(m.pair_mean)}
    return total


def mc_run(
    config: ExperimentConfig,
    n_gates: int,
    seed: int,
    phase_point: Optional[tuple[float, float]] = None,
    mu: Optional[float] = None,
    threads: Optional[int] = None,
    backend: Optional[str] = None,
) -> CountRecord:
    """One operating point; ``mu`` as in :func:`build_model`."""
    m = build_model(config, mu=mu, phase_point=phase_point)
    return run_model(m, n_gates, seed, threads, backend, config.digest())


def point_seed(seed: int, index: int) -> int:
    return seed ^ (index << POINT_SEED_SHIFT)


def mc_car_curve(
    config: ExperimentConfig,
    mu_grid: Sequence[float],
    n_gates: int,
    seed: int,
    threads: Optional[int] = None,
    backend: Optional[str] = None,
) -> list[CountRecord]:
    config = config.for_scenario("car")
    return [
        mc_run(config, n_gates, point_seed(seed, p), mu=float(u), threads=threads, backend=backend)
        for p, u in enumerate(mu_grid)
    ]


def mc_fringe_scan(
    config: ExperimentConfig,
    idler_temperatures: Sequence[float],
    n_gates: int,
    seed: int,
    mu: Optional[float] = None,
    threads: Optional[int] = None,
    backend: Optional[str] = None,
) -> list[CountRecord]:
    _require_analyzers(config)
    theta_s = config.signal_analyzer.theta
    out = []
    for p, temp in enumerate(idler_temperatures):
        theta_i = config.idler_analyzer.at_temperature(float(temp)).theta
        out.append(
            mc_run(config, n_gates, point_seed(seed, p), phase_point=(theta_s, theta_i),
                   mu=mu, threads=threads, backend=backend)
        )
    return out
