"""
Finite-statistics emulation of the experiment.

Each shot samples Alice's outcome, applies Bob's unitary and reads out the medium's
energy eigenvalue; the initial energy is estimated from its own, equally large shot
budget on the untouched medium. Shots are drawn in fixed-size chunks, each from its
own Philox stream spawned from the seed, so results do not depend on n_jobs.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from joblib import Parallel, delayed

import engine
import qmath
from engine import Strategy
from errors import InvalidConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShotConfig:
    shots_per_setting: int = 10000
    rng_seed: int = 0
    readout_fidelity: float = 1.0
    chunk_size: int = 4096
    n_jobs: int = 1
    correct_readout: bool = False

    def __post_init__(self):
        if int(self.shots_per_setting) != self.shots_per_setting or self.shots_per_setting < 1:
            raise InvalidConfig(f"shots_per_setting must be a positive integer, got {self.shots_per_setting}")
        if int(self.rng_seed) != self.rng_seed or not 0 <= self.rng_seed < 2 ** 64:
            raise InvalidConfig(f"rng_seed must be a 64-bit unsigned integer, got {self.rng_seed}")
        if not 0.5 < self.readout_fidelity <= 1:
            raise InvalidConfig(f"readout_fidelity must lie in (0.5, 1], got {self.readout_fidelity}")
        if int(self.chunk_size) != self.chunk_size or self.chunk_size < 1:
            raise InvalidConfig(f"chunk_size must be a positive integer, got {self.chunk_size}")
        if int(self.n_jobs) != self.n_jobs or self.n_jobs == 0:
            raise InvalidConfig(f"n_jobs must be a nonzero integer, got {self.n_jobs}")


@dataclass(frozen=True)
class WorkEstimate:
    mean: float
    std_error: float
    shots: int


def child_streams(seed_seq, n):
    """Children of seed_seq derived from their index alone, unlike SeedSequence.spawn which counts calls"""
    return [np.random.SeedSequence(seed_seq.entropy, spawn_key=(*seed_seq.spawn_key, k)) for k in range(n)]


def _read_out(rng, populations, fidelity):
    """Projective energy readout: 1 with probability `populations`, then a symmetric bit flip"""
    bits = rng.random(len(populations)) < populations
    if fidelity < 1:
        bits ^= rng.random(len(populations)) >= fidelity
    return bits


def _sample_chunk(seed_seq, count, p_plus, e_plus, e_minus, e_init, fidelity):
    """Ones counted in the final and initial energy readouts of one chunk"""
    rng = np.random.Generator(np.random.Philox(seed_seq))
    plus = rng.random(count) < p_plus
    final = _read_out(rng, np.where(plus, e_plus, e_minus), fidelity)
    initial = _read_out(rng, np.full(count, e_init), fidelity)
    return int(final.sum()), int(initial.sum())


def _bit_statistics(ones, n, config):
    """Mean and standard error of n readout bits, optionally mapped back through the readout flip"""
    mean = ones / n
    var = mean * (1 - mean) * n / (n - 1) if n > 1 else 0.0
    se = np.sqrt(var / n)
    if config.correct_readout and config.readout_fidelity < 1:
        f = config.readout_fidelity
        mean = (mean - (1 - f)) / (2 * f - 1)
        se = se / (2 * f - 1)
    return mean, se


def sample_run(rho, d, config, seed_seq=None):
    """
    Shot-sampled estimate of run_protocol(rho, d).average.

    Args:
        rho: 4x4 state
        d: Decomposition built at effective_eta(rho)
        config: ShotConfig
        seed_seq: optional numpy SeedSequence; defaults to one built from config.rng_seed

    Returns:
        WorkEstimate
    """
    if not isinstance(config, ShotConfig):
        raise InvalidConfig(f"expected a ShotConfig, got {type(config).__name__}")
    run = engine.run_protocol(rho, d)
    if seed_seq is None:
        seed_seq = np.random.SeedSequence(config.rng_seed)

    # Missing branches are never drawn, their energy is a placeholder
    e_plus = qmath.energy(run.post_states[+1]) if +1 in run.post_states else 0.0
    e_minus = qmath.energy(run.post_states[-1]) if -1 in run.post_states else 0.0

    n = int(config.shots_per_setting)
    counts = [config.chunk_size] * (n // config.chunk_size)
    if n % config.chunk_size:
        counts.append(n % config.chunk_size)
    streams = child_streams(seed_seq, len(counts))

    results = Parallel(n_jobs=config.n_jobs, prefer='threads')(
        delayed(_sample_chunk)(s, c, run.p_plus, e_plus, e_minus, run.initial_energy,
                               config.readout_fidelity)
        for s, c in zip(streams, counts)
    )
    final_ones = sum(r[0] for r in results)
    initial_ones = sum(r[1] for r in results)

    e_final, se_final = _bit_statistics(final_ones, n, config)
    e_initial, se_initial = _bit_statistics(initial_ones, n, config)
    estimate = WorkEstimate(
        mean=float(e_initial - e_final),
        std_error=float(np.hypot(se_initial, se_final)),
        shots=n,
    )
    logger.debug("sampled D%d with %d shots: %.6g +- %.2g",
                 d.index, n, estimate.mean, estimate.std_error)
    return estimate


def allocate_shots(strategy, total):
    """Shots per decomposition proportional to c_i, the rounding remainder going to the largest c_i"""
    strategy = Strategy.of(strategy)
    alloc = [int(round(c * total)) for c in strategy]
    largest = int(np.argmax(strategy))
    alloc[largest] += total - sum(alloc)
    for i in strategy.support():
        if alloc[i - 1] < 1:
            raise InvalidConfig(f"{total} shots leave decomposition D{i} (c={strategy[i - 1]:.3g}) without shots")
    return alloc


def sample_average_work(rho, strategy, config):
    """
    Shot-sampled estimate of average_work(rho, strategy).

    The config's shot budget is split across the decompositions; each decomposition
    draws from its own child stream of the seed.
    """
    if not isinstance(config, ShotConfig):
        raise InvalidConfig(f"expected a ShotConfig, got {type(config).__name__}")
    strategy = Strategy.of(strategy)
    alloc = allocate_shots(strategy, int(config.shots_per_setting))
    children = child_streams(np.random.SeedSequence(config.rng_seed), 3)

    mean, variance = 0.0, 0.0
    for i, d in engine.decompositions_for(rho, strategy).items():
        sub_config = replace(config, shots_per_setting=alloc[i - 1])
        est = sample_run(rho, d, sub_config, seed_seq=children[i - 1])
        c = strategy[i - 1]
        mean += c * est.mean
        variance += (c * est.std_error) ** 2
    return WorkEstimate(mean=float(mean), std_error=float(np.sqrt(variance)),
                        shots=int(config.shots_per_setting))
