"""
Link Simulation for CovertLink
Seeded Monte Carlo of the covert link: secret-key one-time pad over a sparsified
constellation, Bob's heterodyne receiver and Willie's photon-counting radiometer.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from config.numerics_config import SIMULATION_CONFIG
from src.numerics.covertlimits import (
    ChannelParams,
    holevo_chi,
    nats_to_bits,
    pinsker_pe_floor,
    sparse_throughput_bound,
)
from src.numerics.errors import BudgetNotBindingError, InvalidParameterError
from src.simulation.sim_config import SimConfig

logger = logging.getLogger(__name__)

STREAM_ROLES = ('alice_key', 'mode_select', 'channel_noise', 'willie_noise', 'message')
SCALING_COLUMNS = ['n', 'tau', 'e_selected', 'ser', 'mi_nats', 'm_bits', 'willie_min_pe', 'willie_pe_stderr']


@dataclass(frozen=True)
class TrialResult:
    selected_mode_count: int
    bob_symbol_errors: int
    bob_mi_estimate: float
    willie_total_count_h0: int
    willie_total_count_h1: int

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class RocPoint:
    """Radiometer operating point: declare 'transmitting' when the count reaches threshold"""
    threshold: int
    p_fa: float
    p_md: float

    @property
    def p_e(self) -> float:
        return 0.5 * (self.p_fa + self.p_md)

    def to_dict(self) -> Dict[str, Any]:
        return {'threshold': self.threshold, 'p_fa': self.p_fa, 'p_md': self.p_md, 'p_e': self.p_e}


@dataclass
class ExperimentResult:
    """Aggregate of one run_experiment call, reduced in trial order"""
    config: SimConfig
    tau: float
    e_selected: float
    mean_selected: float
    ser: float
    mi_nats: float
    m_nats: float
    holevo_chi_nats: float
    holevo_m_nats: float
    willie_min_pe: float
    willie_pe_stderr: float
    willie_best_threshold: int
    pinsker_pe_floor: float
    trial_results: List[TrialResult] = field(default_factory=list)

    @property
    def mi_bits(self) -> float:
        return nats_to_bits(self.mi_nats)

    @property
    def m_bits(self) -> float:
        return nats_to_bits(self.m_nats)

    @property
    def pinsker_respected(self) -> bool:
        margin = SIMULATION_CONFIG['sigma_multiplier'] * self.willie_pe_stderr
        return self.willie_min_pe >= self.pinsker_pe_floor - margin

    def to_dict(self, include_trials: bool = False) -> Dict[str, Any]:
        document = {
            'config': self.config.to_dict(),
            'tau': self.tau,
            'e_selected': self.e_selected,
            'mean_selected': self.mean_selected,
            'ser': self.ser,
            'mi_nats': self.mi_nats,
            'mi_bits': self.mi_bits,
            'm_nats': self.m_nats,
            'm_bits': self.m_bits,
            'holevo_chi_nats': self.holevo_chi_nats,
            'holevo_m_nats': self.holevo_m_nats,
            'holevo_m_bits': nats_to_bits(self.holevo_m_nats),
            'willie_min_pe': self.willie_min_pe,
            'willie_pe_stderr': self.willie_pe_stderr,
            'willie_best_threshold': self.willie_best_threshold,
            'pinsker_pe_floor': self.pinsker_pe_floor,
            'pinsker_respected': self.pinsker_respected,
        }
        if include_trials:
            document['trial_results'] = [trial.to_dict() for trial in self.trial_results]
        return document


def derive_streams(master_seed: int, trial_index: int, role: str) -> np.random.Generator:
    """Independent generator per (seed, trial, role), via SeedSequence spawn keys"""
    if role not in STREAM_ROLES:
        raise InvalidParameterError(f"Unknown stream role '{role}'; expected one of {STREAM_ROLES}")
    if trial_index < 0:
        raise InvalidParameterError(f"trial_index must be non-negative, got {trial_index}")
    sequence = np.random.SeedSequence(entropy=master_seed,
                                      spawn_key=(trial_index, STREAM_ROLES.index(role)))
    return np.random.default_rng(sequence)


def gen_secret_sequence(n: int, L: int, stream: np.random.Generator) -> np.ndarray:
    if L < 2:
        raise InvalidParameterError(f"Alphabet size must be at least 2, got {L}")
    if n < 0:
        raise InvalidParameterError(f"Sequence length must be non-negative, got {n}")
    return stream.integers(0, L, size=n)


def encode(codeword: Sequence[int], secret: Sequence[int], L: int) -> np.ndarray:
    """One-time pad: (codeword + secret) mod L"""
    codeword, secret = np.asarray(codeword), np.asarray(secret)
    if codeword.shape != secret.shape:
        raise InvalidParameterError(f"Codeword length {codeword.shape} differs from secret length {secret.shape}")
    return np.mod(codeword + secret, L)


def decode(received: Sequence[int], secret: Sequence[int], L: int) -> np.ndarray:
    received, secret = np.asarray(received), np.asarray(secret)
    if received.shape != secret.shape:
        raise InvalidParameterError(f"Received length {received.shape} differs from secret length {secret.shape}")
    return np.mod(received - secret, L)


def select_modes(n: int, tau: float, stream: np.random.Generator) -> np.ndarray:
    """Each of n mode indices kept independently with probability tau"""
    if not (0.0 <= tau <= 1.0):
        raise InvalidParameterError(f"tau must lie in [0, 1], got {tau}")
    return np.flatnonzero(stream.random(n) < tau)


def bob_heterodyne_sample(amplitude: Union[complex, np.ndarray], channel: ChannelParams,
                          stream: np.random.Generator) -> Union[complex, np.ndarray]:
    """
    sqrt(eta) amplitude + z, with E|z|^2 = (1 - eta) nbar_B + 1

    The +1 is the heterodyne vacuum contribution.
    """
    amplitude = np.asarray(amplitude, dtype=complex)
    scale = math.sqrt((channel.bob_noise + 1.0) / 2.0)
    noise = scale * (stream.standard_normal(amplitude.shape) + 1j * stream.standard_normal(amplitude.shape))
    sample = math.sqrt(channel.eta) * amplitude + noise
    return complex(sample) if sample.ndim == 0 else sample


def _tie_break_seed(sample: complex) -> np.random.SeedSequence:
    words = np.frombuffer(np.complex128(sample).tobytes(), dtype=np.uint64)
    return np.random.SeedSequence([int(w) for w in words])


def bob_ml_decode(sample: Union[complex, np.ndarray],
                  constellation_scaled: Sequence[complex]) -> Union[int, np.ndarray]:
    """
    Nearest-neighbour symbol index

    Exactly tied samples are nudged by a tiny perturbation drawn from a generator seeded by the
    sample's own bits, then the lowest index among the remaining ties wins.
    """
    points = np.asarray(constellation_scaled, dtype=complex)
    samples = np.atleast_1d(np.asarray(sample, dtype=complex))
    distances = np.abs(samples[:, None] - points[None, :])
    decided = np.argmin(distances, axis=1)

    tied = np.count_nonzero(distances == distances.min(axis=1, keepdims=True), axis=1) > 1
    for row in np.flatnonzero(tied):
        rng = np.random.default_rng(_tie_break_seed(samples[row]))
        nudge = 1e-12 * max(1.0, abs(samples[row])) * complex(*rng.standard_normal(2))
        decided[row] = int(np.argmin(np.abs(samples[row] + nudge - points)))

    if np.ndim(sample) == 0:
        return int(decided[0])
    return decided


def willie_photon_sample(amplitude_willie_side: Union[complex, np.ndarray], nT: float,
                         stream: np.random.Generator) -> Union[int, np.ndarray]:
    """Photon count of a displaced thermal mode: Gaussian beta around the amplitude, then Poisson(|beta|^2)"""
    if nT < 0:
        raise InvalidParameterError(f"nT must be non-negative, got {nT}")
    amplitude = np.asarray(amplitude_willie_side, dtype=complex)
    scale = math.sqrt(nT / 2.0)
    beta = amplitude + scale * (stream.standard_normal(amplitude.shape) + 1j * stream.standard_normal(amplitude.shape))
    counts = np.asarray(stream.poisson(np.abs(beta) ** 2))
    return int(counts) if counts.ndim == 0 else counts


def willie_total_count(amplitudes_willie_side: Sequence[complex], n_modes: int, nT: float,
                       stream: np.random.Generator) -> int:
    """
    Radiometer statistic: total photons over n_modes

    Occupied modes get their own Gaussian beta; the idle ones share one Gamma(n - s, nT)
    intensity. A single Poisson draw on the summed intensity has the same law as summing
    per-mode counts.
    """
    amplitudes = np.asarray(amplitudes_willie_side, dtype=complex)
    idle = n_modes - amplitudes.size
    if idle < 0:
        raise InvalidParameterError(f"{amplitudes.size} occupied modes exceed n_modes = {n_modes}")
    scale = math.sqrt(nT / 2.0)
    beta = amplitudes + scale * (stream.standard_normal(amplitudes.shape) + 1j * stream.standard_normal(amplitudes.shape))
    intensity = float(np.sum(np.abs(beta) ** 2))
    if idle > 0 and nT > 0:
        intensity += float(stream.gamma(idle, nT))
    return int(stream.poisson(intensity))


def plugin_mutual_information(joint_counts: np.ndarray) -> float:
    """Plug-in mutual information (nats) of an empirical joint histogram"""
    joint = np.asarray(joint_counts, dtype=float)
    total = joint.sum()
    if total <= 0:
        return 0.0
    p = joint / total
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    mask = p > 0
    return float(max(0.0, np.sum(p[mask] * np.log(p[mask] / (px @ py)[mask]))))


def _run_trial(config: SimConfig, tau: float, trial_index: int):
    seed = config.master_seed
    transmit = config.transmit_constellation
    points = np.array(transmit.amplitudes)
    L = transmit.size

    selected = select_modes(config.n_modes, tau, derive_streams(seed, trial_index, 'mode_select'))
    count = selected.size
    message = derive_streams(seed, trial_index, 'message').integers(0, L, size=count)
    secret = gen_secret_sequence(count, L, derive_streams(seed, trial_index, 'alice_key'))
    sent = encode(message, secret, L)

    samples = bob_heterodyne_sample(points[sent], config.channel, derive_streams(seed, trial_index, 'channel_noise'))
    received = bob_ml_decode(samples, math.sqrt(config.channel.eta) * points)
    recovered = decode(received, secret, L)

    joint = np.zeros((L, L), dtype=np.int64)
    np.add.at(joint, (message, recovered), 1)

    willie = derive_streams(seed, trial_index, 'willie_noise')
    nT = config.channel.nT
    h0 = willie_total_count([], config.n_modes, nT, willie)
    h1 = willie_total_count(math.sqrt(1.0 - config.channel.eta) * points[sent], config.n_modes, nT, willie)

    result = TrialResult(
        selected_mode_count=int(count),
        bob_symbol_errors=int(np.count_nonzero(recovered != message)),
        bob_mi_estimate=plugin_mutual_information(joint),
        willie_total_count_h0=h0,
        willie_total_count_h1=h1,
    )
    return result, joint


def _resolve_tau(config: SimConfig) -> float:
    try:
        return config.tau
    except BudgetNotBindingError as e:
        logger.warning(f"Rejecting simulation config: {e}")
        raise


def _run_trials(config: SimConfig, tau: float, trials: int):
    indices = range(trials)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as executor:
            # map yields in submission order, which keeps the reduction order fixed
            return list(executor.map(lambda t: _run_trial(config, tau, t), indices))
    outputs = []
    for t in indices:
        outputs.append(_run_trial(config, tau, t))
        if (t + 1) % 100 == 0:
            logger.debug(f"Completed {t + 1}/{trials} trials")
    return outputs


def roc_from_counts(h0_counts: Sequence[int], h1_counts: Sequence[int]) -> List[RocPoint]:
    """Empirical ROC over every integer threshold where either count distribution changes"""
    h0 = np.sort(np.asarray(h0_counts))
    h1 = np.sort(np.asarray(h1_counts))
    if h0.size == 0 or h1.size == 0:
        raise InvalidParameterError("ROC needs at least one count under each hypothesis")
    thresholds = np.unique(np.concatenate([h0, h1, [max(h0[-1], h1[-1]) + 1]]))
    p_fa = 1.0 - np.searchsorted(h0, thresholds, side='left') / h0.size
    p_md = np.searchsorted(h1, thresholds, side='left') / h1.size
    return [RocPoint(int(t), float(fa), float(md)) for t, fa, md in zip(thresholds, p_fa, p_md)]


def _best_point(points: List[RocPoint], trials_h0: int, trials_h1: int):
    best = min(points, key=lambda point: point.p_e)
    stderr = 0.5 * math.sqrt(best.p_fa * (1 - best.p_fa) / trials_h0 + best.p_md * (1 - best.p_md) / trials_h1)
    return best, stderr


def willie_radiometer_roc(config: SimConfig, trials: Optional[int] = None) -> List[RocPoint]:
    """Radiometer ROC from simulated H0 (thermal only) and H1 (Alice transmitting) total counts"""
    trials = trials or config.trials
    tau = _resolve_tau(config)
    outputs = _run_trials(config, tau, trials)
    return roc_from_counts([trial.willie_total_count_h0 for trial, _ in outputs],
                           [trial.willie_total_count_h1 for trial, _ in outputs])


def run_experiment(config: SimConfig) -> ExperimentResult:
    """
    Run config.trials independent trials and aggregate them

    The mutual information is the plug-in estimate from the joint histogram pooled over all
    trials; throughput is E|S| = tau n times that estimate.
    """
    tau = _resolve_tau(config)
    logger.info(f"Simulating n = {config.n_modes}, tau = {tau:.6g}, {config.trials} trials")
    outputs = _run_trials(config, tau, config.trials)

    trials = [trial for trial, _ in outputs]
    L = config.constellation.size
    pooled = np.zeros((L, L), dtype=np.int64)
    for _, joint in outputs:
        pooled += joint

    total_selected = sum(trial.selected_mode_count for trial in trials)
    total_errors = sum(trial.bob_symbol_errors for trial in trials)
    mi = plugin_mutual_information(pooled)
    e_selected = tau * config.n_modes

    roc = roc_from_counts([trial.willie_total_count_h0 for trial in trials],
                          [trial.willie_total_count_h1 for trial in trials])
    best, stderr = _best_point(roc, len(trials), len(trials))

    chi = holevo_chi(config.nbar_S_per_selected_mode, config.channel)
    bound = sparse_throughput_bound(config.nbar_S_per_selected_mode, tau, config.n_modes, config.channel)
    return ExperimentResult(
        config=config,
        tau=tau,
        e_selected=e_selected,
        mean_selected=total_selected / len(trials),
        ser=total_errors / total_selected if total_selected else 0.0,
        mi_nats=mi,
        m_nats=e_selected * mi,
        holevo_chi_nats=chi,
        holevo_m_nats=bound['m_nats'],
        willie_min_pe=best.p_e,
        willie_pe_stderr=stderr,
        willie_best_threshold=best.threshold,
        pinsker_pe_floor=pinsker_pe_floor(config.delta_qre),
        trial_results=trials,
    )


def srl_scaling_sweep(base_config: SimConfig, n_grid: Sequence[int]) -> pd.DataFrame:
    """One run_experiment per n, tau re-derived from the covert budget each time"""
    grid = [int(n) for n in n_grid]
    if not grid:
        raise InvalidParameterError("n_grid must not be empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidParameterError(f"n_grid must be strictly ascending, got {grid}")

    rows = []
    for n in grid:
        result = run_experiment(base_config.with_modes(n))
        if not result.pinsker_respected:
            logger.warning(f"n = {n}: radiometer P_e {result.willie_min_pe:.4f} is below the "
                           f"Pinsker floor {result.pinsker_pe_floor:.4f} beyond the MC margin")
        rows.append({
            'n': n,
            'tau': result.tau,
            'e_selected': result.e_selected,
            'ser': result.ser,
            'mi_nats': result.mi_nats,
            'm_bits': result.m_bits,
            'willie_min_pe': result.willie_min_pe,
            'willie_pe_stderr': result.willie_pe_stderr,
        })
    return pd.DataFrame(rows, columns=SCALING_COLUMNS)


def scaling_slope(rows: Union[pd.DataFrame, List[Dict[str, Any]]]) -> float:
    """Least-squares slope of log(m_bits) against log(n)"""
    table = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(rows)
    if len(table) < 2:
        raise InvalidParameterError("Need at least two rows to fit a slope")
    if (table['m_bits'] <= 0).any():
        raise InvalidParameterError("Throughput estimates must be positive to fit a log-log slope")
    slope, _ = np.polyfit(np.log(table['n'].astype(float)), np.log(table['m_bits'].astype(float)), 1)
    return float(slope)
