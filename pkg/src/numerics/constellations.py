"""
Constellations for CovertLink
Willie's per-mode mixture states for QPSK/BPSK/sparsified inputs, exact QRE,
quartic Taylor coefficients and finite-difference checks of the mixture derivatives.

Amplitude convention: Constellation amplitudes are Alice-side (b). Willie sees the
displacement u = sqrt(1 - eta) b on a thermal background of nT = eta nbar_B photons.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import bisect

from config.numerics_config import DERIVATIVE_CONFIG, FIT_CONFIG
from src.numerics.covertlimits import (
    ChannelParams,
    bpsk_quartic_coefficient,
    covert_budget_nS,
    qpsk_quartic_coefficient,
)
from src.numerics.errors import CovertLinkError, InvalidBracketError, InvalidParameterError, UnstableFitError
from src.numerics.fockspace import (
    DensityMatrix,
    TruncationPolicy,
    build_annihilation,
    displaced_thermal,
    qre_vs_thermal,
    thermal_state,
)

logger = logging.getLogger(__name__)

MAX_POINTS = 8
SWEEP_COLUMNS = ['u', 'qre_exact', 'qre_leading_closed_form', 'ratio', 'dim_used']


@dataclass(frozen=True)
class Constellation:
    """Coherent-state amplitude alphabet with priors"""
    amplitudes: Tuple[complex, ...]
    priors: Tuple[float, ...]
    kind: str = 'custom'

    def __post_init__(self):
        amplitudes = tuple(complex(a) for a in self.amplitudes)
        priors = tuple(float(p) for p in self.priors)
        if not amplitudes:
            raise InvalidParameterError("Constellation needs at least one amplitude")
        if len(amplitudes) > MAX_POINTS:
            raise InvalidParameterError(f"Constellations above {MAX_POINTS} points are not supported")
        if len(priors) != len(amplitudes):
            raise InvalidParameterError(f"{len(amplitudes)} amplitudes but {len(priors)} priors")
        if min(priors) < 0 or abs(sum(priors) - 1.0) > 1e-12:
            raise InvalidParameterError(f"Priors must be a probability vector, got {priors}")
        if self.kind not in ('qpsk', 'bpsk', 'custom'):
            raise InvalidParameterError(f"Unknown constellation kind '{self.kind}'")
        object.__setattr__(self, 'amplitudes', amplitudes)
        object.__setattr__(self, 'priors', priors)

    @classmethod
    def qpsk(cls, a: complex) -> "Constellation":
        return cls((a, 1j * a, -a, -1j * a), (0.25,) * 4, kind='qpsk')

    @classmethod
    def bpsk(cls, a: complex) -> "Constellation":
        # {a, -a}: the antipodal pair the derivative analysis uses
        return cls((a, -a), (0.5, 0.5), kind='bpsk')

    @classmethod
    def preset(cls, kind: str, a: complex) -> "Constellation":
        if kind == 'qpsk':
            return cls.qpsk(a)
        if kind == 'bpsk':
            return cls.bpsk(a)
        raise InvalidParameterError(f"No preset for constellation kind '{kind}'")

    @property
    def size(self) -> int:
        return len(self.amplitudes)

    @property
    def energy(self) -> float:
        """Prior-weighted mean photon number sum p(l) |a_l|^2"""
        return float(sum(p * abs(a) ** 2 for a, p in zip(self.amplitudes, self.priors)))

    def scaled_to(self, nbar: float) -> "Constellation":
        """Same shape with prior-weighted energy nbar"""
        if nbar < 0:
            raise InvalidParameterError(f"Target energy must be non-negative, got {nbar}")
        if self.energy == 0:
            if nbar == 0:
                return self
            raise InvalidParameterError("Cannot rescale an all-zero constellation")
        factor = math.sqrt(nbar / self.energy)
        return replace(self, amplitudes=tuple(factor * a for a in self.amplitudes))

    def rotated(self, phase: float) -> "Constellation":
        rotation = cmath.exp(1j * phase)
        return replace(self, amplitudes=tuple(rotation * a for a in self.amplitudes))

    def to_dict(self) -> Dict[str, Any]:
        return {
            'kind': self.kind,
            'amplitudes': [[a.real, a.imag] for a in self.amplitudes],
            'priors': list(self.priors),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Constellation":
        kind = data.get('kind', 'custom')
        if 'amplitudes' not in data:
            return cls.preset(kind, complex(data.get('amplitude', 1.0)))
        amplitudes = tuple(complex(*pair) if isinstance(pair, (list, tuple)) else complex(pair)
                           for pair in data['amplitudes'])
        priors = data.get('priors') or [1.0 / len(amplitudes)] * len(amplitudes)
        return cls(amplitudes, tuple(priors), kind=kind)


@dataclass(frozen=True)
class WillieSpec:
    """What Willie observes per mode: channel, Alice's constellation, sparsification"""
    channel: ChannelParams
    constellation: Constellation
    tau: float = 1.0
    policy: TruncationPolicy = field(default_factory=TruncationPolicy)

    def __post_init__(self):
        if not (0.0 <= self.tau <= 1.0):
            raise InvalidParameterError(f"tau must lie in [0, 1], got {self.tau}")

    @classmethod
    def for_nT(cls, kind: str, nT: float, tau: float = 1.0,
               policy: Optional[TruncationPolicy] = None) -> "WillieSpec":
        """Spec whose Willie-side quantities depend only on nT (eta fixed at 1/2)"""
        if nT <= 0:
            raise InvalidParameterError(f"nT must be positive, got {nT}")
        return cls(ChannelParams(eta=0.5, nbar_B=2.0 * nT), Constellation.preset(kind, 1.0),
                   tau=tau, policy=policy or TruncationPolicy())

    @property
    def nT(self) -> float:
        return self.channel.nT

    @property
    def willie_amplitudes(self) -> List[complex]:
        scale = math.sqrt(1.0 - self.channel.eta)
        return [scale * a for a in self.constellation.amplitudes]

    def at_scale(self, u: float) -> "WillieSpec":
        """Spec whose Willie-side prior-weighted energy is u^2"""
        alice_energy = u ** 2 / (1.0 - self.channel.eta)
        return replace(self, constellation=self.constellation.scaled_to(alice_energy))


def _mixture_entries(amplitudes: Sequence[complex], priors: Sequence[float], tau: float,
                     nT: float, dim: int) -> np.ndarray:
    """(1 - tau) thermal + tau sum p(l) displaced thermal, all on one basis"""
    entries = (1.0 - tau) * thermal_state(nT, dim=dim).entries
    for amplitude, prior in zip(amplitudes, priors):
        if prior == 0:
            continue
        entries = entries + tau * prior * displaced_thermal(amplitude, nT, dim=dim).entries
    return 0.5 * (entries + entries.conj().T)


def willie_mixture(spec: WillieSpec, dim: Optional[int] = None) -> DensityMatrix:
    """
    Willie's per-mode state

    The basis is auto-grown on the component with the largest displacement and shared by
    every other component, unless dim is given.
    """
    amplitudes = spec.willie_amplitudes
    if dim is None:
        if spec.tau == 0:
            return thermal_state(spec.nT, spec.policy)
        widest = max(amplitudes, key=abs)
        dim = displaced_thermal(widest, spec.nT, spec.policy).dim

    entries = _mixture_entries(amplitudes, spec.constellation.priors, spec.tau, spec.nT, dim)
    return DensityMatrix(entries, trace_deficit=max(0.0, 1.0 - float(np.trace(entries).real)))


def _exact_qre_and_dim(spec: WillieSpec) -> Tuple[float, int]:
    state = willie_mixture(spec)
    return qre_vs_thermal(state, spec.nT), state.dim


def exact_qre_per_mode(spec: WillieSpec) -> float:
    """D(Willie's mixture || thermal(eta nbar_B)) in nats"""
    return _exact_qre_and_dim(spec)[0]


def closed_form_quartic(spec: WillieSpec) -> float:
    """tau^2 times the closed-form u^4 coefficient; NaN for custom constellations"""
    kind = spec.constellation.kind
    if kind == 'qpsk':
        return spec.tau ** 2 * qpsk_quartic_coefficient(spec.nT)
    if kind == 'bpsk':
        return spec.tau ** 2 * bpsk_quartic_coefficient(spec.nT)
    return float('nan')


def _validate_u_grid(u_grid: Sequence[float], nT: float) -> np.ndarray:
    grid = np.asarray(u_grid, dtype=float)
    if grid.size < 4:
        raise InvalidParameterError(f"Need at least 4 grid points, got {grid.size}")
    if np.any(np.diff(grid) >= 0):
        raise InvalidParameterError("u_grid must be strictly decreasing")
    low = FIT_CONFIG['u_min_fraction'] * math.sqrt(nT)
    high = FIT_CONFIG['u_max_fraction'] * math.sqrt(nT)
    # Relative slack so grids built from the same fractions are accepted
    if grid[-1] < low * (1 - 1e-12) or grid[0] > high * (1 + 1e-12):
        raise InvalidParameterError(
            f"u_grid must lie within [{low:.4g}, {high:.4g}] for nT = {nT:.4g}")
    return grid


def default_u_grid(nT: float) -> List[float]:
    return [fraction * math.sqrt(nT) for fraction in FIT_CONFIG['u_grid_fractions']]


def quartic_coefficient_fit(spec: WillieSpec, u_grid: Optional[Sequence[float]] = None) -> Dict[str, Any]:
    """
    Fit D(u) = c4 u^4 + c6 u^6 + ... from exact QRE on a decreasing u grid

    Ratios D(u)/u^4 must approach their limit monotonically; the first sign change in
    consecutive differences marks where numerical noise takes over. The two smallest stable
    points are Richardson-extrapolated assuming an O(u^2) correction in the ratio.

    Args:
        spec: Template spec; its constellation shape is rescaled to each u (Willie side)
        u_grid: Decreasing Willie-side displacements, at least 4 points

    Returns:
        dict: c4, stderr, plus the per-point ratios and dims used
    """
    grid = _validate_u_grid(u_grid if u_grid is not None else default_u_grid(spec.nT), spec.nT)
    fit_spec = replace(spec, policy=spec.policy.tightened(FIT_CONFIG['fit_trace_deficit']))

    ratios = []
    dims = []
    for u in grid:
        value, dim = _exact_qre_and_dim(fit_spec.at_scale(float(u)))
        ratios.append(value / u ** 4)
        dims.append(dim)
        logger.debug(f"u = {u:.4g}: D/u^4 = {ratios[-1]:.10g} (dim {dim})")
    ratios = np.array(ratios)

    diffs = np.diff(ratios)
    stable = 2
    for i in range(1, diffs.size):
        if np.sign(diffs[i]) != np.sign(diffs[0]):
            break
        stable = i + 2
    if stable < 3:
        logger.warning(f"Quartic fit unstable; ratios {ratios.tolist()}")
        raise UnstableFitError(
            "Refinement is non-monotone from the start; increase the truncation dimension "
            "or use larger u", ratios=ratios.tolist())

    def richardson(i, j):
        ua, ub = grid[i] ** 2, grid[j] ** 2
        return (ua * ratios[j] - ub * ratios[i]) / (ua - ub)

    c4 = richardson(stable - 2, stable - 1)
    previous = richardson(stable - 3, stable - 2)
    return {
        'c4': float(c4),
        'stderr': float(abs(c4 - previous)),
        'stable_points': stable,
        'u_grid': grid.tolist(),
        'ratios': ratios.tolist(),
        'dims': dims,
        'closed_form': closed_form_quartic(spec),
    }


def closed_form_derivative(kind: str, order: int, nT: float, dim: int) -> np.ndarray:
    """
    d^k/du^k of the mixture at u = 0, as a dim x dim matrix

    Odd orders vanish. The QPSK fourth-order term carries -24/nT^3 on a rho a†; this is the
    coefficient that keeps the operator traceless.
    """
    if order not in (1, 2, 3, 4):
        raise InvalidParameterError(f"order must be 1..4, got {order}")
    if kind not in ('qpsk', 'bpsk'):
        raise InvalidParameterError(f"No closed form for constellation kind '{kind}'")
    if order in (1, 3):
        return np.zeros((dim, dim), dtype=complex)

    c = 1.0 / nT
    a = build_annihilation(dim).entries
    ad = a.conj().T
    rho = thermal_state(nT, dim=dim).entries
    mp = np.linalg.matrix_power

    def sandwich(left, right):
        return mp(a, left) @ rho @ mp(ad, right)

    if kind == 'qpsk':
        if order == 2:
            return 2 * c ** 2 * sandwich(1, 1) - 2 * c * rho
        return (12 * c ** 2 * rho - 24 * c ** 3 * sandwich(1, 1)
                + c ** 4 * (sandwich(4, 0) + 6 * sandwich(2, 2) + sandwich(0, 4)))

    second_order = sandwich(2, 0) + 2 * sandwich(1, 1) + sandwich(0, 2)
    if order == 2:
        return c ** 2 * second_order - 2 * c * rho
    return (12 * c ** 2 * rho - 12 * c ** 3 * second_order
            + c ** 4 * (sandwich(4, 0) + 4 * sandwich(3, 1) + 6 * sandwich(2, 2)
                        + 4 * sandwich(1, 3) + sandwich(0, 4)))


def derivative_dim(nT: float, policy: Optional[TruncationPolicy] = None) -> int:
    """Shared basis size for every stencil point of a derivative check"""
    return max(DERIVATIVE_CONFIG['min_dim'], thermal_state(nT, policy or TruncationPolicy()).dim)


# Central stencils: (offsets, weights, denominator power, error order)
_STENCILS = {
    1: ((-1, 1), (-0.5, 0.5), 1, 2),
    2: ((-2, -1, 0, 1, 2), (-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12), 2, 4),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5), 3, 2),
    4: ((-3, -2, -1, 0, 1, 2, 3), (-1 / 6, 2.0, -13 / 2, 28 / 3, -13 / 2, 2.0, -1 / 6), 4, 4),
}


def derivative_check(constellation_kind: str, order: int, nT: float,
                     policy: Optional[TruncationPolicy] = None,
                     closed_form: Optional[np.ndarray] = None) -> float:
    """
    Max entrywise residual between finite differences of the mixture at u = 0 and the
    closed-form derivative

    The stencil runs at h and h/2 and is Richardson-combined; the best of the three is
    returned (the step achieving it is logged).
    """
    if nT <= 0:
        raise InvalidParameterError(f"nT must be positive, got {nT}")
    if order not in _STENCILS:
        raise InvalidParameterError(f"order must be 1..4, got {order}")
    policy = policy or TruncationPolicy()
    dim = derivative_dim(nT, policy)
    target = closed_form if closed_form is not None else closed_form_derivative(constellation_kind, order, nT, dim)

    shape = Constellation.preset(constellation_kind, 1.0)
    step_fraction = DERIVATIVE_CONFIG['order4_step_fraction'] if order == 4 else DERIVATIVE_CONFIG['order2_step_fraction']
    h = step_fraction * math.sqrt(nT)
    offsets, weights, power, error_order = _STENCILS[order]

    cache = {}

    def state(u):
        if u not in cache:
            cache[u] = _mixture_entries([u * a for a in shape.amplitudes], shape.priors, 1.0, nT, dim)
        return cache[u]

    def stencil(step):
        total = sum(w * state(k * step) for k, w in zip(offsets, weights))
        return total / step ** power

    coarse = stencil(h)
    fine = stencil(h / 2)
    extrapolated = (2 ** error_order * fine - coarse) / (2 ** error_order - 1)

    candidates = {'h': coarse, 'h/2': fine, 'richardson': extrapolated}
    residuals = {label: float(np.max(np.abs(value - target))) for label, value in candidates.items()}
    best = min(residuals, key=residuals.get)
    if residuals['h/2'] > residuals['h']:
        logger.debug(f"Finite difference got worse at h/2 (order {order}, {constellation_kind}); "
                     f"cancellation error dominates")
    logger.debug(f"derivative_check {constellation_kind} order {order}: best {best} "
                 f"(h = {h:.3g}) residual {residuals[best]:.3e}")
    return residuals[best]


def amplitude_for_budget(spec_template: WillieSpec, delta_qre: float, n: int) -> float:
    """
    Alice-side amplitude |a| whose exact per-mode QRE equals delta_qre / n

    The constellation shape of the template is rescaled so its energy is |a|^2.
    """
    if delta_qre <= 0:
        raise InvalidParameterError(f"delta_qre must be positive, got {delta_qre}")
    if n < 1:
        raise InvalidParameterError(f"n must be at least 1, got {n}")
    if spec_template.tau == 0:
        raise InvalidBracketError("tau = 0 never spends any QRE", diagnostics={'tau': 0.0})

    target = delta_qre / n

    def excess(a):
        if a == 0:
            return -target
        alice = replace(spec_template, constellation=spec_template.constellation.scaled_to(a ** 2))
        return exact_qre_per_mode(alice) - target

    leading = covert_budget_nS(spec_template.channel, n, delta_qre).nbar_S / spec_template.tau
    a_hi = 2.0 * math.sqrt(leading)
    for _ in range(60):
        if excess(a_hi) > 0:
            break
        logger.debug(f"Expanding amplitude bracket to {a_hi:.4g}")
        a_hi *= 2.0
    else:
        raise InvalidBracketError("Could not bracket the covert amplitude",
                                  diagnostics={'a_hi': a_hi, 'target': target, 'excess_hi': excess(a_hi)})

    return bisect(excess, 0.0, a_hi, xtol=1e-15, rtol=1e-14, maxiter=200)


def qre_sweep(spec: WillieSpec, u_grid: Sequence[float]) -> pd.DataFrame:
    """Exact vs leading-order QRE on a Willie-side u grid, one row per u"""
    c4 = closed_form_quartic(spec)
    rows = []
    for u in u_grid:
        if u <= 0:
            raise InvalidParameterError(f"u must be positive, got {u}")
        try:
            exact, dim = _exact_qre_and_dim(spec.at_scale(float(u)))
        except CovertLinkError as err:
            # keep the type and diagnostics, name the row
            err.args = (f"u = {u:.6g}: {err}",) + err.args[1:]
            raise
        leading = c4 * u ** 4
        rows.append({
            'u': float(u),
            'qre_exact': exact,
            'qre_leading_closed_form': leading,
            'ratio': exact / leading if leading > 0 else float('nan'),
            'dim_used': dim,
        })
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
