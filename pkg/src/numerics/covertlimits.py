"""
Covert Limits for CovertLink
Closed-form square-root-law constants, covert photon budgets, converse bounds,
constellation QRE expansions, sparsification and reliability constants.

All divergences and rates are in nats; convert with nats_to_bits at the reporting edge.
"""

import logging
import math
from dataclasses import dataclass, asdict
from typing import Any, Dict, Optional

from scipy.optimize import brentq

from src.numerics.errors import BudgetNotBindingError, InvalidBracketError, InvalidParameterError

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)


@dataclass(frozen=True)
class ChannelParams:
    """Lossy thermal-noise bosonic channel: transmissivity eta, environment photons nbar_B"""
    eta: float
    nbar_B: float

    def __post_init__(self):
        if not (0.0 < self.eta < 1.0):
            raise InvalidParameterError(f"eta must lie strictly inside (0, 1), got {self.eta}")
        if self.nbar_B <= 0:
            raise InvalidParameterError(f"nbar_B must be positive, got {self.nbar_B}")

    @property
    def nT(self) -> float:
        """Mean thermal photon number seen by Willie"""
        return self.eta * self.nbar_B

    @property
    def bob_noise(self) -> float:
        """Thermal photons reaching Bob"""
        return (1.0 - self.eta) * self.nbar_B


@dataclass(frozen=True)
class CovertBudget:
    """Covertness level and the per-mode photon budget it allows"""
    delta_qre: float
    n_modes: int
    nbar_S: float
    delta_p: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class RelBounds:
    """Reliability constant bounds, nats per photon"""
    lower_paper: float
    lower_shotnoise: float
    upper_chi: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def nats_to_bits(value: float) -> float:
    return value / LN2


def g_function(x: float) -> float:
    """Entropy of a thermal state with mean photon number x, in nats"""
    if x < 0:
        raise InvalidParameterError(f"g(x) needs x >= 0, got {x}")
    if x == 0:
        return 0.0
    return (1.0 + x) * math.log1p(x) - x * math.log(x)


def _noise_scale(params: ChannelParams) -> float:
    """2 eta nbar_B (1 + eta nbar_B)"""
    return 2.0 * params.nT * (1.0 + params.nT)


def c_cov(params: ChannelParams) -> float:
    """Covertness constant sqrt(2 eta nbar_B (1 + eta nbar_B)) / (1 - eta)"""
    return math.sqrt(_noise_scale(params)) / (1.0 - params.eta)


def covert_budget_nS(params: ChannelParams, n: int, delta_qre: float) -> CovertBudget:
    """Per-mode photon budget nbar_S = c_cov sqrt(delta_qre / n)"""
    if n < 1:
        raise InvalidParameterError(f"n must be at least 1, got {n}")
    if delta_qre < 0:
        raise InvalidParameterError(f"delta_qre must be non-negative, got {delta_qre}")
    return CovertBudget(
        delta_qre=delta_qre,
        n_modes=n,
        nbar_S=c_cov(params) * math.sqrt(delta_qre / n),
        delta_p=math.sqrt(delta_qre / 2.0),
    )


def converse_qre_lower_exact(nbar_S: float, params: ChannelParams, n: int) -> float:
    """
    Exact converse lower bound on n-mode QRE, before discarding higher-order terms

    n [ (x + m) ln(1 + x/m) - (1 + x + m) ln(1 + x/(1 + m)) ] with x = (1-eta) nbar_S, m = eta nbar_B
    """
    if nbar_S < 0:
        raise InvalidParameterError(f"nbar_S must be non-negative, got {nbar_S}")
    x = (1.0 - params.eta) * nbar_S
    m = params.nT
    per_mode = (x + m) * math.log1p(x / m) - (1.0 + x + m) * math.log1p(x / (1.0 + m))
    return n * per_mode


def converse_qre_leading(nbar_S: float, params: ChannelParams, n: int) -> float:
    """Leading term n (1-eta)^2 nbar_S^2 / (2 eta nbar_B (1 + eta nbar_B))"""
    if nbar_S < 0:
        raise InvalidParameterError(f"nbar_S must be non-negative, got {nbar_S}")
    return n * ((1.0 - params.eta) * nbar_S) ** 2 / _noise_scale(params)


def converse_budget_exact(params: ChannelParams, n: int, delta_qre: float) -> float:
    """nbar_S solving converse_qre_lower_exact = delta_qre (never below the leading-order budget)"""
    if delta_qre <= 0:
        return 0.0
    leading = covert_budget_nS(params, n, delta_qre).nbar_S

    def excess(nbar_S):
        return converse_qre_lower_exact(nbar_S, params, n) - delta_qre

    upper = 2.0 * leading
    while excess(upper) < 0:
        upper *= 2.0
        if upper > 1e12:
            raise InvalidBracketError("Could not bracket the exact converse budget",
                                      diagnostics={'leading': leading, 'upper': upper})
    return brentq(excess, leading, upper, xtol=1e-15 * max(leading, 1.0), rtol=1e-14)


def qpsk_qre_leading(nbar_S: float, params: ChannelParams) -> float:
    """Per-mode QPSK QRE to leading order; coincides with the converse"""
    return converse_qre_leading(nbar_S, params, 1)


def bpsk_qre_leading(nbar_S: float, params: ChannelParams) -> float:
    """Per-mode BPSK QRE to leading order"""
    if nbar_S < 0:
        raise InvalidParameterError(f"nbar_S must be non-negative, got {nbar_S}")
    return ((1.0 - params.eta) * nbar_S) ** 2 * bpsk_quartic_coefficient(params.nT)


def qpsk_quartic_coefficient(nT: float) -> float:
    """Coefficient of u^4 in the QPSK mixture QRE, u the Willie-side displacement"""
    if nT <= 0:
        raise InvalidParameterError(f"nT must be positive, got {nT}")
    return 1.0 / (2.0 * nT * (1.0 + nT))


def bpsk_quartic_coefficient(nT: float) -> float:
    """Coefficient of u^4 in the BPSK mixture QRE"""
    return qpsk_quartic_coefficient(nT) + math.log1p(1.0 / nT) / (1.0 + 2.0 * nT)


def sparsified_qre_leading(nbar_S: float, tau: float, params: ChannelParams) -> float:
    """Leading-order QRE when each mode carries QPSK with probability tau"""
    if not (0.0 <= tau <= 1.0):
        raise InvalidParameterError(f"tau must lie in [0, 1], got {tau}")
    return tau ** 2 * qpsk_qre_leading(nbar_S, params)


def sparsification_tau(nbar_S: float, params: ChannelParams, delta_qre: float, n: int) -> float:
    """
    Fraction of modes to use so that per-selected-mode power nbar_S meets the covert budget

    Raises:
        BudgetNotBindingError: tau > 1, i.e. nbar_S is already under the budget
    """
    if nbar_S <= 0:
        raise InvalidParameterError(f"nbar_S must be positive, got {nbar_S}")
    if n < 1:
        raise InvalidParameterError(f"n must be at least 1, got {n}")
    tau = math.sqrt(_noise_scale(params)) / ((1.0 - params.eta) * nbar_S) * math.sqrt(delta_qre / n)
    # Budget equality is an algebraic identity; absorb the last-ulp rounding
    if 1.0 < tau <= 1.0 + 1e-12:
        tau = 1.0
    if tau > 1.0:
        raise BudgetNotBindingError(
            f"tau = {tau:.6g} > 1: nbar_S = {nbar_S:.6g} is below the covert budget", tau=tau)
    return tau


def c_rel_bounds(params: ChannelParams) -> RelBounds:
    """Reliability constant bounds (nats per photon)"""
    noise = params.bob_noise
    return RelBounds(
        lower_paper=params.eta / noise,
        lower_shotnoise=params.eta / (noise + 1.0),
        upper_chi=params.eta * math.log1p(1.0 / noise),
    )


def holevo_chi(nbar_S: float, params: ChannelParams) -> float:
    """Holevo rate of the lossy thermal channel with mean input photons nbar_S (nats/mode)"""
    if nbar_S < 0:
        raise InvalidParameterError(f"nbar_S must be non-negative, got {nbar_S}")
    return g_function(params.eta * nbar_S + params.bob_noise) - g_function(params.bob_noise)


def heterodyne_rate(nbar_S: float, params: ChannelParams) -> float:
    """Gaussian-input heterodyne rate ln(1 + eta nbar_S / ((1-eta) nbar_B + 1))"""
    if nbar_S < 0:
        raise InvalidParameterError(f"nbar_S must be non-negative, got {nbar_S}")
    return math.log1p(params.eta * nbar_S / (params.bob_noise + 1.0))


def srl_throughput(n: int, delta: float, c_cov_val: float, c_rel_val: float) -> float:
    """Covert bits sqrt(n) delta c_cov c_rel, with c_rel given in nats per photon"""
    for name, value in (('n', n), ('delta', delta), ('c_cov', c_cov_val), ('c_rel', c_rel_val)):
        if value < 0:
            raise InvalidParameterError(f"{name} must be non-negative, got {value}")
    return nats_to_bits(math.sqrt(n) * delta * c_cov_val * c_rel_val)


def pinsker_pe_floor(delta_qre_total: float) -> float:
    """Lower bound 1/2 - sqrt(2 D)/4 on any detector's error probability"""
    if delta_qre_total < 0:
        raise InvalidParameterError(f"QRE budget must be non-negative, got {delta_qre_total}")
    return min(0.5, max(0.0, 0.5 - math.sqrt(2.0 * delta_qre_total) / 4.0))


def sparse_throughput_bound(nbar_S_sel: float, tau: float, n: int, params: ChannelParams) -> Dict[str, float]:
    """Expected reliable bits over the binomial mode selection, using the Holevo rate"""
    if not (0.0 <= tau <= 1.0):
        raise InvalidParameterError(f"tau must lie in [0, 1], got {tau}")
    expected = tau * n
    nats = expected * holevo_chi(nbar_S_sel, params)
    return {
        'e_selected': expected,
        'selected_stddev': math.sqrt(n * tau * (1.0 - tau)),
        'm_nats': nats,
        'm_bits': nats_to_bits(nats),
    }


def covertness_report(params: ChannelParams, n: int, delta_qre: float,
                      nbar_S: Optional[float] = None) -> Dict[str, Any]:
    """Everything the budget command prints, in nats and bits"""
    budget = covert_budget_nS(params, n, delta_qre)
    bounds = c_rel_bounds(params)
    constant = c_cov(params)
    delta = math.sqrt(delta_qre)

    report = {
        'eta': params.eta,
        'nbar_b': params.nbar_B,
        'n': n,
        'delta_qre_nats': delta_qre,
        'delta_p': budget.delta_p,
        'c_cov': constant,
        'nbar_s_budget': budget.nbar_S,
        'nbar_s_budget_exact_converse': converse_budget_exact(params, n, delta_qre),
        'c_rel_lower_paper_nats': bounds.lower_paper,
        'c_rel_lower_shotnoise_nats': bounds.lower_shotnoise,
        'c_rel_upper_chi_nats': bounds.upper_chi,
        'pinsker_pe_floor': pinsker_pe_floor(delta_qre),
    }
    for label, value in (('lower_paper', bounds.lower_paper),
                         ('lower_shotnoise', bounds.lower_shotnoise),
                         ('upper_chi', bounds.upper_chi)):
        bits = srl_throughput(n, delta, constant, value)
        report[f'm_{label}_bits'] = bits
        report[f'm_{label}_nats'] = bits * LN2

    if nbar_S is not None:
        report['nbar_s_operating'] = nbar_S
        try:
            report['tau'] = sparsification_tau(nbar_S, params, delta_qre, n)
            report['tau_binding'] = True
        except BudgetNotBindingError as e:
            logger.info(f"Operating point does not need sparsification: {e}")
            report['tau'] = 1.0
            report['tau_unclamped'] = e.tau
            report['tau_binding'] = False
    return report
