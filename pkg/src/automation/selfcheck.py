#!/usr/bin/env python3
"""
CovertLink Selfcheck
Runs the invariant suite (Pinsker, additivity, matrix calculus, derivative oracles,
coefficient fits, budget algebra, radiometer floor) and reports a pass/fail table.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from config.numerics_config import SELFCHECK_CONFIG, fault_injection_enabled, get_trial_count
from src.numerics.constellations import (
    Constellation,
    WillieSpec,
    closed_form_derivative,
    derivative_check,
    derivative_dim,
    exact_qre_per_mode,
    quartic_coefficient_fit,
)
from src.numerics.covertlimits import (
    ChannelParams,
    bpsk_quartic_coefficient,
    c_rel_bounds,
    converse_qre_leading,
    converse_qre_lower_exact,
    covert_budget_nS,
    g_function,
    holevo_chi,
    qpsk_quartic_coefficient,
    sparsification_tau,
    sparsified_qre_leading,
)
from src.numerics.errors import CovertLinkError
from src.numerics.fockspace import (
    TruncationPolicy,
    detection_error_min,
    matrix_inverse_derivative_check,
    matrix_log_derivative_check,
    qre,
    random_density_matrix,
    tensor,
    thermal_state,
    trace_distance,
    von_neumann_entropy,
)
from src.reports.base_reporter import BaseReporter
from src.simulation.linksim import run_experiment
from src.simulation.sim_config import SimConfig
from src.utils.color_logger import Colors, ColorLogger
from src.utils.helpers import format_duration

logger = logging.getLogger(__name__)

SELFCHECK_SEED = 20240601


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float
    message: str = ""
    duration: float = 0.0

    @property
    def status(self) -> str:
        return 'passed' if self.passed else 'failed'

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'status': self.status,
            'value': self.value,
            'limit': self.limit,
            'message': self.message,
            'duration_seconds': round(self.duration, 3),
        }


@dataclass
class SelfCheckReport:
    results: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.results) and all(result.passed for result in self.results)

    @property
    def failed_names(self) -> List[str]:
        return [result.name for result in self.results if not result.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'passed': self.passed,
            'total': len(self.results),
            'failed': self.failed_names,
            'checks': [result.to_dict() for result in self.results],
        }


class SelfCheckSuite:
    """Invariant suite behind `covertlink selfcheck`"""

    def __init__(self, seed: int = SELFCHECK_SEED, color_logger: Optional[ColorLogger] = None,
                 radiometer_trials: Optional[int] = None):
        self.seed = seed
        self.console = color_logger or ColorLogger()
        self.radiometer_trials = radiometer_trials or get_trial_count(SELFCHECK_CONFIG['radiometer_trials'])
        self.policy = TruncationPolicy()
        self.checks: List[tuple] = [
            ('pinsker_random_pairs', self.check_pinsker),
            ('qre_additivity', self.check_additivity),
            ('thermal_entropy_closed_form', self.check_thermal_entropy),
            ('log_derivative_identity', self.check_log_derivative),
            ('inverse_derivative_identity', self.check_inverse_derivative),
            ('odd_derivatives_vanish', self.check_odd_derivatives),
            ('qpsk_second_derivative', lambda: self.check_even_derivative('qpsk', 2)),
            ('qpsk_fourth_derivative', lambda: self.check_even_derivative('qpsk', 4)),
            ('bpsk_second_derivative', lambda: self.check_even_derivative('bpsk', 2)),
            ('bpsk_fourth_derivative', lambda: self.check_even_derivative('bpsk', 4)),
            ('qpsk_quartic_fit', lambda: self.check_quartic_fit('qpsk')),
            ('bpsk_quartic_fit', lambda: self.check_quartic_fit('bpsk')),
            ('budget_algebra', self.check_budget_algebra),
            ('converse_chain', self.check_converse_chain),
            ('holevo_slope', self.check_holevo_slope),
            ('radiometer_pinsker_floor', self.check_radiometer),
        ]

    # Fock-space properties

    def check_pinsker(self):
        rng = np.random.default_rng(self.seed)
        worst_gap = -math.inf
        for _ in range(SELFCHECK_CONFIG['random_pairs']):
            dim = int(rng.integers(2, SELFCHECK_CONFIG['random_pair_max_dim'] + 1))
            rho = random_density_matrix(dim, rng)
            sigma = random_density_matrix(dim, rng)
            divergence = qre(rho, sigma)
            gap = 2.0 * trace_distance(rho, sigma) - math.sqrt(2.0 * max(divergence, 0.0))
            if not (0.0 <= detection_error_min(rho, sigma) <= 0.5) or divergence < -1e-12:
                return -divergence, 0.0, "Helstrom error or QRE out of range"
            worst_gap = max(worst_gap, gap)
        return worst_gap, 1e-8, "max of ||rho - sigma||_1 - sqrt(2 D)"

    def check_additivity(self):
        rng = np.random.default_rng(self.seed + 1)
        rho1, sigma1 = random_density_matrix(3, rng), random_density_matrix(3, rng)
        rho2, sigma2 = random_density_matrix(2, rng), random_density_matrix(2, rng)
        joint = qre(tensor(rho1, rho2), tensor(sigma1, sigma2))
        return abs(joint - qre(rho1, sigma1) - qre(rho2, sigma2)), 1e-10, "|D(joint) - D1 - D2|"

    def check_thermal_entropy(self):
        worst = max(abs(von_neumann_entropy(thermal_state(x, self.policy)) - g_function(x))
                    for x in (0.1, 1.0, 10.0))
        return worst, 1e-8, "|S(thermal) - g(x)|"

    def check_log_derivative(self):
        base = np.diag([0.5, 0.3, 0.2]).astype(complex)
        direction = np.array([[0.1, 0.05, 0.0], [0.05, -0.05, 0.02], [0.0, 0.02, -0.05]], dtype=complex)
        residual = matrix_log_derivative_check(lambda t: base + t * direction, 0.0, 1e-4)
        return residual, 1e-6, "d/dt log A vs resolvent integral"

    def check_inverse_derivative(self):
        residual = matrix_inverse_derivative_check(
            lambda t: np.diag([1.0 + t, 2.0 + t ** 2, 3.0 - t]).astype(complex), 0.5, 1e-4)
        return residual, 1e-6, "d/dt B^-1 vs -B^-1 B' B^-1"

    # Derivative oracles and coefficients

    def check_odd_derivatives(self):
        worst = max(derivative_check(kind, order, 1.0, self.policy)
                    for kind in ('qpsk', 'bpsk') for order in (1, 3))
        return worst, 1e-6, "orders 1 and 3 at u = 0"

    def check_even_derivative(self, kind: str, order: int):
        closed_form = None
        if fault_injection_enabled() and kind == 'qpsk' and order == 2:
            logger.warning("Fault injection active: flipping the sign of the QPSK second derivative")
            closed_form = -closed_form_derivative(kind, order, 1.0, derivative_dim(1.0, self.policy))
        residual = derivative_check(kind, order, 1.0, self.policy, closed_form=closed_form)
        return residual, 1e-5, f"{kind} order {order} at nT = 1"

    def check_quartic_fit(self, kind: str):
        spec = WillieSpec.for_nT(kind, 1.0, policy=self.policy)
        target = qpsk_quartic_coefficient(1.0) if kind == 'qpsk' else bpsk_quartic_coefficient(1.0)
        fit = quartic_coefficient_fit(spec)
        return abs(fit['c4'] / target - 1.0), 0.01, f"c4 = {fit['c4']:.6f} vs {target:.6f}"

    # Closed-form algebra

    def check_budget_algebra(self):
        params = ChannelParams(eta=0.5, nbar_B=1.0)
        n, delta_qre = 10 ** 6, 0.01
        budget = covert_budget_nS(params, n, delta_qre).nbar_S
        inversion = abs(converse_qre_leading(budget, params, n) / delta_qre - 1.0)
        tau_error = abs(sparsification_tau(budget, params, delta_qre, n) - 1.0)
        tau = sparsification_tau(10 * budget, params, delta_qre, n)
        composed = abs(n * sparsified_qre_leading(10 * budget, tau, params) / delta_qre - 1.0)
        return max(inversion, tau_error, composed), 1e-12, "budget inversion, tau = 1, composed QRE"

    def check_converse_chain(self):
        params = ChannelParams(eta=0.5, nbar_B=1.0)
        worst = -math.inf
        for nbar_S in (1e-3, 1e-2, 0.1):
            spec = WillieSpec(params, Constellation.qpsk(math.sqrt(nbar_S)), policy=self.policy)
            worst = max(worst, converse_qre_lower_exact(nbar_S, params, 1) - exact_qre_per_mode(spec))
        return worst, 1e-10, "converse exact minus QPSK exact"

    def check_holevo_slope(self):
        worst = 0.0
        step = 1e-6
        for eta in (0.1, 0.5, 0.9):
            for nbar_B in (0.1, 1.0, 10.0):
                params = ChannelParams(eta=eta, nbar_B=nbar_B)
                slope = holevo_chi(step, params) / step
                worst = max(worst, abs(slope / c_rel_bounds(params).upper_chi - 1.0))
        return worst, 1e-4, "chi'(0) vs c_rel upper bound"

    # Monte Carlo

    def check_radiometer(self):
        config = SimConfig(
            channel=ChannelParams(eta=0.5, nbar_B=1.0),
            n_modes=SELFCHECK_CONFIG['radiometer_modes'],
            delta_qre=0.04,
            nbar_S_per_selected_mode=0.1,
            trials=self.radiometer_trials,
            master_seed=self.seed,
        )
        result = run_experiment(config)
        floor = result.pinsker_pe_floor - 4.0 * result.willie_pe_stderr
        return floor - result.willie_min_pe, 0.0, f"min P_e {result.willie_min_pe:.4f} vs floor {floor:.4f}"

    def _run_check(self, name: str, check: Callable[[], tuple]) -> CheckResult:
        start = time.time()
        try:
            value, limit, message = check()
            passed = bool(value <= limit)
        except CovertLinkError as e:
            value, limit, passed = math.inf, 0.0, False
            message = f"{type(e).__name__}: {e}"
        return CheckResult(name, passed, float(value), float(limit), message, time.time() - start)

    def run(self, reporter: Optional[BaseReporter] = None) -> SelfCheckReport:
        """Run every check in order, echoing a table to stderr and feeding the reporter"""
        report = SelfCheckReport()
        widths = [30, 8, 12, 10]
        self.console.header("CovertLink Selfcheck")
        self.console.table_row(["Check", "Status", "Value", "Time"], widths)
        self.console.table_row(["-" * 30, "-" * 8, "-" * 12, "-" * 10], widths)

        for name, check in self.checks:
            logger.debug(f"Running check {name}")
            result = self._run_check(name, check)
            report.results.append(result)
            status_color = Colors.GREEN if result.passed else Colors.RED
            self.console.table_row(
                [name, result.status.upper(), f"{result.value:.3e}", format_duration(result.duration)],
                widths, [Colors.RESET, status_color, Colors.RESET, Colors.RESET])
            if reporter is not None:
                reporter.add_check(name, result.status, message=result.message, duration=result.duration,
                                   parameters={'value': result.value, 'limit': result.limit})

        passed = sum(result.passed for result in report.results)
        self.console.print_summary(passed=passed, failed=len(report.results) - passed)
        if report.passed:
            self.console.success("All checks passed")
        for name in report.failed_names:
            self.console.fail_step(f"{name} failed")
        return report
