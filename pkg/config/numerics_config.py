"""
CovertLink Numerics Configuration
Tunables for truncation, fitting, finite differences, simulation and the selfcheck suite
"""

import os

# Fock-space truncation
TRUNCATION_CONFIG = {
    # Tail mass allowed outside the truncated basis
    'target_trace_deficit': 1e-10,

    # Hard ceiling for auto-grown dimensions
    'max_dim': 4096,

    # Multiplier applied each time a dimension is too small
    'growth_factor': 1.5,

    # Smallest starting dimension for auto-growth
    'min_dim': 32,

    # Eigenvalues at or below this contribute 0 to entropies (0 ln 0 := 0)
    'eigen_floor': 1e-14,

    # Displacements are computed on a larger basis and cropped; the cropped
    # block keeps this fraction of the working basis
    'kept_fraction': 0.75,

    # Allowed |<N> - (|alpha|^2 + nbar)| for displaced thermal states
    'mean_photon_tolerance': 1e-8,
}

# Quartic coefficient fits
FIT_CONFIG = {
    # Default u grid, as fractions of sqrt(nT), largest first
    'u_grid_fractions': [0.3, 0.2, 0.15, 0.1, 0.07, 0.05],

    # Trace deficit used while fitting (tighter than the library default)
    'fit_trace_deficit': 1e-13,

    # Allowed u range, as fractions of sqrt(nT)
    'u_min_fraction': 1e-3,
    'u_max_fraction': 0.3,
}

# Matrix-calculus identity checks
QUADRATURE_CONFIG = {
    'initial_nodes': 64,
    'max_nodes': 4096,

    # Relative change in residual treated as "stabilized"
    'stability_rtol': 1e-3,
}

# Finite-difference derivative checks of the mixture state
DERIVATIVE_CONFIG = {
    # Step for odd orders and the order-2 five-point stencil, as a fraction of sqrt(nT)
    'order2_step_fraction': 1e-2,

    # Step for the order-4 seven-point stencil
    'order4_step_fraction': 5e-2,

    # Basis size used for the stencil (shared by every evaluation point)
    'min_dim': 48,
}

# Monte Carlo link simulation
SIMULATION_CONFIG = {
    # Acceptance margins are this many standard errors
    'sigma_multiplier': 4.0,

    'default_trials': 200,

    # Trials evaluated concurrently (1 = sequential)
    'default_workers': 1,
}

# Selfcheck suite
SELFCHECK_CONFIG = {
    'random_pairs': 200,
    'random_pair_max_dim': 6,
    'radiometer_trials': 10000,
    'radiometer_modes': 100000,
}

# CI Specific Configuration
CI_CONFIG = {
    'auto_detect_ci': True,

    # Monte Carlo trial counts are scaled by this factor in CI
    'ci_trial_multiplier': 0.5,
}

FAULT_ENV_VAR = 'COVERTLINK_SELFCHECK_FAULT'
MAX_DIM_ENV_VAR = 'COVERTLINK_MAX_DIM'


def is_ci_environment():
    """Detect if running in CI/CD environment"""
    ci_indicators = [
        'CI', 'CONTINUOUS_INTEGRATION',
        'GITHUB_ACTIONS', 'GITLAB_CI', 'JENKINS_HOME',
        'TRAVIS', 'CIRCLECI', 'BITBUCKET_BUILD_NUMBER'
    ]
    return any(os.getenv(key) for key in ci_indicators)


def get_max_dim():
    """Get the truncation ceiling, honouring the environment override"""
    override = os.getenv(MAX_DIM_ENV_VAR)
    if override:
        try:
            return int(override)
        except ValueError:
            pass
    return TRUNCATION_CONFIG['max_dim']


def get_trial_count(trials):
    """Get a Monte Carlo trial count with CI adjustment"""
    if CI_CONFIG['auto_detect_ci'] and is_ci_environment():
        return max(1, int(trials * CI_CONFIG['ci_trial_multiplier']))
    return trials


def fault_injection_enabled():
    """Test-only switch that corrupts one closed form so the selfcheck must fail"""
    return os.getenv(FAULT_ENV_VAR, '').strip().lower() in ('1', 'true', 'yes')
