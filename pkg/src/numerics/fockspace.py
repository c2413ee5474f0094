"""
Fock Space Numerics for CovertLink
Truncated photon-number-basis states, entropies, divergences and distances.

Every closed form elsewhere in the package is checked against the functions here,
so they favour plain spectral computations over cleverness.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg as la
from numpy.polynomial.legendre import leggauss

from config.numerics_config import QUADRATURE_CONFIG, TRUNCATION_CONFIG, get_max_dim
from src.numerics.errors import (
    DivergenceInfiniteError,
    InsufficientDimensionError,
    InvalidDimensionError,
    InvalidParameterError,
    TruncationOverflowError,
)

logger = logging.getLogger(__name__)

EIGEN_FLOOR = TRUNCATION_CONFIG['eigen_floor']
HERMITICITY_TOL = 1e-12
POSITIVITY_TOL = 1e-10
TRACE_TOL = 1e-12

MatrixFamily = Callable[[float], Union[np.ndarray, "DensityMatrix"]]


@dataclass(frozen=True)
class TruncationPolicy:
    """How far a Fock basis may grow before giving up"""
    target_trace_deficit: float = TRUNCATION_CONFIG['target_trace_deficit']
    max_dim: int = field(default_factory=get_max_dim)
    growth_factor: float = TRUNCATION_CONFIG['growth_factor']

    def __post_init__(self):
        if not (0.0 < self.target_trace_deficit <= 1e-6):
            raise InvalidParameterError(
                f"target_trace_deficit must lie in (0, 1e-6], got {self.target_trace_deficit}")
        if self.max_dim < 2:
            raise InvalidParameterError(f"max_dim must be at least 2, got {self.max_dim}")
        if self.growth_factor <= 1.0:
            raise InvalidParameterError(f"growth_factor must exceed 1, got {self.growth_factor}")

    def tightened(self, target_trace_deficit: float) -> "TruncationPolicy":
        """Copy of this policy with a smaller tail-mass target"""
        return TruncationPolicy(
            target_trace_deficit=min(self.target_trace_deficit, target_trace_deficit),
            max_dim=self.max_dim,
            growth_factor=self.growth_factor,
        )

    def grow(self, dim: int) -> int:
        """Next dimension to try; raises once max_dim would be exceeded"""
        new_dim = max(dim + 1, int(math.ceil(dim * self.growth_factor)))
        if new_dim > self.max_dim:
            raise TruncationOverflowError(
                f"Fock dimension {new_dim} required but max_dim is {self.max_dim}",
                required_dim=new_dim, max_dim=self.max_dim)
        logger.debug(f"Growing Fock dimension {dim} -> {new_dim}")
        return new_dim


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """Operator on one truncated bosonic mode"""
    entries: np.ndarray

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "ModeOperator":
        return ModeOperator(self.entries.conj().T)

    def commutator_defect(self) -> float:
        """max |[a, a†] - I| on the first dim-1 basis vectors"""
        a, a_dag = self.entries, self.dagger().entries
        comm = a @ a_dag - a_dag @ a
        block = comm[:-1, :-1] - np.eye(self.dim - 1)
        return float(np.max(np.abs(block))) if block.size else 0.0


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Trace-one (up to recorded truncation) positive Hermitian matrix"""
    entries: np.ndarray
    trace_deficit: float = 0.0

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 1:
            raise InvalidParameterError(f"Density matrix must be square, got shape {entries.shape}")
        if self.trace_deficit < 0:
            raise InvalidParameterError(f"trace_deficit must be non-negative, got {self.trace_deficit}")

        asymmetry = float(np.max(np.abs(entries - entries.conj().T)))
        if asymmetry > HERMITICITY_TOL:
            raise InvalidParameterError(f"Density matrix is not Hermitian (max |M - M†| = {asymmetry:.3e})")

        smallest = float(np.min(la.eigvalsh(entries)))
        if smallest < -POSITIVITY_TOL:
            raise InvalidParameterError(f"Density matrix is not positive (smallest eigenvalue {smallest:.3e})")

        trace = float(np.trace(entries).real)
        if not (1.0 - self.trace_deficit - TRACE_TOL <= trace <= 1.0 + TRACE_TOL):
            raise InvalidParameterError(
                f"Density matrix trace {trace:.15f} inconsistent with deficit {self.trace_deficit:.3e}")

        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def eigenvalues(self) -> np.ndarray:
        return la.eigvalsh(self.entries)

    def to_json_dump(self) -> str:
        """Debug dump: dim, trace deficit and row-major [re, im] pairs"""
        pairs = [[float(z.real), float(z.imag)] for z in self.entries.ravel()]
        return json.dumps({'dim': self.dim, 'trace_deficit': self.trace_deficit, 'entries': pairs})

    @classmethod
    def from_json_dump(cls, document: str) -> "DensityMatrix":
        data = json.loads(document)
        dim = int(data['dim'])
        flat = np.array([complex(re, im) for re, im in data['entries']], dtype=complex)
        if flat.size != dim * dim:
            raise InvalidParameterError(f"Dump holds {flat.size} entries, expected {dim * dim}")
        return cls(flat.reshape(dim, dim), trace_deficit=float(data.get('trace_deficit', 0.0)))


def _hermitian(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


def _starting_dim(nbar: float, alpha: complex = 0.0) -> int:
    return max(TRUNCATION_CONFIG['min_dim'], int(math.ceil(8 * (nbar + abs(alpha) ** 2 + 1))))


def _thermal_diagonal(nbar: float, dim: int) -> np.ndarray:
    ratio = nbar / (1.0 + nbar)
    return ratio ** np.arange(dim) / (1.0 + nbar)


def build_annihilation(dim: int) -> ModeOperator:
    """Truncated annihilation operator: sqrt(k) at (k-1, k)"""
    if dim < 2:
        raise InvalidDimensionError(f"Annihilation operator needs dim >= 2, got {dim}")
    return ModeOperator(np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex))


def thermal_state(nbar: float, policy: Optional[TruncationPolicy] = None,
                  dim: Optional[int] = None) -> DensityMatrix:
    """
    Thermal state with Fock weights t_k = nbar^k / (1+nbar)^(k+1)

    Args:
        nbar: Mean photon number (>= 0)
        policy: Truncation policy used when dim is not given
        dim: Explicit basis size; disables auto-growth

    Returns:
        DensityMatrix: diagonal thermal state with its tail mass recorded
    """
    if nbar < 0:
        raise InvalidParameterError(f"Mean photon number must be non-negative, got {nbar}")
    ratio = nbar / (1.0 + nbar)

    if dim is None:
        policy = policy or TruncationPolicy()
        dim = _starting_dim(nbar)
        if dim > policy.max_dim:
            raise TruncationOverflowError(
                f"Fock dimension {dim} required but max_dim is {policy.max_dim}",
                required_dim=dim, max_dim=policy.max_dim)
        while ratio ** dim >= policy.target_trace_deficit:
            dim = policy.grow(dim)
    elif dim < 1:
        raise InvalidDimensionError(f"Thermal state needs dim >= 1, got {dim}")

    diagonal = _thermal_diagonal(nbar, dim)
    deficit = max(0.0, 1.0 - float(np.sum(diagonal)))
    return DensityMatrix(np.diag(diagonal).astype(complex), trace_deficit=deficit)


def displacement_operator(alpha: complex, dim: int) -> ModeOperator:
    """D(alpha) = exp(alpha a† - conj(alpha) a) on a truncated basis"""
    radius = abs(alpha)
    if radius ** 2 + 6 * radius + 10 > dim:
        raise InsufficientDimensionError(
            f"dim {dim} too small for |alpha| = {radius:.4g} (need |alpha|^2 + 6|alpha| + 10 <= dim)")
    a = build_annihilation(dim).entries
    generator = alpha * a.conj().T - np.conj(alpha) * a
    # Scaling-and-squaring Pade; exactly unitary for the anti-Hermitian generator
    return ModeOperator(la.expm(generator))


def _displaced_thermal_entries(alpha: complex, nbar: float, dim: int) -> np.ndarray:
    """D rho D† built on a larger working basis and cropped to dim"""
    radius = abs(alpha)
    working = max(int(math.ceil(dim / TRUNCATION_CONFIG['kept_fraction'])),
                  int(math.ceil(radius ** 2 + 6 * radius + 10)))
    if alpha == 0:
        return np.diag(_thermal_diagonal(nbar, dim)).astype(complex)
    displacement = displacement_operator(alpha, working).entries
    weights = _thermal_diagonal(nbar, working)
    full = (displacement * weights) @ displacement.conj().T
    return _hermitian(full[:dim, :dim])


def displaced_thermal(alpha: complex, nbar: float, policy: Optional[TruncationPolicy] = None,
                      dim: Optional[int] = None) -> DensityMatrix:
    """
    Displaced thermal state D(alpha) rho_th(nbar) D(alpha)†

    Without an explicit dim the basis grows until both the trace deficit and the
    mean-photon error (against |alpha|^2 + nbar) pass.
    """
    if nbar < 0:
        raise InvalidParameterError(f"Mean photon number must be non-negative, got {nbar}")

    if dim is not None:
        if dim < 1:
            raise InvalidDimensionError(f"Displaced thermal state needs dim >= 1, got {dim}")
        entries = _displaced_thermal_entries(alpha, nbar, dim)
        return DensityMatrix(entries, trace_deficit=max(0.0, 1.0 - float(np.trace(entries).real)))

    policy = policy or TruncationPolicy()
    expected_mean = abs(alpha) ** 2 + nbar
    dim = _starting_dim(nbar, alpha)
    if dim > policy.max_dim:
        raise TruncationOverflowError(
            f"Fock dimension {dim} required but max_dim is {policy.max_dim}",
            required_dim=dim, max_dim=policy.max_dim)

    while True:
        entries = _displaced_thermal_entries(alpha, nbar, dim)
        deficit = max(0.0, 1.0 - float(np.trace(entries).real))
        mean_error = abs(float(np.arange(dim) @ np.diag(entries).real) - expected_mean)
        if deficit < policy.target_trace_deficit and mean_error <= TRUNCATION_CONFIG['mean_photon_tolerance']:
            return DensityMatrix(entries, trace_deficit=deficit)
        logger.debug(f"displaced_thermal(alpha={alpha}, nbar={nbar}) at dim {dim}: "
                     f"deficit {deficit:.2e}, mean error {mean_error:.2e}")
        dim = policy.grow(dim)


def mean_photon(rho: DensityMatrix) -> float:
    """tr(rho a†a)"""
    return float(np.arange(rho.dim) @ np.diag(rho.entries).real)


def _entropy_terms(eigenvalues: np.ndarray) -> float:
    kept = eigenvalues[eigenvalues > EIGEN_FLOOR]
    return float(-np.sum(kept * np.log(kept)))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) in nats; eigenvalues below the floor contribute 0"""
    return _entropy_terms(rho.eigenvalues())


def qre(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """
    Quantum relative entropy D(rho || sigma) = tr(rho ln rho) - tr(rho ln sigma), in nats

    Raises:
        DivergenceInfiniteError: sigma has (numerically) zero eigenvalues where rho has weight
    """
    if rho.dim != sigma.dim:
        raise InvalidParameterError(f"Dimension mismatch: {rho.dim} vs {sigma.dim}")

    weights, vectors = la.eigh(sigma.entries)
    # Diagonal of rho in sigma's eigenbasis
    overlaps = np.einsum('ij,jk,ki->i', vectors.conj().T, rho.entries, vectors).real

    null = weights <= EIGEN_FLOOR
    if np.any(null):
        leaked = float(np.sum(overlaps[null]))
        if leaked > POSITIVITY_TOL:
            raise DivergenceInfiniteError(
                f"Reference state is rank deficient on the support of rho (weight {leaked:.3e})")

    cross = float(np.sum(overlaps[~null] * np.log(weights[~null])))
    return -_entropy_terms(rho.eigenvalues()) - cross


def qre_vs_thermal(rho: DensityMatrix, nT: float) -> float:
    """
    D(rho || thermal(nT)) through the thermal log-form, no reference matrix needed

    The thermal log is diagonal: ln t_k = -ln(1+nT) + k ln(nT/(1+nT)). The constant term is
    weighted by tr(rho) so truncated states agree exactly with qre().
    """
    if nT <= 0:
        raise InvalidParameterError(f"Thermal mean photon number must be positive, got {nT}")
    return (-von_neumann_entropy(rho)
            + rho.trace * math.log1p(nT)
            - mean_photon(rho) * math.log(nT / (1.0 + nT)))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the trace norm of rho - sigma"""
    if rho.dim != sigma.dim:
        raise InvalidParameterError(f"Dimension mismatch: {rho.dim} vs {sigma.dim}")
    return 0.5 * float(np.sum(np.abs(la.eigvalsh(rho.entries - sigma.entries))))


def detection_error_min(rho0: DensityMatrix, rho1: DensityMatrix) -> float:
    """Helstrom error for equal priors: 1/2 - trace_distance/2, clamped to [0, 1/2]"""
    return float(np.clip(0.5 - 0.5 * trace_distance(rho0, rho1), 0.0, 0.5))


def tensor(rho: DensityMatrix, sigma: DensityMatrix) -> DensityMatrix:
    """Two-mode product state"""
    entries = np.kron(rho.entries, sigma.entries)
    return DensityMatrix(entries, trace_deficit=max(0.0, 1.0 - float(np.trace(entries).real)))


def random_density_matrix(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityMatrix:
    """Random state from a Ginibre matrix of the given rank (full rank by default)"""
    rank = rank or dim
    ginibre = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    entries = ginibre @ ginibre.conj().T
    entries = _hermitian(entries / np.trace(entries).real)
    return DensityMatrix(entries)


def _as_matrix(value: Union[np.ndarray, DensityMatrix]) -> np.ndarray:
    if isinstance(value, DensityMatrix):
        return np.array(value.entries)
    return np.asarray(value, dtype=complex)


def _hermitian_log(matrix: np.ndarray) -> np.ndarray:
    weights, vectors = la.eigh(_hermitian(matrix))
    if np.min(weights) <= 0:
        raise InvalidParameterError(f"Matrix is not positive definite (smallest eigenvalue {np.min(weights):.3e})")
    return (vectors * np.log(weights)) @ vectors.conj().T


def _log_derivative_quadrature(matrix: np.ndarray, derivative: np.ndarray, nodes: int) -> np.ndarray:
    """int_0^1 ds [sA + (1-s)I]^-1 A' [sA + (1-s)I]^-1 by Gauss-Legendre on [0, 1]"""
    points, weights = leggauss(nodes)
    points = 0.5 * (points + 1.0)
    weights = 0.5 * weights
    identity = np.eye(matrix.shape[0])
    total = np.zeros_like(derivative, dtype=complex)
    for s, w in zip(points, weights):
        resolvent = s * matrix + (1.0 - s) * identity
        left = np.linalg.solve(resolvent, derivative)
        total += w * np.linalg.solve(resolvent.T, left.T).T
    return total


def matrix_log_derivative_check(family: MatrixFamily, t0: float, step: float) -> float:
    """
    Residual between a central difference of log A(t) and the resolvent integral for it

    The quadrature starts at 64 nodes and doubles until the residual stops changing.

    Args:
        family: Callable returning a positive definite matrix (or DensityMatrix) for each t
        t0: Expansion point
        step: Central-difference step

    Returns:
        float: max entrywise residual
    """
    centre = _as_matrix(family(t0))
    if np.min(la.eigvalsh(_hermitian(centre))) <= 0:
        raise InvalidParameterError("Family is not positive definite at t0")

    forward = _as_matrix(family(t0 + step))
    backward = _as_matrix(family(t0 - step))
    numeric_log = (_hermitian_log(forward) - _hermitian_log(backward)) / (2.0 * step)
    derivative = (forward - backward) / (2.0 * step)

    nodes = QUADRATURE_CONFIG['initial_nodes']
    residual = float(np.max(np.abs(numeric_log - _log_derivative_quadrature(centre, derivative, nodes))))
    while nodes < QUADRATURE_CONFIG['max_nodes']:
        nodes *= 2
        refined = float(np.max(np.abs(numeric_log - _log_derivative_quadrature(centre, derivative, nodes))))
        settled = abs(refined - residual) <= QUADRATURE_CONFIG['stability_rtol'] * max(residual, 1e-15)
        residual = refined
        if settled or residual < 1e-13:
            break
    logger.debug(f"log-derivative residual {residual:.3e} with {nodes} nodes")
    return residual


def matrix_inverse_derivative_check(family: MatrixFamily, t0: float, step: float) -> float:
    """Residual between d/dt B^-1 by central difference and -B^-1 B' B^-1"""
    centre = _as_matrix(family(t0))
    try:
        inverse = np.linalg.inv(centre)
        numeric = (np.linalg.inv(_as_matrix(family(t0 + step)))
                   - np.linalg.inv(_as_matrix(family(t0 - step)))) / (2.0 * step)
    except np.linalg.LinAlgError as e:
        raise InvalidParameterError(f"Family is singular near t0: {e}") from e
    derivative = (_as_matrix(family(t0 + step)) - _as_matrix(family(t0 - step))) / (2.0 * step)
    return float(np.max(np.abs(numeric + inverse @ derivative @ inverse)))
