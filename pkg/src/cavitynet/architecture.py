"""Closed-form architecture models: timing, throughput, geometry, error scaling."""

import math
from dataclasses import dataclass

from .units import SPEED_OF_LIGHT


@dataclass(frozen=True)
class ArchitectureParams:
    tau_serial: float = 5.3e-6
    tau_parallel: float = 28e-6
    p_success: float = 0.40
    ions_per_chain: int = 25

    def __post_init__(self):
        if self.tau_serial < 0 or self.tau_parallel < 0:
            raise ValueError("times must be non-negative")
        if not 0 < self.p_success <= 1:
            raise ValueError("p_success must lie in (0, 1]")
        if self.ions_per_chain < 1:
            raise ValueError("ions_per_chain must be at least 1")


@dataclass(frozen=True)
class TimingBudget:
    transfer_time: float = 1.0e-6
    raman_rabi: float = 2 * math.pi * 3e6
    n_transfers: int = 2
    n_rotations: int = 4


@dataclass(frozen=True)
class CavityGeometry:
    length: float
    finesse: float
    waist: float
    wavelength: float

    def __post_init__(self):
        for name in ("length", "finesse", "waist", "wavelength"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class DerivedCavity:
    fsr: float       # rad/s
    kappa: float     # rad/s
    ringdown: float  # s
    rayleigh: float  # m


@dataclass(frozen=True)
class ScalingQuery:
    n_qubits: int
    dimension: float = math.inf
    n_parallel: float = 1
    gate_time: float = 10e-6
    qubit_lifetime: float = 26.0
    eps_r: float = 1e-3


def sk1_duration(raman_rabi):
    """Duration of an SK1 composite rotation (5 pi of total rotation)."""
    if raman_rabi <= 0:
        raise ValueError("raman_rabi must be positive")
    return 5 * math.pi / raman_rabi


def serial_budget(budget):
    return budget.n_transfers * budget.transfer_time \
        + budget.n_rotations * sk1_duration(budget.raman_rabi)


def distribution_time(params, M):
    """Mean time to share M/2 Bell pairs among M chains."""
    if M < 0 or M % 2:
        raise ValueError("M must be a non-negative even chain count")
    return (params.tau_parallel + M * params.tau_serial / 2) / params.p_success


def photonic_time(two_ion_time, purification_factor=2.0, insertion_loss_db_per_photon=1.3,
                  photons_per_attempt=2, switch_overhead=10e-3, variant="overheads"):
    """Photonic-interconnect entanglement time; independent of M.

    ``overheads`` multiplies the attempt time by the purification factor,
    divides by the switch transmission for all photons of an attempt, and
    adds the switching time once.
    """
    if variant == "bare":
        return two_ion_time
    if variant != "overheads":
        raise ValueError("variant must be 'bare' or 'overheads'")
    transmission = 10 ** (-photons_per_attempt * insertion_loss_db_per_photon / 10)
    return switch_overhead + purification_factor * two_ion_time / transmission


def shuttling_time(per_op_time, M):
    return per_op_time * M


@dataclass(frozen=True)
class RateModels:
    cavity: ArchitectureParams = ArchitectureParams()
    photonic_two_ion_time: float = 5e-3
    purification_factor: float = 2.0
    insertion_loss_db_per_photon: float = 1.3
    photons_per_attempt: int = 2
    switch_overhead: float = 10e-3
    shuttle_per_op_time: float = 1e-3
    single_cavity_limit: int = 500


RATE_HEADER = ("M", "N", "t_cavity_s", "t_photonic_bare_s", "t_photonic_over_s",
               "t_shuttling_s", "beyond_single_cavity")


def rate_curves(models, M_values):
    """Rows ``(M, N, t_cavity, t_photonic_bare, t_photonic_over, t_shuttling, beyond)``."""
    M_values = list(M_values)
    if not M_values:
        raise ValueError("M range must be non-empty")
    bare = photonic_time(models.photonic_two_ion_time, variant="bare")
    over = photonic_time(models.photonic_two_ion_time, models.purification_factor,
                         models.insertion_loss_db_per_photon, models.photons_per_attempt,
                         models.switch_overhead, variant="overheads")
    rows = []
    for M in M_values:
        N = M * models.cavity.ions_per_chain
        rows.append((M, N, distribution_time(models.cavity, M), bare, over,
                     shuttling_time(models.shuttle_per_op_time, M),
                     N > models.single_cavity_limit))
    return rows


def swap_gate_error(d, eps_r):
    """Error of a distance-``d`` gate built from nearest-neighbour swaps."""
    if d < 1:
        raise ValueError("d must be at least 1")
    if not 0 <= eps_r <= 1:
        raise ValueError("eps_r must lie in [0, 1]")
    return min(1.0, eps_r + 3 * (d - 1) * eps_r)


def storage_error(query):
    """Probability ``N T / tau`` of a storage error during one gate."""
    if query.qubit_lifetime <= 0:
        raise ValueError("qubit_lifetime must be positive")
    return min(1.0, query.n_qubits * query.gate_time / query.qubit_lifetime)


def storage_limited_qubits(eps_cnot, gate_time, qubit_lifetime):
    """System size at which storage error per gate equals ``eps_cnot``."""
    return eps_cnot * qubit_lifetime / gate_time


def nonlocal_time_scaling(query):
    """Relative time ``N * N^(1/D) / N*`` to connect all N qubits nonlocally."""
    if not query.dimension >= 1:
        raise ValueError("dimension must be >= 1 (or inf)")
    if not query.n_parallel >= 1:
        raise ValueError("n_parallel must be >= 1")
    inv_d = 0.0 if math.isinf(query.dimension) else 1.0 / query.dimension
    return query.n_qubits ** (1.0 + inv_d) / query.n_parallel


def derived_cavity(geom):
    fsr = math.pi * SPEED_OF_LIGHT / geom.length
    kappa = fsr / geom.finesse
    return DerivedCavity(fsr=fsr, kappa=kappa, ringdown=1.0 / kappa,
                         rayleigh=math.pi * geom.waist ** 2 / geom.wavelength)


@dataclass(frozen=True)
class IonCapacity:
    total_extent: float
    fits: bool
    n_qubits: int


def ion_capacity(chain_length, gap, rayleigh, M, ions_per_chain=25):
    """Do M chains with ``gap`` spacing fit within ``+-rayleigh``?"""
    if M < 1:
        raise ValueError("M must be at least 1")
    extent = M * chain_length + (M - 1) * gap
    # Relative slack absorbs round-off in micron-scale sums.
    fits = extent <= 2 * rayleigh * (1 + 1e-12)
    return IonCapacity(extent, fits, M * ions_per_chain)


def rydberg_capacity(spacing, rayleigh, rows=1, fill=1.0):
    """Qubits on a lattice along the cavity axis within ``+-rayleigh``."""
    if not 0 < fill <= 1:
        raise ValueError("fill must lie in (0, 1]")
    if spacing <= 0 or rayleigh <= 0 or rows < 1:
        raise ValueError("spacing, rayleigh and rows must be positive")
    per_row = math.floor(2 * rayleigh / spacing + 1e-9)
    return math.floor(per_row * rows * fill + 1e-9)
