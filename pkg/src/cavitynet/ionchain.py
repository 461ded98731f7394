"""Axial normal modes of a linear ion chain and thermal-motion infidelity.

Positions are in units of ``ell = (e^2 / (4 pi eps0 m_ref omega_com^2))^(1/3)``
where ``omega_com`` is the axial frequency of a single reference-mass ion.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import IntegrationError, NumericError
from .herald import full_protocol_sim
from .trajectories import StandingWaveCoupling
from .units import AMU, BOLTZMANN, ELEMENTARY_CHARGE, VACUUM_PERMITTIVITY

BARIUM_137 = 137 * AMU


@dataclass(frozen=True)
class ChainSpec:
    masses: tuple
    omega_com: float
    temperature: float
    comm_index: int
    cavity_wavelength: float
    g0: float
    reference_mass: float = None  # defaults to the communication ion's mass

    def __post_init__(self):
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))
        if len(self.masses) < 1:
            raise ValueError("chain needs at least one ion")
        if min(self.masses) <= 0:
            raise ValueError("masses must be positive")
        if self.omega_com <= 0:
            raise ValueError("omega_com must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")
        if not 0 <= self.comm_index < len(self.masses):
            raise ValueError("comm_index out of range")
        if self.cavity_wavelength <= 0:
            raise ValueError("cavity_wavelength must be positive")

    @classmethod
    def uniform(cls, n_ions, mass=BARIUM_137, *, comm_index=None, **kw):
        """Chain of ``n_ions`` identical ions, comm ion centered by default."""
        if comm_index is None:
            comm_index = n_ions // 2
        return cls(masses=(mass,) * n_ions, comm_index=comm_index, **kw)

    @property
    def n_ions(self):
        return len(self.masses)

    @property
    def m_ref(self):
        return self.reference_mass if self.reference_mass is not None \
            else self.masses[self.comm_index]


@dataclass(frozen=True)
class ModeDecomposition:
    u: np.ndarray
    ell: float
    freqs: np.ndarray
    vecs: np.ndarray  # vecs[i, p]: participation of ion i in mode p
    eigenvalues: np.ndarray

    def participation(self, ion):
        return self.vecs[ion, :]


def _force_residual(u):
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, np.inf)
    # Ion m is pushed by ions on the left (+) and right (-); u_m - sum sign/d^2.
    return u - np.sum(np.sign(d) / d ** 2, axis=1)


def _hessian(u):
    d = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(d, np.inf)
    A = -2.0 / d ** 3
    np.fill_diagonal(A, 0.0)
    np.fill_diagonal(A, 1.0 - A.sum(axis=1))
    return A


def equilibrium_positions(n, *, tol=1e-12, max_iter=200):
    """Dimensionless equilibrium positions of ``n`` identical-charge ions.

    Damped Newton iteration on the axial force balance; the Jacobian is the
    mode Hessian. Starts from a uniform spacing of ``2.018 n^-0.559``.
    """
    if n < 1:
        raise ValueError("need at least one ion")
    if n == 1:
        return np.zeros(1)
    spacing = 2.018 * n ** -0.559
    u = spacing * (np.arange(n) - (n - 1) / 2)
    r = _force_residual(u)
    for _ in range(max_iter):
        rn = np.max(np.abs(r))
        if rn <= tol:
            return u
        step = np.linalg.solve(_hessian(u), -r)
        lam = 1.0
        while lam > 1e-8:
            trial = u + lam * step
            if np.all(np.diff(trial) > 0):
                rt = _force_residual(trial)
                if np.max(np.abs(rt)) < rn:
                    break
            lam *= 0.5
        else:
            break
        u, r = trial, rt
    if np.max(np.abs(r)) <= tol:
        return u
    raise NumericError(f"equilibrium solver did not converge for n={n} "
                       f"(residual {np.max(np.abs(r)):.3g})")


def length_scale(m_ref, omega_com):
    return (ELEMENTARY_CHARGE ** 2
            / (4 * math.pi * VACUUM_PERMITTIVITY * m_ref * omega_com ** 2)) ** (1 / 3)


def normal_modes(spec):
    """Equilibrium, axial mode frequencies (ascending) and eigenvectors.

    For mixed masses the eigenproblem is ``M^-1/2 A M^-1/2`` with
    ``M = diag(m_i / m_ref)``; the eigenvectors are mass-weighted.
    """
    u = equilibrium_positions(spec.n_ions)
    A = _hessian(u)
    w = 1.0 / np.sqrt(np.asarray(spec.masses) / spec.m_ref)
    K = A * w[:, None] * w[None, :]
    try:
        mu, vecs = np.linalg.eigh(K)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed: {exc}") from exc
    # Fix the sign convention: largest-magnitude component positive.
    for p in range(vecs.shape[1]):
        j = np.argmax(np.abs(vecs[:, p]))
        if vecs[j, p] < 0:
            vecs[:, p] = -vecs[:, p]
    freqs = spec.omega_com * np.sqrt(mu)
    return ModeDecomposition(u=u, ell=length_scale(spec.m_ref, spec.omega_com),
                             freqs=freqs, vecs=vecs, eigenvalues=mu)


def com_spread(spec):
    """RMS center-of-mass displacement ``sqrt(kB T / (M_total omega_com^2))``."""
    return math.sqrt(BOLTZMANN * spec.temperature / (sum(spec.masses) * spec.omega_com ** 2))


@dataclass(frozen=True)
class ThermalSample:
    """Classical thermal motion of the lowest modes.

    Mode ``p`` moves as ``q_p cos(w_p t + phi_p)`` with ``q`` in meters
    (mass-weighted). The communication ion's displacement is
    ``scale * sum_p b_p q_p cos(w_p t + phi_p)``.
    """

    q: np.ndarray
    phases: np.ndarray
    omegas: np.ndarray
    participation: np.ndarray
    scale: float = 1.0

    @property
    def amplitudes(self):
        return self.scale * self.participation * self.q

    def displacement(self, t):
        return float(np.dot(self.amplitudes, np.cos(self.omegas * t + self.phases)))


def sample_thermal(spec, n_modes, rng, modes=None):
    """Boltzmann draw of position and velocity for the ``n_modes`` lowest modes.

    Position and velocity/omega are independent normals of variance
    ``kB T / (m_ref w^2)``, so the amplitude is Rayleigh distributed with
    ``<q^2> = 2 kB T / (m_ref w^2)`` and the time-averaged ``<x_p^2>``
    obeys equipartition.
    """
    if not 1 <= n_modes <= spec.n_ions:
        raise ValueError("n_modes must lie in [1, n_ions]")
    modes = modes if modes is not None else normal_modes(spec)
    omegas = modes.freqs[:n_modes]
    sd = np.sqrt(BOLTZMANN * spec.temperature / (spec.m_ref * omegas ** 2))
    x0 = rng.normal(size=n_modes) * sd
    v0 = rng.normal(size=n_modes) * sd  # velocity / omega
    # x0 cos(wt) + v0 sin(wt) = q cos(wt + phi)
    q = np.hypot(x0, v0)
    phases = np.arctan2(-v0, x0)
    b = modes.vecs[spec.comm_index, :n_modes]
    scale = math.sqrt(spec.m_ref / spec.masses[spec.comm_index])
    return ThermalSample(q=q, phases=phases, omegas=omegas, participation=b, scale=scale)


def thermal_trajectory(spec, n_modes, rng, modes=None):
    """Coupling trajectory of the communication ion for one thermal draw.

    The ion's equilibrium position is taken to be a cavity antinode.
    """
    s = sample_thermal(spec, n_modes, rng, modes)
    return StandingWaveCoupling(spec.g0, spec.cavity_wavelength,
                                tuple(s.amplitudes), tuple(s.omegas), tuple(s.phases))


@dataclass(frozen=True)
class ThermalMCResult:
    """Thermal Monte Carlo summary.

    ``mean_infidelity`` averages over heralded pairs: each sample is weighted
    by its herald probability. ``mean_infidelity_unweighted`` gives every
    thermal draw equal weight.
    """

    mean_infidelity: float
    std_error: float
    mean_p_herald: float
    n_samples: int
    n_failed: int
    seed: int
    n_modes: int
    interpulse_gap: float
    mean_infidelity_unweighted: float = math.nan
    std_error_unweighted: float = math.nan
    infidelities: tuple = field(default=(), repr=False)
    p_heralds: tuple = field(default=(), repr=False)

    def to_dict(self):
        return {
            "mean_infidelity": self.mean_infidelity,
            "std_error": self.std_error,
            "mean_infidelity_unweighted": self.mean_infidelity_unweighted,
            "std_error_unweighted": self.std_error_unweighted,
            "mean_p_herald": self.mean_p_herald,
            "n_samples": self.n_samples,
            "n_failed": self.n_failed,
            "seed": self.seed,
            "n_modes": self.n_modes,
            "interpulse_gap_s": self.interpulse_gap,
        }


def sample_rng(seed, index):
    """Independent generator for sample ``index``; schedule-invariant."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _mc_sample(args):
    spec, modes, cfg, gap, n_modes, seed, index, independent = args
    rng = sample_rng(seed, index)
    traj_a = thermal_trajectory(spec, n_modes, rng, modes)
    traj_b = thermal_trajectory(spec, n_modes, rng, modes) if independent else traj_a
    try:
        out, _ = full_protocol_sim(replace(cfg, traj_A=traj_a, traj_B=traj_b),
                                   interpulse_gap=gap)
    except (IntegrationError, NumericError):
        return None
    return out.infidelity if out.heralded else math.nan, out.p_herald


def thermal_infidelity_mc(spec, cfg, *, interpulse_gap, n_modes=5, n_samples=1000,
                          seed, independent_nodes=True, workers=None):
    """Monte Carlo estimate of the Bell infidelity caused by thermal motion.

    By default sender and receiver communication ions each get an
    independent thermal draw of the same chain; ``independent_nodes=False``
    drives both with one shared draw. Each sample runs the full two-transfer
    protocol. The headline mean is over heralded pairs, i.e. per-sample
    infidelities weighted by herald probability; the unweighted mean is
    reported alongside. Samples whose integration fails are skipped and
    counted.

    Parameters
    ----------
    spec : ChainSpec
    cfg : TransferConfig
        Cavity parameters and pulse; its trajectories are replaced.
    interpulse_gap : float
        Start-to-start separation of the two transfers (s).
    seed : int
        Required. Sample ``i`` uses the substream ``(seed, i)``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    modes = normal_modes(spec)
    jobs = [(spec, modes, cfg, interpulse_gap, n_modes, seed, i, independent_nodes)
            for i in range(n_samples)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_mc_sample, jobs, chunksize=16))
    else:
        results = [_mc_sample(j) for j in jobs]

    good = [r for r in results if r is not None and not math.isnan(r[0])]
    n_failed = n_samples - len(good)
    if not good:
        return ThermalMCResult(math.nan, math.nan, math.nan, n_samples, n_failed, seed,
                               n_modes, interpulse_gap)
    inf = np.array([r[0] for r in good])
    ph = np.array([r[1] for r in good])
    n = len(inf)
    w_mean = float(np.sum(ph * inf) / np.sum(ph))
    # Delta-method standard error of a ratio estimator.
    w_se = float(math.sqrt(np.sum(ph ** 2 * (inf - w_mean) ** 2)) / np.sum(ph)) if n > 1 else math.nan
    se = float(inf.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
    return ThermalMCResult(w_mean, w_se, float(ph.mean()), n_samples, n_failed, seed, n_modes,
                           interpulse_gap, float(inf.mean()), se, tuple(inf.tolist()),
                           tuple(ph.tolist()))
