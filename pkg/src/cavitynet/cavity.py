"""Single-excitation STIRAP photon transfer through a lossy cavity mode.

Two three-level atoms A (sender) and B (receiver) share one cavity mode. The
excitation lives in a five-state manifold, indexed 0..4:

    0  |r>_A |g>_B |0>     sender operation state
    1  |e>_A |g>_B |0>     sender excited state      (decays at gamma)
    2  |g>_A |g>_B |1>     one cavity photon         (decays at kappa)
    3  |g>_A |e>_B |0>     receiver excited state    (decays at gamma)
    4  |g>_A |r>_B |0>     receiver operation state  (target)

Every decay leaves the manifold for good, so the dynamics is a pure-state
non-Hermitian evolution plus a ledger of where the lost probability went.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import BoundarySolutionError, IntegrationError, NumericError
from .integrate import integrate
from .trajectories import ConstantCoupling

N_STATES = 5
SENDER = "sender"
RECEIVER = "receiver"

# Norm may only grow by round-off between accepted steps.
_NORM_SLACK = 1e-10


@dataclass(frozen=True)
class CavityAtomParams:
    """Rates in rad/s. ``delta`` is the common one-photon detuning."""

    g_A: float
    g_B: float
    kappa: float
    gamma: float
    delta: float = 0.0

    def __post_init__(self):
        for name in ("g_A", "g_B", "kappa", "gamma", "delta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        for name in ("g_A", "g_B", "kappa", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def g(self):
        """Nominal coupling: geometric mean of the two atoms' couplings."""
        return math.sqrt(self.g_A * self.g_B)


@dataclass(frozen=True)
class PulseShape:
    """Gaussian pulse centers and width as fractions of the window.

    The receiver (Stokes) pulse peaks before the sender (pump) pulse.
    """

    pump_center_fraction: float = 0.65
    stokes_center_fraction: float = 0.35
    width_fraction: float = 0.20

    def __post_init__(self):
        for name in ("pump_center_fraction", "stokes_center_fraction", "width_fraction"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        if not self.stokes_center_fraction < self.pump_center_fraction:
            raise ValueError("stokes (receiver) pulse must peak before the pump (sender) pulse")


@dataclass(frozen=True)
class PulseProfile:
    omega0: float
    duration: float
    shape: PulseShape = field(default_factory=PulseShape)

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and self.omega0 >= 0):
            raise ValueError("omega0 must be finite and non-negative")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError("duration must be positive")

    def center(self, which):
        if which == SENDER:
            return self.shape.pump_center_fraction * self.duration
        if which == RECEIVER:
            return self.shape.stokes_center_fraction * self.duration
        raise ValueError(f"which must be {SENDER!r} or {RECEIVER!r}")

    @property
    def sigma(self):
        return self.shape.width_fraction * self.duration


def pulse_value(profile, which, t):
    """Rabi frequency (rad/s) of the sender or receiver pulse at time ``t``."""
    if not 0.0 <= t <= profile.duration:
        raise ValueError(f"t={t} outside the pulse window [0, {profile.duration}]")
    x = (t - profile.center(which)) / profile.sigma
    return profile.omega0 * math.exp(-0.5 * x * x)


@dataclass(frozen=True)
class BranchingSpec:
    """Probability that one scattering event lands back in an operation state.

    Only scattering at the receiver can fake a herald: a sender that decays
    back into its operation state leaves the receiver in a ground state,
    which the herald already reports as failure. ``include_sender`` adds the
    sender's scattering anyway, as a pessimistic bound.
    """

    p_backscatter_branch: float = 0.029 * 3 / 25
    include_sender: bool = False

    def __post_init__(self):
        if not 0.0 <= self.p_backscatter_branch <= 1.0:
            raise ValueError("p_backscatter_branch must lie in [0, 1]")


@dataclass(frozen=True)
class TransferConfig:
    """Everything one transfer simulation needs.

    ``traj_A``/``traj_B`` default to constant couplings ``params.g_A``/``g_B``.
    Trajectories are sampled at ``t_offset + t`` for window time ``t``.
    """

    params: CavityAtomParams
    pulse: PulseProfile
    traj_A: object = None
    traj_B: object = None
    t_offset: float = 0.0
    rtol: float = 1e-8
    atol: float = 1e-10
    max_step_fraction: float = 1 / 200

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0 or self.max_step_fraction <= 0:
            raise ValueError("integrator tolerances must be positive")

    def trajectories(self):
        ta = self.traj_A if self.traj_A is not None else ConstantCoupling(self.params.g_A)
        tb = self.traj_B if self.traj_B is not None else ConstantCoupling(self.params.g_B)
        return ta, tb


@dataclass(frozen=True)
class TransferResult:
    alpha: complex
    p_cavity_loss: float
    p_scatter_A: float
    p_scatter_B: float
    p_leftover: float
    n_steps: int = 0

    @property
    def p_success(self):
        return abs(self.alpha) ** 2

    @property
    def total(self):
        return (self.p_success + self.p_cavity_loss + self.p_scatter_A
                + self.p_scatter_B + self.p_leftover)

    @property
    def conservation_defect(self):
        return self.total - 1.0

    def to_dict(self):
        return {
            "alpha_real": self.alpha.real,
            "alpha_imag": self.alpha.imag,
            "p_success": self.p_success,
            "p_cavity_loss": self.p_cavity_loss,
            "p_scatter_a": self.p_scatter_A,
            "p_scatter_b": self.p_scatter_B,
            "p_leftover": self.p_leftover,
            "conservation_defect": self.conservation_defect,
            "n_steps": self.n_steps,
        }


def hamiltonian_at(params, profile, traj_A, traj_B, t):
    """Effective non-Hermitian Hamiltonian (rad/s) at window time ``t``.

    Trajectories are called with ``t`` directly; callers apply any offset.
    """
    oa = pulse_value(profile, SENDER, t)
    ob = pulse_value(profile, RECEIVER, t)
    ga = traj_A(t)
    gb = traj_B(t)
    H = np.zeros((N_STATES, N_STATES), dtype=complex)
    H[0, 1] = H[1, 0] = oa / 2
    H[1, 2] = H[2, 1] = ga
    H[2, 3] = H[3, 2] = gb
    H[3, 4] = H[4, 3] = ob / 2
    H[1, 1] = params.delta - 0.5j * params.gamma
    H[3, 3] = params.delta - 0.5j * params.gamma
    H[2, 2] = -0.5j * params.kappa
    return H


def _make_rhs(cfg):
    """Right-hand side on the 8-vector (c0..c4, P_cav, P_scatA, P_scatB)."""
    p = cfg.params
    prof = cfg.pulse
    ta, tb = cfg.trajectories()
    t0 = cfg.t_offset
    om2 = prof.omega0 / 2
    tc_a = prof.center(SENDER)
    tc_b = prof.center(RECEIVER)
    inv_s2 = 1.0 / (2 * prof.sigma ** 2)
    d2 = p.delta - 0.5j * p.gamma
    k2 = -0.5j * p.kappa
    kappa, gamma = p.kappa, p.gamma
    exp = math.exp
    array = np.array

    def rhs(t, y):
        c0, c1, c2, c3, c4 = y[:5].tolist()
        oa = om2 * exp(-(t - tc_a) ** 2 * inv_s2)
        ob = om2 * exp(-(t - tc_b) ** 2 * inv_s2)
        ga = ta(t0 + t)
        gb = tb(t0 + t)
        return array((
            -1j * (oa * c1),
            -1j * (oa * c0 + d2 * c1 + ga * c2),
            -1j * (ga * c1 + k2 * c2 + gb * c3),
            -1j * (gb * c2 + d2 * c3 + ob * c4),
            -1j * (ob * c3),
            kappa * (c2.real ** 2 + c2.imag ** 2),
            gamma * (c1.real ** 2 + c1.imag ** 2),
            gamma * (c3.real ** 2 + c3.imag ** 2),
        ), dtype=complex)

    return rhs


def evolve_transfer(cfg):
    """Integrate one transfer from ``|r>_A`` over the pulse window.

    Returns
    -------
    TransferResult
        Final amplitude on the receiver operation state and the loss ledger.

    Raises
    ------
    IntegrationError
        Adaptive step control underflowed.
    NumericError
        NaN in the state, or the norm grew between accepted steps.
    """
    T = cfg.pulse.duration
    y0 = np.zeros(8, dtype=complex)
    y0[0] = 1.0
    check_norm = cfg.params.kappa >= 0 and cfg.params.gamma >= 0
    last_norm = [1.0]

    def on_step(t, y):
        c = y[:N_STATES]
        norm = float(np.vdot(c, c).real)
        if not math.isfinite(norm):
            raise NumericError(f"NaN in transfer state at t={t:.6g}")
        if check_norm and norm > last_norm[0] + _NORM_SLACK:
            raise NumericError(
                f"norm increased from {last_norm[0]:.12g} to {norm:.12g} at t={t:.6g}")
        last_norm[0] = norm

    y, stats = integrate(_make_rhs(cfg), 0.0, T, y0, rtol=cfg.rtol, atol=cfg.atol,
                         max_step=cfg.max_step_fraction * T, on_step=on_step)
    c = y[:N_STATES]
    return TransferResult(
        alpha=complex(c[4]),
        p_cavity_loss=float(y[5].real),
        p_scatter_A=float(y[6].real),
        p_scatter_B=float(y[7].real),
        p_leftover=float(np.sum(np.abs(c[:4]) ** 2)),
        n_steps=stats.n_accepted,
    )


def with_pulse(cfg, *, omega0=None, duration=None):
    """Copy of ``cfg`` with a different peak Rabi frequency and/or duration."""
    pulse = cfg.pulse
    pulse = replace(pulse,
                    omega0=pulse.omega0 if omega0 is None else omega0,
                    duration=pulse.duration if duration is None else duration)
    return replace(cfg, pulse=pulse)


@dataclass(frozen=True)
class LandscapeCell:
    omega0: float
    duration: float
    result: TransferResult = None
    error: str = None

    @property
    def ok(self):
        return self.result is not None


def _landscape_cell(cfg):
    try:
        return LandscapeCell(cfg.pulse.omega0, cfg.pulse.duration, evolve_transfer(cfg))
    except (IntegrationError, NumericError) as exc:
        return LandscapeCell(cfg.pulse.omega0, cfg.pulse.duration, None, str(exc))


def scan_landscape(cfg, omega0_grid, duration_grid, *, workers=None):
    """Evaluate the transfer on every (omega0, duration) pair.

    Rows are ordered with ``omega0`` as the outer index. Failed cells carry
    an error message instead of a result.
    """
    omega0_grid = [float(x) for x in omega0_grid]
    duration_grid = [float(x) for x in duration_grid]
    if not omega0_grid or not duration_grid:
        raise ValueError("grids must be non-empty")
    if min(omega0_grid) <= 0 or min(duration_grid) <= 0:
        raise ValueError("grid values must be positive")
    cfgs = [with_pulse(cfg, omega0=om, duration=d) for om in omega0_grid for d in duration_grid]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_landscape_cell, cfgs))
    return [_landscape_cell(c) for c in cfgs]


LANDSCAPE_HEADER = ("omega0_rad_s", "duration_s", "p_success", "p_cavity",
                    "p_scatter_a", "p_scatter_b", "p_leftover")


def landscape_rows(cells):
    """CSV-ready rows (failed cells get NaN probabilities)."""
    rows = []
    for cell in cells:
        if cell.ok:
            r = cell.result
            rows.append((cell.omega0, cell.duration, r.p_success, r.p_cavity_loss,
                         r.p_scatter_A, r.p_scatter_B, r.p_leftover))
        else:
            rows.append((cell.omega0, cell.duration) + (math.nan,) * 5)
    return rows


def best_cell(cells):
    ok = [c for c in cells if c.ok]
    if not ok:
        return None
    return max(ok, key=lambda c: c.result.p_success)


@dataclass(frozen=True)
class OptimizationResult:
    omega0_star: float
    p_star: float
    relative_slope: float
    n_evaluations: int


def relative_amplitude_slope(objective, omega0, rel_step=1e-3):
    """``(omega0/|alpha|) d|alpha|/d omega0`` by central difference.

    ``objective`` maps omega0 to the success probability ``|alpha|**2``.
    """
    h = rel_step * omega0
    a_plus = math.sqrt(objective(omega0 + h))
    a_minus = math.sqrt(objective(omega0 - h))
    a0 = math.sqrt(objective(omega0))
    if a0 == 0:
        return math.nan
    return (a_plus - a_minus) / (2 * h) * omega0 / a0


def optimize_omega0(cfg, duration, bracket, *, objective=None, n_coarse=16, xtol=1e-7):
    """Peak Rabi frequency maximizing the success probability at fixed duration.

    A coarse linear scan over ``bracket`` locates the best cell; a golden
    section search then refines within its two neighbours.

    Parameters
    ----------
    cfg : TransferConfig
        Base configuration; its pulse duration is replaced by ``duration``.
    bracket : (float, float)
        Search interval for omega0 (rad/s).
    objective : callable, optional
        ``omega0 -> p_success``. Replaces the simulator (test seam).

    Raises
    ------
    BoundarySolutionError
        The coarse maximum sits on a bracket endpoint.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not 0 < lo < hi:
        raise ValueError("bracket must be positive and ordered")
    if objective is None:
        base = with_pulse(cfg, duration=duration)

        def objective(om):
            return evolve_transfer(with_pulse(base, omega0=om)).p_success

    n_eval = [0]

    def f(om):
        n_eval[0] += 1
        return objective(om)

    grid = np.linspace(lo, hi, n_coarse)
    values = [f(x) for x in grid]
    i = int(np.argmax(values))
    if i == 0 or i == n_coarse - 1:
        raise BoundarySolutionError(
            f"maximum on bracket boundary at omega0={grid[i]:.6g}",
            x_best=float(grid[i]), f_best=float(values[i]))

    res = minimize_scalar(lambda x: -f(x), bracket=(grid[i - 1], grid[i], grid[i + 1]),
                          method="golden", tol=xtol)
    x_star = float(res.x)
    p_star = -float(res.fun)
    slope = relative_amplitude_slope(objective, x_star)
    return OptimizationResult(x_star, p_star, slope, n_eval[0])


def cooperativity(params):
    """``g**2 / (kappa * gamma)`` with the nominal (geometric-mean) coupling."""
    if params.kappa <= 0 or params.gamma <= 0:
        raise ZeroDivisionError("cooperativity needs kappa > 0 and gamma > 0")
    return params.g_A * params.g_B / (params.kappa * params.gamma)


@dataclass(frozen=True)
class BackscatterError:
    per_attempt: float
    per_pair: float  # NaN when the transfer never succeeds

    @property
    def per_pair_defined(self):
        return not math.isnan(self.per_pair)


def backscatter_error(result, branching=BranchingSpec()):
    """False-herald probability from scattering back into operation states."""
    scattered = result.p_scatter_B
    if branching.include_sender:
        scattered += result.p_scatter_A
    per_attempt = branching.p_backscatter_branch * scattered
    p = result.p_success
    per_pair = per_attempt / p if p > 0 else math.nan
    return BackscatterError(per_attempt, per_pair)
