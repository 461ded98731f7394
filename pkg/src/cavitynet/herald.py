"""Symmetrized heralded Bell-pair protocol built from two photon transfers.

The sender starts in an equal superposition of its two operation states.
The first transfer moves the ``|r1>`` branch (after the interleaved swaps)
and the second the ``|r0>`` branch, so both Bell components carry one
transfer amplitude each. Heralding on the receiver leaving its ground
states discards every loss branch.
"""

import math
from dataclasses import dataclass, replace

from .cavity import evolve_transfer

_SQRT_HALF = math.sqrt(0.5)


@dataclass(frozen=True)
class ProtocolState:
    amp_00: complex
    amp_11: complex
    loss_weight: float


@dataclass(frozen=True)
class BellOutcome:
    p_herald: float
    fidelity: float  # NaN when nothing is heralded
    relative_phase: float

    @property
    def heralded(self):
        return self.p_herald > 0

    @property
    def infidelity(self):
        return 1.0 - self.fidelity

    def to_dict(self):
        return {"p_herald": self.p_herald, "fidelity": self.fidelity,
                "relative_phase": self.relative_phase}


@dataclass(frozen=True)
class ErrorBudget:
    eps_local: float = 0.0
    eps_M: float = 0.0
    eps_bell: float = 0.0

    def __post_init__(self):
        for name in ("eps_local", "eps_M", "eps_bell"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


def protocol_state(alpha_first, alpha_second, interpulse_phase=0.0):
    """Unnormalized two-component state after both transfers.

    The component moved first picks up ``interpulse_phase``.
    """
    amp_11 = complex(math.cos(interpulse_phase), math.sin(interpulse_phase)) \
        * complex(alpha_first) * _SQRT_HALF
    amp_00 = complex(alpha_second) * _SQRT_HALF
    loss = 1.0 - abs(amp_00) ** 2 - abs(amp_11) ** 2
    return ProtocolState(amp_00, amp_11, loss)


def outcome(state):
    n = abs(state.amp_00) ** 2 + abs(state.amp_11) ** 2
    if n == 0:
        return BellOutcome(0.0, math.nan, math.nan)
    # Clamped: |a+b|^2 <= 2(|a|^2+|b|^2) can exceed by one ulp.
    fidelity = min(1.0, abs(state.amp_00 + state.amp_11) ** 2 / (2 * n))
    phase = math.remainder(math.atan2(state.amp_11.imag, state.amp_11.real)
                           - math.atan2(state.amp_00.imag, state.amp_00.real), 2 * math.pi)
    return BellOutcome(n, fidelity, phase)


def run_protocol(transfer1, transfer2, interpulse_phase=0.0):
    """Herald probability and heralded fidelity to ``(|00> + |11>)/sqrt(2)``.

    ``transfer1``/``transfer2`` are anything with an ``alpha`` attribute
    (normally :class:`~cavitynet.cavity.TransferResult`).
    """
    return outcome(protocol_state(transfer1.alpha, transfer2.alpha, interpulse_phase))


def mismatch_infidelity(alpha_mag, epsilon):
    """Infidelity for component magnitudes ``a`` and ``a + epsilon``.

    Leading order ``epsilon**2 / (4 a**2)``.
    """
    a = alpha_mag
    if not a > 0:
        raise ValueError("alpha_mag must be positive")
    if not abs(epsilon) < a:
        raise ValueError("|epsilon| must be smaller than alpha_mag")
    return epsilon ** 2 / (2 * (a ** 2 + (a + epsilon) ** 2))


def full_protocol_sim(cfg, *, interpulse_gap, swap_error=0.0, interpulse_phase=0.0):
    """Run both transfers against the same coupling trajectories.

    The first window starts at ``cfg.t_offset`` and the second one
    ``interpulse_gap`` later (start to start), so time-dependent couplings
    are sampled where each pulse actually happens. Swaps are instantaneous;
    ``swap_error`` scales the fidelity by ``1 - swap_error``.

    Returns
    -------
    BellOutcome, (TransferResult, TransferResult)
    """
    if not 0.0 <= swap_error <= 1.0:
        raise ValueError("swap_error must lie in [0, 1]")
    if interpulse_gap < cfg.pulse.duration:
        raise ValueError("interpulse_gap is start-to-start and must be at least the pulse duration")
    first = evolve_transfer(cfg)
    second = evolve_transfer(replace(cfg, t_offset=cfg.t_offset + interpulse_gap))
    out = run_protocol(first, second, interpulse_phase)
    if swap_error:
        out = replace(out, fidelity=out.fidelity * (1.0 - swap_error))
    return out, (first, second)


def teleported_cnot_error(budget):
    """Teleported-CNOT error: two local gates, two readouts, one Bell pair."""
    return 2 * budget.eps_local + 2 * budget.eps_M + budget.eps_bell
