import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import erf

from cavitynet.cavity import (
    BackscatterError, BranchingSpec, CavityAtomParams, PulseProfile, PulseShape,
    RECEIVER, SENDER, TransferConfig, TransferResult, _make_rhs, backscatter_error,
    best_cell, cooperativity, evolve_transfer, hamiltonian_at, landscape_rows,
    optimize_omega0, pulse_value, scan_landscape, with_pulse,
)
from cavitynet.errors import BoundarySolutionError
from cavitynet.integrate import integrate
from cavitynet.trajectories import ConstantCoupling
from cavitynet.units import mhz2pi

from conftest import ION

LOSSLESS = CavityAtomParams(g_A=mhz2pi(5.8), g_B=mhz2pi(5.8), kappa=0.0, gamma=0.0)


def _pulse_area(profile, which):
    tc, s, T = profile.center(which), profile.sigma, profile.duration
    r = s * math.sqrt(2.0)
    return profile.omega0 * s * math.sqrt(math.pi / 2) * (erf((T - tc) / r) + erf(tc / r))


# --- pulses -----------------------------------------------------------------

def test_pulse_peak_and_zero_amplitude():
    prof = PulseProfile(mhz2pi(18.0), 1e-6)
    for which in (SENDER, RECEIVER):
        assert pulse_value(prof, which, prof.center(which)) == pytest.approx(prof.omega0, rel=1e-15)
    zero = PulseProfile(0.0, 1e-6)
    assert pulse_value(zero, SENDER, 0.3e-6) == 0.0


def test_pulse_one_sigma_value():
    shape = PulseShape(pump_center_fraction=0.6, stokes_center_fraction=0.4, width_fraction=0.15)
    prof = PulseProfile(mhz2pi(18.0), 1e-6, shape)
    t = prof.center(SENDER) + prof.sigma
    assert pulse_value(prof, SENDER, t) / mhz2pi(1.0) == pytest.approx(10.92, abs=5e-3)


def test_counterintuitive_ordering_enforced():
    with pytest.raises(ValueError):
        PulseShape(pump_center_fraction=0.3, stokes_center_fraction=0.6)


def test_pulse_outside_window_rejected():
    prof = PulseProfile(1.0, 1e-6)
    with pytest.raises(ValueError):
        pulse_value(prof, SENDER, 1.5e-6)


# --- hamiltonian --------------------------------------------------------------

def test_hamiltonian_zero_when_everything_vanishes():
    p = CavityAtomParams(0.0, 0.0, 0.0, 0.0)
    H = hamiltonian_at(p, PulseProfile(0.0, 1e-6), ConstantCoupling(0.0), ConstantCoupling(0.0), 0.5e-6)
    assert not H.any()


def test_hamiltonian_hermitian_without_loss():
    prof = PulseProfile(mhz2pi(18.0), 1e-6)
    g = ConstantCoupling(LOSSLESS.g_A)
    for t in np.linspace(0, 1e-6, 7):
        H = hamiltonian_at(LOSSLESS, prof, g, g, t)
        assert np.array_equal(H, H.conj().T)


def test_fast_rhs_matches_matrix_form():
    cfg = TransferConfig(replace(ION, delta=mhz2pi(1.3)), PulseProfile(mhz2pi(18.0), 1e-6))
    rhs = _make_rhs(cfg)
    rng = np.random.default_rng(3)
    ta, tb = cfg.trajectories()
    for t in rng.uniform(0, 1e-6, 5):
        c = rng.normal(size=5) + 1j * rng.normal(size=5)
        y = np.concatenate([c, np.zeros(3)])
        H = hamiltonian_at(cfg.params, cfg.pulse, ta, tb, t)
        np.testing.assert_allclose(rhs(t, y)[:5], -1j * H @ c, rtol=1e-13, atol=1e-3)
        rates = rhs(t, y)[5:].real
        np.testing.assert_allclose(rates, [ION.kappa * abs(c[2]) ** 2, ION.gamma * abs(c[1]) ** 2,
                                           ION.gamma * abs(c[3]) ** 2], rtol=1e-13)


# --- analytic oracles -----------------------------------------------------------

def test_rabi_oracle_sender_only():
    # No cavity coupling and no loss: a two-level system driven by the sender pulse.
    p = CavityAtomParams(0.0, 0.0, 0.0, 0.0)
    for om in (mhz2pi(0.7), mhz2pi(2.0), mhz2pi(3.3)):
        prof = PulseProfile(om, 1e-6)
        cfg = TransferConfig(p, prof)
        res = evolve_transfer(cfg)
        area = _pulse_area(prof, SENDER)
        # All population stays in states 0 and 1; leftover is the whole norm.
        assert res.p_leftover == pytest.approx(1.0, abs=1e-9)
        # Recover |c_1|^2 by integrating the same problem with the matrix form.
        H = lambda t: hamiltonian_at(p, prof, ConstantCoupling(0.0), ConstantCoupling(0.0), t)
        y, _ = integrate(lambda t, c: -1j * (H(t) @ c), 0.0, 1e-6,
                         np.eye(5, dtype=complex)[0], max_step=5e-9)
        assert abs(y[1]) ** 2 == pytest.approx(math.sin(area / 2) ** 2, abs=1e-6)


def test_pure_decay_oracle():
    p = CavityAtomParams(0.0, 0.0, 0.0, mhz2pi(1.0))
    prof = PulseProfile(0.0, 1e-6)
    zero = ConstantCoupling(0.0)
    for idx, rate in ((1, p.gamma), (3, p.gamma)):
        y, _ = integrate(lambda t, c: -1j * (hamiltonian_at(p, prof, zero, zero, t) @ c),
                         0.0, 1e-6, np.eye(5, dtype=complex)[idx])
        assert abs(y[idx]) ** 2 == pytest.approx(math.exp(-rate * 1e-6), abs=1e-6)
    pk = CavityAtomParams(0.0, 0.0, mhz2pi(0.5), 0.0)
    y, _ = integrate(lambda t, c: -1j * (hamiltonian_at(pk, prof, zero, zero, t) @ c),
                     0.0, 1e-6, np.eye(5, dtype=complex)[2])
    assert abs(y[2]) ** 2 == pytest.approx(math.exp(-pk.kappa * 1e-6), abs=1e-6)


def test_hermitian_norm_and_adiabatic_limit():
    # 10 us of lossless evolution; tighter than default tolerances to hold the norm to 1e-9.
    cfg = TransferConfig(LOSSLESS, PulseProfile(mhz2pi(18.0), 10e-6), rtol=1e-9, atol=1e-11)
    res = evolve_transfer(cfg)
    assert abs(res.total - 1.0) <= 1e-9
    assert res.p_cavity_loss == res.p_scatter_A == res.p_scatter_B == 0.0
    assert res.p_success == pytest.approx(1.0, abs=0.02)


def test_adiabatic_plateau():
    ps = [evolve_transfer(TransferConfig(LOSSLESS, PulseProfile(mhz2pi(18.0), T))).p_success
          for T in (2e-6, 5e-6, 10e-6)]
    assert ps[-1] >= ps[0] - 1e-3
    assert abs(ps[-1] - ps[-2]) < 0.02


# --- transfer results -----------------------------------------------------------

def test_ion_operating_point(ion_cfg):
    res = evolve_transfer(ion_cfg)
    assert 0.30 <= res.p_success <= 0.50
    assert abs(res.conservation_defect) < 1e-6
    for v in (res.p_cavity_loss, res.p_scatter_A, res.p_scatter_B, res.p_leftover):
        assert 0.0 <= v <= 1.0


def test_zero_drive_stays_put(ion_cfg):
    res = evolve_transfer(with_pulse(ion_cfg, omega0=0.0))
    assert res.alpha == 0
    assert res.p_leftover == 1.0
    assert res.p_cavity_loss == res.p_scatter_A == res.p_scatter_B == 0.0


def test_more_cavity_loss_lowers_success(ion_cfg):
    ps = [evolve_transfer(replace(ion_cfg, params=replace(ION, kappa=mhz2pi(k)))).p_success
          for k in (0.1, 0.34, 1.0, 3.0)]
    assert all(a > b for a, b in zip(ps, ps[1:]))


@settings(max_examples=15, deadline=None)
@given(g=st.floats(0.5, 10), kappa=st.floats(0.0, 2.0), gamma=st.floats(0.0, 30.0),
       omega=st.floats(1.0, 40.0), T=st.floats(0.2e-6, 1.5e-6))
def test_ledger_sums_to_one(g, kappa, gamma, omega, T):
    p = CavityAtomParams(mhz2pi(g), mhz2pi(g), mhz2pi(kappa), mhz2pi(gamma))
    res = evolve_transfer(TransferConfig(p, PulseProfile(mhz2pi(omega), T)))
    assert abs(res.conservation_defect) <= 1e-6


def test_result_dict_roundtrip(ion_cfg):
    d = evolve_transfer(ion_cfg).to_dict()
    assert set(d) >= {"p_success", "p_cavity_loss", "p_scatter_a", "p_scatter_b", "p_leftover",
                      "conservation_defect", "alpha_real", "alpha_imag"}


# --- landscape and optimizer -----------------------------------------------------

def test_single_cell_landscape_matches_transfer(ion_cfg):
    cells = scan_landscape(ion_cfg, [ion_cfg.pulse.omega0], [ion_cfg.pulse.duration])
    assert len(cells) == 1
    assert cells[0].result == evolve_transfer(ion_cfg)


def test_landscape_is_deterministic_and_row_major(ion_cfg):
    om = [mhz2pi(10.0), mhz2pi(20.0)]
    du = [0.5e-6, 1e-6]
    a = landscape_rows(scan_landscape(ion_cfg, om, du))
    b = landscape_rows(scan_landscape(ion_cfg, om, du))
    assert a == b
    assert [r[:2] for r in a] == [(o, d) for o in om for d in du]


def test_best_cell_skips_failures(ion_cfg):
    cells = scan_landscape(ion_cfg, [mhz2pi(18.0)], [1e-6])
    assert best_cell(cells) is cells[0]
    assert best_cell([]) is None


def test_optimizer_synthetic_objective():
    om_m = 3.7
    res = optimize_omega0(None, 1e-6, (1.0, 6.0), objective=lambda x: 1 - (x - om_m) ** 2)
    assert res.omega0_star == pytest.approx(om_m, abs=1e-5)
    assert res.p_star == pytest.approx(1.0, abs=1e-9)


def test_optimizer_boundary_maximum_raises():
    with pytest.raises(BoundarySolutionError) as info:
        optimize_omega0(None, 1e-6, (1.0, 2.0), objective=lambda x: x)
    assert info.value.x_best == 2.0


def test_optimizer_ion_case(ion_cfg):
    res = optimize_omega0(ion_cfg, 1e-6, (mhz2pi(5.0), mhz2pi(40.0)))
    assert mhz2pi(10.0) <= res.omega0_star <= mhz2pi(30.0)
    assert abs(res.relative_slope) <= 1e-2


# --- cooperativity and backscatter -------------------------------------------------

def test_cooperativity_values():
    assert cooperativity(ION) == pytest.approx(3.96, abs=0.05)
    ryd = CavityAtomParams(mhz2pi(2.8), mhz2pi(2.8), mhz2pi(0.053), mhz2pi(6.0))
    assert cooperativity(ryd) == pytest.approx(24.7, abs=0.3)
    assert cooperativity(replace(ION, g_A=0.0)) == 0.0
    with pytest.raises(ZeroDivisionError):
        cooperativity(replace(ION, kappa=0.0))


def _fake(p_success, sa, sb):
    return TransferResult(complex(math.sqrt(p_success)), 0.0, sa, sb, 1 - p_success - sa - sb, 0)


def test_backscatter_trivial_cases():
    r = _fake(0.4, 0.3, 0.3)
    assert backscatter_error(r, BranchingSpec(0.0)).per_attempt == 0.0
    full = _fake(0.0, 0.0, 1.0)
    assert backscatter_error(full, BranchingSpec(0.01)).per_attempt == pytest.approx(0.01)
    both = backscatter_error(_fake(0.0, 0.5, 0.5), BranchingSpec(0.01, include_sender=True))
    assert both.per_attempt == pytest.approx(0.01)
    assert not both.per_pair_defined


def test_backscatter_ion_case(ion_cfg):
    b = backscatter_error(evolve_transfer(ion_cfg))
    assert 1e-4 <= b.per_attempt <= 1e-3
    assert isinstance(b, BackscatterError)
