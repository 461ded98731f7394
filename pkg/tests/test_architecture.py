import itertools
import math

import pytest
from hypothesis import given, strategies as st

from cavitynet.architecture import (
    ArchitectureParams, CavityGeometry, RATE_HEADER, RateModels, ScalingQuery, TimingBudget,
    derived_cavity, distribution_time, ion_capacity, nonlocal_time_scaling, photonic_time,
    rate_curves, rydberg_capacity, serial_budget, shuttling_time, sk1_duration,
    storage_error, storage_limited_qubits, swap_gate_error,
)

C_LIGHT = 299_792_458.0
TWO_PI = 2 * math.pi


def test_sk1_duration():
    assert sk1_duration(TWO_PI * 3e6) == pytest.approx(0.8333e-6, rel=1e-4)
    assert sk1_duration(TWO_PI * 1e6) == pytest.approx(2.5e-6, rel=1e-12)
    with pytest.raises(ValueError):
        sk1_duration(0.0)


def test_serial_budget():
    assert serial_budget(TimingBudget()) == pytest.approx(5.333e-6, rel=1e-3)
    assert serial_budget(TimingBudget(n_rotations=0)) == pytest.approx(2e-6)
    assert serial_budget(TimingBudget(transfer_time=2e-6)) == pytest.approx(7.333e-6, rel=1e-3)


def test_distribution_time_examples():
    p = ArchitectureParams(5.3e-6, 28e-6, 0.40)
    assert distribution_time(p, 20) == pytest.approx(202.5e-6, rel=1e-12)
    assert distribution_time(p, 0) == pytest.approx(70e-6, rel=1e-12)
    assert distribution_time(ArchitectureParams(5.3e-6, 0.0, 1.0), 8) == pytest.approx(4 * 5.3e-6)
    with pytest.raises(ValueError):
        distribution_time(p, 3)


def test_distribution_time_monotonicity():
    grid = itertools.product([2, 10, 20], [1e-6, 5.3e-6], [0.2, 0.4, 0.9])
    for M, ts, ps in grid:
        base = distribution_time(ArchitectureParams(ts, 28e-6, ps), M)
        assert distribution_time(ArchitectureParams(ts, 28e-6, ps), M + 2) > base
        assert distribution_time(ArchitectureParams(ts * 1.1, 28e-6, ps), M) > base
        assert distribution_time(ArchitectureParams(ts, 28e-6, min(1.0, ps * 1.1)), M) < base


def test_photonic_time():
    assert photonic_time(5e-3, variant="bare") == 5e-3
    want = 10e-3 + 2 * 5e-3 / 10 ** (-2.6 / 10)
    assert photonic_time(5e-3) == pytest.approx(want, rel=1e-12)
    assert photonic_time(5e-3) == pytest.approx(28.2e-3, abs=0.05e-3)
    assert photonic_time(5e-3, 1.0, 0.0, 2, 0.0) == pytest.approx(5e-3)
    with pytest.raises(ValueError):
        photonic_time(5e-3, variant="other")


def test_shuttling_time():
    assert shuttling_time(1e-3, 10) == pytest.approx(10e-3)
    assert shuttling_time(1e-3, 0) == 0.0


def test_rate_curves_table():
    rows = rate_curves(RateModels(), range(2, 42, 2))
    assert len(rows[0]) == len(RATE_HEADER)
    row20 = next(r for r in rows if r[0] == 20)
    assert row20[1] == 500
    assert row20[2] == pytest.approx(202.5e-6, rel=1e-12)
    assert not row20[-1] and next(r for r in rows if r[0] == 22)[-1]
    with pytest.raises(ValueError):
        rate_curves(RateModels(), [])


def test_swap_gate_error():
    assert swap_gate_error(1, 1e-3) == pytest.approx(1e-3)
    assert swap_gate_error(5, 1e-3) == pytest.approx(1.3e-2)
    assert swap_gate_error(10_000, 0.1) == 1.0


@given(st.integers(1, 500), st.floats(1e-6, 1e-2))
def test_swap_versus_teleported_crossover(d, eps):
    teleported = 2 * eps
    assert (swap_gate_error(d, eps) >= teleported) == (d >= 2)


def test_storage_error():
    assert storage_error(ScalingQuery(100)) == pytest.approx(3.85e-5, rel=1e-3)
    assert storage_error(ScalingQuery(100, gate_time=0.0)) == 0.0
    assert storage_limited_qubits(2e-3, 10e-6, 26.0) == pytest.approx(5200.0)


@pytest.mark.parametrize("n", [16, 100, 1024, 10_000])
def test_nonlocal_regimes(n):
    baseline = nonlocal_time_scaling(ScalingQuery(n, math.inf, 1))
    assert baseline == n
    assert nonlocal_time_scaling(ScalingQuery(n, 1, n)) == baseline
    assert nonlocal_time_scaling(ScalingQuery(n, 2, math.sqrt(n))) == pytest.approx(baseline, rel=1e-15)
    assert nonlocal_time_scaling(ScalingQuery(n, 2, n)) == pytest.approx(math.sqrt(n), rel=1e-12)


def test_derived_cavity_examples():
    ryd = derived_cavity(CavityGeometry(0.02, 1.4e5, 10e-6, 780e-9))
    assert ryd.kappa / TWO_PI == pytest.approx(53.5e3, abs=1e3)
    assert ryd.ringdown == pytest.approx(2.97e-6, abs=0.05e-6)
    assert ryd.rayleigh == pytest.approx(402.7e-6, abs=0.5e-6)
    ion = derived_cavity(CavityGeometry(2.8e-3, 1.575e5, 13e-6, 455e-9))
    assert ion.rayleigh == pytest.approx(1167e-6, abs=1e-6)
    assert ion.kappa / TWO_PI == pytest.approx(340e3, rel=1e-3)


@given(st.floats(1e-3, 0.1), st.floats(1e3, 1e6), st.floats(1e-6, 1e-4), st.floats(3e-7, 2e-6))
def test_derived_cavity_double_entry(L, F, w, lam):
    d = derived_cavity(CavityGeometry(L, F, w, lam))
    assert d.ringdown * d.kappa == pytest.approx(1.0, rel=1e-15)
    assert d.kappa == pytest.approx(TWO_PI * C_LIGHT / (2 * L) / F, rel=1e-12)
    d2 = derived_cavity(CavityGeometry(L, F, 2 * w, lam))
    assert d2.rayleigh == pytest.approx(4 * d.rayleigh, rel=1e-12)


def test_ion_capacity():
    c = ion_capacity(88e-6, 30e-6, 1170e-6, 20)
    assert c.total_extent == pytest.approx(2330e-6, rel=1e-12)
    assert c.fits and c.n_qubits == 500
    assert ion_capacity(88e-6, 30e-6, 1170e-6, 1).total_extent == pytest.approx(88e-6)
    c21 = ion_capacity(88e-6, 30e-6, 1170e-6, 21)
    assert c21.total_extent == pytest.approx(2448e-6) and not c21.fits


def test_rydberg_capacity():
    assert rydberg_capacity(2.6e-6, 403e-6, 1, 0.25) == pytest.approx(75, rel=0.1)
    assert rydberg_capacity(2.6e-6, 403e-6, 3, 1.0) == pytest.approx(900, rel=0.1)
    assert rydberg_capacity(2.6e-6, 403e-6, 1, 1.0) == pytest.approx(300, rel=0.1)
    assert rydberg_capacity(2.6e-6, 403e-6, 1, 1.0) == 310
    with pytest.raises(ValueError):
        rydberg_capacity(2.6e-6, 403e-6, 1, 0.0)


def test_parameter_validation():
    with pytest.raises(ValueError):
        ArchitectureParams(p_success=0.0)
    with pytest.raises(ValueError):
        CavityGeometry(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        nonlocal_time_scaling(ScalingQuery(10, 0.5))
