"""Transmon and line-mode quantization."""

import math

import numpy as np
import pytest
from scipy import constants

from lumpedq.errors import TruncationNotConverged, ValidationError
from lumpedq.loadedline import LoadedLineSpec, solve_modes
from lumpedq.subsystems import (
    QuantizedSubsystem,
    TransmonSpec,
    diagonalize_transmon,
    quantize_line,
    scale_operators,
)

E = constants.e
H = constants.h


def transmon_from_ratio(ratio, ec_hz=298e6, **kwargs):
    ec = ec_hz * H
    return TransmonSpec(c_eff=E**2 / (2 * ec), ej=ratio * ec, **kwargs)


class TestTransmon:
    def test_ec_from_capacitance(self):
        spec = transmon_from_ratio(50.0)
        assert spec.e_c / H == pytest.approx(298e6, rel=1e-12)
        assert spec.c_eff == pytest.approx(6.5e-14, rel=1e-2)

    def test_asymptotic_frequency_and_anharmonicity(self):
        """At E_J/E_C = 50: f01 within 2% of sqrt(8 EJ EC) - EC; alpha sits
        at -1.1492230 EC (cross-checked against a phase-basis finite
        difference oracle, which extrapolates to the same value), inside the
        measured 300-350 MHz band for EC/h = 298 MHz."""
        spec = transmon_from_ratio(50.0)
        sub = diagonalize_transmon(spec)
        e = sub.energies
        f01 = (e[1] - e[0]) / H
        f12 = (e[2] - e[1]) / H
        ec = spec.e_c / H
        ej = spec.ej / H
        assert f01 == pytest.approx(math.sqrt(8 * ej * ec) - ec, rel=0.02)
        alpha = f12 - f01
        assert alpha == pytest.approx(-1.14922303 * ec, rel=1e-8)
        assert 300e6 <= -alpha <= 350e6

    def test_free_rotor_limit(self):
        """E_J -> 0: spectrum approaches 4 E_C (n - n_g)^2."""
        ec = 298e6 * H
        spec = TransmonSpec(c_eff=E**2 / (2 * ec), ej=1e-8 * ec, q_offset=0.2 * 2 * E)
        sub = diagonalize_transmon(spec)
        ng = spec.n_g
        exact = sorted(4 * ec * (n - ng) ** 2 for n in range(-3, 4))[: spec.levels]
        np.testing.assert_allclose(sub.energies, exact, rtol=1e-6)

    def test_offset_charge_periodicity(self):
        """Spectrum invariant under n_g -> n_g + 1 to 1e-10 relative."""
        base = transmon_from_ratio(50.0, levels=4)
        shifted = TransmonSpec(c_eff=base.c_eff, ej=base.ej,
                               q_offset=base.q_offset + 2 * E,
                               n_max=base.n_max, levels=base.levels)
        e0 = diagonalize_transmon(base).energies
        e1 = diagonalize_transmon(shifted).energies
        gaps0 = e0 - e0[0]
        gaps1 = e1 - e1[0]
        np.testing.assert_allclose(gaps0[1:], gaps1[1:], rtol=1e-10)

    def test_charge_dispersion_shrinks_with_ratio(self):
        """At E_J/E_C = 100 the 0-1 splitting varies below 1e-6 over a full
        offset-charge period."""
        ec = 298e6 * H
        splittings = []
        for ng in np.linspace(0.0, 1.0, 11):
            spec = TransmonSpec(c_eff=E**2 / (2 * ec), ej=100 * ec, q_offset=ng * 2 * E)
            e = diagonalize_transmon(spec).energies
            splittings.append(e[1] - e[0])
        spread = (max(splittings) - min(splittings)) / np.mean(splittings)
        assert spread < 1e-6

    def test_monotone_approach_to_asymptote(self):
        """f01 stays below the harmonic sqrt(8 EJ EC) value and the gap
        closes monotonically in E_J/E_C."""
        deficits = []
        for ratio in (20.0, 40.0, 80.0, 160.0):
            spec = transmon_from_ratio(ratio)
            e = diagonalize_transmon(spec).energies
            f01 = (e[1] - e[0]) / H
            harmonic = math.sqrt(8 * ratio) * spec.e_c / H
            deficits.append((harmonic - f01) / harmonic)
        assert all(d > 0 for d in deficits)
        assert all(b < a for a, b in zip(deficits, deficits[1:]))

    def test_truncation_convergence_guard(self):
        ec = 1e6 * H
        # enormous E_J/E_C pushes the wavefunction past a small charge cutoff
        spec = TransmonSpec(c_eff=E**2 / (2 * ec), ej=2e5 * ec, n_max=10, levels=3)
        with pytest.raises(TruncationNotConverged):
            diagonalize_transmon(spec)

    def test_charge_operator_hermitian_and_scaled(self):
        sub = diagonalize_transmon(transmon_from_ratio(50.0))
        q = sub.charge_ops["junction"]
        np.testing.assert_allclose(q, q.conj().T, atol=1e-25)
        # off-diagonal 0-1 element of n is near (EJ/(8 EC))**0.25 / sqrt(2)
        spec = transmon_from_ratio(50.0)
        n01 = abs(q[0, 1]) / (2 * E)
        assert n01 == pytest.approx((50.0 / 8.0) ** 0.25 / math.sqrt(2), rel=0.05)

    def test_spec_validation(self):
        with pytest.raises(ValidationError):
            TransmonSpec(c_eff=-1e-13, ej=1e-24)
        with pytest.raises(ValidationError):
            TransmonSpec(c_eff=1e-13, ej=1e-24, n_max=5)


def single_mode_line(levels=3):
    spec = LoadedLineSpec.from_wave_params(6.8645659e-3, 53.0, 0.403 * constants.c,
                                           c_load=320e-15)
    modes = solve_modes(spec, 1)
    return spec, modes, quantize_line(spec, modes, levels=levels, name="readout",
                                      ports=("b1",))


class TestLineQuantization:
    def test_fock_ladder_energies(self):
        spec, modes, sub = single_mode_line()
        w = modes[0].omega
        np.testing.assert_allclose(
            sub.energies, constants.hbar * w * np.array([0.5, 1.5, 2.5]), rtol=1e-12)

    def test_vacuum_charge_variance_is_zpf_squared(self):
        spec, modes, sub = single_mode_line()
        q = sub.charge_ops["b1"]
        vac = np.zeros(sub.dimension)
        vac[0] = 1.0
        variance = vac @ (q @ q) @ vac
        assert variance.real == pytest.approx(modes[0].q0_zpf**2, rel=1e-12)

    def test_charge_operator_ladder_structure(self):
        spec, modes, sub = single_mode_line()
        q0 = modes[0].q0_zpf
        a = np.diag(np.sqrt(np.arange(1, 3, dtype=float)), k=1)
        expected = 1j * q0 * (a.T - a)
        np.testing.assert_allclose(sub.charge_ops["b1"], expected, atol=1e-30)

    def test_two_mode_block_operators(self):
        spec = LoadedLineSpec.from_wave_params(6.8645659e-3, 53.0, 0.403 * constants.c,
                                               c_load=320e-15)
        modes = solve_modes(spec, 2)
        sub = quantize_line(spec, modes, levels=(3, 2), name="readout", ports=("b1",))
        assert sub.dimension == 6
        assert sub.mode_dims == (3, 2)
        e00 = 0.5 * constants.hbar * (modes[0].omega + modes[1].omega)
        assert sub.energies[0] == pytest.approx(e00, rel=1e-12)
        assert sub.bare_labels[0] == (0, 0)
        assert sub.bare_labels[1] == (0, 1)

    def test_shared_ports_for_double_ended_bus(self):
        spec = LoadedLineSpec.from_wave_params(8e-3, 53.0, 0.403 * constants.c,
                                               c_load=100e-15)
        modes = solve_modes(spec, 1)
        sub = quantize_line(spec, modes, levels=3, name="bus", ports=("b2a", "b2b"))
        np.testing.assert_allclose(sub.charge_ops["b2a"], sub.charge_ops["b2b"])

    def test_level_validation(self):
        spec, modes, _ = single_mode_line()
        with pytest.raises(ValidationError):
            quantize_line(spec, modes, levels=(3, 3), name="x", ports=("p",))
        with pytest.raises(ValidationError):
            quantize_line(spec, modes, levels=1, name="x", ports=("p",))


class TestScaleOperators:
    def test_harmonic_mode_dimensionless_form(self):
        spec, modes, sub = single_mode_line()
        scaled = scale_operators(sub, "b1")
        assert len(scaled) == 1
        assert scaled[0].factor == pytest.approx(modes[0].q0_zpf, rel=1e-12)
        a = np.diag(np.sqrt(np.arange(1, 3, dtype=float)), k=1)
        np.testing.assert_allclose(scaled[0].matrix, 1j * (a.T - a), atol=1e-30)

    def test_transmon_scaling_is_cooper_pair_number(self):
        sub = diagonalize_transmon(transmon_from_ratio(50.0))
        scaled = scale_operators(sub, "junction")
        assert len(scaled) == 1
        assert scaled[0].factor == pytest.approx(2 * E, rel=1e-15)
        np.testing.assert_allclose(
            scaled[0].factor * scaled[0].matrix, sub.charge_ops["junction"], atol=1e-30)

    def test_reconstruction_identity_multimode(self):
        """sum_m factor_m * dimensionless_m reproduces the raw port charge
        operator entrywise."""
        spec = LoadedLineSpec.from_wave_params(6.8645659e-3, 53.0, 0.403 * constants.c,
                                               c_load=320e-15)
        modes = solve_modes(spec, 2)
        sub = quantize_line(spec, modes, levels=(3, 3), name="readout", ports=("b1",))
        scaled = scale_operators(sub, "b1")
        total = sum(s.factor * s.matrix for s in scaled)
        scale = np.max(np.abs(sub.charge_ops["b1"]))
        np.testing.assert_allclose(total, sub.charge_ops["b1"], atol=1e-12 * scale)

    def test_unknown_port_rejected(self):
        sub = diagonalize_transmon(transmon_from_ratio(50.0))
        with pytest.raises(ValidationError):
            scale_operators(sub, "nope")


class TestHermiticity:
    def test_all_returned_operators_hermitian(self):
        spec, modes, sub = single_mode_line()
        for op in (*sub.charge_ops.values(), *sub.flux_ops.values()):
            scale = np.max(np.abs(op)) or 1.0
            np.testing.assert_allclose(op, op.conj().T, atol=1e-12 * scale)

    def test_non_hermitian_operator_rejected(self):
        with pytest.raises(ValidationError):
            QuantizedSubsystem(
                name="bad", mode_dims=(2,), hamiltonian=np.eye(2),
                charge_ops={"p": np.array([[0.0, 1.0], [0.0, 0.0]])},
            )
