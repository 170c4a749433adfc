"""Spectral anchors for the coupled system.

The frozen numbers below were computed with an independent
implementation (scipy sparse diagonalization of the g-e block in a
larger truncation) and are pinned here to guard against regressions in
assembly, classification and phase fixing.
"""

import numpy as np
import pytest

from uscpair.model import (
    COUPLING_COROTATING,
    SystemParams,
    assemble_static,
    assemble_total_static,
)
from uscpair.spectrum import (
    diagonalize,
    diagonalize_static,
    stirap_carriers,
    virtual_amplitude,
    virtual_amplitudes,
)

# lam/omega_c = 0.5, eps = omega_c, n_max = 20
E_GROUND = -0.13329423546163
C_00 = 0.96179876219
C_02 = 0.09346081808844
E_RABI_1 = 0.3799761662
E_RABI_2 = 1.1953937171
E_RABI_3 = 1.3253051970
CARRIER_P = 3.86670576453837
CARRIER_S = 1.86670576453837


@pytest.fixture(scope="module")
def es_half():
    return diagonalize_static(SystemParams())


def test_ground_state_energy_and_pair_amplitudes(es_half):
    assert es_half.energies[es_half.rabi_column(0)] == pytest.approx(E_GROUND, abs=1e-9)
    assert virtual_amplitude(es_half, 0, 0) == pytest.approx(C_00, abs=1e-9)
    assert virtual_amplitude(es_half, 0, 2) == pytest.approx(C_02, abs=1e-9)
    # the amplitude ratio sets the pump/Stokes amplitude ratio of the protocol
    assert C_02 / C_00 == pytest.approx(0.0972, abs=2e-4)


def test_ground_state_parity_forbids_odd_photon_numbers(es_half):
    amps = virtual_amplitudes(es_half, 0)
    assert np.max(np.abs(amps[1::2])) < 1e-10


def test_classification_partitions_cleanly(es_half):
    assert es_half.mixed_count == 0
    assert es_half.rabi_count == 2 * 20
    for n in range(20):
        k = es_half.ancilla_column(n)
        assert es_half.energies[k] == pytest.approx(n - 4.0, abs=1e-12)
        assert es_half.u_population[k] == pytest.approx(1.0, abs=1e-12)
    k0 = es_half.rabi_column(0)
    assert es_half.u_population[k0] == pytest.approx(0.0, abs=1e-14)


def test_rabi_states_carry_exact_parity(es_half):
    for j, expected in ((0, 1.0), (1, -1.0), (2, 1.0), (3, -1.0)):
        k = es_half.rabi_column(j)
        assert es_half.parity[k] == pytest.approx(expected, abs=1e-10)


def test_excited_state_energies(es_half):
    for j, energy in ((1, E_RABI_1), (2, E_RABI_2), (3, E_RABI_3)):
        assert es_half.energies[es_half.rabi_column(j)] == pytest.approx(energy, abs=1e-9)


def test_excited_doublet_skips_the_dark_state(es_half):
    # an even state sits between the two odd ones at this coupling
    assert es_half.excited_doublet() == (1, 3)


def test_dressed_states_stay_normalized_in_ge_block(es_half):
    for j in (0, 1, 3):
        k = es_half.rabi_column(j)
        v = es_half.state(k)
        g = v[es_half.space.atom_slice("g")]
        e = v[es_half.space.atom_slice("e")]
        assert np.sum(np.abs(g) ** 2) + np.sum(np.abs(e) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_perturbative_amplitude_at_weak_coupling():
    es = diagonalize_static(SystemParams(lam=0.1))
    expected = np.sqrt(2.0) / 4.0 * 0.1**2
    c02 = virtual_amplitude(es, 0, 2).real
    assert abs(c02 - expected) / expected < 0.2


def test_corotating_coupling_has_no_pair_amplitude():
    es = diagonalize_static(SystemParams(eg_coupling_form=COUPLING_COROTATING))
    assert abs(virtual_amplitude(es, 0, 2)) < 1e-12
    amps = virtual_amplitudes(es, 0)
    assert np.max(np.abs(amps[1:])) < 1e-12


def test_truncation_doubling_converged():
    es40 = diagonalize_static(SystemParams(n_max=40))
    assert es40.energies[es40.rabi_column(0)] == pytest.approx(E_GROUND, abs=1e-8)
    assert virtual_amplitude(es40, 0, 2).real == pytest.approx(C_02, abs=1e-8)


def test_lambda_carriers(es_half):
    omega_p, omega_s = stirap_carriers(es_half, "lambda")
    assert omega_p == pytest.approx(CARRIER_P, abs=1e-9)
    assert omega_s == pytest.approx(CARRIER_S, abs=1e-9)
    # pump minus Stokes is pinned to the two-photon spacing
    assert omega_p - omega_s == pytest.approx(2.0, abs=1e-12)


def test_uncoupled_lambda_carriers_are_bare():
    es = diagonalize_static(SystemParams(lam=0.0))
    omega_p, omega_s = stirap_carriers(es, "lambda")
    assert omega_p == pytest.approx(4.0, abs=1e-12)
    assert omega_s == pytest.approx(2.0, abs=1e-12)


def test_vee_carriers_track_the_doublet_reference():
    es = diagonalize_static(SystemParams(epsilon_prime=-1.5))
    p_lower, s_lower = stirap_carriers(es, "vee", doublet_reference="lower")
    assert p_lower == pytest.approx(1.5 - E_RABI_1, abs=1e-9)
    assert s_lower - p_lower == pytest.approx(2.0, abs=1e-12)
    p_upper, _ = stirap_carriers(es, "vee", doublet_reference="upper")
    assert p_upper == pytest.approx(1.5 - E_RABI_3, abs=1e-9)
    p_mid, _ = stirap_carriers(es, "vee")
    assert p_mid == pytest.approx(0.5 * (p_lower + p_upper), abs=1e-12)
    with pytest.raises(ValueError, match="doublet_reference"):
        stirap_carriers(es, "vee", doublet_reference="median")


def test_carriers_reject_mixed_spectra():
    params = SystemParams(lam=0.0, lam_prime=0.5)
    es = diagonalize(assemble_total_static(params), params.space())
    assert es.mixed_count > 0
    with pytest.raises(ValueError, match="clean partition"):
        stirap_carriers(es, "lambda")


def test_diagonalize_validates_shape():
    params = SystemParams(n_max=5)
    with pytest.raises(ValueError, match="shape"):
        diagonalize(assemble_static(params), SystemParams(n_max=6).space())


def test_column_lookup_errors_name_the_label(es_half):
    with pytest.raises(ValueError, match="ancilla"):
        es_half.column_of("ancilla", 99)


def test_projector_is_idempotent(es_half):
    p = es_half.projector(es_half.rabi_column(0))
    np.testing.assert_allclose(p @ p, p, atol=1e-12)
    assert np.trace(p).real == pytest.approx(1.0, abs=1e-12)
