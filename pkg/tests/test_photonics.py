"""Tests for the Fock-space gate simulation."""

import math

import numpy as np
import pytest

from cluster4.photonics import (
    EXPERIMENT_MODES,
    FockPolynomial,
    GATE_SUCCESS_PROBABILITY,
    NoiseParams,
    PdbsSpec,
    bell_pair,
    build_gate_network,
    evolve,
    gate_truth_amplitudes,
    pdbs_transfer,
    polarized_photon,
    post_select,
    run_cluster_experiment,
    run_gate_pair,
)
from cluster4.qstate import PureState, expectation, fidelity, make_cluster4
from cluster4.stabilizer import full_group

THIRD = 1.0 / 3.0


def random_unitary(rng, dim=2):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# ---------------------------------------------------------------------------
# beam splitters


def test_pdbs_fully_transmissive_is_identity():
    np.testing.assert_allclose(pdbs_transfer(PdbsSpec(1.0, 1.0)), np.eye(4), atol=1e-15)


def test_pdbs_overlap_splitter_blocks():
    mat = pdbs_transfer(PdbsSpec(1.0, THIRD))
    h_block = mat[np.ix_([0, 2], [0, 2])]
    v_block = mat[np.ix_([1, 3], [1, 3])]
    np.testing.assert_allclose(h_block, np.eye(2), atol=1e-15)
    expected_v = np.array(
        [
            [math.sqrt(THIRD), 1j * math.sqrt(2 * THIRD)],
            [1j * math.sqrt(2 * THIRD), math.sqrt(THIRD)],
        ]
    )
    np.testing.assert_allclose(v_block, expected_v, atol=1e-15)


def test_pdbs_unitary_for_random_specs():
    rng = np.random.default_rng(1)
    for _ in range(20):
        spec = PdbsSpec(rng.uniform(), rng.uniform())
        mat = pdbs_transfer(spec)
        np.testing.assert_allclose(mat @ mat.conj().T, np.eye(4), atol=1e-12)


def test_pdbs_validation():
    with pytest.raises(ValueError):
        PdbsSpec(1.2, 0.5)
    with pytest.raises(ValueError):
        PdbsSpec(0.5, -0.1)


# ---------------------------------------------------------------------------
# the gate network


def test_network_single_photon_diagonal_amplitude():
    # oracle: chain the 2x2 per-polarization blocks by hand
    t1 = {"H": 1.0, "V": math.sqrt(THIRD)}
    t2 = {"H": math.sqrt(THIRD), "V": 1.0}
    net = build_gate_network()
    for pol in "HV":
        images = dict((m, a) for a, m in net.transfer[("b'", pol)])
        assert images[("b", pol)] == pytest.approx(t1[pol] * t2[pol], abs=1e-12)
        assert abs(t1[pol] * t2[pol] - math.sqrt(THIRD)) < 1e-12
        images_c = dict((m, a) for a, m in net.transfer[("c'", pol)])
        assert images_c[("c", pol)] == pytest.approx(math.sqrt(THIRD), abs=1e-12)


def test_network_is_unitary_on_enlarged_mode_set():
    mat, inputs, outputs = build_gate_network().transfer_matrix()
    assert len(inputs) == len(outputs) == 12
    np.testing.assert_allclose(mat.conj().T @ mat, np.eye(12), atol=1e-12)


def test_network_single_photon_post_selected():
    net = build_gate_network()
    photon = polarized_photon("b'", "H")
    out = evolve(photon, net)
    kept = post_select(out, ("b",))
    ((modes, amp),) = kept.terms.items()
    assert modes == (("b", "H", 0),)
    assert amp == pytest.approx(math.sqrt(THIRD), abs=1e-12)


def test_network_json_export():
    data = build_gate_network().to_json_dict()
    assert [e["type"] for e in data["elements"]] == ["pdbs"] * 3
    assert data["elements"][0]["modes"] == ["b'", "c'"]
    assert data["elements"][0]["T_H"] == pytest.approx(1.0)
    assert data["elements"][0]["T_V"] == pytest.approx(THIRD)
    assert data["elements"][1]["T_H"] == pytest.approx(THIRD)


# ---------------------------------------------------------------------------
# Fock polynomials


def test_two_hh_photons_success_coefficient():
    # each H photon transmits the overlap splitter fully, then sqrt(1/3):
    # joint coefficient on one photon per output is exactly 1/3
    psi = polarized_photon("b'", "H") * polarized_photon("c'", "H")
    out = post_select(evolve(psi, build_gate_network()), ("b", "c"))
    ((modes, amp),) = out.terms.items()
    assert {m[0] for m in modes} == {"b", "c"}
    assert amp == pytest.approx(THIRD, abs=1e-12)


def test_two_vv_photons_interfere_to_minus_one_third():
    # transmitted-squared minus reflected-squared: 1/3 - 2/3 = -1/3
    psi = polarized_photon("b'", "V") * polarized_photon("c'", "V")
    out = post_select(evolve(psi, build_gate_network()), ("b", "c"))
    ((_, amp),) = out.terms.items()
    assert amp == pytest.approx(-THIRD, abs=1e-12)


def test_vacuum_maps_to_vacuum():
    out = evolve(FockPolynomial.vacuum(), build_gate_network())
    assert out.terms == {(): 1.0}


def test_evolve_preserves_norm_with_double_occupancy():
    # two H photons in one mode through a random 2-mode unitary
    rng = np.random.default_rng(9)
    u = random_unitary(rng)

    class TinyNet:
        transfer = {
            ("m1", "H"): [(u[0, 0], ("m1", "H")), (u[1, 0], ("m2", "H"))],
            ("m2", "H"): [(u[0, 1], ("m1", "H")), (u[1, 1], ("m2", "H"))],
        }

    psi = polarized_photon("m1", "H") * polarized_photon("m1", "H")
    assert psi.norm_squared() == pytest.approx(2.0)  # (a+)^2 |0> has norm sqrt(2)
    out = evolve(psi, TinyNet())
    assert out.norm_squared() == pytest.approx(psi.norm_squared(), abs=1e-12)


def test_evolve_unknown_mode():
    psi = polarized_photon("nowhere", "H")
    with pytest.raises(ValueError):
        evolve(psi, build_gate_network())


def test_fock_polynomial_photon_number_checks():
    with pytest.raises(ValueError):
        FockPolynomial({(("a", "H", 0),): 1.0, (): 1.0})


# ---------------------------------------------------------------------------
# gate truth table and experiment


def test_gate_truth_table_exact():
    signs = {"HH": 1.0, "HV": 1.0, "VH": 1.0, "VV": -1.0}
    for pols, sign in signs.items():
        amps = gate_truth_amplitudes(pols)
        assert set(amps) == {pols}
        assert amps[pols] == pytest.approx(sign * THIRD, abs=1e-12)


def test_gate_pair_success_probability_any_input():
    rng = np.random.default_rng(4)
    for _ in range(5):
        vec = rng.normal(size=4) + 1j * rng.normal(size=4)
        _, prob = run_gate_pair(PureState(vec))
        assert prob == pytest.approx(GATE_SUCCESS_PROBABILITY, abs=1e-10)


def test_gate_pair_hh_variant():
    from cluster4.qstate import product_state

    rho, prob = run_gate_pair(product_state("HH"))
    assert prob == pytest.approx(1.0 / 9.0, abs=1e-12)
    assert rho.matrix[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_cluster_experiment_ideal():
    rho, prob = run_cluster_experiment(NoiseParams(1.0))
    assert prob == pytest.approx(1.0 / 9.0, abs=1e-12)
    assert fidelity(rho, make_cluster4()) == pytest.approx(1.0, abs=1e-10)


def test_cluster_experiment_closed_form_noise_behaviour():
    # hand-derived from the three decohered branches of the overlap model:
    # success probability (2 - V)/9 and fidelity (1 + V)/(2 (2 - V))
    for v in (0.0, 0.25, 0.5, 0.75, 1.0):
        rho, prob = run_cluster_experiment(NoiseParams(v))
        assert prob == pytest.approx((2.0 - v) / 9.0, abs=1e-12)
        assert fidelity(rho, make_cluster4()) == pytest.approx(
            (1.0 + v) / (2.0 * (2.0 - v)), abs=1e-10
        )


def test_cluster_experiment_output_valid_density():
    for v in (0.0, 0.25, 0.5, 0.75, 1.0):
        rho, _ = run_cluster_experiment(NoiseParams(v))
        np.testing.assert_allclose(rho.matrix, rho.matrix.conj().T, atol=1e-12)
        assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-12)
        assert np.linalg.eigvalsh(rho.matrix).min() > -1e-10


def test_fidelity_monotone_in_overlap():
    grid = np.linspace(0.0, 1.0, 11)
    fids = [
        fidelity(run_cluster_experiment(NoiseParams(v))[0], make_cluster4())
        for v in grid
    ]
    assert all(b >= a - 1e-12 for a, b in zip(fids, fids[1:]))


def test_distinguishability_enhances_vvvv():
    rho, _ = run_cluster_experiment(NoiseParams(0.0))
    populations = np.diag(rho.matrix).real
    assert populations[0b1111] > populations[0b0000] + 1e-6


def test_diagonal_populations_dominate():
    diag_idx = [0b0000, 0b0011, 0b1100, 0b1111]
    for v in (0.0, 0.25, 0.5, 0.75, 1.0):
        rho, _ = run_cluster_experiment(NoiseParams(v))
        populations = np.diag(rho.matrix).real
        main = populations[diag_idx].sum()
        rest = populations.sum() - main
        assert main >= rest - 1e-12


def test_success_probability_invariant_under_local_rotations():
    rng = np.random.default_rng(17)
    for _ in range(5):
        unitaries = {m: random_unitary(rng) for m in ("a", "b'", "c'", "d")}
        _, prob = run_cluster_experiment(NoiseParams(1.0), local_unitaries=unitaries)
        assert prob == pytest.approx(1.0 / 9.0, abs=1e-10)


def test_gate_reproduces_truth_table_for_all_stabilizers():
    # the simulated state satisfies every signed stabilizer of the target
    rho, _ = run_cluster_experiment(NoiseParams(1.0))
    for elem in full_group().elements:
        assert expectation(rho, elem) == pytest.approx(1.0, abs=1e-10), str(elem)


def test_noise_params_validation():
    with pytest.raises(ValueError):
        NoiseParams(1.5)
    with pytest.raises(ValueError):
        NoiseParams(-0.1)


def test_bell_pair_normalized():
    pair = bell_pair("a", "b'")
    assert pair.norm_squared() == pytest.approx(1.0, abs=1e-12)
    labels = (math.sqrt(0.3), math.sqrt(0.7))
    pair2 = bell_pair("c'", "d", labels1=labels, labels2=labels)
    assert pair2.norm_squared() == pytest.approx(1.0, abs=1e-12)
