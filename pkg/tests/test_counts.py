"""Tests for the counting-statistics pipeline."""

import numpy as np
import pytest

from cluster4.counts import (
    CorrectedRecord,
    CountRecord,
    EfficiencyTable,
    ExperimentConfig,
    IncompatibleSettingError,
    NoDataError,
    PlanningError,
    correlation,
    efficiency_correct,
    eigenvalue_signs,
    estimate,
    exact_record,
    from_raw,
    outcome_index,
    outcome_probabilities,
    outcome_string,
    read_count_csv,
    record_state_analysis,
    sample_counts,
    synthesize_records,
    tomography_2q,
    tomography_settings,
    write_count_csv,
)
from cluster4.qstate import (
    DensityMatrix,
    PauliString,
    PureState,
    expectation,
    fidelity,
    make_cluster4,
    maximally_mixed,
    product_state,
)
from cluster4.stabilizer import (
    MeasurementSetting,
    bell_operator,
    full_group,
    settings_plan,
    witness_c4,
)


def random_density(rng, n=2):
    dim = 2**n
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)


def depolarized_cluster(weight=0.8):
    pure = make_cluster4().density().matrix
    return DensityMatrix(weight * pure + (1 - weight) * np.eye(16) / 16)


def fig4_pair():
    return PureState(product_state("H-").amplitudes - product_state("V+").amplitudes)


def trace_distance(a, b):
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a.matrix - b.matrix)).sum())


# ---------------------------------------------------------------------------
# outcome probabilities


def test_probabilities_cluster_zzzz():
    probs = outcome_probabilities(make_cluster4().density(), MeasurementSetting("ZZZZ"))
    expected = np.zeros(16)
    for pattern in ("++++", "++--", "--++", "----"):
        expected[outcome_index(pattern)] = 0.25
    np.testing.assert_allclose(probs, expected, atol=1e-12)


def test_probabilities_maximally_mixed():
    probs = outcome_probabilities(maximally_mixed(4), MeasurementSetting("XYZX"))
    np.testing.assert_allclose(probs, np.full(16, 1 / 16), atol=1e-12)


def test_probabilities_cluster_zzxx():
    # dense oracle: the state satisfies s_a s_b = +1 and s_b s_c s_d = +1,
    # leaving four equally likely patterns
    probs = outcome_probabilities(make_cluster4().density(), MeasurementSetting("ZZXX"))
    expected = np.zeros(16)
    for pattern in ("++++", "++--", "--+-", "---+"):
        expected[outcome_index(pattern)] = 0.25
    np.testing.assert_allclose(probs, expected, atol=1e-12)


def test_probabilities_against_projector_oracle():
    # independent oracle: explicit rank-1 projectors per outcome
    rng = np.random.default_rng(6)
    eigvecs = {
        "Z": (np.array([1.0, 0.0]), np.array([0.0, 1.0])),
        "X": (np.array([1.0, 1.0]) / np.sqrt(2), np.array([1.0, -1.0]) / np.sqrt(2)),
        "Y": (
            np.array([1.0, 1.0j]) / np.sqrt(2),
            np.array([1.0, -1.0j]) / np.sqrt(2),
        ),
    }
    rho = random_density(rng, 4)
    for axes in ("ZZXX", "XYZY"):
        probs = outcome_probabilities(rho, MeasurementSetting(axes))
        assert probs.min() > -1e-12
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        for idx in range(16):
            vec = np.array([1.0 + 0j])
            for k, axis in enumerate(axes):
                bit = (idx >> (3 - k)) & 1
                vec = np.kron(vec, eigvecs[axis][bit])
            oracle = np.vdot(vec, rho.matrix @ vec).real
            assert probs[idx] == pytest.approx(oracle, abs=1e-12)


def test_outcome_string_index_roundtrip():
    for idx in range(16):
        assert outcome_index(outcome_string(idx, 4)) == idx
    assert outcome_string(1, 4) == "+++-"


# ---------------------------------------------------------------------------
# sampling


def test_sample_counts_expected_total():
    probs = outcome_probabilities(make_cluster4().density(), MeasurementSetting("ZZZZ"))
    totals = [
        sample_counts(probs, ExperimentConfig(150, 2, seed)).counts.sum()
        for seed in range(1000)
    ]
    # standard error of the mean of 1000 Poisson(300) totals
    assert abs(np.mean(totals) - 300.0) < 3 * np.sqrt(300.0 / 1000.0)


def test_sample_counts_zero_probability_bins():
    probs = outcome_probabilities(make_cluster4().density(), MeasurementSetting("ZZZZ"))
    rec = sample_counts(probs, ExperimentConfig(1e5, 1, 3))
    assert rec.counts[outcome_index("+++-")] == 0
    assert rec.counts[outcome_index("++-+")] == 0


def test_sample_counts_deterministic():
    probs = np.full(16, 1 / 16)
    cfg = ExperimentConfig(150, 2, 99)
    a = sample_counts(probs, cfg, MeasurementSetting("ZZZZ"))
    b = sample_counts(probs, cfg, MeasurementSetting("ZZZZ"))
    np.testing.assert_array_equal(a.counts, b.counts)
    c = sample_counts(probs, cfg, MeasurementSetting("ZZZZ"), stream=1)
    assert not np.array_equal(a.counts, c.counts)


def test_sample_counts_validation():
    cfg = ExperimentConfig(150, 2, 0)
    with pytest.raises(ValueError):
        sample_counts(np.full(16, -1.0), cfg)
    with pytest.raises(ValueError):
        sample_counts(np.full(16, 1.0), cfg)  # sums to 16
    with pytest.raises(ValueError):
        ExperimentConfig(0, 2, 0)
    with pytest.raises(ValueError):
        ExperimentConfig(150, 0, 0)


# ---------------------------------------------------------------------------
# efficiency correction


def test_efficiency_unit_is_identity():
    rec = CountRecord(MeasurementSetting("ZZZZ"), np.arange(16))
    corrected = efficiency_correct(rec, EfficiencyTable.unit())
    np.testing.assert_allclose(corrected.values, rec.counts)
    np.testing.assert_allclose(corrected.variances, rec.counts)


def test_efficiency_half_detector():
    effs = {f"{m}{p}": 1.0 for m in "abcd" for p in "+-"}
    effs["a+"] = 0.5
    table = EfficiencyTable(effs)
    counts = np.full(16, 100)
    corrected = efficiency_correct(CountRecord(MeasurementSetting("ZZZZ"), counts), table)
    for idx in range(16):
        if outcome_string(idx, 4)[0] == "+":
            assert corrected.values[idx] == pytest.approx(200.0)
            assert corrected.variances[idx] == pytest.approx(400.0)
        else:
            assert corrected.values[idx] == pytest.approx(100.0)
            assert corrected.variances[idx] == pytest.approx(100.0)


def test_efficiency_table_validation_and_normalization():
    with pytest.raises(ValueError):
        EfficiencyTable({"a+": 0.0})
    with pytest.raises(ValueError):
        EfficiencyTable({"aa": 1.0})
    table = EfficiencyTable({"a+": 2.0, "a-": 1.0})
    assert max(table.efficiencies.values()) == pytest.approx(1.0)


def test_efficiency_corrected_estimates_unbiased():
    rng_effs = {
        "a+": 1.0, "a-": 0.7, "b+": 0.9, "b-": 0.8,
        "c+": 0.95, "c-": 0.85, "d+": 0.75, "d-": 1.0,
    }
    table = EfficiencyTable(rng_effs)
    rho = depolarized_cluster()
    setting = MeasurementSetting("ZZXX")
    target = PauliString("ZIXX")
    truth = expectation(rho, target)
    estimates = []
    for seed in range(500):
        cfg = ExperimentConfig(1000, 1, seed)
        (rec,) = synthesize_records(rho, [setting], cfg, eff=table)
        estimates.append(correlation(efficiency_correct(rec, table), target).value)
    err = abs(np.mean(estimates) - truth)
    assert err < 3 * np.std(estimates) / np.sqrt(len(estimates))


# ---------------------------------------------------------------------------
# correlation


def test_correlation_uniform_counts():
    counts = np.full(16, 25)
    rec = CountRecord(MeasurementSetting("XYZX"), counts)
    res = correlation(rec, PauliString("XYZX"))
    assert res.value == pytest.approx(0.0)
    assert res.sigma == pytest.approx(1.0 / np.sqrt(counts.sum()))


def test_correlation_exact_cluster():
    rec = exact_record(make_cluster4().density(), MeasurementSetting("ZZZZ"))
    res = correlation(rec, PauliString("ZZII"))
    assert res.value == pytest.approx(1.0, abs=1e-12)
    assert res.sigma == 0.0


def test_correlation_single_bin_negative_sign():
    counts = np.zeros(16, dtype=int)
    counts[outcome_index("+++-")] = 50  # eigenvalue -1 for ZZZZ there
    rec = CountRecord(MeasurementSetting("ZZZZ"), counts)
    res = correlation(rec, PauliString("ZZZZ", sign=-1))
    assert res.value == pytest.approx(1.0)
    assert res.sigma == pytest.approx(0.0)


def test_correlation_errors():
    rec = CountRecord(MeasurementSetting("ZZZZ"), np.zeros(16, dtype=int))
    with pytest.raises(NoDataError):
        correlation(rec, PauliString("ZZII"))
    rec2 = CountRecord(MeasurementSetting("ZZZZ"), np.ones(16, dtype=int))
    with pytest.raises(IncompatibleSettingError):
        correlation(rec2, PauliString("XZII"))


def test_correlation_matches_expectation_for_every_table_string():
    rho = depolarized_cluster()
    plan = settings_plan(list(full_group().elements))
    for setting, covered in plan:
        rec = exact_record(rho, setting)
        for target in covered:
            res = correlation(rec, target)
            assert res.value == pytest.approx(
                expectation(rho, target), abs=1e-12
            ), str(target)


def test_eigenvalue_signs_identity_positions():
    signs = eigenvalue_signs(PauliString("ZIII"), 4)
    assert signs[0] == 1.0 and signs[8] == -1.0 and signs[1] == 1.0


# ---------------------------------------------------------------------------
# estimate


def exact_plan_records(rho):
    plan = settings_plan(list(full_group().elements))
    return [exact_record(rho, setting) for setting, _ in plan]


def test_estimate_exact_witness_and_bell():
    records = exact_plan_records(make_cluster4().density())
    res_w = estimate(witness_c4(), records)
    assert res_w.value == pytest.approx(-1.0, abs=1e-12)
    assert res_w.sigma == 0.0
    res_s = estimate(bell_operator(), records)
    assert res_s.value == pytest.approx(4.0, abs=1e-12)
    assert res_s.sigma == 0.0


def test_estimate_missing_setting_lists_requirements():
    records = [exact_record(make_cluster4().density(), MeasurementSetting("ZZZZ"))]
    with pytest.raises(PlanningError) as info:
        estimate(witness_c4(), records)
    assert info.value.missing_settings  # at least one concrete suggestion
    assert any("XX" in s for s in info.value.missing_settings)


def test_estimate_sigma_matches_monte_carlo():
    # witness, fidelity and Bell at 300 expected events per setting
    rho = depolarized_cluster()
    plan = settings_plan(list(full_group().elements))
    settings = [s for s, _ in plan]
    group = full_group()
    from cluster4.qstate import OperatorExpr

    mean_op = OperatorExpr((1.0 / 16.0, e) for e in group.elements)
    observables = {"witness": witness_c4(), "fidelity": mean_op, "bell": bell_operator()}
    samples = {name: ([], []) for name in observables}
    for seed in range(500):
        cfg = ExperimentConfig(150, 2, seed)
        records = [from_raw(r) for r in synthesize_records(rho, settings, cfg)]
        for name, op in observables.items():
            res = estimate(op, records)
            samples[name][0].append(res.value)
            samples[name][1].append(res.sigma)
    for name, (values, sigmas) in samples.items():
        mc_std = np.std(values)
        assert abs(np.mean(sigmas) - mc_std) / mc_std < 0.20, name


def test_correlation_sigma_scales_as_inverse_sqrt_duration():
    rho = depolarized_cluster()
    setting = MeasurementSetting("ZZXX")
    target = PauliString("ZIXX")
    probs = outcome_probabilities(rho, setting)
    totals = [10.0, 100.0, 1e3, 1e4, 1e5]
    mean_sigmas = []
    rng = np.random.default_rng(1234)
    signs = eigenvalue_signs(target, 4)
    for total in totals:
        counts = rng.poisson(total * probs, size=(200, 16)).astype(float)
        sums = counts.sum(axis=1)
        keep = sums > 0
        values = (counts[keep] @ signs) / sums[keep]
        var = ((signs[None, :] - values[:, None]) ** 2 * counts[keep]).sum(
            axis=1
        ) / sums[keep] ** 2
        mean_sigmas.append(np.sqrt(var).mean())
        # estimates concentrate on the truth
        assert abs(values.mean() - expectation(rho, target)) < 5 / np.sqrt(
            total * 200
        ) + 0.01
    slope = np.polyfit(np.log10(totals), np.log10(mean_sigmas), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.05)


# ---------------------------------------------------------------------------
# tomography


def test_tomography_roundtrip_exact():
    rng = np.random.default_rng(42)
    for _ in range(10):
        rho = random_density(rng, 2)
        records = [exact_record(rho, s) for s in tomography_settings()]
        back = tomography_2q(records)
        assert trace_distance(back, rho) < 1e-10


def test_tomography_maximally_mixed():
    records = [exact_record(maximally_mixed(2), s) for s in tomography_settings()]
    np.testing.assert_allclose(tomography_2q(records).matrix, np.eye(4) / 4, atol=1e-12)


def test_tomography_sampled_pair_state():
    target = fig4_pair()
    rho = target.density()
    fids = []
    for seed in range(20):
        cfg = ExperimentConfig(1e5, 1, seed)
        records = synthesize_records(rho, tomography_settings(), cfg, modes="ad")
        fids.append(fidelity(tomography_2q(records), target))
    assert np.median(fids) >= 0.99


def test_tomography_output_is_physical_despite_noise():
    # few counts: linear inversion will go unphysical, projection must fix it
    rho = fig4_pair().density()
    cfg = ExperimentConfig(30, 1, 5)
    records = synthesize_records(rho, tomography_settings(), cfg, modes="ad")
    back = tomography_2q(records)
    evals = np.linalg.eigvalsh(back.matrix)
    assert evals.min() >= -1e-12
    assert np.trace(back.matrix).real == pytest.approx(1.0, abs=1e-12)


def test_tomography_incomplete_settings():
    rho = fig4_pair().density()
    records = [exact_record(rho, MeasurementSetting("ZZ"))]
    with pytest.raises(PlanningError):
        tomography_2q(records)


# ---------------------------------------------------------------------------
# full analysis and file format


def test_record_analysis_exact_records():
    records = exact_plan_records(make_cluster4().density())
    analysis = record_state_analysis(records)
    assert analysis["fidelity"].value == pytest.approx(1.0, abs=1e-12)
    assert analysis["witness"].value == pytest.approx(-1.0, abs=1e-12)
    assert analysis["bell"].value == pytest.approx(4.0, abs=1e-12)
    assert all(r.sigma == 0 for _, r, _ in analysis["correlations"])


def test_csv_roundtrip(tmp_path):
    rec = CountRecord(MeasurementSetting("ZZXX"), np.arange(16))
    path = tmp_path / "counts.csv"
    write_count_csv(path, rec, manifest={"seed": 1})
    again = read_count_csv(path)
    assert again.setting == rec.setting
    np.testing.assert_array_equal(again.counts, rec.counts)
    write_count_csv(tmp_path / "b.csv", rec, manifest={"seed": 1})
    assert (tmp_path / "counts.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_csv_rejects_garbage(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("nope\n")
    with pytest.raises(ValueError):
        read_count_csv(path)
