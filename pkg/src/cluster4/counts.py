"""Counting statistics: exact outcome probabilities, Poissonian synthetic
counts, detector-efficiency correction, correlation estimates with
propagated errors, operator estimates with per-setting covariance, and
two-qubit tomography by linear inversion.

Outcome patterns are strings over ``+``/``-``, one character per mode with
mode a first; ``+`` is the +1 eigenvalue of the measured Pauli (H, +45
degrees, or R depending on the axis). Outcome index bit 0 means ``+``.
"""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass

import numpy as np

from .qstate import (
    DensityMatrix,
    OperatorExpr,
    PauliString,
    PureState,
    make_cluster4,
    expectation as _expectation,
    fidelity as _fidelity,
)
from .result import AnalysisResult
from .stabilizer import (
    MeasurementSetting,
    bell_operator,
    full_group,
    settings_plan,
    witness_c4,
)

# columns are the +1 and -1 eigenvectors of each axis
_BASIS_COLUMNS = {
    "Z": np.eye(2, dtype=complex),
    "X": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),
    "Y": np.array([[1, 1], [1j, -1j]], dtype=complex) / np.sqrt(2),
}


class PlanningError(ValueError):
    """A required measurement setting is missing."""

    def __init__(self, missing_settings, missing_targets=()):
        self.missing_settings = sorted(str(s) for s in missing_settings)
        self.missing_targets = sorted(str(t) for t in missing_targets)
        msg = "missing measurement settings: " + ", ".join(self.missing_settings)
        if self.missing_targets:
            msg += " (for operators " + ", ".join(self.missing_targets) + ")"
        super().__init__(msg)


class NoDataError(ValueError):
    """A record contains no events."""


class IncompatibleSettingError(ValueError):
    """The requested operator is not measurable under the record's setting."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Synthetic run parameters; all sampling is deterministic given seed."""

    rate_per_hour: float
    duration_hours: float
    seed: int

    def __post_init__(self):
        if self.rate_per_hour <= 0:
            raise ValueError("rate must be positive")
        if self.duration_hours <= 0:
            raise ValueError("duration must be positive")

    @property
    def expected_events(self) -> float:
        return self.rate_per_hour * self.duration_hours


@dataclass(frozen=True)
class CountRecord:
    """Raw coincidence counts per outcome pattern under one setting."""

    setting: MeasurementSetting
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (2**self.setting.num_qubits,):
            raise ValueError("count vector length must be 2**num_qubits")
        if counts.min() < 0:
            raise ValueError("counts must be non-negative")
        object.__setattr__(self, "counts", counts)


@dataclass(frozen=True)
class CorrectedRecord:
    """Efficiency-corrected record: per-outcome values and their variances."""

    setting: MeasurementSetting
    values: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        variances = np.asarray(self.variances, dtype=float)
        if values.shape != variances.shape or values.ndim != 1:
            raise ValueError("values and variances must be equal-length vectors")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "variances", variances)

    @property
    def total(self) -> float:
        return float(self.values.sum())


class EfficiencyTable:
    """Relative detector efficiencies keyed by (mode, analyzer port).

    Detector ids are e.g. 'a+' (transmitted port of mode a) and 'a-'.
    Values are normalized so the largest efficiency is exactly 1.
    """

    def __init__(self, efficiencies: dict):
        effs = {str(k): float(v) for k, v in efficiencies.items()}
        if not effs:
            raise ValueError("efficiency table must not be empty")
        for key, value in effs.items():
            if len(key) != 2 or key[1] not in "+-":
                raise ValueError(f"bad detector id {key!r}, expected e.g. 'a+'")
            if value <= 0:
                raise ValueError(f"efficiency for {key!r} must be positive")
        top = max(effs.values())
        self.efficiencies = {k: v / top for k, v in effs.items()}

    @classmethod
    def unit(cls, modes: str = "abcd") -> "EfficiencyTable":
        return cls({f"{m}{p}": 1.0 for m in modes for p in "+-"})

    @classmethod
    def from_json_dict(cls, data: dict) -> "EfficiencyTable":
        return cls(data)

    def to_json_dict(self) -> dict:
        return {k: self.efficiencies[k] for k in sorted(self.efficiencies)}

    def outcome_factors(self, modes: str = "abcd") -> np.ndarray:
        """Product of the four selected detector efficiencies per outcome."""
        n = len(modes)
        factors = np.ones(2**n)
        for idx in range(2**n):
            f = 1.0
            for k, mode in enumerate(modes):
                bit = (idx >> (n - 1 - k)) & 1
                f *= self.efficiencies[f"{mode}{'+' if bit == 0 else '-'}"]
            factors[idx] = f
        return factors


# ---------------------------------------------------------------------------
# probabilities and sampling


def outcome_probabilities(rho, setting: MeasurementSetting) -> np.ndarray:
    """Probabilities of the 2^n joint eigenvalue patterns under a setting."""
    if isinstance(rho, PureState):
        rho = rho.density()
    n = rho.num_qubits
    if setting.num_qubits != n:
        raise ValueError("setting length does not match the state")
    basis = np.array([[1.0 + 0j]])
    for axis in setting.axes:
        basis = np.kron(basis, _BASIS_COLUMNS[axis])
    probs = np.real(np.diag(basis.conj().T @ rho.matrix @ basis))
    return probs


def outcome_string(index: int, num_qubits: int) -> str:
    return "".join(
        "+" if (index >> (num_qubits - 1 - k)) & 1 == 0 else "-"
        for k in range(num_qubits)
    )


def outcome_index(pattern: str) -> int:
    idx = 0
    for ch in pattern:
        if ch not in "+-":
            raise ValueError(f"bad outcome pattern {pattern!r}")
        idx = idx * 2 + (0 if ch == "+" else 1)
    return idx


def eigenvalue_signs(target: PauliString, num_qubits: int) -> np.ndarray:
    """+-1 eigenvalue of the target for every outcome pattern."""
    signs = np.full(2**num_qubits, float(target.sign))
    idx = np.arange(2**num_qubits)
    for k, letter in enumerate(target.letters):
        if letter == "I":
            continue
        bits = (idx >> (num_qubits - 1 - k)) & 1
        signs *= 1.0 - 2.0 * bits
    return signs


def sample_counts(probs, config: ExperimentConfig, setting=None, stream: int = 0):
    """Independent Poisson counts with mean rate*duration*prob per outcome.

    The generator is seeded from (config.seed, stream) so distinct settings
    of one run draw from independent streams; identical arguments always
    reproduce the same record.
    """
    probs = np.asarray(probs, dtype=float)
    if probs.min() < -1e-12:
        raise ValueError(f"negative probability {probs.min()}")
    if abs(probs.sum() - 1.0) > 1e-6:
        raise ValueError("probabilities must sum to 1")
    probs = np.clip(probs, 0.0, None)
    rng = np.random.default_rng([config.seed, stream])
    counts = rng.poisson(config.expected_events * probs)
    if setting is None:
        n = probs.size.bit_length() - 1
        setting = MeasurementSetting("Z" * n)
    return CountRecord(setting, counts)


def synthesize_records(rho, settings, config: ExperimentConfig, eff=None, modes="abcd"):
    """Sample one raw CountRecord per setting (stream = setting index).

    When an efficiency table is given the Poisson means are thinned by the
    per-outcome detector efficiencies, as a real apparatus would record.
    """
    records = []
    for stream, setting in enumerate(settings):
        probs = outcome_probabilities(rho, setting)
        means = config.expected_events * np.clip(probs, 0.0, None)
        if eff is not None:
            means = means * eff.outcome_factors(modes)
        rng = np.random.default_rng([config.seed, stream])
        records.append(CountRecord(setting, rng.poisson(means)))
    return records


# ---------------------------------------------------------------------------
# correction and estimation


def from_raw(rec: CountRecord) -> CorrectedRecord:
    """Treat raw counts as corrected values with Poisson variance."""
    counts = rec.counts.astype(float)
    return CorrectedRecord(rec.setting, counts, counts.copy())


def efficiency_correct(rec: CountRecord, eff: EfficiencyTable, modes="abcd"):
    """Divide each count by its detector-efficiency product.

    The Poisson error of the raw count propagates to a variance of
    raw / eta^2 on the corrected value.
    """
    factors = eff.outcome_factors(modes)
    counts = rec.counts.astype(float)
    return CorrectedRecord(rec.setting, counts / factors, counts / factors**2)


def exact_record(rho, setting: MeasurementSetting) -> CorrectedRecord:
    """Zero-variance record holding the exact outcome probabilities."""
    probs = outcome_probabilities(rho, setting)
    return CorrectedRecord(setting, probs, np.zeros_like(probs))


def correlation(rec, target: PauliString) -> AnalysisResult:
    """Correlation estimate E = sum(s_i N_i) / sum(N_i) with propagated error.

    First-order propagation over independent per-outcome counts gives
    sigma^2 = sum((s_i - E)^2 var_i) / N^2.
    """
    if isinstance(rec, CountRecord):
        rec = from_raw(rec)
    if not rec.setting.covers(target):
        raise IncompatibleSettingError(
            f"operator {target} is not measurable under setting {rec.setting}"
        )
    total = rec.total
    if total <= 0:
        raise NoDataError(f"record for setting {rec.setting} contains no events")
    signs = eigenvalue_signs(target, rec.setting.num_qubits)
    value = float(np.dot(signs, rec.values) / total)
    var = float(np.dot((signs - value) ** 2, rec.variances) / total**2)
    return AnalysisResult(value, float(np.sqrt(max(var, 0.0))))


def first_covering(records, target: PauliString):
    """Index of the first record whose setting covers the target, else None."""
    for i, rec in enumerate(records):
        if rec.setting.covers(target):
            return i
    return None


def _canonical_setting(target: PauliString) -> MeasurementSetting:
    return MeasurementSetting(target.letters.replace("I", "Z"))


def estimate(expr: OperatorExpr, records) -> AnalysisResult:
    """Estimate a weighted Pauli sum from corrected records.

    The identity term contributes its coefficient exactly. Each remaining
    term is estimated from the first record covering it; terms sharing a
    record combine with their full covariance (they share the same counts),
    while distinct settings are treated as independent.
    """
    records = [from_raw(r) if isinstance(r, CountRecord) else r for r in records]
    value = 0.0
    by_record: dict = {}
    missing = []
    for coeff, target in expr.terms:
        if target.is_identity:
            value += coeff
            continue
        idx = first_covering(records, target)
        if idx is None:
            missing.append(target)
            continue
        by_record.setdefault(idx, []).append((coeff, target))
    if missing:
        raise PlanningError([_canonical_setting(t) for t in missing], missing)
    variance = 0.0
    for idx, items in by_record.items():
        rec = records[idx]
        total = rec.total
        if total <= 0:
            raise NoDataError(f"record for setting {rec.setting} contains no events")
        n = rec.setting.num_qubits
        coeffs = np.array([c for c, _ in items])
        signs = np.stack([eigenvalue_signs(t, n) for _, t in items])
        estimates = signs @ rec.values / total
        value += float(np.dot(coeffs, estimates))
        centered = signs - estimates[:, None]
        cov = (centered * rec.variances) @ centered.T / total**2
        variance += float(coeffs @ cov @ coeffs)
    return AnalysisResult(value, float(np.sqrt(max(variance, 0.0))))


# ---------------------------------------------------------------------------
# tomography


def tomography_2q(records) -> DensityMatrix:
    """Two-qubit state by linear inversion plus physical projection.

    rho = (1/4) sum_P <P> P over all 16 two-qubit Pauli strings; negative
    eigenvalues are clipped to zero and the trace renormalized.
    """
    records = [from_raw(r) if isinstance(r, CountRecord) else r for r in records]
    mat = np.zeros((4, 4), dtype=complex)
    missing = []
    for letters in itertools.product("IXYZ", repeat=2):
        target = PauliString("".join(letters))
        if target.is_identity:
            mat += 0.25 * target.matrix()
            continue
        idx = first_covering(records, target)
        if idx is None:
            missing.append(target)
            continue
        mat += 0.25 * correlation(records[idx], target).value * target.matrix()
    if missing:
        raise PlanningError([_canonical_setting(t) for t in missing], missing)
    mat = (mat + mat.conj().T) / 2.0
    evals, evecs = np.linalg.eigh(mat)
    evals = np.clip(evals, 0.0, None)
    if evals.sum() <= 0:
        raise ValueError("reconstruction collapsed to the zero matrix")
    evals /= evals.sum()
    return DensityMatrix((evecs * evals) @ evecs.conj().T)


def tomography_settings():
    """The nine two-qubit settings spanning all two-qubit Pauli strings."""
    return [MeasurementSetting(a + b) for a in "XYZ" for b in "XYZ"]


# ---------------------------------------------------------------------------
# whole-state analysis used by the CLI and the pipeline tests


def exact_state_analysis(rho) -> dict:
    """All reported quantities from a state directly (sigma = 0)."""
    if isinstance(rho, PureState):
        rho = rho.density()
    group = full_group()
    plan = settings_plan(list(group.elements))
    setting_of = {}
    for setting, covered in plan:
        for target in covered:
            setting_of[target] = str(setting)
    correlations = [
        (elem, AnalysisResult(_expectation(rho, elem), 0.0), [setting_of[elem]])
        for elem in group.elements
    ]
    return {
        "correlations": correlations,
        "fidelity": AnalysisResult(_fidelity(rho, make_cluster4()), 0.0),
        "witness": AnalysisResult(_expectation(rho, witness_c4()), 0.0),
        "bell": AnalysisResult(_expectation(rho, bell_operator()), 0.0),
        "settings": sorted({str(s) for s, _ in plan}),
    }


def record_state_analysis(records) -> dict:
    """All reported quantities from corrected count records."""
    records = [from_raw(r) if isinstance(r, CountRecord) else r for r in records]
    group = full_group()
    correlations = []
    missing = []
    for elem in group.elements:
        idx = first_covering(records, elem)
        if idx is None:
            missing.append(elem)
            continue
        correlations.append(
            (elem, correlation(records[idx], elem), [str(records[idx].setting)])
        )
    if missing:
        raise PlanningError([_canonical_setting(t) for t in missing], missing)
    mean_op = OperatorExpr((1.0 / 16.0, elem) for elem in group.elements)
    return {
        "correlations": correlations,
        "fidelity": estimate(mean_op, records),
        "witness": estimate(witness_c4(), records),
        "bell": estimate(bell_operator(), records),
        "settings": sorted({str(r.setting) for r in records}),
    }


# ---------------------------------------------------------------------------
# count file format


def write_count_csv(path, record: CountRecord, manifest=None) -> None:
    """CSV with header setting,outcome,count; manifest goes in a # comment."""
    n = record.setting.num_qubits
    with open(path, "w", newline="") as fh:
        if manifest is not None:
            fh.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["setting", "outcome", "count"])
        for idx, count in enumerate(record.counts):
            writer.writerow([record.setting.axes, outcome_string(idx, n), int(count)])


def read_count_csv(path) -> CountRecord:
    with open(path, newline="") as fh:
        rows = list(csv.reader(line for line in fh if not line.startswith("#")))
    if not rows or rows[0] != ["setting", "outcome", "count"]:
        raise ValueError(f"{path}: expected header setting,outcome,count")
    axes = {row[0] for row in rows[1:]}
    if len(axes) != 1:
        raise ValueError(f"{path}: mixed settings in one file")
    setting = MeasurementSetting(axes.pop())
    counts = np.zeros(2**setting.num_qubits, dtype=np.int64)
    for _, outcome, count in rows[1:]:
        counts[outcome_index(outcome)] = int(count)
    return CountRecord(setting, counts)
