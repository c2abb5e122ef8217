"""Stabilizer toolkit for the four-qubit cluster state.

Provides the four generators and the full 16-element signed group, the
fidelity-from-stabilizer-averages shortcut, the two-setting entanglement
witness, the four-term Bell operator, the three-qubit witnesses used in the
persistency study, and a greedy planner mapping Pauli targets onto local
measurement settings.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

import numpy as np

from .qstate import OperatorExpr, PauliString
from .result import AnalysisResult

#: classical (local hidden variable) bound on the Bell sum
BELL_LHV_BOUND = 2.0
#: algebraic maximum of the Bell sum, reached by the cluster state
BELL_MAX = 4.0

_GENERATOR_LETTERS = ("ZZII", "XXZI", "IZXX", "IIZZ")


def cluster4_generators():
    """The four independent commuting generators fixing the cluster state."""
    return tuple(PauliString(s) for s in _GENERATOR_LETTERS)


@dataclass(frozen=True)
class StabilizerGroup:
    """Generators plus all 2^k signed subset products.

    Elements are ordered by subset size (singles first, identity last),
    which for the cluster generators reproduces the conventional 16-row
    correlation table.
    """

    generators: tuple
    elements: tuple

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)


@functools.lru_cache(maxsize=8)
def _full_group_cached(generators) -> StabilizerGroup:
    k = len(generators)
    n = generators[0].num_qubits
    for g, h in itertools.combinations(generators, 2):
        if not g.commutes(h):
            raise ValueError(f"generators {g} and {h} do not commute")
    elements = []
    for size in range(1, k + 1):
        for combo in itertools.combinations(range(k), size):
            prod = generators[combo[0]]
            for idx in combo[1:]:
                prod = prod * generators[idx]
            elements.append(prod)
    elements.append(PauliString("I" * n))
    if len({e.letters for e in elements}) != 2**k:
        raise ValueError("generators are not independent")
    return StabilizerGroup(tuple(generators), tuple(elements))


def full_group(generators=None) -> StabilizerGroup:
    """All subset products of commuting independent generators, signs tracked."""
    gens = tuple(generators) if generators is not None else cluster4_generators()
    return _full_group_cached(gens)


def fidelity_from_stabilizers(expectations, sigmas=None) -> AnalysisResult:
    """Fidelity to the cluster state as the mean of the 16 group expectations.

    With sigmas attached the settings are treated as independent, so the
    error combines in quadrature and is divided by 16.
    """
    values = [float(v) for v in expectations]
    if len(values) != 16:
        raise ValueError(f"need 16 expectation values, got {len(values)}")
    for v in values:
        if not -1.0 - 1e-9 <= v <= 1.0 + 1e-9:
            raise ValueError(f"expectation value {v} outside [-1, 1]")
    mean = sum(values) / 16.0
    if sigmas is None:
        return AnalysisResult(mean, 0.0)
    errs = [float(s) for s in sigmas]
    if len(errs) != 16:
        raise ValueError(f"need 16 sigmas, got {len(errs)}")
    return AnalysisResult(mean, float(np.sqrt(np.sum(np.square(errs)))) / 16.0)


def witness_c4() -> OperatorExpr:
    """Entanglement witness for the cluster state, measurable in two settings.

    Built from the two products (ZZII+1)(IZXX+1) and (XXZI+1)(IIZZ+1) and
    expanded into a flat six-term form; expectation -1 on the ideal state,
    non-negative on biseparable states.
    """
    return OperatorExpr.from_pairs(
        [
            (2.0, "IIII"),
            (-0.5, "ZZII"),
            (-0.5, "IZXX"),
            (-0.5, "ZIXX"),
            (-0.5, "XXZI"),
            (-0.5, "IIZZ"),
            (-0.5, "XXIZ"),
        ]
    )


def bell_operator() -> OperatorExpr:
    """Four-term Bell operator maximized (value 4) by the cluster state."""
    return OperatorExpr.from_pairs(
        [
            (1.0, "ZIXX"),
            (1.0, "XYYX"),
            (1.0, "XYXY"),
            (-1.0, "ZIYY"),
        ]
    )


def bell_value(state) -> float:
    """Tr(S rho) for the Bell operator."""
    from .qstate import expectation

    return expectation(state, bell_operator())


def witness_c3(sign: int) -> OperatorExpr:
    """Witness for the three-qubit cluster branch (|HH+->+|VV-+>)/sqrt(2).

    sign selects the +/- branch; expectation is -1 on the matching branch.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    return OperatorExpr.from_pairs(
        [
            (1.5, "III"),
            (-1.0, "XXZ"),
            (-0.5, "ZZI"),
            (-0.5 * sign, "ZIX"),
            (-0.5 * sign, "IZX"),
        ]
    )


def witness_rho_abc() -> OperatorExpr:
    """Witness for the state left after losing the last photon: 1 - ZZ1 - XXZ."""
    return OperatorExpr.from_pairs([(1.0, "III"), (-1.0, "ZZI"), (-1.0, "XXZ")])


# ---------------------------------------------------------------------------
# measurement settings


@dataclass(frozen=True)
class MeasurementSetting:
    """One local Pauli basis choice per qubit, e.g. 'ZZXX'."""

    axes: str

    def __post_init__(self):
        if not self.axes or any(ch not in "XYZ" for ch in self.axes):
            raise ValueError(f"axes must be over X/Y/Z, got {self.axes!r}")

    @property
    def num_qubits(self) -> int:
        return len(self.axes)

    def covers(self, pauli: PauliString) -> bool:
        """A string is measurable iff every non-identity letter matches."""
        if pauli.num_qubits != self.num_qubits:
            return False
        return all(l == "I" or l == a for l, a in zip(pauli.letters, self.axes))

    def __str__(self) -> str:
        return self.axes


def settings_plan(targets):
    """Greedy cover of Pauli targets by measurement settings.

    Repeatedly picks the setting covering the most uncovered targets, ties
    broken by lexicographic axis order X < Y < Z per qubit. Returns a list
    of (MeasurementSetting, covered targets); every target appears exactly
    once, attached to the first setting that covers it.
    """
    targets = list(targets)
    if not targets:
        raise ValueError("target list must be nonempty")
    n = targets[0].num_qubits
    if any(t.num_qubits != n for t in targets):
        raise ValueError("all targets must act on the same qubit count")
    remaining = list(range(len(targets)))
    plan = []
    while remaining:
        best_axes = None
        best_cov: list = []
        for axes in itertools.product("XYZ", repeat=n):
            setting = MeasurementSetting("".join(axes))
            covered = [i for i in remaining if setting.covers(targets[i])]
            if len(covered) > len(best_cov):
                best_axes, best_cov = setting, covered
        plan.append((best_axes, [targets[i] for i in best_cov]))
        remaining = [i for i in remaining if i not in best_cov]
    return plan
