"""Entanglement persistency of the four-qubit cluster state.

Covers the three reductions studied experimentally: projecting one photon
onto the +-45 degree basis (leaving three-qubit cluster branches), losing a
photon altogether (partial trace), and projecting two photons to leave an
entangled pair, as in the two-qubit output of the controlled-NOT example.
"""

from __future__ import annotations

from dataclasses import dataclass

from .qstate import (
    DensityMatrix,
    MODE_LABELS,
    OperatorExpr,
    PauliString,
    PureState,
    expectation,
    fidelity,
    logarithmic_negativity,
    make_cluster4,
    partial_trace,
    project,
    project_pure,
    qubit_position,
)
from .stabilizer import full_group, witness_c3


@dataclass(frozen=True)
class ProjectionBranch:
    outcome: int
    probability: float
    state: DensityMatrix
    target: PureState
    fidelity: float
    witness: float

    def to_json_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "probability": self.probability,
            "fidelity": self.fidelity,
            "witness": self.witness,
        }


@dataclass(frozen=True)
class ModePersistency:
    mode: str
    branches: tuple
    loss_state: DensityMatrix
    loss_witness: float

    def to_json_dict(self) -> dict:
        return {
            "mode": self.mode,
            "branches": [b.to_json_dict() for b in self.branches],
            "loss": {"witness": self.loss_witness},
        }


@dataclass(frozen=True)
class PairReduction:
    modes: tuple
    outcomes: tuple
    probability: float
    state: DensityMatrix
    target: PureState
    fidelity: float
    log_negativity: float

    def to_json_dict(self) -> dict:
        return {
            "modes": list(self.modes),
            "outcomes": list(self.outcomes),
            "probability": self.probability,
            "fidelity": self.fidelity,
            "log_negativity": self.log_negativity,
        }


@dataclass(frozen=True)
class PersistencyReport:
    modes: tuple
    pair: PairReduction

    def to_json_dict(self) -> dict:
        return {
            "modes": [m.to_json_dict() for m in self.modes],
            "pair": self.pair.to_json_dict(),
        }


def _reversed_expr(expr: OperatorExpr) -> OperatorExpr:
    return OperatorExpr(
        (c * ps.sign, PauliString(ps.letters[::-1])) for c, ps in expr.terms
    )


def branch_witness(mode, outcome: int) -> OperatorExpr:
    """Three-qubit witness matching the ideal branch left by an x-projection.

    Projecting c or d leaves a state whose flag qubit sits last, so the
    standard witness applies; projecting a or b leaves its mirror image and
    takes the letter-reversed witness.
    """
    pos = qubit_position(4, mode)
    w = witness_c3(outcome)
    return w if pos >= 2 else _reversed_expr(w)


def branch_target(mode, outcome: int) -> PureState:
    """Ideal three-qubit branch: the same projection applied to the cluster."""
    state, _ = project_pure(make_cluster4(), mode, "X", outcome)
    return state


def loss_witness(mode) -> OperatorExpr:
    """Witness for the mixed state left by tracing out one photon.

    Uses the two positive-sign stabilizer elements acting trivially on the
    lost mode, restricted to the surviving qubits: 1 - S1 - S2.
    """
    pos = qubit_position(4, mode)
    survivors = [
        e
        for e in full_group().elements
        if e.letters[pos] == "I" and e.sign > 0 and not e.is_identity
    ]
    # three elements act trivially on any single mode; the negative-sign one
    # is the product of the other two
    if len(survivors) != 2:
        raise ValueError(f"unexpected stabilizer structure for mode {mode!r}")
    terms = [(1.0, PauliString("III"))]
    for elem in survivors:
        reduced = elem.letters[:pos] + elem.letters[pos + 1 :]
        terms.append((-1.0, PauliString(reduced)))
    return OperatorExpr(terms)


def reduce_by_x_projection(rho4: DensityMatrix, mode):
    """Both +-45 degree projection branches of one mode, with probabilities,
    fidelities to the ideal branches and the matching witness values."""
    if rho4.num_qubits != 4:
        raise ValueError("persistency analysis expects a 4-qubit state")
    branches = []
    for outcome in (+1, -1):
        state, prob = project(rho4, mode, "X", outcome)
        target = branch_target(mode, outcome)
        wexpr = branch_witness(mode, outcome)
        branches.append(
            ProjectionBranch(
                outcome=outcome,
                probability=prob,
                state=state,
                target=target,
                fidelity=fidelity(state, target),
                witness=expectation(state, wexpr),
            )
        )
    return tuple(branches)


def reduce_by_loss(rho4: DensityMatrix, mode):
    """Partial trace over one mode plus the surviving-stabilizer witness value."""
    if rho4.num_qubits != 4:
        raise ValueError("persistency analysis expects a 4-qubit state")
    pos = qubit_position(4, mode)
    keep = [p for p in range(4) if p != pos]
    reduced = partial_trace(rho4, keep)
    return reduced, expectation(reduced, loss_witness(mode))


def pair_reduction_target(modes, outcomes) -> PureState:
    """Ideal two-qubit state: the same double projection applied to the cluster."""
    state = make_cluster4()
    p1 = qubit_position(4, modes[0])
    p2 = qubit_position(4, modes[1])
    state, _ = project_pure(state, p1, "X", outcomes[0])
    state, _ = project_pure(state, p2 - (1 if p1 < p2 else 0), "X", outcomes[1])
    return state


def reduce_to_pair(rho4: DensityMatrix, modes, outcomes) -> PairReduction:
    """Project two modes onto +-45 degrees, leaving an analyzed two-qubit pair."""
    if rho4.num_qubits != 4:
        raise ValueError("persistency analysis expects a 4-qubit state")
    p1 = qubit_position(4, modes[0])
    p2 = qubit_position(4, modes[1])
    if p1 == p2:
        raise ValueError("pair reduction needs two distinct modes")
    if any(o not in (+1, -1) for o in outcomes):
        raise ValueError("outcomes must be +1 or -1")
    mid, prob1 = project(rho4, p1, "X", outcomes[0])
    pair, prob2 = project(mid, p2 - (1 if p1 < p2 else 0), "X", outcomes[1])
    target = pair_reduction_target(modes, outcomes)
    return PairReduction(
        modes=tuple(modes),
        outcomes=tuple(outcomes),
        probability=prob1 * prob2,
        state=pair,
        target=target,
        fidelity=fidelity(pair, target),
        log_negativity=logarithmic_negativity(pair, {0}),
    )


def persistency_report(rho4: DensityMatrix) -> PersistencyReport:
    """Full persistency study: every single-mode projection and loss, plus
    the (b, c) -> (-45, -45) pair reduction."""
    modes = []
    for mode in MODE_LABELS:
        branches = reduce_by_x_projection(rho4, mode)
        loss_state, loss_value = reduce_by_loss(rho4, mode)
        modes.append(
            ModePersistency(
                mode=mode,
                branches=branches,
                loss_state=loss_state,
                loss_witness=loss_value,
            )
        )
    pair = reduce_to_pair(rho4, ("b", "c"), (-1, -1))
    return PersistencyReport(modes=tuple(modes), pair=pair)
