"""Dense n-qubit states and operators: the exact oracle behind every other module.

Conventions fixed once for the whole package:

* ``H`` is ``|0>`` (sigma_z eigenvalue +1), ``V`` is ``|1>``.
* ``|+>`` / ``|->`` are the sigma_x eigenstates ``(|H> +- |V>)/sqrt(2)``;
  ``R`` / ``L`` are the sigma_y eigenstates ``(|H> +- i|V>)/sqrt(2)``.
* Spatial mode labels ``a b c d`` map to tensor positions 0..3 with ``a``
  the most significant qubit, so ``|HHHV>`` has basis index 1.

Everything here is a pure function over immutable values; states are small
(at most 6 qubits) and always stored as dense complex arrays.
"""

from __future__ import annotations

import numpy as np

NORM_TOL = 1e-12   # pure-state normalization
HERM_TOL = 1e-10   # Hermiticity and trace of density matrices
PHYS_TOL = 1e-8    # eigenvalues may dip to -PHYS_TOL before we call it unphysical

MAX_QUBITS = 6
MODE_LABELS = "abcd"

PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}

_S2 = 1.0 / np.sqrt(2.0)

#: +1 / -1 eigenvectors of each single-qubit Pauli, in the H/V basis.
SIGMA_EIGENSTATES = {
    ("Z", +1): np.array([1.0, 0.0], dtype=complex),
    ("Z", -1): np.array([0.0, 1.0], dtype=complex),
    ("X", +1): np.array([_S2, _S2], dtype=complex),
    ("X", -1): np.array([_S2, -_S2], dtype=complex),
    ("Y", +1): np.array([_S2, 1.0j * _S2], dtype=complex),
    ("Y", -1): np.array([_S2, -1.0j * _S2], dtype=complex),
}

_KET_VECTORS = {
    "H": SIGMA_EIGENSTATES[("Z", +1)],
    "V": SIGMA_EIGENSTATES[("Z", -1)],
    "+": SIGMA_EIGENSTATES[("X", +1)],
    "-": SIGMA_EIGENSTATES[("X", -1)],
    "R": SIGMA_EIGENSTATES[("Y", +1)],
    "L": SIGMA_EIGENSTATES[("Y", -1)],
}


class ImpossibleOutcomeError(ValueError):
    """A projection branch has (numerically) zero probability."""


def qubit_position(num_qubits: int, qubit) -> int:
    """Map a mode label 'a'..'d' or an integer position to a tensor position."""
    if isinstance(qubit, str):
        if qubit not in MODE_LABELS:
            raise ValueError(f"unknown mode label {qubit!r}")
        pos = MODE_LABELS.index(qubit)
    else:
        pos = int(qubit)
    if not 0 <= pos < num_qubits:
        raise ValueError(f"qubit {qubit!r} outside a {num_qubits}-qubit register")
    return pos


def _check_dim(size: int) -> int:
    n = int(size).bit_length() - 1
    if size != 2**n or not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"dimension {size} is not 2**n with 1 <= n <= {MAX_QUBITS}")
    return n


# ---------------------------------------------------------------------------
# states


class PureState:
    """Normalized pure state; index bit 0 of qubit k sits at position n-1-k."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        _check_dim(amps.size)
        norm = np.linalg.norm(amps)
        if norm < 1e-12:
            raise ValueError("cannot normalize a zero amplitude vector")
        self.amplitudes = amps / norm

    @property
    def num_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))

    def inner(self, other: "PureState") -> complex:
        if other.num_qubits != self.num_qubits:
            raise ValueError("qubit count mismatch")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_json_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "amplitudes": [[float(z.real), float(z.imag)] for z in self.amplitudes],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "PureState":
        amps = [complex(re, im) for re, im in data["amplitudes"]]
        state = cls(amps)
        if state.num_qubits != int(data["num_qubits"]):
            raise ValueError("num_qubits does not match amplitude length")
        return state

    def __repr__(self) -> str:
        return f"PureState(num_qubits={self.num_qubits})"


class DensityMatrix:
    """Dense density matrix, validated for Hermiticity, unit trace and physicality."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        mat = np.asarray(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("density matrix must be square")
        _check_dim(mat.shape[0])
        if not np.allclose(mat, mat.conj().T, atol=HERM_TOL, rtol=0):
            raise ValueError("density matrix is not Hermitian")
        tr = complex(np.trace(mat))
        if abs(tr - 1.0) > HERM_TOL:
            raise ValueError(f"trace is {tr}, expected 1")
        if float(np.linalg.eigvalsh(mat).min()) < -PHYS_TOL:
            raise ValueError("density matrix has a negative eigenvalue")
        self.matrix = mat.copy()

    @property
    def num_qubits(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    def to_json_dict(self) -> dict:
        flat = self.matrix.reshape(-1)
        return {
            "num_qubits": self.num_qubits,
            "matrix": [[float(z.real), float(z.imag)] for z in flat],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "DensityMatrix":
        flat = np.array([complex(re, im) for re, im in data["matrix"]])
        dim = 2 ** int(data["num_qubits"])
        if flat.size != dim * dim:
            raise ValueError("matrix length does not match num_qubits")
        return cls(flat.reshape(dim, dim))

    def __repr__(self) -> str:
        return f"DensityMatrix(num_qubits={self.num_qubits})"


def maximally_mixed(num_qubits: int) -> DensityMatrix:
    dim = 2**num_qubits
    return DensityMatrix(np.eye(dim) / dim)


def product_state(kets: str) -> PureState:
    """Product state from per-qubit characters in ``HV+-RL``, e.g. ``"HH+"``."""
    vec = np.array([1.0 + 0.0j])
    for ch in kets:
        if ch not in _KET_VECTORS:
            raise ValueError(f"unknown ket character {ch!r}")
        vec = np.kron(vec, _KET_VECTORS[ch])
    return PureState(vec)


def make_cluster4() -> PureState:
    """The four-qubit cluster state: (|HHHH> + |HHVV> + |VVHH> - |VVVV>)/2."""
    amps = np.zeros(16, dtype=complex)
    amps[0b0000] = 0.5
    amps[0b0011] = 0.5
    amps[0b1100] = 0.5
    amps[0b1111] = -0.5
    return PureState(amps)


def make_bell(sign: int = +1) -> PureState:
    """The Bell pair (|HH> + sign |VV>)/sqrt(2)."""
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    amps = np.zeros(4, dtype=complex)
    amps[0b00] = _S2
    amps[0b11] = sign * _S2
    return PureState(amps)


def make_ghz(num_qubits: int) -> PureState:
    """The GHZ state (|H..H> + |V..V>)/sqrt(2) on 2..6 qubits."""
    if not 2 <= num_qubits <= MAX_QUBITS:
        raise ValueError(f"GHZ size must be in 2..{MAX_QUBITS}")
    amps = np.zeros(2**num_qubits, dtype=complex)
    amps[0] = _S2
    amps[-1] = _S2
    return PureState(amps)


def ideal_cphase(state: PureState, q1, q2) -> PureState:
    """Negate every amplitude with V on both given qubits (controlled phase)."""
    n = state.num_qubits
    p1 = qubit_position(n, q1)
    p2 = qubit_position(n, q2)
    if p1 == p2:
        raise ValueError("controlled phase needs two distinct qubits")
    mask = (1 << (n - 1 - p1)) | (1 << (n - 1 - p2))
    amps = state.amplitudes.copy()
    idx = np.arange(amps.size)
    amps[(idx & mask) == mask] *= -1.0
    return PureState(amps)


# ---------------------------------------------------------------------------
# Pauli algebra

# (left, right) -> (phase, letter); phases are +-1 or +-i
_SINGLE_PRODUCTS = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("Y", "I"): (1, "Y"), ("Z", "I"): (1, "Z"),
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}


class PauliString:
    """Signed tensor product of Pauli letters, e.g. -YYZI.

    The text form writes identity as ``1`` ("-YYZ1"); both ``1`` and ``I``
    are accepted on input.
    """

    __slots__ = ("sign", "letters")

    def __init__(self, letters: str, sign: int = +1):
        letters = letters.upper().replace("1", "I")
        if not letters or any(ch not in "IXYZ" for ch in letters):
            raise ValueError(f"invalid Pauli letters {letters!r}")
        if sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        self.letters = letters
        self.sign = int(sign)

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        text = text.strip()
        sign = +1
        if text.startswith(("-", "+")):
            sign = -1 if text[0] == "-" else +1
            text = text[1:]
        return cls(text, sign)

    @property
    def num_qubits(self) -> int:
        return len(self.letters)

    @property
    def is_identity(self) -> bool:
        return set(self.letters) == {"I"}

    @property
    def weight(self) -> int:
        return sum(1 for ch in self.letters if ch != "I")

    def matrix(self) -> np.ndarray:
        mat = np.array([[complex(self.sign)]])
        for ch in self.letters:
            mat = np.kron(mat, PAULI_MATRICES[ch])
        return mat

    def commutes(self, other: "PauliString") -> bool:
        if other.num_qubits != self.num_qubits:
            raise ValueError("qubit count mismatch")
        anti = sum(
            1
            for l, r in zip(self.letters, other.letters)
            if l != "I" and r != "I" and l != r
        )
        return anti % 2 == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        if other.num_qubits != self.num_qubits:
            raise ValueError("qubit count mismatch")
        phase = complex(self.sign * other.sign)
        letters = []
        for l, r in zip(self.letters, other.letters):
            ph, letter = _SINGLE_PRODUCTS[(l, r)]
            phase *= ph
            letters.append(letter)
        if abs(phase.imag) > 1e-12:
            raise ValueError("product has imaginary phase (operators anticommute)")
        return PauliString("".join(letters), +1 if phase.real > 0 else -1)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and self.sign == other.sign
            and self.letters == other.letters
        )

    def __hash__(self) -> int:
        return hash((self.sign, self.letters))

    def __str__(self) -> str:
        return ("-" if self.sign < 0 else "") + self.letters.replace("I", "1")

    def __repr__(self) -> str:
        return f"PauliString({str(self)!r})"


class OperatorExpr:
    """Real-weighted sum of Pauli strings; always a Hermitian observable.

    Signs of the input strings are folded into the coefficients, so terms
    are stored with positive-sign strings and merged by letter pattern.
    """

    __slots__ = ("terms",)

    def __init__(self, terms):
        merged: dict[str, float] = {}
        length = None
        for coeff, ps in terms:
            coeff = float(coeff)
            if length is None:
                length = ps.num_qubits
            elif ps.num_qubits != length:
                raise ValueError("all terms must act on the same qubit count")
            merged[ps.letters] = merged.get(ps.letters, 0.0) + coeff * ps.sign
        if length is None:
            raise ValueError("operator expression needs at least one term")
        self.terms = tuple(
            (c, PauliString(letters)) for letters, c in merged.items() if abs(c) > 1e-15
        )
        if not self.terms:  # keep an explicit zero operator representable
            self.terms = ((0.0, PauliString("I" * length)),)

    @classmethod
    def from_pairs(cls, pairs) -> "OperatorExpr":
        """Build from (coefficient, letters-or-PauliString) pairs."""
        return cls(
            (c, p if isinstance(p, PauliString) else PauliString.parse(p))
            for c, p in pairs
        )

    @property
    def num_qubits(self) -> int:
        return self.terms[0][1].num_qubits

    def matrix(self) -> np.ndarray:
        dim = 2**self.num_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        for coeff, ps in self.terms:
            mat += coeff * ps.matrix()
        return mat

    def __repr__(self) -> str:
        body = " + ".join(f"{c:g}*{ps}" for c, ps in self.terms)
        return f"OperatorExpr({body})"


# ---------------------------------------------------------------------------
# measurements and functionals


def expectation(state, op) -> float:
    """Tr(rho Op) for a PureState/DensityMatrix and a PauliString/OperatorExpr."""
    if isinstance(op, OperatorExpr):
        return float(sum(c * expectation(state, ps) for c, ps in op.terms))
    if op.num_qubits != state.num_qubits:
        raise ValueError("operator and state qubit counts differ")
    mat = op.matrix()
    if isinstance(state, PureState):
        val = np.vdot(state.amplitudes, mat @ state.amplitudes)
    else:
        val = np.trace(state.matrix @ mat)
    return float(val.real)


def fidelity(rho, target: PureState) -> float:
    """Overlap <target|rho|target>; accepts a pure state for rho as well."""
    if rho.num_qubits != target.num_qubits:
        raise ValueError("state dimensions differ")
    if isinstance(rho, PureState):
        return float(abs(np.vdot(target.amplitudes, rho.amplitudes)) ** 2)
    val = np.vdot(target.amplitudes, rho.matrix @ target.amplitudes)
    return float(val.real)


def project_pure(state: PureState, qubit, axis: str, outcome: int):
    """Project one qubit of a pure state onto a Pauli eigenstate.

    Returns the normalized (n-1)-qubit branch and its probability; raises
    ImpossibleOutcomeError below probability 1e-14.
    """
    n = state.num_qubits
    pos = qubit_position(n, qubit)
    vec = SIGMA_EIGENSTATES[(axis, outcome)]
    tensor = state.amplitudes.reshape((2,) * n)
    branch = np.tensordot(vec.conj(), tensor, axes=([0], [pos]))
    prob = float(np.vdot(branch, branch).real)
    if prob < 1e-14:
        raise ImpossibleOutcomeError(
            f"outcome {outcome:+d} of {axis} on qubit {qubit!r} has zero probability"
        )
    return PureState(branch.reshape(-1)), prob


def project(state, qubit, axis: str, outcome: int):
    """Projective measurement of one qubit; removes it from the register.

    Works on pure states and density matrices alike and always returns a
    (DensityMatrix, probability) pair.
    """
    if axis not in "XYZ" or len(axis) != 1:
        raise ValueError(f"axis must be one of X, Y, Z, got {axis!r}")
    if outcome not in (+1, -1):
        raise ValueError("outcome must be +1 or -1")
    if isinstance(state, PureState):
        branch, prob = project_pure(state, qubit, axis, outcome)
        return branch.density(), prob
    n = state.num_qubits
    pos = qubit_position(n, qubit)
    vec = SIGMA_EIGENSTATES[(axis, outcome)]
    tensor = state.matrix.reshape((2,) * (2 * n))
    tensor = np.tensordot(vec.conj(), tensor, axes=([0], [pos]))
    tensor = np.tensordot(vec, tensor, axes=([0], [n - 1 + pos]))
    dim = 2 ** (n - 1)
    mat = tensor.reshape(dim, dim)
    prob = float(np.trace(mat).real)
    if prob < 1e-14:
        raise ImpossibleOutcomeError(
            f"outcome {outcome:+d} of {axis} on qubit {qubit!r} has zero probability"
        )
    return DensityMatrix(mat / prob), prob


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Reduced density matrix on the kept qubits (original ordering)."""
    n = rho.num_qubits
    kept = sorted({qubit_position(n, q) for q in keep})
    if not kept:
        raise ValueError("keep set must be nonempty")
    traced = [p for p in range(n) if p not in kept]
    tensor = rho.matrix.reshape((2,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwx"
    row = list(letters[:n])
    col = list(letters[n : 2 * n])
    for p in traced:
        col[p] = row[p]
    out = "".join(row[p] for p in kept) + "".join(letters[n + p] for p in kept)
    spec = "".join(row) + "".join(col) + "->" + out
    reduced = np.einsum(spec, tensor)
    dim = 2 ** len(kept)
    return DensityMatrix(reduced.reshape(dim, dim))


def logarithmic_negativity(rho: DensityMatrix, partition) -> float:
    """log2 of the trace norm of the partial transpose over the partition."""
    n = rho.num_qubits
    part = sorted({qubit_position(n, q) for q in partition})
    if not part or len(part) >= n:
        raise ValueError("partition must be a nonempty strict subset of the qubits")
    tensor = rho.matrix.reshape((2,) * (2 * n))
    for p in part:
        tensor = np.swapaxes(tensor, p, n + p)
    dim = 2**n
    transposed = tensor.reshape(dim, dim)
    trace_norm = float(np.abs(np.linalg.eigvalsh(transposed)).sum())
    return max(0.0, float(np.log2(trace_norm)))


# ---------------------------------------------------------------------------
# serialization


def state_to_json_dict(state) -> dict:
    return state.to_json_dict()


def state_from_json_dict(data: dict):
    if "amplitudes" in data:
        return PureState.from_json_dict(data)
    if "matrix" in data:
        return DensityMatrix.from_json_dict(data)
    raise ValueError("not a state object: expected 'amplitudes' or 'matrix'")
