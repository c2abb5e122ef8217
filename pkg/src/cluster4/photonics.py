"""Bosonic Fock-space model of the polarization-dependent beam-splitter gate.

Photons are tracked as creation-operator monomials over modes
``(spatial, polarization, temporal)``. The temporal integer is an internal
distinguishability label: photons interfere at a beam splitter only when
their labels match, and the label is traced out at the end. Beam splitters
use the symmetric convention: amplitude transmission ``sqrt(T)`` and
reflection ``i*sqrt(1-T)`` per polarization.

The controlled-phase network overlaps modes b' and c' on a splitter fully
transmitting H and passing one third of V, then balances the losses with a
complementary splitter in each output arm. Conditioning on one photon per
spatial output yields the phase-gate action at rate 1/9.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .qstate import DensityMatrix, PureState

POLARIZATIONS = ("H", "V")

GATE_INPUT_MODES = ("b'", "c'")
GATE_OUTPUT_MODES = ("b", "c")
EXPERIMENT_MODES = ("a", "b", "c", "d")
NETWORK_INPUT_MODES = ("a", "b'", "c'", "d", "aux_b", "aux_c")

#: success probability of the post-selected gate for indistinguishable photons
GATE_SUCCESS_PROBABILITY = 1.0 / 9.0


@dataclass(frozen=True)
class PdbsSpec:
    """Polarization-dependent beam splitter, given by its two transmissions."""

    transmission_h: float
    transmission_v: float

    def __post_init__(self):
        for t in (self.transmission_h, self.transmission_v):
            if not 0.0 <= t <= 1.0:
                raise ValueError(f"transmission {t} outside [0, 1]")


@dataclass(frozen=True)
class NoiseParams:
    """Mode overlap of the photons meeting at the central beam splitter.

    overlap=1 means perfectly indistinguishable photons, overlap=0 fully
    distinguishable ones.
    """

    overlap: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.overlap <= 1.0:
            raise ValueError(f"overlap {self.overlap} outside [0, 1]")


PDBS_OVERLAP = PdbsSpec(1.0, 1.0 / 3.0)
PDBS_BALANCE = PdbsSpec(1.0 / 3.0, 1.0)


def pdbs_transfer(spec: PdbsSpec) -> np.ndarray:
    """4x4 mode transfer matrix on (in1 H, in1 V, in2 H, in2 V)."""
    mat = np.zeros((4, 4), dtype=complex)
    for k, trans in enumerate((spec.transmission_h, spec.transmission_v)):
        t = math.sqrt(trans)
        r = 1.0j * math.sqrt(1.0 - trans)
        i1, i2 = k, 2 + k
        mat[i1, i1] = mat[i2, i2] = t
        mat[i1, i2] = mat[i2, i1] = r
    return mat


# ---------------------------------------------------------------------------
# Fock polynomials


def _occupations(modes) -> dict:
    occ: dict = {}
    for m in modes:
        occ[m] = occ.get(m, 0) + 1
    return occ


class FockPolynomial:
    """Linear combination of creation-operator monomials applied to vacuum.

    Keys are sorted tuples of modes (repeats allowed for multiple occupancy);
    coefficients multiply the raw monomial, so the squared norm of a term
    carries one factorial per occupied mode.
    """

    __slots__ = ("terms", "num_photons")

    def __init__(self, terms):
        clean: dict = {}
        photons = None
        for modes, coeff in dict(terms).items():
            if abs(coeff) <= 1e-15:
                continue
            key = tuple(sorted(modes))
            if photons is None:
                photons = len(key)
            elif len(key) != photons:
                raise ValueError("mixed photon numbers in one polynomial")
            clean[key] = clean.get(key, 0.0) + complex(coeff)
        self.terms = {k: v for k, v in clean.items() if abs(v) > 1e-15}
        self.num_photons = photons if photons is not None else 0

    @classmethod
    def vacuum(cls) -> "FockPolynomial":
        return cls({(): 1.0})

    def __add__(self, other: "FockPolynomial") -> "FockPolynomial":
        merged = dict(self.terms)
        for key, coeff in other.terms.items():
            merged[key] = merged.get(key, 0.0) + coeff
        return FockPolynomial(merged)

    def __mul__(self, other):
        if isinstance(other, FockPolynomial):
            out: dict = {}
            for k1, c1 in self.terms.items():
                for k2, c2 in other.terms.items():
                    key = tuple(sorted(k1 + k2))
                    out[key] = out.get(key, 0.0) + c1 * c2
            return FockPolynomial(out)
        return FockPolynomial({k: other * c for k, c in self.terms.items()})

    __rmul__ = __mul__

    def norm_squared(self) -> float:
        total = 0.0
        for modes, coeff in self.terms.items():
            weight = 1.0
            for count in _occupations(modes).values():
                weight *= math.factorial(count)
            total += weight * abs(coeff) ** 2
        return total

    def normalized(self) -> "FockPolynomial":
        norm = math.sqrt(self.norm_squared())
        if norm < 1e-15:
            raise ValueError("cannot normalize the zero polynomial")
        return self * (1.0 / norm)

    def substituted(self, image) -> "FockPolynomial":
        """Replace every creation operator by image(mode) = [(amp, mode), ...]."""
        out: dict = {}
        for modes, coeff in self.terms.items():
            for combo in itertools.product(*(image(m) for m in modes)):
                amp = coeff
                for a, _ in combo:
                    amp *= a
                key = tuple(sorted(m for _, m in combo))
                out[key] = out.get(key, 0.0) + amp
        return FockPolynomial(out)

    def filtered(self, predicate) -> "FockPolynomial":
        return FockPolynomial({k: v for k, v in self.terms.items() if predicate(k)})

    def __repr__(self) -> str:
        return f"FockPolynomial({len(self.terms)} terms, {self.num_photons} photons)"


def polarized_photon(spatial: str, pol: str, label_amps=(1.0,)) -> FockPolynomial:
    """One photon in the given spatial/polarization mode.

    label_amps gives the amplitude on each internal temporal label; the
    default is a single label 0.
    """
    terms = {
        ((spatial, pol, lbl),): amp
        for lbl, amp in enumerate(label_amps)
        if abs(amp) > 1e-15
    }
    return FockPolynomial(terms)


def bell_pair(mode1: str, mode2: str, labels1=(1.0,), labels2=(1.0,)) -> FockPolynomial:
    """(|HH> + |VV>)/sqrt(2) across two spatial modes with given label states."""
    hh = polarized_photon(mode1, "H", labels1) * polarized_photon(mode2, "H", labels2)
    vv = polarized_photon(mode1, "V", labels1) * polarized_photon(mode2, "V", labels2)
    return (hh + vv) * (1.0 / math.sqrt(2.0))


# ---------------------------------------------------------------------------
# networks


class Network:
    """Composed linear-optics network as a creation-operator substitution map.

    ``transfer`` maps an input (spatial, pol) to a list of
    (amplitude, output (spatial, pol)); temporal labels pass through
    untouched.
    """

    def __init__(self, input_modes, transfer, elements):
        self.input_modes = tuple(input_modes)
        self.transfer = dict(transfer)
        self.elements = tuple(elements)

    def output_modes(self):
        seen = []
        for images in self.transfer.values():
            for _, mode in images:
                if mode not in seen:
                    seen.append(mode)
        return tuple(sorted(seen))

    def transfer_matrix(self):
        """Dense matrix M with a_in -> sum_out M[out, in] a_out, plus the bases."""
        inputs = self.input_modes
        outputs = self.output_modes()
        mat = np.zeros((len(outputs), len(inputs)), dtype=complex)
        out_index = {m: i for i, m in enumerate(outputs)}
        for j, mode in enumerate(inputs):
            for amp, out in self.transfer[mode]:
                mat[out_index[out], j] += amp
        return mat, inputs, outputs

    def to_json_dict(self) -> dict:
        return {"elements": [dict(e) for e in self.elements]}


def _pdbs_images(spec: PdbsSpec, in1, in2, out1, out2) -> dict:
    images = {}
    for pol, trans in zip(POLARIZATIONS, (spec.transmission_h, spec.transmission_v)):
        t = math.sqrt(trans)
        r = 1.0j * math.sqrt(1.0 - trans)
        images[(in1, pol)] = [(t, (out1, pol)), (r, (out2, pol))]
        images[(in2, pol)] = [(r, (out1, pol)), (t, (out2, pol))]
    return images


def _compose(base: dict, element: dict) -> dict:
    out = {}
    for mode, images in base.items():
        acc: dict = {}
        for amp, mid in images:
            for amp2, final in element.get(mid, [(1.0, mid)]):
                acc[final] = acc.get(final, 0.0) + amp * amp2
        out[mode] = [(a, m) for m, a in acc.items() if abs(a) > 1e-15]
    return out


def build_gate_network() -> Network:
    """The three-splitter controlled-phase network on modes b' and c'.

    The overlap splitter (T_H=1, T_V=1/3) maps b', c' onto b, c; each output
    then meets a complementary splitter (T_H=1/3, T_V=1) against its own
    vacuum auxiliary mode, which equalizes the single-photon transmission of
    both polarizations at sqrt(1/3).
    """
    inputs = [(s, p) for s in NETWORK_INPUT_MODES for p in POLARIZATIONS]
    transfer = {m: [(1.0, m)] for m in inputs}
    stages = [
        (PDBS_OVERLAP, "b'", "c'", "b", "c"),
        (PDBS_BALANCE, "b", "aux_b", "b", "aux_b"),
        (PDBS_BALANCE, "c", "aux_c", "c", "aux_c"),
    ]
    elements = []
    for spec, in1, in2, out1, out2 in stages:
        transfer = _compose(transfer, _pdbs_images(spec, in1, in2, out1, out2))
        elements.append(
            {
                "type": "pdbs",
                "modes": [in1, in2],
                "T_H": spec.transmission_h,
                "T_V": spec.transmission_v,
            }
        )
    return Network(inputs, transfer, elements)


def evolve(state: FockPolynomial, network: Network) -> FockPolynomial:
    """Push a Fock polynomial through the network (photon number preserved)."""

    def image(mode):
        spatial, pol, label = mode
        try:
            outs = network.transfer[(spatial, pol)]
        except KeyError:
            raise ValueError(f"mode {(spatial, pol)} not in network") from None
        return [(amp, (s, p, label)) for amp, (s, p) in outs]

    return state.substituted(image)


def post_select(state: FockPolynomial, spatial_modes) -> FockPolynomial:
    """Keep terms with exactly one photon in each listed spatial mode."""
    wanted = tuple(spatial_modes)

    def one_each(modes) -> bool:
        spatials = sorted(m[0] for m in modes)
        return spatials == sorted(wanted)

    return state.filtered(one_each)


def polarization_density(state: FockPolynomial, spatial_order):
    """(normalized polarization DensityMatrix, probability) of a one-photon-
    per-mode polynomial; internal temporal labels are traced out."""
    order = tuple(spatial_order)
    k = len(order)
    vec = np.zeros(4**k, dtype=complex)
    for modes, coeff in state.terms.items():
        by_spatial = {m[0]: (m[1], m[2]) for m in modes}
        idx = 0
        for spatial in order:
            pol, label = by_spatial[spatial]
            if label not in (0, 1):
                raise ValueError("temporal labels limited to {0, 1}")
            idx = idx * 4 + 2 * POLARIZATIONS.index(pol) + label
        vec[idx] += coeff
    prob = float(np.vdot(vec, vec).real)
    if prob < 1e-15:
        raise ValueError("post-selected state has zero weight")
    full = np.outer(vec, vec.conj()) / prob
    # trace out the temporal label of each mode: local dimension 4 = (pol 2, label 2)
    tensor = full.reshape((2, 2) * k + (2, 2) * k)
    letters = "abcdefghijklmnopqrstuvwx"
    row_pol = [letters[2 * i] for i in range(k)]
    row_lbl = [letters[2 * i + 1] for i in range(k)]
    col_pol = [letters[2 * k + 2 * i] for i in range(k)]
    col_lbl = list(row_lbl)  # contract labels pairwise
    spec = (
        "".join(p + l for p, l in zip(row_pol, row_lbl))
        + "".join(p + l for p, l in zip(col_pol, col_lbl))
        + "->"
        + "".join(row_pol)
        + "".join(col_pol)
    )
    reduced = np.einsum(spec, tensor).reshape(2**k, 2**k)
    return DensityMatrix(reduced), prob


# ---------------------------------------------------------------------------
# experiment drivers


def _label_amps(noise: NoiseParams):
    v = noise.overlap
    return (math.sqrt(v), math.sqrt(1.0 - v))


def _rotation_image(unitaries: dict):
    """Substitution applying a 2x2 polarization unitary per spatial mode."""

    def image(mode):
        spatial, pol, label = mode
        u = unitaries.get(spatial)
        if u is None:
            return [(1.0, mode)]
        col = POLARIZATIONS.index(pol)
        return [
            (u[row, col], (spatial, out_pol, label))
            for row, out_pol in enumerate(POLARIZATIONS)
            if abs(u[row, col]) > 1e-15
        ]

    return image


def run_cluster_experiment(noise: NoiseParams = NoiseParams(), local_unitaries=None):
    """Simulate the full four-photon experiment.

    Prepares a Bell pair across (a, b'), a second one across (c', d) whose
    photons carry the partially distinguishable temporal label, runs the
    gate network, post-selects on one photon in each of a, b, c, d and
    traces the labels. Returns (4-qubit DensityMatrix, success probability).

    local_unitaries optionally maps input spatial modes ('a', "b'", "c'",
    'd') to 2x2 polarization rotations applied before the gate.
    """
    labels = _label_amps(noise)
    psi = bell_pair("a", "b'") * bell_pair("c'", "d", labels1=labels, labels2=labels)
    if local_unitaries:
        psi = psi.substituted(_rotation_image(local_unitaries))
    out = evolve(psi, build_gate_network())
    selected = post_select(out, EXPERIMENT_MODES)
    return polarization_density(selected, EXPERIMENT_MODES)


def run_gate_pair(input_state: PureState, noise: NoiseParams = NoiseParams()):
    """Run a two-qubit polarization state through the gate alone.

    The state is placed on modes (b', c'); the c' photon carries the
    partially distinguishable label. Returns (2-qubit DensityMatrix,
    success probability).
    """
    if input_state.num_qubits != 2:
        raise ValueError("gate input must be a 2-qubit state")
    labels = _label_amps(noise)
    terms = None
    for idx, amp in enumerate(input_state.amplitudes):
        if abs(amp) <= 1e-15:
            continue
        pol1 = POLARIZATIONS[(idx >> 1) & 1]
        pol2 = POLARIZATIONS[idx & 1]
        term = amp * (
            polarized_photon("b'", pol1) * polarized_photon("c'", pol2, labels)
        )
        terms = term if terms is None else terms + term
    out = evolve(terms, build_gate_network())
    selected = post_select(out, GATE_OUTPUT_MODES)
    return polarization_density(selected, GATE_OUTPUT_MODES)


def gate_truth_amplitudes(input_pols: str) -> dict:
    """Post-selected output amplitudes for a polarization product input.

    For perfectly indistinguishable photons the output is a pure amplitude
    per polarization pattern, returned as {"HH": amp, ...}.
    """
    if len(input_pols) != 2 or any(p not in POLARIZATIONS for p in input_pols):
        raise ValueError(f"input pattern must be two of H/V, got {input_pols!r}")
    psi = polarized_photon("b'", input_pols[0]) * polarized_photon("c'", input_pols[1])
    out = post_select(evolve(psi, build_gate_network()), GATE_OUTPUT_MODES)
    amps: dict = {}
    for modes, coeff in out.terms.items():
        by_spatial = {m[0]: m[1] for m in modes}
        amps[by_spatial["b"] + by_spatial["c"]] = complex(coeff)
    return amps
