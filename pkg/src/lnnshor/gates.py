"""Gate vocabulary for the line-architecture circuit IR.

A gate acts on one or two qubit line indices.  Two-qubit compound gates
carry an explicit 4x4 unitary (2x2 for a fused run of single-qubit gates)
and are counted as one gate by every resource metric.  Classically
conditioned phase rotations carry a list of (classical bit, angle) terms;
the applied rotation angle is the sum of the angles whose bits are 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

UNITARITY_TOL = 1e-10

SQRT2_INV = 1.0 / math.sqrt(2.0)
H_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT2_INV
X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)
SWAP_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


class Kind(Enum):
    H = "H"
    P = "P"  # single-qubit phase rotation diag(1, e^{i theta})
    CP = "CP"  # controlled phase, symmetric in its two qubits
    CNOT = "CNOT"
    SWAP = "SWAP"
    COMPOUND = "COMPOUND"
    MEASURE = "MEASURE"
    CRZ = "CRZ"  # classically conditioned phase rotation


def phase_matrix(theta: float) -> np.ndarray:
    return np.array([[1, 0], [0, np.exp(1j * theta)]], dtype=complex)


def cphase_matrix(theta: float) -> np.ndarray:
    m = np.eye(4, dtype=complex)
    m[3, 3] = np.exp(1j * theta)
    return m


def cnot_matrix(negated: bool) -> np.ndarray:
    # First tensor factor is the control line.
    m = np.zeros((4, 4), dtype=complex)
    if negated:
        # flips the target iff the control qubit is 0
        m[0, 1] = m[1, 0] = 1
        m[2, 2] = m[3, 3] = 1
    else:
        m[0, 0] = m[1, 1] = 1
        m[2, 3] = m[3, 2] = 1
    return m


def unitarity_defect(m: np.ndarray) -> float:
    d = m.shape[0]
    return float(np.max(np.abs(m.conj().T @ m - np.eye(d))))


@dataclass(frozen=True)
class Gate:
    kind: Kind
    qubits: tuple[int, ...]
    angle: float = 0.0
    negated_control: bool = False
    matrix: np.ndarray | None = None  # COMPOUND only
    label: str = ""  # COMPOUND only
    cbit: int = -1  # MEASURE destination bit
    terms: tuple[tuple[int, float], ...] = ()  # CRZ condition terms

    def __post_init__(self):
        qs = self.qubits
        if len(qs) not in (1, 2):
            raise ValueError(f"gate acts on 1 or 2 qubits, got {qs}")
        if len(qs) == 2 and qs[0] == qs[1]:
            raise ValueError(f"2-qubit gate references one index twice: {qs}")
        if any(q < 0 for q in qs):
            raise ValueError(f"negative qubit index: {qs}")
        if not math.isfinite(self.angle):
            raise ValueError("gate angle must be finite")
        for _, a in self.terms:
            if not math.isfinite(a):
                raise ValueError("conditional angle must be finite")
        if self.kind is Kind.COMPOUND:
            if self.matrix is None:
                raise ValueError("compound gate needs a matrix")
            dim = 2 ** len(qs)
            if self.matrix.shape != (dim, dim):
                raise ValueError(
                    f"compound on {len(qs)} qubit(s) needs a {dim}x{dim} matrix"
                )
            defect = unitarity_defect(self.matrix)
            if defect > UNITARITY_TOL:
                raise ValueError(f"compound matrix unitarity defect {defect:.3g}")
            self.matrix.setflags(write=False)
        elif self.matrix is not None:
            raise ValueError(f"{self.kind} gate carries no matrix")

    def unitary(self) -> np.ndarray:
        """Unitary action with the first listed qubit as the first tensor factor.

        MEASURE has no unitary; CRZ resolves to a phase rotation only once the
        classical bits are known, so both are rejected here.
        """
        if self.kind is Kind.H:
            return H_MATRIX
        if self.kind is Kind.P:
            return phase_matrix(self.angle)
        if self.kind is Kind.CP:
            return cphase_matrix(self.angle)
        if self.kind is Kind.CNOT:
            return cnot_matrix(self.negated_control)
        if self.kind is Kind.SWAP:
            return SWAP_MATRIX
        if self.kind is Kind.COMPOUND:
            return self.matrix
        raise ValueError(f"{self.kind.value} gate has no fixed unitary")

    def dagger(self) -> "Gate":
        """Inverse gate. Measurements and classical conditions are not invertible."""
        if self.kind in (Kind.H, Kind.CNOT, Kind.SWAP):
            return self
        if self.kind is Kind.P:
            return Gate(Kind.P, self.qubits, angle=-self.angle)
        if self.kind is Kind.CP:
            return Gate(Kind.CP, self.qubits, angle=-self.angle)
        if self.kind is Kind.COMPOUND:
            return Gate(
                Kind.COMPOUND,
                self.qubits,
                matrix=np.ascontiguousarray(self.matrix.conj().T),
                label=_dagger_label(self.label),
            )
        raise ValueError(f"cannot invert {self.kind.value} gate")


def _dagger_label(label: str) -> str:
    if label.endswith("'"):
        return label[:-1]
    return label + "'"


def compound(qubits: tuple[int, ...], matrix: np.ndarray, label: str = "") -> Gate:
    return Gate(Kind.COMPOUND, qubits, matrix=np.ascontiguousarray(matrix, dtype=complex), label=label)
