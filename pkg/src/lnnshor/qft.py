"""Quantum Fourier transform builders.

Two variants over the same transform:

* ``standard`` -- Hadamards and controlled phase rotations between arbitrary
  pairs.  Output amplitudes carry the transform with the qubit significance
  order inverted (the usual circuit without trailing order-restoring swaps).
* ``lnn`` -- a cascade of two-qubit compound gates (controlled phase fused
  with a swap, Hadamards folded into the boundary compounds) in which every
  interaction is nearest-neighbour.  The cascade's swaps realise the
  bit-reversal internally, so input and output significance order coincide.

Both variants count L(L-1)/2 gates once fused; the LNN cascade packs to
depth 2L-3 for L >= 2.

Line 0 of the register is the most significant bit: on basis state |k> the
transform produces sum_j exp(2 pi i j k / 2^n) |j> / 2^(n/2).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit
from .gates import Gate, H_MATRIX, Kind, SWAP_MATRIX, cphase_matrix, phase_matrix


@dataclass(frozen=True)
class QftSpec:
    width: int
    variant: str = "lnn"  # "lnn" | "standard"
    inverse: bool = False

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("QFT width must be >= 1")
        if self.variant not in ("lnn", "standard"):
            raise ValueError(f"unknown QFT variant {self.variant!r}")


def _kron_first(u: np.ndarray) -> np.ndarray:
    return np.kron(u, np.eye(2))


def _kron_second(u: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(2), u)


def lnn_qft_sequence(lines: list[int], inverse: bool = False):
    """Compound-gate sequence of the LNN QFT on the given lines.

    ``lines[0]`` is the register's most significant bit.  Yields
    ``(qubit_pair, matrix, label)`` triples in emission order.  For a
    single-line register the lone Hadamard is yielded as ``((line,), None,
    "H")`` and must be emitted as a plain H gate.
    """
    n = len(lines)
    if n == 1:
        yield (lines[0],), None, "H"
        return
    seq = []
    for c in range(n - 1):
        for s in range(n - 1 - c):
            m = SWAP_MATRIX @ cphase_matrix(math.pi / 2 ** (s + 1))
            label = "CPSWAP"
            if s == 0:
                m = m @ _kron_first(H_MATRIX)
                label = "H" + label
            if c == n - 2:
                # last cascade has one gate; the final qubit's Hadamard
                # lands after its swap
                m = _kron_first(H_MATRIX) @ m
                label = label + "H"
            seq.append(((lines[s], lines[s + 1]), m, label))
    if inverse:
        for qs, m, label in reversed(seq):
            yield qs, np.ascontiguousarray(m.conj().T), label + "'"
    else:
        yield from seq


def standard_qft_sequence(lines: list[int], inverse: bool = False):
    """Primitive-gate sequence of the arbitrary-interaction QFT."""
    n = len(lines)
    seq: list[Gate] = []
    for i in range(n):
        seq.append(Gate(Kind.H, (lines[i],)))
        for j in range(i + 1, n):
            seq.append(
                Gate(Kind.CP, (lines[i], lines[j]), angle=math.pi / 2 ** (j - i))
            )
    if inverse:
        for g in reversed(seq):
            yield g.dagger()
    else:
        yield from seq


def emit_lnn_qft(
    circuit: Circuit,
    lines: list[int],
    inverse: bool = False,
    pending: dict[int, float] | None = None,
) -> None:
    """Append an LNN QFT, folding pending single-qubit phases into the first
    compound that touches each line (used by the arithmetic builders to merge
    Fourier-addition rotations with a following transform)."""
    pending = dict(pending or {})
    for qs, m, label in lnn_qft_sequence(lines, inverse):
        if m is None:
            if pending.get(qs[0]):
                circuit.compound(
                    qs,
                    H_MATRIX @ phase_matrix(pending.pop(qs[0])),
                    "PH",
                )
            else:
                circuit.h(qs[0])
            continue
        pre = None
        if qs[0] in pending:
            pre = _kron_first(phase_matrix(pending.pop(qs[0])))
        if qs[1] in pending:
            p2 = _kron_second(phase_matrix(pending.pop(qs[1])))
            pre = p2 if pre is None else pre @ p2
        if pre is not None:
            m = m @ pre
            label = "P" + label
        circuit.compound(qs, m, label)
    for line, theta in pending.items():
        circuit.p(line, theta)


def emit_standard_qft(
    circuit: Circuit, lines: list[int], inverse: bool = False
) -> None:
    for g in standard_qft_sequence(lines, inverse):
        circuit.append(g)


def build_qft(spec: QftSpec) -> Circuit:
    """Build a QFT circuit per the spec; the register spans all lines."""
    c = Circuit(spec.width, layout={"register": tuple(range(spec.width))})
    lines = list(range(spec.width))
    if spec.variant == "lnn":
        emit_lnn_qft(c, lines, spec.inverse)
    else:
        emit_standard_qft(c, lines, spec.inverse)
    return c


def dft_matrix(n_qubits: int, inverse: bool = False) -> np.ndarray:
    """Reference transform matrix on the flat basis index (line 0 = MSB)."""
    dim = 2**n_qubits
    j, k = np.meshgrid(np.arange(dim), np.arange(dim), indexing="ij")
    sign = -1.0 if inverse else 1.0
    return np.exp(sign * 2j * np.pi * j * k / dim) / math.sqrt(dim)


def bit_reversal_permutation(n_qubits: int) -> np.ndarray:
    """Permutation matrix sending each basis index to its bit reversal."""
    dim = 2**n_qubits
    perm = np.zeros((dim, dim))
    for k in range(dim):
        rev = int(format(k, f"0{n_qubits}b")[::-1], 2)
        perm[rev, k] = 1.0
    return perm
