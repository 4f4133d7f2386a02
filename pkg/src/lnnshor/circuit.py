"""Circuit container, greedy layer packing, LNN validation and resource counts.

Depth convention: gates are emitted in program order and packed
as-soon-as-possible -- a gate enters the earliest layer in which all of its
qubits (and, for classical feedback, its classical bits) are free and no
earlier gate on those resources is still pending.  depth = number of layers,
gate_count = number of gates with each compound gate counting as one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gates import Gate, Kind, compound


@dataclass
class Violation:
    layer: int
    gate_index: int
    gate: Gate

    def __str__(self):
        qs = ",".join(str(q) for q in self.gate.qubits)
        return (
            f"layer {self.layer}: gate #{self.gate_index} "
            f"{self.gate.kind.value} on non-adjacent qubits ({qs})"
        )


@dataclass
class ResourceReport:
    gates: int
    depth: int
    histogram: dict[str, int]
    lnn_valid: bool

    def as_dict(self) -> dict:
        return {
            "gates": self.gates,
            "depth": self.depth,
            "histogram": dict(self.histogram),
            "lnn_valid": self.lnn_valid,
        }


class Circuit:
    """Ordered gate list over a fixed qubit line, plus register-layout metadata.

    ``layout`` maps register names to line indices (int or tuple of ints); it
    is carried for documentation and the text format, and has no effect on
    simulation.
    """

    def __init__(self, n_qubits: int, layout: dict | None = None):
        if n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        self.n_qubits = n_qubits
        self.gates: list[Gate] = []
        self.layout: dict = dict(layout or {})
        self._layers_cache: list[list[int]] | None = None

    # -- construction helpers -------------------------------------------------

    def append(self, gate: Gate) -> "Circuit":
        for q in gate.qubits:
            if q >= self.n_qubits:
                raise ValueError(
                    f"gate on qubit {q} exceeds circuit width {self.n_qubits}"
                )
        self.gates.append(gate)
        self._layers_cache = None
        return self

    def h(self, q: int):
        return self.append(Gate(Kind.H, (q,)))

    def p(self, q: int, theta: float):
        return self.append(Gate(Kind.P, (q,), angle=theta))

    def cp(self, a: int, b: int, theta: float):
        return self.append(Gate(Kind.CP, (a, b), angle=theta))

    def cnot(self, control: int, target: int, negated: bool = False):
        return self.append(Gate(Kind.CNOT, (control, target), negated_control=negated))

    def swap(self, a: int, b: int):
        return self.append(Gate(Kind.SWAP, (a, b)))

    def compound(self, qubits: tuple[int, ...], matrix: np.ndarray, label: str = ""):
        return self.append(compound(qubits, matrix, label))

    def measure(self, q: int, cbit: int):
        return self.append(Gate(Kind.MEASURE, (q,), cbit=cbit))

    def crz(self, q: int, terms: list[tuple[int, float]]):
        return self.append(Gate(Kind.CRZ, (q,), terms=tuple(terms)))

    # -- derived structure ----------------------------------------------------

    def _layer_indices(self) -> list[list[int]]:
        if self._layers_cache is None:
            avail_q: dict[int, int] = {}
            avail_c: dict[int, int] = {}
            layers: list[list[int]] = []
            for i, g in enumerate(self.gates):
                start = 0
                for q in g.qubits:
                    start = max(start, avail_q.get(q, 0))
                if g.kind is Kind.CRZ:
                    for b, _ in g.terms:
                        start = max(start, avail_c.get(b, 0))
                elif g.kind is Kind.MEASURE:
                    start = max(start, avail_c.get(g.cbit, 0))
                while len(layers) <= start:
                    layers.append([])
                layers[start].append(i)
                for q in g.qubits:
                    avail_q[q] = start + 1
                if g.kind is Kind.MEASURE:
                    avail_c[g.cbit] = start + 1
            self._layers_cache = layers
        return self._layers_cache

    def layers(self) -> list[list[Gate]]:
        return [[self.gates[i] for i in layer] for layer in self._layer_indices()]

    @property
    def depth(self) -> int:
        return len(self._layer_indices())

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    def layer_of(self) -> list[int]:
        """Layer index of every gate, in emission order."""
        out = [0] * len(self.gates)
        for ell, layer in enumerate(self._layer_indices()):
            for i in layer:
                out[i] = ell
        return out

    # -- composition ----------------------------------------------------------

    def copy(self) -> "Circuit":
        c = Circuit(self.n_qubits, self.layout)
        c.gates = list(self.gates)
        return c

    def extend(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise ValueError(
                f"width mismatch: {self.n_qubits} vs {other.n_qubits}"
            )
        self.gates.extend(other.gates)
        self._layers_cache = None
        return self

    def reversed(self) -> "Circuit":
        c = Circuit(self.n_qubits, self.layout)
        for g in reversed(self.gates):
            c.append(g.dagger())
        return c


def compose(a: Circuit, b: Circuit) -> Circuit:
    """Concatenate two equal-width circuits; layers re-pack greedily."""
    return a.copy().extend(b)


def reverse(a: Circuit) -> Circuit:
    """Inverse circuit: reversed gate order with each gate conjugated."""
    return a.reversed()


def validate_lnn(circuit: Circuit) -> list[Violation]:
    """All 2-qubit gates acting on non-adjacent line indices, with positions."""
    violations = []
    layer = circuit.layer_of()
    for i, g in enumerate(circuit.gates):
        if len(g.qubits) == 2 and abs(g.qubits[0] - g.qubits[1]) != 1:
            violations.append(Violation(layer[i], i, g))
    return violations


def resources(circuit: Circuit) -> ResourceReport:
    hist: dict[str, int] = {}
    for g in circuit.gates:
        hist[g.kind.value] = hist.get(g.kind.value, 0) + 1
    return ResourceReport(
        gates=circuit.gate_count,
        depth=circuit.depth,
        histogram=hist,
        lnn_valid=not validate_lnn(circuit),
    )
