"""Dense state-vector simulation with mid-circuit measurement and feedback.

Basis convention: line 0 is the most significant bit of the flat state
index, so ``state.reshape([2] * n)`` puts line t on axis t.

Amplitudes are complex128.  Measurement probabilities are accumulated with
numpy's pairwise summation in a fixed axis order, so seeded runs are
reproducible across platforms and thread counts.  Branch enumeration forks
the state at every measurement instead of sampling and prunes branches of
probability below 1e-14.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .gates import Gate, Kind, phase_matrix

NORM_DRIFT_ABORT = 1e-8
BRANCH_PRUNE = 1e-14
MAX_MEASURE_BRANCHES = 24
_NORM_CHECK_INTERVAL = 64


class SimulationError(RuntimeError):
    pass


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray
    classical_bits: dict[int, int] = field(default_factory=dict)

    @classmethod
    def basis(cls, n_qubits: int, index: int = 0) -> "StateVector":
        if not 0 <= index < 2**n_qubits:
            raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
        amps = np.zeros(2**n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy(), dict(self.classical_bits))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))


@dataclass
class RunOutcome:
    classical_bits: dict[int, int]
    probability: float = 1.0
    state: StateVector | None = None

    def bits_as_int(self, order: list[int]) -> int:
        """Assemble classical bits into an integer; order[i] contributes 2^i."""
        return sum(self.classical_bits.get(b, 0) << i for i, b in enumerate(order))


def _apply_1q(amps: np.ndarray, u: np.ndarray, q: int, n: int) -> np.ndarray:
    psi = amps.reshape([2] * n)
    psi = np.moveaxis(psi, q, 0).reshape(2, -1)
    psi = u @ psi
    return np.moveaxis(psi.reshape([2] * n), 0, q).reshape(-1)


def _apply_2q(amps: np.ndarray, u: np.ndarray, a: int, b: int, n: int) -> np.ndarray:
    psi = amps.reshape([2] * n)
    psi = np.moveaxis(psi, (a, b), (0, 1)).reshape(4, -1)
    psi = u @ psi
    return np.moveaxis(psi.reshape([2] * n), (0, 1), (a, b)).reshape(-1)


def _prob_one(amps: np.ndarray, q: int, n: int) -> float:
    psi = amps.reshape([2] * n)
    sl = np.moveaxis(psi, q, 0)[1]
    return float(np.sum(np.abs(sl) ** 2))


def _collapse(amps: np.ndarray, q: int, n: int, outcome: int, prob: float) -> np.ndarray:
    psi = amps.reshape([2] * n).copy()
    idx = [slice(None)] * n
    idx[q] = 1 - outcome
    psi[tuple(idx)] = 0.0
    return (psi / np.sqrt(prob)).reshape(-1)


def _crz_angle(gate: Gate, bits: dict[int, int]) -> float:
    return sum(theta for b, theta in gate.terms if bits.get(b, 0) == 1)


def apply_gate_kernel(state: StateVector, gate: Gate) -> StateVector:
    """In-place amplitude update for one unitary gate (not MEASURE)."""
    n = state.n_qubits
    if gate.kind is Kind.MEASURE:
        raise ValueError("measurement is handled by simulate/enumerate, not the kernel")
    if gate.kind is Kind.CRZ:
        theta = _crz_angle(gate, state.classical_bits)
        state.amplitudes = _apply_1q(state.amplitudes, phase_matrix(theta), gate.qubits[0], n)
        return state
    u = gate.unitary()
    if len(gate.qubits) == 1:
        state.amplitudes = _apply_1q(state.amplitudes, u, gate.qubits[0], n)
    else:
        state.amplitudes = _apply_2q(state.amplitudes, u, gate.qubits[0], gate.qubits[1], n)
    return state


def _as_state(circuit: Circuit, input_state: int | StateVector) -> StateVector:
    if isinstance(input_state, StateVector):
        if input_state.n_qubits != circuit.n_qubits:
            raise ValueError(
                f"state width {input_state.n_qubits} != circuit width {circuit.n_qubits}"
            )
        return input_state.copy()
    return StateVector.basis(circuit.n_qubits, input_state)


def _check_norm(state: StateVector) -> None:
    drift = abs(state.norm() - 1.0)
    if drift > NORM_DRIFT_ABORT:
        raise SimulationError(
            f"state norm drifted by {drift:.3g} (> {NORM_DRIFT_ABORT:g}); "
            "circuit contains a non-unitary gate or accumulated error"
        )


def simulate(
    circuit: Circuit,
    input_state: int | StateVector = 0,
    seed: int | None = 0,
    keep_state: bool = True,
    rng: np.random.Generator | None = None,
) -> RunOutcome:
    """Run the circuit once; measurements sample from the seeded generator."""
    state = _as_state(circuit, input_state)
    if rng is None:
        rng = np.random.default_rng(seed)
    n = state.n_qubits
    for i, g in enumerate(circuit.gates):
        if g.kind is Kind.MEASURE:
            q = g.qubits[0]
            p1 = _prob_one(state.amplitudes, q, n)
            outcome = 1 if rng.random() < p1 else 0
            prob = p1 if outcome else 1.0 - p1
            if prob <= 0.0:
                outcome = 1 - outcome
                prob = 1.0 - prob
            state.amplitudes = _collapse(state.amplitudes, q, n, outcome, prob)
            state.classical_bits[g.cbit] = outcome
        else:
            apply_gate_kernel(state, g)
            if i % _NORM_CHECK_INTERVAL == 0:
                _check_norm(state)
    _check_norm(state)
    return RunOutcome(
        classical_bits=dict(state.classical_bits),
        probability=1.0,
        state=state if keep_state else None,
    )


def enumerate_branches(
    circuit: Circuit,
    input_state: int | StateVector = 0,
    keep_states: bool = False,
) -> list[RunOutcome]:
    """Explore both outcomes of every measurement with exact probabilities."""
    n_meas = sum(1 for g in circuit.gates if g.kind is Kind.MEASURE)
    if n_meas > MAX_MEASURE_BRANCHES:
        raise SimulationError(
            f"{n_meas} measurements exceed the branch bound of {MAX_MEASURE_BRANCHES}"
        )
    outcomes: list[RunOutcome] = []
    n = circuit.n_qubits

    def run(state: StateVector, start: int, prob: float) -> None:
        for i in range(start, len(circuit.gates)):
            g = circuit.gates[i]
            if g.kind is Kind.MEASURE:
                q = g.qubits[0]
                p1 = _prob_one(state.amplitudes, q, n)
                for outcome, p in ((0, 1.0 - p1), (1, p1)):
                    if prob * p < BRANCH_PRUNE:
                        continue
                    branch = state.copy()
                    branch.amplitudes = _collapse(branch.amplitudes, q, n, outcome, p)
                    branch.classical_bits[g.cbit] = outcome
                    run(branch, i + 1, prob * p)
                return
            apply_gate_kernel(state, g)
        outcomes.append(
            RunOutcome(
                classical_bits=dict(state.classical_bits),
                probability=prob,
                state=state if keep_states else None,
            )
        )

    run(_as_state(circuit, input_state), 0, 1.0)
    return outcomes


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of a measurement-free circuit (small widths only)."""
    n = circuit.n_qubits
    if n > 12:
        raise ValueError("dense unitary limited to 12 qubits")
    dim = 2**n
    u = np.eye(dim, dtype=complex)
    for g in circuit.gates:
        if g.kind in (Kind.MEASURE, Kind.CRZ):
            raise ValueError(f"{g.kind.value} gate has no circuit unitary")
        gm = g.unitary()
        if len(g.qubits) == 1:
            u = _apply_1q_matrix(u, gm, g.qubits[0], n)
        else:
            u = _apply_2q_matrix(u, gm, g.qubits[0], g.qubits[1], n)
    return u


def _apply_1q_matrix(u: np.ndarray, gm: np.ndarray, q: int, n: int) -> np.ndarray:
    dim = u.shape[0]
    psi = u.reshape([2] * n + [dim])
    psi = np.moveaxis(psi, q, 0).reshape(2, -1)
    psi = gm @ psi
    return np.moveaxis(psi.reshape([2] * n + [dim]), 0, q).reshape(dim, dim)


def _apply_2q_matrix(u: np.ndarray, gm: np.ndarray, a: int, b: int, n: int) -> np.ndarray:
    dim = u.shape[0]
    psi = u.reshape([2] * n + [dim])
    psi = np.moveaxis(psi, (a, b), (0, 1)).reshape(4, -1)
    psi = gm @ psi
    return np.moveaxis(psi.reshape([2] * n + [dim]), (0, 1), (a, b)).reshape(dim, dim)
