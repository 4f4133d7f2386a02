"""Canonical (Cartan) decomposition of 2-qubit unitaries and compound fusion.

Any 4x4 unitary U factors as

    U = exp(i phase) * (postA (x) postB) * Ud(ax, ay, az) * (preA (x) preB)

with Ud = exp[i (ax XX + ay YY + az ZZ)], the locals in SU(2), and the
interaction coordinates normalised to the Weyl chamber
pi/4 >= ax >= ay >= |az| (az >= 0 on the ax = pi/4 face).

The decomposition works in the magic (Bell) basis, where Ud is diagonal and
local unitaries are real orthogonal: with u = M^dag U M, the symmetric
unitary u u^T is diagonalised by a real orthogonal frame whose eigenphases
carry the interaction content, and the frames recover the locals.

``fuse_compound`` is the gate-merging pass: maximal runs of consecutive
gates supported on one adjacent line pair collapse into a single compound
gate (runs of single-qubit gates with no two-qubit partner collapse into a
one-qubit compound).  Measurements and classically conditioned gates never
join a run.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .circuit import Circuit
from .gates import Gate, Kind, SWAP_MATRIX, compound, unitarity_defect

MAGIC = np.array(
    [
        [1, 1j, 0, 0],
        [0, 0, 1j, 1],
        [0, 0, 1j, -1],
        [1, -1j, 0, 0],
    ],
    dtype=complex,
) / math.sqrt(2)

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_CLUSTER_TOL = 1e-8
_EPS = 1e-9


class DecompositionError(ValueError):
    pass


@dataclass
class CanonicalDecomposition:
    alpha: tuple[float, float, float]
    pre_locals: tuple[np.ndarray, np.ndarray]
    post_locals: tuple[np.ndarray, np.ndarray]
    global_phase: float

    def interaction(self) -> np.ndarray:
        return interaction_unitary(*self.alpha)

    def reassemble(self) -> np.ndarray:
        post = np.kron(self.post_locals[0], self.post_locals[1])
        pre = np.kron(self.pre_locals[0], self.pre_locals[1])
        return cmath.exp(1j * self.global_phase) * post @ self.interaction() @ pre


def interaction_unitary(ax: float, ay: float, az: float) -> np.ndarray:
    """exp[i(ax XX + ay YY + az ZZ)] via its magic-basis diagonal."""
    lam = np.array([ax - ay + az, -ax + ay + az, ax + ay - az, -ax - ay - az])
    return MAGIC @ np.diag(np.exp(1j * lam)) @ MAGIC.conj().T


def _joint_orthogonal_frame(s: np.ndarray) -> np.ndarray:
    """Real orthogonal Q diagonalising the symmetric unitary S.

    Re(S) and Im(S) commute; eigenvector clusters of Re(S) whose eigenvalues
    agree within tolerance are re-diagonalised against Im(S).
    """
    a = np.real(s)
    b = np.imag(s)
    a = (a + a.T) / 2
    b = (b + b.T) / 2
    vals, vecs = np.linalg.eigh(a)
    q = np.array(vecs)
    i = 0
    while i < 4:
        j = i
        while j + 1 < 4 and abs(vals[j + 1] - vals[i]) < _CLUSTER_TOL:
            j += 1
        if j > i:
            block = q[:, i : j + 1]
            sub = block.T @ b @ block
            _, w = np.linalg.eigh((sub + sub.T) / 2)
            q[:, i : j + 1] = block @ w
        i = j + 1
    return q


def _su2_factor_pair(k: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Split K = exp(i phi) A (x) B with A, B in SU(2)."""
    t = k.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    u, sv, vh = np.linalg.svd(t)
    if sv[1] > 1e-8:
        raise DecompositionError(
            f"matrix is not a tensor product of locals (residual {sv[1]:.3g})"
        )
    a = (u[:, 0] * math.sqrt(sv[0])).reshape(2, 2)
    b = (vh[0, :] * math.sqrt(sv[0])).reshape(2, 2)
    a = a / cmath.sqrt(np.linalg.det(a))
    b = b / cmath.sqrt(np.linalg.det(b))
    phi = cmath.phase(np.trace(k @ np.kron(a, b).conj().T) / 4)
    return a, b, phi


# -- Weyl-chamber normalisation ------------------------------------------------
#
# Each move rewrites (alpha, post, pre, phase) without changing the product.
# Shifting alpha_k by -pi/2 peels an i*(sigma_k (x) sigma_k) factor into the
# pre locals; axis swaps and pair sign flips conjugate Ud by single-qubit
# Cliffords absorbed into both locals.

_RZ90 = np.diag([cmath.exp(-1j * math.pi / 4), cmath.exp(1j * math.pi / 4)])
_RX90 = np.array([[1, -1j], [-1j, 1]], dtype=complex) / math.sqrt(2)
_RY90 = np.array([[1, -1], [1, 1]], dtype=complex) / math.sqrt(2)
_SWAP_CONJ = {(0, 1): _RZ90, (1, 2): _RX90, (0, 2): _RY90}
_AXES = ("x", "y", "z")


def _apply_shift(state, k: int, n: int):
    """alpha_k -= n*pi/2, peeling interaction factors into the pre locals."""
    if n == 0:
        return state
    alpha, post, pre, phase = state
    sig = -1j * PAULI[_AXES[k]]
    pa, pb = pre
    if n > 0:
        for _ in range(n):
            pa, pb = sig @ pa, sig @ pb
            phase -= math.pi / 2
    else:
        sd = sig.conj().T
        for _ in range(-n):
            pa, pb = sd @ pa, sd @ pb
            phase += math.pi / 2
    alpha = tuple(a - (math.pi / 2) * n if i == k else a for i, a in enumerate(alpha))
    return alpha, post, (pa, pb), phase


def _apply_swap(state, j: int, k: int):
    alpha, post, pre, phase = state
    c = _SWAP_CONJ[(min(j, k), max(j, k))]
    cd = c.conj().T
    alpha = list(alpha)
    alpha[j], alpha[k] = alpha[k], alpha[j]
    post = (post[0] @ cd, post[1] @ cd)
    pre = (c @ pre[0], c @ pre[1])
    return tuple(alpha), post, pre, phase


def _apply_flip(state, j: int, k: int):
    alpha, post, pre, phase = state
    third = ({0, 1, 2} - {j, k}).pop()
    s = -1j * PAULI[_AXES[third]]
    sd = s.conj().T
    alpha = tuple(-a if i in (j, k) else a for i, a in enumerate(alpha))
    post = (post[0] @ sd, post[1])
    pre = (s @ pre[0], pre[1])
    return alpha, post, pre, phase


def _in_chamber(alpha) -> bool:
    ax, ay, az = alpha
    if not (-_EPS <= ax <= math.pi / 4 + _EPS):
        return False
    if not (ax + _EPS >= ay >= abs(az) - _EPS):
        return False
    if ax > math.pi / 4 - _EPS and az < -_EPS:
        return False
    return ay >= -_EPS


def _canonicalize(alpha, post, pre, phase):
    state = (alpha, post, pre, phase)
    # fold every coordinate into (-pi/4, pi/4]
    for k in range(3):
        n = math.floor((state[0][k] + math.pi / 4 - 1e-12) / (math.pi / 2))
        if n:
            state = _apply_shift(state, k, n)
    # sort by |coordinate| descending
    for pos in range(3):
        best = max(range(pos, 3), key=lambda i: abs(state[0][i]))
        if best != pos:
            state = _apply_swap(state, pos, best)
    # pair flips push any remaining sign onto the smallest coordinate
    neg = [k for k in range(3) if state[0][k] < -1e-15]
    if len(neg) >= 2:
        state = _apply_flip(state, neg[0], neg[1])
        neg = [k for k in range(3) if state[0][k] < -1e-15]
    if len(neg) == 1 and neg[0] != 2:
        state = _apply_flip(state, neg[0], 2)
    # on the ax = pi/4 face, (pi/4, ay, az) ~ (pi/4, ay, -az): keep az >= 0
    if state[0][0] > math.pi / 4 - _EPS and state[0][2] < -_EPS:
        state = _apply_shift(state, 0, 1)
        state = _apply_flip(state, 0, 2)
    if not _in_chamber(state[0]):
        raise DecompositionError(f"Weyl normalisation failed at alpha={state[0]}")
    return state


def canonical_decompose(u: np.ndarray) -> CanonicalDecomposition:
    """Canonical decomposition of a 4x4 unitary (non-unique; only the
    reassembly contract and Weyl normalisation are promised)."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise DecompositionError(f"expected a 4x4 matrix, got {u.shape}")
    defect = unitarity_defect(u)
    if defect > 1e-10:
        raise DecompositionError(f"matrix is not unitary (defect {defect:.3g})")

    phase0 = cmath.phase(np.linalg.det(u)) / 4
    u4 = u * cmath.exp(-1j * phase0)
    m = MAGIC.conj().T @ u4 @ MAGIC
    s = m @ m.T

    q = _joint_orthogonal_frame(s)
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    theta = np.angle(np.einsum("ji,jk,ki->i", q, s, q))
    lam = theta / 2
    if round(float(np.sum(lam)) / math.pi) % 2:
        # det(D) must be +1 so the second frame lands in SO(4);
        # a pi shift leaves D^2 untouched
        lam[0] += math.pi
    o2 = np.diag(np.exp(-1j * lam)) @ q.T @ m
    if np.max(np.abs(np.imag(o2))) > 1e-6:
        raise DecompositionError("second orthogonal frame came out complex")
    o2 = np.real(o2)

    ax = (lam[0] + lam[2]) / 2
    ay = (lam[1] + lam[2]) / 2
    az = (lam[0] + lam[1]) / 2

    post_a, post_b, phi1 = _su2_factor_pair(MAGIC @ q @ MAGIC.conj().T)
    pre_a, pre_b, phi2 = _su2_factor_pair(MAGIC @ o2 @ MAGIC.conj().T)

    alpha, post, pre, phase = _canonicalize(
        (ax, ay, az),
        (post_a, post_b),
        (pre_a, pre_b),
        phase0 + phi1 + phi2,
    )
    return CanonicalDecomposition(alpha, pre, post, math.remainder(phase, 2 * math.pi))


# -- compound fusion -------------------------------------------------------------


class _Run:
    __slots__ = ("pair", "gates", "start", "merged", "open")

    def __init__(self, pair: tuple[int, ...], gate: Gate, start: int):
        self.pair = pair
        self.gates = [gate]
        self.start = start
        self.merged = False


def _embed(gate: Gate, pair: tuple[int, int]) -> np.ndarray:
    u = gate.unitary()
    if len(gate.qubits) == 1:
        if gate.qubits[0] == pair[0]:
            return np.kron(u, np.eye(2))
        return np.kron(np.eye(2), u)
    if gate.qubits == pair:
        return u
    return SWAP_MATRIX @ u @ SWAP_MATRIX


def _run_gate(run: _Run) -> Gate:
    if len(run.gates) == 1:
        return run.gates[0]
    label = "".join(
        g.label if g.kind is Kind.COMPOUND else g.kind.value for g in run.gates
    )
    dim = 2 ** len(run.pair)
    m = np.eye(dim, dtype=complex)
    if len(run.pair) == 1:
        for g in run.gates:
            m = g.unitary() @ m
    else:
        for g in run.gates:
            m = _embed(g, run.pair) @ m
    return compound(run.pair, m, label)


def fuse_compound(circuit: Circuit) -> Circuit:
    """Merge maximal same-adjacent-pair runs into single compound gates.

    Runs may not contain measurements or classically conditioned gates.  A
    pending single-qubit run attaches to the first adjacent-pair run that
    reaches it (left attachment); non-adjacent two-qubit gates close runs on
    their qubits and stay as they are.
    """
    runs: list[_Run] = []
    open_on: dict[int, _Run] = {}

    def close_on(q: int):
        run = open_on.get(q)
        if run is not None:
            for qq in run.pair:
                if open_on.get(qq) is run:
                    del open_on[qq]

    for i, g in enumerate(circuit.gates):
        qs = g.qubits
        fusable = g.kind not in (Kind.MEASURE, Kind.CRZ) and (
            len(qs) == 1 or abs(qs[0] - qs[1]) == 1
        )
        if not fusable:
            for q in qs:
                close_on(q)
            runs.append(_Run(qs, g, i))
            continue
        if len(qs) == 1:
            run = open_on.get(qs[0])
            if run is not None:
                run.gates.append(g)
            else:
                run = _Run(qs, g, i)
                runs.append(run)
                open_on[qs[0]] = run
            continue
        pair = (min(qs), max(qs))
        ra, rb = open_on.get(pair[0]), open_on.get(pair[1])
        if ra is not None and ra is rb and ra.pair == pair:
            ra.gates.append(g)
            continue
        absorbed: list[_Run] = []
        for r in (ra, rb) if ra is not rb else (ra,):
            if r is None:
                continue
            if len(r.pair) == 1 and r.pair[0] in pair:
                r.merged = True
                absorbed.append(r)
                del open_on[r.pair[0]]
            else:
                for qq in r.pair:
                    if open_on.get(qq) is r:
                        del open_on[qq]
        absorbed.sort(key=lambda r: r.start)
        new = _Run(pair, g, i)
        if absorbed:
            new.gates = [gg for r in absorbed for gg in r.gates] + [g]
            new.start = absorbed[0].start
        runs.append(new)
        open_on[pair[0]] = open_on[pair[1]] = new

    out = Circuit(circuit.n_qubits, circuit.layout)
    for run in sorted((r for r in runs if not r.merged), key=lambda r: r.start):
        out.append(_run_gate(run))
    return out
