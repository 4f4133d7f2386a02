"""Fourier-basis arithmetic circuits: adders, modular adder, mesh, controlled
register swap, and the controlled modular multiplier.

Register conventions
--------------------
A value register of n lines holds its most significant bit on its top line.
The Fourier form of the register is the natural-order transform produced by
the LNN QFT builder: on basis value b the amplitudes are
exp(2 pi i b y / 2^n) / 2^(n/2).  Adding a classical constant in this form
is one phase rotation per line: bit t carries angle 2 pi a 2^t / 2^n.

Modular adder line layout (width 2L+4, top to bottom):

    0 .. L-1   x register, with the active control bit x(i)_j on line L-1
    L          k_i
    L+1        kx           (set to x(i)_j AND k_i by the first Toffoli)
    L+2        MS           (sign ancilla)
    L+3 .. 2L+3  value register phi, L+1 lines, sign bit on top

Controlled Fourier additions walk their control qubit through the value
register as a chain of compound (controlled-phase + swap) gates, displacing
the register by one line per walk; the long swaps and walk boundary swaps
return every qubit home by the end of the adder, so adders chain directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit
from .gates import Gate, Kind, SWAP_MATRIX, cnot_matrix, cphase_matrix, phase_matrix
from .qft import emit_lnn_qft, emit_standard_qft

TAU = 2 * math.pi

V_MATRIX = np.array(
    [[0.5 + 0.5j, 0.5 - 0.5j], [0.5 - 0.5j, 0.5 + 0.5j]], dtype=complex
)  # sqrt(X)


def _ctrl_first(u: np.ndarray) -> np.ndarray:
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = u
    return m


def _ctrl_second(u: np.ndarray) -> np.ndarray:
    return SWAP_MATRIX @ _ctrl_first(u) @ SWAP_MATRIX


CV = _ctrl_first(V_MATRIX)
CV_DAG = _ctrl_first(V_MATRIX.conj().T)
X_MAT = np.array([[0, 1], [1, 0]], dtype=complex)
# lead gate of the controlled-swap link: CNOT off the pair's lower qubit,
# then the first interaction piece
CNOTCV = _ctrl_first(V_MATRIX) @ _ctrl_second(X_MAT)


def fourier_phase(value: int, bit: int, width: int) -> float:
    """Rotation angle a bit-``bit`` line receives when adding ``value``."""
    step = (value * (1 << bit)) % (1 << width)
    return TAU * step / (1 << width)


def build_fourier_add(width: int, addend: int, n_controls: int = 0) -> Circuit:
    """Fourier-space addition of a classical constant.

    Register on lines 0..width-1 (most significant on top), controls, if
    any, appended below the register.  Uncontrolled addition is one phase
    rotation per line (zero-angle rotations are kept so the gate count is
    data-independent); one control turns them into controlled phases; two
    controls use the standard five-gate doubly-controlled phase per line.
    """
    if not 0 <= addend < (1 << width):
        raise ValueError(f"addend {addend} out of range for width {width}")
    if n_controls not in (0, 1, 2):
        raise ValueError("0, 1 or 2 controls supported")
    layout = {"register": tuple(range(width))}
    if n_controls:
        layout["controls"] = tuple(range(width, width + n_controls))
    c = Circuit(width + n_controls, layout)
    for line in range(width):
        theta = fourier_phase(addend, width - 1 - line, width)
        if n_controls == 0:
            c.p(line, theta)
        elif n_controls == 1:
            c.cp(width, line, theta)
        else:
            c1, c2 = width, width + 1
            c.cp(c2, line, theta / 2)
            c.cnot(c1, c2)
            c.cp(c2, line, -theta / 2)
            c.cnot(c1, c2)
            c.cp(c1, line, theta / 2)
    return c


# -- modular adder ---------------------------------------------------------------


@dataclass(frozen=True)
class ModAddSpec:
    L: int
    N: int
    addend: int

    def __post_init__(self):
        if not 2 < self.N < (1 << self.L):
            raise ValueError(f"modulus {self.N} needs 2 < N < 2^{self.L}")
        if self.N % 2 == 0:
            raise ValueError("modulus must be odd")
        if not 0 <= self.addend < self.N:
            raise ValueError(f"addend {self.addend} out of range for modulus {self.N}")


def adder_layout(L: int) -> dict:
    return {
        "x": tuple(range(L)),
        "k": L,
        "kx": L + 1,
        "ms": L + 2,
        "phi": tuple(range(L + 3, 2 * L + 4)),
    }


def _toffoli5_lnn(c: Circuit, top: int):
    """Five-gate Toffoli on lines (top, top+1 -> top+2), LNN only.

    Net action: Toffoli followed by a swap of the two control lines; two of
    these in a row restore both the target and the control positions.
    """
    a, b, t = top, top + 1, top + 2
    c.compound((b, t), CV, "CV")
    c.cnot(a, b)
    c.compound((b, t), CV_DAG, "CV'")
    c.compound((a, b), SWAP_MATRIX @ cnot_matrix(False), "CNOTSWAP")
    c.compound((b, t), CV, "CV")


def _toffoli5_general(c: Circuit, q_a: int, q_b: int, target: int):
    """Five-gate Toffoli with arbitrary interactions; no net swap."""
    c.compound((q_b, target), CV, "CV")
    c.cnot(q_a, q_b)
    c.compound((q_b, target), CV_DAG, "CV'")
    c.cnot(q_a, q_b)
    c.compound((q_a, target), CV, "CV")


def _walk_down(c: Circuit, ctrl: int, n_bits: int, angle_of_bit):
    """Control descends through the register just below it.

    Control at line ``ctrl``; register bits at ctrl+1..ctrl+n_bits with the
    highest bit on top.  Emits one compound (controlled phase, then swap)
    per bit; the register shifts up one line, the control ends at the
    bottom.
    """
    for i in range(n_bits):
        bit = n_bits - 1 - i  # top line of the register holds its MSB
        theta = angle_of_bit(bit)
        p = ctrl + i
        c.compound((p, p + 1), SWAP_MATRIX @ cphase_matrix(theta), "CPSWAP")


def _walk_up(c: Circuit, ctrl: int, n_bits: int, angle_of_bit):
    """Mirror image of :func:`_walk_down`: control climbs, register sinks."""
    for i in range(n_bits):
        theta = angle_of_bit(i)  # bottom line of the register holds bit 0
        p = ctrl - 1 - i
        c.compound((p, p + 1), SWAP_MATRIX @ cphase_matrix(theta), "CPSWAP")


def _emit_lnn_mod_add(c: Circuit, spec: ModAddSpec):
    """Doubly-controlled modular addition, LNN variant, Fourier in/out."""
    L, N, a = spec.L, spec.N, spec.addend
    n = L + 1

    def ang(value):
        return lambda bit: fourier_phase(value, bit, n)

    def ang_neg(value):
        return lambda bit: -fourier_phase(value, bit, n)

    # kx := x(i)_j AND k_i; net swap of (x, k) undone by the closing Toffoli
    _toffoli5_lnn(c, L - 1)

    # controlled add of the addend: kx crosses MS, then descends through phi
    c.swap(L + 1, L + 2)
    _walk_down(c, L + 2, n, ang(a))
    # phi now on L+2..2L+2, kx parked at the bottom (2L+3), MS at L+1

    # subtract N (single-qubit rotations folded into the inverse transform)
    pending = {
        (2 * L + 2 - t): -fourier_phase(N, t, n) for t in range(n)
    }
    emit_lnn_qft(c, list(range(L + 2, 2 * L + 3)), inverse=True, pending=pending)

    # sign of b + a - N lands in the top bit; copy it to MS
    c.cnot(L + 2, L + 1)

    # long swap: MS descends to the far end of phi to control the next add
    for p in range(L + 1, 2 * L + 2):
        c.swap(p, p + 1)
    # phi on L+1..2L+1, MS at 2L+2

    emit_lnn_qft(c, list(range(L + 1, 2 * L + 2)))

    # add N back iff MS: MS climbs home through phi
    _walk_up(c, 2 * L + 2, n, ang(N))
    # phi on L+2..2L+2, MS at L+1

    # subtract the addend (kx) to recompute the sign for the MS reset
    _walk_up(c, 2 * L + 3, n, ang_neg(a))
    c.swap(L + 1, L + 2)  # kx home side, MS next to the sign bit
    # phi on L+3..2L+3, kx at L+1, MS at L+2

    emit_lnn_qft(c, list(range(L + 3, 2 * L + 4)), inverse=True)

    # reset MS: flip iff the sign bit is 0
    c.cnot(L + 3, L + 2, negated=True)

    # long swap: kx descends to the far end for the final addition
    for p in range(L + 1, 2 * L + 3):
        c.swap(p, p + 1)
    # MS back at L+1... phi on L+2..2L+2, kx at 2L+3

    emit_lnn_qft(c, list(range(L + 2, 2 * L + 3)))

    # add the addend back iff kx, then park kx and MS at home
    _walk_up(c, 2 * L + 3, n, ang(a))
    c.swap(L + 1, L + 2)
    # phi home on L+3..2L+3, kx at L+1, MS at L+2

    # reset kx and undo the control swap left by the opening Toffoli
    _toffoli5_lnn(c, L - 1)


def _emit_general_mod_add(c: Circuit, spec: ModAddSpec, x_line: int | None = None):
    """Arbitrary-interaction variant: static layout, controlled-phase fans.

    The value register keeps the standard (bit-reversing) transform as its
    Fourier convention, which leaves the computational bit order intact
    after every inverse transform; bit t's rotations then live on line
    phi_top + t, and the sign bit surfaces on the register's top line.
    """
    L, N, a = spec.L, spec.N, spec.addend
    n = L + 1
    kx, ms, top = L + 1, L + 2, L + 3
    phi = list(range(top, top + n))
    if x_line is None:
        x_line = L - 1

    _toffoli5_general(c, x_line, L, kx)

    # add a (iff kx) and subtract N, merged per line into one compound
    for t in range(n):
        m = cphase_matrix(fourier_phase(a, t, n)) @ np.kron(
            np.eye(2), phase_matrix(-fourier_phase(N, t, n))
        )
        c.compound((kx, top + t), m, "PCP")

    emit_standard_qft(c, phi, inverse=True)
    c.cnot(top, ms)
    emit_standard_qft(c, phi)

    for t in range(n):
        c.cp(ms, top + t, fourier_phase(N, t, n))
    for t in range(n):
        c.cp(kx, top + t, -fourier_phase(a, t, n))

    emit_standard_qft(c, phi, inverse=True)
    c.cnot(top, ms, negated=True)
    emit_standard_qft(c, phi)

    for t in range(n):
        c.cp(kx, top + t, fourier_phase(a, t, n))

    _toffoli5_general(c, x_line, L, kx)


def build_mod_add(spec: ModAddSpec, variant: str = "lnn", mode: str = "chained") -> Circuit:
    """Circuit adding ``spec.addend`` modulo ``spec.N`` to the value register
    iff both control bits are set.

    ``chained`` expects and leaves the value register in Fourier form (the
    counted circuit); ``standalone`` wraps it in the matching transform pair
    so basis states map to basis states.
    """
    if variant not in ("lnn", "general"):
        raise ValueError(f"unknown variant {variant!r}")
    if mode not in ("chained", "standalone"):
        raise ValueError(f"unknown mode {mode!r}")
    L = spec.L
    c = Circuit(2 * L + 4, adder_layout(L))
    phi = list(range(L + 3, 2 * L + 4))
    if variant == "lnn":
        if mode == "standalone":
            emit_lnn_qft(c, phi)
        _emit_lnn_mod_add(c, spec)
        if mode == "standalone":
            emit_lnn_qft(c, phi, inverse=True)
    else:
        if mode == "standalone":
            emit_standard_qft(c, phi)
        _emit_general_mod_add(c, spec)
        if mode == "standalone":
            emit_standard_qft(c, phi, inverse=True)
    return c


# -- mesh and controlled register swap --------------------------------------------


def build_mesh(L: int) -> Circuit:
    """Interleave [a_1..a_L, b_1..b_L] into [a_1, b_1, a_2, b_2, ...]."""
    c = Circuit(max(2 * L, 1), {"a": tuple(range(L)), "b": tuple(range(L, 2 * L))})
    _emit_mesh(c, offset=0, L=L)
    return c


def _emit_mesh(c: Circuit, offset: int, L: int, gap: int = 0):
    """Mesh with the b register starting ``gap`` extra lines below the a
    register; each b qubit crosses the gap on its way up."""
    for j in range(1, L + 1):
        src = offset + L + gap + (j - 1)
        dst = offset + 2 * j - 1
        for p in range(src, dst, -1):
            c.swap(p - 1, p)


def _emit_unmesh(c: Circuit, offset: int, L: int, gap: int = 0):
    """Inverse interleave for pairs sitting at (offset+2j-2, offset+2j-1),
    sinking each b qubit back below the a register (plus ``gap`` lines)."""
    for j in range(L, 0, -1):
        src = offset + 2 * j - 1
        dst = offset + L + gap + (j - 1) - 1
        for p in range(src, dst + 1):
            c.swap(p, p + 1)


def _emit_cswap_links(c: Circuit, L: int, top: int = 0):
    """Controlled-swap chain over meshed pairs with the control descending
    from line ``top``.  Link j consumes the pair at (top+2j-1, top+2j) and
    leaves it one line higher with the control below it; six gates per link,
    effective depth 4 when chained."""
    for j in range(L):
        t = top + 2 * j
        A, B = t + 1, t + 2
        c.compound((A, B), CNOTCV, "CNOTCV")
        c.cnot(t, A)
        c.compound((A, B), CV_DAG, "CV'")
        c.compound((t, A), SWAP_MATRIX @ cnot_matrix(False), "CNOTSWAP")
        c.compound((A, B), SWAP_MATRIX @ CV, "CVSWAP")
        c.cnot(A, t)


def build_cswap_registers(L: int) -> Circuit:
    """Swap two L-qubit registers iff the control qubit is set.

    Input layout: control on line 0, register A on 1..L, register B on
    L+1..2L.  Output layout (the walk displaces the block): A on 0..L-1,
    B on L..2L-1, control on line 2L.
    """
    c = Circuit(
        2 * L + 1,
        {
            "control": 0,
            "a": tuple(range(1, L + 1)),
            "b": tuple(range(L + 1, 2 * L + 1)),
            "a_out": tuple(range(L)),
            "b_out": tuple(range(L, 2 * L)),
            "control_out": 2 * L,
        },
    )
    _emit_mesh(c, offset=1, L=L)
    _emit_cswap_links(c, L, top=0)
    _emit_unmesh(c, offset=0, L=L)
    return c


# -- controlled modular multiplier -------------------------------------------------


@dataclass(frozen=True)
class ModMulSpec:
    L: int
    N: int
    multiplier: int

    def __post_init__(self):
        if not 2 < self.N < (1 << self.L):
            raise ValueError(f"modulus {self.N} needs 2 < N < 2^{self.L}")
        if math.gcd(self.multiplier % self.N, self.N) != 1:
            raise ValueError(
                f"multiplier {self.multiplier} not invertible modulo {self.N}"
            )

    @property
    def inverse_multiplier(self) -> int:
        return pow(self.multiplier % self.N, -1, self.N)


def build_mod_mul(spec: ModMulSpec, variant: str = "lnn") -> Circuit:
    """Multiply the x register by ``spec.multiplier`` mod N iff k = 1.

    Width 2L+4 with the modular-adder layout; the value register is a
    zeroed temporary that enters and leaves in Fourier form (|phi(0)> in
    the complete circuit).  Three stages: accumulate a*x into the
    temporary by L doubly-controlled modular additions, swap the registers
    iff k, then subtract a^{-1} times the new x register to restore the
    temporary to zero.
    """
    if variant not in ("lnn", "general"):
        raise ValueError(f"unknown variant {variant!r}")
    L, N = spec.L, spec.N
    a, a_inv = spec.multiplier % N, spec.inverse_multiplier
    c = Circuit(2 * L + 4, adder_layout(L))
    if variant == "lnn":
        _emit_lnn_mod_mul(c, spec, a, a_inv)
    else:
        _emit_general_mod_mul(c, spec, a, a_inv)
    return c


def _x_rotation(c: Circuit, L: int):
    """Send the consumed control bit to the back of the x queue; the next
    bit arrives on the hot seat (line L-1) with the first swap."""
    for p in range(L - 1, 0, -1):
        c.swap(p - 1, p)


def _emit_lnn_mod_mul(c: Circuit, spec: ModMulSpec, a: int, a_inv: int):
    L, N = spec.L, spec.N
    phi = list(range(L + 3, 2 * L + 4))

    for j in range(L):
        _emit_lnn_mod_add(c, ModAddSpec(L, N, (a << j) % N))
        _x_rotation(c, L)

    # leave Fourier space and bring the control to the top of the block
    emit_lnn_qft(c, phi, inverse=True)
    for p in range(L, 0, -1):
        c.swap(p - 1, p)

    # interleave x with the temporary's value bits (crossing kx, MS and the
    # sign line), controlled-swap with k walking down, and un-interleave
    _emit_mesh(c, offset=1, L=L, gap=3)
    _emit_cswap_links(c, L, top=0)
    _emit_unmesh(c, offset=0, L=L, gap=4)
    # the sinking value bits carry k, kx, MS and the sign line back home

    emit_lnn_qft(c, phi)

    for j in range(L):
        _emit_lnn_mod_add(c, ModAddSpec(L, N, (N - ((a_inv << j) % N)) % N))
        _x_rotation(c, L)


def _emit_general_mod_mul(c: Circuit, spec: ModMulSpec, a: int, a_inv: int):
    # x lines never move: each addition's Toffoli reaches bit j directly
    L, N = spec.L, spec.N
    phi = list(range(L + 3, 2 * L + 4))

    for j in range(L):
        _emit_general_mod_add(c, ModAddSpec(L, N, (a << j) % N), x_line=L - 1 - j)

    emit_standard_qft(c, phi, inverse=True)
    _emit_general_cswap(c, L)
    emit_standard_qft(c, phi)

    for j in range(L):
        _emit_general_mod_add(
            c, ModAddSpec(L, N, (N - ((a_inv << j) % N)) % N), x_line=L - 1 - j
        )


def _emit_general_cswap(c: Circuit, L: int):
    """Fredkin chain between x (0..L-1) and the temporary's value bits,
    controlled on k; arbitrary interactions, six gates per pair."""
    k = L
    for t in range(L):
        xa = L - 1 - t  # x bit t
        vb = 2 * L + 3 - t  # value bit t
        c.compound((xa, vb), CNOTCV, "CNOTCV")
        c.cnot(k, xa)
        c.compound((xa, vb), CV_DAG, "CV'")
        c.cnot(k, xa)
        c.compound((k, vb), CV, "CV")
        c.cnot(vb, xa)
