"""Builders for the showcase ensemble programs.

Each builder returns canonical program text. Outputs are deterministic
templates: the same arguments always give the same bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .builder import Builder
from .syntax import print_module
from .types import Index, IntTensor

__all__ = [
    "WorkloadSpec",
    "PAULIS",
    "H_CORRECTION",
    "CX_CORRECTION_CONTROL",
    "CX_CORRECTION_TARGET",
    "QAOA_GAMMA",
    "QAOA_BETA",
    "ghz",
    "ghz_rc",
    "wirecut_qaoa",
    "rx_sweep",
    "build",
    "WORKLOADS",
]

PAULIS = ("id", "x", "y", "z")

# Pauli index p -> correction index c with C.H.P = H up to phase.
H_CORRECTION = (0, 3, 2, 1)

# [control twirl][target twirl] -> correction index, for CX with the first
# operand as control: (Cc x Ct).CX.(Pc x Pt) = CX up to phase.
CX_CORRECTION_CONTROL = (
    (0, 0, 3, 3),
    (1, 1, 2, 2),
    (2, 2, 1, 1),
    (3, 3, 0, 0),
)
CX_CORRECTION_TARGET = (
    (0, 1, 2, 3),
    (1, 0, 3, 2),
    (1, 0, 3, 2),
    (0, 1, 2, 3),
)

QAOA_GAMMA = 0.8
QAOA_BETA = 0.4


@dataclass(frozen=True)
class WorkloadSpec:
    name: str
    n_qubits: int
    iterations: int
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.name not in WORKLOADS:
            raise ValueError(f"unknown workload {self.name!r}; choose from {sorted(WORKLOADS)}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


def _ensemble(b: Builder, iterations: int):
    n_iter = b.constant(iterations, Index(), hint="n_iter")
    return b.ensemble_loop(b.const_index(0), n_iter, b.const_index(1))


def ghz(n_qubits: int = 2, iterations: int = 100, textbook: bool = False) -> str:
    """Reset, H on every qubit, a CX chain, measure all.

    With ``textbook`` only qubit 0 gets an H, which prepares the usual GHZ
    state instead of the uniform distribution the all-H layer gives.
    """
    if n_qubits < 2:
        raise ValueError("ghz needs at least 2 qubits")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    b = Builder()
    cbits = b.alloc_cbits(n_qubits)
    qubits = b.program_alloc(n_qubits)
    h = b.gate("h", 1)
    cx = b.gate("cx", 2)
    idx = [b.const_index(k) for k in range(n_qubits)]
    with _ensemble(b, iterations):
        with b.iteration():
            qs = [b.extract(qubits, idx[k], hint=f"q{k}") for k in range(n_qubits)]
            cs = [b.extract(cbits, idx[k], hint=f"b{k}") for k in range(n_qubits)]
            for q in qs:
                b.reset(q)
            for q in qs[:1] if textbook else qs:
                b.apply(h, q)
            for k in range(n_qubits - 1):
                b.apply(cx, qs[k], qs[k + 1])
            for q, c in zip(qs, cs):
                b.measure(q, c)
            b.transmit_results()
    return print_module(b.finish())


def ghz_rc(iterations: int = 100) -> str:
    """Two-qubit GHZ with randomized compiling on both gate cycles.

    Twirls are drawn from a 4-member Pauli distribution. The H-cycle
    correction reuses the twirl index on a permuted Pauli distribution; the
    CX-cycle corrections are looked up in constant 4x4 tables.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    b = Builder()
    cbits = b.alloc_cbits(2)
    qubits = b.program_alloc(2)
    h = b.gate("h", 1)
    cx = b.gate("cx", 2)
    paulis = [b.gate(name, 1) for name in PAULIS]
    twirl = b.gate_distribution(paulis, hint="paulis")
    h_corr = b.gate_distribution([paulis[c] for c in H_CORRECTION], hint="h_corr")
    table_t = IntTensor((4, 4), 64)
    corr_c = b.constant(CX_CORRECTION_CONTROL, table_t, hint="cx_corr_ctrl")
    corr_t = b.constant(CX_CORRECTION_TARGET, table_t, hint="cx_corr_tgt")
    c0, c1 = b.const_index(0), b.const_index(1)
    c2, c3 = b.const_index(2), b.const_index(3)
    with _ensemble(b, iterations):
        with b.iteration():
            q0 = b.extract(qubits, c0, hint="q0")
            q1 = b.extract(qubits, c1, hint="q1")
            b0 = b.extract(cbits, c0, hint="b0")
            b1 = b.extract(cbits, c1, hint="b1")
            draws = b.int_uniform(0, 3, [4], hint="twirls")
            sel = [b.index_cast(b.extract(draws, c, hint=f"t{k}"), Index(), hint=f"p{k}")
                   for k, c in enumerate((c0, c1, c2, c3))]
            b.reset(q0)
            b.reset(q1)
            # cycle 1: H on both qubits
            b.apply_distribution(twirl, sel[0], q0)
            b.apply_distribution(twirl, sel[1], q1)
            b.apply(h, q0)
            b.apply(h, q1)
            b.apply_distribution(h_corr, sel[0], q0)
            b.apply_distribution(h_corr, sel[1], q1)
            # cycle 2: CX
            b.apply_distribution(twirl, sel[2], q0)
            b.apply_distribution(twirl, sel[3], q1)
            b.apply(cx, q0, q1)
            kc = b.index_cast(b.extract(corr_c, sel[2], sel[3], hint="k_ctrl"), Index(), hint="s_ctrl")
            kt = b.index_cast(b.extract(corr_t, sel[2], sel[3], hint="k_tgt"), Index(), hint="s_tgt")
            b.apply_distribution(twirl, kc, q0)
            b.apply_distribution(twirl, kt, q1)
            b.measure(q0, b0)
            b.measure(q1, b1)
            b.transmit_results()
    return print_module(b.finish())


def wirecut_qaoa(iterations: int = 100) -> str:
    """Wire-cut 4-qubit QAOA: even iterations run the 3-qubit top fragment
    with sampled measurement-basis shifts, odd ones the 3-qubit bottom
    fragment with sampled state preparations."""
    if iterations < 2 or iterations % 2:
        raise ValueError("wirecut_qaoa needs an even iteration count >= 2")
    b = Builder()
    cbits = b.alloc_cbits(3)
    qubits = b.program_alloc(3)
    h = b.gate("h", 1)
    rzz = b.gate("rzz", 2, [QAOA_GAMMA])
    mixer = b.gate("rx", 1, [2 * QAOA_BETA], hint="mixer")
    ident = b.gate("id", 1)
    # Basis shifts for Z, X and Y measurements.
    y_shift = b.gate("rx", 1, [math.pi / 2], hint="y_shift")
    basis = b.gate_distribution([ident, h, y_shift], hint="basis_shift")
    # State preparations |0>, |1>, |+>, |+i>.
    x = b.gate("x", 1)
    plus_i = b.gate("rx", 1, [-math.pi / 2], hint="prep_plus_i")
    prep = b.gate_distribution([ident, x, h, plus_i], hint="state_prep")
    c0, c1, c2, c3 = (b.const_index(k) for k in range(4))
    with _ensemble(b, iterations) as i:
        with b.iteration():
            parity = b.remsi(i, c2, hint="parity")
            q = [b.extract(qubits, c, hint=f"q{k}") for k, c in enumerate((c0, c1, c2))]
            with b.if_(parity):
                # bottom fragment: prepare, entangle, mix
                prep_sel = b.int_uniform(0, 3, [3], hint="prep_sel")
                with b.for_(c0, c3, c1, hint="k") as k:
                    qk = b.extract(qubits, k, hint="qk")
                    sk = b.index_cast(b.extract(prep_sel, k, hint="pk"), Index(), hint="prep_idx")
                    b.apply_distribution(prep, sk, qk)
                b.apply(h, q[1])
                b.apply(h, q[2])
                b.apply(rzz, q[0], q[1])
                b.apply(rzz, q[1], q[2])
                for qq in q:
                    b.apply(mixer, qq)
                with b.for_(c0, c3, c1, hint="m") as m:
                    b.measure(b.extract(qubits, m, hint="qm"), b.extract(cbits, m, hint="bm"))
            with b.else_():
                # top fragment: entangle, mix, shift basis
                for qq in q:
                    b.apply(h, qq)
                b.apply(rzz, q[0], q[1])
                b.apply(rzz, q[1], q[2])
                b.apply(mixer, q[0])
                b.apply(mixer, q[1])
                shift_sel = b.int_uniform(0, 2, [3], hint="shift_sel")
                with b.for_(c0, c3, c1, hint="j") as j:
                    qj = b.extract(qubits, j, hint="qj")
                    sj = b.index_cast(b.extract(shift_sel, j, hint="sj_raw"), Index(), hint="shift_idx")
                    b.apply_distribution(basis, sj, qj)
                with b.for_(c0, c3, c1, hint="n") as n:
                    b.measure(b.extract(qubits, n, hint="qn"), b.extract(cbits, n, hint="bn"))
            b.transmit_results()
    return print_module(b.finish())


def rx_sweep(iterations: int = 100, low: float = 0.0, high: float = 3.0) -> str:
    """One RX rotation per iteration, its angle drawn from [low, high)."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    if not low < high:
        raise ValueError("rx_sweep needs low < high")
    b = Builder()
    cbits = b.alloc_cbits(1)
    qubits = b.program_alloc(1)
    c0 = b.const_index(0)
    with _ensemble(b, iterations):
        with b.iteration():
            floats = b.float_uniform(float(low), float(high), [10, 10], hint="hundred_floats")
            theta = b.extract(floats, c0, c0, hint="theta")
            rx = b.gate("rx", 1, [theta])
            q = b.extract(qubits, c0, hint="q0")
            b.reset(q)
            b.apply(rx, q)
            b.measure(q, b.extract(cbits, c0, hint="b0"))
            b.transmit_results()
    return print_module(b.finish())


WORKLOADS = {
    "ghz": ghz,
    "ghz_rc": ghz_rc,
    "wirecut_qaoa": wirecut_qaoa,
    "rx_sweep": rx_sweep,
}


def build(spec: WorkloadSpec) -> str:
    """Program text for ``spec``; ``extra`` holds workload keyword options
    (``textbook`` for ghz, ``low``/``high`` for rx_sweep)."""
    if spec.name == "ghz":
        return ghz(spec.n_qubits, spec.iterations, **spec.extra)
    return WORKLOADS[spec.name](spec.iterations, **spec.extra)
