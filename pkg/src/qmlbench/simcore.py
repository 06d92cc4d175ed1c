"""Exact statevector simulation of small parameterized circuits.

Conventions
-----------
* Little-endian qubit order: qubit ``q`` is bit ``q`` of the amplitude index,
  so qubit 0 is the least-significant bit.
* ``RZ(t) = diag(exp(-i t/2), exp(+i t/2))`` and
  ``RY(t) = [[cos t/2, -sin t/2], [sin t/2, cos t/2]]``.
* Two-qubit gates are all controlled single-qubit gates and take
  ``targets=(control, target)``.

The public ``Statevector`` / ``apply_gate`` / ``apply_circuit`` API works on
single states. The batch helpers (``zero_batch``, ``run_ops``,
``expectation_z_batch``) operate on arrays of shape ``(B, 2**n)`` and accept
per-row angle arrays; the model code uses them to simulate a whole dataset
in one pass.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import BindingError, CapacityError, DimensionError, ParameterError, QubitIndexError

MAX_QUBITS = 24

GATE_ARITY = {"H": 1, "X": 1, "RX": 1, "RY": 1, "RZ": 1, "CX": 2, "CZ": 2, "CRY": 2}
ROTATION_KINDS = frozenset({"RX", "RY", "RZ", "CRY"})

Angle = Union[float, str, None]


@dataclass(frozen=True)
class Gate:
    """One gate. ``angle`` is radians, or the name of a free parameter slot."""

    kind: str
    targets: tuple[int, ...]
    angle: Angle = None

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ParameterError(f"unknown gate kind {self.kind!r}")
        targets = tuple(int(t) for t in self.targets)
        object.__setattr__(self, "targets", targets)
        if len(targets) != GATE_ARITY[self.kind]:
            raise ParameterError(f"{self.kind} takes {GATE_ARITY[self.kind]} qubit(s), got {targets}")
        if len(set(targets)) != len(targets):
            raise QubitIndexError(f"{self.kind} targets must be distinct, got {targets}")
        if any(t < 0 for t in targets):
            raise QubitIndexError(f"negative qubit index in {targets}")
        if self.kind in ROTATION_KINDS:
            if self.angle is None:
                raise ParameterError(f"{self.kind} needs an angle")
            if not isinstance(self.angle, str):
                object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise ParameterError(f"{self.kind} takes no angle")

    @property
    def is_bound(self) -> bool:
        return not isinstance(self.angle, str)

    def __repr__(self):
        qs = ",".join(map(str, self.targets))
        if self.angle is None:
            return f"{self.kind}({qs})"
        a = self.angle if isinstance(self.angle, str) else f"{self.angle:.6g}"
        return f"{self.kind}({qs}; {a})"


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    gates: tuple[Gate, ...] = ()
    param_slots: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "param_slots", tuple(self.param_slots))
        if self.n_qubits < 1:
            raise ParameterError("a circuit needs at least one qubit")
        if len(set(self.param_slots)) != len(self.param_slots):
            raise ParameterError("duplicate parameter slot names")
        slots = set(self.param_slots)
        for g in self.gates:
            if max(g.targets) >= self.n_qubits:
                raise QubitIndexError(f"{g!r} addresses a qubit outside 0..{self.n_qubits - 1}")
            if isinstance(g.angle, str) and g.angle not in slots:
                raise BindingError(f"{g!r} references unknown parameter slot {g.angle!r}")

    @property
    def n_params(self) -> int:
        return len(self.param_slots)

    def bind(self, params: Sequence[float]) -> "Circuit":
        """Return the parameter-free circuit for ``params``."""
        angles = bound_angles(self, params)
        gates = tuple(Gate(g.kind, g.targets, a) for g, a in zip(self.gates, angles))
        return Circuit(self.n_qubits, gates)

    def then(self, other: "Circuit") -> "Circuit":
        """Concatenate ``other`` after this circuit. Slot names must not clash."""
        if other.n_qubits != self.n_qubits:
            raise DimensionError(f"cannot join {self.n_qubits}- and {other.n_qubits}-qubit circuits")
        if set(self.param_slots) & set(other.param_slots):
            raise BindingError("parameter slot names clash")
        return Circuit(self.n_qubits, self.gates + other.gates, self.param_slots + other.param_slots)


@dataclass(frozen=True, eq=False)
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_qubits,):
            raise DimensionError(f"expected {1 << self.n_qubits} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))


def statevector_bytes(n_qubits: int) -> int:
    return 16 * (1 << n_qubits)


def _check_capacity(n_qubits: int) -> None:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise CapacityError(
            f"n_qubits={n_qubits} outside 1..{MAX_QUBITS}; a statevector needs "
            f"16*2^{n_qubits} = {16 * 2 ** max(n_qubits, 0)} bytes"
        )


def new_zero_state(n_qubits: int) -> Statevector:
    _check_capacity(n_qubits)
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(n_qubits, amps)


# --------------------------------------------------------------------------
# local matrices

_S2 = 1.0 / np.sqrt(2.0)
_FIXED = {
    "H": (_S2, _S2, _S2, -_S2),
    "X": (0.0, 1.0, 1.0, 0.0),
    "Y": (0.0, -1j, 1j, 0.0),
    "Z": (1.0, 0.0, 0.0, -1.0),
}


def _entries(kind: str, angle):
    """Return (u00, u01, u10, u11) of the single-qubit part of ``kind``."""
    if kind in _FIXED:
        return _FIXED[kind]
    if kind in ("CX", "CZ"):
        return _FIXED[kind[1]]
    half = np.asarray(angle, dtype=float) / 2.0
    c, s = np.cos(half), np.sin(half)
    if kind in ("RY", "CRY"):
        return c, -s, s, c
    if kind == "RX":
        return c, -1j * s, -1j * s, c
    if kind == "RZ":
        return np.exp(-1j * half), 0.0, 0.0, np.exp(1j * half)
    raise ParameterError(f"unknown gate kind {kind!r}")


def gate_matrix(gate: Gate) -> np.ndarray:
    """Dense local matrix of a bound gate.

    Two-qubit gates use the basis ``|control, target>`` with the control as
    the high bit, i.e. ``diag(I, U)``.
    """
    if not gate.is_bound:
        raise BindingError(f"{gate!r} has an unbound parameter")
    u = np.array(_entries(gate.kind, gate.angle), dtype=complex).reshape(2, 2)
    if GATE_ARITY[gate.kind] == 1:
        return u
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = u
    return m


# --------------------------------------------------------------------------
# batched kernels on (B, 2**n) arrays


def _coef(c, ndim):
    if np.ndim(c) == 0:
        return c
    return np.reshape(c, (-1,) + (1,) * (ndim - 1))


def _mix(view, axis, u):
    """Apply 2x2 ``u`` in place along ``axis`` of ``view``."""
    i0 = (slice(None),) * axis + (0,)
    i1 = (slice(None),) * axis + (1,)
    s0 = view[i0].copy()
    s1 = view[i1]
    nd = s0.ndim
    u00, u01, u10, u11 = (_coef(c, nd) for c in u)
    view[i0] = u00 * s0 + u01 * s1
    view[i1] = u10 * s0 + u11 * s1


def _apply_op(amps: np.ndarray, n: int, kind: str, targets, angle=None) -> np.ndarray:
    b = amps.shape[0]
    if len(targets) == 1:
        q = targets[0]
        w = amps.reshape(b, 1 << (n - q - 1), 2, 1 << q).copy()
        if kind == "RZ":
            u00, _, _, u11 = _entries(kind, angle)
            w[:, :, 0, :] *= _coef(u00, 3)
            w[:, :, 1, :] *= _coef(u11, 3)
        elif kind == "X":
            w = w[:, :, ::-1, :].copy()
        else:
            _mix(w, 2, _entries(kind, angle))
        return w.reshape(b, -1)
    ctrl, tgt = targets
    hi, lo = max(ctrl, tgt), min(ctrl, tgt)
    w = amps.reshape(b, 1 << (n - hi - 1), 2, 1 << (hi - lo - 1), 2, 1 << lo).copy()
    # sub-view where the control bit is 1; remaining target axis position
    if ctrl == hi:
        sub, axis = w[:, :, 1], 3
    else:
        sub, axis = w[:, :, :, :, 1], 2
    if kind == "CZ":
        idx = (slice(None),) * axis + (1,)
        sub[idx] *= -1.0
    elif kind == "CX":
        i0 = (slice(None),) * axis + (0,)
        i1 = (slice(None),) * axis + (1,)
        tmp = sub[i0].copy()
        sub[i0] = sub[i1]
        sub[i1] = tmp
    else:
        _mix(sub, axis, _entries(kind, angle))
    return w.reshape(b, -1)


def zero_batch(n_qubits: int, batch: int) -> np.ndarray:
    _check_capacity(n_qubits)
    amps = np.zeros((batch, 1 << n_qubits), dtype=np.complex128)
    amps[:, 0] = 1.0
    return amps


def run_ops(amps: np.ndarray, n_qubits: int, ops: Iterable[tuple]) -> np.ndarray:
    """Apply ``(kind, targets, angle)`` ops to a ``(B, 2**n)`` batch.

    ``angle`` may be a scalar or a length-B array (one angle per row).
    """
    for kind, targets, angle in ops:
        amps = _apply_op(amps, n_qubits, kind, targets, angle)
    return amps


def expectation_z_batch(amps: np.ndarray, n_qubits: int, qubit: int) -> np.ndarray:
    probs = np.abs(amps.reshape(amps.shape[0], 1 << (n_qubits - qubit - 1), 2, 1 << qubit)) ** 2
    return probs[:, :, 0, :].sum(axis=(1, 2)) - probs[:, :, 1, :].sum(axis=(1, 2))


# --------------------------------------------------------------------------
# single-state API


def _check_gate_for(gate: Gate, n: int) -> None:
    if not gate.is_bound:
        raise BindingError(f"{gate!r} has an unbound parameter {gate.angle!r}")
    if max(gate.targets) >= n:
        raise QubitIndexError(f"{gate!r} addresses a qubit outside 0..{n - 1}")


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    n = state.n_qubits
    _check_gate_for(gate, n)
    out = _apply_op(state.amplitudes[None, :], n, gate.kind, gate.targets, gate.angle)
    return Statevector(n, out[0])


def bound_angles(circuit: Circuit, params: Sequence[float]) -> list:
    """Resolve every gate's angle for ``params`` (``None`` for fixed gates)."""
    params = np.asarray(params, dtype=float).ravel()
    if params.size != circuit.n_params:
        raise BindingError(f"circuit has {circuit.n_params} parameter slots, got {params.size} values")
    lookup = dict(zip(circuit.param_slots, params))
    return [lookup[g.angle] if isinstance(g.angle, str) else g.angle for g in circuit.gates]


def circuit_ops(circuit: Circuit, params: Sequence[float] = ()) -> list[tuple]:
    angles = bound_angles(circuit, params)
    return [(g.kind, g.targets, a) for g, a in zip(circuit.gates, angles)]


def apply_circuit(state: Statevector, circuit: Circuit, params: Sequence[float] = ()) -> Statevector:
    if circuit.n_qubits != state.n_qubits:
        raise DimensionError(f"circuit acts on {circuit.n_qubits} qubits, state has {state.n_qubits}")
    out = run_ops(state.amplitudes[None, :], state.n_qubits, circuit_ops(circuit, params))
    return Statevector(state.n_qubits, out[0])


def inner_product(a: Statevector, b: Statevector) -> complex:
    """<a|b>, conjugating the first argument."""
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"cannot take <{a.n_qubits}-qubit|{b.n_qubits}-qubit>")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def expectation_z(state: Statevector, qubit: int) -> float:
    if not 0 <= qubit < state.n_qubits:
        raise QubitIndexError(f"qubit {qubit} outside 0..{state.n_qubits - 1}")
    z = float(expectation_z_batch(state.amplitudes[None, :], state.n_qubits, qubit)[0])
    return min(1.0, max(-1.0, z))


# --------------------------------------------------------------------------
# stochastic Pauli noise

_TRAJ_CHUNK_AMPS = 1 << 22


def noisy_expectation_z(
    circuit: Circuit,
    params: Sequence[float],
    qubit: int,
    noise_p: float,
    shots: int,
    seed: int,
) -> float:
    """Mean <Z_qubit> over ``shots`` Pauli-error trajectories.

    After every gate, each qubit the gate touched independently receives a
    uniformly chosen X, Y or Z with probability ``noise_p``. Per gate this is
    the channel ``rho -> (1-p) rho + p/3 (X rho X + Y rho Y + Z rho Z)``, which
    shrinks the Bloch vector by ``1 - 4p/3``.
    """
    if not 0.0 <= noise_p <= 1.0:
        raise ParameterError(f"noise_p must lie in [0, 1], got {noise_p}")
    if shots < 1:
        raise ParameterError(f"shots must be >= 1, got {shots}")
    n = circuit.n_qubits
    if not 0 <= qubit < n:
        raise QubitIndexError(f"qubit {qubit} outside 0..{n - 1}")
    ops = circuit_ops(circuit, params)
    if noise_p == 0.0:
        return expectation_z(apply_circuit(new_zero_state(n), circuit, params), qubit)

    rng = np.random.default_rng(seed)
    chunk = max(1, _TRAJ_CHUNK_AMPS >> n)
    total = 0.0
    done = 0
    while done < shots:
        size = min(chunk, shots - done)
        amps = zero_batch(n, size)
        for kind, targets, angle in ops:
            amps = _apply_op(amps, n, kind, targets, angle)
            for q in targets:
                hit = rng.random(size) < noise_p
                which = rng.integers(0, 3, size=size)
                for k, pauli in enumerate("XYZ"):
                    rows = hit & (which == k)
                    if rows.any():
                        amps[rows] = _apply_op(amps[rows], n, pauli, (q,))
        total += float(expectation_z_batch(amps, n, qubit).sum())
        done += size
    return total / shots
