"""Dense spin-1/2 statevectors and two-slot contact unitaries.

Basis conventions: each slot holds a spin-1/2 with |+> at bit 0 and |-> at
bit 1; slot 0 is the most significant bit of the basis index, so for two
slots the ordering is |++>, |+->, |-+>, |-->.  States are dense complex
vectors of length 2**n_slots, capped at 12 slots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    DimensionMismatch,
    EqualSlots,
    InvalidPairing,
    NonUnitaryMatrix,
    NotNormalized,
    OverlappingPairs,
    SlotOutOfRange,
    TooManySlots,
)

MAX_SLOTS = 12
NORM_TOLERANCE = 1e-12
PHASE_TOLERANCE = 1e-10

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

# (|+-> - |-+>)/sqrt(2) in the two-slot basis above
SINGLET_PAIR = np.array([0.0, _INV_SQRT2, -_INV_SQRT2, 0.0], dtype=complex)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True, eq=False)
class SpinState:
    """Normalized state of n_slots spin-1/2 particles."""

    n_slots: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_slots < 1:
            raise ValueError("need at least one slot")
        if self.n_slots > MAX_SLOTS:
            raise TooManySlots(f"{self.n_slots} slots exceed the cap of {MAX_SLOTS}")
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_slots,):
            raise DimensionMismatch(
                f"expected {2**self.n_slots} amplitudes, got shape {amps.shape}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise NotNormalized(f"state norm {norm} is not 1")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    def nonzero_terms(self, floor: float = 1e-12) -> list[tuple[str, complex]]:
        return [
            (basis_label(i, self.n_slots), self.amplitudes[i])
            for i in range(len(self.amplitudes))
            if abs(self.amplitudes[i]) > floor
        ]


def basis_label(index: int, n_slots: int) -> str:
    bits = format(index, f"0{n_slots}b")
    return "".join("+" if b == "0" else "-" for b in bits)


@dataclass(frozen=True, eq=False)
class TwoSlotUnitary:
    """A 4x4 unitary acting on an ordered pair of slots."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise DimensionMismatch(f"expected a 4x4 matrix, got {m.shape}")
        if np.max(np.abs(m.conj().T @ m - np.eye(4))) > NORM_TOLERANCE:
            raise NonUnitaryMatrix("matrix is not unitary within 1e-12")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


def swap_unitary() -> TwoSlotUnitary:
    """Exchange the spin contents of two slots: |+-> <-> |-+>."""
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = m[3, 3] = 1.0
    m[1, 2] = m[2, 1] = 1.0
    return TwoSlotUnitary(m)


def identity_unitary() -> TwoSlotUnitary:
    return TwoSlotUnitary(np.eye(4, dtype=complex))


@dataclass(frozen=True, eq=False)
class PairingSpec:
    """Disjoint ordered slot pairs, plus explicit states for unpaired slots."""

    pairs: tuple
    singles: tuple = ()  # (slot, normalized 2-vector) entries

    def __post_init__(self):
        pairs = tuple((int(a), int(b)) for a, b in self.pairs)
        singles = tuple((int(s), np.asarray(v, dtype=complex)) for s, v in self.singles)
        used: set[int] = set()
        for a, b in pairs:
            if a == b:
                raise InvalidPairing(f"pair ({a}, {b}) repeats a slot")
            for s in (a, b):
                if s < 0:
                    raise InvalidPairing(f"negative slot {s}")
                if s in used:
                    raise InvalidPairing(f"slot {s} appears twice in the pairing")
                used.add(s)
        for s, v in singles:
            if s < 0 or s in used:
                raise InvalidPairing(f"single slot {s} is negative or repeated")
            used.add(s)
            if v.shape != (2,):
                raise DimensionMismatch("single-slot states must be 2-vectors")
            if abs(np.linalg.norm(v) - 1.0) > NORM_TOLERANCE:
                raise NotNormalized(f"single-slot state for slot {s} is not normalized")
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "singles", singles)

    def covered_slots(self) -> set[int]:
        used = {s for p in self.pairs for s in p}
        used.update(s for s, _ in self.singles)
        return used


def singlet_product(n_slots: int, pairing) -> SpinState:
    """Tensor product of singlets on the given pairs (and explicit singles).

    `pairing` is a PairingSpec or a bare list of pairs.  The pairing together
    with the singles must cover slots 0..n_slots-1 exactly.
    """
    if not isinstance(pairing, PairingSpec):
        pairing = PairingSpec(tuple(pairing))
    covered = pairing.covered_slots()
    if covered != set(range(n_slots)):
        raise InvalidPairing(
            f"pairing covers {sorted(covered)}, expected 0..{n_slots - 1}"
        )
    vec = np.ones(1, dtype=complex)
    slot_order: list[int] = []
    for a, b in pairing.pairs:
        vec = np.kron(vec, SINGLET_PAIR)
        slot_order += [a, b]
    for s, v in pairing.singles:
        vec = np.kron(vec, v)
        slot_order.append(s)
    arr = vec.reshape([2] * n_slots)
    arr = np.transpose(arr, axes=[slot_order.index(s) for s in range(n_slots)])
    return SpinState(n_slots, arr.reshape(-1))


def _check_pair(state: SpinState, pair) -> tuple[int, int]:
    a, b = int(pair[0]), int(pair[1])
    for s in (a, b):
        if not 0 <= s < state.n_slots:
            raise SlotOutOfRange(f"slot {s} outside 0..{state.n_slots - 1}")
    if a == b:
        raise EqualSlots(f"contact unitary needs two distinct slots, got {a}")
    return a, b


def apply_contact(state: SpinState, u: TwoSlotUnitary, pair) -> SpinState:
    """Apply `u` to the ordered slot pair, identity on the rest."""
    a, b = _check_pair(state, pair)
    n = state.n_slots
    arr = state.amplitudes.reshape([2] * n)
    u4 = u.matrix.reshape(2, 2, 2, 2)
    out = np.tensordot(u4, arr, axes=([2, 3], [a, b]))
    out = np.moveaxis(out, [0, 1], [a, b])
    return SpinState(n, out.reshape(-1))


def apply_group(state: SpinState, actions: Iterable) -> SpinState:
    """Apply disjoint contact unitaries for one simultaneous collision group.

    `actions` is an iterable of (TwoSlotUnitary, pair); the result does not
    depend on the listing order because the pairs must be disjoint.
    """
    actions = list(actions)
    used: set[int] = set()
    for _, pair in actions:
        a, b = _check_pair(state, pair)
        for s in (a, b):
            if s in used:
                raise OverlappingPairs(f"slot {s} used by two simultaneous unitaries")
            used.add(s)
    for u, pair in actions:
        state = apply_contact(state, u, pair)
    return state


def overlap(a: SpinState, b: SpinState) -> complex:
    """<a|b> (conjugate-linear in the first argument)."""
    if a.n_slots != b.n_slots:
        raise DimensionMismatch(f"{a.n_slots} vs {b.n_slots} slots")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def equal_up_to_phase(a: SpinState, b: SpinState, tol: float = PHASE_TOLERANCE) -> bool:
    return abs(abs(overlap(a, b)) - 1.0) <= tol


def _apply_single(arr: np.ndarray, m2: np.ndarray, slot: int) -> np.ndarray:
    out = np.tensordot(m2, arr, axes=([1], [slot]))
    return np.moveaxis(out, 0, slot)


def angular_momentum_norms(state: SpinState) -> tuple[float, float, float]:
    """Norms of J_k |psi> for k = x, y, z with J_k = sum over slots of sigma_k/2.

    All three vanish for products of singlets; that certifies the boosted
    re-foliation shortcut used by the narrative layer.
    """
    arr = state.amplitudes.reshape([2] * state.n_slots)
    norms = []
    for sigma in (PAULI_X, PAULI_Y, PAULI_Z):
        acc = np.zeros_like(arr)
        for slot in range(state.n_slots):
            acc = acc + _apply_single(arr, sigma / 2.0, slot)
        norms.append(float(np.linalg.norm(acc.reshape(-1))))
    return tuple(norms)
