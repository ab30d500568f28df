"""Finite-dimensional commutator diagnostics for split Hamiltonians.

Bracket conventions (hbar = 1, metric (+,-,-,-)):

    [J_i, J_j] =  i e_ijk J_k        [P_i, K_j] =  i d_ij H
    [J_i, K_j] =  i e_ijk K_k        [K_i, H]   = -i P_i
    [J_i, P_j] =  i e_ijk P_k        [P_i, P_j] = [P_i, H] = [J_i, H] = 0
    [K_i, K_j] = -i e_ijk J_k

The interaction correction W to a boost generator solves [K0, V] = -[W, H]
with H = H0 + V; matrix elements between energy eigenstates are

    W_ab = <a|[K0, V]|b> / (E_a - E_b),

the diagonal (and any degenerate pair) being gauged to zero.  Degenerate
pairs with a nonzero numerator are reported as obstructions, not raised.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, NonHermitianInput, NotNormalized

HERMITIAN_TOLERANCE = 1e-10
DEGENERACY_FACTOR = 1e-9
OBSTRUCTION_FACTOR = 1e-9
HISTORY_TOLERANCE = 1e-9
NONTRIVIALITY_TOLERANCE = 1e-9

_GENERATOR_NAMES = ("H", "P1", "P2", "P3", "J1", "J2", "J3", "K1", "K2", "K3")

_EPSILON = {
    (1, 2): (3, 1),
    (2, 1): (3, -1),
    (2, 3): (1, 1),
    (3, 2): (1, -1),
    (3, 1): (2, 1),
    (1, 3): (2, -1),
}


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def hermiticity_defect(m: np.ndarray) -> float:
    return float(np.linalg.norm(m - m.conj().T))


def _as_matrix(value, name: str) -> np.ndarray:
    m = np.asarray(value, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"{name} must be a square matrix, got shape {m.shape}")
    return m


@dataclass(eq=False)
class GeneratorSet:
    """Any subset of the ten toy generators, all of one dimension."""

    H: Optional[np.ndarray] = None
    P1: Optional[np.ndarray] = None
    P2: Optional[np.ndarray] = None
    P3: Optional[np.ndarray] = None
    J1: Optional[np.ndarray] = None
    J2: Optional[np.ndarray] = None
    J3: Optional[np.ndarray] = None
    K1: Optional[np.ndarray] = None
    K2: Optional[np.ndarray] = None
    K3: Optional[np.ndarray] = None

    def __post_init__(self):
        dim = None
        for name in _GENERATOR_NAMES:
            value = getattr(self, name)
            if value is None:
                continue
            m = _as_matrix(value, name)
            if dim is None:
                dim = m.shape[0]
            elif m.shape[0] != dim:
                raise DimensionMismatch(
                    f"{name} is {m.shape[0]}x{m.shape[0]}, others are {dim}x{dim}"
                )
            setattr(self, name, m)
        if dim is None:
            raise ValueError("no generators supplied")
        self.dim = dim

    def present(self) -> dict:
        return {
            name: getattr(self, name)
            for name in _GENERATOR_NAMES
            if getattr(self, name) is not None
        }

    def hermiticity_residuals(self) -> dict:
        return {name: hermiticity_defect(m) for name, m in self.present().items()}


def _rhs_name(sign: int, symbol: str) -> str:
    # the table entry is named after the residual [A,B] - RHS
    return f"- i*{symbol}" if sign > 0 else f"+ i*{symbol}"


def _bracket_table(gens: dict) -> list:
    """(name, A, B, required RHS) rows for every checkable bracket."""

    def get(name):
        return gens.get(name)

    rows = []

    def add(name, a, b, rhs):
        if a is not None and b is not None and rhs is not None:
            rows.append((name, a, b, rhs))

    zero = np.zeros_like(next(iter(gens.values())))
    h = get("H")

    for i in range(1, 4):
        for j in range(1, 4):
            ji, jj = get(f"J{i}"), get(f"J{j}")
            ki, kj = get(f"K{i}"), get(f"K{j}")
            pi, pj = get(f"P{i}"), get(f"P{j}")
            if i < j:
                k, s = _EPSILON[(i, j)]
                jk = get(f"J{k}")
                add(f"[J{i},J{j}] {_rhs_name(s, f'J{k}')}",
                    ji, jj, None if jk is None else 1j * s * jk)
                add(f"[K{i},K{j}] {_rhs_name(-s, f'J{k}')}",
                    ki, kj, None if jk is None else -1j * s * jk)
                add(f"[P{i},P{j}]", pi, pj, zero)
            if i != j:
                k, s = _EPSILON[(i, j)]
                kk, pk = get(f"K{k}"), get(f"P{k}")
                add(f"[J{i},K{j}] {_rhs_name(s, f'K{k}')}",
                    ji, kj, None if kk is None else 1j * s * kk)
                add(f"[J{i},P{j}] {_rhs_name(s, f'P{k}')}",
                    ji, pj, None if pk is None else 1j * s * pk)
                add(f"[P{i},K{j}]", pi, kj, zero)
            else:
                add(f"[J{i},K{i}]", ji, ki, zero)
                add(f"[J{i},P{i}]", ji, pi, zero)
                add(f"[P{i},K{i}] - i*H", pi, ki, None if h is None else 1j * h)

    for i in range(1, 4):
        add(f"[K{i},H] + i*P{i}", get(f"K{i}"), h,
            None if get(f"P{i}") is None else -1j * get(f"P{i}"))
        add(f"[P{i},H]", get(f"P{i}"), h, zero)
        add(f"[J{i},H]", get(f"J{i}"), h, zero)
    return rows


def bracket_residuals(gens: GeneratorSet) -> dict:
    """Frobenius norms of (computed bracket - required right-hand side)."""
    present = gens.present()
    if len(present) < 2:
        raise ValueError("need at least two generators to check brackets")
    residuals = {}
    for name, a, b, rhs in _bracket_table(present):
        residuals[name] = float(np.linalg.norm(commutator(a, b) - rhs))
    return residuals


@dataclass(eq=False)
class SplitSystem:
    """H = H0 + V with the free boost generators K0 along up to three axes."""

    H0: np.ndarray
    V: np.ndarray
    K0: tuple

    def __post_init__(self):
        self.H0 = _as_matrix(self.H0, "H0")
        self.V = _as_matrix(self.V, "V")
        self.K0 = tuple(_as_matrix(k, "K0") for k in self.K0)
        if not self.K0:
            raise ValueError("need at least one K0 axis")
        dim = self.H0.shape[0]
        for name, m in [("V", self.V)] + [(f"K0[{i}]", k) for i, k in enumerate(self.K0)]:
            if m.shape[0] != dim:
                raise DimensionMismatch(f"{name} has dimension {m.shape[0]}, H0 has {dim}")
        for name, m in (("H0", self.H0), ("V", self.V)):
            if hermiticity_defect(m) > HERMITIAN_TOLERANCE:
                warnings.warn(f"{name} is not Hermitian", NonHermitianInput, stacklevel=2)

    @property
    def H(self) -> np.ndarray:
        return self.H0 + self.V


@dataclass(eq=False)
class WSolution:
    """Correction W with its defining-equation residual and gauge notes."""

    W: np.ndarray
    residual: float
    degenerate_obstructions: tuple  # (a, b) eigenindex pairs

    @property
    def obstructed(self) -> bool:
        return bool(self.degenerate_obstructions)


def solve_W(system: SplitSystem, axis: int = 0) -> WSolution:
    """Solve [K0, V] = -[W, H] in the eigenbasis of H = H0 + V.

    Gauge: diagonal and degenerate-pair elements of W are set to zero; a
    degenerate pair whose numerator <a|[K0,V]|b> is nonzero cannot be solved
    and is recorded in degenerate_obstructions (visible in the residual).
    """
    if not 0 <= axis < len(system.K0):
        raise DimensionMismatch(f"axis {axis} outside 0..{len(system.K0) - 1}")
    k0 = system.K0[axis]
    h = system.H
    m = commutator(k0, system.V)

    if hermiticity_defect(h) <= HERMITIAN_TOLERANCE:
        energies, q = np.linalg.eigh(h)
        q_inv = q.conj().T
    else:
        warnings.warn("H = H0 + V is not Hermitian; using a general "
                      "eigendecomposition", NonHermitianInput, stacklevel=2)
        energies, q = np.linalg.eig(h)
        q_inv = np.linalg.inv(q)

    m_eig = q_inv @ m @ q
    eps_deg = DEGENERACY_FACTOR * np.linalg.norm(h)
    eps_obs = OBSTRUCTION_FACTOR * np.linalg.norm(m)
    n = len(energies)
    w_eig = np.zeros((n, n), dtype=complex)
    obstructions = []
    for a in range(n):
        for b in range(n):
            gap = energies[a] - energies[b]
            if abs(gap) > eps_deg:
                w_eig[a, b] = m_eig[a, b] / gap
            elif abs(m_eig[a, b]) > eps_obs:
                obstructions.append((a, b))
    w = q @ w_eig @ q_inv
    residual = float(np.linalg.norm(m + commutator(w, h)))
    return WSolution(W=w, residual=residual, degenerate_obstructions=tuple(obstructions))


def _phase_evolver(h: np.ndarray, label: str):
    """psi(t) = exp(i h t) psi0, by spectral decomposition when Hermitian."""
    if hermiticity_defect(h) <= HERMITIAN_TOLERANCE:
        evals, q = np.linalg.eigh(h)
        q_dag = q.conj().T

        def evolve(t, psi0):
            return q @ (np.exp(1j * evals * t) * (q_dag @ psi0))

    else:
        warnings.warn(f"{label} is not Hermitian; falling back to "
                      "scaling-and-squaring matrix exponentials",
                      NonHermitianInput, stacklevel=3)

        def evolve(t, psi0):
            return scipy.linalg.expm(1j * t * h) @ psi0

    return evolve


def same_history_check(
    h0: np.ndarray,
    v_a: np.ndarray,
    v_b: np.ndarray,
    psi0: np.ndarray,
    times: Sequence[float],
    tol: float = HISTORY_TOLERANCE,
):
    """Do exp(i(H0+Va)t)|psi0> and exp(i(H0+Vb)t)|psi0> trace one history?

    Returns (flag, samples) with samples = [(t, c(t))] where c(t) is the
    overlap <w(t)|u(t)>; the flag is True when |c| stays at 1 within tol,
    i.e. the two evolutions differ only by a time-dependent phase.
    """
    h0 = _as_matrix(h0, "H0")
    v_a = _as_matrix(v_a, "Va")
    v_b = _as_matrix(v_b, "Vb")
    psi = np.asarray(psi0, dtype=complex).reshape(-1)
    if psi.shape[0] != h0.shape[0]:
        raise DimensionMismatch(
            f"state has dimension {psi.shape[0]}, H0 has {h0.shape[0]}"
        )
    if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
        raise NotNormalized("psi0 must be normalized")
    evolve_a = _phase_evolver(h0 + v_a, "H0 + Va")
    evolve_b = _phase_evolver(h0 + v_b, "H0 + Vb")
    same = True
    samples = []
    for t in times:
        u = evolve_a(float(t), psi)
        w = evolve_b(float(t), psi)
        c = complex(np.vdot(w, u))
        samples.append((float(t), c))
        if abs(abs(c) - 1.0) > tol:
            same = False
    return same, samples


def boost_nontriviality_check(
    w: np.ndarray, psi: np.ndarray, tol: float = NONTRIVIALITY_TOLERANCE
) -> bool:
    """True when W|psi> is not proportional to |psi> (the boost acts)."""
    w = _as_matrix(w, "W")
    vec = np.asarray(psi, dtype=complex).reshape(-1)
    if vec.shape[0] != w.shape[0]:
        raise DimensionMismatch(
            f"state has dimension {vec.shape[0]}, W has {w.shape[0]}"
        )
    if abs(np.linalg.norm(vec) - 1.0) > 1e-10:
        raise NotNormalized("psi must be normalized")
    image = w @ vec
    projection = np.vdot(vec, image) * vec
    return bool(np.linalg.norm(image - projection) > tol)
