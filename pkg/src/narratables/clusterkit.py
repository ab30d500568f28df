"""Momentum-delta bookkeeping for contact vertices.

A kernel records the product of momentum delta functions attached to an
interaction with named incoming and outgoing slots.  Cluster decomposition
requires the constraints to amount to overall momentum conservation and
nothing more; any further delta ties a proper subset of the momenta and
survives as a witness.  All arithmetic is exact over Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import NotConserving


def _to_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise TypeError(f"kernel coefficients must be rational, got {value!r}")


@dataclass(frozen=True)
class MomentumKernel:
    """Delta rows over columns ordered (out slots, then in slots)."""

    in_slots: tuple
    out_slots: tuple
    deltas: tuple  # rows of Fractions
    smooth_prefactor_present: bool = False
    metadata: tuple = ()  # free-form (key, note) pairs, not analyzed

    def __post_init__(self):
        in_slots = tuple(str(s) for s in self.in_slots)
        out_slots = tuple(str(s) for s in self.out_slots)
        if len(in_slots) + len(out_slots) < 2:
            raise ValueError("a kernel needs at least two slots")
        names = out_slots + in_slots
        if len(set(names)) != len(names):
            raise ValueError("slot names must be unique")
        rows = tuple(tuple(_to_fraction(c) for c in row) for row in self.deltas)
        for row in rows:
            if len(row) != len(names):
                raise ValueError(
                    f"delta row has {len(row)} coefficients for {len(names)} slots"
                )
            if not any(row):
                raise ValueError("zero delta rows are not allowed")
        object.__setattr__(self, "in_slots", in_slots)
        object.__setattr__(self, "out_slots", out_slots)
        object.__setattr__(self, "deltas", rows)
        object.__setattr__(self, "metadata", tuple(self.metadata))

    @property
    def slots(self) -> tuple:
        return self.out_slots + self.in_slots


def conservation_vector(kernel: MomentumKernel) -> tuple:
    """+1 on every outgoing slot, -1 on every incoming slot."""
    return tuple([Fraction(1)] * len(kernel.out_slots) + [Fraction(-1)] * len(kernel.in_slots))


def _rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list, list]:
    """Reduced row echelon form; returns (nonzero rows, pivot columns)."""
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = 1 / m[r][c]
        m[r] = [inv * v for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return [m[i] for i in range(r)], pivots


def _reduce_against(vector, rref_rows, pivots) -> list:
    v = list(vector)
    for row, p in zip(rref_rows, pivots):
        if v[p] != 0:
            f = v[p]
            v = [a - f * b for a, b in zip(v, row)]
    return v


def _in_span(vector, rref_rows, pivots) -> bool:
    return not any(_reduce_against(vector, rref_rows, pivots))


def _support(row) -> tuple:
    return tuple(i for i, c in enumerate(row) if c != 0)


def _residual_rows(basis, c) -> list:
    """Spanning complement of c inside the row space, rows in support order.

    Greedy over the reduced basis sorted by lexicographic support: keep a row
    whenever it is independent of c together with the rows kept so far.  This
    projects the conservation constraint out of the spanning role and leaves
    the residual constraints.
    """
    kept: list = []
    for row in sorted(basis, key=_support):
        candidate = [list(c)] + [list(k) for k in kept] + [list(row)]
        rref_rows, _ = _rref(candidate)
        if len(rref_rows) > len(kept) + 1:
            kept.append(row)
    return kept


@dataclass(frozen=True)
class ClusterVerdict:
    """Outcome of the elimination: does the kernel factorize correctly?"""

    conserves_momentum: bool
    compliant: bool
    rank: int
    witness: Optional[tuple]  # (coefficients, support slot names)


def analyze(kernel: MomentumKernel) -> ClusterVerdict:
    """Decide compliance: the row space must equal span{conservation vector}.

    A kernel with no deltas at all conserves nothing; extra independent rows
    produce a witness constraint on a proper subset of the slots, chosen as
    the reduced basis row with lexicographically smallest support.
    """
    basis, pivots = _rref(kernel.deltas)
    rank = len(basis)
    c = list(conservation_vector(kernel))
    conserves = rank > 0 and _in_span(c, basis, pivots)
    compliant = conserves and rank == 1
    witness = None
    if not compliant and rank > 0:
        if conserves:
            residuals = _residual_rows(basis, c)
            chosen = residuals[0]
        else:
            chosen = min(basis, key=_support)
        names = kernel.slots
        witness = (
            tuple(chosen),
            tuple(names[i] for i in _support(chosen)),
        )
    return ClusterVerdict(
        conserves_momentum=conserves,
        compliant=compliant,
        rank=rank,
        witness=witness,
    )


def canonicalize(kernel: MomentumKernel) -> MomentumKernel:
    """Rewrite the deltas as (conservation vector, reduced residual rows).

    Requires a conserving kernel; the row space is verified unchanged by
    mutual containment under elimination.
    """
    basis, pivots = _rref(kernel.deltas)
    c = list(conservation_vector(kernel))
    if not (basis and _in_span(c, basis, pivots)):
        raise NotConserving("kernel does not contain overall momentum conservation")
    residuals = _residual_rows(basis, c)
    new_rows = [tuple(c)] + [tuple(r) for r in residuals]
    new_basis, new_pivots = _rref(new_rows)
    for row in kernel.deltas:
        if any(_reduce_against(row, new_basis, new_pivots)):
            raise RuntimeError("canonical rows lost part of the row space")
    for row in new_rows:
        if any(_reduce_against(row, basis, pivots)):
            raise RuntimeError("canonical rows added to the row space")
    return MomentumKernel(
        in_slots=kernel.in_slots,
        out_slots=kernel.out_slots,
        deltas=tuple(new_rows),
        smooth_prefactor_present=kernel.smooth_prefactor_present,
        metadata=kernel.metadata,
    )


def format_constraint(kernel: MomentumKernel, coefficients) -> str:
    """Human-readable form of a delta row, e.g. 'q1 + q2 - p1 - p2'."""
    names = kernel.slots
    parts = []
    for name, coeff in zip(names, coefficients):
        if coeff == 0:
            continue
        sign = "-" if coeff < 0 else "+"
        mag = abs(coeff)
        term = name if mag == 1 else f"{mag}*{name}"
        if not parts:
            parts.append(term if sign == "+" else f"-{term}")
        else:
            parts.append(f"{sign} {term}")
    return " ".join(parts) if parts else "0"
