"""State histories along foliations, and their frame-by-frame comparison.

A history is piecewise constant in the leaf parameter tau and right-continuous
at collision leaves.  Evolving the same scenario under two interaction rules
and several foliations yields a report; when the two rules agree under at
least one foliation and disagree under another, the pair of histories is
flagged NON_NARRATABLE: no single leaf-by-leaf record pins down the dynamics.

Boosted histories are obtained by re-grouping the same collision events under
the boosted leaves, not by actively transforming the states; the zero
angular-momentum guard in `evolve` is what licenses that shortcut.
"""

from __future__ import annotations

import warnings
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import CoincidentWorldlines, FoliationMismatch, LittleGroupWarning
from .geometry import Foliation, Scalar, collision_schedule
from .quantum import (
    SpinState,
    TwoSlotUnitary,
    angular_momentum_norms,
    apply_group,
    identity_unitary,
    overlap,
    swap_unitary,
)

COMPARISON_TOLERANCE = 1e-10
SPIN_GUARD_TOLERANCE = 1e-6

REFOLIATION_NOTE = (
    "histories are re-foliated rather than actively boosted; the zero "
    "angular-momentum guard certifies trivial spin transport"
)


def _pair_key(a: str, b: str) -> frozenset:
    return frozenset((a, b))


@dataclass(frozen=True, eq=False)
class InteractionRule:
    """Contact unitaries keyed by unordered species pair.

    Pairs without an entry fall back to `default` (identity when None).  A
    unitary acts on the colliding slots ordered by slot index.
    """

    name: str
    mapping: tuple = ()  # ((species_a, species_b), TwoSlotUnitary) entries
    default: Optional[TwoSlotUnitary] = None

    def __post_init__(self):
        table = {}
        for key, u in self.mapping:
            a, b = key
            if not isinstance(u, TwoSlotUnitary):
                u = TwoSlotUnitary(u)
            table[_pair_key(a, b)] = u
        object.__setattr__(self, "_table", table)

    def unitary_for(self, species_a: str, species_b: str) -> TwoSlotUnitary:
        u = self._table.get(_pair_key(species_a, species_b))
        if u is not None:
            return u
        if self.default is not None:
            return self.default
        return identity_unitary()


def free_rule() -> InteractionRule:
    return InteractionRule("free")


def flip_rule() -> InteractionRule:
    """Every collision exchanges the two spins, whatever the species."""
    return InteractionRule("flip", default=swap_unitary())


@dataclass(frozen=True, eq=False)
class Scenario:
    """Worldlines plus the joint spin state on their slots."""

    name: str
    worldlines: tuple
    initial_state: SpinState

    def __post_init__(self):
        lines = tuple(sorted(self.worldlines, key=lambda w: w.id))
        object.__setattr__(self, "worldlines", lines)
        ids = [w.id for w in lines]
        if ids != list(range(len(lines))):
            raise ValueError(f"worldline ids must be 0..{len(lines) - 1}, got {ids}")
        if self.initial_state.n_slots != len(lines):
            raise ValueError(
                f"state has {self.initial_state.n_slots} slots for {len(lines)} worldlines"
            )
        for i in range(len(lines)):
            for j in range(i + 1, len(lines)):
                if (
                    lines[i].velocity == lines[j].velocity
                    and lines[i].base_point() == lines[j].base_point()
                ):
                    raise CoincidentWorldlines(
                        f"worldlines {lines[i].id} and {lines[j].id} coincide"
                    )

    def species_of(self, slot: int) -> str:
        return self.worldlines[slot].species


@dataclass(frozen=True, eq=False)
class History:
    """Piecewise-constant record of the state along one foliation.

    Only collision groups that fire a non-identity unitary become
    breakpoints; crossings the rule leaves inert are kept separately.
    """

    foliation: Foliation
    groups: tuple  # CollisionGroup, ordered by tau
    segments: tuple  # SpinState, one more than groups
    inert_groups: tuple = ()

    def __post_init__(self):
        if len(self.segments) != len(self.groups) + 1:
            raise ValueError("need exactly one more segment than breakpoints")

    @property
    def cores(self) -> tuple:
        return tuple(g.core for g in self.groups)

    @property
    def breakpoints(self) -> tuple:
        return tuple(g.tau for g in self.groups)

    def state_at_core(self, core: Scalar) -> SpinState:
        # right-continuous: on a collision leaf the new segment already holds
        return self.segments[bisect_right(self.cores, core)]

    def state_at(self, tau) -> SpinState:
        return self.segments[bisect_right([float(t) for t in self.breakpoints], float(tau))]


def evolve(scenario: Scenario, foliation: Foliation, rule: InteractionRule) -> History:
    """Run the scenario leaf by leaf under one foliation and rule."""
    if not foliation.is_rest:
        if max(angular_momentum_norms(scenario.initial_state)) > SPIN_GUARD_TOLERANCE:
            warnings.warn(
                "initial state carries nonzero total spin; re-foliated history "
                "ignores the boost's action on spins",
                LittleGroupWarning,
                stacklevel=2,
            )
    schedule = collision_schedule(scenario.worldlines, foliation)
    identity = np.eye(4, dtype=complex)
    fired, inert = [], []
    segments = [scenario.initial_state]
    for group in schedule:
        actions = []
        for (a, b), _event in group.collisions:
            u = rule.unitary_for(scenario.species_of(a), scenario.species_of(b))
            actions.append((u, (a, b)))
        if all(np.array_equal(u.matrix, identity) for u, _ in actions):
            inert.append(group)
            continue
        fired.append(group)
        segments.append(apply_group(segments[-1], actions))
    return History(
        foliation=foliation,
        groups=tuple(fired),
        segments=tuple(segments),
        inert_groups=tuple(inert),
    )


@dataclass(frozen=True)
class HistoryComparison:
    equal: bool
    witness_core: Optional[Scalar]
    witness_tau: Optional[Scalar]
    witness_overlap: Optional[float]
    samples: tuple  # (core, tau, |overlap|)
    min_overlap: float


def _merge_cores(h1: History, h2: History) -> list:
    exact = h1.foliation.exact
    cores = list(h1.cores) + list(h2.cores)
    if exact:
        return sorted(set(cores))
    merged: list = []
    for c in sorted(cores):
        if not merged or c - merged[-1] > 1e-9:
            merged.append(c)
    return merged


def compare_histories(
    h1: History, h2: History, tol: float = COMPARISON_TOLERANCE
) -> HistoryComparison:
    """Sample both histories at breakpoints and interval midpoints."""
    if h1.foliation != h2.foliation:
        raise FoliationMismatch(
            f"cannot compare histories under {h1.foliation.velocity} and "
            f"{h2.foliation.velocity}"
        )
    cores = _merge_cores(h1, h2)
    if cores:
        points = [cores[0] - 1]
        for i, c in enumerate(cores):
            points.append(c)
            if i + 1 < len(cores):
                points.append((c + cores[i + 1]) / 2)
        points.append(cores[-1] + 1)
    else:
        points = [Fraction(0) if h1.foliation.exact else 0.0]

    gamma = h1.foliation.gamma
    samples = []
    witness = None
    for c in points:
        mag = abs(overlap(h1.state_at_core(c), h2.state_at_core(c)))
        samples.append((c, gamma * c, mag))
        if witness is None and abs(mag - 1.0) > tol:
            witness = (c, gamma * c, mag)
    min_overlap = min(s[2] for s in samples)
    if witness is None:
        return HistoryComparison(True, None, None, None, tuple(samples), min_overlap)
    return HistoryComparison(
        False, witness[0], witness[1], witness[2], tuple(samples), min_overlap
    )


def histories_equal(h1: History, h2: History, tol: float = COMPARISON_TOLERANCE) -> bool:
    """True when the two records agree (up to phase) on every leaf."""
    return compare_histories(h1, h2, tol).equal


@dataclass(frozen=True, eq=False)
class FrameVerdict:
    foliation_index: int
    foliation: Foliation
    groups: tuple
    comparison: HistoryComparison

    @property
    def equal(self) -> bool:
        return self.comparison.equal


@dataclass(frozen=True, eq=False)
class NarratabilityReport:
    scenario_name: str
    rule_names: tuple
    verdicts: tuple

    @property
    def non_narratable(self) -> bool:
        return any(v.equal for v in self.verdicts) and any(
            not v.equal for v in self.verdicts
        )

    def csv_rows(self) -> list[tuple[int, float, float]]:
        rows = []
        for v in self.verdicts:
            for _core, tau, mag in v.comparison.samples:
                rows.append((v.foliation_index, float(tau), mag))
        return rows


def _fmt_scalar(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return f"{float(value):.12g}"


def _paint(text: str, code: str, colorize: bool) -> str:
    return f"\x1b[{code}m{text}\x1b[0m" if colorize else text


def render_report(report: NarratabilityReport, colorize: bool = False) -> str:
    """Structured-text rendering of a narratability report."""
    lines = [
        f"scenario: {report.scenario_name}",
        f"rules: {report.rule_names[0]} vs {report.rule_names[1]}",
        f"note: {REFOLIATION_NOTE}",
        "",
    ]
    for v in report.verdicts:
        vel = ", ".join(_fmt_scalar(c) for c in v.foliation.velocity)
        lines.append(
            f"foliation {v.foliation_index}: v = ({vel}), "
            f"gamma = {_fmt_scalar(v.foliation.gamma)}"
        )
        lines.append(f"  collision leaves: {len(v.groups)}")
        for g in v.groups:
            pairs = ", ".join(f"({a},{b})" for a, b in g.pairs)
            lines.append(f"    tau = {_fmt_scalar(g.tau)}: pairs {pairs}")
        c = v.comparison
        if c.equal:
            lines.append(
                "  verdict: "
                + _paint("EQUAL", "32", colorize)
                + f" (min |overlap| = {c.min_overlap:.12g})"
            )
        else:
            lines.append(
                "  verdict: "
                + _paint("DIFFER", "31", colorize)
                + f" at tau = {_fmt_scalar(c.witness_tau)},"
                + f" |overlap| = {c.witness_overlap:.12g}"
            )
    lines.append("")
    if report.non_narratable:
        eq = next(v.foliation_index for v in report.verdicts if v.equal)
        df = next(v.foliation_index for v in report.verdicts if not v.equal)
        lines.append(
            "summary: "
            + _paint("NON_NARRATABLE", "1;31", colorize)
            + f" (equal under foliation {eq}; differs under foliation {df})"
        )
    elif all(v.equal for v in report.verdicts):
        lines.append(
            "summary: histories agree under every tested foliation"
        )
    else:
        lines.append(
            "summary: histories differ under every tested foliation"
        )
    return "\n".join(lines)


def narratability_report(
    scenario: Scenario,
    rule_a: InteractionRule,
    rule_b: InteractionRule,
    foliations: Sequence[Foliation],
    tol: float = COMPARISON_TOLERANCE,
) -> NarratabilityReport:
    """Evolve under both rules in every frame and compare leaf by leaf."""
    if len(foliations) < 2:
        raise ValueError("need at least two foliations to probe narratability")
    verdicts = []
    for idx, fol in enumerate(foliations):
        ha = evolve(scenario, fol, rule_a)
        hb = evolve(scenario, fol, rule_b)
        verdicts.append(
            FrameVerdict(
                foliation_index=idx,
                foliation=fol,
                # raw schedule: the crossings exist whichever rule fires them
                groups=tuple(collision_schedule(scenario.worldlines, fol)),
                comparison=compare_histories(ha, hb, tol),
            )
        )
    return NarratabilityReport(
        scenario_name=scenario.name,
        rule_names=(rule_a.name, rule_b.name),
        verdicts=tuple(verdicts),
    )
