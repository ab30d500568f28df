"""Histories across foliations and the non-narratability verdict."""

import warnings
from fractions import Fraction

import numpy as np
import pytest

from narratables.errors import FoliationMismatch, LittleGroupWarning
from narratables.geometry import Event, Foliation, Worldline, rest_foliation
from narratables.narrative import (
    REFOLIATION_NOTE,
    InteractionRule,
    Scenario,
    compare_histories,
    evolve,
    flip_rule,
    free_rule,
    histories_equal,
    narratability_report,
    render_report,
)
from narratables.quantum import (
    SpinState,
    apply_contact,
    equal_up_to_phase,
    singlet_product,
    swap_unitary,
)

F = Fraction

X_BOOST = Foliation((F(3, 5), F(0), F(0)))
Y_BOOST = Foliation((F(0), F(1, 2), F(0)))


def demo_scenario(initial=None):
    half = F(1, 2)
    lines = (
        Worldline(0, "s1", Event.of(0, -1, 0, 0), (0, 0, 0)),
        Worldline(1, "s2", Event.of(0, 1, 0, 0), (0, 0, 0)),
        Worldline(2, "s3", Event.of(0, -1, 2, 0), (0, -half, 0)),
        Worldline(3, "s4", Event.of(0, 1, 2, 0), (0, -half, 0)),
    )
    if initial is None:
        initial = singlet_product(4, [(0, 1), (2, 3)])
    return Scenario(name="demo", worldlines=lines, initial_state=initial)


def test_rule_lookup():
    rule = InteractionRule("r", ((("a", "b"), swap_unitary()),))
    assert np.array_equal(rule.unitary_for("b", "a").matrix, swap_unitary().matrix)
    assert np.array_equal(rule.unitary_for("a", "c").matrix, np.eye(4))
    with_default = InteractionRule("d", (), default=swap_unitary())
    assert np.array_equal(with_default.unitary_for("x", "y").matrix, swap_unitary().matrix)


def test_scenario_validation():
    lines = demo_scenario().worldlines
    with pytest.raises(ValueError):
        Scenario("bad", lines[:3], singlet_product(4, [(0, 1), (2, 3)]))  # ids 0..2 vs 4 slots
    with pytest.raises(ValueError):
        Scenario(
            "bad",
            (lines[0], lines[2].__class__(1, "s3", lines[2].start, lines[2].velocity)),
            singlet_product(4, [(0, 1), (2, 3)]),
        )


def test_evolve_free_rule_is_inert():
    history = evolve(demo_scenario(), rest_foliation(), free_rule())
    assert history.groups == ()
    assert len(history.segments) == 1
    assert len(history.inert_groups) == 1
    assert history.inert_groups[0].core == F(4)


def test_evolve_rest_flip_round_trip():
    scenario = demo_scenario()
    history = evolve(scenario, rest_foliation(), flip_rule())
    assert history.breakpoints == (F(4),)
    assert len(history.segments) == 2
    assert equal_up_to_phase(history.segments[0], history.segments[1])
    # both swaps on one leaf reconstitute the double singlet exactly
    assert np.max(np.abs(
        history.segments[1].amplitudes - scenario.initial_state.amplitudes
    )) <= 1e-12


def test_evolve_x_boost_three_segments():
    scenario = demo_scenario()
    history = evolve(scenario, X_BOOST, flip_rule())
    assert history.cores == (F(17, 5), F(23, 5))
    assert history.breakpoints == (F(17, 4), F(23, 4))
    assert len(history.segments) == 3
    middle = history.segments[1].amplitudes
    expected = {3: -0.5, 5: 0.5, 10: 0.5, 12: -0.5}
    for i in range(16):
        assert middle[i] == pytest.approx(expected.get(i, 0.0), abs=1e-15)
    assert equal_up_to_phase(history.segments[0], history.segments[2])


def test_history_right_continuous_at_breakpoints():
    history = evolve(demo_scenario(), X_BOOST, flip_rule())
    assert np.array_equal(
        history.state_at_core(F(17, 5)).amplitudes, history.segments[1].amplitudes
    )
    assert np.array_equal(
        history.state_at_core(F(17, 5) - F(1, 1000)).amplitudes,
        history.segments[0].amplitudes,
    )
    assert np.array_equal(
        history.state_at(float(F(23, 4))).amplitudes, history.segments[2].amplitudes
    )


def test_histories_equal_rest_but_not_boosted():
    scenario = demo_scenario()
    free, flip = free_rule(), flip_rule()
    h_free = evolve(scenario, rest_foliation(), free)
    h_flip = evolve(scenario, rest_foliation(), flip)
    assert histories_equal(h_free, h_flip)
    assert histories_equal(h_free, h_free)

    b_free = evolve(scenario, X_BOOST, free)
    b_flip = evolve(scenario, X_BOOST, flip)
    comparison = compare_histories(b_free, b_flip)
    assert not comparison.equal
    assert comparison.witness_core == F(17, 5)
    assert comparison.witness_tau == F(17, 4)
    assert comparison.witness_overlap == pytest.approx(0.5, abs=1e-10)
    assert comparison.min_overlap == pytest.approx(0.5, abs=1e-10)


def test_comparison_sample_grid():
    scenario = demo_scenario()
    comparison = compare_histories(
        evolve(scenario, X_BOOST, free_rule()), evolve(scenario, X_BOOST, flip_rule())
    )
    cores = [c for c, _, _ in comparison.samples]
    # one point before, the two cores, the midpoint, one point after
    assert cores == [F(12, 5), F(17, 5), F(4), F(23, 5), F(28, 5)]
    taus = [t for _, t, _ in comparison.samples]
    assert taus == [F(3), F(17, 4), F(5), F(23, 4), F(7)]


def test_compare_requires_same_foliation():
    scenario = demo_scenario()
    with pytest.raises(FoliationMismatch):
        compare_histories(
            evolve(scenario, rest_foliation(), free_rule()),
            evolve(scenario, X_BOOST, free_rule()),
        )


def test_x_boost_sweep_and_y_boost():
    scenario = demo_scenario()
    for vx in (F(3, 5), F(4, 5), F(-3, 5)):
        fol = Foliation((vx, F(0), F(0)))
        assert not histories_equal(
            evolve(scenario, fol, free_rule()), evolve(scenario, fol, flip_rule())
        )
    for vy in (F(1, 2), F(-1, 2)):
        fol = Foliation((F(0), vy, F(0)))
        assert histories_equal(
            evolve(scenario, fol, free_rule()), evolve(scenario, fol, flip_rule())
        )


def test_same_group_sequence_gives_same_segments():
    # rest and y-boost induce the identical one-group schedule, so the
    # flip histories agree segment by segment (exact amplitudes)
    scenario = demo_scenario()
    at_rest = evolve(scenario, rest_foliation(), flip_rule())
    boosted = evolve(scenario, Y_BOOST, flip_rule())
    assert [g.pairs for g in at_rest.groups] == [g.pairs for g in boosted.groups]
    for a, b in zip(at_rest.segments, boosted.segments):
        assert np.array_equal(a.amplitudes, b.amplitudes)


def test_report_flags_non_narratable():
    report = narratability_report(
        demo_scenario(),
        free_rule(),
        flip_rule(),
        [rest_foliation(), X_BOOST, Y_BOOST],
    )
    assert report.non_narratable
    assert [v.equal for v in report.verdicts] == [True, False, True]
    # verdicts expose the raw crossing schedule, rule-independent
    assert [len(v.groups) for v in report.verdicts] == [1, 2, 1]
    rows = report.csv_rows()
    assert len(rows) == sum(len(v.comparison.samples) for v in report.verdicts)
    assert all(isinstance(tau, float) for _, tau, _ in rows)


def test_report_not_flagged_when_all_equal_or_all_differ():
    scenario = demo_scenario()
    equal_only = narratability_report(
        scenario, free_rule(), flip_rule(), [rest_foliation(), Y_BOOST]
    )
    assert not equal_only.non_narratable
    assert all(v.equal for v in equal_only.verdicts)
    differ_only = narratability_report(
        scenario,
        free_rule(),
        flip_rule(),
        [X_BOOST, Foliation((F(4, 5), F(0), F(0)))],
    )
    assert not differ_only.non_narratable
    assert not any(v.equal for v in differ_only.verdicts)
    free_vs_free = narratability_report(
        scenario, free_rule(), free_rule(), [rest_foliation(), X_BOOST]
    )
    assert not free_vs_free.non_narratable


def test_report_symmetry_and_phase_insensitivity():
    scenario = demo_scenario()
    foliations = [rest_foliation(), X_BOOST, Y_BOOST]
    fwd = narratability_report(scenario, free_rule(), flip_rule(), foliations)
    rev = narratability_report(scenario, flip_rule(), free_rule(), foliations)
    assert [v.equal for v in fwd.verdicts] == [v.equal for v in rev.verdicts]

    rotated = demo_scenario(
        SpinState(4, singlet_product(4, [(0, 1), (2, 3)]).amplitudes * np.exp(0.3j))
    )
    spun = narratability_report(rotated, free_rule(), flip_rule(), foliations)
    assert [v.equal for v in spun.verdicts] == [v.equal for v in fwd.verdicts]


def test_report_needs_two_foliations():
    with pytest.raises(ValueError):
        narratability_report(
            demo_scenario(), free_rule(), flip_rule(), [rest_foliation()]
        )


def test_render_report_wording():
    report = narratability_report(
        demo_scenario(),
        free_rule(),
        flip_rule(),
        [rest_foliation(), X_BOOST, Y_BOOST],
    )
    text = render_report(report)
    assert "NON_NARRATABLE" in text
    assert "DIFFER at tau = 17/4" in text
    assert "|overlap| = 0.5" in text
    assert "verdict: EQUAL" in text
    assert REFOLIATION_NOTE in text
    assert "\x1b[" not in text
    colored = render_report(report, colorize=True)
    assert "\x1b[31m" in colored and "\x1b[32m" in colored


def test_little_group_guard():
    e0 = np.zeros(16)
    e0[0] = 1.0  # |++++>, total spin 2 along z
    spinning = demo_scenario(SpinState(4, e0))
    with pytest.warns(LittleGroupWarning):
        evolve(spinning, X_BOOST, flip_rule())
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        evolve(spinning, rest_foliation(), flip_rule())  # rest frame: no guard
        evolve(demo_scenario(), X_BOOST, flip_rule())  # spin zero: no guard


def test_free_rule_constant_everywhere():
    scenario = demo_scenario()
    for fol in (rest_foliation(), X_BOOST, Y_BOOST):
        history = evolve(scenario, fol, free_rule())
        for segment in history.segments:
            assert np.array_equal(
                segment.amplitudes, scenario.initial_state.amplitudes
            )


def test_mixed_rule_fires_only_matching_species():
    # a rule that swaps only the (s2, s4) collision: the (s1, s3) crossing
    # stays inert, leaving one breakpoint under the x boost
    rule = InteractionRule("partial", ((("s2", "s4"), swap_unitary()),))
    history = evolve(demo_scenario(), X_BOOST, rule)
    assert len(history.groups) == 1
    assert history.groups[0].pairs == ((1, 3),)
    assert len(history.inert_groups) == 1
    assert history.inert_groups[0].pairs == ((0, 2),)
