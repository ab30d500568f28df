"""Command-line front end.

Subcommands: demo-paper, simulate, compare-frames, cluster-check, and the
algebra group (residuals, solve-w, same-history, boost-check).  Exit codes:
0 success/compliant, 2 cluster violation, 3 non-conserving kernel, 4 parse
error, 5 unknown rule, 6 index out of range, 7 other domain errors, 64 usage.
Set NARRATABLES_COLOR to auto (default), never, or always.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from importlib import resources

import numpy as np

from . import algebra, clusterkit, fileio
from .errors import IndexOutOfRange, NarratablesError, ParseError, UnknownRule
from .geometry import Event, Foliation, Worldline
from .narrative import (
    Scenario,
    evolve,
    flip_rule,
    free_rule,
    narratability_report,
    render_report,
)
from .quantum import overlap, singlet_product

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_NONCONSERVING = 3
EXIT_PARSE = 4
EXIT_UNKNOWN_RULE = 5
EXIT_INDEX = 6
EXIT_DOMAIN = 7
EXIT_USAGE = 64

BUILTIN_KERNELS = {
    "spin-swap": "spin_swap.kernel.json",
    "single-delta": "single_delta.kernel.json",
}


def _color_enabled() -> bool:
    mode = os.environ.get("NARRATABLES_COLOR", "auto")
    if mode == "always":
        return True
    if mode == "never":
        return False
    return sys.stdout.isatty()


def _fmt_scalar(value) -> str:
    if isinstance(value, Fraction):
        return str(value)
    return f"{float(value):.12g}"


def _fmt_amplitude(z: complex) -> str:
    if abs(z.imag) <= 1e-12:
        return f"{z.real:+.12g}"
    if abs(z.real) <= 1e-12:
        return f"{z.imag:+.12g}i"
    return f"({z.real:+.12g}{z.imag:+.12g}i)"


def _write_overlap_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("foliation_id,tau,overlap_magnitude\n")
        for foliation_id, tau, mag in rows:
            fh.write(f"{foliation_id},{float(tau):.17g},{float(mag):.17g}\n")


def built_in_demo() -> fileio.ScenarioBundle:
    """The crossing-singlets scenario, same data as data/demo_scenario.json."""
    zero = Fraction(0)
    half = Fraction(1, 2)
    lines = (
        Worldline(0, "s1", Event.of(0, -1, 0, 0), (zero, zero, zero)),
        Worldline(1, "s2", Event.of(0, 1, 0, 0), (zero, zero, zero)),
        Worldline(2, "s3", Event.of(0, -1, 2, 0), (zero, -half, zero)),
        Worldline(3, "s4", Event.of(0, 1, 2, 0), (zero, -half, zero)),
    )
    scenario = Scenario(
        name="two-singlet crossing",
        worldlines=lines,
        initial_state=singlet_product(4, [(0, 1), (2, 3)]),
    )
    foliations = [
        Foliation((zero, zero, zero)),
        Foliation((Fraction(3, 5), zero, zero)),
        Foliation((zero, half, zero)),
    ]
    return fileio.ScenarioBundle(
        scenario=scenario,
        rules={"free": free_rule(), "flip": flip_rule()},
        foliations=foliations,
    )


def cmd_demo_paper(args) -> int:
    bundle = built_in_demo()
    report = narratability_report(
        bundle.scenario,
        bundle.rules["free"],
        bundle.rules["flip"],
        bundle.foliations,
        tol=args.tolerance,
    )
    print(render_report(report, colorize=_color_enabled()))
    if args.csv:
        _write_overlap_csv(args.csv, report.csv_rows())
    return EXIT_OK


def _resolve_rule(bundle, name: str):
    if name not in bundle.rules:
        raise UnknownRule(
            f"rule {name!r} not defined; choose from {sorted(bundle.rules)}"
        )
    return bundle.rules[name]


def _resolve_foliation(bundle, index: int) -> Foliation:
    if not 0 <= index < len(bundle.foliations):
        raise IndexOutOfRange(
            f"foliation index {index} outside 0..{len(bundle.foliations) - 1}"
        )
    return bundle.foliations[index]


def cmd_simulate(args) -> int:
    bundle = fileio.load_scenario_file(args.scenario)
    rule = _resolve_rule(bundle, args.rule)
    foliation = _resolve_foliation(bundle, args.foliation)
    history = evolve(bundle.scenario, foliation, rule)

    vel = ", ".join(_fmt_scalar(c) for c in foliation.velocity)
    print(f"scenario: {bundle.scenario.name}")
    print(f"rule: {rule.name}")
    print(f"foliation {args.foliation}: v = ({vel}), gamma = {_fmt_scalar(foliation.gamma)}")
    print(f"collision leaves: {len(history.groups)}")
    for g in history.groups:
        pairs = ", ".join(f"({a},{b})" for a, b in g.pairs)
        events = ", ".join(
            "(t={}, x={}, y={}, z={})".format(*(map(_fmt_scalar, e.coordinates())))
            for _, e in g.collisions
        )
        print(f"  tau = {_fmt_scalar(g.tau)}: pairs {pairs} at {events}")
    if history.inert_groups:
        print(f"inert crossings (identity unitary): {len(history.inert_groups)}")
    taus = history.breakpoints
    print(f"segments: {len(history.segments)}")
    for i, segment in enumerate(history.segments):
        if not taus:
            span = "all tau"
        elif i == 0:
            span = f"tau < {_fmt_scalar(taus[0])}"
        elif i == len(taus):
            span = f"tau >= {_fmt_scalar(taus[-1])}"
        else:
            span = f"{_fmt_scalar(taus[i - 1])} <= tau < {_fmt_scalar(taus[i])}"
        print(f"segment {i} ({span}):")
        for label, amp in segment.nonzero_terms():
            print(f"  |{label}> {_fmt_amplitude(amp)}")

    if args.csv:
        if taus:
            lo, hi = float(taus[0]) - 1.0, float(taus[-1]) + 1.0
        else:
            lo, hi = -1.0, 1.0
        initial = history.segments[0]
        rows = []
        for k in range(args.tau_grid):
            tau = lo + (hi - lo) * k / (args.tau_grid - 1) if args.tau_grid > 1 else lo
            state = history.state_at(tau)
            rows.append((args.foliation, tau, abs(overlap(initial, state))))
        _write_overlap_csv(args.csv, rows)
    return EXIT_OK


def cmd_compare_frames(args) -> int:
    bundle = fileio.load_scenario_file(args.scenario)
    rule_a = _resolve_rule(bundle, args.rules[0])
    rule_b = _resolve_rule(bundle, args.rules[1])
    report = narratability_report(
        bundle.scenario, rule_a, rule_b, bundle.foliations, tol=args.tolerance
    )
    print(render_report(report, colorize=_color_enabled()))
    if args.csv:
        _write_overlap_csv(args.csv, report.csv_rows())
    return EXIT_OK


def _kernel_from_args(args) -> clusterkit.MomentumKernel:
    if args.builtin:
        name = BUILTIN_KERNELS[args.builtin]
        path = resources.files("narratables").joinpath("data", name)
        return fileio.parse_kernel(json.loads(path.read_text()), f"builtin:{args.builtin}")
    if not args.kernel:
        raise ParseError("give a kernel file path or --builtin NAME")
    return fileio.load_kernel_file(args.kernel)


def cmd_cluster_check(args) -> int:
    kernel = _kernel_from_args(args)
    verdict = clusterkit.analyze(kernel)
    colorize = _color_enabled()

    out = ", ".join(kernel.out_slots)
    inn = ", ".join(kernel.in_slots)
    print(f"kernel: {len(kernel.out_slots)} out ({out}), {len(kernel.in_slots)} in ({inn})")
    print("deltas:")
    for row in kernel.deltas:
        print(f"  {clusterkit.format_constraint(kernel, row)}")
    print(f"smooth prefactor present: {'yes' if kernel.smooth_prefactor_present else 'no'}")
    print(f"conserves momentum: {'yes' if verdict.conserves_momentum else 'no'}")
    print(f"constraint rank: {verdict.rank}")
    if verdict.conserves_momentum:
        canonical = clusterkit.canonicalize(kernel)
        print("canonical form:")
        for row in canonical.deltas:
            print(f"  {clusterkit.format_constraint(canonical, row)}")

    def paint(text, code):
        return f"\x1b[{code}m{text}\x1b[0m" if colorize else text

    if verdict.compliant:
        print("verdict: " + paint("COMPLIANT", "32") + " (overall momentum conservation only)")
        return EXIT_OK
    if verdict.conserves_momentum:
        coeffs, support = verdict.witness
        constraint = clusterkit.format_constraint(kernel, coeffs)
        subset = ", ".join(support)
        print(
            "verdict: "
            + paint("VIOLATION", "31")
            + f" (extra delta on proper subset {{{subset}}}: {constraint})"
        )
        return EXIT_VIOLATION
    print("verdict: " + paint("NON-CONSERVING", "1;31")
          + " (overall momentum conservation is absent)")
    return EXIT_NONCONSERVING


def cmd_algebra_residuals(args) -> int:
    doc = fileio._load_json(args.generators)
    if not isinstance(doc, dict):
        raise ParseError(f"{args.generators}: expected an object of named generators")
    allowed = ("H", "P1", "P2", "P3", "J1", "J2", "J3", "K1", "K2", "K3")
    unknown = [k for k in doc if k not in allowed]
    if unknown:
        raise ParseError(
            f"{args.generators}: unknown generator names {unknown}; allowed: {list(allowed)}"
        )
    matrices = {
        name: fileio.parse_matrix(value, f"{args.generators}.{name}")
        for name, value in doc.items()
    }
    gens = algebra.GeneratorSet(**matrices)
    print(f"generators: {', '.join(sorted(matrices))} (dim {gens.dim})")
    print("hermiticity defects:")
    for name, defect in gens.hermiticity_residuals().items():
        print(f"  {name}: {defect:.12g}")
    print("bracket residuals (Frobenius norms):")
    for name, value in algebra.bracket_residuals(gens).items():
        print(f"  {name}: {value:.12g}")
    return EXIT_OK


def cmd_algebra_solve_w(args) -> int:
    system = algebra.SplitSystem(
        H0=fileio.load_matrix_file(args.h0),
        V=fileio.load_matrix_file(args.v),
        K0=(fileio.load_matrix_file(args.k0),),
    )
    solution = algebra.solve_W(system)
    print(f"dimension: {system.H0.shape[0]}")
    print("W:")
    for row in solution.W:
        print("  [" + "  ".join(_fmt_amplitude(z) for z in row) + "]")
    print(f"residual |[K0,V] + [W,H]|_F = {solution.residual:.12g}")
    print(f"hermiticity defect of W: {algebra.hermiticity_defect(solution.W):.12g}")
    if solution.degenerate_obstructions:
        pairs = ", ".join(f"({a},{b})" for a, b in solution.degenerate_obstructions)
        print(f"degenerate obstructions: {pairs}")
    else:
        print("degenerate obstructions: none")
    return EXIT_OK


def _parse_times(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError as exc:
        raise ParseError(f"--times: cannot parse {text!r}") from exc


def cmd_algebra_same_history(args) -> int:
    psi0 = fileio.load_vector_file(args.psi0)
    norm = np.linalg.norm(psi0)
    if norm == 0:
        raise ParseError(f"{args.psi0}: zero vector")
    if abs(norm - 1.0) > 1e-12:
        psi0 = psi0 / norm
    same, samples = algebra.same_history_check(
        fileio.load_matrix_file(args.h0),
        fileio.load_matrix_file(args.va),
        fileio.load_matrix_file(args.vb),
        psi0,
        _parse_times(args.times),
    )
    print(f"same history: {'yes' if same else 'no'}")
    for t, c in samples:
        print(f"  t = {t:.12g}: c = {_fmt_amplitude(c)}, |c| = {abs(c):.12g}")
    return EXIT_OK


def cmd_algebra_boost_check(args) -> int:
    w = fileio.load_matrix_file(args.w)
    psi = fileio.load_vector_file(args.psi)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ParseError(f"{args.psi}: zero vector")
    if abs(norm - 1.0) > 1e-12:
        psi = psi / norm
    nontrivial = algebra.boost_nontriviality_check(w, psi)
    image = w @ psi
    residual = float(np.linalg.norm(image - np.vdot(psi, image) * psi))
    print(f"W acts nontrivially on psi: {'yes' if nontrivial else 'no'} "
          f"(residual norm = {residual:.12g})")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # keep exit code 2 free for cluster violations
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="narratables", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    demo = sub.add_parser("demo-paper", help="run the built-in crossing-singlets demo")
    demo.add_argument("--csv", help="write overlap samples as CSV")
    demo.add_argument("--tolerance", type=float, default=1e-10,
                      help="history comparison tolerance (default 1e-10)")
    demo.set_defaults(func=cmd_demo_paper)

    sim = sub.add_parser("simulate", help="evolve one scenario/rule/foliation")
    sim.add_argument("scenario", help="scenario JSON file")
    sim.add_argument("--rule", required=True, help="rule name from the file")
    sim.add_argument("--foliation", type=int, required=True,
                     help="index into the file's foliation list")
    sim.add_argument("--csv", help="write overlap-with-initial samples as CSV")
    sim.add_argument("--tau-grid", type=int, default=41,
                     help="number of tau samples for --csv (default 41)")
    sim.set_defaults(func=cmd_simulate)

    cmp_ = sub.add_parser("compare-frames", help="two rules across the file's foliations")
    cmp_.add_argument("scenario", help="scenario JSON file")
    cmp_.add_argument("--rules", nargs=2, default=("free", "flip"),
                      metavar=("RULE_A", "RULE_B"))
    cmp_.add_argument("--csv", help="write overlap samples as CSV")
    cmp_.add_argument("--tolerance", type=float, default=1e-10,
                      help="history comparison tolerance (default 1e-10)")
    cmp_.set_defaults(func=cmd_compare_frames)

    clu = sub.add_parser("cluster-check", help="momentum-delta compliance linter")
    clu.add_argument("kernel", nargs="?", help="kernel JSON file")
    clu.add_argument("--builtin", choices=sorted(BUILTIN_KERNELS),
                     help="use a bundled kernel instead of a file")
    clu.set_defaults(func=cmd_cluster_check)

    alg = sub.add_parser("algebra", help="commutator diagnostics")
    alg_sub = alg.add_subparsers(dest="subcommand", required=True)

    res = alg_sub.add_parser("residuals", help="bracket residual table")
    res.add_argument("generators", help="JSON object of named generator matrices")
    res.set_defaults(func=cmd_algebra_residuals)

    sw = alg_sub.add_parser("solve-w", help="boost correction from [K0,V] = -[W,H]")
    sw.add_argument("h0", help="free Hamiltonian matrix file")
    sw.add_argument("v", help="interaction matrix file")
    sw.add_argument("k0", help="free boost generator matrix file")
    sw.set_defaults(func=cmd_algebra_solve_w)

    sh = alg_sub.add_parser("same-history", help="compare two interaction pictures")
    sh.add_argument("h0", help="free Hamiltonian matrix file")
    sh.add_argument("va", help="first interaction matrix file")
    sh.add_argument("vb", help="second interaction matrix file")
    sh.add_argument("psi0", help="initial state vector file")
    sh.add_argument("--times", default="0,0.25,0.5,0.75,1",
                    help="comma-separated sample times (default 0..1)")
    sh.set_defaults(func=cmd_algebra_same_history)

    bc = alg_sub.add_parser("boost-check", help="does W move the state?")
    bc.add_argument("w", help="boost correction matrix file")
    bc.add_argument("psi", help="state vector file")
    bc.set_defaults(func=cmd_algebra_boost_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except UnknownRule as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN_RULE
    except IndexOutOfRange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INDEX
    except (NarratablesError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
