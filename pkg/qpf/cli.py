"""
Command-line entry point: ``python -m qpf <verb> ...``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .compiler import (
    PulseSequence,
    compile as compile_gate,
    cost_report,
    format_cost,
    fourier_identity,
    playback,
    pulse_cost,
    verify_all,
)
from .config import load_settings
from .entanglement_lab import (
    WeightedGraph,
    am_graph_state,
    ghz_recover,
    graph_state,
    mode_schmidt_rank,
    plus_state_direct,
    plus_state_two_modes,
    schmidt_profile,
    slocc_ghz_check,
    star_terms,
    sweep_jghz,
)
from .errors import QpfError, UnsupportedFormError
from .fock_backend import format_fock_state, hong_ou_mandel, kerr_schedule, verify_fock
from .qutrit_gates import GateId, catalogue, equal_up_to_phase, gate
from .reports import Report, ReportItem
from .spin_algebra import (
    ANGULAR,
    COMPUTATIONAL,
    CONVENTIONS,
    max_deviation,
    property_checks,
    theta_z_anticommutator,
    theta_z_conjugated,
    theta_z_direct,
    theta_z_squared_lmg,
)
from .utils import ANGLE_GRAMMAR_HELP, configure_logging, format_real, get_logger, parse_angle

logger = get_logger(__name__)

GRAPH_GRAMMAR_HELP = (
    "graph files: 'vertices <N>', then 'edges', then one edge per line as "
    "'<u> <v> weight=<angle>' or '<u> <v> mult=<0|1|2>' (0-indexed vertices, '#' comments, no mixing)"
)


def _complex(z: complex) -> str:
    return f"{z.real:+.6f}{z.imag:+.6f}j"


def _matrix_rows(matrix) -> list[str]:
    return ['  ' + '  '.join(_complex(z) for z in row) for row in np.asarray(matrix)]


def _preview(matrix) -> str:
    m = np.asarray(matrix)
    if not np.any(m - np.diag(np.diag(m))):
        return 'diag(' + ', '.join(_complex(z) for z in np.diag(m)) + ')'
    return f"dense {m.shape[0]}x{m.shape[1]}"


def _basis_label(index: int, parties: int, convention) -> str:
    digits = np.unravel_index(index, (3,) * parties)
    if convention is ANGULAR:
        return ''.join('+0-'[int(d)] for d in digits)
    return ''.join(str(int(d)) for d in digits)


def _print_amplitudes(vector, parties: int, convention, out) -> None:
    print(f"amplitudes ({convention.name} ordering):", file=out)
    for index in np.flatnonzero(np.abs(vector) > 1e-12):
        z = vector[index]
        print(f"  {index:3d} |{_basis_label(index, parties, convention)}>  {format_real(z.real)} {format_real(z.imag)}",
              file=out)


def _print_profile(profile, out) -> None:
    print('schmidt profile:', file=out)
    for cut in profile.cuts:
        values = ' '.join(f"{s:.6e}" for s in cut.singular_values)
        print(f"  cut {cut.label}: rank {cut.rank}  singular values {values}", file=out)


def cmd_gates(args, settings, out) -> int:
    if args.show_matrix:
        gid = GateId.parse(args.show_matrix)
        print(f"[{gid.label}]_c", file=out)
        for row in _matrix_rows(gate(gid)):
            print(row, file=out)
        return 0

    print(f"{'gate':<28} {'arity':>5}  {'pulses':<55} matrix", file=out)
    for gid in catalogue():
        cost = format_cost(pulse_cost(compile_gate(gid)))
        print(f"{gid.label:<28} {gid.arity:>5}  {cost:<55} {_preview(gate(gid))}", file=out)
    return 0


def cmd_compile(args, settings, out) -> int:
    gid = GateId.parse(args.gate)
    sequence = compile_gate(gid, args.targets or None)
    text = sequence.to_text()
    if args.out:
        sequence.save(args.out)
        logger.info(f"Wrote {len(sequence)} pulses to {args.out}")
    else:
        out.write(text)
    print(f"# cost {format_cost(pulse_cost(sequence))}", file=out)

    if args.chi is not None or args.chi_cross is not None:
        chi = args.chi if args.chi is not None else 1.0
        for step in kerr_schedule(sequence, chi, args.chi_cross):
            duration = '-' if step.duration is None else format_real(step.duration)
            modes = ','.join(map(str, step.modes)) or '-'
            print(f"# pulse {step.pulse_index} {step.element} modes={modes} "
                  f"phase={format_real(step.phase)} t={duration}", file=out)
    return 0


def cmd_playback(args, settings, out) -> int:
    sequence = PulseSequence.load(args.file)
    convention = CONVENTIONS[args.convention]
    unitary = playback(sequence, convention)
    print(f"playback of {len(sequence)} pulses on {sequence.register_size} qutrit(s), {convention.name} ordering",
          file=out)
    for row in _matrix_rows(unitary):
        print(row, file=out)

    if not args.against:
        return 0
    gid = GateId.parse(args.against)
    if gid.arity != sequence.register_size:
        raise UnsupportedFormError(f"{gid.label} acts on {gid.arity} qutrit(s); the file has {sequence.register_size}")
    result = equal_up_to_phase(gate(gid), playback(sequence, COMPUTATIONAL), args.tol or settings.tol)
    status = 'pass' if result.equal_up_to_phase else 'fail'
    report = Report('playback', [ReportItem(f"playback:{gid.label}", status, result.max_residual, result.phase)],
                    seed=None, tol=args.tol or settings.tol)
    out.write(report.to_text())
    return report.exit_status


def _spin_items(tol: float, seed: int, workers) -> list[ReportItem]:
    items = [v.to_item() for v in verify_all(tol, workers)]

    direct = theta_z_direct().entries
    for name, candidate in (('anticommutator', theta_z_anticommutator()), ('conjugated', theta_z_conjugated())):
        residual = max_deviation(direct, candidate.entries)
        items.append(ReportItem(f"theta-z:{name}", 'pass' if residual <= 1e-12 else 'fail', residual))
    residual = max_deviation(direct @ direct, theta_z_squared_lmg().entries)
    items.append(ReportItem('theta-z:lmg-square', 'pass' if residual <= 1e-12 else 'fail', residual))
    items.append(fourier_identity(+1, tol).to_item())

    for check in property_checks(seed):
        items.append(ReportItem(f"property:{check['name']}", 'pass' if check['passed'] else 'fail',
                                check['residual'], notes={'cases': check['cases']}))
    return items


def cmd_verify(args, settings, out) -> int:
    tol = args.tol if args.tol is not None else settings.tol
    seed = args.seed if args.seed is not None else settings.seed
    report = Report(f"verify-{args.scope}", seed=seed, tol=tol)
    if args.scope in ('spin', 'all'):
        report.extend(_spin_items(tol, seed, args.workers))
    if args.scope in ('fock', 'all'):
        report.extend(v.to_item() for v in verify_fock(tol, workers=args.workers))

    for item in report.items:
        if not item.passed:
            logger.warning(f"{item.name} failed with residual {item.residual:.3e}")
    out.write(report.to_text())
    report.write(args.report_dir or settings.report_dir)
    return report.exit_status


def _load_graph(path):
    if not path:
        return None
    return WeightedGraph.load(path)


def cmd_state(args, settings, out) -> int:
    cutoff = args.cutoff if args.cutoff is not None else settings.cutoff
    phi = parse_angle(args.phi) if args.phi is not None else None

    if args.kind == 'plus2mode':
        state = plus_state_two_modes(cutoff)
        out.write(format_fock_state(state))
        overlap = abs(np.vdot(plus_state_direct(cutoff).amplitudes, state.amplitudes)) ** 2
        print(f"fidelity with direct construction: {format_real(overlap)}", file=out)
        print(f"mode schmidt rank (a|b): {mode_schmidt_rank(state)}", file=out)
        return 0

    if args.kind == 'hom':
        report = hong_ou_mandel(args.axis, cutoff)
        for occupations, amplitude in report.amplitudes.items():
            print(f"  |{occupations[0]},{occupations[1]}>  {format_real(amplitude.real)} {format_real(amplitude.imag)}",
                  file=out)
        print(f"relative phase amp(0,2)/amp(2,0): {_complex(report.relative_phase)}", file=out)
        print(f"reference (|0,2> - |2,0>)/sqrt(2) sign matched: {str(report.matches_reference_sign).lower()}",
              file=out)
        return 0

    if args.kind == 'ghz':
        state = ghz_recover(graph_state(WeightedGraph.ghz()))
        _print_amplitudes(state.amplitudes, 3, COMPUTATIONAL, out)
        _print_profile(schmidt_profile(state), out)
        return 0

    graph = _load_graph(args.graph)
    if args.kind == 'graph':
        state = graph_state(graph or WeightedGraph.ghz())
        _print_amplitudes(state.amplitudes, state.num_parties, COMPUTATIONAL, out)
        if state.num_parties >= 2:
            _print_profile(schmidt_profile(state), out)
        return 0

    # am-graph
    if graph is None:
        if phi is None:
            raise UnsupportedFormError("am-graph needs --graph or --phi")
        graph = WeightedGraph.star(3, phi)
    elif phi is not None:
        graph = graph.with_weight(phi)
    state = am_graph_state(graph)
    _print_amplitudes(state.amplitudes, state.num_parties, COMPUTATIONAL, out)
    _print_amplitudes(state.in_convention(ANGULAR), state.num_parties, ANGULAR, out)
    if state.num_parties >= 2:
        _print_profile(schmidt_profile(state), out)
    if state.num_parties == 3:
        try:
            result = slocc_ghz_check(star_terms(graph))
        except UnsupportedFormError as exc:
            print(f"slocc: skipped ({exc.message})", file=out)
        else:
            line = f"slocc ghz-equivalent: {str(result.equivalent).lower()}"
            if result.witness is not None:
                line += f" (witness fidelity {format_real(result.witness.fidelity)})"
            print(line, file=out)
    return 0


def cmd_sweep(args, settings, out) -> int:
    rows = sweep_jghz(parse_angle(args.phi_min), parse_angle(args.phi_max), args.steps)
    lines = ['phi,cut,rank,slocc']
    lines.extend(f"{format_real(r.phi)},{r.cut},{r.rank},{str(r.slocc).lower()}" for r in rows)
    text = '\n'.join(lines) + '\n'
    if args.out:
        with open(args.out, 'w', encoding='utf-8') as handle:
            handle.write(text)
        logger.info(f"Wrote {len(rows)} sweep rows to {args.out}")
    else:
        out.write(text)
    return 0


def cmd_costs(args, settings, out) -> int:
    report = cost_report()
    for route, cost in report['cx_routes'].items():
        print(f"CX via {route}: " + ' '.join(f"{k}={v}" for k, v in sorted(cost.items())), file=out)
    for name, word in report['clifford_words'].items():
        print(f"{name} = " + ' then '.join(word), file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='qpf',
        description='Qutrit Clifford+T gates from spin-1 pulses and two-mode Kerr optics.',
        epilog=ANGLE_GRAMMAR_HELP,
    )
    parser.add_argument('--version', action='version', version=f"qpf {__version__}")
    parser.add_argument('--log-level', default=None, help='overrides QPF_LOG_LEVEL')
    sub = parser.add_subparsers(dest='command', required=True)

    gates = sub.add_parser('gates', help='list the gate catalogue')
    gates.add_argument('--show-matrix', metavar='GATE', help='print one gate matrix, e.g. T or "CR(z,2pi/3)"')
    gates.set_defaults(handler=cmd_gates)

    comp = sub.add_parser('compile', help='compile a gate to pulses')
    comp.add_argument('gate')
    comp.add_argument('targets', nargs='*', type=int)
    comp.add_argument('--out', help='pulse file to write (stdout if omitted)')
    comp.add_argument('--chi', type=float, help='self-Kerr strength; prints the Kerr schedule')
    comp.add_argument('--chi-cross', type=float, help='cross-Kerr strength (defaults to --chi)')
    comp.set_defaults(handler=cmd_compile)

    play = sub.add_parser('playback', help='multiply out a pulse file')
    play.add_argument('file')
    play.add_argument('--convention', choices=sorted(CONVENTIONS), default=COMPUTATIONAL.name)
    play.add_argument('--against', metavar='GATE', help='compare with a catalogue gate up to phase')
    play.add_argument('--tol', type=float)
    play.set_defaults(handler=cmd_playback)

    verify = sub.add_parser('verify', help='run the verification suites and write a report')
    verify.add_argument('--scope', choices=('spin', 'fock', 'all'), default='all')
    verify.add_argument('--tol', type=float)
    verify.add_argument('--seed', type=int)
    verify.add_argument('--report-dir')
    verify.add_argument('--workers', type=int, default=None)
    verify.set_defaults(handler=cmd_verify)

    state = sub.add_parser('state', help='prepare a state and print diagnostics', epilog=GRAPH_GRAMMAR_HELP)
    state.add_argument('kind', choices=('plus2mode', 'graph', 'am-graph', 'ghz', 'hom'))
    state.add_argument('--graph', help='graph file')
    state.add_argument('--phi', help='edge weight for am-graph (overrides file weights)')
    state.add_argument('--cutoff', type=int)
    state.add_argument('--axis', choices=('x', 'y'), default='x', help='beam-splitter axis for hom')
    state.set_defaults(handler=cmd_state)

    sweep = sub.add_parser('sweep', help='Schmidt ranks of the weighted star along phi')
    sweep.add_argument('--phi-min', default='0')
    sweep.add_argument('--phi-max', default='2pi')
    sweep.add_argument('--steps', type=int, default=25)
    sweep.add_argument('--out')
    sweep.set_defaults(handler=cmd_sweep)

    costs = sub.add_parser('costs', help='pulse counts of both CX routes and the Clifford words')
    costs.set_defaults(handler=cmd_costs)
    return parser


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2

    settings = load_settings()
    configure_logging(args.log_level or settings.log_level, settings.log_file)
    try:
        return args.handler(args, settings, out)
    except QpfError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == '__main__':
    raise SystemExit(main())
