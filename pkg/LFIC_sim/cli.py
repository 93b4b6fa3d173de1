"""
Command line of LFIC_sim. Every subcommand prints a short summary and writes its numbers to files in --out-dir; the
run parameters are echoed in the header of each file, and existing files are only replaced with --force.

Exit codes: 0 on success, 1 on domain errors, 2 on usage errors.
"""

__all__ = ['build_parser', 'run', 'main']

__authors__ = "LFIC_sim developers"
__copyright__ = "Copyright 2024 by LFIC_sim. All rights reserved."


import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

from LFIC_sim.config import definations
from LFIC_sim.cross_section import ANCHORS, anchor_points, make_plane, section_boundary
from LFIC_sim.custom_exceptions import LFICError, OutputExistsError, SchemaError
from LFIC_sim.geometry.polytope import PolytopeH, PolytopeV, polytope_to_text
from LFIC_sim.models import ModelKind, facet_census, membership, model_hrep, model_vertices
from LFIC_sim.npa.moments import LEVELS, build_moment_program
from LFIC_sim.npa.sdp import sdp_solve
from LFIC_sim.npa.seesaw import seesaw_lower_bound
from LFIC_sim.presets import available_functionals, available_table_points, ch_functional, functional, table_point
from LFIC_sim.quantum import available_presets, behavior_from_realization, preset
from LFIC_sim.scenario import Behavior, BellFunctional, Scenario, evaluate
from LFIC_sim.serialization import deserialize, serialize, to_document
from LFIC_sim.simulator import DEVICES, POLICIES, PROTOCOLS, RunConfig, functional_estimate, simulate_protocol2, \
    simulate_runs
from LFIC_sim.sol import SectionSolution
from LFIC_sim.symmetry import classify_facets, orbit_table, stabilizer_group
from LFIC_sim.utils.constants import NumericalTolerances
from LFIC_sim.version import __version__


logger = logging.getLogger(__name__)

SCENARIOS = {'main': Scenario.main, 'chsh': Scenario.chsh, 'protocol2': Scenario.protocol2}
SECTION_MODELS = ('ns', 'quantum', 'lfic', 'lf', 'lhv')


def _header(args: argparse.Namespace) -> dict:
    """Run parameters that determine the output; the thread count does not and is left out."""
    header = {'LFIC_sim': __version__, 'command': args.command,
              'tolerances': str(NumericalTolerances())}
    for key, value in sorted(vars(args).items()):
        if key in ('command', 'handler', 'threads', 'verbose', 'force', 'out_dir'):
            continue
        header[key] = value if isinstance(value, (int, float, str, bool)) or value is None else str(value)
    return header


def _header_lines(args: argparse.Namespace) -> list:
    return [f"{key} = {value}" for key, value in _header(args).items()]


def _target(args: argparse.Namespace, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, name)
    if os.path.exists(path) and not args.force:
        raise OutputExistsError(path)
    return path


def _write_text(args: argparse.Namespace, name: str, text: str) -> str:
    path = _target(args, name)
    with open(path, 'w', newline='') as file:
        file.write(text)
    return path


def _write_json(args: argparse.Namespace, name: str, payload: dict) -> str:
    return _write_text(args, name, json.dumps({'header': _header(args), **payload}, indent=2) + '\n')


def _number(value) -> dict:
    if isinstance(value, Fraction):
        return {'value': float(value), 'exact': f"{value.numerator}/{value.denominator}"}
    return {'value': float(value)}


def _load_behavior(source: str) -> Behavior:
    """presets:<name> (reference points exactly, otherwise realization presets), quantum:<name>, or a JSON document."""
    if source.startswith('presets:'):
        name = source.split(':', 1)[1]
        if name in available_table_points():
            return table_point(name)
        source = f"quantum:{name}"
    if source.startswith('quantum:'):
        obj = preset(source.split(':', 1)[1])
        return obj if isinstance(obj, Behavior) else behavior_from_realization(obj)
    with open(source) as file:
        obj = deserialize(file.read())
    if not isinstance(obj, Behavior):
        raise SchemaError(f"{source} does not hold a behavior.")
    return obj


def _load_functional(source: str) -> BellFunctional:
    if source == 'CH':
        return ch_functional()
    if source in available_functionals():
        return functional(source)
    if not os.path.exists(source):
        raise SchemaError(f"'{source}' is neither a library functional ({', '.join(available_functionals())}, CH) "
                          f"nor a file.")
    with open(source) as file:
        obj = deserialize(file.read())
    if not isinstance(obj, BellFunctional):
        raise SchemaError(f"{source} does not hold a functional.")
    return obj


def _cmd_enumerate(args: argparse.Namespace) -> None:
    s = SCENARIOS[args.scenario]()
    kind = ModelKind.from_name(args.model)
    h = model_hrep(kind, s)
    header = _header_lines(args)
    facets = _write_text(args, f"{kind.value}_facets.ine",
                         polytope_to_text(PolytopeH(h.dimension, h.inequalities), header))
    equalities = _write_text(args, f"{kind.value}_equalities.ine",
                             polytope_to_text(PolytopeH(h.dimension, (), h.equalities), header))
    print(f"{kind.value}: {len(h.inequalities)} facet inequalities, {len(h.equalities)} equalities")
    print(f"wrote {facets}\nwrote {equalities}")
    if args.vertices:
        v = model_vertices(kind, s)
        path = _write_text(args, f"{kind.value}_vertices.ext", polytope_to_text(PolytopeV(v.dimension, v.vertices),
                                                                                header))
        print(f"{kind.value}: {len(v)} vertices\nwrote {path}")


def _cmd_classify(args: argparse.Namespace) -> None:
    s = SCENARIOS[args.scenario]()
    census = facet_census(s)
    group = stabilizer_group(model_vertices(ModelKind.LFIC, s), s, args.global_bob_outputs)
    facets = census.hrep.inequalities if args.all else census.strict
    orbits = classify_facets(census.hrep, group, s, facets)
    lines = [f"* {line}" for line in _header_lines(args)]
    lines.append(f"* {census}, symmetry group of order {len(group)}")
    path = _write_text(args, 'lfic_orbits.txt', '\n'.join(lines) + '\n' + orbit_table(orbits, s))
    print(f"{census}\n{len(orbits)} orbits under a group of order {len(group)}: "
          f"sizes {', '.join(str(o.size) for o in orbits)}\nwrote {path}")


def _cmd_evaluate(args: argparse.Namespace) -> None:
    f = _load_functional(args.functional)
    p = _load_behavior(args.behavior)
    value = evaluate(f, p)
    print(f"{f.name or 'functional'}({p.name or 'behavior'}) = {float(value):.12f}")
    path = _write_json(args, f"evaluate_{f.name or 'functional'}_{p.name or 'behavior'}.json",
                       {'functional': f.name, 'behavior': p.name, **_number(value)})
    print(f"wrote {path}")


def _cmd_membership(args: argparse.Namespace) -> None:
    p = _load_behavior(args.behavior)
    result = membership(p, args.model)
    print(result)
    payload = {'model': result.model.value, 'behavior': p.name, 'inside': result.inside}
    if result.inside:
        payload['weights'] = {str(i): f"{w.numerator}/{w.denominator}" for i, w in sorted(result.weights.items())}
    else:
        payload['certificate'] = to_document(result.certificate)
        payload['certificate_value'] = _number(evaluate(result.certificate, result.behavior))
    path = _write_json(args, f"membership_{result.model.value}_{p.name or 'behavior'}.json", payload)
    print(f"wrote {path}")


def _cmd_npa_bound(args: argparse.Namespace) -> None:
    f = _load_functional(args.functional)
    program = build_moment_program(f.scenario, f, args.level, args.sense, include_bb=not args.no_bb)
    solution = sdp_solve(program)
    word = 'lower' if args.sense == 'min' else 'upper'
    print(f"level {args.level} {word} bound on {args.sense} {f.name}: {solution.optimum:.10f} "
          f"(moment matrix {program.size}x{program.size}, {solution.iterations} iterations)")
    payload = {'functional': f.name, 'level': args.level, 'sense': args.sense, 'bound': solution.optimum,
               'primal_value': solution.primal_optimum, 'gap': solution.gap, 'matrix_size': program.size}
    if args.seesaw and args.sense == 'min':
        attained = seesaw_lower_bound(f.scenario, f, seed=args.seed, restarts=args.restarts)
        print(f"seesaw attains {attained.value:.10f}")
        payload['seesaw_value'] = attained.value
    path = _write_json(args, f"npa_{f.name}_{args.level}_{args.sense}.json", payload)
    print(f"wrote {path}")


def _cmd_section(args: argparse.Namespace) -> None:
    plane = make_plane(*anchor_points(args.anchor))
    sections = []
    for model in args.models.split(','):
        target = f"npa-{args.level}" if model == 'quantum' else model
        resolution = args.quantum_resolution if model == 'quantum' else args.resolution
        section = section_boundary(target, plane, resolution, method=args.method, threads=args.threads)
        print(section)
        sections.append(section)
    solution = SectionSolution.from_sections(plane, sections, _header(args))
    for path in solution.write(args.out_dir, args.force):
        print(f"wrote {path}")


def _cmd_simulate(args: argparse.Namespace) -> None:
    realization = preset(args.preset)
    if isinstance(realization, Behavior):
        raise SchemaError(f"preset {args.preset} is a behavior table, the simulator needs a realization.")
    cfg = RunConfig(realization, args.runs, seed=args.seed, policy=args.policy, protocol=args.protocol,
                    device=args.device, decoy_query=not args.no_decoy, chunk_size=args.chunk_size,
                    threads=args.threads)
    reports = {}
    if args.protocol == 'protocol2':
        counts, reports = simulate_protocol2(cfg)
    else:
        counts = simulate_runs(cfg)
    print(f"{counts.total} runs, {counts.resampled} resampled")
    if counts.scenario == Scenario.main():
        value, error = functional_estimate(functional('Z1'), counts)
        print(f"Z1 estimate {value:.6f} +- {error:.6f}")
    for report in reports.values():
        print(report)
    document = {'header': _header(args), **counts.to_document()}
    if reports:
        document['reduction'] = [{'t': r.t, 'statistic': r.statistic, 'dof': r.dof, 'p_value': r.p_value,
                                  'level': r.level, 'consistent': r.consistent} for r in reports.values()]
    path = _write_text(args, args.out, json.dumps(document, indent=2) + '\n')
    print(f"wrote {path}")


def _cmd_presets(args: argparse.Namespace) -> None:
    if args.show:
        name = args.show
        if name in available_table_points():
            print(serialize(table_point(name)), end='')
        elif name in available_functionals() or name == 'CH':
            print(serialize(_load_functional(name)), end='')
        else:
            obj = preset(name)
            print(serialize(obj if isinstance(obj, Behavior) else behavior_from_realization(obj)), end='')
        return
    print(f"table points: {', '.join(available_table_points())}")
    print(f"functionals: {', '.join(available_functionals() + ['CH'])}")
    print(f"realizations: {', '.join(available_presets())}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out-dir', default='.', help="directory for the output files")
    common.add_argument('--force', action='store_true', help="overwrite existing output files")
    common.add_argument('--threads', type=int, default=None,
                        help="worker threads (default: LFIC_THREADS, then the number of CPUs)")
    common.add_argument('--verbose', action='store_true', help="log at DEBUG level")

    parser = argparse.ArgumentParser(prog='LFIC_sim', description="Local friendliness under incomplete information.")
    parser.add_argument('--version', action='version', version=f"LFIC_sim {__version__}")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('enumerate', parents=[common], help="facets of a correlation polytope")
    p.add_argument('--model', choices=[m.value for m in ModelKind], default='lfic')
    p.add_argument('--scenario', choices=sorted(SCENARIOS), default='main')
    p.add_argument('--vertices', action='store_true', help="also write the vertex file")
    p.set_defaults(handler=_cmd_enumerate)

    p = sub.add_parser('classify', parents=[common], help="orbits of the LFIC facets under relabelings")
    p.add_argument('--scenario', choices=sorted(SCENARIOS), default='main')
    p.add_argument('--all', action='store_true', help="classify every facet, not only the ones stronger than NS")
    p.add_argument('--global-bob-outputs', action='store_true',
                   help="one output permutation of Bob for both inputs")
    p.set_defaults(handler=_cmd_classify)

    p = sub.add_parser('evaluate', parents=[common], help="value of a functional on a behavior")
    p.add_argument('--functional', required=True)
    p.add_argument('--behavior', required=True, help="presets:<name>, quantum:<name> or a JSON file")
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser('membership', parents=[common], help="membership of a behavior in a model")
    p.add_argument('--model', choices=[m.value for m in ModelKind], required=True)
    p.add_argument('--behavior', required=True, help="presets:<name>, quantum:<name> or a JSON file")
    p.set_defaults(handler=_cmd_membership)

    p = sub.add_parser('npa-bound', parents=[common], help="moment relaxation bound of a functional")
    p.add_argument('--functional', required=True)
    p.add_argument('--level', choices=LEVELS, default=definations.DEFAULT_NPA_LEVEL)
    p.add_argument('--sense', choices=('min', 'max'), default='min')
    p.add_argument('--no-bb', action='store_true', help="drop the words B_y B_y' at level 2")
    p.add_argument('--seesaw', action='store_true', help="also run the seesaw search for an attained value")
    p.add_argument('--seed', type=int, default=definations.DEFAULT_SEED)
    p.add_argument('--restarts', type=int, default=10)
    p.set_defaults(handler=_cmd_npa_bound)

    p = sub.add_parser('section', parents=[common], help="sections through the plane of N0, Q1, Q2")
    p.add_argument('--models', default=','.join(SECTION_MODELS),
                   help=f"comma-separated subset of {', '.join(SECTION_MODELS)}")
    p.add_argument('--resolution', type=int, default=definations.DEFAULT_ANGULAR_RESOLUTION)
    p.add_argument('--quantum-resolution', type=int, default=definations.DEFAULT_QUANTUM_RESOLUTION)
    p.add_argument('--level', choices=LEVELS, default=definations.DEFAULT_NPA_LEVEL)
    p.add_argument('--method', choices=('bisection', 'direct'), default='bisection')
    p.add_argument('--anchor', choices=ANCHORS, default='published',
                   help="defining points: N0, Q1, Q2 as tabulated, or projected onto the LFIC affine hull")
    p.set_defaults(handler=_cmd_section)

    p = sub.add_parser('simulate', parents=[common], help="run-level simulation of the protocol")
    p.add_argument('--preset', default='Q1')
    p.add_argument('--policy', choices=POLICIES, default='lueders')
    p.add_argument('--protocol', choices=PROTOCOLS, default='main')
    p.add_argument('--device', choices=DEVICES, default='honest')
    p.add_argument('--no-decoy', action='store_true', help="protocol2 without the query about t")
    p.add_argument('--runs', type=int, default=10 ** 6)
    p.add_argument('--seed', type=int, default=definations.DEFAULT_SEED)
    p.add_argument('--chunk-size', type=int, default=definations.DEFAULT_CHUNK_SIZE)
    p.add_argument('--out', default='counts.json', help="counts file name inside --out-dir")
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser('presets', parents=[common], help="list or show the shipped presets")
    group = p.add_mutually_exclusive_group()
    group.add_argument('--list', action='store_true', help="list the preset names (default)")
    group.add_argument('--show', metavar='NAME', help="print the preset as a JSON document")
    p.set_defaults(handler=_cmd_presets)
    return parser


def _check_arguments(parser: argparse.ArgumentParser, args: argparse.Namespace) -> None:
    if args.threads is not None and args.threads < 1:
        parser.error("--threads needs to be positive.")
    if args.command == 'section':
        unknown = [m for m in args.models.split(',') if m not in SECTION_MODELS]
        if unknown:
            parser.error(f"unknown section models: {', '.join(unknown)}.")
        if min(args.resolution, args.quantum_resolution) < 3:
            parser.error("the angular resolution needs at least 3 rays.")
    if args.command == 'simulate' and (args.runs < 0 or args.chunk_size < 1):
        parser.error("--runs needs to be nonnegative and --chunk-size positive.")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parses argv and runs the subcommand.
    :return: (int) exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _check_arguments(parser, args)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        args.handler(args)
    except (LFICError, OSError) as err:
        # OSError covers unreadable input files and unwritable output directories
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
