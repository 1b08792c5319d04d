#!/usr/bin/env python3
"""
Command-line front end for the Wehrl stability toolkit

Single evaluations print (or write) one JSON record; sweeps write CSV rows
plus a summary JSON. Every artifact carries the fully resolved config.
"""

import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .config import ConfigManager, SweepConfig
from .constants import CONFIG_FILE, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_OK, UNIT_TOL, VERSION
from .errors import ConfigError, ConvergenceError, DomainError, EvaluationError, ShapeError
from .experiments import (Stopwatch, differential_inequality_audit, fock_limit_check, sharpness_family,
                          summarize, sweep_concentration_stability, sweep_lieb_solovej, sweep_state_stability,
                          sweep_wehrl_stability)
from .formats import (load_poly, load_state, parse_region, write_records_csv, write_result_json,
                      write_summary_json)
from .functionals import (concentration, distance_to_kernels, extremal_concentration, extremal_entropy,
                          optimal_concentration, parse_phi, sup_modulus, wehrl_entropy)
from .levelsets import build_profile, crossing_points, deficit_integrals, profile_rows
from .polyspace import AffinePoly, HomPoly, affine_from_coeff_map, from_affine, to_affine
from .states import (DensityState, state_concentration, state_concentration_deficit, state_entropy,
                     trace_distance_to_coherent)

logger = logging.getLogger(__name__)

SUBCOMMANDS = (
    'entropy', 'concentration', 'distance', 'profile',
    'sweep-conc', 'sweep-wehrl', 'sweep-ls', 'sweep-states',
    'sharpness', 'fock-limit', 'audit',
    'state-entropy', 'state-concentration', 'state-distance',
)

# Flags taking a value, mapped to their option key
VALUE_FLAGS = {
    '--seed': 'seed',
    '--samples': 'samples',
    '--rule-degree': 'rule_degree',
    '--out': 'out',
    '--format': 'format',
    '--config': 'config',
    '--dim': 'd',
    '--degree': 'N',
    '--eps': 'eps',
    '--degrees': 'fock_degrees',
    '--area': 'area',
    '--phi': 'phi',
    '--omega': 'omegas',
    '--omega-tilde': 'omega_tilde',
    '--region': 'region',
    '--poly': 'poly',
    '--state': 'state',
    '--workers': 'workers',
}

FORMATS = ('csv', 'json')


def print_help():
    """Print help/usage information"""
    script_name = os.path.basename(sys.argv[0])
    help_text = f"""
Wehrl Stability Toolkit {VERSION} - entropy and concentration of polynomials on CP^d

Usage:
    {script_name} COMMAND [OPTIONS]

Commands:
    entropy                   Generalized Wehrl entropy S(Q) of --poly for --phi
    concentration             Concentration of --poly on --region, or on its own
                              superlevel set of measure --omega
    distance                  Distance D(Q) from --poly to the reproducing kernels
    profile                   Distribution function of |Q|^2 against the extremal profile
    sweep-conc                Concentration stability sweep (deficit vs D^2 and asymmetry)
    sweep-wehrl               Entropy stability sweep (deficit vs D^2 per Phi)
    sweep-ls                  Entropy/concentration bounds on random polynomials and caps
    sweep-states              Stability sweep over density states
    sharpness                 Distance and deficit exponents along q = 1 + eps z_1
    fock-limit                Rescaled projective functionals against the Bargmann-Fock values
    audit                     Distribution-function differential inequality audit
    state-entropy             Operator entropy of --state
    state-concentration       Husimi concentration of --state on --region (or --omega deficit)
    state-distance            Trace distance from --state to the coherent states

Options:
    --poly FILE               Polynomial JSON file (homogeneous or "affine": true)
    --state FILE              Density state JSON file
    --phi SPEC                linear | xlogx | power:P | hinge:T0 (comma-separated for sweeps)
    --omega FLOAT             Region measure(s) in (0, 1) (comma-separated for sweeps)
    --omega-tilde FLOAT       Isoperimetric threshold (default 0.3 for d >= 2, 1.0 for d = 1)
    --region SPEC             cap:T (cap about e_1) | superlevel:OMEGA | file:PATH
    --dim INT                 Dimension d for sweeps (single evaluations take it from the file)
    --degree INT              Degree N for sweeps
    --eps LIST                Comma-separated eps grid for sharpness
    --degrees LIST            Comma-separated increasing degrees for fock-limit
    --area FLOAT              Bargmann-Fock ball volume for fock-limit (default: 1.0)
    --seed INT                Master seed (default: 0)
    --samples INT             Monte Carlo samples per estimate
    --rule-degree INT         Minimum exactness degree of the product rule
    --workers INT             Worker threads
    --config FILE             Sweep configuration JSON (default: {os.path.basename(CONFIG_FILE)} if present)
    --out PATH                Output file (default: stdout); sweeps also write PATH.summary.json
    --format csv|json         Output format (default: json for evaluations, csv for sweeps)
    --debug                   Enable debug logging (per-item progress)
    --quiet                   Only log warnings and errors
    --help, -h                Show this help message and exit

Examples:
    {script_name} entropy --poly kernel.json --phi xlogx
    {script_name} concentration --poly q.json --region cap:0.5
    {script_name} concentration --poly q.json --omega 0.1
    {script_name} distance --poly q.json
    {script_name} profile --poly q.json --samples 1000000 --out profile.csv
    {script_name} sweep-wehrl --config cfg.json --seed 7 --out wehrl.csv
    {script_name} sharpness --dim 2 --degree 6 --eps 0.025,0.05,0.1,0.2
    {script_name} fock-limit --dim 1 --degrees 64,256 --area 1
    {script_name} state-distance --state rho.json

Exit codes:
    0    Success
    2    Invalid configuration, arguments or input files
    3    Numerical non-convergence

Description:
    Evaluations on a single polynomial or state print one JSON record with
    the value, its Monte Carlo stderr (null when computed exactly) and the
    resolved configuration. Sweeps write one CSV row per record, preceded by
    a '# config:' line; missing stderr values are written as 'exact'.

    Identical arguments and input files produce identical CSV/JSON records.
"""
    print(help_text)


@dataclass
class Command:
    """Parsed command line"""

    name: Optional[str] = None
    options: Dict[str, str] = field(default_factory=dict)
    debug: bool = False
    quiet: bool = False
    help: bool = False


@dataclass
class Artifact:
    """What a subcommand produced: one record, or rows with a summary"""

    record: Optional[Dict[str, Any]] = None
    rows: Optional[List[Dict[str, Any]]] = None
    summary: Optional[Dict[str, Any]] = None
    default_format: str = 'json'
    config: Optional[SweepConfig] = None


def parse_args(argv: Sequence[str]) -> Command:
    """Parse argv (without the program name)

    Accepts '--flag value' and '--flag=value'.

    Raises:
        ConfigError: For unknown options, unknown subcommands or missing values
    """
    command = Command()
    i = 0
    while i < len(argv):
        arg = argv[i]

        if arg in ('--help', '-h'):
            command.help = True
        elif arg == '--debug':
            command.debug = True
        elif arg == '--quiet':
            command.quiet = True
        elif arg.startswith('--') and '=' in arg and arg.partition('=')[0] in VALUE_FLAGS:
            flag, _, value = arg.partition('=')
            command.options[VALUE_FLAGS[flag]] = value
        elif arg in VALUE_FLAGS:
            if i + 1 >= len(argv):
                raise ConfigError(f"Option {arg} needs a value")
            command.options[VALUE_FLAGS[arg]] = argv[i + 1]
            i += 1
        elif arg.startswith('-'):
            raise ConfigError(f"Unknown option: {arg}")
        elif command.name is None:
            if arg not in SUBCOMMANDS:
                raise ConfigError(f"Unknown command: {arg}")
            command.name = arg
        else:
            raise ConfigError(f"Unexpected argument: {arg}")
        i += 1
    return command


# ---------------------------------------------------------------------------
# Option conversion
# ---------------------------------------------------------------------------

def _convert(command: Command, key: str, convert: Callable[[str], Any]) -> Any:
    text = command.options.get(key)
    if text is None:
        return None
    try:
        return convert(text)
    except ValueError as e:
        raise ConfigError(f"Invalid value '{text}' ({e})", key) from e


def _split(text: str) -> List[str]:
    items = [part.strip() for part in text.split(',') if part.strip()]
    if not items:
        raise ValueError("empty list")
    return items


def _float_list(text: str) -> List[float]:
    return [float(part) for part in _split(text)]


def _int_list(text: str) -> List[int]:
    return [int(part) for part in _split(text)]


def resolve_config(command: Command) -> SweepConfig:
    """Config file (explicit --config, else the default file if present) with flag overrides applied"""
    path = command.options.get('config')
    if path is not None and not os.path.exists(path):
        raise ConfigError(f"File not found: {path}", 'config')
    config = ConfigManager(path or CONFIG_FILE).load_config()
    return config.with_overrides(
        d=_convert(command, 'd', int),
        N=_convert(command, 'N', int),
        phi=_convert(command, 'phi', _split),
        omegas=_convert(command, 'omegas', _float_list),
        omega_tilde=_convert(command, 'omega_tilde', float),
        seed=_convert(command, 'seed', int),
        samples=_convert(command, 'samples', int),
        rule_degree=_convert(command, 'rule_degree', int),
        workers=_convert(command, 'workers', int),
        eps=_convert(command, 'eps', _float_list),
        fock_degrees=_convert(command, 'fock_degrees', _int_list),
        area=_convert(command, 'area', float),
    )


def _require(command: Command, key: str, flag: str) -> str:
    value = command.options.get(key)
    if value is None:
        raise ConfigError(f"'{command.name}' needs {flag}", key)
    return value


def _load_unit_poly(command: Command, config: SweepConfig) -> Tuple[HomPoly, SweepConfig]:
    poly = load_poly(_require(command, 'poly', '--poly'))
    Q = from_affine(poly) if isinstance(poly, AffinePoly) else poly
    norm = Q.norm()
    if abs(norm - 1.0) > UNIT_TOL:
        logger.info(f"Normalizing input polynomial (norm {norm:.6g})")
        Q = Q.normalized()
    return Q, config.with_overrides(d=Q.d, N=Q.N)


def _load_state(command: Command, config: SweepConfig) -> Tuple[DensityState, SweepConfig]:
    rho = load_state(_require(command, 'state', '--state'))
    return rho, config.with_overrides(d=rho.d, N=rho.N)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_entropy(command: Command, config: SweepConfig) -> Artifact:
    Q, config = _load_unit_poly(command, config)
    phi = parse_phi(config.phi[0])
    result = wehrl_entropy(Q, phi, config.rule_degree, config.samples, config.seed, config.workers)
    bound = extremal_entropy(Q.N, Q.d, phi)
    result.extras.update({"extremal": bound, "deficit": result.value - bound})
    return Artifact(result.to_record(config.to_dict()), config=config)


def cmd_concentration(command: Command, config: SweepConfig) -> Artifact:
    Q, config = _load_unit_poly(command, config)
    if 'region' in command.options:
        region = parse_region(command.options['region'], Q.d, Q.N, Q, config.samples, config.seed)
        result = concentration(Q, region, config.samples, config.seed, config.workers)
        result.extras["region"] = region.describe()
    elif 'omegas' in command.options:
        result = optimal_concentration(Q, config.omegas[0], config.samples, config.seed, config.workers)
    else:
        raise ConfigError("'concentration' needs --region or --omega", 'region')
    result.extras["extremal"] = extremal_concentration(Q.N, Q.d, result.extras["measure"])
    return Artifact(result.to_record(config.to_dict()), config=config)


def cmd_distance(command: Command, config: SweepConfig) -> Artifact:
    Q, config = _load_unit_poly(command, config)
    result = distance_to_kernels(Q, config.seed, cross_check=True)
    return Artifact(result.to_record(config.to_dict()), config=config)


def cmd_profile(command: Command, config: SweepConfig) -> Artifact:
    Q, config = _load_unit_poly(command, config)
    sup = sup_modulus(Q, config.seed)
    profile = build_profile(Q, config.samples, config.seed, T=sup.T, workers=config.workers)
    crossing = crossing_points(profile)
    integrals = deficit_integrals(profile, s_hat=crossing.s_star, t_hat=crossing.t_star)
    summary = {
        "functional": "profile", "T": sup.T, "samples": profile.count,
        "t_star": crossing.t_star, "s_star": crossing.s_star, "degenerate": crossing.degenerate,
        "inverse_deficit": integrals.inverse, "inverse_deficit_stderr": integrals.inverse_stderr,
        "distribution_deficit": integrals.distribution,
        "distribution_deficit_stderr": integrals.distribution_stderr,
        "config": config.to_dict(),
    }
    return Artifact(summary, profile_rows(profile), summary, default_format='csv', config=config)


def _debug_callback(msg: str) -> None:
    logger.debug(msg)


def _sweep(run_sweep: Callable[..., List[Any]], needs_states: bool = False
           ) -> Callable[[Command, SweepConfig], Artifact]:
    def handler(command: Command, config: SweepConfig) -> Artifact:
        if needs_states and config.generator == 'file':
            raise ConfigError("state sweeps do not read polynomial files", 'sweep.generator')
        watch = Stopwatch()
        records = run_sweep(config, debug_callback=_debug_callback)
        summary = summarize(records, watch.elapsed())
        summary["config"] = config.to_dict()
        logger.info(f"{command.name}: {summary['records']} records, {summary['violations']} violation(s), "
                    f"ratio range [{summary['min_ratio']}, {summary['max_ratio']}]")
        return Artifact(None, [rec.to_row() for rec in records], summary, default_format='csv', config=config)
    return handler


def cmd_audit(command: Command, config: SweepConfig) -> Artifact:
    polys = None
    if 'poly' in command.options:
        Q, config = _load_unit_poly(command, config)
        polys = [Q]
    watch = Stopwatch()
    records = differential_inequality_audit(config, polys, debug_callback=_debug_callback)
    summary = summarize(records, watch.elapsed())
    summary["config"] = config.to_dict()
    return Artifact(None, [rec.to_row() for rec in records], summary, default_format='csv', config=config)


def cmd_sharpness(command: Command, config: SweepConfig) -> Artifact:
    omega = config.omegas[0] if 'omegas' in command.options else None
    report = sharpness_family(config.d, config.N, config.eps, parse_phi(config.phi[0]), omega,
                              config.samples, config.seed, config.rule_degree, config.workers)
    summary = report.summary()
    summary["config"] = config.to_dict()
    logger.info(f"Sharpness status: {report.status}")
    return Artifact(None, report.rows, summary, default_format='csv', config=config)


def cmd_fock_limit(command: Command, config: SweepConfig) -> Artifact:
    if 'poly' in command.options:
        poly = load_poly(command.options['poly'])
        f = poly if isinstance(poly, AffinePoly) else to_affine(poly)
        config = config.with_overrides(d=f.d)
    else:
        f = affine_from_coeff_map(config.d, 1)
    report = fock_limit_check(f, config.fock_degrees, config.area, parse_phi(config.phi[0]), config.samples,
                              config.seed, config.rule_degree, config.workers)
    summary = report.summary()
    summary["config"] = config.to_dict()
    return Artifact(None, report.rows, summary, default_format='csv', config=config)


def cmd_state_entropy(command: Command, config: SweepConfig) -> Artifact:
    rho, config = _load_state(command, config)
    phi = parse_phi(config.phi[0])
    result = state_entropy(rho, phi, config.rule_degree, config.samples, config.seed, config.workers)
    bound = extremal_entropy(rho.N, rho.d, phi)
    result.extras.update({"extremal": bound, "deficit": result.value - bound})
    return Artifact(result.to_record(config.to_dict()), config=config)


def cmd_state_concentration(command: Command, config: SweepConfig) -> Artifact:
    rho, config = _load_state(command, config)
    if 'region' in command.options:
        region = parse_region(command.options['region'], rho.d, rho.N, None, config.samples, config.seed)
        result = state_concentration(rho, region, config.samples, config.seed, config.workers)
        result.extras["region"] = region.describe()
        result.extras["extremal"] = extremal_concentration(rho.N, rho.d, result.extras["measure"])
    elif 'omegas' in command.options:
        center = trace_distance_to_coherent(rho, config.seed).argmax
        result = state_concentration_deficit(rho, config.omegas[0], center, config.samples, config.seed,
                                             config.workers)
    else:
        raise ConfigError("'state-concentration' needs --region or --omega", 'region')
    return Artifact(result.to_record(config.to_dict()), config=config)


def cmd_state_distance(command: Command, config: SweepConfig) -> Artifact:
    rho, config = _load_state(command, config)
    result = trace_distance_to_coherent(rho, config.seed)
    return Artifact(result.to_record(config.to_dict()), config=config)


HANDLERS: Dict[str, Callable[[Command, SweepConfig], Artifact]] = {
    'entropy': cmd_entropy,
    'concentration': cmd_concentration,
    'distance': cmd_distance,
    'profile': cmd_profile,
    'sweep-conc': _sweep(sweep_concentration_stability),
    'sweep-wehrl': _sweep(sweep_wehrl_stability),
    'sweep-ls': _sweep(sweep_lieb_solovej),
    'sweep-states': _sweep(sweep_state_stability, needs_states=True),
    'sharpness': cmd_sharpness,
    'fock-limit': cmd_fock_limit,
    'audit': cmd_audit,
    'state-entropy': cmd_state_entropy,
    'state-concentration': cmd_state_concentration,
    'state-distance': cmd_state_distance,
}


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _output_format(command: Command) -> Optional[str]:
    fmt = command.options.get('format')
    if fmt is not None and fmt not in FORMATS:
        raise ConfigError(f"'{fmt}' is not one of {', '.join(FORMATS)}", 'format')
    return fmt


def emit(artifact: Artifact, command: Command, config: SweepConfig) -> None:
    """Write the artifact to --out (stdout when absent) in the requested format"""
    fmt = _output_format(command) or artifact.default_format
    out = command.options.get('out')
    if fmt == 'json':
        record = artifact.record
        if record is None:
            record = {"rows": artifact.rows, "summary": artifact.summary, "config": config.to_dict()}
        text = write_result_json(record, out)
        if not out:
            print(text)
        return
    rows = artifact.rows
    if rows is None:
        rows = [{key: value for key, value in artifact.record.items() if key != 'config'}]
    write_records_csv(rows, out, config.to_dict())
    if artifact.summary is not None and out and out != '-':
        write_summary_json(artifact.summary, f"{out}.summary.json")
        logger.info(f"Summary written to {out}.summary.json")


def configure_logging(command: Command) -> None:
    level = logging.INFO
    if command.debug:
        level = logging.DEBUG
    elif command.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
                        stream=sys.stderr)
    logging.getLogger().setLevel(level)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Run one command; returns the process exit code"""
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        command = parse_args(argv)
    except ConfigError as e:
        print(e, file=sys.stderr)
        print("Use --help or -h for usage information.", file=sys.stderr)
        return EXIT_CONFIG

    if command.help:
        print_help()
        return EXIT_OK
    if command.name is None:
        print("No command given.", file=sys.stderr)
        print("Use --help or -h for usage information.", file=sys.stderr)
        return EXIT_CONFIG

    configure_logging(command)
    try:
        _output_format(command)
        config = resolve_config(command)
        artifact = HANDLERS[command.name](command, config)
        emit(artifact, command, artifact.config or config)
    except (ConfigError, DomainError, ShapeError) as e:
        logger.error(f"{command.name}: {e}")
        return EXIT_CONFIG
    except (ConvergenceError, EvaluationError) as e:
        logger.error(f"{command.name}: numerical failure: {e}")
        return EXIT_CONVERGENCE
    except OSError as e:
        logger.error(f"{command.name}: {e}")
        return EXIT_CONFIG
    return EXIT_OK


def main():
    """Main entry point"""
    sys.exit(run())


if __name__ == '__main__':
    main()
