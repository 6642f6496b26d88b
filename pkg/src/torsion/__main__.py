from __future__ import annotations

import argparse
import contextlib
import contextvars
import os
import platform
import shutil
import sys
import textwrap
import traceback
import typing
import warnings

from collections.abc import Iterator, Sequence
from functools import partial
from typing import NoReturn, TextIO

import sympy

import torsion

from . import _ctx
from ._config import Settings, load_settings
from ._exceptions import ConfigError, InfeasibleComputationError, SpecValidationError, TorsionException
from ._report import Report, render, write_output
from ._spec import SpecDocument, load_spec
from .galois import FactorKind, ProductModel, enumerate_degree_oracle, product_degree, standard_generators
from .invariants import achieved_ratio, alpha, m_invariant, m_invariant_grid, mt_dimension, spec_universe, worst_case_profile
from .modular import Modulus, SubgroupShape
from .verify import (
    CheckReport,
    check_alpha_convergence,
    check_alpha_eq_m,
    check_closed_forms,
    check_degree_oracle,
    check_full_level,
    check_gammamn,
    check_parallelogram,
    check_property_mu,
    describe_spec,
)


DEFAULT_ELL = 3

EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3

_COLORS = {
    'red': '\33[91m',
    'green': '\33[92m',
    'yellow': '\33[93m',
    'bold': '\33[1m',
    'dim': '\33[2m',
    'reset': '\33[0m',
}
_NO_COLORS = {color: '' for color in _COLORS}


_styles = contextvars.ContextVar('_styles', default=_COLORS)


def _init_colors() -> None:
    if 'NO_COLOR' in os.environ:
        if 'FORCE_COLOR' in os.environ:
            warnings.warn('Both NO_COLOR and FORCE_COLOR environment variables are set, disabling color', stacklevel=2)
        _styles.set(_NO_COLORS)
    elif 'FORCE_COLOR' in os.environ or sys.stderr.isatty():
        return
    _styles.set(_NO_COLORS)


def _cprint(fmt: str = '', msg: str = '', file: TextIO | None = None) -> None:
    # stdout is reserved for the report
    print(fmt.format(msg, **_styles.get()), file=file or sys.stderr, flush=True)


def _showwarning(
    message: Warning | str,
    category: type[Warning],
    filename: str,
    lineno: int,
    file: TextIO | None = None,
    line: str | None = None,
) -> None:  # pragma: no cover
    _cprint('{yellow}WARNING{reset} {}', str(message))


_max_terminal_width = shutil.get_terminal_size().columns - 2
if _max_terminal_width <= 0:
    _max_terminal_width = 78


_fill = partial(textwrap.fill, subsequent_indent='  ', width=_max_terminal_width)


def _log(message: str, *, origin: tuple[str, ...] | None = None) -> None:
    if origin is None:
        (first, *rest) = message.splitlines()
        _cprint('{bold}{}{reset}', _fill(first, initial_indent='* '))
        for line in rest:
            _cprint('{}', _fill(line, initial_indent='  '))

    elif origin[0] == 'verify':
        _cprint('{dim}{}{reset}', _fill(message, initial_indent='> '))

    elif origin[0] == 'timing' and _ctx.verbosity > 1:
        _cprint('{dim}{}{reset}', _fill(message, initial_indent='~ '))


def _setup_cli(*, verbosity: int) -> None:
    warnings.showwarning = _showwarning

    if platform.system() == 'Windows':
        try:
            import colorama

            colorama.init()
        except ModuleNotFoundError:
            pass

    _init_colors()

    _ctx.LOGGER.set(_log)
    _ctx.VERBOSITY.set(verbosity)


def _error(msg: str, code: int = EXIT_FAILURE) -> NoReturn:  # pragma: no cover
    """
    Print an error message and exit. Will color the output when writing to a TTY.

    :param msg: Error message
    :param code: Exit code
    """
    _cprint('{red}ERROR{reset} {}', msg)
    raise SystemExit(code)


@contextlib.contextmanager
def _handle_errors() -> Iterator[None]:
    try:
        yield
    except (SpecValidationError, ConfigError) as e:
        _error(str(e), EXIT_USAGE)
    except InfeasibleComputationError as e:
        _error(str(e), EXIT_INFEASIBLE)
    except (TorsionException, ValueError) as e:
        _error(str(e))
    except Exception as e:  # pragma: no cover
        tb = traceback.format_exc().strip('\n')
        _cprint('\n{dim}{}{reset}\n', tb)
        _error(str(e))


def _prime(text: str) -> int:
    value = int(text)
    if not sympy.isprime(value):
        msg = f'{value} is not a prime'
        raise argparse.ArgumentTypeError(msg)
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        msg = f'{value} is not a positive integer'
        raise argparse.ArgumentTypeError(msg)
    return value


def _kinds(text: str) -> list[FactorKind]:
    return [FactorKind.parse(part) for part in text.split(',') if part.strip()]


def _shapes(text: str) -> list[SubgroupShape]:
    return [SubgroupShape.parse(part) for part in text.split(';') if part.strip()]


def _levels(text: str) -> list[int]:
    return [_positive(part) for part in text.split(',') if part.strip()]


def _cm_kind(text: str) -> FactorKind:
    return FactorKind.CMNONSPLIT if text == 'nonsplit' else FactorKind.CMSPLIT


def _report(args: argparse.Namespace, inputs: dict[str, object], results: dict[str, object], **extra: object) -> Report:
    return Report(args.command_line, inputs, results, torsion.__version__, **extra)  # type: ignore[arg-type]


def _load(args: argparse.Namespace) -> tuple[SpecDocument, dict[str, object]]:
    document = load_spec(args.spec)
    return document, {'spec': os.fspath(args.spec), 'classes': describe_spec(document.to_variety())}


def _ell(args: argparse.Namespace, document: SpecDocument | None) -> int:
    if args.ell is not None:
        return int(args.ell)
    if document is not None and document.ell is not None:
        return document.ell
    return DEFAULT_ELL


def _run_alpha(args: argparse.Namespace, settings: Settings) -> tuple[Report, bool]:
    document, inputs = _load(args)
    spec = document.to_variety()
    witness = alpha(spec, method=args.method, exhaustive_limit=settings.exhaustive_subset_limit)
    results = {'value': witness.value, 'mt_dimension': mt_dimension(spec, witness.subset)}
    return _report(args, {**inputs, 'method': args.method}, results, witnesses={'subset': list(witness.subset)}), True


def _run_minv(args: argparse.Namespace, settings: Settings) -> tuple[Report, bool]:
    document, inputs = _load(args)
    spec = document.to_variety()
    witness = m_invariant(spec)
    results: dict[str, object] = {'value': witness.value, 'active_case': witness.active_case, 'alpha': alpha(spec).value}
    witnesses: dict[str, object] = {'profile': witness.profile}
    ok = True
    if args.grid_bound is not None:
        bound = args.grid_bound or settings.grid_bound
        grid = m_invariant_grid(spec, bound, budget=settings.budget)
        inputs['grid_bound'] = bound
        results['grid_value'] = grid.value
        witnesses['grid_profile'] = grid.profile
        ok = grid.value <= witness.value
    return _report(args, inputs, results, witnesses=witnesses), ok


def _run_degree(args: argparse.Namespace, settings: Settings) -> tuple[Report, bool]:
    mod = Modulus(args.ell, args.level)
    model = ProductModel.of(args.model, mod)
    inputs = {
        'ell': args.ell,
        'level': args.level,
        'model': [str(kind.value) for kind in args.model],
        'shapes': [str(shape) for shape in args.shapes],
    }
    report = product_degree(model, args.shapes)
    results: dict[str, object] = {
        'degree': report.degree,
        'per_factor_degrees': list(report.per_factor_degrees),
        'cyclotomic_exponent': report.cyclotomic_exponent,
        'ell_valuation': report.ell_valuation,
        'log_ell_degree': report.log_ell_degree,
        'prime_to_ell_part': report.prime_to_ell_part,
        'glued_order': report.glued_order,
        'fixer_order': report.fixer_order,
    }
    ok = True
    if args.oracle:
        generators = [standard_generators(shape, mod) for shape in args.shapes]
        oracle = enumerate_degree_oracle(model, generators, budget=settings.budget)
        results['oracle_degree'] = oracle
        ok = oracle == report.degree
    return _report(args, inputs, results), ok


def _run_worst(args: argparse.Namespace, settings: Settings) -> tuple[Report, bool]:
    document, inputs = _load(args)
    spec = document.to_variety()
    ell = _ell(args, document)
    profile = worst_case_profile(spec, args.scale)
    ratio = achieved_ratio(spec, profile, ell, cm_kind=_cm_kind(args.cm_model))
    inputs.update(ell=ell, scale=args.scale, cm_model=args.cm_model)
    results = {
        'ratio': ratio.value,
        'corrected': ratio.corrected,
        'unit_correction': ratio.unit_correction,
        'torsion_log': ratio.torsion_log,
        'degree': ratio.degree.degree,
        'alpha': alpha(spec).value,
        'm': m_invariant(spec).value,
    }
    witnesses = {'profile': profile, 'level': int(profile.max_exponent)}
    return _report(args, inputs, results, witnesses=witnesses), True


_CheckRun = typing.Tuple[typing.Dict[str, object], CheckReport]


def _check_groups(args: argparse.Namespace, settings: Settings) -> _CheckRun:
    level = args.level or settings.enumeration_level
    inputs: dict[str, object] = {'ell': args.ell, 'level': level}
    if args.check == 'oracle':
        inputs['factors'] = args.factors
        return inputs, check_degree_oracle(args.ell, level, args.factors, budget=settings.budget)

    inputs['kind'] = args.kind.value
    if args.check == 'gammamn':
        return inputs, check_gammamn(args.ell, level, kind=args.kind, budget=settings.budget)
    if args.check == 'full-level':
        return inputs, check_full_level(args.kind, args.ell, level, budget=settings.budget)
    return inputs, check_property_mu(args.kind, args.ell, level, budget=settings.budget)


def _check_parallelogram(args: argparse.Namespace, settings: Settings) -> _CheckRun:
    levels = args.levels or list(range(1, settings.enumeration_level + 1))
    inputs = {'ell': args.ell, 'model': [kind.value for kind in args.model], 'levels': levels, 'oracle': args.oracle}
    return inputs, check_parallelogram(args.ell, args.model, levels, oracle=args.oracle, budget=settings.budget)


def _check_convergence(args: argparse.Namespace, settings: Settings) -> _CheckRun:
    document, inputs = _load(args)
    ell = _ell(args, document)
    t_max = args.t_max or settings.t_max
    tolerance = args.tolerance or settings.tolerance
    inputs.update(ell=ell, t_max=t_max, tolerance=tolerance, cm_model=args.cm_model)
    report = check_alpha_convergence(
        document.to_variety(),
        ell,
        t_max,
        tolerance=tolerance,
        cm_kind=_cm_kind(args.cm_model),
        max_level=settings.formula_level,
    )
    return inputs, report


def _check_alpha_eq_m(args: argparse.Namespace, settings: Settings) -> _CheckRun:
    if args.spec is not None:
        document, inputs = _load(args)
        specs = [document.to_variety()]
    else:
        inputs = {'max_classes': args.max_classes, 'max_multiplicity': args.max_multiplicity}
        specs = list(spec_universe(args.max_classes, args.max_multiplicity))
    bound = None if args.grid_bound is None else args.grid_bound or settings.grid_bound
    inputs['grid_bound'] = bound
    return inputs, check_alpha_eq_m(specs, grid_bound=bound, budget=settings.budget)


def _check_closed_forms(args: argparse.Namespace, settings: Settings) -> _CheckRun:
    return {'max_count': args.max_count}, check_closed_forms(args.max_count)


_CHECKS = {
    'gammamn': _check_groups,
    'full-level': _check_groups,
    'mu': _check_groups,
    'oracle': _check_groups,
    'parallelogram': _check_parallelogram,
    'convergence': _check_convergence,
    'alpha-eq-m': _check_alpha_eq_m,
    'closed-forms': _check_closed_forms,
}


def _run_check(args: argparse.Namespace, settings: Settings) -> tuple[Report, bool]:
    inputs, report = _CHECKS[args.check](args, settings)
    results = {
        'passed': report.passed,
        'cells': list(report.cells),
        'failures': len(report.failures),
    }
    witnesses = {'counterexamples': [cell.counterexample for cell in report.failures]}
    summary = _report(args, {'check': args.check, **inputs}, results, witnesses=witnesses, constants=report.measured_constants)
    return summary, report.passed


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--format',
        '-f',
        choices=('json', 'table'),
        default='table',
        help='report format (defaults to table)',
    )
    common.add_argument(
        '--out',
        '-o',
        type=str,
        help='write the report to PATH instead of stdout',
        metavar='PATH',
    )
    common.add_argument(
        '--budget',
        type=_positive,
        help='largest number of group elements or grid points to enumerate',
        metavar='N',
    )
    common.add_argument(
        '--config',
        '-c',
        type=str,
        help='TOML file with a [torsion] or [tool.torsion] table',
        metavar='PATH',
    )
    common.add_argument(
        '--verbose',
        '-v',
        dest='verbosity',
        action='count',
        default=0,
        help='increase verbosity',
    )
    return common


def _add_spec(parser: argparse.ArgumentParser, *, required: bool = True) -> None:
    parser.add_argument(
        '--spec',
        '-s',
        required=required,
        help='variety spec document (JSON, or TOML with a .toml suffix)',
        metavar='PATH',
    )


def _add_level(parser: argparse.ArgumentParser, *, kind: bool) -> None:
    parser.add_argument('--ell', '-l', type=_prime, default=DEFAULT_ELL, help='the prime ell (defaults to 3)')
    parser.add_argument('--level', '-N', type=_positive, help='level N (defaults to the enumeration level setting)')
    if kind:
        parser.add_argument(
            '--kind',
            '-k',
            type=FactorKind.parse,
            default=FactorKind.NONCM,
            help='factor model: noncm, cmsplit or cmnonsplit (defaults to noncm)',
        )


def _add_cm_model(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        '--cm-model',
        choices=('split', 'nonsplit'),
        default='split',
        help='model used for every CM class (defaults to split)',
    )


def _add_grid_bound(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        '--grid-bound',
        '-g',
        type=_positive,
        nargs='?',
        const=0,
        help='also scan the integer grid [0, B] (defaults to the grid bound setting when B is omitted)',
        metavar='B',
    )


def main_parser() -> argparse.ArgumentParser:
    """
    Construct the main parser.
    """
    formatter = partial(argparse.RawDescriptionHelpFormatter, width=min(_max_terminal_width, 127))
    parser = argparse.ArgumentParser(
        description=textwrap.indent(
            textwrap.dedent(
                """
                Torsion bounds for products of elliptic curves.

                Computes alpha(A) and m(A) from an isogeny decomposition, the
                degrees of torsion fields in an exact mod ell^N Galois model,
                and runs the verification checks relating them.
                """
            ).strip(),
            '    ',
        ),
        formatter_class=formatter,
    )
    parser.add_argument(
        '--version',
        '-V',
        action='version',
        version=f"torsion {torsion.__version__} ({','.join(torsion.__path__)})",
    )
    common = _common_parser()
    commands = parser.add_subparsers(dest='command', metavar='COMMAND', required=True)

    cmd = commands.add_parser('alpha', parents=[common], formatter_class=formatter, help='compute alpha(A)')
    _add_spec(cmd)
    cmd.add_argument(
        '--method',
        choices=('auto', 'exhaustive', 'greedy'),
        default='auto',
        help='subset search (defaults to auto)',
    )
    cmd.set_defaults(handler=_run_alpha)

    cmd = commands.add_parser('minv', parents=[common], formatter_class=formatter, help='compute m(A) and its optimal ray')
    _add_spec(cmd)
    _add_grid_bound(cmd)
    cmd.set_defaults(handler=_run_minv)

    cmd = commands.add_parser('degree', parents=[common], formatter_class=formatter, help='degree of a torsion field')
    cmd.add_argument('--ell', '-l', type=_prime, required=True, help='the prime ell')
    cmd.add_argument('--level', '-N', type=_positive, required=True, help='level N')
    cmd.add_argument('--model', '-m', type=_kinds, required=True, help='comma separated factor models', metavar='KINDS')
    cmd.add_argument('--shapes', type=_shapes, required=True, help='subgroup shapes, as "m,n;m,n"', metavar='SHAPES')
    cmd.add_argument('--oracle', action='store_true', help='also count the degree by exhaustive enumeration')
    cmd.set_defaults(handler=_run_degree)

    cmd = commands.add_parser('worst', parents=[common], formatter_class=formatter, help='ratio achieved on the worst ray')
    _add_spec(cmd)
    cmd.add_argument('--ell', '-l', type=_prime, help='the prime ell (defaults to the spec, then 3)')
    cmd.add_argument('--scale', '-t', type=_positive, required=True, help='multiple of the primitive ray')
    _add_cm_model(cmd)
    cmd.set_defaults(handler=_run_worst)

    verify = commands.add_parser('verify', formatter_class=formatter, help='run a verification check')
    checks = verify.add_subparsers(dest='check', metavar='CHECK', required=True)

    for name, help_text in (
        ('gammamn', 'fixers are the congruence subgroups'),
        ('full-level', 'the full-level fixer has the claimed multiplier cosets'),
        ('mu', 'multiplier fibers are uniform over their coset'),
    ):
        cmd = checks.add_parser(name, parents=[common], formatter_class=formatter, help=help_text)
        _add_level(cmd, kind=True)

    cmd = checks.add_parser('oracle', parents=[common], formatter_class=formatter, help='closed forms against enumeration')
    _add_level(cmd, kind=False)
    cmd.add_argument(
        '--factors', type=_positive, default=2, help='check every kind tuple of up to this many factors (defaults to 2)'
    )

    cmd = checks.add_parser('parallelogram', parents=[common], formatter_class=formatter, help='measure the ratio R')
    cmd.add_argument('--ell', '-l', type=_prime, default=DEFAULT_ELL, help='the prime ell (defaults to 3)')
    cmd.add_argument('--model', '-m', type=_kinds, default=[FactorKind.NONCM] * 2, help='comma separated factor models')
    cmd.add_argument('--levels', type=_levels, help='comma separated levels (defaults to 1 .. enumeration level)')
    cmd.add_argument('--oracle', action='store_true', help='also compute R by enumeration')

    cmd = checks.add_parser('convergence', parents=[common], formatter_class=formatter, help='achieved ratios tend to alpha')
    _add_spec(cmd)
    cmd.add_argument('--ell', '-l', type=_prime, help='the prime ell (defaults to the spec, then 3)')
    cmd.add_argument('--t-max', type=_positive, help='largest scale (defaults to the t_max setting)')
    cmd.add_argument('--tolerance', type=float, help='largest final gap (defaults to the tolerance setting)')
    _add_cm_model(cmd)

    cmd = checks.add_parser('alpha-eq-m', parents=[common], formatter_class=formatter, help='m(A) equals alpha(A)')
    _add_spec(cmd, required=False)
    cmd.add_argument('--max-classes', type=_positive, default=3, help='universe size (defaults to 3)')
    cmd.add_argument('--max-multiplicity', type=_positive, default=2, help='universe multiplicities (defaults to 2)')
    _add_grid_bound(cmd)

    cmd = checks.add_parser('closed-forms', parents=[common], formatter_class=formatter, help='alpha closed forms')
    cmd.add_argument('--max-count', type=_positive, default=6, help='largest class count (defaults to 6)')

    verify.set_defaults(handler=_run_check)
    return parser


def main(cli_args: Sequence[str], prog: str | None = None) -> None:
    """
    Parse the CLI arguments and run the command.

    Exits with 1 when a check fails, 2 on usage or input errors and 3 when an
    enumeration would exceed the budget.

    :param cli_args: CLI arguments
    :param prog: Program name to show in help text
    """
    parser = main_parser()
    if prog:
        parser.prog = prog
    args = parser.parse_args(cli_args)
    args.command_line = ' '.join(cli_args)

    _setup_cli(verbosity=args.verbosity)

    with _handle_errors():
        settings = load_settings(args.config).replace(budget=args.budget)
        _ctx.BUDGET.set(settings.budget)
        report, ok = args.handler(args, settings)
        write_output(render(report, args.format), args.out)

    if not ok:
        _error(f'{args.command} failed, see the report for counterexamples')
    if args.out:
        _cprint('{bold}{green}Wrote {}{reset}', args.out)


def run(cli_args: Sequence[str]) -> int:
    """
    Run the CLI and return its exit code instead of exiting.
    """
    try:
        main(cli_args)
    except SystemExit as e:
        if e.code is None:
            return 0
        return e.code if isinstance(e.code, int) else EXIT_FAILURE
    return 0


def entrypoint() -> None:
    main(sys.argv[1:])


if __name__ == '__main__':  # pragma: no cover
    main(sys.argv[1:], 'python -m torsion')


__all__ = [
    'main',
    'main_parser',
    'run',
]
