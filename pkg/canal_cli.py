"""
Command-line front end for the canal surface toolkit

Reads a spine curve from a JSON file, runs the requested pipeline stages
and prints canonical equations as text blocks or as one JSON document.

Input document:
    {
        "name": "ellipse",                                  (optional)
        "numerators": [[0], [0], [0, 8], [3, 0, -3]],
        "denominators": [[1, 0, 1], [1, 0, 1], [1, 0, 1], [1, 0, 1]]   (optional)
    }
Coefficients are integers or rational strings such as "3/4", low degree first.

Exit codes: 0 success, 1 computational error, 2 input error.
"""

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

from canal import (
    ImplicitResult, SpineCurve, canal_equation, dual_variety_equation, gamma_equation,
    general_type_check, make_spine, naive_envelope, naive_envelope_d, offset_dual_equation,
    predicted_degrees,
)
from canal_config import PipelineConfig, create_pipeline_config
from error_utils import (
    CanalError, ExitCodes, InputError, error_logger, exit_code_for, set_log_level, validate_job_fields,
)
from exactalg import (
    VARIABLE_NAMES, MultiPoly, Rational, canonical_form, dehomogenize, monomial_count,
    parse_rational, total_degree, uni_poly,
)

logger = logging.getLogger(__name__)

TARGETS = ("dual", "offset-dual", "gamma", "canal", "offset", "naive", "naive-d", "degree-only", "general-type")
OFFSET_TARGETS = frozenset({"offset-dual", "offset", "naive-d"})
REPORT_TARGETS = frozenset({"degree-only", "general-type"})


@dataclass(frozen=True)
class JobSpec:
    """A validated invocation"""
    name: str
    spine: SpineCurve
    targets: Tuple[str, ...]
    d: Optional[Rational]
    output_format: str
    config: PipelineConfig
    affine: bool = False
    affine_early: bool = False


class _JobArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"invalid arguments: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _JobArgumentParser(
        prog="canal_cli",
        description="Implicit equations of canal surfaces, their offsets and dual varieties.",
    )
    parser.add_argument("--input", required=True, help="spine curve JSON file")
    parser.add_argument("--target", default="", help="comma-separated list from: " + ", ".join(TARGETS))
    parser.add_argument("--d", default=None, help='offset distance, e.g. "1/3"')
    parser.add_argument("--affine", action="store_true", help="set y0 = 1 in the emitted equations")
    parser.add_argument("--affine-early", action="store_true", help="set y0 = 1 before eliminating t")
    parser.add_argument("--format", choices=("text", "structured"), default="text")
    parser.add_argument("--seed", type=int, default=None, help="seed for fiber sampling")
    parser.add_argument("--degree-only", action="store_true", help="predicted degrees only, no resultants")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    return parser


def _coefficient_lists(data: Dict[str, Any], key: str) -> List[List[Rational]]:
    lists = data[key]
    if not isinstance(lists, list) or len(lists) != 4:
        raise InputError(f"{key}: expected a list of four coefficient lists", {'field': key})
    parsed = []
    for i, coeffs in enumerate(lists):
        if not isinstance(coeffs, list):
            raise InputError(f"{key}[{i}]: expected a list of coefficients", {'field': f"{key}[{i}]"})
        parsed.append([parse_rational(c, f"{key}[{i}][{j}]") for j, c in enumerate(coeffs)])
    return parsed


def load_spine_file(path: str) -> Tuple[str, SpineCurve]:
    """
    Read a spine curve document.

    Raises:
        InputError: unreadable file, malformed JSON or coefficients, zero denominator
    """
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}", {'path': path})
    except json.JSONDecodeError as e:
        raise InputError(f"{path} is not valid JSON: {e.msg} (line {e.lineno})", {'path': path})

    validate_job_fields(data, ['numerators'])
    numerators = [uni_poly(c) for c in _coefficient_lists(data, 'numerators')]
    denominators = None
    if data.get('denominators') is not None:
        denominators = [uni_poly(c) for c in _coefficient_lists(data, 'denominators')]
    name = data.get('name') or path
    if not isinstance(name, str):
        raise InputError("name: expected a string", {'field': 'name'})
    return name, make_spine(numerators, denominators)


def _parse_targets(raw: str, degree_only: bool) -> Tuple[str, ...]:
    requested = {t.strip() for t in raw.split(",") if t.strip()}
    unknown = sorted(requested - set(TARGETS))
    if unknown:
        raise InputError(f"unknown target(s): {', '.join(unknown)}", {'allowed': list(TARGETS)})
    if degree_only:
        if requested - REPORT_TARGETS:
            raise InputError("--degree-only cannot be combined with equation targets",
                             {'targets': sorted(requested)})
        requested.add("degree-only")
    if "degree-only" in requested and requested - REPORT_TARGETS:
        raise InputError("degree-only cannot be combined with equation targets", {'targets': sorted(requested)})
    if not requested:
        requested = {"canal"}
    return tuple(t for t in TARGETS if t in requested)


def parse_job(argv: Optional[Sequence[str]] = None) -> JobSpec:
    """
    Validate command-line arguments and the input file.

    Raises:
        InputError: bad flags, missing d for an offset target, malformed input file
    """
    args = build_parser().parse_args(argv)
    targets = _parse_targets(args.target, args.degree_only)

    d = parse_rational(args.d, "--d") if args.d is not None else None
    missing_d = sorted(OFFSET_TARGETS.intersection(targets))
    if missing_d and d is None:
        raise InputError(f"target(s) {', '.join(missing_d)} require --d", {'targets': missing_d})

    config = create_pipeline_config(seed=args.seed)
    set_log_level(config.log_level if args.verbose else "WARNING")

    name, spine = load_spine_file(args.input)
    logger.info(f"Job {name}: targets {', '.join(targets)}, n={spine.n}")
    return JobSpec(name=name, spine=spine, targets=targets, d=d,
                   output_format=args.format, config=config,
                   affine=args.affine, affine_early=args.affine_early)


def format_equation(F: MultiPoly) -> str:
    """Terms in graded-lex order, e.g. "+25*y1^2 +25*y2^2 -225*y0^2" """
    terms = []
    for monom, coeff in F.terms():
        factors = [name if e == 1 else f"{name}^{e}" for name, e in zip(VARIABLE_NAMES, monom) if e]
        magnitude = abs(coeff)
        body = "*".join(([str(magnitude)] if magnitude != 1 or not factors else []) + factors)
        terms.append(("-" if coeff < 0 else "+") + body)
    return " ".join(terms)


def _equation_entry(target: str, equation: MultiPoly, job: JobSpec, result: Optional[ImplicitResult] = None) -> Dict[str, Any]:
    if job.affine and not job.affine_early:
        equation = canonical_form(dehomogenize(equation))
    return {
        'target': target,
        'equation': format_equation(equation),
        'degree': total_degree(equation),
        'weighted_degree': result.weighted_degree if result else None,
        'monomials': monomial_count(equation),
        'k': result.k if result else None,
        'mu_degrees': list(result.mu_degrees) if result and result.mu_degrees else None,
        'flags': None,
    }


def run_job(job: JobSpec) -> Dict[str, Any]:
    """Run every requested target and collect a deterministic report"""
    s, config, early = job.spine, job.config, job.affine_early
    cache: Dict[str, ImplicitResult] = {}

    def dual() -> ImplicitResult:
        if 'dual' not in cache:
            cache['dual'] = dual_variety_equation(s, config, early)
        return cache['dual']

    def offset_dual(d) -> ImplicitResult:
        key = f"offset-dual:{d}"
        if key not in cache:
            cache[key] = offset_dual_equation(s, d, config, early)
        return cache[key]

    results = []
    for target in job.targets:
        if target == "dual":
            results.append(_equation_entry(target, dual().equation, job, dual()))
        elif target == "offset-dual":
            result = offset_dual(job.d)
            results.append(_equation_entry(target, result.equation, job, result))
        elif target == "gamma":
            result = gamma_equation(s, config, dual(), early)
            results.append(_equation_entry(target, result.equation, job, result))
        elif target in ("canal", "offset"):
            d = QQ.zero if target == "canal" else job.d
            result = canal_equation(s, d, config, offset_dual(d), early)
            results.append(_equation_entry(target, result.equation, job, result))
        elif target == "naive":
            results.append(_equation_entry(target, naive_envelope(s, config, early), job))
        elif target == "naive-d":
            results.append(_equation_entry(target, naive_envelope_d(s, job.d, config, early), job))
        elif target == "degree-only":
            prediction = predicted_degrees(s, config)
            results.append({
                'target': target,
                'deg_v': prediction.deg_v,
                'deg_gamma': prediction.deg_gamma,
                'conjectured_gamma': prediction.conjectured_gamma,
            })
        elif target == "general-type":
            report = general_type_check(s, config)
            results.append({
                'target': target,
                'flags': report.flags(),
                'gamma': report.gamma,
                'is_general_type': report.is_general_type,
                'w': [str(p.as_expr()) for p in report.w],
            })

    return {
        'name': job.name,
        'n': s.n,
        'd': str(job.d) if job.d is not None else None,
        'seed': config.seed,
        'affine': job.affine,
        'affine_early': job.affine_early,
        'results': results,
    }


def render_structured(report: Dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def render_text(report: Dict[str, Any]) -> str:
    blocks = []
    for entry in report['results']:
        header = f"# {report['name']}: {entry['target']}"
        if entry['target'] == "degree-only":
            blocks.append(f"{header}\ndeg V = {entry['deg_v']}, deg Gamma = {entry['deg_gamma']} "
                          f"(conjectured {entry['conjectured_gamma']})")
        elif entry['target'] == "general-type":
            flags = ", ".join(f"{name}={value}" for name, value in entry['flags'].items())
            blocks.append(f"{header}\ngeneral type: {entry['is_general_type']} (gamma = {entry['gamma']}; {flags})")
        else:
            facts = [f"degree {entry['degree']}", f"{entry['monomials']} monomials"]
            if entry['weighted_degree'] is not None:
                facts.insert(1, f"weighted degree {entry['weighted_degree']}")
            if entry['k'] is not None:
                facts.append(f"k = {entry['k']}")
            if entry['mu_degrees'] is not None:
                facts.append(f"mu-degrees {tuple(entry['mu_degrees'])}")
            blocks.append(f"{header}\n{', '.join(facts)}\n{entry['equation']}")
    return "\n\n".join(blocks) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        job = parse_job(argv)
        report = run_job(job)
    except CanalError as e:
        error_logger.log_error(e, {'argv': list(argv) if argv is not None else sys.argv[1:]})
        print(f"error: {e.message}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        error_logger.log_error(e, {'argv': list(argv) if argv is not None else sys.argv[1:]})
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e)

    output = render_structured(report) if job.output_format == "structured" else render_text(report)
    sys.stdout.write(output)
    return ExitCodes.SUCCESS


if __name__ == "__main__":
    sys.exit(main())
