"""Command line: gen, spectrum, percolate, peel, analyze, expansion, experiment."""
import argparse
import logging
import sys
from typing import Optional, Sequence

import pandas as pd

from app.core.config import settings
from app.core.errors import PercLabError
from app.core.logging import configure_logging
from app.schemas.experiment import ExperimentConfig
from app.schemas.generator import GeneratorSpec, GraphFamily
from app.schemas.percolation import PercolationParams
from app.schemas.structure import SubsetRule
from app.services.expansion_service import ExpansionService
from app.services.experiment_service import ExperimentService
from app.services.generator_service import GeneratorService
from app.services.io_service import GraphIOService
from app.services.percolation_service import PercolationService
from app.services.spectral_service import SpectralService
from app.services.structure_service import StructureService

logger = logging.getLogger(__name__)

RULES = {"strict": SubsetRule.STRICT_HALF, "atmost": SubsetRule.AT_MOST_HALF}


def _emit(stream=None, **fields) -> None:
    print(" ".join(f"{key}={_fmt(value)}" for key, value in fields.items()), file=stream or sys.stdout)


def _fmt(value) -> str:
    if value is None:
        return "na"
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.9g}"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value) or "-"
    return str(value)


def cmd_gen(args: argparse.Namespace) -> int:
    spec = GeneratorSpec(family=GraphFamily(args.family), n=args.n, d=args.d, q=args.q, seed=args.seed)
    graph = GeneratorService(settings).generate(spec)
    GraphIOService().write_edge_list(graph, args.out)
    _emit(family=args.family, n=graph.n, m=graph.m, d=graph.regular_degree(), out=args.out)
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    graph = GraphIOService().read_edge_list(args.graph)
    spectral = SpectralService(settings)
    summary = spectral.second_eigenvalue_abs(graph, tol=args.tol, max_iter=args.max_iter)
    _emit(
        d=summary.d, **{"lambda": summary.lambda_}, c=summary.c, method=summary.method.value,
        residual=summary.residual, iterations=summary.iterations, converged=summary.converged,
        mu2=summary.mu2, mu_min=summary.mu_min,
    )
    _emit(
        expansion_lower_bound=spectral.spectral_expansion_lower_bound(summary.d, summary.lambda_),
        expansion_upper_bound=(
            None if summary.mu2 is None
            else spectral.spectral_expansion_upper_bound(summary.d, summary.mu2)
        ),
    )
    audit = spectral.mixing_lemma_audit(graph, summary.lambda_, args.samples, args.seed)
    _emit(audit_samples=audit.samples, max_normalized_slack=audit.max_normalized_slack,
          violations=len(audit.violations))
    if args.density_k:
        density = spectral.density_bound_check(graph, summary.lambda_, args.density_k, args.samples, args.seed)
        _emit(density_k=density.k, max_set_size=density.max_set_size, bound=density.bound,
              worst_ratio=density.worst_ratio, density_violations=density.violations,
              skipped=density.skipped, exhaustive=density.exhaustive)
    if args.csv:
        row = summary.model_dump(by_alias=True, mode="json")
        row.update(audit_samples=audit.samples, max_normalized_slack=audit.max_normalized_slack,
                   audit_violations=len(audit.violations))
        pd.DataFrame([row]).to_csv(args.csv, index=False, float_format="%.9g", lineterminator="\n")
    return 0 if audit.passed else 1


def cmd_percolate(args: argparse.Namespace) -> int:
    io = GraphIOService()
    graph = io.read_edge_list(args.graph)
    gp = PercolationService().percolate(graph, args.p, args.seed)
    io.write_edge_list(gp, args.out)
    _emit(n=gp.n, m=gp.m, host_m=graph.m, p=args.p, seed=args.seed, out=args.out)
    return 0


def _load_pair(args: argparse.Namespace):
    io = GraphIOService()
    host = io.read_edge_list(args.graph)
    gp = io.read_edge_list(args.percolated)
    if gp.n != host.n:
        raise PercLabError(f"percolated graph has n={gp.n}, host has n={host.n}")
    d = args.d if args.d is not None else host.regular_degree()
    if d is None:
        raise PercLabError("host is not regular; pass --d")
    return io, host, gp, d


def cmd_peel(args: argparse.Namespace) -> int:
    io, host, gp, d = _load_pair(args)
    percolation = PercolationService()
    if args.order == "random":
        trace = percolation.peel_random_order(gp, args.p, d, args.seed)
    else:
        trace = percolation.peel(gp, args.p, d, seed=args.seed)
    if args.out:
        io.write_trace(trace, args.out)
    else:
        sys.stdout.write(io.format_trace(trace))
    violations = percolation.verify_trace(gp, trace)
    for violation in violations:
        print(f"violation code={violation.code} vertex={_fmt(violation.vertex)} message=\"{violation.message}\"",
              file=sys.stderr)
    _emit(s0=len(trace.s0), iterations=len(trace.removals), survivors=len(trace.survivors),
          out_size=len(trace.out), violations=len(violations), stream=sys.stderr)
    return 0 if not violations else 1


def cmd_analyze(args: argparse.Namespace) -> int:
    io, host, gp, d = _load_pair(args)
    summary = SpectralService(settings).second_eigenvalue_abs(host, tol=args.tol, max_iter=args.max_iter)
    params = PercolationParams(p=args.p, seed=args.seed, d=d, c=summary.c)
    trace = io.read_trace(args.trace, gp.n, params)
    structure = StructureService(settings)
    out_report = structure.out_component_report(gp, trace, summary.c, d, host=host, lam=summary.lambda_)
    certificate = structure.giant_expansion_certificate(
        gp, trace, summary.lambda_, d, args.p, args.samples, args.seed, host=host
    )
    _emit(**{"lambda": summary.lambda_}, c=summary.c, advisory=params.advisory)
    _emit(out_components=len(out_report.components), max_out_component=out_report.max_component_size,
          size_bound=out_report.size_bound, size_bound_ln=out_report.size_bound_natural_log,
          all_balanced=out_report.all_balanced)
    for condition in certificate.conditions:
        _emit(condition=condition.name, passed=condition.passed, measured=condition.measured,
              threshold=condition.threshold)
    _emit(certificate_pass=certificate.passed, implied_bound=certificate.implied_bound,
          implied_bound_ln=certificate.implied_bound_natural_log, giant_size=certificate.giant_size,
          second_component=certificate.second_component_size,
          giant_contains_survivors=certificate.giant_contains_survivors,
          core_connected=certificate.core_connected,
          sampled_giant_expansion=certificate.sampled_giant_expansion,
          longest_bare_path=certificate.bare_path.longest_bare_path)
    if args.csv:
        frame = pd.DataFrame([comp.model_dump() for comp in out_report.components])
        frame.to_csv(args.csv, index=False, float_format="%.9g", lineterminator="\n")
    return 0 if certificate.passed else 1


def cmd_expansion(args: argparse.Namespace) -> int:
    graph = GraphIOService().read_edge_list(args.graph)
    service = ExpansionService(settings)
    if args.bounded:
        report = service.expansion_upper_bound(graph, args.trials, args.seed)
    else:
        report = service.exact_edge_expansion(graph, RULES[args.rule])
    _emit(mode=report.mode.value, rule=report.subset_rule.value, value=report.value_fraction or report.value,
          lower_bound=report.lower_bound, upper_bound=report.upper_bound,
          witness_size=len(report.witness), witness_boundary=report.witness_boundary,
          connected=report.connected)
    _emit(witness=report.witness)
    return 0


def cmd_experiment(args: argparse.Namespace) -> int:
    service = ExperimentService(settings)
    if args.preset:
        config = service.preset(args.preset)
    else:
        with open(args.config) as handle:
            config = service.parse_config(handle.read())
    config = service.apply_overrides(config, trials=args.trials, seed=args.seed, output=args.out)
    result = service.run_experiment(config)
    for line in service.summary_lines(result.summary):
        print(line)
    return 0 if result.summary.all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perc-lab", description=__doc__)
    parser.add_argument("--log-level", default=settings.log_level)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a graph and write its edge list")
    gen.add_argument("--family", required=True, choices=[f.value for f in GraphFamily])
    gen.add_argument("--n", type=int)
    gen.add_argument("--d", type=int)
    gen.add_argument("--q", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=cmd_gen)

    spectrum = sub.add_parser("spectrum", help="lambda, c and the mixing audit")
    spectrum.add_argument("--graph", required=True)
    spectrum.add_argument("--tol", type=float)
    spectrum.add_argument("--max-iter", type=int)
    spectrum.add_argument("--samples", type=int, default=1000)
    spectrum.add_argument("--seed", type=int, default=0)
    spectrum.add_argument("--density-k", type=int)
    spectrum.add_argument("--csv")
    spectrum.set_defaults(handler=cmd_spectrum)

    percolate = sub.add_parser("percolate", help="keep each edge with probability p")
    percolate.add_argument("--graph", required=True)
    percolate.add_argument("--p", required=True)
    percolate.add_argument("--seed", type=int, default=0)
    percolate.add_argument("--out", required=True)
    percolate.set_defaults(handler=cmd_percolate)

    for name, handler, text in (
        ("peel", cmd_peel, "peel the percolated graph and write the trace"),
        ("analyze", cmd_analyze, "OUT report and giant expansion certificate"),
    ):
        command = sub.add_parser(name, help=text)
        command.add_argument("--graph", required=True)
        command.add_argument("--percolated", required=True)
        command.add_argument("--p", required=True)
        command.add_argument("--d", type=int)
        command.add_argument("--seed", type=int, default=0)
        command.set_defaults(handler=handler)
        if name == "peel":
            command.add_argument("--out")
            command.add_argument("--order", choices=["sequential", "random"], default="sequential")
        else:
            command.add_argument("--trace", required=True)
            command.add_argument("--samples", type=int, default=1000)
            command.add_argument("--csv")
            command.add_argument("--tol", type=float, default=ExperimentConfig.model_fields["spectral_tol"].default)
            command.add_argument(
                "--max-iter", type=int, default=ExperimentConfig.model_fields["spectral_max_iter"].default
            )

    expansion = sub.add_parser("expansion", help="exact or bounded edge expansion")
    mode = expansion.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--bounded", action="store_true")
    expansion.add_argument("--graph", required=True)
    expansion.add_argument("--rule", choices=sorted(RULES), default="atmost")
    expansion.add_argument("--trials", type=int, default=200)
    expansion.add_argument("--seed", type=int, default=0)
    expansion.set_defaults(handler=cmd_expansion)

    experiment = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    source = experiment.add_mutually_exclusive_group(required=True)
    source.add_argument("--config")
    source.add_argument("--preset")
    experiment.add_argument("--trials", type=int)
    experiment.add_argument("--seed", type=int)
    experiment.add_argument("--out")
    experiment.set_defaults(handler=cmd_experiment)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
