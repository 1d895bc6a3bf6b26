"""Monte Carlo harness: host once, then percolate, peel and check per trial."""
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional

import pandas as pd

from app.core.config import Settings, settings as default_settings
from app.core.errors import (
    MalformedConfigValueError, MissingConfigKeyError, PercLabError,
    UnknownConfigKeyError, UnknownPresetError
)
from app.core.probability import format_probability, parse_probability, round_probability
from app.core.rng import STREAM_GENERATION, STREAM_PERCOLATION, STREAM_SAMPLING, derive_seed
from app.models.graph import Graph
from app.schemas.experiment import (
    RECORD_COLUMNS, CheckName, CheckSummary, ExperimentConfig, ExperimentRecord,
    ExperimentResult, ExperimentSummary, PValueSummary
)
from app.schemas.generator import GeneratorSpec, GraphFamily
from app.services.expansion_service import ExpansionService
from app.services.generator_service import GeneratorService
from app.services.percolation_service import PercolationService
from app.services.spectral_service import SpectralService
from app.services.structure_service import StructureService

logger = logging.getLogger(__name__)

CONFIG_KEYS = {
    "name", "family", "n", "d", "q", "seed", "p", "trials", "checks", "output",
    "core_samples", "tol", "max_iter",
}
REQUIRED_KEYS = ("family", "trials", "seed")
COUNT_COLUMNS = [
    "trial", "n", "d", "s0_size", "out_size", "peel_iterations", "survivor_count",
    "giant_size", "second_comp_size", "max_out_comp", "all_out_balanced", "certificate_pass",
]
FLOAT_COLUMNS = [
    "lambda", "c", "out_comp_bound", "min_sampled_core_expansion", "core_bound_pd13", "theorem_bound",
]
RATIO_EPS = 1e-12


def _kn_boundary_text() -> str:
    n = 200
    sweep = [Fraction(1, 5), Fraction(1), Fraction(5), Fraction(25)]
    ps = ", ".join(format_probability(x / (n - 1), places=8) for x in sweep)
    return (
        "# K_n around c/sqrt(d) = 1/(n-1)\n"
        "name = kn-boundary\n"
        "family = complete\n"
        f"n = {n}\n"
        f"p = {ps}\n"
        "trials = 10\n"
        "seed = 1\n"
        "core_samples = 1000\n"
    )


PRESETS = {
    "kn-boundary": _kn_boundary_text(),
    "random-regular-main": (
        "# theorem regime: p = 5c/sqrt(d) after measuring lambda\n"
        "name = random-regular-main\n"
        "family = random-regular\n"
        "n = 20000\n"
        "d = 256\n"
        "p = auto\n"
        "trials = 10\n"
        "seed = 1\n"
        "core_samples = 10000\n"
        "tol = 1e-4\n"
        "max_iter = 2000\n"
    ),
    "cycle-negative-control": (
        "# 2-regular non-expander; the certificate should fail\n"
        "name = cycle-negative-control\n"
        "family = cycle\n"
        "n = 1000\n"
        "p = 0.6\n"
        "trials = 10\n"
        "seed = 1\n"
        "core_samples = 1000\n"
    ),
}


@dataclass(frozen=True)
class TrialTask:
    experiment_id: str
    p_index: int
    trial: int
    seed: int
    p: str
    lam: float
    c: float
    d: int
    checks: tuple[str, ...]
    core_samples: int


_worker_host: Optional[Graph] = None
_worker_settings: Optional[Settings] = None


def _init_worker(host: Graph, settings: Settings) -> None:
    global _worker_host, _worker_settings
    _worker_host = host
    _worker_settings = settings


def _run_trial(task: TrialTask) -> ExperimentRecord:
    host, settings = _worker_host, _worker_settings
    base = dict(
        experiment_id=task.experiment_id, trial=task.trial, seed=task.seed, n=host.n, d=task.d,
        lambda_=task.lam, c=task.c, p=task.p,
    )
    try:
        return _measure(host, settings, task, base)
    except PercLabError as exc:
        logger.warning("trial_failed id=%s trial=%d p=%s error=%r", task.experiment_id, task.trial, task.p, exc)
        return ExperimentRecord(**base, status=f"error:{type(exc).__name__}")


def _measure(host: Graph, settings: Settings, task: TrialTask, base: dict) -> ExperimentRecord:
    percolation = PercolationService()
    structure = StructureService(settings)
    checks = set(task.checks)
    fraction = parse_probability(task.p)
    sampling_seed = derive_seed(task.seed, STREAM_SAMPLING)

    percolation_seed = derive_seed(task.seed, STREAM_PERCOLATION)
    gp = percolation.percolate(host, fraction, percolation_seed)
    trace = percolation.peel(gp, task.p, task.d, seed=percolation_seed, c=task.c)
    components = gp.connected_components()
    fields = dict(
        s0_size=len(trace.s0),
        out_size=len(trace.out),
        peel_iterations=len(trace.removals),
        survivor_count=len(trace.survivors),
        giant_size=len(components[0]) if components else 0,
        second_comp_size=len(components[1]) if len(components) > 1 else 0,
        out_comp_bound=structure.size_bound(host.n, task.c, task.d),
        core_bound_pd13=float(fraction * task.d / settings.core_expansion_divisor),
        theorem_bound=structure.implied_bound(host.n, task.c, task.d),
    )

    if CheckName.CERTIFICATE.value in checks:
        certificate = structure.giant_expansion_certificate(
            gp, trace, task.lam, task.d, fraction, task.core_samples, sampling_seed
        )
        fields.update(
            certificate_pass=int(certificate.passed),
            min_sampled_core_expansion=certificate.core_expansion.min_ratio,
            max_out_comp=certificate.max_out_component,
            all_out_balanced=int(certificate.condition("d-out-balanced").passed),
        )
    else:
        if checks & {CheckName.OUT_COMPONENTS.value, CheckName.BALANCE.value}:
            out_report = structure.out_component_report(gp, trace, task.c, task.d)
            fields.update(
                max_out_comp=out_report.max_component_size,
                all_out_balanced=int(out_report.all_balanced),
            )
        if CheckName.CORE_EXPANSION.value in checks:
            core, _ = gp.induced_subgraph(gp.vertex_set(trace.survivors))
            core_report = ExpansionService(settings).sampled_core_expansion(
                core, fraction, task.d, task.core_samples, sampling_seed
            )
            fields["min_sampled_core_expansion"] = core_report.min_ratio

    status = "low-pd" if fraction * task.d < 5 else "ok"
    logger.info(
        "trial_done id=%s trial=%d p=%s s0=%d out=%d status=%s",
        task.experiment_id, task.trial, task.p, fields["s0_size"], fields["out_size"], status,
    )
    return ExperimentRecord(**base, **fields, status=status)


class ExperimentService:
    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or default_settings

    @staticmethod
    def parse_config(text: str) -> ExperimentConfig:
        """Parse `key = value` lines; errors carry the offending line number"""
        values: dict[str, tuple[str, int]] = {}
        lines = text.splitlines()
        for number, raw in enumerate(lines, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise MalformedConfigValueError(f"expected 'key = value', got {raw.strip()!r}", number)
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise UnknownConfigKeyError(f"unknown key {key!r}", number)
            if key in values:
                raise MalformedConfigValueError(f"duplicate key {key!r}", number)
            if not value:
                raise MalformedConfigValueError(f"empty value for {key!r}", number)
            values[key] = (value, number)

        end = max(len(lines), 1)
        for key in REQUIRED_KEYS:
            if key not in values:
                raise MissingConfigKeyError(f"missing required key {key!r}", end)

        def integer(key: str, low: int = 0, high: Optional[int] = None) -> Optional[int]:
            if key not in values:
                return None
            value, number = values[key]
            try:
                parsed = int(value, 0)
            except ValueError:
                raise MalformedConfigValueError(f"{key} must be an integer, got {value!r}", number)
            if parsed < low or (high is not None and parsed > high):
                raise MalformedConfigValueError(f"{key} = {parsed} is out of range", number)
            return parsed

        def positive_float(key: str, default: float) -> float:
            if key not in values:
                return default
            value, number = values[key]
            try:
                parsed = float(value)
            except ValueError:
                raise MalformedConfigValueError(f"{key} must be a number, got {value!r}", number)
            if not parsed > 0:
                raise MalformedConfigValueError(f"{key} must be positive", number)
            return parsed

        family_text, family_line = values["family"]
        try:
            family = GraphFamily(family_text)
        except ValueError:
            raise MalformedConfigValueError(f"unknown family {family_text!r}", family_line)

        p_values = ["auto"]
        if "p" in values:
            p_text, p_line = values["p"]
            p_values = [item.strip() for item in p_text.split(",")]
            for item in p_values:
                if item == "auto":
                    continue
                try:
                    parse_probability(item)
                except PercLabError as exc:
                    raise MalformedConfigValueError(str(exc), p_line)

        checks = list(CheckName)
        if "checks" in values:
            check_text, check_line = values["checks"]
            if check_text != "all":
                try:
                    checks = [CheckName(item.strip()) for item in check_text.split(",")]
                except ValueError:
                    raise MalformedConfigValueError(f"unknown check in {check_text!r}", check_line)

        seed = integer("seed", high=2**64 - 1)
        return ExperimentConfig(
            name=values.get("name", ("experiment", 0))[0],
            generator=GeneratorSpec(
                family=family, n=integer("n"), d=integer("d"), q=integer("q"), seed=seed,
            ),
            p_values=p_values,
            trials=integer("trials", low=1),
            base_seed=seed,
            checks=checks,
            output=values["output"][0] if "output" in values else None,
            core_samples=integer("core_samples", low=1) or 10_000,
            spectral_tol=positive_float("tol", 1e-6),
            spectral_max_iter=integer("max_iter", low=1) or 3000,
        )

    def preset(self, name: str) -> ExperimentConfig:
        if name not in PRESETS:
            raise UnknownPresetError(f"unknown preset {name!r}; choose one of {', '.join(sorted(PRESETS))}")
        return self.parse_config(PRESETS[name])

    @staticmethod
    def apply_overrides(
        config: ExperimentConfig,
        trials: Optional[int] = None,
        seed: Optional[int] = None,
        output: Optional[str] = None,
    ) -> ExperimentConfig:
        update = {}
        if trials is not None:
            if trials < 1:
                raise MalformedConfigValueError("trials must be >= 1")
            update["trials"] = trials
        if seed is not None:
            update["base_seed"] = seed
            update["generator"] = config.generator.model_copy(update={"seed": seed})
        if output is not None:
            update["output"] = output
        return config.model_copy(update=update)

    def resolve_p_values(self, config: ExperimentConfig, c: float, d: int) -> list[str]:
        resolved = []
        for item in config.p_values:
            value = round_probability(5 * c / math.sqrt(d), 4) if item == "auto" else item
            if value not in resolved:
                resolved.append(value)
        return resolved

    def run_experiment(self, config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentResult:
        spec = config.generator.model_copy(update={"seed": derive_seed(config.base_seed, STREAM_GENERATION)})
        host = GeneratorService(self.settings).generate(spec)
        spectrum = SpectralService(self.settings).second_eigenvalue_abs(
            host, tol=config.spectral_tol, max_iter=config.spectral_max_iter
        )
        d = spectrum.d
        lam, c = spectrum.lambda_, spectrum.c
        p_values = self.resolve_p_values(config, c, d)
        logger.info(
            "experiment_start id=%s n=%d d=%d lambda=%.6g c=%.6g p=%s trials=%d",
            config.name, host.n, d, lam, c, ",".join(p_values), config.trials,
        )

        tasks = [
            TrialTask(
                experiment_id=config.name, p_index=p_index, trial=trial,
                seed=derive_seed(config.base_seed, trial), p=p, lam=lam, c=c, d=d,
                checks=tuple(check.value for check in config.checks),
                core_samples=config.core_samples,
            )
            for p_index, p in enumerate(p_values)
            for trial in range(config.trials)
        ]
        workers = workers or self.settings.threads
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(
                max_workers=min(workers, len(tasks)), initializer=_init_worker, initargs=(host, self.settings)
            ) as pool:
                records = list(pool.map(_run_trial, tasks))
        else:
            _init_worker(host, self.settings)
            records = [_run_trial(task) for task in tasks]

        summary = self.summarize(records, config, host.n, d, lam, c, p_values)
        if config.output:
            self.write_csv(records, config.output)
        return ExperimentResult(records=records, summary=summary)

    @staticmethod
    def records_frame(records: list[ExperimentRecord]) -> pd.DataFrame:
        frame = pd.DataFrame([record.as_row() for record in records], columns=RECORD_COLUMNS)
        for column in COUNT_COLUMNS:
            frame[column] = frame[column].astype("Int64")
        for column in FLOAT_COLUMNS:
            frame[column] = frame[column].astype(float)
        frame["seed"] = frame["seed"].astype(str)
        return frame

    def write_csv(self, records: list[ExperimentRecord], path: str) -> None:
        frame = self.records_frame(records)
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format="%.9g", lineterminator="\n", na_rep="")
        logger.info("csv_written path=%s rows=%d", path, len(frame))

    def summarize(
        self, records: list[ExperimentRecord], config: ExperimentConfig, n: int, d: int,
        lam: float, c: float, p_values: list[str],
    ) -> ExperimentSummary:
        frame = self.records_frame(records)
        ok = ~frame["status"].str.startswith("error")
        enabled = set(config.checks)
        out_bound = math.exp(-c * math.sqrt(d) / 12) * n

        def count(mask: pd.Series) -> int:
            return int((mask.fillna(False).astype(bool) & ok).sum())

        rows = {
            CheckName.OUT_SIZE: (count(frame["out_size"] <= out_bound), f"|OUT| <= {out_bound:.6g}"),
            CheckName.OUT_COMPONENTS: (
                count(frame["max_out_comp"] <= frame["out_comp_bound"]),
                "max OUT component <= size bound",
            ),
            CheckName.BALANCE: (count(frame["all_out_balanced"] == 1), "every OUT component balanced"),
            CheckName.CORE_EXPANSION: (
                count(frame["min_sampled_core_expansion"].isna()
                      | (frame["min_sampled_core_expansion"] >= frame["core_bound_pd13"] * (1 - RATIO_EPS))),
                "sampled core expansion >= pd/13",
            ),
            CheckName.CERTIFICATE: (count(frame["certificate_pass"] == 1), "certificate conditions (a)-(f)"),
        }
        checks = [
            CheckSummary(check=name, passed=passed, total=len(frame), threshold=threshold)
            for name, (passed, threshold) in rows.items()
            if name in enabled
        ]

        per_p = []
        concentrated = 0
        for p in p_values:
            block = frame[(frame["p"] == p) & ok]
            s0 = block["s0_size"].astype(float)
            mean_s0 = float(s0.mean()) if len(block) else 0.0
            std_s0 = float(s0.std(ddof=0)) if len(block) else 0.0
            if len(block) and std_s0 <= 3 * math.sqrt(mean_s0):
                concentrated += 1
            with_s0 = block[block["s0_size"] > 0]
            ratio = (with_s0["peel_iterations"] / with_s0["s0_size"]).astype(float)
            per_p.append(PValueSummary(
                p=p,
                trials=len(block),
                mean_s0=mean_s0,
                std_s0=std_s0,
                expected_s0_bound=math.exp(-c * math.sqrt(d) / 10) * n,
                mean_iterations_per_s0=float(ratio.mean()) if len(ratio) else None,
                mean_giant_fraction=float(block["giant_size"].astype(float).mean() / n) if len(block) and n else 0.0,
                flagged_low_pd=parse_probability(p) * d < 5,
            ))
        if CheckName.S0_CONCENTRATION in enabled:
            checks.append(CheckSummary(
                check=CheckName.S0_CONCENTRATION, passed=concentrated, total=len(p_values),
                threshold="stddev(s0) <= 3*sqrt(mean) (sanity band)",
            ))

        return ExperimentSummary(
            experiment_id=config.name, n=n, d=d, lambda_=lam, c=c,
            checks=checks, p_values=per_p,
            all_passed=all(check.passed == check.total for check in checks),
        )

    @staticmethod
    def summary_lines(summary: ExperimentSummary) -> list[str]:
        lines = [
            f"experiment={summary.experiment_id} n={summary.n} d={summary.d} "
            f"lambda={summary.lambda_:.9g} c={summary.c:.9g}"
        ]
        for check in summary.checks:
            lines.append(
                f"check={check.check.value} passed={check.passed}/{check.total} "
                f"rate={check.rate:.4f} threshold=\"{check.threshold}\""
            )
        for block in summary.p_values:
            ratio = "na" if block.mean_iterations_per_s0 is None else f"{block.mean_iterations_per_s0:.4f}"
            lines.append(
                f"p={block.p} trials={block.trials} mean_s0={block.mean_s0:.4f} std_s0={block.std_s0:.4f} "
                f"expected_s0_bound={block.expected_s0_bound:.6g} k_over_s0={ratio} "
                f"giant_fraction={block.mean_giant_fraction:.4f} low_pd={int(block.flagged_low_pd)}"
            )
        lines.append(f"all_passed={int(summary.all_passed)}")
        return lines
