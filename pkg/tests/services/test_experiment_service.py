import math

import pytest

from app.core.errors import (
    MalformedConfigValueError, MissingConfigKeyError, PercolationError,
    UnknownConfigKeyError, UnknownPresetError
)
from app.core.probability import round_probability
from app.core.rng import derive_seed
from app.schemas.experiment import RECORD_COLUMNS, CheckName
from app.schemas.generator import GraphFamily
from app.services.experiment_service import ExperimentService
from app.services.structure_service import StructureService


MINIMAL = "family = random-regular\nn = 100\nd = 4\ntrials = 3\nseed = 7\n"

COMPLETE_FULL_RETENTION = (
    "name = k50\n"
    "family = complete\n"
    "n = 50\n"
    "p = 1\n"
    "trials = 3\n"
    "seed = 11\n"
    "core_samples = 50\n"
)


@pytest.fixture
def experiments(settings):
    return ExperimentService(settings)


class TestParseConfig:
    def test_minimal_defaults(self):
        config = ExperimentService.parse_config(MINIMAL)
        assert config.name == "experiment"
        assert config.generator.family is GraphFamily.RANDOM_REGULAR
        assert (config.generator.n, config.generator.d, config.generator.seed) == (100, 4, 7)
        assert config.p_values == ["auto"]
        assert config.trials == 3
        assert config.base_seed == 7
        assert config.checks == list(CheckName)
        assert config.core_samples == 10_000
        assert config.spectral_tol == 1e-6
        assert config.spectral_max_iter == 3000
        assert config.output is None

    def test_comments_and_lists(self):
        text = (
            "# sweep\n"
            "\n"
            "family = cycle  # control\n"
            "n = 10\n"
            "p = 0.5, 0.75\n"
            "checks = out-size, balance\n"
            "trials = 2\n"
            "seed = 0x10\n"
            "output = results/c10.csv\n"
        )
        config = ExperimentService.parse_config(text)
        assert config.p_values == ["0.5", "0.75"]
        assert config.checks == [CheckName.OUT_SIZE, CheckName.BALANCE]
        assert config.base_seed == 16
        assert config.output == "results/c10.csv"

    def test_unknown_key_reports_line(self):
        with pytest.raises(UnknownConfigKeyError) as exc:
            ExperimentService.parse_config("family = cycle\nn = 10\ncolour = red\n")
        assert exc.value.line == 3

    def test_zero_trials(self):
        with pytest.raises(MalformedConfigValueError) as exc:
            ExperimentService.parse_config("family = cycle\nn = 10\ntrials = 0\nseed = 1\n")
        assert exc.value.line == 3
        assert "line 3" in str(exc.value)

    def test_missing_required_key_reported_at_end(self):
        with pytest.raises(MissingConfigKeyError) as exc:
            ExperimentService.parse_config("family = cycle\nn = 10\ntrials = 2\n")
        assert exc.value.line == 3
        assert "seed" in str(exc.value)

    @pytest.mark.parametrize("line", [
        "p = 1.5",
        "p = 0.5, nope",
        "n = ten",
        "family = hypercube",
        "checks = out-size, everything",
        "core_samples = 0",
        "tol = -1",
        "just some words",
        "n =",
    ])
    def test_malformed_values(self, line):
        text = f"trials = 2\nseed = 1\n{line}\n"
        if not line.startswith("family"):
            text = "family = cycle\n" + text
        with pytest.raises(MalformedConfigValueError):
            ExperimentService.parse_config(text)

    def test_duplicate_key(self):
        with pytest.raises(MalformedConfigValueError) as exc:
            ExperimentService.parse_config("family = cycle\nn = 10\nn = 12\ntrials = 1\nseed = 1\n")
        assert exc.value.line == 3


class TestPresets:
    def test_kn_boundary(self, experiments):
        config = experiments.preset("kn-boundary")
        assert config.generator.family is GraphFamily.COMPLETE
        assert config.generator.n == 200
        assert config.p_values == ["0.00100503", "0.00502513", "0.02512563", "0.12562814"]
        assert (config.trials, config.base_seed, config.core_samples) == (10, 1, 1000)

    def test_random_regular_main(self, experiments):
        config = experiments.preset("random-regular-main")
        assert (config.generator.n, config.generator.d) == (20000, 256)
        assert config.p_values == ["auto"]
        assert config.core_samples == 10_000
        assert config.spectral_tol == 1e-4
        assert config.spectral_max_iter == 2000

    def test_cycle_negative_control(self, experiments):
        config = experiments.preset("cycle-negative-control")
        assert config.generator.family is GraphFamily.CYCLE
        assert config.p_values == ["0.6"]

    def test_unknown_preset(self, experiments):
        with pytest.raises(UnknownPresetError):
            experiments.preset("hypercube")

    def test_overrides(self, experiments):
        config = experiments.apply_overrides(experiments.preset("kn-boundary"), trials=2, seed=5, output="x.csv")
        assert config.trials == 2
        assert config.base_seed == 5
        assert config.generator.seed == 5
        assert config.output == "x.csv"

    def test_override_rejects_zero_trials(self, experiments):
        with pytest.raises(MalformedConfigValueError):
            experiments.apply_overrides(experiments.preset("kn-boundary"), trials=0)


class TestResolveP:
    def test_auto(self, experiments):
        config = ExperimentService.parse_config(MINIMAL)
        assert experiments.resolve_p_values(config, c=2.0, d=256) == ["0.6250"]

    def test_auto_clamped_to_one(self, experiments):
        config = ExperimentService.parse_config(MINIMAL)
        assert experiments.resolve_p_values(config, c=2.0, d=16) == ["1.0000"]

    def test_duplicates_dropped(self, experiments):
        config = ExperimentService.parse_config(MINIMAL.replace("trials", "p = 0.5, 0.5, 0.25\ntrials"))
        assert experiments.resolve_p_values(config, c=1.0, d=4) == ["0.5", "0.25"]


class TestRunExperiment:
    def test_full_retention_on_complete_graph(self, experiments):
        result = experiments.run_experiment(ExperimentService.parse_config(COMPLETE_FULL_RETENTION))
        assert [r.trial for r in result.records] == [0, 1, 2]
        assert [r.seed for r in result.records] == [derive_seed(11, t) for t in range(3)]
        for record in result.records:
            assert record.status == "ok"
            assert record.out_size == 0
            assert record.survivor_count == 50
            assert record.giant_size == 50
            assert record.certificate_pass == 1
            assert record.lambda_ == pytest.approx(1.0)
        summary = result.summary
        assert summary.all_passed
        assert {check.check for check in summary.checks} == set(CheckName)
        assert summary.p_values[0].mean_s0 == 0.0
        assert summary.p_values[0].mean_iterations_per_s0 is None
        assert ExperimentService.summary_lines(summary)[-1] == "all_passed=1"

    def test_auto_p_resolution(self, experiments):
        config = ExperimentService.parse_config(COMPLETE_FULL_RETENTION.replace("p = 1", "p = auto"))
        result = experiments.run_experiment(config)
        expected = round_probability(5 * result.summary.c / 7, 4)
        assert expected == "0.1020"
        assert {record.p for record in result.records} == {expected}

    def test_rows_ordered_by_p_then_trial(self, experiments):
        config = ExperimentService.parse_config(COMPLETE_FULL_RETENTION.replace("p = 1", "p = 0.5, 1"))
        config = experiments.apply_overrides(config, trials=2)
        result = experiments.run_experiment(config)
        assert [(r.p, r.trial) for r in result.records] == [("0.5", 0), ("0.5", 1), ("1", 0), ("1", 1)]
        assert [block.p for block in result.summary.p_values] == ["0.5", "1"]

    def test_deterministic_csv(self, experiments, tmp_path):
        config = ExperimentService.parse_config(COMPLETE_FULL_RETENTION.replace("p = 1", "p = 0.3"))
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        experiments.run_experiment(experiments.apply_overrides(config, output=str(first)))
        experiments.run_experiment(experiments.apply_overrides(config, output=str(second)))
        assert first.read_bytes() == second.read_bytes()
        lines = first.read_text().split("\n")
        assert lines[0] == ",".join(RECORD_COLUMNS)
        assert len([line for line in lines if line]) == 4
        assert b"\r\n" not in first.read_bytes()

    def test_parallel_matches_serial(self, experiments, tmp_path):
        config = ExperimentService.parse_config(COMPLETE_FULL_RETENTION.replace("p = 1", "p = 0.4"))
        config = experiments.apply_overrides(config, trials=4)
        serial = experiments.run_experiment(config, workers=1)
        parallel = experiments.run_experiment(config, workers=2)
        assert serial.records == parallel.records
        experiments.write_csv(serial.records, str(tmp_path / "serial.csv"))
        experiments.write_csv(parallel.records, str(tmp_path / "parallel.csv"))
        assert (tmp_path / "serial.csv").read_bytes() == (tmp_path / "parallel.csv").read_bytes()

    def test_low_pd_flagged(self, experiments):
        config = ExperimentService.parse_config(
            "family = cycle\nn = 30\np = 0.5\ntrials = 2\nseed = 3\nchecks = out-size\n"
        )
        result = experiments.run_experiment(config)
        assert {record.status for record in result.records} == {"low-pd"}
        assert result.summary.p_values[0].flagged_low_pd

    def test_failing_trial_becomes_error_row(self, experiments, mocker):
        config = ExperimentService.parse_config(COMPLETE_FULL_RETENTION)
        mocker.patch("app.services.experiment_service.PercolationService.peel", side_effect=PercolationError("boom"))
        result = experiments.run_experiment(config, workers=1)
        assert {record.status for record in result.records} == {"error:PercolationError"}
        assert all(record.s0_size is None for record in result.records)
        assert not result.summary.all_passed
        frame = experiments.records_frame(result.records)
        assert frame["s0_size"].isna().all()

    def test_subset_of_checks(self, experiments):
        config = ExperimentService.parse_config(COMPLETE_FULL_RETENTION + "checks = out-size, balance\n")
        result = experiments.run_experiment(config)
        assert [check.check for check in result.summary.checks] == [CheckName.OUT_SIZE, CheckName.BALANCE]
        assert all(record.certificate_pass is None for record in result.records)
        assert all(record.all_out_balanced == 1 for record in result.records)


@pytest.mark.slow
class TestPresetRuns:
    def test_cycle_negative_control_fails(self, experiments):
        result = experiments.run_experiment(experiments.preset("cycle-negative-control"))
        certificate = next(c for c in result.summary.checks if c.check is CheckName.CERTIFICATE)
        assert certificate.passed <= 2
        assert not result.summary.all_passed

    def test_random_regular_main(self, experiments, tmp_path, mocker, golden):
        certificates = []
        original = StructureService.giant_expansion_certificate

        def keep(self, *args, **kwargs):
            report = original(self, *args, **kwargs)
            certificates.append(report)
            return report

        mocker.patch.object(StructureService, "giant_expansion_certificate", autospec=True, side_effect=keep)
        config = experiments.preset("random-regular-main")
        serial_csv, parallel_csv = tmp_path / "serial.csv", tmp_path / "parallel.csv"
        result = experiments.run_experiment(experiments.apply_overrides(config, output=str(serial_csv)), workers=1)

        summary = result.summary
        assert 1.7 <= summary.c <= 2.3
        out_bound = math.exp(-summary.c * math.sqrt(summary.d) / 12) * summary.n
        assert len(result.records) == 10
        for record in result.records:
            assert record.status == "ok"
            assert record.out_size <= out_bound
            assert record.max_out_comp <= record.out_comp_bound
            assert record.all_out_balanced == 1
            assert record.min_sampled_core_expansion >= record.core_bound_pd13 * (1 - 1e-12)
            assert record.certificate_pass == 1
        assert len(certificates) == 10
        for report in certificates:
            assert report.giant_contains_survivors
            assert report.condition("f-giant-contains-survivors").passed
        assert summary.all_passed

        mocker.stopall()
        experiments.run_experiment(experiments.apply_overrides(config, output=str(parallel_csv)), workers=2)
        assert serial_csv.read_bytes() == parallel_csv.read_bytes()
        golden.check("random_regular_main_seed1.csv", serial_csv.read_text())
