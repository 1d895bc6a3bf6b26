import logging

import pytest

from app.cli import main
from app.models.graph import build_graph
from app.services.io_service import GraphIOService
from app.services.spectral_service import SpectralService
from tests.strategies import PETERSEN_EDGES


@pytest.fixture(autouse=True)
def restore_root_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def petersen_file(tmp_path):
    path = tmp_path / "petersen.txt"
    GraphIOService().write_edge_list(build_graph(10, PETERSEN_EDGES), path)
    return path


def _run(*argv):
    return main(["--log-level", "WARNING", *[str(arg) for arg in argv]])


class TestGen:
    def test_complete(self, tmp_path, capsys):
        out = tmp_path / "k5.txt"
        assert _run("gen", "--family", "complete", "--n", 5, "--out", out) == 0
        assert out.read_text().startswith("5 10\n")
        assert "m=10" in capsys.readouterr().out

    def test_invalid_parameters(self, tmp_path, capsys):
        assert _run("gen", "--family", "random-regular", "--n", 5, "--d", 3, "--out", tmp_path / "x.txt") == 2
        assert "error:" in capsys.readouterr().err


class TestSpectrum:
    def test_petersen(self, petersen_file, tmp_path, capsys):
        csv = tmp_path / "spectrum.csv"
        assert _run("spectrum", "--graph", petersen_file, "--samples", 100, "--csv", csv) == 0
        out = capsys.readouterr().out
        assert "d=3 lambda=2" in out
        assert "violations=0" in out
        assert csv.read_text().splitlines()[0].startswith("d,lambda,c,")

    def test_density_check(self, petersen_file, capsys):
        assert _run("spectrum", "--graph", petersen_file, "--samples", 50, "--density-k", 1) == 0
        assert "density_k=1" in capsys.readouterr().out

    def test_missing_file(self, tmp_path, capsys):
        assert _run("spectrum", "--graph", tmp_path / "absent.txt") == 2
        assert "error:" in capsys.readouterr().err

    def test_malformed_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.txt"
        bad.write_text("3 2\n0 1\n")
        assert _run("spectrum", "--graph", bad) == 2


class TestPipeline:
    def test_percolate_peel_analyze(self, petersen_file, tmp_path, capsys):
        gp_file = tmp_path / "gp.txt"
        trace_file = tmp_path / "trace.txt"
        assert _run("percolate", "--graph", petersen_file, "--p", "1", "--seed", 3, "--out", gp_file) == 0
        assert gp_file.read_text() == petersen_file.read_text()

        assert _run("peel", "--graph", petersen_file, "--percolated", gp_file, "--p", "1",
                    "--out", trace_file) == 0
        assert trace_file.read_text().startswith("S0:")
        assert "violations=0" in capsys.readouterr().err

        code = _run("analyze", "--graph", petersen_file, "--percolated", gp_file, "--p", "1",
                    "--trace", trace_file, "--samples", 100)
        out = capsys.readouterr().out
        assert code == 0
        assert "certificate_pass=1" in out
        assert "condition=a-core-min-degree passed=1" in out

    def test_analyze_spectral_tolerances(self, petersen_file, tmp_path, mocker):
        trace_file = tmp_path / "trace.txt"
        assert _run("peel", "--graph", petersen_file, "--percolated", petersen_file, "--p", "1",
                    "--out", trace_file) == 0
        spy = mocker.spy(SpectralService, "second_eigenvalue_abs")
        base = ("analyze", "--graph", petersen_file, "--percolated", petersen_file, "--p", "1",
                "--trace", trace_file, "--samples", 50)

        assert _run(*base) == 0
        assert spy.call_args.kwargs == {"tol": 1e-6, "max_iter": 3000}

        assert _run(*base, "--tol", "1e-9", "--max-iter", 500) == 0
        assert spy.call_args.kwargs == {"tol": 1e-9, "max_iter": 500}

    def test_peel_to_stdout_random_order(self, petersen_file, capsys):
        assert _run("peel", "--graph", petersen_file, "--percolated", petersen_file, "--p", "1",
                    "--order", "random", "--seed", 2) == 0
        assert capsys.readouterr().out.startswith("S0:")

    def test_peel_needs_degree_for_irregular_host(self, tmp_path, capsys):
        path = tmp_path / "p4.txt"
        GraphIOService().write_edge_list(build_graph(4, [(0, 1), (1, 2), (2, 3)]), path)
        assert _run("peel", "--graph", path, "--percolated", path, "--p", "1") == 2
        assert "--d" in capsys.readouterr().err
        assert _run("peel", "--graph", path, "--percolated", path, "--p", "1", "--d", 2) == 0

    def test_size_mismatch(self, petersen_file, tmp_path):
        small = tmp_path / "k3.txt"
        GraphIOService().write_edge_list(build_graph(3, [(0, 1), (0, 2), (1, 2)]), small)
        assert _run("peel", "--graph", petersen_file, "--percolated", small, "--p", "1") == 2


class TestExpansion:
    def test_exact_cycle(self, tmp_path, capsys):
        path = tmp_path / "c8.txt"
        GraphIOService().write_edge_list(build_graph(8, [(i, (i + 1) % 8) for i in range(8)]), path)
        assert _run("expansion", "--graph", path) == 0
        out = capsys.readouterr().out
        assert "mode=exact rule=at-most-half value=1/2" in out
        assert "witness=0,1,2,3" in out

    def test_bounded(self, petersen_file, capsys):
        assert _run("expansion", "--graph", petersen_file, "--bounded", "--trials", 20) == 0
        assert "mode=bounded" in capsys.readouterr().out


class TestExperiment:
    def test_config_file(self, tmp_path, capsys):
        config = tmp_path / "k20.conf"
        config.write_text("name = k20\nfamily = complete\nn = 20\np = 1\ntrials = 2\nseed = 4\ncore_samples = 20\n")
        csv = tmp_path / "out" / "k20.csv"
        assert _run("experiment", "--config", config, "--out", csv) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("experiment=k20 n=20 d=19")
        assert lines[-1] == "all_passed=1"
        assert len(csv.read_text().splitlines()) == 3

    def test_unknown_preset(self, capsys):
        assert _run("experiment", "--preset", "hypercube") == 2
        assert "unknown preset" in capsys.readouterr().err

    def test_requires_a_source(self):
        with pytest.raises(SystemExit):
            _run("experiment")
