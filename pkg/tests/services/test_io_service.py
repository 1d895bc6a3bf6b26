import pytest

from app.core.errors import EdgeListFormatError, SelfLoopError, TraceFormatError
from app.schemas.percolation import PercolationParams
from app.services.io_service import GraphIOService
from app.services.percolation_service import PercolationService


class TestEdgeListFormat:
    def test_format_triangle(self, generator):
        text = GraphIOService.format_edge_list(generator.complete_graph(3))
        assert text == "3 3\n0 1\n0 2\n1 2\n"

    def test_parse_reverses_format(self, petersen):
        text = GraphIOService.format_edge_list(petersen)
        assert GraphIOService.parse_edge_list(text) == petersen

    def test_parse_tolerates_blank_lines(self):
        graph = GraphIOService.parse_edge_list("3 2\n0 1\n\n1 2\n")
        assert graph.edge_list() == [(0, 1), (1, 2)]

    @pytest.mark.parametrize("text", ["", "3\n", "x y\n", "3 2\n0 1\n", "3 1\n0 one\n"])
    def test_malformed(self, text):
        with pytest.raises(EdgeListFormatError):
            GraphIOService.parse_edge_list(text)

    def test_error_names_line(self):
        with pytest.raises(EdgeListFormatError, match="line 3"):
            GraphIOService.parse_edge_list("3 2\n0 1\n1 2 3\n")

    def test_invalid_graph_surfaces_graph_error(self):
        with pytest.raises(SelfLoopError):
            GraphIOService.parse_edge_list("2 1\n1 1\n")

    def test_file_round_trip(self, tmp_path, k5):
        io = GraphIOService()
        path = tmp_path / "k5.edges"
        io.write_edge_list(k5, path)
        assert path.read_bytes().endswith(b"3 4\n")
        assert io.read_edge_list(path) == k5


class TestTraceFormat:
    def test_format_path_trace(self, path4):
        trace = PercolationService().peel(path4, "1", 2)
        text = GraphIOService.format_trace(trace)
        assert text == "S0: 0 3\nREM 1 1 1 1\nREM 2 2 0 2\nSURVIVORS:\n"

    def test_parse_restores_trace(self, petersen):
        percolation = PercolationService()
        gp = percolation.percolate(petersen, "0.7", 11)
        trace = percolation.peel(gp, "0.7", 3, seed=11)
        parsed = GraphIOService.parse_trace(GraphIOService.format_trace(trace), gp.n, trace.params)
        assert parsed.s0 == trace.s0
        assert parsed.removals == trace.removals
        assert parsed.survivors == trace.survivors
        assert parsed.out == trace.out
        assert percolation.verify_trace(gp, parsed) == []

    @pytest.mark.parametrize("text", [
        "REM 1 0 0 0\nSURVIVORS:\n",
        "S0:\nREM 1 0\nSURVIVORS:\n",
        "S0:\nREM 0 0 0 0\nSURVIVORS:\n",
        "S0: a\nSURVIVORS:\n",
        "S0:\nSURVIVORS: 9\n",
    ])
    def test_malformed(self, text):
        params = PercolationParams(p="0.5", d=3)
        with pytest.raises(TraceFormatError):
            GraphIOService.parse_trace(text, 4, params)

    def test_file_round_trip(self, tmp_path, path4):
        io = GraphIOService()
        trace = PercolationService().peel(path4, "1", 2)
        path = tmp_path / "p4.trace"
        io.write_trace(trace, path)
        assert io.read_trace(path, 4, trace.params).removals == trace.removals
