from unittest.mock import patch

import networkx as nx
import numpy as np
import pytest

from app.core.config import Settings
from app.core.errors import InvalidGeneratorParameterError, RestartBudgetExhaustedError
from app.core.rng import Xoshiro256pp
from app.schemas.generator import GeneratorSpec, GraphFamily
from app.services.generator_service import GeneratorService
from app.services.io_service import GraphIOService


def _is_simple_regular(graph, d):
    us, vs = graph.edges()
    return (
        graph.regular_degree() == d
        and bool(np.all(us != vs))
        and len(set(zip(us.tolist(), vs.tolist()))) == graph.m
    )


class TestDeterministicFamilies:
    def test_complete(self, generator):
        k2 = generator.complete_graph(2)
        assert k2.edge_list() == [(0, 1)]
        k5 = generator.complete_graph(5)
        assert (k5.m, k5.regular_degree()) == (10, 4)

    def test_complete_too_small(self, generator):
        with pytest.raises(InvalidGeneratorParameterError):
            generator.complete_graph(1)

    def test_cycle(self, generator):
        c3 = generator.cycle_graph(3)
        assert c3 == generator.complete_graph(3)
        c6 = generator.cycle_graph(6)
        assert c6.edge_list() == [(0, 1), (0, 5), (1, 2), (2, 3), (3, 4), (4, 5)]

    def test_cycle_too_small(self, generator):
        with pytest.raises(InvalidGeneratorParameterError):
            generator.cycle_graph(2)

    def test_paley_five_is_cycle(self, generator):
        assert generator.paley_graph(5) == generator.cycle_graph(5)

    def test_paley_thirteen(self, generator):
        g = generator.paley_graph(13)
        assert g.m == 39
        assert g.regular_degree() == 6

    def test_paley_matches_networkx_up_to_symmetrisation(self, generator):
        g = generator.paley_graph(17)
        reference = nx.paley_graph(17).to_undirected()
        assert g.m == reference.number_of_edges()
        assert set(g.edge_list()) == {(min(u, v), max(u, v)) for u, v in reference.edges()}

    @pytest.mark.parametrize("q", [12, 7, 1, 9])
    def test_paley_rejects_bad_q(self, generator, q):
        with pytest.raises(InvalidGeneratorParameterError):
            generator.paley_graph(q)


class TestRandomRegular:
    def test_k4_is_only_cubic_graph_on_four_vertices(self, generator):
        assert generator.random_regular(4, 3, seed=123) == generator.complete_graph(4)

    @pytest.mark.parametrize("n,d,seed", [(10, 3, 7), (50, 4, 1), (200, 16, 3), (64, 9, 5)])
    def test_simple_and_regular(self, generator, n, d, seed):
        graph = generator.random_regular(n, d, seed)
        assert graph.n == n
        assert _is_simple_regular(graph, d)

    def test_deterministic(self, generator):
        assert generator.random_regular(100, 6, 42) == generator.random_regular(100, 6, 42)

    def test_seed_changes_graph(self, generator):
        assert generator.random_regular(100, 6, 1) != generator.random_regular(100, 6, 2)

    @pytest.mark.parametrize("n,d", [(5, 3), (4, 4), (10, 2), (3, 5)])
    def test_invalid_parameters(self, generator, n, d):
        with pytest.raises(InvalidGeneratorParameterError):
            generator.random_regular(n, d, 0)

    def test_matches_recorded_graph(self, generator, golden):
        expected = GraphIOService().read_edge_list(golden.path("rr_10_3_seed7.edges"))
        assert generator.random_regular(10, 3, 7) == expected

    @pytest.mark.parametrize("d,full", [(3, True), (4, True), (5, True), (6, False), (16, False)])
    def test_pairing_mode_by_degree(self, generator, d, full):
        assert generator.uses_full_restart(d) is full

    def test_full_restart_threshold_is_configurable(self):
        service = GeneratorService(Settings(PERC_LAB_EXACT_PAIRING_MAX_RESTARTS=1e4))
        assert service.uses_full_restart(6)
        assert not service.uses_full_restart(7)

    @pytest.mark.parametrize("arranged,expected", [
        ([0, 0, 1, 1, 2, 2, 3, 3], None),
        ([0, 1, 0, 1, 2, 3, 2, 3], None),
        ([0, 1, 1, 2, 2, 3, 3, 0], [1, 3, 6, 11]),
    ])
    def test_single_pairing_rejects_loops_and_repeats(self, mocker, arranged, expected):
        rng = Xoshiro256pp(1)
        mocker.patch.object(rng, "shuffle", side_effect=lambda order: order.__setitem__(slice(None), arranged))
        keys = GeneratorService._pair_once(4, 2, rng)
        assert (None if keys is None else keys.tolist()) == expected

    def test_full_restart_draws_whole_attempts(self, generator, mocker):
        spy = mocker.spy(GeneratorService, "_pair_once")
        repair = mocker.spy(GeneratorService, "_repair_pairing")
        graph = generator.random_regular(10, 3, 7)
        assert _is_simple_regular(graph, 3)
        assert spy.call_count == 10
        assert repair.call_count == 0

    def test_stub_repair_for_large_degree(self, generator, mocker):
        repair = mocker.spy(GeneratorService, "_repair_pairing")
        once = mocker.spy(GeneratorService, "_pair_once")
        graph = generator.random_regular(64, 9, 5)
        assert _is_simple_regular(graph, 9)
        assert repair.call_count >= 1
        assert once.call_count == 0

    def test_restart_budget(self):
        service = GeneratorService(Settings(PERC_LAB_RESTART_CAP=3))
        with patch.object(GeneratorService, "_try_pairing", return_value=None) as pairing:
            with pytest.raises(RestartBudgetExhaustedError) as exc:
                service.random_regular(10, 3, 0)
        assert exc.value.attempts == 3
        assert pairing.call_count == 3


class TestGenerate:
    def test_dispatch(self, generator):
        assert generator.generate(GeneratorSpec(family=GraphFamily.COMPLETE, n=6)).m == 15
        assert generator.generate(GeneratorSpec(family=GraphFamily.CYCLE, n=6)).m == 6
        assert generator.generate(GeneratorSpec(family=GraphFamily.PALEY, q=13)).m == 39
        assert generator.generate(GeneratorSpec(family=GraphFamily.PALEY, n=13)).m == 39
        rr = generator.generate(GeneratorSpec(family=GraphFamily.RANDOM_REGULAR, n=20, d=3, seed=9))
        assert rr == generator.random_regular(20, 3, 9)

    def test_missing_parameters(self, generator):
        with pytest.raises(InvalidGeneratorParameterError):
            generator.generate(GeneratorSpec(family=GraphFamily.CYCLE))
        with pytest.raises(InvalidGeneratorParameterError):
            generator.generate(GeneratorSpec(family=GraphFamily.RANDOM_REGULAR, n=20))
        with pytest.raises(InvalidGeneratorParameterError):
            generator.generate(GeneratorSpec(family=GraphFamily.PALEY))
