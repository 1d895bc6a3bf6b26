#!/usr/bin/env python3
"""
Script simples de seed dos dados de exemplo
Execute com: python seed.py [diretório]
"""

import sys
from pathlib import Path

# Adicionar o diretório raiz do projeto ao path do Python
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

from app.core.logging import configure_logging
from app.core.rng import STREAM_GENERATION, derive_seed
from app.schemas.generator import GeneratorSpec, GraphFamily
from app.services.experiment_service import PRESETS
from app.services.generator_service import GeneratorService
from app.services.io_service import GraphIOService


# Grafos pequenos usados nos exemplos do README
EXAMPLE_GRAPHS = {
    "k5": GeneratorSpec(family=GraphFamily.COMPLETE, n=5),
    "k50": GeneratorSpec(family=GraphFamily.COMPLETE, n=50),
    "c8": GeneratorSpec(family=GraphFamily.CYCLE, n=8),
    "c1000": GeneratorSpec(family=GraphFamily.CYCLE, n=1000),
    "paley13": GeneratorSpec(family=GraphFamily.PALEY, q=13),
    "rr10-3": GeneratorSpec(family=GraphFamily.RANDOM_REGULAR, n=10, d=3, seed=7),
    "rr2000-64": GeneratorSpec(family=GraphFamily.RANDOM_REGULAR, n=2000, d=64, seed=derive_seed(3, STREAM_GENERATION)),
}


def seed_presets(target: Path) -> None:
    """Escreve um arquivo de config por preset"""
    configs = target / "configs"
    configs.mkdir(parents=True, exist_ok=True)
    for name, text in PRESETS.items():
        path = configs / f"{name}.conf"
        path.write_text(text)
        print(f"Preset criado: {path}")


def seed_graphs(target: Path) -> None:
    """Gera os grafos de exemplo em formato de lista de arestas"""
    graphs = target / "graphs"
    graphs.mkdir(parents=True, exist_ok=True)
    generator = GeneratorService()
    io = GraphIOService()
    for name, spec in EXAMPLE_GRAPHS.items():
        path = graphs / f"{name}.edges"
        if path.exists():
            print(f"Grafo já existe: {path}")
            continue
        graph = generator.generate(spec)
        io.write_edge_list(graph, path)
        print(f"Grafo criado: {path} (n={graph.n}, m={graph.m})")


def main() -> None:
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else project_root / "data"
    configure_logging("WARNING")
    print("Iniciando seed dos dados de exemplo...")
    seed_presets(target)
    seed_graphs(target)
    print("Seed concluído!")


if __name__ == "__main__":
    main()
