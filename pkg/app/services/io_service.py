"""Text formats shared by the CLI: edge lists and peel traces."""
import logging
from pathlib import Path
from typing import Union

import numpy as np

from app.core.errors import EdgeListFormatError, TraceFormatError
from app.models.graph import Graph, build_graph
from app.schemas.percolation import PercolationParams, PruneTrace, RemovalEntry

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class GraphIOService:
    @staticmethod
    def format_edge_list(graph: Graph) -> str:
        us, vs = graph.edges()
        lines = [f"{graph.n} {graph.m}"]
        lines.extend(f"{u} {v}" for u, v in zip(us.tolist(), vs.tolist()))
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse_edge_list(text: str) -> Graph:
        lines = text.splitlines()
        if not lines:
            raise EdgeListFormatError("edge list is empty")
        header = lines[0].split()
        if len(header) != 2 or not all(tok.isdigit() for tok in header):
            raise EdgeListFormatError(f"line 1: expected 'n m', got {lines[0]!r}")
        n, m = int(header[0]), int(header[1])
        body = [line for line in lines[1:] if line.strip()]
        if len(body) != m:
            raise EdgeListFormatError(f"header declares {m} edges but {len(body)} follow")
        edges = []
        for number, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 2 or not all(tok.lstrip("-").isdigit() for tok in parts):
                raise EdgeListFormatError(f"line {number}: expected 'u v', got {line!r}")
            edges.append((int(parts[0]), int(parts[1])))
        return build_graph(n, edges)

    def read_edge_list(self, path: PathLike) -> Graph:
        graph = self.parse_edge_list(Path(path).read_text())
        logger.debug("edge_list_read path=%s n=%d m=%d", path, graph.n, graph.m)
        return graph

    def write_edge_list(self, graph: Graph, path: PathLike) -> None:
        Path(path).write_text(self.format_edge_list(graph), newline="\n")
        logger.info("edge_list_written path=%s n=%d m=%d", path, graph.n, graph.m)

    @staticmethod
    def format_trace(trace: PruneTrace) -> str:
        lines = ["S0:" + "".join(f" {v}" for v in trace.s0)]
        lines.extend(
            f"REM {e.iteration} {e.vertex} {e.degree} {e.edges_into_removed}"
            for e in trace.removals
        )
        lines.append("SURVIVORS:" + "".join(f" {v}" for v in trace.survivors))
        return "\n".join(lines) + "\n"

    @staticmethod
    def parse_trace(text: str, n: int, params: PercolationParams) -> PruneTrace:
        """Inverse of format_trace; n and params are not part of the file"""
        lines = [line for line in text.splitlines() if line.strip()]
        if len(lines) < 2 or not lines[0].startswith("S0:") or not lines[-1].startswith("SURVIVORS:"):
            raise TraceFormatError("trace must start with 'S0:' and end with 'SURVIVORS:'")

        def ids(payload: str, number: int) -> list[int]:
            try:
                return [int(tok) for tok in payload.split()]
            except ValueError:
                raise TraceFormatError(f"line {number}: vertex ids must be integers")

        s0 = ids(lines[0][len("S0:"):], 1)
        survivors = ids(lines[-1][len("SURVIVORS:"):], len(lines))
        removals = []
        for number, line in enumerate(lines[1:-1], start=2):
            parts = line.split()
            if len(parts) != 5 or parts[0] != "REM":
                raise TraceFormatError(f"line {number}: expected 'REM <iter> <vertex> <deg> <edges>'")
            try:
                iteration, vertex, degree, edges_in = (int(tok) for tok in parts[1:])
            except ValueError:
                raise TraceFormatError(f"line {number}: REM fields must be integers")
            if iteration < 1:
                raise TraceFormatError(f"line {number}: iteration index must be >= 1")
            removals.append(RemovalEntry(
                vertex=vertex, iteration=iteration, degree=degree, edges_into_removed=edges_in
            ))
        if any(v < 0 or v >= n for v in survivors):
            raise TraceFormatError(f"survivor id out of range for n={n}")
        alive = np.ones(n, dtype=bool)
        alive[np.asarray(survivors, dtype=np.int64)] = False
        return PruneTrace(
            n=n,
            s0=s0,
            removals=removals,
            survivors=survivors,
            out=np.flatnonzero(alive).tolist(),
            params=params,
        )

    def read_trace(self, path: PathLike, n: int, params: PercolationParams) -> PruneTrace:
        return self.parse_trace(Path(path).read_text(), n, params)

    def write_trace(self, trace: PruneTrace, path: PathLike) -> None:
        Path(path).write_text(self.format_trace(trace), newline="\n")
        logger.info("trace_written path=%s s0=%d removals=%d", path, len(trace.s0), len(trace.removals))
