import heapq
import logging
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from app.core.errors import PercolationError
from app.core.probability import ScaledThresholds, format_probability, parse_probability
from app.core.rng import Xoshiro256pp
from app.models.graph import Graph, VertexSet
from app.schemas.percolation import PercolationParams, PruneTrace, RemovalEntry, TraceViolation

logger = logging.getLogger(__name__)

Probability = Union[str, Fraction]


def as_fraction(p: Probability) -> Fraction:
    return p if isinstance(p, Fraction) else parse_probability(p)


def as_decimal(p: Probability) -> str:
    return format_probability(p, places=18) if isinstance(p, Fraction) else p.strip()


class PercolationService:
    """Edge percolation and the two-phase low-degree peeling"""

    def percolate(self, graph: Graph, p: Probability, seed: int) -> Graph:
        """Keep each edge iff its 64-bit draw is below floor(p * 2^64); edges in ascending order"""
        fraction = as_fraction(p)
        if not 0 <= fraction <= 1:
            raise PercolationError(f"p must lie in [0, 1], got {fraction}")
        if fraction == 1:
            return graph
        us, vs = graph.edges()
        cutoff = np.uint64((fraction.numerator << 64) // fraction.denominator)
        keep = Xoshiro256pp(seed).fill(us.size) < cutoff
        return Graph.from_edge_arrays(graph.n, us[keep], vs[keep])

    def compute_s0(self, gp: Graph, p: Probability, d: int) -> VertexSet:
        thresholds = ScaledThresholds(as_fraction(p), d)
        degrees = gp.degrees
        outside = (degrees < thresholds.min_window_degree) | (degrees > thresholds.max_window_degree)
        return VertexSet.from_mask(outside)

    def _params(self, p: Probability, d: int, seed: int, c: Optional[float]) -> PercolationParams:
        return PercolationParams(p=as_decimal(p), seed=seed, d=d, c=c)

    @staticmethod
    def _require_positive(fraction: Fraction) -> None:
        if fraction <= 0:
            raise PercolationError("p must be positive for peeling")

    @staticmethod
    def _alive_degrees(gp: Graph, alive: np.ndarray) -> np.ndarray:
        inside = alive[gp.indices]
        return np.bincount(gp.rows[inside], minlength=gp.n)

    def _build_trace(
        self, gp: Graph, s0: VertexSet, entries: list[RemovalEntry], alive: np.ndarray,
        params: PercolationParams,
    ) -> PruneTrace:
        trace = PruneTrace(
            n=gp.n,
            s0=s0.members.tolist(),
            removals=entries,
            survivors=np.flatnonzero(alive).tolist(),
            out=np.flatnonzero(~alive).tolist(),
            params=params,
        )
        logger.info(
            "peel_done n=%d p=%s s0=%d removed=%d survivors=%d",
            gp.n, params.p, len(trace.s0), len(entries), len(trace.survivors),
        )
        return trace

    def peel(
        self, gp: Graph, p: Probability, d: int, seed: int = 0, c: Optional[float] = None
    ) -> PruneTrace:
        """Drop S_0, then remove the lowest-id vertex of degree < 3pd/5 one at a time"""
        fraction = as_fraction(p)
        self._require_positive(fraction)
        thresholds = ScaledThresholds(fraction, d)
        cutoff = thresholds.min_core_degree

        s0 = self.compute_s0(gp, fraction, d)
        alive = ~s0.mask
        current = self._alive_degrees(gp, alive)
        queued = alive & (current < cutoff)
        heap = np.flatnonzero(queued).tolist()
        heapq.heapify(heap)
        full_degree = gp.degrees

        entries = []
        while heap:
            v = heapq.heappop(heap)
            entries.append(RemovalEntry(
                vertex=v,
                iteration=len(entries) + 1,
                degree=int(current[v]),
                edges_into_removed=int(full_degree[v] - current[v]),
            ))
            alive[v] = False
            neighbours = gp.neighbors(v)
            neighbours = neighbours[alive[neighbours]]
            current[neighbours] -= 1
            fresh = neighbours[(current[neighbours] < cutoff) & ~queued[neighbours]]
            queued[fresh] = True
            for w in fresh.tolist():
                heapq.heappush(heap, w)

        return self._build_trace(gp, s0, entries, alive, self._params(p, d, seed, c))

    def peel_random_order(
        self, gp: Graph, p: Probability, d: int, seed: int, c: Optional[float] = None
    ) -> PruneTrace:
        """Same process, choosing uniformly among eligible vertices at each step"""
        fraction = as_fraction(p)
        self._require_positive(fraction)
        cutoff = ScaledThresholds(fraction, d).min_core_degree
        rng = Xoshiro256pp(seed)

        s0 = self.compute_s0(gp, fraction, d)
        alive = ~s0.mask
        current = self._alive_degrees(gp, alive)
        queued = alive & (current < cutoff)
        eligible = np.flatnonzero(queued).tolist()
        full_degree = gp.degrees

        entries = []
        while eligible:
            i = rng.bounded(len(eligible))
            eligible[i], eligible[-1] = eligible[-1], eligible[i]
            v = eligible.pop()
            entries.append(RemovalEntry(
                vertex=v,
                iteration=len(entries) + 1,
                degree=int(current[v]),
                edges_into_removed=int(full_degree[v] - current[v]),
            ))
            alive[v] = False
            neighbours = gp.neighbors(v)
            neighbours = neighbours[alive[neighbours]]
            current[neighbours] -= 1
            fresh = neighbours[(current[neighbours] < cutoff) & ~queued[neighbours]]
            queued[fresh] = True
            eligible.extend(fresh.tolist())

        return self._build_trace(gp, s0, entries, alive, self._params(p, d, seed, c))

    def peel_batch(self, gp: Graph, p: Probability, d: int) -> VertexSet:
        """Survivors of simultaneous rounds: every low-degree vertex leaves at once"""
        fraction = as_fraction(p)
        self._require_positive(fraction)
        cutoff = ScaledThresholds(fraction, d).min_core_degree
        alive = ~self.compute_s0(gp, fraction, d).mask
        while True:
            drop = alive & (self._alive_degrees(gp, alive) < cutoff)
            if not drop.any():
                return VertexSet.from_mask(alive)
            alive &= ~drop

    def verify_trace(self, gp: Graph, trace: PruneTrace) -> list[TraceViolation]:
        """Replay a trace against gp; every broken invariant becomes one violation"""
        violations: list[TraceViolation] = []

        def flag(code: str, message: str, vertex: Optional[int] = None):
            violations.append(TraceViolation(code=code, vertex=vertex, message=message))

        n = gp.n
        fraction = trace.params.fraction
        d = trace.params.d
        if fraction <= 0:
            flag("non-positive-p", "p must be positive for peeling")
            return violations
        thresholds = ScaledThresholds(fraction, d)
        if trace.n != n:
            flag("size-mismatch", f"trace is for n={trace.n}, graph has n={n}")
            return violations
        for name, ids in (("s0", trace.s0), ("survivors", trace.survivors), ("out", trace.out)):
            if any(v < 0 or v >= n for v in ids):
                flag("out-of-range", f"{name} holds a vertex outside 0..{n - 1}")
                return violations
        if any(e.vertex < 0 or e.vertex >= n for e in trace.removals):
            flag("out-of-range", f"a removal names a vertex outside 0..{n - 1}")
            return violations

        expected_s0 = self.compute_s0(gp, fraction, d)
        recorded_s0 = VertexSet(n, trace.s0)
        for v in expected_s0.difference(recorded_s0):
            flag("s0-missing", f"vertex {v} has degree outside [4pd/5, 6pd/5] but is not in S0", v)
        for v in recorded_s0.difference(expected_s0):
            flag("s0-extra", f"vertex {v} is in S0 but its degree lies inside the window", v)

        survivors = VertexSet(n, trace.survivors)
        out = VertexSet(n, trace.out)
        removed = [e.vertex for e in trace.removals]
        if out != survivors.complement():
            flag("out-mismatch", "out is not the complement of the survivors")
        if len(set(removed)) != len(removed):
            flag("duplicate-removal", "a vertex is removed more than once")
        removed_set = VertexSet(n, removed)
        if recorded_s0.union(removed_set) != out or len(recorded_s0.intersection(removed_set)):
            flag("out-accounting", "out must be S0 plus the removed vertices, disjointly")

        alive = ~recorded_s0.mask
        current = self._alive_degrees(gp, alive)
        full_degree = gp.degrees
        last = 0
        for entry in trace.removals:
            v = entry.vertex
            if entry.iteration <= last:
                flag("iteration-order", f"iteration {entry.iteration} does not increase", v)
            last = entry.iteration
            if not alive[v]:
                flag("removed-twice", f"vertex {v} is no longer present when removed", v)
                continue
            if entry.degree != current[v]:
                flag("degree-mismatch", f"vertex {v} recorded degree {entry.degree}, replay gives {current[v]}", v)
            if not thresholds.below_core(entry.degree):
                flag("removal-above-core", f"vertex {v} removed with degree {entry.degree} >= 3pd/5", v)
            replay_in = int(full_degree[v] - current[v])
            if entry.edges_into_removed != replay_in:
                flag("edges-mismatch", f"vertex {v} recorded {entry.edges_into_removed} edges into removed, replay gives {replay_in}", v)
            if not thresholds.at_least_fifth(entry.edges_into_removed):
                flag("edges-below-fifth", f"vertex {v} has fewer than pd/5 edges into the removed set", v)
            alive[v] = False
            neighbours = gp.neighbors(v)
            current[neighbours] -= 1

        if not np.array_equal(alive, survivors.mask):
            flag("survivor-mismatch", "replayed survivors differ from the recorded survivors")
        core_degree = self._alive_degrees(gp, survivors.mask)
        for v in survivors:
            if thresholds.below_core(int(core_degree[v])):
                flag("survivor-below-core", f"survivor below 3pd/5: vertex {v} has degree {core_degree[v]}", v)
        return violations
