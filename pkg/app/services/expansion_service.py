import logging
import math
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from scipy.sparse.csgraph import breadth_first_order

from app.core.config import Settings, settings as default_settings
from app.core.errors import ExpansionTooLargeError, NoAdmissibleSubsetError
from app.core.rng import sampling_generator
from app.models.graph import Graph, VertexSet
from app.schemas.structure import CoreExpansionReport, ExpansionMode, ExpansionReport, SubsetRule
from app.services.percolation_service import Probability, as_fraction
from app.services.spectral_service import SpectralService, log_uniform_size

logger = logging.getLogger(__name__)

CHUNK_BITS = 16
SWEEP_ITERATIONS = 300
BFS_ROOTS = 8
INVERSION_RTOL = 1e-9


def admissible_max_size(n: int, rule: SubsetRule) -> int:
    if rule is SubsetRule.STRICT_HALF:
        return (n - 1) // 2
    return n // 2


def _lex_smallest(masks: np.ndarray) -> int:
    """Mask whose sorted member list is lexicographically smallest"""
    taken = np.int64(0)
    while True:
        rest = masks & ~taken
        if np.any(rest == 0):
            return int(taken)
        low = rest & -rest
        best = low.min()
        masks = masks[low == best]
        taken |= best


class SampledCut:
    """Smallest |boundary|/|S| seen while sampling connected sets"""

    def __init__(self):
        self.boundary: Optional[int] = None
        self.size: Optional[int] = None
        self.witness: list[int] = []
        self.samples = 0
        self.violations = 0

    def offer(self, members: np.ndarray, boundary: int, violates: bool) -> None:
        self.samples += 1
        size = int(members.size)
        if violates:
            self.violations += 1
        if self.size is None or boundary * self.size < self.boundary * size:
            self.boundary, self.size = boundary, size
            self.witness = np.sort(members).tolist()

    @property
    def ratio(self) -> Optional[float]:
        return None if self.size is None else self.boundary / self.size


class ExpansionService:
    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or default_settings

    def exact_edge_expansion(self, graph: Graph, subset_rule: SubsetRule = SubsetRule.AT_MOST_HALF) -> ExpansionReport:
        """Brute-force edge expansion over every admissible vertex set"""
        n = graph.n
        rule = SubsetRule(subset_rule)
        if n > self.settings.exact_expansion_limit:
            raise ExpansionTooLargeError(
                f"exact expansion enumerates 2^n sets; n={n} exceeds {self.settings.exact_expansion_limit}"
            )
        max_size = admissible_max_size(n, rule)
        if max_size < 1:
            raise NoAdmissibleSubsetError(f"no nonempty set is admissible for n={n} under {rule.value}")

        us, vs = graph.edges()
        bit = np.arange(n, dtype=np.int64)
        best: Optional[Fraction] = None
        winners = np.empty(0, dtype=np.int64)
        chunk = 1 << min(CHUNK_BITS, n)
        for start in range(1, 1 << n, chunk):
            masks = np.arange(start, min(start + chunk, 1 << n), dtype=np.int64)
            bits = ((masks[:, None] >> bit) & 1).astype(bool)
            sizes = bits.sum(axis=1)
            keep = sizes <= max_size
            if not keep.any():
                continue
            masks, bits, sizes = masks[keep], bits[keep], sizes[keep]
            boundary = (bits[:, us] != bits[:, vs]).sum(axis=1)
            ratios = boundary / sizes
            local = ratios.min()
            at_min = ratios == local
            i = int(np.argmax(at_min))
            value = Fraction(int(boundary[i]), int(sizes[i]))
            if best is None or value < best:
                best, winners = value, masks[at_min]
            elif value == best:
                winners = np.concatenate([winners, masks[at_min]])

        components = graph.connected_components()
        connected = len(components) == 1
        if not connected:
            logger.warning("exact_expansion_disconnected n=%d components=%d", n, len(components))
        if best == 0:
            # some union of components fits, so the smallest component does too
            smallest = min(components, key=lambda comp: (len(comp), int(comp.members[0])))
            witness = smallest.members.tolist()
        else:
            witness_mask = _lex_smallest(winners)
            witness = [v for v in range(n) if witness_mask >> v & 1]
        value = float(best)
        return ExpansionReport(
            mode=ExpansionMode.EXACT,
            subset_rule=rule,
            value=value,
            value_fraction=str(best),
            lower_bound=value,
            upper_bound=value,
            lower_bound_source="exact",
            witness=witness,
            witness_boundary=best.numerator * len(witness) // best.denominator,
            connected=connected,
        )

    @staticmethod
    def _prefix_cuts(graph: Graph, order: np.ndarray, max_size: int) -> tuple[np.ndarray, np.ndarray]:
        """Boundary sizes of every prefix of `order` (up to max_size) and the prefix lengths"""
        position = np.full(graph.n, graph.n, dtype=np.int64)
        position[order] = np.arange(order.size, dtype=np.int64)
        earlier = position[graph.indices] < position[graph.rows]
        inner = np.bincount(graph.rows[earlier], minlength=graph.n)
        step = graph.degrees[order] - 2 * inner[order]
        boundary = np.cumsum(step)[:max_size]
        return boundary, np.arange(1, boundary.size + 1, dtype=np.int64)

    def _fiedler_vector(self, graph: Graph, rng: np.random.Generator) -> np.ndarray:
        if graph.n <= self.settings.dense_eigen_limit:
            laplacian = np.diag(graph.degrees.astype(np.float64)) - graph.to_csr_matrix().toarray()
            _, vectors = np.linalg.eigh(laplacian)
            return vectors[:, 1]
        adjacency = graph.to_csr_matrix()
        degrees = graph.degrees.astype(np.float64)
        shift = 2.0 * degrees.max()
        x = rng.standard_normal(graph.n)
        for _ in range(SWEEP_ITERATIONS):
            x -= x.mean()
            x = shift * x - (degrees * x - adjacency @ x)
            norm = np.linalg.norm(x)
            if norm == 0.0:
                break
            x /= norm
        return x

    def expansion_upper_bound(
        self, graph: Graph, trials: int, seed: int, lam: Optional[float] = None
    ) -> ExpansionReport:
        """Witness search: BFS prefixes, spectral sweep cuts, then local moves"""
        n = graph.n
        max_size = n // 2
        if max_size < 1:
            raise NoAdmissibleSubsetError(f"no nonempty set of size <= n/2 for n={n}")
        rng = sampling_generator(seed)
        best_boundary, best_size, best_order, best_source = None, None, None, None

        def consider(order: np.ndarray, source: str):
            nonlocal best_boundary, best_size, best_order, best_source
            boundary, sizes = self._prefix_cuts(graph, order, max_size)
            i = int(np.argmin(boundary / sizes))
            if best_size is None or boundary[i] * best_size < best_boundary * sizes[i]:
                best_boundary, best_size = int(boundary[i]), int(sizes[i])
                best_order, best_source = order[:best_size], source

        csr = graph.to_csr_matrix()
        roots = rng.choice(n, size=min(BFS_ROOTS, n), replace=False)
        for root in roots.tolist():
            consider(breadth_first_order(csr, root, directed=False, return_predecessors=False), "bfs")

        fiedler = self._fiedler_vector(graph, rng)
        ascending = np.argsort(fiedler, kind="stable")
        consider(ascending, "sweep")
        consider(ascending[::-1].copy(), "sweep")

        inside = np.zeros(n, dtype=bool)
        inside[best_order] = True
        boundary, size = best_boundary, best_size
        links = np.bincount(graph.rows[inside[graph.indices]], minlength=n)
        degrees = graph.degrees
        improved = 0
        for _ in range(trials):
            frontier = np.flatnonzero(np.where(inside, links < degrees, links > 0))
            if frontier.size == 0:
                break
            v = int(frontier[rng.integers(frontier.size)])
            if inside[v]:
                new_size = size - 1
                new_boundary = boundary - (degrees[v] - links[v]) + links[v]
            else:
                new_size = size + 1
                new_boundary = boundary - links[v] + (degrees[v] - links[v])
            if not 1 <= new_size <= max_size or new_boundary * size >= boundary * new_size:
                continue
            inside[v] = not inside[v]
            links[graph.neighbors(v)] += 1 if inside[v] else -1
            boundary, size = int(new_boundary), new_size
            improved += 1
        if improved:
            best_source = "local"

        lower, lower_source = 0.0, "trivial"
        d = graph.regular_degree()
        if d is not None:
            if lam is None:
                lam = SpectralService(self.settings).second_eigenvalue_abs(graph).lambda_
            lower, lower_source = SpectralService.spectral_expansion_lower_bound(d, lam), "spectral"
        upper = boundary / size
        # a valid lower bound never exceeds a realised cut
        inverted = lower > upper * (1 + INVERSION_RTOL)
        if inverted:
            logger.warning(
                "expansion_bounds_inverted n=%d lower=%.9g upper=%.9g source=%s", n, lower, upper, lower_source
            )
        logger.debug("expansion_upper_bound n=%d upper=%.6g source=%s", n, upper, best_source)
        return ExpansionReport(
            mode=ExpansionMode.BOUNDED,
            subset_rule=SubsetRule.AT_MOST_HALF,
            lower_bound=lower,
            upper_bound=upper,
            lower_bound_source=lower_source,
            bounds_inverted=inverted,
            witness=np.flatnonzero(inside).tolist(),
            witness_boundary=boundary,
            connected=len(graph.connected_components()) == 1,
        )

    @staticmethod
    def grow_connected_set(graph: Graph, root: int, target: int, rng: np.random.Generator) -> np.ndarray:
        """BFS ball around root with exactly `target` vertices when the component allows;
        the last layer is cut at random"""
        csr = graph.to_csr_matrix()
        seen = np.zeros(graph.n, dtype=bool)
        seen[root] = True
        taken = [np.array([root], dtype=np.int64)]
        count = 1
        layer = taken[0]
        while count < target and layer.size:
            reach = np.unique(csr[layer].indices)
            layer = reach[~seen[reach]].astype(np.int64)
            if layer.size == 0:
                break
            if count + layer.size > target:
                layer = rng.choice(layer, size=target - count, replace=False)
            seen[layer] = True
            taken.append(layer)
            count += layer.size
        return np.concatenate(taken)

    def sample_cuts(
        self,
        graph: Graph,
        samples: int,
        seed: int,
        max_size: int,
        roots: Optional[np.ndarray] = None,
        violates: Callable[[int, int], bool] = lambda boundary, size: False,
    ) -> SampledCut:
        """Boundary ratios of random connected sets with log-uniform sizes in [1, max_size]"""
        cut = SampledCut()
        if max_size < 1 or graph.n == 0:
            return cut
        rng = sampling_generator(seed)
        csr = graph.to_csr_matrix()
        pool = np.arange(graph.n) if roots is None else roots
        if pool.size == 0:
            return cut
        for _ in range(samples):
            root = int(pool[rng.integers(pool.size)])
            members = self.grow_connected_set(graph, root, log_uniform_size(rng, max_size), rng)
            mask = np.zeros(graph.n, dtype=bool)
            mask[members] = True
            boundary = int(np.count_nonzero(~mask[csr[members].indices]))
            cut.offer(members, boundary, violates(boundary, int(members.size)))
        return cut

    def sampled_core_expansion(
        self, gpk: Graph, p: Probability, d: int, samples: int, seed: int
    ) -> CoreExpansionReport:
        """Evidence for expansion >= pd/13 inside the core; not a proof"""
        fraction = as_fraction(p)
        divisor = self.settings.core_expansion_divisor
        bound = fraction * d / divisor
        scale = divisor * fraction.denominator
        scaled_pd = fraction.numerator * d

        def below(boundary: int, size: int) -> bool:
            return boundary * scale < size * scaled_pd

        cut = self.sample_cuts(gpk, samples, seed, gpk.n // 2, violates=below)
        if cut.violations:
            logger.warning(
                "core_expansion_violation samples=%d violations=%d min_ratio=%.6g bound=%.6g",
                cut.samples, cut.violations, cut.ratio, float(bound),
            )
        return CoreExpansionReport(
            samples=cut.samples,
            bound=float(bound),
            min_ratio=cut.ratio,
            min_size=cut.size,
            violations=cut.violations,
            witness=cut.witness,
        )
