import logging
import math
from typing import Optional

import numpy as np

from app.core.config import Settings, settings as default_settings
from app.core.errors import NonRegularGraphError, SpectralError
from app.core.rng import MASK64, SplitMix64, sampling_generator
from app.models.graph import Graph
from app.schemas.spectral import (
    DensityReport, MixingAuditReport, MixingViolation, SpectralMethod, SpectralSummary
)

logger = logging.getLogger(__name__)

SLACK_EPS = 1e-9
EXHAUSTIVE_DENSITY_LIMIT = 12
GREEDY_STARTS = 5


def _start_vector(n: int, seed: int) -> np.ndarray:
    stream = SplitMix64(seed & MASK64)
    raw = np.array([stream.next_u64() >> 11 for _ in range(n)], dtype=np.float64)
    return raw * (2.0 / 2**53) - 1.0


def log_uniform_size(rng: np.random.Generator, upper: int) -> int:
    """Integer in [1, upper] with log-uniform distribution"""
    if upper <= 1:
        return 1
    size = int(math.floor(math.exp(rng.uniform(0.0, math.log(upper + 1)))))
    return min(max(size, 1), upper)


class SpectralService:
    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or default_settings

    def _degree(self, graph: Graph) -> int:
        d = graph.regular_degree()
        if d is None:
            raise NonRegularGraphError("graph is not regular; lambda/sqrt(d) is undefined")
        return d

    def second_eigenvalue_abs(
        self,
        graph: Graph,
        tol: Optional[float] = None,
        max_iter: Optional[int] = None,
        method: str = "auto",
    ) -> SpectralSummary:
        """Second largest absolute adjacency eigenvalue of a regular graph"""
        d = self._degree(graph)
        tol = tol if tol is not None else self.settings.spectral_tol
        max_iter = max_iter if max_iter is not None else self.settings.spectral_max_iter
        if method not in ("auto", "dense", "power"):
            raise SpectralError(f"unknown spectral method {method!r}")
        if method == "dense" or (method == "auto" and graph.n <= self.settings.dense_eigen_limit):
            summary = self._dense(graph, d)
        else:
            summary = self._power(graph, d, tol, max_iter)
        logger.debug(
            "spectrum n=%d d=%d lambda=%.9g method=%s iterations=%d",
            graph.n, d, summary.lambda_, summary.method.value, summary.iterations,
        )
        return summary

    @staticmethod
    def _summary(d: int, lam: float, **fields) -> SpectralSummary:
        lam = min(max(lam, 0.0), float(d))
        c = lam / math.sqrt(d) if d > 0 else 0.0
        return SpectralSummary(d=d, lambda_=lam, c=c, **fields)

    def _dense(self, graph: Graph, d: int) -> SpectralSummary:
        if graph.n < 2:
            return self._summary(d, 0.0, method=SpectralMethod.DENSE, residual=0.0, iterations=0)
        adjacency = graph.to_csr_matrix().toarray()
        values, vectors = np.linalg.eigh(adjacency)
        mu2, mu_min = float(values[-2]), float(values[0])
        pick = -2 if abs(mu2) >= abs(mu_min) else 0
        vec = vectors[:, pick]
        residual = float(np.linalg.norm(adjacency @ vec - values[pick] * vec))
        return self._summary(
            d, max(abs(mu2), abs(mu_min)),
            method=SpectralMethod.DENSE, residual=residual, iterations=0,
            mu2=mu2, mu_min=mu_min,
        )

    def _power(self, graph: Graph, d: int, tol: float, max_iter: int) -> SpectralSummary:
        # iterate on A^2 restricted to the complement of the all-ones vector;
        # its top eigenvalue there is lambda^2 whatever the sign of the extreme eigenvalue
        adjacency = graph.to_csr_matrix()
        x = _start_vector(graph.n, self.settings.spectral_seed)
        x -= x.mean()
        norm = np.linalg.norm(x)
        if norm == 0.0:
            return self._summary(d, 0.0, method=SpectralMethod.POWER, residual=0.0, iterations=0)
        x /= norm

        theta, residual = 0.0, math.inf
        for iteration in range(1, max_iter + 1):
            y = adjacency @ x
            y -= y.mean()
            theta = float(y @ y)
            z = adjacency @ y
            z -= z.mean()
            residual = float(np.linalg.norm(z - theta * x)) / max(theta, 1.0)
            if residual <= tol:
                return self._summary(
                    d, math.sqrt(theta), method=SpectralMethod.POWER,
                    residual=residual, iterations=iteration,
                )
            z_norm = np.linalg.norm(z)
            if z_norm == 0.0:
                break
            x = z / z_norm

        logger.warning(
            "power_iteration_not_converged n=%d max_iter=%d residual=%.3g", graph.n, max_iter, residual
        )
        return self._summary(
            d, math.sqrt(theta), method=SpectralMethod.POWER,
            residual=residual, iterations=max_iter, converged=False,
        )

    def mixing_lemma_audit(self, graph: Graph, lam: float, num_samples: int, seed: int) -> MixingAuditReport:
        d = self._degree(graph)
        n = graph.n
        rng = sampling_generator(seed)
        rows, cols = graph.rows, graph.indices

        def masks():
            full = np.ones(n, dtype=bool)
            yield full, full
            if n == 0:
                return
            zero = np.zeros(n, dtype=bool)
            zero[0] = True
            yield zero, zero
            if graph.degree(0) > 0:
                other = np.zeros(n, dtype=bool)
                other[int(graph.neighbors(0)[0])] = True
                yield zero, other
            for _ in range(num_samples):
                s = np.zeros(n, dtype=bool)
                t = np.zeros(n, dtype=bool)
                s[rng.choice(n, size=log_uniform_size(rng, n), replace=False)] = True
                t[rng.choice(n, size=log_uniform_size(rng, n), replace=False)] = True
                yield s, t

        max_slack = 0.0
        violations = []
        samples = 0
        for index, (s, t) in enumerate(masks()):
            samples += 1
            s_size = int(np.count_nonzero(s))
            t_size = int(np.count_nonzero(t))
            pairs = int(np.count_nonzero(s[rows] & t[cols]))
            slack = self.normalized_slack(pairs, s_size, t_size, n, d, lam)
            max_slack = max(max_slack, slack)
            if slack > 1.0 + SLACK_EPS:
                violations.append(MixingViolation(
                    sample=index, s_size=s_size, t_size=t_size, pair_count=pairs, slack=slack
                ))

        if violations:
            logger.warning("mixing_audit_violations count=%d max_slack=%.6g", len(violations), max_slack)
        return MixingAuditReport(
            samples=samples, lambda_used=lam, max_normalized_slack=max_slack, violations=violations
        )

    @staticmethod
    def normalized_slack(pairs: int, s_size: int, t_size: int, n: int, d: int, lam: float) -> float:
        numerator = abs(pairs - d * s_size * t_size / n) if n else 0.0
        denominator = lam * math.sqrt(s_size * t_size)
        if denominator == 0.0:
            return 0.0 if numerator <= SLACK_EPS else math.inf
        return numerator / denominator

    def density_bound_check(self, graph: Graph, lam: float, k: int, trials: int, seed: int) -> DensityReport:
        """Average degree of G[U] against lambda(1 + 1/k) for |U| <= lambda*n/(k*d)"""
        if k < 1:
            raise SpectralError("k must be >= 1")
        d = self._degree(graph)
        n = graph.n
        max_size = int(math.floor(lam * n / (k * d))) if d > 0 else 0
        max_size = min(max_size, n)
        bound = lam * (1 + 1 / k)
        if max_size < 1:
            return DensityReport(k=k, max_set_size=max_size, bound=bound, trials=0, skipped=True)

        def ratio(internal_edges: int, size: int) -> float:
            avg = 2 * internal_edges / size
            if bound == 0.0:
                return 0.0 if avg == 0 else math.inf
            return avg / bound

        worst_ratio, worst_size, violations, evaluated = 0.0, None, 0, 0

        def record(r: float, size: int):
            nonlocal worst_ratio, worst_size, violations, evaluated
            evaluated += 1
            if worst_size is None or r > worst_ratio:
                worst_ratio, worst_size = r, size
            if r > 1.0 + SLACK_EPS:
                violations += 1

        us, vs = graph.edges()
        if n <= EXHAUSTIVE_DENSITY_LIMIT:
            masks = np.arange(1, 1 << n, dtype=np.int64)
            bits = ((masks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)
            sizes = bits.sum(axis=1)
            internal = (bits[:, us] & bits[:, vs]).sum(axis=1)
            for size, edges in zip(sizes.tolist(), internal.tolist()):
                if size <= max_size:
                    record(ratio(edges, size), size)
            return DensityReport(
                k=k, max_set_size=max_size, bound=bound, trials=evaluated,
                worst_ratio=worst_ratio, worst_size=worst_size, violations=violations, exhaustive=True,
            )

        rng = sampling_generator(seed)
        for _ in range(trials):
            size = log_uniform_size(rng, max_size)
            mask = np.zeros(n, dtype=bool)
            mask[rng.choice(n, size=size, replace=False)] = True
            record(ratio(int(np.count_nonzero(mask[us] & mask[vs])), size), size)

        # greedy densification: every prefix of the grown set is evaluated
        starts = rng.choice(n, size=min(GREEDY_STARTS, n), replace=False)
        for start in starts.tolist():
            inside = np.zeros(n, dtype=bool)
            links = np.zeros(n, dtype=np.int64)
            internal = 0
            v = start
            for size in range(1, max_size + 1):
                inside[v] = True
                internal += int(links[v])
                links[graph.neighbors(v)] += 1
                record(ratio(internal, size), size)
                candidates = np.where(inside, -1, links)
                v = int(np.argmax(candidates))
                if candidates[v] < 0:
                    break

        return DensityReport(
            k=k, max_set_size=max_size, bound=bound, trials=evaluated,
            worst_ratio=worst_ratio, worst_size=worst_size, violations=violations,
        )

    @staticmethod
    def spectral_expansion_lower_bound(d: int, lam: float) -> float:
        return (d - lam) / 2

    @staticmethod
    def spectral_expansion_upper_bound(d: int, mu2: float) -> float:
        return math.sqrt(max(2 * d * (d - mu2), 0.0))
