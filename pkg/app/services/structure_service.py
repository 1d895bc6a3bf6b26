import logging
import math
from typing import Optional

import numpy as np

from app.core.config import Settings, settings as default_settings
from app.core.probability import ScaledThresholds
from app.core.rng import derive_seed
from app.models.graph import Graph, VertexSet
from app.schemas.percolation import PruneTrace
from app.schemas.structure import (
    BarePathReport, CertificateCondition, CertificateReport, OutComponent, OutReport
)
from app.services.expansion_service import ExpansionService
from app.services.percolation_service import Probability, as_fraction

logger = logging.getLogger(__name__)


class StructureService:
    """What the peeling says about G_p: OUT components, the core and the giant"""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or default_settings
        self.expansion = ExpansionService(self.settings)

    def _log(self, n: int, natural: bool) -> float:
        if natural or self.settings.log_base == "e":
            return math.log(n)
        return math.log2(n)

    def size_bound(self, n: int, c: float, d: int, natural: bool = False) -> float:
        """Largest OUT component allowed: constant * log(n) / (c * sqrt(d))"""
        scale = c * math.sqrt(d)
        if n < 2:
            return 0.0
        if scale == 0.0:
            return math.inf
        return self.settings.size_bound_constant * self._log(n, natural) / scale

    def implied_bound(self, n: int, c: float, d: int, natural: bool = False) -> float:
        if n < 2:
            return math.inf
        return c * math.sqrt(d) / (self.settings.size_bound_constant * self._log(n, natural))

    def out_component_report(
        self,
        gp: Graph,
        trace: PruneTrace,
        c: float,
        d: int,
        host: Optional[Graph] = None,
        lam: Optional[float] = None,
    ) -> OutReport:
        n = gp.n
        threshold = self.settings.balance_fraction
        out = VertexSet(n, trace.out)
        s0 = VertexSet(n, trace.s0).mask
        survivors = VertexSet(n, trace.survivors).mask
        giant_core = survivors & (gp.component_labels() == 0) if n else survivors

        sub, _ = gp.induced_subgraph(out)
        component_of = np.full(n, -1, dtype=np.int64)
        pieces = [out.members[part.members] for part in sub.connected_components()]
        for index, members in enumerate(pieces):
            component_of[members] = index
        hits = component_of[gp.rows] >= 0
        hits &= giant_core[gp.indices]
        touching = set(np.unique(component_of[gp.rows[hits]]).tolist())

        components = []
        for index, members in enumerate(pieces):
            size = int(members.size)
            s0_count = int(np.count_nonzero(s0[members]))
            entry = OutComponent(
                size=size,
                s0_count=s0_count,
                s0_fraction=s0_count / size,
                balanced=s0_count * threshold.denominator >= threshold.numerator * size,
                has_edge_to_giant=index in touching,
                min_vertex=int(members.min()),
            )
            if host is not None and lam is not None and d > 0:
                entry.host_avg_degree = 2 * host.internal_edge_count(VertexSet(n, members)) / size
                k = int(math.floor(lam * n / (d * size)))
                if k >= 1:
                    entry.density_k = k
                    entry.density_bound = lam * (1 + 1 / k)
            components.append(entry)

        max_size = components[0].size if components else 0
        bound = self.size_bound(n, c, d)
        report = OutReport(
            components=components,
            max_component_size=max_size,
            balance_threshold=float(threshold),
            size_bound=bound,
            size_bound_natural_log=self.size_bound(n, c, d, natural=True),
            all_balanced=all(comp.balanced for comp in components if comp.size >= 2),
            within_size_bound=max_size <= bound,
        )
        logger.debug(
            "out_report out=%d components=%d max=%d bound=%.6g", len(out), len(components), max_size, bound
        )
        return report

    def bare_path_report(self, gp: Graph, giant: VertexSet) -> BarePathReport:
        """Longest run of consecutive degree-2 vertices inside the giant component"""
        chain = giant.mask & (gp.degrees == 2)
        if not chain.any():
            return BarePathReport()
        sub, _ = gp.induced_subgraph(VertexSet.from_mask(chain))
        longest = len(sub.connected_components()[0])
        span = min(longest, gp.n // 2)
        return BarePathReport(
            longest_bare_path=longest,
            expansion_upper_bound=2 / span if span >= 1 else None,
        )

    def giant_expansion_certificate(
        self,
        gp: Graph,
        trace: PruneTrace,
        lam: float,
        d: int,
        p: Probability,
        samples: int,
        seed: int,
        host: Optional[Graph] = None,
    ) -> CertificateReport:
        n = gp.n
        fraction = as_fraction(p)
        thresholds = ScaledThresholds(fraction, d)
        c = lam / math.sqrt(d) if d > 0 else 0.0
        pd = float(thresholds.pd)
        survivors = VertexSet(n, trace.survivors)
        out_mask = ~survivors.mask

        core, _ = gp.induced_subgraph(survivors)
        core_degrees = core.degrees
        min_core = int(core_degrees.min()) if core.n else None
        out_links = np.bincount(gp.rows[out_mask[gp.indices]], minlength=n)[survivors.members]
        max_out_links = int(out_links.max()) if out_links.size else None

        out_report = self.out_component_report(gp, trace, c, d, host=host, lam=lam)
        core_report = self.expansion.sampled_core_expansion(core, fraction, d, samples, seed)

        components = gp.connected_components()
        giant = components[0] if components else VertexSet(n)
        second = len(components[1]) if len(components) > 1 else 0
        contains = survivors.issubset(giant) if len(survivors) else None

        conditions = [
            CertificateCondition(
                name="a-core-min-degree",
                passed=min_core is None or not thresholds.below_core(min_core),
                measured=min_core,
                threshold=0.6 * pd,
                detail="min degree of the core vs 3pd/5",
            ),
            CertificateCondition(
                name="b-out-neighbours",
                passed=max_out_links is None or not thresholds.above_window(max_out_links),
                measured=max_out_links,
                threshold=1.2 * pd,
                detail="largest number of OUT neighbours of a survivor vs 6pd/5",
            ),
            CertificateCondition(
                name="c-out-component-size",
                passed=out_report.within_size_bound,
                measured=out_report.max_component_size,
                threshold=out_report.size_bound,
                detail="largest OUT component vs constant*log(n)/(c*sqrt(d))",
            ),
            CertificateCondition(
                name="d-out-balanced",
                passed=out_report.all_balanced,
                measured=min((comp.s0_fraction for comp in out_report.components if comp.size >= 2), default=None),
                threshold=out_report.balance_threshold,
                detail="smallest S0 fraction over OUT components of size >= 2",
            ),
            CertificateCondition(
                name="e-core-expansion",
                passed=core_report.passed,
                measured=core_report.min_ratio,
                threshold=core_report.bound,
                detail="sampled core expansion vs pd/13",
            ),
            CertificateCondition(
                name="f-giant-contains-survivors",
                passed=contains is not False,
                measured=None if contains is None else float(contains),
                threshold=1.0,
                detail="every survivor lies in the largest component of G_p",
            ),
        ]
        giant_cut = self.expansion.sample_cuts(
            gp, samples, derive_seed(seed, 1), min(n // 2, len(giant) // 2), roots=giant.members
        )
        report = CertificateReport(
            conditions=conditions,
            implied_bound=self.implied_bound(n, c, d),
            implied_bound_natural_log=self.implied_bound(n, c, d, natural=True),
            passed=all(cond.passed for cond in conditions),
            giant_size=len(giant),
            second_component_size=second,
            second_component_explained=second <= out_report.max_component_size + 1,
            giant_contains_survivors=contains,
            core_connected=len(core.connected_components()) <= 1,
            max_out_component=out_report.max_component_size,
            core_expansion=core_report,
            sampled_giant_expansion=giant_cut.ratio,
            bare_path=self.bare_path_report(gp, giant),
        )
        logger.info(
            "certificate n=%d p=%s passed=%s failed=%s",
            n, trace.params.p, report.passed, ",".join(cond.name for cond in conditions if not cond.passed) or "-",
        )
        return report
