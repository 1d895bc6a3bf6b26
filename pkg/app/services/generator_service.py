import logging
import math
from typing import Optional

import numpy as np

from app.core.config import Settings, settings as default_settings
from app.core.errors import InvalidGeneratorParameterError, RestartBudgetExhaustedError
from app.core.rng import Xoshiro256pp
from app.models.graph import Graph
from app.schemas.generator import GeneratorSpec, GraphFamily

logger = logging.getLogger(__name__)

# rounds of re-pairing leftover stubs before a repair attempt is abandoned
MAX_PAIRING_ROUNDS = 1000


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    return all(q % f for f in range(2, math.isqrt(q) + 1))


class GeneratorService:
    """Graph families used as percolation hosts and controls"""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or default_settings

    def complete_graph(self, n: int) -> Graph:
        if n < 2:
            raise InvalidGeneratorParameterError(f"complete graph needs n >= 2, got {n}")
        us, vs = np.triu_indices(n, k=1)
        return Graph.from_edge_arrays(n, us, vs)

    def cycle_graph(self, n: int) -> Graph:
        if n < 3:
            raise InvalidGeneratorParameterError(f"cycle needs n >= 3, got {n}")
        ids = np.arange(n, dtype=np.int64)
        nxt = (ids + 1) % n
        return Graph.from_edge_arrays(n, np.minimum(ids, nxt), np.maximum(ids, nxt))

    def paley_graph(self, q: int) -> Graph:
        if not _is_prime(q) or q % 4 != 1:
            raise InvalidGeneratorParameterError(f"paley graph needs a prime q = 1 mod 4, got {q}")
        residues = np.unique((np.arange(1, q, dtype=np.int64) ** 2) % q)
        us = np.repeat(np.arange(q, dtype=np.int64), residues.size)
        vs = (us + np.tile(residues, q)) % q
        keys = np.unique(np.minimum(us, vs) * q + np.maximum(us, vs))
        return Graph.from_edge_arrays(q, keys // q, keys % q)

    @staticmethod
    def expected_full_restarts(d: int) -> float:
        """Expected attempts of the full-restart pairing model, about exp((d^2 - 1) / 4)"""
        return math.exp((d * d - 1) / 4)

    def uses_full_restart(self, d: int) -> bool:
        return self.expected_full_restarts(d) <= self.settings.exact_pairing_max_restarts

    def random_regular(self, n: int, d: int, seed: int) -> Graph:
        """Simple d-regular graph from the pairing model.

        Every attempt Fisher-Yates shuffles the n*d half-edge array (stub i belongs to
        vertex i // d) with xoshiro256++ and pairs positions 2i and 2i+1. While the expected
        number of attempts stays under `exact_pairing_max_restarts` (d <= 5 by default), any
        loop or repeated edge discards the whole attempt and the next one reuses the same
        stream. Above that only the offending stubs are reshuffled and re-paired, which is
        no longer the uniform pairing distribution.
        """
        if (n * d) % 2:
            raise InvalidGeneratorParameterError(f"n*d must be even, got n={n} d={d}")
        if not 3 <= d < n:
            raise InvalidGeneratorParameterError(f"random regular needs 3 <= d < n, got n={n} d={d}")

        rng = Xoshiro256pp(seed)
        mode = "full-restart" if self.uses_full_restart(d) else "stub-repair"
        for attempt in range(1, self.settings.restart_cap + 1):
            keys = self._try_pairing(n, d, rng, mode)
            if keys is not None:
                logger.debug(
                    "random_regular_done n=%d d=%d seed=%d mode=%s attempts=%d", n, d, seed, mode, attempt
                )
                return Graph.from_edge_arrays(n, keys // n, keys % n)
        logger.error("random_regular_exhausted n=%d d=%d seed=%d mode=%s", n, d, seed, mode)
        raise RestartBudgetExhaustedError(self.settings.restart_cap)

    @classmethod
    def _try_pairing(cls, n: int, d: int, rng: Xoshiro256pp, mode: str) -> Optional[np.ndarray]:
        if mode == "full-restart":
            return cls._pair_once(n, d, rng)
        return cls._repair_pairing(n, d, rng)

    @staticmethod
    def _pair_once(n: int, d: int, rng: Xoshiro256pp) -> Optional[np.ndarray]:
        """One shuffle of all stubs; None on any loop or repeated edge"""
        order = np.repeat(np.arange(n, dtype=np.int64), d).tolist()
        rng.shuffle(order)
        pairs = np.asarray(order, dtype=np.int64).reshape(-1, 2)
        lo = pairs.min(axis=1)
        hi = pairs.max(axis=1)
        if np.any(lo == hi):
            return None
        keys = np.unique(lo * n + hi)
        if keys.size != pairs.shape[0]:
            return None
        return keys

    @staticmethod
    def _repair_pairing(n: int, d: int, rng: Xoshiro256pp) -> Optional[np.ndarray]:
        stubs = np.repeat(np.arange(n, dtype=np.int64), d)
        accepted = np.empty(0, dtype=np.int64)
        for _ in range(MAX_PAIRING_ROUNDS):
            order = stubs.tolist()
            rng.shuffle(order)
            pairs = np.asarray(order, dtype=np.int64).reshape(-1, 2)
            lo = pairs.min(axis=1)
            hi = pairs.max(axis=1)
            keys = lo * n + hi
            valid = np.flatnonzero((lo != hi) & ~np.isin(keys, accepted, assume_unique=False))
            # first occurrence wins among repeated pairs of this round
            _, first = np.unique(keys[valid], return_index=True)
            take = np.zeros(keys.size, dtype=bool)
            take[valid[first]] = True
            accepted = np.sort(np.concatenate([accepted, keys[take]]))
            stubs = pairs[~take].ravel()
            if stubs.size == 0:
                return accepted
            if not _has_free_pair(stubs, accepted, n):
                return None
        return None

    def generate(self, spec: GeneratorSpec) -> Graph:
        family = GraphFamily(spec.family)
        if family is GraphFamily.PALEY:
            q = spec.q if spec.q is not None else spec.n
            if q is None:
                raise InvalidGeneratorParameterError("paley graph needs q")
            return self.paley_graph(q)
        if spec.n is None:
            raise InvalidGeneratorParameterError(f"{family.value} needs n")
        if family is GraphFamily.COMPLETE:
            return self.complete_graph(spec.n)
        if family is GraphFamily.CYCLE:
            return self.cycle_graph(spec.n)
        if spec.d is None:
            raise InvalidGeneratorParameterError("random-regular needs d")
        return self.random_regular(spec.n, spec.d, spec.seed)


def _has_free_pair(stubs: np.ndarray, accepted: np.ndarray, n: int) -> bool:
    """True if two distinct stub vertices are still non-adjacent"""
    open_vertices = np.zeros(n, dtype=bool)
    open_vertices[stubs] = True
    k = int(np.count_nonzero(open_vertices))
    used = np.count_nonzero(open_vertices[accepted // n] & open_vertices[accepted % n])
    return used < k * (k - 1) // 2
