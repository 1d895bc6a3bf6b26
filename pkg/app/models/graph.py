from typing import Iterable, Iterator, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components as _csgraph_components

from app.core.errors import DuplicateEdgeError, SelfLoopError, VertexOutOfRangeError


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class VertexSet:
    """Subset of the vertex universe 0..n-1.

    Members are kept as a sorted id array; the boolean mask is built on first use.
    """

    __slots__ = ("n", "_members", "_mask")

    def __init__(self, n: int, members: Iterable[int] = ()):
        ids = np.unique(np.asarray(list(members) if not isinstance(members, np.ndarray) else members, dtype=np.int64))
        if ids.size and (ids[0] < 0 or ids[-1] >= n):
            bad = int(ids[0]) if ids[0] < 0 else int(ids[-1])
            raise VertexOutOfRangeError(bad, n)
        self.n = n
        self._members = _frozen(ids)
        self._mask: Optional[np.ndarray] = None

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "VertexSet":
        vs = cls.__new__(cls)
        vs.n = int(mask.shape[0])
        vs._members = _frozen(np.flatnonzero(mask).astype(np.int64))
        vs._mask = _frozen(np.asarray(mask, dtype=bool).copy())
        return vs

    @classmethod
    def full(cls, n: int) -> "VertexSet":
        return cls.from_mask(np.ones(n, dtype=bool))

    @classmethod
    def empty(cls, n: int) -> "VertexSet":
        return cls(n)

    @property
    def members(self) -> np.ndarray:
        return self._members

    @property
    def mask(self) -> np.ndarray:
        if self._mask is None:
            mask = np.zeros(self.n, dtype=bool)
            mask[self._members] = True
            self._mask = _frozen(mask)
        return self._mask

    def __len__(self) -> int:
        return int(self._members.size)

    @property
    def cardinality(self) -> int:
        return len(self)

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.n and bool(self.mask[v])

    def __iter__(self) -> Iterator[int]:
        return iter(self._members.tolist())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VertexSet):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._members, other._members)

    def __hash__(self) -> int:
        return hash((self.n, self._members.tobytes()))

    def __repr__(self) -> str:
        preview = self._members[:8].tolist()
        suffix = ", ..." if len(self) > 8 else ""
        return f"VertexSet(n={self.n}, size={len(self)}, members={preview}{suffix})"

    def min(self) -> int:
        return int(self._members[0])

    def complement(self) -> "VertexSet":
        return VertexSet.from_mask(~self.mask)

    def union(self, other: "VertexSet") -> "VertexSet":
        return VertexSet.from_mask(self.mask | other.mask)

    def intersection(self, other: "VertexSet") -> "VertexSet":
        return VertexSet.from_mask(self.mask & other.mask)

    def difference(self, other: "VertexSet") -> "VertexSet":
        return VertexSet.from_mask(self.mask & ~other.mask)

    def issubset(self, other: "VertexSet") -> bool:
        return bool(np.all(other.mask[self._members]))


class Graph:
    """Immutable simple undirected graph on vertices 0..n-1.

    Adjacency is stored in CSR form: the neighbors of v are
    indices[indptr[v]:indptr[v+1]], strictly ascending. Use build_graph for
    untrusted input; the constructors here assume a valid edge set.
    """

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray):
        self.n = n
        self.indptr = _frozen(np.asarray(indptr, dtype=np.int64))
        self.indices = _frozen(np.asarray(indices, dtype=np.int64))
        self._rows: Optional[np.ndarray] = None
        self._csr: Optional[csr_matrix] = None

    @classmethod
    def from_edge_arrays(cls, n: int, us: np.ndarray, vs: np.ndarray) -> "Graph":
        us = np.asarray(us, dtype=np.int64)
        vs = np.asarray(vs, dtype=np.int64)
        rows = np.concatenate([us, vs])
        cols = np.concatenate([vs, us])
        order = np.lexsort((cols, rows))
        counts = np.bincount(rows, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(n, indptr, cols[order])

    @classmethod
    def edgeless(cls, n: int) -> "Graph":
        return cls(n, np.zeros(n + 1, dtype=np.int64), np.zeros(0, dtype=np.int64))

    @property
    def m(self) -> int:
        return int(self.indices.size // 2)

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(v).tolist() for v in range(self.n)]

    @property
    def rows(self) -> np.ndarray:
        """Source vertex of every CSR slot, aligned with `indices`"""
        if self._rows is None:
            self._rows = _frozen(np.repeat(np.arange(self.n, dtype=np.int64), self.degrees))
        return self._rows

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge endpoints (u, v) with u < v in ascending lexicographic order"""
        upper = self.indices > self.rows
        return self.rows[upper], self.indices[upper]

    def edge_list(self) -> list[tuple[int, int]]:
        us, vs = self.edges()
        return list(zip(us.tolist(), vs.tolist()))

    def regular_degree(self) -> Optional[int]:
        degrees = self.degrees
        if self.n == 0:
            return 0
        d = int(degrees[0])
        return d if bool(np.all(degrees == d)) else None

    def to_csr_matrix(self) -> csr_matrix:
        if self._csr is None:
            data = np.ones(self.indices.size, dtype=np.float64)
            self._csr = csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))
        return self._csr

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.indptr, other.indptr)
            and np.array_equal(self.indices, other.indices)
        )

    def __hash__(self) -> int:
        return hash((self.n, self.indices.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def vertex_set(self, members: Iterable[int] = ()) -> VertexSet:
        return VertexSet(self.n, members)

    def all_vertices(self) -> VertexSet:
        return VertexSet.full(self.n)

    def induced_subgraph(self, keep: VertexSet) -> tuple["Graph", dict[int, int]]:
        """Subgraph on `keep`, relabelled to 0..|keep|-1 in ascending order"""
        mask = keep.mask
        new_id = np.cumsum(mask) - 1
        us, vs = self.edges()
        inside = mask[us] & mask[vs]
        sub = Graph.from_edge_arrays(len(keep), new_id[us[inside]], new_id[vs[inside]])
        relabel = {old: new for new, old in enumerate(keep.members.tolist())}
        return sub, relabel

    def directed_pair_count(self, s: VertexSet, t: VertexSet) -> int:
        """Number of ordered pairs (u, v) with u in S, v in T and uv an edge"""
        return int(np.count_nonzero(s.mask[self.rows] & t.mask[self.indices]))

    def internal_edge_count(self, s: VertexSet) -> int:
        return self.directed_pair_count(s, s) // 2

    def boundary_edge_count(self, s: VertexSet) -> int:
        return int(np.count_nonzero(s.mask[self.rows] & ~s.mask[self.indices]))

    def component_labels(self) -> np.ndarray:
        """Component index per vertex, components ranked by size desc then min id"""
        if self.n == 0:
            return np.zeros(0, dtype=np.int64)
        count, raw = _csgraph_components(self.to_csr_matrix(), directed=False)
        sizes = np.bincount(raw, minlength=count)
        first = np.full(count, self.n, dtype=np.int64)
        np.minimum.at(first, raw, np.arange(self.n, dtype=np.int64))
        order = np.lexsort((first, -sizes))
        rank = np.empty(count, dtype=np.int64)
        rank[order] = np.arange(count, dtype=np.int64)
        return rank[raw]

    def connected_components(self) -> list[VertexSet]:
        labels = self.component_labels()
        if labels.size == 0:
            return []
        order = np.argsort(labels, kind="stable")
        bounds = np.flatnonzero(np.diff(labels[order])) + 1
        return [VertexSet(self.n, chunk) for chunk in np.split(order, bounds)]


def build_graph(n: int, edges: Sequence[tuple[int, int]]) -> Graph:
    """Validate an edge list and build the graph; errors name the first offending edge"""
    if n < 0:
        raise VertexOutOfRangeError(n, 0)
    if len(edges) == 0:
        return Graph.edgeless(n)
    pairs = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    out_of_range = (pairs < 0) | (pairs >= n)
    if out_of_range.any():
        row, col = np.argwhere(out_of_range)[0]
        raise VertexOutOfRangeError(int(pairs[row, col]), n)
    loops = pairs[:, 0] == pairs[:, 1]
    if loops.any():
        raise SelfLoopError(int(pairs[np.argmax(loops), 0]))
    us = pairs.min(axis=1)
    vs = pairs.max(axis=1)
    keys = us * n + vs
    _, first_index = np.unique(keys, return_index=True)
    if first_index.size != keys.size:
        seen = np.zeros(keys.size, dtype=bool)
        seen[first_index] = True
        dup = int(np.argmin(seen))
        raise DuplicateEdgeError(int(pairs[dup, 0]), int(pairs[dup, 1]))
    return Graph.from_edge_arrays(n, us, vs)
