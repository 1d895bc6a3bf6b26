from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from app.core.errors import TreeError


class Label(str, Enum):
    S = "S"
    I = "I"


@dataclass(frozen=True)
class LabeledTree:
    """Rooted tree over original graph ids with an S/I label per vertex.

    `parent[v]` is the parent id of v; the root is its own parent.
    """

    vertices: tuple[int, ...]
    parent: dict[int, int]
    label: dict[int, Label]
    children: dict[int, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ids = set(self.vertices)
        if len(ids) != len(self.vertices):
            raise TreeError("tree vertices must be distinct")
        if not self.vertices:
            raise TreeError("tree must have at least one vertex")
        if set(self.parent) != ids or set(self.label) != ids:
            raise TreeError("parent and label must cover exactly the tree vertices")
        roots = [v for v in self.vertices if self.parent[v] == v]
        if len(roots) != 1:
            raise TreeError(f"tree must have exactly one root, found {len(roots)}")
        children: dict[int, list[int]] = {v: [] for v in self.vertices}
        for v in self.vertices:
            p = self.parent[v]
            if p not in ids:
                raise TreeError(f"parent {p} of {v} is not a tree vertex")
            if p != v:
                children[p].append(v)
        object.__setattr__(self, "children", {v: tuple(sorted(c)) for v, c in children.items()})
        # every vertex must be reachable from the root, otherwise parent has a cycle
        seen = 0
        stack = [roots[0]]
        while stack:
            v = stack.pop()
            seen += 1
            stack.extend(self.children[v])
        if seen != len(self.vertices):
            raise TreeError("parent map contains a cycle")

    @classmethod
    def from_edges(cls, root: int, edges: Iterable[tuple[int, int]], s_vertices: Iterable[int], vertices: Iterable[int] = ()) -> "LabeledTree":
        adjacency: dict[int, list[int]] = {root: []}
        for v in vertices:
            adjacency.setdefault(v, [])
        for u, v in edges:
            adjacency.setdefault(u, []).append(v)
            adjacency.setdefault(v, []).append(u)
        parent = {root: root}
        order = [root]
        for v in order:
            for w in sorted(adjacency[v]):
                if w not in parent:
                    parent[w] = v
                    order.append(w)
                elif parent[v] != w and w != v:
                    raise TreeError("edge set contains a cycle")
        if len(parent) != len(adjacency):
            raise TreeError("edge set is not connected")
        s_set = set(s_vertices)
        verts = tuple(sorted(parent))
        return cls(
            vertices=verts,
            parent=parent,
            label={v: Label.S if v in s_set else Label.I for v in verts},
        )

    @property
    def root(self) -> int:
        return next(v for v in self.vertices if self.parent[v] == v)

    @property
    def size(self) -> int:
        return len(self.vertices)

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def s_count(self) -> int:
        return sum(1 for v in self.vertices if self.label[v] is Label.S)

    def edges(self) -> list[tuple[int, int]]:
        return sorted((min(v, p), max(v, p)) for v, p in self.parent.items() if v != p)

    def adjacency(self) -> dict[int, list[int]]:
        adjacency: dict[int, list[int]] = {v: [] for v in self.vertices}
        for u, v in self.edges():
            adjacency[u].append(v)
            adjacency[v].append(u)
        for v in adjacency:
            adjacency[v].sort()
        return adjacency
