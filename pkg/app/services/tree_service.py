import logging
from collections import deque
from typing import Iterable

from app.core.errors import BalancedSubtreePreconditionError, ComponentNotConnectedError, TreeError
from app.models.graph import Graph, VertexSet
from app.models.tree import Label, LabeledTree

logger = logging.getLogger(__name__)

Adjacency = dict[int, list[int]]


def _branch(adjacency: Adjacency, members: set[int], start: int, blocked: int) -> list[int]:
    """Vertices reachable from start inside members without passing through blocked"""
    seen = {start, blocked}
    order = [start]
    for v in order:
        for w in adjacency[v]:
            if w in members and w not in seen:
                seen.add(w)
                order.append(w)
    return order


def _centroid(adjacency: Adjacency, members: set[int]) -> tuple[int, int]:
    """(centroid, largest remaining component) of the subtree on members"""
    root = min(members)
    parent = {root: root}
    order = [root]
    for v in order:
        for w in adjacency[v]:
            if w in members and w not in parent:
                parent[w] = v
                order.append(w)
    size = dict.fromkeys(order, 1)
    heaviest_child = dict.fromkeys(order, 0)
    for v in reversed(order[1:]):
        p = parent[v]
        size[p] += size[v]
        heaviest_child[p] = max(heaviest_child[p], size[v])
    total = len(order)
    largest, vertex = min((max(heaviest_child[v], total - size[v]), v) for v in order)
    return vertex, largest


class TreeService:
    def tree_centroid(self, tree: LabeledTree) -> int:
        vertex, _ = _centroid(tree.adjacency(), set(tree.vertices))
        return vertex

    def centroid_max_component(self, tree: LabeledTree) -> int:
        _, largest = _centroid(tree.adjacency(), set(tree.vertices))
        return largest

    def spanning_tree(self, graph: Graph, component: VertexSet, s_labels: VertexSet) -> LabeledTree:
        """BFS tree of the component from its smallest vertex, neighbours in ascending order"""
        if len(component) == 0:
            raise TreeError("component is empty")
        mask = component.mask
        root = component.min()
        parent = {root: root}
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for w in graph.neighbors(v).tolist():
                if mask[w] and w not in parent:
                    parent[w] = v
                    queue.append(w)
        if len(parent) != len(component):
            raise ComponentNotConnectedError(
                f"component of {len(component)} vertices is not connected; reached {len(parent)}"
            )
        vertices = tuple(component.members.tolist())
        return LabeledTree(
            vertices=vertices,
            parent=parent,
            label={v: Label.S if v in s_labels else Label.I for v in vertices},
        )

    def extract_balanced_subtree(self, tree: LabeledTree, t_target: int, k: int) -> LabeledTree:
        """Subtree with size in [t, 2t-1] keeping an S fraction of at least 1/k.

        Works on the centroid of the current piece: a hanging subtree of size >= t (or
        its complement) is kept whichever side holds the fraction; otherwise a subtree
        with fraction <= 1/k is dropped; otherwise whole subtrees are attached to the
        centroid in order of their smallest vertex until the size reaches t.
        """
        if k < 1:
            raise BalancedSubtreePreconditionError(f"k must be >= 1, got {k}")
        if t_target < 1 or 2 * t_target > tree.size:
            raise BalancedSubtreePreconditionError(
                f"t_target must lie in [1, {tree.size // 2}], got {t_target}"
            )
        if tree.s_count * k < tree.size:
            raise BalancedSubtreePreconditionError(
                f"S fraction {tree.s_count}/{tree.size} is below 1/{k}"
            )

        adjacency = tree.adjacency()
        is_s = {v: tree.label[v] is Label.S for v in tree.vertices}

        def s_count(vertices: Iterable[int]) -> int:
            return sum(1 for v in vertices if is_s[v])

        members = set(tree.vertices)
        while len(members) > 2 * t_target - 1:
            centre, _ = _centroid(adjacency, members)
            branches = sorted(
                (_branch(adjacency, members, w, centre) for w in adjacency[centre] if w in members),
                key=min,
            )
            big = next((b for b in branches if len(b) >= t_target), None)
            if big is not None:
                if s_count(big) * k >= len(big):
                    members = set(big)
                else:
                    members -= set(big)
                continue
            light = next((b for b in branches if s_count(b) * k <= len(b)), None)
            if light is not None:
                members -= set(light)
                continue
            grown = {centre}
            for b in branches:
                grown.update(b)
                if len(grown) >= t_target:
                    break
            members = grown
            break

        logger.debug("balanced_subtree size=%d s=%d target=%d k=%d", len(members), s_count(members), t_target, k)
        return LabeledTree.from_edges(
            root=min(members),
            edges=[(u, v) for u, v in tree.edges() if u in members and v in members],
            s_vertices=[v for v in members if is_s[v]],
            vertices=members,
        )
