from .graph import Graph, VertexSet, build_graph
from .tree import Label, LabeledTree

__all__ = ["Graph", "VertexSet", "build_graph", "Label", "LabeledTree"]
