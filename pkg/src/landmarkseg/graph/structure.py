"""Graph representation and Laplacian construction."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ParseError, ValidationError


@dataclass
class Graph:
    """A fixed node set with symmetric binary adjacency and per-node coordinates.

    `edges` is a sorted tuple of (i, j) pairs with i < j; `features` is a
    (num_nodes, d) float array of node coordinates.
    """

    num_nodes: int
    edges: tuple
    features: np.ndarray = field(default=None)

    def __post_init__(self):
        canon = []
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValidationError(f"self-loop on node {i} not allowed")
            if not (0 <= i < self.num_nodes and 0 <= j < self.num_nodes):
                raise ValidationError(f"edge ({i},{j}) out of range for {self.num_nodes} nodes")
            canon.append((min(i, j), max(i, j)))
        self.edges = tuple(sorted(set(canon)))
        if self.features is not None:
            self.features = np.asarray(self.features, dtype=np.float64)
            if self.features.ndim != 2 or self.features.shape[0] != self.num_nodes:
                raise ValidationError(
                    f"feature matrix must have {self.num_nodes} rows, "
                    f"got shape {self.features.shape}"
                )

    @property
    def num_edges(self):
        return len(self.edges)

    def adjacency_matrix(self):
        a = np.zeros((self.num_nodes, self.num_nodes))
        for i, j in self.edges:
            a[i, j] = 1.0
            a[j, i] = 1.0
        return a

    def degrees(self):
        return self.adjacency_matrix().sum(axis=1)

    def with_features(self, features):
        return Graph(self.num_nodes, self.edges, features)


def laplacian(graph, kind="symmetric-normalized"):
    """Graph Laplacian: 'combinatorial' gives D - A; 'symmetric-normalized'
    gives I - D^{-1/2} A D^{-1/2} with isolated-node rows left entirely zero."""
    a = graph.adjacency_matrix()
    d = a.sum(axis=1)
    if kind == "combinatorial":
        return np.diag(d) - a
    if kind == "symmetric-normalized":
        inv_sqrt = np.zeros_like(d)
        connected = d > 0
        inv_sqrt[connected] = 1.0 / np.sqrt(d[connected])
        lap = -inv_sqrt[:, None] * a * inv_sqrt[None, :]
        lap[connected, connected] += 1.0
        return lap
    raise ValidationError(f"unknown laplacian kind: {kind!r}")


def save_adjacency(path, graph):
    """Write one 'i j' undirected edge per line; '#' starts a comment."""
    lines = [f"# nodes {graph.num_nodes}"]
    lines += [f"{i} {j}" for i, j in graph.edges]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_adjacency(path):
    """Read an adjacency file written by save_adjacency; returns a Graph
    without features."""
    num_nodes = None
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "nodes":
                    num_nodes = int(parts[1])
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"expected 'i j', got {line!r}", path=path, line=lineno)
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer node index in {line!r}", path=path, line=lineno)
            edges.append((i, j))
    if num_nodes is None:
        num_nodes = 1 + max((max(e) for e in edges), default=-1)
    return Graph(num_nodes=num_nodes, edges=tuple(edges))
