"""Finite labeled graphs and homomorphism counts for edges, wedges, triangles and stars.

Graphs are stored as adjacency bitmask rows (bit ``j`` of ``adj[i]`` is the edge
``{i, j}``). All counts use Python integers, so ``sum(deg**j)`` never overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

MAX_VERTICES = 64
# 64 * 63**20 < 2**127: keeps every star count inside a 128-bit budget
MAX_STAR = 20


@dataclass(frozen=True)
class SubgraphFamily:
    """One of the supported constraint subgraphs.

    ``kind`` is ``"edge"``, ``"wedge"``, ``"triangle"`` or ``"star"``; ``j`` is
    the number of leaves for stars (ignored otherwise).
    """

    kind: str
    j: int = 0

    def __post_init__(self):
        if self.kind not in ("edge", "wedge", "triangle", "star"):
            raise ValueError(f"unknown subgraph kind {self.kind!r}")
        if self.kind == "star":
            if self.j < 2:
                raise ValueError("star needs j >= 2")
            if self.j > MAX_STAR:
                raise ValueError(f"star({self.j}) exceeds the supported width (j <= {MAX_STAR})")
        else:
            object.__setattr__(self, "j", 0)

    @property
    def vertices(self) -> int:
        return {"edge": 2, "wedge": 3, "triangle": 3}.get(self.kind, self.j + 1)

    @property
    def edges(self) -> int:
        return {"edge": 1, "wedge": 2, "triangle": 3}.get(self.kind, self.j)

    @property
    def automorphisms(self) -> int:
        """Number of edge-preserving vertex permutations, ``p(F)``."""
        return {"edge": 2, "wedge": 2, "triangle": 6}.get(self.kind, math.factorial(self.j))

    @property
    def star_exponent(self) -> int:
        """Degree exponent when the family is a star (wedge counts as 2-star), else 0."""
        if self.kind == "wedge":
            return 2
        return self.j if self.kind == "star" else 0

    @property
    def name(self) -> str:
        return f"star{self.j}" if self.kind == "star" else self.kind

    def __str__(self) -> str:
        return self.name


EDGE = SubgraphFamily("edge")
WEDGE = SubgraphFamily("wedge")
TRIANGLE = SubgraphFamily("triangle")


def star(j: int) -> SubgraphFamily:
    return SubgraphFamily("star", j)


def parse_family(text: str) -> SubgraphFamily:
    """Parse ``edge``, ``wedge``, ``triangle``, ``star3`` or ``star:3``."""
    t = text.strip().lower()
    if t in ("edge", "wedge", "triangle"):
        return SubgraphFamily(t)
    if t.startswith("star"):
        rest = t[4:].lstrip(":(").rstrip(")")
        if rest.isdigit():
            return star(int(rest))
    raise ValueError(f"cannot parse subgraph family {text!r}")


def parse_families(text: str | Iterable[str]) -> tuple[SubgraphFamily, ...]:
    items = text.split(",") if isinstance(text, str) else list(text)
    fams = tuple(parse_family(s) for s in items if str(s).strip())
    if not fams:
        raise ValueError("family list is empty")
    return fams


@dataclass(frozen=True)
class LabeledGraph:
    """Simple undirected graph on vertices ``0..n-1``."""

    n: int
    adj: tuple[int, ...]

    def __post_init__(self):
        if not 2 <= self.n <= MAX_VERTICES:
            raise ValueError(f"n must be in [2, {MAX_VERTICES}], got {self.n}")
        if len(self.adj) != self.n:
            raise ValueError("need one adjacency row per vertex")
        full = (1 << self.n) - 1
        for i, row in enumerate(self.adj):
            if row < 0 or row & ~full:
                raise ValueError(f"row {i} has bits outside the vertex range")
            if row >> i & 1:
                raise ValueError(f"loop at vertex {i}")
            r = row
            while r:
                low = r & -r
                j = low.bit_length() - 1
                if not self.adj[j] >> i & 1:
                    raise ValueError(f"asymmetric adjacency at ({i}, {j})")
                r ^= low

    @classmethod
    def empty(cls, n: int) -> "LabeledGraph":
        return cls(n, (0,) * n)

    @classmethod
    def complete(cls, n: int) -> "LabeledGraph":
        full = (1 << n) - 1
        return cls(n, tuple(full ^ (1 << i) for i in range(n)))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "LabeledGraph":
        rows = [0] * n
        for i, j in edges:
            if i == j:
                raise ValueError(f"loop at vertex {i}")
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
            rows[i] |= 1 << j
            rows[j] |= 1 << i
        return cls(n, tuple(rows))

    @classmethod
    def from_matrix(cls, matrix) -> "LabeledGraph":
        n = len(matrix)
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if matrix[i][j]]
        return cls.from_edges(n, edges)

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adj[i] >> j & 1)

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n) if self.adj[i] >> j & 1]

    def degrees(self) -> list[int]:
        return [row.bit_count() for row in self.adj]

    def num_edges(self) -> int:
        return sum(self.degrees()) // 2

    def num_triangles(self) -> int:
        total = 0
        for i, j in self.edges():
            total += (self.adj[i] & self.adj[j]).bit_count()
        return total // 3

    def toggled(self, i: int, j: int) -> "LabeledGraph":
        if i == j:
            raise ValueError("cannot toggle a loop")
        rows = list(self.adj)
        rows[i] ^= 1 << j
        rows[j] ^= 1 << i
        return LabeledGraph(self.n, tuple(rows))

    def relabeled(self, perm: Sequence[int]) -> "LabeledGraph":
        """Graph with vertex ``v`` renamed to ``perm[v]``."""
        return LabeledGraph.from_edges(self.n, [(perm[i], perm[j]) for i, j in self.edges()])

    def to_matrix(self) -> list[list[int]]:
        return [[self.adj[i] >> j & 1 for j in range(self.n)] for i in range(self.n)]


def hom_count(family: SubgraphFamily, graph: LabeledGraph) -> int:
    """Number of homomorphisms from ``family`` into ``graph``."""
    if family.kind == "edge":
        return 2 * graph.num_edges()
    if family.kind == "triangle":
        return 6 * graph.num_triangles()
    j = family.star_exponent
    return sum(d**j for d in graph.degrees())


def hom_density(family: SubgraphFamily, graph: LabeledGraph) -> Fraction:
    """``hom(F, G) / n**|V(F)|`` as an exact fraction."""
    return Fraction(hom_count(family, graph), graph.n**family.vertices)


def toggle_delta(family: SubgraphFamily, graph: LabeledGraph, i: int, j: int) -> int:
    """Change of ``hom(F, G)`` when the edge ``{i, j}`` is toggled; O(1) bit work."""
    if i == j:
        raise ValueError("cannot toggle a loop")
    present = graph.has_edge(i, j)
    sign = -1 if present else 1
    if family.kind == "edge":
        return 2 * sign
    if family.kind == "triangle":
        return 6 * sign * (graph.adj[i] & graph.adj[j]).bit_count()
    k = family.star_exponent
    di = graph.adj[i].bit_count()
    dj = graph.adj[j].bit_count()
    return ((di + sign) ** k - di**k) + ((dj + sign) ** k - dj**k)


def read_edge_list(path: str | Path) -> tuple[int, list[tuple[int, int]]]:
    """Parse the text format: first line ``n``, then one ``i j`` line per edge.

    No vertex cap is applied here, so samplers can load graphs beyond 64 vertices.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError(f"{path}: empty graph file")
    n = int(lines[0])
    edges = []
    for ln in lines[1:]:
        a, b = ln.split()
        edges.append((int(a), int(b)))
    return n, edges


def read_graph(path: str | Path) -> LabeledGraph:
    return LabeledGraph.from_edges(*read_edge_list(path))


def write_graph(graph: LabeledGraph, path: str | Path) -> None:
    out = [str(graph.n)] + [f"{i} {j}" for i, j in graph.edges()]
    Path(path).write_text("\n".join(out) + "\n")
