"""Simple undirected graphs, named families, products and clique numbers.

Vertices are 0-based internally; text formats and family definitions use
1-based labels (vertex ``n`` of a family is index ``n - 1`` here).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

MAX_CLIQUE_VERTICES = 30


class CapabilityError(RuntimeError):
    """Raised when an exact computation is asked for beyond its size cap."""


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a graph needs at least one vertex")
        for i, j in self.edges:
            if not (0 <= i < j < self.n):
                raise ValueError(f"bad edge {(i, j)} for a graph on {self.n} vertices")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build from 0-based pairs in any order; self-loops are rejected."""
        norm = set()
        for i, j in edges:
            if i == j:
                raise ValueError(f"self-loop at vertex {i}")
            norm.add((min(i, j), max(i, j)))
        return cls(n, frozenset(norm))

    def has_edge(self, i: int, j: int) -> bool:
        return (min(i, j), max(i, j)) in self.edges

    def adjacent_or_equal(self, i: int, j: int) -> bool:
        return i == j or self.has_edge(i, j)

    def non_edges(self) -> list[tuple[int, int]]:
        return [p for p in itertools.combinations(range(self.n), 2) if p not in self.edges]

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def minus_edge(self, i: int, j: int) -> "Graph":
        e = (min(i, j), max(i, j))
        if e not in self.edges:
            raise ValueError(f"edge {e} not present")
        return Graph(self.n, self.edges - {e})

    @property
    def m(self) -> int:
        return len(self.edges)

    def __str__(self):
        return f"Graph(n={self.n}, m={self.m})"


def path(n: int) -> Graph:
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("cycle needs n >= 3")
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def wheel(n: int) -> Graph:
    """Cycle on vertices 1..n-1 plus hub n joined to all of them."""
    if n < 4:
        raise ValueError("wheel needs n >= 4")
    rim = cycle(n - 1)
    return Graph(n, rim.edges | {(i, n - 1) for i in range(n - 1)})


def star(n: int) -> Graph:
    """Vertices 1..n-1 each joined to vertex n only (``n - 1`` edges)."""
    if n < 1:
        raise ValueError("star needs n >= 1")
    return Graph.from_edges(n, [(i, n - 1) for i in range(n - 1)])


def complete(n: int) -> Graph:
    return Graph(n, frozenset(itertools.combinations(range(n), 2)))


def empty(n: int) -> Graph:
    return Graph(n, frozenset())


FAMILIES = {
    "path": (path, 1),
    "cycle": (cycle, 3),
    "wheel": (wheel, 4),
    "star": (star, 1),
    "complete": (complete, 1),
    "empty": (empty, 1),
}


def family(kind: str, n: int) -> Graph:
    try:
        build, minimum = FAMILIES[kind]
    except KeyError:
        raise ValueError(f"unknown family {kind!r}; choose from {sorted(FAMILIES)}") from None
    if n < minimum:
        raise ValueError(f"{kind} needs n >= {minimum}, got {n}")
    return build(n)


def complement(g: Graph) -> Graph:
    return Graph(g.n, frozenset(g.non_edges()))


def strong_product(g: Graph, h: Graph) -> Graph:
    """Strong product; vertex ``(a, x)`` has index ``a * h.n + x``."""
    verts = [(a, x) for a in range(g.n) for x in range(h.n)]
    edges = []
    for (a, x), (b, y) in itertools.combinations(verts, 2):
        if g.adjacent_or_equal(a, b) and h.adjacent_or_equal(x, y):
            edges.append((a * h.n + x, b * h.n + y))
    return Graph.from_edges(g.n * h.n, edges)


def _adjacency_bits(g: Graph) -> list[int]:
    adj = [0] * g.n
    for i, j in g.edges:
        adj[i] |= 1 << j
        adj[j] |= 1 << i
    return adj


def max_clique(g: Graph) -> list[int]:
    """A maximum clique (sorted vertex list) by branch and bound.

    Candidates are ordered by a greedy colouring; the colour count bounds the
    clique size still attainable from the candidate set.
    """
    if g.n > MAX_CLIQUE_VERTICES:
        raise CapabilityError(f"exact clique search capped at {MAX_CLIQUE_VERTICES} vertices")
    adj = _adjacency_bits(g)
    best: list[int] = [0]

    def colour_order(cand: int) -> tuple[list[int], list[int]]:
        order, bounds = [], []
        colour = 0
        uncoloured = cand
        while uncoloured:
            colour += 1
            avail = uncoloured
            while avail:
                v = avail.bit_length() - 1
                avail &= ~(1 << v)
                avail &= ~adj[v]
                uncoloured &= ~(1 << v)
                order.append(v)
                bounds.append(colour)
        return order, bounds

    def expand(current: list[int], cand: int) -> None:
        order, bounds = colour_order(cand)
        for v, bound in zip(reversed(order), reversed(bounds)):
            if len(current) + bound <= len(best):
                return
            current.append(v)
            new_cand = cand & adj[v]
            if new_cand:
                expand(current, new_cand)
            elif len(current) > len(best):
                best[:] = current
            current.pop()
            cand &= ~(1 << v)

    expand([], (1 << g.n) - 1)
    return sorted(best)


def clique_number(g: Graph) -> int:
    return len(max_clique(g))


def independence_number(g: Graph) -> int:
    return clique_number(complement(g))


def isomorphism_classes(n: int) -> list[Graph]:
    """One representative per isomorphism class of graphs on ``n`` vertices.

    Brute force over edge subsets and vertex permutations, so ``n <= 5``.
    """
    if n > 5:
        raise CapabilityError("isomorphism class enumeration capped at n <= 5")
    pairs = list(itertools.combinations(range(n), 2))
    perms = list(itertools.permutations(range(n)))
    seen: set = set()
    reps = []
    for mask in range(1 << len(pairs)):
        es = [p for k, p in enumerate(pairs) if mask >> k & 1]
        canon = min(tuple(sorted((min(p[i], p[j]), max(p[i], p[j])) for i, j in es))
                    for p in perms)
        if canon not in seen:
            seen.add(canon)
            reps.append(Graph.from_edges(n, canon))
    return reps


# ---------------------------------------------------------------------------
# text formats


def read_edge_list(text: str) -> Graph:
    """Parse ``"n m"`` followed by ``m`` lines ``"i j"`` (1-based)."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty edge list")
    try:
        n, m = (int(t) for t in lines[0].split())
        pairs = [tuple(int(t) for t in ln.split()) for ln in lines[1:]]
    except ValueError as exc:
        raise ValueError(f"malformed edge list: {exc}") from None
    if len(pairs) != m or any(len(p) != 2 for p in pairs):
        raise ValueError(f"edge list header announces {m} edges, found {len(pairs)} lines")
    for i, j in pairs:
        if not (1 <= i <= n and 1 <= j <= n):
            raise ValueError(f"edge ({i}, {j}) out of range 1..{n}")
    g = Graph.from_edges(n, [(i - 1, j - 1) for i, j in pairs])
    if g.m != m:
        raise ValueError("duplicate edges in edge list")
    return g


def write_edge_list(g: Graph) -> str:
    rows = [f"{g.n} {g.m}"] + [f"{i + 1} {j + 1}" for i, j in g.sorted_edges()]
    return "\n".join(rows) + "\n"


_FAMILY_RE = re.compile(r"^([a-z]+):(\d+)$")
_ATOM_RE = re.compile(r"[a-z]+:\d+")


def _tokenize(spec: str) -> list[str]:
    tokens: list[str] = []
    i = 0
    while i < len(spec):
        c = spec[i]
        if c.isspace():
            i += 1
        elif c in "~()":
            tokens.append(c)
            i += 1
        elif c == "x" and tokens and tokens[-1] not in ("~", "(", "x"):
            tokens.append("x")
            i += 1
        else:
            m = _ATOM_RE.match(spec, i)
            if m is None:
                raise ValueError(f"cannot parse graph spec {spec!r} at position {i}")
            tokens.append(m.group(0))
            i = m.end()
    return tokens


def parse_graph_spec(spec: str) -> Graph:
    """Parse the family mini-language.

    ``path:5``, ``~G`` for the complement, ``GxH`` for the strong product
    (left associative), parentheses for grouping, and anything else is read
    as an edge-list file path.
    """
    spec = spec.strip()
    if _FAMILY_RE.match(spec) is None and Path(spec).is_file():
        return read_edge_list(Path(spec).read_text())
    tokens = _tokenize(spec)
    pos = 0

    def peek():
        return tokens[pos] if pos < len(tokens) else None

    def take():
        nonlocal pos
        tok = peek()
        pos += 1
        return tok

    def atom() -> Graph:
        tok = take()
        if tok == "~":
            return complement(atom())
        if tok == "(":
            g = product()
            if take() != ")":
                raise ValueError(f"unbalanced parentheses in {spec!r}")
            return g
        if tok is not None:
            m = _FAMILY_RE.match(tok)
            if m:
                return family(m.group(1), int(m.group(2)))
        raise ValueError(f"cannot parse graph spec {spec!r} at token {tok!r}")

    def product() -> Graph:
        g = atom()
        while peek() == "x":
            take()
            g = strong_product(g, atom())
        return g

    g = product()
    if pos != len(tokens):
        raise ValueError(f"trailing input in graph spec {spec!r}")
    return g
