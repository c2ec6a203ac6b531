"""Exact combinatorics of r-uniform hypergraphs on the vertex set 1..n.

Edges are strictly increasing tuples and a graph always iterates its edges in
colex order. Everything here is integer-exact; the numeric side lives in
:mod:`hyperlag.solver`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Iterable, Sequence

import numpy as np

Edge = tuple[int, ...]


class GraphFormatError(ValueError):
    """Raised for malformed graph documents or invalid edges."""


def colex_key(a: Sequence[int]) -> tuple[int, ...]:
    """Sort key realising colex order on sets of equal size."""
    return tuple(sorted(a, reverse=True))


def colex_compare(a: Iterable[int], b: Iterable[int]) -> int:
    """Return -1, 0 or 1 as ``a`` is before, equal to or after ``b`` in colex.

    ``a < b`` exactly when the largest element of the symmetric difference
    lies in ``b``.
    """
    a, b = set(a), set(b)
    if len(a) != len(b):
        raise ValueError(f"colex comparison needs equal sizes, got {len(a)} and {len(b)}")
    diff = a ^ b
    if not diff:
        return 0
    return -1 if max(diff) in b else 1


def colex_rank(a: Iterable[int]) -> int:
    """1-based position of the set ``a`` in the colex order of N^(r)."""
    a = sorted(a)
    if not a or a[0] < 1 or any(x == y for x, y in zip(a, a[1:])):
        raise ValueError(f"not a set of positive integers: {a}")
    return 1 + sum(comb(v - 1, k) for k, v in enumerate(a, start=1))


def colex_unrank(r: int, k: int) -> Edge:
    """The k-th r-set (1-based) in colex order."""
    if k < 1:
        raise ValueError(f"colex rank must be >= 1, got {k}")
    if r < 1:
        raise ValueError(f"uniformity must be >= 1, got {r}")
    rest = k - 1
    out = []
    for pos in range(r, 0, -1):
        # largest c with C(c, pos) <= rest
        c = pos - 1
        while comb(c + 1, pos) <= rest:
            c += 1
        out.append(c + 1)
        rest -= comb(c, pos)
    return tuple(reversed(out))


def _canonical_edge(e: Iterable[int], r: int, n: int) -> Edge:
    try:
        raw = [int(v) for v in e]
    except (TypeError, ValueError):
        raise GraphFormatError(f"edge {e!r} is not a list of integers") from None
    if len(raw) != r:
        raise GraphFormatError(f"edge {raw} has {len(raw)} vertices, expected {r}")
    if len(set(raw)) != r:
        raise GraphFormatError(f"edge {raw} repeats a vertex")
    for v in raw:
        if not 1 <= v <= n:
            raise GraphFormatError(f"edge {raw}: vertex {v} out of range 1..{n}")
    return tuple(sorted(raw))


@dataclass(frozen=True)
class RUniformGraph:
    """An r-graph on vertices 1..n. Immutable; edges kept colex-sorted."""

    r: int
    n: int
    edges: tuple[Edge, ...] = field(default=())

    def __post_init__(self):
        if self.r < 1:
            raise GraphFormatError(f"uniformity must be positive, got {self.r}")
        if self.n < 0:
            raise GraphFormatError(f"vertex count must be nonnegative, got {self.n}")
        canon = {_canonical_edge(e, self.r, self.n) for e in self.edges}
        object.__setattr__(self, "edges", tuple(sorted(canon, key=colex_key)))

    def __len__(self):
        return len(self.edges)

    def __iter__(self):
        return iter(self.edges)

    def __contains__(self, e):
        return tuple(sorted(e)) in self.edge_set

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    @cached_property
    def edge_array(self) -> np.ndarray:
        """Zero-based (m, r) index array for vectorised evaluation."""
        if not self.edges:
            return np.zeros((0, self.r), dtype=np.intp)
        return np.asarray(self.edges, dtype=np.intp) - 1

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    def used_vertices(self) -> set[int]:
        return {v for e in self.edges for v in e}

    def with_edges(self, extra: Iterable[Iterable[int]], n: int | None = None) -> "RUniformGraph":
        return RUniformGraph(self.r, self.n if n is None else n, self.edges + tuple(tuple(e) for e in extra))

    def to_document(self) -> dict:
        return {"r": self.r, "n": self.n, "edges": [list(e) for e in self.edges]}

    def dumps(self) -> str:
        return json.dumps(self.to_document())

    def __repr__(self):
        shown = " ".join("".join(map(str, e)) if self.n < 10 else "-".join(map(str, e)) for e in self.edges[:12])
        more = " ..." if len(self.edges) > 12 else ""
        return f"RUniformGraph(r={self.r}, n={self.n}, m={len(self.edges)}: {shown}{more})"


def load_graph(doc: str | bytes | dict) -> RUniformGraph:
    """Parse a graph document ``{"r": int, "n": int, "edges": [[...], ...]}``."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise GraphFormatError("graph document must be a JSON object")
    missing = [k for k in ("r", "n", "edges") if k not in doc]
    if missing:
        raise GraphFormatError(f"graph document lacks {', '.join(missing)}")
    r, n, edges = doc["r"], doc["n"], doc["edges"]
    if not isinstance(r, int) or isinstance(r, bool) or r < 1:
        raise GraphFormatError(f"'r' must be a positive integer, got {r!r}")
    if not isinstance(n, int) or isinstance(n, bool) or n < 0:
        raise GraphFormatError(f"'n' must be a nonnegative integer, got {n!r}")
    if not isinstance(edges, list):
        raise GraphFormatError("'edges' must be a list")
    for e in edges:
        if not isinstance(e, (list, tuple)):
            raise GraphFormatError(f"edge {e!r} is not a list")
    return RUniformGraph(r, n, tuple(tuple(e) for e in edges))


def dump_graph(g: RUniformGraph) -> str:
    return g.dumps()


def complete_graph(t: int, r: int) -> RUniformGraph:
    """[t]^(r)."""
    if t < r:
        raise ValueError(f"complete graph needs t >= r, got t={t}, r={r}")
    return RUniformGraph(r, t, tuple(combinations(range(1, t + 1), r)))


def colex_initial_segment(r: int, m: int) -> RUniformGraph:
    """C_{r,m}: the first m r-sets in colex order, on vertices 1..max vertex."""
    if m < 1:
        raise ValueError(f"edge count must be >= 1, got {m}")
    edges = [colex_unrank(r, k) for k in range(1, m + 1)]
    return RUniformGraph(r, edges[-1][-1], tuple(edges))


def link(g: RUniformGraph, s: Iterable[int]) -> set[Edge]:
    """E_S = {T : T disjoint from S, T u S in E} for |S| in {1, 2}."""
    s = tuple(sorted(set(s)))
    if len(s) not in (1, 2):
        raise ValueError(f"link is defined for one or two vertices, got {s}")
    for v in s:
        if not 1 <= v <= g.n:
            raise ValueError(f"vertex {v} out of range 1..{g.n}")
    return _link(g, s)


def _link(g: RUniformGraph, s: tuple[int, ...]) -> set[Edge]:
    ss = set(s)
    return {tuple(v for v in e if v not in ss) for e in g.edges if ss.issubset(e)}


def complement_link(g: RUniformGraph, s: Iterable[int]) -> set[Edge]:
    """E^c_S: the (r-|S|)-sets over V minus S whose union with S is a non-edge."""
    s = tuple(sorted(set(s)))
    present = link(g, s)
    others = [v for v in g.vertices if v not in s]
    return {t for t in combinations(others, g.r - len(s)) if t not in present}


def link_difference(g: RUniformGraph, i: int, j: int) -> set[Edge]:
    """E_{i\\j} = E_i intersected with E^c_j."""
    if i == j:
        raise ValueError("link difference needs distinct vertices")
    for v in (i, j):
        if not 1 <= v <= g.n:
            raise ValueError(f"vertex {v} out of range 1..{g.n}")
    es = g.edge_set
    out = set()
    for a in _link(g, (i,)):
        if j in a:
            continue
        if tuple(sorted(a + (j,))) not in es:
            out.add(a)
    return out


def lower_covers(e: Edge) -> list[Edge]:
    """Sets obtained by lowering one coordinate by one, staying strictly increasing."""
    out = []
    for k, v in enumerate(e):
        floor = e[k - 1] if k else 0
        if v - 1 > floor:
            out.append(e[:k] + (v - 1,) + e[k + 1:])
    return out


def dominated_by(a: Edge, b: Edge) -> bool:
    """Coordinatewise a <= b (the shifting partial order)."""
    return all(x <= y for x, y in zip(a, b))


def is_left_compressed(g: RUniformGraph) -> bool:
    es = g.edge_set
    for e in g.edges:
        members = set(e)
        for j in e:
            for i in range(1, j):
                if i in members:
                    continue
                if tuple(sorted(members - {j} | {i})) not in es:
                    return False
    return True


def compress(g: RUniformGraph) -> RUniformGraph:
    """Apply the (i, j) shifts, i < j in lexicographic order, until nothing moves."""
    edges = set(g.edges)
    changed = True
    while changed:
        changed = False
        for i in range(1, g.n + 1):
            for j in range(i + 1, g.n + 1):
                moved = []
                for e in edges:
                    if j in e and i not in e:
                        f = tuple(sorted((set(e) - {j}) | {i}))
                        if f not in edges:
                            moved.append((e, f))
                if moved:
                    changed = True
                    for e, f in moved:
                        edges.discard(e)
                        edges.add(f)
    return RUniformGraph(g.r, g.n, tuple(edges))


def _extends_clique(es: frozenset, r: int, clique: list[int], v: int) -> bool:
    # every r-set containing v inside clique + {v} must be an edge
    return all(tuple(sorted(t + (v,))) in es for t in combinations(clique, r - 1))


def cliques(g: RUniformGraph, min_order: int | None = None):
    """Yield maximal cliques (as sorted vertex tuples) of order >= min_order."""
    r, es = g.r, g.edge_set
    lo = r if min_order is None else min_order

    def extend(clique, cand):
        grew = False
        for idx, v in enumerate(cand):
            if _extends_clique(es, r, clique, v):
                grew = True
                yield from extend(clique + [v], cand[idx + 1:])
        if not grew and len(clique) >= lo and _is_maximal(clique):
            yield tuple(clique)

    def _is_maximal(clique):
        return not any(_extends_clique(es, r, clique, v) for v in g.vertices if v not in clique)

    yield from extend([], list(g.vertices))


def max_clique_order(g: RUniformGraph) -> int:
    """Order of the largest clique; r - 1 for an edgeless graph."""
    r, es = g.r, g.edge_set
    if not es:
        return r - 1
    verts = sorted(g.used_vertices())
    best = r - 1

    def grow(clique, cand):
        nonlocal best
        if len(clique) > best and len(clique) >= r:
            best = len(clique)
        for idx, v in enumerate(cand):
            if len(clique) + len(cand) - idx <= best:
                return
            if _extends_clique(es, r, clique, v):
                grow(clique + [v], cand[idx + 1:])

    grow([], verts)
    return best


def max_clique_order_compressed(g: RUniformGraph) -> int:
    """Clique order of a left-compressed graph: largest t with {t-r+1..t} an edge."""
    r, es = g.r, g.edge_set
    best = r - 1
    for t in range(r, g.n + 1):
        if tuple(range(t - r + 1, t + 1)) in es:
            best = t
    return best
