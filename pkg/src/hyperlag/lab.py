"""Exhaustive checks over left-compressed r-graphs.

Left-compressed graphs on [l] are exactly the down-sets of the shifting order
(coordinatewise comparison of sorted r-sets). Colex order is a linear extension
of that order, so listing a down-set's members by colex rank gives a chain of
down-sets; generating members in increasing rank, each with all its lower covers
already present, reaches every down-set exactly once.
"""
from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Iterable, Iterator, Sequence

import numpy as np

from .hypergraph import (
    RUniformGraph,
    colex_initial_segment,
    colex_key,
    is_left_compressed,
    link,
    lower_covers,
    max_clique_order,
    max_clique_order_compressed,
)
from .solver import LagrangianEstimate, SolverConfig, complete_lagrangian, evaluate, maximize

WORKERS_ENV = "HYPERLAG_WORKERS"

# margin policy
EQUAL_TOL = 1e-6
STRICT_MARGIN = 1e-6
KKT_GATE = 1e-8

HOLDS, COUNTEREXAMPLE, INCONCLUSIVE = "holds", "counterexample", "inconclusive"


class ScaleError(ValueError):
    """Request is outside the sizes the exhaustive checks are built for."""


@dataclass(frozen=True)
class EnumerationSpec:
    r: int
    l: int
    m: tuple[int, ...]
    clique_filter: str = "ignore"  # require / forbid / ignore a clique of order clique_order
    clique_order: int | None = None  # defaults to l - 1

    def __post_init__(self):
        m = (self.m,) if isinstance(self.m, int) else tuple(self.m)
        object.__setattr__(self, "m", m)
        if self.clique_order is None:
            object.__setattr__(self, "clique_order", self.l - 1)
        if self.clique_filter not in ("require", "forbid", "ignore"):
            raise ValueError(f"unknown clique filter {self.clique_filter!r}")
        if self.r < 2 or self.l < self.r or not m or min(m) < 0:
            raise ValueError(f"bad enumeration parameters r={self.r}, l={self.l}, m={m}")


def _check_scale(spec: EnumerationSpec):
    r, l, top = spec.r, spec.l, max(spec.m)
    seeded = comb(spec.clique_order, r) if spec.clique_filter == "require" else 0
    ok = (
        (r == 2 and l <= 16)
        or (r == 3 and l <= 7)
        or (r == 4 and l <= 7 and top <= 20)
        or (r in (3, 4) and l <= 16 and top - seeded <= 12)
    )
    if not ok:
        raise ScaleError(f"enumeration r={r}, l={l}, m<={top} ({spec.clique_filter} clique) is beyond desk scale")


def enumerate_left_compressed(spec: EnumerationSpec) -> Iterator[RUniformGraph]:
    """Every left-compressed r-graph on [l] with an edge count in ``spec.m``, once each."""
    _check_scale(spec)
    r, l = spec.r, spec.l
    universe = sorted(combinations(range(1, l + 1), r), key=colex_key)
    index = {e: i for i, e in enumerate(universe)}
    covers = [[index[c] for c in lower_covers(e)] for e in universe]
    targets = set(spec.m)
    top = max(targets)
    clique_size = comb(spec.clique_order, r)
    # for down-sets, [l-1]^(r) is contained iff its colex-last member is
    clique_top = clique_size - 1
    banned = clique_top if spec.clique_filter == "forbid" else None

    inside = [False] * len(universe)
    chosen: list[int] = []
    if spec.clique_filter == "require":
        if clique_size > top:
            return
        for i in range(clique_size):
            inside[i] = True
            chosen.append(i)

    def walk(last):
        if len(chosen) in targets:
            yield RUniformGraph(r, l, tuple(universe[i] for i in chosen))
        if len(chosen) == top:
            return
        for j in range(last + 1, len(universe)):
            if j == banned or not all(inside[c] for c in covers[j]):
                continue
            inside[j] = True
            chosen.append(j)
            yield from walk(j)
            chosen.pop()
            inside[j] = False

    yield from walk(len(chosen) - 1)


def contains_clique(g: RUniformGraph, order: int) -> bool:
    return all(e in g.edge_set for e in combinations(range(1, order + 1), g.r))


def trimmed(g: RUniformGraph) -> RUniformGraph:
    """Same edges on 1..(largest used vertex); isolated top vertices carry no weight."""
    used = g.used_vertices()
    return RUniformGraph(g.r, max(used) if used else 0, g.edges)


@dataclass
class ConjectureVerdict:
    name: str
    r: int
    l: int | None
    m: int | tuple[int, ...] | None
    verdict: str
    margin: float | None
    graphs_examined: int
    witness: RUniformGraph | None = None
    witness_weights: list | None = None
    details: dict = field(default_factory=dict)
    cells: list["ConjectureVerdict"] = field(default_factory=list)

    def to_json(self) -> dict:
        out = {
            "check": self.name,
            "r": self.r,
            "l": self.l,
            "m": list(self.m) if isinstance(self.m, tuple) else self.m,
            "verdict": self.verdict,
            "margin": self.margin,
            "graphs_examined": self.graphs_examined,
        }
        if self.witness is not None:
            out["witness"] = self.witness.to_document()
            out["witness_weights"] = [str(w) for w in self.witness_weights or []]
        if self.details:
            out["details"] = self.details
        return out

    def rows(self) -> list[dict]:
        """One JSON object per (r, l, m) cell."""
        return [c.to_json() for c in self.cells] if self.cells else [self.to_json()]


def merge_verdicts(verdicts: Sequence[str]) -> str:
    if COUNTEREXAMPLE in verdicts:
        return COUNTEREXAMPLE
    if INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    return HOLDS


def _aggregate(name, r, l, cells: list[ConjectureVerdict], worst) -> ConjectureVerdict:
    margins = [c.margin for c in cells if c.margin is not None]
    first_bad = next((c for c in cells if c.witness is not None), None)
    return ConjectureVerdict(
        name=name,
        r=r,
        l=l,
        m=tuple(c.m for c in cells),
        verdict=merge_verdicts([c.verdict for c in cells]),
        margin=worst(margins) if margins else None,
        graphs_examined=sum(c.graphs_examined for c in cells),
        witness=first_bad.witness if first_bad else None,
        witness_weights=first_bad.witness_weights if first_bad else None,
        cells=cells,
    )


def _solve_one(args):
    g, cfg = args
    return maximize(g, cfg)


def solve_many(graphs: Sequence[RUniformGraph], cfg: SolverConfig | None = None,
               workers: int | None = None) -> list[LagrangianEstimate]:
    """maximize over many graphs, optionally in worker processes; order preserved."""
    cfg = cfg or SolverConfig()
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1"))
    jobs = [(trimmed(g), cfg) for g in graphs]
    if workers <= 1 or len(jobs) < 2:
        return [_solve_one(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_solve_one, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def exact_weighting(weights: Iterable[float]) -> list[Fraction]:
    """Float weights as exact rationals rescaled to sum exactly to one."""
    fr = [Fraction(float(w)) for w in weights]
    total = sum(fr)
    return [w / total for w in fr]


def _certify_above(g: RUniformGraph, weights, bench: Fraction, strict: bool) -> list[Fraction] | None:
    x = exact_weighting(weights)
    val = evaluate(g, x)
    return x if (val > bench if strict else val >= bench) else None


def judge_equal(g: RUniformGraph, est: LagrangianEstimate, bench_t: int) -> tuple[str, float, list | None]:
    """Is lambda(G) = lambda([t]^(r))? Returns (verdict, |deviation|, rational witness)."""
    bench = complete_lagrangian(bench_t, g.r)
    gap = est.value - bench
    if abs(gap) <= EQUAL_TOL and est.kkt.max_residual <= KKT_GATE:
        return HOLDS, abs(gap), None
    if gap > EQUAL_TOL:
        tg = trimmed(g)
        w = _certify_above(tg, est.weights, complete_lagrangian(bench_t, g.r, exact=True), strict=True)
        if w is not None:
            return COUNTEREXAMPLE, abs(gap), w
    return INCONCLUSIVE, abs(gap), None


def judge_below(g: RUniformGraph, est: LagrangianEstimate, bench_t: int) -> tuple[str, float, list | None]:
    """Is lambda(G) < lambda([t]^(r))? Returns (verdict, benchmark - value, rational witness)."""
    bench = complete_lagrangian(bench_t, g.r)
    gap = bench - est.value
    if gap > STRICT_MARGIN and est.kkt.max_residual <= KKT_GATE:
        return HOLDS, gap, None
    tg = trimmed(g)
    w = _certify_above(tg, est.weights, complete_lagrangian(bench_t, g.r, exact=True), strict=False)
    if w is not None:
        return COUNTEREXAMPLE, gap, w
    return INCONCLUSIVE, gap, None


def conjecture_range(r: int, l: int) -> range:
    lo = comb(l - 1, r)
    return range(lo, lo + comb(l - 2, r - 1) + 1)


def _m_values(r, l, m_range) -> list[int]:
    allowed = conjecture_range(r, l)
    ms = list(allowed) if m_range is None else ([m_range] if isinstance(m_range, int) else list(m_range))
    bad = [m for m in ms if m not in allowed]
    if bad:
        raise ValueError(f"m={bad} outside [{allowed.start}, {allowed.stop - 1}] for r={r}, l={l}")
    return ms


def conjecture1_check(r: int, l: int, m_range=None, cfg: SolverConfig | None = None,
                      workers: int | None = None) -> ConjectureVerdict:
    """Graphs with m edges containing [l-1]^(r) have lambda = lambda([l-1]^(r)).

    Checked on every left-compressed graph on [l]; margin is the largest
    deviation from the clique value.
    """
    cells = []
    for m in _m_values(r, l, m_range):
        graphs = list(enumerate_left_compressed(EnumerationSpec(r, l, m, "require")))
        ests = solve_many(graphs, cfg, workers)
        cell = ConjectureVerdict("conj1", r, l, m, HOLDS, 0.0, len(graphs))
        verdicts = []
        for g, est in zip(graphs, ests):
            v, dev, w = judge_equal(g, est, l - 1)
            verdicts.append(v)
            cell.margin = max(cell.margin, dev)
            if v == COUNTEREXAMPLE and cell.witness is None:
                cell.witness, cell.witness_weights = trimmed(g), w
        cell.verdict = merge_verdicts(verdicts)
        cells.append(cell)
    return _aggregate("conj1", r, l, cells, max)


def conjecture2_check(l: int, m_range=None, cfg: SolverConfig | None = None,
                      workers: int | None = None) -> ConjectureVerdict:
    """Clique-free 3-graphs with m edges have lambda < lambda([l-1]^(3)).

    Margin is the smallest gap below the clique value. Each cell also records
    the deficiency |[l-1]^(3) minus E| against l - 2 for m inside the narrower
    range where that bound is claimed.
    """
    r = 3
    if l > 7:
        raise ScaleError("conjecture 2 check supports l <= 7")
    narrow_top = comb(l - 1, 3) + comb(l - 2, 2) - (l - 2)
    clique = set(combinations(range(1, l), 3))
    cells = []
    for m in _m_values(r, l, m_range):
        graphs = list(enumerate_left_compressed(EnumerationSpec(r, l, m, "forbid")))
        ests = solve_many(graphs, cfg, workers)
        cell = ConjectureVerdict("conj2", r, l, m, HOLDS, None, len(graphs))
        verdicts, deficits = [], []
        for g, est in zip(graphs, ests):
            v, gap, w = judge_below(g, est, l - 1)
            verdicts.append(v)
            cell.margin = gap if cell.margin is None else min(cell.margin, gap)
            deficits.append(len(clique - g.edge_set))
            if v == COUNTEREXAMPLE and cell.witness is None:
                cell.witness, cell.witness_weights = trimmed(g), w
        cell.verdict = merge_verdicts(verdicts)
        if m <= narrow_top and deficits:
            cell.details = {
                "deficiency_max": max(deficits),
                "deficiency_bound": l - 2,
                "graphs_within_bound": sum(d <= l - 2 for d in deficits),
            }
        cells.append(cell)
    return _aggregate("conj2", r, l, cells, min)


def frankl_furedi_check(r: int, m: int, vertex_cap: int | None = None, cfg: SolverConfig | None = None,
                        workers: int | None = None) -> ConjectureVerdict:
    """The colex initial segment C_{r,m} has the largest Lagrangian among m-edge r-graphs.

    Without ``vertex_cap`` every left-compressed graph is covered: one using
    vertex v contains {1..r-1, w} for r <= w <= v, so v <= m + r - 1. With a
    cap this computes lambda(l, r, m) over graphs on [vertex_cap].
    Margin is lambda(C_{r,m}) minus the best competitor.
    """
    cap = m + r - 1 if vertex_cap is None else vertex_cap
    if vertex_cap is None and not (r == 2 and m <= 16 or r == 3 and m <= 12):
        raise ScaleError("unrestricted Frankl-Furedi check supports r = 2 with m <= 16 or r = 3 with m <= 12")
    if vertex_cap is not None and vertex_cap > 7:
        raise ScaleError("vertex-capped Frankl-Furedi check supports vertex_cap <= 7")
    if m > comb(cap, r):
        raise ValueError(f"no r-graph on {cap} vertices has {m} edges")
    graphs = list(enumerate_left_compressed(EnumerationSpec(r, cap, m)))
    colex = colex_initial_segment(r, m)
    ests = solve_many([colex] + graphs, cfg, workers)
    ref, rest = ests[0], ests[1:]
    best = int(np.argmax([e.value for e in rest]))
    margin = ref.value - rest[best].value
    verdict = HOLDS if margin >= -EQUAL_TOL else INCONCLUSIVE
    # lambda(C_{r,m}) is only bounded from below, so a larger competitor is never certified
    return ConjectureVerdict(
        "ff", r, cap, m, verdict, margin, len(graphs),
        details={
            "colex_value": ref.value,
            "best_value": rest[best].value,
            "best_graph": trimmed(graphs[best]).to_document(),
        },
    )


def _require_on_l(g: RUniformGraph, l: int):
    if g.n != l:
        raise ValueError(f"graph must live on [{l}], it has n={g.n}")
    if l < g.r + 2:
        raise ValueError(f"need l >= r + 2, got l={l}, r={g.r}")
    if not is_left_compressed(g):
        raise ValueError("graph is not left-compressed")


@dataclass
class TheoremCheck:
    hypothesis: bool
    has_clique: bool
    verdict: str | None  # None when the hypothesis fails
    deviation: float | None
    estimate: LagrangianEstimate | None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "hypothesis": self.hypothesis,
            "has_clique": self.has_clique,
            "verdict": self.verdict,
            "margin": self.deviation,
            **self.details,
        }
        if self.estimate is not None:
            out["lambda"] = self.estimate.value
        return out


def _conclusion(g: RUniformGraph, l: int, cfg) -> tuple[bool, str, float, LagrangianEstimate]:
    clique = contains_clique(g, l - 1)
    est = maximize(trimmed(g), cfg)
    v, dev, _ = (judge_equal if clique else judge_below)(g, est, l - 1)
    return clique, v, dev, est


def theorem_2a_hypothesis_check(g: RUniformGraph, l: int, cfg: SolverConfig | None = None) -> TheoremCheck:
    """|[l-2]^(r-1) minus E_l| >= 2^(r-3) |E_{(l-1)l}|, then lambda vs lambda([l-1]^(r))."""
    _require_on_l(g, l)
    r = g.r
    el = link(g, (l,))
    lhs = sum(1 for a in combinations(range(1, l - 1), r - 1) if a not in el)
    pair = len(link(g, (l - 1, l)))
    rhs = 2 ** (r - 3) * pair
    details = {"free_targets": lhs, "pair_link_size": pair, "required": rhs}
    if lhs < rhs:
        return TheoremCheck(False, contains_clique(g, l - 1), None, None, None, details)
    clique, v, dev, est = _conclusion(g, l, cfg)
    return TheoremCheck(True, clique, v, dev, est, details)


@dataclass
class MatchingCertificate:
    exists: bool
    pairs: list[tuple[tuple[int, ...], tuple[int, ...]]]
    sources: list[tuple[int, ...]]
    targets: list[tuple[int, ...]]

    def to_json(self) -> dict:
        return {
            "exists": self.exists,
            "pairs": [[list(a), list(b)] for a, b in self.pairs],
            "sources": len(self.sources),
            "targets": len(self.targets),
        }


def compatible(source: Sequence[int], target: Sequence[int]) -> bool:
    """j_k <= i_{k+1} for 1 <= k <= r-3 (i = sorted source, j = sorted target)."""
    i, j = sorted(source), sorted(target)
    return all(j[k - 1] <= i[k] for k in range(1, len(i)))


def max_bipartite_matching(adj: list[list[int]], n_right: int) -> list[int]:
    """Augmenting-path maximum matching; returns match_left[u] = v or -1."""
    match_right = [-1] * n_right

    def augment(u, seen):
        for v in adj[u]:
            if seen[v]:
                continue
            seen[v] = True
            if match_right[v] < 0 or augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    for u in range(len(adj)):
        augment(u, [False] * n_right)
    match_left = [-1] * len(adj)
    for v, u in enumerate(match_right):
        if u >= 0:
            match_left[u] = v
    return match_left


def theorem3_matching(g: RUniformGraph, l: int) -> MatchingCertificate:
    """Injection from E_{(l-1)l} into [l-2]^(r-1) minus E_l under the index constraint."""
    _require_on_l(g, l)
    r = g.r
    sources = sorted(link(g, (l - 1, l)), key=colex_key)
    el = link(g, (l,))
    targets = [a for a in sorted(combinations(range(1, l - 1), r - 1), key=colex_key) if a not in el]
    adj = [[t for t, b in enumerate(targets) if compatible(a, b)] for a in sources]
    match = max_bipartite_matching(adj, len(targets))
    exists = all(v >= 0 for v in match)
    pairs = [(sources[u], targets[v]) for u, v in enumerate(match) if v >= 0] if exists else []
    return MatchingCertificate(exists, pairs, sources, targets)


def verify_certificate(g: RUniformGraph, l: int, cert: MatchingCertificate) -> bool:
    """Recheck a certificate from scratch: total, injective, in range, constrained."""
    if not cert.exists:
        return False
    r = g.r
    src = link(g, (l - 1, l))
    el = link(g, (l,))
    got = [a for a, _ in cert.pairs]
    imgs = [b for _, b in cert.pairs]
    if sorted(got) != sorted(src) or len(set(imgs)) != len(imgs):
        return False
    for a, b in cert.pairs:
        if len(b) != r - 1 or max(b, default=0) > l - 2 or tuple(sorted(b)) in el:
            return False
        if not compatible(a, b):
            return False
    return True


def theorem3_check(g: RUniformGraph, l: int, cfg: SolverConfig | None = None) -> TheoremCheck:
    cert = theorem3_matching(g, l)
    details = {"certificate": cert.to_json()}
    if not cert.exists:
        return TheoremCheck(False, contains_clique(g, l - 1), None, None, None, details)
    clique, v, dev, est = _conclusion(g, l, cfg)
    return TheoremCheck(True, clique, v, dev, est, details)


def theorem39_bound(r: int, l: int) -> int:
    return comb(l - 1, r) + 2 * (l - r)


def theorem39_check(r: int, l: int, sample_budget: int | None = None, seed: int = 42,
                    vertex_cap: int | None = None, cfg: SolverConfig | None = None,
                    workers: int | None = None) -> ConjectureVerdict:
    """m <= C(l-1, r) + 2(l-r) with an (l-1)-clique forces lambda = lambda([l-1]^(r)).

    Vertices are not limited by the statement; every left-compressed instance
    fits on 3l - 2r - 1 vertices, which is the default cap.
    """
    if l < r + 2:
        raise ValueError(f"need l >= r + 2, got l={l}, r={r}")
    if 2 * (l - r) > comb(l - 2, r - 1):
        raise ValueError(
            f"(r, l) = ({r}, {l}) excluded: 2(l-r) = {2 * (l - r)} exceeds C(l-2, r-1) = {comb(l - 2, r - 1)}"
        )
    cap = 3 * l - 2 * r - 1 if vertex_cap is None else vertex_cap
    top = theorem39_bound(r, l)
    ms = tuple(range(comb(l - 1, r), top + 1))
    graphs = list(enumerate_left_compressed(EnumerationSpec(r, cap, ms, "require", clique_order=l - 1)))
    total = len(graphs)
    if sample_budget is not None and total > sample_budget:
        graphs = random.Random(seed).sample(graphs, sample_budget)
        graphs.sort(key=lambda g: (len(g), [colex_key(e) for e in g.edges]))
    ests = solve_many(graphs, cfg, workers)
    cells = []
    for m in ms:
        sel = [(g, e) for g, e in zip(graphs, ests) if len(g) == m]
        cell = ConjectureVerdict("thm39", r, l, m, HOLDS, 0.0, len(sel))
        verdicts = []
        for g, est in sel:
            v, dev, w = judge_equal(g, est, l - 1)
            verdicts.append(v)
            cell.margin = max(cell.margin, dev)
            if v == COUNTEREXAMPLE and cell.witness is None:
                cell.witness, cell.witness_weights = trimmed(g), w
        cell.verdict = merge_verdicts(verdicts)
        cells.append(cell)
    out = _aggregate("thm39", r, l, cells, max)
    out.details = {"vertex_cap": cap, "population": total, "sampled": len(graphs) < total}
    return out


def remark_graph(r: int, l: int) -> RUniformGraph:
    """[l-1]^(r) + {A + l : A in [l-2]^(r-1)} + {1..(r-2)(l-1)l}."""
    base = list(combinations(range(1, l), r))
    star = [a + (l,) for a in combinations(range(1, l - 1), r - 1)]
    last = tuple(range(1, r - 1)) + (l - 1, l)
    return RUniformGraph(r, l, tuple(base + star + [last]))


def remark_counterexample(r: int, l: int):
    """One edge past the conjectured range lifts lambda above lambda([l-1]^(r)).

    Returns (G, x, lambda(G, x), lambda([l-1]^(r))) in exact rationals, with
    x = 1/(l-1) on 1..l-2 and 1/(2(l-1)) on l-1 and l.
    """
    if l < r + 2:
        raise ValueError(f"need l >= r + 2, got l={l}, r={r}")
    g = remark_graph(r, l)
    x = [Fraction(1, l - 1)] * (l - 2) + [Fraction(1, 2 * (l - 1))] * 2
    val = evaluate(g, x)
    bench = complete_lagrangian(l - 1, r, exact=True)
    if not val > bench:
        raise ArithmeticError(f"weighting gives {val} <= {bench} for r={r}, l={l}")
    return g, x, val, bench


def clique_filter_agrees(g: RUniformGraph, l: int) -> bool:
    """Top-edge clique test equals the backtracking clique order on a compressed graph."""
    return (max_clique_order_compressed(g) >= l - 1) == (max_clique_order(g) >= l - 1) == contains_clique(g, l - 1)

