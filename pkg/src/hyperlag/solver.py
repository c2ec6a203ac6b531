"""Lagrangians of r-graphs: evaluation, derivatives and maximisation on the simplex.

The maximiser is a multiplicative (Baum-Eagon) ascent run from many starts in one
batch, followed by a Newton solve of the first-order system on the support and a
support-shrinking pass. Everything it returns is attained: ``value`` is the
polynomial evaluated at ``weights``, so it is always a lower bound on the
Lagrangian.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np
from numba import njit

from .hypergraph import RUniformGraph, cliques, is_left_compressed, link, link_difference


@dataclass(frozen=True)
class SolverConfig:
    restarts: int = 64
    max_iterations: int = 20000
    convergence_tol: float = 1e-14
    support_threshold: float = 1e-9
    seed: int = 42

    def __post_init__(self):
        if self.restarts < 0 or self.max_iterations < 1:
            raise ValueError("restarts must be >= 0 and max_iterations >= 1")
        if self.convergence_tol <= 0 or self.support_threshold <= 0:
            raise ValueError("tolerances must be positive")


@dataclass(frozen=True)
class SimplexWeighting:
    """A point of the standard simplex; ``sum_deviation`` records |sum - 1|."""

    weights: np.ndarray
    sum_deviation: float = 0.0

    @classmethod
    def normalized(cls, raw: Sequence[float]) -> "SimplexWeighting":
        w = np.asarray(raw, dtype=float)
        if w.ndim != 1 or np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be a finite nonnegative vector")
        total = w.sum()
        if total <= 0:
            raise ValueError("weights sum to zero")
        w = w / total
        return cls(w, abs(float(w.sum()) - 1.0))

    @classmethod
    def uniform(cls, n: int, support: Sequence[int] | None = None) -> "SimplexWeighting":
        w = np.zeros(n)
        idx = np.arange(n) if support is None else np.asarray(support, dtype=np.intp) - 1
        w[idx] = 1.0
        return cls.normalized(w)

    def __len__(self):
        return len(self.weights)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights, dtype=dtype)


@dataclass
class KktReport:
    link_values: np.ndarray
    support: tuple[int, ...]
    max_residual: float
    boundary_excess: float  # max over off-support j of link_j - r*lambda; > 0 means not a local max
    pair_coverage_ok: bool
    monotone_ok: bool | None  # None when the graph is not left-compressed


@dataclass
class LagrangianEstimate:
    value: float
    weights: np.ndarray
    support: tuple[int, ...]
    iterations: int
    converged: bool
    kkt: KktReport
    restarts_used: int = 0

    @property
    def weighting(self) -> SimplexWeighting:
        return SimplexWeighting(self.weights, abs(float(self.weights.sum()) - 1.0))

    def to_json(self) -> dict:
        return {
            "value": float(self.value),
            "weights": [float(v) for v in self.weights],
            "support": list(self.support),
            "kkt_residual": float(self.kkt.max_residual),
            "converged": bool(self.converged),
            "restarts_used": int(self.restarts_used),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _weights(g: RUniformGraph, x) -> np.ndarray | list:
    if isinstance(x, SimplexWeighting):
        x = x.weights
    if len(x) != g.n:
        raise ValueError(f"weighting has dimension {len(x)}, graph has {g.n} vertices")
    return x


def _is_exact(x) -> bool:
    return not isinstance(x, np.ndarray) and all(isinstance(v, (int, Fraction)) for v in x)


def family_value(family, x) -> float | Fraction:
    """Sum over sets A in ``family`` of prod_{a in A} x_a (1-based vertices)."""
    total = 0
    for a in family:
        p = 1
        for v in a:
            p *= x[v - 1]
        total += p
    return total


def evaluate(g: RUniformGraph, x) -> float | Fraction:
    """lambda(G, x). Exact when every weight is an int or Fraction."""
    x = _weights(g, x)
    if _is_exact(x):
        return family_value(g.edges, x)
    if not g.edges:
        return 0.0
    xa = np.asarray(x, dtype=float)
    return float(np.prod(xa[g.edge_array], axis=1).sum())


@njit(cache=True)
def _grad_into(x, E, out):
    out[:] = 0.0
    m, r = E.shape
    for e in range(m):
        for k in range(r):
            p = 1.0
            for q in range(r):
                if q != k:
                    p *= x[E[e, q]]
            out[E[e, k]] += p


@njit(cache=True)
def _value(x, E):
    m, r = E.shape
    total = 0.0
    for e in range(m):
        p = 1.0
        for q in range(r):
            p *= x[E[e, q]]
        total += p
    return total


@njit(cache=True)
def _ascent_kernel(X, E, max_iterations, tol):
    """Growth-transform ascent on each row of X in place; rows are independent."""
    rows, n = X.shape
    r = E.shape[1]
    lam = np.zeros(rows)
    iters = np.zeros(rows, dtype=np.int64)
    done = np.zeros(rows, dtype=np.bool_)
    g = np.empty(n)
    y = np.empty(n)
    for row in range(rows):
        x = X[row]
        cur = _value(x, E)
        lam[row] = cur
        if cur <= 0.0:
            done[row] = True
            continue
        for it in range(max_iterations):
            _grad_into(x, E, g)
            total = 0.0
            for i in range(n):
                y[i] = x[i] * g[i] / (r * cur)
                total += y[i]
            for i in range(n):
                y[i] /= total
            new = _value(y, E)
            iters[row] = it + 1
            # monotone in exact arithmetic; a drop means roundoff has taken over
            if new < cur:
                done[row] = True
                break
            x[:] = y
            gain = new - cur
            cur = new
            if gain < tol:
                done[row] = True
                break
        lam[row] = cur
    return lam, iters, done


def link_values(g: RUniformGraph, x):
    """Vector of lambda(E_i, x), i = 1..n: the gradient of lambda(G, .) at x."""
    x = _weights(g, x)
    if _is_exact(x):
        out = [Fraction(0)] * g.n
        for e in g.edges:
            for k, v in enumerate(e):
                p = Fraction(1)
                for u in e[:k] + e[k + 1:]:
                    p *= x[u - 1]
                out[v - 1] += p
        return out
    out = np.zeros(g.n)
    if g.edges:
        _grad_into(np.asarray(x, dtype=float), g.edge_array, out)
    return out


def hessian(g: RUniformGraph, x) -> np.ndarray:
    """H[i, j] = lambda(E_ij, x) for i != j; zero diagonal (multilinear)."""
    x = np.asarray(_weights(g, x), dtype=float)
    h = np.zeros((g.n, g.n))
    for e in g.edges:
        for a, b in combinations(range(g.r), 2):
            p = 1.0
            for k in range(g.r):
                if k != a and k != b:
                    p *= x[e[k] - 1]
            i, j = e[a] - 1, e[b] - 1
            h[i, j] += p
            h[j, i] += p
    return h


def complete_lagrangian(t: int, r: int, exact: bool = False) -> float | Fraction:
    """lambda([t]^(r)) = C(t, r) / t^r, attained by the uniform weighting."""
    if t < r:
        raise ValueError(f"complete graph needs t >= r, got t={t}, r={r}")
    val = Fraction(comb(t, r), t**r)
    return val if exact else float(val)


def baum_eagon_step(g: RUniformGraph, x) -> np.ndarray:
    """One growth-transform step x_i <- x_i lambda(E_i, x) / (r lambda(G, x))."""
    x = np.asarray(_weights(g, x), dtype=float)
    lam = evaluate(g, x)
    if lam <= 0:
        raise ValueError("lambda(G, x) = 0: the growth transform is undefined, restart elsewhere")
    return x * link_values(g, x) / (g.r * lam)


def _ascend(E: np.ndarray, X: np.ndarray, cfg: SolverConfig):
    """Batch ascent from the rows of X; returns (X, lambda, iterations, converged)."""
    X = np.array(X, dtype=float, copy=True, order="C")
    lam, iters, done = _ascent_kernel(X, E, cfg.max_iterations, cfg.convergence_tol)
    return X, lam, iters, done


def _newton_polish(g: RUniformGraph, x: np.ndarray, threshold: float, steps: int = 30):
    """Solve grad_S = mu, sum x_S = 1 on the support by Newton; None if it leaves the simplex."""
    S = np.flatnonzero(x > threshold)
    k = S.size
    if k < 2:
        return None
    y = np.zeros_like(x)
    y[S] = x[S] / x[S].sum()
    mu = g.r * evaluate(g, y)
    for _ in range(steps):
        grad = link_values(g, y)
        F = np.concatenate([grad[S] - mu, [y[S].sum() - 1.0]])
        if np.max(np.abs(F)) < 1e-15:
            break
        J = np.zeros((k + 1, k + 1))
        J[:k, :k] = hessian(g, y)[np.ix_(S, S)]
        J[:k, k] = -1.0
        J[k, :k] = 1.0
        try:
            d = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(d)):
            return None
        y[S] += d[:k]
        mu += d[k]
        if np.any(y[S] <= 0):
            return None
    y = np.clip(y, 0.0, None)
    return y / y.sum()


def kkt_report(g: RUniformGraph, x, threshold: float = 1e-9) -> KktReport:
    x = np.asarray(_weights(g, x), dtype=float)
    lv = link_values(g, x)
    target = g.r * evaluate(g, x)
    S = np.flatnonzero(x > threshold)
    off = np.setdiff1d(np.arange(g.n), S)
    residual = float(np.max(np.abs(lv[S] - target))) if S.size else 0.0
    excess = float(np.max(lv[off] - target)) if off.size else 0.0
    support = tuple(int(i) + 1 for i in S)
    covered = set()
    for e in g.edges:
        covered.update(combinations(e, 2))
    coverage = all(p in covered for p in combinations(support, 2))
    monotone = bool(np.all(np.diff(x) <= threshold)) if is_left_compressed(g) else None
    return KktReport(lv, support, residual, excess, coverage, monotone)


def verify_frankl_rodl(g: RUniformGraph, x, tol: float = 1e-9) -> KktReport:
    """First-order conditions at x: equal links on the support and pair coverage."""
    return kkt_report(g, x, threshold=tol)


def _candidate_starts(g: RUniformGraph, cfg: SolverConfig, compressed: bool) -> np.ndarray:
    n = g.n
    starts = [np.full(n, 1.0 / n)]
    rng = np.random.default_rng(cfg.seed)
    if cfg.restarts:
        starts.extend(rng.dirichlet(np.ones(n), size=cfg.restarts))
    supports = []
    for c in cliques(g, min_order=g.r):
        supports.append(c)
        if len(supports) >= 4 * n:
            break
    if compressed:
        supports.extend(tuple(range(1, k + 1)) for k in range(g.r, n + 1))
    for s in supports:
        w = np.zeros(n)
        w[np.asarray(s) - 1] = 1.0 / len(s)
        starts.append(w)
    return np.array(starts)


def _order_weights(x: np.ndarray) -> np.ndarray:
    # for left-compressed graphs moving larger weights to smaller labels never lowers lambda
    return np.sort(x)[::-1]


def _local_solve(g, x, cfg):
    """Ascend from x, then polish; returns (weights, value, iterations, converged)."""
    X, lam, iters, done = _ascend(g.edge_array, x[None, :], cfg)
    y, val, conv = _refine(g, X[0], float(lam[0]), bool(done[0]), cfg)
    return y, val, int(iters[0]), conv


def _refine(g, x, lam, conv, cfg):
    y = _newton_polish(g, x, cfg.support_threshold)
    if y is not None:
        ly = evaluate(g, y)
        # the polished point is exact to roundoff; accept ulp-level ties
        if ly >= lam - 1e-15:
            return y, ly, True
    return x, lam, conv


def _shrink_support(g, x, lam, cfg, slack=1e-14):
    """Drop support vertices while the local optimum on the smaller support keeps the value."""
    iters = 0
    improved = True
    while improved:
        improved = False
        S = np.flatnonzero(x > cfg.support_threshold)
        if S.size <= g.r:
            break
        for v in S[np.argsort(x[S], kind="stable")]:
            y = x.copy()
            y[v] = 0.0
            y[y <= cfg.support_threshold] = 0.0
            if y.sum() <= 0:
                continue
            y /= y.sum()
            if evaluate(g, y) <= 0:
                continue
            y, ly, it, _ = _local_solve(g, y, cfg)
            iters += it
            if ly >= lam - slack:
                x, lam = y, ly
                improved = True
                break
    return x, lam, iters


def _support_key(x, threshold):
    # colex order on supports: compare largest vertices first
    return tuple(int(i) for i in np.flatnonzero(x > threshold)[::-1])


def maximize(g: RUniformGraph, cfg: SolverConfig | None = None) -> LagrangianEstimate:
    """Best attained lambda(G, x) over the simplex from a batch of starts."""
    cfg = cfg or SolverConfig()
    if not g.edges:
        raise ValueError("maximize needs at least one edge")
    thr = cfg.support_threshold
    compressed = is_left_compressed(g)
    E = g.edge_array
    starts = _candidate_starts(g, cfg, compressed)
    X, lam, iters, done = _ascend(E, starts, cfg)

    # weights that fell below the threshold are zeroed and the row re-ascended
    pruned = np.flatnonzero(np.any((X > 0) & (X <= thr), axis=1))
    if pruned.size:
        Xp = np.where(X[pruned] > thr, X[pruned], 0.0)
        Xp /= Xp.sum(axis=1, keepdims=True)
        Xp, lp, ip, dp = _ascend(E, Xp, cfg)
        better = lp > lam[pruned]
        rows = pruned[better]
        X[rows], lam[rows], done[rows] = Xp[better], lp[better], dp[better]
        iters[pruned] += ip

    cands = []
    seen = set()
    for row in np.argsort(-lam, kind="stable"):
        if lam[row] <= 0:
            continue
        key = tuple(np.round(X[row], 7))
        if key in seen:
            continue
        seen.add(key)
        x, val, conv = _refine(g, X[row], float(lam[row]), bool(done[row]), cfg)
        cands.append((val, x, conv))
        if compressed:
            xs = _order_weights(x)
            vs = evaluate(g, xs)
            if vs > val:
                cands.append(_refine(g, xs, vs, conv, cfg)[1::-1] + (conv,))

    best_val = max(c[0] for c in cands)
    # deterministic tie-break: highest value, then colex-smallest support
    val, x, conv = min((c for c in cands if c[0] == best_val), key=lambda c: _support_key(c[1], thr))
    x, val, extra = _shrink_support(g, x, val, cfg)
    if compressed:
        xs = _order_weights(x)
        if evaluate(g, xs) >= val:
            x = xs
    x = np.where(x > thr, x, 0.0)
    x /= x.sum()
    val = evaluate(g, x)
    kkt = kkt_report(g, x, thr)
    return LagrangianEstimate(
        value=val,
        weights=x,
        support=kkt.support,
        iterations=int(iters.max()) + extra,
        converged=conv,
        kkt=kkt,
        restarts_used=len(starts),
    )


def compositions(total: int, parts: int, chunk: int = 200_000):
    """Yield int arrays of all (k_1..k_parts) >= 0 with sum ``total``, in chunks."""
    bars = combinations(range(total + parts - 1), parts - 1)
    while True:
        block = np.array([b for _, b in zip(range(chunk), bars)], dtype=np.int64)
        if block.size == 0:
            return
        block = block.reshape(-1, parts - 1)
        padded = np.hstack([np.full((len(block), 1), -1), block, np.full((len(block), 1), total + parts - 1)])
        yield np.diff(padded, axis=1) - 1


def brute_force_oracle(g: RUniformGraph, denominator: int, exact: bool = False):
    """Max of lambda(G, k/N) over all lattice points of the simplex with denominator N.

    Integer arithmetic throughout, so the maximum is exact; a lower bound on
    the Lagrangian converging to it as N grows.
    """
    if denominator < 1:
        raise ValueError("denominator must be >= 1")
    if g.n == 0 or not g.edges:
        return Fraction(0) if exact else 0.0
    E = g.edge_array
    best = 0
    for K in compositions(denominator, g.n):
        best = max(best, int(np.prod(K[:, E], axis=2).sum(axis=1).max()))
    val = Fraction(best, denominator**g.r)
    return val if exact else float(val)


@dataclass
class StructuralReport:
    pair_identity_violation: float  # max |(x_i - x_j) lambda(E_ij) - lambda(E_{i\j})| over support pairs
    monotone_violation: float  # max(x_{i+1} - x_i, 0)
    lemma_values: tuple[float, float, float] | None  # (x_1, x_{l-1} + x_l, 2 x_{l-1})
    lemma_violation: float | None
    tol: float = field(default=1e-6)

    @property
    def ok(self) -> bool:
        checks = [self.pair_identity_violation <= self.tol, self.monotone_violation <= self.tol]
        if self.lemma_violation is not None:
            checks.append(self.lemma_violation <= self.tol)
        return all(checks)


def structural_weight_checks(g: RUniformGraph, x, l: int | None = None, tol: float = 1e-6,
                             threshold: float = 1e-9) -> StructuralReport:
    """Weight identities that optimal weightings of left-compressed graphs satisfy.

    The (x_1, x_{l-1} + x_l, 2 x_{l-1}) chain is only checked when ``l`` is
    given, G lives on [l] and contains [l-1]^(r).
    """
    if not is_left_compressed(g):
        raise ValueError("structural checks need a left-compressed graph")
    x = np.asarray(_weights(g, x), dtype=float)
    S = [int(i) + 1 for i in np.flatnonzero(x > threshold)]
    worst = 0.0
    for i, j in combinations(S, 2):
        lhs = (x[i - 1] - x[j - 1]) * family_value(link(g, (i, j)), x)
        rhs = family_value(link_difference(g, i, j), x)
        worst = max(worst, abs(lhs - rhs))
    mono = float(max(0.0, np.max(np.diff(x)))) if g.n > 1 else 0.0
    lemma = lemma_violation = None
    if l is not None:
        if g.n != l or not all(e in g.edge_set for e in combinations(range(1, l), g.r)):
            raise ValueError(f"the weight chain needs G on [{l}] containing [{l - 1}]^({g.r})")
        a, b, c = float(x[0]), float(x[l - 2] + x[l - 1]), float(2 * x[l - 2])
        lemma = (a, b, c)
        lemma_violation = max(0.0, a - b, b - c)
    return StructuralReport(worst, mono, lemma, lemma_violation, tol)
