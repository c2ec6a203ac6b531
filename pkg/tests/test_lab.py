import json
from fractions import Fraction
from itertools import combinations
from math import comb

import networkx as nx
import pytest

from hyperlag.hypergraph import (
    RUniformGraph,
    colex_initial_segment,
    complete_graph,
    is_left_compressed,
    link,
    max_clique_order,
)
from hyperlag.lab import (
    COUNTEREXAMPLE,
    HOLDS,
    INCONCLUSIVE,
    EnumerationSpec,
    MatchingCertificate,
    ScaleError,
    clique_filter_agrees,
    compatible,
    conjecture1_check,
    conjecture2_check,
    conjecture_range,
    contains_clique,
    enumerate_left_compressed,
    exact_weighting,
    frankl_furedi_check,
    judge_below,
    judge_equal,
    merge_verdicts,
    remark_counterexample,
    remark_graph,
    solve_many,
    theorem39_check,
    theorem3_check,
    theorem3_matching,
    theorem_2a_hypothesis_check,
    trimmed,
    verify_certificate,
)
from hyperlag.solver import brute_force_oracle, complete_lagrangian, evaluate, maximize

F = Fraction
C37 = RUniformGraph(3, 5, colex_initial_segment(3, 7).edges)
C38 = colex_initial_segment(3, 8)


def brute_left_compressed(r, l, m):
    pool = list(combinations(range(1, l + 1), r))
    out = set()
    for edges in combinations(pool, m):
        g = RUniformGraph(r, l, edges)
        if is_left_compressed(g):
            out.add(g.edges)
    return out


class TestEnumeration:
    def test_two_edges(self):
        got = list(enumerate_left_compressed(EnumerationSpec(3, 4, 2)))
        assert [g.edges for g in got] == [((1, 2, 3), (1, 2, 4))]

    def test_full(self):
        assert list(enumerate_left_compressed(EnumerationSpec(3, 4, 4))) == [complete_graph(4, 3)]

    def test_forbid(self):
        got = list(enumerate_left_compressed(EnumerationSpec(3, 5, 4, "forbid", clique_order=4)))
        assert got and all((2, 3, 4) not in g.edge_set for g in got)
        brute = {e for e in brute_left_compressed(3, 5, 4) if (2, 3, 4) not in e}
        assert {g.edges for g in got} == brute

    @pytest.mark.parametrize("l", [3, 4, 5])
    def test_complete_against_brute_force(self, l):
        for m in range(0, comb(l, 3) + 1):
            got = [g.edges for g in enumerate_left_compressed(EnumerationSpec(3, l, m))]
            assert len(got) == len(set(got))
            assert set(got) == brute_left_compressed(3, l, m)

    def test_r4_against_brute_force(self):
        for m in range(0, 8):
            got = [g.edges for g in enumerate_left_compressed(EnumerationSpec(4, 6, m))]
            assert len(got) == len(set(got)) and set(got) == brute_left_compressed(4, 6, m)

    def test_multiple_sizes(self):
        spec = EnumerationSpec(3, 5, (3, 4, 5))
        assert sorted(len(g) for g in enumerate_left_compressed(spec)) == sorted(
            [3] * len(brute_left_compressed(3, 5, 3))
            + [4] * len(brute_left_compressed(3, 5, 4))
            + [5] * len(brute_left_compressed(3, 5, 5))
        )

    @pytest.mark.parametrize("mode", ["require", "forbid"])
    def test_clique_filters_agree(self, mode):
        l = 6
        for m in range(4, 21):
            for g in enumerate_left_compressed(EnumerationSpec(3, l, m, mode)):
                assert is_left_compressed(g) and clique_filter_agrees(g, l)
                assert (max_clique_order(g) >= l - 1) == (mode == "require")

    def test_filters_partition(self):
        every = {g.edges for g in enumerate_left_compressed(EnumerationSpec(3, 6, 12))}
        req = {g.edges for g in enumerate_left_compressed(EnumerationSpec(3, 6, 12, "require"))}
        forb = {g.edges for g in enumerate_left_compressed(EnumerationSpec(3, 6, 12, "forbid"))}
        assert req | forb == every and not req & forb

    def test_scale_refusal(self):
        with pytest.raises(ScaleError):
            list(enumerate_left_compressed(EnumerationSpec(3, 9, 40)))
        with pytest.raises(ScaleError):
            list(enumerate_left_compressed(EnumerationSpec(4, 7, 25)))
        with pytest.raises(ScaleError):
            list(enumerate_left_compressed(EnumerationSpec(5, 8, 10)))

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            EnumerationSpec(3, 5, 4, "maybe")


class TestVerdictPlumbing:
    def test_merge(self):
        assert merge_verdicts([HOLDS, HOLDS]) == HOLDS
        assert merge_verdicts([HOLDS, INCONCLUSIVE]) == INCONCLUSIVE
        assert merge_verdicts([INCONCLUSIVE, COUNTEREXAMPLE]) == COUNTEREXAMPLE

    def test_exact_weighting_sums_to_one(self):
        w = exact_weighting([0.1, 0.2, 0.7000000001])
        assert sum(w) == 1 and all(isinstance(v, Fraction) for v in w)

    def test_judge_equal_certifies(self):
        est = maximize(C38)
        verdict, dev, witness = judge_equal(C38, est, 4)
        assert verdict == COUNTEREXAMPLE and dev > 1e-3
        assert evaluate(C38, witness) > F(1, 16)

    def test_judge_equal_holds(self):
        assert judge_equal(C37, maximize(trimmed(C37)), 4)[0] == HOLDS

    def test_judge_below(self):
        g = RUniformGraph(3, 5, ((1, 2, 3), (1, 2, 4), (1, 3, 4), (1, 2, 5)))
        verdict, gap, _ = judge_below(g, maximize(g), 4)
        assert verdict == HOLDS and gap > 1e-6
        # the clique itself sits on the benchmark, so strictness is never claimed
        k4 = complete_graph(4, 3)
        verdict, _, witness = judge_below(k4, maximize(k4), 4)
        assert verdict != HOLDS
        if verdict == COUNTEREXAMPLE:
            assert evaluate(k4, witness) >= F(1, 16)

    def test_solve_many_workers(self):
        graphs = [colex_initial_segment(3, m) for m in range(4, 9)]
        serial = solve_many(graphs, workers=1)
        pooled = solve_many(graphs, workers=2)
        assert [e.value for e in serial] == [e.value for e in pooled]


class TestConjecture1:
    def test_l5(self):
        v = conjecture1_check(3, 5)
        assert v.verdict == HOLDS and v.margin <= 1e-6
        assert [c.m for c in v.cells] == [4, 5, 6, 7]

    def test_l6(self):
        v = conjecture1_check(3, 6, range(10, 17))
        assert v.verdict == HOLDS and v.margin <= 1e-6

    def test_r4_clique(self):
        v = conjecture1_check(4, 6, 5)
        assert v.verdict == HOLDS and v.graphs_examined == 1

    def test_range_check(self):
        assert conjecture_range(3, 5) == range(4, 8)
        with pytest.raises(ValueError):
            conjecture1_check(3, 5, 8)

    def test_rows(self):
        rows = conjecture1_check(3, 5).rows()
        assert len(rows) == 4
        assert {"r", "l", "m", "verdict", "margin", "graphs_examined"} <= set(rows[0])
        json.dumps(rows)


class TestConjecture2:
    def test_l5(self):
        v = conjecture2_check(5)
        assert v.verdict == HOLDS and v.margin > 1e-6

    def test_l6(self):
        v = conjecture2_check(6)
        assert v.verdict == HOLDS and v.margin > 1e-6
        assert all(c.margin > 1e-6 for c in v.cells if c.graphs_examined)

    def test_l5_m4_against_oracle(self):
        graphs = list(enumerate_left_compressed(EnumerationSpec(3, 5, 4, "forbid")))
        assert graphs
        for g in graphs:
            assert (2, 3, 4) not in g.edge_set
            value = maximize(trimmed(g)).value
            assert value < 1 / 16 - 1e-6
            assert brute_force_oracle(trimmed(g), 24) <= value + 1e-12

    def test_deficiency_details(self):
        v = conjecture2_check(6)
        narrow = [c for c in v.cells if c.details]
        assert narrow and all(c.m <= comb(5, 3) + comb(4, 2) - 4 for c in narrow)
        assert all(c.details["deficiency_bound"] == 4 for c in narrow)

    def test_scale(self):
        with pytest.raises(ScaleError):
            conjecture2_check(8)


class TestFranklFuredi:
    def test_clique(self):
        v = frankl_furedi_check(3, 4)
        assert v.verdict == HOLDS
        assert v.details["colex_value"] == pytest.approx(1 / 16, abs=1e-9)

    def test_eight(self):
        v = frankl_furedi_check(3, 8)
        assert v.verdict == HOLDS and v.details["colex_value"] >= 17 / 256 - 1e-9

    def test_graphs(self):
        v = frankl_furedi_check(2, 6)
        assert v.verdict == HOLDS
        assert v.details["colex_value"] == pytest.approx(3 / 8, abs=1e-9)

    def test_vertex_cap(self):
        v = frankl_furedi_check(3, 8, vertex_cap=5)
        assert v.verdict == HOLDS and v.l == 5

    def test_scale(self):
        with pytest.raises(ScaleError):
            frankl_furedi_check(3, 20)
        with pytest.raises(ScaleError):
            frankl_furedi_check(3, 8, vertex_cap=9)


class TestTheorem2a:
    def test_colex_seven(self):
        t = theorem_2a_hypothesis_check(C37, 5)
        assert t.hypothesis and t.has_clique and t.verdict == HOLDS
        assert t.details["free_targets"] == 0 and t.details["pair_link_size"] == 0
        assert t.estimate.value == pytest.approx(1 / 16, abs=1e-7)

    def test_colex_eight(self):
        t = theorem_2a_hypothesis_check(C38, 5)
        assert not t.hypothesis and t.verdict is None
        assert t.details["free_targets"] == 0 and t.details["required"] == 1

    def test_isolated_top(self):
        g = RUniformGraph(3, 6, complete_graph(5, 3).edges)
        t = theorem_2a_hypothesis_check(g, 6)
        assert t.hypothesis and t.details["free_targets"] == 6
        assert t.estimate.value == pytest.approx(complete_lagrangian(5, 3), abs=1e-6)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            theorem_2a_hypothesis_check(RUniformGraph(3, 5, ((1, 2, 4), (1, 3, 5))), 5)
        with pytest.raises(ValueError):
            theorem_2a_hypothesis_check(C38, 6)


def networkx_matching_size(cert: MatchingCertificate) -> int:
    b = nx.Graph()
    left = [("s", a) for a in cert.sources]
    b.add_nodes_from(left, bipartite=0)
    b.add_nodes_from((("t", t) for t in cert.targets), bipartite=1)
    b.add_edges_from((("s", a), ("t", t)) for a in cert.sources for t in cert.targets if compatible(a, t))
    return len(nx.bipartite.maximum_matching(b, top_nodes=left)) // 2


class TestTheorem3:
    def test_colex_seven(self):
        cert = theorem3_matching(C37, 5)
        assert cert.exists and cert.pairs == [] and verify_certificate(C37, 5, cert)

    def test_colex_eight(self):
        cert = theorem3_matching(C38, 5)
        assert not cert.exists and cert.sources == [(1,)] and cert.targets == []
        assert theorem3_check(C38, 5).verdict is None

    def test_r4(self):
        g = RUniformGraph(4, 6, complete_graph(5, 4).edges + ((1, 2, 3, 6),))
        cert = theorem3_matching(g, 6)
        assert cert.exists and cert.sources == []
        t = theorem3_check(g, 6)
        assert t.hypothesis and t.verdict == HOLDS
        assert t.estimate.value == pytest.approx(1 / 125, abs=1e-6)

    def test_compatible(self):
        assert compatible((2, 5), (1, 2, 6))  # j_1 = 1 <= i_2 = 5
        assert not compatible((1, 2), (3, 4, 5))
        assert compatible((4,), (1, 2))  # vacuous for r = 3

    @pytest.mark.parametrize("r, l", [(3, 5), (3, 6), (4, 6), (4, 7)])
    def test_certificates(self, r, l):
        top = comb(l, r) if r == 3 else 20
        checked = 0
        for g in enumerate_left_compressed(EnumerationSpec(r, l, range(comb(l - 1, r), top + 1))):
            cert = theorem3_matching(g, l)
            if cert.exists:
                assert verify_certificate(g, l, cert)
                assert networkx_matching_size(cert) == len(cert.sources)
            else:
                assert networkx_matching_size(cert) < len(cert.sources)
            if r == 3:
                free = sum(1 for a in combinations(range(1, l - 1), 2) if a not in link(g, (l,)))
                assert cert.exists == (len(link(g, (l - 1, l))) <= free)
            checked += 1
        assert checked

    def test_tampered_certificate_rejected(self):
        g = RUniformGraph(4, 6, complete_graph(5, 4).edges + ((1, 2, 3, 6), (1, 2, 4, 6), (1, 2, 5, 6)))
        cert = theorem3_matching(g, 6)
        assert cert.exists and cert.pairs
        src, tgt = cert.pairs[0]
        assert verify_certificate(g, 6, cert)
        bad = MatchingCertificate(True, [(src, (3, 4, 6))], cert.sources, cert.targets)
        assert not verify_certificate(g, 6, bad)
        assert not verify_certificate(g, 6, MatchingCertificate(True, [], cert.sources, cert.targets))

    def test_conclusions_on_hypothesis(self):
        for g in enumerate_left_compressed(EnumerationSpec(3, 6, range(10, 17))):
            t = theorem3_check(g, 6)
            if t.hypothesis:
                assert t.verdict == HOLDS


class TestTheorem39:
    def test_excluded_pair(self):
        with pytest.raises(ValueError, match="excluded"):
            theorem39_check(3, 5)

    def test_l6(self):
        v = theorem39_check(3, 6)
        assert v.verdict == HOLDS and v.margin <= 1e-6
        assert not v.details["sampled"]
        assert [c.m for c in v.cells] == list(range(10, 17))

    @pytest.mark.slow
    def test_l7_sampled(self):
        v = theorem39_check(3, 7, sample_budget=40, seed=3)
        assert v.verdict == HOLDS and v.details["sampled"]
        assert v.graphs_examined == 40

    def test_colex_sixteen(self):
        est = maximize(colex_initial_segment(3, 16))
        assert est.value == pytest.approx(2 / 25, abs=1e-6)

    def test_oracle_cross_check(self):
        g = colex_initial_segment(3, 16)
        assert brute_force_oracle(g, 20, exact=True) == F(2, 25)


class TestRemark:
    def test_three_five(self):
        g, x, val, bench = remark_counterexample(3, 5)
        assert val == F(17, 256) and bench == F(1, 16) and val > bench
        assert g == colex_initial_segment(3, 8)
        assert x == [F(1, 4)] * 3 + [F(1, 8)] * 2

    def test_three_six(self):
        _, _, val, bench = remark_counterexample(3, 6)
        assert bench == F(2, 25) and val > bench

    def test_four_six(self):
        _, _, val, bench = remark_counterexample(4, 6)
        assert bench == F(1, 125) and val > bench

    @pytest.mark.parametrize("r", range(2, 6))
    def test_strict_and_colex(self, r):
        for l in range(r + 2, r + 7):
            g, x, val, bench = remark_counterexample(r, l)
            assert val > bench and evaluate(g, x) == val and sum(x) == 1
            assert g == colex_initial_segment(r, comb(l - 1, r) + comb(l - 2, r - 1) + 1)

    def test_too_small(self):
        with pytest.raises(ValueError):
            remark_counterexample(3, 4)

    def test_graph_shape(self):
        assert remark_graph(3, 5).edges == C38.edges


def test_contains_clique():
    assert contains_clique(C38, 4) and not contains_clique(C38, 5)
    assert contains_clique(RUniformGraph(3, 5, ()), 2)
