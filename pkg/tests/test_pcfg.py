import math

import numpy as np
import pytest
from hypothesis import given, settings

from helpers import tree, trees
from treemi.pcfg import (
    Pcfg,
    Rule,
    extract_rules,
    generate_corpus,
    read_grammar,
    sample_tree,
    total_variation,
    write_grammar,
)
from treemi.treebank import preprocess, write_bracketed


def grammar(rules, roots=None):
    rs = [Rule(l, tuple(r), p, t) for l, r, p, t in rules]
    return Pcfg.from_rules(rs, roots or {rs[0].lhs: 1.0})


DOUBLING = grammar([("S", ["S", "S"], 0.5, False), ("S", ["x"], 0.5, True)])

TOY = grammar([
    ("S", ["A", "B"], 0.6, False),
    ("S", ["x"], 0.4, True),
    ("A", ["A", "B"], 0.3, False),
    ("A", ["y"], 0.7, True),
    ("B", ["z"], 1.0, True),
])


def survival_by_round(cap: int) -> float:
    """P(a doubling-grammar derivation closes within ``cap`` rounds).

    With q_k that probability for ``k`` rounds, q_k = 1/2 + q_{k-1}^2 / 2.
    """
    q = 0.0
    for _ in range(cap):
        q = 0.5 + 0.5 * q * q
    return q


class TestExtract:
    def test_single_tree(self):
        g = extract_rules([tree("(S (A x) (B y))")])
        assert g.distribution("S") == {(("A", "B"), False): 1.0}
        assert g.distribution("A") == {(("x",), True): 1.0}
        assert g.roots == {"S": 1.0}

    def test_relative_frequency(self):
        g = extract_rules([tree("(S (A x) (B y))"), tree("(S (A x) (C z))")])
        assert g.distribution("S") == {(("A", "B"), False): 0.5, (("A", "C"), False): 0.5}

    def test_hand_counted(self):
        ts = [tree(s) for s in ("(Q (A a) (B b))", "(S (Q (A a) (B b)) (B b))",
                                "(Q (A a) (Q (A a) (B b)))")]
        # Q is a left-hand side 4 times and rewrites to A B three times
        g = extract_rules(ts)
        assert g.distribution("Q")[(("A", "B"), False)] == pytest.approx(0.75)
        assert g.roots == pytest.approx({"Q": 2 / 3, "S": 1 / 3})

    def test_empty(self):
        with pytest.raises(ValueError):
            extract_rules([])

    def test_sums_to_one(self):
        rng = np.random.default_rng(0)
        from helpers import random_tree
        g = extract_rules([preprocess(random_tree(rng, 30)) for _ in range(40)])
        for lhs, rules in g.rules.items():
            assert abs(sum(r.prob for r in rules) - 1) < 1e-12

    def test_invalid_grammar(self):
        with pytest.raises(ValueError):
            grammar([("S", ["A"], 1.0, False)])
        with pytest.raises(ValueError):
            grammar([("S", ["x"], 0.7, True)])


class TestGrammarFile:
    def test_round_trip_bit_exact(self):
        rng = np.random.default_rng(1)
        from helpers import random_tree
        g = extract_rules([preprocess(random_tree(rng, 30)) for _ in range(40)])
        text = write_grammar(g)
        back = read_grammar(text)
        assert write_grammar(back) == text
        for lhs in g.rules:
            assert back.distribution(lhs) == g.distribution(lhs)
        assert back.roots == g.roots

    def test_awkward_terminals(self):
        g = grammar([("S", ["A", "A"], 1 / 3, False), ("S", ["a b"], 2 / 3, True),
                     ("A", ['"q"'], 1.0, True)])
        back = read_grammar(write_grammar(g))
        assert back.distribution("S") == g.distribution("S")
        assert back.distribution("A") == {(('"q"',), True): 1.0}

    def test_format(self):
        text = write_grammar(TOY)
        assert "@root S : 1.0" in text
        assert "S -> A B : 0.6" in text
        assert 'B -> "z" : 1.0' in text


class TestSampling:
    def test_terminating(self):
        g = grammar([("S", ["x"], 1.0, True)])
        t = sample_tree(g, 1, seed=0)
        assert write_bracketed(t) == "(S x)"

    def test_never_terminates(self):
        g = Pcfg.from_rules([Rule("S", ("S", "S"), 1.0)], {"S": 1.0})
        assert sample_tree(g, 10, seed=0) is None
        trees_, rep = generate_corpus(g, 20, max_iterations=8, seed=0)
        assert trees_ == [] and rep.discarded == 20

    def test_cap_bounds_depth(self):
        trees_, rep = generate_corpus(DOUBLING, 2000, max_iterations=6, seed=3)
        assert rep.attempts == rep.terminated + rep.discarded == 2000
        for t in trees_:
            assert max(t.depth) <= 6

    def test_report_and_determinism(self):
        a, ra = generate_corpus(TOY, 3000, seed=9)
        b, rb = generate_corpus(TOY, 3000, seed=9)
        c, _ = generate_corpus(TOY, 3000, seed=10)
        assert [write_bracketed(t) for t in a] == [write_bracketed(t) for t in b]
        assert ra.as_dict() == rb.as_dict()
        assert [write_bracketed(t) for t in a] != [write_bracketed(t) for t in c]
        assert ra.terminated == 3000 and sum(ra.sizes.values()) == 3000

    def test_prefix_stability(self):
        a, _ = generate_corpus(TOY, 1500, seed=2)
        b, _ = generate_corpus(TOY, 3000, seed=2)
        assert [write_bracketed(t) for t in a] == [write_bracketed(t) for t in b[:1500]]

    def test_attempts_precondition(self):
        with pytest.raises(ValueError):
            generate_corpus(TOY, 0)
        with pytest.raises(ValueError):
            sample_tree(TOY, 0)

    def test_root_distribution(self):
        g = grammar([("S", ["s"], 1.0, True), ("T", ["t"], 1.0, True)], {"S": 0.25, "T": 0.75})
        ts, _ = generate_corpus(g, 20_000, seed=4)
        frac = sum(t.labels[t.root] == "T" for t in ts) / len(ts)
        assert abs(frac - 0.75) < 4 * math.sqrt(0.75 * 0.25 / 20_000)

    def test_rule_frequencies(self):
        ts, _ = generate_corpus(TOY, 100_000, seed=5)
        g = extract_rules(ts)
        n_s = len(ts)
        p = g.distribution("S")[(("A", "B"), False)]
        assert abs(p - 0.6) < 3 * math.sqrt(0.6 * 0.4 / n_s)

    def test_discard_rate_matches_generating_function(self):
        cap, n = 100, 20_000
        _, rep = generate_corpus(DOUBLING, n, max_iterations=cap, seed=11, max_nodes=10**7)
        expect = 1 - survival_by_round(cap)
        sd = math.sqrt(expect * (1 - expect) / n)
        assert abs(rep.discarded / n - expect) < 4 * sd

    def test_discard_oracle_monte_carlo(self):
        # the recursion agrees with a direct branching-process simulation
        rng = np.random.default_rng(0)
        cap, n = 30, 20_000
        open_ = np.ones(n, dtype=np.int64)
        for _ in range(cap):
            open_ = 2 * rng.binomial(open_, 0.5)
        mc = np.mean(open_ > 0)
        expect = 1 - survival_by_round(cap)
        assert abs(mc - expect) < 4 * math.sqrt(expect * (1 - expect) / n)

    def test_size_guard(self):
        _, rep = generate_corpus(DOUBLING, 500, max_iterations=100, seed=1, max_nodes=50)
        assert rep.discarded_oversize > 0
        assert rep.attempts == rep.terminated + rep.discarded


class TestRoundTrip:
    def test_total_variation_zero_on_self(self):
        assert all(v == 0 for v in total_variation(TOY, TOY).values())

    def test_total_variation_value(self):
        other = grammar([
            ("S", ["A", "B"], 0.5, False), ("S", ["x"], 0.5, True),
            ("A", ["A", "B"], 0.3, False), ("A", ["y"], 0.7, True), ("B", ["z"], 1.0, True)])
        tv = total_variation(TOY, other)
        assert tv["S"] == pytest.approx(0.1) and tv["A"] == 0 and tv["B"] == 0

    @settings(max_examples=20, deadline=None)
    @given(trees(max_nodes=30))
    def test_generated_trees_are_binary(self, t):
        src = preprocess(t)
        g = extract_rules([src])
        ts, _ = generate_corpus(g, 20, max_iterations=50, seed=0)
        for gt in ts:
            for i in gt.internal:
                kids = gt.children[i]
                assert len(kids) == 2 or (len(kids) == 1 and gt.terminal[kids[0]])
