"""Maximum-likelihood PCFGs read off a treebank, and tree sampling from them.

Generation is top-down in breadth-synchronous rounds: one round expands
every nonterminal on the current frontier.  A tree that still has open
nonterminals after ``max_iterations`` rounds is discarded, so the cap is a
bound on tree depth.
"""
from __future__ import annotations

import bisect
import json
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import accumulate
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._rng import derive_rng
from .treebank.trees import ParseTree

__all__ = [
    "GenerationReport",
    "Pcfg",
    "Rule",
    "extract_rules",
    "generate_corpus",
    "read_grammar",
    "sample_tree",
    "total_variation",
    "write_grammar",
]

BLOCK = 1024  # attempts per derived RNG stream


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: tuple[str, ...]
    prob: float
    terminal: bool = False

    def __str__(self):
        rhs = " ".join(json.dumps(r) if self.terminal else r for r in self.rhs)
        return f"{self.lhs} -> {rhs} : {self.prob!r}"


@dataclass
class Pcfg:
    rules: dict[str, list[Rule]]
    roots: dict[str, float]

    def __post_init__(self):
        for lhs, rules in self.rules.items():
            total = sum(r.prob for r in rules)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"probabilities for {lhs!r} sum to {total}")
        if self.roots and abs(sum(self.roots.values()) - 1.0) > 1e-9:
            raise ValueError("root probabilities do not sum to 1")
        missing = {c for rules in self.rules.values() for r in rules if not r.terminal
                   for c in r.rhs if c not in self.rules}
        missing |= {c for c in self.roots if c not in self.rules}
        if missing:
            raise ValueError(f"categories without rules: {sorted(missing)}")
        self._compiled = None

    @classmethod
    def from_rules(cls, rules: Iterable[Rule], roots: Mapping[str, float]) -> "Pcfg":
        grouped: dict[str, list[Rule]] = defaultdict(list)
        for r in rules:
            grouped[r.lhs].append(r)
        return cls(dict(grouped), dict(roots))

    def distribution(self, lhs: str) -> dict[tuple, float]:
        return {(r.rhs, r.terminal): r.prob for r in self.rules[lhs]}

    def __iter__(self):
        for rules in self.rules.values():
            yield from rules

    def compile(self):
        if self._compiled is None:
            table = {}
            for lhs, rules in self.rules.items():
                cum = list(accumulate(r.prob for r in rules))
                cum[-1] = 1.0
                table[lhs] = (cum, [(r.rhs, r.terminal) for r in rules])
            roots = list(self.roots)
            rcum = list(accumulate(self.roots[r] for r in roots))
            rcum[-1] = 1.0
            self._compiled = (table, roots, rcum)
        return self._compiled


def extract_rules(trees: Iterable[ParseTree]) -> Pcfg:
    """Relative-frequency estimate of every production and of the root label."""
    counts: dict[str, Counter] = defaultdict(Counter)
    roots: Counter = Counter()
    for tree in trees:
        roots[tree.labels[tree.root]] += 1
        for i in tree.internal:
            kids = tree.children[i]
            flags = {tree.terminal[k] for k in kids}
            if len(flags) > 1:
                raise ValueError(f"node {tree.labels[i]!r} mixes terminal and nonterminal children")
            rhs = tuple(tree.labels[k] for k in kids)
            counts[tree.labels[i]][(rhs, flags.pop())] += 1
    if not roots:
        raise ValueError("cannot extract a grammar from an empty corpus")
    rules = []
    for lhs in sorted(counts):
        total = sum(counts[lhs].values())
        for (rhs, term), c in sorted(counts[lhs].items()):
            rules.append(Rule(lhs, rhs, c / total, term))
    n = sum(roots.values())
    return Pcfg.from_rules(rules, {r: c / n for r, c in sorted(roots.items())})


def total_variation(p: Pcfg, q: Pcfg) -> dict[str, float]:
    """Per-lhs total-variation distance between two grammars' rule distributions."""
    out = {}
    for lhs in sorted(set(p.rules) | set(q.rules)):
        dp = p.distribution(lhs) if lhs in p.rules else {}
        dq = q.distribution(lhs) if lhs in q.rules else {}
        out[lhs] = 0.5 * sum(abs(dp.get(k, 0.0) - dq.get(k, 0.0)) for k in set(dp) | set(dq))
    return out


# -- grammar files ---------------------------------------------------------

ROOT_PREFIX = "@root"


def write_grammar(g: Pcfg) -> str:
    """``lhs -> rhs1 rhs2 : prob`` per rule, terminals JSON-quoted, plus
    ``@root LABEL : prob`` lines."""
    lines = [f"{ROOT_PREFIX} {lab} : {p!r}" for lab, p in g.roots.items()]
    lines += [str(r) for r in g]
    return "\n".join(lines) + "\n"


def read_grammar(text: str) -> Pcfg:
    rules, roots = [], {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        body, sep, prob = line.rpartition(" : ")
        if not sep:
            raise ValueError(f"line {lineno}: missing ' : probability'")
        p = float(prob)
        if body.startswith(ROOT_PREFIX + " "):
            roots[body[len(ROOT_PREFIX) + 1:].strip()] = p
            continue
        lhs, arrow, rhs = body.partition(" -> ")
        if not arrow:
            raise ValueError(f"line {lineno}: missing ' -> '")
        rhs = rhs.strip()
        if rhs.startswith('"'):
            dec = json.JSONDecoder()
            items, pos = [], 0
            while pos < len(rhs):
                tok, pos = dec.raw_decode(rhs, pos)
                items.append(tok)
                while pos < len(rhs) and rhs[pos] == " ":
                    pos += 1
            rules.append(Rule(lhs.strip(), tuple(items), p, True))
        else:
            rules.append(Rule(lhs.strip(), tuple(rhs.split()), p, False))
    return Pcfg.from_rules(rules, roots)


# -- sampling ---------------------------------------------------------------

@dataclass
class GenerationReport:
    seed: int
    max_iterations: int
    attempts: int = 0
    terminated: int = 0
    discarded: int = 0
    discarded_oversize: int = 0
    sizes: Counter = field(default_factory=Counter)

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "max_iterations": self.max_iterations,
            "attempts": self.attempts,
            "terminated": self.terminated,
            "discarded": self.discarded,
            "discarded_oversize": self.discarded_oversize,
            "size_distribution": {str(k): v for k, v in sorted(self.sizes.items())},
        }


class _Uniforms:
    """Buffered uniform draws from one generator."""

    def __init__(self, rng: np.random.Generator, chunk: int = 4096):
        self.rng, self.chunk = rng, chunk
        self.buf, self.pos = [], 0

    def __call__(self) -> float:
        if self.pos == len(self.buf):
            self.buf, self.pos = self.rng.random(self.chunk).tolist(), 0
        self.pos += 1
        return self.buf[self.pos - 1]


def _sample(g: Pcfg, max_iterations: int, u: _Uniforms, max_nodes: int):
    table, roots, rcum = g.compile()
    labels = [roots[bisect.bisect_right(rcum, u())]]
    children: list[list[int]] = [[]]
    terminal = [False]
    frontier = [0]
    for _ in range(max_iterations):
        if not frontier:
            break
        nxt = []
        for node in frontier:
            cum, options = table[labels[node]]
            rhs, term = options[bisect.bisect_right(cum, u())]
            for sym in rhs:
                idx = len(labels)
                labels.append(sym)
                children.append([])
                terminal.append(term)
                children[node].append(idx)
                if not term:
                    nxt.append(idx)
        frontier = nxt
        if len(labels) > max_nodes:
            return "oversize"
    if frontier:
        return None
    return ParseTree(tuple(labels), tuple(tuple(c) for c in children), tuple(terminal))


def sample_tree(g: Pcfg, max_iterations: int = 100, seed=0,
                max_nodes: int = 100_000) -> ParseTree | None:
    """One generation attempt; ``None`` means discarded.

    ``max_nodes`` also discards runaway attempts before they exhaust memory.
    """
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    out = _sample(g, max_iterations, _Uniforms(np.random.default_rng(seed)), max_nodes)
    return out if isinstance(out, ParseTree) else None


def generate_corpus(g: Pcfg, attempts: int, max_iterations: int = 100, seed: int = 0,
                    max_nodes: int = 100_000) -> tuple[list[ParseTree], GenerationReport]:
    """Run ``attempts`` generation attempts and keep the terminated trees.

    Attempts are grouped into blocks of 1024, block ``k`` drawing from the
    stream ``SeedSequence(seed, spawn_key=(k,))``, so the output depends only
    on ``seed`` and the block layout, never on scheduling.
    """
    if attempts < 1:
        raise ValueError("attempts must be >= 1")
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    report = GenerationReport(seed, max_iterations)
    trees: list[ParseTree] = []
    for block in range((attempts + BLOCK - 1) // BLOCK):
        u = _Uniforms(derive_rng(seed, block))
        for _ in range(min(BLOCK, attempts - block * BLOCK)):
            out = _sample(g, max_iterations, u, max_nodes)
            report.attempts += 1
            if isinstance(out, ParseTree):
                report.terminated += 1
                report.sizes[len(out.leaves)] += 1
                trees.append(out)
            else:
                report.discarded += 1
                if out == "oversize":
                    report.discarded_oversize += 1
    return trees, report
