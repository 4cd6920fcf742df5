"""The analyses: MI against sequential and structural distance, distance
growth, CFIB, the PCFG baseline, tree-shape statistics and the synthetic
two-symbol models.

Every sample is drawn from a stream keyed by ``(seed, analysis, distance,
n_data)`` (plus the condition-pair index for CFIB), so any single row can be
regenerated on its own and rows never depend on evaluation order.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .. import __version__
from ..entropy import cfib, mutual_information, resolve_estimator
from ..fitting import Series, fit_both
from ..metrics import CorpusIndex, PairIndex, distance_joint_histogram, mean_seq_distance
from ..pcfg import extract_rules, generate_corpus, total_variation, write_grammar
from ..synthetic import SyntheticModel, exact_mi, sample_synthetic_pairs
from ..treebank import (
    NullMarkers,
    ParseTree,
    english_tagmap,
    japanese_tagmap,
    load_tagmap,
    preprocess_corpus,
    read_treebank,
    tree_stats,
)
from .config import ExperimentConfig
from .results import ExperimentResult, file_sha256

__all__ = [
    "Corpus",
    "load_corpus",
    "run_cfib",
    "run_growth",
    "run_mi_sequential",
    "run_mi_structural",
    "run_pcfg_study",
    "run_synthetic",
    "run_tree_stats",
]

# spawn-key tags per analysis
_SEQ, _STR, _CFIB, _PCFG = 1, 2, 3, 4

MI_HEADER = ["distance", "distance_kind", "estimator", "n_data", "value_nats",
             "n_available", "shortfall", "unreliable", "source"]


@dataclass
class Corpus:
    original: list[ParseTree]
    trees: list[ParseTree]
    checksums: dict[str, str] = field(default_factory=dict)
    unmapped: Counter = field(default_factory=Counter)
    source: str = "corpus"


def _tagmap(name: str):
    if name == "none":
        return None
    if name == "english":
        return english_tagmap()
    if name == "japanese":
        return japanese_tagmap()
    return load_tagmap(name)


def load_corpus(cfg: ExperimentConfig) -> Corpus:
    cfg.validate()
    original = read_treebank(cfg.corpus, strict=cfg.strict)
    unmapped: Counter = Counter()
    markers = NullMarkers(labels=cfg.null_labels, tokens=cfg.null_tokens)
    trees = list(preprocess_corpus(original, _tagmap(cfg.tagmap), scheme=cfg.scheme,
                                   direction=cfg.direction, markers=markers,
                                   max_length=cfg.max_length, unmapped=unmapped))
    sums = {p: file_sha256(p) for p in cfg.corpus}
    return Corpus(original, trees, sums, unmapped)


def _as_corpus(cfg: ExperimentConfig, corpus: Corpus | Sequence[ParseTree] | None) -> Corpus:
    if corpus is None:
        return load_corpus(cfg)
    cfg.validate(need_corpus=False)
    if isinstance(corpus, Corpus):
        return corpus
    trees = list(corpus)
    return Corpus(trees, trees, source="in-memory")


def _manifest(cfg: ExperimentConfig, corpus: Corpus | None, **extra) -> dict[str, str]:
    m = {
        "tool_version": __version__,
        "seed": str(cfg.seed),
        "scheme": cfg.scheme,
        "node_kind": cfg.effective_node_kind,
        "estimators": " ".join(resolve_estimator(e) for e in cfg.estimators),
        "ladder": " ".join(str(n) for n in cfg.ladder),
        "config_sha256": cfg.digest(),
        "rng": "numpy PCG64 via SeedSequence(seed, spawn_key=(analysis, distance, n_data))",
    }
    if corpus is not None:
        m["corpus_source"] = corpus.source
        m["corpus_trees"] = str(len(corpus.trees))
        for path, digest in sorted(corpus.checksums.items()):
            m[f"corpus_sha256 {path}"] = digest
    m.update({k: str(v) for k, v in extra.items()})
    return m


def _seed(cfg: ExperimentConfig, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(cfg.seed, spawn_key=tuple(int(k) for k in key))


def _fit_rows(rows: list[list], header: list[str], key_cols: Sequence[str], top: int,
              rng: tuple, name: str) -> list[dict]:
    """Fit both decay models per key at the top ladder rung, skipping short rows."""
    col = {h: i for i, h in enumerate(header)}
    groups: dict[tuple, list[tuple[int, float]]] = {}
    for row in rows:
        if row[col["n_data"]] != top or row[col["shortfall"]] > 0:
            continue
        v = row[col["value_nats"]]
        if not math.isfinite(v):
            continue
        groups.setdefault(tuple(row[col[k]] for k in key_cols), []).append((row[col["distance"]], v))
    out = []
    for key, pts in groups.items():
        pts.sort()
        label = "/".join([name, *map(str, key), f"n_data={top}"])
        s = Series(tuple(p[0] for p in pts), tuple(p[1] for p in pts), True, label)
        out.append(fit_both(s, *rng).as_dict())
    return out


def _mi_rows(index: PairIndex, cfg: ExperimentConfig, tag: int, kind: str,
             distances: Sequence[int], source: str, extra_key: tuple = ()) -> list[list]:
    codes = index.corpus.codes
    estimators = [resolve_estimator(e) for e in cfg.estimators]
    rows = []
    for r in distances:
        avail = index.count(r)
        for n in cfg.ladder:
            short = max(0, n - avail)
            if avail < 2:
                rows.extend([r, kind, e, n, math.nan, avail, short, False, source] for e in estimators)
                continue
            a, b, _ = index.sample(r, n, _seed(cfg, tag, *extra_key, r, n))
            for e in estimators:
                est = mutual_information(codes[a], codes[b], estimator=e)
                rows.append([r, kind, e, n, est.value, avail, short, est.unreliable, source])
    return rows


def run_mi_sequential(cfg: ExperimentConfig, corpus=None) -> ExperimentResult:
    """MI between preterminal labels against surface distance."""
    if cfg.source == "synthetic" and corpus is None:
        return run_synthetic(cfg)
    corpus = _as_corpus(cfg, corpus)
    index = PairIndex(CorpusIndex(corpus.trees), "seq", cfg.seq_distances)
    rows = _mi_rows(index, cfg, _SEQ, "sequential", cfg.seq_distances, corpus.source)
    fits = _fit_rows(rows, MI_HEADER, ("estimator",), cfg.ladder[-1], cfg.seq_range, "mi_seq")
    res = ExperimentResult("mi-seq", manifest=_manifest(cfg, corpus))
    res.tables["mi_seq.csv"] = (MI_HEADER, rows)
    res.documents["mi_seq_fits.json"] = fits
    return res


def run_mi_structural(cfg: ExperimentConfig, corpus=None) -> ExperimentResult:
    """MI between node labels against tree-path distance."""
    corpus = _as_corpus(cfg, corpus)
    index = PairIndex(CorpusIndex(corpus.trees), "str", cfg.str_distances,
                      node_kind=cfg.effective_node_kind)
    rows = _mi_rows(index, cfg, _STR, "structural", cfg.str_distances, corpus.source)
    fits = _fit_rows(rows, MI_HEADER, ("estimator",), cfg.ladder[-1], cfg.str_range, "mi_str")
    res = ExperimentResult("mi-str", manifest=_manifest(cfg, corpus))
    res.tables["mi_str.csv"] = (MI_HEADER, rows)
    res.documents["mi_str_fits.json"] = fits
    return res


def run_growth(cfg: ExperimentConfig, corpus=None) -> ExperimentResult:
    """Joint (r_str, r_seq) histogram, mean r_seq per r_str and growth fits."""
    corpus = _as_corpus(cfg, corpus)
    hist = distance_joint_histogram(corpus.trees)
    means = mean_seq_distance(hist)
    totals = hist.marginal_str()
    res = ExperimentResult("growth", manifest=_manifest(cfg, corpus))
    res.tables["growth_hist.csv"] = (["r_str", "r_seq", "count"], [list(r) for r in hist.rows()])
    res.tables["growth_mean.csv"] = (["r_str", "mean_r_seq", "n_pairs"],
                                     [[rs, m, totals[rs]] for rs, m in means.items()])
    fits = []
    if means:
        s = Series(tuple(means), tuple(means.values()), log_scaled=False, name="growth")
        fits.append(fit_both(s, *cfg.growth_range).as_dict())
    res.documents["growth_fits.json"] = fits
    return res


CFIB_HEADER = ["x0", "x1", "distance", "estimator", "n_data", "value_nats",
               "n_available", "shortfall", "unreliable", "source"]


def run_cfib(cfg: ExperimentConfig, corpus=None) -> ExperimentResult:
    """CFIB for each configured condition pair against structural distance.

    Conditioned nodes are phrasal nodes, which carry exactly two children in
    a binarized corpus.  Pairs where one node dominates the other are left
    out: the upper node's children would include the path to the lower one,
    which ties the two child pairs together even in a PCFG.
    """
    corpus = _as_corpus(cfg, corpus)
    ci = CorpusIndex(corpus.trees)
    estimators = [resolve_estimator(e) for e in cfg.estimators]
    rows = []
    for k, (x0, x1) in enumerate(cfg.cfib_pairs):
        if x0 not in ci.vocab or x1 not in ci.vocab:
            raise ValueError(f"condition pair ({x0}, {x1}) does not occur in the corpus")
        index = PairIndex(ci, "str", cfg.str_distances, node_kind="phrasal_only",
                          first=x0, second=x1, nested=False)
        if not any(index.count(r) for r in cfg.str_distances):
            raise ValueError(f"condition pair ({x0}, {x1}) has no phrasal node pairs "
                             f"at distances {cfg.str_distances[0]}..{cfg.str_distances[-1]}")
        for r in cfg.str_distances:
            avail = index.count(r)
            for n in cfg.ladder:
                short = max(0, n - avail)
                if avail < 2:
                    rows.extend([x0, x1, r, e, n, math.nan, avail, short, False, corpus.source]
                                for e in estimators)
                    continue
                a, b, _ = index.sample(r, n, _seed(cfg, _CFIB, k, r, n))
                kids0 = np.column_stack([ci.left[a], ci.right[a]])
                kids1 = np.column_stack([ci.left[b], ci.right[b]])
                for e in estimators:
                    est = cfib(kids0, kids1, estimator=e, x0=x0, x1=x1, r_str=r)
                    rows.append([x0, x1, r, e, n, est.value, avail, short, est.unreliable,
                                 corpus.source])
    fits = _fit_rows(rows, CFIB_HEADER, ("x0", "x1", "estimator"), cfg.ladder[-1],
                     cfg.cfib_range, "cfib")
    res = ExperimentResult("cfib", manifest=_manifest(cfg, corpus))
    res.tables["cfib.csv"] = (CFIB_HEADER, rows)
    res.documents["cfib_fits.json"] = fits
    return res


def run_tree_stats(cfg: ExperimentConfig, corpus=None) -> ExperimentResult:
    """Shape statistics of the trees as read, before any preprocessing."""
    corpus = _as_corpus(cfg, corpus)
    st = tree_stats(corpus.original).as_row()
    res = ExperimentResult("stats", manifest=_manifest(cfg, corpus))
    res.tables["tree_stats.csv"] = (list(st), [list(st.values())])
    return res


def run_pcfg_study(cfg: ExperimentConfig, corpus=None) -> ExperimentResult:
    """Fit a PCFG to the corpus, sample from it and rerun every analysis on
    the sampled trees (outputs prefixed ``generated_``)."""
    corpus = _as_corpus(cfg, corpus)
    grammar = extract_rules(corpus.trees)
    trees, report = generate_corpus(grammar, cfg.pcfg_attempts, cfg.pcfg_max_iterations,
                                    seed=int(_seed(cfg, _PCFG).generate_state(1)[0]),
                                    max_nodes=cfg.pcfg_max_nodes)
    doc = report.as_dict()
    if trees:
        tv = total_variation(grammar, extract_rules(trees))
        doc["round_trip_total_variation"] = tv
        doc["round_trip_max_total_variation"] = max(tv.values())
    res = ExperimentResult("pcfg-study", manifest=_manifest(
        cfg, corpus, pcfg_attempts=cfg.pcfg_attempts,
        pcfg_max_iterations=cfg.pcfg_max_iterations))
    res.texts["grammar.txt"] = write_grammar(grammar)
    res.documents["generation_report.json"] = doc
    if not trees:
        return res
    gen = Corpus(trees, trees, source="pcfg")
    for run in (run_mi_sequential, run_mi_structural, run_growth, run_cfib):
        res.merge(run(cfg, gen), prefix="generated_")
    return res


SYNTH_HEADER = MI_HEADER + ["exact_nats"]


def run_synthetic(cfg: ExperimentConfig) -> ExperimentResult:
    """Estimate MI on the two-symbol model and compare with the exact value."""
    cfg.validate(need_corpus=False)
    model = SyntheticModel(cfg.synth_kind, cfg.synth_parameter)
    estimators = [resolve_estimator(e) for e in cfg.estimators]
    rows = []
    for r in cfg.synth_distances:
        exact = exact_mi(model, r)
        for n in cfg.ladder:
            x, y = sample_synthetic_pairs(model, r, n, cfg.seed)
            for e in estimators:
                est = mutual_information(x, y, estimator=e)
                rows.append([r, "sequential", e, n, est.value, n, 0, est.unreliable,
                             "synthetic", exact])
    fits = _fit_rows(rows, SYNTH_HEADER, ("estimator",), cfg.ladder[-1], cfg.seq_range, "synthetic")
    ex = Series(tuple(cfg.synth_distances), tuple(exact_mi(model, r) for r in cfg.synth_distances),
                True, "synthetic/exact")
    fits.append(fit_both(ex, *cfg.seq_range).as_dict())
    res = ExperimentResult("synth", manifest=_manifest(
        cfg, None, synth_kind=model.kind, synth_parameter=repr(model.parameter)))
    res.tables["synthetic.csv"] = (SYNTH_HEADER, rows)
    res.documents["synthetic_fits.json"] = fits
    return res
