"""Command-line entry point: ``treemi <subcommand> [corpus ...] [options]``.

Settings come from the preset, then ``--config``, then command-line flags.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from ..fitting import Series, fit_both
from ..pcfg import extract_rules, generate_corpus, read_grammar, write_grammar
from ..treebank import write_bracketed
from .config import PRESETS, ExperimentConfig, load_config, parse_int_list, parse_pairs, parse_range
from .experiments import (
    _manifest,
    load_corpus,
    run_cfib,
    run_growth,
    run_mi_sequential,
    run_mi_structural,
    run_pcfg_study,
    run_synthetic,
    run_tree_stats,
)
from .results import ExperimentResult, file_sha256

log = logging.getLogger("treemi")

# flag -> (config field, parser)
_OVERRIDES = {
    "seed": ("seed", int),
    "out": ("out", str),
    "scheme": ("scheme", str),
    "tagmap": ("tagmap", str),
    "direction": ("direction", str),
    "max_length": ("max_length", lambda s: None if s.lower() == "none" else int(s)),
    "null_labels": ("null_labels", lambda s: tuple(s.split(","))),
    "ladder": ("ladder", parse_int_list),
    "estimators": ("estimators", lambda s: tuple(s.replace(",", " ").split())),
    "seq_distances": ("seq_distances", parse_int_list),
    "str_distances": ("str_distances", parse_int_list),
    "node_kind": ("node_kind", str),
    "cfib_pairs": ("cfib_pairs", parse_pairs),
    "seq_range": ("seq_range", parse_range),
    "str_range": ("str_range", parse_range),
    "growth_range": ("growth_range", parse_range),
    "cfib_range": ("cfib_range", parse_range),
    "attempts": ("pcfg_attempts", lambda s: int(float(s))),
    "max_iterations": ("pcfg_max_iterations", int),
    "max_nodes": ("pcfg_max_nodes", int),
    "synth_kind": ("synth_kind", str),
    "synth_parameter": ("synth_parameter", float),
    "synth_distances": ("synth_distances", parse_int_list),
}

_HELP = {
    "seed": "master RNG seed",
    "out": "output directory",
    "scheme": "binarized, unbinarized or phrasal_only",
    "tagmap": "english, japanese, none or a tag-map file",
    "direction": "binarization direction (right or left)",
    "max_length": "drop sentences longer than this many tokens ('none' keeps all)",
    "null_labels": "comma-separated labels marking null elements",
    "ladder": "N_data values, e.g. '1e4,4e4,1.6e5'",
    "estimators": "entropy estimators, e.g. 'grassberger,plugin'",
    "seq_distances": "sequential distances, e.g. '1-30'",
    "str_distances": "structural distances, e.g. '1-30'",
    "node_kind": "pos_only, pos_and_phrasal or phrasal_only",
    "cfib_pairs": "CFIB condition pairs, e.g. 'NP:NP VP:NP'",
    "seq_range": "fit range lo:hi for sequential MI",
    "str_range": "fit range lo:hi for structural MI",
    "growth_range": "fit range lo:hi for distance growth",
    "cfib_range": "fit range lo:hi for CFIB",
    "attempts": "PCFG generation attempts",
    "max_iterations": "PCFG expansion rounds before an attempt is discarded",
    "max_nodes": "discard PCFG attempts growing beyond this many nodes",
    "synth_kind": "exponential or power_law",
    "synth_parameter": "lambda or alpha of the synthetic model",
    "synth_distances": "distances for the synthetic model, e.g. '1-100'",
}


def _common(suppress: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="INI configuration file")
    p.add_argument("--preset", default=d, choices=sorted(PRESETS))
    p.add_argument("--strict", action="store_true", default=d,
                   help="reject forest-wrapped input")
    p.add_argument("-v", "--verbose", action="store_true", default=d)
    for flag, help_ in _HELP.items():
        p.add_argument("--" + flag.replace("_", "-"), dest=flag, default=d, help=help_)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="treemi", parents=[_common(suppress=True)],
                                     description="Mutual information in parse-tree corpora.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common(suppress=True)

    def add(name, help_, corpus=True):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if corpus:
            sp.add_argument("corpus", nargs="*", help="bracketed treebank files")
        return sp

    add("preprocess", "write the preprocessed corpus")
    add("stats", "tree-shape statistics of the raw trees")
    add("mi-seq", "MI against sequential distance")
    add("mi-str", "MI against structural distance")
    add("growth", "sequential against structural distance")
    add("cfib", "context-free independence breaking")
    add("pcfg-extract", "estimate a PCFG and write it")
    g = add("pcfg-generate", "sample trees from a grammar file", corpus=False)
    g.add_argument("grammar", help="grammar file written by pcfg-extract")
    add("pcfg-study", "PCFG baseline: extract, generate and analyse")
    add("synth", "MI estimates on the synthetic two-symbol model", corpus=False)
    f = add("fit", "fit both decay or growth models to a CSV column", corpus=False)
    f.add_argument("table", help="CSV file")
    f.add_argument("--x", default="distance", help="abscissa column")
    f.add_argument("--y", default="value_nats", help="ordinate column")
    f.add_argument("--where", action="append", default=[], metavar="COL=VALUE",
                   help="keep only rows matching (repeatable)")
    f.add_argument("--mode", choices=("log", "linear"), default="log",
                   help="log-scaled decay fit or linear-scale growth fit")
    f.add_argument("--range", dest="fit_range", default=":", help="lo:hi")
    return parser


def resolve_config(ns: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(getattr(ns, "config", None), getattr(ns, "preset", None))
    updates = {}
    for flag, (fname, parse) in _OVERRIDES.items():
        raw = getattr(ns, flag, None)
        if raw is not None:
            updates[fname] = parse(raw)
    if getattr(ns, "strict", None):
        updates["strict"] = True
    if getattr(ns, "corpus", None):
        updates["corpus"] = tuple(str(Path(p)) for p in ns.corpus)
    return cfg.with_overrides(**updates)


def _cmd_preprocess(cfg: ExperimentConfig) -> ExperimentResult:
    corpus = load_corpus(cfg)
    res = ExperimentResult("preprocess", manifest=_manifest(cfg, corpus,
                                                            trees_read=len(corpus.original)))
    res.texts["preprocessed.txt"] = "".join(write_bracketed(t) + "\n" for t in corpus.trees)
    res.tables["unmapped_tags.csv"] = (["tag", "count"],
                                       [[t, c] for t, c in sorted(corpus.unmapped.items())])
    return res


def _cmd_extract(cfg: ExperimentConfig) -> ExperimentResult:
    corpus = load_corpus(cfg)
    res = ExperimentResult("pcfg-extract", manifest=_manifest(cfg, corpus))
    res.texts["grammar.txt"] = write_grammar(extract_rules(corpus.trees))
    return res


def _cmd_generate(cfg: ExperimentConfig, grammar_path: str) -> ExperimentResult:
    g = read_grammar(Path(grammar_path).read_text(encoding="utf-8"))
    trees, report = generate_corpus(g, cfg.pcfg_attempts, cfg.pcfg_max_iterations,
                                    seed=cfg.seed, max_nodes=cfg.pcfg_max_nodes)
    res = ExperimentResult("pcfg-generate", manifest=_manifest(
        cfg, None, grammar_sha256=file_sha256(grammar_path)))
    res.texts["generated.txt"] = "".join(write_bracketed(t) + "\n" for t in trees)
    res.documents["generation_report.json"] = report.as_dict()
    return res


def _cmd_fit(cfg: ExperimentConfig, ns: argparse.Namespace) -> ExperimentResult:
    with open(ns.table, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    for cond in ns.where:
        col, _, val = cond.partition("=")
        rows = [r for r in rows if r.get(col) == val]
    pts = sorted((float(r[ns.x]), float(r[ns.y])) for r in rows if r[ns.y] not in ("", "nan"))
    if len({x for x, _ in pts}) != len(pts):
        raise SystemExit("duplicate x values after filtering; narrow the selection with --where")
    s = Series(tuple(p[0] for p in pts), tuple(p[1] for p in pts), ns.mode == "log",
               name=f"{Path(ns.table).name}:{ns.y}")
    report = fit_both(s, *parse_range(ns.fit_range))
    res = ExperimentResult("fit", manifest={"input_sha256": file_sha256(ns.table)})
    res.documents["fits.json"] = [report.as_dict()]
    return res


_RUNS = {
    "stats": run_tree_stats,
    "mi-seq": run_mi_sequential,
    "mi-str": run_mi_structural,
    "growth": run_growth,
    "cfib": run_cfib,
    "pcfg-study": run_pcfg_study,
}


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(ns, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(ns)
        if ns.command == "preprocess":
            res = _cmd_preprocess(cfg)
        elif ns.command == "pcfg-extract":
            res = _cmd_extract(cfg)
        elif ns.command == "pcfg-generate":
            res = _cmd_generate(cfg.validate(need_corpus=False), ns.grammar)
        elif ns.command == "synth":
            res = run_synthetic(cfg)
        elif ns.command == "fit":
            res = _cmd_fit(cfg, ns)
        else:
            res = _RUNS[ns.command](cfg)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"treemi {ns.command}: error: {exc}", file=sys.stderr)
        return 2
    written = res.write(cfg.out)
    log.info("wrote %d files to %s", len(written), cfg.out)
    for doc in res.documents.values():
        if isinstance(doc, list):
            for rep in doc:
                if isinstance(rep, dict) and "selected" in rep:
                    print(f"{rep['series']}: {rep['selected']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
