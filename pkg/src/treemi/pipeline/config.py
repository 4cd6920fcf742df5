"""Experiment configuration: INI files, presets and validation.

A config file has the sections below; every key is optional and falls back
to the preset (``default`` unless ``[run] preset`` names another)::

    [run]        preset, seed, out, source (corpus | synthetic)
    [corpus]     paths (whitespace separated), tagmap (english | japanese | none | PATH),
                 strict
    [preprocess] scheme, direction, max_length, null_labels, null_tokens
    [sampling]   seq_distances, str_distances, ladder, estimators, node_kind,
                 cfib_pairs (e.g. ``NP:NP VP:NP``)
    [fit]        seq_range, str_range, growth_range, cfib_range (``lo:hi``, either side optional)
    [pcfg]       attempts, max_iterations, max_nodes
    [synthetic]  kind, parameter, distances

Integer lists accept ``1-30`` ranges and comma/space separated values;
the ladder also accepts ``1e4`` style numbers.
"""
from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any

from ..entropy import resolve_estimator
from ..metrics import NODE_KINDS
from ..treebank.transforms import SCHEMES

__all__ = ["ExperimentConfig", "PRESETS", "load_config", "geometric_ladder", "parse_int_list"]


def geometric_ladder(top: int, rungs: int, factor: int = 4) -> tuple[int, ...]:
    """``rungs`` sample sizes growing by ``factor`` and ending at ``top``."""
    return tuple(int(round(top / factor ** k)) for k in range(rungs - 1, -1, -1))


def parse_int_list(text: str) -> tuple[int, ...]:
    out: list[int] = []
    for tok in text.replace(",", " ").split():
        if "-" in tok[1:]:
            lo, hi = tok.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(float(tok)))
    return tuple(out)


def parse_range(text: str) -> tuple[float | None, float | None]:
    lo, _, hi = text.partition(":")
    return (float(lo) if lo.strip() else None, float(hi) if hi.strip() else None)


def parse_pairs(text: str) -> tuple[tuple[str, str], ...]:
    out = []
    for tok in text.replace(",", " ").split():
        x0, sep, x1 = tok.partition(":")
        if not sep or not x0 or not x1:
            raise ValueError(f"condition pair {tok!r} is not of the form X0:X1")
        out.append((x0, x1))
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    corpus: tuple[str, ...] = ()
    tagmap: str = "english"
    strict: bool = False
    scheme: str = "binarized"
    direction: str = "right"
    max_length: int | None = 40
    null_labels: tuple[str, ...] = ("-NONE-",)
    null_tokens: tuple[str, ...] = ()
    source: str = "corpus"
    seq_distances: tuple[int, ...] = tuple(range(1, 31))
    str_distances: tuple[int, ...] = tuple(range(1, 31))
    ladder: tuple[int, ...] = geometric_ladder(2_560_000, 5)
    estimators: tuple[str, ...] = ("grassberger",)
    node_kind: str | None = None
    cfib_pairs: tuple[tuple[str, str], ...] = (("NP", "NP"),)
    seq_range: tuple[float | None, float | None] = (None, None)
    str_range: tuple[float | None, float | None] = (None, None)
    growth_range: tuple[float | None, float | None] = (None, None)
    cfib_range: tuple[float | None, float | None] = (None, None)
    pcfg_attempts: int = 16_000_000
    pcfg_max_iterations: int = 100
    pcfg_max_nodes: int = 100_000
    synth_kind: str = "exponential"
    synth_parameter: float = 0.1
    synth_distances: tuple[int, ...] = tuple(range(1, 101))
    seed: int = 0
    out: str = "results"

    @property
    def effective_node_kind(self) -> str:
        if self.node_kind is not None:
            return self.node_kind
        return "phrasal_only" if self.scheme == "phrasal_only" else "pos_and_phrasal"

    def validate(self, need_corpus: bool = True) -> "ExperimentConfig":
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.direction not in ("right", "left"):
            raise ValueError("direction must be 'right' or 'left'")
        if self.node_kind is not None and self.node_kind not in NODE_KINDS:
            raise ValueError(f"node_kind must be one of {NODE_KINDS}")
        if self.source not in ("corpus", "synthetic"):
            raise ValueError("source must be 'corpus' or 'synthetic'")
        if not self.ladder or any(n < 2 for n in self.ladder):
            raise ValueError("every N_data ladder entry must be at least 2")
        if any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
            raise ValueError(f"the N_data ladder must be strictly increasing: {self.ladder}")
        for name in ("seq_distances", "str_distances", "synth_distances"):
            if any(r < 1 for r in getattr(self, name)):
                raise ValueError(f"{name} must be >= 1")
        for e in self.estimators:
            resolve_estimator(e)
        if self.pcfg_attempts < 1 or self.pcfg_max_iterations < 1:
            raise ValueError("pcfg attempts and max_iterations must be >= 1")
        if need_corpus and self.source == "corpus":
            if not self.corpus:
                raise ValueError("no corpus files configured")
            missing = [p for p in self.corpus if not Path(p).is_file()]
            if missing:
                raise FileNotFoundError(f"corpus files not found: {missing}")
        if self.tagmap not in ("english", "japanese", "none") and not Path(self.tagmap).is_file():
            raise FileNotFoundError(f"tag map not found: {self.tagmap}")
        return self

    def canonical(self) -> str:
        """Stable JSON of every setting that affects results, used for the
        manifest hash (the output directory is left out)."""
        d = asdict(self)
        del d["out"]
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    def with_overrides(self, **kw: Any) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


PRESETS: dict[str, dict[str, Any]] = {
    "default": {},
    # quick runs on small corpora
    "toy": dict(seq_distances=tuple(range(1, 6)), str_distances=tuple(range(1, 7)),
                ladder=(100, 400), pcfg_attempts=2000, synth_distances=tuple(range(1, 21))),
    "japanese": dict(tagmap="japanese", direction="left"),
    "pcfg": dict(ladder=geometric_ladder(8_000_000, 5), pcfg_attempts=16_000_000,
                 pcfg_max_iterations=100),
    "synthetic": dict(source="synthetic", ladder=geometric_ladder(8_000_000, 6),
                      synth_distances=tuple(range(1, 101))),
    "phrasal": dict(scheme="phrasal_only"),
    "unbinarized": dict(scheme="unbinarized"),
}


def _get(sec: configparser.SectionProxy | None, key: str):
    return None if sec is None or key not in sec else sec[key].strip()


_KEYS = {
    # (section, key): (field, parser)
    ("run", "seed"): ("seed", int),
    ("run", "out"): ("out", str),
    ("run", "source"): ("source", str),
    ("corpus", "paths"): ("corpus", lambda s: tuple(s.split())),
    ("corpus", "tagmap"): ("tagmap", str),
    ("corpus", "strict"): ("strict", lambda s: s.lower() in ("1", "true", "yes", "on")),
    ("preprocess", "scheme"): ("scheme", str),
    ("preprocess", "direction"): ("direction", str),
    ("preprocess", "max_length"): ("max_length", lambda s: None if s.lower() == "none" else int(s)),
    ("preprocess", "null_labels"): ("null_labels", lambda s: tuple(s.split())),
    ("preprocess", "null_tokens"): ("null_tokens", lambda s: tuple(s.split())),
    ("sampling", "seq_distances"): ("seq_distances", parse_int_list),
    ("sampling", "str_distances"): ("str_distances", parse_int_list),
    ("sampling", "ladder"): ("ladder", parse_int_list),
    ("sampling", "estimators"): ("estimators", lambda s: tuple(s.replace(",", " ").split())),
    ("sampling", "node_kind"): ("node_kind", str),
    ("sampling", "cfib_pairs"): ("cfib_pairs", parse_pairs),
    ("fit", "seq_range"): ("seq_range", parse_range),
    ("fit", "str_range"): ("str_range", parse_range),
    ("fit", "growth_range"): ("growth_range", parse_range),
    ("fit", "cfib_range"): ("cfib_range", parse_range),
    ("pcfg", "attempts"): ("pcfg_attempts", lambda s: int(float(s))),
    ("pcfg", "max_iterations"): ("pcfg_max_iterations", int),
    ("pcfg", "max_nodes"): ("pcfg_max_nodes", int),
    ("synthetic", "kind"): ("synth_kind", str),
    ("synthetic", "parameter"): ("synth_parameter", float),
    ("synthetic", "distances"): ("synth_distances", parse_int_list),
}


def preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return ExperimentConfig(**PRESETS[name])


def load_config(path: str | Path | None = None, preset_name: str | None = None) -> ExperimentConfig:
    """Preset, then the file's values on top.  Relative corpus and tag-map
    paths in the file are resolved against the file's directory."""
    cp = configparser.ConfigParser(interpolation=None)
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    name = preset_name or (cp.get("run", "preset", fallback=None) if path else None) or "default"
    cfg = preset(name)
    known_sections = {s for s, _ in _KEYS}
    for sec in cp.sections():
        if sec not in known_sections:
            raise ValueError(f"unknown config section [{sec}]")
        for key in cp[sec]:
            if key != "preset" and (sec, key) not in _KEYS:
                raise ValueError(f"unknown key {key!r} in [{sec}]")
    updates = {}
    for (sec, key), (fname, parse) in _KEYS.items():
        raw = _get(cp[sec] if cp.has_section(sec) else None, key)
        if raw is not None:
            updates[fname] = parse(raw)
    if path is not None:
        base = Path(path).resolve().parent
        if "corpus" in updates:
            updates["corpus"] = tuple(str(base / p) for p in updates["corpus"])
        tm = updates.get("tagmap")
        if tm is not None and tm not in ("english", "japanese", "none"):
            updates["tagmap"] = str(base / tm)
    return replace(cfg, **updates)


FIELD_NAMES = tuple(f.name for f in fields(ExperimentConfig))
