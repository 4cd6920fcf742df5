"""Many-to-one maps from treebank tags to a small set of categories."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping

__all__ = ["TagMap", "base_label", "english_tagmap", "japanese_tagmap", "load_tagmap"]

ARTIFICIAL_MARK = "|"
COLLAPSE_JOIN = "+"
_FUNCTION_SEPARATORS = "-=;"


def base_label(label: str) -> str:
    """Strip binarization markers, collapsed-chain suffixes and function tags.

    >>> base_label("NP-SBJ-1|<VP-PP>")
    'NP'
    >>> base_label("-LRB-")
    '-LRB-'
    """
    label = label.split(ARTIFICIAL_MARK, 1)[0]
    label = label.split(COLLAPSE_JOIN, 1)[0]
    if len(label) > 1 and label.startswith("-") and label.endswith("-"):
        return label
    for k, ch in enumerate(label):
        if k > 0 and ch in _FUNCTION_SEPARATORS:
            return label[:k]
    return label


@dataclass(frozen=True)
class TagMap:
    entries: Mapping[str, str]
    default_category: str = "Others"
    name: str = ""

    def __call__(self, tag: str, unmapped: Counter | None = None) -> str:
        try:
            return self.entries[tag]
        except KeyError:
            if unmapped is not None:
                unmapped[tag] += 1
            return self.default_category

    @property
    def categories(self) -> frozenset[str]:
        return frozenset(self.entries.values()) | {self.default_category}

    @classmethod
    def parse(cls, text: str, default_category: str = "Others", name: str = "") -> "TagMap":
        """Read ``REDUCED: raw1 raw2 ...`` lines; ``#`` starts a comment line."""
        entries: dict[str, str] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            head, sep, rest = line.partition(":")
            # a raw ':' tag can follow the separator; the first colon is the separator
            if not sep or not head.strip():
                raise ValueError(f"line {lineno}: expected 'REDUCED: raw ...'")
            reduced = head.strip()
            for raw in rest.split():
                old = entries.setdefault(raw, reduced)
                if old != reduced:
                    raise ValueError(f"line {lineno}: {raw!r} mapped to both {old!r} and {reduced!r}")
            entries.setdefault(reduced, reduced)
        return cls(entries, default_category, name)

    def dumps(self) -> str:
        groups: dict[str, list[str]] = {}
        for raw, red in self.entries.items():
            groups.setdefault(red, []).append(raw)
        return "".join(f"{red}: {' '.join(raws)}\n" for red, raws in groups.items())


def load_tagmap(path: str, default_category: str = "Others") -> TagMap:
    with open(path, encoding="utf-8") as f:
        return TagMap.parse(f.read(), default_category, name=path)


def _shipped(name: str) -> TagMap:
    text = resources.files("treemi.treebank").joinpath("data", f"{name}.txt").read_text("utf-8")
    return TagMap.parse(text, "Others", name=name)


def english_tagmap() -> TagMap:
    return _shipped("english")


def japanese_tagmap() -> TagMap:
    return _shipped("japanese")
