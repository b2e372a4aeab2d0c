"""Word, character, label and language vocabularies.

Word and character maps are either shared by all languages or owned by one
language, following the sharing mode of the word and character parameter
sets.  Labels are always pooled because the classifier may be shared.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .conllu import Sentence
from .strategy import SharingStrategy

PAD, UNK = 0, 1
RESERVED = ("<pad>", "<unk>")
SHARED = "shared"


def _index(items) -> dict[str, int]:
    table = {tok: i for i, tok in enumerate(RESERVED)}
    for item in sorted(items):
        table.setdefault(item, len(table))
    return table


@dataclass
class Lexicon:
    languages: list[str]
    word_shared: bool
    char_shared: bool
    words: dict[str, dict[str, int]]
    chars: dict[str, dict[str, int]]
    labels: list[str]
    word_freq: dict[str, dict[str, int]] = field(default_factory=dict)

    def __post_init__(self):
        self._label_ids = {l: i for i, l in enumerate(self.labels)}

    # scopes ---------------------------------------------------------------

    def word_scope(self, language: str) -> str:
        self._check_language(language)
        return SHARED if self.word_shared else language

    def char_scope(self, language: str) -> str:
        self._check_language(language)
        return SHARED if self.char_shared else language

    def language_id(self, language: str) -> int:
        self._check_language(language)
        return self.languages.index(language)

    def _check_language(self, language: str) -> None:
        if language not in self.languages:
            raise KeyError(f"language {language!r} not in lexicon {self.languages}")

    # lookups --------------------------------------------------------------

    def word_id(self, form: str, language: str) -> int:
        return self.words[self.word_scope(language)].get(form, UNK)

    def char_ids(self, form: str, language: str) -> list[int]:
        table = self.chars[self.char_scope(language)]
        return [table.get(ch, UNK) for ch in form]

    def label_id(self, label: str) -> int:
        return self._label_ids[label]

    def frequency(self, form: str, language: str) -> int:
        return self.word_freq.get(self.word_scope(language), {}).get(form, 0)

    # persistence ----------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "languages": self.languages,
            "word_shared": self.word_shared,
            "char_shared": self.char_shared,
            "words": self.words,
            "chars": self.chars,
            "labels": self.labels,
            "word_freq": self.word_freq,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Lexicon":
        return cls(
            list(data["languages"]),
            bool(data["word_shared"]),
            bool(data["char_shared"]),
            {k: dict(v) for k, v in data["words"].items()},
            {k: dict(v) for k, v in data["chars"].items()},
            list(data["labels"]),
            {k: dict(v) for k, v in data.get("word_freq", {}).items()},
        )

    def digest(self) -> dict[str, str]:
        def h(obj) -> str:
            return hashlib.sha256(json.dumps(obj, sort_keys=True, ensure_ascii=False).encode()).hexdigest()

        return {"words": h(self.words), "chars": h(self.chars), "labels": h(self.labels)}


def build_lexicon(corpora: Mapping[str, Sequence[Sentence]], strategy: SharingStrategy) -> Lexicon:
    """Vocabularies for ``corpora`` (language -> training sentences) under ``strategy``."""
    if not corpora:
        raise ValueError("build_lexicon needs at least one language")
    languages = list(corpora)
    word_shared = strategy.word.shared
    char_shared = strategy.char.shared

    word_counts = {lang: Counter(t.form for s in sents for t in s.tokens) for lang, sents in corpora.items()}
    char_sets = {lang: {ch for s in sents for t in s.tokens for ch in t.form} for lang, sents in corpora.items()}

    if word_shared:
        pooled = Counter()
        for c in word_counts.values():
            pooled.update(c)
        words = {SHARED: _index(pooled)}
        freq = {SHARED: dict(pooled)}
    else:
        words = {lang: _index(c) for lang, c in word_counts.items()}
        freq = {lang: dict(c) for lang, c in word_counts.items()}
    if char_shared:
        chars = {SHARED: _index(set().union(*char_sets.values()))}
    else:
        chars = {lang: _index(cs) for lang, cs in char_sets.items()}
    labels = sorted({t.label for sents in corpora.values() for s in sents for t in s.tokens})
    return Lexicon(languages, word_shared, char_shared, words, chars, labels, freq)
