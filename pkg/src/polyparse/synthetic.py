"""Small generated treebanks for tests, demos and desk-scale experiments.

A language is a random vocabulary plus word-order settings.  A *related*
language reuses its partner's stems through a few sound changes and keeps
the word order; an *unrelated* one gets fresh stems and head-final order.
Sentences carry determiners, adjectives, subjects, objects, prepositional
phrases whose attachment is ambiguous from the surface string, adverbs, and
occasionally a noun modifier moved past the verb, which makes the tree
non-projective.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conllu import Sentence, Token

CONSONANTS = "ptkbdgmnslrvz"
VOWELS = "aeiou"


@dataclass
class Language:
    code: str
    stems: dict[str, list[str]]
    suffix: dict[str, str]
    verb_final: bool = False
    adj_after: bool = False
    extraposition: float = 0.08
    function_words: dict[str, list[str]] = field(default_factory=dict)


def _syllables(rng: np.random.Generator, k: int) -> str:
    return "".join(rng.choice(list(CONSONANTS)) + rng.choice(list(VOWELS)) for _ in range(k))


def _stems(rng: np.random.Generator, n: int) -> list[str]:
    out: set[str] = set()
    while len(out) < n:
        out.add(_syllables(rng, int(rng.integers(1, 3))))
    return sorted(out)


def make_language(code: str, seed: int, vocab: int = 40, **kw) -> Language:
    rng = np.random.default_rng(seed)
    stems = {pos: _stems(rng, vocab) for pos in ("noun", "verb", "adj", "adv")}
    fw = {"det": _stems(rng, 3), "prep": _stems(rng, 4)}
    suffix = {"noun": _syllables(rng, 1)[1:], "verb": _syllables(rng, 1), "adj": "", "adv": "l"}
    return Language(code, stems, suffix, function_words=fw, **kw)


_SOUND_CHANGES = (("k", "c"), ("a", "e"), ("p", "b"), ("o", "u"))


def _shift(form: str) -> str:
    for a, b in _SOUND_CHANGES:
        form = form.replace(a, b)
    return form


def related_language(base: Language, code: str, seed: int, keep: float = 0.8) -> Language:
    """Partner language: most stems undergo sound changes, the rest are new."""
    rng = np.random.default_rng(seed)
    stems = {}
    for pos, words in base.stems.items():
        fresh = _stems(rng, len(words))
        stems[pos] = [_shift(w) if rng.random() < keep else f for w, f in zip(words, fresh)]
    fw = {k: [_shift(w) for w in v] for k, v in base.function_words.items()}
    suffix = {k: _shift(v) for k, v in base.suffix.items()}
    return Language(code, stems, suffix, base.verb_final, base.adj_after, base.extraposition, fw)


def unrelated_language(code: str, seed: int, vocab: int = 40) -> Language:
    return make_language(code, seed, vocab, verb_final=True, adj_after=True)


class _Builder:
    def __init__(self):
        self.forms: list[str] = []
        self.heads: list[int | None] = []
        self.labels: list[str] = []

    def add(self, form: str, label: str) -> int:
        self.forms.append(form)
        self.heads.append(None)
        self.labels.append(label)
        return len(self.forms)  # 1-based id

    def attach(self, dep: int, head: int) -> None:
        self.heads[dep - 1] = head


def _word(lang: Language, rng, pos: str) -> str:
    stems = lang.stems[pos]
    # Zipf-like choice so frequent and rare words both occur
    ranks = np.arange(1, len(stems) + 1)
    p = 1.0 / ranks
    return stems[int(rng.choice(len(stems), p=p / p.sum()))] + lang.suffix[pos]


def generate_sentence(lang: Language, rng: np.random.Generator) -> Sentence:
    b = _Builder()

    def emit_np(label: str) -> int:
        det = rng.random() < 0.8
        n_adj = int(rng.integers(0, 3))
        order = []
        if det:
            order.append("det")
        if not lang.adj_after:
            order += ["adj"] * n_adj + ["noun"]
        else:
            order += ["noun"] + ["adj"] * n_adj
        noun_id = None
        deps = []
        for kind in order:
            if kind == "det":
                deps.append(b.add(str(rng.choice(lang.function_words["det"])), "det"))
            elif kind == "adj":
                deps.append(b.add(_word(lang, rng, "adj"), "amod"))
            else:
                noun_id = b.add(_word(lang, rng, "noun"), label)
        for d in deps:
            b.attach(d, noun_id)
        return noun_id

    def emit_pp() -> int:
        prep = b.add(str(rng.choice(lang.function_words["prep"])), "case")
        noun = emit_np("nmod")
        b.attach(prep, noun)
        return noun

    subj = emit_np("nsubj")
    moved_pp = rng.random() < lang.extraposition
    if rng.random() < 0.3 and not moved_pp:
        subj_pp = emit_pp()
        b.attach(subj_pp, subj)

    transitive = rng.random() < 0.7
    verb = obj = None
    if lang.verb_final:
        if transitive:
            obj = emit_np("obj")
        verb = b.add(_word(lang, rng, "verb"), "root")
    else:
        verb = b.add(_word(lang, rng, "verb"), "root")
        if transitive:
            obj = emit_np("obj")
    b.attach(subj, verb)
    if obj is not None:
        b.attach(obj, verb)
    b.attach(verb, 0)

    if moved_pp:
        # modifier of the subject placed after the verb phrase: crossing arcs
        pp = emit_pp()
        b.attach(pp, subj)
    if rng.random() < 0.5:
        # prepositional phrase attached to the object or the verb
        pp = emit_pp()
        if obj is not None and rng.random() < 0.5:
            b.attach(pp, obj)
        else:
            b.labels[pp - 1] = "obl"
            b.attach(pp, verb)
    if rng.random() < 0.3:
        adv = b.add(_word(lang, rng, "adv"), "advmod")
        b.attach(adv, verb)

    tokens = [Token(i + 1, f, int(h), l) for i, (f, h, l) in enumerate(zip(b.forms, b.heads, b.labels))]
    return Sentence(tokens, lang.code)


def generate_treebank(lang: Language, n: int, seed: int) -> list[Sentence]:
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        s = generate_sentence(lang, rng)
        s.comments = [f"# sent_id = {lang.code}-{seed}-{i + 1}"]
        s.layout = [("comment", s.comments[0])] + [("token", k) for k in range(len(s.tokens))]
        out.append(s)
    return out


def language_pair(kind: str = "related", seed: int = 0, vocab: int = 40) -> tuple[Language, Language]:
    a = make_language("aa", seed, vocab)
    if kind == "related":
        return a, related_language(a, "ab", seed + 1)
    if kind == "unrelated":
        return a, unrelated_language("zz", seed + 1, vocab)
    raise ValueError(f"pair kind must be 'related' or 'unrelated', got {kind!r}")


def pair_splits(kind: str, sizes: tuple[int, int, int], seed: int = 0, vocab: int = 40):
    """``{code: (train, dev, test)}`` for a generated pair."""
    out = {}
    for i, lang in enumerate(language_pair(kind, seed, vocab)):
        base = 1000 * (seed + 1) + 10 * i
        out[lang.code] = tuple(generate_treebank(lang, n, base + k) for k, n in enumerate(sizes))
    return out
