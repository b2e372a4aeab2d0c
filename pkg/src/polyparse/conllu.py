"""CoNLL-U reading and writing, training-set sampling and corpus statistics.

Only ID, FORM, HEAD and DEPREL are interpreted.  Every other column, every
comment and every multiword-token or empty-node line is kept verbatim so a
parsed file can be written back unchanged.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class ConlluError(ValueError):
    """Malformed CoNLL-U input."""


@dataclass
class Token:
    index: int
    form: str
    head: int | None
    label: str | None
    columns: list[str] = field(default_factory=list, repr=False)

    def to_line(self) -> str:
        cols = list(self.columns) if self.columns else [str(self.index), self.form] + ["_"] * 8
        cols[6] = "_" if self.head is None else str(self.head)
        cols[7] = "_" if self.label is None else self.label
        return "\t".join(cols)


@dataclass
class Sentence:
    tokens: list[Token]
    language: str
    comments: list[str] = field(default_factory=list)
    # ("comment", text) | ("token", position) | ("raw", line), in file order
    layout: list[tuple[str, object]] = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def heads(self) -> list[int]:
        """Gold heads with a leading placeholder so ``heads[i]`` is the head of token ``i``."""
        return [-1] + [t.head for t in self.tokens]

    @property
    def labels(self) -> list[str]:
        return [""] + [t.label for t in self.tokens]

    @property
    def forms(self) -> list[str]:
        return [t.form for t in self.tokens]

    @property
    def sent_id(self) -> str | None:
        for c in self.comments:
            body = c.lstrip("#").strip()
            if body.startswith("sent_id"):
                return body.split("=", 1)[-1].strip()
        return None

    def with_arcs(self, heads: Sequence[int], labels: Sequence[str]) -> "Sentence":
        """Copy with HEAD/DEPREL replaced; ``heads``/``labels`` are 1-indexed like :attr:`heads`."""
        out = copy.deepcopy(self)
        for t in out.tokens:
            t.head = int(heads[t.index])
            t.label = labels[t.index]
        return out

    def is_projective(self) -> bool:
        return is_projective(self.heads)


def is_projective(heads: Sequence[int]) -> bool:
    """True when every word between a head and its dependent descends from that head.

    ``heads[0]`` is ignored; node 0 is the root.
    """
    n = len(heads) - 1
    for d in range(1, n + 1):
        h = heads[d]
        lo, hi = min(h, d), max(h, d)
        for k in range(lo + 1, hi):
            a = k
            while a not in (0, h):
                a = heads[a]
            if a != h:
                return False
    return True


def _tree_error(heads: Sequence[int]) -> str | None:
    n = len(heads) - 1
    for start in range(1, n + 1):
        seen = set()
        node = start
        while node != 0:
            if node in seen:
                return f"cycle through token {node}"
            seen.add(node)
            node = heads[node]
    return None


def parse_conllu(text: str | Iterable[str], language: str, require_tree: bool = True) -> list[Sentence]:
    """Read sentences from CoNLL-U text.

    With ``require_tree`` false, HEAD and DEPREL may be ``_`` (input to be
    parsed); otherwise every token needs an integer head and the heads must
    form a tree rooted at 0.
    """
    lines = text.splitlines() if isinstance(text, str) else [l.rstrip("\n") for l in text]
    sentences: list[Sentence] = []
    tokens: list[Token] = []
    token_lines: list[int] = []
    comments: list[str] = []
    layout: list[tuple[str, object]] = []
    start_line = 1

    def finish(lineno: int) -> None:
        nonlocal tokens, token_lines, comments, layout
        if not tokens and not comments and not layout:
            return
        if not tokens:
            raise ConlluError(f"line {lineno}: sentence without syntactic words")
        sent = Sentence(tokens, language, comments, layout)
        _validate(sent, token_lines, start_line, require_tree)
        sentences.append(sent)
        tokens, token_lines, comments, layout = [], [], [], []

    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            finish(lineno)
            start_line = lineno + 1
            continue
        if line.startswith("#"):
            comments.append(line)
            layout.append(("comment", line))
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ConlluError(f"line {lineno}: expected 10 tab-separated columns, found {len(cols)}")
        tid = cols[0]
        if "-" in tid or "." in tid:
            layout.append(("raw", line))
            continue
        try:
            index = int(tid)
        except ValueError:
            raise ConlluError(f"line {lineno}: bad token id {tid!r}") from None
        if index != len(tokens) + 1:
            raise ConlluError(f"line {lineno}: token id {index} out of sequence")
        head: int | None
        if cols[6] == "_" and not require_tree:
            head = None
        else:
            try:
                head = int(cols[6])
            except ValueError:
                raise ConlluError(f"line {lineno}: non-integer head {cols[6]!r}") from None
            if head < 0:
                raise ConlluError(f"line {lineno}: head {head} out of range")
            if head == index:
                raise ConlluError(f"line {lineno}: token {index} is its own head")
        label = None if cols[7] == "_" and not require_tree else cols[7]
        tokens.append(Token(index, cols[1], head, label, cols))
        token_lines.append(lineno)
        layout.append(("token", len(tokens) - 1))
    finish(len(lines) + 1)
    return sentences


def _validate(sent: Sentence, token_lines: list[int], start_line: int, require_tree: bool) -> None:
    n = len(sent.tokens)
    name = sent.sent_id or f"starting at line {start_line}"
    for t, lineno in zip(sent.tokens, token_lines):
        if t.head is not None and t.head > n:
            raise ConlluError(f"line {lineno}: head {t.head} out of range in sentence {name}")
    if any(t.head is None for t in sent.tokens):
        if require_tree:
            raise ConlluError(f"sentence {name}: missing heads")
        return
    err = _tree_error(sent.heads)
    if err:
        raise ConlluError(f"sentence {name}: {err} (line {start_line})")


def read_conllu(path: str | Path, language: str, require_tree: bool = True) -> list[Sentence]:
    return parse_conllu(Path(path).read_text(encoding="utf-8"), language, require_tree)


def serialize_conllu(sentences: Iterable[Sentence]) -> str:
    chunks = []
    for sent in sentences:
        lines = []
        if sent.layout:
            for kind, item in sent.layout:
                if kind == "token":
                    lines.append(sent.tokens[item].to_line())  # type: ignore[index]
                else:
                    lines.append(item)  # type: ignore[arg-type]
        else:
            lines = list(sent.comments) + [t.to_line() for t in sent.tokens]
        chunks.append("\n".join(lines) + "\n\n")
    return "".join(chunks)


def write_conllu(path: str | Path, sentences: Iterable[Sentence]) -> None:
    Path(path).write_text(serialize_conllu(sentences), encoding="utf-8")


def sample_training(sentences: Sequence[Sentence], n: int, seed: int) -> list[Sentence]:
    """Uniform sample of ``min(n, len)`` sentences without replacement, original order kept."""
    if n < 1:
        raise ValueError("sample size must be at least 1")
    if n >= len(sentences):
        return list(sentences)
    picked = np.random.default_rng(seed).choice(len(sentences), size=n, replace=False)
    return [sentences[i] for i in sorted(picked)]


def treebank_stats(sentences: Sequence[Sentence]) -> tuple[int, int]:
    return len(sentences), sum(len(s.tokens) for s in sentences)
