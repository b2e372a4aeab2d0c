"""The parser network and its strategy-aware parameter store.

Three parameter sets make up the model:

* ``char``: a character lookup table and a one-layer character BiLSTM,
* ``word``: a word lookup table, a two-layer word BiLSTM and learned vectors
  for the root and for empty feature slots,
* ``state``: two single-hidden-layer MLPs, one scoring bare transitions and
  one scoring labeled transitions, whose outputs are interpolated.

Each set lives under a scope: ``shared`` when the strategy shares it, else one
copy per language.  A soft-shared set also gets its own language-embedding
table, concatenated to that network's input.

Actions are numbered ``0 = SHIFT``, ``1 = SWAP``, ``2 + l = LEFT-ARC_l`` and
``2 + L + l = RIGHT-ARC_l`` for ``L`` labels.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import autodiff as ad
from .archive import load_archive, save_archive
from .lexicon import PAD, SHARED, Lexicon
from .strategy import COMPONENTS, Mode, SharingStrategy
from .transitions import LEFT, RIGHT, ROOT, SHIFT, SWAP, Configuration, Transition


class ConfigError(ValueError):
    """Model pieces that do not belong together."""


@dataclass(frozen=True)
class ModelDims:
    word_dim: int = 100
    char_dim: int = 24
    char_hidden: int = 50
    word_hidden: int = 125
    word_layers: int = 2
    lang_dim: int = 12
    mlp_hidden: int = 100
    stack_items: int = 3
    buffer_items: int = 1
    interpolation: float = 0.5

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "interpolation":
                if not 0.0 <= v <= 1.0:
                    raise ConfigError(f"interpolation must lie in [0, 1], got {v}")
            elif not (isinstance(v, int) and v > 0):
                raise ConfigError(f"{f.name} must be a positive integer, got {v!r}")

    @property
    def feature_items(self) -> int:
        return self.stack_items + self.buffer_items

    @classmethod
    def from_dict(cls, data) -> "ModelDims":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown model dimensions: {sorted(unknown)}")
        return cls(**data)


def char_input_width(dims: ModelDims, mode: Mode) -> int:
    return dims.char_dim + (dims.lang_dim if mode is Mode.SOFT else 0)


def word_input_width(dims: ModelDims, mode: Mode) -> int:
    return dims.word_dim + 2 * dims.char_hidden + (dims.lang_dim if mode is Mode.SOFT else 0)


def feature_width(dims: ModelDims, mode: Mode) -> int:
    return dims.feature_items * 2 * dims.word_hidden + (dims.lang_dim if mode is Mode.SOFT else 0)


class ParameterRegistry:
    """Named trainable tensors, keyed ``component/scope/...``."""

    def __init__(self):
        self._params: dict[str, ad.Tensor] = {}

    def add(self, name: str, value: np.ndarray) -> ad.Tensor:
        if name in self._params:
            raise ConfigError(f"duplicate parameter {name}")
        t = ad.parameter(value, name=name)
        self._params[name] = t
        return t

    def __getitem__(self, name: str) -> ad.Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def items(self):
        return self._params.items()

    def tensors(self) -> dict[str, ad.Tensor]:
        return dict(self._params)

    def scopes(self, component: str) -> list[str]:
        return sorted({n.split("/")[1] for n in self._params if n.startswith(component + "/")})

    def count(self, component: str | None = None) -> int:
        """Number of scalar parameters, optionally for one component."""
        return sum(
            t.size for n, t in self._params.items() if component is None or n.startswith(component + "/")
        )

    def language_tables(self) -> list[str]:
        return sorted(n for n in self._params if n.endswith("/lang"))

    def snapshot(self) -> dict[str, np.ndarray]:
        return {n: t.value.copy() for n, t in self._params.items()}

    def restore(self, values: dict[str, np.ndarray]) -> None:
        if set(values) != set(self._params):
            missing = set(self._params) ^ set(values)
            raise ConfigError(f"parameter sets differ: {sorted(missing)[:5]}")
        for n, v in values.items():
            t = self._params[n]
            if v.shape != t.shape:
                raise ConfigError(f"{n}: shape {v.shape} does not match {t.shape}")
            t.value = np.array(v, dtype=t.value.dtype)

    def zero_grad(self) -> None:
        for t in self._params.values():
            t.grad = None


def _scope(mode: Mode, language: str) -> str:
    return SHARED if mode.shared else language


@dataclass
class EncodedSentence:
    """Word-BiLSTM vectors for one sentence.

    ``matrix`` has ``n + 2`` rows: tokens ``1..n``, then the root vector, then
    the padding vector.
    """

    matrix: ad.Tensor
    n: int
    language: str

    def row(self, node: int | None) -> int:
        if node is None:
            return self.n + 1
        return self.n if node == ROOT else node - 1


class Parser:
    """A parameterized scorer for one strategy, lexicon and set of dimensions."""

    def __init__(self, strategy: SharingStrategy, lexicon: Lexicon, dims: ModelDims, registry: ParameterRegistry):
        self.strategy = strategy
        self.lexicon = lexicon
        self.dims = dims
        self.params = registry
        self.labels = list(lexicon.labels)
        L = len(self.labels)
        self.n_actions = 2 + 2 * L
        # unlabeled outputs (SHIFT, SWAP, LA, RA) spread over the labeled action layout
        self.unlabeled_index = np.array([0, 1] + [2] * L + [3] * L)

    # ---------------------------------------------------------------- names

    @property
    def languages(self) -> list[str]:
        return self.lexicon.languages

    def scope(self, component: str, language: str) -> str:
        if language not in self.languages:
            raise ConfigError(f"language {language!r} unknown to this model ({self.languages})")
        return _scope(self.strategy.mode(component), language)

    def _lang_vector_rows(self, component: str, language: str, shape) -> ad.Tensor | None:
        if self.strategy.mode(component) is not Mode.SOFT:
            return None
        idx = np.full(shape, self.lexicon.language_id(language), dtype=np.int64)
        return ad.lookup(self.params[f"{component}/{SHARED}/lang"], idx)

    # ---------------------------------------------------------------- actions

    def action_id(self, t: Transition) -> int:
        L = len(self.labels)
        if t.kind == SHIFT:
            return 0
        if t.kind == SWAP:
            return 1
        lid = self.labels.index(t.label)
        return 2 + lid if t.kind == LEFT else 2 + L + lid

    def action(self, a: int) -> Transition:
        L = len(self.labels)
        if a == 0:
            return Transition(SHIFT)
        if a == 1:
            return Transition(SWAP)
        if a < 2 + L:
            return Transition(LEFT, self.labels[a - 2])
        return Transition(RIGHT, self.labels[a - 2 - L])

    def legal_mask(self, kinds: Sequence[str]) -> np.ndarray:
        L = len(self.labels)
        mask = np.zeros(self.n_actions, dtype=bool)
        if SHIFT in kinds:
            mask[0] = True
        if SWAP in kinds:
            mask[1] = True
        if LEFT in kinds:
            mask[2:2 + L] = True
        if RIGHT in kinds:
            mask[2 + L:] = True
        return mask

    # ---------------------------------------------------------------- encoders

    def char_encode_batch(self, forms: Sequence[str], language: str) -> ad.Tensor:
        """Final forward and backward character states for each form, shape (n, 2 h_c)."""
        if any(len(f) == 0 for f in forms):
            raise ad.UsageError("cannot encode an empty word form")
        scope = self.scope("char", language)
        lengths = np.array([len(f) for f in forms])
        T, B = int(lengths.max()), len(forms)
        idx = np.full((T, B), PAD, dtype=np.int64)
        for r, form in enumerate(forms):
            idx[: len(form), r] = self.lexicon.char_ids(form, language)
        X = ad.lookup(self.params[f"char/{scope}/emb"], idx)
        lang = self._lang_vector_rows("char", language, (T, B))
        if lang is not None:
            X = ad.concat([X, lang], axis=-1)
        p = self.params
        fwd = ad.lstm_sequence(X, p[f"char/{scope}/fwd/W"], p[f"char/{scope}/fwd/b"], lengths)
        bwd = ad.lstm_sequence(
            ad.reverse_within_length(X, lengths), p[f"char/{scope}/bwd/W"], p[f"char/{scope}/bwd/b"], lengths
        )
        last = (lengths - 1) * B + np.arange(B)
        h = self.dims.char_hidden
        f_last = ad.lookup(ad.reshape(fwd, (T * B, h)), last)
        b_last = ad.lookup(ad.reshape(bwd, (T * B, h)), last)
        return ad.concat([f_last, b_last], axis=-1)

    def char_encode(self, form: str, language: str) -> ad.Tensor:
        out = self.char_encode_batch([form], language)
        return ad.reshape(out, (out.shape[-1],))

    def word_ids(self, forms: Sequence[str], language: str) -> np.ndarray:
        return np.array([self.lexicon.word_id(f, language) for f in forms], dtype=np.int64)

    def word_inputs(self, forms: Sequence[str], language: str, word_ids=None) -> ad.Tensor:
        """Rows ``x_i``: word embedding, character vector and, under soft W, the language vector."""
        scope = self.scope("word", language)
        ids = self.word_ids(forms, language) if word_ids is None else np.asarray(word_ids, dtype=np.int64)
        parts = [ad.lookup(self.params[f"word/{scope}/emb"], ids), self.char_encode_batch(forms, language)]
        lang = self._lang_vector_rows("word", language, (len(forms),))
        if lang is not None:
            parts.append(lang)
        return ad.concat(parts, axis=-1)

    def sentence_encode(self, forms: Sequence[str], language: str, word_ids=None) -> EncodedSentence:
        if not forms:
            raise ad.UsageError("cannot encode an empty sentence")
        scope = self.scope("word", language)
        X = self.word_inputs(forms, language, word_ids)
        n = len(forms)
        p = self.params
        layers = [
            (
                (p[f"word/{scope}/l{k}/fwd/W"], p[f"word/{scope}/l{k}/fwd/b"]),
                (p[f"word/{scope}/l{k}/bwd/W"], p[f"word/{scope}/l{k}/bwd/b"]),
            )
            for k in range(1, self.dims.word_layers + 1)
        ]
        V = ad.bilstm_matrix(ad.reshape(X, (n, 1, X.shape[-1])), layers)
        width = 2 * self.dims.word_hidden
        extra = [ad.reshape(p[f"word/{scope}/root"], (1, width)), ad.reshape(p[f"word/{scope}/pad"], (1, width))]
        return EncodedSentence(ad.concat([V] + extra, axis=0), n, language)

    # ---------------------------------------------------------------- features and scores

    def feature_rows(self, c: Configuration, enc: EncodedSentence) -> list[int]:
        """Matrix rows for the top stack items (deepest first) and the first buffer items."""
        if c.n != enc.n:
            raise ad.UsageError(f"configuration over {c.n} tokens, encoding over {enc.n}")
        ks, kb = self.dims.stack_items, self.dims.buffer_items
        stack = [None] * max(0, ks - len(c.stack)) + c.stack[-ks:]
        buf = c.buffer[:kb] + [None] * max(0, kb - len(c.buffer))
        return [enc.row(x) for x in stack + buf]

    def extract_features(self, rows: np.ndarray, enc: EncodedSentence) -> ad.Tensor:
        """Feature vectors for a batch of configurations given as (S, k) row indices."""
        rows = np.asarray(rows, dtype=np.int64)
        single = rows.ndim == 1
        rows = rows.reshape(-1, self.dims.feature_items)
        S = rows.shape[0]
        phi = ad.reshape(ad.lookup(enc.matrix, rows), (S, self.dims.feature_items * enc.matrix.shape[1]))
        lang = self._lang_vector_rows("state", enc.language, (S,))
        if lang is not None:
            phi = ad.concat([phi, lang], axis=-1)
        return ad.reshape(phi, (phi.shape[-1],)) if single else phi

    def score(self, phi: ad.Tensor, language: str) -> ad.Tensor:
        """Interpolated action scores, (S, n_actions) for a batch or (n_actions,) for one vector."""
        scope = self.scope("state", language)
        p = self.params
        expected = p[f"state/{scope}/unl/W1"].shape[1]
        if phi.shape[-1] != expected:
            raise ad.DimensionError(f"feature width {phi.shape[-1]} does not match MLP input {expected}")
        heads = []
        for head in ("unl", "lab"):
            hidden = ad.tanh(ad.affine(p[f"state/{scope}/{head}/W1"], phi, p[f"state/{scope}/{head}/b1"]))
            heads.append(ad.affine(p[f"state/{scope}/{head}/W2"], hidden, p[f"state/{scope}/{head}/b2"]))
        lam = self.dims.interpolation
        return ad.add(ad.scale(ad.take(heads[0], self.unlabeled_index), lam), ad.scale(heads[1], 1.0 - lam))

    def score_values(self, rows: np.ndarray, matrix: np.ndarray, language: str) -> np.ndarray:
        """Graph-free twin of :meth:`score` over :meth:`extract_features`, for decoding."""
        rows = np.asarray(rows, dtype=np.int64)
        phi = matrix[rows].reshape(-1)
        if self.strategy.state is Mode.SOFT:
            lang = self.params[f"state/{SHARED}/lang"].value[self.lexicon.language_id(language)]
            phi = np.concatenate([phi, lang])
        scope = self.scope("state", language)
        p = self.params
        out = []
        for head in ("unl", "lab"):
            hidden = np.tanh(p[f"state/{scope}/{head}/W1"].value @ phi + p[f"state/{scope}/{head}/b1"].value)
            out.append(p[f"state/{scope}/{head}/W2"].value @ hidden + p[f"state/{scope}/{head}/b2"].value)
        lam = self.dims.interpolation
        return lam * out[0][self.unlabeled_index] + (1.0 - lam) * out[1]

    # ---------------------------------------------------------------- persistence

    def header(self) -> dict:
        return {
            "strategy": str(self.strategy),
            "dims": asdict(self.dims),
            "languages": self.languages,
            "lexicon": self.lexicon.digest(),
        }

    def save(self, path: str | Path, extras: dict | None = None) -> None:
        payload = {"lexicon": self.lexicon.to_json()}
        payload.update(extras or {})
        save_archive(path, {n: t.value for n, t in self.params.items()}, self.header(), payload)

    @classmethod
    def load(cls, path: str | Path) -> "Parser":
        header, values, extras = load_archive(path)
        if "lexicon" not in extras:
            raise ConfigError(f"{path}: checkpoint carries no lexicon")
        lexicon = Lexicon.from_json(extras["lexicon"])
        if lexicon.digest() != header.get("lexicon"):
            raise ConfigError(f"{path}: lexicon tables do not match the recorded hashes")
        strategy = SharingStrategy.parse(header["strategy"])
        dims = ModelDims.from_dict(header["dims"])
        model = build_model(strategy, lexicon, dims, seed=0)
        dtype = ad.default_dtype()
        model.params.restore({n: v.astype(dtype) for n, v in values.items()})
        return model


def build_model(strategy: SharingStrategy, lexicon: Lexicon, dims: ModelDims | None = None, seed: int = 0) -> Parser:
    """Fresh parameters for ``strategy``, initialized deterministically from ``seed``."""
    dims = dims or ModelDims()
    if lexicon.word_shared != strategy.word.shared or lexicon.char_shared != strategy.char.shared:
        raise ConfigError(
            f"lexicon built for word_shared={lexicon.word_shared}, char_shared={lexicon.char_shared} "
            f"does not fit strategy {strategy}"
        )
    if not lexicon.labels:
        raise ConfigError("lexicon has no dependency labels")
    rng = np.random.default_rng(seed)
    reg = ParameterRegistry()
    languages = lexicon.languages

    def scopes(component: str) -> list[str]:
        return [SHARED] if strategy.mode(component).shared else list(languages)

    for comp in COMPONENTS:
        if strategy.mode(comp) is Mode.SOFT:
            reg.add(f"{comp}/{SHARED}/lang", ad.lookup_init(rng, (len(languages), dims.lang_dim)))

    for scope in scopes("char"):
        reg.add(f"char/{scope}/emb", ad.lookup_init(rng, (len(lexicon.chars[scope]), dims.char_dim)))
        e = char_input_width(dims, strategy.char)
        for direction in ("fwd", "bwd"):
            W, b = ad.lstm_init(rng, e, dims.char_hidden)
            reg.add(f"char/{scope}/{direction}/W", W)
            reg.add(f"char/{scope}/{direction}/b", b)

    width = 2 * dims.word_hidden
    for scope in scopes("word"):
        reg.add(f"word/{scope}/emb", ad.lookup_init(rng, (len(lexicon.words[scope]), dims.word_dim)))
        e = word_input_width(dims, strategy.word)
        for k in range(1, dims.word_layers + 1):
            for direction in ("fwd", "bwd"):
                W, b = ad.lstm_init(rng, e if k == 1 else width, dims.word_hidden)
                reg.add(f"word/{scope}/l{k}/{direction}/W", W)
                reg.add(f"word/{scope}/l{k}/{direction}/b", b)
        reg.add(f"word/{scope}/root", ad.lookup_init(rng, (width,)))
        reg.add(f"word/{scope}/pad", ad.lookup_init(rng, (width,)))

    L = len(lexicon.labels)
    f = feature_width(dims, strategy.state)
    for scope in scopes("state"):
        for head, n_out in (("unl", 4), ("lab", 2 + 2 * L)):
            reg.add(f"state/{scope}/{head}/W1", ad.glorot(rng, (dims.mlp_hidden, f)))
            reg.add(f"state/{scope}/{head}/b1", np.zeros(dims.mlp_hidden, dtype=ad.default_dtype()))
            reg.add(f"state/{scope}/{head}/W2", ad.glorot(rng, (n_out, dims.mlp_hidden)))
            reg.add(f"state/{scope}/{head}/b2", np.zeros(n_out, dtype=ad.default_dtype()))

    return Parser(strategy, lexicon, dims, reg)
