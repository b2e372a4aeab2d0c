import numpy as np
import pytest

from polyparse import autodiff as ad
from polyparse.conllu import parse_conllu
from polyparse.lexicon import build_lexicon
from polyparse.model import ConfigError, ModelDims, Parser, build_model
from polyparse.strategy import COMPONENTS, MONO, Mode, SharingStrategy, all_strategies
from polyparse.transitions import LEFT, Configuration, Transition, initial_config
from polyparse.training import sentence_loss

HARD = SharingStrategy(Mode.HARD, Mode.HARD, Mode.HARD)
SOFT = SharingStrategy(Mode.SOFT, Mode.SOFT, Mode.SOFT)
SMALL = ModelDims(word_dim=6, char_dim=4, char_hidden=3, word_hidden=4, lang_dim=2, mlp_hidden=5)


def sent(lang, *words, heads=None, labels=None):
    n = len(words)
    heads = heads or [0 if i == n else n for i in range(1, n + 1)]
    labels = labels or ["root" if h == 0 else "dep" for h in heads]
    lines = [f"{i}\t{w}\t_\t_\t_\t_\t{h}\t{l}\t_\t_" for i, (w, h, l) in enumerate(zip(words, heads, labels), 1)]
    return parse_conllu("\n".join(lines) + "\n", lang)[0]


CORPORA = {
    "es": [sent("es", "el", "gato", "come"), sent("es", "la", "casa")],
    "pt": [sent("pt", "o", "gato", "come"), sent("pt", "a", "casa", "cai", heads=[2, 3, 0], labels=["det", "nsubj", "root"])],
}


def model_for(strategy, dims=SMALL, corpora=CORPORA, seed=0):
    return build_model(strategy, build_lexicon(corpora, strategy), dims, seed)


# --- registry structure ---------------------------------------------------------


def test_separate_count_is_sum_of_monolingual_models():
    # the label inventory is pooled, so compare on corpora with one label set
    corpora = {"es": CORPORA["es"], "pt": [sent("pt", "o", "gato", "come")]}
    both = model_for(MONO, corpora=corpora)
    single = sum(model_for(MONO, corpora={k: v}).params.count() for k, v in corpora.items())
    assert both.params.count() == single


def test_hard_has_fewer_parameters_than_separate():
    assert model_for(HARD).params.count() < model_for(MONO).params.count()


def test_27_distinct_registries():
    layouts = set()
    for s in all_strategies():
        m = model_for(s)
        layouts.add(tuple(sorted((n, t.shape) for n, t in m.params.items())))
    assert len(layouts) == 27


@pytest.mark.parametrize("strategy", all_strategies(), ids=str)
def test_scopes_and_language_tables(strategy):
    m = model_for(strategy)
    for comp in COMPONENTS:
        mode = strategy.mode(comp)
        expected = ["shared"] if mode.shared else ["es", "pt"]
        assert m.params.scopes(comp) == expected
        assert (f"{comp}/shared/lang" in m.params) == (mode is Mode.SOFT)


def test_lexicon_strategy_mismatch():
    lex = build_lexicon(CORPORA, MONO)
    with pytest.raises(ConfigError, match="does not fit"):
        build_model(HARD, lex, SMALL)


def test_build_is_deterministic():
    a, b = model_for(SOFT, seed=5), model_for(SOFT, seed=5)
    for n, t in a.params.items():
        assert np.array_equal(t.value, b.params[n].value)
    c = model_for(SOFT, seed=6)
    assert not np.array_equal(a.params["word/shared/emb"].value, c.params["word/shared/emb"].value)


def test_dims_validation():
    with pytest.raises(ConfigError):
        ModelDims(word_dim=0)
    with pytest.raises(ConfigError):
        ModelDims(interpolation=1.5)
    with pytest.raises(ConfigError):
        ModelDims.from_dict({"bogus": 1})


# --- encoders -----------------------------------------------------------------------


def test_single_character_word_collapses_to_one_step_each_way():
    m = model_for(MONO)
    out = m.char_encode("a", "es").value
    x = m.params["char/es/emb"].value[m.lexicon.char_ids("a", "es")[0]]
    zero = ad.constant(np.zeros(SMALL.char_hidden))
    halves = []
    for d in ("fwd", "bwd"):
        h, _ = ad.lstm_step(zero, zero, ad.constant(x), m.params[f"char/es/{d}/W"], m.params[f"char/es/{d}/b"])
        halves.append(h.value)
    np.testing.assert_allclose(out, np.concatenate(halves), rtol=1e-12)


def test_char_batch_matches_single_words():
    m = model_for(SOFT)
    forms = ["gato", "a", "come"]
    batch = m.char_encode_batch(forms, "pt").value
    for r, f in enumerate(forms):
        np.testing.assert_allclose(batch[r], m.char_encode(f, "pt").value, rtol=1e-12)


def test_soft_char_input_width():
    m = model_for(SharingStrategy(char=Mode.SOFT), dims=ModelDims())
    assert m.params["char/shared/fwd/W"].shape == (4 * 50, 24 + 12 + 50)


def test_hard_chars_identical_soft_chars_differ():
    hard = model_for(HARD)
    assert np.array_equal(hard.char_encode("gato", "es").value, hard.char_encode("gato", "pt").value)
    soft = model_for(SharingStrategy(char=Mode.SOFT))
    assert not np.allclose(soft.char_encode("gato", "es").value, soft.char_encode("gato", "pt").value)


def test_empty_form_rejected():
    with pytest.raises(ad.UsageError):
        model_for(MONO).char_encode("", "es")


@pytest.mark.parametrize("mode, width", [(Mode.SOFT, 212), (Mode.HARD, 200), (Mode.SEPARATE, 200)])
def test_word_input_width(mode, width):
    m = model_for(SharingStrategy(word=mode), dims=ModelDims())
    assert m.word_inputs(["gato", "come"], "es").shape == (2, width)


def test_word_vectors_width_and_extra_rows():
    m = model_for(MONO, dims=ModelDims())
    enc = m.sentence_encode(["el", "gato", "come"], "es")
    assert enc.matrix.shape == (5, 250)
    np.testing.assert_array_equal(enc.matrix.value[3], m.params["word/es/root"].value)
    np.testing.assert_array_equal(enc.matrix.value[4], m.params["word/es/pad"].value)


def test_first_word_reaches_last_vector():
    m = model_for(MONO)
    a = m.sentence_encode(["el", "gato", "come"], "es").matrix.value
    b = m.sentence_encode(["la", "gato", "come"], "es").matrix.value
    assert not np.allclose(a[2], b[2])


def test_unknown_language_rejected():
    with pytest.raises(ConfigError):
        model_for(MONO).sentence_encode(["x"], "fr")


# --- features and scores ----------------------------------------------------------------


def test_initial_features_are_padding_then_first_word():
    m = model_for(MONO, dims=ModelDims())
    enc = m.sentence_encode(["el", "gato", "come"], "es")
    rows = m.feature_rows(initial_config(3), enc)
    assert rows == [4, 4, 4, 0]
    phi = m.extract_features(np.array(rows), enc)
    assert phi.shape == (1000,)
    V = enc.matrix.value
    np.testing.assert_array_equal(phi.value, np.concatenate([V[4], V[4], V[4], V[0]]))


def test_soft_state_feature_width():
    m = model_for(SharingStrategy(state=Mode.SOFT), dims=ModelDims())
    enc = m.sentence_encode(["el", "gato"], "es")
    phi = m.extract_features(np.array(m.feature_rows(initial_config(2), enc)), enc)
    assert phi.shape == (1012,)


def test_terminal_adjacent_features():
    m = model_for(MONO)
    enc = m.sentence_encode(["el", "gato", "come"], "es")
    c = Configuration([2], [0], [-1, 2, -1, 2], [None] * 4)
    assert m.feature_rows(c, enc) == [4, 4, 1, 3]


def test_feature_rows_reject_other_sentence():
    m = model_for(MONO)
    enc = m.sentence_encode(["el", "gato"], "es")
    with pytest.raises(ad.UsageError):
        m.feature_rows(initial_config(3), enc)


def test_action_layout_37_labels():
    labels = [f"l{i:02d}" for i in range(37)]
    corpora = {"xx": [sent("xx", *(["w"] * 38), heads=[38] * 37 + [0], labels=labels + ["l00"])]}
    m = model_for(MONO, corpora=corpora)
    assert m.n_actions == 76
    assert m.params["state/xx/lab/W2"].shape[0] == 76
    assert m.params["state/xx/unl/W2"].shape[0] == 4
    for a in range(76):
        assert m.action_id(m.action(a)) == a


def test_interpolation_endpoint_ties_labels():
    m = model_for(MONO, dims=ModelDims(**{**SMALL.__dict__, "interpolation": 1.0}))
    enc = m.sentence_encode(["el", "gato", "come"], "es")
    s = m.score_values(np.array([4, 4, 0, 1]), enc.matrix.value, "es")
    L = len(m.labels)
    assert np.all(s[2:2 + L] == s[2]) and np.all(s[2 + L:] == s[2 + L])


def test_interpolation_midpoint():
    m = model_for(MONO)
    for head in ("unl", "lab"):
        for k in ("W1", "b1", "W2"):
            m.params[f"state/es/{head}/{k}"].value[...] = 0.0
    m.params["state/es/unl/b2"].value[:] = [0, 0, 2, 0]
    lab = m.labels.index("dep")
    m.params["state/es/lab/b2"].value[:] = 0
    m.params["state/es/lab/b2"].value[2 + lab] = 4
    enc = m.sentence_encode(["el", "gato"], "es")
    s = m.score_values(np.array([3, 3, 0, 1]), enc.matrix.value, "es")
    assert s[m.action_id(Transition(LEFT, "dep"))] == pytest.approx(3.0)


@pytest.mark.parametrize("strategy", [MONO, HARD, SOFT], ids=str)
def test_graph_scores_match_numpy_twin(strategy):
    m = model_for(strategy)
    enc = m.sentence_encode(["o", "gato", "come"], "pt")
    rows = np.array([[4, 4, 4, 0], [4, 0, 1, 2], [4, 4, 2, 3]])
    graph = m.score(m.extract_features(rows, enc), "pt").value
    for r in range(3):
        np.testing.assert_allclose(graph[r], m.score_values(rows[r], enc.matrix.value, "pt"), rtol=1e-12)


def test_score_width_mismatch():
    m = model_for(MONO)
    with pytest.raises(ad.DimensionError):
        m.score(ad.constant(np.zeros(7)), "es")


# --- sharing semantics ------------------------------------------------------------------


def one_update(m, sentence):
    opt = ad.make_optimizer("adam", 1e-2)
    loss, _, _ = sentence_loss(m, sentence)
    ad.backward(loss)
    opt.step(m.params.tensors())


@pytest.mark.parametrize("strategy", all_strategies(), ids=str)
def test_updates_stay_in_scope(strategy):
    m = model_for(strategy)
    before = m.params.snapshot()
    one_update(m, CORPORA["es"][0])
    moved = set()
    for name, value in before.items():
        comp, scope = name.split("/")[:2]
        if not np.array_equal(value, m.params[name].value):
            assert scope != "pt", name
            moved.add((comp, scope))
    for comp in COMPONENTS:
        assert (comp, m.scope(comp, "es")) in moved


def test_soft_with_zero_language_tables_is_language_blind():
    m = model_for(SOFT)
    for name in m.params.language_tables():
        m.params[name].value[...] = 0.0
    forms = ["gato", "come"]
    a = m.sentence_encode(forms, "es")
    b = m.sentence_encode(forms, "pt")
    np.testing.assert_array_equal(a.matrix.value, b.matrix.value)
    rows = np.array([3, 3, 0, 1])
    np.testing.assert_array_equal(m.score_values(rows, a.matrix.value, "es"), m.score_values(rows, b.matrix.value, "pt"))


def test_parameter_lattice_per_component():
    counts = {mode: model_for(SharingStrategy(mode, mode, mode)) for mode in Mode}
    for comp in COMPONENTS:
        hard = counts[Mode.HARD].params.count(comp)
        soft = counts[Mode.SOFT].params.count(comp)
        sep = counts[Mode.SEPARATE].params.count(comp)
        assert hard < soft < sep, comp


# --- checkpoints ---------------------------------------------------------------------------


def test_checkpoint_round_trip(tmp_path):
    m = model_for(SOFT)
    path = tmp_path / "m.ckpt"
    m.save(path)
    again = Parser.load(path)
    assert again.strategy == m.strategy and again.dims == m.dims
    for n, t in m.params.items():
        assert np.array_equal(t.value, again.params[n].value), n
    assert again.lexicon.word_id("gato", "pt") == m.lexicon.word_id("gato", "pt")


def test_checkpoint_bytes_reproducible(tmp_path):
    model_for(HARD, seed=3).save(tmp_path / "a")
    model_for(HARD, seed=3).save(tmp_path / "b")
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_checkpoint_rejects_tampered_lexicon(tmp_path):
    import json
    import zipfile

    m = model_for(MONO)
    m.save(tmp_path / "m")
    with zipfile.ZipFile(tmp_path / "m") as zf:
        members = {n: zf.read(n) for n in zf.namelist()}
    lex = json.loads(members["lexicon.json"])
    lex["words"]["es"]["gato"] = 99
    members["lexicon.json"] = json.dumps(lex).encode()
    with zipfile.ZipFile(tmp_path / "bad", "w") as zf:
        for n, data in members.items():
            zf.writestr(n, data)
    with pytest.raises(ConfigError, match="hashes"):
        Parser.load(tmp_path / "bad")
