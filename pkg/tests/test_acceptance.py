"""Acceptance suite: one PASS/FAIL line per criterion, at the agreed tolerances.

Lines are printed as each check finishes and repeated in the
``acceptance criteria`` section of the terminal summary.
"""

import time

import numpy as np
import pytest

from polyparse import autodiff as ad
from polyparse.conllu import is_projective, parse_conllu
from polyparse.evaluation import ScoredRun, fmt1, grid_report, randomization_test, select_strategy
from polyparse.gradcheck import check_gradients
from polyparse.lexicon import build_lexicon
from polyparse.model import ModelDims, build_model
from polyparse.strategy import COMPONENTS, Mode, SharingStrategy, all_strategies
from polyparse.synthetic import generate_treebank, language_pair, pair_splits
from polyparse.training import TrainConfig, sentence_loss, train
from polyparse.transitions import dynamic_cost, run, static_sequence

from published import load_grid
from test_transitions import all_trees, brute_force_costs, random_tree, reachable_configs

SMALL = ModelDims(word_dim=6, char_dim=4, char_hidden=3, word_hidden=4, lang_dim=2, mlp_hidden=5)


def _conllu(lang, words, heads, labels):
    rows = [f"{i}\t{w}\t_\t_\t_\t_\t{h}\t{l}\t_\t_" for i, (w, h, l) in enumerate(zip(words, heads, labels), 1)]
    return parse_conllu("\n".join(rows) + "\n", lang)[0]


def test_c1_oracle_reconstruction(criterion, rng):
    corpus = []
    for kind in ("related", "unrelated"):
        for lang in language_pair(kind, seed=11):
            corpus += [(s.heads, s.labels) for s in generate_treebank(lang, 125, seed=len(corpus))]
    for _ in range(250):
        heads = random_tree(rng, int(rng.integers(1, 16)))
        corpus.append((heads, [""] + [f"l{h % 4}" for h in heads[1:]]))
    nonproj = sum(not is_projective(h) for h, _ in corpus)
    start = time.perf_counter()
    ok = 0
    for heads, labels in corpus:
        c = run(len(heads) - 1, static_sequence(heads, labels))
        ok += c.heads[1:] == heads[1:] and c.labels[1:] == labels[1:]
    secs = time.perf_counter() - start
    criterion(1, len(corpus) >= 500 and nonproj >= 20 and ok == len(corpus) and secs < 10,
              f"{ok}/{len(corpus)} sentences rebuilt, {nonproj} non-projective, {secs:.1f} s")


def test_c2_dynamic_cost_soundness(criterion):
    start = time.perf_counter()
    checked = mismatched = 0
    for n in range(1, 5):
        configs = reachable_configs(n)
        for gold in all_trees(n):
            if not is_projective(gold):
                continue
            oracle = brute_force_costs(gold)
            for c in configs:
                for kind, cost in oracle(c).items():
                    checked += 1
                    mismatched += dynamic_cost(c, kind, gold) != cost
    secs = time.perf_counter() - start
    criterion(2, mismatched == 0 and secs < 60,
              f"{checked} (tree, configuration, transition) triples, {mismatched} mismatches, {secs:.1f} s")


GRAD_SENTENCES = [
    ("es", ["el", "gato", "come"], [2, 3, 0], ["det", "nsubj", "root"]),
    ("es", ["come", "la", "pera"], [0, 3, 1], ["root", "det", "obj"]),
    ("pt", ["o", "gato", "come"], [2, 3, 0], ["det", "nsubj", "root"]),
]


def test_c3_gradient_fidelity(criterion):
    assert ad.default_dtype() == np.float64
    sents = [_conllu(*s) for s in GRAD_SENTENCES]
    corpora = {"es": sents[:2], "pt": sents[2:]}
    start = time.perf_counter()
    checked, failures = 0, []
    for strategy in all_strategies():
        model = build_model(strategy, build_lexicon(corpora, strategy), SMALL, seed=7)
        model.params.zero_grad()

        def loss_value():
            total = 0.0
            for s in sents:
                _, v, _ = sentence_loss(model, s)
                total += v
            return total

        for s in sents:
            loss, _, _ = sentence_loss(model, s)
            if loss is not None:
                ad.backward(loss)
        touched = {n: t for n, t in model.params.items() if t.grad is not None}
        grads = {n: t.grad.copy() for n, t in touched.items()}
        n, bad = check_gradients(loss_value, touched, grads, per_tensor=8, rng=np.random.default_rng(0))
        checked += n
        if bad:
            failures.append((str(strategy), max(bad, key=lambda b: b.rel_error)))
    secs = time.perf_counter() - start
    detail = f"{checked} entries over 27 strategies, {len(failures)} strategies above 1e-4, {secs:.0f} s"
    if failures:
        detail += f"; e.g. {failures[0][0]} {failures[0][1].name} rel {failures[0][1].rel_error:.2e}"
    criterion(3, not failures and secs < 120, detail)


@pytest.mark.parametrize("name", ["C=x,W=x,S=x", "C=h,W=h,S=h", "C=id,W=id,S=id"])
def test_c4_capacity(criterion, name):
    # default precision for speed; capacity does not depend on the float width
    ad.set_default_dtype(np.float32)
    data = pair_splits("related", (32, 0, 0), seed=3)
    train_data = {k: v[0] for k, v in data.items()}
    config = TrainConfig(strategy=SharingStrategy.parse(name), sample_size=32, epochs=50, seed=1,
                         word_dropout=0.0, explore_prob=0.0, target_train_las=95.0)
    start = time.perf_counter()
    _, report = train(config, train_data, {k: v[:4] for k, v in train_data.items()})
    secs = time.perf_counter() - start
    last = report.epochs[-1]
    reached = min(last.train_las.values()) >= 95.0
    scores = ", ".join(f"{k} {v:.1f}" for k, v in last.train_las.items())
    part = {"C=x,W=x,S=x": "a", "C=h,W=h,S=h": "b", "C=id,W=id,S=id": "c"}[name]
    criterion(f"4{part}", reached and secs < 600,
              f"({name}) training LAS {scores} after {last.epoch} epochs, {secs:.0f} s")


def test_c5_sharing_lattice(criterion):
    corpora = {
        "es": [_conllu("es", ["el", "gato", "come"], [2, 3, 0], ["det", "nsubj", "root"])],
        "pt": [_conllu("pt", ["o", "cão", "dorme"], [2, 3, 0], ["det", "nsubj", "root"])],
    }
    problems = []
    models = {}
    for s in all_strategies():
        m = build_model(s, build_lexicon(corpora, s), SMALL, seed=0)
        models[s] = m
        for sent in corpora["es"] + corpora["pt"]:
            loss, _, _ = sentence_loss(m, sent)
            if loss is None or not np.isfinite(loss.value):
                problems.append(f"{s}: no finite loss")
                continue
            ad.backward(loss)
        for comp in COMPONENTS:
            if (f"{comp}/shared/lang" in m.params) != (s.mode(comp) is Mode.SOFT):
                problems.append(f"{s}: language table at {comp}")
    for s in all_strategies():
        for comp in COMPONENTS:
            same = {k: s.mode(k) for k in COMPONENTS if k != comp}
            counts = {mode: models[SharingStrategy(**same, **{comp: mode})].params.count(comp) for mode in Mode}
            if not counts[Mode.HARD] < counts[Mode.SOFT] < counts[Mode.SEPARATE]:
                problems.append(f"{s} {comp}: {counts}")
    criterion(5, not problems, f"27 strategies, {len(problems)} problems" + (f": {problems[0]}" if problems else ""))


def test_c6_metric_fixtures(criterion):
    from test_evaluation import GOLD, sent

    from polyparse.evaluation import attachment_scores

    h, l = GOLD.heads[1:], GOLD.labels[1:]
    cases = [
        ([GOLD], [GOLD], (100.0, 100.0)),
        ([GOLD], [sent(h, ["zz"] * 10)], (100.0, 0.0)),
        ([GOLD], [sent(h[:7] + [1, 1, 1], l[:5] + ["zz", "zz"] + l[7:])], (70.0, 50.0)),
        ([GOLD], [sent([10] * 9 + [0], ["zz"] * 10)], (0.0, 0.0)),
        ([sent([0, 1], ["root", "x"]), sent([0, 1], ["root", "x"])],
         [sent([0, 1], ["root", "y"]), sent([2, 0], ["x", "root"])], (50.0, 25.0)),
    ]
    exact = sum(attachment_scores(g, p) == want for g, p, want in cases)

    langs, mono, results, _ = load_grid("related_grid")
    rel = grid_report(results, mono, langs)
    ulangs, umono, uresults, _ = load_grid("unrelated_grid")
    unrel = grid_report(uresults, umono, ulangs)
    got = {
        "mono": fmt1(rel.mono.average), "best": fmt1(rel.best.average),
        "language-best": fmt1(rel.language_best.average),
        "unrelated best": fmt1(unrel.best.average), "unrelated worst": fmt1(unrel.worst.average),
    }
    want = {"mono": "78.2", "best": "79.1", "language-best": "79.5", "unrelated best": "78.9",
            "unrelated worst": "77.7"}
    top10 = all(r.strategy.state.shared for r in rel.rows[:10])
    best_ok = rel.best.strategy == SharingStrategy(Mode.SEPARATE, Mode.HARD, Mode.SOFT)
    worst_ok = unrel.worst.strategy == SharingStrategy(Mode.SOFT, Mode.SOFT, Mode.SEPARATE)
    ok = exact == 5 and got == want and top10 and best_ok and worst_ok
    criterion(6, ok, f"{exact}/5 score cases exact; " + ", ".join(f"{k} {v}" for k, v in got.items())
              + f"; top 10 share S: {top10}")


def test_c7_randomization_test(criterion):
    start = time.perf_counter()
    tokens = np.full(40, 12)
    same = ScoredRun("x", "a", np.full(40, 9), np.full(40, 7), tokens)
    p_same = randomization_test(same, same, shuffles=10_000)
    tokens = np.full(200, 20)
    a = ScoredRun("x", "a", np.full(200, 18), np.full(200, 17), tokens)
    b = ScoredRun("x", "b", np.full(200, 16), np.full(200, 15), tokens)
    p_dom = randomization_test(a, b, shuffles=10_000, seed=1)

    # null: both systems draw from the same per-sentence distribution
    rng = np.random.default_rng(2024)
    ps = []
    for k in range(1000):
        tok = rng.integers(5, 40, 300)
        x, y = rng.binomial(tok, 0.8), rng.binomial(tok, 0.8)
        ps.append(randomization_test(ScoredRun("n", "a", x, x, tok), ScoredRun("n", "b", y, y, tok),
                                     shuffles=999, seed=k))
    ps = np.sort(ps)
    grid = np.arange(1, 1001) / 1000
    ks = max(np.max(grid - ps), np.max(ps - (grid - 1 / 1000)))
    secs = time.perf_counter() - start
    criterion(7, p_same == 1.0 and p_dom < 0.01 and ks <= 0.05 and secs < 120,
              f"identical p={p_same:.3f}, dominated p={p_dom:.5f}, null KS={ks:.3f}, {secs:.0f} s")


REDUCED = ModelDims(word_dim=32, char_dim=12, char_hidden=16, word_hidden=32, lang_dim=6, mlp_hidden=32)


@pytest.mark.slow
def test_c8_directional_replication(criterion):
    ad.set_default_dtype(np.float32)
    start = time.perf_counter()
    ours, mono, picks = [], [], []
    for kind in ("related", "unrelated"):
        data = pair_splits(kind, (500, 200, 0), seed=5)
        train_data = {k: v[0] for k, v in data.items()}
        dev = {k: v[1] for k, v in data.items()}
        for seed in (1, 2, 3):
            base = dict(sample_size=500, epochs=8, seed=seed, dims=REDUCED)
            cells = {}
            for s in [SharingStrategy(c, w, Mode.HARD) for w in Mode for c in Mode]:
                _, rep = train(TrainConfig(strategy=s, **base), train_data, dev)
                cells[(s.word, s.char)] = rep.best.dev_las
            for lang in train_data:
                _, rep = train(TrainConfig(languages=(lang,), **base), {lang: train_data[lang]}, {lang: dev[lang]})
                w, c = select_strategy({k: v[lang] for k, v in cells.items()})
                ours.append(cells[(w, c)][lang])
                mono.append(rep.best.dev_las[lang])
                picks.append(f"{kind}/{lang}/{seed}: W={w.value} C={c.value}")
    delta = float(np.mean(ours) - np.mean(mono))
    secs = time.perf_counter() - start
    criterion(8, delta >= 0, f"mean dev LAS ours {np.mean(ours):.2f} vs mono {np.mean(mono):.2f} "
              f"(delta {delta:+.2f}) over 2 pairs x 2 languages x 3 seeds, {secs / 60:.0f} min")
