"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with -s to see them as they happen).

Exact property criteria (gradients, norm laws, sparsify/project laws, KNN
oracle, perplexity definitions, tokenizer conformance, CLI determinism) are
checked at their stated tolerances. The two training criteria are
directional desk-scale experiments on the bundled synthetic corpus: SPGD
adversarial training must not cost more than half a point of test accuracy
against the clean baseline, and SPGD's discretized adversarial sequences
must stay closer to the corpus distribution (smaller LM perplexity gap)
than the whole-sequence gradient attack's, at matched attack success rates.
"""

import json
import subprocess
import sys
import time
from dataclasses import dataclass

import numpy as np
import pytest

from advtext import attacks, lm, trainer
from advtext.corpus import build_vocab, encode_dataset, synthetic_splits, tokenize
from advtext.corpus.vocab import encode
from advtext.errors import EmptyVocabularyError
from advtext.neighbors import build_index
from advtext.nn import forward_batch, freeze, loss_and_grads, pad_batch
from advtext.report import discretize

from helpers import (
    brute_force_neighbors,
    fd_input_gradient,
    fd_param_gradient,
    param_vector,
    tiny_model,
)

SEEDS = (0, 1, 2, 3, 4)
DESK = dict(embed_dim=16, hidden_dim=32, head_dim=16)
SPGD_TRAIN = dict(epsilon=2.0, k_neighbors=15, sigma=0.75, m_steps=1, refresh_interval=50)
ADVT_TRAIN_EPS = 2.0
IADVT_TRAIN_EPS = 15.0


def criterion(number, name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"[acceptance] C{number} {name}: {status}{suffix}")
    assert ok, f"C{number} {name}: {status}{suffix}"


# ---------------------------------------------------------------------------
# Shared desk-scale artifacts (built once per session, reused by C5 and C6)
# ---------------------------------------------------------------------------


@dataclass
class Battery:
    vocab: object
    splits: dict
    baseline: dict     # seed -> (params, report)
    spgd: dict         # seed -> (params, report)
    advt_report: object
    iadvt_report: object
    train_seconds: float


@pytest.fixture(scope="session")
def desk_corpus():
    raw = synthetic_splits()  # 2000 / 300 / 500
    vocab = build_vocab([tokenize(text) for _, text in raw["train"]])
    splits = {name: encode_dataset(examples, vocab) for name, examples in raw.items()}
    return vocab, splits


@pytest.fixture(scope="session")
def battery(desk_corpus):
    vocab, splits = desk_corpus
    start = time.perf_counter()

    def run(seed, attack=None):
        # 8 epochs converge on this corpus and keep the battery inside the
        # single-core budget (measured ~2.5x the multithreaded wall time).
        config = trainer.TrainConfig(**DESK, epochs=8, patience=3, seed=seed, attack=attack)
        return trainer.train(splits, vocab.n_rows, config)

    baseline = {seed: run(seed) for seed in SEEDS}
    spgd_cfg = attacks.AttackConfig(method="spgd", **SPGD_TRAIN)
    spgd = {seed: run(seed, attack=spgd_cfg) for seed in SEEDS}
    _, advt_report = run(SEEDS[0], attack=attacks.AttackConfig.default_for(
        "advt", epsilon=ADVT_TRAIN_EPS))
    _, iadvt_report = run(SEEDS[0], attack=attacks.AttackConfig.default_for(
        "iadvt", epsilon=IADVT_TRAIN_EPS, k_neighbors=15))
    return Battery(
        vocab=vocab,
        splits=splits,
        baseline=baseline,
        spgd=spgd,
        advt_report=advt_report,
        iadvt_report=iadvt_report,
        train_seconds=time.perf_counter() - start,
    )


@pytest.fixture(scope="session")
def toy_lm(desk_corpus):
    vocab, splits = desk_corpus
    stream = lm.concat_stream([s.token_ids for s in splits["train"]], vocab.eos_id)
    config = lm.LMConfig(embed_dim=32, hidden_dim=64, tbptt_window=35, clip_norm=5.0,
                         epochs=8, batch_strips=8, seed=0)
    params, report = lm.lm_train(stream, config, vocab.n_rows)
    return params, report


# ---------------------------------------------------------------------------
# C1: gradient exactness
# ---------------------------------------------------------------------------


def test_c1_gradient_exactness():
    start = time.perf_counter()
    n_models = 50
    worst = 0.0
    for seed in range(n_models):
        params, x, label = tiny_model(seed)
        _, bundle = loss_and_grads(params, x, label)
        analytic = np.concatenate([
            param_vector(bundle.param_grads)[params.embedding.size:],
            bundle.input_grads.ravel(),
        ])
        reference = np.concatenate([
            fd_param_gradient(params, x, label)[params.embedding.size:],
            fd_input_gradient(params, x, label).ravel(),
        ])
        rel = np.abs(analytic - reference) / np.maximum(np.abs(reference), 1e-3)
        worst = max(worst, float(rel.max()))
    elapsed = time.perf_counter() - start
    criterion(1, "gradient exactness vs central differences", worst < 1e-4 and elapsed < 60.0,
              f"{n_models} models, worst rel err {worst:.2e}, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# C2: whole-sequence attack norm law
# ---------------------------------------------------------------------------


def test_c2_advt_norm_law():
    rng = np.random.default_rng(2024)
    models = [tiny_model(seed) for seed in range(20)]
    worst = 0.0
    checked = 0
    while checked < 1000:
        params, _, _ = models[int(rng.integers(len(models)))]
        d_in = params.embedding.shape[1]
        x = rng.standard_normal((int(rng.integers(1, 7)), d_in))
        label = int(rng.integers(0, 2))
        eps = float(rng.uniform(0.1, 10.0))
        frozen = freeze(params)
        _, bundle = loss_and_grads(frozen, x, label)
        if not np.linalg.norm(bundle.input_grads):
            continue
        pset = attacks.advt_perturb(frozen, x, label, eps)
        worst = max(worst, abs(float(np.linalg.norm(pset.vectors)) - eps))
        checked += 1
    criterion(2, "perturbation norm equals epsilon", worst < 1e-9,
              f"{checked} instances, worst |deviation| {worst:.2e}")


# ---------------------------------------------------------------------------
# C3: sparsify and project laws
# ---------------------------------------------------------------------------


def test_c3_sparsify_and_project_laws():
    rng = np.random.default_rng(3)

    count_ok = True
    for sigma in (0.0, 0.25, 0.5, 0.75, 1.0):
        for n in range(1, 65):
            raw = rng.standard_normal((n, 4))
            kept = int(attacks.sparsify(raw, sigma).sum())
            count_ok &= kept == int(np.floor((1.0 - sigma) * n + 1e-9))

    membership_ok = True
    contraction_ok = True
    worst_residual = 0.0
    for seed in range(20):
        params, _, _ = tiny_model(seed)
        frozen = freeze(params)
        n_words = params.embedding.shape[0] - 1
        k = min(4, n_words - 1)
        index = build_index(params.embedding, k=k)
        ids = rng.integers(1, n_words + 1, size=8)
        x = frozen.embedding[ids - 1]
        config = attacks.AttackConfig(method="spgd", epsilon=1.0, k_neighbors=k,
                                      sigma=0.5, m_steps=2)
        pset = attacks.spgd_perturb(frozen, x, ids, index, int(rng.integers(0, 2)), config)
        contraction_ok &= bool(
            np.all(np.linalg.norm(pset.vectors, axis=1) <= pset.raw_norms + 1e-9)
        )
        for i in np.flatnonzero(pset.kept_mask):
            nbs, dirs = index.slots_for(int(ids[i]))
            residuals = [
                np.linalg.norm(pset.vectors[i] - (pset.vectors[i] @ u) * u) for u in dirs
            ]
            worst_residual = max(worst_residual, min(residuals))
            membership_ok &= min(residuals) < 1e-9

    # the two-word, half-sparsity, three-step scenario: one token zeroed, the
    # other projected onto its best-cosine neighbor direction
    params, _, _ = tiny_model(12)
    frozen = freeze(params)
    n_words = params.embedding.shape[0] - 1
    index = build_index(params.embedding, k=min(3, n_words - 1))
    ids = np.array([1, 2])
    x = frozen.embedding[ids - 1]
    config = attacks.AttackConfig(method="spgd", epsilon=1.0,
                                  k_neighbors=min(3, n_words - 1), sigma=0.5, m_steps=3)
    pset = attacks.spgd_perturb(frozen, x, ids, index, 1, config)
    raw = attacks.spgd_raw_steps(frozen, x, 1, 1.0, 3)
    kept = int(np.flatnonzero(pset.kept_mask)[0])
    expected, neighbor = attacks.project(raw[kept], index, int(ids[kept]))
    scenario_ok = (
        pset.kept_mask.sum() == 1
        and not pset.vectors[1 - kept].any()
        and np.allclose(pset.vectors[kept], expected, atol=1e-12)
        and pset.chosen_neighbors[kept] == neighbor
        and np.linalg.norm(raw[kept]) == np.linalg.norm(raw, axis=1).max()
    )

    criterion(3, "sparsify count, direction membership, contraction, two-word scenario",
              count_ok and membership_ok and contraction_ok and scenario_ok,
              f"worst membership residual {worst_residual:.2e}")


# ---------------------------------------------------------------------------
# C4: exhaustive KNN oracle equivalence
# ---------------------------------------------------------------------------


def test_c4_knn_matches_brute_force():
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    mismatches = 0
    for trial in range(100):
        n_words = int(rng.integers(5, 201))
        dim = int(rng.integers(2, 17))
        k = int(rng.integers(1, min(8, n_words)))
        embedding = rng.standard_normal((n_words + 1, dim))
        if trial % 10 == 0 and n_words >= 4:
            embedding[2] = 2.0 * embedding[1]  # forces exact cosine ties
            embedding[3] = 4.0 * embedding[1]
        index = build_index(embedding, k=k)
        expected = brute_force_neighbors(embedding, k)
        for wid in range(1, n_words + 1):
            ids, _ = index.slots_for(wid)
            if list(ids) != expected[wid - 1]:
                mismatches += 1
    elapsed = time.perf_counter() - start
    criterion(4, "neighbor index equals exhaustive cosine search", mismatches == 0,
              f"100 dictionaries incl. tie-break checks, {elapsed:.1f}s")


# ---------------------------------------------------------------------------
# C5: adversarial training keeps test accuracy (directional)
# ---------------------------------------------------------------------------


def test_c5_spgd_training_matches_baseline_accuracy(battery):
    base_accs = [rep.test_accuracy for _, rep in battery.baseline.values()]
    spgd_accs = [rep.test_accuracy for _, rep in battery.spgd.values()]
    base_mean = float(np.mean(base_accs))
    spgd_mean = float(np.mean(spgd_accs))

    all_runs = (
        [rep for _, rep in battery.baseline.values()]
        + [rep for _, rep in battery.spgd.values()]
        + [battery.advt_report, battery.iadvt_report]
    )
    converged = all(
        np.all(np.isfinite(rep.train_losses)) and rep.epochs_run >= 1 for rep in all_runs
    )
    within_budget = battery.train_seconds < 900.0

    criterion(
        5,
        "spgd-trained accuracy within 0.5pp of baseline; all methods converge",
        spgd_mean >= base_mean - 0.5 and converged and within_budget,
        f"baseline {base_mean:.2f}% vs spgd {spgd_mean:.2f}% over {len(SEEDS)} seeds; "
        f"advt {battery.advt_report.test_accuracy:.2f}%, "
        f"iadvt {battery.iadvt_report.test_accuracy:.2f}%; "
        f"battery {battery.train_seconds:.0f}s",
    )


# ---------------------------------------------------------------------------
# C6: perplexity-gap ordering at matched attack success rates (directional)
# ---------------------------------------------------------------------------


def _attack_run(params, frozen, index, sample, method, eps):
    """Success rate plus (originals, discretizations) for one attack setting."""
    flips = 0
    originals, discs = [], []
    for seq in sample:
        x = frozen.embedding[seq.token_ids - 1]
        config = attacks.AttackConfig.default_for(method, epsilon=eps, k_neighbors=15)
        pset = attacks.perturb(frozen, x, seq.token_ids, index, seq.label, config)
        clean, _ = forward_batch(params, x[None], [len(seq.token_ids)])
        adv, _ = forward_batch(params, (x + pset.vectors)[None], [len(seq.token_ids)])
        flips += int(clean[0].argmax() != adv[0].argmax())
        disc, _ = discretize(seq.token_ids, pset, index, params.embedding)
        originals.append(seq.token_ids)
        discs.append(disc)
    return flips / len(sample), originals, discs


def test_c6_spgd_narrows_the_perplexity_gap(battery, toy_lm):
    lm_params, _ = toy_lm
    sample_size = 100
    grids = {"advt": (0.5, 1.0, 2.0, 4.0, 8.0), "spgd": (2.0, 4.0, 8.0, 16.0, 32.0)}
    target_rate = 0.25

    gaps = {"advt": [], "spgd": []}
    rates = {"advt": [], "spgd": []}
    for seed in SEEDS:
        params, _ = battery.baseline[seed]
        frozen = freeze(params)
        index = build_index(params.embedding, k=15)
        sample = battery.splits["test"][:sample_size]
        for method in ("advt", "spgd"):
            chosen = None
            for eps in grids[method]:
                rate, originals, discs = _attack_run(params, frozen, index, sample, method, eps)
                chosen = (rate, originals, discs)
                if rate >= target_rate:
                    break
            rate, originals, discs = chosen
            report = lm.perplexity_gap(lm_params, originals, discs)
            gaps[method].append(report.gap)
            rates[method].append(rate)

    def ci(values):
        values = np.asarray(values)
        half = 1.96 * values.std(ddof=1) / np.sqrt(len(values))
        return float(values.mean()), float(half)

    advt_mean, advt_half = ci(gaps["advt"])
    spgd_mean, spgd_half = ci(gaps["spgd"])
    threshold = advt_mean + 0.10 * abs(advt_mean)
    criterion(
        6,
        "spgd perplexity gap is at most advt's (10% soft threshold)",
        spgd_mean <= threshold,
        f"advt gap {advt_mean:.1f} +/- {advt_half:.1f} (success {np.mean(rates['advt']):.2f}), "
        f"spgd gap {spgd_mean:.1f} +/- {spgd_half:.1f} (success {np.mean(rates['spgd']):.2f}), "
        f"threshold {threshold:.1f}",
    )


# ---------------------------------------------------------------------------
# C7: perplexity definition checks
# ---------------------------------------------------------------------------


def test_c7_perplexity_definition():
    from advtext.nn import LMDims, SCHEME_UNIFORM, init_lm_params

    rows = 23
    uniform = init_lm_params(LMDims(rows, 4, 5), SCHEME_UNIFORM, 0)
    uniform.out_w[...] = 0.0
    uniform.out_b[...] = 0.0
    rng = np.random.default_rng(7)
    seqs = [rng.integers(1, rows, size=int(rng.integers(1, 9))) for _ in range(8)]
    ppl = lm.perplexity(uniform, seqs)
    uniform_ok = abs(ppl - rows) < 1e-6

    trained = init_lm_params(LMDims(rows, 4, 5), SCHEME_UNIFORM, 1)
    gap = lm.perplexity_gap(trained, seqs, [s.copy() for s in seqs]).gap
    identity_ok = gap == 0.0

    criterion(7, "uniform model scores |V|+1; identity attack has zero gap",
              uniform_ok and identity_ok,
              f"uniform ppl {ppl:.8f} vs {rows}, identity gap {gap}")


# ---------------------------------------------------------------------------
# C8: CLI determinism (byte-identical JSON across fresh processes)
# ---------------------------------------------------------------------------


def _cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "advtext.cli", *map(str, args)],
        capture_output=True, text=True, timeout=600,
    )
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_c8_cli_outputs_are_bit_identical(tmp_path):
    config = tmp_path / "train.toml"
    config.write_text(
        "[model]\nembed_dim = 8\nhidden_dim = 12\nhead_dim = 6\n"
        "[train]\nepochs = 1\nseed = 9\n"
        "[attack]\nepsilon = 2.0\nk_neighbors = 5\n"
    )
    outputs = {}
    for tag in ("a", "b"):
        root = tmp_path / tag
        root.mkdir()
        data = root / "data"
        _cli("make-corpus", "--out", data, "--train", "80", "--dev", "30",
             "--test", "30", "--seed", "11")
        _cli("build-vocab", "--input", data, "--out", root / "vocab.json")
        _cli("train", "--data", data, "--vocab", root / "vocab.json", "--mode", "spgd",
             "--config", config, "--out", root / "model.ckpt",
             "--report", root / "train.json")
        _cli("train-lm", "--corpus", data / "train.tsv", "--vocab", root / "vocab.json",
             "--embed-dim", 8, "--hidden-dim", 12, "--epochs", 1, "--strips", 4,
             "--seed", 2, "--out", root / "lm.ckpt", "--report", root / "lm.json")
        _cli("attack", "--method", "spgd", "--model", root / "model.ckpt",
             "--vocab", root / "vocab.json", "--input", data / "test.tsv",
             "--out", root / "adv.jsonl", "--limit", 6)
        _cli("perplexity", "--lm", root / "lm.ckpt", "--vocab", root / "vocab.json",
             "--input", data / "test.tsv", "--adv", root / "adv.jsonl",
             "--json", root / "ppl.json")
        _cli("report", "--adv", root / "adv.jsonl", "--format", "json",
             "--out", root / "report.json")
        outputs[tag] = {
            name: (root / name).read_bytes()
            for name in ("vocab.json", "train.json", "lm.json", "adv.jsonl",
                         "ppl.json", "report.json", "model.ckpt", "lm.ckpt")
        }
    mismatched = [name for name in outputs["a"] if outputs["a"][name] != outputs["b"][name]]
    criterion(8, "CLI JSON outputs byte-identical across fresh runs", not mismatched,
              f"compared {len(outputs['a'])} artifacts" +
              (f"; mismatched: {mismatched}" if mismatched else ""))


# ---------------------------------------------------------------------------
# C9: tokenizer and vocabulary conformance
# ---------------------------------------------------------------------------


def test_c9_tokenizer_and_vocabulary_conformance():
    clitics_ok = (
        tokenize("don't stop!") == ["do", "n't", "stop"]
        and tokenize("Great movie.") == ["Great", "movie"]
        and tokenize("") == []
        and tokenize("It's they're we've you'll I'd I'm")
        == ["It", "'s", "they", "'re", "we", "'ve", "you", "'ll", "I", "'d", "I", "'m"]
    )

    rng = np.random.default_rng(9)
    alphabet = [f"w{i}" for i in range(40)]
    pieces = ["Don't", "it's", "fine.", "Really!", "they'll", "(ok)", "you've",
              "movie,", "GREAT", "o'clock", "dogs'", "--", "well-made"]
    hapax_ok = True
    roundtrip_ok = True
    idempotent_ok = True
    for trial in range(1000):
        stream = list(rng.choice(alphabet, size=int(rng.integers(2, 50))))
        try:
            vocab = build_vocab([stream])
        except EmptyVocabularyError:
            continue
        for tok in vocab.tokens[:-1]:
            hapax_ok &= stream.count(tok) >= 2
        in_vocab = [t for t in stream if t in vocab.index]
        ids, dropped = encode(vocab, stream)
        from advtext.corpus import decode

        roundtrip_ok &= decode(vocab, ids) == in_vocab
        roundtrip_ok &= dropped == len(stream) - len(in_vocab)
        if trial % 10 == 0:
            text = " ".join(rng.choice(pieces, size=int(rng.integers(1, 10))))
            once = tokenize(text)
            idempotent_ok &= tokenize(" ".join(once)) == once

    criterion(9, "hapax exclusion, round trips, clitic splitting",
              clitics_ok and hapax_ok and roundtrip_ok and idempotent_ok,
              "1000 randomized corpora")
