"""Command-line interface.

Subcommands cover the full workflow: make-corpus, build-vocab, train-lm,
train, attack, perplexity, report, dump-neighbors. All JSON outputs are
deterministic given the seeds in play.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

import numpy as np

from advtext import attacks, lm, report as report_mod, trainer
from advtext.corpus import (
    Vocabulary,
    build_vocab,
    corpus_stats,
    encode_dataset,
    load_dataset,
    save_dataset,
    stats_table,
    synthetic_splits,
    tokenize,
)
from advtext.corpus.vocab import encode
from advtext.errors import AdvTextError, InvalidConfigError
from advtext.neighbors import build_index
from advtext.nn import (
    forward,
    freeze,
    load_checkpoint,
    save_checkpoint,
)

MODES = ("baseline", "pretrained", "advt", "iadvt", "spgd")


def _write_json(path, payload):
    text = json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _load_splits(data_dir, vocab):
    splits = {}
    for name in ("train", "dev", "test"):
        path = os.path.join(data_dir, f"{name}.tsv")
        if os.path.exists(path):
            splits[name] = encode_dataset(load_dataset(path), vocab)
    return splits


def cmd_make_corpus(args):
    splits = synthetic_splits(seed=args.seed, n_train=args.train,
                              n_dev=args.dev, n_test=args.test)
    os.makedirs(args.out, exist_ok=True)
    for name, examples in splits.items():
        save_dataset(os.path.join(args.out, f"{name}.tsv"), examples)
    print(f"wrote {args.train}/{args.dev}/{args.test} examples to {args.out}")
    return 0


def cmd_build_vocab(args):
    train_path = os.path.join(args.input, "train.tsv")
    if not os.path.exists(train_path):
        raise InvalidConfigError(f"no train.tsv under {args.input}")
    streams = [tokenize(text) for _, text in load_dataset(train_path)]
    unlabeled = os.path.join(args.input, "unlabeled.tsv")
    if os.path.exists(unlabeled):
        streams += [tokenize(text) for _, text in load_dataset(unlabeled)]
    vocab = build_vocab(streams, min_freq=args.min_freq)
    vocab.save(args.out)
    print(f"vocabulary of {vocab.size} words (+ <eos>) written to {args.out}")

    stats = {}
    for name in ("train", "dev", "test"):
        path = os.path.join(args.input, f"{name}.tsv")
        if os.path.exists(path):
            split = encode_dataset(load_dataset(path), vocab)
            if split:
                stats[name.capitalize()] = corpus_stats(split)
    if stats:
        print(stats_table(stats))
    return 0


def _load_toml(path):
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomllib.load(fh)


def _train_config(mode, cfg, seed=None):
    model = cfg.get("model", {})
    tr = cfg.get("train", {})
    attack = None
    if mode in attacks.METHODS:
        attack = attacks.AttackConfig.default_for(mode, **cfg.get("attack", {}))
    lm_ckpt = cfg.get("pretrain", {}).get("lm_checkpoint")
    config = trainer.TrainConfig(
        embed_dim=model.get("embed_dim", 256),
        hidden_dim=model.get("hidden_dim", 1024),
        head_dim=model.get("head_dim", 30),
        lambda_adv=tr.get("lambda", 1.0),
        epochs=tr.get("epochs", 10),
        batch_size=tr.get("batch_size", 16),
        clip_norm=tr.get("clip_norm", 4.0),
        attack=attack,
        seed=tr.get("seed", 0) if seed is None else seed,
        init_from_lm=(mode == "pretrained") or bool(lm_ckpt),
        learning_rate=tr.get("learning_rate", 1e-3),
        patience=tr.get("patience", 3),
    )
    return config, lm_ckpt


def cmd_train(args):
    cfg = _load_toml(args.config)
    vocab = Vocabulary.load(args.vocab)
    splits = _load_splits(args.data, vocab)
    base_config, lm_ckpt = _train_config(args.mode, cfg)
    lm_params = None
    if base_config.init_from_lm:
        if not lm_ckpt:
            raise InvalidConfigError(
                f"mode {args.mode!r} asked for LM initialization but the config "
                "has no [pretrain].lm_checkpoint"
            )
        lm_params, _ = load_checkpoint(lm_ckpt)

    runs = []
    best = None
    for r in range(args.repeats):
        config, _ = _train_config(args.mode, cfg, seed=base_config.seed + r)
        params, rep = trainer.train(splits, vocab.n_rows, config, lm_params=lm_params)
        runs.append((params, rep, config.seed))
        if best is None or rep.dev_accuracies[rep.best_epoch - 1] > \
                best[1].dev_accuracies[best[1].best_epoch - 1]:
            best = runs[-1]

    params, rep, seed = best
    save_checkpoint(args.out, params, seed=seed)
    payload = {
        "mode": args.mode,
        "best_seed": seed,
        "report": rep.to_json_dict(),
        "all_runs": [
            {"seed": s, "report": r.to_json_dict()} for _, r, s in runs
        ],
    }
    if args.report:
        _write_json(args.report, payload)
    print(f"mode            {args.mode}")
    print(f"seeds run       {args.repeats} (best: {seed})")
    print(f"epochs run      {rep.epochs_run} (best epoch {rep.best_epoch})")
    print(f"dev accuracy    {max(rep.dev_accuracies):.2f}%")
    print(f"test accuracy   {rep.test_accuracy:.2f}%")
    print(f"test error rate {rep.test_error_rate:.2f}%")
    print(f"checkpoint      {args.out}")
    return 0


def cmd_train_lm(args):
    vocab = Vocabulary.load(args.vocab)
    sequences = [s.token_ids for s in encode_dataset(load_dataset(args.corpus), vocab)]
    stream = lm.concat_stream(sequences, vocab.eos_id)
    config = lm.LMConfig(
        embed_dim=args.embed_dim,
        hidden_dim=args.hidden_dim,
        tbptt_window=args.tbptt,
        clip_norm=args.clip,
        epochs=args.epochs,
        batch_strips=args.strips,
        seed=args.seed,
    )
    params, rep = lm.lm_train(stream, config, vocab.n_rows)
    save_checkpoint(args.out, params, seed=args.seed)
    if args.report:
        _write_json(args.report, rep.to_json_dict())
    final = rep.valid_perplexities[-1] if rep.valid_perplexities else float("nan")
    print(f"trained on {stream.size} tokens for {config.epochs} epochs")
    print(f"validation perplexity {final:.3f}")
    print(f"checkpoint {args.out}")
    return 0


def _predict(params, ids):
    log_probs, _ = forward(params, params.embedding[np.asarray(ids) - 1])
    return int(log_probs.argmax())


def cmd_attack(args):
    vocab = Vocabulary.load(args.vocab)
    params, _ = load_checkpoint(args.model)
    frozen = freeze(params)
    config = attacks.AttackConfig.default_for(
        args.method,
        **{k: v for k, v in dict(
            epsilon=args.epsilon, k_neighbors=args.k, sigma=args.sigma, m_steps=args.m
        ).items() if v is not None},
    )
    index = build_index(params.embedding, config.k_neighbors)
    examples = encode_dataset(load_dataset(args.input), vocab)
    if args.limit:
        examples = examples[: args.limit]

    written = 0
    with open(args.out, "w", encoding="utf-8") as fh:
        for seq in examples:
            x = frozen.embedding[seq.token_ids - 1]
            pset = attacks.perturb(frozen, x, seq.token_ids, index, seq.label, config)
            ex = report_mod.build_example(seq.token_ids, pset, index, params.embedding, vocab)
            record = report_mod.example_to_json_dict(ex)
            record["label"] = seq.label
            record["prediction_flipped"] = bool(
                _predict(params, seq.token_ids)
                != int(forward(params, x + pset.vectors)[0].argmax())
            )
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
            written += 1
    print(f"attacked {written} sequences with {args.method} -> {args.out}")
    return 0


def _read_adv_records(path):
    with open(path, "r", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def cmd_perplexity(args):
    vocab = Vocabulary.load(args.vocab)
    params, _ = load_checkpoint(args.lm)
    sequences = [s.token_ids for s in encode_dataset(load_dataset(args.input), vocab)]
    base = lm.perplexity(params, sequences)

    payload = {"corpus_perplexity": float(base)}
    rows = [("None (input corpus)", base, 0.0)]
    if args.adv:
        records = _read_adv_records(args.adv)
        originals = [np.asarray(r["original_ids"], dtype=np.int64) for r in records]
        adv_seqs = []
        for r in records:
            ids, _ = encode(vocab, r["discretized_tokens"])
            adv_seqs.append(ids)
        rep = lm.perplexity_gap(params, originals, adv_seqs)
        payload["gap_report"] = rep.to_json_dict()
        rows.append(("Adversarial", rep.adversarial_perplexity, rep.gap))
        rows[0] = ("None (matched originals)", rep.original_perplexity, 0.0)

    width = max(len(r[0]) for r in rows) + 2
    print(f"{'Attack'.ljust(width)}{'LM Perplexity':>16}{'Perplexity Gap':>16}")
    for name, ppl, gap in rows:
        print(f"{name.ljust(width)}{ppl:>16.3f}{gap:>16.3f}")
    if args.json:
        _write_json(args.json, payload)
    return 0


def cmd_report(args):
    records = _read_adv_records(args.adv)
    examples = []
    for r in records:
        chosen = r.get("chosen_neighbor_ids")
        kept = np.asarray(r["kept_mask"], dtype=bool)
        pset = attacks.PerturbationSet(
            vectors=np.zeros((len(kept), 1)),
            raw_norms=np.asarray(r["magnitudes"], dtype=float),
            kept_mask=kept,
            chosen_neighbors=None if chosen is None
            else np.asarray([v or 0 for v in chosen], dtype=np.int64),
        )
        examples.append(report_mod.AdversarialExample(
            original_ids=np.asarray(r["original_ids"], dtype=np.int64),
            original_tokens=r["original_tokens"],
            perturbation=pset,
            magnitudes=np.asarray(r["magnitudes"], dtype=float),
            discretized_tokens=r["discretized_tokens"],
            nearest_tokens=r["nearest_tokens"],
        ))
    text = report_mod.render(examples, args.format)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.format} report for {len(examples)} sequences to {args.out}")
    return 0


def cmd_dump_neighbors(args):
    vocab = Vocabulary.load(args.vocab)
    params, _ = load_checkpoint(args.model)
    word_id = vocab.index.get(args.word)
    if word_id is None or word_id == vocab.eos_id:
        raise InvalidConfigError(f"word {args.word!r} is not in the vocabulary")
    index = build_index(params.embedding, args.k)
    ids, dirs = index.slots_for(word_id)
    payload = {args.word: [vocab.tokens[i - 1] for i in ids]}
    _write_json(args.json_out, payload)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="advtext")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-corpus", help="write the bundled synthetic sentiment corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=2024)
    p.add_argument("--train", type=int, default=2000)
    p.add_argument("--dev", type=int, default=300)
    p.add_argument("--test", type=int, default=500)
    p.set_defaults(func=cmd_make_corpus)

    p = sub.add_parser("build-vocab", help="build the vocabulary from a dataset directory")
    p.add_argument("--input", required=True)
    p.add_argument("--min-freq", type=int, default=2)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_vocab)

    p = sub.add_parser("train", help="train a classifier")
    p.add_argument("--data", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--mode", choices=MODES, required=True)
    p.add_argument("--config", default=None, help="train.toml")
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--report", default=None, help="write the TrainReport JSON here")
    p.add_argument("--repeats", type=int, default=1,
                   help="independent seeds to run; the best dev run is kept")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("train-lm", help="train the language model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--tbptt", type=int, default=35)
    p.add_argument("--clip", type=float, default=5.0)
    p.add_argument("--embed-dim", type=int, default=32)
    p.add_argument("--hidden-dim", type=int, default=64)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--strips", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.set_defaults(func=cmd_train_lm)

    p = sub.add_parser("attack", help="craft adversarial perturbations for a dataset")
    p.add_argument("--method", choices=attacks.METHODS, required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("perplexity", help="score a corpus (and optionally an attack) with an LM")
    p.add_argument("--lm", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--adv", default=None, help="adversarial jsonl from the attack command")
    p.add_argument("--json", default=None)
    p.set_defaults(func=cmd_perplexity)

    p = sub.add_parser("report", help="render an adversarial jsonl as a heatmap report")
    p.add_argument("--adv", required=True)
    p.add_argument("--model", default=None,
                   help="optional checkpoint; accepted for symmetry, not needed to render")
    p.add_argument("--format", choices=report_mod.FORMATS, default="html")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("dump-neighbors", help="dump a word's nearest neighbors as JSON")
    p.add_argument("--model", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--json-out", default="-")
    p.set_defaults(func=cmd_dump_neighbors)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except AdvTextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
