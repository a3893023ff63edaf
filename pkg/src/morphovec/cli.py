"""Command-line interface: train, build-map, eval-sim, eval-analogy, nn, project, sweep."""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import asdict

import numpy as np

from . import __version__
from .evaluation import (
    eval_analogy,
    eval_word_similarity,
    load_analogy_dataset,
    load_similarity_dataset,
    n_nearest,
    pca_project,
    run_sweep,
)
from .io import load_embeddings, save_embeddings, write_manifest
from .model import Variant
from .morphology import build_word_morpheme_map, load_lexicon, save_word_map
from .trainer import TrainingConfig, train

_REPORT_HEADER = "dataset\tmetric\tvalue\tcovered\tskipped"


def _add_training_flags(parser):
    defaults = TrainingConfig()
    parser.add_argument("--variant", choices=[v.value for v in Variant], default=defaults.variant.value)
    parser.add_argument("--dim", type=int, default=defaults.dim)
    parser.add_argument("--window", type=int, default=defaults.window)
    parser.add_argument("--negative", type=int, default=defaults.negatives)
    parser.add_argument("--epochs", type=int, default=defaults.epochs)
    parser.add_argument("--lr", type=float, default=defaults.lr0)
    parser.add_argument("--sample", type=float, default=defaults.subsample,
                        help="frequent-word subsampling threshold (0 disables)")
    parser.add_argument("--min-count", type=int, default=defaults.min_count)
    parser.add_argument("--lambda", dest="sim_threshold", type=float, default=defaults.sim_threshold,
                        help="cosine floor for keeping a morpheme meaning")
    parser.add_argument("--seed", type=int, default=defaults.seed)
    parser.add_argument("--workers", type=int, default=defaults.workers)
    parser.add_argument("--pretrain-epochs", type=int, default=defaults.pretrain_epochs)
    parser.add_argument("--context-sum", action="store_true",
                        help="sum composed context vectors instead of averaging")
    parser.add_argument("--freeze-meanings", action="store_true",
                        help="do not update meaning/morpheme vectors in phase 2")
    parser.add_argument("--fixed-window", action="store_true",
                        help="always use the full window instead of sampling its size")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")


def _config_from(args):
    return TrainingConfig(
        variant=args.variant,
        dim=args.dim,
        window=args.window,
        negatives=args.negative,
        epochs=args.epochs,
        lr0=args.lr,
        subsample=args.sample,
        min_count=args.min_count,
        sim_threshold=args.sim_threshold,
        seed=args.seed,
        workers=args.workers,
        pretrain_epochs=args.pretrain_epochs,
        context_sum=args.context_sum,
        freeze_meanings=args.freeze_meanings,
        dynamic_window=not args.fixed_window,
    )


def _manifest_entries(command, config, **extra):
    entries = {"command": command, "morphovec_version": __version__,
               "created": time.strftime("%Y-%m-%dT%H:%M:%S")}
    if config is not None:
        for key, value in asdict(config).items():
            entries[key] = value.value if isinstance(value, Variant) else value
    entries.update(extra)
    return entries


def cmd_train(args):
    lexicon = load_lexicon(args.lexicon) if args.lexicon else None
    config = _config_from(args)
    result = train(args.corpus, config, lexicon, progress=not args.quiet)
    save_embeddings(result.embeddings, result.vocab, args.output, fmt=args.format)
    outputs = {"output": args.output, "format": args.format}
    if args.save_vocab:
        result.vocab.save(args.save_vocab)
        outputs["vocab_output"] = args.save_vocab
    if args.save_map and result.word_map is not None:
        save_word_map(result.word_map, result.vocab, args.save_map)
        outputs["map_output"] = args.save_map
    write_manifest(
        args.output + ".manifest",
        _manifest_entries(
            "train", config,
            corpus=args.corpus,
            corpus_tokens=result.tokens_per_epoch,
            lexicon=args.lexicon or "",
            vocab_size=len(result.vocab),
            phase1_seconds=f"{result.phase_seconds[0]:.3f}",
            phase2_seconds=f"{result.phase_seconds[1]:.3f}",
            **outputs,
        ),
    )
    if not args.quiet:
        print(f"saved {len(result.vocab)} x {config.dim} vectors to {args.output}",
              file=sys.stderr)
    return 0


def cmd_build_map(args):
    vectors = load_embeddings(args.embeddings)
    lexicon = load_lexicon(args.lexicon)
    word_map = build_word_morpheme_map(vectors, lexicon, vectors.vectors, args.sim_threshold)
    save_word_map(word_map, vectors, args.output)
    write_manifest(
        args.output + ".manifest",
        _manifest_entries(
            "build-map", None,
            embeddings=args.embeddings,
            lexicon=args.lexicon,
            sim_threshold=args.sim_threshold,
            mapped_words=len(word_map),
            output=args.output,
        ),
    )
    print(f"mapped {len(word_map)} of {len(vectors)} words", file=sys.stderr)
    return 0


def cmd_eval_sim(args):
    vectors = load_embeddings(args.embeddings)
    print(_REPORT_HEADER)
    for path in args.dataset:
        report = eval_word_similarity(vectors, load_similarity_dataset(path))
        print(report.tsv_row())
    return 0


def cmd_eval_analogy(args):
    vectors = load_embeddings(args.embeddings)
    print(_REPORT_HEADER)
    for path in args.dataset:
        dataset = load_analogy_dataset(path)
        report = eval_analogy(vectors, dataset, exclude_inputs=not args.keep_query_words)
        print(report.tsv_row())
    return 0


def cmd_nn(args):
    vectors = load_embeddings(args.embeddings)
    word = args.word if args.word in vectors else args.word.lower()
    for neighbor, score in n_nearest(vectors, word, args.n):
        print(f"{neighbor}\t{score:.6f}")
    return 0


def cmd_project(args):
    vectors = load_embeddings(args.embeddings)
    words = []
    if args.words:
        words.extend(w.strip().lower() for w in args.words.split(",") if w.strip())
    if args.words_file:
        with open(args.words_file, encoding="utf-8") as fh:
            words.extend(w.strip().lower() for w in fh if w.strip())
    rows = ["word\tx\ty"]
    rows += [f"{w}\t{x:.6f}\t{y:.6f}" for w, x, y in pca_project(vectors, words)]
    text = "\n".join(rows) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        write_manifest(
            args.output + ".manifest",
            _manifest_entries("project", None, embeddings=args.embeddings,
                              words=",".join(words), output=args.output),
        )
    else:
        sys.stdout.write(text)
    return 0


def cmd_sweep(args):
    lexicon = load_lexicon(args.lexicon) if args.lexicon else None
    config = _config_from(args)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    datasets = [load_similarity_dataset(p) for p in args.dataset]
    axis = args.axis.replace("-", "_")
    cells = run_sweep(args.corpus, config, axis, values, datasets, lexicon,
                      progress=not args.quiet)
    names = [d.name for d in datasets]
    lines = ["\t".join([axis] + names)]
    for cell in cells:
        if cell.error:
            print(f"{axis}={cell.value}: {cell.error}", file=sys.stderr)
            lines.append("\t".join([_format_axis_value(axis, cell.value)] + ["NA"] * len(names)))
        else:
            lines.append("\t".join(
                [_format_axis_value(axis, cell.value)]
                + [f"{cell.reports[n].value:.2f}" for n in names]
            ))
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        write_manifest(
            args.output + ".manifest",
            _manifest_entries("sweep", config, corpus=args.corpus, axis=axis,
                              values=args.values, lexicon=args.lexicon or "",
                              datasets=",".join(args.dataset), output=args.output),
        )
    else:
        sys.stdout.write(text)
    return 0


def _format_axis_value(axis, value):
    return f"{int(value)}" if axis == "window" else f"{value:g}"


def build_parser():
    parser = argparse.ArgumentParser(
        prog="morphovec",
        description="Train and evaluate CBOW word embeddings with morpheme-meaning composition.",
    )
    parser.add_argument("--version", action="version", version=f"morphovec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train embeddings on a one-sentence-per-line corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--lexicon", help="morpheme lexicon TSV (required for non-cbow variants)")
    p.add_argument("--format", choices=["text", "binary"], default="text")
    p.add_argument("--save-vocab", help="also write the vocabulary to this path")
    p.add_argument("--save-map", help="also write the morpheme-meanings map to this path")
    _add_training_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("build-map", help="emit the word -> morpheme-meanings map as TSV")
    p.add_argument("--embeddings", required=True, help="pretrained vectors (phase-1 CBOW output)")
    p.add_argument("--lexicon", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--lambda", dest="sim_threshold", type=float,
                   default=TrainingConfig().sim_threshold)
    p.set_defaults(func=cmd_build_map)

    p = sub.add_parser("eval-sim", help="word-similarity evaluation (Spearman, percent)")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--dataset", required=True, action="append")
    p.set_defaults(func=cmd_eval_sim)

    p = sub.add_parser("eval-analogy", help="syntactic-analogy evaluation (accuracy, percent)")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--dataset", required=True, action="append")
    p.add_argument("--keep-query-words", action="store_true",
                   help="let a, b and c compete as answer candidates")
    p.set_defaults(func=cmd_eval_analogy)

    p = sub.add_parser("nn", help="nearest neighbors of a word by cosine")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--n", type=int, default=10)
    p.set_defaults(func=cmd_nn)

    p = sub.add_parser("project", help="2-D PCA projection of selected words (TSV)")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--words", help="comma-separated word list")
    p.add_argument("--words-file", help="file with one word per line")
    p.add_argument("--output")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("sweep", help="token-fraction or window-size sweep over train+eval")
    p.add_argument("--corpus", required=True)
    p.add_argument("--axis", choices=["token-fraction", "window"], required=True)
    p.add_argument("--values", required=True, help="comma-separated axis values")
    p.add_argument("--dataset", required=True, action="append")
    p.add_argument("--lexicon")
    p.add_argument("--output")
    _add_training_flags(p)
    p.set_defaults(func=cmd_sweep)

    return parser


def run_command(argv=None):
    """Run one CLI invocation; returns the process exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
