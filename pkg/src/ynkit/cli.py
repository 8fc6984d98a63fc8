"""
Command line interface of ynkit.

Every subcommand writes its results to files and a short summary to stdout.
Errors are written to stderr as one JSON object per error; the exit code is 2
for data errors and 1 for I/O errors.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import fields

from ynkit.corpus import (
    SplitManifest,
    apply_exclusions,
    clean_text,
    corpus_stats,
    load_manifest,
    split,
)
from ynkit.errors import UnrecognizedGrapheme, YnkitError
from ynkit.evaluation import (
    ErrorSummary,
    Recognizer,
    error_frame,
    error_frequencies,
    evaluate_model,
    summary_table,
)
from ynkit.experiment import (
    ExperimentConfig,
    ablation_medians,
    load_ablation,
    parse_grid,
    run_ablation,
)
from ynkit.model import ModelConfig, save_checkpoint
from ynkit.phonology import (
    ipa_to_orth,
    load_inventory,
    orth_to_ipa,
    parse_ipa,
    to_ipa_string,
)
from ynkit.synthetic import SynthConfig, generate_synthetic
from ynkit.trainer import TrainConfig, TrainReport, train
from ynkit.vocabulary import TokenVocabulary, build_vocab, encode

_log = logging.getLogger(__name__)


def _print_error(error, **extra):
    """Writes one error as JSON to stderr."""

    record = {"error": type(error).__name__, "message": str(error)}
    if isinstance(error, YnkitError):
        record.update(error.fields())
    record.update(extra)
    print(json.dumps(record, ensure_ascii=False, default=str), file=sys.stderr)


def _read_json(path):
    with open(path, encoding="utf-8") as json_file:
        return json.load(json_file)


def _config(cls, path, **overrides):
    """Builds a config dataclass from an optional JSON file plus flag overrides."""

    data = _read_json(path) if path else {}
    names = {f.name for f in fields(cls)}
    values = {k: v for k, v in data.items() if k in names}
    values.update({k: v for k, v in overrides.items() if v is not None and k in names})
    return cls(**values)


def _load_utterances(manifest):
    """Loads a manifest, prints its statistics and returns the usable utterances."""

    utts = load_manifest(manifest)
    stats = corpus_stats(utts)
    print(
        f"{stats['utterances']} utterances, {stats['minutes']:.2f} minutes, "
        f"excluded: {stats['excluded'] or 'none'}"
    )
    return apply_exclusions(utts)


def cmd_convert(args):
    """Converts a text file line by line between orthography and IPA."""

    inv = load_inventory(args.inventory)
    with open(args.input, encoding="utf-8") as in_file:
        lines = in_file.read().splitlines()

    converted, failures = [], 0
    for line_no, line in enumerate(lines, start=1):
        try:
            if args.to == "ipa":
                converted.append(to_ipa_string(orth_to_ipa(line, inv)))
            else:
                converted.append(ipa_to_orth(parse_ipa(line, inv), inv))
        except UnrecognizedGrapheme as error:
            failures += 1
            _print_error(error, line=line_no, column=error.position + 1)

    if failures:
        _log.warning("%d of %d lines could not be converted.", failures, len(lines))
        return 2

    with open(args.output, "w", encoding="utf-8", newline="\n") as out_file:
        out_file.write("".join(f"{line}\n" for line in converted))
    print(f"Converted {len(converted)} lines to {args.to}.")
    return 0


def cmd_tokenize(args):
    """Builds a vocabulary from a manifest and encodes its transcripts."""

    inv = load_inventory(args.inventory)
    utts = _load_utterances(args.manifest)
    vocab = build_vocab((u.orth for u in utts), args.level, inv)
    vocab.save(args.vocab)

    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as out_file:
            for utt in utts:
                ids = encode(utt.orth, vocab, inv).ids
                out_file.write(json.dumps({"id": utt.id, "ids": list(ids)}) + "\n")

    print(f"{args.level} vocabulary: {len(vocab.content_tokens)} content tokens.")
    return 0


def cmd_synth(args):
    """Generates a synthetic corpus."""

    config = _config(
        SynthConfig,
        args.config,
        seed=args.seed,
        words=args.words,
        utterances=args.utterances,
        dim=args.dim,
        noise=args.noise,
        digraph_fraction=args.digraph_fraction,
    )
    corpus = generate_synthetic(config, args.out, load_inventory(args.inventory))
    stats = corpus_stats(corpus.utterances)
    print(
        f"Wrote {stats['utterances']} utterances ({stats['minutes']:.2f} minutes) "
        f"to {corpus.manifest_path}."
    )
    return 0


def cmd_train(args):
    """Splits a corpus, trains a model and saves it with its report."""

    inv = load_inventory(args.inventory)
    utts = _load_utterances(args.manifest)
    os.makedirs(args.out, exist_ok=True)

    train_config = _config(
        TrainConfig,
        args.config,
        epochs=args.epochs,
        lr_init=args.lr,
        batch_size=args.batch_size,
        early_stop_patience=args.patience,
        seed=args.seed,
    )
    parts = split(utts, train_config.seed, args.train_frac)
    parts.save(os.path.join(args.out, "split.json"))
    train_utts, valid_utts = parts.select(utts, "train"), parts.select(utts, "valid")

    vocab = build_vocab((u.orth for u in utts), args.level, inv)
    model_config = _config(
        ModelConfig,
        args.config,
        input_dim=train_utts[0].load_features().dim,
        vocab_size=len(vocab),
        context=args.context,
        hidden_dim=args.hidden_dim,
        seed=train_config.seed,
    )

    params, report = train(
        train_utts, valid_utts, vocab, model_config, train_config, inv
    )
    save_checkpoint(params, model_config, vocab, os.path.join(args.out, "model.json"))
    vocab.save(os.path.join(args.out, "vocab.json"))
    report.save(os.path.join(args.out, "train_report.json"))
    report.to_frame().to_csv(
        os.path.join(args.out, "train_report.csv"), lineterminator="\n"
    )

    print(report.to_frame().to_string())
    print(
        f"Best epoch {report.best_epoch}: "
        f"CER {report.best_cer:.4f}, WER {report.best_wer:.4f}"
    )
    return 0


def cmd_eval(args):
    """Decodes a set of utterances with a trained model and scores them."""

    inv = load_inventory(args.inventory)
    vocab = TokenVocabulary.load(args.vocab)
    recognizer = Recognizer.from_checkpoint(
        args.model, vocab, decoder=args.decoder, beam_width=args.beam_width, inv=inv
    )

    utts = _load_utterances(args.manifest)
    if args.split:
        utts = SplitManifest.load(args.split).select(utts, args.part)

    report = evaluate_model(
        recognizer,
        utts,
        inv,
        common_space=args.common_space,
        k=args.top,
        model_label=args.label,
    )
    report.save(args.out, args.errors_csv)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def cmd_errors(args):
    """Builds error tables from a TSV of reference and hypothesis transcripts."""

    inv = load_inventory(args.inventory)
    with open(args.pairs, encoding="utf-8") as pairs_file:
        pairs = [
            tuple(
                clean_text(part) for part in (line.rstrip("\n").split("\t") + [""])[:2]
            )
            for line in pairs_file
            if line.strip()
        ]

    summary, tables = error_frequencies(
        pairs, args.unit, inv, k=args.top, model_label=args.label or args.unit
    )
    if args.out:
        error_frame(tables).to_csv(args.out, index=False, lineterminator="\n")

    print(summary_table([summary]).to_string())
    for table in tables:
        print(f"\n{table.kind}s:")
        print(table.to_frame().drop(columns="kind").to_string(index=False))
    return 0


def cmd_ablation(args):
    """Runs the data-size ablation grid."""

    data = _read_json(args.config) if args.config else {}
    overrides = {
        "corpus_dir": args.corpus,
        "output_dir": args.out,
        "levels": args.levels.split(",") if args.levels else None,
        "minutes": parse_grid(args.minutes) if args.minutes else None,
        "seeds": [int(s) for s in args.seeds.split(",")] if args.seeds else None,
        "reference_minutes": args.reference_minutes,
        "threads": args.threads,
    }
    data.update({k: v for k, v in overrides.items() if v is not None})

    training = dict(data.get("training", {}))
    training.update(
        {
            k: v
            for k, v in {"epochs": args.epochs, "lr_init": args.lr}.items()
            if v is not None
        }
    )
    data["training"] = training

    config = ExperimentConfig.from_dict(data)
    df = run_ablation(config, inv=load_inventory(args.inventory))
    print(ablation_medians(df).to_string())
    return 0


def cmd_report(args):
    """Renders training curves, ablation medians and model comparisons."""

    if not (args.ablation or args.train_report or args.eval_reports):
        _print_error(
            ValueError("Nothing to report: pass --ablation, --train-report or --eval.")
        )
        return 2

    if args.train_report:
        report = TrainReport.from_dict(_read_json(args.train_report))
        print(report.to_frame().to_string())

    if args.ablation:
        medians = ablation_medians(load_ablation(args.ablation))
        print(medians.to_string())
        if args.out:
            medians.to_csv(args.out, lineterminator="\n")

    if args.eval_reports:
        summaries = []
        for path in args.eval_reports:
            totals = _read_json(path)["summary"]
            summaries.append(
                ErrorSummary(
                    model_label=os.path.splitext(os.path.basename(path))[0],
                    deletions=totals["deletions"],
                    insertions=totals["insertions"],
                    substitutions=totals["substitutions"],
                )
            )
        print(summary_table(summaries).to_string())
    return 0


def _add_inventory(parser):
    parser.add_argument(
        "--inventory",
        help="Inventory JSON file (default: the shipped Yan-nhangu inventory).",
    )


# pylint: disable=too-many-statements
def build_parser():
    """Builds the argument parser with one subparser per command."""

    parser = argparse.ArgumentParser(
        prog="ynkit",
        description="Phonemic and orthographic tokenization for low-resource CTC ASR.",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument(
        "-v", "--verbose", action="store_true", help="Log debug messages."
    )
    verbosity.add_argument(
        "-q", "--quiet", action="store_true", help="Log warnings only."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser(
        "convert", help="Convert text between orthography and IPA."
    )
    sub.add_argument(
        "--to", choices=["ipa", "orth"], required=True, help="Target script."
    )
    sub.add_argument("--in", dest="input", required=True, help="Input text file.")
    sub.add_argument("--out", dest="output", required=True, help="Output text file.")
    _add_inventory(sub)
    sub.set_defaults(func=cmd_convert)

    sub = commands.add_parser(
        "tokenize", help="Build a vocabulary and encode transcripts."
    )
    sub.add_argument("--manifest", required=True, help="Manifest (JSON lines).")
    sub.add_argument("--level", choices=["grapheme", "phoneme"], required=True)
    sub.add_argument("--vocab", required=True, help="Output vocabulary JSON.")
    sub.add_argument(
        "--out", help="Output JSON lines with the token ids per utterance."
    )
    _add_inventory(sub)
    sub.set_defaults(func=cmd_tokenize)

    sub = commands.add_parser("synth", help="Generate a synthetic corpus.")
    sub.add_argument("--out", required=True, help="Output directory.")
    sub.add_argument("--config", help="SynthConfig JSON; flags override its values.")
    sub.add_argument("--seed", type=int, help="Random seed.")
    sub.add_argument("--words", type=int, help="Lexicon size.")
    sub.add_argument("--utterances", type=int, help="Number of utterances.")
    sub.add_argument("--dim", type=int, help="Feature dimension.")
    sub.add_argument(
        "--noise", type=float, help="Standard deviation of the frame noise."
    )
    sub.add_argument(
        "--digraph-fraction", type=float, help="Minimum share of words with a digraph."
    )
    _add_inventory(sub)
    sub.set_defaults(func=cmd_synth)

    sub = commands.add_parser("train", help="Train an acoustic model on a manifest.")
    sub.add_argument("--manifest", required=True, help="Manifest (JSON lines).")
    sub.add_argument("--level", choices=["grapheme", "phoneme"], required=True)
    sub.add_argument("--out", required=True, help="Output directory.")
    sub.add_argument("--config", help="JSON with ModelConfig / TrainConfig values.")
    sub.add_argument("--seed", type=int, help="Seed for split, init and shuffling.")
    sub.add_argument(
        "--epochs", type=int, help="Maximum number of epochs (default 16)."
    )
    sub.add_argument("--lr", type=float, help="Initial learning rate (default 1e-3).")
    sub.add_argument("--batch-size", type=int, help="Utterances per step (default 8).")
    sub.add_argument(
        "--patience", type=int, help="Early stopping patience, 0 disables."
    )
    sub.add_argument(
        "--context", type=int, help="Context frames on each side (default 2)."
    )
    sub.add_argument("--hidden-dim", type=int, help="Hidden layer size (default 64).")
    sub.add_argument("--train-frac", type=float, default=0.8, help="Training share.")
    _add_inventory(sub)
    sub.set_defaults(func=cmd_train)

    sub = commands.add_parser("eval", help="Decode and score utterances with a model.")
    sub.add_argument("--model", required=True, help="Checkpoint JSON.")
    sub.add_argument("--vocab", required=True, help="Vocabulary JSON.")
    sub.add_argument("--manifest", required=True, help="Manifest (JSON lines).")
    sub.add_argument(
        "--split", help="Split JSON written by train; scores one part only."
    )
    sub.add_argument("--part", choices=["train", "valid"], default="valid")
    sub.add_argument("--decoder", choices=["greedy", "beam"], default="beam")
    sub.add_argument("--beam-width", type=int, default=8)
    sub.add_argument("--common-space", choices=["ipa"], help="Score in phoneme space.")
    sub.add_argument("--top", type=int, default=20, help="Rows per error table.")
    sub.add_argument("--label", help="Model label in the summary.")
    sub.add_argument("--out", required=True, help="Output JSON report.")
    sub.add_argument("--errors-csv", help="Output CSV with the error tables.")
    _add_inventory(sub)
    sub.set_defaults(func=cmd_eval)

    sub = commands.add_parser(
        "errors", help="Error tables for reference/hypothesis pairs."
    )
    sub.add_argument(
        "--pairs", required=True, help="TSV file: reference<TAB>hypothesis."
    )
    sub.add_argument("--unit", choices=["grapheme", "phoneme"], default="grapheme")
    sub.add_argument("--top", type=int, default=20, help="Rows per error table.")
    sub.add_argument("--label", help="Model label in the summary.")
    sub.add_argument("--out", help="Output CSV with the error tables.")
    _add_inventory(sub)
    sub.set_defaults(func=cmd_errors)

    sub = commands.add_parser("ablation", help="Run the data-size ablation grid.")
    sub.add_argument("--corpus", help="Corpus directory with manifest.jsonl.")
    sub.add_argument("--out", help="Output directory.")
    sub.add_argument(
        "--config", help="ExperimentConfig JSON; flags override its values."
    )
    sub.add_argument(
        "--levels", help="Comma-separated levels (default grapheme,phoneme)."
    )
    sub.add_argument(
        "--minutes", help="Comma-separated grid (default 10,30,60,90,120,all)."
    )
    sub.add_argument("--seeds", help="Comma-separated seeds (default 1,2,3).")
    sub.add_argument(
        "--reference-minutes",
        type=float,
        help="Corpus size the grid refers to (default 156, 0 for literal minutes).",
    )
    sub.add_argument("--epochs", type=int, help="Maximum number of epochs per cell.")
    sub.add_argument("--lr", type=float, help="Initial learning rate per cell.")
    sub.add_argument(
        "--threads", type=int, help="Worker threads (default YNKIT_THREADS)."
    )
    _add_inventory(sub)
    sub.set_defaults(func=cmd_ablation)

    sub = commands.add_parser(
        "report", help="Render training, ablation and error reports."
    )
    sub.add_argument("--ablation", help="Ablation CSV.")
    sub.add_argument("--train-report", help="Training report JSON.")
    sub.add_argument(
        "--eval", dest="eval_reports", nargs="+", help="Evaluation reports."
    )
    sub.add_argument("--out", help="Output CSV with the ablation medians.")
    sub.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    """
    Runs the command line interface.

    Returns
    -------
    int
        Exit code: 0 on success, 2 for data and config errors, 1 for I/O errors.
    """

    args = build_parser().parse_args(argv)

    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr
    )

    try:
        return args.func(args)
    except (YnkitError, ValueError, KeyError, TypeError) as error:
        _print_error(error)
        return 2
    except OSError as error:
        _print_error(error, path=error.filename)
        return 1


if __name__ == "__main__":
    sys.exit(main())
