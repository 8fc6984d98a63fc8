"""
Module for corpus-level scoring and error analysis of recognizer output.

Corpus rates are micro-averaged: edits and reference units are pooled over all
utterances before dividing. Error tables count deletions and insertions per
token and substitutions per ordered (reference, hypothesis) pair, with phonemes
shown by their display symbols and word boundaries as "_".
"""

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import List, Optional

import pandas as pd

from ynkit import decoders  # pylint: disable=unused-import
from ynkit.base_classes import Decoder, Segmenter
from ynkit.errors import EmptyReference, EmptySplit
from ynkit.metrics import (
    DELETE,
    INSERT,
    SUBSTITUTE,
    levenshtein_align,
    units_of,
    words_of,
)
from ynkit.model import forward, load_checkpoint
from ynkit.phonology import WORD_BOUNDARY, default_inventory, ipa_to_orth

DELETION, INSERTION, SUBSTITUTION = "deletion", "insertion", "substitution"
ERROR_KINDS = (DELETION, INSERTION, SUBSTITUTION)
TABLE_COLUMNS = ["kind", "ref_token", "hyp_token", "count"]

_KIND_OF_OP = {DELETE: DELETION, INSERT: INSERTION, SUBSTITUTE: SUBSTITUTION}

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ErrorSummary:
    """Edit totals of one model over an evaluation set."""

    model_label: str
    deletions: int
    insertions: int
    substitutions: int

    @property
    def total(self):
        """Deletions + insertions + substitutions."""

        return self.deletions + self.insertions + self.substitutions

    @classmethod
    def from_scripts(cls, scripts, model_label=""):
        """Sums the counts of edit scripts."""

        scripts = list(scripts)
        return cls(
            model_label=model_label,
            deletions=sum(s.counts["D"] for s in scripts),
            insertions=sum(s.counts["I"] for s in scripts),
            substitutions=sum(s.counts["S"] for s in scripts),
        )

    def to_dict(self):
        """Returns the totals as a dict."""

        return {
            "deletions": self.deletions,
            "insertions": self.insertions,
            "substitutions": self.substitutions,
            "total": self.total,
        }


@dataclass(frozen=True)
class ErrorFrequencyTable:
    """
    Most frequent errors of one kind.

    Rows are ``(key, count)`` sorted by descending count, then key. Keys are
    tokens, or ``(ref_token, hyp_token)`` pairs for substitutions.
    """

    kind: str
    rows: tuple

    @property
    def total(self):
        """Sum of the listed counts."""

        return sum(count for _, count in self.rows)

    def count_of(self, key):
        """Count of one key, 0 when it is not listed."""

        return dict(self.rows).get(key, 0)

    def to_frame(self):
        """Returns the rows in the CSV layout kind, ref_token, hyp_token, count."""

        records = []
        for key, count in self.rows:
            if self.kind == SUBSTITUTION:
                ref_token, hyp_token = key
            elif self.kind == DELETION:
                ref_token, hyp_token = key, ""
            else:
                ref_token, hyp_token = "", key
            records.append([self.kind, ref_token, hyp_token, count])
        return pd.DataFrame(records, columns=TABLE_COLUMNS)


def display_unit(unit, inv=None):
    """
    Renders a scoring unit for reports.

    IPA units become their display symbol, anything else (graphemes, the
    word delimiter, unrecognized letters) is returned unchanged.
    """

    inv = inv or default_inventory()
    phoneme = inv.ipa_spellings.get(unit)
    return phoneme.display if phoneme is not None else unit


def align_pairs(pairs, unit="grapheme", inv=None):
    """
    Aligns (reference, hypothesis) transcripts.

    References are scanned strictly and hypotheses leniently.

    Raises
    ------
    EmptyReference
        With the index of the first reference that has no units.
    """

    inv = inv or default_inventory()
    scripts = []
    for index, (ref, hyp) in enumerate(pairs):
        ref_units = units_of(ref, unit, inv)
        if not ref_units:
            raise EmptyReference(index)
        scripts.append(
            levenshtein_align(ref_units, units_of(hyp, unit, inv, strict=False))
        )
    return scripts


def _ranked(counter, k):
    """Top-k of a counter, by descending count then key."""

    return tuple(sorted(counter.items(), key=lambda item: (-item[1], item[0]))[:k])


def frequency_tables(scripts, unit="grapheme", inv=None, k=20):
    """
    Counts the errors of edit scripts.

    Phoneme units are shown by their display symbols; graphemes and the
    word delimiter are kept as they are.

    Returns
    -------
    tuple
        Deletion, insertion and substitution ErrorFrequencyTable, in that order.
    """

    def show(token):
        return display_unit(token, inv) if unit == "phoneme" else token

    counters = {kind: Counter() for kind in ERROR_KINDS}
    for script in scripts:
        for op in script.edits:
            kind = _KIND_OF_OP[op.kind]
            if kind == DELETION:
                counters[kind][show(op.ref)] += 1
            elif kind == INSERTION:
                counters[kind][show(op.hyp)] += 1
            else:
                counters[kind][(show(op.ref), show(op.hyp))] += 1

    return tuple(
        ErrorFrequencyTable(kind=kind, rows=_ranked(counters[kind], k))
        for kind in ERROR_KINDS
    )


def error_frequencies(pairs, unit="grapheme", inv=None, k=20, model_label=""):
    """
    Aggregates the edit scripts of a corpus.

    Parameters
    ----------
    pairs : Iterable[Tuple[str, str]]
        (reference, hypothesis) transcripts.
    unit : Optional[str]
        "grapheme" (default) or "phoneme".
    inv : Optional[PhonemeInventory]
        Inventory used at the phoneme level and for display symbols.
    k : Optional[int]
        Rows kept per table, defaults to 20.
    model_label : Optional[str]
        Label stored on the summary.

    Returns
    -------
    Tuple[ErrorSummary, Tuple[ErrorFrequencyTable, ...]]
        Totals and the deletion, insertion and substitution tables.
    """

    scripts = align_pairs(pairs, unit, inv)
    summary = ErrorSummary.from_scripts(scripts, model_label)
    return summary, frequency_tables(scripts, unit, inv, k)


def error_frame(tables):
    """Concatenates error tables into one frame with the CSV columns."""

    frames = [table.to_frame() for table in tables]
    if not frames:
        return pd.DataFrame(columns=TABLE_COLUMNS)
    return pd.concat(frames, ignore_index=True)


def summary_table(summaries):
    """
    Compares the error totals of several models.

    Parameters
    ----------
    summaries : Iterable[ErrorSummary]
        One summary per model.

    Returns
    -------
    pandas.DataFrame
        One row per model with Deletions, Insertions, Substitutions and Total.
    """

    summaries = list(summaries)
    df = pd.DataFrame(
        [[s.deletions, s.insertions, s.substitutions, s.total] for s in summaries],
        columns=["Deletions", "Insertions", "Substitutions", "Total"],
        index=[s.model_label for s in summaries],
    )
    df.index.name = "model"
    return df


def substitution_asymmetry(table, a, b):
    """
    Counts substitutions in both directions between two symbols.

    Parameters
    ----------
    table : ErrorFrequencyTable
        A substitution table; symbols are as shown in reports.
    a, b : str
        The two symbols.

    Returns
    -------
    Tuple[int, int]
        Counts of a -> b and of b -> a.
    """

    if table.kind != SUBSTITUTION:
        raise ValueError(f"Expected a substitution table, got {table.kind}.")
    return table.count_of((a, b)), table.count_of((b, a))


def digraph_error_share(scripts, inv=None):
    """
    Share of edits that involve a phoneme spelled with a digraph.

    Parameters
    ----------
    scripts : Iterable[EditScript]
        Phoneme-level edit scripts (IPA units).
    inv : Optional[PhonemeInventory]
        Inventory defining the digraphs.

    Returns
    -------
    float
        Fraction in [0, 1]; 0.0 when there are no edits.
    """

    inv = inv or default_inventory()
    digraphs = {p.ipa for p in inv.digraphs}

    edits = [op for script in scripts for op in script.edits]
    if not edits:
        return 0.0
    touching = sum(1 for op in edits if op.ref in digraphs or op.hyp in digraphs)
    return touching / len(edits)


def corpus_error_rates(pairs, unit="grapheme", inv=None):
    """
    Micro-averaged CER and WER of a set of transcripts.

    Returns
    -------
    Tuple[float, float, list]
        CER, WER and the unit-level edit scripts.
    """

    pairs = list(pairs)
    if not pairs:
        raise EmptySplit("No transcripts to score.")
    scripts = align_pairs(pairs, unit, inv)

    ref_units = sum(len(s.ops) - s.counts["I"] for s in scripts)
    word_edits, ref_words = 0, 0
    for ref, hyp in pairs:
        words = words_of(ref)
        word_edits += levenshtein_align(words, words_of(hyp)).distance
        ref_words += len(words)

    char_rate = sum(s.distance for s in scripts) / ref_units
    word_rate = word_edits / ref_words
    return char_rate, word_rate, scripts


def hypothesis_text(ids, vocab, inv=None):
    """
    Turns decoded ids into an orthographic transcript.

    Padding and unknown-token ids are dropped. Phoneme hypotheses are spelled
    back into orthography, so both levels can be scored from the same kind of
    text.
    """

    inv = inv or default_inventory()
    tokens = vocab.tokens_of(i for i in ids if i not in (vocab.pad_id, vocab.unk_id))
    if vocab.level == "phoneme":
        return ipa_to_orth(
            [
                WORD_BOUNDARY if t == Segmenter.word_delimiter else inv.by_ipa(t)
                for t in tokens
            ],
            inv,
        )
    return vocab.segmenter(inv).join(tokens)


class Recognizer:
    """
    Turns utterances into orthographic hypotheses with a trained model.

    Parameters
    ----------
    params : ModelParams
        Model parameters.
    vocab : TokenVocabulary
        Vocabulary of the model outputs.
    decoder : Optional[str]
        "greedy" (default) or "beam".
    beam_width : Optional[int]
        Beam width for the beam decoder, defaults to 8.
    inv : Optional[PhonemeInventory]
        Inventory used to spell phoneme hypotheses.
    """

    def __init__(self, params, vocab, decoder="greedy", beam_width=8, inv=None):
        self._log = logging.getLogger(__name__)
        self.params = params
        self.vocab = vocab
        self.inv = inv or default_inventory()

        kwargs = {"beam_width": beam_width} if decoder == "beam" else {}
        self.decoder = Decoder.get(decoder, **kwargs)

    @classmethod
    def from_checkpoint(cls, path, vocab, **kwargs):
        """Loads a checkpoint, checking it against the vocabulary."""

        params, _ = load_checkpoint(path, vocab)
        return cls(params, vocab, **kwargs)

    @property
    def level(self):
        """Tokenization level of the model outputs."""

        return self.vocab.level

    def transcribe(self, features):
        """Decodes one feature matrix to an orthographic transcript."""

        result = self.decoder(forward(self.params, features))
        return hypothesis_text(result.ids, self.vocab, self.inv)

    def __call__(self, utt):
        hyp = self.transcribe(utt.load_features())
        self._log.debug("%s: %s -> %s", utt.id, utt.orth, hyp)
        return hyp


@dataclass
class EvaluationReport:
    """Scores and error analysis of one model on one set of utterances."""

    cer: float
    wer: float
    n_utts: int
    unit: str
    summary: ErrorSummary
    tables: tuple
    hypotheses: List[dict] = field(default_factory=list)
    digraph_share: Optional[float] = None

    def to_dict(self):
        """Returns the JSON form of the report."""

        data = {
            "cer": self.cer,
            "wer": self.wer,
            "n_utts": self.n_utts,
            "unit": self.unit,
            "summary": self.summary.to_dict(),
        }
        if self.digraph_share is not None:
            data["digraph_share"] = self.digraph_share
        return data

    def error_frame(self):
        """Error tables in the CSV layout."""

        return error_frame(self.tables)

    def save(self, json_path, csv_path=None):
        """Writes the JSON report and, optionally, the error table CSV."""

        with open(json_path, "w", encoding="utf-8", newline="\n") as report_file:
            json.dump(self.to_dict(), report_file, indent=2, sort_keys=True)
            report_file.write("\n")
        if csv_path:
            self.error_frame().to_csv(csv_path, index=False, lineterminator="\n")


# pylint: disable=too-many-arguments
def evaluate_model(
    recognizer, utts, inv=None, common_space=None, k=20, model_label=None
):
    """
    Decodes and scores a set of utterances.

    Parameters
    ----------
    recognizer : Callable[[Utterance], str]
        Maps an utterance to an orthographic hypothesis and has a ``level``.
    utts : Iterable[Utterance]
        Utterances with cleaned reference transcripts.
    inv : Optional[PhonemeInventory]
        Phoneme inventory.
    common_space : Optional[str]
        "ipa" scores every model on phonemes; by default each model is scored
        on its own level.
    k : Optional[int]
        Rows kept per error table.
    model_label : Optional[str]
        Label of the summary, defaults to the level.

    Returns
    -------
    EvaluationReport
        Micro-averaged CER and WER with error tables.
    """

    if common_space not in (None, "ipa"):
        raise ValueError(f"Unknown common space: {common_space}.")

    inv = inv or default_inventory()
    unit = "phoneme" if common_space == "ipa" else recognizer.level

    utts = list(utts)
    hypotheses = [
        {"id": utt.id, "ref": utt.orth, "hyp": recognizer(utt)} for utt in utts
    ]
    pairs = [(h["ref"], h["hyp"]) for h in hypotheses]

    char_rate, word_rate, scripts = corpus_error_rates(pairs, unit, inv)
    label = model_label or recognizer.level
    report = EvaluationReport(
        cer=char_rate,
        wer=word_rate,
        n_utts=len(utts),
        unit=unit,
        summary=ErrorSummary.from_scripts(scripts, label),
        tables=frequency_tables(scripts, unit, inv, k),
        hypotheses=hypotheses,
        digraph_share=digraph_error_share(scripts, inv) if unit == "phoneme" else None,
    )
    _log.info(
        "Evaluated %d utterances [%s]: CER %.4f, WER %.4f",
        report.n_utts,
        unit,
        report.cer,
        report.wer,
    )
    return report
