"""
Module for Levenshtein alignment and the error rates built on it.

Both rates are ``(S + D + I) / N`` over a minimal alignment: characters (or
phonemes) for CER, whitespace-separated words for WER. Spaces count as CER
units and show up as the word delimiter "_".
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ynkit import segmenters  # pylint: disable=unused-import
from ynkit.base_classes import Segmenter
from ynkit.errors import EmptyReference
from ynkit.phonology import default_inventory

MATCH = "match"
SUBSTITUTE = "substitute"
DELETE = "delete"
INSERT = "insert"
EDIT_KINDS = (MATCH, SUBSTITUTE, DELETE, INSERT)


@dataclass(frozen=True)
class EditOp:
    """
    One alignment step.

    ``ref`` is None for insertions and ``hyp`` is None for deletions.
    """

    kind: str
    ref: Optional[str] = None
    hyp: Optional[str] = None


@dataclass(frozen=True)
class EditScript:
    """Operation sequence of a minimal alignment."""

    ops: tuple

    def count(self, kind):
        """Number of operations of one kind."""

        return sum(1 for op in self.ops if op.kind == kind)

    @property
    def counts(self):
        """Dict with the S, D, I and M counts."""

        return {
            "S": self.count(SUBSTITUTE),
            "D": self.count(DELETE),
            "I": self.count(INSERT),
            "M": self.count(MATCH),
        }

    @property
    def distance(self):
        """Levenshtein distance, S + D + I."""

        return len(self.ops) - self.count(MATCH)

    @property
    def edits(self):
        """Operations other than matches."""

        return tuple(op for op in self.ops if op.kind != MATCH)

    def replay(self, ref):
        """
        Applies the script to a reference sequence.

        Raises
        ------
        ValueError
            When the script does not fit the reference.
        """

        ref = list(ref)
        out, position = [], 0
        for op in self.ops:
            if op.kind == INSERT:
                out.append(op.hyp)
                continue
            if position >= len(ref) or ref[position] != op.ref:
                raise ValueError(f"Edit {op} does not fit reference at {position}.")
            if op.kind in (MATCH, SUBSTITUTE):
                out.append(op.hyp)
            position += 1

        if position != len(ref):
            raise ValueError("Edit script does not cover the whole reference.")
        return out


def levenshtein_align(ref, hyp):
    """
    Aligns two token sequences with unit costs.

    Ties in the backtrace are broken Match > Substitute > Delete > Insert, so
    scripts are reproducible.

    Parameters
    ----------
    ref : Sequence[str]
        Reference tokens.
    hyp : Sequence[str]
        Hypothesis tokens.

    Returns
    -------
    EditScript
        A minimal script turning ref into hyp.
    """

    ref, hyp = list(ref), list(hyp)
    rows, cols = len(ref), len(hyp)

    dist = np.zeros((rows + 1, cols + 1), dtype=np.int64)
    dist[:, 0] = np.arange(rows + 1)
    dist[0, :] = np.arange(cols + 1)
    for i in range(1, rows + 1):
        for j in range(1, cols + 1):
            dist[i, j] = min(
                dist[i - 1, j - 1] + (ref[i - 1] != hyp[j - 1]),
                dist[i - 1, j] + 1,
                dist[i, j - 1] + 1,
            )

    ops = []
    i, j = rows, cols
    while i or j:
        here = dist[i, j]
        diagonal = i and j
        if diagonal and ref[i - 1] == hyp[j - 1] and here == dist[i - 1, j - 1]:
            ops.append(EditOp(MATCH, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif diagonal and here == dist[i - 1, j - 1] + 1:
            ops.append(EditOp(SUBSTITUTE, ref[i - 1], hyp[j - 1]))
            i, j = i - 1, j - 1
        elif i and here == dist[i - 1, j] + 1:
            ops.append(EditOp(DELETE, ref[i - 1], None))
            i -= 1
        else:
            ops.append(EditOp(INSERT, None, hyp[j - 1]))
            j -= 1

    return EditScript(tuple(reversed(ops)))


def units_of(text, unit, inv=None, strict=True):
    """
    Splits a transcript into scoring units.

    Parameters
    ----------
    text : str
        Orthographic transcript.
    unit : str
        "grapheme" or "phoneme".
    inv : Optional[PhonemeInventory]
        Inventory used at the phoneme level.
    strict : Optional[bool]
        At the phoneme level, raise on unrecognized letters instead of
        keeping them as units of their own.
    """

    return Segmenter.get(unit, inv=inv or default_inventory(), strict=strict)(text)


def words_of(text):
    """Whitespace-separated words."""

    return text.split()


def cer(ref, hyp, unit="grapheme", inv=None):
    """
    Character (or phoneme) error rate.

    The reference is scanned strictly, the hypothesis leniently, since a
    recognizer may emit letters the inventory does not know.

    Parameters
    ----------
    ref : str
        Reference transcript.
    hyp : str
        Hypothesis transcript.
    unit : Optional[str]
        "grapheme" (default) or "phoneme".
    inv : Optional[PhonemeInventory]
        Inventory used at the phoneme level.

    Returns
    -------
    float
        ``(S + D + I) / N``, may exceed 1.

    Raises
    ------
    EmptyReference
        When the reference has no units.
    """

    ref_units = units_of(ref, unit, inv)
    if not ref_units:
        raise EmptyReference()
    script = levenshtein_align(ref_units, units_of(hyp, unit, inv, strict=False))
    return script.distance / len(ref_units)


def wer(ref, hyp):
    """
    Word error rate.

    Raises
    ------
    EmptyReference
        When the reference has no words.
    """

    ref_words = words_of(ref)
    if not ref_words:
        raise EmptyReference()
    return levenshtein_align(ref_words, words_of(hyp)).distance / len(ref_words)
