"""
Module providing Segmenter classes for the two tokenization levels.

A Segmenter splits a cleaned orthographic transcript into a list of unit
strings. Word boundaries are returned as the word delimiter "_", collapsed and
trimmed. The grapheme level keeps digraphs split ("nh" -> "n", "h"), the
phoneme level keeps them whole ("nh" -> "n̪").

Segmenter classes should extend the Segmenter base class and be initialized
via the `Segmenter.get()` method.
"""

import unicodedata

from ynkit.base_classes import Segmenter
from ynkit.phonology import WORD_BOUNDARY, default_inventory, orth_to_ipa


def grapheme_clusters(text):
    """
    Splits text into grapheme clusters after NFC normalization.

    A cluster is a base character followed by any combining marks, so an
    underlined letter is one cluster whether or not it has a precomposed form.
    """

    clusters = []
    for char in unicodedata.normalize("NFC", text):
        if clusters and unicodedata.combining(char):
            clusters[-1] += char
        else:
            clusters.append(char)
    return clusters


class GraphemeSegmenter(Segmenter):
    """Splits text into grapheme clusters; digraphs become two units."""

    symbol = "grapheme"

    # pylint: disable=unused-argument
    def __init__(self, inv=None, strict=True):
        self._inv = inv

    def __call__(self, text):
        units = []
        for cluster in grapheme_clusters(text):
            if cluster.isspace():
                if units and units[-1] != self.word_delimiter:
                    units.append(self.word_delimiter)
            else:
                units.append(cluster)

        if units and units[-1] == self.word_delimiter:
            units.pop()
        return units


class PhonemeSegmenter(Segmenter):
    """Transduces text to phonemes; each phoneme is one IPA unit."""

    symbol = "phoneme"

    def __init__(self, inv=None, strict=True):
        self._inv = inv or default_inventory()
        self._strict = strict

    def __call__(self, text):
        return [
            self.word_delimiter if p is WORD_BOUNDARY else getattr(p, "ipa", p)
            for p in orth_to_ipa(text, self._inv, strict=self._strict)
        ]
