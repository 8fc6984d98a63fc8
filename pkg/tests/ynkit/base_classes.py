"""Module for test base classes."""

import numpy as np

from ynkit import decoders, segmenters  # pylint: disable=unused-import
from ynkit.base_classes import Decoder, Segmenter
from ynkit.decoders import DecodeResult


class BaseSegmenterTests:
    """Class providing basic unit tests for Segmenter classes."""

    segmenter = NotImplemented
    text = ""
    expected = NotImplemented

    def _apply(self, text):
        """Applies a Segmenter to a text."""

        segmenter = Segmenter.get(self.segmenter)
        return segmenter(text)

    def test_returns_list(self):
        """Test whether segmenter returns a list of strings."""

        result = self._apply(self.text)
        assert isinstance(result, list)
        assert all(isinstance(unit, str) for unit in result)

    def test_empty_text(self):
        """Test whether an empty text gives no units."""

        assert self._apply("") == []

    def test_no_edge_delimiters(self):
        """Test whether surrounding whitespace gives no word delimiters."""

        result = self._apply(f"  {self.text}   ")
        assert result == self._apply(self.text)

    def test_collapsed_delimiters(self):
        """Test whether repeated whitespace gives one word delimiter."""

        spaced = self._apply(self.text.replace(" ", " \t  "))
        assert spaced == self._apply(self.text)

    def test_words(self):
        """Test whether there is one delimiter between every two words."""

        segmenter = Segmenter.get(self.segmenter)
        units = self._apply(self.text)
        assert units.count(segmenter.word_delimiter) == len(self.text.split()) - 1

    def test_result(self):
        """Checker whether result matches the expected result."""

        assert self._apply(self.text) == self.expected


class BaseDecoderTests:
    """Class providing basic unit tests for Decoder classes."""

    decoder = NotImplemented
    kwargs = {}
    logits = np.zeros((1, 2))
    expected = NotImplemented

    def _apply(self, logits):
        """Applies a Decoder to a logit matrix."""

        decoder = Decoder.get(self.decoder, **self.kwargs)
        return decoder(logits)

    def test_returns_result(self):
        """Test whether decoder returns a DecodeResult."""

        result = self._apply(self.logits)
        assert isinstance(result, DecodeResult)

    def test_no_blanks(self):
        """Test whether decoded ids never contain the blank."""

        rng = np.random.default_rng(7)
        result = self._apply(rng.normal(size=(12, 4)))
        assert 0 not in result.ids

    def test_ids_within_vocab(self):
        """Test whether decoded ids are valid rows of the logit matrix."""

        rng = np.random.default_rng(8)
        result = self._apply(rng.normal(size=(10, 5)))
        assert all(0 < i < 5 for i in result.ids)

    def test_score_is_log_prob(self):
        """Test whether the score is a log-probability."""

        rng = np.random.default_rng(9)
        result = self._apply(rng.normal(size=(6, 3)))
        assert result.score <= 0.0

    def test_single_frame(self):
        """Test whether a single frame decodes to at most one id."""

        result = self._apply(np.array([[0.0, 3.0, 1.0]]))
        assert result.ids == (1,)

    def test_result(self):
        """Checker whether result matches the expected result."""

        assert self._apply(self.logits).ids == self.expected
