"""
Module providing Decoder classes that turn CTC logits into token ids.

All Decoder classes should be initialized using the `Decoder.get()` method,
for example ``Decoder.get("beam", beam_width=8)``.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from ynkit.base_classes import Decoder
from ynkit.ctc import BLANK_ID, collapse, log_softmax
from ynkit.errors import DimensionMismatch

_NEG_INF = -math.inf


@dataclass(frozen=True)
class DecodeResult:
    """Decoded ids (no blanks) and the log-probability the decoder assigns them."""

    ids: tuple
    score: float


def _log_probs(logits):
    """Validates logits and returns their row-wise log-softmax."""

    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[1] < 2:
        raise DimensionMismatch(
            f"Logits must be T x V with V >= 2, got {logits.shape}."
        )
    return log_softmax(logits)


def _logaddexp(a, b):
    """Scalar log(exp(a) + exp(b))."""

    if a == _NEG_INF:
        return b
    if b == _NEG_INF:
        return a
    high, low = (a, b) if a > b else (b, a)
    return high + math.log1p(math.exp(low - high))


class GreedyDecoder(Decoder):
    """Best path decoding: per-frame argmax, then collapse."""

    symbol = "greedy"

    def __call__(self, logits):
        log_probs = _log_probs(logits)

        # argmax breaks ties towards the lowest id
        best = np.argmax(log_probs, axis=1)
        score = float(log_probs[np.arange(len(best)), best].sum())
        return DecodeResult(ids=collapse(best.tolist(), BLANK_ID), score=score)


class BeamDecoder(Decoder):
    """
    Prefix beam search.

    Every prefix keeps the log-probability of ending in a blank and in a
    non-blank; alignments that collapse to the same prefix are merged. With
    a beam wide enough to keep every prefix the result is the labeling with
    the highest total probability.

    Parameters
    ----------
    beam_width : Optional[int]
        Number of prefixes kept per frame, defaults to 8.
    """

    symbol = "beam"

    def __init__(self, beam_width=8):
        if beam_width < 1:
            raise ValueError(f"Beam width must be at least 1, got {beam_width}.")
        self._log = logging.getLogger(__name__)
        self.beam_width = beam_width

    def __call__(self, logits):
        log_probs = _log_probs(logits)
        frames, vocab_size = log_probs.shape

        beams = {(): (0.0, _NEG_INF)}
        for t in range(frames):
            row = log_probs[t].tolist()
            candidates = {}

            def extend(prefix, blank=_NEG_INF, non_blank=_NEG_INF):
                old_blank, old_non_blank = candidates.get(prefix, (_NEG_INF, _NEG_INF))
                candidates[prefix] = (
                    _logaddexp(old_blank, blank),
                    _logaddexp(old_non_blank, non_blank),
                )

            for prefix, (p_blank, p_non_blank) in beams.items():
                total = _logaddexp(p_blank, p_non_blank)

                # Stay on the prefix: emit blank, or repeat the last token
                extend(prefix, blank=total + row[BLANK_ID])
                if prefix:
                    extend(prefix, non_blank=p_non_blank + row[prefix[-1]])

                for token in range(vocab_size):
                    if token == BLANK_ID:
                        continue
                    if prefix and token == prefix[-1]:
                        # A repeat only counts as new after a blank
                        extend(prefix + (token,), non_blank=p_blank + row[token])
                    else:
                        extend(prefix + (token,), non_blank=total + row[token])

            ranked = sorted(
                candidates.items(), key=lambda item: (-_logaddexp(*item[1]), item[0])
            )
            beams = dict(ranked[: self.beam_width])

        best, (p_blank, p_non_blank) = next(iter(beams.items()))
        self._log.debug("Beam search kept %d prefixes, best %s", len(beams), best)
        return DecodeResult(ids=best, score=_logaddexp(p_blank, p_non_blank))


def greedy_decode(logits):
    """Greedy CTC decoding, see GreedyDecoder."""

    return GreedyDecoder()(logits)


def beam_decode(logits, beam_width=8):
    """Prefix beam search decoding, see BeamDecoder."""

    return BeamDecoder(beam_width=beam_width)(logits)
