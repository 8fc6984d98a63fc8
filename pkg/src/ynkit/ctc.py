"""
Module implementing the Connectionist Temporal Classification loss.

The loss is computed with the forward-backward algorithm over the label
interleaved with blanks, entirely in log space and double precision. The
gradient with respect to the logits is ``softmax - posterior occupancy``.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ynkit.errors import (
    DimensionMismatch,
    InfeasibleLabel,
    InvalidId,
    TooLargeForOracle,
)

BLANK_ID = 0
ORACLE_MAX_FRAMES = 8
ORACLE_MAX_VOCAB = 5


@dataclass
class CtcLossResult:
    """Negative log-likelihood of a label and its gradient w.r.t. the logits."""

    loss: float
    grad: np.ndarray


def log_softmax(logits):
    """Row-wise log-softmax of a T x V matrix."""

    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def collapse(path, blank=BLANK_ID):
    """Removes repeated ids, then blanks."""

    return tuple(
        token
        for index, token in enumerate(path)
        if token != blank and (index == 0 or token != path[index - 1])
    )


def min_frames(label):
    """Smallest T for which the label has an alignment."""

    label = list(label)
    repeats = sum(1 for a, b in zip(label, label[1:]) if a == b)
    return len(label) + repeats


def extend_label(label, blank=BLANK_ID):
    """
    Interleaves the label with blanks.

    Returns
    -------
    Tuple[numpy.ndarray, numpy.ndarray]
        Extended label of length 2L + 1 and, per position, whether it can be
        entered by skipping the blank in front of it.
    """

    extended = [blank]
    skip = [False]
    for index, token in enumerate(label):
        extended.extend([token, blank])
        skip.extend([index > 0 and token != label[index - 1], False])
    return np.asarray(extended, dtype=np.int64), np.asarray(skip, dtype=bool)


def _check_inputs(logits, label):
    """Validates shapes and ids, returns float64 logits and the label list."""

    logits = np.asarray(logits, dtype=np.float64)
    if logits.ndim != 2 or logits.shape[0] < 1 or logits.shape[1] < 2:
        raise DimensionMismatch(
            f"Logits must be T x V with T >= 1 and V >= 2, got {logits.shape}."
        )
    if not np.all(np.isfinite(logits)):
        raise ValueError("Logits contain non-finite values.")

    label = [int(token) for token in label]
    for token in label:
        if token == BLANK_ID or not 0 <= token < logits.shape[1]:
            raise InvalidId(token)
    return logits, label


def forward_log_probs(emit, skip):
    """
    Forward recursion.

    Parameters
    ----------
    emit : numpy.ndarray
        T x S log-probabilities of emitting each extended-label position.
    skip : numpy.ndarray
        Skip flags from ``extend_label``.

    Returns
    -------
    numpy.ndarray
        T x S log alpha, including the emission at t.
    """

    frames, states = emit.shape
    log_alpha = np.full((frames, states), -np.inf)
    log_alpha[0, 0] = emit[0, 0]
    if states > 1:
        log_alpha[0, 1] = emit[0, 1]

    for t in range(1, frames):
        prev = log_alpha[t - 1]
        acc = prev.copy()
        acc[1:] = np.logaddexp(acc[1:], prev[:-1])
        acc[2:] = np.where(skip[2:], np.logaddexp(acc[2:], prev[:-2]), acc[2:])
        log_alpha[t] = acc + emit[t]
    return log_alpha


def backward_log_probs(emit, skip):
    """
    Backward recursion.

    Returns
    -------
    numpy.ndarray
        T x S log beta, excluding the emission at t, so that
        ``alpha + beta`` is the log mass of all paths through (t, s).
    """

    frames, states = emit.shape
    log_beta = np.full((frames, states), -np.inf)
    log_beta[-1, -1] = 0.0
    if states > 1:
        log_beta[-1, -2] = 0.0

    for t in range(frames - 2, -1, -1):
        nxt = log_beta[t + 1] + emit[t + 1]
        acc = nxt.copy()
        acc[:-1] = np.logaddexp(acc[:-1], nxt[1:])
        acc[:-2] = np.where(skip[2:], np.logaddexp(acc[:-2], nxt[2:]), acc[:-2])
        log_beta[t] = acc
    return log_beta


def ctc_loss(logits, label):
    """
    CTC negative log-likelihood and its exact gradient.

    Parameters
    ----------
    logits : numpy.ndarray
        T x V unnormalized scores; id 0 is the blank.
    label : Sequence[int]
        Target ids, none of them blank.

    Returns
    -------
    CtcLossResult
        Loss and T x V gradient w.r.t. the logits.

    Raises
    ------
    InfeasibleLabel
        When T is smaller than the label length plus its adjacent repeats.
    """

    logits, label = _check_inputs(logits, label)
    frames, vocab_size = logits.shape

    needed = min_frames(label)
    if frames < needed:
        raise InfeasibleLabel(frames, needed)

    log_probs = log_softmax(logits)
    extended, skip = extend_label(label)
    emit = log_probs[:, extended]

    log_alpha = forward_log_probs(emit, skip)
    log_beta = backward_log_probs(emit, skip)

    log_likelihood = log_alpha[-1, -1]
    if len(extended) > 1:
        log_likelihood = np.logaddexp(log_likelihood, log_alpha[-1, -2])

    # Posterior occupancy of every extended position, summed per token
    gamma = np.exp(log_alpha + log_beta - log_likelihood)
    occupancy = np.zeros((frames, vocab_size))
    np.add.at(occupancy.T, extended, gamma.T)

    return CtcLossResult(
        loss=float(-log_likelihood), grad=np.exp(log_probs) - occupancy
    )


def ctc_loss_bruteforce(logits, label):
    """
    CTC loss by enumerating every path, for checking ``ctc_loss``.

    Returns
    -------
    float
        Negative log of the summed path probabilities, ``math.inf`` when no
        path collapses to the label.

    Raises
    ------
    TooLargeForOracle
        When T > 8 or V > 5.
    """

    logits, label = _check_inputs(logits, label)
    frames, vocab_size = logits.shape
    if frames > ORACLE_MAX_FRAMES or vocab_size > ORACLE_MAX_VOCAB:
        raise TooLargeForOracle(
            f"Oracle limited to T <= {ORACLE_MAX_FRAMES}, V <= {ORACLE_MAX_VOCAB}; "
            f"got {logits.shape}."
        )

    total = labeling_distribution_bruteforce(logits).get(tuple(label), 0.0)
    if total == 0.0:
        return math.inf
    return -math.log(total)


def labeling_distribution_bruteforce(logits):
    """
    Probability of every labeling, by path enumeration.

    Returns
    -------
    dict
        Mapping of collapsed labeling (tuple of ids) to its probability.
    """

    probs = np.exp(log_softmax(logits))
    frames, vocab_size = probs.shape

    terms = {}
    for path in itertools.product(range(vocab_size), repeat=frames):
        prob = math.prod(probs[t, token] for t, token in enumerate(path))
        terms.setdefault(collapse(path), []).append(prob)
    return {labeling: math.fsum(values) for labeling, values in terms.items()}
