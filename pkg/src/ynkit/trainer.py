"""
Module containing the training loop of the acoustic model.

Minibatch SGD on the CTC loss with a linear learning-rate decay to zero.
After every epoch the model is scored on the validation set (greedy decoding)
and the parameters of the epoch with the lowest validation CER are kept.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import List

import numpy as np
import pandas as pd

from ynkit.ctc import ctc_loss, min_frames
from ynkit.decoders import greedy_decode
from ynkit.errors import DimensionMismatch, EmptySplit, InfeasibleLabel
from ynkit.evaluation import corpus_error_rates, hypothesis_text
from ynkit.model import backward, forward, init_params
from ynkit.phonology import default_inventory
from ynkit.vocabulary import encode

_log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    """
    Settings of the training loop.

    ``epochs`` is a cap: training ends earlier when neither the validation CER
    nor the validation loss has improved for ``early_stop_patience`` epochs
    (0 disables early stopping).
    """

    epochs: int = 16
    lr_init: float = 1e-3
    batch_size: int = 8
    early_stop_patience: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be at least 1, got {self.epochs}.")
        if not self.lr_init > 0:
            raise ValueError(f"lr_init must be positive, got {self.lr_init}.")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be at least 1, got {self.batch_size}.")
        if self.early_stop_patience < 0:
            raise ValueError(
                "early_stop_patience must be non-negative, "
                f"got {self.early_stop_patience}."
            )

    def to_dict(self):
        """Returns the config as a dict."""

        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        """Builds a config from a dict, ignoring unknown keys."""

        return cls(**{k: v for k, v in data.items() if k in cls.__dataclass_fields__})


# Smallest relative drop of the validation loss that counts as progress
LOSS_TOLERANCE = 1e-3


def learning_rate(step, total_steps, lr_init):
    """Linear decay, ``lr_init * (1 - step / total_steps)``."""

    return lr_init * (1 - step / total_steps)


def loss_improved(loss, best_loss):
    """
    Whether ``loss`` is lower than ``best_loss`` by more than ``LOSS_TOLERANCE``.

    While the model still emits only blanks the CER stays flat, so the
    validation loss is what shows that training is getting somewhere.
    """

    if math.isinf(best_loss):
        return loss < best_loss
    return loss < best_loss - LOSS_TOLERANCE * abs(best_loss)


# pylint: disable=too-many-instance-attributes
@dataclass
class TrainReport:
    """Per-epoch curves of one training run; epochs are numbered from 1."""

    train_loss: List[float] = field(default_factory=list)
    valid_loss: List[float] = field(default_factory=list)
    valid_cer: List[float] = field(default_factory=list)
    valid_wer: List[float] = field(default_factory=list)
    learning_rate: List[float] = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False

    @property
    def epochs_run(self):
        """Number of completed epochs."""

        return len(self.train_loss)

    @property
    def best_cer(self):
        """Validation CER of the best epoch."""

        return self.valid_cer[self.best_epoch - 1]

    @property
    def best_wer(self):
        """Validation WER of the best epoch."""

        return self.valid_wer[self.best_epoch - 1]

    def to_frame(self):
        """
        Returns the per-epoch table.

        Returns
        -------
        pandas.DataFrame
            Indexed by epoch, with train_loss, valid_loss, valid_cer,
            valid_wer and learning_rate columns.
        """

        df = pd.DataFrame(
            {
                "train_loss": self.train_loss,
                "valid_loss": self.valid_loss,
                "valid_cer": self.valid_cer,
                "valid_wer": self.valid_wer,
                "learning_rate": self.learning_rate,
            },
            index=pd.RangeIndex(1, self.epochs_run + 1, name="epoch"),
        )
        return df

    def to_dict(self):
        """Returns the report as a dict."""

        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        """Builds a report from its dict form."""

        return cls(**data)

    def save(self, path):
        """Writes the report as JSON."""

        with open(path, "w", encoding="utf-8", newline="\n") as report_file:
            json.dump(self.to_dict(), report_file, indent=2, sort_keys=True)
            report_file.write("\n")


@dataclass
class _Example:
    """An utterance ready for training: features and label ids."""

    utt_id: str
    orth: str
    frames: np.ndarray
    label: tuple


def _prepare(utts, vocab, model_config, inv):
    """Loads features and labels, checking dimensions and feasibility."""

    examples = []
    for utt in utts:
        frames = utt.load_features().frames
        if frames.shape[1] != model_config.input_dim:
            raise DimensionMismatch(
                f"Utterance '{utt.id}' has {frames.shape[1]}-dimensional features, "
                f"model expects {model_config.input_dim}."
            )

        label = encode(utt.orth, vocab, inv).ids
        needed = min_frames(label)
        if frames.shape[0] < needed:
            raise InfeasibleLabel(frames.shape[0], needed, utt.id)
        examples.append(_Example(utt.id, utt.orth, frames, label))
    return examples


def _validate(params, examples, vocab, inv):
    """Mean CTC loss plus greedy-decoding CER and WER on a validation set."""

    losses, pairs = [], []
    for example in examples:
        logits = forward(params, example.frames)
        losses.append(ctc_loss(logits, example.label).loss)
        pairs.append(
            (example.orth, hypothesis_text(greedy_decode(logits).ids, vocab, inv))
        )

    char_rate, word_rate, _ = corpus_error_rates(pairs, vocab.level, inv)
    return math.fsum(losses) / len(losses), char_rate, word_rate


# pylint: disable=too-many-arguments,too-many-locals
def train(train_utts, valid_utts, vocab, model_config, train_config, inv=None):
    """
    Trains the acoustic model.

    Parameters
    ----------
    train_utts : Sequence[Utterance]
        Training utterances with cleaned transcripts.
    valid_utts : Sequence[Utterance]
        Validation utterances.
    vocab : TokenVocabulary
        Output vocabulary; its size must match ``model_config.vocab_size``.
    model_config : ModelConfig
        Model shape and initialization seed.
    train_config : TrainConfig
        Training settings.
    inv : Optional[PhonemeInventory]
        Inventory used at the phoneme level.

    Returns
    -------
    Tuple[ModelParams, TrainReport]
        Parameters of the best epoch and the training report.

    Raises
    ------
    EmptySplit
        When either split is empty.
    InfeasibleLabel
        With the utterance id, when an utterance has fewer frames than its
        label needs.
    """

    if not train_utts or not valid_utts:
        raise EmptySplit(
            f"Need non-empty splits, got {len(train_utts)} training and "
            f"{len(valid_utts)} validation utterances."
        )
    if model_config.vocab_size != len(vocab):
        raise DimensionMismatch(
            f"Model has {model_config.vocab_size} outputs, vocabulary has {len(vocab)}."
        )

    inv = inv or default_inventory()
    train_examples = _prepare(train_utts, vocab, model_config, inv)
    valid_examples = _prepare(valid_utts, vocab, model_config, inv)

    rng = np.random.default_rng(train_config.seed)
    params = init_params(model_config)
    best_params = params.copy()

    batches_per_epoch = math.ceil(len(train_examples) / train_config.batch_size)
    total_steps = train_config.epochs * batches_per_epoch

    report = TrainReport()
    step, since_best = 0, 0
    best_loss = math.inf
    for epoch in range(1, train_config.epochs + 1):
        order = rng.permutation(len(train_examples))
        report.learning_rate.append(
            learning_rate(step, total_steps, train_config.lr_init)
        )

        epoch_losses = []
        for start in range(0, len(order), train_config.batch_size):
            stop = start + train_config.batch_size
            batch = [train_examples[i] for i in order[start:stop]]

            # Summed in batch order so runs are bitwise reproducible
            grad_sum = None
            for example in batch:
                loss, grads = backward(params, example.frames, example.label)
                epoch_losses.append(loss)
                if grad_sum is None:
                    grad_sum = grads
                else:
                    grad_sum = grad_sum.add_scaled(grads, 1.0)

            lr = learning_rate(step, total_steps, train_config.lr_init)
            params = params.add_scaled(grad_sum, -lr / len(batch))
            step += 1

        valid_loss, valid_cer, valid_wer = _validate(params, valid_examples, vocab, inv)
        report.train_loss.append(math.fsum(epoch_losses) / len(epoch_losses))
        report.valid_loss.append(valid_loss)
        report.valid_cer.append(valid_cer)
        report.valid_wer.append(valid_wer)

        if report.best_epoch == 0 or valid_cer < report.best_cer:
            report.best_epoch = epoch
            best_params = params.copy()
            since_best = 0
        elif not loss_improved(valid_loss, best_loss):
            since_best += 1
        else:
            since_best = 0
        best_loss = min(best_loss, valid_loss)

        _log.info(
            "Epoch %d/%d: train loss %.4f, valid loss %.4f, CER %.4f, WER %.4f",
            epoch,
            train_config.epochs,
            report.train_loss[-1],
            valid_loss,
            valid_cer,
            valid_wer,
        )

        patience = train_config.early_stop_patience
        if patience and since_best >= patience and epoch < train_config.epochs:
            report.stopped_early = True
            _log.info("No improvement for %d epochs, stopping early.", patience)
            break

    _log.info("Best epoch %d with CER %.4f", report.best_epoch, report.best_cer)
    return best_params, report
