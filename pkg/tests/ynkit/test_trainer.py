"""Module for unit testing the training loop."""

import json

import numpy as np
import pytest

from ynkit.corpus import Utterance
from ynkit.errors import DimensionMismatch, EmptySplit, InfeasibleLabel
from ynkit.features import write_features
from ynkit.model import PARAM_NAMES, ModelConfig
from ynkit.synthetic import SynthConfig, generate_synthetic
from ynkit import trainer
from ynkit.trainer import (
    TrainConfig,
    TrainReport,
    learning_rate,
    loss_improved,
    train,
)
from ynkit.vocabulary import build_vocab


def make_run(utts, level="phoneme", **kwargs):
    """Splits utterances 12 / 4 and builds the vocabulary and model config."""

    vocab = build_vocab([u.orth for u in utts], level)
    model_config = ModelConfig(
        input_dim=4, vocab_size=len(vocab), context=1, hidden_dim=8
    )
    train_config = TrainConfig(
        **{"epochs": 2, "lr_init": 0.05, "batch_size": 4, **kwargs}
    )
    return utts[:12], utts[12:], vocab, model_config, train_config


class TestLearningRate:
    """Tests for the learning-rate schedule."""

    @pytest.mark.parametrize(
        "step, expected", [(0, 1e-3), (5, 5e-4), (9, 1e-4), (10, 0.0)]
    )
    def test_linear(self, step, expected):
        """Test the linear decay to zero."""

        assert learning_rate(step, 10, 1e-3) == pytest.approx(expected)


@pytest.mark.parametrize(
    "loss, best_loss, expected",
    [
        (9.0, 10.0, True),
        (9.995, 10.0, False),
        (10.0, 10.0, False),
        (5.0, np.inf, True),
    ],
)
def test_loss_improved(loss, best_loss, expected):
    """Test the relative tolerance on validation loss drops."""

    assert loss_improved(loss, best_loss) is expected


class TestTrainConfig:
    """Tests for the TrainConfig class."""

    def test_defaults(self):
        """Test the default recipe."""

        config = TrainConfig()
        assert config.epochs == 16
        assert config.lr_init == 1e-3
        assert config.batch_size == 8
        assert config.early_stop_patience == 3

    def test_from_dict(self):
        """Test whether unknown keys are ignored."""

        config = TrainConfig.from_dict({"epochs": 4, "optimizer": "adam"})
        assert config == TrainConfig(epochs=4)
        assert TrainConfig.from_dict(config.to_dict()) == config

    @pytest.mark.parametrize(
        "kwargs",
        [{"epochs": 0}, {"lr_init": 0}, {"batch_size": 0}, {"early_stop_patience": -1}],
    )
    def test_invalid(self, kwargs):
        """Test whether invalid settings are rejected."""

        with pytest.raises(ValueError):
            TrainConfig(**kwargs)


class TestTrain:
    """Tests for train."""

    def test_report(self, small_utts):
        """Test whether the report has one entry per epoch."""

        _, report = train(*make_run(small_utts, epochs=3, early_stop_patience=0))
        assert report.epochs_run == 3
        assert not report.stopped_early
        for curve in (report.valid_loss, report.valid_cer, report.valid_wer):
            assert len(curve) == 3
        assert report.learning_rate[0] == 0.05
        assert report.learning_rate == sorted(report.learning_rate, reverse=True)

    def test_best_epoch(self, small_utts):
        """Test whether best_epoch points at the first lowest validation CER."""

        _, report = train(*make_run(small_utts, epochs=3, early_stop_patience=0))
        assert report.best_epoch == int(np.argmin(report.valid_cer)) + 1
        assert report.best_cer == min(report.valid_cer)

    def test_deterministic(self, small_utts):
        """Test whether two runs give bit-identical results."""

        first_params, first_report = train(*make_run(small_utts))
        second_params, second_report = train(*make_run(small_utts))
        assert first_report == second_report
        for name in PARAM_NAMES:
            assert (
                getattr(first_params, name).tobytes()
                == getattr(second_params, name).tobytes()
            )

    def test_grapheme_level(self, small_utts):
        """Test whether training runs on grapheme units."""

        params, report = train(*make_run(small_utts, level="grapheme"))
        assert report.epochs_run == 2
        vocab = build_vocab([u.orth for u in small_utts], "grapheme")
        assert params.w_out.shape[1] == len(vocab)

    def test_early_stopping(self, small_utts):
        """Test whether training stops once the CER stalls."""

        _, report = train(
            *make_run(small_utts, epochs=10, lr_init=1e-12, early_stop_patience=2)
        )
        assert report.stopped_early
        assert report.epochs_run == 3
        assert report.best_epoch == 1

    def test_patience_waits_for_loss(self, small_utts, monkeypatch):
        """Test whether a flat CER with a falling loss keeps training going."""

        losses = iter([10.0, 9.0, 8.0, 7.0, 7.0, 7.0, 7.0, 7.0])

        def flat_cer(*_):
            return next(losses), 1.0, 1.0

        monkeypatch.setattr(trainer, "_validate", flat_cer)
        _, report = train(
            *make_run(small_utts, epochs=8, lr_init=1e-12, early_stop_patience=2)
        )
        assert report.valid_loss[:4] == [10.0, 9.0, 8.0, 7.0]
        assert report.epochs_run == 6
        assert report.stopped_early
        assert report.best_epoch == 1

    def test_no_early_stop_on_last_epoch(self, small_utts):
        """Test whether reaching the cap is not reported as an early stop."""

        _, report = train(
            *make_run(small_utts, epochs=3, lr_init=1e-12, early_stop_patience=2)
        )
        assert report.epochs_run == 3
        assert not report.stopped_early

    def test_empty_split(self, small_utts):
        """Test whether an empty validation split is rejected."""

        train_utts, _, vocab, model_config, train_config = make_run(small_utts)
        with pytest.raises(EmptySplit):
            train(train_utts, [], vocab, model_config, train_config)

    def test_vocab_size(self, small_utts):
        """Test whether a model of the wrong output size is rejected."""

        train_utts, valid_utts, vocab, _, train_config = make_run(small_utts)
        model_config = ModelConfig(input_dim=4, vocab_size=len(vocab) + 1)
        with pytest.raises(DimensionMismatch):
            train(train_utts, valid_utts, vocab, model_config, train_config)

    def test_infeasible_label(self, small_utts, tmp_path):
        """Test whether a too-short utterance is reported by id."""

        path = tmp_path / "short.ynf"
        write_features(path, np.zeros((1, 4)))
        short = Utterance("short", small_utts[0].orth, 0.01, feature_path=str(path))

        train_utts, valid_utts, vocab, model_config, train_config = make_run(small_utts)
        with pytest.raises(InfeasibleLabel) as info:
            train(train_utts + [short], valid_utts, vocab, model_config, train_config)
        assert info.value.utterance_id == "short"

    def test_report_save(self, small_utts, tmp_path):
        """Test whether a saved report loads back equal."""

        _, report = train(*make_run(small_utts))
        path = tmp_path / "train_report.json"
        report.save(path)

        with open(path, encoding="utf-8") as report_file:
            assert TrainReport.from_dict(json.load(report_file)) == report
        assert list(report.to_frame().index) == [1, 2]


@pytest.mark.slow
@pytest.mark.parametrize("level", ["phoneme", "grapheme"])
def test_noise_free_corpus_is_learned(level, tmp_path):
    """Test whether a noise-free corpus is transcribed perfectly within 16 epochs."""

    config = SynthConfig(
        seed=1, words=10, utterances=240, dim=16, noise=0.0, max_words=3
    )
    utts = generate_synthetic(config, tmp_path / "synth").utterances
    vocab = build_vocab([u.orth for u in utts], level)
    model_config = ModelConfig(input_dim=16, vocab_size=len(vocab), context=2)
    train_config = TrainConfig(
        epochs=16, lr_init=0.02, batch_size=1, early_stop_patience=0
    )

    _, report = train(utts[:192], utts[192:], vocab, model_config, train_config)
    assert report.best_cer == 0.0
    assert report.train_loss[-1] < report.train_loss[0]
