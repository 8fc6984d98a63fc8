"""Module for unit testing the acoustic model and its checkpoints."""

import json

import numpy as np
import pytest

from ynkit.ctc import ctc_loss
from ynkit.errors import (
    ChecksumMismatch,
    DimensionMismatch,
    VersionUnsupported,
    VocabFingerprintMismatch,
)
from ynkit.features import FeatureMatrix
from ynkit.model import (
    PARAM_NAMES,
    ModelConfig,
    backward,
    context_window,
    forward,
    init_params,
    load_checkpoint,
    save_checkpoint,
)
from ynkit.vocabulary import build_vocab

VOCAB = build_vocab(["mana"], "grapheme")
CONFIG = ModelConfig(
    input_dim=2, vocab_size=len(VOCAB), context=1, hidden_dim=3, seed=4
)


@pytest.fixture(name="params")
def fixture_params():
    """Seeded parameters with non-zero biases."""

    params = init_params(CONFIG)
    rng = np.random.default_rng(5)
    params.b_hidden = rng.normal(scale=0.1, size=params.b_hidden.shape)
    params.b_out = rng.normal(scale=0.1, size=params.b_out.shape)
    return params


@pytest.fixture(name="frames")
def fixture_frames():
    """Five random frames."""

    return np.random.default_rng(6).normal(size=(5, CONFIG.input_dim))


class TestModelConfig:
    """Tests for the ModelConfig class."""

    def test_window_dim(self):
        """Test the width of the stacked window."""

        assert CONFIG.window_dim == 6
        assert ModelConfig(input_dim=16, vocab_size=30).window_dim == 80

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"input_dim": 0, "vocab_size": 5},
            {"input_dim": 2, "vocab_size": 1},
            {"input_dim": 2, "vocab_size": 5, "context": -1},
            {"input_dim": 2, "vocab_size": 5, "hidden_dim": 0},
        ],
    )
    def test_invalid(self, kwargs):
        """Test whether invalid shapes are rejected."""

        with pytest.raises(ValueError):
            ModelConfig(**kwargs)


class TestForward:
    """Tests for init_params, context_window and forward."""

    def test_init(self):
        """Test whether weights lie within the fan-in bound and biases are zero."""

        params = init_params(CONFIG)
        assert np.abs(params.w_hidden).max() <= 1 / np.sqrt(CONFIG.window_dim)
        assert np.abs(params.w_out).max() <= 1 / np.sqrt(CONFIG.hidden_dim)
        assert not params.b_hidden.any()
        assert not params.b_out.any()
        params.check(CONFIG)

    def test_init_seeded(self):
        """Test whether the same seed gives the same parameters."""

        first, second = init_params(CONFIG), init_params(CONFIG)
        for name in PARAM_NAMES:
            np.testing.assert_array_equal(getattr(first, name), getattr(second, name))

    def test_context_window(self):
        """Test stacking with zero padding at the edges."""

        frames = np.array([[1.0], [2.0], [3.0]])
        window = context_window(frames, 1)
        np.testing.assert_array_equal(window, [[0, 1, 2], [1, 2, 3], [2, 3, 0]])

    def test_zero_params(self, frames):
        """Test whether zero parameters give zero logits."""

        params = init_params(CONFIG)
        for name in PARAM_NAMES:
            getattr(params, name)[...] = 0.0
        assert not forward(params, frames).any()

    def test_single_frame(self, params):
        """Test the logit shape of a one-frame input."""

        assert forward(params, np.ones((1, 2))).shape == (1, CONFIG.vocab_size)

    def test_feature_matrix(self, params, frames):
        """Test whether a FeatureMatrix gives the same logits as its frames."""

        matrix = FeatureMatrix(frames)
        np.testing.assert_array_equal(
            forward(params, matrix), forward(params, matrix.frames)
        )

    def test_recomputed(self, params, frames):
        """Test forward against a frame-by-frame recomputation."""

        padded = np.vstack([np.zeros((1, 2)), frames, np.zeros((1, 2))])
        expected = []
        for t in range(len(frames)):
            window = padded[t : t + 3].ravel()
            hidden = np.tanh(window @ params.w_hidden + params.b_hidden)
            expected.append(hidden @ params.w_out + params.b_out)
        np.testing.assert_allclose(
            forward(params, frames), expected, rtol=0, atol=1e-12
        )

    def test_wrong_dimension(self, params):
        """Test whether features of the wrong width are rejected."""

        with pytest.raises(DimensionMismatch):
            forward(params, np.ones((4, 5)))


class TestBackward:
    """Tests for backward."""

    def test_loss(self, params, frames):
        """Test whether the loss is the CTC loss of the logits."""

        loss, _ = backward(params, frames, [4, 5])
        assert loss == ctc_loss(forward(params, frames), [4, 5]).loss

    def test_gradient(self, params, frames):
        """Test parameter gradients against central differences."""

        label = [4, 5, 4]
        _, grads = backward(params, frames, label)
        step = 1e-5
        for name in PARAM_NAMES:
            values = getattr(params, name)
            numeric = np.zeros_like(values)
            for index in np.ndindex(values.shape):
                original = values[index]
                values[index] = original + step
                upper = ctc_loss(forward(params, frames), label).loss
                values[index] = original - step
                lower = ctc_loss(forward(params, frames), label).loss
                values[index] = original
                numeric[index] = (upper - lower) / (2 * step)

            scale = np.maximum(1.0, np.abs(numeric))
            error = np.abs(getattr(grads, name) - numeric) / scale
            assert error.max() < 1e-4, name


class TestCheckpoint:
    """Tests for save_checkpoint and load_checkpoint."""

    def test_round_trip(self, params, tmp_path):
        """Test whether parameters load back bit-identical."""

        path = tmp_path / "model.json"
        save_checkpoint(params, CONFIG, VOCAB, path)
        loaded, config = load_checkpoint(path, VOCAB)

        assert config == CONFIG
        for name in PARAM_NAMES:
            assert getattr(loaded, name).tobytes() == getattr(params, name).tobytes()

    def test_without_vocab(self, params, tmp_path):
        """Test whether the vocabulary check is optional."""

        path = tmp_path / "model.json"
        save_checkpoint(params, CONFIG, VOCAB, path)
        assert load_checkpoint(path)[1] == CONFIG

    def test_wrong_vocab(self, params, tmp_path):
        """Test whether another vocabulary is rejected."""

        path = tmp_path / "model.json"
        save_checkpoint(params, CONFIG, VOCAB, path)
        other = build_vocab(["mani"], "grapheme")
        with pytest.raises(VocabFingerprintMismatch) as info:
            load_checkpoint(path, other)
        assert info.value.expected == VOCAB.fingerprint
        assert info.value.found == other.fingerprint

    def test_tampered(self, params, tmp_path):
        """Test whether an edited value fails the checksum."""

        path = tmp_path / "model.json"
        save_checkpoint(params, CONFIG, VOCAB, path)
        document = json.loads(path.read_text(encoding="utf-8"))
        document["payload"]["params"]["b_out"]["values"][0] = "1.5"
        path.write_text(json.dumps(document), encoding="utf-8")

        with pytest.raises(ChecksumMismatch):
            load_checkpoint(path, VOCAB)

    def test_not_json(self, tmp_path):
        """Test whether a corrupt file fails the checksum."""

        path = tmp_path / "model.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ChecksumMismatch):
            load_checkpoint(path)

    def test_version(self, params, tmp_path):
        """Test whether an unknown version is rejected."""

        path = tmp_path / "model.json"
        save_checkpoint(params, CONFIG, VOCAB, path)
        document = json.loads(path.read_text(encoding="utf-8"))
        document["payload"]["version"] = 7
        path.write_text(json.dumps(document), encoding="utf-8")

        with pytest.raises(VersionUnsupported):
            load_checkpoint(path)
