"""
Module containing the acoustic model: a small frame classifier.

Each frame is stacked with ``context`` neighbours on both sides (zero padded
at the edges), passed through one tanh hidden layer and a linear output layer
that gives one logit per vocabulary token.
"""

import hashlib
import json
import logging
from dataclasses import asdict, dataclass

import numpy as np

from ynkit.ctc import ctc_loss
from ynkit.errors import (
    ChecksumMismatch,
    DimensionMismatch,
    VersionUnsupported,
    VocabFingerprintMismatch,
)

CHECKPOINT_VERSION = 1
PARAM_NAMES = ("w_hidden", "b_hidden", "w_out", "b_out")

_log = logging.getLogger(__name__)


@dataclass
class ModelConfig:
    """Shape of the acoustic model."""

    input_dim: int
    vocab_size: int
    context: int = 2
    hidden_dim: int = 64
    seed: int = 0

    def __post_init__(self):
        if min(self.input_dim, self.hidden_dim) < 1 or self.context < 0:
            raise ValueError(
                "input_dim and hidden_dim must be at least 1 and context non-negative."
            )
        if self.vocab_size < 2:
            raise ValueError(f"vocab_size must be at least 2, got {self.vocab_size}.")

    @property
    def window_dim(self):
        """Width of a stacked context window."""

        return (2 * self.context + 1) * self.input_dim


@dataclass
class ModelParams:
    """Weights and biases of the two layers."""

    w_hidden: np.ndarray
    b_hidden: np.ndarray
    w_out: np.ndarray
    b_out: np.ndarray

    def arrays(self):
        """Returns the parameters as an ordered dict of arrays."""

        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self):
        """Returns a deep copy."""

        return ModelParams(**{name: arr.copy() for name, arr in self.arrays().items()})

    def add_scaled(self, other, scale):
        """Returns ``self + scale * other``."""

        arrays = self.arrays()
        return ModelParams(
            **{name: arr + scale * getattr(other, name) for name, arr in arrays.items()}
        )

    def check(self, config):
        """Checks shapes against a config and that all values are finite."""

        expected = {
            "w_hidden": (config.window_dim, config.hidden_dim),
            "b_hidden": (config.hidden_dim,),
            "w_out": (config.hidden_dim, config.vocab_size),
            "b_out": (config.vocab_size,),
        }
        for name, arr in self.arrays().items():
            if arr.shape != expected[name]:
                raise DimensionMismatch(
                    f"Parameter {name} has shape {arr.shape}, "
                    f"expected {expected[name]}."
                )
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"Parameter {name} contains non-finite values.")


def init_params(config):
    """
    Seeded initialization.

    Weights are uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases zero.
    """

    rng = np.random.default_rng(config.seed)
    bound_hidden = 1 / np.sqrt(config.window_dim)
    bound_out = 1 / np.sqrt(config.hidden_dim)
    return ModelParams(
        w_hidden=rng.uniform(
            -bound_hidden, bound_hidden, (config.window_dim, config.hidden_dim)
        ),
        b_hidden=np.zeros(config.hidden_dim),
        w_out=rng.uniform(
            -bound_out, bound_out, (config.hidden_dim, config.vocab_size)
        ),
        b_out=np.zeros(config.vocab_size),
    )


def context_window(frames, context):
    """Stacks each frame with its neighbours; T x D -> T x (2c + 1)D."""

    frames = np.asarray(frames, dtype=np.float64)
    num_frames = frames.shape[0]
    padded = np.pad(frames, ((context, context), (0, 0)))
    return np.concatenate(
        [padded[offset : offset + num_frames] for offset in range(2 * context + 1)],
        axis=1,
    )


def _activations(params, features):
    """Returns the stacked input, the hidden activations and the logits."""

    frames = np.asarray(getattr(features, "frames", features), dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] < 1:
        raise DimensionMismatch(f"Features must be a T x D matrix, got {frames.shape}.")

    context = (params.w_hidden.shape[0] // frames.shape[1] - 1) // 2
    if (2 * context + 1) * frames.shape[1] != params.w_hidden.shape[0]:
        raise DimensionMismatch(
            f"Feature dimension {frames.shape[1]} does not fit input layer of width "
            f"{params.w_hidden.shape[0]}."
        )

    window = context_window(frames, context)
    hidden = np.tanh(window @ params.w_hidden + params.b_hidden)
    logits = hidden @ params.w_out + params.b_out
    return window, hidden, logits


def forward(params, features):
    """
    Computes per-frame logits.

    Parameters
    ----------
    params : ModelParams
        Model parameters.
    features : Union[FeatureMatrix, numpy.ndarray]
        T x D feature frames.

    Returns
    -------
    numpy.ndarray
        T x V logits.
    """

    return _activations(params, features)[2]


def backward(params, features, label):
    """
    CTC loss of a label and its gradient w.r.t. every parameter.

    Returns
    -------
    Tuple[float, ModelParams]
        The loss (equal to ``ctc_loss(forward(...), label).loss``) and the
        gradients.
    """

    window, hidden, logits = _activations(params, features)
    result = ctc_loss(logits, label)

    grad_logits = result.grad
    grad_hidden = (grad_logits @ params.w_out.T) * (1 - hidden ** 2)
    grads = ModelParams(
        w_hidden=window.T @ grad_hidden,
        b_hidden=grad_hidden.sum(axis=0),
        w_out=hidden.T @ grad_logits,
        b_out=grad_logits.sum(axis=0),
    )
    return result.loss, grads


def _canonical(payload):
    """Canonical JSON bytes used for the checksum."""

    return json.dumps(
        payload, sort_keys=True, ensure_ascii=False, separators=(",", ":")
    ).encode("utf-8")


def save_checkpoint(params, config, vocab, path):
    """
    Saves parameters as versioned, checksummed JSON.

    Floats are stored as shortest round-trip decimal strings so loading
    gives back bit-identical arrays.

    Parameters
    ----------
    params : ModelParams
        Parameters to save.
    config : ModelConfig
        Model shape.
    vocab : TokenVocabulary
        Vocabulary the model was trained with; only its fingerprint is stored.
    path : str
        Destination file.
    """

    payload = {
        "version": CHECKPOINT_VERSION,
        "config": asdict(config),
        "vocab_level": vocab.level,
        "vocab_fingerprint": vocab.fingerprint,
        "params": {
            name: {
                "shape": list(arr.shape),
                "values": [repr(float(value)) for value in arr.ravel()],
            }
            for name, arr in params.arrays().items()
        },
    }
    document = {
        "checksum": hashlib.sha256(_canonical(payload)).hexdigest(),
        "payload": payload,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as checkpoint_file:
        json.dump(document, checkpoint_file, sort_keys=True)
        checkpoint_file.write("\n")
    _log.debug("Saved checkpoint to %s", path)


def load_checkpoint(path, vocab=None):
    """
    Loads a checkpoint.

    Parameters
    ----------
    path : str
        Checkpoint file.
    vocab : Optional[TokenVocabulary]
        When given, its fingerprint must match the checkpoint.

    Returns
    -------
    Tuple[ModelParams, ModelConfig]
        The parameters and the model config.
    """

    with open(path, encoding="utf-8") as checkpoint_file:
        try:
            document = json.load(checkpoint_file)
        except json.JSONDecodeError as error:
            raise ChecksumMismatch(
                f"{path}: not a valid checkpoint ({error})."
            ) from error

    payload = document.get("payload", {})
    if payload.get("version") != CHECKPOINT_VERSION:
        raise VersionUnsupported(payload.get("version"))
    if hashlib.sha256(_canonical(payload)).hexdigest() != document.get("checksum"):
        raise ChecksumMismatch(f"{path}: checksum does not match the payload.")

    if vocab is not None and vocab.fingerprint != payload["vocab_fingerprint"]:
        raise VocabFingerprintMismatch(payload["vocab_fingerprint"], vocab.fingerprint)

    config = ModelConfig(**payload["config"])
    params = ModelParams(
        **{
            name: np.array(
                [float(value) for value in entry["values"]], dtype=np.float64
            ).reshape(entry["shape"])
            for name, entry in payload["params"].items()
        }
    )
    params.check(config)
    return params, config
