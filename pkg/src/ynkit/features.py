"""
Module for reading and writing YNF1 feature files.

Layout (little-endian): magic ``b"YNF1"``, u32 frame count T, u32 dimension D,
then T * D float32 values in row-major order.
"""

import struct
from dataclasses import dataclass

import numpy as np

from ynkit.errors import FeatureFormatError

MAGIC = b"YNF1"
FRAME_SHIFT_MS = 10
_HEADER = struct.Struct("<4sII")
_DTYPE = np.dtype("<f4")


@dataclass
class FeatureMatrix:
    """T x D acoustic feature frames at a fixed 10 ms shift."""

    frames: np.ndarray
    frame_shift_ms: int = FRAME_SHIFT_MS

    def __post_init__(self):
        self.frames = np.ascontiguousarray(self.frames, dtype=_DTYPE)
        if self.frames.ndim != 2 or min(self.frames.shape) < 1:
            raise FeatureFormatError(
                f"Features must be a non-empty T x D matrix, got {self.frames.shape}."
            )
        if not np.all(np.isfinite(self.frames)):
            raise FeatureFormatError("Features contain non-finite values.")

    @property
    def num_frames(self):
        """Number of frames T."""

        return self.frames.shape[0]

    @property
    def dim(self):
        """Feature dimension D."""

        return self.frames.shape[1]

    @property
    def duration_s(self):
        """Duration covered by the frames, in seconds."""

        return self.num_frames * self.frame_shift_ms / 1000


def write_features(path, features):
    """
    Writes a feature matrix to a YNF1 file.

    Parameters
    ----------
    path : str
        Destination file.
    features : Union[FeatureMatrix, numpy.ndarray]
        Frames to write.
    """

    if not isinstance(features, FeatureMatrix):
        features = FeatureMatrix(features)

    with open(path, "wb") as feature_file:
        feature_file.write(_HEADER.pack(MAGIC, features.num_frames, features.dim))
        feature_file.write(features.frames.tobytes(order="C"))


def read_features(path):
    """
    Reads a YNF1 file.

    Parameters
    ----------
    path : str
        File to read.

    Returns
    -------
    FeatureMatrix
        The stored frames, bit-identical to what was written.
    """

    with open(path, "rb") as feature_file:
        data = feature_file.read()

    if len(data) < _HEADER.size:
        raise FeatureFormatError(f"{path}: file too short for a YNF1 header.")

    magic, frames, dim = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FeatureFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}.")

    expected = _HEADER.size + frames * dim * _DTYPE.itemsize
    if len(data) != expected:
        raise FeatureFormatError(
            f"{path}: expected {expected} bytes for {frames} x {dim}, got {len(data)}."
        )

    values = np.frombuffer(data, dtype=_DTYPE, count=frames * dim, offset=_HEADER.size)
    return FeatureMatrix(values.reshape(frames, dim).copy())
