"""
Module for transcript manifests: cleaning, exclusions, splits and subsets.

A manifest is a JSON-lines file with one utterance per line::

    {"id": "utt00001", "orth": "mana gurrku", "duration_s": 1.53,
     "feature_path": "feats/utt00001.ynf", "speaker": "spk0"}

Relative feature paths are resolved against the manifest directory.
"""

import json
import logging
import math
import os
import unicodedata
from dataclasses import asdict, dataclass, replace
from typing import List, Optional

import numpy as np
import pandas as pd

from ynkit.errors import ManifestParseError, MissingFeatureFile, TooFewUtterances
from ynkit.features import read_features

EXCLUDE_REASONS = ("incomplete", "contains_english", "empty")
SEPARATOR = "."

# Typographic apostrophes denote the same glottal stop
_APOSTROPHES = {"’": "'", "‘": "'", "ʼ": "'"}

_log = logging.getLogger(__name__)


# pylint: disable=too-many-instance-attributes
@dataclass
class Utterance:
    """One transcribed audio segment."""

    id: str
    orth: str
    duration_s: float
    feature_path: str = ""
    speaker: Optional[str] = None
    exclude: bool = False
    exclude_reason: Optional[str] = None

    def __post_init__(self):
        if not self.duration_s > 0:
            raise ValueError(
                f"Utterance '{self.id}' needs a positive duration, "
                f"got {self.duration_s}."
            )
        reason = self.exclude_reason
        if reason is not None and reason not in EXCLUDE_REASONS:
            raise ValueError(
                f"Unknown exclude reason for '{self.id}': {self.exclude_reason}."
            )

    def to_dict(self, base_dir=None):
        """Returns the manifest record, optional fields only when set."""

        record = {
            "id": self.id,
            "orth": self.orth,
            "duration_s": self.duration_s,
            "feature_path": self.feature_path,
        }
        if base_dir and self.feature_path and os.path.isabs(self.feature_path):
            record["feature_path"] = os.path.relpath(self.feature_path, base_dir)
        if self.speaker is not None:
            record["speaker"] = self.speaker
        if self.exclude:
            record["exclude"] = True
        if self.exclude_reason is not None:
            record["exclude_reason"] = self.exclude_reason
        return record

    def load_features(self):
        """
        Reads the feature file of the utterance.

        Raises
        ------
        MissingFeatureFile
            When the file does not exist.
        """

        if not self.feature_path or not os.path.exists(self.feature_path):
            raise MissingFeatureFile(self.id, self.feature_path)
        return read_features(self.feature_path)


@dataclass
class SplitManifest:
    """Disjoint train / validation id lists."""

    train_ids: List[str]
    valid_ids: List[str]
    seed: int
    train_frac: float = 0.8

    def __post_init__(self):
        overlap = set(self.train_ids) & set(self.valid_ids)
        if overlap:
            raise ValueError(f"Train and validation overlap: {sorted(overlap)}.")

    def select(self, utts, part):
        """Returns the utterances of one part ("train" or "valid"), in split order."""

        ids = self.train_ids if part == "train" else self.valid_ids
        by_id = {utt.id: utt for utt in utts}
        missing = [i for i in ids if i not in by_id]
        if missing:
            raise KeyError(f"Split refers to unknown utterances: {missing[:5]}.")
        return [by_id[i] for i in ids]

    def save(self, path):
        """Saves the split as JSON."""

        with open(path, "w", encoding="utf-8") as split_file:
            json.dump(asdict(self), split_file, indent=2)
            split_file.write("\n")

    @classmethod
    def load(cls, path):
        """Loads a split from JSON."""

        with open(path, encoding="utf-8") as split_file:
            return cls(**json.load(split_file))


def _letter_like(char):
    """Letters, combining marks and the apostrophe (glottal stop)."""

    return bool(char) and (char.isalpha() or char == "'" or unicodedata.combining(char))


def clean_text(raw):
    """
    Cleans a raw transcript.

    Removes punctuation, digits and symbols except the apostrophe (a glottal
    stop) and a word-internal separator ".", lowercases, collapses whitespace
    and trims the ends. The function is total and idempotent.

    Parameters
    ----------
    raw : str
        Any Unicode string.

    Returns
    -------
    str
        The cleaned transcript, NFC-normalized.
    """

    text = unicodedata.normalize("NFC", raw)
    text = "".join(_APOSTROPHES.get(char, char) for char in text).lower()

    kept = []
    for char in text:
        if char.isspace():
            kept.append(" ")
        elif _letter_like(char) or char == SEPARATOR:
            kept.append(char)

    # Separators survive only between two letters
    cleaned = []
    for index, char in enumerate(kept):
        if char == SEPARATOR:
            previous = cleaned[-1] if cleaned else ""
            following = kept[index + 1] if index + 1 < len(kept) else ""
            if not (_letter_like(previous) and _letter_like(following)):
                continue
        cleaned.append(char)

    return unicodedata.normalize("NFC", " ".join("".join(cleaned).split()))


def load_manifest(path):
    """
    Loads all utterances of a JSON-lines manifest, excluded ones included.

    Parameters
    ----------
    path : str
        Manifest file.

    Returns
    -------
    list
        List of Utterance objects.
    """

    base_dir = os.path.dirname(os.path.abspath(path))
    utts = []
    with open(path, encoding="utf-8") as manifest_file:
        for line_no, line in enumerate(manifest_file, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                utt = Utterance(**record)
            except (json.JSONDecodeError, TypeError, ValueError) as error:
                raise ManifestParseError(line_no, str(error)) from error

            if utt.feature_path and not os.path.isabs(utt.feature_path):
                utt.feature_path = os.path.join(base_dir, utt.feature_path)
            utts.append(utt)

    _log.debug("Loaded %d utterances from %s", len(utts), path)
    return utts


def write_manifest(utts, path):
    """Writes utterances as JSON lines, feature paths relative to the manifest."""

    base_dir = os.path.dirname(os.path.abspath(path))
    with open(path, "w", encoding="utf-8", newline="\n") as manifest_file:
        for utt in utts:
            manifest_file.write(json.dumps(utt.to_dict(base_dir), ensure_ascii=False))
            manifest_file.write("\n")


def apply_exclusions(utts):
    """
    Drops excluded utterances and cleans the transcripts of the rest.

    Utterances whose cleaned transcript is empty are excluded with reason
    "empty".

    Parameters
    ----------
    utts : Iterable[Utterance]
        Utterances as loaded from a manifest.

    Returns
    -------
    list
        Usable utterances with cleaned transcripts.
    """

    kept = []
    for utt in utts:
        if utt.exclude:
            _log.debug("Excluded %s [%s]", utt.id, utt.exclude_reason)
            continue

        orth = clean_text(utt.orth)
        if not orth:
            _log.debug("Excluded %s [empty]", utt.id)
            continue
        kept.append(replace(utt, orth=orth))

    _log.info(
        "Kept %d utterances (%.2f minutes).", len(kept), total_minutes(kept)
    )
    return kept


def total_minutes(utts):
    """Total duration of the utterances in minutes."""

    return math.fsum(utt.duration_s for utt in utts) / 60


def corpus_stats(utts):
    """
    Summarizes a list of utterances.

    Returns
    -------
    dict
        Kept utterance count and minutes, plus excluded counts per reason
        (utterances with an empty transcript count as "empty").
    """

    df = pd.DataFrame(
        {
            "duration_s": [utt.duration_s for utt in utts],
            "reason": [
                (utt.exclude_reason or "unspecified")
                if utt.exclude
                else (None if clean_text(utt.orth) else "empty")
                for utt in utts
            ],
        }
    )

    kept = df[df["reason"].isna()]
    excluded = df["reason"].dropna().value_counts().sort_index()
    return {
        "utterances": int(len(kept)),
        "minutes": float(math.fsum(kept["duration_s"]) / 60),
        "excluded": {reason: int(count) for reason, count in excluded.items()},
    }


def _shuffled(utts, seed):
    """Returns utterances in a seeded order that does not depend on input order."""

    ordered = sorted(utts, key=lambda utt: utt.id)
    order = np.random.default_rng(seed).permutation(len(ordered))
    return [ordered[i] for i in order]


def split(utts, seed, train_frac=0.8):
    """
    Splits utterances into train and validation parts.

    Parameters
    ----------
    utts : Iterable[Utterance]
        Utterances; excluded ones are ignored.
    seed : int
        Shuffle seed.
    train_frac : Optional[float]
        Fraction of utterances for training (floored), defaults to 0.8.

    Returns
    -------
    SplitManifest
        Deterministic for a given seed and utterance set.
    """

    usable = [utt for utt in utts if not utt.exclude]
    if len(usable) < 2:
        raise TooFewUtterances(len(usable))
    if not 0 < train_frac < 1:
        raise ValueError(f"train_frac must be between 0 and 1, got {train_frac}.")

    shuffled = _shuffled(usable, seed)
    n_train = min(
        max(int(math.floor(train_frac * len(shuffled))), 1), len(shuffled) - 1
    )
    return SplitManifest(
        train_ids=[utt.id for utt in shuffled[:n_train]],
        valid_ids=[utt.id for utt in shuffled[n_train:]],
        seed=seed,
        train_frac=train_frac,
    )


def subset_by_minutes(utts, minutes, seed):
    """
    Takes a duration-limited subset.

    Utterances are shuffled once by seed and taken greedily until the
    cumulative duration reaches the request, so subsets of growing size are
    nested.

    Parameters
    ----------
    utts : Iterable[Utterance]
        Utterances to draw from.
    minutes : float
        Requested amount of speech.
    seed : int
        Shuffle seed.

    Returns
    -------
    list
        The subset; the whole corpus (with a warning) when it is too short.
    """

    if not minutes > 0:
        raise ValueError(f"Requested minutes must be positive, got {minutes}.")

    target = minutes * 60
    subset, taken = [], 0.0
    for utt in _shuffled(list(utts), seed):
        if taken >= target:
            break
        subset.append(utt)
        taken += utt.duration_s

    if taken < target:
        _log.warning(
            "Corpus exhausted: requested %.2f minutes, got %.2f.", minutes, taken / 60
        )
    else:
        _log.debug("Subset of %.2f minutes for request %.2f.", taken / 60, minutes)
    return subset
