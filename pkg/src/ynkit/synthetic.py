"""
Module for generating a seeded synthetic corpus.

The corpus stands in for field recordings: a lexicon of CV/CVC words over the
phoneme inventory, one unit-norm prototype vector per phoneme (plus silence),
and utterances whose frames are noisy copies of the prototypes of their
phonemes. Everything is drawn from one ``numpy.random.default_rng(seed)``.
"""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, List

import numpy as np

from ynkit.corpus import Utterance, write_manifest
from ynkit.features import FRAME_SHIFT_MS, write_features
from ynkit.phonology import WORD_BOUNDARY, default_inventory, ipa_to_orth, to_ipa_string

SILENCE = "<sil>"
MANIFEST_NAME = "manifest.jsonl"

_log = logging.getLogger(__name__)


# pylint: disable=too-many-instance-attributes
@dataclass
class SynthConfig:
    """Settings of the synthetic corpus generator."""

    seed: int = 1
    words: int = 200
    utterances: int = 600
    dim: int = 16
    noise: float = 0.3
    digraph_fraction: float = 0.25
    min_words: int = 1
    max_words: int = 6
    min_syllables: int = 2
    max_syllables: int = 4
    min_phoneme_frames: int = 3
    max_phoneme_frames: int = 8
    min_boundary_frames: int = 2
    max_boundary_frames: int = 4
    speakers: int = 5

    def __post_init__(self):
        if self.words < 1 or self.utterances < 1:
            raise ValueError("Need at least one word and one utterance.")
        if self.dim < 2:
            raise ValueError(f"Feature dimension must be at least 2, got {self.dim}.")
        if self.noise < 0:
            raise ValueError(f"Noise must be non-negative, got {self.noise}.")
        if not 0 <= self.digraph_fraction <= 1:
            raise ValueError(
                f"digraph_fraction must be within 0-1, got {self.digraph_fraction}."
            )
        for low, high in (
            ("min_words", "max_words"),
            ("min_syllables", "max_syllables"),
            ("min_phoneme_frames", "max_phoneme_frames"),
            ("min_boundary_frames", "max_boundary_frames"),
        ):
            if not 1 <= getattr(self, low) <= getattr(self, high):
                raise ValueError(f"Need 1 <= {low} <= {high}.")

    def to_dict(self):
        """Returns the config as a dict."""

        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        """Builds a config from a dict, ignoring unknown keys."""

        fields = cls.__dataclass_fields__
        known = {key: value for key, value in data.items() if key in fields}
        return cls(**known)


@dataclass
class SyntheticCorpus:
    """In-memory view of a generated corpus."""

    config: SynthConfig
    utterances: List[Utterance]
    lexicon: List[tuple]
    units: List[str]
    prototypes: np.ndarray
    frame_labels: Dict[str, np.ndarray] = field(default_factory=dict)
    manifest_path: str = ""


def _random_word(rng, inv, config, force_digraph):
    """Draws one word as a tuple of phonemes."""

    consonants, vowels, digraphs = inv.consonants, inv.vowels, inv.digraphs

    word, consonant_slots = [], []
    for _ in range(rng.integers(config.min_syllables, config.max_syllables + 1)):
        closed = rng.random() < 0.5
        consonant_slots.append(len(word))
        word.append(consonants[rng.integers(len(consonants))])
        word.append(vowels[rng.integers(len(vowels))])
        if closed:
            consonant_slots.append(len(word))
            word.append(consonants[rng.integers(len(consonants))])

    if force_digraph and digraphs:
        slot = consonant_slots[rng.integers(len(consonant_slots))]
        word[slot] = digraphs[rng.integers(len(digraphs))]
    return tuple(word)


def build_lexicon(config, rng, inv=None):
    """
    Builds a lexicon of distinct words.

    At least ``digraph_fraction`` of the words contain a phoneme spelled with
    a digraph. Words whose spelling would need a separator are redrawn, so
    every transcript scans back to the same phonemes. So are words with the
    same phoneme twice in a row, whose frames could not be told apart.

    Returns
    -------
    list
        Words as tuples of phonemes, in seeded order.
    """

    inv = inv or default_inventory()
    forced = math.ceil(config.digraph_fraction * config.words)

    words, seen, attempts = [], set(), 0
    while len(words) < config.words:
        attempts += 1
        if attempts > config.words * 1000:
            raise RuntimeError(f"Could not draw {config.words} distinct words.")

        word = _random_word(rng, inv, config, force_digraph=len(words) < forced)
        orth = ipa_to_orth(word, inv)
        repeated = any(a == b for a, b in zip(word, word[1:]))
        if repeated or inv.separator in orth or orth in seen:
            continue
        seen.add(orth)
        words.append(word)

    return [words[i] for i in rng.permutation(len(words))]


def make_prototypes(num_units, dim, rng):
    """Draws one unit-norm prototype vector per unit."""

    prototypes = rng.standard_normal((num_units, dim))
    return prototypes / np.linalg.norm(prototypes, axis=1, keepdims=True)


def nearest_prototype(frames, prototypes):
    """
    Labels every frame with the index of the closest prototype.

    On a noise-free corpus this recovers the frame labels exactly.

    Parameters
    ----------
    frames : numpy.ndarray
        Frames of shape ``(T, dim)``.
    prototypes : numpy.ndarray
        Prototypes of shape ``(units, dim)``.

    Returns
    -------
    numpy.ndarray
        Unit indices of shape ``(T,)``.
    """

    distances = np.linalg.norm(frames[:, None, :] - prototypes[None, :, :], axis=2)
    return np.argmin(distances, axis=1)


def _render(words, unit_index, config, rng):
    """Lays out frame labels for one utterance."""

    labels = []
    for position, word in enumerate(words):
        if position:
            frames = rng.integers(
                config.min_boundary_frames, config.max_boundary_frames + 1
            )
            labels.extend([unit_index[SILENCE]] * frames)
        for phoneme in word:
            frames = rng.integers(
                config.min_phoneme_frames, config.max_phoneme_frames + 1
            )
            labels.extend([unit_index[phoneme.ipa]] * frames)
    return np.asarray(labels, dtype=np.int64)


def generate_synthetic(config, out_dir, inv=None):
    """
    Generates a synthetic corpus on disk.

    Writes ``manifest.jsonl``, one YNF1 file per utterance under ``feats/``,
    ``lexicon.tsv``, ``prototypes.ynf`` and ``synth_config.json`` to out_dir.

    Parameters
    ----------
    config : SynthConfig
        Generator settings.
    out_dir : str
        Output directory, created when missing.
    inv : Optional[PhonemeInventory]
        Inventory to draw phonemes from.

    Returns
    -------
    SyntheticCorpus
        The generated corpus, with frame labels for oracle checks.
    """

    inv = inv or default_inventory()
    rng = np.random.default_rng(config.seed)
    feats_dir = os.path.join(out_dir, "feats")
    os.makedirs(feats_dir, exist_ok=True)

    lexicon = build_lexicon(config, rng, inv)
    units = [p.ipa for p in inv] + [SILENCE]
    unit_index = {unit: index for index, unit in enumerate(units)}
    prototypes = make_prototypes(len(units), config.dim, rng)

    utts, frame_labels = [], {}
    for number in range(config.utterances):
        count = rng.integers(config.min_words, config.max_words + 1)
        words = [lexicon[i] for i in rng.integers(len(lexicon), size=count)]

        labels = _render(words, unit_index, config, rng)
        frames = prototypes[labels]
        if config.noise > 0:
            frames = frames + config.noise * rng.standard_normal(frames.shape)

        phonemes = []
        for word in words:
            if phonemes:
                phonemes.append(WORD_BOUNDARY)
            phonemes.extend(word)

        utt_id = f"utt{number:05d}"
        relative = os.path.join("feats", f"{utt_id}.ynf")
        write_features(os.path.join(out_dir, relative), frames)

        utts.append(
            Utterance(
                id=utt_id,
                orth=ipa_to_orth(phonemes, inv),
                duration_s=len(labels) * FRAME_SHIFT_MS / 1000,
                feature_path=os.path.join(os.path.abspath(out_dir), relative),
                speaker=f"spk{number % config.speakers}",
            )
        )
        frame_labels[utt_id] = labels

    manifest_path = os.path.join(out_dir, MANIFEST_NAME)
    write_manifest(utts, manifest_path)
    write_features(os.path.join(out_dir, "prototypes.ynf"), prototypes)

    lexicon_path = os.path.join(out_dir, "lexicon.tsv")
    with open(lexicon_path, "w", encoding="utf-8", newline="\n") as lex_file:
        for word in sorted(lexicon, key=lambda w: ipa_to_orth(w, inv)):
            lex_file.write(f"{ipa_to_orth(word, inv)}\t{to_ipa_string(word)}\n")

    config_path = os.path.join(out_dir, "synth_config.json")
    with open(config_path, "w", encoding="utf-8") as config_file:
        json.dump(config.to_dict(), config_file, indent=2, sort_keys=True)
        config_file.write("\n")

    _log.info(
        "Generated %d utterances (%.2f minutes) over %d words in %s",
        len(utts),
        sum(utt.duration_s for utt in utts) / 60,
        len(lexicon),
        out_dir,
    )
    return SyntheticCorpus(
        config=config,
        utterances=utts,
        lexicon=lexicon,
        units=units,
        prototypes=prototypes,
        frame_labels=frame_labels,
        manifest_path=manifest_path,
    )
