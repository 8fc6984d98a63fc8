"""Module for unit testing the synthetic corpus generator."""

import os

import numpy as np
import pytest

from ynkit.corpus import load_manifest
from ynkit.features import read_features
from ynkit.phonology import WORD_BOUNDARY, default_inventory, ipa_to_orth, orth_to_ipa
from ynkit.synthetic import (
    MANIFEST_NAME,
    SynthConfig,
    build_lexicon,
    generate_synthetic,
    nearest_prototype,
)

INV = default_inventory()

CONFIG = SynthConfig(seed=3, words=20, utterances=12, dim=4, noise=0.2, speakers=3)


@pytest.fixture(name="corpus")
def fixture_corpus(tmp_path):
    """A small generated corpus."""

    return generate_synthetic(CONFIG, tmp_path / "synth")


class TestSynthetic:
    """Tests for generate_synthetic."""

    def test_files(self, corpus, tmp_path):
        """Test whether all corpus files are written."""

        out_dir = tmp_path / "synth"
        names = (MANIFEST_NAME, "lexicon.tsv", "prototypes.ynf", "synth_config.json")
        for name in names:
            assert (out_dir / name).exists()
        assert len(os.listdir(out_dir / "feats")) == CONFIG.utterances
        assert corpus.manifest_path == os.path.join(out_dir, MANIFEST_NAME)

    def test_manifest(self, corpus):
        """Test whether the manifest loads back to the generated utterances."""

        assert load_manifest(corpus.manifest_path) == corpus.utterances

    def test_deterministic(self, corpus, tmp_path):
        """Test whether the same seed gives byte-identical files."""

        other = generate_synthetic(CONFIG, tmp_path / "again")
        assert [u.orth for u in other.utterances] == [u.orth for u in corpus.utterances]
        for first, second in zip(corpus.utterances, other.utterances):
            with open(first.feature_path, "rb") as a:
                with open(second.feature_path, "rb") as b:
                    assert a.read() == b.read()

    def test_seed_changes_corpus(self, corpus, tmp_path):
        """Test whether another seed gives another corpus."""

        config = SynthConfig(**{**CONFIG.to_dict(), "seed": 4})
        other = generate_synthetic(config, tmp_path / "other")
        assert [u.orth for u in other.utterances] != [u.orth for u in corpus.utterances]

    def test_lexicon(self, corpus):
        """Test whether words are distinct and enough of them contain digraphs."""

        spellings = [ipa_to_orth(word) for word in corpus.lexicon]
        assert len(set(spellings)) == CONFIG.words
        with_digraph = [w for w in corpus.lexicon if any(p.is_digraph for p in w)]
        assert len(with_digraph) >= 5
        assert all("." not in spelling for spelling in spellings)

    def test_no_repeated_phonemes(self):
        """Test whether no word has the same phoneme twice in a row."""

        config = SynthConfig(seed=5, words=300)
        for word in build_lexicon(config, np.random.default_rng(5)):
            assert all(a != b for a, b in zip(word, word[1:])), word

    def test_transcripts_scan_back(self, corpus):
        """Test whether every transcript is words of the lexicon."""

        lexicon = set(corpus.lexicon)
        for utt in corpus.utterances:
            words, current = [], []
            for phoneme in orth_to_ipa(utt.orth) + (WORD_BOUNDARY,):
                if phoneme is WORD_BOUNDARY:
                    words.append(tuple(current))
                    current = []
                else:
                    current.append(phoneme)
            assert set(words) <= lexicon

    def test_frames_follow_labels(self, corpus):
        """Test frame counts and durations against the frame labels."""

        for utt in corpus.utterances:
            labels = corpus.frame_labels[utt.id]
            features = read_features(utt.feature_path)
            assert features.num_frames == len(labels)
            assert features.dim == CONFIG.dim
            assert utt.duration_s == pytest.approx(len(labels) / 100)

    def test_noise_free(self, tmp_path):
        """Test whether noise-free frames equal the prototypes."""

        config = SynthConfig(seed=2, words=5, utterances=3, dim=4, noise=0.0)
        corpus = generate_synthetic(config, tmp_path / "clean")
        for utt in corpus.utterances:
            expected = corpus.prototypes[corpus.frame_labels[utt.id]]
            frames = read_features(utt.feature_path).frames
            np.testing.assert_allclose(frames, expected, atol=1e-6)

    def test_nearest_prototype(self, tmp_path):
        """Test whether noise-free frames classify back to their labels."""

        config = SynthConfig(seed=4, words=30, utterances=20, dim=16, noise=0.0)
        corpus = generate_synthetic(config, tmp_path / "clean")
        for utt in corpus.utterances:
            frames = read_features(utt.feature_path).frames
            labels = nearest_prototype(frames, corpus.prototypes)
            np.testing.assert_array_equal(labels, corpus.frame_labels[utt.id])

    def test_speakers(self, corpus):
        """Test whether speakers cycle through the configured count."""

        assert {u.speaker for u in corpus.utterances} == {"spk0", "spk1", "spk2"}

    def test_prototypes(self, corpus):
        """Test whether there is one unit-norm prototype per phoneme plus silence."""

        assert corpus.prototypes.shape == (len(INV) + 1, CONFIG.dim)
        np.testing.assert_allclose(np.linalg.norm(corpus.prototypes, axis=1), 1.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"words": 0},
        {"dim": 1},
        {"noise": -0.1},
        {"digraph_fraction": 1.5},
        {"min_words": 3, "max_words": 2},
    ],
)
def test_bad_config(kwargs):
    """Test whether invalid settings are rejected."""

    with pytest.raises(ValueError):
        SynthConfig(**kwargs)
