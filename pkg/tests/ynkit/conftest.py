"""Shared fixtures."""

import pytest

from ynkit.corpus import apply_exclusions
from ynkit.synthetic import SynthConfig, generate_synthetic

SMALL_CORPUS = SynthConfig(
    seed=7,
    words=12,
    utterances=16,
    dim=4,
    noise=0.1,
    max_words=2,
    max_syllables=3,
    max_phoneme_frames=5,
)


@pytest.fixture(name="small_corpus", scope="session")
def fixture_small_corpus(tmp_path_factory):
    """A small synthetic corpus, generated once per session."""

    return generate_synthetic(SMALL_CORPUS, tmp_path_factory.mktemp("synth"))


@pytest.fixture(name="small_utts")
def fixture_small_utts(small_corpus):
    """Usable utterances of the small corpus."""

    return apply_exclusions(small_corpus.utterances)
