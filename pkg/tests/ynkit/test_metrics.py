"""Module for unit testing Levenshtein alignment, CER and WER."""

import functools
import itertools

import numpy as np
import pytest

from ynkit.errors import EmptyReference
from ynkit.metrics import (
    DELETE,
    INSERT,
    MATCH,
    SUBSTITUTE,
    EditOp,
    EditScript,
    cer,
    levenshtein_align,
    units_of,
    wer,
)

ALPHABET = "abc"


def strings(max_length):
    """All strings over the alphabet up to a length."""

    for length in range(max_length + 1):
        for chars in itertools.product(ALPHABET, repeat=length):
            yield "".join(chars)


@functools.lru_cache(maxsize=None)
def naive_distance(ref, hyp):
    """Edit distance by the plain recursion."""

    if not ref:
        return len(hyp)
    if not hyp:
        return len(ref)
    return min(
        naive_distance(ref[1:], hyp[1:]) + (ref[0] != hyp[0]),
        naive_distance(ref[1:], hyp) + 1,
        naive_distance(ref, hyp[1:]) + 1,
    )


class TestLevenshteinAlign:
    """Tests for levenshtein_align and EditScript."""

    def test_kitten(self):
        """Test the classic kitten / sitting instance."""

        script = levenshtein_align("kitten", "sitting")
        assert script.distance == 3
        assert script.counts == {"S": 2, "D": 0, "I": 1, "M": 4}

    def test_identity(self):
        """Test whether equal sequences align with matches only."""

        script = levenshtein_align(list("mana"), list("mana"))
        assert script.distance == 0
        assert all(op.kind == MATCH for op in script.ops)

    def test_space_deletion(self):
        """Test whether a run-together word is one deletion of the space."""

        script = levenshtein_align(list("mana gurrku"), list("managurrku"))
        assert script.edits == (EditOp(DELETE, " ", None),)

    def test_empty(self):
        """Test alignments against empty sequences."""

        assert levenshtein_align([], []).ops == ()
        assert levenshtein_align(["a"], []).ops == (EditOp(DELETE, "a", None),)
        assert levenshtein_align([], ["a"]).ops == (EditOp(INSERT, None, "a"),)

    def test_tie_break(self):
        """Test whether substitutions win over a deletion plus insertion."""

        script = levenshtein_align(["a"], ["b"])
        assert script.ops == (EditOp(SUBSTITUTE, "a", "b"),)

    def test_oracle(self):
        """Test DP distances against the recursion for all short pairs."""

        for ref in strings(3):
            for hyp in strings(3):
                assert levenshtein_align(ref, hyp).distance == naive_distance(ref, hyp)

    def test_oracle_random(self):
        """Test DP distances against the recursion for random pairs up to length 5."""

        rng = np.random.default_rng(0)
        for _ in range(1000):
            ref = "".join(rng.choice(list(ALPHABET), size=rng.integers(0, 6)))
            hyp = "".join(rng.choice(list(ALPHABET), size=rng.integers(0, 6)))
            assert levenshtein_align(ref, hyp).distance == naive_distance(ref, hyp)

    def test_replay(self):
        """Test whether every script turns the reference into the hypothesis."""

        rng = np.random.default_rng(1)
        for _ in range(1000):
            ref = rng.choice(list("abcd"), size=rng.integers(0, 12)).tolist()
            hyp = rng.choice(list("abcd"), size=rng.integers(0, 12)).tolist()
            assert levenshtein_align(ref, hyp).replay(ref) == hyp

    def test_replay_mismatch(self):
        """Test whether a script that does not fit raises."""

        script = EditScript((EditOp(MATCH, "a", "a"),))
        with pytest.raises(ValueError):
            script.replay(["b"])
        with pytest.raises(ValueError):
            script.replay(["a", "b"])

    def test_symmetry(self):
        """Test whether swapping the sides keeps the distance."""

        for ref in strings(4):
            for hyp in strings(2):
                forward = levenshtein_align(ref, hyp)
                backward = levenshtein_align(hyp, ref)
                assert forward.distance == backward.distance
                assert forward.counts["D"] - forward.counts["I"] == len(ref) - len(hyp)

    def test_triangle(self):
        """Test the triangle inequality on random triples."""

        rng = np.random.default_rng(2)
        pool = list(strings(4))
        for _ in range(3000):
            x, y, z = (pool[i] for i in rng.integers(len(pool), size=3))
            assert levenshtein_align(x, z).distance <= (
                levenshtein_align(x, y).distance + levenshtein_align(y, z).distance
            )

    @pytest.mark.slow
    def test_metric_exhaustive(self):
        """Test the metric properties over all strings up to length 4."""

        pool = list(strings(4))
        distance = {
            (x, y): levenshtein_align(x, y).distance for x in pool for y in pool
        }
        for x, y, z in itertools.product(pool, repeat=3):
            assert distance[x, z] <= distance[x, y] + distance[y, z]
        for x, y in itertools.product(pool, repeat=2):
            assert distance[x, y] == distance[y, x]
            assert (distance[x, y] == 0) == (x == y)


class TestUnits:
    """Tests for units_of."""

    def test_grapheme(self):
        """Test whether spaces become the word delimiter."""

        assert units_of("ma na", "grapheme") == ["m", "a", "_", "n", "a"]

    def test_phoneme(self):
        """Test whether digraphs are one phoneme unit."""

        assert units_of("nhä", "phoneme") == ["n̪", "aː"]


class TestErrorRates:
    """Tests for cer and wer."""

    @pytest.mark.parametrize(
        "ref, hyp, expected",
        [
            ("mana gurrku", "managurrku", 1 / 11),
            ("ḏiltji", "diltji", 1 / 6),
            ("mana", "mana", 0.0),
            ("ma", "mamama", 2.0),
        ],
    )
    def test_cer(self, ref, hyp, expected):
        """Test grapheme CER of selected pairs."""

        assert cer(ref, hyp) == pytest.approx(expected)

    def test_cer_phoneme(self):
        """Test whether a digraph error is one phoneme error."""

        assert cer("nhä", "nä", unit="phoneme") == pytest.approx(1 / 2)
        assert cer("nhä", "nä") == pytest.approx(1 / 3)

    def test_cer_lenient_hypothesis(self):
        """Test whether unknown letters in a hypothesis are scored, not rejected."""

        assert cer("ma", "mx", unit="phoneme") == pytest.approx(1 / 2)

    def test_cer_relabeling(self):
        """Test whether a bijective relabeling of letters keeps the CER."""

        table = str.maketrans("mangurk", "gkrnuma")
        ref, hyp = "mana gurrku", "mananga guku"
        relabeled = cer(ref.translate(table), hyp.translate(table))
        assert cer(ref, hyp) == pytest.approx(relabeled)

    @pytest.mark.parametrize(
        "ref, hyp, expected",
        [
            ("mana gurrku", "managurrku", 1.0),
            ("mana gurrku", "mana gurrku", 0.0),
            ("a b", "a b c", 0.5),
        ],
    )
    def test_wer(self, ref, hyp, expected):
        """Test WER of selected pairs."""

        assert wer(ref, hyp) == pytest.approx(expected)

    @pytest.mark.parametrize("ref", ["", "   "])
    def test_empty_reference(self, ref):
        """Test whether empty references are rejected."""

        with pytest.raises(EmptyReference):
            cer(ref, "ma")
        with pytest.raises(EmptyReference):
            wer(ref, "ma")
