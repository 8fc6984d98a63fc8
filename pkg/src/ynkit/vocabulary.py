"""Module containing token vocabularies and transcript encoding for CTC training."""

import hashlib
import json
import logging
from dataclasses import dataclass

from ynkit import segmenters  # pylint: disable=unused-import
from ynkit.base_classes import Segmenter
from ynkit.errors import InvalidId, OutOfVocabulary, VersionUnsupported
from ynkit.phonology import default_inventory

VOCAB_VERSION = 1
BLANK, PAD, UNK, WORD_DELIMITER = "<blank>", "<pad>", "<unk>", "_"
RESERVED = (BLANK, PAD, UNK, WORD_DELIMITER)

_log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TokenSequence:
    """Token ids of one transcript, tagged with the vocabulary level."""

    ids: tuple
    vocab_level: str

    def __len__(self):
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)


class TokenVocabulary:
    """
    Ordered token <-> id table.

    Ids 0-3 are reserved for blank, pad, unknown and the word delimiter "_";
    content tokens follow in lexicographic order.

    Parameters
    ----------
    level : str
        Tokenization level, "grapheme" or "phoneme".
    tokens : Sequence[str]
        All tokens, starting with the reserved block.
    """

    blank_id = 0
    pad_id = 1
    unk_id = 2
    word_delim_id = 3

    def __init__(self, level, tokens):
        if level not in Segmenter.list():
            raise ValueError(f"Unknown tokenization level: {level}.")

        tokens = tuple(tokens)
        if tokens[: len(RESERVED)] != RESERVED:
            raise ValueError(f"Vocabulary must start with reserved tokens {RESERVED}.")
        if len(set(tokens)) != len(tokens):
            raise ValueError("Vocabulary contains duplicate tokens.")

        self.level = level
        self.tokens = tokens
        self.id_of = {token: index for index, token in enumerate(tokens)}

    @property
    def content_tokens(self):
        """Tuple of the non-reserved tokens."""

        return self.tokens[len(RESERVED) :]

    @property
    def fingerprint(self):
        """SHA-256 of the token list, used to pair checkpoints with vocabularies."""

        return hashlib.sha256("\n".join(self.tokens).encode("utf-8")).hexdigest()

    def segmenter(self, inv=None, strict=True):
        """Returns the Segmenter matching the vocabulary level."""

        return Segmenter.get(self.level, inv=inv, strict=strict)

    def tokens_of(self, ids):
        """
        Maps ids to token strings.

        Raises
        ------
        InvalidId
            When an id is out of range or is the blank or pad id.
        """

        units = []
        for index in ids:
            index = int(index)
            reserved = index in (self.blank_id, self.pad_id)
            if not 0 <= index < len(self.tokens) or reserved:
                raise InvalidId(index)
            units.append(self.tokens[index])
        return units

    def __len__(self):
        return len(self.tokens)

    def __eq__(self, other):
        return (
            isinstance(other, TokenVocabulary)
            and self.level == other.level
            and self.tokens == other.tokens
        )

    def __hash__(self):
        return hash((self.level, self.tokens))

    def __repr__(self):
        return f"TokenVocabulary({self.level}, {len(self.tokens)} tokens)"

    def to_dict(self):
        """Returns the versioned dict form of the vocabulary."""

        return {
            "version": VOCAB_VERSION,
            "level": self.level,
            "tokens": list(self.tokens),
            "blank_id": self.blank_id,
            "pad_id": self.pad_id,
            "unk_id": self.unk_id,
            "word_delim_id": self.word_delim_id,
        }

    @classmethod
    def from_dict(cls, data):
        """Builds a vocabulary from its versioned dict form."""

        if data.get("version") != VOCAB_VERSION:
            raise VersionUnsupported(data.get("version"))
        return cls(data["level"], data["tokens"])

    def save(self, path):
        """Saves the vocabulary as JSON."""

        with open(path, "w", encoding="utf-8") as vocab_file:
            json.dump(self.to_dict(), vocab_file, ensure_ascii=False, indent=2)
            vocab_file.write("\n")

    @classmethod
    def load(cls, path):
        """Loads a vocabulary from a JSON file."""

        with open(path, encoding="utf-8") as vocab_file:
            return cls.from_dict(json.load(vocab_file))


def build_vocab(corpus_texts, level, inv=None):
    """
    Builds a vocabulary from all units observed in a corpus.

    Parameters
    ----------
    corpus_texts : Iterable[str]
        Cleaned orthographic transcripts.
    level : str
        "grapheme" or "phoneme".
    inv : Optional[PhonemeInventory]
        Inventory used at the phoneme level.

    Returns
    -------
    TokenVocabulary
        Reserved tokens followed by the sorted distinct units.
    """

    segmenter = Segmenter.get(level, inv=inv or default_inventory())

    units = set()
    for text in corpus_texts:
        units.update(segmenter(text))
    content = sorted(units - set(RESERVED))

    _log.debug("Built %s vocabulary with %d content tokens.", level, len(content))
    return TokenVocabulary(level, RESERVED + tuple(content))


def encode(text, vocab, inv=None, allow_unk=False):
    """
    Encodes a transcript as token ids.

    Parameters
    ----------
    text : str
        Cleaned orthographic transcript.
    vocab : TokenVocabulary
        Vocabulary to encode with.
    inv : Optional[PhonemeInventory]
        Inventory used at the phoneme level.
    allow_unk : Optional[bool]
        Map unknown units to the unknown id instead of raising.

    Returns
    -------
    TokenSequence
        Encoded transcript.
    """

    segmenter = vocab.segmenter(inv=inv or default_inventory(), strict=not allow_unk)

    ids = []
    for position, unit in enumerate(segmenter(text)):
        index = vocab.id_of.get(unit)
        if index is None or index in (vocab.blank_id, vocab.pad_id, vocab.unk_id):
            if not allow_unk:
                raise OutOfVocabulary(unit, position)
            _log.warning("Unit '%s' not in vocabulary, using <unk>.", unit)
            index = vocab.unk_id
        ids.append(index)

    return TokenSequence(tuple(ids), vocab.level)


def decode(seq, vocab):
    """
    Decodes token ids to text.

    Grapheme vocabularies give back orthography, phoneme vocabularies give
    an IPA string; word delimiters render as single spaces.
    """

    return vocab.segmenter().join(vocab.tokens_of(seq))
