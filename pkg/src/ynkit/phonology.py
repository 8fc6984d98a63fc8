"""
Module containing the Yan-nhangu phoneme inventory and the transducer between
Yolŋu Matha orthography and phoneme sequences.

A phoneme string is a tuple of ``Phoneme`` objects and ``WORD_BOUNDARY``
markers. Orthographic input is normalized to NFC before scanning, so the
underlined retroflex letters are single precomposed characters.
"""

import functools
import json
import logging
import os
import unicodedata
from dataclasses import asdict, dataclass

from ynkit.errors import UnknownPhoneme, VersionUnsupported
from ynkit.tokenizer import Tokenizer

INVENTORY_VERSION = 1
DEFAULT_INVENTORY_PATH = os.path.join(
    os.path.dirname(__file__), "data", "inventory.json"
)

KINDS = ("consonant", "vowel")
PLACES = (
    "bilabial",
    "alveolar",
    "retroflex",
    "laminodental",
    "palatal",
    "velar",
    "glottal",
    "none",
)
MANNERS = (
    "stop_voiceless",
    "stop_voiced",
    "nasal",
    "lateral",
    "rhotic",
    "glide",
    "none",
)
LENGTHS = ("short", "long", "none")

_log = logging.getLogger(__name__)


# pylint: disable=too-many-instance-attributes
@dataclass(frozen=True)
class Phoneme:
    """A single phoneme of the inventory."""

    ipa: str
    orth: str
    display: str
    kind: str
    place: str = "none"
    manner: str = "none"
    length: str = "none"

    def __post_init__(self):
        if not self.ipa or not self.orth:
            raise ValueError("Phoneme needs a non-empty ipa and orth spelling.")
        if len(self.display) != 1 or not self.display.isascii():
            raise ValueError(
                f"Display symbol of '{self.ipa}' must be one ASCII character, "
                f"got '{self.display}'."
            )

        for field, allowed in (
            ("kind", KINDS),
            ("place", PLACES),
            ("manner", MANNERS),
            ("length", LENGTHS),
        ):
            if getattr(self, field) not in allowed:
                raise ValueError(
                    f"Invalid {field} for '{self.ipa}': {getattr(self, field)}."
                )

        if self.kind == "vowel":
            if self.place != "none" or self.manner != "none":
                raise ValueError(f"Vowel '{self.ipa}' cannot have place or manner.")
            if self.length not in ("short", "long"):
                raise ValueError(f"Vowel '{self.ipa}' needs a short or long length.")
        elif self.length != "none":
            raise ValueError(f"Consonant '{self.ipa}' cannot have a length.")

    @property
    def is_digraph(self):
        """True when the orthography spells the phoneme with two letters."""

        return len(self.orth) > 1

    def __str__(self):
        return self.ipa


class _WordBoundary:
    """Marker for a word boundary inside a phoneme string."""

    ipa = " "
    orth = " "
    display = "_"

    def __repr__(self):
        return "WORD_BOUNDARY"

    def __reduce__(self):
        return "WORD_BOUNDARY"


WORD_BOUNDARY = _WordBoundary()


class PhonemeInventory:
    """
    Ordered, immutable collection of phonemes.

    Parameters
    ----------
    phonemes : Iterable[Phoneme]
        Phonemes in their canonical order.
    separator : Optional[str]
        Orthographic forced-split mark, defaults to ".".
    space_orth : Optional[str]
        Orthographic word separator, defaults to " ".
    space_ipa_display : Optional[str]
        Display symbol of a word boundary, defaults to "_".
    """

    def __init__(self, phonemes, separator=".", space_orth=" ", space_ipa_display="_"):
        self._phonemes = tuple(phonemes)
        self.separator = separator
        self.space_orth = space_orth
        self.space_ipa_display = space_ipa_display

        self._by_ipa = {p.ipa: p for p in self._phonemes}
        self._by_orth = {p.orth: p for p in self._phonemes}
        self._check()

    def _check(self):
        """Checks the inventory invariants."""

        for attr, table in (("ipa", self._by_ipa), ("orth", self._by_orth)):
            if len(table) != len(self._phonemes):
                raise ValueError(f"Duplicate {attr} spellings in inventory.")

        displays = {p.display for p in self._phonemes}
        if len(displays) != len(self._phonemes):
            raise ValueError("Display symbols must be unique within an inventory.")
        if self.space_ipa_display in displays:
            raise ValueError("Word boundary display symbol clashes with a phoneme.")

        for spelling in self._by_orth:
            if self.separator in spelling or self.space_orth in spelling:
                raise ValueError(f"Spelling '{spelling}' contains a reserved mark.")
            for longer in self._by_orth:
                if longer != spelling and longer.startswith(spelling):
                    if len(longer) != 2 or longer[0] != spelling:
                        raise ValueError(
                            f"Spelling '{spelling}' is an ambiguous prefix of "
                            f"'{longer}'."
                        )

    @property
    def phonemes(self):
        """Tuple of all phonemes, in inventory order."""

        return self._phonemes

    @property
    def consonants(self):
        """Tuple of consonant phonemes."""

        return tuple(p for p in self._phonemes if p.kind == "consonant")

    @property
    def vowels(self):
        """Tuple of vowel phonemes."""

        return tuple(p for p in self._phonemes if p.kind == "vowel")

    @property
    def digraphs(self):
        """Tuple of phonemes spelled with two letters."""

        return tuple(p for p in self._phonemes if p.is_digraph)

    @property
    def orth_spellings(self):
        """Mapping of orthographic spelling to phoneme."""

        return dict(self._by_orth)

    @property
    def ipa_spellings(self):
        """Mapping of IPA spelling to phoneme."""

        return dict(self._by_ipa)

    @property
    def max_orth_length(self):
        """Length of the longest orthographic spelling."""

        return max(len(p.orth) for p in self._phonemes)

    def by_ipa(self, ipa):
        """Returns the phoneme with the given IPA spelling."""

        return self._by_ipa[ipa]

    def __contains__(self, phoneme):
        return self._by_ipa.get(getattr(phoneme, "ipa", None)) == phoneme

    def __iter__(self):
        return iter(self._phonemes)

    def __len__(self):
        return len(self._phonemes)

    def __eq__(self, other):
        return isinstance(other, PhonemeInventory) and self.to_dict() == other.to_dict()

    def __hash__(self):
        return hash((self._phonemes, self.separator))

    def to_dict(self):
        """Returns the versioned dict form of the inventory."""

        return {
            "version": INVENTORY_VERSION,
            "separator": self.separator,
            "phonemes": [asdict(p) for p in self._phonemes],
        }

    @classmethod
    def from_dict(cls, data):
        """
        Builds an inventory from its versioned dict form.

        Parameters
        ----------
        data : dict
            Dict with "version", "phonemes" and optionally "separator".

        Returns
        -------
        PhonemeInventory
            The inventory.
        """

        if data.get("version") != INVENTORY_VERSION:
            raise VersionUnsupported(data.get("version"))

        phonemes = []
        for entry in data["phonemes"]:
            entry = dict(entry)
            for key in ("ipa", "orth"):
                entry[key] = unicodedata.normalize("NFC", entry[key])
            phonemes.append(Phoneme(**entry))
        return cls(phonemes, separator=data.get("separator", "."))

    @classmethod
    def load(cls, path):
        """Loads an inventory from a JSON file."""

        with open(path, encoding="utf-8") as inventory_file:
            return cls.from_dict(json.load(inventory_file))

    def save(self, path):
        """Saves the inventory as JSON."""

        with open(path, "w", encoding="utf-8") as inventory_file:
            json.dump(self.to_dict(), inventory_file, ensure_ascii=False, indent=2)
            inventory_file.write("\n")


@functools.lru_cache(maxsize=1)
def default_inventory():
    """Returns the 31-phoneme Yan-nhangu inventory shipped with the package."""

    return PhonemeInventory.load(DEFAULT_INVENTORY_PATH)


def load_inventory(path=None):
    """Loads an inventory file, or the default inventory when path is None."""

    if path is None:
        return default_inventory()
    return PhonemeInventory.load(path)


def _scan(text, spellings, inv, strict=True):
    """Runs the maximal-munch tokenizer and maps tokens to phonemes."""

    result = []
    for token in Tokenizer(text, spellings, separator=inv.separator, strict=strict):
        if token.type == Tokenizer.BOUNDARY:
            result.append(WORD_BOUNDARY)
        else:
            result.append(token.target)
    return tuple(result)


def orth_to_ipa(text, inv=None, strict=True):
    """
    Converts an orthographic string to a phoneme string.

    Parameters
    ----------
    text : str
        Orthographic text (spaces, apostrophes and separators allowed).
    inv : Optional[PhonemeInventory]
        Inventory to use, defaults to the Yan-nhangu inventory.
    strict : Optional[bool]
        Raise UnrecognizedGrapheme on unknown characters (default). When False,
        unknown fragments are kept as plain strings in the output.

    Returns
    -------
    tuple
        Phonemes and WORD_BOUNDARY markers.
    """

    inv = inv or default_inventory()
    return _scan(text, inv.orth_spellings, inv, strict=strict)


def parse_ipa(text, inv=None, strict=True):
    """Parses an IPA string (spaces between words) into a phoneme string."""

    inv = inv or default_inventory()
    return _scan(text, inv.ipa_spellings, inv, strict=strict)


def _needs_separator(phoneme, following, inv):
    """Checks whether a longer spelling would swallow the next letters."""

    joined = phoneme.orth + following
    return any(
        len(spelling) > len(phoneme.orth) and joined.startswith(spelling)
        for spelling in inv.orth_spellings
    )


def _single_boundaries(phonemes):
    trimmed = []
    for phoneme in phonemes:
        if phoneme is WORD_BOUNDARY and (not trimmed or trimmed[-1] is WORD_BOUNDARY):
            continue
        trimmed.append(phoneme)
    if trimmed and trimmed[-1] is WORD_BOUNDARY:
        trimmed.pop()
    return trimmed


def ipa_to_orth(phonemes, inv=None):
    """
    Converts a phoneme string to orthography.

    A separator is inserted wherever plain concatenation would re-scan
    differently, so that ``orth_to_ipa(ipa_to_orth(x)) == x``. Word boundaries
    at either end are dropped and runs of them become a single space, as
    ``orth_to_ipa`` reads text.

    Parameters
    ----------
    phonemes : Sequence
        Phonemes and WORD_BOUNDARY markers.
    inv : Optional[PhonemeInventory]
        Inventory to use, defaults to the Yan-nhangu inventory.

    Returns
    -------
    str
        Orthographic text.
    """

    inv = inv or default_inventory()
    phonemes = list(phonemes)
    for index, phoneme in enumerate(phonemes):
        if phoneme is not WORD_BOUNDARY and phoneme not in inv:
            raise UnknownPhoneme(index, phoneme)
    phonemes = _single_boundaries(phonemes)

    parts = []
    for index, phoneme in enumerate(phonemes):
        if phoneme is WORD_BOUNDARY:
            parts.append(inv.space_orth)
            continue

        parts.append(phoneme.orth)

        # Letters that follow within the same word
        following = ""
        for nxt in phonemes[index + 1 :]:
            if nxt is WORD_BOUNDARY or len(following) >= inv.max_orth_length:
                break
            following += nxt.orth
        if following and _needs_separator(phoneme, following, inv):
            parts.append(inv.separator)

    return "".join(parts)


def to_ipa_string(phonemes):
    """Renders a phoneme string as IPA text, word boundaries as spaces."""

    return "".join(str(getattr(p, "ipa", p)) for p in phonemes)


def display_symbol(phoneme):
    """
    Returns the single ASCII display symbol of a phoneme.

    Apical (retroflex) consonants and long vowels are capitalized, word
    boundaries render as "_".
    """

    return phoneme.display


def to_display_string(phonemes):
    """Renders a phoneme string with display symbols."""

    return "".join(getattr(p, "display", p) for p in phonemes)
