"""
Exceptions raised by the ynkit package.

Every exception extends the builtin that describes the problem best
(``ValueError`` for bad input, ``RuntimeError`` for data or state problems)
as well as ``YnkitError``, so the command line can report all of them in one
place. Extra context is stored on attributes and listed by ``fields()``.
"""


class YnkitError(Exception):
    """Base class for all ynkit errors."""

    def fields(self):
        """Returns the structured context of the error as a dict."""

        return {
            key: value for key, value in vars(self).items() if not key.startswith("_")
        }


class UnrecognizedGrapheme(YnkitError, ValueError):
    """No inventory spelling matches at a scan position."""

    def __init__(self, position, fragment):
        self.position = position
        self.fragment = fragment
        super().__init__(
            f"Unrecognized grapheme '{fragment}' at position {position}."
        )


class UnknownPhoneme(YnkitError, ValueError):
    """A phoneme does not belong to the inventory."""

    def __init__(self, index, phoneme=None):
        self.index = index
        self.phoneme = phoneme
        super().__init__(f"Unknown phoneme {phoneme!r} at index {index}.")


class OutOfVocabulary(YnkitError, ValueError):
    """A unit is missing from the vocabulary and unknowns are not allowed."""

    def __init__(self, unit, position):
        self.unit = unit
        self.position = position
        super().__init__(
            f"Unit '{unit}' at position {position} is not in the vocabulary."
        )


class InvalidId(YnkitError, ValueError):
    """A token id is out of range or reserved."""

    def __init__(self, index):
        self.index = index
        super().__init__(f"Invalid token id: {index}.")


class ManifestParseError(YnkitError, ValueError):
    """A manifest line could not be parsed."""

    def __init__(self, line, reason=""):
        self.line = line
        self.reason = reason
        super().__init__(f"Cannot parse manifest line {line}: {reason}")


class MissingFeatureFile(YnkitError, RuntimeError):
    """The feature file of an utterance does not exist."""

    def __init__(self, utt_id, path=None):
        self.utt_id = utt_id
        self.path = path
        super().__init__(f"Feature file for utterance '{utt_id}' not found: {path}.")


class FeatureFormatError(YnkitError, ValueError):
    """A feature file is not a valid YNF1 container."""


class TooFewUtterances(YnkitError, ValueError):
    """Not enough utterances to split."""

    def __init__(self, count, needed=2):
        self.count = count
        self.needed = needed
        super().__init__(f"Need at least {needed} utterances to split, got {count}.")


class EmptySplit(YnkitError, RuntimeError):
    """A training or validation split is empty."""


class DimensionMismatch(YnkitError, ValueError):
    """Array shapes do not match the expected dimensions."""


class InfeasibleLabel(YnkitError, ValueError):
    """No CTC alignment of the label fits in the available frames."""

    def __init__(self, frames, needed, utterance_id=None):
        self.frames = frames
        self.needed = needed
        self.utterance_id = utterance_id
        where = f" (utterance '{utterance_id}')" if utterance_id else ""
        super().__init__(
            f"Label needs at least {needed} frames but only {frames} are available"
            f"{where}."
        )


class TooLargeForOracle(YnkitError, ValueError):
    """The brute-force oracle was asked to enumerate too many paths."""


class ChecksumMismatch(YnkitError, RuntimeError):
    """Checkpoint payload does not match its stored checksum."""


class VersionUnsupported(YnkitError, RuntimeError):
    """A file declares a format version this package cannot read."""

    def __init__(self, version):
        self.version = version
        super().__init__(f"Unsupported format version: {version}.")


class VocabFingerprintMismatch(YnkitError, RuntimeError):
    """A checkpoint was trained with a different vocabulary."""

    def __init__(self, expected, found):
        self.expected = expected
        self.found = found
        super().__init__(
            f"Vocabulary fingerprint mismatch: checkpoint has {expected}, "
            f"supplied vocabulary has {found}."
        )


class EmptyReference(YnkitError, ValueError):
    """A reference transcript has no units to score against."""

    def __init__(self, index=None):
        self.index = index
        where = f" at index {index}" if index is not None else ""
        super().__init__(f"Empty reference{where}; error rates are undefined.")
