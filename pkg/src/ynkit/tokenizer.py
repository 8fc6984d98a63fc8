"""Module containing a maximal-munch Tokenizer for orthographic and IPA strings."""

import logging
import unicodedata

from ynkit.errors import UnrecognizedGrapheme


class Token:
    """Class for a single token."""

    def __init__(self, token_value, token_type, position=0, target=None):
        self.value = token_value
        self.type = token_type
        self.position = position
        self.target = target

    def __repr__(self):
        return f"Token({self.value}, {self.type})"


class Tokenizer:
    """
    Class for tokenizing a string against a table of spellings.

    The scan runs left to right and always takes the longest spelling that
    matches at the current position. Whitespace runs become a single BOUNDARY
    token; leading and trailing boundaries are dropped. The separator mark
    forces a split and produces no token.

    Parameters
    ----------
    text : str
        Text to generate tokens from, normalized to NFC before scanning.
    spellings : dict
        Mapping of spelling to target value (for example orth -> ipa).
    separator : Optional[str]
        Forced-split mark, defaults to ".".
    strict : Optional[bool]
        Raise UnrecognizedGrapheme on unmatched characters (default). When
        False, unmatched characters are emitted as UNKNOWN tokens.
    """

    # Token types
    UNIT = "UNIT"
    BOUNDARY = "BOUNDARY"
    UNKNOWN = "UNKNOWN"

    # pylint: disable=too-many-arguments
    def __init__(self, text, spellings, separator=".", strict=True):
        self._log = logging.getLogger(__name__)

        self._spellings = spellings
        self._separator = separator
        self._strict = strict

        # Tokenize the text
        self._lookup = self._build_lookup()
        self._tokens = self._tokenize(unicodedata.normalize("NFC", text))
        self._pointer = 0

    def _build_lookup(self):
        """Builds spelling look-up list, longest spellings first."""

        return sorted(self._spellings, key=lambda s: (-len(s), s))

    def _tokenize(self, text):
        """
        Tokenizes a string.

        Parameters
        ----------
        text : str
            NFC-normalized text to generate tokens from.

        Returns
        -------
        list
            List of Token objects.
        """

        tokens = []
        position = 0
        while position < len(text):

            # Check for a spelling
            token = self._capture_token(text, position)
            if token:
                self._log.debug("Found token: %s [%s]", token.value, token.target)
                tokens.append(token)
                position += len(token.value)

            # Whitespace collapses to one boundary
            elif text[position].isspace():
                start = position
                while position < len(text) and text[position].isspace():
                    position += 1
                if tokens and tokens[-1].type != self.BOUNDARY:
                    tokens.append(Token(" ", self.BOUNDARY, start))

            # Forced split
            elif text[position] == self._separator:
                self._log.debug("Skipped separator at %d", position)
                position += 1

            else:
                fragment = self._capture_cluster(text, position)
                if self._strict:
                    raise UnrecognizedGrapheme(position, fragment)
                self._log.debug("Unknown fragment: '%s'", fragment)
                tokens.append(Token(fragment, self.UNKNOWN, position, fragment))
                position += len(fragment)

        if tokens and tokens[-1].type == self.BOUNDARY:
            tokens.pop()
        return tokens

    def _capture_token(self, text, position):
        """Returns the longest spelling token matching at position, if any."""

        for spelling in self._lookup:
            if text.startswith(spelling, position):
                return Token(spelling, self.UNIT, position, self._spellings[spelling])
        return None

    @staticmethod
    def _capture_cluster(text, position):
        """Captures a base character plus its trailing combining marks."""

        end = position + 1
        while end < len(text) and unicodedata.combining(text[end]):
            end += 1
        return text[position:end]

    def has_next(self):
        """Checks whether there are more tokens."""

        return self._pointer < len(self._tokens)

    def __len__(self):
        return len(self._tokens)

    def __iter__(self):
        """Start iteration."""

        return self

    def __next__(self):
        """Returns the next token."""

        if not self.has_next():
            raise StopIteration

        token = self._tokens[self._pointer]
        self._pointer += 1
        return token
