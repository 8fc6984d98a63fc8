"""Factory / base classes for Segmenter and Decoder classes."""


class _SymbolFactory:
    """Shared lookup of subclasses by their ``symbol`` attribute."""

    _kind = "Factory"

    @classmethod
    def get(cls, symbol, **kwargs):
        """
        Method for getting an object based on its symbol.

        Parameters
        ----------
        symbol : str
            String (lower case) identifying a subclass, for example "phoneme".
        **kwargs
            Passed on to the constructor of the subclass.

        Returns
        -------
        object
            Instance of the requested subclass.
        """

        symbols = {
            sub.symbol: sub for sub in cls.get_subclasses() if hasattr(sub, "symbol")
        }
        if symbol not in symbols:
            raise TypeError(f"Unknown {cls._kind}: {symbol}.")

        return symbols[symbol](**kwargs)

    @classmethod
    def list(cls):
        """Returns a set of available symbols."""

        return {sub.symbol for sub in cls.get_subclasses() if hasattr(sub, "symbol")}

    @classmethod
    def get_subclasses(cls):
        """Returns all subclasses recursively."""

        for subclass in cls.__subclasses__():
            yield from subclass.get_subclasses()
            yield subclass


class Segmenter(_SymbolFactory):
    """
    Abstract factory class for Segmenter objects.

    A Segmenter splits a cleaned orthographic transcript into the units of one
    tokenization level. Word boundaries are returned as the word delimiter "_".
    """

    _kind = "Segmenter"
    word_delimiter = "_"

    def join(self, units):
        """Renders units as text, word delimiters as single spaces."""

        return "".join(" " if u == self.word_delimiter else u for u in units)


class Decoder(_SymbolFactory):
    """
    Abstract factory class for Decoder objects.

    A Decoder turns a T x V logit matrix into a DecodeResult.
    """

    _kind = "Decoder"
