from ..chem.errors import TooManyAtoms


class PocketError(Exception):
    """Base class for binding-site featurization failures."""


class MalformedRecord(PocketError, ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class EmptyLigand(PocketError, ValueError):
    pass


class EdgeIndexOutOfRange(PocketError, IndexError):
    pass


class AsymmetricEdgeList(PocketError, ValueError):
    pass


class SelfEdge(PocketError, ValueError):
    pass


class PocketTooLarge(PocketError, TooManyAtoms):
    pass


class SelectorMatchesNothing(PocketError, ValueError):
    pass
