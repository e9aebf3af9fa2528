class ChemError(Exception):
    """Base class for molecular graph errors."""


class SmilesSyntaxError(ChemError, ValueError):
    def __init__(self, text: str, position: int, reason: str):
        super().__init__(f"{reason} at position {position} in {text!r}")
        self.text = text
        self.position = position
        self.reason = reason


class UnsupportedFeature(ChemError):
    pass


class TooManyAtoms(ChemError, ValueError):
    pass


class EmptyGraph(ChemError, ValueError):
    pass


class InconsistentMatrix(ChemError, ValueError):
    pass


class EmptyBatch(ChemError, ValueError):
    pass
