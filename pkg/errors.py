"""Exceptions raised by the Szilard engine lab"""


class SzilardError(Exception):
    "Base class for every error raised by this package."
    pass


class InvalidState(SzilardError):
    "Raised when a matrix is not a valid density operator."

    def __init__(self, check, detail=""):
        self.check = check
        message = f"invalid state ({check})"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class InvalidBloch(SzilardError):
    "Raised when a Bloch vector lies outside the unit ball."
    pass


class InvalidParam(SzilardError):
    "Raised when a physical parameter (eta, q, beta, index) is out of range."
    pass


class NonDiagonalReduced(SzilardError):
    "Raised when the medium's reduced state has transverse Bloch components."
    pass


class DecompositionMismatch(SzilardError):
    "Raised when a decomposition was built for a different Gibbs parameter than the state carries."
    pass


class InvalidStrategy(SzilardError):
    "Raised when mixing weights are negative or do not sum to one."
    pass


class InvalidConfig(SzilardError):
    "Raised for bad shot settings or config-file contents."
    pass


class NoCrossing(SzilardError):
    "Raised when the violation keeps one sign over the whole q range."
    pass


class NumericalFailure(SzilardError):
    "Base class for failures of the numerical routines themselves."
    pass


class InfeasibleConstraint(NumericalFailure):
    "Raised when the hidden-state LP has no feasible ensemble (a discretization bug)."
    pass


class NoConvergence(NumericalFailure):
    "Raised when the LP solver stops without an optimal vertex."
    pass
