"""Lifting factorizations of polyphase matrices and the filter banks they define."""

from .cuntz import CuntzRep
from .errors import FactorizationError
from .laurent import LaurentPoly
from .liftfactor import LiftingChain, factor, factor_2x2, factor_nxn, verify_chain
from .polymat import LiftingStep, PolyMatrix, StepKind

__all__ = [
    "CuntzRep", "FactorizationError", "LaurentPoly", "LiftingChain", "LiftingStep",
    "PolyMatrix", "StepKind", "factor", "factor_2x2", "factor_nxn", "verify_chain",
]
