"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
it without a lookup table of its own.
"""

from __future__ import annotations


class StabRedError(Exception):
    """Base class for all package errors."""

    exit_code = 3


# lattice arithmetic

class LatticeError(StabRedError):
    pass


class LatticeRankError(LatticeError, ValueError):
    pass


class NotSublattice(LatticeError):
    pass


class NotFullDimensional(LatticeError):
    pass


class RayNotInCone(LatticeError):
    pass


class NotStrictlyConvex(LatticeError):
    pass


# toric constructions

class ToricError(StabRedError):
    pass


class NotCoprime(ToricError, ValueError):
    pass


class BadInput(ToricError, ValueError):
    pass


class InvalidData(ToricError, ValueError):
    pass


class WrongFanShape(ToricError):
    pass


# local fibre data

class FibreError(StabRedError):
    pass


class InvalidFibre(FibreError, ValueError):
    pass


class JInfinityCase(FibreError):
    pass


class NotMinimal(FibreError):
    pass


class NotStandardJInfinity(FibreError):
    exit_code = 2


# components

class ComponentError(StabRedError):
    pass


class NotMinimalFibre(ComponentError):
    pass


class InconsistentRecord(ComponentError):
    pass


# reduction engine

class EngineError(StabRedError):
    pass


class GraphError(EngineError, ValueError):
    """Structural problem with a family graph (disconnected, bad mode shape)."""

    exit_code = 1


class NonStandardFibre(EngineError):
    exit_code = 2


class NonLogCanonicalJunction(EngineError):
    exit_code = 2


class AmplenessFailure(EngineError):
    exit_code = 2


class NotALeaf(EngineError):
    pass


class NotContractible(EngineError):
    pass


class NotFlippable(EngineError):
    pass


class NotAChain(EngineError):
    pass


class BadStabilityClass(EngineError):
    pass


class NonTerminating(EngineError):
    pass


class ReplayMismatch(EngineError):
    pass


# input files

class SchemaError(StabRedError, ValueError):
    exit_code = 1
