"""Exception types shared across the fault-tree toolkit."""

from __future__ import annotations


class FtError(Exception):
    """Base class for all domain errors raised by this package."""


class UnknownId(FtError):
    """A vertex or edge reference does not exist in the tree at hand."""


class MissingAssignment(FtError):
    """A structure-function evaluation lacks a value for some basic event."""


class BadOrder(FtError):
    """A supplied vertex ordering is not a permutation of the vertex set."""


class SharedSubtree(FtError):
    """Bottom-up propagation was asked for on a DAG with shared vertices.

    The result would be inexact; callers must use the BDD path instead.
    """


class CapacityExceeded(FtError):
    """A BDD grew past the configured node cap."""


class CutSetLimit(FtError):
    """Cut-set extraction exceeded the configured cut-set cap."""


class TooLarge(FtError):
    """A brute-force oracle was asked for more basic events than it enumerates."""


class MissingProbability(FtError):
    """A probability map does not cover every variable of a BDD."""


class MissingTruth(FtError):
    """A gate-probability map required for an unmasked export is incomplete."""


class InfeasibleConfig(FtError):
    """Generator arity constraints cannot be met for the given configuration."""


class EpisodeDone(FtError):
    """An environment was stepped after its episode finished."""


class BadAction(FtError):
    """An environment action violates its domain (e.g. probability outside [0,1])."""
