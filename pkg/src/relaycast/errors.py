"""Semantic exception hierarchy.

Every error the library raises deliberately derives from RelaycastError and
carries a stable ``code`` string (the class name) so the CLI can surface
machine-readable error codes.
"""

from __future__ import annotations


class RelaycastError(Exception):
    """Base class for all errors raised by this package."""

    @property
    def code(self) -> str:
        return type(self).__name__


# --- probability-mass / pmf errors -----------------------------------------

class NegativeMass(RelaycastError):
    """A probability entry is below -1e-12."""


class NotNormalized(RelaycastError):
    """Probability mass does not sum to 1 within tolerance."""


class ShapeMismatch(RelaycastError):
    """Tensor shape disagrees with the declared alphabet sizes."""


class UnknownVariable(RelaycastError):
    """A referenced variable label is not part of the pmf."""


class OverlappingSets(RelaycastError):
    """Variable sets that must be disjoint overlap."""


class ChainTooShort(RelaycastError):
    """A Markov-chain test needs at least three variables."""


# --- network model errors ---------------------------------------------------

class AlphabetMismatch(RelaycastError):
    """Input pmf variables/sizes do not match the channel's declaration."""


class MultipleDestinations(RelaycastError):
    """Operation is defined only for single-destination networks."""


class ParseError(RelaycastError):
    """Network document is not valid JSON."""


class SchemaError(RelaycastError):
    """Network document is missing fields or has wrong field types."""


# --- rate engine errors ------------------------------------------------------

class InvalidPlan(RelaycastError):
    """Cooperation plan violates the mode's structural constraints."""


class TooManyPlans(RelaycastError):
    """Plan enumeration would exceed the configured cap."""


class NotDegraded(RelaycastError):
    """Network fails a required degradedness predicate."""


class NotBroadcastShape(RelaycastError):
    """Network is not a pure broadcast shape (K=0, silent destinations)."""


class NotLemmaShape(RelaycastError):
    """Network is not the single-transmitting-destination broadcast shape."""


# --- simulation errors -------------------------------------------------------

class TooLarge(RelaycastError):
    """Requested enumeration or codebook exceeds the desk-scale cap."""


class DegenerateTypicalSet(RelaycastError):
    """The typical set for the requested (m, epsilon) is empty."""


class PlanMismatch(RelaycastError):
    """Plan or scheme is incompatible with the network shape."""


class BTooSmall(RelaycastError):
    """Too few channel blocks for the plan's decoding depth."""


class UnsupportedK(RelaycastError):
    """Backward decoding is implemented for K <= 2 only."""


class LengthMismatch(RelaycastError):
    """Sequences in a typicality check have different lengths."""
