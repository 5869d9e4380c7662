"""Exact finite-alphabet probability calculus.

A :class:`JointPmf` is a dense joint distribution over a labelled tuple of
finite-alphabet variables.  All entropies and mutual informations in the
package are computed on these objects, in bits (base-2 logs), with the
``0 * log 0 = 0`` convention and zero-mass conditioning cells skipped.

All operations are pure functions on immutable values and are safe to call
concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ChainTooShort,
    NegativeMass,
    NotNormalized,
    OverlappingSets,
    ShapeMismatch,
    UnknownVariable,
)

#: Default absolute tolerance for normalization and comparison checks.
DEFAULT_TOL = 1e-9

#: Entries below this are treated as genuinely negative mass.
NEG_MASS_TOL = -1e-12


@dataclass(frozen=True)
class JointPmf:
    """Dense joint pmf over an ordered tuple of labelled finite variables.

    ``probs`` is stored shaped ``sizes`` in row-major order over the variable
    tuple; a flat array of matching length is accepted and reshaped.
    """

    variables: tuple[str, ...]
    sizes: tuple[int, ...]
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        variables = tuple(str(v) for v in self.variables)
        sizes = tuple(int(s) for s in self.sizes)
        if len(variables) != len(sizes):
            raise ShapeMismatch(
                f"{len(variables)} variables but {len(sizes)} sizes")
        if len(set(variables)) != len(variables):
            raise ShapeMismatch(f"duplicate variable labels in {variables}")
        if any(s < 1 for s in sizes):
            raise ShapeMismatch(f"alphabet sizes must be >= 1, got {sizes}")
        probs = np.asarray(self.probs, dtype=np.float64)
        ncells = int(np.prod(sizes)) if sizes else 1
        if probs.size != ncells:
            raise ShapeMismatch(
                f"tensor has {probs.size} entries, sizes {sizes} need {ncells}")
        probs = probs.reshape(sizes)
        probs.flags.writeable = False
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "probs", probs)

    # -- basic accessors ------------------------------------------------

    def size_of(self, label: str) -> int:
        return self.sizes[self.axis_of(label)]

    def axis_of(self, label: str) -> int:
        try:
            return self.variables.index(label)
        except ValueError:
            raise UnknownVariable(
                f"variable {label!r} not in {self.variables}") from None

    def _axes_of(self, labels: Iterable[str]) -> list[int]:
        return [self.axis_of(v) for v in labels]

    # -- operations -------------------------------------------------------

    def validated(self, tol: float = DEFAULT_TOL) -> "JointPmf":
        """Check mass invariants, returning self unchanged if they hold.

        Raises NegativeMass for entries < -1e-12 and NotNormalized when the
        total mass deviates from 1 by more than ``tol``.
        """
        if np.any(self.probs < NEG_MASS_TOL):
            worst = float(self.probs.min())
            raise NegativeMass(f"entry {worst} below {NEG_MASS_TOL}")
        total = float(self.probs.sum())
        if abs(total - 1.0) > tol:
            raise NotNormalized(f"mass sums to {total}, expected 1 +- {tol}")
        return self

    def marginalize(self, keep: Iterable[str]) -> "JointPmf":
        """Sum out every variable not in ``keep``; variable order preserved."""
        keep = set(keep)
        if not keep:
            raise UnknownVariable("keep set must be nonempty")
        for v in keep:
            self.axis_of(v)
        kept = tuple(v for v in self.variables if v in keep)
        drop_axes = tuple(i for i, v in enumerate(self.variables)
                          if v not in keep)
        probs = self.probs.sum(axis=drop_axes) if drop_axes else self.probs
        return JointPmf(kept, tuple(self.sizes[self.axis_of(v)] for v in kept),
                        probs)

    def entropy(self, targets: Iterable[str] | None = None) -> float:
        """Joint entropy H(targets) in bits (all variables if None)."""
        sub = self if targets is None else self.marginalize(targets)
        p = sub.probs.reshape(-1)
        pos = p[p > 0.0]
        return float(-(pos * np.log2(pos)).sum())

    def conditional_entropy(self, targets: Iterable[str],
                            given: Iterable[str] = ()) -> float:
        """H(targets | given) in bits; ``given`` may be empty.

        Computed as H(targets, given) - H(given), which skips zero-mass
        conditioning cells automatically.  Tiny negative round-off is
        clamped to 0.
        """
        targets = tuple(targets)
        given = tuple(given)
        if set(targets) & set(given):
            raise OverlappingSets(
                f"targets {targets} and given {given} overlap")
        if not given:
            return self.entropy(targets)
        h = self.entropy(targets + given) - self.entropy(given)
        return _clamp_nonneg(h, "conditional entropy")

    def mutual_information(self, a: Iterable[str], b: Iterable[str],
                           cond: Iterable[str] = ()) -> float:
        """I(a; b | cond) in bits, clamped to be nonnegative.

        Uses I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C).
        """
        a, b, cond = tuple(a), tuple(b), tuple(cond)
        sets = (set(a), set(b), set(cond))
        if (sets[0] & sets[1]) or (sets[0] & sets[2]) or (sets[1] & sets[2]):
            raise OverlappingSets(f"A={a}, B={b}, cond={cond} must be disjoint")
        if not a or not b:
            raise UnknownVariable("A and B must be nonempty")
        h_ac = self.entropy(a + cond)
        h_bc = self.entropy(b + cond)
        h_abc = self.entropy(a + b + cond)
        h_c = self.entropy(cond) if cond else 0.0
        return _clamp_nonneg(h_ac + h_bc - h_abc - h_c, "mutual information")

    def is_markov_chain(self, chain: Sequence[str],
                        tol: float = DEFAULT_TOL) -> bool:
        """True iff the listed variables form a Markov chain in order.

        For every interior position j, checks conditional independence of the
        prefix and suffix given chain[j]: the max-norm deviation of
        p(suffix | prefix, chain[j]) from p(suffix | chain[j]) must be at most
        ``tol`` over all cells with positive conditioning mass.
        """
        chain = list(chain)
        if len(chain) < 3:
            raise ChainTooShort(f"chain {chain} has fewer than 3 variables")
        if len(set(chain)) != len(chain):
            raise ChainTooShort(f"chain {chain} repeats a variable")
        for v in chain:
            self.axis_of(v)
        for j in range(1, len(chain) - 1):
            if not self.conditionally_independent(chain[:j], chain[j + 1:],
                                                  [chain[j]], tol):
                return False
        return True

    def conditionally_independent(self, a: Sequence[str], b: Sequence[str],
                                  cond: Sequence[str],
                                  tol: float = DEFAULT_TOL) -> bool:
        """True iff p(b | a, cond) == p(b | cond) wherever p(a, cond) > 0."""
        a, b, cond = tuple(a), tuple(b), tuple(cond)
        sub = self.marginalize(a + b + cond)
        # reorder axes to (a..., cond..., b...)
        order = sub._axes_of(a + cond + b)
        p = np.transpose(sub.probs, order)
        na, nc = len(a), len(cond)
        a_cells = int(np.prod(p.shape[:na])) if na else 1
        c_cells = int(np.prod(p.shape[na:na + nc])) if nc else 1
        b_cells = int(np.prod(p.shape[na + nc:]))
        p = p.reshape(a_cells, c_cells, b_cells)
        p_ac = p.sum(axis=2)                       # p(a, c)
        p_cb = p.sum(axis=0)                       # p(c, b)
        p_c = p_cb.sum(axis=1)                     # p(c)
        with np.errstate(divide="ignore", invalid="ignore"):
            cond_b_given_ac = p / p_ac[:, :, None]
            cond_b_given_c = p_cb / p_c[:, None]
        mask = p_ac > 0.0                          # positive conditioning mass
        if not mask.any():
            return True
        dev = np.abs(cond_b_given_ac - cond_b_given_c[None, :, :])
        dev = np.where(mask[:, :, None], dev, 0.0)
        return bool(np.nanmax(dev) <= tol)

    def permute_symbols(self, perms: dict[str, Sequence[int]]) -> "JointPmf":
        """Relabel alphabet symbols: new[..., i, ...] = old[..., perm[i], ...]."""
        probs = self.probs
        for label, perm in perms.items():
            axis = self.axis_of(label)
            perm = np.asarray(perm, dtype=int)
            if sorted(perm.tolist()) != list(range(self.sizes[axis])):
                raise ShapeMismatch(f"{perm} is not a permutation for {label}")
            probs = np.take(probs, perm, axis=axis)
        return JointPmf(self.variables, self.sizes, probs)


def _clamp_nonneg(value: float, what: str) -> float:
    if value < -DEFAULT_TOL:
        raise NotNormalized(f"{what} computed as {value}; pmf is inconsistent")
    return max(0.0, float(value))


# ---------------------------------------------------------------------------
# Constructors and module-level aliases for the dataclass methods.
# ---------------------------------------------------------------------------

def uniform_pmf(variables: Sequence[str], sizes: Sequence[int]) -> JointPmf:
    sizes = tuple(int(s) for s in sizes)
    n = int(np.prod(sizes))
    return JointPmf(tuple(variables), sizes, np.full(n, 1.0 / n))


def point_mass(variables: Sequence[str], sizes: Sequence[int],
               symbols: Sequence[int]) -> JointPmf:
    sizes = tuple(int(s) for s in sizes)
    probs = np.zeros(sizes)
    probs[tuple(int(s) for s in symbols)] = 1.0
    return JointPmf(tuple(variables), sizes, probs)


def product_pmf(*parts: JointPmf) -> JointPmf:
    """Independent product of disjointly-labelled pmfs."""
    variables: tuple[str, ...] = ()
    sizes: tuple[int, ...] = ()
    probs = np.array(1.0)
    for part in parts:
        if set(part.variables) & set(variables):
            raise OverlappingSets("product parts share variable labels")
        probs = np.multiply.outer(probs, part.probs)
        variables += part.variables
        sizes += part.sizes
    return JointPmf(variables, sizes, probs.reshape(sizes))


def random_pmf(variables: Sequence[str], sizes: Sequence[int],
               rng: np.random.Generator, *, positive: bool = False) -> JointPmf:
    """Random joint pmf; strictly positive cells when ``positive``."""
    sizes = tuple(int(s) for s in sizes)
    n = int(np.prod(sizes))
    w = rng.random(n)
    if positive:
        w += 0.05
    return JointPmf(tuple(variables), sizes, w / w.sum())


def validate(pmf: JointPmf, tol: float = DEFAULT_TOL) -> JointPmf:
    return pmf.validated(tol)


def marginalize(pmf: JointPmf, keep: Iterable[str]) -> JointPmf:
    return pmf.marginalize(keep)


def conditional_entropy(pmf: JointPmf, targets: Iterable[str],
                        given: Iterable[str] = ()) -> float:
    return pmf.conditional_entropy(targets, given)


def mutual_information(pmf: JointPmf, a: Iterable[str], b: Iterable[str],
                       cond: Iterable[str] = ()) -> float:
    return pmf.mutual_information(a, b, cond)


def is_markov_chain(pmf: JointPmf, chain: Sequence[str],
                    tol: float = DEFAULT_TOL) -> bool:
    return pmf.is_markov_chain(chain, tol)
