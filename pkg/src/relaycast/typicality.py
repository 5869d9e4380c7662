"""Robust typicality, typical-set source codebooks, and random binning.

Robust typicality with slack ``epsilon``: a tuple of length-n sequences is
typical for a reference joint iff for every cell

    |count(cell) - n * p(cell)| <= epsilon * n * p(cell) + ABS_SLACK

which in particular forces count = 0 wherever p = 0.  The tiny absolute
slack only guards float round-off on the scaled bound.

The source codebook is the exact enumerated typical set (dense indexing in
place of random i.i.d. codeword generation: at desk scale the random
construction wastes mass on duplicate and atypical words while only typical
outcomes are ever indexed, so enumeration preserves the scheme).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateTypicalSet,
    LengthMismatch,
    TooLarge,
    UnknownVariable,
)
from .pmf import JointPmf
from .seeds import STREAM_BINS, child_rng

#: Absolute float-guard slack on the scaled count bound.
ABS_SLACK = 1e-9

#: Enumeration cap: |alphabet|^m may not exceed this.
ENUMERATION_CAP = 2 ** 20


def count_bounds(probs: np.ndarray, n: int,
                 epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Lower/upper admissible cell counts for robust typicality."""
    target = n * probs
    lo = target - epsilon * target - ABS_SLACK
    hi = target + epsilon * target + ABS_SLACK
    return lo, hi


def counts_typical(counts: np.ndarray, probs: np.ndarray, n: int,
                   epsilon: float) -> np.ndarray:
    """Vectorized bound check; reduces over the last axis."""
    lo, hi = count_bounds(probs, n, epsilon)
    ok = (counts >= lo) & (counts <= hi)
    return ok.all(axis=-1)


def all_sequences(alphabet: int, m: int) -> np.ndarray:
    """All length-m words over {0..alphabet-1}, lexicographic, shape (A^m, m)."""
    total = alphabet ** m
    if total > ENUMERATION_CAP:
        raise TooLarge(
            f"{alphabet}^{m} = {total} sequences exceed cap {ENUMERATION_CAP}")
    idx = np.arange(total)
    seqs = np.empty((total, m), dtype=np.int8)
    for pos in range(m - 1, -1, -1):
        seqs[:, pos] = idx % alphabet
        idx //= alphabet
    return seqs


@dataclass(frozen=True)
class SourceCodebook:
    """Enumerated epsilon-typical set of the source marginal.

    ``sequences[w]`` is codeword w (0-based; the schedules' padding index "1"
    is row 0).  M is the codebook size.
    """

    m: int
    epsilon: float
    alphabet: int
    sequences: np.ndarray = field(repr=False)

    @property
    def M(self) -> int:
        return self.sequences.shape[0]

    def index_of(self, sequence: np.ndarray) -> int | None:
        """Codebook index of ``sequence`` or None when atypical."""
        hits = np.nonzero((self.sequences == sequence).all(axis=1))[0]
        return int(hits[0]) if hits.size else None


def build_typical_source_codebook(source_marginal: JointPmf | np.ndarray,
                                  m: int, epsilon: float) -> SourceCodebook:
    """Enumerate every length-m sequence that is robustly typical for the
    (single-variable) source marginal, in lexicographic order."""
    if isinstance(source_marginal, JointPmf):
        if len(source_marginal.variables) != 1:
            raise UnknownVariable("source marginal must be a single variable")
        probs = source_marginal.probs.reshape(-1)
    else:
        probs = np.asarray(source_marginal, dtype=np.float64).reshape(-1)
    alphabet = probs.size
    seqs = all_sequences(alphabet, m)
    counts = np.zeros((seqs.shape[0], alphabet), dtype=np.int64)
    for a in range(alphabet):
        counts[:, a] = (seqs == a).sum(axis=1)
    mask = counts_typical(counts, probs, m, epsilon)
    typical = seqs[mask]
    if typical.shape[0] == 0:
        raise DegenerateTypicalSet(
            f"no length-{m} sequence is typical at epsilon={epsilon}")
    return SourceCodebook(m=m, epsilon=epsilon, alphabet=alphabet,
                          sequences=np.ascontiguousarray(typical))


@dataclass(frozen=True)
class BinAssignment:
    """Random uniform partition of codebook indices into 2^ceil(m*R) bins."""

    terminal: int
    rate: float                # bits per source symbol
    num_bins: int
    map: np.ndarray = field(repr=False)   # codebook index -> bin (0-based)
    seed: int

    def members(self, bin_index: int) -> np.ndarray:
        return np.nonzero(self.map == bin_index)[0]


def num_bins_for_rate(m: int, rate: float) -> int:
    """2^ceil(m * rate), with a round-off guard on exact integers."""
    import math
    return 2 ** max(0, math.ceil(m * rate - 1e-12))


def assign_bins(codebook: SourceCodebook, rate: float, seed: int,
                terminal: int = 1) -> BinAssignment:
    """i.i.d. uniform bin assignment for every codebook sequence.

    Distinct terminals must use distinct seed derivations so their
    assignments are independent; callers pass the derived stream seed.
    """
    if rate < 0:
        raise TooLarge(f"bin rate must be >= 0, got {rate}")
    num_bins = num_bins_for_rate(codebook.m, rate)
    if num_bins > ENUMERATION_CAP:
        raise TooLarge(f"{num_bins} bins exceed cap {ENUMERATION_CAP}")
    rng = child_rng(seed, STREAM_BINS, terminal)
    mapping = rng.integers(0, num_bins, size=codebook.M)
    return BinAssignment(terminal=terminal, rate=rate, num_bins=num_bins,
                         map=mapping, seed=seed)


# ---------------------------------------------------------------------------
# Joint typicality of labelled sequence tuples
# ---------------------------------------------------------------------------

def joint_typicality(sequences: Mapping[str, Sequence[int] | np.ndarray],
                     reference: JointPmf, epsilon: float) -> bool:
    """True iff the tuple's empirical joint is robustly typical for the
    reference marginal on the given labels."""
    labels = tuple(sequences.keys())
    if not labels:
        raise UnknownVariable("no sequences given")
    arrays = [np.asarray(sequences[v], dtype=np.int64) for v in labels]
    n = arrays[0].size
    if any(a.size != n for a in arrays):
        raise LengthMismatch("sequences must share one length")
    marg = reference.marginalize(labels)
    # reorder axes so that probs axes follow `labels` order
    probs = np.transpose(marg.probs,
                         [marg.variables.index(v) for v in labels])
    sizes = probs.shape
    flat = np.zeros(n, dtype=np.int64)
    for a, size in zip(arrays, sizes):
        if a.min() < 0 or a.max() >= size:
            raise LengthMismatch(f"symbol out of range for alphabet {size}")
        flat = flat * size + a
    counts = np.bincount(flat, minlength=int(np.prod(sizes)))
    return bool(counts_typical(counts, probs.reshape(-1), n, epsilon))


class TypicalityTest:
    """Precompiled robust-typicality test against one reference marginal.

    Used in simulator hot loops: the reference cell probabilities, strides
    and count bounds are computed once; candidates are checked in batches.
    The first ``lead`` labels form the candidate group (the rows that vary
    per decoding candidate); the rest are fixed within one check.
    """

    def __init__(self, reference: JointPmf, labels: Sequence[str], n: int,
                 epsilon: float, lead: int = 1):
        marg = reference.marginalize(labels)
        probs = np.transpose(marg.probs,
                             [marg.variables.index(v) for v in labels])
        self.labels = tuple(labels)
        self.sizes = probs.shape
        self.ncells = int(np.prod(self.sizes))
        self.lead = lead
        self.tail = int(np.prod(self.sizes[lead:]))
        self.n = n
        self.lo, self.hi = count_bounds(probs.reshape(-1), n, epsilon)

    def flatten(self, rows: Sequence[np.ndarray]) -> np.ndarray:
        """Mixed-radix index per position over the labels after the lead."""
        flat = np.zeros(self.n, dtype=np.int64)
        for row, size in zip(rows, self.sizes[self.lead:]):
            flat = flat * size + row
        return flat

    def check_one(self, rows: Sequence[np.ndarray]) -> bool:
        flat = np.zeros(self.n, dtype=np.int64)
        for row, size in zip(rows, self.sizes):
            flat = flat * size + row
        counts = np.bincount(flat, minlength=self.ncells)
        return bool(((counts >= self.lo) & (counts <= self.hi)).all())

    def check_batch(self, candidates: np.ndarray,
                    fixed_flat: np.ndarray) -> np.ndarray:
        """Boolean mask over candidate lead-group rows.

        ``candidates`` has shape (C, n) and already carries the mixed-radix
        index over the lead labels; ``fixed_flat`` indexes the remaining
        labels per position (from :meth:`flatten`).
        """
        c = candidates.shape[0]
        idx = candidates.astype(np.int64) * self.tail + fixed_flat
        idx += np.arange(c, dtype=np.int64)[:, None] * self.ncells
        counts = np.bincount(idx.reshape(-1), minlength=c * self.ncells)
        counts = counts.reshape(c, self.ncells)
        return ((counts >= self.lo) & (counts <= self.hi)).all(axis=1)
