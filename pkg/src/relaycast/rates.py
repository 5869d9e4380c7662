"""Achievable source-channel code rates, capacity values and cut-set bounds.

A cooperation plan fixes which terminals decode and in which order.  Hop i of
a plan contributes the ratio

    I(X_{pi(0..i-1)}; Y_{pi(i)} | X_downstream) / H(S_0 | S_{pi(i)})

and the plan's rate is the minimum ratio.  ``optimize_rate`` maximizes that
minimum over the joint input distribution of the participating terminals
(and, in auto mode, over all plans).  A vanishing denominator makes the hop
vacuous (ratio +inf); if every hop is vacuous the rate is unbounded.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import (
    AlphabetMismatch,
    InvalidPlan,
    MultipleDestinations,
    NotBroadcastShape,
    NotDegraded,
    NotLemmaShape,
    TooLarge,
    TooManyPlans,
)
from .network import (
    NetworkSpec,
    compose_joint,
    input_label,
    is_physically_degraded,
    is_side_info_degraded,
    output_label,
    source_label,
)
from .optimize import (
    OptimizerOptions,
    SearchResult,
    maximize_on_grid,
    maximize_over_simplex,
)
from .pmf import JointPmf

#: Denominators at or below this are treated as zero (hop imposes no limit).
ZERO_ENTROPY_TOL = 1e-12

#: Default cap on the number of enumerated plans.
DEFAULT_PLAN_CAP = 10_080

MODE_SINGLE = "single-destination"
MODE_BROADCAST = "relay-broadcast"

_BROADCAST_CONDITIONING_NOTE = (
    "relay-broadcast hops condition on the inputs of all participating "
    "terminals not yet decoded at that hop (positions i..N of the plan, "
    "which include every destination input)")

_DF_BOTTLENECK_NOTE = (
    "a hop has zero mutual information but positive residual source "
    "uncertainty: decode-and-forward gives rate 0 here; schemes that forward "
    "side information without decoding are outside this evaluator")


@dataclass(frozen=True)
class CooperationPlan:
    """Ordered decoding plan: order = (pi(0)=0, pi(1), ..., pi(N))."""

    order: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(int(t) for t in self.order))

    @property
    def num_hops(self) -> int:
        return len(self.order) - 1

    @property
    def decoders(self) -> tuple[int, ...]:
        return self.order[1:]

    def __str__(self) -> str:
        return ",".join(str(t) for t in self.order)


def plan_from_string(text: str) -> CooperationPlan:
    try:
        return CooperationPlan(tuple(int(x) for x in text.split(",")))
    except ValueError as exc:
        raise InvalidPlan(f"cannot parse plan {text!r}: {exc}") from exc


def validate_plan(spec: NetworkSpec, plan: CooperationPlan, mode: str) -> None:
    order = plan.order
    if len(order) < 2:
        raise InvalidPlan("plan needs at least the source and one decoder")
    if order[0] != 0:
        raise InvalidPlan(f"plan must start at terminal 0, got {order}")
    if len(set(order)) != len(order):
        raise InvalidPlan(f"plan repeats a terminal: {order}")
    if any(t < 0 or t > spec.K + spec.L for t in order):
        raise InvalidPlan(f"plan {order} references unknown terminals")
    if mode == MODE_SINGLE:
        if spec.L != 1:
            raise InvalidPlan(
                f"single-destination mode requires L=1, network has L={spec.L}")
        if order[-1] != spec.K + 1:
            raise InvalidPlan(
                f"plan must end at the destination {spec.K + 1}, got {order}")
        if any(not (1 <= t <= spec.K) for t in order[1:-1]):
            raise InvalidPlan(f"middle plan entries must be relays: {order}")
        if spec.input_sizes[spec.K + 1] != 1:
            raise InvalidPlan(
                "single-destination mode needs a constant destination input")
    elif mode == MODE_BROADCAST:
        missing = [d for d in spec.destinations() if d not in order[1:]]
        if missing:
            raise InvalidPlan(
                f"plan must include every destination, missing {missing}")
    else:
        raise InvalidPlan(f"unknown mode {mode!r}")


def default_mode(spec: NetworkSpec) -> str:
    return MODE_SINGLE if spec.L == 1 else MODE_BROADCAST


def participating_inputs(spec: NetworkSpec, plan: CooperationPlan,
                         mode: str) -> tuple[str, ...]:
    """Input labels of the terminals that transmit under this plan."""
    senders = plan.order[:-1] if mode == MODE_SINGLE else plan.order
    return tuple(input_label(t) for t in senders)


def enumerate_plans(spec: NetworkSpec, mode: str | None = None,
                    cap: int = DEFAULT_PLAN_CAP) -> list[CooperationPlan]:
    """All valid plans: every relay subset in every order, deterministic
    (length-then-lexicographic) order."""
    mode = mode or default_mode(spec)
    relays = list(range(1, spec.K + 1))
    if mode == MODE_SINGLE:
        if spec.L != 1:
            raise InvalidPlan("single-destination enumeration requires L=1")
        count = sum(math.perm(len(relays), r) for r in range(len(relays) + 1))
        if count > cap:
            raise TooManyPlans(
                f"{count} plans exceed the cap {cap}; pass an explicit plan")
        plans = []
        for r in range(len(relays) + 1):
            for perm in itertools.permutations(relays, r):
                plans.append(CooperationPlan((0,) + perm + (spec.K + 1,)))
        return plans
    dests = list(spec.destinations())
    count = sum(math.comb(len(relays), r) * math.factorial(r + len(dests))
                for r in range(len(relays) + 1))
    if count > cap:
        raise TooManyPlans(
            f"{count} plans exceed the cap {cap}; pass an explicit plan")
    plans = []
    for r in range(len(relays) + 1):
        for subset in itertools.combinations(relays, r):
            members = sorted(subset + tuple(dests))
            for perm in itertools.permutations(members):
                plans.append(CooperationPlan((0,) + perm))
    plans.sort(key=lambda p: (p.num_hops, p.order))
    return plans


# ---------------------------------------------------------------------------
# Hop evaluation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HopTerm:
    index: int                 # 1-based position in the plan
    terminal: int              # decoding terminal pi(index)
    numerator: float           # bits per channel use
    denominator: float         # bits per source symbol
    ratio: float               # numerator / denominator, +inf when vacuous

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class RateReport:
    mode: str
    plan: CooperationPlan | None
    rate: float
    per_hop: tuple[HopTerm, ...]
    bottleneck: int | None     # 1-based hop index attaining the minimum
    input_pmf: JointPmf | None
    unbounded: bool = False
    converged: bool = True
    evals: int = 0
    notes: tuple[str, ...] = ()
    certificate: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "mode": self.mode,
            "plan": list(self.plan.order) if self.plan else None,
            "rate": self.rate,
            "per_hop": [h.to_dict() for h in self.per_hop],
            "bottleneck": self.bottleneck,
            "unbounded": self.unbounded,
            "converged": self.converged,
            "evals": self.evals,
            "notes": list(self.notes),
        }
        if self.input_pmf is not None:
            out["input_pmf"] = {
                "variables": list(self.input_pmf.variables),
                "sizes": list(self.input_pmf.sizes),
                "probs": self.input_pmf.probs.reshape(-1).tolist(),
            }
        if self.certificate is not None:
            out["certificate"] = self.certificate
        return out


def _hop_sets(spec: NetworkSpec, plan: CooperationPlan,
              mode: str) -> list[tuple[int, list[str], list[str], list[str]]]:
    """Per hop: (terminal, message inputs, observed output, conditioning)."""
    order = plan.order
    n = plan.num_hops
    hops = []
    for i in range(1, n + 1):
        a = [input_label(order[j]) for j in range(i)]
        b = [output_label(order[i])]
        if mode == MODE_SINGLE:
            cond = [input_label(order[j]) for j in range(i, n)]
        else:
            cond = [input_label(order[j]) for j in range(i, n + 1)]
        hops.append((order[i], a, b, cond))
    return hops


def _evaluate_hops(composed: JointPmf, dens: Sequence[float],
                   hops: Sequence[tuple[int, list[str], list[str], list[str]]]
                   ) -> list[HopTerm]:
    terms = []
    for idx, ((terminal, a, b, cond), den) in enumerate(zip(hops, dens), 1):
        num = composed.mutual_information(a, b, cond)
        ratio = math.inf if den <= ZERO_ENTROPY_TOL else num / den
        terms.append(HopTerm(idx, terminal, num, den, ratio))
    return terms


def _report_from_terms(mode: str, plan: CooperationPlan,
                       terms: Sequence[HopTerm], input_pmf: JointPmf,
                       **kw) -> RateReport:
    finite = [(t.ratio, t.index) for t in terms if math.isfinite(t.ratio)]
    if finite:
        rate, bottleneck = min(finite)
        unbounded = False
    else:
        rate, bottleneck, unbounded = math.inf, None, True
    notes = list(kw.pop("notes", ()))
    if mode == MODE_BROADCAST:
        notes.append(_BROADCAST_CONDITIONING_NOTE)
    if any(t.numerator <= 1e-12 and t.denominator > ZERO_ENTROPY_TOL
           for t in terms):
        notes.append(_DF_BOTTLENECK_NOTE)
    return RateReport(mode=mode, plan=plan, rate=rate, per_hop=tuple(terms),
                      bottleneck=bottleneck, input_pmf=input_pmf,
                      unbounded=unbounded, notes=tuple(notes), **kw)


def achievable_rate(spec: NetworkSpec, input_pmf: JointPmf | None,
                    plan: CooperationPlan | Sequence[int],
                    mode: str | None = None) -> RateReport:
    """Rate achieved by decode-and-forward under ``plan`` at ``input_pmf``.

    ``input_pmf`` is a joint over the participating terminals' inputs
    (non-participants are pinned to the constant symbol); None means uniform.
    """
    if not isinstance(plan, CooperationPlan):
        plan = CooperationPlan(tuple(plan))
    mode = mode or default_mode(spec)
    validate_plan(spec, plan, mode)
    participating = participating_inputs(spec, plan, mode)
    if input_pmf is not None:
        stray = set(input_pmf.variables) - set(participating)
        if stray:
            raise AlphabetMismatch(
                f"input pmf covers non-participating inputs {sorted(stray)}")
    full = spec.extend_input(input_pmf, participating)
    composed = compose_joint(full, spec.channel)
    hops = _hop_sets(spec, plan, mode)
    dens = [spec.source_entropy_given(t) for t, _, _, _ in hops]
    terms = _evaluate_hops(composed, dens, hops)
    shown = input_pmf if input_pmf is not None else spec.extend_input(
        None, participating).marginalize(participating)
    return _report_from_terms(mode, plan, terms, shown)


# ---------------------------------------------------------------------------
# Optimization over the input simplex
# ---------------------------------------------------------------------------

def _free_labels(spec: NetworkSpec, labels: Iterable[str]) -> tuple[str, ...]:
    return tuple(v for v in labels if spec.input_sizes[int(v[1:])] > 1)


def _optimize_plan(spec: NetworkSpec, plan: CooperationPlan, mode: str,
                   opts: OptimizerOptions, seed_salt: int) -> RateReport:
    participating = participating_inputs(spec, plan, mode)
    free = _free_labels(spec, participating)
    hops = _hop_sets(spec, plan, mode)
    dens = [spec.source_entropy_given(t) for t, _, _, _ in hops]
    if all(d <= ZERO_ENTROPY_TOL for d in dens):
        return achievable_rate(spec, None, plan, mode)
    if not free:
        return achievable_rate(spec, None, plan, mode)
    sizes = tuple(spec.input_sizes[int(v[1:])] for v in free)
    dim = int(np.prod(sizes))
    if dim > opts.max_cells:
        raise TooLarge(
            f"participating input joint has {dim} cells (cap {opts.max_cells})")

    def objective(p: np.ndarray) -> float:
        partial = JointPmf(free, sizes, p)
        composed = compose_joint(spec.extend_input(partial, participating),
                                 spec.channel)
        best = math.inf
        for (terminal, a, b, cond), den in zip(hops, dens):
            if den <= ZERO_ENTROPY_TOL:
                continue
            best = min(best, composed.mutual_information(a, b, cond) / den)
        return best

    if opts.grid_step is not None:
        result = maximize_on_grid(objective, dim, opts.grid_step)
    else:
        result = maximize_over_simplex(objective, dim, opts, seed_salt)
    best_pmf = JointPmf(free, sizes, result.point)
    report = achievable_rate(spec, best_pmf, plan, mode)
    return dataclasses.replace(report, converged=result.converged,
                               evals=result.evals)


def optimize_rate(spec: NetworkSpec,
                  plan: CooperationPlan | Sequence[int] | str = "auto",
                  opts: OptimizerOptions | None = None,
                  mode: str | None = None,
                  plan_cap: int = DEFAULT_PLAN_CAP) -> RateReport:
    """Maximize the plan rate over the participating-input simplex.

    ``plan="auto"`` additionally maximizes over every enumerated plan; ties
    go to the earlier plan in enumeration order.  Deterministic for a fixed
    ``opts.seed`` and monotone in ``opts.restarts``.
    """
    opts = opts or OptimizerOptions()
    mode = mode or default_mode(spec)
    if isinstance(plan, str) and plan == "auto":
        plans = enumerate_plans(spec, mode, plan_cap)
    else:
        if not isinstance(plan, CooperationPlan):
            plan = plan_from_string(plan) if isinstance(plan, str) \
                else CooperationPlan(tuple(plan))
        plans = [plan]
    for p in plans:
        validate_plan(spec, p, mode)
    best: RateReport | None = None
    for salt, p in enumerate(plans):
        report = _optimize_plan(spec, p, mode, opts, salt)
        if best is None or report.rate > best.rate + 1e-15:
            best = report
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Converse: ordered cut-set bound and degraded capacity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CutTerm:
    cut: int                   # cut separates terminals < cut from the rest
    numerator_sup: float
    denominator: float
    ratio: float
    input_pmf: JointPmf

    def to_dict(self) -> dict[str, Any]:
        return {
            "cut": self.cut,
            "numerator_sup": self.numerator_sup,
            "denominator": self.denominator,
            "ratio": self.ratio,
            "input_pmf": {
                "variables": list(self.input_pmf.variables),
                "sizes": list(self.input_pmf.sizes),
                "probs": self.input_pmf.probs.reshape(-1).tolist(),
            },
        }


@dataclass(frozen=True)
class CutsetBound:
    bound: float
    per_cut: tuple[CutTerm, ...]
    converged: bool
    evals: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "bound": self.bound,
            "per_cut": [c.to_dict() for c in self.per_cut],
            "converged": self.converged,
            "evals": self.evals,
        }


def ordered_cutset_bound(spec: NetworkSpec,
                         opts: OptimizerOptions | None = None) -> CutsetBound:
    """Upper bound from the chain cuts {T_0..T_{i-1}} vs the rest, i=1..K+1.

    Each cut's mutual information is maximized over the full joint input
    distribution (the cut argument lets senders cooperate perfectly); the
    denominator pools all side information on the receiving side.  Valid as
    a capacity upper bound when the side information chain is degraded.
    """
    opts = opts or OptimizerOptions()
    if spec.L != 1:
        raise MultipleDestinations("ordered cut-set bound requires L=1")
    K = spec.K
    free = _free_labels(spec, spec.input_labels())
    sizes = tuple(spec.input_sizes[int(v[1:])] for v in free)
    dim = int(np.prod(sizes)) if free else 1
    if dim > opts.max_cells:
        raise TooLarge(f"full input joint has {dim} cells (cap {opts.max_cells})")
    terms: list[CutTerm] = []
    total_evals = 0
    all_converged = True
    for i in range(1, K + 2):
        a = [input_label(t) for t in range(i)]
        b = [output_label(t) for t in range(i, K + 2)]
        cond = [input_label(t) for t in range(i, K + 2)]
        den = spec.sources.conditional_entropy(
            [source_label(0)],
            [source_label(t) for t in range(i, K + 2)])

        def objective(p: np.ndarray, a=a, b=b, cond=cond) -> float:
            partial = JointPmf(free, sizes, p) if free else None
            composed = compose_joint(
                spec.extend_input(partial, spec.input_labels()), spec.channel)
            return composed.mutual_information(a, b, cond)

        if dim == 1:
            result = SearchResult(np.array([1.0]), objective(np.array([1.0])),
                                  1, True)
        elif opts.grid_step is not None:
            result = maximize_on_grid(objective, dim, opts.grid_step)
        else:
            result = maximize_over_simplex(objective, dim, opts,
                                           seed_salt=1000 + i)
        ratio = math.inf if den <= ZERO_ENTROPY_TOL else result.value / den
        best_pmf = (JointPmf(free, sizes, result.point) if free
                    else spec.uniform_input((input_label(0),)))
        terms.append(CutTerm(i, result.value, den, ratio, best_pmf))
        total_evals += result.evals
        all_converged = all_converged and result.converged
    bound = min(t.ratio for t in terms)
    return CutsetBound(bound, tuple(terms), all_converged, total_evals)


def degraded_capacity(spec: NetworkSpec,
                      opts: OptimizerOptions | None = None) -> RateReport:
    """Source-channel capacity of a physically degraded network whose side
    information is degraded in the same order.

    Evaluates the full-participation identity plan and certifies the result
    against the ordered cut-set bound within ``opts.certify_tol``.
    """
    opts = opts or OptimizerOptions()
    if spec.L != 1:
        raise MultipleDestinations("degraded capacity requires L=1")
    degraded_channel = is_physically_degraded(spec)
    degraded_side = is_side_info_degraded(spec)
    if not degraded_channel or not degraded_side:
        missing = []
        if not degraded_channel:
            missing.append("channel")
        if not degraded_side:
            missing.append("side information")
        raise NotDegraded(f"network is not degraded in: {', '.join(missing)}")
    identity = CooperationPlan(tuple(range(spec.K + 2)))
    report = optimize_rate(spec, identity, opts)
    bound = ordered_cutset_bound(spec, opts)
    gap = bound.bound - report.rate
    certificate = {
        "achievable": report.rate,
        "bound": bound.bound,
        "gap": gap,
        "certified": bool(abs(gap) <= opts.certify_tol),
        "certify_tol": opts.certify_tol,
        "degraded_channel": True,
        "degraded_side_info": True,
        "per_cut": [c.to_dict() for c in bound.per_cut],
    }
    return dataclasses.replace(report, certificate=certificate)


# ---------------------------------------------------------------------------
# Broadcast special cases
# ---------------------------------------------------------------------------

def broadcast_rate(spec: NetworkSpec,
                   input_pmf: JointPmf | None = None) -> RateReport:
    """min_i I(X_0; Y_i) / H(S_0 | S_i) for K=0 and silent destinations."""
    if spec.K != 0 or any(spec.input_sizes[d] != 1
                          for d in spec.destinations()):
        raise NotBroadcastShape(
            "broadcast rate requires K=0 and constant destination inputs")
    x0 = input_label(0)
    if input_pmf is not None and set(input_pmf.variables) != {x0}:
        raise AlphabetMismatch(f"input pmf must cover exactly {x0}")
    full = spec.extend_input(input_pmf, (x0,))
    composed = compose_joint(full, spec.channel)
    terms = []
    for idx, dest in enumerate(spec.destinations(), 1):
        num = composed.mutual_information([x0], [output_label(dest)])
        den = spec.source_entropy_given(dest)
        ratio = math.inf if den <= ZERO_ENTROPY_TOL else num / den
        terms.append(HopTerm(idx, dest, num, den, ratio))
    plan = CooperationPlan((0,) + spec.destinations())
    shown = input_pmf if input_pmf is not None else full.marginalize((x0,))
    return _report_from_terms("broadcast", plan, terms, shown)


def single_relay_broadcast_capacity(spec: NetworkSpec,
                                    opts: OptimizerOptions | None = None
                                    ) -> RateReport:
    """Capacity when K=0, everyone decodes, and only terminal 1 transmits.

    sup over p(x_0, x_1) of min of I(X_0; Y_1 | X_1) / H(S_0|S_1) and
    I(X_0, X_1; Y_j) / H(S_0|S_j) for j = 2..L.  Achievability and the
    cut-set converse coincide for this shape.
    """
    opts = opts or OptimizerOptions()
    if spec.K != 0 or spec.L < 2:
        raise NotLemmaShape("requires K=0 and L >= 2")
    if any(spec.input_sizes[d] != 1 for d in spec.destinations()[1:]):
        raise NotLemmaShape("only terminal 1 may have a non-constant input")
    x0, x1 = input_label(0), input_label(1)
    participating = (x0, x1)
    free = _free_labels(spec, participating)
    sizes = tuple(spec.input_sizes[int(v[1:])] for v in free)
    dim = int(np.prod(sizes))
    if dim > opts.max_cells:
        raise TooLarge(f"input joint has {dim} cells (cap {opts.max_cells})")
    hops: list[tuple[int, list[str], list[str], list[str]]] = [
        (1, [x0], [output_label(1)], [x1])]
    for j in spec.destinations()[1:]:
        hops.append((j, [x0, x1], [output_label(j)], []))
    dens = [spec.source_entropy_given(t) for t, _, _, _ in hops]

    def objective(p: np.ndarray) -> float:
        partial = JointPmf(free, sizes, p) if free else None
        composed = compose_joint(spec.extend_input(partial, participating),
                                 spec.channel)
        best = math.inf
        for (terminal, a, b, cond), den in zip(hops, dens):
            if den <= ZERO_ENTROPY_TOL:
                continue
            best = min(best, composed.mutual_information(a, b, cond) / den)
        return best if math.isfinite(best) else math.inf

    if all(d <= ZERO_ENTROPY_TOL for d in dens) or not free:
        result = SearchResult(np.ones(max(dim, 1)) / max(dim, 1),
                              objective(np.ones(max(dim, 1)) / max(dim, 1)),
                              1, True)
    elif opts.grid_step is not None:
        result = maximize_on_grid(objective, dim, opts.grid_step)
    else:
        result = maximize_over_simplex(objective, dim, opts, seed_salt=2000)
    best_pmf = JointPmf(free, sizes, result.point) if free else None
    composed = compose_joint(spec.extend_input(best_pmf, participating),
                             spec.channel)
    terms = _evaluate_hops(composed, dens, hops)
    plan = CooperationPlan((0,) + spec.destinations())
    shown = best_pmf if best_pmf is not None else spec.extend_input(
        None, participating).marginalize(participating)
    report = _report_from_terms(MODE_BROADCAST, plan, terms, shown,
                                notes=("capacity: achievability meets the "
                                       "cut-set converse for this shape",))
    return dataclasses.replace(report, converged=result.converged,
                               evals=result.evals)
