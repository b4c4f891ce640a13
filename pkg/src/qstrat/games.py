"""Optimization applications of the representation machinery.

* ``max_forced_output``: how hard can a compatible partner push a measuring
  plan toward one outcome.  Primal form: maximize the inner product over the
  partner's constraint set.  Dual form: the least p such that the outcome
  operator is dominated by p times a valid representation of the plan's own
  kind; the bilinear product p * R is linearized by the substitution S = p R,
  which scales the chain's terminal normalization by p.
* ``game_value`` / ``minmax_check``: value of a zero-sum refereed game by
  hard-wiring one player's strategy blocks into the referee and minimizing
  the other player's best response, all inside a single SDP.
* ``coinflip_analyze``: honest agreement and optimal forcing probabilities of
  a two-party coin-flipping protocol, with the 1/sqrt(2) and 1/2 floors that
  every such protocol must obey.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ModelError,
    ProfileMismatchError,
    ProtocolShapeError,
    ValidationFailedError,
)
from .interaction import distribution_via_reps
from .sdp import (
    DEFAULT_FEAS_TOL,
    DEFAULT_GAP_TOL,
    DEFAULT_MAX_ITER,
    LinMap,
    SdpProblem,
    SdpSolution,
    solve,
)
from .strategy import (
    KIND_COSTRATEGY,
    KIND_STRATEGY,
    MeasuringRep,
    SpaceProfile,
    StrategyRep,
    require_valid,
    validate,
)
from .tensor import (
    HermOp,
    Space,
    SpaceList,
    identity_op,
    partial_trace,
    scalar_op,
    tensor_with_identity,
)

FORCING_FLOOR = 1.0 / math.sqrt(2.0)
BOUND_SLACK = 1e-6


# ---------------------------------------------------------------------------
# chain constraints for strategy / co-strategy spectrahedra


def _add_strategy_chain(problem: SdpProblem, prefix: str, profile: SpaceProfile,
                        scale_var: str | None = None) -> str:
    """Variables T_1..T_n satisfying the nested trace constraints of valid
    plan representations; the terminal normalization is I (or scale * I when
    ``scale_var`` names a scalar block).  Returns the top block's name."""
    n = profile.turns
    if n == 0:
        raise ModelError("chains need at least one turn")
    names = []
    for k in range(1, n + 1):
        name = f"{prefix}T{k}"
        problem.add_var(name, profile.truncated(k).rep_space())
        names.append(name)
    for k in range(n, 1, -1):
        sp_k = profile.truncated(k).rep_space()
        sp_prev = profile.truncated(k - 1).rep_space()
        y_k = profile.outputs.factors[k - 1]
        x_k = profile.inputs.factors[k - 1]
        expr = LinMap.var(names[k - 1], sp_k).partial_trace([y_k.label]) \
            - LinMap.var(names[k - 2], sp_prev).tensor_identity(x_k, len(sp_prev))
        problem.add_equality(expr, HermOp(expr.out_space,
                                          np.zeros((expr.out_space.dim,) * 2)))
    sp1 = profile.truncated(1).rep_space()
    y1 = profile.outputs.factors[0]
    x1 = profile.inputs.factors[0]
    base = LinMap.var(names[0], sp1).partial_trace([y1.label])
    x1_space = SpaceList.of(x1)
    if scale_var is None:
        problem.add_equality(base, identity_op(x1_space))
    else:
        expr = base - LinMap.var(scale_var, SpaceList(())).tensor_identity(x1, 0)
        problem.add_equality(expr, HermOp(x1_space, np.zeros((x1.dim,) * 2)))
    return names[-1]


def _costrategy_chain_spaces(profile: SpaceProfile) -> list[SpaceList]:
    """Space of the k-th chain block: outputs 1..k-1 then inputs 1..k."""
    spaces = []
    for k in range(1, profile.turns + 1):
        spaces.append(SpaceList(profile.outputs.factors[:k - 1] + profile.inputs.factors[:k]))
    return spaces


def _add_costrategy_chain(problem: SdpProblem, prefix: str, profile: SpaceProfile,
                          base: float | str | None) -> str:
    """Variables S_1..S_n of the co-strategy recursion: the full operator is
    S_n (x) I on the last output, trace over input k descends a level, and
    the base trace equals ``base`` (a number, a scalar block name, or left
    free to be used as the objective).  Returns the top block's name."""
    n = profile.turns
    if n == 0:
        raise ModelError("chains need at least one turn")
    spaces = _costrategy_chain_spaces(profile)
    names = []
    for k in range(1, n + 1):
        name = f"{prefix}S{k}"
        problem.add_var(name, spaces[k - 1])
        names.append(name)
    for k in range(n, 1, -1):
        x_k = profile.inputs.factors[k - 1]
        y_prev = profile.outputs.factors[k - 2]
        expr = LinMap.var(names[k - 1], spaces[k - 1]).partial_trace([x_k.label]) \
            - LinMap.var(names[k - 2], spaces[k - 2]).tensor_identity(y_prev, k - 2)
        problem.add_equality(expr, HermOp(expr.out_space,
                                          np.zeros((expr.out_space.dim,) * 2)))
    if base is not None:
        x1 = profile.inputs.factors[0]
        expr = LinMap.var(names[0], spaces[0]).partial_trace([x1.label])
        if isinstance(base, str):
            expr = expr - LinMap.var(base, SpaceList(()))
            problem.add_equality(expr, scalar_op(0.0))
        else:
            problem.add_equality(expr, scalar_op(float(base)))
    return names[-1]


def _costrategy_top(expr_name: str, profile: SpaceProfile) -> LinMap:
    spaces = _costrategy_chain_spaces(profile)
    y_n = profile.outputs.factors[-1]
    return LinMap.var(expr_name, spaces[-1]).tensor_identity(y_n, profile.turns - 1)


def _costrategy_rep_from_block(block: HermOp, profile: SpaceProfile) -> StrategyRep:
    y_n = profile.outputs.factors[-1]
    top = tensor_with_identity(block, y_n, profile.turns - 1)
    return StrategyRep(profile, KIND_COSTRATEGY, top.relabeled(profile.rep_space()))


# ---------------------------------------------------------------------------
# maximum forced-output probability


@dataclass(frozen=True)
class MaxForcedResult:
    """Forced-output probability with the optimizing witness.

    ``witness`` is the partner's representation in the primal direction and
    the dominating representation (the dual's S / p) in the dual direction;
    ``probability`` is clamped to [0, 1] with the raw solver value kept."""

    outcome: str
    direction: str
    probability: float
    raw_value: float
    witness: StrategyRep
    solution: SdpSolution

    def to_json_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "direction": self.direction,
            "probability": self.probability,
            "raw_value": self.raw_value,
            "solver": self.solution.to_json_dict(),
        }


def build_forced_problem(m: MeasuringRep, outcome: str,
                         direction: str = "dual") -> tuple[SdpProblem, str]:
    """The SDP behind :func:`max_forced_output`; returns it together with the
    name of the top chain block (the witness carrier)."""
    if direction not in ("primal", "dual"):
        raise ModelError(f"direction must be 'primal' or 'dual', got {direction!r}")
    if outcome not in m.outcomes:
        raise ModelError(f"unknown outcome {outcome!r}; have {sorted(m.outcomes)}")
    require_valid(m.total())
    for label, op in m.outcomes.items():
        if np.linalg.eigvalsh(op.matrix)[0] < -1e-8:
            raise ValidationFailedError(f"outcome operator {label!r} is not PSD")
    profile = m.profile
    q_a = m.outcomes[outcome].relabeled(profile.rep_space())
    y_n = profile.outputs.factors[-1]

    problem = SdpProblem("max" if direction == "primal" else "min")
    if m.kind == KIND_STRATEGY:
        if direction == "primal":
            top = _add_costrategy_chain(problem, "R", profile, base=1.0)
            # <Q_a, S (x) I_Yn> = <tr_Yn(Q_a), S>
            problem.set_objective(top, partial_trace(q_a, {y_n.label}))
        else:
            problem.add_var("p", SpaceList(()))
            problem.set_objective("p", scalar_op(1.0))
            top = _add_strategy_chain(problem, "Q", profile, scale_var="p")
            problem.set_psd_inequality(LinMap.var(top, profile.rep_space()), q_a)
    else:
        if direction == "primal":
            top = _add_strategy_chain(problem, "Q", profile)
            problem.set_objective(top, q_a)
        else:
            problem.add_var("p", SpaceList(()))
            problem.set_objective("p", scalar_op(1.0))
            top = _add_costrategy_chain(problem, "R", profile, base="p")
            problem.set_psd_inequality(_costrategy_top(top, profile), q_a)
    return problem, top


def max_forced_output(m: MeasuringRep, outcome: str, direction: str = "dual",
                      gap_tol: float = DEFAULT_GAP_TOL,
                      feas_tol: float = DEFAULT_FEAS_TOL,
                      max_iter: int = DEFAULT_MAX_ITER) -> MaxForcedResult:
    """Maximum probability with which a compatible partner can force the
    measuring plan ``m`` to output ``outcome``."""
    problem, top = build_forced_problem(m, outcome, direction)
    profile = m.profile
    partner_kind = KIND_COSTRATEGY if m.kind == KIND_STRATEGY else KIND_STRATEGY
    sol = solve(problem, gap_tol=gap_tol, feas_tol=feas_tol, max_iter=max_iter)
    raw = sol.objective_value
    prob = min(1.0, max(0.0, raw))

    witness = _forced_witness(m.kind, direction, partner_kind, profile, top, sol, raw)
    return MaxForcedResult(outcome, direction, prob, raw, witness, sol)


def _forced_witness(kind: str, direction: str, partner_kind: str,
                    profile: SpaceProfile, top: str, sol: SdpSolution,
                    raw: float) -> StrategyRep:
    block = sol.blocks[top]
    if direction == "primal":
        if partner_kind == KIND_COSTRATEGY:
            return _costrategy_rep_from_block(block, profile)
        return StrategyRep(profile, KIND_STRATEGY, block.relabeled(profile.rep_space()))
    # dual: the dominating representation is the scaled block divided by p
    scale = max(raw, 1e-12)
    if kind == KIND_STRATEGY:
        op = HermOp(block.space, block.matrix / scale)
        return StrategyRep(profile, KIND_STRATEGY, op.relabeled(profile.rep_space()))
    op = HermOp(block.space, block.matrix / scale)
    return _costrategy_rep_from_block(op, profile)


# ---------------------------------------------------------------------------
# referees and game values


@dataclass(frozen=True)
class Referee:
    """A measuring co-strategy whose message spaces split into per-player
    factors: round k sends A_k (x) B_k and receives C_k (x) D_k, with a real
    payoff (for the A/C player) attached to every outcome."""

    alice_inputs: SpaceList   # A_k, referee -> Alice
    alice_outputs: SpaceList  # C_k, Alice -> referee
    bob_inputs: SpaceList     # B_k
    bob_outputs: SpaceList    # D_k
    outcomes: dict[str, HermOp]
    payoff: dict[str, float]

    def __post_init__(self):
        n = self.turns
        if not (len(self.alice_outputs) == len(self.bob_inputs) == len(self.bob_outputs) == n):
            raise ProfileMismatchError("per-player factor lists disagree on turn count")
        if n == 0:
            raise ModelError("a referee needs at least one turn")
        want = self.factored_space().dims
        for label, op in self.outcomes.items():
            if op.space.dims != want:
                raise ProfileMismatchError(f"outcome {label!r} dims {op.space.dims} != {want}")
        missing = set(self.outcomes) - set(self.payoff)
        if missing:
            raise ModelError(f"payoff missing for outcomes {sorted(missing)}")

    @property
    def turns(self) -> int:
        return len(self.alice_inputs)

    def factored_space(self) -> SpaceList:
        outs = []
        for c, d in zip(self.alice_outputs, self.bob_outputs):
            outs += [c, d]
        ins = []
        for a, b in zip(self.alice_inputs, self.bob_inputs):
            ins += [a, b]
        return SpaceList(tuple(outs + ins))

    def alice_profile(self) -> SpaceProfile:
        return SpaceProfile(self.alice_inputs, self.alice_outputs)

    def bob_profile(self) -> SpaceProfile:
        return SpaceProfile(self.bob_inputs, self.bob_outputs)

    def coarse_profile(self) -> SpaceProfile:
        ins = SpaceList(tuple(
            Space(f"X{k + 1}", a.dim * b.dim)
            for k, (a, b) in enumerate(zip(self.alice_inputs, self.bob_inputs))
        ))
        outs = SpaceList(tuple(
            Space(f"Y{k + 1}", c.dim * d.dim)
            for k, (c, d) in enumerate(zip(self.alice_outputs, self.bob_outputs))
        ))
        return SpaceProfile(ins, outs)

    def rep(self) -> MeasuringRep:
        """The referee as a measuring co-strategy on the coarse profile."""
        profile = self.coarse_profile()
        space = profile.rep_space()
        return MeasuringRep(profile, KIND_COSTRATEGY, {
            label: HermOp(space, op.matrix) for label, op in self.outcomes.items()
        })

    def check(self, tol: float = 1e-8):
        report = validate(self.rep().total().op, self.coarse_profile(), KIND_COSTRATEGY, tol)
        if not report.valid:
            raise ValidationFailedError("referee is not a valid measuring co-strategy",
                                        report=report)

    def swapped(self) -> "Referee":
        """The same game seen from the other seat: player factors exchanged
        (permuting every outcome operator) and the payoff negated."""
        order = []
        n = self.turns
        for c, d in zip(self.alice_outputs, self.bob_outputs):
            order += [d.label, c.label]
        for a, b in zip(self.alice_inputs, self.bob_inputs):
            order += [b.label, a.label]
        return Referee(
            alice_inputs=self.bob_inputs,
            alice_outputs=self.bob_outputs,
            bob_inputs=self.alice_inputs,
            bob_outputs=self.alice_outputs,
            outcomes={lab: op.permuted(order) for lab, op in self.outcomes.items()},
            payoff={lab: -v for lab, v in self.payoff.items()},
        )


@dataclass(frozen=True)
class GameValueResult:
    value: float
    raw_value: float
    alice_strategy: StrategyRep
    bob_witness: dict[str, HermOp]
    duality_gap: float
    solution: SdpSolution
    alice_residual: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "raw_value": self.raw_value,
            "duality_gap": self.duality_gap,
            "alice_residual": self.alice_residual,
            "solver": self.solution.to_json_dict(),
        }


def _inner_weights(payoff: dict[str, float]) -> tuple[dict[str, float], float, float]:
    """Shift-scale the inner (column) player's payoff -payoff into [0, 1]."""
    inner = {lab: -v for lab, v in payoff.items()}
    lo = min(inner.values())
    hi = max(inner.values())
    span = hi - lo
    if span == 0.0:
        return {lab: 0.0 for lab in inner}, lo, 0.0
    return {lab: (v - lo) / span for lab, v in inner.items()}, lo, span


def build_game_problem(ref: Referee) -> tuple[SdpProblem, str, float, float]:
    """The hard-wiring SDP for a referee with a non-constant payoff; returns
    (problem, alice top block name, inner payoff offset, inner payoff span).
    The solved objective p maps to the game value as -(span * p + offset)."""
    weights, lo, span = _inner_weights(ref.payoff)
    if span == 0.0:
        raise ModelError("constant payoff: the game value needs no optimization")
    kernel_space = ref.factored_space()
    acc = np.zeros((kernel_space.dim,) * 2, dtype=complex)
    for lab, op in ref.outcomes.items():
        acc = acc + weights[lab] * op.matrix
    kernel = HermOp(kernel_space, acc)

    problem = SdpProblem("min")
    alice_profile = ref.alice_profile()
    bob_profile = ref.bob_profile()
    a_top = _add_strategy_chain(problem, "A", alice_profile)
    b_top = _add_costrategy_chain(problem, "B", bob_profile, base=None)
    s1_space = _costrategy_chain_spaces(bob_profile)[0]
    problem.set_objective("BS1", identity_op(s1_space))

    hardwired = LinMap.var(a_top, alice_profile.rep_space()).sandwich(kernel)
    dominating = _costrategy_top(b_top, bob_profile)
    zero = HermOp(dominating.out_space, np.zeros((dominating.out_space.dim,) * 2))
    problem.set_psd_inequality(dominating - hardwired, zero)
    return problem, a_top, lo, span


def game_value(ref: Referee, gap_tol: float = DEFAULT_GAP_TOL,
               feas_tol: float = DEFAULT_FEAS_TOL,
               max_iter: int = DEFAULT_MAX_ITER) -> GameValueResult:
    """Value of the zero-sum game (the A/C player's guaranteed expected
    payoff): hard-wire the row player's blocks into the referee and minimize
    the column player's best response.

    The column player's payoff is shifted and scaled into [0, 1] so its
    weighted outcome operator stays PSD; for a win/lose payoff (1 for the
    row player's winning outcome, 0 otherwise) the program reduces to
    minimizing the base trace of the column chain subject to the hard-wired
    operator being dominated, and the value is 1 minus that optimum.
    """
    ref.check()
    payoffs = list(ref.payoff.values())
    weights, lo, span = _inner_weights(ref.payoff)
    if span == 0.0:
        value = -lo
        uniform = _uniform_strategy_rep(ref.alice_profile())
        return GameValueResult(value, value, uniform, {},
                               0.0, _trivial_solution(value))

    problem, a_top, lo, span = build_game_problem(ref)
    alice_profile = ref.alice_profile()
    sol = solve(problem, gap_tol=gap_tol, feas_tol=feas_tol, max_iter=max_iter)
    p_star = sol.objective_value
    inner_value = span * p_star + lo
    raw = -inner_value
    value = min(max(raw, min(payoffs)), max(payoffs))

    alice_rep = StrategyRep(alice_profile, KIND_STRATEGY,
                            sol.blocks[a_top].relabeled(alice_profile.rep_space()))
    alice_report = validate(alice_rep.op, alice_profile, KIND_STRATEGY)
    bob_witness = {name: op for name, op in sol.blocks.items() if name.startswith("BS")}
    return GameValueResult(value, raw, alice_rep, bob_witness, sol.duality_gap, sol,
                           max(alice_report.psd_residual, alice_report.max_level_residual))


def _uniform_strategy_rep(profile: SpaceProfile) -> StrategyRep:
    space = profile.rep_space()
    return StrategyRep(profile, KIND_STRATEGY,
                       HermOp(space, np.eye(space.dim) / profile.outputs.dim))


def _trivial_solution(value: float) -> SdpSolution:
    return SdpSolution(status="optimal", objective_value=value, blocks={},
                       duality_gap=0.0, max_constraint_residual=0.0, iterations=0)


def minmax_check(ref: Referee, gap_tol: float = DEFAULT_GAP_TOL,
                 feas_tol: float = DEFAULT_FEAS_TOL,
                 max_iter: int = DEFAULT_MAX_ITER) -> tuple[float, float]:
    """The game value computed from both seats: (maximin, minimax) of the
    A/C player's payoff.  The two agree within twice the gap tolerance."""
    maximin = game_value(ref, gap_tol, feas_tol, max_iter).value
    minimax = -game_value(ref.swapped(), gap_tol, feas_tol, max_iter).value
    return maximin, minimax


# ---------------------------------------------------------------------------
# coin flipping


@dataclass(frozen=True)
class ForcingBounds:
    outcome: str
    alice_forced: float
    bob_forced: float

    @property
    def max_forced(self) -> float:
        return max(self.alice_forced, self.bob_forced)

    @property
    def product(self) -> float:
        return self.alice_forced * self.bob_forced

    @property
    def floor_ok(self) -> bool:
        return self.max_forced >= FORCING_FLOOR - BOUND_SLACK

    @property
    def product_ok(self) -> bool:
        return self.product >= 0.5 - BOUND_SLACK


@dataclass(frozen=True)
class CoinFlipReport:
    agreement: dict[str, float]       # outcome -> honest probability both say it
    abort_probability: float
    honest_ok: bool                   # both agreements equal 1/2
    forcing: dict[str, ForcingBounds]
    bound_constant: float = FORCING_FLOOR

    def to_json_dict(self) -> dict:
        return {
            "agreement": dict(sorted(self.agreement.items())),
            "abort_probability": self.abort_probability,
            "honest_ok": self.honest_ok,
            "bound_constant": self.bound_constant,
            "forcing": {
                b: {
                    "alice_forced": f.alice_forced,
                    "bob_forced": f.bob_forced,
                    "max_forced": f.max_forced,
                    "product": f.product,
                    "floor_ok": f.floor_ok,
                    "product_ok": f.product_ok,
                }
                for b, f in sorted(self.forcing.items())
            },
        }


COIN_OUTCOMES = ("0", "1", "abort")


def coinflip_analyze(alice: MeasuringRep, bob: MeasuringRep,
                     gap_tol: float = DEFAULT_GAP_TOL) -> CoinFlipReport:
    """Honest statistics and optimal forcing probabilities of a coin-flipping
    protocol given both parties' measuring representations.

    For each outcome b in {0, 1}, ``alice_forced`` is the best a cheating
    partner can do against honest Alice and symmetrically for Bob; every
    protocol with honest agreement 1/2 must have their product >= 1/2 and
    their maximum >= 1/sqrt(2).
    """
    for rep, kind in ((alice, KIND_STRATEGY), (bob, KIND_COSTRATEGY)):
        missing = set(COIN_OUTCOMES) - set(rep.outcomes)
        if missing:
            raise ProtocolShapeError(f"missing outcome labels {sorted(missing)}")
        if rep.kind != kind:
            raise ProtocolShapeError(f"expected a {kind} family, got {rep.kind}")
    if not alice.profile.compatible_with(bob.profile):
        raise ProfileMismatchError("coin-flip parties have incompatible profiles")

    honest = distribution_via_reps(alice, bob)
    agreement = {b: honest.entries.get((b, b), 0.0) for b in ("0", "1")}
    abort_probability = sum(
        p for (a, b), p in honest.entries.items() if "abort" in (a, b)
    )
    honest_ok = all(abs(agreement[b] - 0.5) <= BOUND_SLACK for b in ("0", "1")) \
        and abort_probability <= BOUND_SLACK

    forcing = {}
    for b in ("0", "1"):
        pa = max_forced_output(alice, b, direction="dual", gap_tol=gap_tol)
        pb = max_forced_output(bob, b, direction="dual", gap_tol=gap_tol)
        forcing[b] = ForcingBounds(b, pa.probability, pb.probability)
    return CoinFlipReport(agreement, abort_probability, honest_ok, forcing)
