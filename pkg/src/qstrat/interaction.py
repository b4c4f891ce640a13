"""Joint outcome statistics of a plan interacting with a co-strategy.

Two independent routes are provided: the inner-product formula on Choi
representations, and a direct circuit simulation that alternates the two
sides' isometries on a shared pure state.  They must agree; tests and the
CLI's ``--method both`` exploit that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import ContractViolationError, ProfileMismatchError
from .strategy import (
    KIND_COSTRATEGY,
    KIND_STRATEGY,
    CoStrategyDescription,
    MeasuringRep,
    StrategyDescription,
    StrategyRep,
    _apply_to_wires,
    _fresh_label,
    _memory_spaces,
    _permute_rows,
)
from .tensor import HermOp, Space, SpaceList, hermitize, numerical_rank, purify

TRIVIAL_OUTCOME = "*"
IMAG_TOL = 1e-10
ENTRY_FLOOR = -1e-10


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of joint outcome pairs (a, b)."""

    entries: dict[tuple[str, str], float]

    def __post_init__(self):
        for pair, p in self.entries.items():
            if p < ENTRY_FLOOR:
                raise ContractViolationError(f"entry {pair} has probability {p}")

    def total(self) -> float:
        return float(sum(self.entries.values()))

    def pairs(self) -> list[tuple[str, str]]:
        return sorted(self.entries)

    def max_gap(self, other: "OutcomeDistribution") -> float:
        keys = set(self.entries) | set(other.entries)
        return max(abs(self.entries.get(k, 0.0) - other.entries.get(k, 0.0)) for k in keys)

    def marginal(self, side: int) -> dict[str, float]:
        out: dict[str, float] = {}
        for pair, p in self.entries.items():
            out[pair[side]] = out.get(pair[side], 0.0) + p
        return out

    def to_json_dict(self) -> dict:
        return {"outcomes": [[a, b, self.entries[(a, b)]] for a, b in self.pairs()]}


def ensure_measuring(rep) -> MeasuringRep:
    """Wrap a non-measuring representation as the trivial one-outcome family."""
    if isinstance(rep, MeasuringRep):
        return rep
    if isinstance(rep, StrategyRep):
        return MeasuringRep(rep.profile, rep.kind, {TRIVIAL_OUTCOME: rep.op})
    raise ContractViolationError(f"expected a representation, got {type(rep).__name__}")


def distribution_via_reps(s: MeasuringRep, c: MeasuringRep) -> OutcomeDistribution:
    """Outcome (a, b) occurs with probability <Q_a, R_b> for compatible
    representations; imaginary parts beyond 1e-10 are a contract violation."""
    s = ensure_measuring(s)
    c = ensure_measuring(c)
    if s.kind != KIND_STRATEGY or c.kind != KIND_COSTRATEGY:
        raise ContractViolationError(
            f"need a strategy and a co-strategy family, got {s.kind!r} and {c.kind!r}"
        )
    if not s.profile.compatible_with(c.profile):
        raise ProfileMismatchError(
            f"incompatible profiles: {s.profile.inputs.dims}/{s.profile.outputs.dims} vs "
            f"{c.profile.inputs.dims}/{c.profile.outputs.dims}"
        )
    entries = {}
    for a in s.labels:
        qa = s.outcomes[a].matrix
        for b in c.labels:
            val = complex(np.vdot(qa, c.outcomes[b].matrix))
            if abs(val.imag) > IMAG_TOL:
                raise ContractViolationError(
                    f"inner product for {(a, b)} has imaginary part {val.imag:.3e}"
                )
            entries[(a, b)] = float(val.real)
    return OutcomeDistribution(entries)


def _canonical_measurement(measurement: Mapping[str, np.ndarray] | None, dim: int):
    if measurement is None:
        return {TRIVIAL_OUTCOME: np.eye(dim, dtype=complex)}
    return {str(k): np.asarray(v, dtype=complex) for k, v in measurement.items()}


def simulate_interaction(s: StrategyDescription, c: CoStrategyDescription) -> OutcomeDistribution:
    """Run the interaction circuit directly: start from the co-strategy's
    initial state (purified if mixed), alternate the two sides' isometries,
    then evaluate every pair of final measurement operators.

    Missing measurements are treated as the trivial one-outcome POVM {I}.
    """
    s.check()
    c.check()
    if not s.profile.compatible_with(c.profile):
        raise ProfileMismatchError("strategy and co-strategy disagree on message dimensions")
    n = s.profile.turns
    if n == 0:
        raise ContractViolationError("interaction needs at least one turn")
    xs = list(s.profile.inputs.factors)
    ys = list(s.profile.outputs.factors)
    zs = _memory_spaces(s.profile, s.memory_dims) if n else []
    taken = {sp.label for sp in xs + ys + zs}
    ws = []
    for k, d in enumerate(c.memory_dims):
        label = _fresh_label(f"W{k}", taken)
        taken.add(label)
        ws.append(Space(label, d))

    rho = hermitize(c.initial_state)
    env_dim = max(1, numerical_rank(rho))
    env = Space(_fresh_label("E", taken), env_dim)
    g = purify(HermOp(SpaceList.of(Space("_init", rho.shape[0])), rho), env_dim)
    state = g.reshape(-1, 1)
    wires = [xs[0], ws[0], env]

    for k in range(n):
        in_s = [xs[k].label] if k == 0 else [xs[k].label, zs[k - 1].label]
        state, wires = _apply_to_wires(state, wires, in_s, s.isometries[k], [ys[k], zs[k]])
        out_c = [xs[k + 1], ws[k + 1]] if k + 1 < n else [ws[k + 1]]
        state, wires = _apply_to_wires(state, wires, [ys[k].label, ws[k].label],
                                       c.isometries[k], out_c)

    state, wires = _permute_rows(state, wires, [zs[-1].label, ws[-1].label, env.label])
    t = state.reshape(s.memory_dims[-1], c.memory_dims[-1], env_dim)
    povm_s = _canonical_measurement(s.measurement, s.memory_dims[-1])
    povm_c = _canonical_measurement(c.measurement, c.memory_dims[-1])

    entries = {}
    for a in sorted(povm_s):
        ta = np.einsum("zu,uwr->zwr", povm_s[a], t)
        for b in sorted(povm_c):
            val = complex(np.einsum("zwr,wv,zvr->", t.conj(), povm_c[b], ta))
            if abs(val.imag) > IMAG_TOL:
                raise ContractViolationError(
                    f"simulated probability for {(a, b)} has imaginary part {val.imag:.3e}"
                )
            entries[(a, b)] = float(val.real)
    return OutcomeDistribution(entries)
