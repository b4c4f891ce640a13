"""Choi representations of multi-round plans and their linear-constraint laws.

An n-turn plan (a "strategy") receives messages on input spaces X1..Xn and
answers on output spaces Y1..Yn while carrying memory Z1..Zn; a "co-strategy"
is the dual object that talks first, with memory W0..Wn.  Either one is
captured faithfully by a single PSD operator on Y1..n (x) X1..n; families of
such operators (one per measurement outcome) capture measuring plans.

This module builds those operators from operational descriptions, validates
candidates against the nested partial-trace constraint system, truncates them
to fewer turns, and reconstructs an operational description from any valid
operator.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ContractViolationError,
    DescriptionInvalidError,
    ProfileMismatchError,
    RankToleranceWarning,
    ValidationFailedError,
)
from .tensor import (
    PSD_TOL,
    HermOp,
    Space,
    SpaceList,
    hermitize,
    identity_op,
    min_eigenvalue,
    numerical_rank,
    partial_trace,
    permutation_matrix,
    permute_operator,
    psd_part_sqrt,
    purify,
    tensor_with_identity,
)

ISOMETRY_TOL = 1e-9
RANK_TOL = 1e-9

KIND_STRATEGY = "strategy"
KIND_COSTRATEGY = "costrategy"


# ---------------------------------------------------------------------------
# profiles and descriptions


@dataclass(frozen=True)
class SpaceProfile:
    """Input spaces X1..Xn and output spaces Y1..Yn of an n-turn interaction."""

    inputs: SpaceList
    outputs: SpaceList

    def __post_init__(self):
        if len(self.inputs) != len(self.outputs):
            raise ProfileMismatchError(
                f"{len(self.inputs)} input spaces vs {len(self.outputs)} output spaces"
            )
        overlap = set(self.inputs.labels) & set(self.outputs.labels)
        if overlap:
            raise ProfileMismatchError(f"labels used on both sides: {sorted(overlap)}")

    @staticmethod
    def of_dims(in_dims: Sequence[int], out_dims: Sequence[int],
                in_prefix: str = "X", out_prefix: str = "Y") -> "SpaceProfile":
        ins = SpaceList(tuple(Space(f"{in_prefix}{k + 1}", d) for k, d in enumerate(in_dims)))
        outs = SpaceList(tuple(Space(f"{out_prefix}{k + 1}", d) for k, d in enumerate(out_dims)))
        return SpaceProfile(ins, outs)

    @property
    def turns(self) -> int:
        return len(self.inputs)

    def rep_space(self) -> SpaceList:
        """The space Y1..n (x) X1..n that representations act on."""
        return self.outputs.concat(self.inputs)

    def compatible_with(self, other: "SpaceProfile") -> bool:
        return self.inputs.dims == other.inputs.dims and self.outputs.dims == other.outputs.dims

    def truncated(self, k: int) -> "SpaceProfile":
        if not 0 <= k <= self.turns:
            raise ContractViolationError(f"cannot truncate {self.turns} turns to {k}")
        return SpaceProfile(SpaceList(self.inputs.factors[:k]), SpaceList(self.outputs.factors[:k]))


def _check_povm(measurement: Mapping[str, np.ndarray], dim: int, where: str):
    if not measurement:
        raise DescriptionInvalidError(f"{where}: measurement must have at least one outcome")
    total = np.zeros((dim, dim), dtype=complex)
    for label in sorted(measurement):
        p = np.asarray(measurement[label], dtype=complex)
        if p.shape != (dim, dim):
            raise DescriptionInvalidError(
                f"{where}: outcome {label!r} has shape {p.shape}, expected {(dim, dim)}"
            )
        if np.max(np.abs(p - p.conj().T)) > ISOMETRY_TOL:
            raise DescriptionInvalidError(f"{where}: outcome {label!r} is not Hermitian")
        if np.linalg.eigvalsh(hermitize(p))[0] < -PSD_TOL:
            raise DescriptionInvalidError(f"{where}: outcome {label!r} is not PSD")
        total += p
    if np.max(np.abs(total - np.eye(dim))) > ISOMETRY_TOL:
        raise DescriptionInvalidError(f"{where}: outcome operators do not sum to the identity")


def _check_isometry(a: np.ndarray, rows: int, cols: int, where: str):
    if a.shape != (rows, cols):
        raise DescriptionInvalidError(f"{where}: shape {a.shape}, expected {(rows, cols)}")
    gap = np.max(np.abs(a.conj().T @ a - np.eye(cols)))
    if gap > ISOMETRY_TOL:
        raise DescriptionInvalidError(f"{where}: not an isometry (|A*A - I| = {gap:.3e})")


@dataclass(frozen=True)
class StrategyDescription:
    """Operational form of a plan: per-turn isometries plus an optional
    final measurement on the last memory space.

    ``isometries[k]`` maps X_{k+1} (x) Z_k  ->  Y_{k+1} (x) Z_{k+1} (with Z_0
    absent), all indices big-endian.
    """

    profile: SpaceProfile
    memory_dims: tuple[int, ...]
    isometries: tuple[np.ndarray, ...]
    measurement: dict[str, np.ndarray] | None = None

    def __post_init__(self):
        object.__setattr__(self, "memory_dims", tuple(int(d) for d in self.memory_dims))
        object.__setattr__(
            self, "isometries", tuple(np.asarray(a, dtype=complex) for a in self.isometries)
        )
        if self.measurement is not None:
            object.__setattr__(
                self,
                "measurement",
                {str(k): np.asarray(v, dtype=complex) for k, v in self.measurement.items()},
            )

    def check(self):
        n = self.profile.turns
        if len(self.memory_dims) != n or len(self.isometries) != n:
            raise DescriptionInvalidError(
                f"need {n} memory dims and isometries, got "
                f"{len(self.memory_dims)} and {len(self.isometries)}"
            )
        xd, yd = self.profile.inputs.dims, self.profile.outputs.dims
        z_prev = 1
        for k, a in enumerate(self.isometries):
            _check_isometry(a, yd[k] * self.memory_dims[k], xd[k] * z_prev, f"isometry {k + 1}")
            z_prev = self.memory_dims[k]
        if self.measurement is not None:
            if n == 0:
                raise DescriptionInvalidError("a 0-turn plan has no memory to measure")
            _check_povm(self.measurement, self.memory_dims[-1], "measurement")


@dataclass(frozen=True)
class CoStrategyDescription:
    """Operational form of the first-speaking side: an initial state on
    X1 (x) W0, isometries B_k : Y_k (x) W_{k-1} -> X_{k+1} (x) W_k (the last
    one mapping into W_n alone), and an optional measurement on W_n.
    """

    profile: SpaceProfile
    memory_dims: tuple[int, ...]
    initial_state: np.ndarray
    isometries: tuple[np.ndarray, ...]
    measurement: dict[str, np.ndarray] | None = None

    def __post_init__(self):
        object.__setattr__(self, "memory_dims", tuple(int(d) for d in self.memory_dims))
        object.__setattr__(self, "initial_state", np.asarray(self.initial_state, dtype=complex))
        object.__setattr__(
            self, "isometries", tuple(np.asarray(a, dtype=complex) for a in self.isometries)
        )
        if self.measurement is not None:
            object.__setattr__(
                self,
                "measurement",
                {str(k): np.asarray(v, dtype=complex) for k, v in self.measurement.items()},
            )

    def check(self):
        n = self.profile.turns
        if n == 0:
            raise DescriptionInvalidError("a co-strategy needs at least one turn")
        if len(self.memory_dims) != n + 1:
            raise DescriptionInvalidError(
                f"need {n + 1} memory dims W0..Wn, got {len(self.memory_dims)}"
            )
        if len(self.isometries) != n:
            raise DescriptionInvalidError(f"need {n} isometries, got {len(self.isometries)}")
        xd, yd = self.profile.inputs.dims, self.profile.outputs.dims
        d0 = xd[0] * self.memory_dims[0]
        rho = self.initial_state
        if rho.shape != (d0, d0):
            raise DescriptionInvalidError(
                f"initial state has shape {rho.shape}, expected {(d0, d0)}"
            )
        if np.max(np.abs(rho - rho.conj().T)) > ISOMETRY_TOL:
            raise DescriptionInvalidError("initial state is not Hermitian")
        if np.linalg.eigvalsh(hermitize(rho))[0] < -PSD_TOL:
            raise DescriptionInvalidError("initial state is not PSD")
        if abs(np.trace(rho).real - 1.0) > ISOMETRY_TOL:
            raise DescriptionInvalidError(f"initial state trace {np.trace(rho).real} != 1")
        for k, b in enumerate(self.isometries):
            out_dim = self.memory_dims[k + 1] * (xd[k + 1] if k + 1 < n else 1)
            _check_isometry(b, out_dim, yd[k] * self.memory_dims[k], f"isometry {k + 1}")
        if self.measurement is not None:
            _check_povm(self.measurement, self.memory_dims[-1], "measurement")


# ---------------------------------------------------------------------------
# representations


@dataclass(frozen=True)
class StrategyRep:
    """A single PSD operator on Y1..n (x) X1..n capturing a non-measuring plan."""

    profile: SpaceProfile
    kind: str
    op: HermOp

    def __post_init__(self):
        if self.kind not in (KIND_STRATEGY, KIND_COSTRATEGY):
            raise ContractViolationError(f"unknown kind {self.kind!r}")
        if self.op.space.dims != self.profile.rep_space().dims:
            raise ProfileMismatchError(
                f"operator dims {self.op.space.dims} != profile {self.profile.rep_space().dims}"
            )


@dataclass(frozen=True)
class MeasuringRep:
    """An outcome-indexed family of PSD operators whose sum is non-measuring."""

    profile: SpaceProfile
    kind: str
    outcomes: dict[str, HermOp] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in (KIND_STRATEGY, KIND_COSTRATEGY):
            raise ContractViolationError(f"unknown kind {self.kind!r}")
        want = self.profile.rep_space().dims
        for label, op in self.outcomes.items():
            if op.space.dims != want:
                raise ProfileMismatchError(f"outcome {label!r} dims {op.space.dims} != {want}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(sorted(self.outcomes))

    def total(self) -> StrategyRep:
        """Sum of the outcome operators, as a non-measuring representation."""
        space = self.profile.rep_space()
        acc = np.zeros((space.dim, space.dim), dtype=complex)
        for label in self.labels:
            acc = acc + self.outcomes[label].matrix
        return StrategyRep(self.profile, self.kind, HermOp(space, acc))


# ---------------------------------------------------------------------------
# wire machinery: apply operators to named row factors of a matrix


def _fresh_label(base: str, taken: set[str]) -> str:
    label = base
    while label in taken:
        label += "'"
    return label


def _apply_to_wires(mat: np.ndarray, wires: list[Space], in_labels: Sequence[str],
                    op: np.ndarray, out_spaces: Sequence[Space]):
    """Left-apply ``op`` to the named row factors of ``mat``.

    The op consumes the factors named by ``in_labels`` (in that order) and
    produces ``out_spaces``, which end up at the front of the new wire list,
    followed by the untouched wires in their previous relative order.
    """
    labels = [w.label for w in wires]
    positions = [labels.index(lab) for lab in in_labels]
    rest = [i for i in range(len(wires)) if i not in positions]
    dims = [w.dim for w in wires]
    cols = mat.shape[1]
    d_in = int(np.prod([dims[i] for i in positions])) if positions else 1
    t = mat.reshape(tuple(dims) + (cols,))
    t = t.transpose(tuple(positions) + tuple(rest) + (len(wires),))
    t = t.reshape(d_in, -1)
    if op.shape[1] != d_in:
        raise ContractViolationError(f"op expects input dim {op.shape[1]}, wires give {d_in}")
    res = op @ t
    new_wires = list(out_spaces) + [wires[i] for i in rest]
    d_rows = int(np.prod([w.dim for w in new_wires])) if new_wires else 1
    return res.reshape(d_rows, cols), new_wires


def _permute_rows(mat: np.ndarray, wires: list[Space], order: Sequence[str]):
    labels = [w.label for w in wires]
    perm = [labels.index(lab) for lab in order]
    if sorted(perm) != list(range(len(wires))):
        raise ContractViolationError(f"{order} is not a permutation of {labels}")
    dims = [w.dim for w in wires]
    cols = mat.shape[1]
    t = mat.reshape(tuple(dims) + (cols,))
    t = t.transpose(tuple(perm) + (len(wires),))
    return t.reshape(mat.shape), [wires[i] for i in perm]


def _memory_spaces(profile: SpaceProfile, memory_dims: Sequence[int],
                   base: str = "Z") -> list[Space]:
    taken = set(profile.inputs.labels) | set(profile.outputs.labels)
    spaces = []
    for k, d in enumerate(memory_dims):
        label = _fresh_label(f"{base}{k + 1}", taken)
        taken.add(label)
        spaces.append(Space(label, d))
    return spaces


def _strategy_operator(desc: StrategyDescription):
    """The padded isometry product X1..n -> Y1..n (x) Zn as one matrix with
    row factors ordered [Y1..Yn, Zn]; returns (matrix, last_memory_dim)."""
    n = desc.profile.turns
    xs = list(desc.profile.inputs.factors)
    ys = list(desc.profile.outputs.factors)
    if n == 0:
        return np.eye(1, dtype=complex), 1
    zs = _memory_spaces(desc.profile, desc.memory_dims)
    mat = np.eye(desc.profile.inputs.dim, dtype=complex)
    wires = list(xs)
    for k in range(n):
        in_labels = [xs[k].label] if k == 0 else [xs[k].label, zs[k - 1].label]
        mat, wires = _apply_to_wires(mat, wires, in_labels, desc.isometries[k], [ys[k], zs[k]])
    order = [y.label for y in ys] + [zs[-1].label]
    mat, _ = _permute_rows(mat, wires, order)
    return mat, desc.memory_dims[-1]


def _gram_over_memory(total: np.ndarray, d_out: int, d_mem: int, d_in: int) -> np.ndarray:
    """tr over the memory factor of vec(total) vec(total)*, where the rows of
    ``total`` are ordered [outputs, memory] and the columns are the inputs."""
    t = total.reshape(d_out, d_mem, d_in)
    m = t.transpose(0, 2, 1).reshape(d_out * d_in, d_mem)
    return m @ m.conj().T


def represent_strategy(desc: StrategyDescription):
    """Choi representation of a plan: the memory-traced Gram operator of the
    padded isometry product; with a measurement, one operator per outcome
    (the product preceded by the POVM element's square root on the memory).
    """
    desc.check()
    total, d_mem = _strategy_operator(desc)
    d_out = desc.profile.outputs.dim
    d_in = desc.profile.inputs.dim
    space = desc.profile.rep_space()
    if desc.measurement is None:
        mat = _gram_over_memory(total, d_out, d_mem, d_in)
        return StrategyRep(desc.profile, KIND_STRATEGY, HermOp(space, mat))
    t = total.reshape(d_out, d_mem, d_in)
    outcomes = {}
    for label in sorted(desc.measurement):
        root = psd_part_sqrt(desc.measurement[label])
        scaled = np.einsum("ab,obi->oai", root, t).reshape(d_out * d_mem, d_in)
        outcomes[label] = HermOp(space, _gram_over_memory(scaled, d_out, d_mem, d_in))
    return MeasuringRep(desc.profile, KIND_STRATEGY, outcomes)


def _costrategy_total(desc: CoStrategyDescription):
    """Total operator of the co-strategy viewed as a plan that talks first:
    rows ordered [X1..Xn, Wn, E] with E purifying a mixed initial state,
    columns [Y1..Yn]; returns (matrix, wn_dim, env_dim)."""
    n = desc.profile.turns
    xs = list(desc.profile.inputs.factors)
    ys = list(desc.profile.outputs.factors)
    ws = _memory_spaces(desc.profile, desc.memory_dims, base="W")
    taken = {s.label for s in xs + ys + ws}
    rho = hermitize(desc.initial_state)
    env = max(1, numerical_rank(rho, RANK_TOL))
    env_space = Space(_fresh_label("E", taken), env)
    d0 = rho.shape[0]
    g = purify(HermOp(SpaceList.of(Space("_init", d0)), rho), env)
    mat = g.reshape(d0 * env, 1)
    wires = [xs[0], ws[0], env_space]
    for k in range(n):
        mat = np.kron(mat, np.eye(ys[k].dim, dtype=complex))
        wires.append(ys[k])
        out = [xs[k + 1], ws[k + 1]] if k + 1 < n else [ws[k + 1]]
        mat, wires = _apply_to_wires(mat, wires, [ys[k].label, ws[k].label],
                                     desc.isometries[k], out)
    order = [x.label for x in xs] + [ws[-1].label, env_space.label]
    mat, _ = _permute_rows(mat, wires, order)
    return mat, desc.memory_dims[-1], env


def represent_costrategy(desc: CoStrategyDescription):
    """Choi representation of a co-strategy: the representation of the plan
    obtained by adding an empty first and last message, transposed in the
    standard basis and relabeled onto Y1..n (x) X1..n.
    """
    desc.check()
    total, d_wn, d_env = _costrategy_total(desc)
    d_x = desc.profile.inputs.dim
    d_y = desc.profile.outputs.dim
    space = desc.profile.rep_space()
    n = desc.profile.turns
    dims_xy = desc.profile.inputs.dims + desc.profile.outputs.dims
    perm = list(range(n, 2 * n)) + list(range(n))  # [X.., Y..] -> [Y.., X..]

    def finish(lifted: np.ndarray) -> HermOp:
        return HermOp(space, permute_operator(lifted.T, dims_xy, perm))

    if desc.measurement is None:
        lifted = _gram_over_memory(total, d_x, d_wn * d_env, d_y)
        return StrategyRep(desc.profile, KIND_COSTRATEGY, finish(lifted))
    t = total.reshape(d_x, d_wn, d_env, d_y)
    outcomes = {}
    for label in sorted(desc.measurement):
        root = psd_part_sqrt(desc.measurement[label])
        scaled = np.einsum("ab,xbei->xaei", root, t).reshape(d_x * d_wn * d_env, d_y)
        outcomes[label] = finish(_gram_over_memory(scaled, d_x, d_wn * d_env, d_y))
    return MeasuringRep(desc.profile, KIND_COSTRATEGY, outcomes)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class LevelResidual:
    level: int
    constraint: str
    residual: float


@dataclass(frozen=True)
class ValidationReport:
    """PSD and per-level linear-constraint residuals of a candidate operator."""

    kind: str
    tol: float
    psd_residual: float
    levels: tuple[LevelResidual, ...]

    @property
    def max_level_residual(self) -> float:
        return max((lv.residual for lv in self.levels), default=0.0)

    @property
    def valid(self) -> bool:
        return self.psd_residual <= self.tol and self.max_level_residual <= self.tol

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "tol": self.tol,
            "valid": self.valid,
            "psd_residual": self.psd_residual,
            "max_level_residual": self.max_level_residual,
            "levels": [
                {"level": lv.level, "constraint": lv.constraint, "residual": lv.residual}
                for lv in self.levels
            ],
        }


def _strategy_levels(op: HermOp, profile: SpaceProfile) -> list[LevelResidual]:
    n = profile.turns
    xs, ys = profile.inputs.factors, profile.outputs.factors
    levels = []
    for k in range(n, 1, -1):
        traced = partial_trace(op, [y.label for y in ys[k - 1:]])
        tail = [x.label for x in xs[k - 1:]]
        d_tail = int(np.prod([x.dim for x in xs[k - 1:]]))
        marg = partial_trace(traced, tail)
        marg = HermOp(marg.space, marg.matrix / d_tail)
        target = marg
        for x in xs[k - 1:]:
            target = tensor_with_identity(target, x, len(target.space))
        levels.append(LevelResidual(k, f"trace over Y{k}..Y{n} factorizes",
                                    traced.max_abs_diff(target)))
    full = partial_trace(op, [y.label for y in ys]) if n else op
    ident = identity_op(full.space)
    levels.append(LevelResidual(1, "trace over all outputs is the identity",
                                full.max_abs_diff(ident)))
    return levels


def _costrategy_levels(op: HermOp, profile: SpaceProfile) -> list[LevelResidual]:
    n = profile.turns
    xs, ys = profile.inputs.factors, profile.outputs.factors
    levels = []
    q = op
    for k in range(n, 0, -1):
        reduced = partial_trace(q, [ys[k - 1].label])
        r = HermOp(reduced.space, reduced.matrix / ys[k - 1].dim)
        target = tensor_with_identity(r, ys[k - 1], k - 1)
        levels.append(LevelResidual(k, f"identity factor on Y{k}", q.max_abs_diff(target)))
        q = partial_trace(r, [xs[k - 1].label])
    levels.append(LevelResidual(0, "base trace is 1", abs(q.matrix[0, 0].real - 1.0)))
    return levels


def validate(rep: HermOp, profile: SpaceProfile, kind: str, tol: float = PSD_TOL) -> ValidationReport:
    """Check a candidate operator against the constraint system for its kind.

    Strategies must satisfy, for k = n..2, that tracing outputs Y_k..Y_n
    leaves (k-1)-turn marginal (x) identity on X_k..X_n, with the full output
    trace equal to the identity.  Co-strategies must carry an identity factor
    on Y_k at every level, descending through traces over X_k, with base
    trace 1.  Residuals are max-norm; valid iff all of them (and the PSD
    defect) are within ``tol``.
    """
    if kind not in (KIND_STRATEGY, KIND_COSTRATEGY):
        raise ContractViolationError(f"unknown kind {kind!r}")
    expected = profile.rep_space()
    if rep.space.dims != expected.dims:
        raise ProfileMismatchError(
            f"operator dims {rep.space.dims} do not match profile {expected.dims}"
        )
    op = rep.relabeled(expected)
    psd_residual = max(0.0, -min_eigenvalue(op))
    if kind == KIND_STRATEGY:
        levels = _strategy_levels(op, profile)
    else:
        levels = _costrategy_levels(op, profile)
    return ValidationReport(kind, tol, psd_residual, tuple(levels))


def require_valid(rep: StrategyRep, tol: float = PSD_TOL) -> ValidationReport:
    report = validate(rep.op, rep.profile, rep.kind, tol)
    if not report.valid:
        raise ValidationFailedError(
            f"{rep.kind} representation fails validation "
            f"(psd {report.psd_residual:.3e}, levels {report.max_level_residual:.3e})",
            report=report,
        )
    return report


# ---------------------------------------------------------------------------
# marginals and synthesis


def extract_marginal(rep: StrategyRep, k: int, tol: float = PSD_TOL) -> StrategyRep:
    """The k-turn representation obtained by stopping after k turns: trace out
    turns k+1..n and divide by the dimension of the dropped inputs."""
    if rep.kind != KIND_STRATEGY:
        raise ContractViolationError("marginals are defined for strategy representations")
    n = rep.profile.turns
    if not 1 <= k <= n:
        raise ContractViolationError(f"turn count {k} outside 1..{n}")
    require_valid(rep, tol)
    return _marginal_unchecked(rep, k)


def _marginal_unchecked(rep: StrategyRep, k: int) -> StrategyRep:
    profile = rep.profile
    n = profile.turns
    if k == n:
        return rep
    dropped = [s.label for s in profile.outputs.factors[k:]] + \
              [s.label for s in profile.inputs.factors[k:]]
    d_in_dropped = int(np.prod([s.dim for s in profile.inputs.factors[k:]]))
    op = rep.op.relabeled(profile.rep_space())
    reduced = partial_trace(op, dropped)
    reduced = HermOp(reduced.space, reduced.matrix / d_in_dropped)
    return StrategyRep(profile.truncated(k), KIND_STRATEGY, reduced)


def _rank_with_warning(m: np.ndarray, rank_tol: float) -> int:
    w = np.linalg.eigvalsh(hermitize(m))
    top = float(w[-1]) if w.size else 0.0
    if top <= 0.0:
        return 0
    cut = rank_tol * top
    if np.any((w > 0.1 * cut) & (w < 10.0 * cut)):
        warnings.warn(
            "eigenvalues close to the rank cutoff; synthesized memory dims may be unstable",
            RankToleranceWarning,
        )
    return int(np.sum(w > cut))


def _purify_to_isometry(op: HermOp, d_out: int, d_in: int, env: int) -> np.ndarray:
    """A map B : inputs -> outputs (x) env with memory-traced Gram equal to
    ``op`` (which lives on outputs (x) inputs)."""
    g = purify(op, env)  # (d_out*d_in) x env
    t = g.reshape(d_out, d_in, env)
    return t.transpose(0, 2, 1).reshape(d_out * env, d_in)


def synthesize(rep: StrategyRep, tol: float = PSD_TOL, rank_tol: float = RANK_TOL) -> StrategyDescription:
    """Reconstruct an operational description from a valid representation.

    Works inductively: the (n-1)-turn marginal is synthesized first, the
    full operator is purified with a memory of dimension rank(op), and the
    last isometry is the connector between the two purifications of
    marginal (x) I, found by a least-squares alignment of their factors.
    Memory dims equal the marginal ranks.
    """
    if rep.kind != KIND_STRATEGY:
        raise ContractViolationError("synthesis is defined for strategy representations")
    require_valid(rep, tol)
    return _synthesize_level(rep, rank_tol)


def _synthesize_level(rep: StrategyRep, rank_tol: float) -> StrategyDescription:
    profile = rep.profile
    n = profile.turns
    if n == 0:
        return StrategyDescription(profile, (), ())
    q = rep.op.relabeled(profile.rep_space())
    d_out = profile.outputs.dim
    d_in = profile.inputs.dim
    r_q = max(1, _rank_with_warning(q.matrix, rank_tol))
    b = _purify_to_isometry(q, d_out, d_in, r_q)
    if n == 1:
        return StrategyDescription(profile, (r_q,), (b,))

    sub = _synthesize_level(_marginal_unchecked(rep, n - 1), rank_tol)
    a_total, r_r = _strategy_operator(sub)  # rows [Y1..Y_{n-1}, Z_{n-1}]
    d_yh = profile.truncated(n - 1).outputs.dim
    d_xh = profile.truncated(n - 1).inputs.dim
    d_yn = profile.outputs.factors[-1].dim
    d_xn = profile.inputs.factors[-1].dim

    # two purifications of marginal (x) I_{Xn}, as matrices (system x env)
    # with system factors [Y1..Y_{n-1}, X1..Xn] in both
    k1 = np.kron(a_total, np.eye(d_xn, dtype=complex))
    m1 = k1.reshape(d_yh, r_r, d_xn, d_xh, d_xn)
    m1 = m1.transpose(0, 3, 4, 1, 2).reshape(d_yh * d_xh * d_xn, r_r * d_xn)
    m2 = b.reshape(d_yh, d_yn, r_q, d_xh, d_xn)
    m2 = m2.transpose(0, 3, 4, 1, 2).reshape(d_yh * d_xh * d_xn, d_yn * r_q)

    u_t, *_ = np.linalg.lstsq(m1, m2, rcond=None)
    u = u_t.T  # isometry Z_{n-1} (x) V -> Y_n (x) Z_n, with V a copy of X_n
    gap = float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))))
    if gap > 1e-8:
        warnings.warn(
            f"purification connector off isometry by {gap:.2e}; projecting back",
            RankToleranceWarning,
        )
        w, _, vh = np.linalg.svd(u, full_matrices=False)
        u = w @ vh
    swap = permutation_matrix((d_xn, r_r), (1, 0))  # X_n (x) Z_{n-1} -> Z_{n-1} (x) X_n
    a_n = u @ swap
    return StrategyDescription(
        profile, sub.memory_dims + (r_q,), sub.isometries + (a_n,)
    )


# ---------------------------------------------------------------------------
# random fixtures


def _haar(rng: np.random.Generator, in_dim: int, out_dim: int) -> np.ndarray:
    g = rng.standard_normal((out_dim, in_dim)) + 1j * rng.standard_normal((out_dim, in_dim))
    q, r = np.linalg.qr(g / np.sqrt(2.0))
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def _random_projective(rng: np.random.Generator, dim: int, n_outcomes: int) -> dict[str, np.ndarray]:
    u = _haar(rng, dim, dim)
    sizes = [dim // n_outcomes + (1 if i < dim % n_outcomes else 0) for i in range(n_outcomes)]
    povm = {}
    start = 0
    for i, size in enumerate(sizes):
        cols = u[:, start:start + size]
        povm[str(i)] = cols @ cols.conj().T
        start += size
    return povm


def random_strategy(profile: SpaceProfile, n_outcomes: int, seed: int) -> StrategyDescription:
    """Haar-random plan with maximal memory (dim Z_k = dim X1..k * Y1..k) and,
    if requested, a random projective measurement; deterministic per seed."""
    rng = np.random.default_rng(seed)
    xd, yd = profile.inputs.dims, profile.outputs.dims
    n = profile.turns
    mem = []
    acc = 1
    for k in range(n):
        acc *= xd[k] * yd[k]
        mem.append(acc)
    isos = []
    z_prev = 1
    for k in range(n):
        isos.append(_haar(rng, xd[k] * z_prev, yd[k] * mem[k]))
        z_prev = mem[k]
    measurement = None
    if n_outcomes > 0:
        if n == 0:
            raise DescriptionInvalidError("a 0-turn plan cannot measure")
        measurement = _random_projective(rng, mem[-1], n_outcomes)
    return StrategyDescription(profile, tuple(mem), tuple(isos), measurement)


def lifted_profile(profile: SpaceProfile) -> SpaceProfile:
    """The (n+1)-turn profile of a co-strategy viewed as a plan that talks
    first: inputs (1, Y1..Yn), outputs (X1..Xn, 1)."""
    taken = set(profile.inputs.labels) | set(profile.outputs.labels)
    lead = Space(_fresh_label("lead", taken), 1)
    taken.add(lead.label)
    tail = Space(_fresh_label("tail", taken), 1)
    ins = SpaceList((lead,) + profile.outputs.factors)
    outs = SpaceList(profile.inputs.factors + (tail,))
    return SpaceProfile(ins, outs)


def random_costrategy(profile: SpaceProfile, n_outcomes: int, seed: int) -> CoStrategyDescription:
    """Haar-random co-strategy, built as a random lifted plan and unpacked."""
    lifted = random_strategy(lifted_profile(profile), n_outcomes, seed)
    n = profile.turns
    u0 = lifted.isometries[0]  # column vector on X1 (x) W0
    rho0 = u0 @ u0.conj().T
    return CoStrategyDescription(
        profile,
        lifted.memory_dims,
        rho0,
        lifted.isometries[1:],
        lifted.measurement,
    )
