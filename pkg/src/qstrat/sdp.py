"""A small dense semidefinite-programming facility.

Problems are stated over named complex Hermitian blocks, all constrained PSD,
tied by linear equalities built from partial traces, identity insertions,
factor permutations, constant-kernel contractions and real linear
combinations, plus at most one semidefinite inequality (compiled away into a
named slack block).

The solver is a primal-dual path-following interior-point iteration with a
Mehrotra predictor-corrector.  Complex Hermitian blocks are realified through
the symmetric embedding H -> [[Re H, -Im H], [Im H, Re H]]; objective and
constraint coefficients are halved so that values are unchanged (the
embedding doubles inner products).  Infeasible start, adaptive step sizes,
and rank reduction of the scalar constraint system make the core robust at
desk scale; the engine is meant for problems whose total variable dimension
stays around 300 or below.

Problems can also be exported in SDPA sparse format (and parsed back) for
cross-checking against external solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg

from .errors import ModelError, ParseError
from .tensor import (
    HermOp,
    Space,
    SpaceList,
    hermitize,
    partial_trace,
    tensor_with_identity,
)

DEFAULT_GAP_TOL = 1e-7
DEFAULT_FEAS_TOL = 1e-7
DEFAULT_PSD_TOL = 1e-8
DEFAULT_MAX_ITER = 200

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible-suspected"
STATUS_MAX_ITER = "max-iterations"

SLACK_NAME = "_slack"


# ---------------------------------------------------------------------------
# realification and bases


def realify(h: np.ndarray) -> np.ndarray:
    """Symmetric embedding of a complex matrix into a real one of twice the
    side; Hermitian inputs land on symmetric outputs with every eigenvalue
    doubled in multiplicity."""
    h = np.asarray(h, dtype=complex)
    return np.block([[h.real, -h.imag], [h.imag, h.real]])


def unrealify(m: np.ndarray) -> np.ndarray:
    """Inverse of :func:`realify` on its image, projecting first onto that
    image (average of the matrix and its conjugation by the complex
    structure) so solver leakage is removed."""
    m = np.asarray(m, dtype=float)
    s = m.shape[0] // 2
    a = (m[:s, :s] + m[s:, s:]) / 2.0
    c = (m[s:, :s] - m[:s, s:]) / 2.0
    return hermitize(a + 1j * c)


def herm_basis(d: int):
    """Orthonormal basis of the real space of d x d Hermitian matrices."""
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        yield e
        for j in range(i + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[i, j] = s[j, i] = 1.0 / np.sqrt(2.0)
            yield s
            a = np.zeros((d, d), dtype=complex)
            a[i, j] = -1.0j / np.sqrt(2.0)
            a[j, i] = 1.0j / np.sqrt(2.0)
            yield a


def _svec_parts(s: int):
    iu = np.triu_indices(s)
    w = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
    return iu, w


def svec(m: np.ndarray) -> np.ndarray:
    iu, w = _svec_parts(m.shape[0])
    return m[iu] * w


def smat(v: np.ndarray, s: int) -> np.ndarray:
    iu, w = _svec_parts(s)
    m = np.zeros((s, s))
    m[iu] = v / w
    return m + m.T - np.diag(np.diag(m))


# ---------------------------------------------------------------------------
# the linear-map language


class _Prim:
    in_space: SpaceList
    out_space: SpaceList

    def apply(self, op: HermOp) -> HermOp:
        raise NotImplementedError

    def adjoint(self, op: HermOp) -> HermOp:
        raise NotImplementedError


class _PartialTrace(_Prim):
    def __init__(self, in_space: SpaceList, labels: Iterable[str]):
        self.labels = frozenset(labels)
        self.in_space = in_space
        self.out_space = in_space.drop(self.labels)

    def apply(self, op):
        return partial_trace(op, self.labels)

    def adjoint(self, op):
        out = op.relabeled(self.out_space)
        for i, factor in enumerate(self.in_space):
            if factor.label in self.labels:
                out = tensor_with_identity(out, factor, i)
        return out


class _TensorIdentity(_Prim):
    def __init__(self, in_space: SpaceList, space: Space, position: int):
        self.space = space
        self.position = position
        self.in_space = in_space
        self.out_space = in_space.insert(space, position)

    def apply(self, op):
        return tensor_with_identity(op, self.space, self.position)

    def adjoint(self, op):
        return partial_trace(op.relabeled(self.out_space), {self.space.label})


class _Permute(_Prim):
    def __init__(self, in_space: SpaceList, order: Sequence[str]):
        self.order = tuple(order)
        self.in_space = in_space
        self.out_space = in_space.permuted(self.order)

    def apply(self, op):
        return op.permuted(self.order)

    def adjoint(self, op):
        return op.relabeled(self.out_space).permuted(self.in_space.labels)


def _trace_axes_raw(m: np.ndarray, dims: Sequence[int], traced: Sequence[int]) -> np.ndarray:
    """Partial trace of a (possibly non-Hermitian) square matrix."""
    n = len(dims)
    t = m.reshape(tuple(dims) * 2)
    row_ids = list(range(n))
    col_ids = [n + i for i in range(n)]
    out_rows, out_cols = [], []
    for i in range(n):
        if i in traced:
            col_ids[i] = row_ids[i]
        else:
            out_rows.append(row_ids[i])
            out_cols.append(col_ids[i])
    res = np.einsum(t, row_ids + col_ids, out_rows + out_cols)
    d = int(np.prod([dims[i] for i in range(n) if i not in traced])) if n else 1
    return res.reshape(d, d)


class _Sandwich(_Prim):
    """X on a sub-list of the kernel's factors |-> tr_those((X (x) I) K).

    Hermitian in, Hermitian out, because the lifted operator acts only on the
    traced factors; the adjoint contracts the kernel from the other side.
    """

    def __init__(self, in_space: SpaceList, kernel: HermOp):
        self.kernel = kernel
        self.in_space = in_space
        klabels = kernel.space.labels
        missing = set(in_space.labels) - set(klabels)
        if missing:
            raise ModelError(f"kernel lacks factors {sorted(missing)}")
        self.var_positions = [i for i, lab in enumerate(klabels) if lab in set(in_space.labels)]
        self.rest_positions = [i for i, lab in enumerate(klabels) if lab not in set(in_space.labels)]
        self.out_space = kernel.space.drop(in_space.labels)

    def _lift(self, op: HermOp, positions: Sequence[int]) -> np.ndarray:
        """Matrix of op (x) I aligned to the kernel's factor order, with op
        occupying the kernel factors at ``positions`` (ascending)."""
        korder = self.kernel.space
        own_order = [korder.factors[i].label for i in positions]
        aligned = op.permuted(own_order) if list(op.space.labels) != own_order else op
        lifted = aligned
        for i, factor in enumerate(korder):
            if i not in positions:
                lifted = tensor_with_identity(lifted, factor, i)
        return lifted.relabeled(korder).matrix

    def apply(self, op):
        big = self._lift(op.relabeled(self.in_space), self.var_positions)
        prod = big @ self.kernel.matrix
        reduced = _trace_axes_raw(prod, self.kernel.space.dims, self.var_positions)
        return HermOp(self.out_space, hermitize(reduced))

    def adjoint(self, op):
        big = self._lift(op.relabeled(self.out_space), self.rest_positions)
        prod = big @ self.kernel.matrix
        reduced = _trace_axes_raw(prod, self.kernel.space.dims, self.rest_positions)
        # result carries the kernel's ordering of the variable factors
        kept = SpaceList(tuple(self.kernel.space.factors[i] for i in self.var_positions))
        out = HermOp(kept, hermitize(reduced))
        if kept.labels != self.in_space.labels:
            out = out.permuted(self.in_space.labels)
        return out.relabeled(self.in_space)


@dataclass(frozen=True)
class _Term:
    var: str
    coeff: float
    chain: tuple[_Prim, ...]
    var_space: SpaceList
    out_space: SpaceList


class LinMap:
    """A real-linear map from named Hermitian blocks to one Hermitian space,
    built by chaining primitives onto variable atoms and adding terms."""

    def __init__(self, terms: Sequence[_Term]):
        if not terms:
            raise ModelError("a linear map needs at least one term")
        out = terms[0].out_space
        for t in terms[1:]:
            if t.out_space.dims != out.dims:
                raise ModelError(
                    f"terms target different spaces: {t.out_space.dims} vs {out.dims}"
                )
        self.terms = tuple(terms)
        self.out_space = out

    @staticmethod
    def var(name: str, space: SpaceList) -> "LinMap":
        return LinMap((_Term(name, 1.0, (), space, space),))

    def _chained(self, prim_factory) -> "LinMap":
        new_terms = []
        for t in self.terms:
            prim = prim_factory(t.out_space)
            new_terms.append(_Term(t.var, t.coeff, t.chain + (prim,), t.var_space, prim.out_space))
        return LinMap(new_terms)

    def partial_trace(self, labels: Iterable[str]) -> "LinMap":
        labels = tuple(labels)
        return self._chained(lambda sp: _PartialTrace(sp, labels))

    def tensor_identity(self, space: Space, position: int) -> "LinMap":
        return self._chained(lambda sp: _TensorIdentity(sp, space, position))

    def permuted(self, order: Sequence[str]) -> "LinMap":
        return self._chained(lambda sp: _Permute(sp, order))

    def sandwich(self, kernel: HermOp) -> "LinMap":
        return self._chained(lambda sp: _Sandwich(sp, kernel))

    def scale(self, alpha: float) -> "LinMap":
        return LinMap([
            _Term(t.var, t.coeff * float(alpha), t.chain, t.var_space, t.out_space)
            for t in self.terms
        ])

    def __mul__(self, alpha: float) -> "LinMap":
        return self.scale(alpha)

    __rmul__ = __mul__

    def __neg__(self) -> "LinMap":
        return self.scale(-1.0)

    def __add__(self, other: "LinMap") -> "LinMap":
        if self.out_space.labels != other.out_space.labels or \
                self.out_space.dims != other.out_space.dims:
            raise ModelError("cannot add maps with different target spaces")
        return LinMap(self.terms + other.terms)

    def __sub__(self, other: "LinMap") -> "LinMap":
        return self + (-other)

    @property
    def var_names(self) -> tuple[str, ...]:
        seen = []
        for t in self.terms:
            if t.var not in seen:
                seen.append(t.var)
        return tuple(seen)

    def apply(self, assignment: Mapping[str, HermOp]) -> HermOp:
        acc = np.zeros((self.out_space.dim, self.out_space.dim), dtype=complex)
        for t in self.terms:
            if t.var not in assignment:
                raise ModelError(f"no value given for block {t.var!r}")
            cur = assignment[t.var].relabeled(t.var_space)
            for prim in t.chain:
                cur = prim.apply(cur)
            acc = acc + t.coeff * cur.relabeled(self.out_space).matrix
        return HermOp(self.out_space, acc)

    def adjoint_apply(self, var: str, f: HermOp) -> HermOp | None:
        """Adjoint of this map's ``var`` component applied to a Hermitian f."""
        acc = None
        for t in self.terms:
            if t.var != var:
                continue
            cur = f.relabeled(t.out_space)
            for prim in reversed(t.chain):
                cur = prim.adjoint(cur)
            piece = t.coeff * cur.relabeled(t.var_space).matrix
            acc = piece if acc is None else acc + piece
        if acc is None:
            return None
        space = next(t.var_space for t in self.terms if t.var == var)
        return HermOp(space, acc)


# ---------------------------------------------------------------------------
# problems and solutions


@dataclass
class SdpProblem:
    """min or max of sum_j <C_j, X_j> over PSD Hermitian blocks X_j subject
    to linear equalities and at most one semidefinite inequality expr >= const
    (turned into an equality with a PSD slack block)."""

    sense: str = "min"
    variables: dict[str, SpaceList] = field(default_factory=dict)
    objective: dict[str, HermOp] = field(default_factory=dict)
    equalities: list[tuple[LinMap, HermOp]] = field(default_factory=list)
    psd_inequality: tuple[LinMap, HermOp] | None = None

    def add_var(self, name: str, space: SpaceList) -> LinMap:
        if self.sense not in ("min", "max"):
            raise ModelError(f"sense must be 'min' or 'max', got {self.sense!r}")
        if name in self.variables:
            raise ModelError(f"duplicate variable {name!r}")
        if name == SLACK_NAME:
            raise ModelError(f"{SLACK_NAME!r} is reserved for the inequality slack")
        self.variables[name] = space
        return LinMap.var(name, space)

    def set_objective(self, name: str, c: HermOp):
        if name not in self.variables:
            raise ModelError(f"unknown variable {name!r}")
        if c.space.dims != self.variables[name].dims:
            raise ModelError(f"objective block for {name!r} has wrong dims")
        self.objective[name] = c

    def add_equality(self, expr: LinMap, const: HermOp):
        self._check_expr(expr, const)
        self.equalities.append((expr, const))

    def set_psd_inequality(self, expr: LinMap, const: HermOp):
        if self.psd_inequality is not None:
            raise ModelError("only one semidefinite inequality is supported")
        self._check_expr(expr, const)
        self.psd_inequality = (expr, const)

    def _check_expr(self, expr: LinMap, const: HermOp):
        for name in expr.var_names:
            if name not in self.variables:
                raise ModelError(f"unknown variable {name!r} in constraint")
        if expr.out_space.dims != const.space.dims:
            raise ModelError(
                f"constraint sides disagree: {expr.out_space.dims} vs {const.space.dims}"
            )


@dataclass(frozen=True)
class IterateStat:
    iteration: int
    primal_objective: float
    dual_objective: float
    gap: float
    primal_residual: float
    dual_residual: float


@dataclass(frozen=True)
class SdpSolution:
    status: str
    objective_value: float
    blocks: dict[str, HermOp]
    duality_gap: float
    max_constraint_residual: float
    iterations: int
    trace_log: tuple[IterateStat, ...] = ()

    def to_json_dict(self) -> dict:
        return {
            "status": self.status,
            "objective_value": self.objective_value,
            "duality_gap": self.duality_gap,
            "max_constraint_residual": self.max_constraint_residual,
            "iterations": self.iterations,
        }


# ---------------------------------------------------------------------------
# compilation to a real block SDP


@dataclass
class RealSdp:
    """min sum_j <C_j, X_j> with <A_ij, X_j> summed over blocks equal b_i and
    every real symmetric block X_j PSD."""

    block_names: list[str]
    block_sides: list[int]
    c_blocks: list[np.ndarray]
    a_blocks: list[np.ndarray]  # per block: (m, side, side)
    b: np.ndarray

    @property
    def m(self) -> int:
        return len(self.b)


def _compile(problem: SdpProblem) -> tuple[RealSdp, list[tuple[LinMap, HermOp]], dict[str, SpaceList]]:
    if problem.sense not in ("min", "max"):
        raise ModelError(f"sense must be 'min' or 'max', got {problem.sense!r}")
    variables = dict(problem.variables)
    equalities = list(problem.equalities)
    if problem.psd_inequality is not None:
        expr, const = problem.psd_inequality
        slack_space = expr.out_space
        variables[SLACK_NAME] = slack_space
        equalities.append((expr - LinMap.var(SLACK_NAME, slack_space), const))

    names = sorted(variables)
    sides = [2 * variables[n].dim for n in names]
    sign = 1.0 if problem.sense == "min" else -1.0
    c_blocks = []
    for n in names:
        c = problem.objective.get(n)
        if c is None:
            c_blocks.append(np.zeros((2 * variables[n].dim,) * 2))
        else:
            c_blocks.append(0.5 * sign * realify(c.matrix))

    rows_per_block = {n: [] for n in names}
    rhs = []
    for expr, const in equalities:
        t = expr.out_space.dim
        per_var = {}
        for f in herm_basis(t):
            fop = HermOp(expr.out_space, f)
            for n in names:
                g = expr.adjoint_apply(n, fop)
                per_var.setdefault(n, []).append(
                    np.zeros((2 * variables[n].dim,) * 2) if g is None
                    else 0.5 * realify(g.matrix)
                )
            rhs.append(float(np.trace(f.conj().T @ const.matrix).real))
        for n in names:
            rows_per_block[n].extend(per_var[n])

    m = len(rhs)
    a_blocks = []
    for n, side in zip(names, sides):
        if m:
            a_blocks.append(np.stack(rows_per_block[n]) if rows_per_block[n]
                            else np.zeros((m, side, side)))
        else:
            a_blocks.append(np.zeros((0, side, side)))
    real = RealSdp(names, sides, c_blocks, a_blocks, np.array(rhs, dtype=float))
    return real, equalities, variables


# ---------------------------------------------------------------------------
# the interior-point core (real symmetric blocks)


def _chol(m: np.ndarray):
    try:
        return scipy.linalg.cholesky(m, lower=True)
    except scipy.linalg.LinAlgError:
        jitter = 1e-14 * max(1.0, float(np.trace(m)) / m.shape[0])
        return scipy.linalg.cholesky(m + jitter * np.eye(m.shape[0]), lower=True)


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest alpha with x + alpha*dx staying PSD (1.0 if unconstrained)."""
    l = _chol(x)
    li = scipy.linalg.solve_triangular(l, np.eye(l.shape[0]), lower=True)
    w = np.linalg.eigvalsh((li @ dx @ li.T + (li @ dx @ li.T).T) / 2.0)
    lo = float(w[0])
    if lo >= -1e-14:
        return 1.0
    return min(1.0, -1.0 / lo)


@dataclass(frozen=True)
class RealSolution:
    status: str
    pobj: float
    dobj: float
    gap: float
    feas_p: float
    feas_d: float
    x_blocks: list[np.ndarray]
    s_blocks: list[np.ndarray]
    y: np.ndarray
    iterations: int
    trace_log: tuple[IterateStat, ...]


def solve_real(real: RealSdp, gap_tol: float = DEFAULT_GAP_TOL,
               feas_tol: float = DEFAULT_FEAS_TOL,
               max_iter: int = DEFAULT_MAX_ITER) -> RealSolution:
    """Path-following predictor-corrector on a real block SDP."""
    sides = real.block_sides
    nblocks = len(sides)
    ntot = sum(sides)
    ks = [s * (s + 1) // 2 for s in sides]

    # flatten the constraint system and drop dependent rows
    m0 = real.m
    if m0:
        asv = np.concatenate(
            [np.stack([svec(real.a_blocks[j][i]) for i in range(m0)]) for j in range(nblocks)],
            axis=1,
        ) if nblocks else np.zeros((m0, 0))
        u, sig, vt = np.linalg.svd(asv, full_matrices=False)
        cut = (sig > 1e-11 * max(1.0, sig[0] if sig.size else 0.0))
        r = int(np.sum(cut))
        resid_b = real.b - u[:, :r] @ (u[:, :r].T @ real.b)
        if np.max(np.abs(resid_b)) > feas_tol * (1.0 + np.max(np.abs(real.b))):
            return RealSolution(STATUS_INFEASIBLE, 0.0, 0.0, np.inf, np.inf, np.inf,
                                [np.eye(s) for s in sides], [np.eye(s) for s in sides],
                                np.zeros(r), 0, ())
        b = (u[:, :r].T @ real.b) / sig[:r]
        red_rows = vt[:r]
        a_blocks = []
        offset = 0
        for j, s in enumerate(sides):
            block = np.stack([smat(red_rows[i, offset:offset + ks[j]], s) for i in range(r)]) \
                if r else np.zeros((0, s, s))
            a_blocks.append(block)
            offset += ks[j]
        m = r
    else:
        b = np.zeros(0)
        a_blocks = [np.zeros((0, s, s)) for s in sides]
        m = 0

    c_blocks = [(c + c.T) / 2.0 for c in real.c_blocks]
    asv_red = [a.reshape(m, s * s) for a, s in zip(a_blocks, sides)]

    eta_p = max(1.0, 2.0 * (np.max(np.abs(b)) if m else 0.0))
    eta_d = max(1.0, 2.0 * max((np.max(np.abs(c)) * c.shape[0] for c in c_blocks), default=1.0))
    xs = [eta_p * np.eye(s) for s in sides]
    ss = [eta_d * np.eye(s) for s in sides]
    y = np.zeros(m)

    log = []
    status = STATUS_MAX_ITER
    iters = 0

    def objective_pair():
        pobj = sum(float(np.tensordot(c, x)) for c, x in zip(c_blocks, xs))
        dobj = float(b @ y)
        return pobj, dobj

    def residuals():
        rp = b - sum(a.reshape(m, -1) @ x.reshape(-1) for a, x in zip(a_blocks, xs)) \
            if m else np.zeros(0)
        rd = [c - s - np.einsum("i,iab->ab", y, a) if m else c - s
              for c, s, a in zip(c_blocks, ss, a_blocks)]
        return rp, rd

    for it in range(1, max_iter + 1):
        iters = it
        rp, rd = residuals()
        pobj, dobj = objective_pair()
        gap = abs(pobj - dobj)
        feas_p = float(np.max(np.abs(rp))) if m else 0.0
        feas_d = max(float(np.max(np.abs(rdj))) for rdj in rd)
        log.append(IterateStat(it - 1, pobj, dobj, gap, feas_p, feas_d))
        if gap <= gap_tol and feas_p <= feas_tol and feas_d <= feas_tol:
            status = STATUS_OPTIMAL
            break
        if max(np.max(np.abs(x)) for x in xs) > 1e12 or (m and np.max(np.abs(y)) > 1e12):
            status = STATUS_INFEASIBLE
            break

        mu = sum(float(np.tensordot(x, s)) for x, s in zip(xs, ss)) / ntot
        try:
            sinvs = []
            for s_mat in ss:
                l = _chol(s_mat)
                li = scipy.linalg.solve_triangular(l, np.eye(l.shape[0]), lower=True)
                sinvs.append(li.T @ li)

            # w_blocks[j][i] = H(X A_i S^-1): the Schur rows in matrix form
            w_blocks = []
            for x, a, sinv in zip(xs, a_blocks, sinvs):
                if m:
                    v = np.einsum("ab,ibc,cd->iad", x, a, sinv, optimize=True)
                    w_blocks.append((v + v.transpose(0, 2, 1)) / 2.0)
                else:
                    w_blocks.append(np.zeros((0,) + x.shape))
            if m:
                schur = np.zeros((m, m))
                for a, w in zip(asv_red, w_blocks):
                    schur += a @ w.reshape(m, -1).T
                schur = (schur + schur.T) / 2.0
                schur_l = _chol(schur + 1e-13 * np.trace(schur) / m * np.eye(m))

            def newton(g_blocks):
                """Solve for (dy, dx, ds) given the complementarity target parts."""
                if m:
                    rhsy = rp.copy()
                    for a, g, rdj, x, sinv in zip(a_blocks, g_blocks, rd, xs, sinvs):
                        hxr = x @ rdj @ sinv
                        hxr = (hxr + hxr.T) / 2.0
                        rhsy -= np.einsum("iab,ab->i", a, g - hxr)
                    dy = scipy.linalg.cho_solve((schur_l, True), rhsy)
                else:
                    dy = np.zeros(0)
                dxs, dss = [], []
                for a, g, rdj, x, sinv, w in zip(a_blocks, g_blocks, rd, xs, sinvs, w_blocks):
                    ds = rdj - (np.einsum("i,iab->ab", dy, a) if m else 0.0)
                    hxr = x @ rdj @ sinv
                    hxr = (hxr + hxr.T) / 2.0
                    dx = g - hxr + (np.einsum("i,iab->ab", dy, w) if m else 0.0)
                    dxs.append((dx + dx.T) / 2.0)
                    dss.append((ds + ds.T) / 2.0)
                return dy, dxs, dss

            # predictor: target complementarity zero
            g_aff = [-x for x in xs]
            dy_a, dx_a, ds_a = newton(g_aff)
            ap = min(_max_step(x, dx) for x, dx in zip(xs, dx_a))
            ad = min(_max_step(s, ds) for s, ds in zip(ss, ds_a))
            mu_aff = sum(
                float(np.tensordot(x + ap * dx, s + ad * ds))
                for x, dx, s, ds in zip(xs, dx_a, ss, ds_a)
            ) / ntot
            sigma = min(0.99, max((mu_aff / mu) ** 3 if mu > 0 else 0.0, 1e-10))

            # corrector with second-order term
            g_corr = []
            for x, s, sinv, dx, ds in zip(xs, ss, sinvs, dx_a, ds_a):
                second = dx @ ds @ sinv
                second = (second + second.T) / 2.0
                g_corr.append(sigma * mu * sinv - x - second)
            dy, dxs, dss = newton(g_corr)

            ap = min(_max_step(x, dx) for x, dx in zip(xs, dxs))
            ad = min(_max_step(s, ds) for s, ds in zip(ss, dss))
            tau = 0.9 + 0.09 * min(ap, ad)  # adaptive fraction-to-boundary
            ap = min(1.0, tau * ap)
            ad = min(1.0, tau * ad)
            xs = [(x + ap * dx + (x + ap * dx).T) / 2.0 for x, dx in zip(xs, dxs)]
            ss = [(s + ad * ds + (s + ad * ds).T) / 2.0 for s, ds in zip(ss, dss)]
            y = y + ad * dy
        except (scipy.linalg.LinAlgError, np.linalg.LinAlgError, FloatingPointError):
            # numerical breakdown: stop with an honest non-optimal status
            status = STATUS_MAX_ITER
            break

    rp, rd = residuals()
    pobj, dobj = objective_pair()
    gap = abs(pobj - dobj)
    feas_p = float(np.max(np.abs(rp))) if m else 0.0
    feas_d = max(float(np.max(np.abs(rdj))) for rdj in rd)
    if status == STATUS_OPTIMAL and not (gap <= gap_tol and feas_p <= feas_tol):
        status = STATUS_MAX_ITER
    return RealSolution(status, pobj, dobj, gap, feas_p, feas_d, xs, ss, y, iters, tuple(log))


# ---------------------------------------------------------------------------
# public solve


def solve(problem: SdpProblem, gap_tol: float = DEFAULT_GAP_TOL,
          feas_tol: float = DEFAULT_FEAS_TOL, max_iter: int = DEFAULT_MAX_ITER,
          psd_tol: float = DEFAULT_PSD_TOL) -> SdpSolution:
    """Solve the problem; ``optimal`` is only reported when the duality gap,
    constraint residuals and block PSD floors all meet their tolerances."""
    real, equalities, variables = _compile(problem)
    res = solve_real(real, gap_tol=gap_tol, feas_tol=feas_tol, max_iter=max_iter)

    sign = 1.0 if problem.sense == "min" else -1.0
    blocks = {}
    for name, x in zip(real.block_names, res.x_blocks):
        blocks[name] = HermOp(variables[name], unrealify(x))

    assign = dict(blocks)
    max_resid = 0.0
    for expr, const in equalities:
        gap_mat = expr.apply(assign).matrix - const.matrix
        max_resid = max(max_resid, float(np.max(np.abs(gap_mat))))

    status = res.status
    if status == STATUS_OPTIMAL:
        psd_ok = all(
            np.linalg.eigvalsh(op.matrix)[0] >= -psd_tol for op in blocks.values()
        )
        if not (res.gap <= gap_tol and max_resid <= feas_tol and psd_ok):
            status = STATUS_MAX_ITER

    public_blocks = {n: op for n, op in blocks.items() if n != SLACK_NAME}
    return SdpSolution(
        status=status,
        objective_value=sign * res.pobj,
        blocks=public_blocks,
        duality_gap=res.gap,
        max_constraint_residual=max_resid,
        iterations=res.iterations,
        trace_log=res.trace_log,
    )


# ---------------------------------------------------------------------------
# SDPA sparse export / parse


def _fmt(v: float) -> str:
    if v == 0.0:
        v = 0.0  # normalize -0
    return f"{v:.17g}"


def export_sdpa(problem: SdpProblem) -> str:
    """SDPA sparse text for the compiled (realified) problem.

    The file encodes the equality-form problem on SDPA's dual side: matrices
    F_1..F_m are the scalar constraint coefficients, the c-vector is the
    right-hand side, and F_0 is the negated objective, so the file's optimum
    equals the negated optimum of this problem.  Ordering is deterministic:
    blocks sorted by variable name, entries row-major upper-triangular.
    """
    real, _, _ = _compile(problem)
    if real.m == 0:
        raise ModelError("cannot export a problem with no scalar constraints")
    lines = []
    lines.append('"qstrat sdpa export: blocks ' +
                 ",".join(f"{n}:{s}" for n, s in zip(real.block_names, real.block_sides)) + '"')
    lines.append(str(real.m))
    lines.append(str(len(real.block_sides)))
    lines.append(" ".join(str(s) for s in real.block_sides))
    lines.append(" ".join(_fmt(v) for v in real.b))

    def emit(matno: int, blkno: int, mat: np.ndarray):
        s = mat.shape[0]
        for i in range(s):
            for j in range(i, s):
                v = mat[i, j]
                if v != 0.0:
                    lines.append(f"{matno} {blkno} {i + 1} {j + 1} {_fmt(float(v))}")

    for blk, c in enumerate(real.c_blocks):
        emit(0, blk + 1, -c)
    for i in range(real.m):
        for blk, a in enumerate(real.a_blocks):
            emit(i + 1, blk + 1, a[i])
    return "\n".join(lines) + "\n"


def parse_sdpa(text: str) -> RealSdp:
    """Parse the subset of SDPA sparse format written by :func:`export_sdpa`
    (dense blocks, optional leading comment naming the blocks)."""
    lines = [ln.strip() for ln in text.splitlines()]
    block_names = None
    idx = 0
    header = []
    while idx < len(lines) and len(header) < 4:
        ln = lines[idx]
        idx += 1
        if not ln:
            continue
        if ln.startswith('"') or ln.startswith("*"):
            if "blocks " in ln:
                names_part = ln.split("blocks ", 1)[1].rstrip('"')
                block_names = [p.split(":")[0] for p in names_part.split(",") if p]
            continue
        header.append(ln)
    if len(header) < 4:
        raise ParseError("truncated SDPA header")
    try:
        m = int(header[0])
        nblock = int(header[1])
        sides = [abs(int(tok)) for tok in header[2].replace(",", " ").split()]
        b = np.array([float(tok) for tok in header[3].replace(",", " ").split()])
    except ValueError as exc:
        raise ParseError(f"bad SDPA header: {exc}") from None
    if len(sides) != nblock:
        raise ParseError(f"expected {nblock} block sizes, found {len(sides)}")
    if len(b) != m:
        raise ParseError(f"expected {m} rhs entries, found {len(b)}")
    if block_names is None or len(block_names) != nblock:
        block_names = [f"block{k}" for k in range(nblock)]

    c_blocks = [np.zeros((s, s)) for s in sides]
    a_blocks = [np.zeros((m, s, s)) for s in sides]
    for ln in lines[idx:]:
        if not ln or ln.startswith('"') or ln.startswith("*"):
            continue
        toks = ln.replace(",", " ").split()
        if len(toks) != 5:
            raise ParseError(f"bad SDPA entry line: {ln!r}")
        k, blk, i, j = (int(t) for t in toks[:4])
        v = float(toks[4])
        if not 1 <= blk <= nblock:
            raise ParseError(f"block index {blk} out of range")
        s = sides[blk - 1]
        if not (1 <= i <= s and 1 <= j <= s):
            raise ParseError(f"entry indices out of range in {ln!r}")
        if k == 0:
            c_blocks[blk - 1][i - 1, j - 1] = -v
            c_blocks[blk - 1][j - 1, i - 1] = -v
        elif 1 <= k <= m:
            a_blocks[blk - 1][k - 1, i - 1, j - 1] = v
            a_blocks[blk - 1][k - 1, j - 1, i - 1] = v
        else:
            raise ParseError(f"matrix index {k} out of range")
    return RealSdp(list(block_names), sides, c_blocks, a_blocks, b)
