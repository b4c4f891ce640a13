import numpy as np
import pytest
from numpy.testing import assert_allclose

from qstrat.errors import (
    ContractViolationError,
    InsufficientEnvironmentError,
    LabelNotFoundError,
    NoIsometryError,
)
from qstrat.tensor import (
    HermOp,
    Space,
    SpaceList,
    haar_isometry,
    identity_op,
    is_psd,
    kron,
    partial_trace,
    permutation_matrix,
    permute_operator,
    purify,
    scalar_op,
    tensor_with_identity,
    unvec,
    vec,
)


def rand_matrix(rng, rows, cols):
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def rand_herm(rng, d):
    m = rand_matrix(rng, d, d)
    return (m + m.conj().T) / 2


class TestKron:
    def test_identity(self):
        assert_allclose(kron(np.eye(2), np.eye(2)), np.eye(4))

    def test_diagonal_convention(self):
        a = np.diag([1.0, 2.0])
        b = np.diag([3.0, 4.0])
        assert_allclose(kron(a, b), np.diag([3.0, 4.0, 6.0, 8.0]))

    def test_mixed_product(self):
        rng = np.random.default_rng(7)
        a, b, c, d = (rand_matrix(rng, 2, 2) for _ in range(4))
        assert_allclose(kron(a, b) @ kron(c, d), kron(a @ c, b @ d), atol=1e-12)


class TestVec:
    def test_basis_case(self):
        e11 = np.zeros((2, 2))
        e11[0, 0] = 1.0
        assert_allclose(vec(e11).ravel(), [1, 0, 0, 0])

    def test_vec_of_product(self):
        # (A (x) B) vec(X) = vec(A X B^T)
        rng = np.random.default_rng(11)
        for _ in range(20):
            a, b, x = (rand_matrix(rng, 2, 2) for _ in range(3))
            assert_allclose(kron(a, b) @ vec(x), vec(a @ x @ b.T), atol=1e-12)

    def test_sandwiched_identity(self):
        # vec(I)* (A (x) B) vec(I) = tr(A B^T)
        rng = np.random.default_rng(13)
        for _ in range(20):
            a, b = rand_matrix(rng, 2, 2), rand_matrix(rng, 2, 2)
            w = vec(np.eye(2))
            lhs = (w.conj().T @ kron(a, b) @ w)[0, 0]
            assert_allclose(lhs, np.trace(a @ b.T), atol=1e-12)

    def test_unvec_round_trip(self):
        rng = np.random.default_rng(17)
        a = rand_matrix(rng, 3, 2)
        assert_allclose(unvec(vec(a), 3, 2), a)


def op_on(labels_dims, matrix):
    return HermOp(SpaceList(tuple(Space(l, d) for l, d in labels_dims)), matrix)


class TestPartialTrace:
    def test_gram_trace_over_inputs(self):
        # tr_X(vec(A) vec(A)*) = A A* for A : C^2 -> C^3
        rng = np.random.default_rng(19)
        a = rand_matrix(rng, 3, 2)
        gram = vec(a) @ vec(a).conj().T
        op = op_on([("Y", 3), ("X", 2)], gram)
        assert_allclose(partial_trace(op, {"X"}).matrix, a @ a.conj().T, atol=1e-12)

    def test_gram_trace_over_outputs(self):
        # tr_Y(vec(A) vec(A)*) = (A* A)^T
        rng = np.random.default_rng(23)
        a = rand_matrix(rng, 3, 2)
        gram = vec(a) @ vec(a).conj().T
        op = op_on([("Y", 3), ("X", 2)], gram)
        assert_allclose(partial_trace(op, {"Y"}).matrix, (a.conj().T @ a).T, atol=1e-12)

    def test_full_trace_of_density(self):
        rng = np.random.default_rng(29)
        m = rand_matrix(rng, 6, 6)
        rho = m @ m.conj().T
        rho /= np.trace(rho).real
        op = op_on([("A", 2), ("B", 3)], rho)
        out = partial_trace(op, {"A", "B"})
        assert out.space.dim == 1
        assert_allclose(out.matrix, [[1.0]], atol=1e-12)

    def test_middle_factor(self):
        rng = np.random.default_rng(31)
        parts = [rand_herm(rng, d) for d in (2, 3, 2)]
        full = kron(kron(parts[0], parts[1]), parts[2])
        op = op_on([("A", 2), ("B", 3), ("C", 2)], full)
        want = kron(parts[0], parts[2]) * np.trace(parts[1])
        assert_allclose(partial_trace(op, {"B"}).matrix, want, atol=1e-11)

    def test_unknown_label(self):
        op = op_on([("A", 2)], np.eye(2))
        with pytest.raises(LabelNotFoundError):
            partial_trace(op, {"nope"})

    def test_trace_preserving_and_linear(self):
        rng = np.random.default_rng(37)
        h1 = op_on([("A", 2), ("B", 2)], rand_herm(rng, 4))
        h2 = op_on([("A", 2), ("B", 2)], rand_herm(rng, 4))
        t1 = partial_trace(h1, {"B"})
        t2 = partial_trace(h2, {"B"})
        assert_allclose(t1.trace() + t2.trace(), h1.trace() + h2.trace(), atol=1e-11)
        combo = op_on([("A", 2), ("B", 2)], 0.3 * h1.matrix + 0.7 * h2.matrix)
        assert_allclose(partial_trace(combo, {"B"}).matrix,
                        0.3 * t1.matrix + 0.7 * t2.matrix, atol=1e-11)


class TestTensorWithIdentity:
    def test_scalar_to_identity(self):
        out = tensor_with_identity(scalar_op(1.0), Space("X", 3), 0)
        assert_allclose(out.matrix, np.eye(3))
        assert out.space.labels == ("X",)

    def test_insert_then_trace_scales(self):
        rng = np.random.default_rng(41)
        op = op_on([("A", 2)], rand_herm(rng, 2))
        grown = tensor_with_identity(op, Space("B", 3), 1)
        back = partial_trace(grown, {"B"})
        assert_allclose(back.matrix, 3.0 * op.matrix, atol=1e-11)

    def test_front_vs_back_related_by_permutation(self):
        rng = np.random.default_rng(43)
        op = op_on([("A", 2)], rand_herm(rng, 2))
        front = tensor_with_identity(op, Space("B", 3), 0)
        back = tensor_with_identity(op, Space("B", 3), 1)
        p = permutation_matrix((3, 2), (1, 0))
        assert_allclose(p @ front.matrix @ p.T, back.matrix, atol=1e-12)

    def test_middle_insert_order(self):
        rng = np.random.default_rng(47)
        a, c = rand_herm(rng, 2), rand_herm(rng, 2)
        op = op_on([("A", 2), ("C", 2)], kron(a, c))
        grown = tensor_with_identity(op, Space("B", 3), 1)
        assert grown.space.labels == ("A", "B", "C")
        assert_allclose(grown.matrix, kron(kron(a, np.eye(3)), c), atol=1e-12)


class TestPermutations:
    def test_permute_operator_matches_matrix_conjugation(self):
        rng = np.random.default_rng(53)
        dims = (2, 3, 2)
        m = rand_herm(rng, 12)
        perm = (2, 0, 1)
        p = permutation_matrix(dims, perm)
        assert_allclose(permute_operator(m, dims, perm), p @ m @ p.T, atol=1e-12)

    def test_hermop_permuted_round_trip(self):
        rng = np.random.default_rng(59)
        op = op_on([("A", 2), ("B", 3)], rand_herm(rng, 6))
        back = op.permuted(["B", "A"]).permuted(["A", "B"])
        assert_allclose(back.matrix, op.matrix, atol=1e-14)


class TestPsd:
    def test_identity(self):
        assert is_psd(identity_op(SpaceList.of(Space("A", 4))))

    def test_small_negative_eigenvalue(self):
        op = op_on([("A", 2)], np.diag([1.0, -1e-3]))
        assert not is_psd(op, tol=1e-8)

    def test_gram_is_psd(self):
        rng = np.random.default_rng(61)
        a = rand_matrix(rng, 3, 2)
        gram = vec(a) @ vec(a).conj().T
        assert is_psd(op_on([("Y", 3), ("X", 2)], gram))

    def test_monotone_in_tol(self):
        rng = np.random.default_rng(67)
        for _ in range(10):
            h = rand_herm(rng, 3)
            op = op_on([("A", 3)], h)
            for small, big in [(1e-10, 1e-6), (1e-6, 1e-2)]:
                if is_psd(op, tol=small):
                    assert is_psd(op, tol=big)

    def test_non_hermitian_rejected_at_construction(self):
        with pytest.raises(ContractViolationError):
            op_on([("A", 2)], np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestPurify:
    def test_reconstruction(self):
        op = op_on([("A", 2)], np.diag([0.5, 0.5]))
        b = purify(op, 2)
        assert_allclose(b @ b.conj().T, op.matrix, atol=1e-12)

    def test_pure_state_needs_no_environment(self):
        u = np.array([[1.0], [1.0j]]) / np.sqrt(2)
        op = op_on([("A", 2)], u @ u.conj().T)
        b = purify(op, 1)
        assert_allclose(b @ b.conj().T, op.matrix, atol=1e-12)

    def test_rank_bound(self):
        op = op_on([("A", 2)], np.diag([0.5, 0.5]))
        with pytest.raises(InsufficientEnvironmentError):
            purify(op, 1)

    def test_random_round_trip(self):
        rng = np.random.default_rng(71)
        for d in (2, 3, 4):
            m = rand_matrix(rng, d, d)
            op = op_on([("A", d)], m @ m.conj().T)
            b = purify(op, d + 2)
            assert_allclose(b @ b.conj().T, op.matrix, atol=1e-9)


class TestHaarIsometry:
    def test_square_case_unitary(self):
        v = haar_isometry(2, 2, seed=0)
        assert_allclose(v.conj().T @ v, np.eye(2), atol=1e-12)

    def test_tall_case(self):
        v = haar_isometry(2, 6, seed=1)
        assert v.shape == (6, 2)
        assert_allclose(v.conj().T @ v, np.eye(2), atol=1e-12)

    def test_deterministic(self):
        assert_allclose(haar_isometry(3, 5, seed=9), haar_isometry(3, 5, seed=9))

    def test_impossible_shape(self):
        with pytest.raises(NoIsometryError):
            haar_isometry(4, 3, seed=0)


class TestVecIdentitySweep:
    def test_all_four_identities_randomized(self):
        # dims 2..4, all four vec-calculus identities, max error 1e-10
        rng = np.random.default_rng(73)
        for _ in range(100):
            dx, dy, dz = rng.integers(2, 5, size=3)
            a = rand_matrix(rng, dy, dx)
            b = rand_matrix(rng, dy, dx)
            x = rand_matrix(rng, dx, dx)
            c = rand_matrix(rng, dy, dy)
            # 1: (C (x) X) vec(M) = vec(C M X^T) for M : dx -> dy
            m = rand_matrix(rng, dy, dx)
            assert np.max(np.abs(kron(c, x) @ vec(m) - vec(c @ m @ x.T))) < 1e-10
            # 2: both Gram partial traces
            gram = vec(a) @ vec(b).conj().T
            go = HermOp(SpaceList.of(Space("Y", int(dy)), Space("X", int(dx))),
                        (gram + gram.conj().T) / 2)
            sym_ab = (a @ b.conj().T + b @ a.conj().T) / 2
            assert np.max(np.abs(partial_trace(go, {"X"}).matrix - sym_ab)) < 1e-10
            # 3: sandwiched identity
            w = vec(np.eye(dx))
            g, h = rand_matrix(rng, dx, dx), rand_matrix(rng, dx, dx)
            assert abs((w.conj().T @ kron(g, h) @ w)[0, 0] - np.trace(g @ h.T)) < 1e-10
            # 4: J(tr_Z(A . A*)) = tr_Z(vec(A) vec(A)*)
            v = rand_matrix(rng, dy * dz, dx)
            q, _ = np.linalg.qr(v)  # isometry dx -> dy*dz when dy*dz >= dx
            if q.shape[1] < dx:
                continue
            choi = np.zeros((dy * dx, dy * dx), dtype=complex)
            for i in range(dx):
                for j in range(dx):
                    eij = np.zeros((dx, dx), dtype=complex)
                    eij[i, j] = 1.0
                    out = q @ eij @ q.conj().T
                    out = out.reshape(dy, dz, dy, dz)
                    phi = np.einsum("azbz->ab", out)
                    choi += kron(phi, eij)
            gv = vec(q) @ vec(q).conj().T
            go = HermOp(
                SpaceList.of(Space("Y", int(dy)), Space("Z", int(dz)), Space("X", int(dx))),
                gv,
            )
            assert np.max(np.abs(partial_trace(go, {"Z"}).matrix - choi)) < 1e-10
