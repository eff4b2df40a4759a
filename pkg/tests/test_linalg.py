import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctcq import linalg as la
from ctcq.errors import DimensionMismatchError, NotADensityError, UnphysicalBlochVectorError

seeds = st.integers(min_value=0, max_value=2**32 - 1)

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


def kron_by_index(a, b):
    n, m = a.shape[0], b.shape[0]
    out = np.zeros((n * m, n * m), dtype=complex)
    for i, j, k, l in product(range(n), range(n), range(m), range(m)):
        out[i * m + k, j * m + l] = a[i, j] * b[k, l]
    return out


def ptrace_by_loops(m, dims, keep):
    # brute-force sum over traced multi-indices
    n = len(dims)
    kept = [dims[i] for i in keep]
    out = np.zeros((math.prod(kept), math.prod(kept)), dtype=complex)
    t = m.reshape(dims + dims)
    for row in product(*[range(d) for d in kept]):
        for col in product(*[range(d) for d in kept]):
            total = 0
            for traced in product(*[range(dims[i]) for i in range(n) if i not in keep]):
                ri, ci, it = list(row), list(col), iter(traced)
                full_r, full_c = [], []
                for i in range(n):
                    if i in keep:
                        full_r.append(ri.pop(0))
                        full_c.append(ci.pop(0))
                    else:
                        v = next(it)
                        full_r.append(v)
                        full_c.append(v)
                total += t[tuple(full_r + full_c)]
            r_idx = np.ravel_multi_index(row, kept) if kept else 0
            c_idx = np.ravel_multi_index(col, kept) if kept else 0
            out[r_idx, c_idx] = total
    return out


def test_kron_identity():
    out = la.kron(la.identity(2), la.identity(2))
    assert out.dims == (2, 2)
    assert np.abs(out.data - np.eye(4)).max() == 0


def test_kron_entries_match_index_formula():
    out = la.kron(la.Z, la.X)
    assert out.data[0, 1] == 1
    assert out.data[2, 3] == -1
    assert np.abs(out.data - kron_by_index(la.Z, la.X)).max() == 0


def test_kron_basis_projectors():
    p0 = la.projector(la.ket(2, 0))
    p1 = la.projector(la.ket(2, 1))
    assert np.abs(la.kron(p0, p1).data - np.diag([0, 1, 0, 0])).max() == 0


def test_partial_trace_product_state():
    rho = la.random_density(2, seed=1)
    tau = la.random_density(3, seed=2)
    out = la.partial_trace(la.kron(rho * 0.7, tau), keep=[1])
    assert out.dims == (3,)
    assert np.abs(out.data - 0.7 * tau.data).max() < 1e-14


def test_partial_trace_bell_state():
    phi = (la.ket(4, 0) + la.ket(4, 3)) / np.sqrt(2)
    out = la.partial_trace(la.projector(phi).with_dims((2, 2)), keep=[0])
    assert np.abs(out.data - np.eye(2) / 2).max() < 1e-15


@pytest.mark.parametrize("keep", [[0, 2], [1], [0], [2], [], [0, 1, 2]])
def test_partial_trace_matches_loop_oracle(keep):
    dims = [2, 3, 2]
    m = la.random_hermitian(12, seed=5).data + 1j * la.random_hermitian(12, seed=6).data
    out = la.partial_trace(la.Operator(m, dims), keep)
    assert np.abs(out.data - ptrace_by_loops(m, dims, keep)).max() < 1e-12
    assert abs(out.tr() - np.trace(m)) < 1e-12


def test_partial_trace_bad_index():
    with pytest.raises(IndexError):
        la.partial_trace(la.identity([2, 2]), keep=[2])


def test_dagger():
    assert np.abs(la.dagger(la.identity(3)).data - np.eye(3)).max() == 0
    r = la.Operator(np.diag([1, 1j]))
    assert np.abs(la.dagger(r).data - np.diag([1, -1j])).max() == 0
    m = la.random_unitary(4, seed=3)
    assert np.abs(la.dagger(la.dagger(m)).data - m.data).max() == 0


@pytest.mark.parametrize(
    "state, expected",
    [
        (np.eye(2) / 2, [0, 0, 0]),
        (np.full((2, 2), 0.5), [1, 0, 0]),
        (np.diag([1, 0]), [0, 0, 1]),
    ],
)
def test_bloch_from_state(state, expected):
    assert np.abs(la.bloch_from_state(state) - expected).max() < 1e-15


def test_state_from_bloch_examples():
    assert np.abs(la.state_from_bloch([0, 0, 0]).data - np.eye(2) / 2).max() == 0
    assert np.abs(la.state_from_bloch([0, 1, 0]).data - (np.eye(2) + la.Y) / 2).max() == 0
    with pytest.raises(UnphysicalBlochVectorError):
        la.state_from_bloch([1, 1, 0])


def test_bloch_round_trip_1000():
    rng = np.random.default_rng(0)
    v = rng.normal(size=(1000, 3))
    v *= (rng.uniform(size=(1000, 1)) ** (1 / 3)) / np.linalg.norm(v, axis=1, keepdims=True)
    worst = max(np.abs(la.bloch_from_state(la.state_from_bloch(r)) - r).max() for r in v)
    assert worst < 1e-12


def test_bloch_non_qubit():
    with pytest.raises(DimensionMismatchError):
        la.bloch_from_state(np.eye(3) / 3)


def test_random_unitary():
    u1 = la.random_unitary(1, seed=9)
    assert abs(abs(u1.data[0, 0]) - 1) < 1e-15
    for dim in (2, 4, 8):
        u = la.random_unitary(dim, seed=dim)
        assert np.linalg.norm(u.data.conj().T @ u.data - np.eye(dim)) < 1e-10
    assert np.array_equal(la.random_unitary(4, seed=11).data, la.random_unitary(4, seed=11).data)
    assert not np.array_equal(la.random_unitary(4, seed=11).data, la.random_unitary(4, seed=12).data)


def test_random_unitary_haar_moment():
    # E|U_00|^2 = 1/d and E|U_00|^4 = 2/(d(d+1)) under Haar measure
    rng = np.random.default_rng(1)
    vals = np.array([abs(la.random_unitary(3, rng).data[0, 0]) ** 2 for _ in range(20000)])
    assert abs(vals.mean() - 1 / 3) < 0.01
    assert abs((vals**2).mean() - 2 / 12) < 0.01


def test_pauli_expand_identity_and_swap():
    dec = la.pauli_expand(np.eye(4))
    expected = np.zeros((4, 4))
    expected[0, 0] = 1
    assert np.abs(dec.coeffs - expected).max() == 0
    # SWAP = (II + XX + YY + ZZ) / 2
    dec = la.pauli_expand(SWAP)
    assert np.abs(dec.coeffs - np.eye(4) / 2).max() < 1e-15


def test_pauli_expand_reassembly_and_norm():
    for s in range(20):
        u = la.random_unitary(4, seed=s)
        dec = la.pauli_expand(u)
        assert np.linalg.norm(dec.reassemble().data - u.data) < 1e-12
        assert abs(dec.coefficient_norm - 1) < 1e-12
        a_sum = sum(np.kron(dec.aops[v].data, la.PAULIS[v]) for v in range(4))
        assert np.linalg.norm(a_sum - u.data) < 1e-12


def test_pauli_expand_wrong_dim():
    with pytest.raises(DimensionMismatchError):
        la.pauli_expand(np.eye(2))


def test_pauli_expand_unitarity_constraints_200():
    eps = np.zeros((4, 4, 4))
    for a, b, c in product(range(1, 4), repeat=3):
        eps[a, b, c] = np.linalg.det(np.eye(3)[[a - 1, b - 1, c - 1]])
    worst = 0.0
    for s in range(200):
        A = [a.data for a in la.pauli_expand(la.random_unitary(4, seed=1000 + s)).aops]
        worst = max(worst, np.linalg.norm(sum(a.conj().T @ a for a in A) - np.eye(2)))
        for k in range(1, 4):
            lhs = A[k].conj().T @ A[0] + A[0].conj().T @ A[k]
            lhs = lhs + 1j * sum(eps[m, v, k] * A[m].conj().T @ A[v] for m in range(1, 4) for v in range(1, 4))
            worst = max(worst, np.linalg.norm(lhs))
    assert worst < 1e-10


def test_vectorize_identity_interaction():
    rho = la.random_density(2, seed=0)
    m = la.vectorize_cv_superoperator(np.eye(4), rho)
    assert np.abs(m.data - np.eye(4)).max() < 1e-15


def test_vectorize_full_swap_replaces_with_input():
    rho = la.random_density(2, seed=4)
    m = la.vectorize_cv_superoperator(SWAP, rho).data
    for a, b in product(range(2), repeat=2):
        unit = np.zeros((2, 2))
        unit[a, b] = 1
        assert np.abs(m @ la.vec(unit) - la.vec(rho.data) * np.trace(unit)).max() < 1e-15


def test_vectorize_matches_direct_map():
    u = la.random_unitary(4, seed=21).with_dims((2, 2))
    rho = la.random_density(2, seed=22)
    m = la.vectorize_cv_superoperator(u, rho).data
    for s in range(20):
        tau = la.random_density(2, seed=100 + s)
        direct = la.partial_trace(u @ la.kron(rho, tau) @ u.dag(), keep=[1])
        assert np.abs(m @ la.vec(tau.data) - la.vec(direct.data)).max() < 1e-14


def test_vectorize_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        la.vectorize_cv_superoperator(np.eye(6), np.eye(4) / 4)


def test_entropy():
    assert abs(la.von_neumann_entropy(np.diag([1.0, 0.0]))) < 1e-15
    assert abs(la.von_neumann_entropy(np.eye(2) / 2) - math.log(2)) < 1e-15
    expected = -0.75 * math.log(0.75) - 0.25 * math.log(0.25)
    assert abs(la.von_neumann_entropy(np.diag([0.75, 0.25])) - expected) < 1e-15


def test_validate_density():
    la.validate_density(np.eye(2) / 2)
    with pytest.raises(NotADensityError):
        la.validate_density(np.eye(2))
    with pytest.raises(NotADensityError):
        la.validate_density(np.diag([1.5, -0.5]))
    with pytest.raises(NotADensityError):
        la.validate_density(np.array([[0.5, 1], [0, 0.5]]))


def test_embed_places_operator_on_targets():
    u = la.random_unitary(4, seed=3).data
    a = la.random_hermitian(2, seed=1).data
    b = la.random_hermitian(2, seed=2).data
    c = la.random_hermitian(2, seed=4).data
    # U^{1,3} acting on a (x) b (x) c versus an explicit swap conjugation
    swap23 = np.kron(np.eye(2), SWAP)
    explicit = swap23 @ np.kron(u, np.eye(2)) @ swap23
    assert np.abs(la.embed(u, [0, 2], [2, 2, 2]).data - explicit).max() < 1e-15
    # reversed target order means the operator's first factor sits on qubit 3
    rev = la.embed(u, [2, 0], [2, 2, 2]).data
    flipped = la.embed(SWAP @ u @ SWAP, [0, 2], [2, 2, 2]).data
    assert np.abs(rev - flipped).max() < 1e-15
    # product operators land factor by factor
    x = la.embed(np.kron(a, c), [0, 2], [2, 2, 2]).data
    assert np.abs(x - np.kron(np.kron(a, np.eye(2)), c)).max() < 1e-15
    y = la.embed(b, [1], [2, 2, 2]).data
    assert np.abs(y - np.kron(np.kron(np.eye(2), b), np.eye(2))).max() < 1e-15


def test_operator_immutable_and_dims_checked():
    op = la.identity([2, 2])
    with pytest.raises(ValueError):
        op.data[0, 0] = 3
    with pytest.raises(DimensionMismatchError):
        la.Operator(np.eye(4), (2, 3))
    with pytest.raises(ValueError):
        la.Operator(np.array([[np.nan]]))


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_partial_trace_composition(seed):
    m = la.Operator(la.random_density(12, seed=seed).data, (3, 2, 2))
    step = la.partial_trace(la.partial_trace(m, keep=[0, 1]), keep=[0])
    once = la.partial_trace(m, keep=[0])
    assert np.abs(step.data - once.data).max() < 1e-12


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_kron_partial_trace_adjointness(seed):
    rng = np.random.default_rng(seed)
    a = la.random_hermitian(2, rng).data + 1j * la.random_hermitian(2, rng).data
    m = la.Operator(la.random_hermitian(6, rng).data, (2, 3))
    lhs = np.trace(np.kron(a, np.eye(3)) @ m.data)
    rhs = np.trace(a @ la.partial_trace(m, keep=[0]).data)
    assert abs(lhs - rhs) < 1e-12
