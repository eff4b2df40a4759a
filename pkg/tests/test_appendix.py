import numpy as np
import pytest

from ctcq import appendix as ap
from ctcq import linalg as la
from ctcq import scenarios as sc

SWAP = sc.SWAP


@pytest.mark.parametrize("k", [1, 2, 3])
def test_key_identity(k):
    rep = ap.key_identity_check(k)
    assert rep.max_residual <= 1e-14 and rep.passed


def test_levi_civita_brute_force():
    # compare against the determinant of permuted identity rows
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            for k in (1, 2, 3):
                m = np.eye(3)[[i - 1, j - 1, k - 1]]
                assert ap.levi_civita(i, j, k) == round(np.linalg.det(m))


def test_pauli_algebra():
    rep = ap.pauli_algebra_check()
    assert rep.passed and rep.max_residual == 0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_chain_identity_interaction(k):
    rep = ap.simplification_chain_check(np.eye(4), la.random_density(2, k), k)
    assert rep.max_residual <= 1e-13


@pytest.mark.parametrize("k", [1, 2, 3])
def test_chain_grandfather(k):
    stages = ap.chain_stages(sc.grandfather().unitary, np.diag([1, 0]), k)
    assert max(abs(v) for v in stages.values()) <= 1e-12
    assert ap.simplification_chain_check(sc.grandfather().unitary, np.diag([1, 0]), k).max_residual <= 1e-12


def test_chain_stages_equal_naive_expectation():
    from ctcq import prescriptions as pr

    u = la.random_unitary(4, 3)
    rho = la.random_density(2, 4)
    tau = pr.pctc_cv_state(u, rho).data
    for k in (1, 2, 3):
        target = np.trace(la.PAULIS[k] @ tau).real
        for name, v in ap.chain_stages(u, rho, k).items():
            assert abs(v - target) < 1e-12, name


def test_chain_with_two_qubit_cr():
    s = sc.unproven_theorem()
    for k in (1, 2, 3):
        assert ap.simplification_chain_check(s.unitary, la.random_density(4, k), k).passed


def test_unitarity_constraints_examples():
    rep = ap.unitarity_constraint_check(np.eye(4))
    assert rep.max_residual == 0
    assert ap.unitarity_constraint_check(SWAP).max_residual <= 1e-12
    a = la.pauli_expand(SWAP).aops
    for m in range(4):
        assert np.abs(a[m].data - la.PAULIS[m] / 2).max() < 1e-15


def test_unitarity_constraints_fail_for_nonunitary():
    rep = ap.unitarity_constraint_check(2 * np.eye(4))
    assert not rep.passed


@pytest.mark.parametrize("seed", range(50))
def test_unitarity_constraints_haar(seed):
    assert ap.unitarity_constraint_check(la.random_unitary(4, seed)).max_residual <= 1e-10


def test_expectation_equivalence_examples():
    f = ap.expectation_forms(np.eye(4), la.random_density(2, 1))
    assert np.abs(f).max() < 1e-15
    for seed in range(10):
        rep = ap.expectation_equivalence_check(sc.grandfather().unitary, la.random_density(2, seed))
        assert rep.max_residual <= 1e-11


def test_suite_reports_and_reproducibility():
    a = ap.run_appendix_suite(20, seed=5)
    b = ap.run_appendix_suite(20, seed=5)
    assert [r.name for r in a] == ["key-identity", "simplification-chain", "unitarity-constraints", "expectation-equivalence"]
    assert all(r.passed for r in a)
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]
    assert a[1].cases == 20 and a[1].seed == 5
    with pytest.raises(ValueError):
        ap.run_appendix_suite(0)


def test_report_pass_flag_tracks_tolerance():
    assert ap.VerificationReport("x", 1e-12, 1, 1e-11).passed
    assert not ap.VerificationReport("x", 1e-10, 1, 1e-11).passed
