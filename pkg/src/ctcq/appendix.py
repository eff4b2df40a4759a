"""Numerical checks of the P-CTC expectation-value derivation.

Three factors appear throughout: 1 is the CR system, 2 and 3 are copies of
the CV qubit.  Reports give the maximum residual over stages and axes, never
an average.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from itertools import combinations, permutations, product

import numpy as np

from . import linalg as la
from . import prescriptions as pr
from . import tomography as tm
from .linalg import Operator

TOL_KEY = 1e-14
TOL_CHAIN = 1e-11
TOL_UNITARITY = 1e-10
TOL_EQUIV = 1e-10
TOL_ALGEBRA = 1e-13


@dataclass(frozen=True)
class VerificationReport:
    name: str
    max_residual: float
    cases: int
    tolerance: float
    seed: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tolerance)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def levi_civita(i: int, j: int, k: int) -> int:
    """Sign of (i, j, k) as a permutation of (1, 2, 3), zero on repeats, by counting inversions."""
    idx = (i, j, k)
    if sorted(idx) != [1, 2, 3]:
        return 0
    inversions = sum(1 for a, b in combinations(idx, 2) if a > b)
    return -1 if inversions % 2 else 1


def _proj(v) -> np.ndarray:
    return np.outer(v, v.conj())


def key_identity_check(k: int) -> VerificationReport:
    """sum_n (-1)^n P_n (x) P_n = (I (x) sigma_k + sigma_k (x) I) / 2 for the sigma_k eigenprojectors."""
    p = [_proj(v) for v in tm.basis_states(k)]
    lhs = np.kron(p[0], p[0]) - np.kron(p[1], p[1])
    s = la.PAULIS[k]
    rhs = 0.5 * (np.kron(np.eye(2), s) + np.kron(s, np.eye(2)))
    return VerificationReport(f"key-identity-k{k}", float(np.linalg.norm(lhs - rhs)), 1, TOL_KEY)


def _three_factor(u, rho):
    uu, rho, cr, cv = pr._setup(u, rho)
    d = rho.n
    dims = (d, 2, 2)
    flat = Operator(uu.data, (d, 2))
    u12 = la.embed(flat, [0, 1], dims).data
    u13 = la.embed(flat, [0, 2], dims).data
    rho1 = np.kron(rho.data, np.eye(4))
    return uu, rho, d, dims, u12, u13, rho1


def chain_stages(u, rho, k: int) -> dict:
    """Value of r_k at each stage of the simplification, keyed by stage name."""
    uu, rho, d, dims, u12, u13, rho1 = _three_factor(u, rho)
    s3 = la.embed(la.PAULIS[k], [2], dims).data
    s2 = la.embed(la.PAULIS[k], [1], dims).data
    swap23 = la.embed(np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]), [1, 2], dims).data
    projs = [_proj(v) for v in tm.basis_states(k)]
    sign = (1, -1)
    st = dict.fromkeys(("S1", "S2", "S3", "S4", "S5", "S6", "S7a", "S7b", "S8"), 0.0)
    for n, pn in enumerate(projs):
        # S1: two-factor form with A_n = tr_2[U (I (x) P_n)]
        a = pr.pctc_operator(Operator(uu.data @ np.kron(np.eye(d), pn), (d, 2)), 2).data
        st["S1"] += sign[n] * np.trace(a @ rho.data @ a.conj().T)
        # S2: extended with a third factor; identity padding normalized by d2 * d3
        p2 = la.embed(pn, [1], dims)
        p3 = la.embed(pn, [2], dims)
        left = la.partial_trace(Operator(u12, dims) @ p2, [0, 2])
        right = la.partial_trace(p3 @ Operator(u13.conj().T, dims), [0, 1])
        left = la.embed(left, [0, 2], dims).data
        right = la.embed(right, [0, 1], dims).data
        st["S2"] += sign[n] * np.trace(left @ rho1 @ right) / 4
        # S3: partial traces merged, then the remaining trace
        inner = u12 @ np.kron(np.kron(rho.data, pn), pn) @ u13.conj().T
        st["S3"] += sign[n] * la.partial_trace(Operator(inner, dims), [0]).tr()
        # S4: one full trace
        st["S4"] += sign[n] * np.trace(inner)
        # S5: projectors moved to the front
        pp = np.kron(np.eye(d), np.kron(pn, pn))
        st["S5"] += sign[n] * np.trace(pp @ u12 @ rho1 @ u13.conj().T)
    core = u12 @ rho1 @ u13.conj().T
    st["S6"] = 0.5 * np.trace((s3 + s2) @ core)
    st["S7a"] = 0.5 * np.trace(s3 @ (core + swap23.conj().T @ core @ swap23))
    core_b = u13 @ rho1 @ u12.conj().T
    st["S7b"] = 0.5 * np.trace(s3 @ (core + core_b))
    t12 = la.partial_trace(Operator(core, dims), [2]).data
    t13 = la.partial_trace(Operator(core_b, dims), [2]).data
    st["S8"] = 0.5 * np.trace(la.PAULIS[k] @ (t12 + t13))
    return {key: complex(v) for key, v in st.items()}


def simplification_chain_check(u, rho, k: int) -> VerificationReport:
    stages = chain_stages(u, rho, k)
    vals = np.array(list(stages.values()))
    res = float(np.max(np.abs(vals[:, None] - vals[None, :])))
    return VerificationReport(f"simplification-chain-k{k}", res, 1, TOL_CHAIN, details={"stages": len(vals)})


def unitarity_constraints(u) -> dict:
    """Residual norms of the completeness and cross-term constraints on A_mu."""
    a = [op.data for op in la.pauli_expand(u).aops]
    dag = [x.conj().T for x in a]
    out = {"completeness": float(np.linalg.norm(sum(dag[m] @ a[m] for m in range(4)) - np.eye(2)))}
    for k in (1, 2, 3):
        cross = dag[k] @ a[0] + dag[0] @ a[k]
        eps_sum = np.zeros((2, 2), dtype=complex)
        eps_swapped = np.zeros((2, 2), dtype=complex)
        for m, v in product((1, 2, 3), repeat=2):
            e = levi_civita(m, v, k)
            if e:
                eps_sum += e * dag[m] @ a[v]
                eps_swapped += e * dag[v] @ a[m]
        out[f"cross-{k}"] = float(np.linalg.norm(cross + 1j * eps_sum))
        out[f"rearranged-{k}"] = float(np.linalg.norm(1j * eps_swapped - cross))
    return out


def unitarity_constraint_check(u) -> VerificationReport:
    res = unitarity_constraints(u)
    return VerificationReport("unitarity-constraints", max(res.values()), 1, TOL_UNITARITY, details=res)


def expectation_forms(u, rho) -> np.ndarray:
    """Rows: tr[sigma_k tau~], tr[sigma_k tau_P], 2 tr[(A_k^dag A_0 + A_0^dag A_k) rho]; columns k = 1..3."""
    rho = la.as_operator(rho)
    _, tau_t = tm.kappa_state(u, rho)
    tau_p = pr.pctc_cv_state(u, rho)
    a = [op.data for op in la.pauli_expand(u).aops]
    out = np.zeros((3, 3))
    for k in (1, 2, 3):
        s = la.PAULIS[k]
        out[0, k - 1] = np.trace(s @ tau_t.data).real
        out[1, k - 1] = np.trace(s @ tau_p.data).real
        out[2, k - 1] = 2 * np.trace((a[k].conj().T @ a[0] + a[0].conj().T @ a[k]) @ rho.data).real
    return out


def expectation_equivalence_check(u, rho) -> VerificationReport:
    f = expectation_forms(u, rho)
    res = float(np.max(np.abs(f[:, None, :] - f[None, :, :])))
    return VerificationReport("expectation-equivalence", res, 1, TOL_EQUIV)


def pauli_algebra_check() -> VerificationReport:
    """tr[s_a s_b] = 2 delta_ab and tr[s_a s_b s_c] = 2i eps_abc over every index choice."""
    res = 0.0
    for a, b in product((1, 2, 3), repeat=2):
        res = max(res, abs(np.trace(la.PAULIS[a] @ la.PAULIS[b]) - 2 * (a == b)))
    for a, b, c in product((1, 2, 3), repeat=3):
        res = max(res, abs(np.trace(la.PAULIS[a] @ la.PAULIS[b] @ la.PAULIS[c]) - 2j * levi_civita(a, b, c)))
    # sanity of the sign routine against explicit even permutations
    even = {(1, 2, 3), (2, 3, 1), (3, 1, 2)}
    for p in permutations((1, 2, 3)):
        res = max(res, abs(levi_civita(*p) - (1 if p in even else -1)))
    return VerificationReport("pauli-algebra", float(res), 27 + 9, TOL_ALGEBRA)


def _case(seed: int, i: int):
    rng = np.random.default_rng(np.random.SeedSequence([seed, i]))
    return la.random_unitary(4, rng), la.random_density(2, rng), int(rng.integers(1, 4))


def run_appendix_suite(cases: int = 200, seed: int = 0) -> list[VerificationReport]:
    """Key identity, chain, unitarity constraints and expectation equivalence over random cases.

    Case ``i`` draws from ``SeedSequence([seed, i])`` so any single case can
    be regenerated on its own.
    """
    if cases < 1:
        raise ValueError("cases must be at least 1")
    algebra = pauli_algebra_check()
    key = max((key_identity_check(k) for k in (1, 2, 3)), key=lambda r: r.max_residual)
    chain = unit = equiv = 0.0
    for i in range(cases):
        u, rho, k = _case(seed, i)
        chain = max(chain, simplification_chain_check(u, rho, k).max_residual)
        unit = max(unit, unitarity_constraint_check(u).max_residual)
        equiv = max(equiv, expectation_equivalence_check(u, rho).max_residual)
    return [
        VerificationReport(
            "key-identity", key.max_residual, 3, TOL_KEY, seed,
            {"pauli_algebra_residual": algebra.max_residual, "pauli_algebra_passed": algebra.passed},
        ),
        VerificationReport("simplification-chain", chain, cases, TOL_CHAIN, seed),
        VerificationReport("unitarity-constraints", unit, cases, TOL_UNITARITY, seed),
        VerificationReport("expectation-equivalence", equiv, cases, TOL_EQUIV, seed),
    ]
