"""Weak-measurement tomography of qubit CV states.

A probe qubit |chi> = sqrt((1+eps)/2)|0> + sqrt((1-eps)/2)|1> is coupled to
the system by T_k = |0_k><0_k| (x) I + |1_k><1_k| (x) X, where
|n_k> = V_k^dag |n> are the sigma_k eigenstates.  Reading the probe in the z
basis gives tr[sigma_z omega_k] = eps * r_k.

Factor order in the circuits is CR, CV, [T,] probe.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from . import prescriptions as pr
from .errors import DegenerateProbeError, DimensionMismatchError, PostselectionImpossibleError
from .linalg import Operator, as_operator

DEFAULT_EPSILON = 1e-4
MODES = ("exact-limit", "finite-epsilon", "sampled")
NORMALIZATIONS = ("bell", "survival")

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
R = np.diag([1, 1j])
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
PHI = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class ProbeSpec:
    epsilon: float = DEFAULT_EPSILON

    def __post_init__(self):
        if not (0.0 <= self.epsilon <= 1.0) or math.isnan(self.epsilon):
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")


def _spec(spec) -> ProbeSpec:
    return spec if isinstance(spec, ProbeSpec) else ProbeSpec(float(spec))


def probe_vector(spec) -> np.ndarray:
    e = _spec(spec).epsilon
    return np.array([math.sqrt((1 + e) / 2), math.sqrt((1 - e) / 2)], dtype=complex)


def probe_state(spec) -> Operator:
    v = probe_vector(spec)
    return Operator(np.outer(v, v.conj()))


def _check_axis(k: int) -> None:
    if k not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {k}")


def basis_transform(k: int) -> np.ndarray:
    """V_1 = H, V_2 = H R^dag, V_3 = I with R = diag(1, i)."""
    _check_axis(k)
    return {1: H, 2: H @ R.conj().T, 3: np.eye(2, dtype=complex)}[k]


def basis_states(k: int) -> tuple[np.ndarray, np.ndarray]:
    """(|0_k>, |1_k>), the +1 and -1 eigenvectors of sigma_k."""
    v = basis_transform(k).conj().T
    return v[:, 0], v[:, 1]


def coupling_unitary(k: int) -> np.ndarray:
    v = basis_transform(k)
    return np.kron(v.conj().T, np.eye(2)) @ CNOT @ np.kron(v, np.eye(2))


def sample_probe(omega, shots: int, seed=None) -> float:
    """Empirical <sigma_z> from ``shots`` z-basis readouts of a probe state.

    ``omega`` is normalized by its trace first, so unnormalized postselected
    probe states are accepted.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    omega = as_operator(omega)
    t = omega.tr().real
    if t <= 0:
        raise ValueError("probe state has nonpositive trace")
    p0 = min(max(omega.data[0, 0].real / t, 0.0), 1.0)
    n0 = np.random.default_rng(seed).binomial(shots, p0)
    return (2 * n0 - shots) / shots


@dataclass(frozen=True)
class TomographyResult:
    r: np.ndarray
    reconstructed: Operator
    epsilon: float
    mode: str
    shots: int | None = None
    trace_correction: float = 1.0
    chosen_family_member: Operator | None = None
    normalization: str | None = None
    survival: tuple[float, ...] | None = None
    postselection_defined: bool = True
    evolved: tuple[Operator, ...] | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        from .io import matrix_to_json

        out = {
            "r": [float(x) for x in self.r],
            "epsilon": float(self.epsilon),
            "mode": self.mode,
            "shots": self.shots,
            "reconstructed": matrix_to_json(self.reconstructed),
            "chosen_family_member": (
                None if self.chosen_family_member is None else matrix_to_json(self.chosen_family_member)
            ),
            "trace_correction": float(self.trace_correction),
        }
        if self.normalization is not None:
            out["normalization"] = self.normalization
            out["survival"] = None if self.survival is None else [float(s) for s in self.survival]
            out["postselection_defined"] = self.postselection_defined
        return out


def _mode(shots) -> str:
    return "finite-epsilon" if shots is None else "sampled"


def _streams(seed) -> list:
    return np.random.SeedSequence(seed).spawn(3)


def _read_probe(evolve, eps: float) -> tuple[Operator, float]:
    """Run a probe-linear circuit on chi = (I + eps Z + sqrt(1-eps^2) X) / 2.

    ``evolve(m)`` maps a probe input operator to the unnormalized output probe
    operator.  Returns the output probe state omega and tr[sigma_z omega]/eps.
    The probe only ever receives X gates, so the I and X parts of chi stay in
    span{I, X} and contribute nothing to the z readout; taking it from the Z
    part alone avoids dividing rounding residue by eps.
    """
    c = math.sqrt((1 - eps) * (1 + eps))
    oi, oz, ox = (evolve(Operator(m)) for m in (la.I2, la.Z, la.X))
    omega = (oi + oz * eps + ox * c) * 0.5
    return omega, 0.5 * float((oz.data[0, 0] - oz.data[1, 1]).real)


def _readout(omega: Operator, z_over_eps: float, eps: float, shots, stream, scale: float = 1.0) -> float:
    """Exact tr[sigma_z omega]/eps, or its estimate from sampled shots."""
    if shots is None:
        return scale * z_over_eps
    return scale * omega.tr().real * sample_probe(omega, shots, stream) / eps


def _require_eps(spec: ProbeSpec) -> float:
    if spec.epsilon == 0:
        raise DegenerateProbeError("epsilon = 0 carries no information about the system")
    return spec.epsilon


def _result_from_r(r, eps, mode, shots, **kw) -> TomographyResult:
    r = np.asarray(r, dtype=float)
    rec = la.state_from_bloch(r, check=False)
    return TomographyResult(r, rec, eps, mode, shots, **kw)


def weak_measure_standalone(tau, spec, shots: int | None = None, seed=None) -> TomographyResult:
    """Weakly measure all three axes of a qubit ``tau``, one fresh copy per axis.

    The returned result carries in ``evolved`` the post-measurement system
    state for each axis (probe traced out).
    """
    spec = _spec(spec)
    eps = _require_eps(spec)
    tau = la.validate_density(tau)
    if tau.n != 2:
        raise DimensionMismatchError("standalone tomography expects a qubit")
    chi = probe_state(spec)
    tau = tau.with_dims((2,))
    r, evolved = [], []
    for k, stream in zip((1, 2, 3), _streams(seed)):
        t = Operator(coupling_unitary(k), (2, 2))
        omega, z = _read_probe(lambda m: la.partial_trace(t @ la.kron(tau, m) @ t.dag(), [1]), eps)
        r.append(_readout(omega, z, eps, shots, stream))
        evolved.append(la.partial_trace(t @ la.kron(tau, chi) @ t.dag(), [0]))
    return _result_from_r(r, eps, _mode(shots), shots, evolved=tuple(evolved))


def _dctc_circuit(u, rho, k: int):
    uu, rho, cr, cv = pr._setup(u, rho)
    if math.prod(cv) != 2:
        raise DimensionMismatchError("tomography needs a qubit CV system")
    dims = cr + (2, 2)
    ncr = len(cr)
    w = la.embed(uu, range(ncr + 1), dims) @ la.embed(coupling_unitary(k), [ncr, ncr + 1], dims)
    return w, rho, cr


def dctc_probed_map(u, rho, spec, k: int):
    """tau -> tr_{CR,probe}[W (rho (x) tau (x) chi) W^dag] for the axis-k circuit."""
    w, rho, cr = _dctc_circuit(u, rho, k)
    chi = probe_state(spec)
    ncr = len(cr)

    def fn(tau):
        big = w @ la.kron(rho, tau.with_dims((2,)), chi) @ w.dag()
        return la.partial_trace(big, [ncr])

    return fn


def dctc_probed_family(u, rho, spec, k: int) -> pr.FixedPointFamily:
    m = la.superoperator_matrix(dctc_probed_map(u, rho, _spec(spec), k), (2,))
    return pr.fixed_point_family(m, (2,))


def dctc_probed_fixed_point(u, rho, spec, k: int) -> Operator:
    """Self-consistent CV state with the axis-k probe in the loop (max-entropy member)."""
    return pr.max_entropy_member(dctc_probed_family(u, rho, spec, k))


def dctc_tomography(u, rho, spec=DEFAULT_EPSILON, shots: int | None = None, seed=None) -> TomographyResult:
    """Weak tomography of the D-CTC CV state.

    Each axis runs its own circuit with the probe coupled to the CV before the
    interaction; the CV state inserted is the probed fixed point.  When the
    unprobed family is not unique, the max-entropy member of each probed
    family is used and the unprobed choice is recorded.
    """
    spec = _spec(spec)
    eps = _require_eps(spec)
    uu, rho, cr, cv = pr._setup(u, rho)
    unprobed = pr.dctc_fixed_points(uu, rho)
    chosen = None if unprobed.is_unique else pr.max_entropy_member(unprobed)
    ncr = len(cr)
    r = []
    for k, stream in zip((1, 2, 3), _streams(seed)):
        w, _, _ = _dctc_circuit(uu, rho, k)
        tau = dctc_probed_fixed_point(uu, rho, spec, k).with_dims((2,))
        omega, z = _read_probe(lambda m: la.partial_trace(w @ la.kron(rho, tau, m) @ w.dag(), [ncr + 1]), eps)
        r.append(_readout(omega, z, eps, shots, stream))
    return _result_from_r(r, eps, _mode(shots), shots, chosen_family_member=chosen)


def dctc_tomography_exact(u, rho) -> TomographyResult:
    """epsilon -> 0 limit: Bloch vector of the (max-entropy) D-CTC fixed point."""
    fam = pr.dctc_fixed_points(u, rho)
    tau = pr.max_entropy_member(fam)
    r = la.bloch_from_state(tau)
    chosen = None if fam.is_unique else tau
    return _result_from_r(r, 0.0, "exact-limit", None, chosen_family_member=chosen)


def kappa_state(u, rho) -> tuple[Operator, Operator]:
    """kappa = tr_{1,2}[U^{12} (rho (x) I (x) I) U^dag^{13}] and its Hermitian part.

    Factor 1 is the whole CR system, factors 2 and 3 are copies of the CV
    qubit.  Returns (kappa, tau_tilde).
    """
    uu, rho, cr, cv = pr._setup(u, rho)
    if math.prod(cv) != 2:
        raise DimensionMismatchError("kappa is defined for a qubit CV system")
    dcr = rho.n
    dims = (dcr, 2, 2)
    flat = uu.data
    u12 = la.embed(Operator(flat, (dcr, 2)), [0, 1], dims)
    u13 = la.embed(Operator(flat, (dcr, 2)), [0, 2], dims)
    inner = la.kron(Operator(rho.data, (dcr,)), la.identity([2, 2]))
    kappa = la.partial_trace(u12 @ inner @ u13.dag(), [2])
    return kappa, (kappa + kappa.dag()) / 2


def pctc_expectations(u, rho) -> np.ndarray:
    """r_k = sum_n (-1)^n tr{A_n rho A_n^dag} with A_n = tr_CV[U (I (x) |n_k><n_k|)]."""
    uu, rho, cr, cv = pr._setup(u, rho)
    if math.prod(cv) != 2:
        raise DimensionMismatchError("tomography needs a qubit CV system")
    r = np.zeros(3)
    for k in (1, 2, 3):
        for n, vec in enumerate(basis_states(k)):
            proj = la.kron(la.identity(cr), Operator(np.outer(vec, vec.conj())))
            a = pr.pctc_operator(uu @ proj, 2)
            r[k - 1] += (-1) ** n * (a.data @ rho.data @ a.data.conj().T).trace().real
    return r


def pctc_tomography_exact(u, rho, normalization: str = "bell") -> TomographyResult:
    """epsilon -> 0 P-CTC tomography from the closed-form expectation sum.

    ``normalization="bell"`` rescales the postselected state by the inverse
    Bell-projection weight 1/d^2 and recovers the P-CTC CV state exactly;
    ``"survival"`` renormalizes by the actual postselection probability, which
    divides every r_k by N = tr{tr_CV[U] rho tr_CV[U]^dag}.  When N vanishes
    the circuit reading is undefined; the kappa-based expectations are
    returned instead with ``postselection_defined`` False.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    n = pr.pctc_survival(u, rho)
    _, tau_t = kappa_state(u, rho)
    t = tau_t.tr().real
    defined = n >= pr.POSTSELECTION_TOL
    if not defined:
        r = np.array([np.trace(la.PAULIS[k] @ tau_t.data).real for k in (1, 2, 3)])
    else:
        r = pctc_expectations(u, rho)
        if normalization == "survival":
            r, t = r / n, t / n
    tau_tilde = 0.5 * (t * np.eye(2) + sum(rk * la.PAULIS[i + 1] for i, rk in enumerate(r)))
    tau_w = 0.5 * (1 - t) * np.eye(2) + tau_tilde
    return TomographyResult(
        np.asarray(r, dtype=float),
        Operator(tau_w),
        0.0,
        "exact-limit",
        None,
        trace_correction=t,
        normalization=normalization,
        survival=(n / 4,) * 3,
        postselection_defined=bool(defined),
    )


def pctc_tomography_sim(
    u, rho, spec=DEFAULT_EPSILON, normalization: str = "bell", shots: int | None = None, seed=None
) -> TomographyResult:
    """Full circuit simulation of P-CTC weak tomography at finite strength.

    The input rho (x) |Phi><Phi| (x) |chi><chi| is evolved by
    W = (U (x) I (x) I) T_k^{CV,probe}, the CV and T qubits are projected onto
    |Phi>, and the remaining CR factors are traced out to give the probe state.
    """
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"normalization must be one of {NORMALIZATIONS}")
    spec = _spec(spec)
    eps = _require_eps(spec)
    uu, rho, cr, cv = pr._setup(u, rho)
    if math.prod(cv) != 2:
        raise DimensionMismatchError("tomography needs a qubit CV system")
    ncr = len(cr)
    dims = cr + (2, 2, 2)
    bell = Operator(np.outer(PHI, PHI.conj()), (2, 2))
    post = la.embed(bell, [ncr, ncr + 1], dims)
    u_big = la.embed(uu, range(ncr + 1), dims)
    r, surv = [], []
    for k, stream in zip((1, 2, 3), _streams(seed)):
        w = post @ u_big @ la.embed(coupling_unitary(k), [ncr, ncr + 2], dims)
        omega, z = _read_probe(lambda m: la.partial_trace(w @ la.kron(rho, bell, m) @ w.dag(), [ncr + 2]), eps)
        p = omega.tr().real
        if p < pr.POSTSELECTION_TOL:
            raise PostselectionImpossibleError(f"postselection probability {p:.3e} for axis {k}")
        surv.append(p)
        r.append(_readout(omega, z, eps, shots, stream, 4.0 if normalization == "bell" else 1.0 / p))
    return _result_from_r(
        r, eps, _mode(shots), shots, normalization=normalization, survival=tuple(surv)
    )


def tomograph(
    u,
    rho,
    ctc: str = "pctc",
    mode: str = "exact-limit",
    epsilon: float = DEFAULT_EPSILON,
    shots: int | None = None,
    seed=None,
    normalization: str = "bell",
) -> TomographyResult:
    """Single entry point over prescription and mode (used by the CLI)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if mode == "sampled" and shots is None:
        raise ValueError("sampled mode needs shots")
    if mode != "sampled":
        shots = None
    if ctc == "pctc":
        if mode == "exact-limit":
            return pctc_tomography_exact(u, rho, normalization)
        return pctc_tomography_sim(u, rho, epsilon, normalization, shots, seed)
    if ctc == "dctc":
        if mode == "exact-limit":
            return dctc_tomography_exact(u, rho)
        return dctc_tomography(u, rho, epsilon, shots, seed)
    raise ValueError("ctc must be 'pctc' or 'dctc'")


def reconstruction_error(result: TomographyResult, target) -> float:
    return float((result.reconstructed - la.as_operator(target)).norm())
