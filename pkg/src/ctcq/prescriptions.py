"""Deutsch (D-CTC) and postselected-teleportation (P-CTC) prescriptions.

Conventions: the interaction ``u`` acts on CR (x) CV with the chronology-
respecting factors first, matching the dims of the CR input ``rho``.  All maps
accept plain arrays or :class:`~ctcq.linalg.Operator` values.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg as la
from .errors import DimensionMismatchError, NoFixedPointError, PostselectionImpossibleError
from .linalg import Operator, as_operator

NULL_TOL = 1e-10
POSTSELECTION_TOL = 1e-12
ECP_TOL = 1e-12
ECP_MAX_ITER = 100_000


def _setup(u, rho):
    u = as_operator(u)
    rho = as_operator(rho)
    cr, cv = la.split_dims(u, rho)
    return Operator(u.data, cr + cv), rho, cr, cv


def d_map(u, rho, x) -> Operator:
    """tr_CR[U (rho (x) x) U^dag].

    Linear in ``x``, which need not be a density: the idempotency test feeds
    Pauli matrices through it.
    """
    uu, rho, cr, cv = _setup(u, rho)
    x = as_operator(x, cv if not isinstance(x, Operator) else None)
    if x.n != math.prod(cv):
        raise DimensionMismatchError(f"CV operator of size {x.n}, interaction expects {math.prod(cv)}")
    x = x.with_dims(cv)
    out = uu @ la.kron(rho, x) @ uu.dag()
    return la.partial_trace(out, range(len(cr), len(cr) + len(cv)))


def dctc_cr_output(u, rho, tau, fixed_tol: float = 1e-6) -> Operator:
    """CR output tr_CV[U (rho (x) tau) U^dag] for a self-consistent ``tau``.

    Warns (does not raise) when ``tau`` misses the fixed-point condition by
    more than ``fixed_tol``.
    """
    uu, rho, cr, cv = _setup(u, rho)
    tau = as_operator(tau).with_dims(cv)
    miss = (d_map(uu, rho, tau) - tau).norm()
    if miss > fixed_tol:
        warnings.warn(f"tau is not a D-CTC fixed point (residual {miss:.3e})", RuntimeWarning, stacklevel=2)
    out = uu @ la.kron(rho, tau) @ uu.dag()
    return la.partial_trace(out, range(len(cr)))


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal Hermitian basis of d x d matrices, identity direction first.

    tr(G_i G_j) = delta_ij; every element after the first is traceless.  For
    d = 2 this is (I, X, Y, Z) / sqrt(2) up to ordering of the traceless part.
    """
    basis = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            a = np.zeros((d, d), dtype=complex)
            a[j, k], a[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            basis += [s, a]
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        basis.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return basis


def _coords(h: np.ndarray, basis) -> np.ndarray:
    return np.array([np.trace(g @ h).real for g in basis])


@dataclass(frozen=True)
class FixedPointFamily:
    """Affine set of CV states solving tau = d_U[rho, tau].

    Members are ``particular + sum_i c_i * null_directions[i]``.  Directions are
    traceless, Hermitian and orthonormal in the Frobenius inner product.
    ``param_box[i]`` is the interval of ``c_i`` that keeps the member PSD with
    every other coefficient at zero; with two or more directions the true
    family is the PSD cross-section, a subset of the box (``box_exact`` False).
    """

    particular: Operator
    null_directions: tuple[Operator, ...]
    param_box: np.ndarray
    selection: str = "bloch-projection"
    superoperator: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def is_unique(self) -> bool:
        return not self.null_directions

    @property
    def box_exact(self) -> bool:
        return len(self.null_directions) <= 1

    def member(self, c: Sequence[float]) -> Operator:
        c = np.asarray(c, dtype=float).reshape(len(self.null_directions))
        out = self.particular
        for ci, d in zip(c, self.null_directions):
            out = out + float(ci) * d
        return out

    def contains(self, c: Sequence[float], tol: float = la.DEFAULT_TOL) -> bool:
        return la.is_density(self.member(c), tol)

    def corners(self) -> list[np.ndarray]:
        if not self.null_directions:
            return [np.zeros(0)]
        return [np.array(p) for p in product(*self.param_box)]

    def to_dict(self) -> dict:
        from .io import matrix_to_json

        return {
            "particular": matrix_to_json(self.particular),
            "null_directions": [matrix_to_json(d) for d in self.null_directions],
            "param_box": [[float(lo), float(hi)] for lo, hi in self.param_box],
        }


def _psd_extent(p: np.ndarray, d: np.ndarray, sign: float, psd_tol: float = 1e-13) -> float:
    """Largest t >= 0 with p + sign*t*d PSD, by bisection on the minimum eigenvalue."""

    def ok(t):
        m = p + sign * t * d
        return np.linalg.eigvalsh((m + m.conj().T) / 2)[0] >= -psd_tol

    if not ok(0.0):
        return 0.0
    lo, hi = 0.0, 2.0
    # densities are at most sqrt(2) apart in Frobenius norm, so hi=2 is outside
    for _ in range(80):
        mid = (lo + hi) / 2
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _ecp_limit(m: np.ndarray, seed: np.ndarray, tol: float, max_iter: int):
    v = la.vec(seed)
    for _ in range(max_iter):
        nxt = m @ v
        if np.linalg.norm(nxt - v) <= tol:
            return nxt
        v = nxt
    return None


def fixed_point_family(m: np.ndarray, dims: Sequence[int], null_tol: float = NULL_TOL) -> FixedPointFamily:
    """Solve X = M X over Hermitian matrices from a vectorized superoperator ``m``.

    The kernel of M - I is found by SVD (singular values below ``null_tol``
    count as zero), mapped to real coordinates in an orthonormal Hermitian
    basis, and split into a trace-one particular solution plus traceless
    directions.  The particular solution is the member closest to the
    maximally mixed state in Frobenius norm; for a qubit that is the maximum
    entropy member.  For larger CV dimension the maximally mixed ECP limit is
    used when it converges, since closeness to I/d is only a proxy there.
    """
    dims = tuple(dims)
    d = math.prod(dims)
    m = np.asarray(m)
    k = m - np.eye(d * d)
    _, s, vh = np.linalg.svd(k)
    kernel = vh[s < null_tol].conj()
    if kernel.shape[0] == 0:
        raise NoFixedPointError("map has no fixed points; it cannot be trace preserving")
    basis = hermitian_basis(d)
    herm_coords = []
    for v in kernel:
        x = v.reshape(d, d)
        herm_coords.append(_coords((x + x.conj().T) / 2, basis))
        herm_coords.append(_coords((x - x.conj().T) / 2j, basis))
    _, hs, hvh = np.linalg.svd(np.array(herm_coords))
    rank = int(np.sum(hs > null_tol * max(1.0, hs[0])))
    span = hvh[:rank]
    w = span[:, 0]
    if np.linalg.norm(w) < null_tol:
        raise NoFixedPointError("fixed-point space contains no operator with nonzero trace")
    a = (w / np.dot(w, w)) / np.sqrt(d)
    particular_coords = a @ span
    # traceless directions: the part of the span orthogonal to w
    _, _, wvh = np.linalg.svd(w.reshape(1, -1))
    null_a = wvh[1:]
    dir_coords = null_a @ span
    directions = [sum(c * g for c, g in zip(row, basis)) for row in dir_coords]
    particular = sum(c * g for c, g in zip(particular_coords, basis))
    selection = "bloch-projection" if d == 2 else "hs-projection"
    if d > 2:
        limit = _ecp_limit(m, np.eye(d) / d, ECP_TOL, ECP_MAX_ITER)
        if limit is not None:
            particular = limit.reshape(d, d)
            selection = "ecp-heuristic"
    particular = (particular + particular.conj().T) / 2
    if not la.is_density(particular, 1e-8):
        raise NoFixedPointError("selected fixed point is not a density matrix")
    box = np.array(
        [[-_psd_extent(particular, dd, -1.0), _psd_extent(particular, dd, 1.0)] for dd in directions]
    ).reshape(-1, 2)
    return FixedPointFamily(
        particular=Operator(particular, dims),
        null_directions=tuple(Operator((dd + dd.conj().T) / 2, dims) for dd in directions),
        param_box=box,
        selection=selection,
        superoperator=m,
    )


def dctc_fixed_points(u, rho, null_tol: float = NULL_TOL) -> FixedPointFamily:
    """All self-consistent CV states for interaction ``u`` and CR input ``rho``."""
    uu, rho, cr, cv = _setup(u, rho)
    m = la.vectorize_cv_superoperator(uu, rho).data
    return fixed_point_family(m, cv, null_tol)


def max_entropy_member(fam: FixedPointFamily) -> Operator:
    """Deutsch's choice: the family member of greatest von Neumann entropy.

    For a qubit, entropy decreases strictly with Bloch-vector length, so this
    is the least-squares projection of the origin onto the affine family,
    clipped to ``param_box``.  For larger CV dimension the family's own
    particular solution is returned (see :func:`fixed_point_family`).
    """
    if fam.particular.n != 2:
        return fam.particular
    if fam.is_unique:
        return fam.particular
    p = la.bloch_from_state(fam.particular)
    b = np.column_stack([la.bloch_from_state(dd) for dd in fam.null_directions])
    c, *_ = np.linalg.lstsq(b, -p, rcond=None)
    c = np.clip(c, fam.param_box[:, 0], fam.param_box[:, 1])
    return fam.member(c)


@dataclass(frozen=True)
class EcpTrace:
    iterates: list[Operator]
    residuals: list[float]
    converged: bool
    seed_state: Operator

    @property
    def final(self) -> Operator:
        return self.iterates[-1]

    @property
    def steps(self) -> int:
        return len(self.residuals)


def ecp_iterate(u, rho, seed_state, tol: float = ECP_TOL, max_iter: int = ECP_MAX_ITER) -> EcpTrace:
    """Equivalent-circuit-picture recursion tau^(n+1) = d_U[rho, tau^(n)].

    Stops once consecutive iterates differ by at most ``tol`` in Frobenius
    norm; non-convergence within ``max_iter`` steps is reported, not raised.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    uu, rho, cr, cv = _setup(u, rho)
    seed_state = la.validate_density(as_operator(seed_state).with_dims(cv))
    m = la.vectorize_cv_superoperator(uu, rho).data
    d = seed_state.n
    v = la.vec(seed_state.data)
    iterates = [seed_state]
    residuals = []
    converged = False
    for _ in range(max_iter):
        nxt = m @ v
        res = float(np.linalg.norm(nxt - v))
        iterates.append(Operator(nxt.reshape(d, d), cv))
        residuals.append(res)
        v = nxt
        if res <= tol:
            converged = True
            break
    return EcpTrace(iterates, residuals, converged, seed_state)


def pctc_operator(u, cv_dim: int | None = None) -> Operator:
    """tr_CV[U], the (generally nonunitary) CR operator of the P-CTC map.

    The CV system is the last tensor factor of ``u`` unless ``cv_dim`` says
    otherwise; a bare 4x4 array is read as qubit (x) qubit.
    """
    u = as_operator(u)
    if cv_dim is None:
        cv_dim = u.dims[-1] if len(u.dims) > 1 else 2
    if u.n % cv_dim:
        raise DimensionMismatchError(f"CV dimension {cv_dim} does not divide {u.n}")
    cr = u.dims[:-1] if len(u.dims) > 1 and u.dims[-1] == cv_dim else (u.n // cv_dim,)
    t = u.data.reshape(u.n // cv_dim, cv_dim, u.n // cv_dim, cv_dim)
    return Operator(np.einsum("ajbj->ab", t), cr)


def _pctc_op_for(u, rho) -> Operator:
    uu, rho, cr, cv = _setup(u, rho)
    return pctc_operator(uu, math.prod(cv)).with_dims(cr)


def pctc_survival(u, rho) -> float:
    """N = tr{tr_CV[U] rho tr_CV[U]^dag}, the unnormalized P-CTC output trace."""
    a = _pctc_op_for(u, rho)
    rho = as_operator(rho)
    return float((a @ rho @ a.dag()).tr().real)


def pctc_cr_map(u, rho, tol: float = POSTSELECTION_TOL) -> Operator:
    """Normalized P-CTC output A rho A^dag / tr(A rho A^dag) with A = tr_CV[U]."""
    a = _pctc_op_for(u, rho)
    rho = as_operator(rho)
    out = a @ rho @ a.dag()
    n = out.tr().real
    if n < tol:
        raise PostselectionImpossibleError(
            f"P-CTC prescription fails: postselection weight {n:.3e} is below {tol:.0e}"
        )
    return out / n


def pctc_cv_state(u, rho) -> Operator:
    """The P-CTC CV state tr_CR[U (rho (x) I/d) U^dag].

    Identical, by construction, to one ECP step from the maximally mixed seed.
    It exists for every input, including those where :func:`pctc_cr_map` fails.
    """
    uu, rho, cr, cv = _setup(u, rho)
    return d_map(uu, rho, la.maximally_mixed(math.prod(cv)).with_dims(cv))


class IdempotencyResidual(NamedTuple):
    matrix: Operator
    norm: float
    bloch: np.ndarray


def idempotency_residual(u, rho) -> IdempotencyResidual:
    """R = sum_k r_k d_U[rho, sigma_k] with r_k the Bloch vector of the P-CTC CV state.

    R vanishes exactly when the P-CTC CV state is also a D-CTC fixed point,
    because d_U[rho, tau_P] - tau_P = R / 2.
    """
    uu, rho, cr, cv = _setup(u, rho)
    if math.prod(cv) != 2:
        raise DimensionMismatchError("idempotency condition is defined for a qubit CV system")
    r = la.bloch_from_state(pctc_cv_state(uu, rho))
    total = Operator(np.zeros((2, 2)), cv)
    for k in range(3):
        total = total + r[k] * d_map(uu, rho, la.pauli(k + 1).with_dims(cv))
    return IdempotencyResidual(total, total.norm(), r)
