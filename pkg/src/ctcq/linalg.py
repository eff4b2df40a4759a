"""Dense complex operators with tensor-factor bookkeeping.

Every matrix that flows through the package is an :class:`Operator`: a square
complex array together with the ordered list of tensor-factor dimensions it
acts on.  Partial traces, embeddings and products consult those dims, so call
sites never have to remember how a 16x16 matrix splits into factors.

Factor indices are zero-based throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DimensionMismatchError, NotADensityError, UnphysicalBlochVectorError

DEFAULT_TOL = 1e-9

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, X, Y, Z)

for _m in PAULIS:
    _m.setflags(write=False)


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix acting on a tensor product of factors.

    ``dims`` lists the factor dimensions; their product is the side length.
    Instances are immutable: the underlying array is flagged read-only.
    """

    data: np.ndarray
    dims: tuple[int, ...]

    def __init__(self, data, dims: Sequence[int] | None = None):
        arr = np.array(data, dtype=complex)
        if arr.ndim == 0:
            arr = arr.reshape(1, 1)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise DimensionMismatchError(f"operator must be square, got shape {arr.shape}")
        if dims is None:
            dims = (arr.shape[0],)
        dims = tuple(int(d) for d in dims)
        if any(d < 1 for d in dims) or math.prod(dims) != arr.shape[0]:
            raise DimensionMismatchError(f"dims {dims} do not multiply to side length {arr.shape[0]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("operator has non-finite entries")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "dims", dims)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def dag(self) -> "Operator":
        return Operator(self.data.conj().T, self.dims)

    def tr(self) -> complex:
        return complex(np.trace(self.data))

    def norm(self) -> float:
        """Frobenius norm."""
        return float(np.linalg.norm(self.data))

    def herm(self) -> "Operator":
        """Hermitian part, (M + M^dag) / 2."""
        return Operator((self.data + self.data.conj().T) / 2, self.dims)

    def with_dims(self, dims: Sequence[int]) -> "Operator":
        return Operator(self.data, dims)

    def _coerce(self, other) -> "Operator":
        other = as_operator(other, self.dims if not isinstance(other, Operator) else None)
        if other.n != self.n:
            raise DimensionMismatchError(f"size mismatch: {self.n} vs {other.n}")
        return other

    def __matmul__(self, other):
        other = self._coerce(other)
        return Operator(self.data @ other.data, self.dims)

    def __rmatmul__(self, other):
        other = self._coerce(other)
        return Operator(other.data @ self.data, self.dims)

    def __add__(self, other):
        other = self._coerce(other)
        return Operator(self.data + other.data, self.dims)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return Operator(self.data - other.data, self.dims)

    def __rsub__(self, other):
        other = self._coerce(other)
        return Operator(other.data - self.data, self.dims)

    def __neg__(self):
        return Operator(-self.data, self.dims)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return Operator(self.data * scalar, self.dims)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return Operator(self.data / scalar, self.dims)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.data.copy() if copy else self.data
        return self.data.astype(dtype)

    def __repr__(self) -> str:
        return f"Operator(dims={self.dims},\n{np.array2string(self.data, precision=6, suppress_small=True)})"


def as_operator(x, dims: Sequence[int] | None = None) -> Operator:
    """Wrap ``x`` as an :class:`Operator`; an existing operator keeps its dims."""
    if isinstance(x, Operator):
        if dims is not None and tuple(dims) != x.dims:
            return Operator(x.data, dims)
        return x
    return Operator(x, dims)


def identity(dims: int | Sequence[int]) -> Operator:
    if isinstance(dims, (int, np.integer)):
        dims = (int(dims),)
    return Operator(np.eye(math.prod(dims)), dims)


def maximally_mixed(d: int) -> Operator:
    return Operator(np.eye(d) / d, (d,))


def pauli(k: int) -> Operator:
    """Pauli matrix sigma_k, with sigma_0 the identity."""
    return Operator(PAULIS[k], (2,))


def ket(d: int, i: int) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    v[i] = 1.0
    return v


def projector(vec) -> Operator:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    return Operator(np.outer(v, v.conj()))


def kron(*ops) -> Operator:
    """Kronecker product; dims concatenate in argument order."""
    if not ops:
        raise ValueError("kron needs at least one operator")
    ops = [as_operator(o) for o in ops]
    data = ops[0].data
    dims = list(ops[0].dims)
    for o in ops[1:]:
        data = np.kron(data, o.data)
        dims.extend(o.dims)
    return Operator(data, dims)


def dagger(m) -> Operator:
    return as_operator(m).dag()


def partial_trace(m, keep: Iterable[int]) -> Operator:
    """Trace out every factor not listed in ``keep``.

    The result carries the kept dims in their original order.  An empty
    ``keep`` gives the full trace as a 1x1 operator.
    """
    m = as_operator(m)
    dims = m.dims
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    for k in keep:
        if not 0 <= k < n:
            raise IndexError(f"factor index {k} out of range for dims {dims}")
    t = m.data.reshape(dims + dims)
    rows = list(range(n))
    cols = [n + i if i in keep else i for i in range(n)]
    out = keep + [n + i for i in keep]
    res = np.einsum(t, rows + cols, out)
    kept = tuple(dims[i] for i in keep)
    side = math.prod(kept)
    return Operator(res.reshape(side, side), kept or (1,))


def permute_factors(m, order: Sequence[int]) -> Operator:
    """Reorder tensor factors: factor ``i`` of the result is factor ``order[i]`` of ``m``."""
    m = as_operator(m)
    n = len(m.dims)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of {n} factors")
    t = m.data.reshape(m.dims + m.dims)
    t = t.transpose(order + [n + i for i in order])
    dims = tuple(m.dims[i] for i in order)
    return Operator(t.reshape(m.n, m.n), dims)


def embed(op, targets: Sequence[int], dims: Sequence[int]) -> Operator:
    """Lift ``op`` acting on factors ``targets`` to the full space ``dims``.

    ``embed(U, [0, 2], [2, 2, 2])`` is the operator written U^{1,3} in
    superscript notation: U acts on the first and third qubits, identity on
    the second.
    """
    op = as_operator(op)
    dims = tuple(int(d) for d in dims)
    targets = [int(t) for t in targets]
    if len(set(targets)) != len(targets):
        raise ValueError("repeated target factor")
    want = math.prod(dims[t] for t in targets)
    if op.n != want:
        raise DimensionMismatchError(f"operator of size {op.n} cannot act on factors {targets} of {dims}")
    rest = [i for i in range(len(dims)) if i not in targets]
    order = targets + rest
    parts = [Operator(op.data, [dims[t] for t in targets])]
    if rest:
        parts.append(identity([dims[r] for r in rest]))
    full = kron(*parts)
    return permute_factors(full, list(np.argsort(order)))


def is_hermitian(m, tol: float = DEFAULT_TOL) -> bool:
    a = np.asarray(m)
    return bool(np.linalg.norm(a - a.conj().T) <= tol)


def validate_density(m, tol: float = DEFAULT_TOL, dims: Sequence[int] | None = None) -> Operator:
    """Return ``m`` as an operator after checking it is a density matrix.

    Checks Hermiticity (Frobenius), unit trace and PSD (smallest eigenvalue of
    the Hermitian part) each against ``tol``.  Raises :class:`NotADensityError`.
    """
    op = as_operator(m, dims)
    a = op.data
    herm_err = np.linalg.norm(a - a.conj().T)
    if herm_err > tol:
        raise NotADensityError(f"not Hermitian (residual {herm_err:.3e})")
    tr = np.trace(a)
    if abs(tr - 1) > tol:
        raise NotADensityError(f"trace {tr.real:.12g} differs from 1")
    lo = np.linalg.eigvalsh((a + a.conj().T) / 2)[0]
    if lo < -tol:
        raise NotADensityError(f"negative eigenvalue {lo:.3e}")
    return op


def is_density(m, tol: float = DEFAULT_TOL) -> bool:
    try:
        validate_density(m, tol)
    except (NotADensityError, DimensionMismatchError):
        return False
    return True


def bloch_from_state(rho, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Bloch vector (tr[X rho], tr[Y rho], tr[Z rho]) of a qubit operator."""
    a = np.asarray(as_operator(rho).data)
    if a.shape != (2, 2):
        raise DimensionMismatchError(f"Bloch vector needs a 2x2 operator, got {a.shape}")
    r = np.array([np.trace(s @ a) for s in PAULIS[1:]])
    if np.max(np.abs(r.imag)) > tol:
        raise NotADensityError("Bloch components are not real; operator is not Hermitian")
    return r.real.copy()


def state_from_bloch(r, tol: float = DEFAULT_TOL, check: bool = True) -> Operator:
    """Qubit operator (I + r.sigma) / 2.

    With ``check`` the vector must lie in the Bloch ball up to ``tol``.
    Sampled or weak-value reconstructions may legitimately fall outside, so
    callers in those modes pass ``check=False``.
    """
    r = np.asarray(r, dtype=float).reshape(3)
    if not np.all(np.isfinite(r)):
        raise UnphysicalBlochVectorError("Bloch vector has non-finite entries")
    if check and np.linalg.norm(r) > 1 + tol:
        raise UnphysicalBlochVectorError(f"|r| = {np.linalg.norm(r):.12g} exceeds 1")
    return Operator((I2 + r[0] * X + r[1] * Y + r[2] * Z) / 2, (2,))


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def random_unitary(dim: int, seed=None) -> Operator:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix.

    The phases of R's diagonal are absorbed into Q, which is what makes the
    distribution Haar rather than merely unitary.
    """
    if dim < 1:
        raise ValueError("dim must be positive")
    rng = _rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return Operator(q * (d / np.abs(d)), (dim,))


def random_density(dim: int, seed=None, rank: int | None = None) -> Operator:
    """Random density matrix G G^dag / tr(G G^dag), G a dim x rank Ginibre matrix."""
    rng = _rng(seed)
    k = dim if rank is None else rank
    g = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    rho = g @ g.conj().T
    return Operator(rho / np.trace(rho).real, (dim,))


def random_hermitian(dim: int, seed=None) -> Operator:
    rng = _rng(seed)
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return Operator((g + g.conj().T) / 2, (dim,))


@dataclass(frozen=True)
class PauliDecomposition:
    """Two-qubit operator written as sum_{mu,nu} c[mu, nu] sigma_mu (x) sigma_nu.

    ``aops[nu]`` collects the first-factor part, A_nu = sum_mu c[mu, nu] sigma_mu,
    so that U = sum_nu A_nu (x) sigma_nu.
    """

    coeffs: np.ndarray
    aops: tuple[Operator, Operator, Operator, Operator]

    @property
    def coefficient_norm(self) -> float:
        """sum |c|^2; equals 1 for a unitary under the 1/4-trace convention."""
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def reassemble(self) -> Operator:
        u = sum(self.coeffs[m, v] * np.kron(PAULIS[m], PAULIS[v]) for m in range(4) for v in range(4))
        return Operator(u, (2, 2))


def pauli_expand(u) -> PauliDecomposition:
    """Coefficients c[mu, nu] = tr[(sigma_mu (x) sigma_nu)^dag U] / 4 of a 4x4 operator."""
    a = as_operator(u).data
    if a.shape != (4, 4):
        raise DimensionMismatchError(f"Pauli expansion needs a 4x4 operator, got {a.shape}")
    coeffs = np.empty((4, 4), dtype=complex)
    for m, v in product(range(4), repeat=2):
        coeffs[m, v] = np.trace(np.kron(PAULIS[m], PAULIS[v]).conj().T @ a) / 4
    aops = tuple(Operator(sum(coeffs[m, v] * PAULIS[m] for m in range(4)), (2,)) for v in range(4))
    return PauliDecomposition(coeffs, aops)


def vec(m) -> np.ndarray:
    """Row-major vectorization, vec(X)[a*d + b] = X[a, b]."""
    return np.asarray(m).reshape(-1)


def unvec(v, dims: Sequence[int] | None = None) -> Operator:
    v = np.asarray(v)
    d = math.isqrt(v.size)
    if d * d != v.size:
        raise DimensionMismatchError(f"vector of length {v.size} is not a vectorized square matrix")
    return Operator(v.reshape(d, d), dims)


def superoperator_matrix(fn: Callable[[Operator], Operator], dims: Sequence[int]) -> np.ndarray:
    """Matrix M with vec(fn(X)) = M vec(X), built column by column from matrix units."""
    d = math.prod(dims)
    cols = []
    for a, b in product(range(d), repeat=2):
        unit = np.zeros((d, d), dtype=complex)
        unit[a, b] = 1.0
        cols.append(vec(np.asarray(fn(Operator(unit, dims)))))
    return np.stack(cols, axis=1)


def split_dims(u, rho) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Chronology-respecting and chronology-violating factor dims of ``u``.

    The CR factors come first and match ``rho``; the CV factors are whatever
    remains of ``u``.
    """
    u = as_operator(u)
    rho = as_operator(rho)
    if u.n % rho.n:
        raise DimensionMismatchError(f"input of size {rho.n} does not divide interaction of size {u.n}")
    k = len(rho.dims)
    if u.dims[:k] == rho.dims and len(u.dims) > k:
        return rho.dims, u.dims[k:]
    return rho.dims, (u.n // rho.n,)


def vectorize_cv_superoperator(u, rho) -> Operator:
    """Matrix of the linear map X -> tr_CR[U (rho (x) X) U^dag] in row-major vec form."""
    u = as_operator(u)
    rho = as_operator(rho)
    cr, cv = split_dims(u, rho)
    full = cr + cv
    uu = Operator(u.data, full)
    cv_idx = range(len(cr), len(full))

    def image(x: Operator) -> Operator:
        return partial_trace(uu @ kron(rho, x) @ uu.dag(), cv_idx)

    m = superoperator_matrix(image, cv)
    return Operator(m, (m.shape[0],))


def von_neumann_entropy(rho) -> float:
    """-sum lambda log lambda in nats, with 0 log 0 = 0."""
    a = np.asarray(as_operator(rho).data)
    lam = np.linalg.eigvalsh((a + a.conj().T) / 2)
    lam = lam[lam > 1e-15]
    return float(-np.sum(lam * np.log(lam)))
