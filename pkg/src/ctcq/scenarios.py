"""Canonical interactions with closed-form D-CTC and P-CTC states.

Factor order is CR factors first, the CV qubit last.  ``CNOT^{a,b}`` names
(control, target) factors, one-based as in the usual circuit notation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import linalg as la
from .errors import DegenerateDenominatorError
from .linalg import Operator

EVEN_TOL = 1e-9

P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def cnot(control: int, target: int, n: int) -> np.ndarray:
    """CNOT on ``n`` qubits with one-based control and target factors."""
    c, t = control - 1, target - 1
    first = [np.eye(2)] * n
    second = [np.eye(2)] * n
    first[c], second[c], second[t] = P0, P1, la.X
    return la.kron(*first).data + la.kron(*second).data


def swap_gate(a: int, b: int, n: int) -> np.ndarray:
    return la.embed(SWAP, [a - 1, b - 1], [2] * n).data


def swap_power_unitary(p: float) -> np.ndarray:
    """Two-term power of SWAP; exact for any real p with no matrix logarithm."""
    ph = np.exp(-1j * np.pi * p)
    return (1 + ph) / 2 * np.eye(4, dtype=complex) + (1 - ph) / 2 * SWAP


def is_even_integer(p: float, tol: float = EVEN_TOL) -> bool:
    return abs(p - 2 * round(p / 2)) < tol


@dataclass(frozen=True)
class Scenario:
    """A named interaction, default CR input and optional closed-form states.

    ``oracle(rho, **params)`` returns a dict with any of the keys
    ``rho_D``, ``tau_D``, ``rho_P``, ``tau_P``; absent keys have no closed form
    for that input (for instance ``rho_P`` when postselection fails).
    """

    name: str
    unitary: Operator
    cr_dims: tuple[int, ...]
    cv_dim: int
    default_rho: Operator
    params: dict = field(default_factory=dict)
    oracle: Callable[..., dict] | None = field(default=None, repr=False)
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        u = self.unitary.data
        if np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() > 1e-12:
            raise ValueError(f"scenario {self.name!r} unitary is not unitary")
        if self.unitary.dims != self.cr_dims + (self.cv_dim,):
            raise ValueError("scenario dims are inconsistent")

    def oracle_states(self, rho=None, **params) -> dict:
        if self.oracle is None:
            return {}
        rho = self.default_rho if rho is None else la.as_operator(rho, self.cr_dims)
        return self.oracle(rho, **{**self.params, **params})


def _grandfather_oracle(rho: Operator, **_) -> dict:
    r = rho.data
    r1 = (r[0, 1] + r[1, 0]).real
    tau = (r + la.X @ r @ la.X) / 2
    out = {
        "tau_D": Operator(tau),
        "rho_D": Operator(0.5 * np.array([[1, r1**2], [r1**2, 1]], dtype=complex)),
        "tau_P": Operator(tau),
    }
    if r[0, 0].real > 1e-12:
        out["rho_P"] = Operator(np.outer(PLUS, PLUS.conj()))
    return out


def grandfather() -> Scenario:
    """Qubit that flips its own past: U = SWAP * CNOT^{2,1} (CV controls CR)."""
    u = SWAP @ cnot(2, 1, 2)
    return Scenario(
        name="grandfather",
        unitary=Operator(u, (2, 2)),
        cr_dims=(2,),
        cv_dim=2,
        default_rho=Operator(np.diag([1, 0]).astype(complex)),
        oracle=_grandfather_oracle,
        notes=(
            "P-CTC output undefined when <0|rho|0> = 0",
            "D-CTC fixed point nonunique when <1|rho|1> = 0 (every diagonal state); tau_D is its max-entropy member",
        ),
    )


def _unproven_oracle(rho: Operator, g: float | None = None, **_) -> dict:
    out = {
        "rho_P": Operator(np.outer(PHI_PLUS, PHI_PLUS.conj()), (2, 2)),
        "tau_P": la.maximally_mixed(2),
    }
    if g is not None:
        if not 0 <= g <= 1:
            raise ValueError("g must lie in [0, 1]")
        out["tau_D"] = Operator(np.diag([g, 1 - g]).astype(complex))
        out["rho_D"] = Operator(np.diag([g, 0, 0, 1 - g]).astype(complex), (2, 2))
    return out


def unproven_theorem() -> Scenario:
    """Book, mathematician and CV: U = SWAP^{2,3} * CNOT^{1,2} * CNOT^{3,1}.

    The closed forms hold for the preset input |00><00|; pass ``g`` to the
    oracle for a member of the one-parameter D-CTC family.
    """
    u = swap_gate(2, 3, 3) @ cnot(1, 2, 3) @ cnot(3, 1, 3)
    return Scenario(
        name="unproven-theorem",
        unitary=Operator(u, (2, 2, 2)),
        cr_dims=(2, 2),
        cv_dim=2,
        default_rho=Operator(np.diag([1, 0, 0, 0]).astype(complex), (2, 2)),
        params={"g": 0.5},
        oracle=_unproven_oracle,
    )


def _swap_oracle(rho: Operator, p: float = 1.0, **_) -> dict:
    c2 = math.cos(math.pi * p / 2) ** 2
    out = {
        "rho_P": rho,
        "tau_P": Operator(c2 * np.eye(2) / 2 + (1 - c2) * rho.data),
    }
    if not is_even_integer(p):
        out["tau_D"] = rho
        out["rho_D"] = rho
    else:
        out["rho_D"] = rho
    return out


def power_swap(p: float) -> Scenario:
    """Partial SWAP between CR and CV qubits; even p is the trivial identity."""
    if not math.isfinite(p):
        raise ValueError("p must be finite")
    notes = ("even-integer p: interaction is the identity, every CV state is fixed",) if is_even_integer(p) else ()
    return Scenario(
        name="power-swap",
        unitary=Operator(swap_power_unitary(p), (2, 2)),
        cr_dims=(2,),
        cv_dim=2,
        default_rho=Operator(np.diag([1, 0]).astype(complex)),
        params={"p": float(p)},
        oracle=_swap_oracle,
        notes=notes,
    )


SCENARIOS = {
    "grandfather": lambda **kw: grandfather(),
    "unproven-theorem": lambda **kw: unproven_theorem(),
    "power-swap": lambda p=1.0, **kw: power_swap(p),
}


def get_scenario(name: str, p: float | None = None) -> Scenario:
    if name not in SCENARIOS:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    return SCENARIOS[name](**({} if p is None else {"p": p}))


def swap_ecp_closed_form(rho, tau0, p: float, n: int) -> Operator:
    """ECP iterate tau^(n+1) for SWAP^p: cos^{2(n+1)}(pi p/2)(tau0 - rho) + rho.

    Exact only when tau0 commutes with rho (true for the maximally mixed
    seed); otherwise the commutator term of the SWAP^p map survives.
    """
    rho = la.as_operator(rho)
    tau0 = la.as_operator(tau0)
    c2 = math.cos(math.pi * p / 2) ** 2
    return (tau0 - rho) * c2 ** (n + 1) + rho


def geometric_series_check(p: float, n: int) -> float:
    """|sum_{k<=n} cos^{2k} - (1 - cos^{2(n+1)}) / sin^2| at angle pi p / 2."""
    c2 = math.cos(math.pi * p / 2) ** 2
    s2 = math.sin(math.pi * p / 2) ** 2
    if s2 < 1e-12:
        raise DegenerateDenominatorError(f"sin^2(pi p/2) = {s2:.3e} for p = {p}")
    direct = math.fsum(c2**k for k in range(n + 1))
    return abs(direct - (1 - c2 ** (n + 1)) / s2)
