"""Matrix serialization and state literals.

Matrix JSON: ``{"dims": [d1, d2, ...], "entries": [[re, im], ...]}`` with the
entries of the square matrix listed row-major.  Python floats serialize with
``repr`` precision, so a dump/load cycle is lossless.

State literals:

* ``|s><s|`` where ``s`` is a string of single-qubit labels from
  ``0 1 + - R L`` (R, L are the +1, -1 eigenstates of sigma_y), e.g.
  ``|0><0|``, ``|+-><+-|``, ``|00><00|``;
* ``bell`` for |Phi+><Phi+| = (|00> + |11>)(<00| + <11|)/2;
* ``mixed`` for I/2 and ``mixed:n`` for the n-qubit maximally mixed state.
"""
from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from . import linalg as la
from .linalg import Operator

_S = 1 / np.sqrt(2)
KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([_S, _S], dtype=complex),
    "-": np.array([_S, -_S], dtype=complex),
    "R": np.array([_S, 1j * _S], dtype=complex),
    "L": np.array([_S, -1j * _S], dtype=complex),
}
_PROJ = re.compile(r"^\|([01+\-RL]+)><([01+\-RL]+)\|$")
_MIXED = re.compile(r"^mixed(?::([1-9][0-9]*))?$")


class ParseError(ValueError):
    code = "parse-error"


def matrix_to_json(m) -> dict:
    m = la.as_operator(m)
    flat = m.data.reshape(-1)
    return {"dims": [int(d) for d in m.dims], "entries": [[float(z.real), float(z.imag)] for z in flat]}


def matrix_from_json(obj) -> Operator:
    try:
        dims = [int(d) for d in obj["dims"]]
        entries = np.asarray(obj["entries"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed matrix object: {exc}") from None
    n = int(np.prod(dims))
    if entries.shape != (n * n, 2):
        raise ParseError(f"expected {n * n} [re, im] pairs for dims {dims}, got shape {entries.shape}")
    data = (entries[:, 0] + 1j * entries[:, 1]).reshape(n, n)
    return Operator(data, dims)


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def load_matrix_file(path) -> Operator:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc.msg}") from None
    return matrix_from_json(obj)


def parse_state_literal(text: str) -> Operator:
    s = text.strip()
    if s == "bell":
        v = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
        return Operator(np.outer(v, v.conj()), (2, 2))
    m = _MIXED.match(s)
    if m:
        n = int(m.group(1) or 1)
        return Operator(np.eye(2**n, dtype=complex) / 2**n, (2,) * n)
    m = _PROJ.match(s)
    if not m:
        raise ParseError(f"unrecognized state literal {text!r}")
    bra, ket = m.group(1), m.group(2)
    if bra != ket:
        raise ParseError(f"state literal must be a projector |s><s|, got {text!r}")
    v = KETS[bra[0]]
    for ch in bra[1:]:
        v = np.kron(v, KETS[ch])
    return Operator(np.outer(v, v.conj()), (2,) * len(bra))
