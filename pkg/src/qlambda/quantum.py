"""Dense state-vector numerics.

A register on n qubits is a complex numpy vector of length 2**n.  Qubit 1 is
the most significant digit of the basis index, so ``|b1...bn>`` sits at index
``b1*2**(n-1) + ... + bn``.  Qubit indices in the public API are 1-based.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .errors import RegisterError

UNITARY_TOL = 1e-9
NORM_TOL = 1e-9


def num_qubits(q: np.ndarray) -> int:
    n = len(q).bit_length() - 1
    if len(q) != 1 << n:
        raise RegisterError(f"register length {len(q)} is not a power of two")
    return n


def basis(bits) -> np.ndarray:
    """Basis register for a bit sequence such as ``"01"`` or ``[0, 1]``."""
    digits = [int(b) for b in bits]
    if any(d not in (0, 1) for d in digits):
        raise RegisterError(f"not a bit string: {bits!r}")
    q = np.zeros(1 << len(digits), dtype=complex)
    q[int("".join(map(str, digits)) or "0", 2)] = 1
    return q


def scalar_one() -> np.ndarray:
    """The register on zero qubits, unit for :func:`tensor`."""
    return np.ones(1, dtype=complex)


def tensor(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    return np.kron(q1, q2)


def is_normalized(q: np.ndarray, tol: float = NORM_TOL) -> bool:
    return abs(np.linalg.norm(q) - 1.0) <= tol


def apply_lifted(u: np.ndarray, targets, q: np.ndarray) -> np.ndarray:
    """Apply ``u`` to qubits ``targets`` (1-based) of ``q``, identity elsewhere.

    The k-th target plays the role of the k-th (most significant first) qubit
    of ``u``.
    """
    m = num_qubits(q)
    targets = [int(t) for t in targets]
    n = len(targets)
    if u.shape != (1 << n, 1 << n):
        raise RegisterError(f"gate of shape {u.shape} does not act on {n} qubits")
    if len(set(targets)) != n:
        raise RegisterError(f"duplicate targets {targets}")
    if any(t < 1 or t > m for t in targets):
        raise RegisterError(f"targets {targets} out of range for {m} qubits")
    axes = [t - 1 for t in targets]
    state = q.reshape([2] * m)
    gate = u.reshape([2] * (2 * n))
    # contract gate input axes with the target axes, output axes land in front
    out = np.tensordot(gate, state, axes=(list(range(n, 2 * n)), axes))
    out = np.moveaxis(out, list(range(n)), axes)
    return out.reshape(-1)


def validate_permutation(sigma, n: int | None = None) -> list[int]:
    sigma = [int(s) for s in sigma]
    if sorted(sigma) != list(range(1, len(sigma) + 1)):
        raise RegisterError(f"{sigma} is not a permutation of 1..{len(sigma)}")
    if n is not None and len(sigma) != n:
        raise RegisterError(f"permutation on {len(sigma)} points applied to {n} qubits")
    return sigma


def invert_permutation(sigma) -> list[int]:
    sigma = validate_permutation(sigma)
    inv = [0] * len(sigma)
    for i, s in enumerate(sigma, start=1):
        inv[s - 1] = i
    return inv


def compose_permutations(sigma, rho) -> list[int]:
    """``sigma o rho`` as functions: ``i -> sigma(rho(i))``."""
    return [sigma[r - 1] for r in rho]


def permute(sigma, q: np.ndarray) -> np.ndarray:
    """The unitary sending ``|b1...bn>`` to ``|b_sigma(1)...b_sigma(n)>``.

    ``sigma`` lists the 1-based images ``sigma(1), ..., sigma(n)``.
    """
    n = num_qubits(q)
    sigma = validate_permutation(sigma, n)
    if n == 0:
        return q.copy()
    return np.transpose(q.reshape([2] * n), [s - 1 for s in sigma]).reshape(-1)


def validate_unitary(m, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise RegisterError(f"matrix of shape {m.shape} is not square")
    d = m.shape[0]
    if d < 2 or d & (d - 1):
        raise RegisterError(f"dimension {d} is not a power of two")
    dev = m.conj().T @ m - np.eye(d)
    return float(np.max(np.abs(dev))) <= tol


@dataclass(frozen=True)
class GateSignature:
    name: str
    arity: int
    matrix: np.ndarray = field(repr=False, compare=False)


class GateLibrary(dict):
    """Map from gate name to :class:`GateSignature`."""

    def add(self, name: str, matrix) -> GateSignature:
        if not name[:1].isupper():
            raise RegisterError(f"gate name {name!r} must start with an uppercase letter")
        matrix = np.asarray(matrix, dtype=complex)
        if not validate_unitary(matrix):
            raise RegisterError(f"gate {name} is not unitary")
        sig = GateSignature(name, matrix.shape[0].bit_length() - 1, matrix)
        self[name] = sig
        return sig

    def arity(self, name: str) -> int:
        return self[name].arity

    def matrix(self, name: str) -> np.ndarray:
        return self[name].matrix

    def copy(self) -> "GateLibrary":
        return GateLibrary(self)


_S2 = 1 / sqrt(2)


def _controlled(u):
    out = np.eye(4, dtype=complex)
    out[2:, 2:] = u
    return out


def builtin_gates() -> GateLibrary:
    lib = GateLibrary()
    x = np.array([[0, 1], [1, 0]])
    z = np.array([[1, 0], [0, -1]])
    lib.add("H", np.array([[1, 1], [1, -1]]) * _S2)
    lib.add("X", x)
    lib.add("Y", np.array([[0, -1j], [1j, 0]]))
    lib.add("Z", z)
    lib.add("S", np.array([[1, 0], [0, 1j]]))
    lib.add("T", np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]]))
    lib.add("CNOT", _controlled(x))
    lib.add("CZ", _controlled(z))
    lib.add("SWAP", np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]))
    toffoli = np.eye(8)
    toffoli[6:, 6:] = x
    lib.add("TOFFOLI", toffoli)
    return lib


DEFAULT_GATES = builtin_gates()


def load_gate_config(path, base: GateLibrary | None = None) -> GateLibrary:
    """Read extra gates from JSON: ``{name: {"arity": n, "matrix": rows}}``.

    Each row is a list of ``[re, im]`` pairs.  Gates failing the unitarity
    check are rejected.
    """
    with open(path) as fh:
        spec = json.load(fh)
    return gates_from_json(spec, base)


def gates_from_json(spec: dict, base: GateLibrary | None = None) -> GateLibrary:
    lib = (base if base is not None else DEFAULT_GATES).copy()
    if not isinstance(spec, dict):
        raise RegisterError("gate config must be a JSON object")
    for name, entry in spec.items():
        try:
            arity = int(entry["arity"])
            rows = [[complex(re, im) for re, im in row] for row in entry["matrix"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise RegisterError(f"malformed gate entry {name!r}: {exc}") from None
        matrix = np.array(rows, dtype=complex)
        if arity < 1 or matrix.shape != (1 << arity, 1 << arity):
            raise RegisterError(f"gate {name}: matrix shape {matrix.shape} does not match arity {arity}")
        lib.add(name, matrix)
    return lib


def register_to_json(q: np.ndarray) -> list[list[float]]:
    return [[float(a.real), float(a.imag)] for a in q]


def register_from_json(rows) -> np.ndarray:
    return np.array([complex(re, im) for re, im in rows], dtype=complex)
