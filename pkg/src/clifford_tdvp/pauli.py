"""Signed Pauli strings and real-weighted Pauli sums.

An n-qubit Pauli string is stored in binary symplectic form as two bit
vectors ``x`` and ``z`` plus a sign.  Site ``j`` carries

    (x_j, z_j) = (0, 0) -> I,  (1, 0) -> X,  (1, 1) -> Y,  (0, 1) -> Z

and the represented operator is ``sign * P_0 (x) P_1 (x) ... (x) P_{n-1}``.
Because every factor is Hermitian the string is Hermitian and a sign in
{+1, -1} is all the phase information it needs.  Internally a product of
strings is tracked in "XZ form" ``i**e X^x Z^z``; the Hermitian string with
bits ``(x, z)`` equals ``i**(x.z) X^x Z^z``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PauliString",
    "PauliSum",
    "ModelParams",
    "pauli_from_labels",
    "multiply",
    "multiply_phase",
    "commutes",
    "build_model_hamiltonian",
    "NonHermitianProductError",
]

_LETTERS = "IXYZ"
_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}

#: Coefficients smaller than this are dropped when terms are combined.
PRUNE_THRESHOLD = 1e-15


class NonHermitianProductError(ValueError):
    """Raised when a product of Hermitian Pauli strings carries a factor of +-i."""


def _as_bits(v, n=None) -> np.ndarray:
    a = np.asarray(v, dtype=np.uint8).reshape(-1)
    if n is not None and a.shape[0] != n:
        raise ValueError(f"expected {n} bits, got {a.shape[0]}")
    if np.any(a > 1):
        raise ValueError("bit vectors must contain only 0 and 1")
    a = a.copy()
    a.flags.writeable = False
    return a


class PauliString:
    """Hermitian n-qubit Pauli operator ``sign * P_0 (x) ... (x) P_{n-1}``.

    Instances are immutable and hashable; equality includes the sign.
    """

    __slots__ = ("x", "z", "sign")

    def __init__(self, x, z, sign: int = 1):
        x = _as_bits(x)
        z = _as_bits(z, x.shape[0])
        if x.shape[0] == 0:
            raise ValueError("a Pauli string needs at least one qubit")
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {sign!r}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "sign", int(sign))

    def __setattr__(self, name, value):
        raise AttributeError("PauliString is immutable")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(np.zeros(n, np.uint8), np.zeros(n, np.uint8))

    @classmethod
    def single(cls, n: int, site: int, letter: str, sign: int = 1) -> "PauliString":
        """``letter`` acting on ``site`` of an ``n``-qubit chain."""
        if not 0 <= site < n:
            raise IndexError(f"site {site} out of range for {n} qubits")
        labels = ["I"] * n
        labels[site] = letter
        return pauli_from_labels("".join(labels), sign)

    @classmethod
    def from_label(cls, text: str) -> "PauliString":
        """Parse ``"[+|-]XIZY..."``; the sign prefix is optional."""
        text = text.strip()
        sign = 1
        if text and text[0] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        return pauli_from_labels(text, sign)

    @property
    def n_qubits(self) -> int:
        return int(self.x.shape[0])

    @property
    def weight(self) -> int:
        return int(np.count_nonzero(self.x | self.z))

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.x | self.z)

    @property
    def codes(self) -> np.ndarray:
        """Per-site index into ``"IXYZ"``."""
        x = self.x.astype(np.int64)
        z = self.z.astype(np.int64)
        return x * (1 + z) + (1 - x) * 3 * z

    def labels(self) -> str:
        return "".join(_LETTERS[c] for c in self.codes)

    def label(self) -> str:
        """Signed text label, e.g. ``"-XIZ"``."""
        return ("-" if self.sign < 0 else "+") + self.labels()

    def is_identity(self) -> bool:
        return not (self.x.any() or self.z.any())

    def with_sign(self, sign: int) -> "PauliString":
        return PauliString(self.x, self.z, sign)

    def key(self) -> bytes:
        """Sign-free canonical key used for deduplication and hashing."""
        return self.z.tobytes() + self.x.tobytes()

    def __neg__(self) -> "PauliString":
        return PauliString(self.x, self.z, -self.sign)

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliString):
            return NotImplemented
        return (
            self.sign == other.sign
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.z, other.z)
        )

    def __hash__(self) -> int:
        return hash((self.sign, self.key()))

    def __repr__(self) -> str:
        return f"PauliString({self.label()!r})"

    def __reduce__(self):
        return (PauliString, (np.asarray(self.x), np.asarray(self.z), self.sign))


def pauli_from_labels(labels: str, sign: int = 1) -> PauliString:
    """Encode a text label over ``{I, X, Y, Z}`` (site 0 first)."""
    if len(labels) == 0:
        raise ValueError("empty Pauli label")
    x = np.zeros(len(labels), np.uint8)
    z = np.zeros(len(labels), np.uint8)
    for j, c in enumerate(labels):
        try:
            x[j], z[j] = _BITS[c.upper()]
        except KeyError:
            raise ValueError(
                f"invalid Pauli character {c!r} at position {j} in {labels!r}"
            ) from None
    return PauliString(x, z, sign)


def _check_sizes(p: PauliString, q: PauliString) -> None:
    if p.n_qubits != q.n_qubits:
        raise ValueError(f"size mismatch: {p.n_qubits} vs {q.n_qubits} qubits")


def _xz_exponent(p: PauliString) -> int:
    """Exponent ``e`` with ``p = i**e X^x Z^z``."""
    e = int(np.dot(p.x.astype(np.int64), p.z))
    return (e + (2 if p.sign < 0 else 0)) % 4


def multiply_phase(p: PauliString, q: PauliString) -> tuple[int, PauliString]:
    """Full Pauli product ``p q = i**e * r`` with ``r`` a +1-signed string.

    >>> multiply_phase(pauli_from_labels("X"), pauli_from_labels("Z"))
    (3, PauliString('+Y'))
    """
    _check_sizes(p, q)
    x = p.x ^ q.x
    z = p.z ^ q.z
    # (X^a Z^b)(X^c Z^d) = (-1)^(b.c) X^(a+c) Z^(b+d)
    e = _xz_exponent(p) + _xz_exponent(q) + 2 * int(np.dot(p.z.astype(np.int64), q.x))
    e -= int(np.dot(x.astype(np.int64), z))
    return e % 4, PauliString(x, z, 1)


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Hermitian product ``p q``; raises when the strings anticommute."""
    e, r = multiply_phase(p, q)
    if e % 2:
        raise NonHermitianProductError(
            f"{p.label()} * {q.label()} = {'i' if e == 1 else '-i'} {r.label()} is not Hermitian"
        )
    return r if e == 0 else -r


def commutes(p: PauliString, q: PauliString) -> bool:
    _check_sizes(p, q)
    s = np.dot(p.x.astype(np.int64), q.z) + np.dot(p.z.astype(np.int64), q.x)
    return s % 2 == 0


class PauliSum:
    """Hermitian operator ``sum_k c_k P_k`` with real coefficients.

    Terms are canonicalized on construction: equal strings are merged,
    coefficients below ``PRUNE_THRESHOLD`` dropped, signs folded into the
    coefficients, and the terms sorted lexicographically on ``(z, x)``.
    """

    def __init__(self, n_qubits: int, terms: Iterable[tuple[float, PauliString]]):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        merged: dict[bytes, list] = {}
        for coeff, p in terms:
            if p.n_qubits != n_qubits:
                raise ValueError(
                    f"term {p.label()} has {p.n_qubits} qubits, expected {n_qubits}"
                )
            c = float(np.real(coeff)) * p.sign
            if np.iscomplexobj(coeff) and abs(np.imag(coeff)) > 0:
                raise ValueError("PauliSum coefficients must be real")
            k = p.key()
            if k in merged:
                merged[k][0] += c
            else:
                merged[k] = [c, p.with_sign(1)]
        kept = [(c, p) for c, p in merged.values() if abs(c) > PRUNE_THRESHOLD]
        kept.sort(key=lambda t: t[1].key())
        self.n_qubits = n_qubits
        self.coeffs = np.array([c for c, _ in kept], dtype=float)
        self.strings: tuple[PauliString, ...] = tuple(p for _, p in kept)

    @property
    def terms(self) -> list[tuple[float, PauliString]]:
        return list(zip(self.coeffs.tolist(), self.strings))

    def __len__(self) -> int:
        return len(self.strings)

    def __iter__(self):
        return iter(self.terms)

    def as_dict(self) -> dict[str, float]:
        return {p.labels(): c for c, p in self.terms}

    def x_bits(self) -> np.ndarray:
        if not self.strings:
            return np.zeros((0, self.n_qubits), np.uint8)
        return np.array([p.x for p in self.strings], dtype=np.uint8)

    def z_bits(self) -> np.ndarray:
        if not self.strings:
            return np.zeros((0, self.n_qubits), np.uint8)
        return np.array([p.z for p in self.strings], dtype=np.uint8)

    def __add__(self, other: "PauliSum") -> "PauliSum":
        if other.n_qubits != self.n_qubits:
            raise ValueError("size mismatch")
        return PauliSum(self.n_qubits, self.terms + other.terms)

    def __mul__(self, scalar: float) -> "PauliSum":
        return PauliSum(self.n_qubits, [(scalar * c, p) for c, p in self.terms])

    __rmul__ = __mul__

    def __repr__(self) -> str:
        body = " ".join(f"{c:+g}*{p.labels()}" for c, p in self.terms[:6])
        more = " ..." if len(self) > 6 else ""
        return f"PauliSum(n={self.n_qubits}, {len(self)} terms: {body}{more})"


@dataclass(frozen=True)
class ModelParams:
    """Couplings of the benchmark chain

    ``H = j1x sum XX + j1y sum YY + j2x sum X_j X_{j+2} + h sum Z``
    with open boundaries.
    """

    j1x: float = 0.0
    j1y: float = 0.0
    j2x: float = 0.0
    h: float = 0.0


def build_model_hamiltonian(params: ModelParams, n: int) -> PauliSum:
    if n < 2:
        raise ValueError(f"chain length must be at least 2, got {n}")
    if params.j2x != 0 and n < 3:
        raise ValueError(f"next-nearest-neighbour terms need n >= 3, got {n}")

    def string(letters: Sequence[tuple[int, str]]) -> PauliString:
        lab = ["I"] * n
        for site, letter in letters:
            lab[site] = letter
        return pauli_from_labels("".join(lab))

    terms = []
    if params.j1x:
        terms += [(params.j1x, string([(j, "X"), (j + 1, "X")])) for j in range(n - 1)]
    if params.j1y:
        terms += [(params.j1y, string([(j, "Y"), (j + 1, "Y")])) for j in range(n - 1)]
    if params.j2x:
        terms += [(params.j2x, string([(j, "X"), (j + 2, "X")])) for j in range(n - 2)]
    if params.h:
        terms += [(params.h, string([(j, "Z")])) for j in range(n)]
    return PauliSum(n, terms)
