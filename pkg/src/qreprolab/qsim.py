"""Minimal dense statevector engine for oracle-query experiments.

Conventions, fixed once and used everywhere:

* Qubits are numbered by weight: bit ``i`` of a basis-state index has
  weight ``2**i`` (bit 0 is the least significant).
* A multi-bit register is described by a tuple of qubit positions whose
  first entry is the register's most significant bit.
* In the standard two-register layout the input register X occupies the
  high-order bits and the output register Y the low-order bits, so the
  basis state ``|x>|y>`` has index ``x * 2**m + y``.

All operations are pure (value in, value out) and norm-preserving; a
norm drift beyond tolerance raises instead of being silently repaired.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

DEFAULT_QUBIT_CAP = 26
QUBIT_CAP_ENV = "QROM_QUBIT_CAP"

NORM_TOL = 1e-10


class CapExceededError(ValueError):
    """Requested register sizes exceed the configured qubit cap."""


class NormDriftError(ArithmeticError):
    """State norm drifted beyond tolerance; treated as a failure, not patched."""


def qubit_cap() -> int:
    """Current qubit cap (default 26, overridable via QROM_QUBIT_CAP)."""
    raw = os.environ.get(QUBIT_CAP_ENV)
    if raw is None:
        return DEFAULT_QUBIT_CAP
    return int(raw)


class StateVector:
    """Complex amplitudes over the computational basis of ``num_qubits`` qubits."""

    __slots__ = ("num_qubits", "amplitudes")

    def __init__(self, num_qubits: int, amplitudes: np.ndarray, *, check: bool = True):
        cap = qubit_cap()
        if num_qubits > cap:
            raise CapExceededError(f"{num_qubits} qubits exceeds cap {cap}")
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << num_qubits,):
            raise ValueError(
                f"expected {1 << num_qubits} amplitudes, got {amplitudes.shape}"
            )
        self.num_qubits = num_qubits
        self.amplitudes = amplitudes
        if check:
            _check_norm(self)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def norm_sq(self) -> float:
        a = self.amplitudes
        return float(np.real(np.vdot(a, a)))

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy(), check=False)


def _check_norm(state: StateVector) -> None:
    if abs(state.norm_sq() - 1.0) > NORM_TOL:
        raise NormDriftError(f"norm^2 = {state.norm_sq():.15g} drifted from 1")


@dataclass(frozen=True)
class RegisterLayout:
    """Positions of the X (input) and Y (output) registers inside a state.

    ``x_bits[0]`` is the most significant bit of the X value, likewise for Y.
    The two tuples must be disjoint; they need not cover all qubits.
    """

    x_bits: tuple[int, ...]
    y_bits: tuple[int, ...]

    def __post_init__(self):
        if set(self.x_bits) & set(self.y_bits):
            raise ValueError("x_bits and y_bits overlap")
        if len(set(self.x_bits)) != len(self.x_bits) or len(set(self.y_bits)) != len(
            self.y_bits
        ):
            raise ValueError("duplicate bit positions in layout")

    @property
    def n(self) -> int:
        return len(self.x_bits)

    @property
    def m(self) -> int:
        return len(self.y_bits)

    def check_fits(self, num_qubits: int) -> None:
        for b in self.x_bits + self.y_bits:
            if not 0 <= b < num_qubits:
                raise ValueError(f"bit {b} outside a {num_qubits}-qubit state")


def standard_layout(n: int, m: int) -> RegisterLayout:
    """X in the high-order ``n`` bits, Y in the low-order ``m`` bits."""
    return RegisterLayout(
        x_bits=tuple(range(n + m - 1, m - 1, -1)),
        y_bits=tuple(range(m - 1, -1, -1)),
    )


def _contiguous_low(bits: tuple[int, ...]) -> int | None:
    """Low bit position if ``bits`` is a contiguous MSB-first run, else None."""
    k = len(bits)
    if k and bits == tuple(range(bits[0], bits[0] - k, -1)):
        return bits[-1]
    return None


_ARANGE_CACHE: dict[int, np.ndarray] = {}


def _arange(dim: int) -> np.ndarray:
    got = _ARANGE_CACHE.get(dim)
    if got is None:
        got = _ARANGE_CACHE[dim] = np.arange(dim, dtype=np.int64)
        got.setflags(write=False)
    return got


def gather_bits(indices: np.ndarray, bits: tuple[int, ...]) -> np.ndarray:
    """Register value of each basis index, reading ``bits`` MSB-first."""
    low = _contiguous_low(bits)
    if low is not None:
        return (indices >> low) & ((1 << len(bits)) - 1)
    out = np.zeros_like(indices)
    k = len(bits)
    for j, b in enumerate(bits):
        out |= ((indices >> b) & 1) << (k - 1 - j)
    return out


def scatter_bits(values: np.ndarray, bits: tuple[int, ...]) -> np.ndarray:
    """Inverse of :func:`gather_bits`: place register values at ``bits``."""
    low = _contiguous_low(bits)
    if low is not None:
        return values << low
    out = np.zeros_like(values)
    k = len(bits)
    for j, b in enumerate(bits):
        out |= ((values >> (k - 1 - j)) & 1) << b
    return out


class Permutation:
    """A bijection on ``{0,1}^n`` given as an explicit table (checked)."""

    __slots__ = ("n", "table", "inverse")

    def __init__(self, n: int, table: np.ndarray):
        table = np.asarray(table, dtype=np.int64)
        size = 1 << n
        if table.shape != (size,):
            raise ValueError(f"permutation table must have {size} entries")
        counts = np.bincount(table, minlength=size)
        if table.min() < 0 or table.max() >= size or counts.max() != 1:
            raise ValueError("table is not a bijection on {0,..,2^n-1}")
        self.n = n
        self.table = table
        inv = np.empty(size, dtype=np.int64)
        inv[table] = np.arange(size, dtype=np.int64)
        self.inverse = inv

    def inverted(self) -> "Permutation":
        p = Permutation.__new__(Permutation)
        p.n = self.n
        p.table = self.inverse
        p.inverse = self.table
        return p

    def is_cyclic(self) -> bool:
        """True iff the permutation is a single cycle over the whole domain."""
        size = 1 << self.n
        x = 0
        for _ in range(size - 1):
            x = int(self.table[x])
            if x == 0:
                return False
        return int(self.table[x]) == 0


def add_one_permutation(n: int) -> Permutation:
    """x -> x + 1 mod 2^n, the default cyclic permutation."""
    size = 1 << n
    return Permutation(n, (np.arange(size, dtype=np.int64) + 1) % size)


def prepare_uniform(n: int, m: int) -> StateVector:
    """Uniform superposition over X with Y cleared: sum_x |x>|0> / sqrt(2^n)."""
    if n + m > qubit_cap():
        raise CapExceededError(f"{n}+{m} qubits exceeds cap {qubit_cap()}")
    amps = np.zeros(1 << (n + m), dtype=np.complex128)
    amps[np.arange(1 << n, dtype=np.int64) << m] = 1.0 / np.sqrt(1 << n)
    return StateVector(n + m, amps)


def apply_oracle(state: StateVector, layout: RegisterLayout, table: np.ndarray) -> StateVector:
    """Bitwise-XOR oracle query: |x>|y> -> |x>|y XOR f(x)>.

    ``table`` holds f as ``2**layout.n`` integers, each below ``2**layout.m``.
    Qubits outside the layout are untouched.
    """
    layout.check_fits(state.num_qubits)
    table = np.asarray(table, dtype=np.int64)
    if table.shape != (1 << layout.n,):
        raise ValueError(
            f"oracle table has {table.shape} entries, layout X has {layout.n} bits"
        )
    if table.size and (table.min() < 0 or table.max() >= (1 << layout.m)):
        raise ValueError(f"oracle values do not fit in {layout.m} bits")
    idx = _arange(state.dim)
    xs = gather_bits(idx, layout.x_bits)
    idx = idx ^ scatter_bits(table[xs], layout.y_bits)
    out = StateVector(state.num_qubits, state.amplitudes[idx], check=False)
    _check_norm(out)
    return out


def apply_permutation(state: StateVector, layout: RegisterLayout, perm: Permutation) -> StateVector:
    """Relabel the X register: |x>|y> -> |perm(x)>|y>."""
    layout.check_fits(state.num_qubits)
    if perm.n != layout.n:
        raise ValueError("permutation size does not match X register")
    idx = _arange(state.dim)
    xs = gather_bits(idx, layout.x_bits)
    x_mask = int(scatter_bits(np.int64((1 << layout.n) - 1), layout.x_bits))
    idx = (idx & ~x_mask) | scatter_bits(perm.inverse[xs], layout.x_bits)
    out = StateVector(state.num_qubits, state.amplitudes[idx], check=False)
    _check_norm(out)
    return out


class SpanProjector:
    """Projector onto the span of explicitly given orthonormal vectors."""

    def __init__(self, vectors: np.ndarray, *, tol: float = 1e-8):
        vectors = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))
        gram = vectors @ vectors.conj().T
        if not np.allclose(gram, np.eye(len(vectors)), atol=tol):
            raise ValueError("span vectors are not orthonormal")
        self.vectors = vectors

    def probability(self, state: StateVector) -> float:
        if self.vectors.shape[1] != state.dim:
            raise ValueError("projector dimension mismatch")
        overlaps = self.vectors.conj() @ state.amplitudes
        return float(np.sum(np.abs(overlaps) ** 2))


class SubsetPairProjector:
    """Rank-one projector (|S> + |S~>)(<S| + <S~|)/2 on the X register.

    |S> and |S~> are the normalized uniform superpositions over the subset S
    of X values and over its complement.  All qubits outside X (the Y
    register and any workspace) are traced out before projecting, so the
    projector never has to be materialized over the full space.
    """

    def __init__(self, subset, layout: RegisterLayout):
        n = layout.n
        size = 1 << n
        subset = np.unique(np.asarray(list(subset), dtype=np.int64))
        if subset.size == 0 or subset.size == size:
            raise ValueError("subset must be a proper nonempty subset of the domain")
        if subset.min() < 0 or subset.max() >= size:
            raise ValueError("subset element out of range")
        self.layout = layout
        self.subset = subset
        # (|S> + |S~>)/sqrt(2), stored componentwise
        v = np.full(size, 1.0 / np.sqrt(2 * (size - subset.size)), dtype=np.float64)
        v[subset] = 1.0 / np.sqrt(2 * subset.size)
        self.vector = v

    def probability(self, state: StateVector) -> float:
        layout = self.layout
        layout.check_fits(state.num_qubits)
        rest_bits = tuple(
            b for b in range(state.num_qubits - 1, -1, -1) if b not in layout.x_bits
        )
        idx = np.arange(state.dim, dtype=np.int64)
        xs = gather_bits(idx, layout.x_bits)
        rs = gather_bits(idx, rest_bits) if rest_bits else np.zeros_like(idx)
        mat = np.zeros((1 << layout.n, 1 << len(rest_bits)), dtype=np.complex128)
        mat[xs, rs] = state.amplitudes
        overlaps = self.vector @ mat
        return float(np.sum(np.abs(overlaps) ** 2))


def project_prob(state: StateVector, projector) -> float:
    """<psi| P |psi> for a SpanProjector or SubsetPairProjector; in [0, 1]."""
    p = projector.probability(state)
    if not -NORM_TOL <= p <= 1.0 + NORM_TOL:
        raise ArithmeticError(f"projection probability {p} outside [0,1]")
    return min(max(p, 0.0), 1.0)
