"""Superposition-oracle realization of a random function, at tiny sizes.

The oracle keeps one m-qubit cell F_x per input point x, each initialized
to the uniform superposition |phi0>.  A query XORs the contents of the
cell selected by the adversary's X register into its Y register, branch
by branch.  Reprogramming a point discards that cell and replaces it with
a fresh |phi0>, which turns the joint state into a density operator; a
pure-state fast path is kept until the first reprogram.

Register order (most significant first): the adversary block, then cells
F_0, F_1, ... each of m qubits.  Adversary-local bit index 0 is the most
significant bit of the adversary block.
"""

from __future__ import annotations

import numpy as np

from .qsim import (
    StateVector,
    CapExceededError,
    gather_bits,
    scatter_bits,
    qubit_cap,
)

DENSITY_QUBIT_LIMIT = 12


class MixedStateError(ValueError):
    """Operation defined only on the pure conditional state."""


class PurifiedOracle:
    """Joint adversary (x) oracle state for an oracle {0,1}^n -> {0,1}^m."""

    __slots__ = ("adv_qubits", "n", "m", "pure", "rho")

    def __init__(self, adv_qubits: int, n: int, m: int, pure=None, rho=None):
        self.adv_qubits = adv_qubits
        self.n = n
        self.m = m
        self.pure = pure
        self.rho = rho

    @property
    def num_qubits(self) -> int:
        return self.adv_qubits + self.m * (1 << self.n)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def is_pure(self) -> bool:
        return self.pure is not None

    def cell_positions(self, x: int) -> tuple[int, ...]:
        """Global bit positions of cell F_x, MSB of the cell first."""
        N = self.num_qubits
        start = self.adv_qubits + x * self.m
        return tuple(N - 1 - (start + j) for j in range(self.m))

    def adv_positions(self, local_bits) -> tuple[int, ...]:
        N = self.num_qubits
        for b in local_bits:
            if not 0 <= b < self.adv_qubits:
                raise ValueError(f"adversary-local bit {b} out of range")
        return tuple(N - 1 - b for b in local_bits)

    def densify(self) -> None:
        if self.rho is not None:
            return
        if self.num_qubits > DENSITY_QUBIT_LIMIT:
            raise CapExceededError(
                f"density operator over {self.num_qubits} qubits exceeds the "
                f"practical limit {DENSITY_QUBIT_LIMIT}"
            )
        a = self.pure.amplitudes
        self.rho = np.outer(a, a.conj())
        self.pure = None


def purified_init(adv_qubits: int, n: int, m: int) -> PurifiedOracle:
    """|0..0> on the adversary block, |phi0> in every oracle cell."""
    total = adv_qubits + m * (1 << n)
    if total > qubit_cap():
        raise CapExceededError(f"{total} qubits exceeds cap {qubit_cap()}")
    f_bits = m * (1 << n)
    amps = np.zeros(1 << total, dtype=np.complex128)
    # adversary bits are the high bits: the |0>_adv block is the first 2^f_bits entries
    amps[: 1 << f_bits] = 2.0 ** (-f_bits / 2.0)
    return PurifiedOracle(adv_qubits, n, m, pure=StateVector(total, amps))


def _query_index_map(po: PurifiedOracle, x_reg, y_reg) -> np.ndarray:
    """Basis-state permutation of one oracle query (an involution)."""
    if len(x_reg) != po.n or len(y_reg) != po.m:
        raise ValueError("query registers must have n and m bits")
    x_pos = po.adv_positions(x_reg)
    y_pos = po.adv_positions(y_reg)
    N = po.num_qubits
    idx = np.arange(1 << N, dtype=np.int64)
    xs = gather_bits(idx, x_pos)
    # cell value of F_{xs} per basis state: cell bit j sits at N-1-(adv + xs*m + j)
    f = np.zeros_like(idx)
    for j in range(po.m):
        pos = (N - 1 - po.adv_qubits - j) - xs * po.m
        f |= ((idx >> pos) & 1) << (po.m - 1 - j)
    return idx ^ scatter_bits(f, y_pos)


def purified_query(po: PurifiedOracle, x_reg, y_reg) -> PurifiedOracle:
    """One oracle query from adversary registers (x_reg, y_reg), in place."""
    idx = _query_index_map(po, x_reg, y_reg)
    if po.is_pure():
        po.pure = StateVector(po.num_qubits, po.pure.amplitudes[idx], check=False)
    else:
        po.rho = po.rho[idx][:, idx]
    return po


def apply_adv_unitary(po: PurifiedOracle, u: np.ndarray) -> PurifiedOracle:
    """Apply a unitary on the whole adversary block, in place."""
    a_dim = 1 << po.adv_qubits
    f_dim = 1 << (po.m * (1 << po.n))
    u = np.asarray(u, dtype=np.complex128)
    if u.shape != (a_dim, a_dim):
        raise ValueError("unitary must act on the full adversary block")
    if po.is_pure():
        mat = po.pure.amplitudes.reshape(a_dim, f_dim)
        po.pure = StateVector(po.num_qubits, (u @ mat).reshape(-1), check=False)
    else:
        rho4 = po.rho.reshape(a_dim, f_dim, a_dim, f_dim)
        rho4 = np.einsum("ab,bfcg,dc->afdg", u, rho4, u.conj().T)
        po.rho = rho4.reshape(po.dim, po.dim)
    return po


def purified_reprogram(po: PurifiedOracle, x: int) -> PurifiedOracle:
    """Discard cell F_x and refill it with |phi0>; output is mixed."""
    if not 0 <= x < (1 << po.n):
        raise ValueError(f"point {x} outside {po.n}-bit domain")
    po.densify()
    c = 1 << po.m
    a = 1 << (po.adv_qubits + x * po.m)
    b = po.dim // (a * c)
    rho6 = po.rho.reshape(a, c, b, a, c, b)
    traced = np.einsum("acbdce->abde", rho6)
    phi = np.full((c, c), 1.0 / c, dtype=np.complex128)
    rho6 = np.einsum("abde,cf->acbdfe", traced, phi)
    po.rho = rho6.reshape(po.dim, po.dim)
    return po


def epsilon_x(po: PurifiedOracle, x: int) -> float:
    """1 - ||<phi0|_{F_x} |state>||^2, the oracle's per-point disturbance."""
    if not po.is_pure():
        raise MixedStateError("epsilon_x is defined on the pure conditional state")
    if not 0 <= x < (1 << po.n):
        raise ValueError(f"point {x} outside {po.n}-bit domain")
    c = 1 << po.m
    a = 1 << (po.adv_qubits + x * po.m)
    b = po.dim // (a * c)
    cube = po.pure.amplitudes.reshape(a, c, b)
    w = cube.sum(axis=1) * (c ** -0.5)
    return float(1.0 - np.real(np.vdot(w, w)))


def _project_cell_phi0(amps: np.ndarray, po: PurifiedOracle, x: int) -> np.ndarray:
    """|phi0><phi0| applied to cell F_x of a raw amplitude vector."""
    c = 1 << po.m
    a = 1 << (po.adv_qubits + x * po.m)
    b = amps.size // (a * c)
    cube = amps.reshape(a, c, b)
    mean = cube.sum(axis=1, keepdims=True) / c
    return np.broadcast_to(mean, cube.shape).reshape(-1).copy()


def support_weights(po: PurifiedOracle, tol: float = 1e-18) -> dict[int, float]:
    """Weight of the state on each number of disturbed oracle cells.

    Decomposes the pure joint state along, per cell, the |phi0> component
    versus its complement, and accumulates the squared norm by the count
    of complement cells.  After q queries all weight must sit on counts
    <= q.  Exponential in the number of cells; meant for n <= 3.
    """
    if not po.is_pure():
        raise MixedStateError("support decomposition needs a pure state")
    cells = 1 << po.n
    branches = [(0, po.pure.amplitudes.copy())]
    for x in range(cells):
        nxt = []
        for count, vec in branches:
            p = _project_cell_phi0(vec, po, x)
            q = vec - p
            if np.vdot(p, p).real > tol:
                nxt.append((count, p))
            if np.vdot(q, q).real > tol:
                nxt.append((count + 1, q))
        branches = nxt
    weights: dict[int, float] = {}
    for count, vec in branches:
        weights[count] = weights.get(count, 0.0) + float(np.vdot(vec, vec).real)
    return weights


def support_size(po: PurifiedOracle, tol: float = 1e-12) -> int:
    weights = support_weights(po)
    return max((k for k, w in weights.items() if w > tol), default=0)


def reduced_adv_density(po: PurifiedOracle) -> np.ndarray:
    """Adversary-side density operator, oracle registers traced out."""
    a_dim = 1 << po.adv_qubits
    f_dim = po.dim // a_dim
    if po.is_pure():
        mat = po.pure.amplitudes.reshape(a_dim, f_dim)
        return mat @ mat.conj().T
    rho4 = po.rho.reshape(a_dim, f_dim, a_dim, f_dim)
    return np.einsum("afbf->ab", rho4)


def measure_f(po: PurifiedOracle, rng: np.random.Generator):
    """Measure the whole F register, collapsing the state.

    Returns (table, po) where ``table`` maps each point to the sampled
    value, i.e. one concrete classical function.
    """
    if not po.is_pure():
        raise MixedStateError("full-F measurement implemented for pure states")
    a_dim = 1 << po.adv_qubits
    f_dim = po.dim // a_dim
    mat = po.pure.amplitudes.reshape(a_dim, f_dim)
    probs = np.sum(np.abs(mat) ** 2, axis=0)
    f_outcome = int(rng.choice(f_dim, p=probs / probs.sum()))
    collapsed = np.zeros_like(mat)
    collapsed[:, f_outcome] = mat[:, f_outcome] / np.sqrt(probs[f_outcome])
    po.pure = StateVector(po.num_qubits, collapsed.reshape(-1), check=False)
    cells = 1 << po.n
    f_bits = po.m * cells
    table = np.array(
        [(f_outcome >> (f_bits - (x + 1) * po.m)) & ((1 << po.m) - 1) for x in range(cells)],
        dtype=np.int64,
    )
    return table, po


def trace_distance(rho1: np.ndarray, rho2: np.ndarray) -> float:
    """(1/2) ||rho1 - rho2||_1 for Hermitian inputs."""
    diff = rho1 - rho2
    eigs = np.linalg.eigvalsh((diff + diff.conj().T) / 2)
    return float(0.5 * np.sum(np.abs(eigs)))


# ---------------------------------------------------------------------------
# adversary circuits for the equivalence checks
#
# A circuit is a list of steps, each ("unitary", U) acting on the whole
# adversary block or ("query",) hitting the oracle with the standard
# X-high/Y-low register split.  The same circuit runs against the
# superposition oracle or against one fixed classical table, so the two
# can be compared cell for cell.


def random_block_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(raw)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_circuit(n: int, m: int, depth: int, rng: np.random.Generator):
    """Alternating unitary/query steps on an (n+m)-qubit adversary block."""
    steps = []
    for d in range(depth):
        if d % 2 == 0:
            steps.append(("unitary", random_block_unitary(1 << (n + m), rng)))
        else:
            steps.append(("query",))
    return steps


def run_circuit_purified(n: int, m: int, steps) -> PurifiedOracle:
    po = purified_init(n + m, n, m)
    x_reg = tuple(range(n))
    y_reg = tuple(range(n, n + m))
    for step in steps:
        if step[0] == "unitary":
            apply_adv_unitary(po, step[1])
        else:
            purified_query(po, x_reg, y_reg)
    return po


def run_circuit_classical(n: int, m: int, steps, table: np.ndarray) -> np.ndarray:
    """Amplitudes after running the circuit against one classical table."""
    from .qsim import apply_oracle, standard_layout

    amps = np.zeros(1 << (n + m), dtype=np.complex128)
    amps[0] = 1.0
    state = StateVector(n + m, amps)
    layout = standard_layout(n, m)
    for step in steps:
        if step[0] == "unitary":
            state = StateVector(n + m, step[1] @ state.amplitudes, check=False)
        else:
            state = apply_oracle(state, layout, table)
    return state.amplitudes


def averaged_classical_density(n: int, m: int, steps) -> np.ndarray:
    """Adversary state averaged over every classical oracle table."""
    dim = 1 << (n + m)
    rho = np.zeros((dim, dim), dtype=np.complex128)
    cells = 1 << n
    for packed in range(1 << (m * cells)):
        table = np.array(
            [(packed >> (m * (cells - 1 - x))) & ((1 << m) - 1) for x in range(cells)],
            dtype=np.int64,
        )
        amps = run_circuit_classical(n, m, steps, table)
        rho += np.outer(amps, amps.conj())
    return rho / (1 << (m * cells))
