"""Classical random-oracle tables and the reduction-style programmable overlay.

Tables are materialized eagerly so games can reprogram and compare them
point by point.  Sampling is a deterministic function of a 64-bit seed
(counter-mode Philox), so every transcript is replayable.

The default value range is ``{0,1}^m``; a smaller ``range_size`` may be
given so an oracle can map directly into a non-power-of-two set such as
a challenge space.  Entries always fit in ``m`` bits either way.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"QROM"


class OracleTable:
    """A function {0,1}^n -> {0,..,range_size-1} as an explicit table.

    Immutable by contract: reprogramming returns a fresh table.
    """

    __slots__ = ("n", "m", "table", "seed", "range_size")

    def __init__(self, n: int, m: int, table: np.ndarray, seed: int = 0, range_size: int | None = None):
        if range_size is None:
            range_size = 1 << m
        if not 1 <= range_size <= (1 << m):
            raise ValueError(f"range_size {range_size} does not fit in {m} bits")
        table = np.asarray(table, dtype=np.int64)
        if table.shape != (1 << n,):
            raise ValueError(f"table must have {1 << n} entries")
        if table.size and (table.min() < 0 or table.max() >= range_size):
            raise ValueError("table entry outside the value range")
        self.n = n
        self.m = m
        self.table = table
        self.seed = seed
        self.range_size = range_size

    def lookup(self, x: int) -> int:
        if not 0 <= x < (1 << self.n):
            raise ValueError(f"point {x} outside {self.n}-bit domain")
        return int(self.table[x])

    def with_entry(self, x: int, y: int) -> "OracleTable":
        if not 0 <= y < self.range_size:
            raise ValueError(f"value {y} outside range")
        if not 0 <= x < (1 << self.n):
            raise ValueError(f"point {x} outside {self.n}-bit domain")
        t = self.table.copy()
        t[x] = y
        return OracleTable(self.n, self.m, t, self.seed, self.range_size)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, OracleTable)
            and self.n == other.n
            and self.m == other.m
            and self.range_size == other.range_size
            and bool(np.array_equal(self.table, other.table))
        )

    def __hash__(self):  # tables are mutable arrays; identity hashing only
        return id(self)


def sample_oracle(n: int, m: int, seed: int, range_size: int | None = None) -> OracleTable:
    """Fresh random oracle table, a deterministic function of ``seed``."""
    if range_size is None:
        range_size = 1 << m
    rng = np.random.Generator(np.random.Philox(key=seed))
    if range_size == 1 << 64:
        table = rng.integers(0, 1 << 63, size=1 << n, dtype=np.int64)  # pragma: no cover
    else:
        table = rng.integers(0, range_size, size=1 << n, dtype=np.int64)
    return OracleTable(n, m, table, seed, range_size)


class ProgrammableOracle:
    """Base table plus an ordered overlay list of (point, value) pairs.

    The overlay mirrors the look-up-list semantics of a-posteriori
    reprogramming: a lookup returns the most recent overlay value at the
    point if one exists, else the base table value.  ``reprogram`` is the
    remove-then-insert step; the low-level parts are exposed separately.
    Single-owner mutable; the base table itself is never modified.
    """

    __slots__ = ("base", "overlay", "_dense", "_dense_version", "_version")

    def __init__(self, base: OracleTable, overlay=None):
        self.base = base
        self.overlay: list[tuple[int, int]] = list(overlay or [])
        self._dense = None
        self._dense_version = -1
        self._version = 0

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def m(self) -> int:
        return self.base.m

    @property
    def range_size(self) -> int:
        return self.base.range_size

    def lookup(self, x: int) -> int:
        if not 0 <= x < (1 << self.n):
            raise ValueError(f"point {x} outside {self.n}-bit domain")
        for px, py in reversed(self.overlay):
            if px == x:
                return py
        return int(self.base.table[x])

    def overlay_remove(self, x: int) -> None:
        self.overlay = [(px, py) for px, py in self.overlay if px != x]
        self._version += 1

    def overlay_insert(self, x: int, y: int) -> None:
        if not 0 <= x < (1 << self.n):
            raise ValueError(f"point {x} outside {self.n}-bit domain")
        if not 0 <= y < self.range_size:
            raise ValueError(f"value {y} outside range")
        self.overlay.append((x, y))
        self._version += 1

    def reprogram(self, x: int, y: int) -> "ProgrammableOracle":
        self.overlay_remove(x)
        self.overlay_insert(x, y)
        return self

    def dense_table(self) -> np.ndarray:
        """Materialized current function, overlay applied (cached)."""
        if self._dense_version != self._version:
            t = self.base.table.copy()
            for px, py in self.overlay:
                t[px] = py
            self._dense = t
            self._dense_version = self._version
        return self._dense

    def as_table(self) -> OracleTable:
        return OracleTable(self.n, self.m, self.dense_table().copy(), self.base.seed, self.range_size)

    def snapshot(self) -> tuple[tuple[int, int], ...]:
        return tuple(self.overlay)


def reprogram(o, x: int, y: int):
    """Point update ``o[x] := y``.

    An OracleTable is immutable, so a fresh table is returned; a
    ProgrammableOracle records the update in its overlay and is returned
    itself (remove-then-insert, later entries shadowing earlier ones).
    """
    if isinstance(o, OracleTable):
        return o.with_entry(x, y)
    if isinstance(o, ProgrammableOracle):
        return o.reprogram(x, y)
    raise TypeError(f"cannot reprogram {type(o)!r}")


def to_bytes(table: OracleTable) -> bytes:
    """Flat binary format: magic, u8 n, u8 m, u64 LE seed, then
    2^n little-endian entries of ceil(m/8) bytes each."""
    if table.n > 255 or table.m > 255:
        raise ValueError("n and m must fit in one byte each")
    width = (table.m + 7) // 8
    out = bytearray()
    out += MAGIC
    out += struct.pack("<BBQ", table.n, table.m, table.seed)
    for v in table.table:
        out += int(v).to_bytes(width, "little")
    return bytes(out)


def from_bytes(buf: bytes) -> OracleTable:
    """Parse the flat binary format; the value range is restored as 2^m."""
    if buf[:4] != MAGIC:
        raise ValueError("bad magic")
    n, m, seed = struct.unpack("<BBQ", buf[4:14])
    width = (m + 7) // 8
    body = buf[14:]
    if len(body) != (1 << n) * width:
        raise ValueError("truncated table body")
    vals = [
        int.from_bytes(body[i * width : (i + 1) * width], "little")
        for i in range(1 << n)
    ]
    return OracleTable(n, m, np.array(vals, dtype=np.int64), seed)
