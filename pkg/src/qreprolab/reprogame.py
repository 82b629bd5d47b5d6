"""Executable oracle-reprogramming distinguishing games.

Two game forms share one harness.  In the basic form the reprogramming
point splits into a random portion x1 (sampled by the game) and an
adversarial portion x2 (chosen by the distinguisher); the oracle call
returns x1.  In the general form the distinguisher supplies an explicit
finite distribution over (point, side-info) pairs and receives the
sampled pair back.  Either way a fresh uniform value is planted at the
sampled point in the b=1 oracle, while the b=0 oracle stays untouched.

The distinguisher is a callback with two capabilities: oracle queries
(classical point lookups or quantum queries applied to a statevector it
owns) and reprogram requests.  Every reprogram call is recorded with the
query counts between calls, so bound schedules can be rebuilt from the
transcript.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .oracle import ProgrammableOracle, sample_oracle
from .qsim import RegisterLayout, StateVector, apply_oracle


class BudgetExceededError(RuntimeError):
    """Distinguisher issued more reprogram calls than the game allows."""


@dataclass(frozen=True)
class ReproConfig:
    n1: int          # bits of the random portion X1
    n2: int          # bits of the adversarial portion X2
    m: int           # output bits
    big_r: int       # reprogram budget R
    b: int           # hidden bit
    seed: int = 0

    def __post_init__(self):
        if self.big_r < 0:
            raise ValueError("reprogram budget must be >= 0")
        if self.b not in (0, 1):
            raise ValueError("hidden bit must be 0 or 1")

    @property
    def n(self) -> int:
        return self.n1 + self.n2


class ReproDistribution:
    """Explicit finite distribution over (point, side_info) pairs.

    ``entries`` is a list of (x, x_prime, prob); probabilities must sum
    to 1 within 1e-12.  ``p_max`` is the maximum of the point marginal.
    """

    def __init__(self, entries, label: str = "custom"):
        entries = [(int(x), xp, float(p)) for x, xp, p in entries]
        total = sum(p for _, _, p in entries)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {total}, not 1")
        if any(p < 0 for _, _, p in entries):
            raise ValueError("negative probability")
        self.entries = entries
        self.label = label
        marginal: dict[int, float] = {}
        for x, _, p in entries:
            marginal[x] = marginal.get(x, 0.0) + p
        self.p_max = max(marginal.values())

    def sample(self, rng: np.random.Generator):
        probs = np.array([p for _, _, p in self.entries])
        i = int(rng.choice(len(self.entries), p=probs / probs.sum()))
        x, xp, _ = self.entries[i]
        return x, xp


@dataclass(frozen=True)
class ReprogramRecord:
    dist_id: str
    x: int
    x_prime: object
    y: int
    p_max: float


@dataclass
class GameTranscript:
    config: ReproConfig
    reprograms: list[ReprogramRecord] = field(default_factory=list)
    phase_queries: list[int] = field(default_factory=lambda: [0])
    output: int | None = None

    def qhat_schedule(self) -> list[tuple[int, float]]:
        """[(queries before r-th reprogram, p_max of r-th call)] rows."""
        rows = []
        total = 0
        for r, rec in enumerate(self.reprograms):
            total = sum(self.phase_queries[: r + 1])
            rows.append((total, rec.p_max))
        return rows

    @property
    def total_queries(self) -> int:
        return sum(self.phase_queries)


class GameHandle:
    """Oracle capabilities handed to the distinguisher during one run."""

    def __init__(self, cfg: ReproConfig, oracle_b: ProgrammableOracle, programmed: ProgrammableOracle, rng: np.random.Generator, transcript: GameTranscript):
        self._cfg = cfg
        self._oracle_b = oracle_b        # what queries see (depends on b)
        self._programmed = programmed    # what Reprogram updates (always O_1)
        self._rng = rng
        self._transcript = transcript

    @property
    def n(self) -> int:
        return self._cfg.n

    @property
    def m(self) -> int:
        return self._cfg.m

    def _count_query(self, k: int = 1) -> None:
        self._transcript.phase_queries[-1] += k

    def query_classical(self, x: int) -> int:
        self._count_query()
        return self._oracle_b.lookup(x)

    def query_quantum(self, state: StateVector, layout: RegisterLayout) -> StateVector:
        self._count_query()
        return apply_oracle(state, layout, self._oracle_b.dense_table())

    def _record(self, dist_id: str, x: int, x_prime, p_max: float) -> int:
        if len(self._transcript.reprograms) >= self._cfg.big_r:
            raise BudgetExceededError(f"reprogram budget {self._cfg.big_r} exhausted")
        y = int(self._rng.integers(0, 1 << self._cfg.m))
        self._programmed.reprogram(x, y)
        self._transcript.reprograms.append(ReprogramRecord(dist_id, x, x_prime, y, p_max))
        self._transcript.phase_queries.append(0)
        return y

    def reprogram(self, x2: int) -> int:
        """Basic form: the game samples x1 and a fresh value, returns x1."""
        if not 0 <= x2 < (1 << self._cfg.n2):
            raise ValueError(f"x2 outside {self._cfg.n2}-bit domain")
        x1 = int(self._rng.integers(0, 1 << self._cfg.n1))
        x = (x1 << self._cfg.n2) | x2
        self._record("basic-uniform", x, None, 2.0 ** -self._cfg.n1)
        return x1

    def reprogram_dist(self, dist: ReproDistribution):
        """General form: sample (x, x') from the given distribution."""
        x, x_prime = dist.sample(self._rng)
        if not 0 <= x < (1 << self._cfg.n):
            raise ValueError("distribution produced a point outside the domain")
        self._record(dist.label, x, x_prime, dist.p_max)
        return x, x_prime


def run_repro_game(cfg: ReproConfig, distinguisher) -> tuple[int, GameTranscript]:
    """One game run; returns the distinguisher's bit and the transcript.

    Deterministic in (cfg, distinguisher): the oracle, the game's samples
    and the distinguisher's own randomness all derive from cfg.seed.
    """
    ss = np.random.SeedSequence(entropy=cfg.seed, spawn_key=(cfg.b,))
    table_seed, game_key, d_key = ss.generate_state(3, dtype=np.uint64)
    o0 = sample_oracle(cfg.n, cfg.m, int(table_seed))
    o1 = ProgrammableOracle(o0)
    oracle_b = o1 if cfg.b == 1 else ProgrammableOracle(o0)
    game_rng = np.random.Generator(np.random.Philox(key=int(game_key)))
    d_rng = np.random.Generator(np.random.Philox(key=int(d_key)))
    transcript = GameTranscript(config=cfg)
    handle = GameHandle(cfg, oracle_b, o1, game_rng, transcript)
    out = int(distinguisher(handle, d_rng))
    transcript.output = out
    return out, transcript


def wilson_halfwidth(successes: int, trials: int, z: float = 1.959963984540054) -> float:
    """Half-width of the 95% Wilson score interval."""
    if trials == 0:
        return 0.0
    p = successes / trials
    denom = 1.0 + z * z / trials
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z * z / (4.0 * trials * trials))
    return half


def estimate_advantage(cfg: ReproConfig, distinguisher, trials: int) -> tuple[float, float]:
    """Monte-Carlo |Pr_1[out=1] - Pr_0[out=1]| with a 95% interval half-width.

    The two arms use independent per-trial seeds derived from cfg.seed;
    the half-width is the sum of the per-arm Wilson half-widths.
    """
    if trials < 100:
        raise ValueError("need at least 100 trials")
    wins = [0, 0]
    for b in (0, 1):
        for t in range(trials):
            trial_cfg = replace(cfg, b=b, seed=(cfg.seed << 20) ^ (t << 1) ^ b)
            out, _ = run_repro_game(trial_cfg, distinguisher)
            wins[b] += out
    p0, p1 = wins[0] / trials, wins[1] / trials
    half = wilson_halfwidth(wins[0], trials) + wilson_halfwidth(wins[1], trials)
    return abs(p1 - p0), half
