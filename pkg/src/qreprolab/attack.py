"""Interference distinguisher that detects a single reprogrammed oracle point.

The circuit: put the query register into the uniform superposition, make
q oracle queries to the pre-reprogramming oracle interleaved with a cyclic
permutation sigma of the domain (one query, then q-1 rounds of sigma and
query), then q queries to the post-reprogramming oracle interleaved with
sigma inverse, and finally measure the query register with the two-outcome
measurement built from the uniform superpositions over the orbit segment

    S = {x*, sigma^-1(x*), ..., sigma^-(q-1)(x*)}

and its complement.  Outcome 0 claims "not reprogrammed".

When both oracles agree everywhere the pre-measurement state is exactly
the uniform superposition with a cleared output register; when they
differ at x* the output register flags membership of X in S.  Both cases
have closed forms which the full simulation is tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .oracle import OracleTable
from .qsim import (
    Permutation,
    StateVector,
    SubsetPairProjector,
    add_one_permutation,
    apply_oracle,
    apply_permutation,
    prepare_uniform,
    project_prob,
    standard_layout,
)


class HypothesisError(ValueError):
    """Query budget outside the regime the guarantee is stated for."""


@dataclass
class AttackConfig:
    """Parameters of the single-point distinguisher.

    The guarantee needs 1 <= q <= 2^(n-3); sigma must be a single cycle.
    """

    n: int
    m: int
    q: int
    sigma: Permutation = None
    x_star: int = 0

    def __post_init__(self):
        if self.sigma is None:
            self.sigma = add_one_permutation(self.n)
        if self.sigma.n != self.n:
            raise ValueError("sigma acts on the wrong domain size")
        if not self.sigma.is_cyclic():
            raise ValueError("sigma must be a single cycle")
        if not 1 <= self.q <= (1 << self.n) >> 3:
            raise HypothesisError(f"need 1 <= q <= 2^(n-3), got q={self.q}, n={self.n}")
        if not 0 <= self.x_star < (1 << self.n):
            raise ValueError("x_star outside the domain")


def orbit_set(sigma: Permutation, x_star: int, q: int) -> np.ndarray:
    """{x*, sigma^-1(x*), ..., sigma^-(q-1)(x*)} as a sorted array."""
    pts = [x_star]
    x = x_star
    for _ in range(q - 1):
        x = int(sigma.inverse[x])
        pts.append(x)
    return np.unique(np.array(pts, dtype=np.int64))


def _check_tables(cfg: AttackConfig, o: OracleTable, o_prime: OracleTable) -> None:
    for t in (o, o_prime):
        if t.n != cfg.n or t.m != cfg.m:
            raise ValueError("oracle table size does not match the config")
    diff = np.nonzero(o.table != o_prime.table)[0]
    if diff.size > 1 or (diff.size == 1 and diff[0] != cfg.x_star):
        raise ValueError("oracles differ away from x_star")


def attack_final_state(cfg: AttackConfig, o: OracleTable, o_prime: OracleTable) -> StateVector:
    """Pre-measurement state of the distinguisher, by full simulation."""
    layout = standard_layout(cfg.n, cfg.m)
    state = prepare_uniform(cfg.n, cfg.m)
    state = apply_oracle(state, layout, o.table)
    for _ in range(cfg.q - 1):
        state = apply_permutation(state, layout, cfg.sigma)
        state = apply_oracle(state, layout, o.table)
    state = apply_oracle(state, layout, o_prime.table)
    inv = cfg.sigma.inverted()
    for _ in range(cfg.q - 1):
        state = apply_permutation(state, layout, inv)
        state = apply_oracle(state, layout, o_prime.table)
    return state


def closed_form_state(cfg: AttackConfig, o: OracleTable, o_prime: OracleTable) -> StateVector:
    """Pre-measurement state built directly from the two tables.

    Independent of the simulator: the amplitude of |x>|y> is 2^(-n/2)
    exactly when y is the XOR over j < q of o(sigma^j(x)) XOR
    o'(sigma^j(x)), else zero.  Valid for any pair of tables.
    """
    xs = np.arange(1 << cfg.n, dtype=np.int64)
    acc = np.zeros_like(xs)
    cur = xs.copy()
    for _ in range(cfg.q):
        acc ^= o.table[cur] ^ o_prime.table[cur]
        cur = cfg.sigma.table[cur]
    amps = np.zeros(1 << (cfg.n + cfg.m), dtype=np.complex128)
    amps[(xs << cfg.m) | acc] = 2.0 ** (-cfg.n / 2.0)
    return StateVector(cfg.n + cfg.m, amps)


def attack_pi0_prob(state: StateVector, subset, n: int | None = None, m: int | None = None) -> float:
    """Probability of outcome 0 for the orbit-set measurement.

    ``subset`` is the set S over X values; the Y register (low bits) is
    traced out.  Only the two structured superpositions are ever formed,
    never a dense projector.
    """
    if n is None or m is None:
        raise ValueError("register split (n, m) is required")
    proj = SubsetPairProjector(subset, standard_layout(n, m))
    return project_prob(state, proj)


def attack_run(cfg: AttackConfig, o: OracleTable, o_prime: OracleTable) -> float:
    """Exact probability that the distinguisher outputs 0 (no sampling)."""
    _check_tables(cfg, o, o_prime)
    state = attack_final_state(cfg, o, o_prime)
    s = orbit_set(cfg.sigma, cfg.x_star, cfg.q)
    return attack_pi0_prob(state, s, n=cfg.n, m=cfg.m)


def no_reprogram_prob_closed_form(n: int, q: int) -> float:
    """Closed form for the outcome-0 probability when the tables agree."""
    big = float(1 << n)
    return (
        q / math.sqrt(2.0 ** (n + 1) * q)
        + (big - q) / math.sqrt(2.0 ** (2 * n + 1) - 2.0 ** (n + 1) * q)
    ) ** 2


def attack_advantage_bound(n: int, m: int, q: int) -> tuple[float, float]:
    """(lower, upper) bounds on the exact distinguishing advantage.

    lower: (1 - 2^-m) * sqrt(q) / (4 sqrt(2^n)), the guarantee of the
    attack; upper: (3/2) sqrt(2q / 2^n), the generic reprogramming bound
    for one reprogramming and 2q total oracle queries.
    """
    if not 1 <= q <= (1 << n) >> 3:
        raise HypothesisError(f"need 1 <= q <= 2^(n-3), got q={q}, n={n}")
    lower = (1.0 - 2.0 ** -m) * math.sqrt(q) / (4.0 * math.sqrt(2.0 ** n))
    upper = 1.5 * math.sqrt(2.0 * q / 2.0 ** n)
    return lower, min(upper, 1.0)


@dataclass
class ExactAdvantage:
    advantage: float
    p_same: float
    p_diff: float
    lower: float
    upper: float


def exact_attack_advantage(cfg: AttackConfig, seed: int = 0) -> ExactAdvantage:
    """Exact collision-corrected advantage of the distinguisher.

    Runs the full circuit twice: once with an unchanged oracle and once
    with the oracle reprogrammed at x* to a differing value.  A fresh
    reprogramming value collides with the old one with probability 2^-m,
    so the advantage is

        p_same - (2^-m * p_same + (1 - 2^-m) * p_diff).
    """
    from .oracle import sample_oracle

    o = sample_oracle(cfg.n, cfg.m, seed)
    p_same = attack_run(cfg, o, o)
    flipped = (o.lookup(cfg.x_star) + 1) % (1 << cfg.m)
    o_prime = o.with_entry(cfg.x_star, flipped)
    p_diff = attack_run(cfg, o, o_prime)
    adv = abs(p_same - (2.0 ** -cfg.m * p_same + (1.0 - 2.0 ** -cfg.m) * p_diff))
    lower, upper = attack_advantage_bound(cfg.n, cfg.m, cfg.q)
    return ExactAdvantage(adv, p_same, p_diff, lower, upper)


def make_attack_distinguisher(cfg: AttackConfig):
    """Package the attack as a distinguisher for the reprogramming game.

    The returned callable plays the basic game with X1 the whole domain
    (no adversarial portion): q queries, one reprogram call (which reveals
    the random point), q more queries, then the orbit-set measurement.
    The measurement outcome is sampled; outcome 0 is reported as "not
    reprogrammed" (game output 0).
    """

    def distinguisher(game, rng: np.random.Generator) -> int:
        layout = standard_layout(cfg.n, cfg.m)
        state = prepare_uniform(cfg.n, cfg.m)
        state = game.query_quantum(state, layout)
        for _ in range(cfg.q - 1):
            state = apply_permutation(state, layout, cfg.sigma)
            state = game.query_quantum(state, layout)
        x_star = game.reprogram(0)
        state = game.query_quantum(state, layout)
        inv = cfg.sigma.inverted()
        for _ in range(cfg.q - 1):
            state = apply_permutation(state, layout, inv)
            state = game.query_quantum(state, layout)
        s = orbit_set(cfg.sigma, x_star, cfg.q)
        p0 = attack_pi0_prob(state, s, n=cfg.n, m=cfg.m)
        return 0 if rng.random() < p0 else 1

    return distinguisher
