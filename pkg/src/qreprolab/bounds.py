"""Closed-form evaluators for the concrete security bounds.

Every formula is transcribed with its exact constants; nothing is
simplified asymptotically.  Two arithmetic modes share each formula:

* ``log2``  - all quantities carried as base-2 logarithms in double
  precision, so cryptographic-scale parameters (2^128 queries, 2^-257
  probabilities) never underflow;
* ``exact`` - rational arithmetic with square roots taken to 30
  significant digits via integer square root, used as the independent
  desk-scale cross-check.

Parameters are plain numbers (linear) or ``Log2(v)`` wrappers.  Results
report the total, a named term breakdown, and whether the linear value
was clamped to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

NEG_INF = float("-inf")
_SQRT_DIGITS = 30


@dataclass(frozen=True)
class Log2:
    """Marks a parameter given as a base-2 logarithm."""

    value: float


def _as_log2(x) -> float:
    if isinstance(x, Log2):
        return float(x.value)
    if isinstance(x, Fraction):
        if x == 0:
            return NEG_INF
        return math.log2(x.numerator) - math.log2(x.denominator)
    if x < 0:
        raise ValueError("parameters must be nonnegative")
    if x == 0:
        return NEG_INF
    return math.log2(x)


def _as_exact(x) -> Fraction:
    if isinstance(x, Log2):
        v = x.value
        if v != int(v):
            raise ValueError("exact mode needs integral log2 parameters")
        v = int(v)
        return Fraction(1 << v) if v >= 0 else Fraction(1, 1 << -v)
    return Fraction(x)


def sqrt_fraction(f: Fraction, digits: int = _SQRT_DIGITS) -> Fraction:
    """Rational approximation of sqrt(f), good to ``digits`` decimals."""
    if f < 0:
        raise ValueError("square root of a negative value")
    scale = 10 ** digits
    return Fraction(math.isqrt((f.numerator * scale * scale) // f.denominator), scale)


def _log2_sum(terms) -> float:
    """log2 of a sum given the log2 of each addend."""
    terms = [t for t in terms if t != NEG_INF]
    if not terms:
        return NEG_INF
    top = max(terms)
    return top + math.log2(sum(2.0 ** (t - top) for t in terms))


@dataclass
class BoundResult:
    log2_value: float
    terms: dict = field(default_factory=dict)   # name -> log2 of the addend
    clamped: bool = False
    exact_value: Fraction | None = None
    extra: dict = field(default_factory=dict)

    @property
    def linear(self) -> float:
        if self.exact_value is not None:
            return float(self.exact_value)
        return 0.0 if self.log2_value == NEG_INF else 2.0 ** self.log2_value


def _finish(term_pairs, mode: str, extra: dict | None = None) -> BoundResult:
    """Assemble a result from (name, log2 or Fraction) addends, clamping at 1."""
    extra = extra or {}
    if mode == "log2":
        terms = {name: val for name, val in term_pairs}
        total = _log2_sum(terms.values())
        clamped = total > 0.0
        return BoundResult(min(total, 0.0), terms, clamped, None, extra)
    if mode == "exact":
        total = sum((val for _, val in term_pairs), Fraction(0))
        clamped = total > 1
        value = min(total, Fraction(1))
        terms = {
            name: (NEG_INF if val == 0 else math.log2(val.numerator) - math.log2(val.denominator))
            for name, val in term_pairs
        }
        return BoundResult(
            NEG_INF if value == 0 else math.log2(value.numerator) - math.log2(value.denominator),
            terms, clamped, value, extra,
        )
    raise ValueError(f"unknown mode {mode!r}")


def _term_sqrt(coeff_log2: float, inner_log2: float) -> float:
    return coeff_log2 + inner_log2 / 2.0


# ---------------------------------------------------------------------------
# reprogramming bounds


def eval_prop1(big_r, q, size_x1, mode: str = "log2") -> BoundResult:
    """(3R/2) sqrt(q / |X1|), clamped to [0, 1]."""
    if mode == "log2":
        r_l, q_l, x_l = _as_log2(big_r), _as_log2(q), _as_log2(size_x1)
        if r_l == NEG_INF or q_l == NEG_INF:
            return _finish([("reprogramming", NEG_INF)], mode)
        term = math.log2(1.5) + r_l + (q_l - x_l) / 2.0
        return _finish([("reprogramming", term)], mode)
    r_e, q_e, x_e = _as_exact(big_r), _as_exact(q), _as_exact(size_x1)
    term = Fraction(3, 2) * r_e * sqrt_fraction(q_e / x_e)
    return _finish([("reprogramming", term)], mode)


def eval_thm1(schedule, mode: str = "log2") -> BoundResult:
    """Sum over reprogram calls of sqrt(qhat * pmax) + qhat * pmax / 2.

    ``schedule`` rows are (queries-before-call, max point probability).
    When every row shares the same pmax, the uniform simplification
    (3R/2) sqrt(qmax * pmax) is also reported, and dominance of the exact
    sum is asserted whenever qmax * pmax < 1.
    """
    rows = list(schedule)
    extra: dict = {}
    if mode == "log2":
        terms = []
        for r, (qhat, pmax) in enumerate(rows):
            q_l, p_l = _as_log2(qhat), _as_log2(pmax)
            qp = q_l + p_l
            terms.append((f"r{r + 1}_sqrt", qp / 2.0))
            terms.append((f"r{r + 1}_linear", qp - 1.0))
        result = _finish(terms, mode, extra)
    else:
        terms = []
        for r, (qhat, pmax) in enumerate(rows):
            qp = _as_exact(qhat) * _as_exact(pmax)
            terms.append((f"r{r + 1}_sqrt", sqrt_fraction(qp)))
            terms.append((f"r{r + 1}_linear", qp / 2))
        result = _finish(terms, mode, extra)
    if rows:
        pmaxes = {_as_log2(p) for _, p in rows}
        if len(pmaxes) == 1:
            q_top = max(_as_log2(q) for q, _ in rows)
            p_l = pmaxes.pop()
            simp = math.log2(1.5) + math.log2(len(rows)) + (q_top + p_l) / 2.0
            result.extra["uniform_simplification_log2"] = simp
            if q_top + p_l < 0.0:
                assert result.log2_value <= simp + 1e-9, (
                    "schedule sum exceeded its uniform simplification"
                )
    return result


# ---------------------------------------------------------------------------
# message-compression bounds


def eval_metcr(q_s, q_h, size_m, size_z, mode: str = "log2") -> BoundResult:
    """8 q_s (q_s + q_H + 2)^2 / |M|  +  (3 q_s / 2) sqrt((q_H + q_s + 1) / |Z|)."""
    if mode == "log2":
        qs_l = _as_log2(q_s)
        if qs_l == NEG_INF:
            return _finish([("second_preimage", NEG_INF), ("reprogramming", NEG_INF)], mode)
        qs, qh = 2.0 ** qs_l, 2.0 ** _as_log2(q_h)
        t1 = 3.0 + qs_l + 2.0 * math.log2(qs + qh + 2.0) - _as_log2(size_m)
        t2 = math.log2(1.5) + qs_l + (math.log2(qh + qs + 1.0) - _as_log2(size_z)) / 2.0
        return _finish([("second_preimage", t1), ("reprogramming", t2)], mode)
    qs, qh = _as_exact(q_s), _as_exact(q_h)
    t1 = 8 * qs * (qs + qh + 2) ** 2 / _as_exact(size_m)
    t2 = Fraction(3, 2) * qs * sqrt_fraction((qh + qs + 1) / _as_exact(size_z))
    return _finish([("second_preimage", t1), ("reprogramming", t2)], mode)


def eval_nmetcr(q_s, q_h, size_m, size_z, mode: str = "log2") -> BoundResult:
    """8 (q_s + q_H)^2 / |M|  +  1.5 q_s sqrt((q_H + q_s) / |Z|).

    The nonce-indexed variant: the second-preimage term loses its
    leading q_s factor because every target carries a distinct index.
    """
    if mode == "log2":
        qs, qh = 2.0 ** _as_log2(q_s), 2.0 ** _as_log2(q_h)
        t1 = 3.0 + 2.0 * math.log2(qs + qh) - _as_log2(size_m) if qs + qh > 0 else NEG_INF
        t2 = (
            math.log2(1.5) + _as_log2(q_s) + (math.log2(qh + qs) - _as_log2(size_z)) / 2.0
            if qs > 0 else NEG_INF
        )
        return _finish([("second_preimage", t1), ("reprogramming", t2)], mode)
    qs, qh = _as_exact(q_s), _as_exact(q_h)
    t1 = 8 * (qs + qh) ** 2 / _as_exact(size_m)
    t2 = Fraction(3, 2) * qs * sqrt_fraction((qh + qs) / _as_exact(size_z))
    return _finish([("second_preimage", t1), ("reprogramming", t2)], mode)


def eval_rma_to_cma(q_s, q_h, size_m, size_z, succ_rma, mode: str = "log2") -> BoundResult:
    """succ_rma + 8 q_s (q_s + q_H + 2)^2 / |M| + 3 q_s sqrt((q_H + q_s + 1) / |Z|)."""
    if mode == "log2":
        qs_l = _as_log2(q_s)
        qs, qh = 2.0 ** qs_l, 2.0 ** _as_log2(q_h)
        if qs == 0:
            return _finish([("random_message_forgery", _as_log2(succ_rma)),
                            ("second_preimage", NEG_INF), ("reprogramming", NEG_INF)], mode)
        t1 = 3.0 + qs_l + 2.0 * math.log2(qs + qh + 2.0) - _as_log2(size_m)
        t2 = math.log2(3.0) + qs_l + (math.log2(qh + qs + 1.0) - _as_log2(size_z)) / 2.0
        return _finish([("random_message_forgery", _as_log2(succ_rma)),
                        ("second_preimage", t1), ("reprogramming", t2)], mode)
    qs, qh = _as_exact(q_s), _as_exact(q_h)
    t1 = 8 * qs * (qs + qh + 2) ** 2 / _as_exact(size_m)
    t2 = 3 * qs * sqrt_fraction((qh + qs + 1) / _as_exact(size_z))
    return _finish([("random_message_forgery", _as_exact(succ_rma)),
                    ("second_preimage", t1), ("reprogramming", t2)], mode)


# ---------------------------------------------------------------------------
# challenge-hash signature bounds


def _hvzk_term(q_s, adv_hvzk, delta_hvzk, mode: str):
    """Either the supplied distinguishing advantage or q_s * Delta."""
    if (adv_hvzk is None) == (delta_hvzk is None):
        raise ValueError("give exactly one of adv_hvzk (computational) or "
                         "delta_hvzk (statistical)")
    if mode == "log2":
        if adv_hvzk is not None:
            return _as_log2(adv_hvzk)
        return _as_log2(q_s) + _as_log2(delta_hvzk)
    if adv_hvzk is not None:
        return _as_exact(adv_hvzk)
    return _as_exact(q_s) * _as_exact(delta_hvzk)


def eval_fs_cma(q_s, q_h, alpha, succ_cma0, adv_hvzk=None, delta_hvzk=None,
                mode: str = "log2") -> BoundResult:
    """succ_cma0 + hvzk + (3 q_s / 2) sqrt((q_H + q_s + 1) * alpha)."""
    hvzk = _hvzk_term(q_s, adv_hvzk, delta_hvzk, mode)
    if mode == "log2":
        qs_l = _as_log2(q_s)
        qs, qh = 2.0 ** qs_l, 2.0 ** _as_log2(q_h)
        t = (
            math.log2(1.5) + qs_l + (math.log2(qh + qs + 1.0) + _as_log2(alpha)) / 2.0
            if qs > 0 else NEG_INF
        )
        return _finish([("key_only_forgery", _as_log2(succ_cma0)),
                        ("transcript_simulation", hvzk), ("reprogramming", t)], mode)
    qs, qh = _as_exact(q_s), _as_exact(q_h)
    t = Fraction(3, 2) * qs * sqrt_fraction((qh + qs + 1) * _as_exact(alpha))
    return _finish([("key_only_forgery", _as_exact(succ_cma0)),
                    ("transcript_simulation", hvzk), ("reprogramming", t)], mode)


def eval_uf_f_cma(q_s, q_h, alpha, succ_cma0, adv_hvzk=None, delta_hvzk=None,
                  subset_revealing: bool = False, mode: str = "log2") -> BoundResult:
    """succ_cma0 + hvzk + (3 q_S / 2) sqrt(2 (q_H + q_S + 1) * alpha).

    The numeric bound is the same for both admissible fault-index sets;
    ``subset_revealing`` only selects which set the result is labeled
    as applying to.
    """
    hvzk = _hvzk_term(q_s, adv_hvzk, delta_hvzk, mode)
    extra = {"fault_index_set": "{4,5,6,7,9}" if subset_revealing else "{5,6,9}"}
    if mode == "log2":
        qs_l = _as_log2(q_s)
        qs, qh = 2.0 ** qs_l, 2.0 ** _as_log2(q_h)
        t = (
            math.log2(1.5) + qs_l + (1.0 + math.log2(qh + qs + 1.0) + _as_log2(alpha)) / 2.0
            if qs > 0 else NEG_INF
        )
        return _finish([("key_only_forgery", _as_log2(succ_cma0)),
                        ("transcript_simulation", hvzk), ("reprogramming", t)], mode, extra)
    qs, qh = _as_exact(q_s), _as_exact(q_h)
    t = Fraction(3, 2) * qs * sqrt_fraction(2 * (qh + qs + 1) * _as_exact(alpha))
    return _finish([("key_only_forgery", _as_exact(succ_cma0)),
                    ("transcript_simulation", hvzk), ("reprogramming", t)], mode, extra)


def eval_uf_nf_cma(q_g, succ_fcma_b1, succ_fcma_b2, mode: str = "log2") -> BoundResult:
    """succ_fcma(B1) + 2 q_G sqrt(succ_fcma(B2))."""
    if mode == "log2":
        t = 1.0 + _as_log2(q_g) + _as_log2(succ_fcma_b2) / 2.0
        if _as_log2(q_g) == NEG_INF:
            t = NEG_INF
        return _finish([("direct_simulation", _as_log2(succ_fcma_b1)),
                        ("key_extraction", t)], mode)
    t = 2 * _as_exact(q_g) * sqrt_fraction(_as_exact(succ_fcma_b2))
    return _finish([("direct_simulation", _as_exact(succ_fcma_b1)),
                    ("key_extraction", t)], mode)


def eval_uf_nf_cma_seeded(ell, q_s, q_g, succ_fcma, mode: str = "log2") -> BoundResult:
    """succ_fcma + (ell + 1) (q_S + q_G) sqrt(1 / 2^(ell - 1)).

    Variant for hedging with an independent ell-bit seed instead of the
    signing key.
    """
    if mode == "log2":
        ell_v = 2.0 ** _as_log2(ell)
        qsum = 2.0 ** _as_log2(q_s) + 2.0 ** _as_log2(q_g)
        t = math.log2(ell_v + 1.0) + math.log2(qsum) - (ell_v - 1.0) / 2.0 if qsum > 0 else NEG_INF
        return _finish([("unfaulted_game", _as_log2(succ_fcma)), ("seed_guessing", t)], mode)
    ell_e = _as_exact(ell)
    if ell_e.denominator != 1:
        raise ValueError("seed length must be an integer")
    t = (ell_e + 1) * (_as_exact(q_s) + _as_exact(q_g)) * sqrt_fraction(
        Fraction(1, 1 << (int(ell_e) - 1))
    )
    return _finish([("unfaulted_game", _as_exact(succ_fcma)), ("seed_guessing", t)], mode)


# ---------------------------------------------------------------------------
# the matching attack, and parameter presets


def attack_bound_pair(n: int, m: int, q: int) -> BoundResult:
    """Lower/upper advantage bounds of the interference distinguisher
    (shared implementation with the attack module); the value reported
    is the upper bound, with the lower bound in the breakdown."""
    from .attack import attack_advantage_bound

    lower, upper = attack_advantage_bound(n, m, q)
    return BoundResult(
        log2_value=math.log2(upper),
        terms={"lower": math.log2(lower), "upper": math.log2(upper)},
        extra={"lower_linear": lower, "upper_linear": upper},
    )


def solve_fs_alpha_unit_term(q_s, q_h) -> float:
    """log2 of the commitment max-probability that makes the
    reprogramming term of the chosen-message bound equal 1:
    alpha = (2 / (3 q_s))^2 / (q_H + q_s + 1)."""
    qs_l, qh_l = _as_log2(q_s), _as_log2(q_h)
    qsum = _log2_sum([qh_l, qs_l, 0.0])
    return 2.0 * (1.0 - math.log2(3.0) - qs_l) - qsum


def dilithium_footnote_preset() -> dict:
    """Commitment-entropy sizing at 2^64 signing and 2^128 hash queries.

    Returns the entropy (bits and bytes) a commitment must carry for the
    reprogramming term to reach 1, and the relative size increase when
    32 bytes are appended to a 2044-byte signature.
    """
    alpha_log2 = solve_fs_alpha_unit_term(Log2(64), Log2(128))
    bits = -alpha_log2
    return {
        "q_s_log2": 64,
        "q_h_log2": 128,
        "alpha_log2": alpha_log2,
        "entropy_bits": bits,
        "entropy_bytes": bits / 8.0,
        "appended_bytes": 32,
        "base_signature_bytes": 2044,
        "relative_increase": 32.0 / 2044.0,
    }


# ---------------------------------------------------------------------------
# parameter bundles and the registry for the command-line sweep driver


@dataclass
class BoundInput:
    """Named parameter bundle for the evaluators.

    Query counts and set sizes may be plain numbers or ``Log2`` wrappers;
    probability-like fields must land in [0, 1].  ``evaluate`` dispatches
    by bound id using whichever fields that formula needs.
    """

    q_h: object = None
    q_s: object = None
    q_g: object = None
    big_r: object = None
    q: object = None
    size_x1: object = None
    size_m: object = None
    size_z: object = None
    alpha: object = None
    delta_hvzk: object = None
    delta_shvzk: object = None
    adv_hvzk: object = None
    succ_rma: object = None
    succ_cma0: object = None
    succ_fcma: object = None
    succ_fcma_b1: object = None
    succ_fcma_b2: object = None
    ell: object = None

    def __post_init__(self):
        for name in ("alpha", "delta_hvzk", "delta_shvzk", "adv_hvzk", "succ_rma",
                     "succ_cma0", "succ_fcma", "succ_fcma_b1", "succ_fcma_b2"):
            v = getattr(self, name)
            if v is None:
                continue
            lg = _as_log2(v)
            if lg > 0.0:
                raise ValueError(f"{name} must be a probability in [0, 1]")
        for name in ("q_h", "q_s", "q_g", "big_r", "q", "size_x1", "size_m",
                     "size_z", "ell"):
            v = getattr(self, name)
            if isinstance(v, Log2) and not math.isfinite(v.value):
                raise ValueError(f"{name} has a non-finite log value")

    def evaluate(self, bound_id: str, mode: str = "log2") -> "BoundResult":
        bound = BOUNDS[bound_id]
        missing = [p for p in bound.params if getattr(self, p) is None]
        if missing:
            raise ValueError(f"{bound_id} needs parameters {missing}")
        return bound.fn(*[getattr(self, p) for p in bound.params], mode=mode)


@dataclass(frozen=True)
class BoundDef:
    fn: object
    params: tuple


BOUNDS = {
    "prop1": BoundDef(eval_prop1, ("big_r", "q", "size_x1")),
    "metcr": BoundDef(eval_metcr, ("q_s", "q_h", "size_m", "size_z")),
    "nmetcr": BoundDef(eval_nmetcr, ("q_s", "q_h", "size_m", "size_z")),
    "rma-to-cma": BoundDef(eval_rma_to_cma, ("q_s", "q_h", "size_m", "size_z", "succ_rma")),
    "fs-cma": BoundDef(eval_fs_cma, ("q_s", "q_h", "alpha", "succ_cma0", "adv_hvzk")),
    "fs-cma-statistical": BoundDef(
        lambda q_s, q_h, alpha, succ_cma0, delta_hvzk, mode="log2": eval_fs_cma(
            q_s, q_h, alpha, succ_cma0, delta_hvzk=delta_hvzk, mode=mode
        ),
        ("q_s", "q_h", "alpha", "succ_cma0", "delta_hvzk"),
    ),
    "uf-f-cma": BoundDef(eval_uf_f_cma, ("q_s", "q_h", "alpha", "succ_cma0", "adv_hvzk")),
    "uf-nf-cma": BoundDef(eval_uf_nf_cma, ("q_g", "succ_fcma_b1", "succ_fcma_b2")),
    "uf-nf-cma-seeded": BoundDef(eval_uf_nf_cma_seeded, ("ell", "q_s", "q_g", "succ_fcma")),
}
