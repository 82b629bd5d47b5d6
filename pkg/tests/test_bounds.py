import math
from fractions import Fraction

import numpy as np
import pytest

from qreprolab.bounds import (
    BOUNDS,
    Log2,
    attack_bound_pair,
    dilithium_footnote_preset,
    eval_fs_cma,
    eval_metcr,
    eval_nmetcr,
    eval_prop1,
    eval_rma_to_cma,
    eval_thm1,
    eval_uf_f_cma,
    eval_uf_nf_cma,
    eval_uf_nf_cma_seeded,
    solve_fs_alpha_unit_term,
    sqrt_fraction,
)


def test_sqrt_fraction_accuracy():
    for f in (Fraction(2), Fraction(3, 7), Fraction(1, 1 << 40)):
        approx = sqrt_fraction(f)
        assert abs(float(approx) - math.sqrt(float(f))) < 1e-15 * max(1.0, math.sqrt(float(f)))


def test_prop1_values():
    assert eval_prop1(0, 100, 1 << 20).linear == 0.0
    r = eval_prop1(1, 4, Log2(10))
    assert r.linear == pytest.approx(1.5 * math.sqrt(2.0 ** -8), rel=1e-12)
    assert r.linear == pytest.approx(0.09375, rel=1e-12)


def test_prop1_log_domain_huge_parameters():
    # far beyond linear doubles: 2^64 reprogrammings, 2^128 queries
    r = eval_prop1(Log2(64), Log2(128), Log2(257.169925001442))
    assert r.clamped or abs(r.log2_value) < 1e-6


def test_thm1_values():
    assert eval_thm1([]).linear == 0.0
    r = eval_thm1([(1, Fraction(1, 4))])
    assert r.linear == pytest.approx(0.625, rel=1e-12)
    assert r.terms["r1_sqrt"] == pytest.approx(-1.0)
    assert r.terms["r1_linear"] == pytest.approx(-3.0)


def test_thm1_uniform_rows_reproduce_flat_bound():
    # R identical rows with pmax = 1/|X1| stay below (3R/2) sqrt(q/|X1|)
    rows = [(16, 1.0 / 1024)] * 5
    r = eval_thm1(rows)
    flat = eval_prop1(5, 16, 1024)
    assert r.extra["uniform_simplification_log2"] == pytest.approx(flat.log2_value, rel=1e-12)
    assert r.log2_value <= flat.log2_value + 1e-12


def test_metcr_values():
    assert eval_metcr(0, 100, Log2(16), Log2(16)).linear == 0.0
    r = eval_metcr(1, 1, Log2(16), Log2(16))
    assert 2.0 ** r.terms["second_preimage"] == pytest.approx(8 * 16 / 65536, rel=1e-9)
    assert 2.0 ** r.terms["reprogramming"] == pytest.approx(
        1.5 * math.sqrt(3 / 65536), rel=1e-9
    )


def test_nmetcr_drops_leading_multiplier():
    # structurally: the second-preimage term has no q_s prefactor
    m_eval = eval_metcr(8, 100, Log2(30), Log2(30))
    nm_eval = eval_nmetcr(8, 100, Log2(30), Log2(30))
    ratio = 2.0 ** (m_eval.terms["second_preimage"] - nm_eval.terms["second_preimage"])
    # 8*q_s*(q_s+q_H+2)^2 vs 8*(q_s+q_H)^2
    assert ratio == pytest.approx(8 * (8 + 100 + 2) ** 2 / (8 + 100) ** 2, rel=1e-9)


def test_rma_to_cma_values():
    r0 = eval_rma_to_cma(0, 50, Log2(20), Log2(20), 0.125)
    assert r0.linear == pytest.approx(0.125, rel=1e-12)
    r = eval_rma_to_cma(2, 10, Log2(30), Log2(30), 0.0)
    expect = 8 * 2 * 14 ** 2 / 2.0 ** 30 + 3 * 2 * math.sqrt(13 / 2.0 ** 30)
    assert r.linear == pytest.approx(expect, rel=1e-9)


def test_fs_cma_modes():
    r0 = eval_fs_cma(0, 100, Log2(-10), succ_cma0=0.25, adv_hvzk=0.125)
    assert r0.linear == pytest.approx(0.375, rel=1e-12)
    stat = eval_fs_cma(4, 100, Log2(-20), succ_cma0=0.0, delta_hvzk=Fraction(1, 1024))
    expect = 4 / 1024 + 1.5 * 4 * math.sqrt(105 * 2.0 ** -20)
    assert stat.linear == pytest.approx(expect, rel=1e-9)
    with pytest.raises(ValueError):
        eval_fs_cma(1, 1, 0.5, 0.0)
    with pytest.raises(ValueError):
        eval_fs_cma(1, 1, 0.5, 0.0, adv_hvzk=0.0, delta_hvzk=0.0)


def test_uf_f_cma_has_doubled_entropy_term():
    plain = eval_fs_cma(4, 100, Log2(-20), succ_cma0=0.0, adv_hvzk=0.0)
    faulty = eval_uf_f_cma(4, 100, Log2(-20), succ_cma0=0.0, adv_hvzk=0.0)
    assert faulty.terms["reprogramming"] == pytest.approx(
        plain.terms["reprogramming"] + 0.5, rel=1e-12
    )
    assert eval_uf_f_cma(1, 1, 0.5, 0, adv_hvzk=0,
                         subset_revealing=True).extra["fault_index_set"] == "{4,5,6,7,9}"


def test_uf_nf_cma_values():
    r0 = eval_uf_nf_cma(0, 0.125, 0.5)
    assert r0.linear == pytest.approx(0.125, rel=1e-12)
    r = eval_uf_nf_cma(4, 0.0, Fraction(1, 64))
    assert r.linear == pytest.approx(2 * 4 * 0.125, rel=1e-12)


def test_uf_nf_cma_seeded_log_domain():
    r = eval_uf_nf_cma_seeded(256, Log2(64), Log2(64), 0)
    assert r.log2_value == pytest.approx(math.log2(257) + 65 - 127.5, rel=1e-9)
    small = eval_uf_nf_cma_seeded(20, 2, 2, 0.0)
    assert small.linear == pytest.approx(21 * 4 * math.sqrt(1 / 2 ** 19), rel=1e-9)


def test_attack_bound_pair_matches_attack_module():
    from qreprolab.attack import attack_advantage_bound

    r = attack_bound_pair(10, 1, 8)
    lower, upper = attack_advantage_bound(10, 1, 8)
    assert r.extra["lower_linear"] == lower
    assert r.extra["upper_linear"] == upper


def test_dilithium_sizing():
    alpha = solve_fs_alpha_unit_term(Log2(64), Log2(128))
    assert -alpha == pytest.approx(257.17, abs=0.01)
    preset = dilithium_footnote_preset()
    assert preset["entropy_bytes"] == pytest.approx(32.15, abs=0.01)
    assert preset["relative_increase"] == pytest.approx(0.0157, abs=0.0002)


def test_bound_input_bundle():
    from qreprolab.bounds import BoundInput

    bundle = BoundInput(big_r=1, q=4, size_x1=Log2(10))
    assert bundle.evaluate("prop1").linear == pytest.approx(0.09375, rel=1e-12)
    with pytest.raises(ValueError):
        BoundInput(alpha=2.0)
    with pytest.raises(ValueError):
        bundle.evaluate("metcr")


def test_clamping_reported():
    r = eval_prop1(1 << 30, 1 << 30, 4)
    assert r.clamped and r.linear == 1.0
    r2 = eval_prop1(1 << 30, 1 << 30, 4, mode="exact")
    assert r2.clamped and r2.exact_value == 1


def _random_args(bound_name, params, rng):
    args = []
    for name in params:
        if name in ("alpha", "succ_rma", "succ_cma0", "adv_hvzk", "delta_hvzk",
                    "succ_fcma", "succ_fcma_b1", "succ_fcma_b2"):
            args.append(Fraction(int(rng.integers(0, 1 << 20)), 1 << 40))
        elif name == "ell":
            args.append(int(rng.integers(2, 64)))
        else:
            args.append(int(rng.integers(0, 1 << 40)))
    return args


def test_log_and_exact_modes_agree():
    rng = np.random.default_rng(123)
    names = sorted(BOUNDS)
    for trial in range(200):
        name = names[trial % len(names)]
        bound = BOUNDS[name]
        args = _random_args(name, bound.params, rng)
        lin = bound.fn(*args, mode="log2").linear
        exact = float(bound.fn(*args, mode="exact").exact_value)
        if exact == 0.0:
            assert lin == 0.0
        else:
            assert abs(lin - exact) / exact < 1e-9, (name, args)


# bounds are nondecreasing in query counts and in probability parameters
# (not in set sizes or the seed length, which tighten them)
MONOTONE_UP = {
    "big_r", "q", "q_s", "q_h", "q_g",
    "alpha", "succ_rma", "succ_cma0", "adv_hvzk", "delta_hvzk",
    "succ_fcma", "succ_fcma_b1", "succ_fcma_b2",
}


def test_monotonicity_random_perturbations():
    rng = np.random.default_rng(321)
    names = sorted(BOUNDS)
    done = 0
    trial = 0
    while done < 1000:
        name = names[trial % len(names)]
        trial += 1
        bound = BOUNDS[name]
        args = _random_args(name, bound.params, rng)
        base = bound.fn(*args, mode="log2").linear
        bumpable = [i for i, p in enumerate(bound.params) if p in MONOTONE_UP]
        k = bumpable[int(rng.integers(len(bumpable)))]
        bumped = list(args)
        if isinstance(bumped[k], Fraction):
            bumped[k] = bumped[k] * 2
        else:
            bumped[k] = bumped[k] * 2 + 1
        up = bound.fn(*bumped, mode="log2").linear
        assert up >= base - 1e-15 * max(1.0, base), (name, k, args)
        done += 1
