"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as the
criteria execute; tolerances are pinned in the assertions.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from qreprolab.attack import (
    AttackConfig,
    attack_final_state,
    attack_run,
    closed_form_state,
    exact_attack_advantage,
    no_reprogram_prob_closed_form,
)
from qreprolab.bounds import BOUNDS, dilithium_footnote_preset
from qreprolab.faultlab import (
    INDEX_TARGETS,
    FaultSpec,
    candidate_keys,
    enumerate_faultsign_joint,
    enumerate_sim_joint,
    identity_fault,
    make_forging_adversary,
    reduction_b2_keysearch,
    reduction_b_cma0,
)
from qreprolab.oracle import ProgrammableOracle, sample_oracle
from qreprolab.purified import (
    averaged_classical_density,
    epsilon_x,
    random_circuit,
    reduced_adv_density,
    run_circuit_purified,
    support_size,
    trace_distance,
)
from qreprolab.sigcore import (
    fs_signature_scheme,
    make_challenge_oracle,
    schnorr_toy,
    tv_distance,
)

GRID = [(10, 8), (12, 32), (14, 128), (16, 512)]


def report(criterion: int, passed: bool, detail: str) -> None:
    print(f"criterion {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")


@pytest.fixture(scope="module")
def grid_advantages():
    t0 = time.perf_counter()
    results = [(n, q, exact_attack_advantage(AttackConfig(n=n, m=1, q=q), seed=1))
               for n, q in GRID]
    return results, time.perf_counter() - t0


def test_criterion_1_attack_lower_bound(grid_advantages):
    results, elapsed = grid_advantages
    ok = True
    for n, q, ex in results:
        lower = (1 - 0.5) * math.sqrt(q) / (4 * math.sqrt(2.0 ** n))
        ok &= ex.advantage >= lower - 1e-15
    ok &= elapsed < 60.0
    report(1, ok, f"grid advantages >= lower bound, {elapsed:.1f}s < 60s")
    assert ok
    for n, q, ex in results:
        assert ex.advantage >= (1 - 0.5) * math.sqrt(q) / (4 * math.sqrt(2.0 ** n))
    assert elapsed < 60.0


def test_criterion_2_bound_sandwich(grid_advantages):
    results, _ = grid_advantages
    violations = [
        (n, q) for n, q, ex in results
        if not ex.advantage <= 1.5 * math.sqrt(2 * q / 2.0 ** n) + 1e-15
    ]
    report(2, not violations, f"{len(violations)} sandwich violations on the grid")
    assert not violations


def test_criterion_3_closed_form_state_equality():
    rng = np.random.default_rng(2718)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(4, 13))
        m = int(rng.integers(1, 3))
        q = int(rng.integers(1, min((1 << n) >> 3, 96) + 1))
        x_star = int(rng.integers(1 << n))
        cfg = AttackConfig(n=n, m=m, q=q, x_star=x_star)
        o = sample_oracle(n, m, seed=int(rng.integers(2 ** 32)))
        o_prime = o.with_entry(x_star, int(rng.integers(1 << m)))
        diff = np.max(np.abs(
            attack_final_state(cfg, o, o_prime).amplitudes
            - closed_form_state(cfg, o, o_prime).amplitudes
        ))
        worst = max(worst, float(diff))
    report(3, worst <= 1e-10, f"50 instances, worst amplitude deviation {worst:.2e}")
    assert worst <= 1e-10


def test_criterion_4_measurement_probabilities():
    worst_same = worst_diff = 0.0
    for n, q in [(3, 1), (8, 4)] + GRID:
        cfg = AttackConfig(n=n, m=1, q=q)
        o = sample_oracle(n, 1, seed=n)
        closed = no_reprogram_prob_closed_form(n, q)
        worst_same = max(worst_same, abs(attack_run(cfg, o, o) - closed))
        o_prime = o.with_entry(0, o.lookup(0) ^ 1)
        worst_diff = max(worst_diff, abs(attack_run(cfg, o, o_prime) - 0.5))
    ok = worst_same <= 1e-10 and worst_diff <= 1e-10
    report(4, ok, f"closed-form dev {worst_same:.2e}, changed-point dev {worst_diff:.2e}")
    assert worst_same <= 1e-10
    assert worst_diff <= 1e-10


def test_criterion_5_purified_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5353)
    worst = 0.0
    for _ in range(20):
        steps = random_circuit(3, 1, 4, rng)
        po = run_circuit_purified(3, 1, steps)
        dist = trace_distance(reduced_adv_density(po),
                              averaged_classical_density(3, 1, steps))
        worst = max(worst, dist)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 120.0
    report(5, ok, f"20 circuits, worst trace distance {worst:.2e}, {elapsed:.1f}s < 120s")
    assert worst <= 1e-9
    assert elapsed < 120.0


def _classical_basis_circuit(points, rng):
    """q classical-basis queries at the given 3-bit points, with random
    unitaries on the output qubit in between (X stays classical)."""
    steps = []
    current = 0
    for x in points:
        shift = np.zeros((16, 16))
        for i in range(16):
            shift[i ^ ((current ^ x) << 1), i] = 1
        steps.append(("unitary", shift))
        steps.append(("query",))
        current = x
        raw = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        qmat, rmat = np.linalg.qr(raw)
        u_y = qmat * (np.diag(rmat) / np.abs(np.diag(rmat)))
        steps.append(("unitary", np.kron(np.eye(8), u_y)))
    return steps


def test_criterion_6_disturbance_bound_and_support():
    rng = np.random.default_rng(66)
    ok = True
    details = []
    for q in (1, 2, 3):
        for trial in range(4):
            points = list(rng.choice(8, size=q, replace=False))
            steps = _classical_basis_circuit(points, rng)
            po = run_circuit_purified(3, 1, steps)
            mean_overlap = float(np.mean([1 - epsilon_x(po, x) for x in range(8)]))
            disturbed = sum(epsilon_x(po, x) > 1e-12 for x in range(8))
            support = support_size(po)
            ok &= mean_overlap >= 1 - q / 8 - 1e-12
            ok &= disturbed <= q and support <= q
        # the bound also holds for circuits with superposition queries
        steps = random_circuit(3, 1, 2 * q, rng)
        queries = sum(1 for s in steps if s[0] == "query")
        po = run_circuit_purified(3, 1, steps)
        mean_overlap = float(np.mean([1 - epsilon_x(po, x) for x in range(8)]))
        ok &= mean_overlap >= 1 - queries / 8 - 1e-12
        ok &= support_size(po) <= queries
        details.append(f"q={q} overlap>={1 - q / 8:.3f}")
    report(6, ok, "; ".join(details))
    assert ok


def test_criterion_7_simulation_exactness():
    scheme = schnorr_toy(17)
    pk, sk = scheme.enumerate_keys()[3]
    msg_bits = 8
    widths = {"w": scheme.widths.w, "m": msg_bits, "pk": scheme.widths.pk,
              "c": scheme.widths.c, "z": scheme.widths.z}
    checked = 0
    failures = []
    for index in (5, 6, 9):
        specs = [identity_fault(index)]
        for target in INDEX_TARGETS[index]:
            for bit in range(widths[target]):
                specs.append(FaultSpec(index, "flip", bit, 0, target))
                specs.append(FaultSpec(index, "set", bit, 0, target))
                specs.append(FaultSpec(index, "set", bit, 1, target))
        for spec in specs:
            genuine = enumerate_faultsign_joint(scheme, sk, pk, 5, spec, 20, msg_bits)
            simulated = enumerate_sim_joint(scheme, pk, 5, spec, 20, msg_bits)
            if tv_distance(genuine, simulated) != Fraction(0):
                failures.append(spec)
            checked += 1
    report(7, not failures, f"{checked} fault specs, exact joint equality"
                            f"{'' if not failures else f', {len(failures)} mismatches'}")
    assert not failures


class _ExhaustiveKeyForger:
    """Scripted winner: recovers the toy key from the public key, asks a
    few signatures, then forges honestly on a fresh message."""

    def __init__(self, scheme):
        self.scheme = scheme

    def __call__(self, pk, sign_oracle, h, rng):
        sk = next(s for p, s in self.scheme.enumerate_keys() if p == pk)
        inner = make_forging_adversary(self.scheme, sk, [1, 2, 3], 9)
        return inner(pk, sign_oracle, h, rng)


def test_criterion_8_reduction_soundness():
    scheme = schnorr_toy(17)
    forger = _ExhaustiveKeyForger(scheme)
    adversary_wins = reduction_wins = 0
    for seed in range(1000):
        out = reduction_b_cma0(scheme, forger, seed)
        adversary_wins += out.adversary_won
        reduction_wins += out.adversary_won and out.reduction_won
    ok = adversary_wins == 1000 and reduction_wins == adversary_wins
    report(8, ok, f"{reduction_wins}/{adversary_wins} winning episodes transferred")
    assert adversary_wins == 1000
    assert reduction_wins == adversary_wins


def test_criterion_9_candidate_key_completeness():
    # exhaustive bit-level check up to 16-bit keys (vectorized)
    ok = True
    for width in range(1, 17):
        keys = np.arange(1 << width, dtype=np.int64)
        faulted = [keys]
        for bit in range(width):
            faulted += [keys ^ (1 << bit), keys & ~(1 << bit), keys | (1 << bit)]
        for f in faulted:
            # membership: keys must lie in the candidate expansion of f
            cands = [f, f]
            for bit in range(width):
                cands += [f ^ (1 << bit), f & ~(1 << bit), f | (1 << bit)]
            member = np.zeros(1 << width, dtype=bool)
            for c in cands:
                member |= c == keys
            ok &= bool(member.all())
    # and the key search recovers a forgery from every one-bit faulted key
    scheme = schnorr_toy(17)
    rng = np.random.default_rng(909)
    h = ProgrammableOracle(make_challenge_oracle(scheme, 20, seed=909))
    sig = fs_signature_scheme(scheme, h)
    pk, sk = sig.keygen(rng)
    recovered = total = 0
    for bit in range(scheme.widths.sk):
        for faulted in (sk ^ (1 << bit), sk & ~(1 << bit), sk | (1 << bit)):
            cands = candidate_keys(faulted, scheme.widths.sk)
            assert sk in cands
            forgery = reduction_b2_keysearch(sig, pk, cands, 500 + bit, rng)
            total += 1
            recovered += forgery is not None and sig.verify(pk, *forgery)
    ok &= recovered == total
    report(9, ok, f"16-bit closure exhaustive; {recovered}/{total} key searches forged")
    assert ok


def test_criterion_10_sizing_preset():
    from qreprolab.bounds import Log2, eval_fs_cma

    preset = dilithium_footnote_preset()
    bits = preset["entropy_bits"]
    increase = preset["relative_increase"]
    # round trip: plugging the solved entropy back into the chosen-message
    # bound must make the reprogramming term exactly 1
    evaluated = eval_fs_cma(Log2(64), Log2(128), Log2(-bits),
                            succ_cma0=0, adv_hvzk=0)
    term = evaluated.terms["reprogramming"]
    ok = abs(bits - 257.2) < 0.05 and abs(preset["entropy_bytes"] - 32.1) < 0.1
    ok &= round(increase, 4) == 0.0157
    ok &= abs(term) < 1e-9
    report(10, ok, f"{bits:.2f} bits = {preset['entropy_bytes']:.2f} bytes; "
                   f"32/2044 = {increase:.2%}; term log2 = {term:.1e}")
    assert abs(term) < 1e-9
    assert abs(bits - 257.2) < 0.05
    assert abs(preset["entropy_bytes"] - 32.1) < 0.1
    assert round(increase, 4) == 0.0157
    # the footnote's own rounding: about 32 bytes, about 1.6%
    assert abs(preset["entropy_bytes"] - 32) < 0.5
    assert abs(increase - 0.016) < 0.001


def _random_bound_args(params, rng):
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


def test_criterion_11_bound_evaluator_fidelity():
    rng = np.random.default_rng(1111)
    names = sorted(BOUNDS)
    worst_rel = 0.0
    for trial in range(200):
        bound = BOUNDS[names[trial % len(names)]]
        args = _random_bound_args(bound.params, rng)
        lin = bound.fn(*args, mode="log2").linear
        exact = float(bound.fn(*args, mode="exact").exact_value)
        if exact:
            worst_rel = max(worst_rel, abs(lin - exact) / exact)
        else:
            assert lin == 0.0
    mono_up = {"big_r", "q", "q_s", "q_h", "q_g", "alpha", "succ_rma", "succ_cma0",
               "adv_hvzk", "delta_hvzk", "succ_fcma", "succ_fcma_b1", "succ_fcma_b2"}
    violations = 0
    done = trial_i = 0
    while done < 1000:
        bound = BOUNDS[names[trial_i % len(names)]]
        trial_i += 1
        args = _random_bound_args(bound.params, rng)
        base = bound.fn(*args, mode="log2").linear
        bumpable = [i for i, p in enumerate(bound.params) if p in mono_up]
        k = bumpable[int(rng.integers(len(bumpable)))]
        bumped = list(args)
        bumped[k] = bumped[k] * 2 if isinstance(bumped[k], Fraction) else bumped[k] * 2 + 1
        if bound.fn(*bumped, mode="log2").linear < base - 1e-15 * max(1.0, base):
            violations += 1
        done += 1
    ok = worst_rel < 1e-9 and violations == 0
    report(11, ok, f"mode agreement rel {worst_rel:.2e}; {violations} monotonicity violations")
    assert worst_rel < 1e-9
    assert violations == 0
