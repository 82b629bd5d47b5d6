"""Fault-injection unforgeability games, their simulators, and reductions.

One-bit tampering functions (identity, flip a bit, set a bit) can be
applied at numbered stages of the challenge-hash signing pipeline:

    1  key input of the randomness-derivation oracle (hedged variant)
    4  commitment output (the (w, st) pair)
    5  hash input (the (w, m, pk) triple)
    6  hash output (the challenge c)
    7  response input (the (sk, c, st) triple)
    9  the finished signature (the (w, z) pair)

Indices 0, 2, 3, 8 and 10 (tampering the nonce/message input of the
derandomizer, the inputs of the commitment, and key derivation or
serialization steps) are rejected with a distinct error: the game suite
does not model them.

For every supported index there is a simulation algorithm that produces
the same joint distribution of (signature, touched hash point, planted
value) from the public key alone, via the special zero-knowledge
simulator plus one a-posteriori reprogramming of the challenge oracle.
The simulations mirror the observable output of the genuine faulty
pipeline exactly; exhaustive enumerators over toy schemes check equality
in exact rational arithmetic.

All fault games bind the public key into the challenge hash.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .encoding import compress
from .oracle import ProgrammableOracle, sample_oracle
from .sigcore import (
    DEFAULT_MSG_BITS,
    IdScheme,
    SignatureScheme,
    challenge_point,
    fs_verify,
)

SUPPORTED_INDICES = frozenset({1, 4, 5, 6, 7, 9})
EXCLUDED_INDICES = frozenset({0, 2, 3, 8, 10})

INDEX_TARGETS = {
    1: ("sk",),
    4: ("w", "st"),
    5: ("w", "m", "pk"),
    6: ("c",),
    7: ("sk", "c", "st"),
    9: ("w", "z"),
}


class ExcludedFaultIndexError(ValueError):
    """Fault index outside the modeled game suite."""


class UnsupportedFaultError(ValueError):
    """Simulation requires structure the scheme does not have."""


class ProtocolViolationError(RuntimeError):
    """Adversary broke a stated query restriction."""


def fault_apply(kind: str, bit: int, value: int, x: int, width: int) -> int:
    """Apply one tampering function to a ``width``-bit string (bit 0 = LSB)."""
    if kind == "id":
        return x
    if not 0 <= bit < width:
        raise ValueError(f"bit {bit} out of range for a {width}-bit value")
    if kind == "flip":
        return x ^ (1 << bit)
    if kind == "set":
        if value not in (0, 1):
            raise ValueError("set value must be 0 or 1")
        return (x | (1 << bit)) if value else (x & ~(1 << bit))
    raise ValueError(f"unknown fault kind {kind!r}")


@dataclass(frozen=True)
class FaultSpec:
    """One-bit fault: pipeline index, tampering function, and, for
    composite stages, which sub-field the (field-local) bit addresses."""

    index: int
    kind: str = "id"
    bit: int = 0
    value: int = 0
    target: str | None = None

    def __post_init__(self):
        if self.index in EXCLUDED_INDICES:
            raise ExcludedFaultIndexError(
                f"fault index {self.index} is excluded from the game suite"
            )
        if self.index not in SUPPORTED_INDICES:
            raise ValueError(f"unknown fault index {self.index}")
        if self.kind not in ("id", "flip", "set"):
            raise ValueError(f"unknown fault kind {self.kind!r}")
        targets = INDEX_TARGETS[self.index]
        if self.kind != "id":
            if self.target is None and len(targets) == 1:
                object.__setattr__(self, "target", targets[0])
            if self.target not in targets:
                raise ValueError(
                    f"index {self.index} faults one of {targets}, not {self.target!r}"
                )

    def apply(self, x: int, width: int) -> int:
        return fault_apply(self.kind, self.bit, self.value, x, width)

    @classmethod
    def from_serialized_bit(cls, index: int, kind: str, global_bit: int,
                            widths_in_order, value: int = 0) -> "FaultSpec":
        """Address the concatenated serialization of the stage's tuple.

        ``widths_in_order`` lists (target, width) in declared field order
        (first field in the high bits); bit 0 is the LSB of the last field.
        """
        offset = 0
        for target, width in reversed(list(widths_in_order)):
            if global_bit < offset + width:
                return cls(index, kind, global_bit - offset, value, target)
            offset += width
        raise ValueError(f"bit {global_bit} outside the serialized tuple")


def identity_fault(index: int) -> FaultSpec:
    return FaultSpec(index=index, kind="id")


def _fault_st(scheme: IdScheme, spec: FaultSpec, st: int) -> int:
    return spec.apply(st, scheme.widths.st)


@dataclass(frozen=True)
class FaultSignResult:
    sigma: tuple
    m_hat: int
    hash_point: int
    hash_value: int


def _commit_stage(scheme: IdScheme, sk: int, pk: int, m: int, spec: FaultSpec,
                  commit_r: int, msg_bits: int, domain_bits: int):
    """Deterministic front half of the faulty pipeline: commit, stage-4
    and stage-5 faults, and the hash point.  Returns
    (w, st, w_hat, m_hat, pk_hat, point)."""
    w, st = scheme.commit_with_randomness(sk, commit_r)
    if spec.index == 4:
        if spec.target == "w":
            w = spec.apply(w, scheme.widths.w)
        elif spec.target == "st":
            st = _fault_st(scheme, spec, st)
    w_hat, m_hat, pk_hat = w, m, pk
    if spec.index == 5:
        if spec.target == "w":
            w_hat = spec.apply(w, scheme.widths.w)
        elif spec.target == "m":
            m_hat = spec.apply(m, msg_bits)
        elif spec.target == "pk":
            pk_hat = spec.apply(pk, scheme.widths.pk)
    point = challenge_point(scheme, w_hat, m_hat, pk_hat, domain_bits, msg_bits)
    return w, st, w_hat, m_hat, pk_hat, point


def _respond_stage(scheme: IdScheme, sk: int, spec: FaultSpec, w: int, st: int, c: int):
    """Back half: stage-6/7 faults, response, stage-9 fault; returns sigma."""
    c_eff, sk_eff, st_eff = c, sk, st
    if spec.index == 6:
        c_eff = spec.apply(c, scheme.widths.c)
    if spec.index == 7:
        if spec.target == "sk":
            sk_eff = spec.apply(sk, scheme.widths.sk)
        elif spec.target == "c":
            c_eff = spec.apply(c, scheme.widths.c)
        elif spec.target == "st":
            st_eff = _fault_st(scheme, spec, st)
    z = scheme.respond(sk_eff, w, c_eff, st_eff)
    w_out, z_out = w, z
    if spec.index == 9:
        if spec.target == "w":
            w_out = spec.apply(w, scheme.widths.w)
        elif spec.target == "z" and z is not None:
            z_out = spec.apply(z, scheme.widths.z)
    return w_out, z_out


def faultsign(scheme: IdScheme, h: ProgrammableOracle, sk: int, m: int, spec: FaultSpec,
              *, pk: int, msg_bits: int = DEFAULT_MSG_BITS,
              rng: np.random.Generator = None, commit_r: int | None = None) -> FaultSignResult:
    """Genuine faulty signing: the pipeline with the one tampering applied.

    Only reads the challenge oracle; never reprograms it.  The recorded
    message is the (possibly faulted) hashed message.
    """
    if spec.index == 1:
        raise ValueError("index 1 faults the derandomizer; use nonce_faultsign")
    if commit_r is None:
        commit_r = int(rng.integers(scheme.randomness_count))
    w, st, _, m_hat, _, point = _commit_stage(
        scheme, sk, pk, m, spec, commit_r, msg_bits, h.n
    )
    c = h.lookup(point)
    sigma = _respond_stage(scheme, sk, spec, w, st, c)
    return FaultSignResult(sigma, m_hat, point, c)


def nonce_faultsign(scheme: IdScheme, h: ProgrammableOracle, g, sk: int, m: int,
                    nonce: int, spec: FaultSpec, *, pk: int,
                    msg_bits: int = DEFAULT_MSG_BITS, nonce_bits: int = 8) -> FaultSignResult:
    """Hedged faulty signing: commit randomness comes from the
    derandomizing oracle; index 1 tampers the key fed into that oracle
    (the rest of the pipeline then runs honestly with the true key)."""
    sk_for_g = spec.apply(sk, scheme.widths.sk) if spec.index == 1 else sk
    point_g = compress(
        "hedge",
        [(sk_for_g, scheme.widths.sk), (m, msg_bits), (nonce, nonce_bits)],
        g.n,
    )
    r = g.lookup(point_g)
    downstream = identity_fault(9) if spec.index == 1 else spec
    w, st, _, m_hat, _, point = _commit_stage(
        scheme, sk, pk, m, downstream, r, msg_bits, h.n
    )
    c = h.lookup(point)
    sigma = _respond_stage(scheme, sk, downstream, w, st, c)
    return FaultSignResult(sigma, m_hat, point, c)


# ---------------------------------------------------------------------------
# simulation algorithms


@dataclass(frozen=True)
class SimSignatureResult:
    sigma: tuple
    m_hat: int
    reprogram_point: int
    reprogram_value: int


def _require_subset_revealing(scheme: IdScheme, spec: FaultSpec) -> None:
    if spec.index in (4, 7) and spec.target in ("st", "sk") and spec.kind != "id":
        if not scheme.subset_revealing:
            raise UnsupportedFaultError(
                f"index-{spec.index} faults on {spec.target} need a subset-revealing scheme"
            )


def _fault_revealed_state(scheme: IdScheme, spec: FaultSpec, c: int, z: int) -> int:
    """Carry a state fault over to the revealed components of z.

    The response of a subset-revealing scheme is the challenge-selected
    state components, so a one-bit state fault either lands in a revealed
    component (flip the corresponding response bit) or has no effect.
    """
    revealed = scheme.derive_set(c)
    for comp_index, (offset, width) in enumerate(scheme.st_components):
        if offset <= spec.bit < offset + width:
            if comp_index not in revealed:
                return z
            local = spec.bit - offset
            # response packs the revealed components in derive-set order
            pos = len(revealed) - 1 - revealed.index(comp_index)
            shift = pos * width + local  # assumes equal component widths
            return fault_apply(spec.kind, shift, spec.value, z, scheme.widths.z * len(revealed))
    raise ValueError(f"state bit {spec.bit} outside the state encoding")


def sim_signature(index: int, scheme: IdScheme, h: ProgrammableOracle, pk: int, m: int,
                  spec: FaultSpec, *, msg_bits: int = DEFAULT_MSG_BITS,
                  rng: np.random.Generator = None, c: int | None = None,
                  sim_r: int | None = None) -> SimSignatureResult:
    """Simulate a faulty signature without the secret key.

    Draws a uniform challenge, runs the special simulator, applies the
    index-specific fault logic, and reprograms the challenge oracle at
    the point the genuine pipeline would have hashed.
    """
    if index != spec.index:
        raise ValueError("index does not match the fault spec")
    if index not in (4, 5, 6, 7, 9):
        raise ValueError(f"no simulation for index {index}")
    _require_subset_revealing(scheme, spec)
    if c is None:
        c = int(rng.integers(scheme.challenge_count))
    if sim_r is None:
        sim_r = int(rng.integers(scheme.sim_randomness_count))

    def simulate(challenge):
        w, z = scheme.special_sim_with_randomness(pk, challenge, sim_r)
        if not 0 <= challenge < scheme.challenge_count:
            z = None
        return w, z

    m_hat = m
    if index == 9:
        w, z = simulate(c)
        point = challenge_point(scheme, w, m, pk, h.n, msg_bits)
        w_out, z_out = w, z
        if spec.target == "w":
            w_out = spec.apply(w, scheme.widths.w)
        elif spec.target == "z" and z is not None:
            z_out = spec.apply(z, scheme.widths.z)
        sigma = (w_out, z_out)
    elif index == 5:
        w, z = simulate(c)
        w_hat, m_hat, pk_hat = w, m, pk
        if spec.target == "w":
            w_hat = spec.apply(w, scheme.widths.w)
        elif spec.target == "m":
            m_hat = spec.apply(m, msg_bits)
        elif spec.target == "pk":
            pk_hat = spec.apply(pk, scheme.widths.pk)
        point = challenge_point(scheme, w_hat, m_hat, pk_hat, h.n, msg_bits)
        sigma = (w, z)
    elif index == 6:
        w, z = simulate(spec.apply(c, scheme.widths.c))
        point = challenge_point(scheme, w, m, pk, h.n, msg_bits)
        sigma = (w, z)
    elif index == 7:
        if spec.target == "c" and spec.kind != "id":
            w, z = simulate(spec.apply(c, scheme.widths.c))
        else:
            w, z = simulate(c)
            if spec.target == "st" and spec.kind != "id" and z is not None:
                z = _fault_revealed_state(scheme, spec, c, z)
            # an sk-targeting fault has no effect: responses of a
            # subset-revealing scheme do not involve the key
        point = challenge_point(scheme, w, m, pk, h.n, msg_bits)
        sigma = (w, z)
    else:  # index == 4
        w, z = simulate(c)
        if spec.target == "w" and spec.kind != "id":
            w_hat = spec.apply(w, scheme.widths.w)
            point = challenge_point(scheme, w_hat, m, pk, h.n, msg_bits)
            sigma = (w_hat, z)
        else:
            if spec.target == "st" and spec.kind != "id" and z is not None:
                z = _fault_revealed_state(scheme, spec, c, z)
            point = challenge_point(scheme, w, m, pk, h.n, msg_bits)
            sigma = (w, z)

    h.reprogram(point, c)
    return SimSignatureResult(sigma, m_hat, point, c)


# ---------------------------------------------------------------------------
# exact joint distributions (signature, touched point, planted value)


def enumerate_faultsign_joint(scheme: IdScheme, sk: int, pk: int, m: int, spec: FaultSpec,
                              domain_bits: int, msg_bits: int = DEFAULT_MSG_BITS) -> dict:
    """Joint distribution of (sigma, hash point, hash value) under genuine
    faulty signing, over uniform commit randomness and a uniform oracle
    cell, in exact rationals."""
    out: dict = {}
    weight = Fraction(1, scheme.randomness_count * scheme.challenge_count)
    for commit_r in range(scheme.randomness_count):
        w, st, _, m_hat, _, point = _commit_stage(
            scheme, sk, pk, m, spec, commit_r, msg_bits, domain_bits
        )
        for c in range(scheme.challenge_count):
            sigma = _respond_stage(scheme, sk, spec, w, st, c)
            key = (sigma, point, c)
            out[key] = out.get(key, Fraction(0)) + weight
    return out


class _ReprogramRecorder:
    """Oracle stand-in for enumeration: records reprogram calls only."""

    def __init__(self, n: int):
        self.n = n
        self.calls: list[tuple[int, int]] = []

    def reprogram(self, x: int, y: int):
        self.calls.append((x, y))
        return self


def enumerate_sim_joint(scheme: IdScheme, pk: int, m: int, spec: FaultSpec,
                        domain_bits: int, msg_bits: int = DEFAULT_MSG_BITS) -> dict:
    """Joint distribution of (sigma, reprogrammed point, planted value)
    under the simulation, over its uniform challenge and simulator
    randomness, in exact rationals."""
    out: dict = {}
    weight = Fraction(1, scheme.sim_randomness_count * scheme.challenge_count)
    for c in range(scheme.challenge_count):
        for sim_r in range(scheme.sim_randomness_count):
            h = _ReprogramRecorder(domain_bits)
            res = sim_signature(spec.index, scheme, h, pk, m, spec,
                                msg_bits=msg_bits, c=c, sim_r=sim_r)
            key = (res.sigma, res.reprogram_point, res.reprogram_value)
            out[key] = out.get(key, Fraction(0)) + weight
    return out


# ---------------------------------------------------------------------------
# unforgeability games


@dataclass(frozen=True)
class UFCMA:
    name: str = "UF-CMA"


@dataclass(frozen=True)
class UFCMA0:
    name: str = "UF-CMA0"


@dataclass(frozen=True)
class UFRMA:
    n_messages: int = 1
    name: str = "UF-RMA"


@dataclass(frozen=True)
class UFFCMA:
    phi: frozenset = frozenset({5, 6, 9})
    name: str = "UF-F-CMA"


@dataclass(frozen=True)
class UFNFCMA:
    phi: frozenset = frozenset({1, 5, 6, 9})
    enforce_unique_nonce: bool = True
    name: str = "UF-N-F-CMA"


@dataclass
class GameTranscript:
    game: str
    queried_messages: list = field(default_factory=list)
    per_index_queries: dict = field(default_factory=dict)
    sign_queries: int = 0
    overlay: tuple = ()
    outcome: int | None = None
    rma_pairs: tuple = ()


@dataclass
class FSSetup:
    """Challenge-hash signature environment for the fault games."""

    scheme: IdScheme
    domain_bits: int = 20
    msg_bits: int = DEFAULT_MSG_BITS
    nonce_bits: int = 8


class GameCtx:
    """Oracles visible to the adversary during one game run."""

    def __init__(self, game, pk, transcript, *, sig=None, setup=None, sk=None,
                 h=None, g=None, rng=None):
        self.game = game
        self.pk = pk
        self._t = transcript
        self._sig = sig
        self._setup = setup
        self._sk = sk
        self._h = h
        self._g = g
        self._rng = rng
        self._nonces_seen = set()
        self.rma_pairs = ()

    def sign(self, m: int):
        if not isinstance(self.game, UFCMA):
            raise ProtocolViolationError("signing oracle not available in this game")
        self._t.queried_messages.append(m)
        self._t.sign_queries += 1
        return self._sig.sign(self._sk, m, self._rng)

    def faultsign(self, m: int, spec: FaultSpec):
        if not isinstance(self.game, UFFCMA):
            raise ProtocolViolationError("faulty signing oracle not available")
        if spec.index not in self.game.phi:
            return None  # rejection: index not in the allowed set
        self._t.per_index_queries[spec.index] = (
            self._t.per_index_queries.get(spec.index, 0) + 1
        )
        self._t.sign_queries += 1
        res = faultsign(self._setup.scheme, self._h, self._sk, m, spec, pk=self.pk,
                        msg_bits=self._setup.msg_bits, rng=self._rng)
        self._t.queried_messages.append(res.m_hat)
        return res.sigma

    def nonce_faultsign(self, m: int, nonce: int, spec: FaultSpec):
        if not isinstance(self.game, UFNFCMA):
            raise ProtocolViolationError("nonce-controlled oracle not available")
        if spec.index not in self.game.phi:
            return None
        if self.game.enforce_unique_nonce:
            if (m, nonce) in self._nonces_seen:
                raise ProtocolViolationError(f"repeated (message, nonce) pair {(m, nonce)}")
            self._nonces_seen.add((m, nonce))
        self._t.per_index_queries[spec.index] = (
            self._t.per_index_queries.get(spec.index, 0) + 1
        )
        self._t.sign_queries += 1
        res = nonce_faultsign(self._setup.scheme, self._h, self._g, self._sk, m, nonce,
                              spec, pk=self.pk, msg_bits=self._setup.msg_bits,
                              nonce_bits=self._setup.nonce_bits)
        self._t.queried_messages.append(res.m_hat)
        return res.sigma

    @property
    def leaked_sk(self):
        """Test hook: scripted positive-control adversaries get the key."""
        return self._sk

    def hash_value(self, w: int, m: int) -> int:
        """Challenge-oracle lookup as the adversary sees it."""
        point = challenge_point(self._setup.scheme, w, m, self.pk,
                                self._h.n, self._setup.msg_bits)
        return self._h.lookup(point)

    def g_value(self, sk_candidate: int, m: int, nonce: int) -> int:
        point = compress(
            "hedge",
            [(sk_candidate, self._setup.scheme.widths.sk),
             (m, self._setup.msg_bits), (nonce, self._setup.nonce_bits)],
            self._g.n,
        )
        return self._g.lookup(point)


def run_game(game, scheme, adversary, seed: int) -> tuple[int, GameTranscript]:
    """Run one unforgeability game to completion.

    ``scheme`` is a SignatureScheme for the plain games and an FSSetup for
    the fault games.  ``adversary`` is called as adversary(ctx, rng) and
    must return (message, signature) or None.
    """
    ss = np.random.SeedSequence(entropy=seed)
    keys = ss.generate_state(4, dtype=np.uint64)
    key_rng = np.random.Generator(np.random.Philox(key=int(keys[0])))
    game_rng = np.random.Generator(np.random.Philox(key=int(keys[1])))
    adv_rng = np.random.Generator(np.random.Philox(key=int(keys[2])))
    transcript = GameTranscript(game=game.name)

    if isinstance(game, (UFCMA, UFCMA0, UFRMA)):
        sig: SignatureScheme = scheme
        pk, sk = sig.keygen(key_rng)
        ctx = GameCtx(game, pk, transcript, sig=sig, sk=sk, rng=game_rng)
        if isinstance(game, UFRMA):
            pairs = []
            for _ in range(game.n_messages):
                m = int(game_rng.integers(1 << sig.msg_bits))
                pairs.append((m, sig.sign(sk, m, game_rng)))
                transcript.queried_messages.append(m)
            ctx.rma_pairs = tuple(pairs)
            transcript.rma_pairs = tuple(pairs)
        out = adversary(ctx, adv_rng)
        if out is None:
            transcript.outcome = 0
            return 0, transcript
        m_star, sigma_star = out
        fresh = m_star not in transcript.queried_messages
        transcript.outcome = int(fresh and sig.verify(pk, m_star, sigma_star))
        return transcript.outcome, transcript

    if isinstance(game, (UFFCMA, UFNFCMA)):
        setup: FSSetup = scheme
        pk, sk = setup.scheme.keygen(key_rng)
        h = ProgrammableOracle(
            sample_oracle(setup.domain_bits, setup.scheme.widths.c, int(keys[3]),
                          range_size=setup.scheme.challenge_count)
        )
        g = None
        if isinstance(game, UFNFCMA):
            g = sample_oracle(setup.domain_bits, (setup.scheme.randomness_count - 1).bit_length(),
                              int(keys[3]) ^ 0x9E3779B97F4A7C15,
                              range_size=setup.scheme.randomness_count)
        ctx = GameCtx(game, pk, transcript, setup=setup, sk=sk, h=h, g=g, rng=game_rng)
        out = adversary(ctx, adv_rng)
        transcript.overlay = h.snapshot()
        if out is None:
            transcript.outcome = 0
            return 0, transcript
        m_star, sigma_star = out
        fresh = m_star not in transcript.queried_messages
        ok = fs_verify(setup.scheme, h, pk, m_star, sigma_star,
                       variant="pk_in_hash", msg_bits=setup.msg_bits)
        transcript.outcome = int(fresh and ok)
        return transcript.outcome, transcript

    raise TypeError(f"unknown game {game!r}")


# ---------------------------------------------------------------------------
# reduction harnesses


@dataclass
class ReductionOutcome:
    adversary_won: bool
    reduction_won: bool
    aborted: bool
    forgery: tuple | None
    queried_messages: list


def reduction_b_cma0(scheme: IdScheme, adversary, seed: int, *,
                     domain_bits: int = 20, msg_bits: int = DEFAULT_MSG_BITS,
                     variant: str = "standard") -> ReductionOutcome:
    """Key-only forger built from a chosen-message forger.

    Signing queries are answered with simulated transcripts, and the
    challenge oracle the adversary sees is patched a posteriori to agree
    with them (remove-then-insert on the overlay).  A forgery on a fresh
    message never hits a patched point, so it verifies under the
    untouched base oracle as well.
    """
    ss = np.random.SeedSequence(entropy=seed)
    keys = ss.generate_state(3, dtype=np.uint64)
    key_rng = np.random.Generator(np.random.Philox(key=int(keys[0])))
    sim_rng = np.random.Generator(np.random.Philox(key=int(keys[1])))
    adv_rng = np.random.Generator(np.random.Philox(key=int(keys[2])))

    base = sample_oracle(domain_bits, scheme.widths.c, int(keys[0]) ^ 0xA5A5,
                         range_size=scheme.challenge_count)
    h_prime = ProgrammableOracle(base)
    pk, _sk = scheme.keygen(key_rng)
    queried: list[int] = []

    def sign_oracle(m: int):
        queried.append(m)
        t = scheme.sim(pk, sim_rng)
        hashed_pk = pk if variant == "pk_in_hash" else None
        point = challenge_point(scheme, t.w, m, hashed_pk, domain_bits, msg_bits)
        h_prime.reprogram(point, t.c)
        return t.w, t.z

    m_star, sigma_star = adversary(pk, sign_oracle, h_prime, adv_rng)
    if m_star in queried:
        return ReductionOutcome(False, False, True, None, queried)
    a_won = fs_verify(scheme, h_prime, pk, m_star, sigma_star,
                      variant=variant, msg_bits=msg_bits)
    b_won = fs_verify(scheme, base, pk, m_star, sigma_star,
                      variant=variant, msg_bits=msg_bits)
    return ReductionOutcome(bool(a_won), bool(b_won), False, (m_star, sigma_star), queried)


def make_forging_adversary(scheme: IdScheme, sk: int, sign_messages, m_star: int, *,
                           domain_bits: int = 20, msg_bits: int = DEFAULT_MSG_BITS,
                           variant: str = "standard"):
    """Scripted chosen-message winner: asks for a few signatures, then
    forges honestly on a fresh message using the leaked secret key and
    the (possibly patched) challenge oracle it is given."""

    def adversary(pk, sign_oracle, h, rng):
        for m in sign_messages:
            sign_oracle(m)
        w, st = scheme.commit(sk, rng)
        hashed_pk = pk if variant == "pk_in_hash" else None
        c = h.lookup(challenge_point(scheme, w, m_star, hashed_pk, domain_bits, msg_bits))
        z = scheme.respond(sk, w, c, st)
        return m_star, (w, z)

    return adversary


def candidate_keys(sk_prime: int, width: int) -> list[int]:
    """All keys reachable from sk_prime by one one-bit tampering
    (identity, each flip, each set-to-0/1), deduplicated in order."""
    out = [sk_prime]
    for bit in range(width):
        for cand in (
            sk_prime ^ (1 << bit),
            sk_prime & ~(1 << bit),
            sk_prime | (1 << bit),
        ):
            if cand not in out:
                out.append(cand)
    return out


def reduction_b2_keysearch(sig: SignatureScheme, pk: int, candidates, m: int,
                           rng: np.random.Generator):
    """Try signing a fresh message under every candidate key; return the
    first verifying (message, signature) pair, or None."""
    for sk_cand in candidates:
        sigma = sig.sign(sk_cand, m, rng)
        if sig.verify(pk, m, sigma):
            return m, sigma
    return None


# ---------------------------------------------------------------------------
# declarative adversary scripts


@dataclass(frozen=True)
class ScriptStep:
    op: str                     # "sign" | "faultsign" | "nonce_faultsign"
    m: int
    nonce: int = 0
    spec: FaultSpec | None = None


@dataclass(frozen=True)
class AdversaryScript:
    """Sequence of oracle calls plus a final-output template.

    finals: ("forge_with_sk", sk, m_star) builds an honest forgery with an
    explicitly given key; ("forge_with_leaked_sk", m_star) does the same
    with the game's key (positive-control episodes); ("replay",
    step_index, m_star) replays a received signature on a fresh message;
    ("none",) returns no forgery.
    """

    steps: tuple
    final: tuple

    def __call__(self, ctx: GameCtx, rng: np.random.Generator):
        received = []
        for step in self.steps:
            if step.op == "sign":
                received.append(ctx.sign(step.m))
            elif step.op == "faultsign":
                received.append(ctx.faultsign(step.m, step.spec))
            elif step.op == "nonce_faultsign":
                received.append(ctx.nonce_faultsign(step.m, step.nonce, step.spec))
            else:
                raise ValueError(f"unknown script op {step.op!r}")
        kind = self.final[0]
        if kind == "none":
            return None
        if kind == "replay":
            _, idx, m_star = self.final
            return m_star, received[idx]
        if kind == "forge_with_sk":
            _, sk, m_star = self.final
            return m_star, self._forge(ctx, sk, m_star, rng)
        if kind == "forge_with_leaked_sk":
            _, m_star = self.final
            return m_star, self._forge(ctx, ctx.leaked_sk, m_star, rng)
        raise ValueError(f"unknown final template {kind!r}")

    @staticmethod
    def _forge(ctx: GameCtx, sk, m_star, rng):
        if ctx._setup is not None:
            scheme = ctx._setup.scheme
            w, st = scheme.commit(sk, rng)
            c = ctx.hash_value(w, m_star)
            z = scheme.respond(sk, w, c, st)
            return w, z
        return ctx._sig.sign(sk, m_star, rng)
