"""Identification schemes, zero-knowledge simulators, and signature transforms.

Scheme values (keys, commitments, states, responses, challenges) are
plain integers in declared bit widths, so that one-bit tampering and
hash-input encoding are well defined everywhere.  Challenges live in
``range(challenge_count)``; a challenge outside that range is invalid
and a validity-aware scheme responds with None (rejection).

Transforms provided: challenge-hash signatures from an identification
scheme (optionally binding the public key into the hash), randomized
hash-then-sign message compression, and nonce-based derandomization of
the signing randomness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from .encoding import compress
from .oracle import OracleTable, sample_oracle

DEFAULT_MSG_BITS = 16


class RespondRejectedError(RuntimeError):
    """The response algorithm rejected (no retry loop is provided)."""


class Transcript(NamedTuple):
    w: int
    c: int
    z: int | None


@dataclass(frozen=True)
class FieldWidths:
    w: int
    z: int
    c: int
    sk: int
    pk: int
    st: int


@dataclass
class IdScheme:
    """A pluggable identification scheme over integer-encoded values.

    ``st_components`` gives (lsb_offset, width) of each state component
    inside the st encoding, in declared order; schemes whose responses
    just reveal challenge-selected components also provide ``derive_set``.
    """

    name: str
    challenge_count: int
    randomness_count: int
    sim_randomness_count: int
    alpha: Fraction
    subset_revealing: bool
    validity_aware: bool
    delta_hvzk: Fraction
    delta_shvzk: Fraction
    widths: FieldWidths
    st_components: tuple[tuple[int, int], ...]
    keygen_fn: Callable
    public_key_fn: Callable
    enumerate_keys_fn: Callable
    commit_fn: Callable          # (sk, r) -> (w, st)
    respond_fn: Callable         # (sk, w, c, st) -> z | None
    verify_fn: Callable          # (pk, w, c, z) -> bool
    special_sim_fn: Callable     # (pk, c, r) -> (w, z | None)
    derive_set_fn: Callable | None = None

    def keygen(self, rng: np.random.Generator):
        return self.keygen_fn(rng)

    def public_key(self, sk: int) -> int:
        return self.public_key_fn(sk)

    def enumerate_keys(self):
        return self.enumerate_keys_fn()

    def commit_with_randomness(self, sk: int, r: int):
        return self.commit_fn(sk, r % self.randomness_count)

    def commit(self, sk: int, rng: np.random.Generator):
        return self.commit_fn(sk, int(rng.integers(self.randomness_count)))

    def respond(self, sk: int, w: int, c: int, st: int):
        return self.respond_fn(sk, w, c, st)

    def verify(self, pk: int, w: int, c: int, z) -> bool:
        return bool(self.verify_fn(pk, w, c, z))

    def special_sim_with_randomness(self, pk: int, c: int, r: int):
        return self.special_sim_fn(pk, c, r % self.sim_randomness_count)

    def special_sim(self, pk: int, c: int, rng: np.random.Generator) -> Transcript:
        w, z = self.special_sim_fn(pk, c, int(rng.integers(self.sim_randomness_count)))
        return Transcript(w, c, z)

    def sim(self, pk: int, rng: np.random.Generator) -> Transcript:
        c = int(rng.integers(self.challenge_count))
        return self.special_sim(pk, c, rng)

    def derive_set(self, c: int) -> tuple[int, ...]:
        if not self.subset_revealing or self.derive_set_fn is None:
            raise ValueError(f"{self.name} is not subset-revealing")
        return self.derive_set_fn(c)


def get_trans(scheme: IdScheme, sk: int, rng: np.random.Generator) -> Transcript:
    """Honest transcript: commit, uniform challenge, respond."""
    w, st = scheme.commit(sk, rng)
    c = int(rng.integers(scheme.challenge_count))
    return Transcript(w, c, scheme.respond(sk, w, c, st))


def get_trans_challenge(scheme: IdScheme, sk: int, c: int, rng: np.random.Generator) -> Transcript:
    """Honest transcript for a fixed challenge."""
    if not 0 <= c < scheme.challenge_count:
        raise ValueError("challenge outside the challenge space")
    w, st = scheme.commit(sk, rng)
    return Transcript(w, c, scheme.respond(sk, w, c, st))


def _find_group(order: int) -> tuple[int, int]:
    """Smallest prime p = k*order + 1 and a generator of the order-``order``
    subgroup of Z_p^*."""

    def is_prime(v: int) -> bool:
        if v < 2:
            return False
        f = 2
        while f * f <= v:
            if v % f == 0:
                return False
            f += 1
        return True

    if order < 2 or not is_prime(order):
        raise ValueError("group order must be a prime >= 2")
    p = order + 1
    while not is_prime(p):
        p += order
    for h in range(2, p):
        g = pow(h, (p - 1) // order, p)
        if g != 1:
            return p, g
    raise ArithmeticError("no generator found")  # pragma: no cover


def schnorr_toy(order: int = 17, modulus: int | None = None, generator: int | None = None) -> IdScheme:
    """Discrete-log identification in a prime-order subgroup of Z_p^*.

    Perfect (special) honest-verifier zero knowledge, validity aware,
    not subset-revealing.  Commitments are uniform over the subgroup, so
    the declared commitment max-probability is 1/order.
    """
    if modulus is None or generator is None:
        p, g = _find_group(order)
    else:
        p, g = modulus, generator
        if pow(g, order, p) != 1 or g == 1:
            raise ValueError("generator does not have the requested order")
    elem_bits = (p - 1).bit_length()
    scalar_bits = (order - 1).bit_length()
    widths = FieldWidths(w=elem_bits, z=scalar_bits, c=scalar_bits,
                         sk=scalar_bits, pk=elem_bits, st=scalar_bits)

    def keygen(rng):
        sk = int(rng.integers(order))
        return pow(g, sk, p), sk

    def commit(sk, r):
        return pow(g, r, p), r

    def respond(sk, w, c, st):
        if not 0 <= c < order:
            return None
        return (st + c * sk) % order

    def verify(pk, w, c, z):
        if z is None or not 0 < w < p or not 0 <= c < order:
            return False
        return pow(g, z, p) == (w * pow(pk, c, p)) % p

    def special_sim(pk, c, r):
        if 0 <= c < order:
            z = r
            w = (pow(g, z, p) * pow(pk, (-c) % order, p)) % p
            return w, z
        # invalid challenge: reject, with the honest commitment marginal
        return pow(g, r, p), None

    return IdScheme(
        name=f"schnorr-toy-{order}",
        challenge_count=order,
        randomness_count=order,
        sim_randomness_count=order,
        alpha=Fraction(1, order),
        subset_revealing=False,
        validity_aware=True,
        delta_hvzk=Fraction(0),
        delta_shvzk=Fraction(0),
        widths=widths,
        st_components=((0, scalar_bits),),
        keygen_fn=keygen,
        public_key_fn=lambda sk: pow(g, sk, p),
        enumerate_keys_fn=lambda: [(pow(g, s, p), s) for s in range(order)],
        commit_fn=commit,
        respond_fn=respond,
        verify_fn=verify,
        special_sim_fn=special_sim,
    )


def split_exponent_toy(order: int = 17) -> IdScheme:
    """Subset-revealing toy scheme: a two-share additive split of the key.

    Commit draws r and publishes (g^r, g^(r+sk)); the state is the share
    pair (r, r+sk); a binary challenge selects which share to reveal.
    Verification checks the revealed exponent and the fixed ratio pk
    between the two commitment halves.  Perfect special HVZK.
    """
    p, g = _find_group(order)
    elem_bits = (p - 1).bit_length()
    share_bits = (order - 1).bit_length()
    widths = FieldWidths(w=2 * elem_bits, z=share_bits, c=2,
                         sk=share_bits, pk=elem_bits, st=2 * share_bits)

    def pack_w(w1, w2):
        return (w1 << elem_bits) | w2

    def unpack_w(w):
        return w >> elem_bits, w & ((1 << elem_bits) - 1)

    def keygen(rng):
        sk = int(rng.integers(order))
        return pow(g, sk, p), sk

    def commit(sk, r):
        s1, s2 = r, (r + sk) % order
        return pack_w(pow(g, s1, p), pow(g, s2, p)), (s1 << share_bits) | s2

    def respond(sk, w, c, st):
        if c not in (0, 1):
            return None
        shares = (st >> share_bits, st & ((1 << share_bits) - 1))
        return shares[c]

    def verify(pk, w, c, z):
        if z is None or c not in (0, 1):
            return False
        w1, w2 = unpack_w(w)
        if not (0 < w1 < p and 0 < w2 < p):
            return False
        if w2 != (w1 * pk) % p:
            return False
        return pow(g, z, p) == (w1, w2)[c]

    def special_sim(pk, c, r):
        pk_inv = pow(pk, (order - 1) % order, p)
        if c == 0:
            w1 = pow(g, r, p)
            return pack_w(w1, (w1 * pk) % p), r
        if c == 1:
            w2 = pow(g, r, p)
            return pack_w((w2 * pk_inv) % p, w2), r
        w1 = pow(g, r, p)
        return pack_w(w1, (w1 * pk) % p), None

    return IdScheme(
        name=f"split-exponent-toy-{order}",
        challenge_count=2,
        randomness_count=order,
        sim_randomness_count=order,
        alpha=Fraction(1, order),
        subset_revealing=True,
        validity_aware=True,
        delta_hvzk=Fraction(0),
        delta_shvzk=Fraction(0),
        widths=widths,
        st_components=((share_bits, share_bits), (0, share_bits)),
        keygen_fn=keygen,
        public_key_fn=lambda sk: pow(g, sk, p),
        enumerate_keys_fn=lambda: [(pow(g, s, p), s) for s in range(order)],
        commit_fn=commit,
        respond_fn=respond,
        verify_fn=verify,
        special_sim_fn=special_sim,
        derive_set_fn=lambda c: (c,),
    )


# ---------------------------------------------------------------------------
# challenge-hash signatures


def challenge_point(scheme: IdScheme, w: int, m: int, pk: int | None, domain_bits: int,
                    msg_bits: int = DEFAULT_MSG_BITS) -> int:
    """Oracle-domain point for the challenge hash of (w, m[, pk])."""
    fields = [(w, scheme.widths.w), (m, msg_bits)]
    if pk is not None:
        fields.append((pk, scheme.widths.pk))
    return compress("fs-challenge", fields, domain_bits)


def make_challenge_oracle(scheme: IdScheme, domain_bits: int, seed: int) -> OracleTable:
    """Random oracle mapping the hash domain into the challenge space."""
    return sample_oracle(domain_bits, scheme.widths.c, seed, range_size=scheme.challenge_count)


def fs_sign(scheme: IdScheme, h, sk: int, m: int, *, pk: int | None = None,
            variant: str = "standard", rng: np.random.Generator = None,
            msg_bits: int = DEFAULT_MSG_BITS, commit_r: int | None = None):
    """Sign by hashing the commitment (and message, optionally the public
    key) into a challenge.  A rejected response is surfaced, not retried."""
    if variant not in ("standard", "pk_in_hash"):
        raise ValueError(f"unknown variant {variant!r}")
    if pk is None:
        pk = scheme.public_key(sk)
    if commit_r is None:
        w, st = scheme.commit(sk, rng)
    else:
        w, st = scheme.commit_with_randomness(sk, commit_r)
    hashed_pk = pk if variant == "pk_in_hash" else None
    c = h.lookup(challenge_point(scheme, w, m, hashed_pk, h.n, msg_bits))
    z = scheme.respond(sk, w, c, st)
    if z is None:
        raise RespondRejectedError("response algorithm rejected the challenge")
    return w, z


def fs_verify(scheme: IdScheme, h, pk: int, m: int, sigma, *, variant: str = "standard",
              msg_bits: int = DEFAULT_MSG_BITS) -> bool:
    w, z = sigma
    hashed_pk = pk if variant == "pk_in_hash" else None
    c = h.lookup(challenge_point(scheme, w, m, hashed_pk, h.n, msg_bits))
    return scheme.verify(pk, w, c, z)


@dataclass
class SignatureScheme:
    """keygen/sign/verify bundle with explicit-randomness signing."""

    name: str
    msg_bits: int
    sk_bits: int
    randomness_count: int
    keygen_fn: Callable
    sign_fn: Callable            # (sk, m, r) -> sigma
    verify_fn: Callable          # (pk, m, sigma) -> bool

    def keygen(self, rng: np.random.Generator):
        return self.keygen_fn(rng)

    def sign(self, sk: int, m: int, rng: np.random.Generator):
        return self.sign_fn(sk, m, int(rng.integers(self.randomness_count)))

    def sign_with_randomness(self, sk: int, m: int, r: int):
        return self.sign_fn(sk, m, r % self.randomness_count)

    def verify(self, pk: int, m: int, sigma) -> bool:
        return bool(self.verify_fn(pk, m, sigma))


def fs_signature_scheme(scheme: IdScheme, h, *, variant: str = "standard",
                        msg_bits: int = DEFAULT_MSG_BITS) -> SignatureScheme:
    """Signature scheme obtained from an identification scheme and a
    challenge oracle (which the returned scheme closes over)."""

    def sign(sk, m, r):
        return fs_sign(scheme, h, sk, m, variant=variant, msg_bits=msg_bits, commit_r=r)

    def verify(pk, m, sigma):
        return fs_verify(scheme, h, pk, m, sigma, variant=variant, msg_bits=msg_bits)

    return SignatureScheme(
        name=f"fs[{scheme.name},{variant}]",
        msg_bits=msg_bits,
        sk_bits=scheme.widths.sk,
        randomness_count=scheme.randomness_count,
        keygen_fn=scheme.keygen,
        sign_fn=sign,
        verify_fn=verify,
    )


# ---------------------------------------------------------------------------
# randomized hash-then-sign


def hts_point(z: int, m: int, z_bits: int, msg_bits: int, domain_bits: int) -> int:
    return compress("hash-and-sign", [(z, z_bits), (m, msg_bits)], domain_bits)


def hts_sign(sig: SignatureScheme, h, sk: int, m: int, *, z_bits: int,
             msg_bits: int, rng: np.random.Generator):
    """Compress (random salt, message) through the oracle, sign the digest."""
    z = int(rng.integers(1 << z_bits))
    m_inner = h.lookup(hts_point(z, m, z_bits, msg_bits, h.n))
    return z, sig.sign(sk, m_inner, rng)

def hts_verify(sig: SignatureScheme, h, pk: int, m: int, sigma, *, z_bits: int,
               msg_bits: int) -> bool:
    z, inner = sigma
    m_inner = h.lookup(hts_point(z, m, z_bits, msg_bits, h.n))
    return sig.verify(pk, m_inner, inner)


# ---------------------------------------------------------------------------
# nonce-hedged signing


def hedge_point(sk: int, m: int, nonce: int, sk_bits: int, msg_bits: int,
                nonce_bits: int, domain_bits: int) -> int:
    return compress("hedge", [(sk, sk_bits), (m, msg_bits), (nonce, nonce_bits)], domain_bits)


def r2h_sign(sig: SignatureScheme, g, sk: int, m: int, nonce: int, *,
             nonce_bits: int):
    """Derive the signing randomness from (sk, m, nonce); deterministic."""
    r = g.lookup(hedge_point(sk, m, nonce, sig.sk_bits, sig.msg_bits, nonce_bits, g.n))
    return sig.sign_with_randomness(sk, m, r)


# ---------------------------------------------------------------------------
# exact transcript distributions (toy sizes)


def honest_transcript_dist(scheme: IdScheme, sk: int) -> dict[Transcript, Fraction]:
    """Exact distribution of honest transcripts, by enumeration."""
    out: dict[Transcript, Fraction] = {}
    weight = Fraction(1, scheme.randomness_count * scheme.challenge_count)
    for r in range(scheme.randomness_count):
        w, st = scheme.commit_with_randomness(sk, r)
        for c in range(scheme.challenge_count):
            t = Transcript(w, c, scheme.respond(sk, w, c, st))
            out[t] = out.get(t, Fraction(0)) + weight
    return out


def sim_transcript_dist(scheme: IdScheme, pk: int) -> dict[Transcript, Fraction]:
    """Exact distribution of simulated transcripts (uniform challenge)."""
    out: dict[Transcript, Fraction] = {}
    weight = Fraction(1, scheme.sim_randomness_count * scheme.challenge_count)
    for c in range(scheme.challenge_count):
        for r in range(scheme.sim_randomness_count):
            w, z = scheme.special_sim_with_randomness(pk, c, r)
            t = Transcript(w, c, z)
            out[t] = out.get(t, Fraction(0)) + weight
    return out


def honest_challenge_dist(scheme: IdScheme, sk: int, c: int) -> dict[Transcript, Fraction]:
    out: dict[Transcript, Fraction] = {}
    weight = Fraction(1, scheme.randomness_count)
    for r in range(scheme.randomness_count):
        w, st = scheme.commit_with_randomness(sk, r)
        t = Transcript(w, c, scheme.respond(sk, w, c, st))
        out[t] = out.get(t, Fraction(0)) + weight
    return out


def sim_challenge_dist(scheme: IdScheme, pk: int, c: int) -> dict[Transcript, Fraction]:
    out: dict[Transcript, Fraction] = {}
    weight = Fraction(1, scheme.sim_randomness_count)
    for r in range(scheme.sim_randomness_count):
        w, z = scheme.special_sim_with_randomness(pk, c, r)
        t = Transcript(w, c, z)
        out[t] = out.get(t, Fraction(0)) + weight
    return out


def tuple_dist(single: dict, t: int) -> dict:
    """Distribution of t independent draws, as a dict over tuples."""
    out = {(): Fraction(1)}
    for _ in range(t):
        nxt = {}
        for prefix, p in out.items():
            for item, q in single.items():
                nxt[prefix + (item,)] = nxt.get(prefix + (item,), Fraction(0)) + p * q
        out = nxt
    return out


def tv_distance(d1: dict, d2: dict) -> Fraction:
    keys = set(d1) | set(d2)
    return sum((abs(d1.get(k, Fraction(0)) - d2.get(k, Fraction(0))) for k in keys),
               Fraction(0)) / 2


def max_commit_probability(scheme: IdScheme, sk: int) -> Fraction:
    """Empirical max commitment probability over exhaustive randomness."""
    counts: dict[int, int] = {}
    for r in range(scheme.randomness_count):
        w, _ = scheme.commit_with_randomness(sk, r)
        counts[w] = counts.get(w, 0) + 1
    return Fraction(max(counts.values()), scheme.randomness_count)


# ---------------------------------------------------------------------------
# hex serialization of keys and signatures


def _hex_field(value: int, bits: int) -> str:
    return format(value, f"0{(bits + 3) // 4}x")


def signature_to_hex(sigma, w_bits: int, z_bits: int) -> str:
    """Fixed-width hex fields, commitment then response; '-' marks a
    rejected response."""
    w, z = sigma
    z_part = "-" * ((z_bits + 3) // 4) if z is None else _hex_field(z, z_bits)
    return _hex_field(w, w_bits) + z_part


def signature_from_hex(text: str, w_bits: int, z_bits: int):
    w_digits = (w_bits + 3) // 4
    w = int(text[:w_digits], 16)
    z_text = text[w_digits:]
    z = None if set(z_text) == {"-"} else int(z_text, 16)
    return w, z


def key_to_hex(key: int, bits: int) -> str:
    return _hex_field(key, bits)
