"""Bit-exact encoding of structured hash inputs into an oracle domain.

Hash inputs such as (commitment, message, public key) are packed as a
length-prefixed concatenation and compressed to the oracle's n-bit domain
with a keyed BLAKE2b PRF.  The exact format:

* each field is an unsigned integer with a declared bit width; it is
  rendered big-endian in ceil(width/8) bytes, preceded by one byte
  holding that byte count;
* the packed fields are hashed with BLAKE2b (digest 8 bytes) keyed by
  the UTF-8 domain-separation tag;
* the digest is read big-endian and truncated to the low n bits.

The compressor is not injective; games pin seeds so runs are replayable.
"""

from __future__ import annotations

import hashlib


def pack_fields(fields) -> bytes:
    """fields: iterable of (value, bit_width) pairs."""
    out = bytearray()
    for value, width in fields:
        if width <= 0:
            raise ValueError("field width must be positive")
        if not 0 <= value < (1 << width):
            raise ValueError(f"value {value} does not fit in {width} bits")
        nbytes = (width + 7) // 8
        out.append(nbytes)
        out += int(value).to_bytes(nbytes, "big")
    return bytes(out)


def compress(tag: str, fields, n_bits: int) -> int:
    """Map the packed fields into {0,1}^n_bits under domain tag ``tag``."""
    if not 1 <= n_bits <= 64:
        raise ValueError("n_bits must be in [1, 64]")
    digest = hashlib.blake2b(
        pack_fields(fields), digest_size=8, key=tag.encode()
    ).digest()
    return int.from_bytes(digest, "big") & ((1 << n_bits) - 1)
