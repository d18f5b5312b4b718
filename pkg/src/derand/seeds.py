"""Deterministic seed splitting.

A child seed is ``splitmix64(master ^ h(label))`` where ``h`` is the first
8 bytes (little endian) of the BLAKE2b digest of the UTF-8 label.  Both
ingredients are fixed, so the same (master, label) pair always gives the
same 64-bit child on every platform.
"""

import hashlib

import numpy as np

MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK
    return x ^ (x >> 31)


def label_hash(label: str) -> int:
    digest = hashlib.blake2b(label.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def child_seed(master: int, label: str) -> int:
    return splitmix64((master & MASK) ^ label_hash(label))


def child_rng(master: int, label: str) -> np.random.Generator:
    return np.random.default_rng(child_seed(master, label))


def as_rng(rng) -> np.random.Generator:
    if rng is None:
        raise ValueError("an explicit rng or seed is required")
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(int(rng))
