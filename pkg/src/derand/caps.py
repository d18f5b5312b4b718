"""Enumeration caps shared by every exhaustive routine.

Defaults can be overridden with the ``DERAND_CAPS`` environment variable,
e.g. ``DERAND_CAPS="field_q=65536,verify=1e7"``.
"""

import os

DEFAULTS = {
    "field_q": 2**20,      # largest field an enumerating constructor accepts
    "codewords": 2**28,    # q^k * n for minimum-distance enumeration
    "verify": 10**8,       # combinations scanned by verify_matrix
    "audit": 2**26,        # cells of an exact joint distribution
    "wiretap": 2**22,      # q^m * randomness for exhaustive wiretap audits
    "matrix_cells": 2**28, # entries of a constructed measurement matrix
    "decode": 2**24,       # noise-support * codewords for brute-force decoding
}


def _parse(spec: str) -> dict:
    out = {}
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        key, _, val = item.partition("=")
        if key.strip() not in DEFAULTS:
            raise ValueError(f"unknown cap {key!r}")
        out[key.strip()] = int(float(val))
    return out


_overrides: dict = {}


def get(name: str) -> int:
    if name in _overrides:
        return _overrides[name]
    env = os.environ.get("DERAND_CAPS")
    if env:
        vals = _parse(env)
        if name in vals:
            return vals[name]
    return DEFAULTS[name]


def set_caps(**kw) -> None:
    for k, v in kw.items():
        if k not in DEFAULTS:
            raise ValueError(f"unknown cap {k!r}")
        _overrides[k] = int(v)


def snapshot() -> dict:
    return {k: get(k) for k in DEFAULTS}
