"""Writes tests/fixtures/nist_fixtures.json from nist_oracle.py.

Run from the repository root: python3 tests/oracles/make_nist_fixtures.py
"""
import json
import os
import sys

import mpmath
import numpy as np

sys.path.insert(0, os.path.dirname(__file__))
import nist_oracle  # noqa: E402


def e_expansion(nbits):
    # First nbits fractional binary digits of e.
    mpmath.mp.prec = nbits + 64
    frac = mpmath.e - 2
    scaled = int(mpmath.floor(frac * mpmath.mpf(2) ** (nbits + 1)))
    s = bin(scaled)[2:].zfill(nbits + 1)
    return np.array([int(c) for c in s[:nbits]], dtype=np.uint8)


def to_hex(bits):
    pad = (-len(bits)) % 8
    b = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    return np.packbits(b).tobytes().hex()


def main():
    seqs = []
    # The reference suite's data.e is e in binary, "10.1011011111...", without the point.
    seqs.append(("e_expansion", np.concatenate([[1, 0], e_expansion(1_000_000 - 2)]).astype(np.uint8)[:1_000_000]))
    rng = np.random.default_rng(20240501)
    for i in range(6):
        seqs.append((f"uniform_{i}", rng.integers(0, 2, 100_000, dtype=np.uint8)))
    seqs.append(("biased_0499", (rng.random(100_000) < 0.499).astype(np.uint8)))
    sticky = np.empty(100_000, dtype=np.uint8)
    sticky[0] = 0
    flips = rng.random(100_000) < 0.49
    for k in range(1, len(sticky)):
        sticky[k] = sticky[k - 1] ^ flips[k]
    seqs.append(("sticky_049", sticky))
    seqs.append(("uniform_short", rng.integers(0, 2, 20_000, dtype=np.uint8)))

    out = []
    for name, bits in seqs:
        out.append({"name": name, "bit_len": int(len(bits)), "hex": to_hex(bits),
                    "p_values": nist_oracle.all_tests(bits)})
    path = os.path.join("tests", "fixtures", "nist_fixtures.json")
    with open(path, "w") as f:
        json.dump({"generator": "tests/oracles/make_nist_fixtures.py", "sequences": out}, f, indent=1)
    for s in out:
        print(s["name"], {k: round(v, 6) for k, v in s["p_values"].items()})


if __name__ == "__main__":
    main()
