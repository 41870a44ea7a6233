"""Regenerate the constants of the ``schnorr2048`` group.

The group is a prime-order-q subgroup of Z_p* with |q| = 256 and |p| = 2048.
Both primes are derived from SHAKE-256 of a fixed seed so anyone can re-run
this script and check that the constants in ``vdp.group`` were not chosen
with a trapdoor in mind.

    python scripts/gen_schnorr_group.py
"""
import hashlib

import gmpy2

SEED = b"vdp/schnorr2048/v1"


def stream(label: bytes, nbytes: int) -> int:
    return int.from_bytes(hashlib.shake_256(SEED + b"/" + label).digest(nbytes), "big")


def main():
    q = gmpy2.next_prime(stream(b"q", 32) | (1 << 255))
    assert q.bit_length() == 256
    x = stream(b"p", 256) | (1 << 2047)
    k = x // q
    k += k % 2
    while True:
        p = k * q + 1
        if p.bit_length() == 2048 and gmpy2.is_prime(p, 64):
            break
        k += 2
    cofactor = (p - 1) // q
    t = 2
    while gmpy2.powmod(t, cofactor, p) == 1:
        t += 1
    g = gmpy2.powmod(t, cofactor, p)
    print(f"P = 0x{int(p):x}")
    print(f"Q = 0x{int(q):x}")
    print(f"G = 0x{int(g):x}")


if __name__ == "__main__":
    main()
