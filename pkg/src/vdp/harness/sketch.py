"""Toy sketch-based client validation, kept only as an attack target.

Servers hold additive shares of a client's one-hot vector and validate it
by publishing shares of two check values that must sum to zero:

    z  = sum_j x_j - 1
    z* = <r, x>^2 - <r*r, x>      (zero iff x has at most one non-zero 0/1 entry)

for a public random ``r``.  Nothing binds a server's later aggregation to
the shares it validated and each server's check shares are unverifiable, so a
corrupted server can (a) silently drop an honest client or (b) cancel the
honest server's check shares for a colluding client with an illegal input.
Neither is visible to the honest server.  This module exists to show that
contrast; it leaks ``<r, x>`` and is not a secure protocol.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

ATTACKS = ("none", "ignore_input", "collude_illegal_input")


@dataclass
class SketchOutcome:
    accepted: list  # client indices the servers accepted
    aggregate: list  # released per-bin sums
    honest_aggregate: list  # what a correct run over legal inputs would release
    honest_server_alarm: bool = False  # the honest server saw something inconsistent
    notes: list = field(default_factory=list)

    @property
    def attack_succeeded(self) -> bool:
        return not self.honest_server_alarm and self.aggregate != self.honest_aggregate


def _share(vec, q, rng):
    a = [rng.randrange(q) for _ in vec]
    return [a, [(x - y) % q for x, y in zip(vec, a)]]


def _check_shares(share, r, A, q, first: bool):
    z = (sum(share) - (1 if first else 0)) % q
    B = sum(rj * rj * xj for rj, xj in zip(r, share)) % q
    # A is public, so A * [A] - [B] is a local share of A^2 - B
    a_k = sum(rj * xj for rj, xj in zip(r, share)) % q
    return z, (A * a_k - B) % q


def sketch_session(inputs, M: int, q: int = 2 ** 61 - 1, attack: str = "none", target: int = 0,
                   rng=None) -> SketchOutcome:
    """Two servers; server 1 is the corrupted one when an attack is chosen.

    ``inputs`` are one-hot lists (or the illegal vector for the colluding
    client ``target``).
    """
    if attack not in ATTACKS:
        raise ValueError(f"unknown attack {attack!r}")
    rng = rng or random.Random(0)
    shares = [_share(x, q, rng) for x in inputs]
    accepted, notes = [], []
    for i, (s0, s1) in enumerate(shares):
        r = [rng.randrange(q) for _ in range(M)]
        A = sum(rj * (a + b) for rj, a, b in zip(r, s0, s1)) % q
        z0, zs0 = _check_shares(s0, r, A, q, True)
        z1, zs1 = _check_shares(s1, r, A, q, False)
        if attack == "collude_illegal_input" and i == target:
            # the client handed server 1 everything it needs to cancel server 0's shares
            z1, zs1 = (-z0) % q, (-zs0) % q
            notes.append(f"server 1 cancelled the check shares of client {i}")
        if (z0 + z1) % q == 0 and (zs0 + zs1) % q == 0:
            accepted.append(i)
    agg = [0] * M
    for i in accepted:
        s0, s1 = shares[i]
        if attack == "ignore_input" and i == target:
            # server 1 leaves the client out of its sum; server 0 cannot tell
            s1 = [(-a) % q for a in s0]
            notes.append(f"server 1 dropped client {i} from its aggregate")
        for j in range(M):
            agg[j] = (agg[j] + s0[j] + s1[j]) % q
    legal = [x for x in inputs if sum(x) == 1 and all(v in (0, 1) for v in x)]
    honest = [sum(x[j] for x in legal) % q for j in range(M)]
    return SketchOutcome(accepted, agg, honest, False, notes)
