"""Non-interactive proof that a Pedersen commitment opens to 0 or 1.

This is the usual OR-composition of two Schnorr proofs.  Branch 0 claims
``c = h^r`` and branch 1 claims ``c / g = h^r``; the prover simulates the
branch that is false, answers the true one honestly, and the Fiat-Shamir
challenge ``e`` binds the two through ``e0 + e1 = e``.  The verifier checks

    d0 * c^e0      == h^v0
    d1 * c^e1      == g^e1 * h^v1
"""
from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass

from .group import Commitment, EncodingError, GroupElement, PublicParams, Scalar, commit, length_prefixed

DOMAIN_TAG = b"VDP-OR-v1"

_system_rng = secrets.SystemRandom()


class ProofError(ValueError):
    """The prover was asked to prove a false statement."""


@dataclass(frozen=True)
class ProofContext:
    """Domain separation: who proves what, where."""

    session_id: bytes
    party_id: bytes
    index: int

    def encode(self) -> bytes:
        return length_prefixed(self.session_id, self.party_id, self.index.to_bytes(8, "big"))


@dataclass(frozen=True)
class OrProof:
    d0: GroupElement
    d1: GroupElement
    e0: Scalar
    e1: Scalar
    v0: Scalar
    v1: Scalar

    def encode(self, pp: PublicParams) -> bytes:
        grp = pp.group
        return (grp.encode(self.d0) + grp.encode(self.d1) + grp.encode_scalar(self.e0)
                + grp.encode_scalar(self.e1) + grp.encode_scalar(self.v0) + grp.encode_scalar(self.v1))

    @classmethod
    def decode(cls, pp: PublicParams, data: bytes) -> "OrProof":
        grp = pp.group
        eb, sb = grp.element_bytes, grp.scalar_bytes
        if len(data) != 2 * eb + 4 * sb:
            raise EncodingError("OR proof has wrong length")
        d0 = grp.decode(data[:eb])
        d1 = grp.decode(data[eb:2 * eb])
        s = [grp.decode_scalar(data[2 * eb + i * sb:2 * eb + (i + 1) * sb]) for i in range(4)]
        return cls(d0, d1, *s)


def derive_challenge(pp: PublicParams, context: ProofContext, c: Commitment,
                     d0: GroupElement, d1: GroupElement) -> Scalar:
    grp = pp.group
    data = length_prefixed(DOMAIN_TAG, pp.encoded, context.encode(),
                           grp.encode(c), grp.encode(d0), grp.encode(d1))
    return grp.hash_to_scalar(data)


class OrProver:
    """Interactive three-move prover; :func:`prove_bit` drives it with a hash."""

    def __init__(self, pp: PublicParams, x: int, r: Scalar, c: Commitment, rng=None, check: bool = True):
        if x not in (0, 1):
            raise ProofError(f"committed value must be a bit, got {x}")
        if check and commit(pp, x, r) != c:
            raise ProofError("commitment does not open to the claimed (x, r)")
        self.pp, self.x, self.r, self.c = pp, x, r % pp.q, c
        self.rng = rng or _system_rng

    def first_message(self):
        pp, grp = self.pp, self.pp.group
        q = pp.q
        self._b = self.rng.randrange(q)
        self._e_sim = self.rng.randrange(q)
        self._v_sim = self.rng.randrange(q)
        real = grp.exp(pp.h, self._b)
        if self.x == 0:
            # simulate branch 1: d1 = h^v1 * (c/g)^-e1
            sim = grp.mul(grp.exp(pp.h, self._v_sim), grp.exp(grp.div(self.c, pp.g), -self._e_sim))
            return real, sim
        # simulate branch 0: d0 = h^v0 * c^-e0
        sim = grp.mul(grp.exp(pp.h, self._v_sim), grp.exp(self.c, -self._e_sim))
        return sim, real

    def respond(self, e: Scalar):
        """Returns (e0, e1, v0, v1)."""
        q = self.pp.q
        e_real = (e - self._e_sim) % q
        v_real = (self._b + e_real * self.r) % q
        if self.x == 0:
            return e_real, self._e_sim, v_real, self._v_sim
        return self._e_sim, e_real, self._v_sim, v_real


def prove_bit(pp: PublicParams, x: int, r: Scalar, c: Commitment, context: ProofContext,
              rng=None, check: bool = True) -> OrProof:
    prover = OrProver(pp, x, r, c, rng, check)
    d0, d1 = prover.first_message()
    e = derive_challenge(pp, context, c, d0, d1)
    return OrProof(d0, d1, *prover.respond(e))


def check_transcript(pp: PublicParams, c: Commitment, d0, d1, e: Scalar,
                     e0: Scalar, e1: Scalar, v0: Scalar, v1: Scalar) -> bool:
    """Verifier's decision for one interactive run with challenge ``e``."""
    grp = pp.group
    q = pp.q
    if (e0 + e1 - e) % q:
        return False
    if grp.mul(d0, grp.exp(c, e0)) != grp.exp(pp.h, v0):
        return False
    return grp.mul(d1, grp.exp(c, e1)) == grp.mul(grp.exp(pp.g, e1), grp.exp(pp.h, v1))


def verify_bit(pp: PublicParams, c: Commitment, proof: OrProof, context: ProofContext) -> bool:
    try:
        e = derive_challenge(pp, context, c, proof.d0, proof.d1)
        return check_transcript(pp, c, proof.d0, proof.d1, e, proof.e0, proof.e1, proof.v0, proof.v1)
    except (TypeError, ValueError):
        return False


def extract_opening(pp: PublicParams, c: Commitment, first, second):
    """Special-soundness extractor.

    ``first`` and ``second`` are accepting ``(e0, e1, v0, v1)`` answers to the
    same ``(d0, d1)`` under different challenges.  Returns ``(x, r)`` with
    ``commit(pp, x, r) == c`` and ``x`` a bit.
    """
    q = pp.q
    e0, e1, v0, v1 = first
    f0, f1, w0, w1 = second
    if (e0 - f0) % q:
        return 0, (v0 - w0) * pow(e0 - f0, -1, q) % q
    if (e1 - f1) % q:
        return 1, (v1 - w1) * pow(e1 - f1, -1, q) % q
    raise ValueError("transcripts share both split challenges; nothing to extract")


def verify_bits_batch(pp: PublicParams, statements, rng=None) -> bool:
    """Check many ``(c, proof, context)`` at once with random linear combinations.

    Accepts exactly when every proof would pass :func:`verify_bit`, except with
    probability about 1/q over the weights.  Only the ``g`` and ``h`` powers are
    shared, so the saving is roughly two exponentiations per proof.
    """
    rng = rng or _system_rng
    grp = pp.group
    q = pp.q
    lhs = grp.identity
    g_exp = h_exp = 0
    for c, proof, context in statements:
        if (proof.e0 + proof.e1 - derive_challenge(pp, context, c, proof.d0, proof.d1)) % q:
            return False
        a = rng.randrange(1, q)
        b = rng.randrange(1, q)
        term = grp.mul(grp.exp(proof.d0, a), grp.exp(proof.d1, b))
        lhs = grp.mul(lhs, grp.mul(term, grp.exp(c, a * proof.e0 + b * proof.e1)))
        g_exp += b * proof.e1
        h_exp += a * proof.v0 + b * proof.v1
    return lhs == grp.mul(grp.exp(pp.g, g_exp), grp.exp(pp.h, h_exp))
