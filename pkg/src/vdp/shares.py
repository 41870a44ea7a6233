"""Client inputs: additive sharing, public commitments, and validity proofs.

A client with input ``x`` (a bit, or a one-hot vector of length M) splits
every coordinate into K additive shares mod q, commits to each share, and
proves in zero knowledge that the product of its K commitments per coordinate
opens to a bit.  For M > 1 it also opens the product over all coordinates
to 1, which pins the L1 norm.
"""
from __future__ import annotations

import secrets
from dataclasses import dataclass

from .group import EncodingError, PublicParams, commit, length_prefixed, product
from .sigma_or import OrProof, ProofContext, prove_bit, verify_bit

_system_rng = secrets.SystemRandom()


class InvalidInput(ValueError):
    pass


@dataclass(frozen=True)
class ValidityProof:
    coordinate_proofs: tuple
    norm_randomness: int | None = None


@dataclass(frozen=True)
class ClientBroadcast:
    """Everything a client publishes.  ``commitments[j][k]``: coordinate j, prover k."""

    client_id: str
    M: int
    K: int
    commitments: tuple
    proof: ValidityProof

    def encode(self, pp: PublicParams) -> bytes:
        grp = pp.group
        out = [length_prefixed(self.client_id.encode()), self.M.to_bytes(4, "big"), self.K.to_bytes(4, "big")]
        out += [grp.encode(c) for row in self.commitments for c in row]
        out += [p.encode(pp) for p in self.proof.coordinate_proofs]
        if self.proof.norm_randomness is None:
            out.append(b"\x00")
        else:
            out.append(b"\x01" + grp.encode_scalar(self.proof.norm_randomness))
        return b"".join(out)

    @classmethod
    def decode(cls, pp: PublicParams, data: bytes) -> "ClientBroadcast":
        grp = pp.group
        try:
            n = int.from_bytes(data[:4], "big")
            client_id = data[4:4 + n].decode()
            pos = 4 + n
            M = int.from_bytes(data[pos:pos + 4], "big")
            K = int.from_bytes(data[pos + 4:pos + 8], "big")
        except UnicodeDecodeError:
            raise EncodingError("bad client id") from None
        pos += 8
        eb, pb = grp.element_bytes, 2 * grp.element_bytes + 4 * grp.scalar_bytes
        if M < 1 or K < 1 or len(data) < pos + M * K * eb + M * pb + 1:
            raise EncodingError("client bundle truncated")
        rows = []
        for _ in range(M):
            rows.append(tuple(grp.decode(data[pos + k * eb:pos + (k + 1) * eb]) for k in range(K)))
            pos += K * eb
        proofs = []
        for _ in range(M):
            proofs.append(OrProof.decode(pp, data[pos:pos + pb]))
            pos += pb
        flag, rest = data[pos:pos + 1], data[pos + 1:]
        if flag == b"\x00" and not rest:
            norm = None
        elif flag == b"\x01" and len(rest) == grp.scalar_bytes:
            norm = grp.decode_scalar(rest)
        else:
            raise EncodingError("bad norm field in client bundle")
        return cls(client_id, M, K, tuple(rows), ValidityProof(tuple(proofs), norm))


@dataclass(frozen=True)
class ClientSubmission:
    client_id: str
    private: tuple  # private[k][j] = (share, randomness) sent to prover k for coordinate j
    broadcast: ClientBroadcast


@dataclass(frozen=True)
class ClientVerdict:
    accepted: bool
    reason: str | None = None

    def __str__(self):
        return "accepted" if self.accepted else f"rejected: {self.reason}"

    @classmethod
    def parse(cls, text: str) -> "ClientVerdict":
        if text == "accepted":
            return cls(True)
        if text.startswith("rejected: "):
            return cls(False, text[len("rejected: "):])
        raise ValueError(f"unknown client verdict {text!r}")


def split_secret(x: int, K: int, q: int, rng=None) -> list:
    if K < 1:
        raise ValueError("need at least one share")
    rng = rng or _system_rng
    shares = [rng.randrange(q) for _ in range(K - 1)]
    shares.append((x - sum(shares)) % q)
    return shares


def as_vector(x) -> tuple:
    if isinstance(x, int):
        return (x,)
    return tuple(int(v) for v in x)


def is_valid_input(vec) -> bool:
    if any(v not in (0, 1) for v in vec):
        return False
    return len(vec) == 1 or sum(vec) == 1


def client_context(session_id: bytes, client_id: str, coordinate: int) -> ProofContext:
    return ProofContext(session_id, b"client:" + client_id.encode(), coordinate)


def share_and_commit(pp: PublicParams, vec, K: int, rng):
    """Shares, randomness and commitments without any validity check."""
    q = pp.q
    private = [[None] * len(vec) for _ in range(K)]
    rows = []
    for j, x in enumerate(vec):
        shares = split_secret(x, K, q, rng)
        rands = [rng.randrange(q) for _ in range(K)]
        rows.append(tuple(commit(pp, s, r) for s, r in zip(shares, rands)))
        for k in range(K):
            private[k][j] = (shares[k], rands[k])
    return tuple(tuple(p) for p in private), tuple(rows)


def build_client_submission(pp: PublicParams, x, K: int, rng=None, client_id: str = "0",
                            session_id: bytes = b"") -> ClientSubmission:
    rng = rng or _system_rng
    vec = as_vector(x)
    if not is_valid_input(vec):
        raise InvalidInput(f"client input must be a bit or a one-hot vector, got {vec}")
    private, rows = share_and_commit(pp, vec, K, rng)
    q = pp.q
    proofs = []
    total_r = 0
    for j, xj in enumerate(vec):
        rj = sum(private[k][j][1] for k in range(K)) % q
        total_r += rj
        cj = derive_input_commitment(pp, rows[j])
        proofs.append(prove_bit(pp, xj, rj, cj, client_context(session_id, client_id, j), rng, check=False))
    norm = total_r % q if len(vec) > 1 else None
    broadcast = ClientBroadcast(client_id, len(vec), K, rows, ValidityProof(tuple(proofs), norm))
    return ClientSubmission(client_id, private, broadcast)


def derive_input_commitment(pp: PublicParams, per_prover) -> object:
    return product(pp, per_prover)


def verify_client_submission(pp: PublicParams, broadcast: ClientBroadcast, session_id: bytes = b"",
                             M: int | None = None, K: int | None = None) -> ClientVerdict:
    """Deterministic from public data; any observer recomputes the same verdict."""
    if M is not None and broadcast.M != M:
        return ClientVerdict(False, "wrong dimension")
    if K is not None and broadcast.K != K:
        return ClientVerdict(False, "wrong number of shares")
    if len(broadcast.commitments) != broadcast.M or any(len(r) != broadcast.K for r in broadcast.commitments):
        return ClientVerdict(False, "malformed commitments")
    proof = broadcast.proof
    if len(proof.coordinate_proofs) != broadcast.M:
        return ClientVerdict(False, "malformed proof")
    derived = [derive_input_commitment(pp, row) for row in broadcast.commitments]
    for j, (cj, pj) in enumerate(zip(derived, proof.coordinate_proofs)):
        if not verify_bit(pp, cj, pj, client_context(session_id, broadcast.client_id, j)):
            return ClientVerdict(False, f"bad OR proof at coordinate {j}")
    if broadcast.M > 1:
        if proof.norm_randomness is None or commit(pp, 1, proof.norm_randomness) != product(pp, derived):
            return ClientVerdict(False, "norm check failed")
    elif proof.norm_randomness is not None:
        return ClientVerdict(False, "unexpected norm opening")
    return ClientVerdict(True)
