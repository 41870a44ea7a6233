"""Verifiable binomial noise: prover steps, verifier checks, and the session checker.

Each prover k, per histogram bin:

1. commits to ``n_b`` private bits ``v_j`` (``c'_j = Com(v_j, s_j)``) and proves
   each is a bit;
2. receives public Morra coins ``b_j``;
3. flips its bits where ``b_j = 1`` (``1 - v_j`` is linear in ``v_j``, so the
   verifier can follow along on commitments);
4. sends ``y = sum of shares + sum of flipped bits`` and the matching
   randomness ``z``.

The verifier recomputes ``Com(1, 0) / c'_j`` wherever ``b_j = 1`` and checks
``prod(client commitments) * prod(updated c') == Com(y, z)``.

When ``b_j = 1`` the updated commitment carries randomness ``-s_j``, so the
prover must use ``-s_j`` for those positions in ``z``.
"""
from __future__ import annotations

import secrets
from dataclasses import dataclass, field

from .dp_params import PrivacyParams, debiased_estimate
from .group import PublicParams, commit, one_minus, product
from .morra import AbortWithBlame, MorraCommit, MorraCoordinator, MorraReveal
from .sigma_or import ProofContext, prove_bit, verify_bit
from .shares import ClientBroadcast, ClientVerdict, verify_client_submission

_system_rng = secrets.SystemRandom()

# transcript phase tags, in protocol order
CLIENT = "CLIENT"
BIT_COMMIT = "BIT_COMMIT"
MORRA_COMMIT = "MORRA_COMMIT"
MORRA_REVEAL = "MORRA_REVEAL"
OUTPUT = "OUTPUT"
PHASES = (CLIENT, BIT_COMMIT, MORRA_COMMIT, MORRA_REVEAL, OUTPUT)

# name of the public check each message feeds; verdicts report these
CHECK_NAMES = {CLIENT: "client_validation", BIT_COMMIT: "bit_proofs", MORRA_COMMIT: "morra",
               MORRA_REVEAL: "morra", OUTPUT: "output_check"}

VERIFIER = "verifier"


class PhaseError(RuntimeError):
    """A party was driven out of protocol order."""


def prover_name(k: int) -> str:
    return f"prover:{k}"


def client_name(i) -> str:
    return f"client:{i}"


@dataclass(frozen=True)
class BitCommitMessage:
    prover: int
    bin: int
    commitments: tuple
    proofs: tuple


@dataclass(frozen=True)
class ProverOutput:
    prover: int
    bin: int
    y: int
    z: int


@dataclass(frozen=True)
class Undecodable:
    """Stand-in for a message body whose bytes failed to decode."""

    error: str


@dataclass
class ProverState:
    pp: PublicParams
    params: PrivacyParams
    index: int
    bin: int
    session_id: bytes
    shares: list
    v: list
    s: list
    public_bits: tuple | None = None
    phase: str = "committed"
    excluded: frozenset = frozenset()


def bit_context(session_id: bytes, prover: int, bin_: int, n_b: int, j: int) -> ProofContext:
    return ProofContext(session_id, prover_name(prover).encode(), bin_ * n_b + j)


def prover_init(pp: PublicParams, params: PrivacyParams, accepted_shares, rng=None, *, index: int = 1,
                bin: int = 0, session_id: bytes = b""):
    """Sample and commit ``n_b`` private bits.

    ``accepted_shares`` is this prover's ``(share, randomness)`` for every
    validated client, for this bin.
    """
    rng = rng or _system_rng
    q = pp.q
    n_b = params.n_b
    v = [rng.randrange(2) for _ in range(n_b)]
    s = [rng.randrange(q) for _ in range(n_b)]
    cs = tuple(commit(pp, vj, sj) for vj, sj in zip(v, s))
    proofs = tuple(
        prove_bit(pp, vj, sj, cj, bit_context(session_id, index, bin, n_b, j), rng, check=False)
        for j, (vj, sj, cj) in enumerate(zip(v, s, cs))
    )
    state = ProverState(pp, params, index, bin, session_id, list(accepted_shares), v, s)
    return state, BitCommitMessage(index, bin, cs, proofs)


def adjust_bits(v, bits):
    """v XOR b, written as the linear map the verifier mirrors on commitments."""
    return [1 - vj if bj else vj for vj, bj in zip(v, bits)]


def prover_adjust_and_output(state: ProverState, public_bits) -> ProverOutput:
    if state.phase != "committed":
        raise PhaseError(f"prover {state.index} cannot output in phase {state.phase!r}")
    if len(public_bits) != state.params.n_b:
        raise PhaseError(f"expected {state.params.n_b} public coins, got {len(public_bits)}")
    q = state.pp.q
    state.public_bits = tuple(public_bits)
    v_hat = adjust_bits(state.v, public_bits)
    y = sum(sh for sh, _ in state.shares) + sum(v_hat)
    z = sum(r for _, r in state.shares) + sum(-sj if bj else sj for sj, bj in zip(state.s, public_bits))
    state.phase = "done"
    return ProverOutput(state.index, state.bin, y % q, z % q)


def verify_bit_commitments(pp: PublicParams, msg: BitCommitMessage, n_b: int, session_id: bytes = b""):
    """Index of the first commitment whose OR proof fails, or ``None``."""
    if len(msg.commitments) != n_b or len(msg.proofs) != n_b:
        return -1
    for j, (c, proof) in enumerate(zip(msg.commitments, msg.proofs)):
        if not verify_bit(pp, c, proof, bit_context(session_id, msg.prover, msg.bin, n_b, j)):
            return j
    return None


def update_commitment(pp: PublicParams, c, b: int):
    return one_minus(pp, c) if b else c


def verifier_update_commitments(pp: PublicParams, commitments, bits) -> list:
    return [update_commitment(pp, c, b) for c, b in zip(commitments, bits)]


def verifier_check_prover(pp: PublicParams, client_commitments, updated, y: int, z: int) -> bool:
    lhs = pp.group.mul(product(pp, client_commitments), product(pp, updated))
    return lhs == commit(pp, y, z)


def aggregate(outputs, params: PrivacyParams, K: int, q: int):
    """Noisy sum of one bin and its centred estimate; refuses partial output sets."""
    got = sorted(o.prover for o in outputs)
    if got != list(range(1, K + 1)):
        raise AbortWithBlame(
            next((prover_name(k) for k in range(1, K + 1) if k not in got), "?"),
            "aggregate", "missing prover output",
        )
    y = sum(o.y for o in outputs) % q
    return y, debiased_estimate(y, K, params.n_b, q)


@dataclass
class SessionVerdict:
    accepted: bool
    released: bool
    phase: str | None = None
    blame: tuple = ()
    reason: str | None = None
    clients: dict = field(default_factory=dict)
    aggregate: tuple | None = None  # per bin: (y, estimate)

    def same_as(self, other: "SessionVerdict") -> bool:
        return (self.accepted, self.released, self.phase, tuple(self.blame), self.reason,
                {k: str(v) for k, v in self.clients.items()}, self.aggregate) == (
            other.accepted, other.released, other.phase, tuple(other.blame), other.reason,
            {k: str(v) for k, v in other.clients.items()}, other.aggregate)


def morra_parties(K: int):
    return [prover_name(k) for k in range(1, K + 1)] + [VERIFIER]


def coin_slice(bits, prover: int, bin_: int, M: int, n_b: int):
    start = ((prover - 1) * M + bin_) * n_b
    return bits[start:start + n_b]


class SessionVerifier:
    """Public checker for a whole session.

    Consumes ``(phase, sender, body)`` in broadcast order and keeps every
    verdict.  The live verifier and an offline auditor replaying a transcript
    run this same class, which is what makes the two agree.
    """

    def __init__(self, pp: PublicParams, params: PrivacyParams, K: int, M: int, n: int, session_id: bytes):
        self.pp, self.params, self.K, self.M, self.n = pp, params, K, M, n
        self.session_id = session_id
        self.clients = {}
        self.client_commitments = {}  # accepted client -> rows
        self.bit_commitments = {}
        self.outputs = {}
        self.output_failures = []
        self.morra = MorraCoordinator(pp, morra_parties(K), K * M * params.n_b)
        self.coins = None
        self.stage = CLIENT
        self.abort = None

    # -- ordering -------------------------------------------------------
    def _expected(self):
        if self.stage == CLIENT:
            return CLIENT, client_name(len(self.clients))
        if self.stage == BIT_COMMIT:
            i = len(self.bit_commitments)
            return BIT_COMMIT, prover_name(i // self.M + 1)
        if self.stage in (MORRA_COMMIT, MORRA_REVEAL):
            return self.stage, self.morra.expected_sender()
        if self.stage == OUTPUT:
            return OUTPUT, prover_name(len(self.outputs) // self.M + 1)
        return None, None

    def _advance(self):
        if self.stage == CLIENT and len(self.clients) == self.n:
            self.stage = BIT_COMMIT
        if self.stage == BIT_COMMIT and len(self.bit_commitments) == self.K * self.M:
            self.stage = MORRA_COMMIT
        if self.stage == MORRA_COMMIT and self.morra.phase == "REVEAL":
            self.stage = MORRA_REVEAL
        if self.stage == MORRA_REVEAL and self.morra.phase == "DONE":
            self.coins = self.morra.coins().bits
            self.stage = OUTPUT
        if self.stage == OUTPUT and len(self.outputs) == self.K * self.M:
            self.stage = "DONE"

    def accepted_clients(self):
        return [c for c, v in self.clients.items() if v.accepted]

    # -- message handling ----------------------------------------------
    def receive(self, phase: str, sender: str, body):
        """Raises :class:`AbortWithBlame` when the session must stop."""
        if self.abort is not None:
            raise self.abort
        try:
            self._receive(phase, sender, body)
        except AbortWithBlame as exc:
            self.abort = exc
            raise
        self._advance()

    def _receive(self, phase, sender, body):
        self._advance()
        exp_phase, exp_sender = self._expected()
        if phase != exp_phase or sender != exp_sender:
            raise AbortWithBlame(sender, CHECK_NAMES.get(phase, "ordering"), f"unexpected message (waiting for {exp_phase} from {exp_sender})")
        if phase == CLIENT:
            self._client(sender, body)
        elif phase == BIT_COMMIT:
            self._bits(sender, body)
        elif phase in (MORRA_COMMIT, MORRA_REVEAL):
            if isinstance(body, Undecodable):
                raise AbortWithBlame(sender, "morra", "malformed encoding")
            want = MorraCommit if phase == MORRA_COMMIT else MorraReveal
            if not isinstance(body, want) or body.party != sender:
                raise AbortWithBlame(sender, "morra", "malformed Morra message")
            self.morra.receive(body)
        elif phase == OUTPUT:
            self._output(sender, body)

    def _client(self, sender, body):
        if isinstance(body, Undecodable):
            verdict = ClientVerdict(False, "malformed bundle")
        elif not isinstance(body, ClientBroadcast) or client_name(body.client_id) != sender:
            verdict = ClientVerdict(False, "sender mismatch")
        else:
            verdict = verify_client_submission(self.pp, body, self.session_id, self.M, self.K)
        self.clients[sender] = verdict
        if verdict.accepted:
            self.client_commitments[sender] = body.commitments

    def _bits(self, sender, body):
        i = len(self.bit_commitments)
        k, m = i // self.M + 1, i % self.M
        if isinstance(body, Undecodable):
            raise AbortWithBlame(sender, "bit_proofs", "malformed encoding")
        if not isinstance(body, BitCommitMessage) or (body.prover, body.bin) != (k, m):
            raise AbortWithBlame(sender, "bit_proofs", "bit commitments for the wrong prover or bin")
        bad = verify_bit_commitments(self.pp, body, self.params.n_b, self.session_id)
        if bad is not None:
            raise AbortWithBlame(sender, "bit_proofs", f"OR proof failed at bit {bad} of bin {m}")
        self.bit_commitments[(k, m)] = body.commitments

    def _output(self, sender, body):
        i = len(self.outputs)
        k, m = i // self.M + 1, i % self.M
        if isinstance(body, Undecodable) or not isinstance(body, ProverOutput) or (body.prover, body.bin) != (k, m):
            self.outputs[(k, m)] = None
            self.output_failures.append((sender, "malformed output"))
            return
        self.outputs[(k, m)] = body
        bits = coin_slice(self.coins, k, m, self.M, self.params.n_b)
        updated = verifier_update_commitments(self.pp, self.bit_commitments[(k, m)], bits)
        clients = [rows[m][k - 1] for rows in self.client_commitments.values()]
        if not verifier_check_prover(self.pp, clients, updated, body.y, body.z):
            self.output_failures.append((sender, f"output check failed for bin {m}"))

    # -- end of stream --------------------------------------------------
    def finish(self) -> SessionVerdict:
        clients = dict(self.clients)
        client_blame = tuple(c for c, v in clients.items() if not v.accepted)
        if self.abort is None:
            self._advance()
            if self.stage != "DONE":
                phase, sender = self._expected()
                self.abort = AbortWithBlame(sender, CHECK_NAMES[phase], "no response")
        if self.abort is not None:
            a = self.abort
            return SessionVerdict(False, False, a.phase, client_blame + (a.party,), a.reason, clients)
        if self.output_failures:
            blame = []
            for party, _ in self.output_failures:
                if party not in blame:
                    blame.append(party)
            return SessionVerdict(False, False, "output_check", client_blame + tuple(blame),
                                  self.output_failures[0][1], clients)
        agg = []
        for m in range(self.M):
            outs = [self.outputs[(k, m)] for k in range(1, self.K + 1)]
            agg.append(aggregate(outs, self.params, self.K, self.pp.q))
        if client_blame:
            return SessionVerdict(False, True, "client_validation", client_blame,
                                  str(clients[client_blame[0]]), clients, tuple(agg))
        return SessionVerdict(True, True, None, (), None, clients, tuple(agg))
