"""In-process session runner with pluggable adversaries.

All parties live in one process and talk over an ordered in-memory bus: every
message is appended to the transcript and handed to the public checker in
the same order.  With a seed, each party gets its own ``random.Random``
stream derived from the seed and its name, so a seed fixes the transcript.
"""
from __future__ import annotations

import hashlib
import os
import random
import secrets
from dataclasses import dataclass, field, replace

from ..dp_params import PrivacyParams, check_field_size
from ..group import PublicParams, commit, default_group_id, setup_group
from ..morra import AbortWithBlame, MorraParticipant
from ..protocol import (BIT_COMMIT, CLIENT, MORRA_COMMIT, MORRA_REVEAL, OUTPUT, VERIFIER, SessionVerifier,
                        bit_context, client_name, coin_slice, prover_adjust_and_output, prover_init, prover_name)
from ..shares import (ClientBroadcast, ClientSubmission, ValidityProof, build_client_submission, client_context,
                      derive_input_commitment, share_and_commit)
from ..sigma_or import OrProof, OrProver, derive_challenge
from ..transcript import SessionTranscript

PROVER_BEHAVIORS = ("honest", "tamper_output", "nonbit_commitment", "morra_misreveal", "morra_adaptive",
                    "morra_silent", "exclude_client", "drop_out")
VERIFIER_BEHAVIORS = ("honest", "morra_misreveal", "morra_adaptive", "morra_silent")
CLIENT_BEHAVIORS = ("honest", "collude_illegal_input")
BEHAVIORS = tuple(dict.fromkeys(PROVER_BEHAVIORS + VERIFIER_BEHAVIORS + CLIENT_BEHAVIORS))

_MORRA_BEHAVIOR = {"morra_misreveal": "misreveal", "morra_adaptive": "adaptive", "morra_silent": "silent"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AdversarySpec:
    role: str  # "prover", "client" or "verifier"
    behavior: str
    index: int | None = None
    target: int | None = None  # client index for exclude_client

    def __post_init__(self):
        allowed = {"prover": PROVER_BEHAVIORS, "verifier": VERIFIER_BEHAVIORS, "client": CLIENT_BEHAVIORS}
        if self.role not in allowed:
            raise ConfigError(f"unknown role {self.role!r}")
        if self.behavior not in allowed[self.role]:
            raise ConfigError(f"{self.role} cannot play {self.behavior!r}")
        if self.role != "verifier" and self.index is None:
            raise ConfigError(f"{self.role} adversary needs an index")
        if self.behavior == "exclude_client" and self.target is None:
            raise ConfigError("exclude_client needs a target client")

    @property
    def party(self) -> str:
        if self.role == "verifier":
            return VERIFIER
        return prover_name(self.index) if self.role == "prover" else client_name(self.index)

    @classmethod
    def parse(cls, text: str) -> "AdversarySpec":
        """``prover1:tamper_output``, ``prover2:exclude_client=3``, ``client0:collude_illegal_input``,
        ``verifier:morra_misreveal``."""
        try:
            who, what = text.split(":", 1)
        except ValueError:
            raise ConfigError(f"adversary must look like ROLE[INDEX]:BEHAVIOR, got {text!r}") from None
        role = who.rstrip("0123456789")
        index = int(who[len(role):]) if who[len(role):] else None
        behavior, _, arg = what.partition("=")
        try:
            target = int(arg) if arg else None
        except ValueError:
            raise ConfigError(f"bad adversary argument {arg!r}") from None
        return cls(role, behavior, index, target)


@dataclass
class SessionConfig:
    K: int = 2
    n: int = 100
    M: int = 1
    epsilon: float = 1.0
    delta: float = 2.0 ** -10
    n_b: int | None = None  # overrides epsilon when set
    group_id: str = field(default_factory=default_group_id)
    seed: int | None = None
    inputs: list | None = None  # explicit client inputs; random when None
    p_one: float = 0.5  # chance of a 1 for random bit inputs

    def privacy_params(self) -> PrivacyParams:
        if self.n_b is not None:
            return PrivacyParams.from_coins(self.n_b, self.delta)
        return PrivacyParams.from_epsilon(self.epsilon, self.delta)

    def validate(self) -> PrivacyParams:
        if self.K < 1 or self.M < 1 or self.n < 0:
            raise ConfigError("need K >= 1, M >= 1, n >= 0")
        if self.inputs is not None and len(self.inputs) != self.n:
            raise ConfigError(f"{len(self.inputs)} inputs given for n = {self.n}")
        params = self.privacy_params()
        pp = setup_group(self.group_id)
        check_field_size(self.n, self.K, params.n_b, pp.q)
        return params

    def client_inputs(self) -> list:
        if self.inputs is not None:
            return list(self.inputs)
        rng = party_rng(self.seed, "inputs")
        if self.M == 1:
            return [1 if rng.random() < self.p_one else 0 for _ in range(self.n)]
        out = []
        for _ in range(self.n):
            vec = [0] * self.M
            vec[rng.randrange(self.M)] = 1
            out.append(vec)
        return out


def party_rng(seed, name: str):
    if seed is None:
        return secrets.SystemRandom()
    return random.Random(f"vdp/{seed}/{name}")


def session_id_for(seed) -> bytes:
    if seed is None:
        return os.urandom(16)
    return hashlib.sha256(f"vdp-session/{seed}".encode()).digest()[:16]


def forge_bit_proof(pp: PublicParams, r, c, context, rng, branch: int) -> OrProof:
    """Best effort at proving a non-bit: run the honest prover as if x were ``branch``."""
    prover = OrProver(pp, branch, r, c, rng, check=False)
    d0, d1 = prover.first_message()
    return OrProof(d0, d1, *prover.respond(derive_challenge(pp, context, c, d0, d1)))


def illegal_submission(pp: PublicParams, M: int, K: int, rng, client_id: str, session_id: bytes) -> ClientSubmission:
    """Client colluding with a prover to sneak in a non-one-hot input.

    The prover learns the client's openings, but validity is checked by the
    public verifier on public commitments, so the prover has nothing to
    contribute; the client's best forgeries are what is tested.
    """
    vec = (2,) if M == 1 else (1, 1) + (0,) * (M - 2)
    private, rows = share_and_commit(pp, vec, K, rng)
    q = pp.q
    proofs, total = [], 0
    for j, xj in enumerate(vec):
        rj = sum(private[k][j][1] for k in range(K)) % q
        total += rj
        cj = derive_input_commitment(pp, rows[j])
        ctx = client_context(session_id, client_id, j)
        proofs.append(forge_bit_proof(pp, rj, cj, ctx, rng, branch=1 if xj else 0))
    norm = total % q if M > 1 else None
    return ClientSubmission(client_id, private, ClientBroadcast(client_id, M, K, rows, ValidityProof(tuple(proofs), norm)))


class ProverParty:
    def __init__(self, pp, params, k, M, K, session_id, rng, payloads: dict, behavior="honest", target=None):
        self.pp, self.params, self.k, self.M = pp, params, k, M
        self.session_id, self.rng, self.behavior = session_id, rng, behavior
        if behavior == "exclude_client":
            payloads = {c: v for c, v in payloads.items() if c != client_name(target)}
        self.payloads = payloads
        self.states = []
        self.morra = MorraParticipant(pp, prover_name(k), K * M * params.n_b, rng,
                                      _MORRA_BEHAVIOR.get(behavior, "honest"))

    def bit_messages(self):
        msgs = []
        for m in range(self.M):
            shares = [p[m] for p in self.payloads.values()]
            state, msg = prover_init(self.pp, self.params, shares, self.rng, index=self.k, bin=m,
                                     session_id=self.session_id)
            if self.behavior == "nonbit_commitment" and m == 0:
                msg = self._cheat_nonbit(state, msg)
            self.states.append(state)
            msgs.append(msg)
        return msgs

    def _cheat_nonbit(self, state, msg):
        s0 = state.s[0]
        c0 = commit(self.pp, 2, s0)
        ctx = bit_context(self.session_id, self.k, state.bin, self.params.n_b, 0)
        proof = forge_bit_proof(self.pp, s0, c0, ctx, self.rng, branch=1)
        state.v[0] = 2
        return replace(msg, commitments=(c0,) + msg.commitments[1:], proofs=(proof,) + msg.proofs[1:])

    def outputs(self, coins):
        if self.behavior == "drop_out":
            return None
        outs = []
        for state in self.states:
            out = prover_adjust_and_output(state, coin_slice(coins, self.k, state.bin, self.M, self.params.n_b))
            if self.behavior == "tamper_output":
                out = replace(out, y=(out.y + 1) % self.pp.q)
            outs.append(out)
        return outs


class _Silent(Exception):
    pass


def run_session(config: SessionConfig, adversaries=()) -> SessionTranscript:
    """Run one session end to end; the verdict is stored on the transcript."""
    params = config.validate()
    pp = setup_group(config.group_id)
    K, M, n, seed = config.K, config.M, config.n, config.seed
    adv = {}
    for a in adversaries:
        a = AdversarySpec.parse(a) if isinstance(a, str) else a
        adv[a.party] = a
    sid = session_id_for(seed)
    transcript = SessionTranscript(pp, params, K, M, n, sid)
    checker = SessionVerifier(pp, params, K, M, n, sid)

    def post(phase, sender, body):
        transcript.append(phase, sender, body)
        checker.receive(phase, sender, body)

    try:
        subs = {}
        for i, x in enumerate(config.client_inputs()):
            name = client_name(i)
            rng = party_rng(seed, name)
            a = adv.get(name)
            if a is not None and a.behavior == "collude_illegal_input":
                sub = illegal_submission(pp, M, K, rng, str(i), sid)
            else:
                sub = build_client_submission(pp, x, K, rng, str(i), sid)
            subs[name] = sub
            post(CLIENT, name, sub.broadcast)

        # provers only take inputs from the public list of validated clients
        accepted = checker.accepted_clients()
        count = K * M * params.n_b
        provers = []
        for k in range(1, K + 1):
            name = prover_name(k)
            a = adv.get(name)
            behavior = a.behavior if a else "honest"
            rng = party_rng(seed, name)
            payloads = {c: subs[c].private[k - 1] for c in accepted}
            provers.append(ProverParty(pp, params, k, M, K, sid, rng, payloads, behavior, a.target if a else None))
        for p in provers:
            for msg in p.bit_messages():
                post(BIT_COMMIT, prover_name(p.k), msg)

        va = adv.get(VERIFIER)
        vfr = MorraParticipant(pp, VERIFIER, count, party_rng(seed, VERIFIER),
                               _MORRA_BEHAVIOR.get(va.behavior, "honest") if va else "honest")
        participants = [p.morra for p in provers] + [vfr]
        commits, reveals = [], []
        for part in participants:
            msg = part.commit(list(commits))
            commits.append(msg)
            post(MORRA_COMMIT, part.party, msg)
        for part in reversed(participants):
            msg = part.reveal(list(reveals))
            if msg is None:
                raise _Silent
            reveals.append(msg)
            post(MORRA_REVEAL, part.party, msg)

        coins = checker.coins
        for p in provers:
            outs = p.outputs(coins)
            if outs is None:
                raise _Silent
            for out in outs:
                post(OUTPUT, prover_name(p.k), out)
    except (AbortWithBlame, _Silent):
        pass
    transcript.verdict = checker.finish()
    return transcript


def expected_blame(spec: AdversarySpec):
    """Party a detected adversary should be blamed as, or None if undetectable by design."""
    if spec.behavior in ("honest", "morra_adaptive"):
        return None
    return spec.party
