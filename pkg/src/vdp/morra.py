"""Commit-reveal coin flipping ("Morra") among several parties.

Every party commits to ``count`` uniform scalars, then the openings are
broadcast in the reverse of the order in which the commitments arrived.  Coin
``j`` is the threshold bit of the sum of everybody's ``j``-th scalar.  All
rounds of a batch run in parallel: one commit and one reveal message per
party.
"""
from __future__ import annotations

import hashlib
import secrets
from dataclasses import dataclass, field

from .group import PublicParams, Scalar, commit

COMMIT = "COMMIT"
REVEAL = "REVEAL"
DONE = "DONE"

BEHAVIORS = ("honest", "misreveal", "adaptive", "silent")

_system_rng = secrets.SystemRandom()


class AbortWithBlame(Exception):
    """A public check failed; ``party`` is the first party that failed it."""

    def __init__(self, party: str, phase: str, reason: str):
        super().__init__(f"{phase}: {party}: {reason}")
        self.party = party
        self.phase = phase
        self.reason = reason


@dataclass(frozen=True)
class MorraCommit:
    party: str
    commitments: tuple


@dataclass(frozen=True)
class MorraReveal:
    party: str
    values: tuple
    randomness: tuple


@dataclass
class MorraRound:
    commits: list = field(default_factory=list)
    reveals: list = field(default_factory=list)

    @property
    def commit_order(self):
        return [m.party for m in self.commits]

    @property
    def reveal_order(self):
        return [m.party for m in self.reveals]


@dataclass(frozen=True)
class PublicCoins:
    bits: tuple
    source: MorraRound

    def __len__(self):
        return len(self.bits)


def morra_combine(values, q: int) -> Scalar:
    if not values:
        raise ValueError("Morra needs at least one contribution")
    return sum(values) % q


def scalar_to_bit(q: int, x: Scalar) -> int:
    return 0 if x <= (q + 1) // 2 else 1


class MorraParticipant:
    """One party's side.  ``behavior`` injects the misbehaviours used in tests."""

    def __init__(self, pp: PublicParams, party: str, count: int, rng=None, behavior: str = "honest"):
        if behavior not in BEHAVIORS:
            raise ValueError(f"unknown Morra behavior {behavior!r}")
        self.pp, self.party, self.count, self.behavior = pp, party, count, behavior
        self.rng = rng or _system_rng
        self._values = self._rand = None

    def commit(self, seen: list) -> MorraCommit:
        q = self.pp.q
        if self.behavior == "adaptive" and seen:
            # choose after looking at everything committed so far
            digest = hashlib.sha256(b"".join(self.pp.group.encode(c) for m in seen for c in m.commitments))
            seed = int.from_bytes(digest.digest(), "big")
            self._values = [(seed * (j + 1)) % q for j in range(self.count)]
        else:
            self._values = [self.rng.randrange(q) for _ in range(self.count)]
        self._rand = [self.rng.randrange(q) for _ in range(self.count)]
        cs = tuple(commit(self.pp, m, r) for m, r in zip(self._values, self._rand))
        return MorraCommit(self.party, cs)

    def reveal(self, seen: list):
        if self.behavior == "silent":
            return None
        values = list(self._values)
        if self.behavior == "misreveal" and values:
            values[0] = (values[0] + 1) % self.pp.q
        return MorraReveal(self.party, tuple(values), tuple(self._rand))


class MorraCoordinator:
    """Deterministic checker for one batch; consumes messages in arrival order."""

    def __init__(self, pp: PublicParams, parties, count: int):
        self.pp = pp
        self.parties = list(parties)
        self.count = count
        self.round = MorraRound()
        self.phase = COMMIT
        self._commitments = {}

    def expected_sender(self):
        if self.phase == COMMIT:
            return self.parties[len(self.round.commits)]
        if self.phase == REVEAL:
            return self.parties[len(self.parties) - 1 - len(self.round.reveals)]
        return None

    def receive(self, msg):
        expected = self.expected_sender()
        if isinstance(msg, MorraCommit):
            if self.phase != COMMIT or msg.party != expected:
                raise AbortWithBlame(msg.party, "morra", "commitment out of order")
            if len(msg.commitments) != self.count:
                raise AbortWithBlame(msg.party, "morra", "wrong number of commitments")
            self.round.commits.append(msg)
            self._commitments[msg.party] = msg.commitments
            if len(self.round.commits) == len(self.parties):
                self.phase = REVEAL
        elif isinstance(msg, MorraReveal):
            if self.phase != REVEAL or msg.party != expected:
                raise AbortWithBlame(msg.party, "morra", "reveal out of order")
            if len(msg.values) != self.count or len(msg.randomness) != self.count:
                raise AbortWithBlame(msg.party, "morra", "wrong number of openings")
            q = self.pp.q
            for m, r, c in zip(msg.values, msg.randomness, self._commitments[msg.party]):
                if not (0 <= m < q and 0 <= r < q) or commit(self.pp, m, r) != c:
                    raise AbortWithBlame(msg.party, "morra", "opening does not match commitment")
            self.round.reveals.append(msg)
            if len(self.round.reveals) == len(self.parties):
                self.phase = DONE
        else:
            raise TypeError(f"not a Morra message: {msg!r}")

    def timeout(self):
        """The party we are waiting on went silent."""
        raise AbortWithBlame(self.expected_sender(), "morra", "no response")

    def coins(self) -> PublicCoins:
        if self.phase != DONE:
            raise RuntimeError("Morra batch is not finished")
        q = self.pp.q
        sums = [0] * self.count
        for msg in self.round.reveals:
            for j, m in enumerate(msg.values):
                sums[j] += m
        return PublicCoins(tuple(scalar_to_bit(q, s % q) for s in sums), self.round)


def run_morra(pp: PublicParams, participants, count: int, on_message=None) -> PublicCoins:
    """Run one batch to completion.  ``on_message`` sees every broadcast message."""
    coord = MorraCoordinator(pp, [p.party for p in participants], count)
    for p in participants:
        msg = p.commit(list(coord.round.commits))
        if on_message:
            on_message(msg)
        coord.receive(msg)
    for p in reversed(participants):
        msg = p.reveal(list(coord.round.reveals))
        if msg is None:
            coord.timeout()
        if on_message:
            on_message(msg)
        coord.receive(msg)
    return coord.coins()


def verify_round(pp: PublicParams, parties, count: int, round_: MorraRound) -> PublicCoins:
    """Replay a recorded batch; raises :class:`AbortWithBlame` like the live run."""
    coord = MorraCoordinator(pp, parties, count)
    for msg in list(round_.commits) + list(round_.reveals):
        coord.receive(msg)
    if coord.phase != DONE:
        coord.timeout()
    return coord.coins()
