"""Session transcripts: the public record, its JSON form, and offline re-verification.

Layout of the JSON document::

    {"format": "vdp-transcript", "version": 1,
     "header":   {"pp", "session_id", "K", "M", "n", "epsilon", "delta", "n_b"},
     "messages": [{"seq", "phase", "sender", "body"}, ...],
     "verdicts": {"status", "released", "phase", "blame", "reason",
                  "clients": {name: verdict}, "aggregate": [{"bin", "y", "estimate"}]}}

Group elements and scalars are base64 of their canonical byte encodings.
"""
from __future__ import annotations

import base64
import binascii
import json
from dataclasses import dataclass, field

from .dp_params import PrivacyParamError, PrivacyParams, privacy_for_coins
from .group import EncodingError, PublicParams
from .morra import AbortWithBlame, MorraCommit, MorraReveal
from .protocol import (BIT_COMMIT, CLIENT, MORRA_COMMIT, MORRA_REVEAL, OUTPUT, BitCommitMessage, ProverOutput,
                       SessionVerdict, SessionVerifier, Undecodable)
from .shares import ClientBroadcast, ClientVerdict
from .sigma_or import OrProof

FORMAT = "vdp-transcript"
VERSION = 1


class MalformedTranscript(ValueError):
    """The document is not a transcript at all (bad JSON, missing fields)."""


@dataclass
class Message:
    seq: int
    phase: str
    sender: str
    body: object


@dataclass
class SessionTranscript:
    pp: PublicParams
    params: PrivacyParams
    K: int
    M: int
    n: int
    session_id: bytes
    messages: list = field(default_factory=list)
    verdict: SessionVerdict | None = None

    def append(self, phase: str, sender: str, body) -> Message:
        msg = Message(len(self.messages), phase, sender, body)
        self.messages.append(msg)
        return msg

    def to_json(self) -> str:
        return json.dumps(to_document(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "SessionTranscript":
        try:
            doc = json.loads(text)
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise MalformedTranscript(f"not JSON: {exc}") from None
        return from_document(doc)


def b64(data: bytes) -> str:
    return base64.b64encode(data).decode("ascii")


def unb64(text: str) -> bytes:
    try:
        return base64.b64decode(text.encode("ascii"), validate=True)
    except (binascii.Error, UnicodeEncodeError, AttributeError) as exc:
        raise EncodingError(f"bad base64: {exc}") from None


def _encode_body(pp: PublicParams, body):
    grp = pp.group
    if isinstance(body, ClientBroadcast):
        return {"bundle": b64(body.encode(pp))}
    if isinstance(body, BitCommitMessage):
        return {"prover": body.prover, "bin": body.bin,
                "commitments": [b64(grp.encode(c)) for c in body.commitments],
                "proofs": [b64(p.encode(pp)) for p in body.proofs]}
    if isinstance(body, MorraCommit):
        return {"commitments": [b64(grp.encode(c)) for c in body.commitments]}
    if isinstance(body, MorraReveal):
        return {"values": [b64(grp.encode_scalar(v)) for v in body.values],
                "randomness": [b64(grp.encode_scalar(r)) for r in body.randomness]}
    if isinstance(body, ProverOutput):
        return {"prover": body.prover, "bin": body.bin,
                "y": b64(grp.encode_scalar(body.y)), "z": b64(grp.encode_scalar(body.z))}
    raise TypeError(f"cannot serialise {body!r}")


def _decode_body(pp: PublicParams, phase: str, sender: str, raw: dict):
    grp = pp.group
    if phase == CLIENT:
        return ClientBroadcast.decode(pp, unb64(raw["bundle"]))
    if phase == BIT_COMMIT:
        return BitCommitMessage(int(raw["prover"]), int(raw["bin"]),
                                tuple(grp.decode(unb64(c)) for c in raw["commitments"]),
                                tuple(OrProof.decode(pp, unb64(p)) for p in raw["proofs"]))
    if phase == MORRA_COMMIT:
        return MorraCommit(sender, tuple(grp.decode(unb64(c)) for c in raw["commitments"]))
    if phase == MORRA_REVEAL:
        return MorraReveal(sender, tuple(grp.decode_scalar(unb64(v)) for v in raw["values"]),
                           tuple(grp.decode_scalar(unb64(r)) for r in raw["randomness"]))
    if phase == OUTPUT:
        return ProverOutput(int(raw["prover"]), int(raw["bin"]),
                            grp.decode_scalar(unb64(raw["y"])), grp.decode_scalar(unb64(raw["z"])))
    raise EncodingError(f"unknown phase {phase!r}")


def _encode_verdict(pp: PublicParams, v: SessionVerdict) -> dict:
    agg = None
    if v.aggregate is not None:
        agg = [{"bin": m, "y": b64(pp.group.encode_scalar(y)), "estimate": est}
               for m, (y, est) in enumerate(v.aggregate)]
    return {"status": "accepted" if v.accepted else "rejected", "released": v.released,
            "phase": v.phase, "blame": list(v.blame), "reason": v.reason,
            "clients": {k: str(c) for k, c in v.clients.items()}, "aggregate": agg}


def _decode_verdict(pp: PublicParams, d: dict) -> SessionVerdict:
    agg = d["aggregate"]
    if agg is not None:
        agg = tuple((pp.group.decode_scalar(unb64(a["y"])), float(a["estimate"])) for a in agg)
    status = d["status"]
    if status not in ("accepted", "rejected"):
        raise EncodingError(f"unknown status {status!r}")
    return SessionVerdict(status == "accepted", bool(d["released"]), d["phase"], tuple(d["blame"]), d["reason"],
                          {k: ClientVerdict.parse(v) for k, v in d["clients"].items()}, agg)


def to_document(t: SessionTranscript) -> dict:
    p = t.params
    return {
        "format": FORMAT,
        "version": VERSION,
        "header": {"pp": b64(t.pp.encode()), "session_id": t.session_id.hex(), "K": t.K, "M": t.M, "n": t.n,
                   "epsilon": p.epsilon, "delta": p.delta, "n_b": p.n_b},
        "messages": [{"seq": m.seq, "phase": m.phase, "sender": m.sender, "body": _encode_body(t.pp, m.body)}
                     for m in t.messages],
        "verdicts": None if t.verdict is None else _encode_verdict(t.pp, t.verdict),
    }


@dataclass
class _BadHeader:
    error: str


def from_document(doc) -> SessionTranscript:
    """Structural parse.  Undecodable cryptographic fields are kept as
    :class:`Undecodable` so the verifier can blame their sender."""
    try:
        if doc.get("format") != FORMAT or doc.get("version") != VERSION:
            raise MalformedTranscript("not a version-1 vdp transcript")
        h = doc["header"]
        K, M, n = int(h["K"]), int(h["M"]), int(h["n"])
        session_id = bytes.fromhex(h["session_id"])
        raw_msgs = [(int(m["seq"]), str(m["phase"]), str(m["sender"]), m["body"]) for m in doc["messages"]]
        raw_verdict = doc["verdicts"]
        epsilon, delta, n_b = float(h["epsilon"]), float(h["delta"]), int(h["n_b"])
        pp_text = h["pp"]
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        if isinstance(exc, MalformedTranscript):
            raise
        raise MalformedTranscript(f"missing or mistyped field: {exc}") from None
    try:
        pp = PublicParams.decode(unb64(pp_text))
    except EncodingError as exc:
        pp = _BadHeader(f"public parameters: {exc}")
    try:
        params = PrivacyParams(epsilon, delta, n_b)
    except PrivacyParamError as exc:
        params = _BadHeader(f"privacy parameters: {exc}")
    t = SessionTranscript(pp, params, K, M, n, session_id)
    if isinstance(pp, _BadHeader):
        t.messages = [Message(s, ph, snd, Undecodable(pp.error)) for s, ph, snd, _ in raw_msgs]
        t.verdict = _BadHeader(pp.error)
        return t
    for seq, phase, sender, raw in raw_msgs:
        try:
            body = _decode_body(pp, phase, sender, raw)
        except (EncodingError, KeyError, TypeError, ValueError) as exc:
            body = Undecodable(str(exc))
        t.messages.append(Message(seq, phase, sender, body))
    if raw_verdict is None:
        t.verdict = None
    else:
        try:
            t.verdict = _decode_verdict(pp, raw_verdict)
        except (EncodingError, KeyError, TypeError, ValueError) as exc:
            t.verdict = _BadHeader(f"verdicts: {exc}")
    return t


def replay(t: SessionTranscript) -> SessionVerdict:
    """Run the public checker over the recorded messages."""
    checker = SessionVerifier(t.pp, t.params, t.K, t.M, t.n, t.session_id)
    for expected_seq, msg in enumerate(t.messages):
        if msg.seq != expected_seq:
            return SessionVerdict(False, False, "ordering", (msg.sender,), "sequence numbers are not consecutive")
        try:
            checker.receive(msg.phase, msg.sender, msg.body)
        except AbortWithBlame:
            break
    return checker.finish()


def verify_session(t: SessionTranscript) -> SessionVerdict:
    """Recompute every check from the transcript alone.

    A failing check is reported as such (first failure, with blame).  A
    transcript whose checks all pass is still rejected at phase
    ``"verdicts"`` if its recorded verdict disagrees with the recomputation.
    """
    for bad in (t.pp, t.params):
        if isinstance(bad, _BadHeader):
            return SessionVerdict(False, False, "header", (), bad.error)
    if t.n < 0 or t.K < 1 or t.M < 1:
        return SessionVerdict(False, False, "header", (), "bad session shape")
    # the advertised epsilon has to be backed by enough coins
    if privacy_for_coins(t.params.n_b, t.params.delta) > t.params.epsilon * (1 + 1e-12):
        return SessionVerdict(False, False, "header", (), "n_b is too small for the advertised epsilon")
    if isinstance(t.verdict, _BadHeader):
        return SessionVerdict(False, False, "verdicts", (), t.verdict.error)
    recomputed = replay(t)
    if not recomputed.accepted:
        return recomputed
    if t.verdict is None or not recomputed.same_as(t.verdict):
        return SessionVerdict(False, False, "verdicts", (), "recorded verdicts do not match recomputation",
                              recomputed.clients, None)
    return recomputed
