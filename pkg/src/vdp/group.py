"""Prime-order groups and Pedersen commitments.

Every group exposes the same small interface (``mul``, ``inv``, ``exp``,
``encode``/``decode``, ``hash_to_element``) so the protocol code never needs
to know which backend it runs on.  Elements are plain Python values (``int``
or ``gmpy2.mpz`` for the Z_p* groups, 32-byte ``bytes`` for ristretto255) and
scalars are ``int`` in ``[0, q)``.

Scalar arithmetic is not constant time; that is fine for simulation and
benchmarking but not for deployment on shared hardware.
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Any, Iterable

import gmpy2

from . import _sodium

Scalar = int
GroupElement = Any
Commitment = GroupElement

PP_VERSION = 1
DEFAULT_DOMAIN = b"VDP-PP-v1"
DEFAULT_GROUP_ENV = "VDP_GROUP"


class EncodingError(ValueError):
    """Raised when bytes are not the canonical encoding of a scalar or element."""


class UnsupportedSecurityLevel(ValueError):
    pass


def length_prefixed(*parts: bytes) -> bytes:
    return b"".join(len(p).to_bytes(4, "big") + p for p in parts)


def expand(data: bytes, nbytes: int) -> bytes:
    """SHA-256 in counter mode, for hashing onto ranges wider than 256 bits."""
    out = bytearray()
    counter = 0
    while len(out) < nbytes:
        out += hashlib.sha256(counter.to_bytes(4, "big") + data).digest()
        counter += 1
    return bytes(out[:nbytes])


class Group:
    group_id: str
    order: int
    security_bits: int
    element_bytes: int
    identity: GroupElement
    generator: GroupElement

    @property
    def scalar_bytes(self) -> int:
        return (self.order.bit_length() + 7) // 8

    def encode_scalar(self, k: Scalar) -> bytes:
        return (k % self.order).to_bytes(self.scalar_bytes, "little")

    def decode_scalar(self, data: bytes) -> Scalar:
        if len(data) != self.scalar_bytes:
            raise EncodingError("scalar has wrong length")
        k = int.from_bytes(data, "little")
        if k >= self.order:
            raise EncodingError("scalar is not reduced")
        return k

    def random_scalar(self, rng) -> Scalar:
        return rng.randrange(self.order)

    def hash_to_scalar(self, data: bytes) -> Scalar:
        # 128 extra bits keep the reduction bias negligible
        return int.from_bytes(expand(data, self.scalar_bytes + 16), "big") % self.order

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def __repr__(self):
        return f"<Group {self.group_id}>"


class ModPGroup(Group):
    """Order-q subgroup of Z_p* for primes p = cofactor * q + 1 (elements are ``gmpy2.mpz``)."""

    def __init__(self, group_id: str, p: int, q: int, g: int, security_bits: int):
        self.group_id = group_id
        self.security_bits = security_bits
        self._powmod = gmpy2.powmod
        self._wrap = gmpy2.mpz
        self.p = self._wrap(p)
        self.order = q
        self.cofactor = (p - 1) // q
        self.element_bytes = (p.bit_length() + 7) // 8
        self.identity = self._wrap(1)
        self.generator = self._wrap(g)

    def mul(self, a, b):
        return a * b % self.p

    def inv(self, a):
        return self._powmod(a, -1, self.p)

    def exp(self, a, k: Scalar):
        return self._powmod(a, k % self.order, self.p)

    def is_element(self, a) -> bool:
        return 0 < a < self.p and self._powmod(a, self.order, self.p) == 1

    def encode(self, a) -> bytes:
        return int(a).to_bytes(self.element_bytes, "big")

    def decode(self, data: bytes):
        if len(data) != self.element_bytes:
            raise EncodingError("element has wrong length")
        a = self._wrap(int.from_bytes(data, "big"))
        if not self.is_element(a):
            raise EncodingError("not an element of the prime-order subgroup")
        return a

    def hash_to_element(self, data: bytes):
        counter = 0
        while True:
            t = int.from_bytes(expand(data + counter.to_bytes(4, "big"), self.element_bytes + 16), "big")
            a = self._powmod(self._wrap(t % self.p), self.cofactor, self.p)
            if a > 1:
                return a
            counter += 1


# 2^252 + 27742317777372353535851937790883648493
RISTRETTO_ORDER = (1 << 252) + 27742317777372353535851937790883648493
RISTRETTO_BASEPOINT = bytes.fromhex("e2f2ae0a6abc4e71a884a961c500515f58e30b6aa582dd8db6a65945e08d2d76")


class RistrettoGroup(Group):
    """ristretto255, backed by libsodium."""

    group_id = "ristretto255"
    order = RISTRETTO_ORDER
    security_bits = 128
    element_bytes = 32
    identity = _sodium.IDENTITY
    generator = RISTRETTO_BASEPOINT

    def __init__(self):
        if not _sodium.available():
            raise UnsupportedSecurityLevel("ristretto255 needs libsodium >= 1.0.18 on the system")

    def mul(self, a, b):
        return _sodium.add(a, b)

    def div(self, a, b):
        return _sodium.sub(a, b)

    def inv(self, a):
        return _sodium.sub(_sodium.IDENTITY, a)

    def exp(self, a, k: Scalar):
        s = (k % RISTRETTO_ORDER).to_bytes(32, "little")
        if a == RISTRETTO_BASEPOINT:
            return _sodium.scalarmult_base(s)
        return _sodium.scalarmult(s, a)

    def encode(self, a) -> bytes:
        return bytes(a)

    def decode(self, data: bytes):
        data = bytes(data)
        if not _sodium.is_valid_point(data):
            raise EncodingError("not a canonical ristretto255 encoding")
        return data

    def hash_to_element(self, data: bytes):
        return _sodium.from_hash(hashlib.sha512(data).digest())


# Constants reproducible with scripts/gen_schnorr_group.py.
SCHNORR2048_P = int(
    "c02e92d62b6d1e7abb74239ffac13499158756a0856d4018177255f98fccd198972f6937d93c175a0996dd2692da0e6e"
    "479ef828f0f0defb613b94d692dc9161c0c37df6c9b46de9ef824f1308b5e85add5ba8975cdb298dffeec5019623dea4"
    "d60195fa24a0e865f91a1c5d0c5fa3a7fc0ca225f96cfe3720fcbbec054d99fc9b5b6a1d752187c3275a3f1e5309bfd7"
    "3f0b0261f467d1cb3382c35a8529d46fdb76f8f17ac38113eb89396c61a7977bfc4ca9d1082c16cbe1dd5e568e105f81d"
    "ee7cd5baa66f6ab38d25dea738454c162995ead24652703c5c99256600a4e552a080adf3416a21bd85d8d7cd80536d3f9"
    "569a9ad38754bf57a12a3f195a8da3", 16)
SCHNORR2048_Q = 0xB357B1FFB8AD741BF759EC1762EB07C4B2BE922690EFBAAEBF366F2A172D8553
SCHNORR2048_G = int(
    "556cdf25afae2c44c5e1011cd4adaa80b4b73f3f49f9ce39fd809bb334ae90674ce941467b1747b27a346bbaf908641f"
    "522e5489165b574be403aa6c08c8c8f1837d195f8123986fd0ded9f7cbd2668b9a220932c8528fdd36b15010288f97eb"
    "da62957cf7d7af6b1fe0ccc44053e2e83f12bd445289586829689118d415adfd5ebdc983e4991e70d13231e560f522eb"
    "2d107d14d8c452cb16936a883105a8fb39ec769a44ea30ada37699ddc2fa01aa2010152d7db840a381b26adf709044fc8"
    "72b5b27791762ae295cc7e5ecdfccc15e9b5a66cd9527a611df3beb4d5b7e03be2b0c82e81c04c26cff1af1f7c1ced53e"
    "b4f20b1f53227f93963c127860b0d3", 16)

_GROUPS = {
    "ristretto255": RistrettoGroup,
    "schnorr2048": lambda: ModPGroup("schnorr2048", SCHNORR2048_P, SCHNORR2048_Q, SCHNORR2048_G, 112),
    # largest safe prime below 2^61
    "toy61": lambda: ModPGroup("toy61", 2305843009213691579, 1152921504606845789, 4, 30),
    # largest q < 2^16 with 2q + 1 prime
    "toy16": lambda: ModPGroup("toy16", 130787, 65393, 4, 8),
    "toy101": lambda: ModPGroup("toy101", 607, 101, 64, 3),
}
GROUP_IDS = tuple(_GROUPS)
TOY_GROUPS = ("toy61", "toy16", "toy101")
SECURITY_LEVELS = {128: "ristretto255", 112: "schnorr2048"}


@lru_cache(maxsize=None)
def get_group(group_id: str) -> Group:
    try:
        factory = _GROUPS[group_id]
    except KeyError:
        raise UnsupportedSecurityLevel(f"unknown group {group_id!r}; choose from {', '.join(GROUP_IDS)}") from None
    return factory()


def default_group_id() -> str:
    return os.environ.get(DEFAULT_GROUP_ENV, "ristretto255")


@dataclass(frozen=True)
class PublicParams:
    group: Group
    g: GroupElement
    h: GroupElement
    domain: bytes = DEFAULT_DOMAIN

    @property
    def q(self) -> int:
        return self.group.order

    @property
    def group_id(self) -> str:
        return self.group.group_id

    @cached_property
    def encoded(self) -> bytes:
        return self.encode()

    def encode(self) -> bytes:
        return bytes([PP_VERSION]) + length_prefixed(
            self.group_id.encode(), self.domain, self.group.encode(self.g), self.group.encode(self.h)
        )

    @classmethod
    def decode(cls, data: bytes) -> "PublicParams":
        """Parse and re-derive; rejects any ``h`` that did not come from :func:`setup`."""
        if not data or data[0] != PP_VERSION:
            raise EncodingError("unsupported public-parameter version")
        parts, pos = [], 1
        while pos < len(data):
            if pos + 4 > len(data):
                raise EncodingError("truncated public parameters")
            n = int.from_bytes(data[pos:pos + 4], "big")
            parts.append(data[pos + 4:pos + 4 + n])
            if len(parts[-1]) != n:
                raise EncodingError("truncated public parameters")
            pos += 4 + n
        if len(parts) != 4:
            raise EncodingError("malformed public parameters")
        try:
            group_id = parts[0].decode()
            pp = setup_group(group_id, parts[1])
        except (UnicodeDecodeError, UnsupportedSecurityLevel) as exc:
            raise EncodingError(str(exc)) from None
        if parts[2] != pp.group.encode(pp.g) or parts[3] != pp.group.encode(pp.h):
            raise EncodingError("generators do not match the deterministic setup")
        return pp


def derive_h(group: Group, domain: bytes = DEFAULT_DOMAIN):
    """Second generator: hash of the encoded first generator, so nobody knows log_g(h)."""
    return group.hash_to_element(length_prefixed(b"VDP-h", domain, group.encode(group.generator)))


@lru_cache(maxsize=None)
def setup_group(group_id: str, domain: bytes = DEFAULT_DOMAIN) -> PublicParams:
    group = get_group(group_id)
    h = derive_h(group, domain)
    if h == group.identity or h == group.generator:
        raise UnsupportedSecurityLevel("degenerate second generator")
    return PublicParams(group, group.generator, h, domain)


def setup(security_param: int = 128, group_id: str | None = None, domain: bytes = DEFAULT_DOMAIN) -> PublicParams:
    """Deterministic public parameters for a security level (or an explicit group)."""
    if group_id is None:
        try:
            group_id = SECURITY_LEVELS[security_param]
        except KeyError:
            raise UnsupportedSecurityLevel(
                f"no group for {security_param}-bit security; supported: {sorted(SECURITY_LEVELS)}"
            ) from None
    return setup_group(group_id, domain)


def commit(pp: PublicParams, x: Scalar, r: Scalar) -> Commitment:
    grp = pp.group
    hr = grp.exp(pp.h, r)
    x %= grp.order
    if x == 0:
        return hr
    if x == 1:
        return grp.mul(pp.g, hr)
    return grp.mul(grp.exp(pp.g, x), hr)


def verify_opening(pp: PublicParams, c: Commitment, x: Scalar, r: Scalar) -> bool:
    return commit(pp, x, r) == c


def combine(pp: PublicParams, a: Commitment, b: Commitment) -> Commitment:
    return pp.group.mul(a, b)


def product(pp: PublicParams, cs: Iterable[Commitment]) -> Commitment:
    grp = pp.group
    acc = grp.identity
    for c in cs:
        acc = grp.mul(acc, c)
    return acc


def invert(pp: PublicParams, c: Commitment) -> Commitment:
    return pp.group.inv(c)


def one_minus(pp: PublicParams, c: Commitment) -> Commitment:
    """Com(1, 0) * c^-1: turns a commitment to (v, s) into one to (1 - v, -s)."""
    return pp.group.div(pp.g, c)
