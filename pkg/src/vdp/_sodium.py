"""Thin ctypes binding to the ristretto255 primitives of a system libsodium."""
import ctypes
import ctypes.util

_NAMES = ("sodium", "libsodium.so.23", "libsodium.so.26", "libsodium.dylib")


def _load():
    for name in _NAMES:
        path = ctypes.util.find_library(name) if name == "sodium" else name
        if not path:
            continue
        try:
            lib = ctypes.cdll.LoadLibrary(path)
        except OSError:
            continue
        if lib.sodium_init() < 0:
            continue
        if hasattr(lib, "crypto_scalarmult_ristretto255"):
            return lib
    return None


lib = _load()

BYTES = 32
IDENTITY = bytes(BYTES)


def available() -> bool:
    return lib is not None


def _require():
    if lib is None:
        raise RuntimeError("libsodium with ristretto255 support was not found on this system")


def is_valid_point(p: bytes) -> bool:
    _require()
    return len(p) == BYTES and lib.crypto_core_ristretto255_is_valid_point(p) == 1


def add(p: bytes, q: bytes) -> bytes:
    out = ctypes.create_string_buffer(BYTES)
    if lib.crypto_core_ristretto255_add(out, p, q) != 0:
        raise ValueError("invalid ristretto255 encoding")
    return out.raw


def sub(p: bytes, q: bytes) -> bytes:
    out = ctypes.create_string_buffer(BYTES)
    if lib.crypto_core_ristretto255_sub(out, p, q) != 0:
        raise ValueError("invalid ristretto255 encoding")
    return out.raw


def scalarmult(s: bytes, p: bytes) -> bytes:
    # libsodium signals an identity result with -1; the buffer is then all zero.
    out = ctypes.create_string_buffer(BYTES)
    lib.crypto_scalarmult_ristretto255(out, s, p)
    return out.raw


def scalarmult_base(s: bytes) -> bytes:
    out = ctypes.create_string_buffer(BYTES)
    lib.crypto_scalarmult_ristretto255_base(out, s)
    return out.raw


def from_hash(h64: bytes) -> bytes:
    _require()
    out = ctypes.create_string_buffer(BYTES)
    lib.crypto_core_ristretto255_from_hash(out, h64)
    return out.raw
