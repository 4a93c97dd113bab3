"""Canonical byte encoding and digests.

Every hash in the system (payload hashes, block hashes, anchors, the state
digest) is computed over this encoding, so it has to be deterministic and
unambiguous: field-ordered, type-tagged, with explicit lengths. The format
is a typed netstring variant:

    N                  None
    T / F              booleans
    I <len> <ascii>    integer, decimal text
    S <len> <utf8>     string
    B <len> <raw>      bytes
    L <count> items    list / tuple
    D <count> k v ...  dict with string keys, sorted by key

Lengths and counts are 4-byte big-endian.
"""

from __future__ import annotations

import hashlib
import struct
from typing import Any

_LEN = struct.Struct(">I")

Value = Any  # None | bool | int | str | bytes | list | dict


def encode(value: Value) -> bytes:
    out = bytearray()
    _encode_into(value, out)
    return bytes(out)


def _encode_into(value: Value, out: bytearray) -> None:
    if value is None:
        out += b"N"
    elif value is True:
        out += b"T"
    elif value is False:
        out += b"F"
    elif isinstance(value, int):
        text = b"%d" % value
        out += b"I" + _LEN.pack(len(text)) + text
    elif isinstance(value, str):
        raw = value.encode("utf-8")
        out += b"S" + _LEN.pack(len(raw)) + raw
    elif isinstance(value, (bytes, bytearray)):
        out += b"B" + _LEN.pack(len(value)) + bytes(value)
    elif isinstance(value, (list, tuple)):
        out += b"L" + _LEN.pack(len(value))
        for item in value:
            _encode_into(item, out)
    elif isinstance(value, dict):
        keys = sorted(value)
        if any(not isinstance(k, str) for k in keys):
            raise TypeError("canonical dict keys must be strings")
        out += b"D" + _LEN.pack(len(keys))
        for key in keys:
            _encode_into(key, out)
            _encode_into(value[key], out)
    else:
        raise TypeError(f"not canonically encodable: {type(value).__name__}")


class DecodeError(ValueError):
    """Raised when bytes are not a valid canonical encoding."""


def decode(data: bytes) -> Value:
    value, offset = _decode_at(data, 0)
    if offset != len(data):
        raise DecodeError(f"trailing bytes after value (at {offset})")
    return value


def _decode_at(data: bytes, offset: int) -> tuple[Value, int]:
    if offset >= len(data):
        raise DecodeError("truncated: missing type tag")
    tag = data[offset : offset + 1]
    offset += 1
    if tag == b"N":
        return None, offset
    if tag == b"T":
        return True, offset
    if tag == b"F":
        return False, offset
    if tag in (b"I", b"S", b"B"):
        length, offset = _read_len(data, offset)
        raw = data[offset : offset + length]
        if len(raw) != length:
            raise DecodeError("truncated: short payload")
        offset += length
        if tag == b"I":
            try:
                return int(raw.decode("ascii")), offset
            except ValueError as exc:
                raise DecodeError("bad integer literal") from exc
        if tag == b"S":
            try:
                return raw.decode("utf-8"), offset
            except UnicodeDecodeError as exc:
                raise DecodeError("bad utf-8 string") from exc
        return raw, offset
    if tag == b"L":
        count, offset = _read_len(data, offset)
        items = []
        for _ in range(count):
            item, offset = _decode_at(data, offset)
            items.append(item)
        return items, offset
    if tag == b"D":
        count, offset = _read_len(data, offset)
        result: dict[str, Value] = {}
        prev_key: str | None = None
        for _ in range(count):
            key, offset = _decode_at(data, offset)
            if not isinstance(key, str):
                raise DecodeError("dict key is not a string")
            if prev_key is not None and key <= prev_key:
                raise DecodeError("dict keys out of canonical order")
            prev_key = key
            value, offset = _decode_at(data, offset)
            result[key] = value
        return result, offset
    raise DecodeError(f"unknown type tag {tag!r}")


def _read_len(data: bytes, offset: int) -> tuple[int, int]:
    raw = data[offset : offset + 4]
    if len(raw) != 4:
        raise DecodeError("truncated: missing length")
    return _LEN.unpack(raw)[0], offset + 4


def digest(value: Value) -> str:
    """Hex sha-256 of the canonical encoding."""
    return hashlib.sha256(encode(value)).hexdigest()


def digest_bytes(raw: bytes) -> str:
    """Hex sha-256 of raw bytes (already-encoded payloads, photos, files)."""
    return hashlib.sha256(raw).hexdigest()


def leading_zero_bits(hex_digest: str) -> int:
    """Leading zero bits of a hex digest; the proof-of-work measure."""
    bits = 0
    for ch in hex_digest:
        nibble = int(ch, 16)
        if nibble == 0:
            bits += 4
            continue
        bits += 4 - nibble.bit_length()
        break
    return bits
