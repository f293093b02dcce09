"""Canonical, self-describing byte encoding.

Every value that is hashed, signed or written to the bulletin board passes
through :func:`encode`.  The format is a small tag-length-value scheme:

    tag (1 byte) | length (4 bytes, big-endian) | body

Integers are a sign byte followed by the big-endian magnitude, dict entries
keep insertion order (field order is fixed by whoever builds the dict), and
group elements are encoded as the byte string of their canonical form.
"""
from __future__ import annotations

import hashlib
import struct
from typing import Any, Iterator

_NONE = 0x00
_BOOL = 0x01
_INT = 0x02
_BYTES = 0x03
_STR = 0x04
_LIST = 0x05
_MAP = 0x06

_HEADER = struct.Struct(">BI")


class EncodingError(ValueError):
    pass


def _frame(tag: int, body: bytes) -> bytes:
    return _HEADER.pack(tag, len(body)) + body


def encode(value: Any) -> bytes:
    if value is None:
        return _frame(_NONE, b"")
    if isinstance(value, bool):
        return _frame(_BOOL, b"\x01" if value else b"\x00")
    if isinstance(value, int):
        mag = abs(value)
        body = (b"\x01" if value < 0 else b"\x00") + mag.to_bytes((mag.bit_length() + 7) // 8, "big")
        return _frame(_INT, body)
    if isinstance(value, (bytes, bytearray, memoryview)):
        return _frame(_BYTES, bytes(value))
    if isinstance(value, str):
        return _frame(_STR, value.encode("utf-8"))
    if isinstance(value, (list, tuple)):
        return _frame(_LIST, b"".join(encode(v) for v in value))
    if isinstance(value, dict):
        if not all(isinstance(k, str) for k in value):
            raise EncodingError("map keys must be str")
        parts = []
        for k in sorted(value, key=lambda k: k.encode("utf-8")):
            parts.append(encode(k))
            parts.append(encode(value[k]))
        return _frame(_MAP, b"".join(parts))
    to_bytes = getattr(value, "to_bytes", None)
    if callable(to_bytes) and hasattr(value, "group"):
        return _frame(_BYTES, to_bytes())
    to_wire = getattr(value, "to_wire", None)
    if callable(to_wire):
        return encode(to_wire())
    raise EncodingError(f"cannot encode {type(value).__name__}")


def _decode_at(data: bytes, pos: int) -> tuple[Any, int]:
    if pos + _HEADER.size > len(data):
        raise EncodingError("truncated header")
    tag, length = _HEADER.unpack_from(data, pos)
    start = pos + _HEADER.size
    end = start + length
    if end > len(data):
        raise EncodingError("truncated body")
    body = data[start:end]
    if tag == _NONE:
        if length:
            raise EncodingError("non-empty none")
        return None, end
    if tag == _BOOL:
        if body not in (b"\x00", b"\x01"):
            raise EncodingError("bad bool")
        return body == b"\x01", end
    if tag == _INT:
        if not body or body[0] > 1:
            raise EncodingError("bad int")
        mag = int.from_bytes(body[1:], "big")
        if body[1:2] == b"\x00" or (body[0] and not mag):
            raise EncodingError("non-canonical int")
        return (-mag if body[0] else mag), end
    if tag == _BYTES:
        return bytes(body), end
    if tag == _STR:
        return body.decode("utf-8"), end
    if tag == _LIST:
        items = []
        p = start
        while p < end:
            item, p = _decode_at(data, p)
            items.append(item)
        if p != end:
            raise EncodingError("list overrun")
        return items, end
    if tag == _MAP:
        out: dict[str, Any] = {}
        p, last = start, None
        while p < end:
            key, p = _decode_at(data, p)
            if not isinstance(key, str) or (last is not None and key.encode("utf-8") <= last):
                raise EncodingError("map keys missing, repeated or out of order")
            last = key.encode("utf-8")
            out[key], p = _decode_at(data, p)
        if p != end:
            raise EncodingError("map overrun")
        return out, end
    raise EncodingError(f"unknown tag {tag:#x}")


def decode(data: bytes) -> Any:
    value, end = _decode_at(data, 0)
    if end != len(data):
        raise EncodingError("trailing bytes")
    return value


def decode_stream(data: bytes, offset: int = 0) -> Iterator[Any]:
    pos = offset
    while pos < len(data):
        value, pos = _decode_at(data, pos)
        yield value


def digest(*parts: Any) -> bytes:
    """SHA-256 over the canonical encoding of ``parts``."""
    return hashlib.sha256(encode(list(parts))).digest()
