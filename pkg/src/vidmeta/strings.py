"""Flat string form of video-container metadata trees.

A refined metadata tree is rendered as a multiset of printable strings:
one per node, giving its slash-joined path ("moov/mvhd"), and one per
field, appending "@key=value" ("moov/mvhd/@duration=1546737").  Every
byte that is not printable ASCII is hex-escaped, as are the three
grammar separators when they occur inside a name, key, or value, so the
rendering is unambiguous and invertible.

Only ``trak`` components are numbered (trak1, trak2, ... in file
order); all other repeated boxes keep their bare name, and repeats are
simply emitted more than once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .refine import MetadataNode

NODE_PRESENCE = "node-presence"
KEY_VALUE = "key-value"

# Separators of the string grammar; always hex-escaped inside
# components so splitting on them stays safe.
_SEPARATORS = "/@="

_HEX = "0123456789ABCDEF"


class MalformedMetadataString(ValueError):
    """Text is not something ``serialize`` could have produced."""


def escape(data: bytes | bytearray | memoryview | str) -> str:
    """Render raw bytes (or text, via UTF-8) as printable ASCII.

    Printable ASCII passes through except for the backslash and the
    grammar separators ``/ @ =``; every other byte becomes ``\\xNN``
    with uppercase hex.  The mapping is injective.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    parts = []
    for b in bytes(data):
        if b == 0x5C:
            parts.append("\\\\")
        elif 0x20 <= b <= 0x7E and chr(b) not in _SEPARATORS:
            parts.append(chr(b))
        else:
            parts.append("\\x%02X" % b)
    return "".join(parts)


def unescape(text: str) -> bytes:
    """Invert :func:`escape`.

    Accepts exactly the escaper's output: raw characters must be
    printable ASCII outside the reserved set, escapes must be ``\\\\``
    or ``\\xNN`` with uppercase hex.  Raises
    :class:`MalformedMetadataString` otherwise.
    """
    out = bytearray()
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\":
            if i + 1 < n and text[i + 1] == "\\":
                out.append(0x5C)
                i += 2
                continue
            if (
                i + 3 < n
                and text[i + 1] == "x"
                and text[i + 2] in _HEX
                and text[i + 3] in _HEX
            ):
                out.append(int(text[i + 2 : i + 4], 16))
                i += 4
                continue
            raise MalformedMetadataString(f"bad escape at offset {i} in {text!r}")
        code = ord(ch)
        if code < 0x20 or code > 0x7E or ch in _SEPARATORS:
            raise MalformedMetadataString(
                f"raw character {ch!r} at offset {i} in {text!r}"
            )
        out.append(code)
        i += 1
    return bytes(out)


@dataclass(frozen=True)
class MetadataString:
    """One canonical string plus its parsed-out parts.

    ``path``, ``key`` and ``value_text`` hold the escaped text forms;
    apply :func:`unescape` to get raw bytes back.
    """

    text: str
    category: str  # NODE_PRESENCE or KEY_VALUE
    path: tuple[str, ...]
    key: str | None = None
    value_text: str | None = None

    def __str__(self) -> str:
        return self.text


def _check_component(part: str, text: str) -> None:
    if not part:
        raise MalformedMetadataString(f"empty path component in {text!r}")
    unescape(part)  # validates characters and escapes


def parse_string(text: str) -> MetadataString:
    """Split serialized text back into category, path, key and value."""
    if not text:
        raise MalformedMetadataString("empty string")
    marker = text.find("/@")
    if marker == -1:
        if "@" in text or "=" in text:
            raise MalformedMetadataString(f"stray separator in {text!r}")
        path = tuple(text.split("/"))
        for part in path:
            _check_component(part, text)
        return MetadataString(text, NODE_PRESENCE, path)
    path = tuple(text[:marker].split("/"))
    for part in path:
        _check_component(part, text)
    rest = text[marker + 2 :]
    eq = rest.find("=")
    if eq == -1:
        raise MalformedMetadataString(f"field string without '=' in {text!r}")
    key, value = rest[:eq], rest[eq + 1 :]
    if not key:
        raise MalformedMetadataString(f"empty key in {text!r}")
    unescape(key)
    unescape(value)
    return MetadataString(text, KEY_VALUE, path, key, value)


def format_field_value(value) -> str:
    """Render a refined field value as escaped value text."""
    kind = value.kind
    if kind == "integer":
        return str(int(value.value))
    if kind == "decimal":
        return str(float(value.value))
    if kind == "text":
        return escape(value.value)
    return escape(value.raw)


def serialize(root: "MetadataNode") -> list[MetadataString]:
    """Flatten a metadata tree into its canonical string multiset.

    Emits, in document order, one node-presence string per node and one
    key-value string per field.  The synthetic root itself (empty path)
    is not emitted.
    """
    out: list[MetadataString] = []
    _emit_children(root, (), out)
    return out


def _emit_children(node, prefix: tuple[str, ...], out: list[MetadataString]) -> None:
    trak_seen = 0
    for child in node.children:
        name = child.name
        if name == "trak":
            trak_seen += 1
            name = f"trak{trak_seen}"
        path = prefix + (name,)
        base = "/".join(path)
        out.append(MetadataString(base, NODE_PRESENCE, path))
        for key, value in child.fields:
            value_text = format_field_value(value)
            out.append(
                MetadataString(
                    f"{base}/@{key}={value_text}", KEY_VALUE, path, key, value_text
                )
            )
        _emit_children(child, path, out)
