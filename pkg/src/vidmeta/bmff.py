"""ISO-BMFF (MP4/QuickTime) box-tree parser.

Parses a whole-file byte buffer into a tree of length-prefixed boxes,
tolerating the encodings and vendor quirks seen in real captures:
64-bit extended sizes, size-zero boxes that run to the end of their
scope, version-prefixed ``meta`` boxes, and declared sizes that overrun
the enclosing box.  Anomalies are recovered where possible and recorded
as (offset, message) warnings instead of aborting the parse, so that
every byte of the input is accounted for.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

from .strings import escape

# Boxes that contain other boxes and nothing else.  Everything not
# listed here is a leaf whose payload is kept verbatim; `meta` is
# decided by context (see is_container).
CONTAINER_NAMES = frozenset(
    {
        "moov",
        "trak",
        "mdia",
        "minf",
        "stbl",
        "dinf",
        "edts",
        "udta",
        "mvex",
        "moof",
        "traf",
        "ilst",
        "dref",
    }
)

# `dref` is a container but carries version/flags plus an entry count
# before its first child; those bytes are skipped and booked as padding.
_CONTAINER_PREAMBLE = {"dref": 8}

# Names a file may legitimately start with.  Anything else is not a
# video container as far as this parser is concerned.
TOP_LEVEL_NAMES = frozenset(
    {
        "ftyp",
        "styp",
        "moov",
        "moof",
        "mdat",
        "free",
        "skip",
        "wide",
        "uuid",
        "meta",
        "mfra",
        "sidx",
        "ssix",
        "prft",
        "emsg",
        "pnot",
        "junk",
    }
)

MAX_DEPTH = 64


class ParseError(ValueError):
    """Base class for unrecoverable parse failures."""


class TruncatedHeader(ParseError):
    """Fewer bytes remain than a box header needs."""


class NotIsoBmff(ParseError):
    """The buffer does not start with a recognized top-level box."""


class Role(enum.Enum):
    CONTAINER = "container"
    LEAF = "leaf"
    META_VARIANT = "meta-variant"


@dataclass(frozen=True)
class BoxHeader:
    """Size/name prefix of one box.

    ``size`` covers the whole box including the header.  ``name`` is the
    4-byte identifier rendered as escaped text; ``raw_name`` keeps the
    original bytes.  ``header_len`` is 8 for the plain form, 16 when a
    64-bit extended size follows, and 12 for the version-prefixed
    ``meta`` variant.
    """

    size: int
    name: str
    header_len: int
    raw_name: bytes


@dataclass
class BoxNode:
    """One parsed box: header, location, and children or payload."""

    header: BoxHeader
    path: tuple[str, ...]
    offset: int
    children: list["BoxNode"] = field(default_factory=list)
    payload: bytes | None = None
    # Bytes inside the box not covered by the header, children, or
    # payload (container preambles, stray trailing bytes).
    padding: int = 0

    @property
    def name(self) -> str:
        return self.header.name

    @property
    def size(self) -> int:
        return self.header.size


@dataclass
class ParseReport:
    """Top-level boxes plus any recovery warnings, offsets included."""

    tree: list[BoxNode]
    warnings: list[tuple[int, str]] = field(default_factory=list)


def parse_header(data: bytes, offset: int = 0, scope_end: int | None = None) -> BoxHeader:
    """Read one box header at ``offset``.

    A size field of 1 pulls in a 64-bit extended size; a size field of
    0 means the box runs to the end of the enclosing scope
    (``scope_end``, defaulting to the end of the buffer).
    """
    if scope_end is None:
        scope_end = len(data)
    if offset + 8 > scope_end:
        raise TruncatedHeader(
            f"need 8 header bytes at offset {offset}, have {scope_end - offset}"
        )
    size32 = int.from_bytes(data[offset : offset + 4], "big")
    raw_name = bytes(data[offset + 4 : offset + 8])
    if size32 == 1:
        if offset + 16 > scope_end:
            raise TruncatedHeader(
                f"need 16 bytes for extended size at offset {offset}, "
                f"have {scope_end - offset}"
            )
        size = int.from_bytes(data[offset + 8 : offset + 16], "big")
        header_len = 16
    elif size32 == 0:
        size = scope_end - offset
        header_len = 8
    else:
        size = size32
        header_len = 8
    return BoxHeader(size=size, name=escape(raw_name), header_len=header_len, raw_name=raw_name)


def is_container(name: str, parent_path: Sequence[str]) -> Role:
    """Decide how a box's body is parsed, given its ancestors.

    ``meta`` is the awkward one: under ``udta`` or ``trak`` it carries
    four version/flags bytes before its first child (META_VARIANT),
    directly under ``moov`` it is a plain container, anywhere else it is
    left as a leaf.
    """
    if name == "meta":
        parent = parent_path[-1] if parent_path else None
        if parent in ("udta", "trak"):
            return Role.META_VARIANT
        if parent == "moov":
            return Role.CONTAINER
        return Role.LEAF
    if name in CONTAINER_NAMES:
        return Role.CONTAINER
    return Role.LEAF


def parse_tree(data: bytes) -> ParseReport:
    """Parse a whole buffer into its box tree.

    Raises :class:`NotIsoBmff` when the first box name is not an
    accepted top-level name.  All other anomalies are recovered and
    recorded as warnings; the sum of top-level box sizes plus warned
    skip spans always equals the buffer length.
    """
    if len(data) < 8:
        raise NotIsoBmff(f"buffer of {len(data)} bytes cannot hold a box header")
    first = parse_header(data, 0)
    if first.name not in TOP_LEVEL_NAMES:
        raise NotIsoBmff(f"first box {first.name!r} is not a known top-level box")
    warnings: list[tuple[int, str]] = []
    nodes, _skipped = _parse_scope(data, 0, len(data), (), warnings, 0)
    return ParseReport(tree=nodes, warnings=warnings)


def _probe_child(data: bytes, start: int, end: int) -> bool:
    """True when ``start`` plausibly begins a box that fits in the scope."""
    n = end - start
    if n == 0:
        return True  # an empty scope simply has no children
    if n < 8:
        return False
    size32 = int.from_bytes(data[start : start + 4], "big")
    if size32 == 0:
        return True
    if size32 == 1:
        if n < 16:
            return False
        size = int.from_bytes(data[start + 8 : start + 16], "big")
        return 16 <= size <= n
    return 8 <= size32 <= n


def _parse_scope(
    data: bytes,
    start: int,
    end: int,
    path: tuple[str, ...],
    warnings: list[tuple[int, str]],
    depth: int,
) -> tuple[list[BoxNode], int]:
    """Parse sibling boxes in [start, end); returns (nodes, skipped bytes)."""
    nodes: list[BoxNode] = []
    skipped = 0
    off = start
    while off < end:
        remain = end - off
        if remain < 8:
            warnings.append((off, f"{remain} stray byte(s) at end of scope skipped"))
            skipped += remain
            break
        try:
            header = parse_header(data, off, scope_end=end)
        except TruncatedHeader as exc:
            warnings.append((off, f"{exc}; rest of scope skipped"))
            skipped += remain
            break
        size = header.size
        if size < header.header_len:
            warnings.append(
                (
                    off,
                    f"box {header.name!r} declares size {size} smaller than its "
                    f"header; rest of scope skipped",
                )
            )
            skipped += remain
            break
        if size > remain:
            warnings.append(
                (
                    off,
                    f"box {header.name!r} declares size {size} but only {remain} "
                    f"bytes remain; clamped",
                )
            )
            size = remain
            header = replace(header, size=size)
        nodes.append(_parse_box(data, off, header, path, warnings, depth))
        off += size
    return nodes, skipped


def _parse_box(
    data: bytes,
    offset: int,
    header: BoxHeader,
    path: tuple[str, ...],
    warnings: list[tuple[int, str]],
    depth: int,
) -> BoxNode:
    body_start = offset + header.header_len
    body_end = offset + header.size
    if depth >= MAX_DEPTH:
        warnings.append(
            (offset, f"nesting deeper than {MAX_DEPTH}; {header.name!r} kept as leaf")
        )
        role = Role.LEAF
    else:
        role = is_container(header.name, path)

    if role is Role.META_VARIANT:
        body_len = body_end - body_start
        if body_len >= 4 and _probe_child(data, body_start + 4, body_end):
            # Version/flags prefix present: account for it as header.
            if header.header_len == 8:
                header = replace(header, header_len=12)
                body_start += 4
            else:  # 64-bit size; keep header_len 16, book prefix as padding
                body_start += 4
                node_padding = 4
                children, skipped = _parse_scope(
                    data, body_start, body_end, path + (header.name,), warnings, depth + 1
                )
                return BoxNode(
                    header=header,
                    path=path,
                    offset=offset,
                    children=children,
                    padding=node_padding + skipped,
                )
            role = Role.CONTAINER
        elif _probe_child(data, body_start, body_end):
            warnings.append(
                (offset, "meta box without version prefix; parsed as plain container")
            )
            role = Role.CONTAINER
        else:
            warnings.append((offset, "meta box children unparseable; kept as leaf"))
            role = Role.LEAF

    if role is Role.LEAF:
        return BoxNode(
            header=header,
            path=path,
            offset=offset,
            payload=bytes(data[body_start:body_end]),
        )

    padding = 0
    preamble = _CONTAINER_PREAMBLE.get(header.name, 0)
    if preamble:
        take = min(preamble, body_end - body_start)
        body_start += take
        padding += take
    children, skipped = _parse_scope(
        data, body_start, body_end, path + (header.name,), warnings, depth + 1
    )
    return BoxNode(
        header=header,
        path=path,
        offset=offset,
        children=children,
        padding=padding + skipped,
    )
