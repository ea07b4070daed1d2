"""Refine a raw box tree into a metadata tree of named fields.

Standard leaf boxes are decoded into (key, value) fields laid out the
way the container format defines them; vendor tag atoms (the 0xA9-key
family) are pulled out of their three habitats (an ``ilst`` box, an
``ilst`` inside ``meta``, or bare keys sitting directly in ``udta``);
XML payloads (XMP and friends) are flattened to key-value pairs; and
everything unrecognized is kept as a raw-bytes field so no signal is
silently dropped.  Bulk media data and sample tables are excluded --
they describe the picture, not the producer.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable
from xml.etree import ElementTree

from .bmff import BoxNode, ParseReport
from .strings import escape

log = logging.getLogger(__name__)


class XmlNotWellFormed(ValueError):
    """Payload advertised as XML does not parse."""


@dataclass(frozen=True)
class FieldValue:
    """One decoded field value plus the bytes it came from.

    ``kind`` is one of integer, decimal, text, raw-bytes.  ``raw`` keeps
    the original byte span so values can be re-rendered bit-exactly.
    """

    kind: str
    value: int | float | str | bytes
    raw: bytes

    @staticmethod
    def integer(value: int, raw: bytes) -> "FieldValue":
        return FieldValue("integer", int(value), raw)

    @staticmethod
    def decimal(value: float, raw: bytes) -> "FieldValue":
        return FieldValue("decimal", float(value), raw)

    @staticmethod
    def text(value: str, raw: bytes | None = None) -> "FieldValue":
        return FieldValue("text", value, value.encode("utf-8") if raw is None else raw)

    @staticmethod
    def raw_bytes(raw: bytes) -> "FieldValue":
        return FieldValue("raw-bytes", raw, raw)


@dataclass
class MetadataNode:
    """A box in field form: path, ordered unique fields, children."""

    path: tuple[str, ...]
    fields: list[tuple[str, FieldValue]] = field(default_factory=list)
    children: list["MetadataNode"] = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.path[-1] if self.path else ""

    def get(self, key: str) -> FieldValue | None:
        for k, v in self.fields:
            if k == key:
                return v
        return None


@dataclass(frozen=True)
class ExclusionList:
    """What to leave out of the metadata tree.

    ``node_paths`` are slash-joined component patterns matched against
    the end of a node's path, whole components only ("mdat" hits every
    mdat box, "moov/udta" any udta directly under moov); matches drop
    the whole subtree.  ``field_keys`` drop individual fields by exact
    key text wherever they occur.
    """

    node_paths: frozenset[str] = frozenset()
    field_keys: frozenset[str] = frozenset()

    def matches_path(self, path: tuple[str, ...]) -> bool:
        for pattern in self.node_paths:
            parts = tuple(pattern.split("/"))
            if len(parts) <= len(path) and path[len(path) - len(parts) :] == parts:
                return True
        return False


#: Media payloads carry picture data, not authorship traces.
DEFAULT_EXCLUSIONS = ExclusionList(node_paths=frozenset({"mdat"}))


# ---------------------------------------------------------------------------
# standard box decoders


class _ShortPayload(ValueError):
    pass


class _Reader:
    """Big-endian field reader that remembers raw spans."""

    __slots__ = ("data", "pos")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise _ShortPayload(
                f"need {n} bytes at offset {self.pos}, have {len(self.data) - self.pos}"
            )
        span = self.data[self.pos : self.pos + n]
        self.pos += n
        return span

    def skip(self, n: int) -> None:
        self.take(n)

    def uint(self, n: int) -> int:
        return int.from_bytes(self.take(n), "big")

    def int_field(self, n: int, signed: bool = False) -> FieldValue:
        raw = self.take(n)
        return FieldValue.integer(int.from_bytes(raw, "big", signed=signed), raw)

    def fixed_field(self, n: int, frac_bits: int, signed: bool = False) -> FieldValue:
        raw = self.take(n)
        value = int.from_bytes(raw, "big", signed=signed) / (1 << frac_bits)
        return FieldValue.decimal(value, raw)

    def fourcc_field(self) -> FieldValue:
        raw = self.take(4)
        try:
            return FieldValue.text(raw.decode("ascii"), raw)
        except UnicodeDecodeError:
            return FieldValue.raw_bytes(raw)

    def rest(self) -> bytes:
        span = self.data[self.pos :]
        self.pos = len(self.data)
        return span


Fields = list[tuple[str, FieldValue]]
Decoder = Callable[[bytes], Fields]


def _full_header(r: _Reader) -> Fields:
    return [("version", r.int_field(1)), ("flags", r.int_field(3))]


def _text_or_raw(raw: bytes) -> FieldValue:
    try:
        return FieldValue.text(raw.decode("utf-8"), raw)
    except UnicodeDecodeError:
        return FieldValue.raw_bytes(raw)


def _decode_ftyp(p: bytes) -> Fields:
    r = _Reader(p)
    out = [("major_brand", _text_or_raw(r.take(4))), ("minor_version", r.int_field(4))]
    compat = r.rest()
    if compat:
        out.append(("compatible_brands", _text_or_raw(compat)))
    return out


def _decode_mvhd(p: bytes) -> Fields:
    r = _Reader(p)
    out = _full_header(r)
    wide = out[0][1].value == 1
    out.append(("creation_time", r.int_field(8 if wide else 4)))
    out.append(("modification_time", r.int_field(8 if wide else 4)))
    out.append(("timescale", r.int_field(4)))
    out.append(("duration", r.int_field(8 if wide else 4)))
    out.append(("rate", r.fixed_field(4, 16, signed=True)))
    out.append(("volume", r.fixed_field(2, 8, signed=True)))
    r.skip(2 + 4 + 4)  # reserved
    r.skip(36)  # matrix
    r.skip(24)  # pre_defined
    out.append(("next_track_ID", r.int_field(4)))
    return out


def _decode_tkhd(p: bytes) -> Fields:
    r = _Reader(p)
    out = _full_header(r)
    wide = out[0][1].value == 1
    out.append(("creation_time", r.int_field(8 if wide else 4)))
    out.append(("modification_time", r.int_field(8 if wide else 4)))
    out.append(("track_ID", r.int_field(4)))
    r.skip(4)  # reserved
    out.append(("duration", r.int_field(8 if wide else 4)))
    r.skip(8)  # reserved
    out.append(("layer", r.int_field(2, signed=True)))
    out.append(("alternate_group", r.int_field(2, signed=True)))
    out.append(("volume", r.fixed_field(2, 8, signed=True)))
    r.skip(2)  # reserved
    r.skip(36)  # matrix
    out.append(("width", r.fixed_field(4, 16)))
    out.append(("height", r.fixed_field(4, 16)))
    return out


def _language_field(raw: bytes) -> FieldValue:
    packed = int.from_bytes(raw, "big") & 0x7FFF
    chars = "".join(chr(((packed >> shift) & 0x1F) + 0x60) for shift in (10, 5, 0))
    return FieldValue.text(chars, raw)


def _decode_mdhd(p: bytes) -> Fields:
    r = _Reader(p)
    out = _full_header(r)
    wide = out[0][1].value == 1
    out.append(("creation_time", r.int_field(8 if wide else 4)))
    out.append(("modification_time", r.int_field(8 if wide else 4)))
    out.append(("timescale", r.int_field(4)))
    out.append(("duration", r.int_field(8 if wide else 4)))
    out.append(("language", _language_field(r.take(2))))
    return out


def _decode_hdlr(p: bytes) -> Fields:
    r = _Reader(p)
    out = _full_header(r)
    r.skip(4)  # pre_defined / component type
    out.append(("handler_type", r.fourcc_field()))
    r.skip(12)  # reserved / component manufacturer+flags
    name = r.rest().rstrip(b"\x00")
    # QuickTime writes a Pascal-style count byte in front of the name.
    if name and name[0] == len(name) - 1:
        name = name[1:]
    if name:
        out.append(("name", _text_or_raw(name)))
    return out


def _decode_vmhd(p: bytes) -> Fields:
    r = _Reader(p)
    out = _full_header(r)
    out.append(("graphicsmode", r.int_field(2)))
    return out


def _decode_smhd(p: bytes) -> Fields:
    r = _Reader(p)
    out = _full_header(r)
    out.append(("balance", r.fixed_field(2, 8, signed=True)))
    return out


def _decode_stsd(p: bytes) -> Fields:
    r = _Reader(p)
    out = _full_header(r)
    count = r.int_field(4)
    out.append(("entry_count", count))
    for _ in range(count.value):
        start = r.pos
        size = r.uint(4)
        out.append(("entry_format", r.fourcc_field()))
        if size < 8 or start + size > len(p):
            break
        r.pos = start + size
    return out


def _decode_counted(p: bytes) -> Fields:
    r = _Reader(p)
    out = _full_header(r)
    out.append(("entry_count", r.int_field(4)))
    return out


def _decode_stsz(p: bytes) -> Fields:
    r = _Reader(p)
    out = _full_header(r)
    out.append(("sample_size", r.int_field(4)))
    out.append(("sample_count", r.int_field(4)))
    return out


def _decode_fullbox(p: bytes) -> Fields:
    r = _Reader(p)
    return _full_header(r)


def _decode_nothing(p: bytes) -> Fields:
    # Filler boxes: their presence is signal, their padding bytes are not.
    return []


_DECODERS: dict[str, Decoder] = {
    "ftyp": _decode_ftyp,
    "styp": _decode_ftyp,
    "mvhd": _decode_mvhd,
    "tkhd": _decode_tkhd,
    "mdhd": _decode_mdhd,
    "hdlr": _decode_hdlr,
    "vmhd": _decode_vmhd,
    "smhd": _decode_smhd,
    "stsd": _decode_stsd,
    "stts": _decode_counted,
    "ctts": _decode_counted,
    "stss": _decode_counted,
    "stsc": _decode_counted,
    "stco": _decode_counted,
    "co64": _decode_counted,
    "elst": _decode_counted,
    "stsz": _decode_stsz,
    "url ": _decode_fullbox,
    "urn ": _decode_fullbox,
    "free": _decode_nothing,
    "skip": _decode_nothing,
}


# ---------------------------------------------------------------------------
# vendor tag atoms

# Tag atoms that do not carry the 0xA9 prefix but follow the same
# data-atom layout inside an ilst box.
KNOWN_TAG_KEYS = frozenset(
    {
        b"covr",
        b"cprt",
        b"trkn",
        b"disk",
        b"gnre",
        b"tmpo",
        b"cpil",
        b"aART",
        b"desc",
        b"keyw",
        b"purd",
        b"apID",
        b"cnID",
        b"stik",
        b"hdvd",
        b"pcst",
        b"catg",
        b"soal",
        b"sonm",
        b"----",
    }
)


def _is_tag_entry(raw_name: bytes) -> bool:
    return raw_name[:1] == b"\xa9" or raw_name in KNOWN_TAG_KEYS


def _data_atom_value(payload: bytes) -> FieldValue | None:
    """Pull the value out of an entry's ``data`` child atom.

    The data atom carries a 4-byte type indicator and a 4-byte locale
    before the value proper; both are skipped.  Returns None when the
    layout is broken.  If several data atoms appear the last one wins.
    """
    found: FieldValue | None = None
    pos = 0
    n = len(payload)
    while pos + 8 <= n:
        size = int.from_bytes(payload[pos : pos + 4], "big")
        name = payload[pos + 4 : pos + 8]
        if size < 8 or pos + size > n:
            return None
        if name == b"data":
            if size < 16:
                return None
            value = payload[pos + 16 : pos + size]
            found = _text_or_raw(value)
        pos += size
    return found


def parse_ilst(node: BoxNode, placement: str = "standard") -> Fields:
    """Extract tag entries from an ilst box or a bare-keys udta.

    ``placement`` is "standard" or "in-meta" for data-atom entries, or
    "direct-in-udta" for old-style bare keys whose whole payload (a
    2-byte length, 2-byte language code, then the value) is kept as raw
    bytes.  Malformed entries are skipped with a logged warning.
    """
    pairs: Fields = []
    for child in node.children:
        raw_name = child.header.raw_name
        if not _is_tag_entry(raw_name):
            continue
        payload = child.payload if child.payload is not None else b""
        if placement == "direct-in-udta":
            pairs.append((child.name, FieldValue.raw_bytes(payload)))
            continue
        value = _data_atom_value(payload)
        if value is None:
            log.warning("malformed tag entry %s skipped", child.name)
            continue
        pairs.append((child.name, value))
    return pairs


# ---------------------------------------------------------------------------
# XML flattening

_XML_WS = b" \t\r\n"


def _looks_like_xml(payload: bytes) -> bool:
    stripped = payload.lstrip(_XML_WS)
    if stripped.startswith(b"\xef\xbb\xbf"):
        stripped = stripped[3:].lstrip(_XML_WS)
    return stripped.startswith(b"<")


def _local_name(tag: str) -> str:
    if "}" in tag:
        return tag.rsplit("}", 1)[1]
    if ":" in tag:
        return tag.rsplit(":", 1)[1]
    return tag


def flatten_xml(payload: bytes) -> Fields:
    """Flatten an XML document to (local name, text) pairs.

    Depth-first over elements and attributes; namespace prefixes are
    dropped; when the same local name appears more than once the newest
    value wins.  Raises :class:`XmlNotWellFormed` when the payload does
    not parse.
    """
    stripped = payload.lstrip(_XML_WS)
    if stripped.startswith(b"\xef\xbb\xbf"):
        stripped = stripped[3:].lstrip(_XML_WS)
    if not stripped.startswith(b"<"):
        raise XmlNotWellFormed("payload does not start with '<'")
    try:
        root = ElementTree.fromstring(stripped.decode("utf-8", errors="strict"))
    except (ElementTree.ParseError, UnicodeDecodeError) as exc:
        raise XmlNotWellFormed(str(exc)) from exc
    merged: dict[str, FieldValue] = {}

    def visit(elem) -> None:
        text = (elem.text or "").strip()
        merged[escape(_local_name(elem.tag))] = FieldValue.text(text)
        for attr_name, attr_value in elem.attrib.items():
            merged[escape(_local_name(attr_name))] = FieldValue.text(attr_value)
        for child in elem:
            visit(child)

    visit(root)
    return list(merged.items())


def refine_uuid(node: BoxNode) -> MetadataNode:
    """Split a uuid box into its 16-byte identity plus its body.

    The identity is kept as lowercase hex; an XML body (XMP, typically)
    is flattened, anything else is kept raw.
    """
    payload = node.payload if node.payload is not None else b""
    fields: Fields = []
    if len(payload) >= 16:
        ident, rest = payload[:16], payload[16:]
        fields.append(("uuid", FieldValue.text(ident.hex(), ident)))
        if rest:
            if _looks_like_xml(rest):
                try:
                    fields.extend(flatten_xml(rest))
                except XmlNotWellFormed as exc:
                    log.warning("uuid XML body unparseable (%s); kept raw", exc)
                    fields.append(("data", FieldValue.raw_bytes(rest)))
            else:
                fields.append(("data", FieldValue.raw_bytes(rest)))
    elif payload:
        log.warning("uuid box with %d-byte payload kept raw", len(payload))
        fields.append(("data", FieldValue.raw_bytes(payload)))
    return MetadataNode(path=node.path + (node.name,), fields=fields)


# ---------------------------------------------------------------------------
# tree refinement


def _merge_fields(pairs: Iterable[tuple[str, FieldValue]]) -> Fields:
    merged: dict[str, FieldValue] = {}
    for key, value in pairs:
        merged[key] = value
    return list(merged.items())


def refine(
    report: ParseReport | list[BoxNode],
    exclusions: ExclusionList = DEFAULT_EXCLUSIONS,
) -> MetadataNode:
    """Build the metadata tree for a parsed box tree.

    Returns a synthetic root (empty path) whose children mirror the box
    tree minus excluded nodes.
    """
    boxes = report.tree if isinstance(report, ParseReport) else report
    root = MetadataNode(path=())
    for box in boxes:
        child = _refine_box(box, exclusions)
        if child is not None:
            root.children.append(child)
    return root


def _refine_box(box: BoxNode, exclusions: ExclusionList) -> MetadataNode | None:
    path = box.path + (box.name,)
    if exclusions.matches_path(path):
        return None

    if box.payload is None:
        node = MetadataNode(path=path)
        absorbed: set[int] = set()
        pairs: Fields = []
        if box.name == "ilst":
            placement = "in-meta" if box.path and box.path[-1] == "meta" else "standard"
            pairs = parse_ilst(box, placement)
            absorbed = {id(c) for c in box.children if _is_tag_entry(c.header.raw_name)}
        elif box.name == "udta":
            pairs = parse_ilst(box, "direct-in-udta")
            absorbed = {id(c) for c in box.children if _is_tag_entry(c.header.raw_name)}
        node.fields = _apply_key_exclusions(_merge_fields(pairs), exclusions)
        for child in box.children:
            if id(child) in absorbed:
                continue
            refined = _refine_box(child, exclusions)
            if refined is not None:
                node.children.append(refined)
        return node

    if box.name == "uuid":
        node = refine_uuid(box)
        node.fields = _apply_key_exclusions(node.fields, exclusions)
        return node

    payload = box.payload
    decoder = _DECODERS.get(box.name)
    pairs = []
    if decoder is not None:
        try:
            pairs = decoder(payload)
        except _ShortPayload as exc:
            log.warning("%s payload too short (%s); kept raw", box.name, exc)
            pairs = [("data", FieldValue.raw_bytes(payload))] if payload else []
    elif _looks_like_xml(payload):
        try:
            pairs = flatten_xml(payload)
        except XmlNotWellFormed as exc:
            log.warning("%s XML payload unparseable (%s); kept raw", box.name, exc)
            pairs = [("data", FieldValue.raw_bytes(payload))]
    elif payload:
        pairs = [("data", FieldValue.raw_bytes(payload))]
    return MetadataNode(
        path=path, fields=_apply_key_exclusions(_merge_fields(pairs), exclusions)
    )


def _apply_key_exclusions(fields: Fields, exclusions: ExclusionList) -> Fields:
    if not exclusions.field_keys:
        return fields
    return [(k, v) for k, v in fields if k not in exclusions.field_keys]
