"""Byte-level writers that build MP4/MOV fixtures for the tests.

Everything here is independent of the package under test: sizes and
layouts are written straight from struct packing, so these builders
serve as the oracle side of parser round-trip checks.
"""

from __future__ import annotations

import struct

import numpy as np

# --- primitive packers -----------------------------------------------------


def u8(v: int) -> bytes:
    return struct.pack(">B", v)


def u16(v: int) -> bytes:
    return struct.pack(">H", v)


def s16(v: int) -> bytes:
    return struct.pack(">h", v)


def u32(v: int) -> bytes:
    return struct.pack(">I", v)


def s32(v: int) -> bytes:
    return struct.pack(">i", v)


def u64(v: int) -> bytes:
    return struct.pack(">Q", v)


def fourcc(name) -> bytes:
    raw = name.encode("latin-1") if isinstance(name, str) else bytes(name)
    if len(raw) != 4:
        raise ValueError(f"box name must be 4 bytes, got {raw!r}")
    return raw


def vflags(version: int = 0, flags: int = 0) -> bytes:
    return u8(version) + flags.to_bytes(3, "big")


IDENTITY_MATRIX = (
    u32(0x00010000) + u32(0) + u32(0)
    + u32(0) + u32(0x00010000) + u32(0)
    + u32(0) + u32(0) + u32(0x40000000)
)


# --- generic box writer ----------------------------------------------------


def box(name, *children: bytes, payload: bytes = b"", size64=False, size_zero=False) -> bytes:
    """One box: payload bytes first, then child boxes.

    size64 writes the 16-byte extended header; size_zero writes a size
    field of 0 (the box must then be the last one in its file).
    """
    body = payload + b"".join(children)
    raw = fourcc(name)
    if size_zero:
        return u32(0) + raw + body
    if size64:
        return u32(1) + raw + u64(16 + len(body)) + body
    return u32(8 + len(body)) + raw + body


# --- real-world box builders ----------------------------------------------


def ftyp(major=b"isom", minor=0x200, compat=(b"isom", b"mp41")) -> bytes:
    return box("ftyp", payload=fourcc(major) + u32(minor) + b"".join(fourcc(c) for c in compat))


def mvhd(timescale=600, duration=1000, creation=0, modification=0,
         rate=1.0, volume=1.0, next_track_id=2, version=0) -> bytes:
    t = u64 if version else u32
    body = (
        vflags(version)
        + t(creation) + t(modification)
        + u32(timescale) + t(duration)
        + u32(int(round(rate * 65536))) + u16(int(round(volume * 256)))
        + b"\x00" * 2 + b"\x00" * 8
        + IDENTITY_MATRIX + b"\x00" * 24
        + u32(next_track_id)
    )
    return box("mvhd", payload=body)


def tkhd(track_id=1, duration=1000, width=1920.0, height=1080.0,
         creation=0, modification=0, layer=0, alternate_group=0,
         volume=0.0, version=0, flags=7) -> bytes:
    t = u64 if version else u32
    body = (
        vflags(version, flags)
        + t(creation) + t(modification)
        + u32(track_id) + b"\x00" * 4 + t(duration)
        + b"\x00" * 8
        + s16(layer) + s16(alternate_group)
        + u16(int(round(volume * 256))) + b"\x00" * 2
        + IDENTITY_MATRIX
        + u32(int(round(width * 65536))) + u32(int(round(height * 65536)))
    )
    return box("tkhd", payload=body)


def pack_language(code: str = "und") -> bytes:
    a, b, c = (ord(ch) - 0x60 for ch in code)
    return u16((a << 10) | (b << 5) | c)


def mdhd(timescale=600, duration=1000, language="und",
         creation=0, modification=0, version=0) -> bytes:
    t = u64 if version else u32
    body = (
        vflags(version)
        + t(creation) + t(modification)
        + u32(timescale) + t(duration)
        + pack_language(language) + b"\x00\x00"
    )
    return box("mdhd", payload=body)


def hdlr(handler=b"vide", name=b"VideoHandler", style="c") -> bytes:
    """style: 'c' NUL-terminated, 'pascal' count-byte prefixed, 'bare'."""
    if style == "c":
        name_bytes = name + b"\x00"
    elif style == "pascal":
        name_bytes = u8(len(name)) + name
    else:
        name_bytes = name
    body = vflags() + b"\x00" * 4 + fourcc(handler) + b"\x00" * 12 + name_bytes
    return box("hdlr", payload=body)


def vmhd(graphicsmode=0) -> bytes:
    return box("vmhd", payload=vflags(0, 1) + u16(graphicsmode) + b"\x00" * 6)


def smhd(balance=0) -> bytes:
    return box("smhd", payload=vflags() + s16(balance) + b"\x00" * 2)


def url_entry() -> bytes:
    return box("url ", payload=vflags(0, 1))


def dref(*entries: bytes) -> bytes:
    entries = entries or (url_entry(),)
    return box("dref", *entries, payload=vflags() + u32(len(entries)))


def dinf() -> bytes:
    return box("dinf", dref())


def sample_entry(fmt=b"avc1", extra=b"\x00" * 16) -> bytes:
    return box(fmt, payload=b"\x00" * 6 + u16(1) + extra)


def stsd(*entries: bytes) -> bytes:
    entries = entries or (sample_entry(),)
    return box("stsd", payload=vflags() + u32(len(entries)) + b"".join(entries))


def stts(entries=((1, 512),)) -> bytes:
    return box("stts", payload=vflags() + u32(len(entries))
               + b"".join(u32(c) + u32(d) for c, d in entries))


def ctts(entries=((1, 0),)) -> bytes:
    return box("ctts", payload=vflags() + u32(len(entries))
               + b"".join(u32(c) + u32(o) for c, o in entries))


def stss(samples=(1,)) -> bytes:
    return box("stss", payload=vflags() + u32(len(samples))
               + b"".join(u32(s) for s in samples))


def stsc(entries=((1, 1, 1),)) -> bytes:
    return box("stsc", payload=vflags() + u32(len(entries))
               + b"".join(u32(a) + u32(b) + u32(c) for a, b, c in entries))


def stco(offsets=(48,)) -> bytes:
    return box("stco", payload=vflags() + u32(len(offsets))
               + b"".join(u32(o) for o in offsets))


def co64(offsets=(48,)) -> bytes:
    return box("co64", payload=vflags() + u32(len(offsets))
               + b"".join(u64(o) for o in offsets))


def stsz(sample_size=0, sizes=(1024,)) -> bytes:
    body = vflags() + u32(sample_size) + u32(len(sizes))
    if sample_size == 0:
        body += b"".join(u32(s) for s in sizes)
    return box("stsz", payload=body)


def elst(entries=((1000, 0),), version=0) -> bytes:
    t, st = (u64, struct.Struct(">q").pack) if version else (u32, s32)
    body = vflags(version) + u32(len(entries))
    for duration, media_time in entries:
        body += t(duration) + st(media_time) + u16(1) + u16(0)
    return box("elst", payload=body)


def edts(*children: bytes) -> bytes:
    return box("edts", *(children or (elst(),)))


def free(data=b"") -> bytes:
    return box("free", payload=data)


def mdat(data=b"\x00" * 16, size64=False, size_zero=False) -> bytes:
    return box("mdat", payload=data, size64=size64, size_zero=size_zero)


# --- tagging metadata ------------------------------------------------------


def data_atom(value: bytes, type_code=1, locale=0) -> bytes:
    return box("data", payload=u32(type_code) + u32(locale) + value)


def ilst_entry(key, value: bytes, type_code=1) -> bytes:
    return box(key, data_atom(value, type_code))


def ilst(*entries: bytes) -> bytes:
    return box("ilst", *entries)


def meta_variant(*children: bytes) -> bytes:
    """The 4-byte version-prefixed flavor found under udta/trak."""
    return box("meta", *children, payload=b"\x00\x00\x00\x00")


def meta_plain(*children: bytes) -> bytes:
    return box("meta", *children)


def udta_tag(key, value: bytes, lang=0x55C4) -> bytes:
    """Tag entry placed directly in udta: 16-bit length, 16-bit language."""
    return box(key, payload=u16(len(value)) + u16(lang) + value)


XMP_UUID = bytes.fromhex("BE7ACFCB97A942E89C71999491E3AFAC")


def uuid_box(identity: bytes, body: bytes) -> bytes:
    if len(identity) != 16:
        raise ValueError("uuid identity must be 16 bytes")
    return box("uuid", payload=identity + body)


def xmp_uuid(xml: bytes) -> bytes:
    return uuid_box(XMP_UUID, xml)


# --- assembled movies ------------------------------------------------------


def video_trak(track_id=1, duration=1000, width=1920.0, height=1080.0,
               timescale=600, language="und", handler_name=b"VideoHandler",
               extra_children=()) -> bytes:
    return box(
        "trak",
        tkhd(track_id=track_id, duration=duration, width=width, height=height),
        box(
            "mdia",
            mdhd(timescale=timescale, duration=duration, language=language),
            hdlr(b"vide", handler_name),
            box(
                "minf",
                vmhd(),
                dinf(),
                box("stbl", stsd(sample_entry(b"avc1")), stts(), stsc(), stco(), stsz()),
            ),
        ),
        *extra_children,
    )


def sound_trak(track_id=2, duration=1000, timescale=44100, language="und",
               handler_name=b"SoundHandler") -> bytes:
    return box(
        "trak",
        tkhd(track_id=track_id, duration=duration, width=0.0, height=0.0, volume=1.0),
        box(
            "mdia",
            mdhd(timescale=timescale, duration=duration, language=language),
            hdlr(b"soun", handler_name),
            box(
                "minf",
                smhd(),
                dinf(),
                box("stbl", stsd(sample_entry(b"mp4a")), stts(), stsc(), stco(), stsz()),
            ),
        ),
    )


def minimal_movie(brand=b"isom", moov_children=(), media=b"\x00" * 32,
                  trailing=()) -> bytes:
    children = moov_children or (mvhd(), video_trak())
    return ftyp(brand) + box("moov", *children) + mdat(media) + b"".join(trailing)


# --- random structural trees (round-trip fixtures) -------------------------

# Leaf names stay away from container names and the context-dependent
# "meta"/"uuid" so that structure is determined by the writer alone.
LEAF_POOL = ("ab12", "cdef", "wxyz", "pq90", "left", "rght", "blob", "tail", "ntag", "xcor")
CONTAINER_POOL = ("moov", "trak", "mdia", "minf", "stbl", "udta", "edts", "mvex", "moof", "traf", "dinf")


def _leaf_spec(name, payload_len, *, header_len=8, size_zero=False, total=None):
    return {
        "name": name,
        "header_len": header_len,
        "payload_len": payload_len,
        "children": None,
        "size_zero": size_zero,
        "total": total,
    }


def _random_leaf(rng: np.random.Generator, name=None, *, top=False):
    if name is None:
        pool = LEAF_POOL + (("mdat", "free") if top else ())
        name = pool[int(rng.integers(len(pool)))]
    payload = rng.bytes(int(rng.integers(0, 49)))
    size64 = bool(rng.random() < 0.15)
    data = box(name, payload=payload, size64=size64)
    spec = _leaf_spec(name, len(payload), header_len=16 if size64 else 8, total=len(data))
    return data, spec


def _random_container(rng: np.random.Generator, name, depth, max_depth):
    n_children = int(rng.integers(0, 4))
    blobs, child_specs = [], []
    for _ in range(n_children):
        data, spec = _random_node(rng, depth + 1, max_depth)
        blobs.append(data)
        child_specs.append(spec)
    if name == "udta" and rng.random() < 0.5:
        inner, inner_spec = _random_leaf(rng)
        data = meta_variant(inner)
        blobs.append(data)
        child_specs.append({
            "name": "meta",
            "header_len": 12,
            "payload_len": None,
            "children": [inner_spec],
            "size_zero": False,
            "total": len(data),
        })
    size64 = bool(rng.random() < 0.1)
    data = box(name, *blobs, size64=size64)
    spec = {
        "name": name,
        "header_len": 16 if size64 else 8,
        "payload_len": None,
        "children": child_specs,
        "size_zero": False,
        "total": len(data),
    }
    return data, spec


def _random_node(rng: np.random.Generator, depth, max_depth, *, top=False):
    if depth >= max_depth or rng.random() < 0.45:
        return _random_leaf(rng, top=top)
    name = CONTAINER_POOL[int(rng.integers(len(CONTAINER_POOL)))]
    return _random_container(rng, name, depth, max_depth)


def random_file(rng: np.random.Generator, max_depth=6):
    """A structurally random container file plus its expected shape.

    Returns (data, specs): specs is a list of top-level node dicts with
    keys name/header_len/payload_len/children/size_zero/total that a
    parser's output can be walked against.
    """
    specs, blobs = [], []
    if rng.random() < 0.5:
        data, spec = _random_leaf(rng, "ftyp")
    else:
        data, spec = _random_container(rng, "moov", 1, max_depth)
    blobs.append(data)
    specs.append(spec)
    for _ in range(int(rng.integers(0, 4))):
        data, spec = _random_node(rng, 1, max_depth, top=True)
        blobs.append(data)
        specs.append(spec)
    if rng.random() < 0.25:
        payload = rng.bytes(int(rng.integers(0, 64)))
        data = box("mdat", payload=payload, size_zero=True)
        specs.append(_leaf_spec("mdat", len(payload), size_zero=True, total=len(data)))
        blobs.append(data)
    return b"".join(blobs), specs
