"""Canonical string grammar: escaping, parsing, serialization."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vidmeta.refine import FieldValue, MetadataNode
from vidmeta.strings import (
    KEY_VALUE,
    NODE_PRESENCE,
    MalformedMetadataString,
    MetadataString,
    escape,
    format_field_value,
    parse_string,
    serialize,
    unescape,
)


class TestEscape:
    def test_plain_ascii_passes_through(self):
        assert escape(b"moov") == "moov"
        assert escape("VideoHandler") == "VideoHandler"

    def test_high_byte_becomes_uppercase_hex(self):
        assert escape(b"\xa9mod") == "\\xA9mod"

    def test_separators_are_escaped(self):
        assert escape(b"a/b") == "a\\x2Fb"
        assert escape(b"k@v") == "k\\x40v"
        assert escape(b"x=y") == "x\\x3Dy"

    def test_backslash_doubles(self):
        assert escape(b"back\\slash") == "back\\\\slash"

    def test_control_and_nul_bytes(self):
        assert escape(b"\x00\x09&\x81iPhone 5c") == "\\x00\\x09&\\x81iPhone 5c"

    def test_empty(self):
        assert escape(b"") == ""

    @given(st.binary(max_size=200))
    def test_round_trip(self, data):
        assert unescape(escape(data)) == data

    @given(st.binary(max_size=200))
    def test_output_charset(self, data):
        text = escape(data)
        for ch in text:
            assert 0x20 <= ord(ch) <= 0x7E
        for sep in "/@=":
            assert sep not in text

    @given(st.binary(max_size=64), st.binary(max_size=64))
    def test_injective(self, a, b):
        if a != b:
            assert escape(a) != escape(b)


class TestUnescape:
    @pytest.mark.parametrize(
        "bad",
        [
            "\\xa9",  # lowercase hex is not escaper output
            "\\xZ1",
            "\\q",
            "trailing\\",
            "trailing\\x4",
            "a/b",  # raw separator
            "a@b",
            "a=b",
            "café",  # non-ASCII raw character
            "tab\there",
        ],
    )
    def test_rejects_non_canonical(self, bad):
        with pytest.raises(MalformedMetadataString):
            unescape(bad)

    def test_accepts_escaped_forms(self):
        assert unescape("\\\\") == b"\\"
        assert unescape("\\x00") == b"\x00"
        assert unescape("\\x7F") == b"\x7f"


class TestParseString:
    def test_node_presence(self):
        ms = parse_string("moov/mvhd")
        assert ms.category == NODE_PRESENCE
        assert ms.path == ("moov", "mvhd")
        assert ms.key is None and ms.value_text is None
        assert ms.text == "moov/mvhd"

    def test_single_component(self):
        ms = parse_string("ftyp")
        assert ms.category == NODE_PRESENCE
        assert ms.path == ("ftyp",)

    def test_key_value(self):
        ms = parse_string("moov/mvhd/@duration=1546737")
        assert ms.category == KEY_VALUE
        assert ms.path == ("moov", "mvhd")
        assert ms.key == "duration"
        assert ms.value_text == "1546737"

    def test_value_may_be_empty(self):
        ms = parse_string("moov/udta/@name=")
        assert ms.category == KEY_VALUE
        assert ms.value_text == ""

    def test_escaped_value_survives(self):
        text = "moov/udta/@\\xA9mod=\\x00\\x09&\\x81iPhone 5c"
        ms = parse_string(text)
        assert ms.key == "\\xA9mod"
        assert unescape(ms.value_text) == b"\x00\x09&\x81iPhone 5c"

    @pytest.mark.parametrize(
        "bad",
        [
            "",
            "moov//mvhd",  # empty component
            "/moov",
            "moov/",
            "moov/@=value",  # empty key
            "moov/@keyonly",  # marker without '='
            "moov@key=1",  # '@' without '/@' marker
            "key=value",  # '=' without marker
            "moov/mvhd/@kéy=1",  # non-ASCII
            "moov/\\xa9nam",  # lowercase hex escape
        ],
    )
    def test_rejects_malformed(self, bad):
        with pytest.raises(MalformedMetadataString):
            parse_string(bad)

    @given(
        st.lists(st.binary(min_size=1, max_size=12), min_size=1, max_size=5),
        st.binary(min_size=1, max_size=12),
        st.binary(max_size=20),
    )
    def test_round_trip_structured(self, path_parts, key, value):
        path_text = "/".join(escape(p) for p in path_parts)
        text = f"{path_text}/@{escape(key)}={escape(value)}"
        ms = parse_string(text)
        assert ms.category == KEY_VALUE
        assert tuple(unescape(p) for p in ms.path) == tuple(path_parts)
        assert unescape(ms.key) == key
        assert unescape(ms.value_text) == value
        assert ms.text == text


class TestFormatFieldValue:
    def test_integer(self):
        assert format_field_value(FieldValue.integer(1546737, b"")) == "1546737"

    def test_decimal_keeps_point(self):
        assert format_field_value(FieldValue.decimal(600.0, b"")) == "600.0"
        assert format_field_value(FieldValue.decimal(1.5, b"")) == "1.5"

    def test_text_is_escaped(self):
        assert format_field_value(FieldValue.text("a/b")) == "a\\x2Fb"

    def test_raw_bytes_are_escaped(self):
        fv = FieldValue.raw_bytes(b"\x00\x09&\x81iPhone 5c")
        assert format_field_value(fv) == "\\x00\\x09&\\x81iPhone 5c"


def _node(path, fields=(), children=()):
    return MetadataNode(path=tuple(path), fields=list(fields), children=list(children))


class TestSerialize:
    def test_presence_then_fields_then_children(self):
        mvhd = _node(
            ("moov", "mvhd"),
            fields=[
                ("duration", FieldValue.integer(1546737, b"")),
                ("rate", FieldValue.decimal(1.0, b"")),
            ],
        )
        moov = _node(("moov",), children=[mvhd])
        root = _node((), children=[moov])
        texts = [ms.text for ms in serialize(root)]
        assert texts == [
            "moov",
            "moov/mvhd",
            "moov/mvhd/@duration=1546737",
            "moov/mvhd/@rate=1.0",
        ]

    def test_traks_are_numbered_in_order(self):
        t1 = _node(("moov", "trak"), children=[_node(("moov", "trak", "tkhd"))])
        t2 = _node(("moov", "trak"), children=[_node(("moov", "trak", "tkhd"))])
        moov = _node(("moov",), children=[t1, t2])
        root = _node((), children=[moov])
        texts = [ms.text for ms in serialize(root)]
        assert texts == [
            "moov",
            "moov/trak1",
            "moov/trak1/tkhd",
            "moov/trak2",
            "moov/trak2/tkhd",
        ]

    def test_trak_counter_is_per_parent(self):
        inner = _node(("moof", "trak"))
        moof = _node(("moof",), children=[inner])
        moov = _node(("moov",), children=[_node(("moov", "trak"))])
        root = _node((), children=[moov, moof])
        texts = [ms.text for ms in serialize(root)]
        assert "moov/trak1" in texts
        assert "moof/trak1" in texts

    def test_other_repeats_are_not_numbered(self):
        moov = _node(("moov",), children=[_node(("moov", "free")), _node(("moov", "free"))])
        root = _node((), children=[moov])
        texts = [ms.text for ms in serialize(root)]
        assert texts.count("moov/free") == 2

    def test_every_emitted_string_reparses(self):
        udta = _node(
            ("moov", "udta"),
            fields=[("\\xA9mod", FieldValue.raw_bytes(b"\x00\x09&\x81iPhone 5c"))],
        )
        moov = _node(("moov",), children=[udta])
        root = _node((), children=[moov])
        for ms in serialize(root):
            again = parse_string(ms.text)
            assert again.text == ms.text
            assert again.category == ms.category
            assert again.path == ms.path

    def test_field_key_already_escaped_text(self):
        udta = _node(
            ("moov", "udta"),
            fields=[("\\xA9mod", FieldValue.raw_bytes(b"\x00\x09&\x81iPhone 5c"))],
        )
        root = _node((), children=[_node(("moov",), children=[udta])])
        texts = [ms.text for ms in serialize(root)]
        assert "moov/udta/@\\xA9mod=\\x00\\x09&\\x81iPhone 5c" in texts

    def test_result_objects_carry_parts(self):
        moov = _node(("moov",), fields=[("k", FieldValue.text("v"))])
        root = _node((), children=[moov])
        strings = serialize(root)
        assert strings[0] == MetadataString("moov", NODE_PRESENCE, ("moov",))
        kv = strings[1]
        assert kv.category == KEY_VALUE
        assert kv.path == ("moov",)
        assert (kv.key, kv.value_text) == ("k", "v")
