"""Box-tree parser: headers, nesting, variants, damage tolerance."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import mp4build as mb
from vidmeta import bmff


class TestParseHeader:
    def test_compact_header(self):
        header = bmff.parse_header(b"\x00\x00\x50\x2cmoov")
        assert header.size == 20524
        assert header.name == "moov"
        assert header.header_len == 8

    def test_extended_header(self):
        data = mb.u32(1) + b"mdat" + mb.u64(4_294_967_400)
        header = bmff.parse_header(data)
        assert header.size == 4_294_967_400
        assert header.header_len == 16

    def test_size_zero_extends_to_scope_end(self):
        data = b"\x00" * 10 + mb.u32(0) + b"mdat" + b"\xaa" * 20
        header = bmff.parse_header(data, offset=10, scope_end=len(data))
        assert header.size == 8 + 20
        assert header.header_len == 8

    def test_nonprintable_name_is_escaped(self):
        header = bmff.parse_header(mb.u32(8) + b"\xa9mod")
        assert header.name == "\\xA9mod"
        assert header.raw_name == b"\xa9mod"

    def test_truncated_header_raises(self):
        with pytest.raises(bmff.TruncatedHeader):
            bmff.parse_header(b"\x00\x00\x00")
        with pytest.raises(bmff.TruncatedHeader):
            bmff.parse_header(mb.u32(1) + b"mdat" + b"\x00" * 4)  # 64-bit cut short

    @given(
        st.integers(min_value=8, max_value=2**31),
        st.binary(min_size=4, max_size=4),
        st.binary(max_size=32),
    )
    def test_position_independent(self, size, name, prefix):
        header_bytes = mb.u32(size) + name
        at_zero = bmff.parse_header(header_bytes + b"\x00" * 8)
        shifted = bmff.parse_header(prefix + header_bytes, offset=len(prefix))
        assert (at_zero.size, at_zero.raw_name) == (shifted.size, shifted.raw_name)
        assert at_zero.header_len == shifted.header_len == 8


def _walk_match(node, spec):
    assert node.name == mb.fourcc(spec["name"]).decode("latin-1")
    assert node.header.header_len == spec["header_len"]
    assert node.header.size == spec["total"]
    if spec["children"] is None:
        assert node.children == []
        assert len(node.payload or b"") == spec["payload_len"]
    else:
        assert len(node.children) == len(spec["children"])
        for child, child_spec in zip(node.children, spec["children"]):
            _walk_match(child, child_spec)


class TestRoundTrip:
    def test_random_trees_match_writer(self):
        rng = np.random.default_rng(20240817)
        for _ in range(60):
            data, specs = mb.random_file(rng)
            report = bmff.parse_tree(data)
            assert not report.warnings, report.warnings
            assert len(report.tree) == len(specs)
            for node, spec in zip(report.tree, specs):
                _walk_match(node, spec)
            assert sum(n.header.size for n in report.tree) == len(data)

    def test_minimal_movie_paths(self):
        report = bmff.parse_tree(mb.minimal_movie())
        assert [n.name for n in report.tree] == ["ftyp", "moov", "mdat"]
        moov = report.tree[1]
        assert moov.payload is None  # containers carry no payload
        trak = moov.children[1]
        assert trak.path == ("moov",)
        stbl = trak.children[1].children[2].children[2]
        assert stbl.name == "stbl"
        assert [c.name for c in stbl.children] == ["stsd", "stts", "stsc", "stco", "stsz"]

    def test_offsets_are_absolute(self):
        data = mb.minimal_movie()
        report = bmff.parse_tree(data)
        for top in report.tree:
            stack = [top]
            while stack:
                node = stack.pop()
                start = node.offset
                assert data[start + 4 : start + 8] == node.header.raw_name
                stack.extend(node.children)


class TestMetaVariants:
    def test_meta_under_udta_has_version_prefix(self):
        udta = mb.box("udta", mb.meta_variant(mb.hdlr(b"mdir", b"", style="bare"), mb.ilst()))
        report = bmff.parse_tree(mb.ftyp() + mb.box("moov", udta))
        meta = report.tree[1].children[0].children[0]
        assert meta.name == "meta"
        assert meta.header.header_len == 12
        assert [c.name for c in meta.children] == ["hdlr", "ilst"]
        assert not report.warnings

    def test_meta_under_moov_is_plain_container(self):
        moov = mb.box("moov", mb.meta_plain(mb.ilst(mb.ilst_entry(b"\xa9too", b"X"))))
        report = bmff.parse_tree(mb.ftyp() + moov)
        meta = report.tree[1].children[0]
        assert meta.header.header_len == 8
        assert [c.name for c in meta.children] == ["ilst"]

    def test_meta_elsewhere_is_a_leaf(self):
        stbl = mb.box("stbl", mb.box("meta", payload=b"\x01\x02\x03\x04\x05"))
        report = bmff.parse_tree(mb.ftyp() + mb.box("moov", mb.box("trak", mb.box("mdia", mb.box("minf", stbl)))))
        meta = report.tree[1].children[0].children[0].children[0].children[0].children[0]
        assert meta.name == "meta"
        assert meta.children == []
        assert meta.payload == b"\x01\x02\x03\x04\x05"

    def test_undecodable_meta_under_udta_falls_back_to_leaf(self):
        junk = b"\xde\xad\xbe\xef" * 3
        udta = mb.box("udta", mb.box("meta", payload=junk))
        report = bmff.parse_tree(mb.ftyp() + mb.box("moov", udta))
        meta = report.tree[1].children[0].children[0]
        assert meta.children == []
        assert meta.payload == junk
        assert any("meta" in msg for _, msg in report.warnings)

    def test_meta_under_udta_without_version_prefix_still_parses(self):
        # Some writers omit the 4-byte prefix; the probe should notice.
        udta = mb.box("udta", mb.meta_plain(mb.box("ilst")))
        report = bmff.parse_tree(mb.ftyp() + mb.box("moov", udta))
        meta = report.tree[1].children[0].children[0]
        assert [c.name for c in meta.children] == ["ilst"]
        assert meta.header.header_len == 8
        assert any("meta" in msg for _, msg in report.warnings)


class TestDref:
    def test_dref_children_after_preamble(self):
        report = bmff.parse_tree(mb.ftyp() + mb.box("moov", mb.box("trak", mb.box("mdia", mb.box("minf", mb.dinf())))))
        dref = report.tree[1].children[0].children[0].children[0].children[0].children[0]
        assert dref.name == "dref"
        assert dref.padding == 8
        assert [c.name for c in dref.children] == ["url "]
        assert not report.warnings


class TestSizeVariants:
    def test_size_zero_last_box(self):
        data = mb.ftyp() + mb.mdat(b"\x55" * 100, size_zero=True)
        report = bmff.parse_tree(data)
        mdat = report.tree[1]
        assert mdat.header.size == 108
        assert len(mdat.payload) == 100
        assert not report.warnings

    def test_size64_box(self):
        data = mb.ftyp() + mb.mdat(b"\x55" * 100, size64=True)
        report = bmff.parse_tree(data)
        mdat = report.tree[1]
        assert mdat.header.header_len == 16
        assert mdat.header.size == 116
        assert len(mdat.payload) == 100

    def test_size64_container(self):
        data = mb.ftyp() + mb.box("moov", mb.mvhd(), size64=True)
        report = bmff.parse_tree(data)
        moov = report.tree[1]
        assert moov.header.header_len == 16
        assert [c.name for c in moov.children] == ["mvhd"]
        assert not report.warnings


class TestDamage:
    def test_not_a_container_file(self):
        with pytest.raises(bmff.NotIsoBmff):
            bmff.parse_tree(b"")
        with pytest.raises(bmff.NotIsoBmff):
            bmff.parse_tree(b"\x00\x00\x00\x08zzzz")
        with pytest.raises(bmff.NotIsoBmff):
            bmff.parse_tree(b"RIFF\x10\x00\x00\x00WAVE")

    def test_oversized_box_is_clamped_with_warning(self):
        bad = mb.u32(9999) + b"blob" + b"\x01" * 16
        data = mb.ftyp() + bad
        report = bmff.parse_tree(data)
        assert len(report.tree) == 2
        blob = report.tree[1]
        assert blob.header.size == 8 + 16  # clamped to what exists
        assert len(blob.payload) == 16
        assert any("exceeds" in msg or "clamp" in msg for _, msg in report.warnings)

    def test_invalid_small_size_skips_scope_tail(self):
        bad = mb.u32(3) + b"blob" + b"\x01" * 8
        data = mb.ftyp() + bad
        report = bmff.parse_tree(data)
        assert [n.name for n in report.tree] == ["ftyp"]
        assert report.warnings

    def test_stray_trailing_bytes_are_skipped(self):
        data = mb.minimal_movie() + b"\x00\x01\x02"
        report = bmff.parse_tree(data)
        assert [n.name for n in report.tree] == ["ftyp", "moov", "mdat"]
        assert len(report.warnings) == 1
        offset, msg = report.warnings[0]
        assert offset == len(data) - 3

    def test_damaged_child_does_not_kill_siblings(self):
        # moov holds a corrupt child (size too small) between two good ones;
        # the scope tail after the corruption is skipped with a warning.
        good1 = mb.mvhd()
        corrupt = mb.u32(2) + b"oops"
        good2 = mb.box("udta")
        moov = mb.box("moov", good1, corrupt, good2)
        data = mb.ftyp() + moov + mb.mdat()
        report = bmff.parse_tree(data)
        names = [n.name for n in report.tree]
        assert names == ["ftyp", "moov", "mdat"]
        moov_node = report.tree[1]
        assert [c.name for c in moov_node.children] == ["mvhd"]
        assert report.warnings

    def test_depth_limit_stops_descent(self):
        data = mb.box("ab12")
        for _ in range(70):
            data = mb.box("moov", data)
        report = bmff.parse_tree(data)
        depth = 0
        node = report.tree[0]
        while node.children:
            node = node.children[0]
            depth += 1
        assert depth < 70
        assert any("nesting deeper" in msg for _, msg in report.warnings)

    def test_truncated_file_mid_box(self):
        data = mb.minimal_movie()
        cut = data[: len(data) - 10]
        report = bmff.parse_tree(cut)
        assert report.tree  # still returns what it could read
        assert report.warnings


class TestByteConservation:
    @given(st.integers(min_value=0, max_value=2**32 - 1))
    def test_root_sizes_cover_file(self, seed):
        rng = np.random.default_rng(seed)
        data, _ = mb.random_file(rng)
        report = bmff.parse_tree(data)
        assert sum(n.header.size for n in report.tree) == len(data)
