#!/usr/bin/env python3
"""From box tree to canonical metadata strings.

The refinement pass decodes well-known boxes (mvhd, tkhd, hdlr, tag
atoms, XMP packets...) into key-value fields, and the serializer turns
the refined tree into a flat collection of strings:

    moov/mvhd                      presence of a node
    moov/mvhd/@duration=1546737    a key-value field on that node

These collections are what the classifiers actually consume.
"""

from pathlib import Path

from vidmeta import extract_strings

DATA = Path(__file__).resolve().parent.parent / "data" / "synthetic"


def main():
    for name, note in (
        ("ac100_01.mov", "camera writes bare (c)-tags straight into udta"),
        ("bl9_01.mp4", "camera nests tags under udta/meta/ilst data atoms"),
        ("dr5_01.mp4", "camera ships an XMP packet in a top-level uuid box"),
    ):
        data = (DATA / name).read_bytes()
        strings = extract_strings(data)
        presence = [s for s in strings if s.category == "node-presence"]
        fields = [s for s in strings if s.category == "key-value"]
        print(f"=== {name}: {note}")
        print(f"    {len(presence)} presence strings, {len(fields)} field strings")
        interesting = [
            s.text for s in fields
            if any(hint in s.text for hint in
                   ("@major_brand", "duration", "width", "\\xA9", "CreatorTool"))
        ]
        for text in interesting[:10]:
            print(f"    {text}")
        print()

    # Track numbering keeps per-track fields distinct: the same tkhd key
    # appears once per trak, numbered by file order.
    data = (DATA / "ac100_01.mov").read_bytes()
    widths = [s.text for s in extract_strings(data) if "tkhd/@width" in s.text]
    print("=== two tracks, two width strings ===")
    for text in widths:
        print(f"    {text}")


if __name__ == "__main__":
    main()
