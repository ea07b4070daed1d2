#!/usr/bin/env python3
"""Walk the raw box tree of an MP4/MOV container.

Every ISO-BMFF file is a sequence of length-prefixed "boxes" that nest
into a tree.  This demo parses one bundled sample, prints the tree with
offsets and sizes, and then damages the buffer to show that parsing
degrades gracefully instead of failing outright.
"""

from pathlib import Path

from vidmeta import parse_tree

DATA = Path(__file__).resolve().parent.parent / "data" / "synthetic"


def show(node, depth=0):
    pad = "    " * depth
    detail = f"offset={node.offset:<6} size={node.header.size:<6}"
    if node.payload is not None:
        detail += f" payload={len(node.payload)}B"
    print(f"{pad}{node.name:<8} {detail}")
    for child in node.children:
        show(child, depth + 1)


def main():
    sample = DATA / "cvse_01.mp4"
    data = sample.read_bytes()
    print(f"=== box tree of {sample.name} ({len(data)} bytes) ===")
    report = parse_tree(data)
    for top in report.tree:
        show(top)
    print(f"\nwarnings: {len(report.warnings)}")

    # The final mdat of this sample uses a 64-bit size; the first trak
    # hides the sample tables four levels deep.  Now chop the buffer in
    # the middle of a box and parse again.
    print("\n=== same file truncated to 600 bytes ===")
    report = parse_tree(data[:600])
    for top in report.tree:
        show(top)
    for offset, message in report.warnings:
        print(f"warning @ byte {offset}: {message}")


if __name__ == "__main__":
    main()
