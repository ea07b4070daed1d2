#!/usr/bin/env python3
"""From string collections to numeric feature vectors.

A vocabulary assigns every distinct string a fixed position: presence
strings count node occurrences, discrete key-value strings count exact
matches, and a configurable list of continuous keys (duration, width,
timescale...) contribute their numeric value directly instead of
exploding into one column per distinct value.
"""

from pathlib import Path

from vidmeta import build_vocabulary, extract_strings, vectorize

DATA = Path(__file__).resolve().parent.parent / "data" / "synthetic"


def main():
    files = sorted(DATA.glob("*.m*"))
    collections = {f.name: extract_strings(f.read_bytes()) for f in files}
    vocab = build_vocabulary(collections.values())
    ranges = vocab.position_ranges()
    print(f"vocabulary over {len(files)} files: {vocab.dim} positions")
    for block, rng in ranges.items():
        print(f"    {block:<11} positions {rng.start:>3}..{rng.stop - 1}")

    texts = vocab.entry_texts()
    vec = vectorize(collections["ac100_01.mov"], vocab)
    print("\nac100_01.mov, a few populated positions:")
    shown = 0
    for pos, value in enumerate(vec):
        if value != 0 and (
            "mvhd" in texts[pos] or "@width" in texts[pos] or "\\xA9mod" in texts[pos]
        ):
            kind = next(k for k, r in ranges.items() if pos in r)
            print(f"    [{pos:>3}] {kind:<11} {value:>12g}  {texts[pos]}")
            shown += 1
            if shown >= 8:
                break

    # The same vocabulary maps every file, so vectors are comparable:
    import numpy as np
    X = np.stack([vectorize(c, vocab) for c in collections.values()])
    print(f"\ncorpus matrix: {X.shape[0]} files x {X.shape[1]} features, "
          f"{np.count_nonzero(X)} nonzero cells")


if __name__ == "__main__":
    main()
