#!/usr/bin/env python3
"""Correlation-driven feature thinning.

Container metadata is massively redundant: every file that has
moov/mvhd also has moov, so those two presence features never carry
independent information.  The pipeline computes a Pearson correlation
matrix, keeps the positive part as a cluster affinity, spectrally
groups features into alpha clusters, and keeps oversized clusters only
through a single representative (beta is the largest size kept whole).
"""

from pathlib import Path

import numpy as np

from vidmeta import (
    build_vocabulary,
    clamp_positive,
    correlation_matrix,
    extract_strings,
    select_features,
    spectral_cluster,
    vectorize,
)

DATA = Path(__file__).resolve().parent.parent / "data" / "synthetic"


def main():
    files = sorted(DATA.glob("*.m*"))
    collections = [extract_strings(f.read_bytes()) for f in files]
    vocab = build_vocabulary(collections)
    X = np.stack([vectorize(c, vocab) for c in collections])
    texts = vocab.entry_texts()

    R = correlation_matrix(X)
    a = texts.index("moov/udta/meta")
    b = texts.index("moov/udta/meta/ilst")
    c = texts.index("skip")
    print(f"corr(udta/meta, udta/meta/ilst) = {R[a, b]:+.3f}  (parent/child, pure redundancy)")
    print(f"corr(udta/meta, skip)           = {R[a, c]:+.3f}  (unrelated markers)")

    affinity = clamp_positive(R)
    # A deliberately small alpha forces real grouping on this corpus.
    alpha = 40
    labels = spectral_cluster(affinity, alpha, seed=0)
    sizes = np.bincount(labels)
    print(f"\n{vocab.dim} features -> {len(sizes)} clusters "
          f"(largest {sizes.max()}, singletons {int((sizes == 1).sum())})")

    mask = select_features(labels, size_threshold=4, seed=0)
    print(f"thinning with beta=4 keeps {len(mask.retained)} of {vocab.dim} features")

    big = int(np.argmax(sizes))
    members = [texts[i] for i in np.flatnonzero(labels == big)][:6]
    kept = [texts[i] for i in mask.retained if labels[i] == big]
    print(f"\nlargest cluster (id {big}, {sizes[big]} members), first few:")
    for t in members:
        print(f"    {t}")
    print(f"representative kept: {kept[0] if kept else '(dropped)'}")


if __name__ == "__main__":
    main()
