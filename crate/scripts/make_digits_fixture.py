#!/usr/bin/env python3
"""Write the bundled 8x8 digits set as IDX files for hermetic tests.

Uses scikit-learn's copy of the UCI optical-digits data (1797 images,
intensities 0..16), rescaled to bytes 0..255. The first 1297 images form the
training split, the last 500 the test split.

    python3 scripts/make_digits_fixture.py [out_dir]
"""
import struct
import sys
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits

TRAIN = 1297


def write_images(path, images):
    count, rows, cols = images.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, count, rows, cols))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(np.asarray(labels, dtype=np.uint8).tobytes())


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "crates/core/fixtures/digits")
    out.mkdir(parents=True, exist_ok=True)
    digits = load_digits()
    images = np.rint(digits.images * 255.0 / 16.0).astype(np.uint8)
    labels = digits.target
    write_images(out / "train-images.idx", images[:TRAIN])
    write_labels(out / "train-labels.idx", labels[:TRAIN])
    write_images(out / "test-images.idx", images[TRAIN:])
    write_labels(out / "test-labels.idx", labels[TRAIN:])


if __name__ == "__main__":
    main()
