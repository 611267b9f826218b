#!/usr/bin/env python3
"""Regenerate data/digits/ from scikit-learn's bundled handwritten digits.

The four IDX files checked into data/digits/ are produced by this script.
Source data: sklearn.datasets.load_digits() (1797 samples of 8x8 grayscale
digits, pixel values 0..16). Pixels are rescaled to 0..255 bytes so the files
follow the same conventions as the classic 28x28 digit corpus. The split is
deterministic: every fourth sample (index % 4 == 3) goes to the test set.
"""

import struct

import numpy as np
from sklearn.datasets import load_digits

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801


def write_images(path, arr):
    n, rows, cols = arr.shape
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", IMAGE_MAGIC, n, rows, cols))
        f.write(arr.tobytes())


def write_labels(path, arr):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", LABEL_MAGIC, len(arr)))
        f.write(arr.tobytes())


def main():
    d = load_digits()
    images = np.round(d.images * 255.0 / 16.0).astype(np.uint8)
    labels = d.target.astype(np.uint8)

    test_mask = (np.arange(len(labels)) % 4) == 3
    for name, mask in (("train", ~test_mask), ("test", test_mask)):
        write_images(f"data/digits/{name}-images.idx3-ubyte", images[mask])
        write_labels(f"data/digits/{name}-labels.idx1-ubyte", labels[mask])
        print(f"{name}: {mask.sum()} samples")


if __name__ == "__main__":
    main()
