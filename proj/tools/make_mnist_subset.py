#!/usr/bin/env python3
"""Rebuild data/mnist10k from the 10,000-digit MNIST sample shipped in the
`mnist` npm package (MIT licensed, 1,000 digits per class).

Usage: make_mnist_subset.py <extracted-package-dir> <out-dir>

Pixels in the package are stored as value/255 rounded to three decimals; the
step is finer than 1/255, so round(v * 255) recovers the original byte.
"""
import gzip
import json
import random
import struct
import sys
from pathlib import Path


def main() -> int:
    pkg, out = Path(sys.argv[1]), Path(sys.argv[2])
    samples = []
    for digit in range(10):
        raw = json.loads((pkg / "src" / "digits" / f"{digit}.json").read_text())["data"]
        for start in range(0, len(raw), 784):
            pixels = bytes(int(round(v * 255)) for v in raw[start:start + 784])
            samples.append((pixels, digit))
    random.Random(0).shuffle(samples)

    out.mkdir(parents=True, exist_ok=True)
    with gzip.GzipFile(out / "images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x00000803, len(samples), 28, 28))
        for pixels, _ in samples:
            f.write(pixels)
    with gzip.GzipFile(out / "labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x00000801, len(samples)))
        f.write(bytes(label for _, label in samples))
    print(f"wrote {len(samples)} samples to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
