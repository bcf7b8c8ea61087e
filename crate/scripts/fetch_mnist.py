#!/usr/bin/env python3
"""Build the desk-scale MNIST subset shipped in data/mnist.

The digits come from the `mnist` npm package (10000 MNIST samples stored as
JSON with intensities scaled to [0, 1]). They are shuffled with a fixed seed and
written as standard big-endian IDX files:

    train-images-idx3-ubyte / train-labels-idx1-ubyte   (first N_TRAIN samples)
    t10k-images-idx3-ubyte  / t10k-labels-idx1-ubyte    (next N_TEST samples)

Usage: scripts/fetch_mnist.py [OUT_DIR] [N_TRAIN] [N_TEST]
"""
import json
import os
import random
import struct
import subprocess
import sys
import tarfile
import tempfile


def write_idx(out_dir, prefix, samples):
    images = os.path.join(out_dir, f"{prefix}-images-idx3-ubyte")
    labels = os.path.join(out_dir, f"{prefix}-labels-idx1-ubyte")
    with open(images, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(samples), 28, 28))
        for pixels, _ in samples:
            f.write(bytes(pixels))
    with open(labels, "wb") as f:
        f.write(struct.pack(">II", 0x801, len(samples)))
        f.write(bytes(label for _, label in samples))


def main():
    out_dir = sys.argv[1] if len(sys.argv) > 1 else "data/mnist"
    n_train = int(sys.argv[2]) if len(sys.argv) > 2 else 2000
    n_test = int(sys.argv[3]) if len(sys.argv) > 3 else 1000
    os.makedirs(out_dir, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(["npm", "pack", "mnist@1.1.0"], cwd=tmp, check=True,
                       stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
        with tarfile.open(os.path.join(tmp, "mnist-1.1.0.tgz")) as tar:
            tar.extractall(tmp)
        samples = []
        for digit in range(10):
            path = os.path.join(tmp, "package", "src", "digits", f"{digit}.json")
            with open(path) as f:
                flat = json.load(f)["data"]
            for start in range(0, len(flat), 784):
                img = [min(255, max(0, round(v * 255))) for v in flat[start:start + 784]]
                samples.append((img, digit))
    random.Random(20210614).shuffle(samples)
    if n_train + n_test > len(samples):
        sys.exit(f"only {len(samples)} samples available")
    write_idx(out_dir, "train", samples[:n_train])
    write_idx(out_dir, "t10k", samples[n_train:n_train + n_test])
    print(f"wrote {n_train} train / {n_test} test samples to {out_dir}")


if __name__ == "__main__":
    main()
