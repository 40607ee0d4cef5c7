#!/usr/bin/env python3
"""Rebuild Fashion-MNIST IDX files from the per-class JSON dumps shipped in
the `fashion-mnist` npm package (src/clothes/<label>.json).

Writes train-images-idx3-ubyte, train-labels-idx1-ubyte, t10k-images-idx3-ubyte
and t10k-labels-idx1-ubyte. Each class contributes 6000 train and 1000 test
images; classes are interleaved round-robin so any prefix stays balanced.
"""
import argparse
import json
import pathlib
import struct

ROWS = COLS = 28


def write_idx(out_dir, prefix, samples):
    images = bytearray(struct.pack(">IIII", 0x00000803, len(samples), ROWS, COLS))
    labels = bytearray(struct.pack(">II", 0x00000801, len(samples)))
    for label, pixels in samples:
        images.extend(bytes(pixels))
        labels.append(label)
    (out_dir / f"{prefix}-images-idx3-ubyte").write_bytes(images)
    (out_dir / f"{prefix}-labels-idx1-ubyte").write_bytes(labels)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("clothes_dir", type=pathlib.Path)
    ap.add_argument("out_dir", type=pathlib.Path)
    ap.add_argument("--train-per-class", type=int, default=6000)
    ap.add_argument("--test-per-class", type=int, default=1000)
    args = ap.parse_args()

    per_class = []
    for label in range(10):
        rows = json.loads((args.clothes_dir / f"{label}.json").read_text())["data"]
        rows = [r for r in rows if len(r) == ROWS * COLS]
        need = args.train_per_class + args.test_per_class
        if len(rows) < need:
            raise SystemExit(f"class {label}: {len(rows)} images, need {need}")
        per_class.append(rows[:need])

    train, test = [], []
    for i in range(args.train_per_class):
        train.extend((label, per_class[label][i]) for label in range(10))
    for i in range(args.train_per_class, args.train_per_class + args.test_per_class):
        test.extend((label, per_class[label][i]) for label in range(10))

    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_idx(args.out_dir, "train", train)
    write_idx(args.out_dir, "t10k", test)
    print(f"wrote {len(train)} train / {len(test)} test to {args.out_dir}")


if __name__ == "__main__":
    main()
