#!/usr/bin/env python3
"""Writes the bundled synthetic dataset used by the tests and examples.

Every coordinate sits on the 0.25 grid the builtin hic generators anchor to.
The first coordinate encodes the category: 0.0 for "A", 0.5 for "B".
"""
import argparse
import json
import random


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--points", type=int, default=100)
    parser.add_argument("--dim", type=int, default=64)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--out", default="data/synthetic_100.jsonl")
    args = parser.parse_args()

    rng = random.Random(args.seed)
    grid = [0.0, 0.25, 0.5, 0.75, 1.0]
    with open(args.out, "w") as f:
        for i in range(args.points):
            category = "A" if i % 2 == 0 else "B"
            values = [0.0 if category == "A" else 0.5]
            values += [rng.choice(grid) for _ in range(args.dim - 1)]
            f.write(json.dumps({"id": f"p{i:03d}", "input": values, "category": category}) + "\n")


if __name__ == "__main__":
    main()
