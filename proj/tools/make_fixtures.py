#!/usr/bin/env python3
"""Regenerate the CLI fixtures under tests/fixtures (seeded, deterministic)."""

import json
import pathlib
import random

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def fmt(x):
    return repr(round(x, 6))


def write(name, text):
    (OUT / name).write_text(text)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240607)

    # Planar anchors in [0,1]^2 with values in [-1,1], plus query points.
    rows = ["x1,x2,value"]
    for _ in range(50):
        rows.append(",".join(fmt(v) for v in (rng.random(), rng.random(), rng.uniform(-1, 1))))
    write("plane_anchors.csv", "\n".join(rows) + "\n")
    rows = ["x1,x2"]
    for _ in range(20):
        rows.append(",".join(fmt(v) for v in (rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.2))))
    write("plane_queries.csv", "\n".join(rows) + "\n")

    # 10 x 10 integer grid with the L1 metric, random values on every point.
    pts = [(i, j) for i in range(10) for j in range(10)]
    matrix = [[abs(a[0] - b[0]) + abs(a[1] - b[1]) for b in pts] for a in pts]
    write("grid_domain.json", json.dumps({"matrix": matrix}) + "\n")
    rows = ["index,value"] + [f"{i},{fmt(rng.uniform(-1, 1))}" for i in range(len(pts))]
    write("grid_anchors.csv", "\n".join(rows) + "\n")

    # Three points 0, 1, 2 on a line.
    write("line3_domain.json", json.dumps({"labels": ["p0", "p1", "p2"],
                                           "matrix": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]}) + "\n")
    write("line3_anchors.csv", "index,value\n0,0\n1,5\n2,1\n")
    write("line3_cover.json", json.dumps({"sets": [{"type": "subset", "indices": [0, 1]},
                                                   {"type": "subset", "indices": [1, 2]}]}) + "\n")


if __name__ == "__main__":
    main()
