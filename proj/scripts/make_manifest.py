#!/usr/bin/env python3
"""Deterministically generate data/manifest_10k.txt.

The corpus mimics the shape statistics of a mixed instruction-tuning set:
mostly moderate-resolution photos, a band of near-square thumbnails, some
extreme banners/receipts, and a sprinkle of text-only records (no size
columns). Four hand-picked shapes used by the regression suite are pinned
near the top so they survive regeneration.

Usage: python3 scripts/make_manifest.py > data/manifest_10k.txt
"""

import random

TOTAL_SIZED = 10_000
TEXT_ONLY = 40
SEED = 90210

PINNED = [
    ("case_394x390", 394, 390),
    ("case_380x76", 380, 76),
    ("case_380x393", 380, 393),
    ("case_500x102", 500, 102),
]


def sample_size(rng: random.Random) -> tuple[int, int]:
    bucket = rng.random()
    if bucket < 0.35:  # everyday photos, landscape-leaning
        w = rng.randint(320, 1600)
        h = int(w * rng.uniform(0.55, 0.95))
    elif bucket < 0.60:  # near-square crops and thumbnails
        s = rng.randint(200, 900)
        w = s + rng.randint(-40, 40)
        h = s + rng.randint(-40, 40)
    elif bucket < 0.80:  # portrait documents and screenshots
        h = rng.randint(480, 2400)
        w = int(h * rng.uniform(0.4, 0.8))
    elif bucket < 0.92:  # wide banners, tables, strips
        w = rng.randint(600, 3200)
        h = int(w * rng.uniform(0.08, 0.35))
    else:  # tall receipts / chat exports
        h = rng.randint(800, 3600)
        w = int(h * rng.uniform(0.08, 0.35))
    return max(1, min(w, 4096)), max(1, min(h, 4096))


def main() -> None:
    rng = random.Random(SEED)
    print("# synthetic 10k-image manifest (see scripts/make_manifest.py)")
    print("# id [width height]; lines without sizes are text-only records")
    for name, w, h in PINNED:
        print(f"{name} {w} {h}")
    emitted = len(PINNED)
    text_slots = set(rng.sample(range(TOTAL_SIZED - emitted), TEXT_ONLY))
    for i in range(TOTAL_SIZED - emitted):
        if i in text_slots:
            print(f"text_{i:05d}")
        w, h = sample_size(rng)
        print(f"img_{i:05d} {w} {h}")


if __name__ == "__main__":
    main()
