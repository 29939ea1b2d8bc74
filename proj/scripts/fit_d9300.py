#!/usr/bin/env python3
"""Derivation of data/d9300.cal from bench traces.

The calibration file is not hand-tuned: every number comes from a small set
of on-device measurements (Dimensity 9300 engineering board), reduced here.

  * conv2d / vit batch tables: median wall times of the patch-embedding
    conv2d stage (CPU) and the ViT+projector stage (NPU) per batch size,
    copied verbatim into the table.
  * prefill cost curve: total prefill wall time of a 2048-token prompt at
    chunk sizes 32/128/512 gives three equations in the three unknowns
    (fixed overhead, per-token, quadratic); the 2048-chunk point is held
    out and reported as a residual.
  * decode: steady-state generation measured at 24.40 tok/s, stored as a
    per-token cost rounded to 0.01 ms.

Run from the repo root: python3 scripts/fit_d9300.py
Exits non-zero if data/d9300.cal disagrees with the fit.
"""

from fractions import Fraction
from pathlib import Path
import sys

# -- measurements -----------------------------------------------------------

CONV2D_MS = {1: 40.0, 2: 80.0, 3: 120.0, 4: 160.0, 6: 240.0}
VIT_MS = {1: 300.0, 2: 520.0, 3: 690.0, 4: 800.0, 6: 1500.0}

PREFILL_TOKENS = 2048
# chunk size -> measured total prefill wall time (ms)
PREFILL_TOTALS = {32: 3842.8672, 128: 2700.0832, 512: 3888.9472, 2048: 10084.4032}
FIT_CHUNKS = (32, 128, 512)
HOLDOUT_CHUNK = 2048

DECODE_TOKS_PER_S = 24.40
MODEL_LOAD_MS = 470.0
KV_CAPACITY = 2048


def solve3(a, b):
    """Gaussian elimination over Fractions for an exact 3x3 solve."""
    m = [row[:] + [rhs] for row, rhs in zip(a, b)]
    for col in range(3):
        pivot = next(r for r in range(col, 3) if m[r][col] != 0)
        m[col], m[pivot] = m[pivot], m[col]
        inv = Fraction(1, 1) / m[col][col]
        m[col] = [v * inv for v in m[col]]
        for r in range(3):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [v - f * c for v, c in zip(m[r], m[col])]
    return [m[r][3] for r in range(3)]


def prefill_total(chunk, fixed, per_tok, quad):
    n_chunks = -(-PREFILL_TOKENS // chunk)
    full = PREFILL_TOKENS // chunk
    rem = PREFILL_TOKENS - full * chunk
    total = full * (fixed + per_tok * chunk + quad * chunk * chunk)
    if rem:
        total += fixed + per_tok * rem + quad * rem * rem
    assert n_chunks == full + (1 if rem else 0)
    return total


def main() -> int:
    # total(chunk c) = (T/c)*fixed + T*per_tok + T*c*quad  for c dividing T
    rows = []
    rhs = []
    for c in FIT_CHUNKS:
        t = Fraction(PREFILL_TOKENS)
        rows.append([t / c, t, t * c])
        rhs.append(Fraction(PREFILL_TOTALS[c]))
    fixed, per_tok, quad = solve3(rows, rhs)
    print(f"prefill fit: fixed={float(fixed):g} ms, "
          f"per_token={float(per_tok):g} ms, quadratic={float(quad):g} ms/tok^2")

    held = prefill_total(HOLDOUT_CHUNK, fixed, per_tok, quad)
    resid = float(held - Fraction(PREFILL_TOTALS[HOLDOUT_CHUNK]))
    print(f"holdout chunk={HOLDOUT_CHUNK}: model {float(held):.4f} ms, "
          f"measured {PREFILL_TOTALS[HOLDOUT_CHUNK]:.4f} ms, residual {resid:.3e} ms")

    decode_ms = round(1000.0 / DECODE_TOKS_PER_S, 2)
    print(f"decode: {DECODE_TOKS_PER_S} tok/s -> {decode_ms} ms/token "
          f"(reproduces {1000.0 / decode_ms:.5f} tok/s)")

    expected = {
        "prefill.fixed_overhead_ms": float(fixed),
        "prefill.per_token_ms": float(per_tok),
        "prefill.quadratic_ms_per_token2": float(quad),
        "decode.per_token_ms": decode_ms,
        "timeline.model_load_ms": MODEL_LOAD_MS,
        "kv.capacity_tokens": float(KV_CAPACITY),
    }
    for b, v in CONV2D_MS.items():
        expected[f"encode.conv2d_ms.batch.{b}"] = v
    for b, v in VIT_MS.items():
        expected[f"encode.vit_ms.batch.{b}"] = v

    cal_path = Path(__file__).resolve().parent.parent / "data" / "d9300.cal"
    stored = {}
    for raw in cal_path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition("=")
        stored[key.strip()] = float(value.strip())

    bad = [k for k, v in expected.items() if abs(stored.get(k, float("nan")) - v) > 1e-9]
    if bad or set(stored) != set(expected):
        print("MISMATCH against data/d9300.cal:")
        for k in sorted(set(bad) | (set(stored) ^ set(expected))):
            print(f"  {k}: stored={stored.get(k)} fit={expected.get(k)}")
        return 1
    print(f"data/d9300.cal matches the fit ({len(expected)} keys).")
    return 0


if __name__ == "__main__":
    sys.exit(main())
