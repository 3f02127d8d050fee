"""Deterministic, splittable uniform streams for the Monte Carlo explorer.

Built on the Philox 4x64 counter-based bit generator: output block c (four
64-bit words, hence four doubles) is a pure function of (key, c), so any
draw index can be assigned a fixed counter region and generated in any
order, on any number of workers, with bit-identical results.

Layout used throughout this package:

  * the 64-bit user seed is the Philox key, used verbatim;
  * draw ``i`` owns the four primary blocks [4*i, 4*i + 4), i.e. 16 doubles,
    of which the first 10 are the scenario parameters in the order
    pZ, pU, p11, p10, p01, p00, r11, r10, r01, r00;
  * retries for degenerate draws come from the disjoint region starting at
    block (i + 1) << 64, consumed 16 doubles at a time.

Uniform doubles are the standard 53-bit mapping of one 64-bit word each, so
they lie in [0, 1); a value can be exactly 0.0 (probability 2**-53 per
word) but never 1.0.
"""

from __future__ import annotations

import numpy as np

BLOCKS_PER_DRAW = 4
DOUBLES_PER_DRAW = 4 * BLOCKS_PER_DRAW
PARAMS_PER_DRAW = 10

_RETRY_REGION_SHIFT = 64


def _generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=block))


def primary_uniforms(seed: int, start_draw: int, n_draws: int) -> np.ndarray:
    """Uniforms for draws [start_draw, start_draw + n_draws), one row each.

    Rows hold the 16 doubles of the draw's primary region; concatenating the
    rows of adjacent shards reproduces a single sequential generation.
    """
    gen = _generator(seed, BLOCKS_PER_DRAW * start_draw)
    return gen.random(n_draws * DOUBLES_PER_DRAW).reshape(n_draws, DOUBLES_PER_DRAW)


def retry_uniforms(seed: int, draw_index: int, attempt: int) -> np.ndarray:
    """The 16 doubles of the given retry attempt (0-based) for one draw."""
    block = ((draw_index + 1) << _RETRY_REGION_SHIFT) + BLOCKS_PER_DRAW * attempt
    gen = _generator(seed, block)
    return gen.random(DOUBLES_PER_DRAW)
