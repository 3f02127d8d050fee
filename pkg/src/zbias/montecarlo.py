"""Seeded exploration of the ten-probability binary parameter space.

Draws the ten scenario probabilities i.i.d. Uniform(0,1), computes the
whole-population true, unadjusted and adjusted effects for each draw, and
estimates the volume of the region where adjustment amplifies bias
(|adjusted - true| strictly exceeds |unadjusted - true|).

Determinism: every draw is keyed by (seed, draw index) through the
counter-based streams in ``zbias.rng``, so results are independent of chunk
size and worker count; (seed, draws) fixes every output bit.  Degenerate
draws (a treatment-side uniform equal to exactly 0.0, which would empty a
conditioning event) are redrawn from the draw's retry region and logged.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import InvariantViolation
from .rng import PARAMS_PER_DRAW, primary_uniforms, retry_uniforms
from .scenario import IDENTITY_TOL, BinaryScenario

log = logging.getLogger(__name__)

SCATTER_HEADER = "pZ,pU,p11,p10,p01,p00,r11,r10,r01,r00,bias_adj,bias_unadj,zbias"

_CHUNK = 1 << 15
_FILTERS = ("cor1", "cor2")


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo run description.

    ``filter`` restricts the sampled space by projection: "cor1" draws
    interaction-free monotone treatment tables on the additive scale,
    "cor2" on the multiplicative scale (outcome means made monotone in the
    confounder in both cases).
    """

    draws: int
    seed: int
    binary_outcome: bool = True
    filter: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.draws < 1:
            raise InvariantViolation("must be at least 1", field="draws")
        if not 0 <= self.seed < 2**64:
            raise InvariantViolation("must fit in 64 bits", field="seed")
        if self.filter is not None:
            normalized = tuple(name.split(".")[0] for name in self.filter)
            for name in normalized:
                if name not in _FILTERS:
                    raise InvariantViolation(
                        f"unknown filter {name!r} (supported: {', '.join(_FILTERS)})",
                        field="filter",
                    )
            if len(normalized) > 1:
                raise InvariantViolation("at most one filter is supported", field="filter")
            object.__setattr__(self, "filter", normalized)


@dataclass(frozen=True)
class McResult:
    volume: float
    stderr: float
    draws: int
    seed: int
    tie_count: int

    def __post_init__(self):
        expected = sqrt(self.volume * (1.0 - self.volume) / self.draws)
        if abs(self.stderr - expected) > IDENTITY_TOL:
            raise InvariantViolation(
                "stderr inconsistent with volume and draws", field="stderr"
            )

    def to_json(self) -> str:
        return (
            '{"volume": %.17g, "stderr": %.17g, "draws": %d, "seed": %d, '
            '"tie_count": %d}' % (self.volume, self.stderr, self.draws, self.seed,
                                  self.tie_count)
        )


class ScenarioStream:
    """Sequential view of the per-draw parameter streams."""

    def __init__(self, seed: int, index: int = 0):
        self.seed = seed
        self.index = index

    def next_params(self) -> np.ndarray:
        params = _params_matrix(self.seed, self.index, 1)[0]
        self.index += 1
        return params


def draw_scenario(stream: ScenarioStream) -> BinaryScenario:
    """Next uniformly drawn binary scenario; advances the stream."""
    row = stream.next_params()
    return _scenario_from_params(row)


def _scenario_from_params(row) -> BinaryScenario:
    p_z, p_u, p11, p10, p01, p00, r11, r10, r01, r00 = (float(x) for x in row)
    return BinaryScenario(
        z_prob=p_z,
        u_prob=p_u,
        treat=((p00, p01), (p10, p11)),
        outcome_mean=((r00, r01), (r10, r11)),
        binary_outcome=True,
    )


def _degenerate(row) -> bool:
    # A zero treatment-side parameter (pZ, pU or a treatment cell) can empty
    # a conditioning event; outcome parameters cannot.
    return bool(np.any(row[:6] == 0.0))


def _params_matrix(seed: int, start: int, count: int) -> np.ndarray:
    """Parameters of draws [start, start + count), degenerate rows redrawn."""
    rows = primary_uniforms(seed, start, count)[:, :PARAMS_PER_DRAW]
    bad = np.nonzero(rows[:, :6].min(axis=1) == 0.0)[0]
    for offset in bad:
        index = start + int(offset)
        attempt = 0
        row = rows[offset]
        while _degenerate(row):
            log.warning("degenerate draw %d (seed %d): redrawing", index, seed)
            row = retry_uniforms(seed, index, attempt)[:PARAMS_PER_DRAW]
            attempt += 1
        rows[offset] = row
    return rows


def _project_cor1(rows: np.ndarray, seed: int, start: int) -> None:
    """Interaction-free monotone tables on the additive scale.

    The three free treatment cells are sorted so p00 is smallest, then
    p11 = p10 + p01 - p00; triples pushing p11 above 1 are resampled from
    the draw's retry region.  Outcome means are swapped into the monotone
    order within each arm.
    """
    for offset, row in enumerate(rows):
        attempt = 0
        while True:
            p00, p10, p01 = np.sort(row[3:6])
            p11 = p10 + p01 - p00
            if p11 <= 1.0:
                break
            row[3:6] = _fresh_triple(seed, start + offset, attempt)
            attempt += 1
        row[2], row[3], row[4], row[5] = p11, p10, p01, p00
        _sort_outcome_means(row)


def _project_cor2(rows: np.ndarray, seed: int, start: int) -> None:
    """Interaction-free monotone tables on the multiplicative scale.

    Reparametrised so p11 = p10 * p01 / p00 holds with no rejection:
    p11 = x, p10 = x*y, p01 = x*w, p00 = x*y*w from three uniforms.
    """
    x = rows[:, 3]
    y = rows[:, 4]
    w = rows[:, 5]
    p10 = x * y
    p01 = x * w
    p00 = p10 * w
    rows[:, 2] = x
    rows[:, 3] = p10
    rows[:, 4] = p01
    rows[:, 5] = p00
    for row in rows:
        _sort_outcome_means(row)


def _fresh_triple(seed: int, index: int, attempt: int) -> np.ndarray:
    # Projection retries live after the degeneracy retries in the draw's
    # retry region; skip exact zeros like the primary stream does.
    base = 1_000 + attempt
    triple = retry_uniforms(seed, index, base)[:3]
    while np.any(triple == 0.0):
        base += 1_000_000
        triple = retry_uniforms(seed, index, base)[:3]
    return triple


def _sort_outcome_means(row) -> None:
    # Columns: r11, r10, r01, r00.  Monotone in u means r_a1 >= r_a0.
    if row[6] < row[7]:
        row[6], row[7] = row[7], row[6]
    if row[8] < row[9]:
        row[8], row[9] = row[9], row[8]


def _chunk_params(cfg: McConfig, start: int, count: int) -> np.ndarray:
    rows = _params_matrix(cfg.seed, start, count)
    if cfg.filter:
        if cfg.filter[0] == "cor1":
            _project_cor1(rows, cfg.seed, start)
        else:
            _project_cor2(rows, cfg.seed, start)
    return rows


def population_biases(params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(adjusted - true, unadjusted - true) for rows of scenario parameters.

    Vectorised transcription of the whole-population formulas in the
    estimators module; the test suite pins the two routes together.
    """
    p_z, p_u = params[:, 0], params[:, 1]
    p11, p10, p01, p00 = params[:, 2], params[:, 3], params[:, 4], params[:, 5]
    r11, r10, r01, r00 = params[:, 6], params[:, 7], params[:, 8], params[:, 9]

    pi1 = p_u * p11 + (1.0 - p_u) * p10
    pi0 = p_u * p01 + (1.0 - p_u) * p00
    f = p_z * pi1 + (1.0 - p_z) * pi0

    num_t1 = p_u * p11 * r11 + (1.0 - p_u) * p10 * r10
    num_t0 = p_u * p01 * r11 + (1.0 - p_u) * p00 * r10
    num_c1 = p_u * (1.0 - p11) * r01 + (1.0 - p_u) * (1.0 - p10) * r00
    num_c0 = p_u * (1.0 - p01) * r01 + (1.0 - p_u) * (1.0 - p00) * r00

    ey_treated = (p_z * num_t1 + (1.0 - p_z) * num_t0) / f
    ey_control = (p_z * num_c1 + (1.0 - p_z) * num_c0) / (1.0 - f)
    unadj = ey_treated - ey_control

    true_all = p_u * (r11 - r01) + (1.0 - p_u) * (r10 - r00)

    adj_all = p_z * (num_t1 / pi1 - num_c1 / (1.0 - pi1)) + (1.0 - p_z) * (
        num_t0 / pi0 - num_c0 / (1.0 - pi0)
    )
    return adj_all - true_all, unadj - true_all


def _classify(bias_adj: np.ndarray, bias_unadj: np.ndarray):
    gap = np.abs(bias_adj) - np.abs(bias_unadj)
    amplified = gap > IDENTITY_TOL
    tie = np.abs(gap) <= IDENTITY_TOL
    return amplified, tie


def _thread_count(threads: int | None) -> int:
    if threads is None:
        raw = os.environ.get("ZBIAS_THREADS", "0")
        try:
            threads = int(raw)
        except ValueError:
            raise InvariantViolation("must be an integer", field="ZBIAS_THREADS") from None
    return max(1, threads)


def _chunks(draws: int):
    return [(start, min(_CHUNK, draws - start)) for start in range(0, draws, _CHUNK)]


def estimate_volume(cfg: McConfig, threads: int | None = None) -> McResult:
    """Estimated volume of the amplification region with its binomial
    standard error; exact ties are excluded from the count and reported."""

    def work(chunk):
        start, count = chunk
        amplified, tie = _classify(*population_biases(_chunk_params(cfg, start, count)))
        return int(amplified.sum()), int(tie.sum())

    plan = _chunks(cfg.draws)
    workers = _thread_count(threads)
    if workers > 1 and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, plan))
    else:
        results = [work(chunk) for chunk in plan]
    count = sum(r[0] for r in results)
    ties = sum(r[1] for r in results)
    volume = count / cfg.draws
    return McResult(
        volume=volume,
        stderr=sqrt(volume * (1.0 - volume) / cfg.draws),
        draws=cfg.draws,
        seed=cfg.seed,
        tie_count=ties,
    )


def export_scatter(cfg: McConfig, path, threads: int | None = None) -> int:
    """Write one CSV row per draw: the ten parameters, both biases, and the
    amplification flag.  Returns the data row count."""

    def work(chunk):
        start, count = chunk
        params = _chunk_params(cfg, start, count)
        bias_adj, bias_unadj = population_biases(params)
        amplified, _ = _classify(bias_adj, bias_unadj)
        lines = []
        for row, ba, bu, flag in zip(params, bias_adj, bias_unadj, amplified):
            cells = [repr(float(x)) for x in row]
            cells.append(repr(float(ba)))
            cells.append(repr(float(bu)))
            cells.append("true" if flag else "false")
            lines.append(",".join(cells))
        return "\n".join(lines)

    plan = _chunks(cfg.draws)
    workers = _thread_count(threads)
    if workers > 1 and len(plan) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(work, plan))
    else:
        blocks = [work(chunk) for chunk in plan]
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(SCATTER_HEADER + "\n")
        for block in blocks:
            handle.write(block + "\n")
    return cfg.draws
