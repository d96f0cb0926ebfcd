"""Monte Carlo experiments: model checks and conditional voting accuracy.

A *cell* is one operating point: an ``(M, SMNR)`` pair when sensors run
subspace pursuit, or a channel ``eps`` when they run the idealized channel.
Each trial draws one support layout and one estimate per sensor.  Per-trial
random sources are derived from ``(seed, cell index, trial index)`` and
trials are processed in fixed-size chunks whose integer tallies are summed,
so results do not depend on the worker count.
"""
from __future__ import annotations

import csv
import dataclasses
import enum
import io
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from . import analysis
from .channel import ChannelParams, ConfusionCounts, estimate_epsilon, ideal_channel, tally_confusion
from .pursuit import subspace_pursuit
from .sigmodel import ModelConfig, SupportModel, draw_sensor, draw_supports
from .voting import consensus, new_tally, vote1

__all__ = [
    "Engine",
    "Voting",
    "Branch",
    "EventKey",
    "ExperimentConfig",
    "EventStats",
    "ExperimentRecord",
    "VerificationResult",
    "trial_rng",
    "run_model_verification",
    "run_common_experiment",
    "run_mixed_experiment",
    "emit_csv",
    "read_csv",
    "format_csv",
    "RARE_THRESHOLD",
    "FIG6_CONFIGS",
    "FIG7_CELLS",
    "FIG7_EVENTS",
    "FIXED_TRUTH",
]

RARE_THRESHOLD = 100
CHUNK = 64
CSV_FIELDS = ["cell_m", "cell_smnr_db", "eps_hat", "h", "m", "branch",
              "occurrences", "correct", "empirical_prob", "analytic_prob"]
UNDEFINED = "undefined"

# operating points for the voting figures: (h, m) -> list of (M, SMNR dB)
FIG6_CONFIGS = {
    (2, 1): list(zip((96, 85, 76, 64, 50, 41, 34, 28), (20, 20, 20, 10, 10, 10, 10, 0))),
    (3, 7): list(zip((101, 96, 92, 88, 50, 41, 34, 28), (20, 20, 20, 20, 10, 10, 10, 0))),
}
FIG7_CELLS = list(zip((96, 90, 85, 76, 64, 50, 41, 34, 28), (20, 20, 20, 20, 10, 10, 10, 10, 0)))
# own estimate alone, own + one neighbor, both neighbors without own
FIG7_EVENTS = [("hit", 0, 0), ("hit", 1, 0), ("miss", 2, 0)]
# 0-based version of the 1-based pair {14, 26}
FIXED_TRUTH = (13, 25)


class Engine(str, enum.Enum):
    SP = "sp"
    IDEAL = "ideal"


class Voting(str, enum.Enum):
    MAJORITY = "majority"
    CONSENSUS = "consensus"


class Branch(str, enum.Enum):
    MAJORITY = "majority"
    HIT = "hit"
    MISS = "miss"


EventKey = tuple  # (branch, h, m)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: a model, an engine and a list of cells.

    ``sweep`` holds ``(M, smnr_db)`` pairs for the pursuit engine or channel
    ``eps`` values for the ideal engine.  ``trials`` is per cell.
    ``events`` are ``(h, m)`` pairs for majority or ``(branch, h, m)``
    triples for consensus.  ``eps_pooling`` is ``"cell"`` (one estimate per
    cell) or ``"pooled"`` (one estimate over all cells).
    """

    model: ModelConfig
    engine: Engine = Engine.SP
    trials: int = 1000
    seed: int = 0
    events: tuple = ((1, 0),)
    sweep: tuple = ()
    voting: Voting = Voting.MAJORITY
    workers: int = 1
    eps_pooling: str = "cell"

    def __post_init__(self):
        object.__setattr__(self, "engine", Engine(self.engine))
        object.__setattr__(self, "voting", Voting(self.voting))
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.eps_pooling not in ("cell", "pooled"):
            raise ValueError("eps_pooling must be 'cell' or 'pooled'")
        sweep = tuple(self.sweep) or (self._default_cell(),)
        for cell in sweep:
            if self.engine is Engine.SP:
                m_rows, _ = cell
                if not self.model.t < m_rows < self.model.n:
                    raise ValueError(f"cell M={m_rows} violates T < M < N")
            else:
                ChannelParams(self.model.n, self.model.t, float(cell))
        object.__setattr__(self, "sweep", sweep)
        object.__setattr__(self, "events", tuple(tuple(e) for e in self.events))

    def _default_cell(self):
        if self.engine is Engine.SP:
            return (self.model.m_rows, self.model.smnr_db)
        raise ValueError("the ideal engine needs a sweep of eps values")

    def cell_model(self, cell) -> ModelConfig:
        if self.engine is Engine.SP:
            m_rows, smnr = cell
            return dataclasses.replace(self.model, m_rows=int(m_rows), smnr_db=float(smnr))
        return self.model


@dataclass
class EventStats:
    occurrences: int
    correct: int
    analytic_prob: float = math.nan

    @property
    def empirical_prob(self) -> float:
        return self.correct / self.occurrences if self.occurrences else math.nan

    @property
    def rare(self) -> bool:
        return self.occurrences < RARE_THRESHOLD


@dataclass
class ExperimentRecord:
    """Results for one cell.  ``cell`` is ``(M, smnr_db)`` or ``("ideal", eps)``."""

    cell: tuple
    eps_hat: float
    per_event: dict = field(default_factory=dict)
    counts: ConfusionCounts | None = None


@dataclass
class VerificationResult:
    histogram: np.ndarray
    counts: ConfusionCounts
    eps_hat: float
    chi2: float
    p_value: float
    truth: tuple | None


def trial_rng(seed: int, cell: int, trial: int) -> np.random.Generator:
    """Independent generator for one trial, stable across processes."""
    return np.random.Generator(np.random.SFC64(np.random.SeedSequence([seed, cell, trial])))


def _estimate(engine: Engine, cfg: ModelConfig, truth, eps, rng) -> np.ndarray:
    if engine is Engine.SP:
        inst = draw_sensor(cfg, truth, rng)
        return subspace_pursuit(inst.meas_y, inst.matrix_a, cfg.t).support_est
    return ideal_channel(truth, ChannelParams(cfg.n, cfg.t, eps), rng)


def _chunks(trials: int) -> list[tuple[int, int]]:
    return [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]


def _map(fn, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def _resolve_workers(workers: int) -> int:
    return (os.cpu_count() or 1) if workers == 0 else workers


# -- model verification ------------------------------------------------------


def _verify_chunk(task):
    cfg, engine, eps, truth, seed, lo, hi = task
    hist = np.zeros(cfg.n, dtype=np.int64)
    counts = ConfusionCounts()
    for k in range(lo, hi):
        rng = trial_rng(seed, 0, k)
        sup = np.asarray(truth) if truth is not None else draw_supports(cfg, rng).per_sensor[0]
        est = _estimate(engine, cfg, sup, eps, rng)
        hist[est] += 1
        counts = tally_confusion(sup, est, counts)
    return hist, counts


def run_model_verification(
    model: ModelConfig,
    trials: int,
    seed: int = 0,
    engine: Engine | str = Engine.SP,
    eps: float | None = None,
    truth: Sequence[int] | None = None,
    workers: int = 1,
) -> VerificationResult:
    """Per-index output frequencies of a single sensor.

    With ``truth=None`` every trial draws a fresh uniform support and the
    histogram should be uniform; ``chi2`` and ``p_value`` come from a
    goodness-of-fit test against the uniform law.  With a fixed ``truth``
    the histogram shows how often each index is reported and ``eps_hat``
    is the false-alarm based estimate.
    """
    engine = Engine(engine)
    if engine is Engine.IDEAL and eps is None:
        raise ValueError("the ideal engine needs eps")
    model = dataclasses.replace(model, l=1)
    if truth is not None:
        truth = tuple(int(i) for i in np.sort(np.asarray(truth)))
        if len(truth) != model.t:
            raise ValueError("fixed truth must have T indices")
    tasks = [(model, engine, eps, truth, seed, lo, hi) for lo, hi in _chunks(trials)]
    hist = np.zeros(model.n, dtype=np.int64)
    counts = ConfusionCounts()
    for h_part, c_part in _map(_verify_chunk, tasks, _resolve_workers(workers)):
        hist += h_part
        counts = counts + c_part
    chi2, p_value = stats.chisquare(hist)
    return VerificationResult(hist, counts, estimate_epsilon(counts, model.n, model.t),
                              float(chi2), float(p_value), truth)


# -- voting experiments ------------------------------------------------------


def _event_keys(cfg: ExperimentConfig) -> list[tuple]:
    if cfg.voting is Voting.MAJORITY:
        return [("majority", int(h), int(m)) for h, m in cfg.events]
    keys = []
    for branch, h, m in cfg.events:
        branch = Branch(branch).value
        if branch == "majority":
            raise ValueError("consensus events need branch 'hit' or 'miss'")
        keys.append((branch, int(h), int(m)))
    return keys


def _n_nodes(cfg: ExperimentConfig, keys) -> int:
    if cfg.voting is Voting.MAJORITY:
        return max(h + m for _, h, m in keys)
    return max(3, max(h + m + 1 for _, h, m in keys))


def _experiment_chunk(task):
    cfg, cell_idx, lo, hi = task
    cell = cfg.sweep[cell_idx]
    keys = _event_keys(cfg)
    n_nodes = _n_nodes(cfg, keys)
    model = dataclasses.replace(cfg.cell_model(cell), l=n_nodes)
    eps = float(cell) if cfg.engine is Engine.IDEAL else None
    occ = np.zeros(len(keys), dtype=np.int64)
    cor = np.zeros(len(keys), dtype=np.int64)
    counts = ConfusionCounts()
    n = model.n
    for k in range(lo, hi):
        rng = trial_rng(cfg.seed, cell_idx, k)
        layout = draw_supports(model, rng)
        ests = []
        hits = np.zeros((n_nodes, n), dtype=bool)
        for p in range(n_nodes):
            est = _estimate(cfg.engine, model, layout.per_sensor[p], eps, rng)
            ests.append(est)
            hits[p, est] = True
            counts = tally_confusion(layout.per_sensor[p], est, counts)

        if cfg.voting is Voting.MAJORITY:
            target = np.zeros(n, dtype=bool)
            target[layout.joint] = True
            for e, (_, h, m) in enumerate(keys):
                sel = hits[: h + m].sum(axis=0) == h
                occ[e] += int(sel.sum())
                cor[e] += int((sel & target).sum())
        else:
            target = np.zeros(n, dtype=bool)
            target[layout.per_sensor[0]] = True
            out = consensus(ests[0], ests[1:3], model.t, n)
            z = vote1(vote1(vote1(new_tally(n), ests[0]), ests[1]), ests[2])
            if np.any(z[out] < 2):
                raise AssertionError("consensus output index with fewer than two votes")
            for e, (branch, h, m) in enumerate(keys):
                own = hits[0] if branch == "hit" else ~hits[0]
                sel = own & (hits[1 : h + m + 1].sum(axis=0) == h)
                occ[e] += int(sel.sum())
                cor[e] += int((sel & target).sum())
    return cell_idx, occ, cor, counts


def _analytic(cfg: ExperimentConfig, key, eps_hat: float) -> float:
    branch, h, m = key
    model = cfg.model
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", analysis.DegenerateEventWarning)
        try:
            if branch == "majority":
                return analysis.majority_detect_prob(model.n, model.t, model.j, eps_hat, h, m)
            p = analysis.MixedParams(model.n, model.t, model.i_card, model.j, eps_hat)
            if branch == "hit":
                return analysis.consensus_prob_given_hit(p, h, m)
            if h < 1:
                # no closed form when the index has no vote at all
                return math.nan
            return analysis.consensus_prob_given_miss(p, h, m)
        except analysis.DomainError:
            return math.nan


def _run_experiment(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    keys = _event_keys(cfg)
    tasks = [(cfg, c, lo, hi) for c in range(len(cfg.sweep)) for lo, hi in _chunks(cfg.trials)]
    n_cells = len(cfg.sweep)
    occ = np.zeros((n_cells, len(keys)), dtype=np.int64)
    cor = np.zeros_like(occ)
    counts = [ConfusionCounts() for _ in range(n_cells)]
    for c, o, r, cc in _map(_experiment_chunk, tasks, _resolve_workers(cfg.workers)):
        occ[c] += o
        cor[c] += r
        counts[c] = counts[c] + cc

    n, t = cfg.model.n, cfg.model.t
    if cfg.eps_pooling == "pooled":
        total = ConfusionCounts()
        for cc in counts:
            total = total + cc
        eps_hats = [estimate_epsilon(total, n, t)] * n_cells
    else:
        eps_hats = [estimate_epsilon(cc, n, t) for cc in counts]

    records = []
    for c, cell in enumerate(cfg.sweep):
        label = (int(cell[0]), float(cell[1])) if cfg.engine is Engine.SP else ("ideal", float(cell))
        rec = ExperimentRecord(label, eps_hats[c], counts=counts[c])
        for e, key in enumerate(keys):
            rec.per_event[key] = EventStats(int(occ[c, e]), int(cor[c, e]),
                                            _analytic(cfg, key, eps_hats[c]))
        records.append(rec)
    return records


def run_common_experiment(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Conditional accuracy of index votes under the common support model.

    Each trial runs ``L = max(h + m)`` sensors.  For an event ``(h, m)`` the
    first ``h + m`` sensors are examined and every index reported by exactly
    ``h`` of them is counted; it is correct when it lies in the shared
    support.  The analytic value is the majority formula at the cell's
    ``eps_hat``.
    """
    if cfg.model.support_model is not SupportModel.COMMON:
        raise ValueError("common experiment needs the common support model")
    if cfg.voting is not Voting.MAJORITY:
        raise ValueError("common experiment uses majority voting")
    return _run_experiment(cfg)


def run_mixed_experiment(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Conditional accuracy of consensus votes under the mixed support model.

    Node 0 votes with neighbors 1 and 2.  For an event ``(branch, h, m)``
    node 0 either reported (``hit``) or missed (``miss``) the index and
    exactly ``h`` of nodes ``1..h+m`` reported it; it is correct when it
    lies in node 0's support.  Every trial also runs consensus for node 0
    and checks that each selected index has at least two votes.
    """
    if cfg.model.support_model is not SupportModel.MIXED:
        raise ValueError("mixed experiment needs the mixed support model")
    if cfg.voting is not Voting.CONSENSUS:
        raise ValueError("mixed experiment uses consensus voting")
    return _run_experiment(cfg)


# -- CSV -------------------------------------------------------------------


def _fmt(x: float) -> str:
    return UNDEFINED if x is None or math.isnan(x) else repr(float(x))


def _parse(s: str) -> float:
    return math.nan if s == UNDEFINED else float(s)


def format_csv(records: Iterable[ExperimentRecord], metadata: dict | None = None) -> str:
    """Render records as CSV text with ``#`` metadata lines first."""
    buf = io.StringIO()
    for k, v in (metadata or {}).items():
        buf.write(f"# {k}={v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for rec in records:
        if rec.cell and rec.cell[0] == "ideal":
            cell_m, cell_snr = "ideal", repr(float(rec.cell[1]))
        else:
            cell_m, cell_snr = str(int(rec.cell[0])), repr(float(rec.cell[1]))
        for (branch, h, m), st in rec.per_event.items():
            w.writerow([cell_m, cell_snr, repr(float(rec.eps_hat)), h, m, branch,
                        st.occurrences, st.correct, _fmt(st.empirical_prob),
                        _fmt(st.analytic_prob)])
    return buf.getvalue()


def emit_csv(records: Iterable[ExperimentRecord], path, metadata: dict | None = None) -> None:
    """Write records to ``path``; one row per cell and event.

    For ideal-channel cells ``cell_m`` is ``ideal`` and ``cell_smnr_db``
    carries the channel ``eps``.
    """
    text = format_csv(records, metadata)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_csv(path) -> tuple[list[ExperimentRecord], dict]:
    """Parse a file written by :func:`emit_csv` back into records."""
    meta = {}
    rows = []
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            k, _, v = line[1:].strip().partition("=")
            meta[k] = v
        else:
            body.append(line)
    reader = csv.DictReader(body)
    records: dict = {}
    for row in reader:
        if row["cell_m"] == "ideal":
            cell = ("ideal", float(row["cell_smnr_db"]))
        else:
            cell = (int(row["cell_m"]), float(row["cell_smnr_db"]))
        rec = records.get(cell)
        if rec is None:
            rec = records[cell] = ExperimentRecord(cell, float(row["eps_hat"]))
        key = (row["branch"], int(row["h"]), int(row["m"]))
        rec.per_event[key] = EventStats(int(row["occurrences"]), int(row["correct"]),
                                        _parse(row["analytic_prob"]))
        rows.append(row)
    return list(records.values()), meta
