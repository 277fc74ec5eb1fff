"""Monte-Carlo sweeps over URLLC load and reliability target, CSV in and out."""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np

from .config import ScenarioConfig
from .frame import URLLC, draw_user_arrivals, generate_topology
from .scheduler import MetricSet, baseline_no_urllc, run_scheme

CSV_HEADER = ("scheme", "n_urllc", "epsilon", "seed", "embb_rate_bps", "bs_profit", "urllc_utility", "drops")
ALL_SCHEMES = ("contract", "puncture", "nourllc")


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    n_urllc: int
    epsilon: float
    seed: int
    embb_rate_bps: float
    bs_profit: float
    urllc_utility: float
    drops: int
    runtime_s: float = field(default=0.0, compare=False)
    metrics: MetricSet | None = field(default=None, compare=False, repr=False)

    @property
    def key(self) -> tuple:
        return (self.scheme, self.n_urllc, self.epsilon, self.seed)


def run_seed(master: int, index: int) -> int:
    """Per-run seed from (master, run index); independent of execution order."""
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


def worker_count() -> int:
    raw = os.environ.get("COEXIST_THREADS")
    if raw is None or raw == "":
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"COEXIST_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ValueError(f"COEXIST_THREADS must be a positive integer, got {raw!r}")
    return n


def _schemes(selector: str | Sequence[str]) -> tuple[str, ...]:
    if isinstance(selector, str):
        selector = ALL_SCHEMES if selector == "all" else (selector,)
    for s in selector:
        if s not in ALL_SCHEMES:
            raise ValueError(f"unknown scheme {s!r}")
    return tuple(s for s in ALL_SCHEMES if s in selector)


def _run_point(task: tuple[dict, int, float, int, tuple[str, ...]]) -> list[ResultRow]:
    values, n_urllc, epsilon, seed_index, schemes = task
    config = ScenarioConfig(values)
    params = config.radio(error_target=epsilon)
    frame = config.frame()
    ladder = config.ladder()
    pricing = config.pricing()
    seed = run_seed(config["sim.master_seed"], seed_index)
    ttis = config["sim.ttis"]
    users = generate_topology(seed, config["topology.n_embb"], n_urllc, config["topology.radius_m"])
    urllc_ids = [u.id for u in users if u.role == URLLC]
    slots = ttis * frame.minislots_per_tti
    arrivals = draw_user_arrivals(seed, config["traffic.arrival_rate"], urllc_ids, slots)
    rows = []
    for scheme in schemes:
        start = time.perf_counter()
        if scheme == "nourllc":
            m = baseline_no_urllc(users, params, frame, pricing, n_ttis=ttis)
        else:
            sched = run_scheme(
                users,
                arrivals,
                ttis,
                params,
                frame,
                ladder,
                pricing,
                scheme=scheme,
                prefer_low_gain=config["matching.urllc_prefers_low_gain"],
                infeasible_policy=config["scheduler.infeasible_policy"],
            )
            m = sched.metrics
            if m.arrivals != m.scheduled + m.drops:
                raise RuntimeError(f"packet accounting broken: {m.arrivals} != {m.scheduled} + {m.drops}")
        for name in ("embb_sum_rate", "bs_profit", "urllc_network_utility"):
            if not math.isfinite(getattr(m, name)):
                raise RuntimeError(f"non-finite {name} in {scheme} run")
        rows.append(
            ResultRow(
                scheme,
                n_urllc,
                epsilon,
                seed_index,
                m.embb_sum_rate,
                m.bs_profit,
                m.urllc_network_utility,
                m.drops,
                time.perf_counter() - start,
                m,
            )
        )
    return rows


def run_experiment(
    config: ScenarioConfig,
    schemes: str | Sequence[str] | None = None,
    workers: int | None = None,
) -> list[ResultRow]:
    """Every (sweep point, seed, scheme) run, sorted by row key.

    Topology and arrivals depend only on (master seed, run index), so all
    schemes, URLLC counts and reliability targets see common random numbers
    and the first k URLLC users are shared across counts.
    """
    selected = _schemes(schemes if schemes is not None else config["scheduler.scheme"])
    tasks = [
        (config.values, n, eps, s, selected)
        for n in config.urllc_sweep()
        for eps in config.epsilon_sweep()
        for s in range(config["sim.seeds"])
    ]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_point, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        chunks = [_run_point(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    return sorted(rows, key=lambda r: r.key)


def _check_unique(rows: Sequence[ResultRow]) -> None:
    seen = set()
    for r in rows:
        if r.key in seen:
            raise ValueError(f"duplicate result row {r.key}")
        seen.add(r.key)


def write_rows(rows: Iterable[ResultRow], fh: TextIO) -> None:
    rows = sorted(rows, key=lambda r: r.key)
    if not rows:
        raise ValueError("no rows to write")
    _check_unique(rows)
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow(
            [
                r.scheme,
                r.n_urllc,
                repr(float(r.epsilon)),
                r.seed,
                repr(float(r.embb_rate_bps)),
                repr(float(r.bs_profit)),
                repr(float(r.urllc_utility)),
                r.drops,
            ]
        )


def emit_csv(rows: Iterable[ResultRow], path: str | Path) -> None:
    """Header plus one sorted line per row; floats in shortest round-trip form."""
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_rows(rows, fh)


def read_csv(path: str | Path) -> list[ResultRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        rows = [
            ResultRow(s, int(n), float(e), int(seed), float(rate), float(profit), float(util), int(drops))
            for s, n, e, seed, rate, profit, util, drops in reader
        ]
    _check_unique(rows)
    return rows


@dataclass(frozen=True)
class Summary:
    count: int
    mean: float
    stderr: float


def summarize(rows: Iterable[ResultRow], metric: str) -> dict[tuple[str, int, float], Summary]:
    """Mean and standard error over seeds per (scheme, n_urllc, epsilon)."""
    groups: dict[tuple[str, int, float], list[float]] = {}
    for r in rows:
        groups.setdefault((r.scheme, r.n_urllc, r.epsilon), []).append(float(getattr(r, metric)))
    out = {}
    for key, values in sorted(groups.items()):
        a = np.asarray(values)
        se = float(a.std(ddof=1) / math.sqrt(a.size)) if a.size > 1 else math.nan
        out[key] = Summary(a.size, float(a.mean()), se)
    return out
