"""Monte Carlo estimation of NJ cone fractions."""
from __future__ import annotations

import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..dissim import n_pairs, sample_entries
from ..errors import TooLarge
from ..kernels import default_backend, nj_batch
from ..newick import serialize
from ..nj_core import TieBreakPolicy, tree_from_choices
from ..rng import stream

# fixed so that chunk boundaries, and hence results, never depend on workers
CHUNK = 25_000
MAX_SIMULATE_N = 8


@dataclass(frozen=True)
class SampleSpec:
    n: int
    count: int
    seed: int
    policy: TieBreakPolicy = TieBreakPolicy.UNIFORM

    def __post_init__(self):
        object.__setattr__(self, "policy", TieBreakPolicy.parse(self.policy))
        if self.count < 1:
            raise ValueError("sample count must be >= 1")
        if self.n < 4:
            raise ValueError("n must be >= 4")


@dataclass
class Row:
    tree: str
    partner: str
    count: int

    @property
    def pair(self) -> frozenset:
        return frozenset((self.tree, self.partner))


@dataclass
class FrequencyTable:
    n: int
    policy: TieBreakPolicy
    samples: int
    seed: int
    rows: dict[str, Row] = field(default_factory=dict)
    strict_ties: int = 0  # tolerance ties met at k > 4

    def percent(self, key: str) -> float:
        return 100.0 * self.rows[key].count / self.samples

    def pair_count(self, key: str) -> int:
        row = self.rows[key]
        return row.count + self.rows[row.partner].count

    def pair_percent(self, key: str) -> float:
        return 100.0 * self.pair_count(key) / self.samples

    @property
    def pair_rows(self) -> dict[frozenset, float]:
        return {r.pair: self.pair_percent(k) for k, r in self.rows.items()}

    def hit_keys(self) -> list[str]:
        return sorted(k for k, r in self.rows.items() if r.count > 0)


def draw_chunk(n: int, seed: int, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
    """Sampled maps and tie-break uniforms for samples ``start..stop-1``."""
    d = n_pairs(n)
    X = np.empty((stop - start, d))
    U = np.empty((stop - start, n - 3))
    for row, i in enumerate(range(start, stop)):
        g = stream(seed, i)
        X[row] = sample_entries(d, g)
        U[row] = g.random(n - 3)
    return X, U


def _run_chunk(args):
    n, seed, policy, start, stop, backend = args
    X, U = draw_chunk(n, seed, start, stop)
    choices, partner, ties = nj_batch(X, U, n, policy, backend)
    combined = np.concatenate([choices, partner[:, None]], axis=1)
    uniq, counts = np.unique(combined, axis=0, return_counts=True)
    return {tuple(int(v) for v in u): int(c) for u, c in zip(uniq, counts)}, int(ties.sum())


def simulate(spec: SampleSpec, workers: int | None = None, backend: str | None = None,
             allow_large: bool = False) -> FrequencyTable:
    """Sample ``spec.count`` maps, run NJ on each and tabulate the agglomerated trees."""
    n = spec.n
    if n > MAX_SIMULATE_N and not allow_large:
        raise TooLarge(f"simulate is limited to n <= {MAX_SIMULATE_N} without the override")
    backend = backend or default_backend()
    workers = workers or os.cpu_count() or 1
    jobs = [(n, spec.seed, spec.policy, lo, min(lo + CHUNK, spec.count), backend)
            for lo in range(0, spec.count, CHUNK)]
    outcomes: Counter = Counter()
    ties = 0
    if workers <= 1 or len(jobs) == 1:
        results = map(_run_chunk, jobs)
        for part, t in results:
            outcomes.update(part)
            ties += t
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part, t in pool.map(_run_chunk, jobs):
                outcomes.update(part)
                ties += t
    return _tabulate(spec, outcomes, ties)


def _tabulate(spec: SampleSpec, outcomes: Counter, ties: int) -> FrequencyTable:
    labels = [str(i + 1) for i in range(spec.n)]
    table = FrequencyTable(spec.n, spec.policy, spec.count, spec.seed, strict_ties=ties)
    cache: dict[tuple, str] = {}

    def key_of(choices):
        if choices not in cache:
            cache[choices] = serialize(tree_from_choices(labels, choices))
        return cache[choices]

    for combo, count in sorted(outcomes.items()):
        chosen = combo[:-1]
        other = chosen[:-1] + (combo[-1],)
        tree, partner = key_of(chosen), key_of(other)
        for key, mate, c in ((tree, partner, count), (partner, tree, 0)):
            row = table.rows.get(key)
            if row is None:
                table.rows[key] = Row(key, mate, c)
            else:
                row.count += c
    return table
