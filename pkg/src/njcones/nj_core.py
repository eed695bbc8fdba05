"""Neighbor-Joining with explicit agglomeration order.

This is the reference path: one dissimilarity map at a time, every join
recorded. :mod:`njcones.kernels` runs the same selection rules over large
batches for the Monte Carlo harness.

Working boughs occupy slots ``0..k-1``. Joining slots ``i < j`` puts the new
bouquet in slot ``i`` and moves slot ``k-1`` into slot ``j``; the batch kernels
use the same convention, so a join sequence can be replayed from slot-pair
indices alone (see :func:`tree_from_choices`).
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from .dissim import DissimilarityMap
from .errors import KTooSmall, MalformedTrace
from .tree import AgglomeratedTree, Inner, Leaf, Node, StepClass

TIE_RTOL = 1e-12


class TieBreakPolicy(enum.Enum):
    LEXICOGRAPHIC = "lex"
    UNIFORM = "uniform"
    BAGGAGE = "baggage"

    @classmethod
    def parse(cls, value) -> "TieBreakPolicy":
        if isinstance(value, cls):
            return value
        aliases = {"lexicographic": "lex", "regular": "lex"}
        value = aliases.get(str(value).lower(), str(value).lower())
        return cls(value)

    @property
    def randomized(self) -> bool:
        return self is not TieBreakPolicy.LEXICOGRAPHIC

    @property
    def code(self) -> int:
        return {"lex": 0, "uniform": 1, "baggage": 2}[self.value]


class BoughKind(enum.Enum):
    STEM = "stem"
    BOUQUET = "bouquet"


@dataclass(frozen=True)
class Bough:
    id: int
    leaf_set: frozenset
    creation_step: int | None = None
    subtree: Node | None = field(default=None, compare=False, repr=False)

    @property
    def kind(self) -> BoughKind:
        return BoughKind.STEM if len(self.leaf_set) == 1 else BoughKind.BOUQUET

    @property
    def is_stem(self) -> bool:
        return len(self.leaf_set) == 1

    @property
    def size(self) -> int:
        return len(self.leaf_set)

    @property
    def min_leaf(self) -> int:
        return min(self.leaf_set)


@dataclass(frozen=True)
class BoughVector:
    stems: int
    bouquets: int

    @property
    def k(self) -> int:
        return self.stems + self.bouquets

    def step(self, cls: StepClass) -> "BoughVector":
        dl, dr = cls.displacement
        return BoughVector(self.stems + dl, self.bouquets + dr)

    def as_tuple(self) -> tuple[int, int]:
        return (self.stems, self.bouquets)


@dataclass(frozen=True)
class QMatrix:
    """Q-criterion over the ``k`` current boughs, one value per unordered pair."""

    k: int
    values: np.ndarray

    def pairs(self):
        return list(itertools.combinations(range(self.k), 2))

    def __getitem__(self, ab) -> float:
        a, b = sorted(ab)
        return float(self.values[pair_index(self.k, a, b)])


def pair_index(k: int, i: int, j: int) -> int:
    """Position of slot pair ``i < j`` in the row-major list of ``k`` choose 2 pairs."""
    return i * k - i * (i + 1) // 2 + (j - i - 1)


def pair_from_index(k: int, idx: int) -> tuple[int, int]:
    for i in range(k - 1):
        width = k - 1 - i
        if idx < width:
            return i, i + 1 + idx
        idx -= width
    raise IndexError("pair index out of range")


def q_matrix(D, k: int | None = None) -> QMatrix:
    """Q(a,b) = (k-2) D(a,b) - sum_c D(a,c) - sum_c D(b,c) over all k boughs."""
    D = np.asarray(D, dtype=np.float64)
    if k is None:
        k = D.shape[0]
    if k < 4:
        raise KTooSmall(f"the Q-criterion needs at least 4 boughs, got {k}")
    D = D[:k, :k]
    row = D.sum(axis=1)
    iu0, iu1 = np.triu_indices(k, 1)
    return QMatrix(k, (k - 2) * D[iu0, iu1] - row[iu0] - row[iu1])


def complement(pair, k: int = 4) -> tuple[int, int]:
    rest = tuple(sorted(set(range(k)) - set(pair)))
    if len(rest) != 2:
        raise ValueError("complement pairs exist only for k = 4")
    return rest


def four_point_q(D, pair) -> float:
    """Cancellation-free Q_4 value of ``pair``: minus the sum of the four cross entries.

    The cross entries of a pair and of its complement are the same set and are
    summed in one fixed order, so both pairs get bit-identical values.
    """
    D = np.asarray(D, dtype=np.float64)
    a, b = pair
    c, d = complement(pair, 4)
    cross = sorted((min(x, y), max(x, y)) for x in (a, b) for y in (c, d))
    total = 0.0
    for x, y in cross:
        total += D[x, y]
    return -total


@dataclass(frozen=True)
class TieReport:
    tied: tuple[tuple[int, int], ...]
    chosen: tuple[int, int]
    structural: bool = False  # the k = 4 pair/complement tie

    @property
    def is_tie(self) -> bool:
        return len(self.tied) > 1


def _lex_key(pair, boughs) -> tuple[int, int]:
    a, b = (boughs[x].min_leaf for x in pair)
    return (min(a, b), max(a, b))


def _resolve(tied, boughs, policy: TieBreakPolicy, rng):
    tied = sorted(tied, key=lambda p: _lex_key(p, boughs))
    if len(tied) == 1 or policy is TieBreakPolicy.LEXICOGRAPHIC:
        return tied, tied[0]
    if rng is None:
        raise ValueError(f"policy {policy.value!r} needs a random stream")
    u = rng.random()
    pool = tied
    if policy is TieBreakPolicy.BAGGAGE:
        carried = [boughs[a].size + boughs[b].size for a, b in tied]
        top = max(carried)
        pool = [p for p, s in zip(tied, carried) if s == top]
    return tied, pool[int(u * len(pool))]


def select_pair(Q: QMatrix, boughs, policy=TieBreakPolicy.LEXICOGRAPHIC, rng=None):
    """Pick the pair to join; returns ``(pair, TieReport)``.

    At ``k = 4`` the argmin and its complement always tie, so the policy
    decides between exactly those two. Otherwise entries within
    ``TIE_RTOL`` (relative) of the minimum form the tied set.
    """
    policy = TieBreakPolicy.parse(policy)
    k = Q.k
    if k < 4:
        raise KTooSmall(f"cannot select a pair among {k} boughs")
    pairs = Q.pairs()
    vals = Q.values
    best = int(np.argmin(vals))
    if k == 4:
        p = pairs[best]
        tied = [p, complement(p, 4)]
        structural = True
    else:
        qmin = vals[best]
        scale = np.maximum(1.0, np.maximum(np.abs(vals), abs(qmin)))
        hits = np.flatnonzero(np.abs(vals - qmin) <= TIE_RTOL * scale)
        tied = [pairs[i] for i in hits]
        structural = False
    tied, chosen = _resolve(tied, boughs, policy, rng)
    return chosen, TieReport(tuple(tied), chosen, structural)


def reduce(D, pair) -> np.ndarray:
    """Join slots ``a, b`` into a new bough u; D(c,u) = (D(a,c) + D(b,c) - D(a,b)) / 2.

    Slot layout of the result follows the module convention. Entries may go
    negative.
    """
    D = np.array(D, dtype=np.float64)
    k = D.shape[0]
    i, j = sorted(pair)
    new = 0.5 * ((D[i, :] + D[j, :]) - D[i, j])
    D[i, :] = new
    D[:, i] = new
    D[i, i] = 0.0
    last = k - 1
    if j != last:
        D[j, :] = D[last, :]
        D[:, j] = D[:, last]
        D[j, j] = 0.0
    return D[:last, :last]


def classify_step(first: Bough, second: Bough) -> StepClass:
    return StepClass.of(first.is_stem, second.is_stem)


@dataclass(frozen=True)
class TraceEvent:
    step: int
    pair: tuple[int, int]  # bough ids
    step_class: StepClass
    before: BoughVector
    tied: tuple[tuple[int, int], ...] = ()  # bough-id pairs, lexicographic order


@dataclass(frozen=True)
class FinalTie:
    pairs: tuple[tuple[int, int], tuple[int, int]]
    chosen: int  # index into pairs


@dataclass(frozen=True)
class AgglomerationTrace:
    n: int
    events: tuple[TraceEvent, ...]
    final_tie: FinalTie | None = None

    @property
    def classes(self) -> list[StepClass]:
        return [e.step_class for e in self.events]

    def bough_vectors(self) -> list[BoughVector]:
        out = [BoughVector(self.n, 0)]
        for e in self.events:
            out.append(out[-1].step(e.step_class))
        return out


@dataclass(frozen=True)
class NJResult:
    tree: AgglomeratedTree
    trace: AgglomerationTrace
    partner: AgglomeratedTree  # the other resolution of the k = 4 tie
    choices: tuple[int, ...]  # slot-pair index of every join
    partner_choice: int


def _initial_boughs(labels) -> list[Bough]:
    return [Bough(i, frozenset([i]), None, Leaf(name)) for i, name in enumerate(labels)]


def _join(boughs, i, j, step, new_id):
    a, b = boughs[i], boughs[j]
    node = Inner(step, a.subtree, b.subtree)
    merged = Bough(new_id, a.leaf_set | b.leaf_set, step, node)
    out = list(boughs)
    out[i] = merged
    last = len(out) - 1
    if j != last:
        out[j] = out[last]
    out.pop()
    return out


def run_nj(D: DissimilarityMap, policy=TieBreakPolicy.LEXICOGRAPHIC, rng=None) -> NJResult:
    """Run NJ down to three boughs, recording the order of every join.

    Returns both resolutions of the final tie: ``tree`` is the one chosen by
    ``policy``, ``partner`` the other.
    """
    policy = TieBreakPolicy.parse(policy)
    n = D.n
    if n < 4:
        raise KTooSmall(f"NJ needs at least 4 taxa, got {n}")
    work = D.matrix()
    boughs = _initial_boughs(D.labels)
    next_id = n
    stems, bouquets = n, 0
    events, choices = [], []
    final_tie = None
    partner_tree = None
    partner_choice = -1
    for step in range(1, n - 2):
        k = len(boughs)
        Q = q_matrix(work, k)
        (i, j), report = select_pair(Q, boughs, policy, rng)
        a, b = boughs[i], boughs[j]
        cls = classify_step(a, b)
        tied_ids = tuple(tuple(sorted((boughs[x].id, boughs[y].id))) for x, y in report.tied)
        ids = tuple(sorted((a.id, b.id)))
        events.append(TraceEvent(step, ids, cls, BoughVector(stems, bouquets), tied_ids))
        choices.append(pair_index(k, i, j))
        if k == 4:
            alt = complement((i, j), 4)
            other = tied_ids[1] if report.tied[0] == (i, j) else tied_ids[0]
            pairs = tuple(sorted([ids, other]))
            final_tie = FinalTie(pairs, pairs.index(ids))
            partner_choice = pair_index(4, *alt)
            partner_tree = _close(_join(boughs, alt[0], alt[1], step, next_id))
        stems, bouquets = BoughVector(stems, bouquets).step(cls).as_tuple()
        boughs = _join(boughs, i, j, step, next_id)
        work = reduce(work, (i, j))
        next_id += 1
    trace = AgglomerationTrace(n, tuple(events), final_tie)
    return NJResult(_close(boughs), trace, partner_tree, tuple(choices), partner_choice)


def _close(boughs) -> AgglomeratedTree:
    return AgglomeratedTree(tuple(b.subtree for b in boughs))


def tree_from_choices(labels, choices) -> AgglomeratedTree:
    """Replay a sequence of slot-pair indices from the star tree."""
    boughs = _initial_boughs(labels)
    if len(choices) != len(labels) - 3:
        raise ValueError("need exactly n-3 joins")
    for step, idx in enumerate(choices, start=1):
        i, j = pair_from_index(len(boughs), int(idx))
        boughs = _join(boughs, i, j, step, len(labels) + step - 1)
    return _close(boughs)


# -- NJ paths ----------------------------------------------------------------

NJ_PATH_ENDS = {(2, 1), (1, 2), (0, 3)}


@dataclass(frozen=True)
class NJPath:
    """Join classes after the forced first alpha, starting from (n-2, 1)."""

    n: int
    steps: tuple[StepClass, ...]

    @property
    def start(self) -> tuple[int, int]:
        return (self.n - 2, 1)

    def points(self) -> list[tuple[int, int]]:
        pts = [self.start]
        for s in self.steps:
            dl, dr = s.displacement
            x, y = pts[-1]
            pts.append((x + dl, y + dr))
        return pts

    @property
    def end(self) -> tuple[int, int]:
        return self.points()[-1]

    def word(self, ascii: bool = False) -> str:
        return "".join(s.letter if ascii else s.symbol for s in self.steps)

    def is_valid(self) -> bool:
        if len(self.steps) != self.n - 4:
            return False
        pts = self.points()
        return all(x >= 0 and y >= 1 for x, y in pts) and pts[-1] in NJ_PATH_ENDS


def nj_path(trace: AgglomerationTrace, n: int | None = None) -> NJPath:
    """Drop the forced first alpha and return the lattice path of the remaining joins."""
    n = trace.n if n is None else n
    events = trace.events
    if len(events) != n - 3:
        raise MalformedTrace(f"expected {n - 3} events, got {len(events)}")
    if not events or events[0].step_class is not StepClass.ALPHA:
        raise MalformedTrace("the first join must merge two stems")
    vec = BoughVector(n, 0)
    for e in events:
        if e.before != vec:
            raise MalformedTrace(
                f"step {e.step}: recorded bough vector {e.before.as_tuple()} != {vec.as_tuple()}")
        vec = vec.step(e.step_class)
        if vec.stems < 0 or vec.bouquets < 1:
            raise MalformedTrace(f"step {e.step} leaves the admissible region at {vec.as_tuple()}")
    if vec.as_tuple() not in NJ_PATH_ENDS:
        raise MalformedTrace(f"path ends at {vec.as_tuple()}")
    return NJPath(n, tuple(e.step_class for e in events[1:]))
