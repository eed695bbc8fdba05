"""Exact counting: Motzkin triangles, NJ paths and agglomerated trees.

All counts are Python integers, so nothing overflows.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb, factorial
from typing import Callable, Iterator

from .errors import InvalidPath, TooLarge
from .newick import serialize
from .nj_core import NJ_PATH_ENDS, NJPath
from .tree import AgglomeratedTree, Inner, Leaf, StepClass


def binom(top: int, bottom) -> int:
    """Binomial coefficient; 0 unless ``bottom`` is an integer in ``[0, top]``."""
    if isinstance(bottom, float):
        if not bottom.is_integer():
            return 0
        bottom = int(bottom)
    if top < 0 or bottom < 0 or bottom > top:
        return 0
    return comb(top, bottom)


def choose2(x: int) -> int:
    """x(x-1)/2 as a polynomial in x (also defined for negative x)."""
    return x * (x - 1) // 2


def double_factorial(m: int) -> int:
    out = 1
    while m > 1:
        out *= m
        m -= 2
    return out


def unrooted_binary_trees(n: int) -> int:
    return double_factorial(2 * n - 5)


# -- Motzkin triangles -----------------------------------------------------------

@dataclass
class MotzkinTriangle:
    """``rows[k][j]`` counts (weighted) partial Motzkin paths of length k ending at height j."""

    rows: list[list[int]]
    weights: Callable[[int, int], tuple[int, int, int]] | None = field(default=None, repr=False)

    @property
    def kmax(self) -> int:
        return len(self.rows) - 1

    def __getitem__(self, kj) -> int:
        k, j = kj
        if 0 <= k < len(self.rows) and 0 <= j < len(self.rows[k]):
            return self.rows[k][j]
        return 0

    def row_sum(self, k: int) -> int:
        return sum(self.rows[k])


def motzkin_triangle(kmax: int) -> MotzkinTriangle:
    """M[0][0] = 1 and M[k+1][j] = M[k][j-1] + M[k][j] + M[k][j+1]."""
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    return weighted_motzkin_triangle(kmax, lambda k, j: (1, 1, 1), seed=1)


def weighted_motzkin_triangle(kmax: int, weights, seed: int = 1) -> MotzkinTriangle:
    """M[k+1][j] = a[k][j-1] M[k][j-1] + c[k][j] M[k][j] + b[k][j+1] M[k][j+1].

    ``weights(k, j)`` returns ``(a, b, c)`` for the up, down and level steps
    leaving cell ``(k, j)``.
    """
    rows = [[seed]]
    for k in range(kmax):
        prev = rows[-1]
        w = [weights(k, j) for j in range(len(prev))]
        nxt = []
        for j in range(k + 2):
            total = 0
            if 1 <= j <= len(prev):
                total += w[j - 1][0] * prev[j - 1]
            if j < len(prev):
                total += w[j][2] * prev[j]
            if j + 1 < len(prev):
                total += w[j + 1][1] * prev[j + 1]
            nxt.append(total)
        rows.append(nxt)
    return MotzkinTriangle(rows, weights)


def motzkin_closed_form(k: int, j: int) -> int:
    """M_{k,j} = sum_i C(k,i) [C(k-i, (k+j-i)/2) - C(k-i, (k+j-i+2)/2)]."""
    if not 0 <= j <= k:
        return 0
    total = 0
    for i in range(k + 1):
        top = k - i
        a = k + j - i
        first = binom(top, a // 2) if a % 2 == 0 else 0
        second = binom(top, (a + 2) // 2) if a % 2 == 0 else 0
        total += comb(k, i) * (first - second)
    return total


def motzkin_number(k: int) -> int:
    """Motzkin paths of length k returning to height 0."""
    return motzkin_triangle(k)[k, 0]


def catalan(k: int) -> int:
    if k < 0:
        raise ValueError("k must be >= 0")
    return comb(2 * k, k) // (k + 1)


def motzkin_catalan_checks(kmax: int) -> dict:
    """Check both Catalan identities for every k <= kmax; returns the per-k results."""
    tri = motzkin_triangle(kmax)
    m = [tri[k, 0] for k in range(kmax + 1)]
    first = {k: m[k] == sum(comb(k, 2 * i) * catalan(i) for i in range(k // 2 + 1))
             for k in range(kmax + 1)}
    second = {k: catalan(k + 1) == sum(comb(k, i) * m[i] for i in range(k + 1))
              for k in range(kmax + 1)}
    return {"motzkin": m, "motzkin_from_catalan": first, "catalan_from_motzkin": second,
            "ok": all(first.values()) and all(second.values())}


# -- counting agglomerated trees -------------------------------------------------

def nj_weights(n: int, s: int, j: int) -> tuple[int, int, int]:
    """Step multiplicities leaving height j after s non-forced joins.

    With ``l = n-s-j-2`` stems and ``j+1`` bouquets there are C(l,2) alpha,
    C(j+1,2) beta and l(j+1) gamma choices.
    """
    if n < 4:
        raise ValueError("n must be >= 4")
    if not (0 <= s <= n - 4 and 0 <= j <= s):
        return (0, 0, 0)
    stems = n - s - j - 2
    return (choose2(stems), choose2(j + 1), stems * (j + 1))


def phi(n: int) -> int:
    """Number of agglomerated trees on n leaves: C(n,2) C(n-1,2) ... C(4,2)."""
    if n < 4:
        raise ValueError("n must be >= 4")
    out = 1
    for m in range(4, n + 1):
        out *= comb(m, 2)
    num = n * factorial(n - 1) ** 2
    den = 3 * 2 ** (n - 1)
    assert num % den == 0 and num // den == out
    return out


def nj_weighted_triangle(n: int) -> MotzkinTriangle:
    if n < 4:
        raise ValueError("n must be >= 4")
    return weighted_motzkin_triangle(n - 4, lambda s, j: nj_weights(n, s, j), seed=comb(n, 2))


def phi_via_weighted_triangle(n: int) -> int:
    """Phi(n) as M_{n-4,0} + M_{n-4,1} + M_{n-4,2} in the NJ-weighted triangle."""
    tri = nj_weighted_triangle(n)
    return tri[n - 4, 0] + tri[n - 4, 1] + tri[n - 4, 2]


# -- NJ paths and Motzkin paths --------------------------------------------------

_MOTZKIN_VEC = {"u": (1, 1), "d": (1, -1), "h": (1, 0)}


def step_map(v: tuple[int, int]) -> tuple[int, int]:
    """The involution [[-1, -1], [0, 1]] applied to a step vector."""
    x, y = v
    return (-x - y, y)


@dataclass(frozen=True)
class MotzkinPath:
    steps: tuple[str, ...]
    start: tuple[int, int] = (0, 0)

    def points(self) -> list[tuple[int, int]]:
        pts = [self.start]
        for s in self.steps:
            dx, dy = _MOTZKIN_VEC[s]
            x, y = pts[-1]
            pts.append((x + dx, y + dy))
        return pts

    def word(self) -> str:
        return "".join(self.steps)


def nj_to_motzkin(path: NJPath) -> MotzkinPath:
    if not path.is_valid():
        raise InvalidPath(f"not an NJ path for n={path.n}: {path.word()}")
    steps = []
    inverse = {v: k for k, v in _MOTZKIN_VEC.items()}
    for s in path.steps:
        steps.append(inverse[step_map(s.displacement)])
    out = MotzkinPath(tuple(steps), (1, 1))
    _check_motzkin(out, path.n)
    return out


def _check_motzkin(q: MotzkinPath, n: int):
    pts = q.points()
    if q.start != (1, 1):
        raise InvalidPath("Motzkin images of NJ paths start at (1, 1)")
    if len(q.steps) != n - 4:
        raise InvalidPath(f"expected length {n - 4}, got {len(q.steps)}")
    if any(y < 1 for _, y in pts):
        raise InvalidPath("path drops below its baseline")
    if pts[-1][1] not in (1, 2, 3):
        raise InvalidPath(f"path ends at height {pts[-1][1]}")


def motzkin_to_nj(q: MotzkinPath, n: int) -> NJPath:
    _check_motzkin(q, n)
    by_vec = {s.displacement: s for s in StepClass}
    steps = tuple(by_vec[step_map(_MOTZKIN_VEC[s])] for s in q.steps)
    path = NJPath(n, steps)
    if not path.is_valid():
        raise InvalidPath(f"image is not an NJ path: {path.word()}")
    return path


def enumerate_nj_paths(n: int) -> list[NJPath]:
    """All NJ paths for n taxa, by depth-first search over admissible steps."""
    if n < 4:
        raise ValueError("n must be >= 4")
    out = []
    length = n - 4

    def dfs(pos, steps):
        if len(steps) == length:
            if pos in NJ_PATH_ENDS:
                out.append(NJPath(n, tuple(steps)))
            return
        for s in StepClass:
            dl, dr = s.displacement
            nxt = (pos[0] + dl, pos[1] + dr)
            if nxt[0] >= 0 and nxt[1] >= 1:
                dfs(nxt, steps + [s])

    dfs((n - 2, 1), [])
    return out


def count_nj_paths(n: int) -> int:
    if n < 4:
        raise ValueError("n must be >= 4")
    return motzkin_triangle(n - 3)[n - 3, 1]


# -- brute force -----------------------------------------------------------------

ENUMERATE_MAX_N = 8


def iter_agglomerated_trees(n: int, labels=None) -> Iterator[AgglomeratedTree]:
    """Every sequence of joins from the star on n leaves down to three boughs."""
    labels = list(labels) if labels else [str(i + 1) for i in range(n)]

    def rec(boughs, step):
        if len(boughs) == 3:
            yield AgglomeratedTree(tuple(boughs))
            return
        for i, j in itertools.combinations(range(len(boughs)), 2):
            rest = [b for x, b in enumerate(boughs) if x != i and x != j]
            yield from rec(rest + [Inner(step, boughs[i], boughs[j])], step + 1)

    yield from rec([Leaf(x) for x in labels], 1)


def enumerate_agglomerated_trees(n: int, allow_large: bool = False, labels=None) -> set[str]:
    """Canonical ordered Newick strings of all agglomerated trees on n leaves."""
    if n < 4:
        raise ValueError("n must be >= 4")
    if n > ENUMERATE_MAX_N and not allow_large:
        raise TooLarge(f"brute-force enumeration is limited to n <= {ENUMERATE_MAX_N}")
    return {serialize(t) for t in iter_agglomerated_trees(n, labels)}


def path_multiplicity(n: int, path: NJPath) -> int:
    """Number of agglomerated trees whose join classes follow ``path``."""
    total = comb(n, 2)
    stems, bouquets = n - 2, 1
    for s in path.steps:
        if s is StepClass.ALPHA:
            total *= comb(stems, 2)
        elif s is StepClass.BETA:
            total *= comb(bouquets, 2)
        else:
            total *= stems * bouquets
        dl, dr = s.displacement
        stems, bouquets = stems + dl, bouquets + dr
    return total
