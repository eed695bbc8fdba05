"""Dissimilarity maps: validation, text formats and uniform sampling."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (AsymmetryError, DissimilarityError, NegativeEntryError,
                     NonzeroDiagonalError, ParseError, TooSmallError)


def n_pairs(n: int) -> int:
    return n * (n - 1) // 2


def taxa_from_pairs(d: int) -> int:
    n = int(round((1 + math.sqrt(1 + 8 * d)) / 2))
    if n_pairs(n) != d:
        raise ValueError(f"{d} is not a triangular number of pairs")
    return n


@dataclass(frozen=True)
class DissimilarityMap:
    """Symmetric map with zero diagonal, stored as its strict upper triangle.

    ``entries`` is ordered (0,1), (0,2), ..., (0,n-1), (1,2), ... which is also
    the coordinate order of the point in R^(n choose 2).
    """

    n: int
    entries: np.ndarray
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.float64).reshape(-1)
        if entries.size != n_pairs(self.n):
            raise ValueError(f"expected {n_pairs(self.n)} entries for n={self.n}, got {entries.size}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        labels = tuple(self.labels) if self.labels else tuple(str(i + 1) for i in range(self.n))
        if len(labels) != self.n:
            raise ValueError("label count does not match n")
        if len(set(labels)) != self.n:
            raise ValueError("taxon labels must be distinct")
        object.__setattr__(self, "labels", labels)

    def index(self, i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        return i * self.n - i * (i + 1) // 2 + (j - i - 1)

    def __getitem__(self, ij) -> float:
        i, j = ij
        if i == j:
            return 0.0
        return float(self.entries[self.index(i, j)])

    def matrix(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        iu = np.triu_indices(self.n, 1)
        out[iu] = self.entries
        out[(iu[1], iu[0])] = self.entries
        return out

    def permute(self, perm: Sequence[int]) -> "DissimilarityMap":
        """Map whose taxon ``i`` is taxon ``perm[i]`` of this one."""
        perm = list(perm)
        if sorted(perm) != list(range(self.n)):
            raise ValueError("perm must be a permutation of range(n)")
        m = self.matrix()[np.ix_(perm, perm)]
        iu = np.triu_indices(self.n, 1)
        return DissimilarityMap(self.n, m[iu], tuple(self.labels[p] for p in perm))

    def __eq__(self, other):
        if not isinstance(other, DissimilarityMap):
            return NotImplemented
        return (self.n == other.n and self.labels == other.labels
                and np.array_equal(self.entries, other.entries))

    def __hash__(self):
        return hash((self.n, self.labels, self.entries.tobytes()))


def validate(raw, labels: Sequence[str] | None = None) -> DissimilarityMap:
    """Check a square matrix and return it as a :class:`DissimilarityMap`.

    Comparisons are exact: input matrices are data, not computed values.
    """
    m = np.asarray(raw, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DissimilarityError(f"matrix must be square, got shape {m.shape}")
    n = m.shape[0]
    if n < 3:
        raise TooSmallError(f"need at least 3 taxa, got {n}")
    if not np.all(np.isfinite(m)):
        raise DissimilarityError("matrix has non-finite entries")
    diag = np.flatnonzero(np.diag(m) != 0)
    if diag.size:
        i = int(diag[0])
        raise NonzeroDiagonalError(f"entry ({i},{i}) is {m[i, i]!r}, expected 0")
    bad = np.argwhere(m != m.T)
    if bad.size:
        i, j = (int(x) for x in bad[0])
        raise AsymmetryError(f"entries ({i},{j})={m[i, j]!r} and ({j},{i})={m[j, i]!r} differ")
    neg = np.argwhere(m < 0)
    if neg.size:
        i, j = (int(x) for x in neg[0])
        raise NegativeEntryError(f"entry ({i},{j}) is negative: {m[i, j]!r}")
    iu = np.triu_indices(n, 1)
    return DissimilarityMap(n, m[iu], tuple(labels) if labels else ())


def sample_uniform(n: int, rng: np.random.Generator) -> DissimilarityMap:
    """Point uniform on the unit ball intersected with the positive orthant of R^(n choose 2)."""
    if n < 4:
        raise ValueError("sampling needs n >= 4")
    return DissimilarityMap(n, sample_entries(n_pairs(n), rng))


def sample_entries(d: int, rng: np.random.Generator) -> np.ndarray:
    # direction from a folded Gaussian, radius U^(1/d); |.| maps every orthant
    # onto the positive one without changing the measure
    g = rng.standard_normal(d)
    u = rng.random()
    return np.abs(g) * (u ** (1.0 / d) / np.linalg.norm(g))


# -- text formats -------------------------------------------------------------

def _float(token: str, line: int, column: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}", line, column) from None


def _parse_csv(text: str) -> tuple[np.ndarray, list[str] | None]:
    lines = [ln for ln in text.split("\n")]
    while lines and lines[-1].strip() == "":
        lines.pop()
    if not lines:
        raise ParseError("empty input", 1, 1)
    labels = None
    first = [c.strip() for c in lines[0].split(",")]
    try:
        [float(c) for c in first]
    except ValueError:
        labels = first
        lines = lines[1:]
        offset = 2
    else:
        offset = 1
    width = len(labels) if labels is not None else len(first)
    rows = []
    for k, ln in enumerate(lines):
        lineno = k + offset
        cells = ln.rstrip("\r").split(",")
        if len(cells) != width:
            raise ParseError(f"expected {width} values, found {len(cells)}", lineno, 1)
        row, col = [], 1
        for cell in cells:
            row.append(_float(cell.strip(), lineno, col))
            col += len(cell) + 1
        rows.append(row)
    if len(rows) != width:
        raise ParseError(f"expected {width} rows, found {len(rows)}", len(lines) + offset, 1)
    return np.array(rows, dtype=np.float64).reshape(width, width), labels


def _parse_phylip(text: str) -> tuple[np.ndarray, list[str]]:
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise ParseError("empty input", 1, 1)
    head = lines[0].split()
    if len(head) != 1 or not head[0].isdigit():
        raise ParseError("first line must hold the taxon count", 1, 1)
    n = int(head[0])
    body = lines[1:]
    if len(body) != n:
        raise ParseError(f"expected {n} matrix rows, found {len(body)}", len(body) + 2, 1)
    labels, rows = [], []
    for k, ln in enumerate(body):
        lineno = k + 2
        tokens = ln.split()
        if len(tokens) != n + 1:
            raise ParseError(f"expected a name and {n} values, found {len(tokens)} tokens", lineno, 1)
        labels.append(tokens[0])
        pos = ln.index(tokens[0]) + len(tokens[0])
        row = []
        for tok in tokens[1:]:
            pos = ln.index(tok, pos)
            row.append(_float(tok, lineno, pos + 1))
            pos += len(tok)
        rows.append(row)
    return np.array(rows, dtype=np.float64).reshape(n, n), labels


def parse_matrix(text: str, format: str = "csv") -> DissimilarityMap:
    """Read a square matrix in ``csv`` or ``phylip`` (square) format and validate it."""
    if not text or not text.strip():
        raise ParseError("empty input", 1, 1)
    if format == "csv":
        m, labels = _parse_csv(text)
    elif format in ("phylip", "phylip-square"):
        m, labels = _parse_phylip(text)
    else:
        raise ValueError(f"unknown matrix format {format!r}")
    return validate(m, labels)


def serialize_matrix(dmap: DissimilarityMap, format: str = "csv", header: bool | None = None) -> str:
    """Inverse of :func:`parse_matrix`; floats are written with ``repr`` so they read back exactly.

    A CSV header is only recognised when it is not numeric, so by default it
    is written only for non-default labels.
    """
    m = dmap.matrix()
    buf = io.StringIO()
    if header is None:
        header = dmap.labels != tuple(str(i + 1) for i in range(dmap.n))
    if format == "csv":
        if header:
            buf.write(",".join(dmap.labels) + "\n")
        for row in m:
            buf.write(",".join(repr(float(x)) for x in row) + "\n")
    elif format in ("phylip", "phylip-square"):
        buf.write(f"{dmap.n}\n")
        for name, row in zip(dmap.labels, m):
            buf.write(name + " " + " ".join(repr(float(x)) for x in row) + "\n")
    else:
        raise ValueError(f"unknown matrix format {format!r}")
    return buf.getvalue()


def read_matrix(path, format: str | None = None) -> DissimilarityMap:
    if format is None:
        format = "phylip" if str(path).endswith((".phy", ".phylip", ".dist")) else "csv"
    with open(path, encoding="utf-8") as fh:
        return parse_matrix(fh.read(), format)
