import os
import subprocess
import sys

import numpy as np
import pytest

from njcones.dissim import DissimilarityMap
from njcones.harness.simulate import draw_chunk
from njcones.kernels import HAVE_NUMBA, nj_batch
from njcones.newick import serialize
from njcones.nj_core import TieBreakPolicy, run_nj, tree_from_choices
from njcones.rng import stream

POLICIES = list(TieBreakPolicy)
needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba unavailable or disabled")


def _reference(X, U, n, policy):
    labels = [str(i + 1) for i in range(n)]
    out = []
    for x, u in zip(X, U):
        draws = iter(u)

        class Replay:
            def random(self):
                return next(draws)

        res = run_nj(DissimilarityMap(n, x, labels), policy, Replay())
        out.append((serialize(res.tree), serialize(res.partner)))
    return out


def _decoded(choices, partner, n):
    labels = [str(i + 1) for i in range(n)]
    rows = []
    for c, p in zip(choices, partner):
        rows.append((serialize(tree_from_choices(labels, c)),
                     serialize(tree_from_choices(labels, list(c[:-1]) + [p]))))
    return rows


@pytest.mark.parametrize("n", [4, 5, 6, 8])
@pytest.mark.parametrize("policy", POLICIES)
def test_numpy_matches_reference(n, policy):
    X, U = draw_chunk(n, 11, 0, 300)
    got = _decoded(*nj_batch(X, U, n, policy, "numpy")[:2], n)
    assert got == _reference(X, U, n, policy)


@needs_numba
@pytest.mark.parametrize("n", [4, 5, 6, 8])
@pytest.mark.parametrize("policy", POLICIES)
def test_backends_agree(n, policy):
    X, U = draw_chunk(n, 3, 0, 2000)
    a = nj_batch(X, U, n, policy, "numba")
    b = nj_batch(X, U, n, policy, "numpy")
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


@pytest.mark.parametrize("backend", ["numpy"] + (["numba"] if HAVE_NUMBA else []))
def test_exact_ties_follow_policy(backend):
    n = 6
    X = np.ones((1, 15))
    for policy, u in [(TieBreakPolicy.LEXICOGRAPHIC, [0.99] * 3), (TieBreakPolicy.UNIFORM, [0.5, 0.2, 0.7]),
                      (TieBreakPolicy.BAGGAGE, [0.9, 0.1, 0.6])]:
        U = np.array([u])
        c, p, t = nj_batch(X, U, n, policy, backend)
        assert _decoded(c, p, n) == _reference(X, U, n, policy)
        assert t[0] >= 1


def test_input_validation():
    with pytest.raises(ValueError):
        nj_batch(np.ones((2, 5)), np.ones((2, 2)), 5)
    with pytest.raises(ValueError):
        nj_batch(np.ones((2, 10)), np.ones((2, 3)), 5)
    with pytest.raises(ValueError):
        nj_batch(np.ones((2, 10)), np.ones((2, 2)), 5, backend="fortran")


def test_env_flag_selects_numpy():
    env = dict(os.environ, NJCONES_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from njcones.kernels import default_backend, HAVE_NUMBA;"
                          "print(default_backend(), HAVE_NUMBA)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["numpy", "False"]


@pytest.mark.slow
def test_no_tolerance_ties_on_continuous_samples():
    X, U = draw_chunk(6, 7, 0, 100_000)
    _, _, ties = nj_batch(X, U, 6, TieBreakPolicy.UNIFORM)
    assert ties.sum() == 0


def test_stream_matches_chunk_draws():
    X, U = draw_chunk(5, 9, 40, 42)
    g = stream(9, 41)
    g.standard_normal(10)
    g.random()
    assert np.array_equal(U[1], g.random(2))
