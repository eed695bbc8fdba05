import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from njcones.dissim import (DissimilarityMap, parse_matrix, sample_uniform, serialize_matrix,
                            validate)
from njcones.errors import (AsymmetryError, NegativeEntryError, NonzeroDiagonalError,
                            ParseError, TooSmallError)
from njcones.harness.simulate import draw_chunk
from njcones.rng import stream

from conftest import ABCDE, EXAMPLE_D


def test_validate_example():
    d = validate(EXAMPLE_D, ABCDE)
    assert d.n == 5
    assert d[0, 2] == 5 and d[2, 0] == 5 and d[3, 3] == 0
    assert np.array_equal(d.matrix(), np.array(EXAMPLE_D, dtype=float))


def test_validate_all_zero():
    assert validate(np.zeros((4, 4))).n == 4


@pytest.mark.parametrize("raw, exc", [
    ([[0, 1, 1, 1], [1, 0, 3, 1], [1, 4, 0, 1], [1, 1, 1, 0]], AsymmetryError),
    ([[1, 1, 1], [1, 0, 1], [1, 1, 0]], NonzeroDiagonalError),
    ([[0, -1, 1], [-1, 0, 1], [1, 1, 0]], NegativeEntryError),
    ([[0, 1], [1, 0]], TooSmallError),
])
def test_validate_rejects(raw, exc):
    with pytest.raises(exc):
        validate(raw)


def test_asymmetry_has_no_tolerance():
    raw = np.ones((4, 4)) - np.eye(4)
    raw[0, 1] = np.nextafter(1.0, 2.0)
    with pytest.raises(AsymmetryError):
        validate(raw)


def test_parse_csv_with_header():
    text = serialize_matrix(validate(EXAMPLE_D, ABCDE))
    assert text.splitlines()[0] == "a,b,c,d,e"
    assert parse_matrix(text) == validate(EXAMPLE_D, ABCDE)


def test_parse_csv_without_header():
    text = "\n".join(",".join(str(x) for x in row) for row in EXAMPLE_D)
    d = parse_matrix(text)
    assert d.labels == ("1", "2", "3", "4", "5")
    assert np.array_equal(d.matrix(), np.array(EXAMPLE_D, dtype=float))


def test_parse_csv_ragged_row():
    rows = [",".join(str(x) for x in row) for row in EXAMPLE_D]
    rows[2] = "5,10,0,6"
    with pytest.raises(ParseError) as info:
        parse_matrix("\n".join(rows))
    assert info.value.line == 3


def test_parse_csv_bad_number_reports_column():
    with pytest.raises(ParseError) as info:
        parse_matrix("0,1,2\n1,0,x\n2,1,0\n")
    assert (info.value.line, info.value.column) == (2, 5)


def test_parse_phylip_too_small():
    with pytest.raises(TooSmallError):
        parse_matrix("2\na 0 1\nb 1 0", "phylip-square")


def test_parse_phylip():
    text = serialize_matrix(validate(EXAMPLE_D, ABCDE), "phylip")
    assert text.startswith("5\na 0.0 3.0")
    assert parse_matrix(text, "phylip") == validate(EXAMPLE_D, ABCDE)


def test_parse_errors_propagate_validation():
    with pytest.raises(AsymmetryError):
        parse_matrix("0,1,1\n2,0,1\n1,1,0\n")


decimals = st.decimals(min_value=0, max_value=10**6, places=6, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 7).flatmap(lambda n: st.lists(decimals, min_size=n * (n - 1) // 2,
                                                      max_size=n * (n - 1) // 2)))
def test_round_trip_bit_exact(values):
    n = int(round((1 + (1 + 8 * len(values)) ** 0.5) / 2))
    entries = np.array([float(str(v)) for v in values])
    d = DissimilarityMap(n, entries)
    for fmt in ("csv", "phylip"):
        back = parse_matrix(serialize_matrix(d, fmt), fmt)
        assert back.entries.tobytes() == d.entries.tobytes()


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 7).flatmap(lambda n: st.tuples(st.permutations(range(n)),
                                                     st.lists(decimals, min_size=n * n, max_size=n * n))))
def test_permute_commutes_with_validate(args):
    perm, values = args
    n = len(perm)
    m = np.array([float(v) for v in values]).reshape(n, n)
    m = np.triu(m, 1)
    m = m + m.T
    left = validate(m[np.ix_(perm, perm)])
    right = validate(m).permute(perm)
    assert np.array_equal(left.entries, right.entries)


def test_sample_inside_region(rng):
    for n in (4, 5, 8):
        x = sample_uniform(n, rng).entries
        assert x.size == n * (n - 1) // 2
        assert np.linalg.norm(x) <= 1.0 and x.min() >= 0.0


def test_sample_reproducible_by_index():
    a = sample_uniform(6, stream(7, 123))
    X, _ = draw_chunk(6, 7, 120, 130)
    assert np.array_equal(X[3], a.entries)
    X2, _ = draw_chunk(6, 7, 0, 200)
    assert np.array_equal(X2[123], a.entries)


@pytest.fixture(scope="module")
def big_sample():
    X, _ = draw_chunk(5, 99, 0, 100_000)
    return X


def test_sample_coordinate_means_equal(big_sample):
    X = big_sample
    means = X.mean(axis=0)
    se = X.std(axis=0, ddof=1) / np.sqrt(X.shape[0])
    grand = means.mean()
    assert np.all(np.abs(means - grand) <= 3 * se)


@pytest.mark.parametrize("r", [0.8, 0.9, 1.0])
def test_sample_radial_cdf(big_sample, r):
    d = big_sample.shape[1]
    norms = np.linalg.norm(big_sample, axis=1)
    p = r ** d
    emp = np.mean(norms <= r)
    se = np.sqrt(p * (1 - p) / norms.size)
    assert abs(emp - p) <= 3 * se + 1e-12
