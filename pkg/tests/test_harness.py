import csv
import io
import json
import math
from collections import Counter

import pytest

from njcones.dissim import sample_uniform, serialize_matrix, validate
from njcones.harness.cli import EXIT_CONFIG, EXIT_INPUT, main, run_report
from njcones.harness.report import emit_report
from njcones.harness.simulate import SampleSpec, simulate
from njcones.newick import parse, serialize, strip_order, topology_key
from njcones.nj_core import run_nj
from njcones.rng import stream

from conftest import ABCDE, EXAMPLE_D


def _sim(n, count, seed, policy, workers=1):
    return simulate(SampleSpec(n, count, seed, policy), workers=workers)


def _rows(data: bytes):
    return list(csv.DictReader(io.StringIO(data.decode())))


def test_simulate_matches_scalar_loop():
    n, seed = 5, 123
    for policy in ("lex", "uniform", "baggage"):
        table = _sim(n, 400, seed, policy)
        want = Counter()
        for i in range(400):
            g = stream(seed, i)
            D = sample_uniform(n, g)
            want[serialize(run_nj(D, policy, g).tree)] += 1
        got = {k: r.count for k, r in table.rows.items() if r.count}
        assert got == dict(want)


def test_table_invariants():
    table = _sim(5, 5000, 1, "uniform")
    assert sum(r.count for r in table.rows.values()) == 5000
    for key, row in table.rows.items():
        parse(key)
        mate = table.rows[row.partner]
        assert mate.partner == key and key != row.partner
        assert strip_order(parse(key)) == strip_order(parse(row.partner))
    assert table.strict_ties == 0


def test_csv_report():
    table = _sim(4, 3000, 2, "uniform")
    data = emit_report(table, "csv")
    rows = _rows(data)
    assert list(rows[0]) == ["tree", "partner", "count", "percent", "pair_percent"]
    assert len(rows) == 6
    assert [r["tree"] for r in rows] == sorted(r["tree"] for r in rows)
    assert abs(sum(float(r["percent"]) for r in rows) - 100) <= 0.01


def test_lex_four_taxa_three_keys():
    table = _sim(4, 3000, 2, "lex")
    assert len(table.hit_keys()) == 3
    assert len(table.rows) == 6  # partners listed with zero hits


def test_rerun_byte_identical():
    a = emit_report(_sim(5, 3000, 8, "baggage"), "csv")
    b = emit_report(_sim(5, 3000, 8, "baggage"), "csv")
    assert a == b


def test_workers_do_not_change_results():
    spec = SampleSpec(5, 60_000, 4, "uniform")
    a = emit_report(simulate(spec, workers=1), "csv")
    b = emit_report(simulate(spec, workers=3), "csv")
    assert a == b


def test_backends_give_same_table():
    spec = SampleSpec(6, 3000, 5, "baggage")
    assert emit_report(simulate(spec, 1, "numpy"), "csv") == emit_report(simulate(spec, 1), "csv")


def test_json_and_text_reports():
    table = _sim(4, 1000, 3, "lex")
    doc = json.loads(emit_report(table, "json"))
    assert (doc["n"], doc["policy"], doc["samples"], doc["seed"]) == (4, "lex", 1000, 3)
    assert len(doc["rows"]) == 6
    text = emit_report(table, "text").decode()
    assert text.startswith("4 taxa") and len(text.splitlines()) == 2 + 3
    with pytest.raises(ValueError):
        emit_report(table, "xml")


def test_pair_sums_stable_across_policies():
    N = 40_000
    tables = {p: _sim(5, N, 17, p) for p in ("lex", "uniform", "baggage")}
    base = tables["uniform"]
    for key in base.rows:
        p = base.pair_count(key) / N
        sigma = 100 * math.sqrt(p * (1 - p) / N)
        for other in tables.values():
            assert abs(other.pair_percent(key) - base.pair_percent(key)) <= 6 * sigma + 1e-12


def test_baggage_equals_uniform_at_four_taxa():
    a = emit_report(_sim(4, 5000, 6, "uniform"), "csv")
    b = emit_report(_sim(4, 5000, 6, "baggage"), "csv")
    assert a == b


def test_simulate_limits():
    with pytest.raises(Exception):
        _sim(9, 10, 1, "lex")
    with pytest.raises(ValueError):
        SampleSpec(5, 0, 1)


def test_run_report_example():
    out = run_report(validate(EXAMPLE_D, ABCDE))
    assert "tree: (@2(@1(a,b),d),c,e)" in out
    assert "nj_path: γ" in out and "motzkin: h" in out


def test_cli_count(capsys):
    assert main(["count", "--taxa", "6"]) == 0
    out = capsys.readouterr().out
    for token in ("105", "450", "900", "nj_paths: 5"):
        assert token in out


def test_cli_enumerate(capsys, tmp_path):
    assert main(["enumerate", "--taxa", "4"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 6
    assert main(["enumerate", "--taxa", "9"]) == EXIT_CONFIG


def test_cli_paths(capsys):
    assert main(["paths", "--taxa", "6"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 5


def test_cli_run(capsys, tmp_path):
    path = tmp_path / "d.csv"
    path.write_text(serialize_matrix(validate(EXAMPLE_D, ABCDE), "csv"))
    assert main(["run", "--matrix", str(path), "--trace"]) == 0
    out = capsys.readouterr().out
    assert f"topology: {topology_key('((d,(a,b)),c,e)')}" in out
    assert "trace:" in out and "final tie" in out


def test_cli_input_errors(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("0,1,2\n1,0,x\n2,1,0\n")
    assert main(["run", "--matrix", str(bad)]) == EXIT_INPUT
    asym = tmp_path / "asym.csv"
    asym.write_text("0,1,2,3\n1,0,1,1\n2,1,0,1\n3,1,2,0\n")
    assert main(["run", "--matrix", str(asym)]) == EXIT_INPUT
    assert main(["run", "--matrix", str(tmp_path / "missing.csv")]) == EXIT_INPUT


def test_cli_config_errors(capsys):
    assert main(["simulate", "--taxa", "3", "--seed", "1", "--samples", "10"]) == EXIT_CONFIG
    assert main(["simulate", "--taxa", "5", "--seed", "1", "--samples", "0"]) == EXIT_CONFIG
    assert main(["count", "--taxa", "2"]) == EXIT_CONFIG


def test_cli_simulate_to_file(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["simulate", "--taxa", "4", "--samples", "2000", "--seed", "1",
                 "--workers", "1", "--out", str(out)]) == 0
    assert len(_rows(out.read_bytes())) == 6
