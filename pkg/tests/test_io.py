from __future__ import annotations

import json

import pytest

from minsky import io
from minsky.errors import ValidationError
from minsky.firm_model import FirmRecord

HEADER = ",".join(io.FIRM_COLUMNS)


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def firm_line(fid="a", year=2006, bl="5"):
    return f"{fid},{year},10,{bl},8,2,100,50,Manufacturing"


def test_header_only_gives_empty_dataset_with_warning(tmp_path):
    data = io.read_table(write(tmp_path, "f.csv", HEADER + "\n"))
    assert data.kind == "firms" and data.rows == [] and data.warnings


def test_negative_bank_loans_rejected_with_line(tmp_path):
    lines = [HEADER] + [firm_line(f"f{k}") for k in range(200)] + [firm_line("bad", bl="-1")]
    data = io.read_table(write(tmp_path, "f.csv", "\n".join(lines) + "\n"))
    assert len(data.rows) == 200
    [err] = data.errors
    assert err.line == 202 and "bank_loans" in err.reason


def test_duplicate_firm_year_second_occurrence_rejected(tmp_path):
    lines = [HEADER] + [firm_line(f"f{k}") for k in range(150)] + [firm_line("f3")]
    data = io.read_table(write(tmp_path, "f.csv", "\n".join(lines) + "\n"))
    assert len(data.rows) == 150
    assert data.errors[0].line == 152 and "duplicate" in data.errors[0].reason


def test_too_many_invalid_rows_hard_fail(tmp_path):
    lines = [HEADER, firm_line("a"), firm_line("b", bl="x")]
    path = write(tmp_path, "f.csv", "\n".join(lines) + "\n")
    with pytest.raises(ValidationError, match="line 3"):
        io.read_table(path)
    assert len(io.read_table(path, max_invalid=0.6).rows) == 1


def test_missing_values_become_none(tmp_path):
    path = write(tmp_path, "f.csv", HEADER + "\na,2006,,5,,2,,,Retail\n")
    [record] = io.read_firms(path)
    assert record.ebit is None and record.sales is None and record.sector == "Retail"


@pytest.mark.parametrize("text", ["foo,bar\n1,2\n", ""])
def test_bad_schema(tmp_path, text):
    with pytest.raises(ValidationError):
        io.read_table(write(tmp_path, "x.csv", text))


def test_wrong_encoding(tmp_path):
    path = tmp_path / "latin.csv"
    path.write_bytes((HEADER + "\nb\xe9,2006,1,1,1,1,1,1,X\n").encode("latin-1"))
    with pytest.raises(ValidationError, match="UTF-8"):
        io.read_table(path)


def test_missing_file(tmp_path):
    with pytest.raises(ValidationError):
        io.read_table(tmp_path / "none.csv")


def test_expected_kind_mismatch(tmp_path):
    path = write(tmp_path, "e.csv", "buyer_id,supplier_id,weight\na,b,1\n")
    with pytest.raises(ValidationError):
        io.read_firms(path)


def test_ingest_detects_each_schema(tmp_path):
    paths = [
        write(tmp_path, "e.csv", "buyer_id,supplier_id,weight\na,b,1\na,b,2\n"),
        write(tmp_path, "r.csv", "period,rate\n2003-01,5.1\n2003-02,5.2\n"),
        write(tmp_path, "p.csv", "year,n_tot,n_hedge,n_ponzi\n2002,10,5,2\n"),
    ]
    kinds = {k: d.kind for k, d in io.ingest(paths).items()}
    assert sorted(kinds.values()) == ["edges", "population", "rates"]
    assert io.read_network(paths[0]).weight("a", "b") == 3.0
    assert io.read_rates(paths[1]).rates == (5.1, 5.2)


def test_population_invariant(tmp_path):
    path = write(tmp_path, "p.csv", "year,n_tot,n_hedge,n_ponzi\n2002,10,8,5\n")
    with pytest.raises(ValidationError):
        io.read_population(path)


def test_self_loop_edge_rejected(tmp_path):
    path = write(tmp_path, "e.csv", "buyer_id,supplier_id,weight\na,a,1\n")
    with pytest.raises(ValidationError, match="self-loop"):
        io.read_network(path)


def test_firm_round_trip_is_exact(tmp_path):
    records = [
        FirmRecord("a", 2006, 0.1 + 0.2, 1 / 3, -2.5e-7, 1e9, 123.456, None, "Manufacturing"),
        FirmRecord("b", 2007, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, ""),
    ]
    io.write_firms(tmp_path / "f.csv", records)
    assert io.read_firms(tmp_path / "f.csv") == records


def test_write_json_is_sorted(tmp_path):
    io.write_json(tmp_path / "x.json", {"b": 1, "a": [1.5]})
    assert json.loads((tmp_path / "x.json").read_text()) == {"a": [1.5], "b": 1}
    assert (tmp_path / "x.json").read_text().index('"a"') < (tmp_path / "x.json").read_text().index('"b"')


def test_yearly_fixture_densities(fixtures):
    rows = io.read_population(fixtures / "yearly_population.csv")
    assert [r.year for r in rows] == list(range(2002, 2010))
    assert [round(r.ponzi_density, 2) for r in rows] == [0.18, 0.17, 0.16, 0.16, 0.15, 0.16, 0.19, 0.22]
    assert [round(r.hedge_density, 2) for r in rows] == [0.49, 0.49, 0.51, 0.52, 0.53, 0.53, 0.48, 0.45]
