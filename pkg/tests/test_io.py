import json
import logging
import sys
from pathlib import Path

import pandas as pd
import pytest

import hecke_nullity.io as io
from hecke_nullity.exactalg import RationalMatrix
from hecke_nullity.modsym import SCHEMA_VERSION, HeckeMatrix
from hecke_nullity.sweep import COLUMNS


def setup_module(module):
    logging.basicConfig(stream=sys.stdout, level=logging.DEBUG)
    logging.getLogger("").handlers = []


@pytest.fixture()
def hecke_matrix():
    return HeckeMatrix(
        n=2,
        matrix=RationalMatrix.from_rows([["1/2", 0], [3, -4]]),
        level=9,
        weight=4,
        character="trivial;mod:9",
        sign=1,
        fingerprint="0123456789abcdef",
    )


@pytest.fixture()
def sweep_table():
    return pd.DataFrame(
        [
            {
                "p": 5,
                "N": 27,
                "k": 2,
                "character": "trivial",
                "lambda": "0",
                "dim_full": 1,
                "dim_new": 1,
                "m_full": 1,
                "m_new": 1,
                "k_prime": 2,
                "m_new_kprime": 1,
                "theorem": True,
                "m_cm": 1,
                "conjecture_equal": True,
            },
            {
                "p": 3,
                "N": 1,
                "k": 12,
                "character": "trivial",
                "lambda": "-1/2",
                "dim_full": 1,
                "dim_new": 1,
                "m_full": 0,
                "m_new": 0,
                "k_prime": None,
                "m_new_kprime": None,
                "theorem": None,
                "m_cm": None,
                "conjecture_equal": None,
            },
        ],
        columns=COLUMNS,
        dtype=object,
    )


@pytest.mark.parametrize(
    "args, expected",
    [
        (("hecke", 9, 4, "trivial", 1, 2), "hecke_N9_k4_trivial_plus_n2_v1.json"),
        (("hecke", 9, 4, "trivial;mod:9", 1, 2), "hecke_N9_k4_trivial_mod_9_plus_n2_v1.json"),
        (("hecke", 16, 3, "kronecker:-4", -1, 3), "hecke_N16_k3_kronecker_4_minus_n3_v1.json"),
    ],
)
def test_make_name(args, expected):
    assert io.make_name(*args) == expected


def test_write_hecke_matrix(hecke_matrix, tmp_path):
    path = io.write_hecke_matrix(hecke_matrix, tmp_path / "cache")
    name = "hecke_N9_k4_trivial_mod_9_plus_n2_v1.json"
    assert Path(path) == tmp_path / "cache" / name
    assert io.cache_exists(name, tmp_path / "cache")
    with open(path) as f:
        payload = json.load(f)
    assert payload["matrix"]["entries"] == ["1/2", "0", "3", "-4"]
    assert payload[io.META_KEY]["schema"] == SCHEMA_VERSION


def test_read_hecke_matrix(hecke_matrix, tmp_path):
    path = io.write_hecke_matrix(hecke_matrix, tmp_path)
    assert io.read_hecke_matrix(path) == hecke_matrix


def test_read_hecke_matrix_wrong_schema(hecke_matrix, tmp_path):
    path = io.write_hecke_matrix(hecke_matrix, tmp_path)
    with open(path) as f:
        payload = json.load(f)
    payload[io.META_KEY]["schema"] = SCHEMA_VERSION + 1
    with open(path, "w") as f:
        json.dump(payload, f)
    with pytest.raises(ValueError):
        io.read_hecke_matrix(path)


def test_load_cached_hecke_matrix(hecke_matrix, tmp_path):
    assert io.load_cached_hecke_matrix(9, 4, "trivial;mod:9", 1, 2, None) is None
    assert io.load_cached_hecke_matrix(9, 4, "trivial;mod:9", 1, 2, str(tmp_path)) is None
    io.write_hecke_matrix(hecke_matrix, tmp_path)
    assert io.load_cached_hecke_matrix(9, 4, "trivial;mod:9", 1, 2, str(tmp_path)) == hecke_matrix
    assert io.load_cached_hecke_matrix(9, 4, "trivial;mod:9", -1, 2, str(tmp_path)) is None


def test_write_json(tmp_path):
    out = tmp_path / "reports" / "report.json"
    io.write_json({"a": 1, "b": ["1/2"]}, out)
    with open(out) as f:
        assert json.load(f) == {"a": 1, "b": ["1/2"]}


def test_table_to_records(sweep_table):
    records = io.table_to_records(sweep_table)
    assert records[0]["theorem"] is True
    assert records[1]["k_prime"] is None
    assert records[1]["lambda"] == "-1/2"


def test_csv_and_json_tables_agree(sweep_table, tmp_path):
    csv_path = io.write_table(sweep_table, tmp_path / "sweep.csv", "csv")
    json_path = io.write_table(sweep_table, tmp_path / "sweep.json", "json")
    from_csv = io.read_table(csv_path)
    from_json = io.read_table(json_path)
    pd.testing.assert_frame_equal(from_csv, from_json)
    assert list(from_csv.columns) == COLUMNS
    assert from_csv.loc[0, "m_new"] == "1"
    assert from_csv.loc[1, "theorem"] == ""


def test_table_errors(sweep_table, tmp_path):
    with pytest.raises(ValueError):
        io.write_table(sweep_table, tmp_path / "sweep.xml", "xml")
    (tmp_path / "sweep.txt").write_text("p\n5\n")
    with pytest.raises(ValueError):
        io.read_table(tmp_path / "sweep.txt")
