import logging
import sys

import pandas as pd
import pytest
from sqlalchemy import inspect
from sqlalchemy.orm import sessionmaker

import hecke_nullity.db as db
from hecke_nullity.io import table_to_records
from hecke_nullity.sweep import COLUMNS


def setup_module(module):
    logging.basicConfig(stream=sys.stdout, level=logging.DEBUG)
    logging.getLogger("").handlers = []


@pytest.fixture()
def engine():
    return db.get_engine_inmem()


@pytest.fixture()
def sweep_table():
    rows = [
        [5, 1, 12, "trivial", "0", 1, 1, 0, 0, 2, 0, True, 0, True],
        [5, 27, 2, "trivial", "0", 1, 1, 1, 1, 2, 1, True, 1, True],
        [3, 1, 12, "trivial", "-1/2", 1, 1, 0, 0, None, None, None, None, None],
    ]
    return pd.DataFrame(rows, columns=COLUMNS, dtype=object)


QUERY = {"p": [5], "N": [1, 27], "k": [2, 12], "character": "trivial", "lambda": "0", "cm": True}


def test_write_and_read_sweep_rows(engine, sweep_table):
    run_id = db.write_sweep_rows(engine, QUERY, "0.1.0", sweep_table)
    table = db.read_sweep_rows(engine, run_id)
    assert list(table.columns) == COLUMNS
    assert table_to_records(table) == table_to_records(sweep_table)


def test_rerun_does_not_duplicate(engine, sweep_table):
    first = db.write_sweep_rows(engine, QUERY, "0.1.0", sweep_table)
    updated = sweep_table.copy()
    updated.loc[1, "m_cm"] = 2
    updated.loc[1, "conjecture_equal"] = False
    second = db.write_sweep_rows(engine, QUERY, "0.1.0", updated)
    assert first == second
    table = db.read_sweep_rows(engine, second)
    assert len(table) == 3
    assert table.loc[1, "m_cm"] == 2
    assert table.loc[1, "conjecture_equal"] is False


def test_separate_runs(engine, sweep_table):
    first = db.write_sweep_rows(engine, QUERY, "0.1.0", sweep_table)
    second = db.write_sweep_rows(engine, {**QUERY, "cm": False}, "0.1.0", sweep_table.iloc[:1])
    assert first != second
    assert len(db.read_sweep_rows(engine, first)) == 3
    assert len(db.read_sweep_rows(engine, second)) == 1


def test_find_or_start_run(engine):
    db.create_sweep_tables(engine)
    session = sessionmaker(bind=engine)()
    run, started = db.find_or_start_run(session, QUERY, "0.1.0")
    assert started
    assert run.run_id is not None
    again, started = db.find_or_start_run(session, QUERY, "0.1.0")
    assert not started
    assert again.run_id == run.run_id
    newer, started = db.find_or_start_run(session, QUERY, "0.2.0")
    assert started
    assert newer.run_id != run.run_id
    session.close()


def test_upsert_sweep_row(engine, sweep_table):
    db.create_sweep_tables(engine)
    session = sessionmaker(bind=engine)()
    run, _ = db.find_or_start_run(session, QUERY, "0.1.0")
    record = table_to_records(sweep_table)[1]
    first = db.upsert_sweep_row(session, run.run_id, record)
    session.flush()
    second = db.upsert_sweep_row(session, run.run_id, {**record, "m_cm": 0, "conjecture_equal": False})
    session.commit()
    assert second.row_id == first.row_id
    assert session.query(db.SweepRow).count() == 1
    assert (second.m_cm, second.conjecture_equal) == (0, False)
    other = db.upsert_sweep_row(session, run.run_id, {**record, "lambda": "1"})
    session.commit()
    assert other.row_id != first.row_id
    session.close()


def test_drop_sweep_tables(engine, sweep_table):
    db.write_sweep_rows(engine, QUERY, "0.1.0", sweep_table)
    assert set(inspect(engine).get_table_names()) == {"sweep_runs", "sweep_rows"}
    db.drop_sweep_tables(engine)
    assert inspect(engine).get_table_names() == []


def test_sqlite_on_disk(tmp_path, sweep_table):
    path = tmp_path / "sweeps.db"
    run_id = db.write_sweep_rows(db.get_engine_sqlite(path), QUERY, "0.1.0", sweep_table)
    table = db.read_sweep_rows(db.get_engine_sqlite(path), run_id)
    assert table_to_records(table) == table_to_records(sweep_table)
