"""Database persistence for sweep results.

Rows of a sweep table can be kept in SQLite so several sweeps can be
queried together.
"""

import datetime
import json
import logging
from typing import Tuple

import pandas as pd
from sqlalchemy import Boolean, Column, DateTime, ForeignKey, Integer, String, UniqueConstraint, create_engine
from sqlalchemy.exc import SQLAlchemyError
from sqlalchemy.future import Engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker

from hecke_nullity.io import table_to_records

logger = logging.getLogger(__name__)

SweepBase = declarative_base()


def get_engine_sqlite(path, echo: bool = False) -> Engine:
    """Get a SQLite on-disk database engine."""
    return create_engine(f"sqlite+pysqlite:///{path}", echo=echo, future=True)


def get_engine_inmem(echo: bool = False) -> Engine:
    """Get a SQLite in-memory database engine."""
    return create_engine(
        "sqlite+pysqlite:///:memory:",
        connect_args={"check_same_thread": False},
        echo=echo,
        future=True,
    )


class SweepRun(SweepBase):
    __tablename__ = "sweep_runs"
    run_id = Column(Integer, primary_key=True)
    query = Column(String, index=True)  # JSON of the sweep config
    version = Column(String)
    created = Column(DateTime)

    def __repr__(self):
        return f"<SweepRun run_id={self.run_id}, version={self.version}, ...>"


class SweepRow(SweepBase):
    __tablename__ = "sweep_rows"
    __table_args__ = (UniqueConstraint("run_id", "p", "N", "k", "character", "lam"),)
    row_id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey("sweep_runs.run_id"), index=True)
    p = Column(Integer)
    N = Column(Integer)
    k = Column(Integer)
    character = Column(String)
    lam = Column(String)  # exact, "num/den"
    dim_full = Column(Integer)
    dim_new = Column(Integer)
    m_full = Column(Integer)
    m_new = Column(Integer)
    k_prime = Column(Integer, nullable=True)
    m_new_kprime = Column(Integer, nullable=True)
    theorem = Column(Boolean, nullable=True)
    m_cm = Column(Integer, nullable=True)
    conjecture_equal = Column(Boolean, nullable=True)

    def __repr__(self):
        return f"<SweepRow row_id={self.row_id}, p={self.p}, N={self.N}, k={self.k}, ...>"


def create_sweep_tables(engine: Engine):
    """Create all sweep tables."""
    return SweepBase.metadata.create_all(engine)


def drop_sweep_tables(engine: Engine):
    """Drop all sweep tables."""
    return SweepBase.metadata.drop_all(bind=engine, tables=[SweepRow.__table__, SweepRun.__table__])


# Grid point identifying a row within a run, and the values stored against it.
ROW_KEY = ("p", "N", "k", "character", "lambda")
ROW_VALUES = (
    "dim_full",
    "dim_new",
    "m_full",
    "m_new",
    "k_prime",
    "m_new_kprime",
    "theorem",
    "m_cm",
    "conjecture_equal",
)


def find_or_start_run(session: Session, query: dict, version: str) -> Tuple[SweepRun, bool]:
    """The run recorded for this query and tool version, or a new one.

    Returns the run and whether it was started by this call. A new run is
    flushed so its run_id is available, but not committed.
    """
    text = json.dumps(query, sort_keys=True)
    run = session.query(SweepRun).filter_by(query=text, version=version).one_or_none()
    if run is not None:
        return run, False
    run = SweepRun(query=text, version=version, created=datetime.datetime.now(datetime.timezone.utc))
    session.add(run)
    session.flush()
    return run, True


def upsert_sweep_row(session: Session, run_id: int, record: dict) -> SweepRow:
    """Store one sweep record under run_id, overwriting the row for the same grid point."""
    p, N, k, character, lam = (record[key] for key in ROW_KEY)
    row = (
        session.query(SweepRow)
        .filter_by(run_id=run_id, p=p, N=N, k=k, character=character, lam=lam)
        .one_or_none()
    )
    if row is None:
        row = SweepRow(run_id=run_id, p=p, N=N, k=k, character=character, lam=lam)
        session.add(row)
    else:
        logger.debug(f"Overwriting {row}")
    for key in ROW_VALUES:
        setattr(row, key, record[key])
    return row


def write_sweep_rows(engine: Engine, query: dict, version: str, table: pd.DataFrame) -> int:
    """Persist a sweep table. Rerunning the same query updates its rows in place.

    Arguments
    ---------
    engine : sqlalchemy.engine.Engine

    query : dict
        Sweep config, as from SweepConfig.to_dict.
    version : str
        Tool version.
    table : pd.DataFrame
        Sweep table from run_sweep.

    Returns
    -------
    run_id : int
    """
    create_sweep_tables(engine)
    session = sessionmaker(bind=engine)()
    try:
        run, started = find_or_start_run(session, query, version)
        logger.info(f"{'Started' if started else 'Reusing'} sweep run {run.run_id}")
        for record in table_to_records(table):
            upsert_sweep_row(session, run.run_id, record)
        session.commit()
        run_id = run.run_id
    except SQLAlchemyError:
        session.rollback()
        raise
    finally:
        session.close()
    return run_id


def read_sweep_rows(engine: Engine, run_id: int) -> pd.DataFrame:
    """Read back the rows of one sweep run, in grid order of insertion."""
    session = sessionmaker(bind=engine)()
    rows = session.query(SweepRow).filter_by(run_id=run_id).order_by(SweepRow.row_id).all()
    records = [
        {
            "p": r.p,
            "N": r.N,
            "k": r.k,
            "character": r.character,
            "lambda": r.lam,
            "dim_full": r.dim_full,
            "dim_new": r.dim_new,
            "m_full": r.m_full,
            "m_new": r.m_new,
            "k_prime": r.k_prime,
            "m_new_kprime": r.m_new_kprime,
            "theorem": r.theorem,
            "m_cm": r.m_cm,
            "conjecture_equal": r.conjecture_equal,
        }
        for r in rows
    ]
    session.close()
    return pd.DataFrame(records, dtype=object)
