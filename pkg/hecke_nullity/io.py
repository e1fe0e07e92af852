"""Input/output for hecke-nullity.

Cached Hecke matrices are JSON files holding a metadata header and the
exact matrix. Reports and sweep tables are written through fsspec so
local paths and remote URLs behave the same.
"""

import json
import logging
import os
import re
from typing import Optional

import fsspec
import pandas as pd

from hecke_nullity.exactalg import RationalMatrix
from hecke_nullity.modsym import OPERATION_COUNTS, SCHEMA_VERSION, HeckeMatrix

logger = logging.getLogger(__name__)

# File extensions recognised as CSV and JSON tables.
CSV_EXTENSIONS = {".csv", ".CSV"}
JSON_EXTENSIONS = {".json", ".JSON"}

# Key of the metadata header in cached files.
META_KEY = "hecke_nullity.metadata"


def _slug(character: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", character).strip("_")


def make_name(kind: str, N: int, k: int, character: str, sign: int, n: int) -> str:
    """Make the cache filename for one operator.

    Arguments
    ---------
    kind : str
        Object kind, e.g. "hecke".
    N : int
        Level.
    k : int
        Weight.
    character : str
        Character spec string.
    sign : int
        Star eigenvalue of the subspace.
    n : int
        Operator index.

    Returns
    -------
    str
    """
    sign_tag = "plus" if sign > 0 else "minus"
    return f"{kind}_N{N}_k{k}_{_slug(character)}_{sign_tag}_n{n}_v{SCHEMA_VERSION}.json"


def _join(directory: str, name: str) -> str:
    directory = str(directory)
    if not directory.endswith("/"):
        directory = directory + "/"
    return directory + name


def cache_exists(name: str, cache_dir: str) -> bool:
    """Check whether a cached object already exists."""
    path = _join(cache_dir, name)
    fs, fs_path = fsspec.core.url_to_fs(path)
    return fs.exists(fs_path)


def write_hecke_matrix(matrix: HeckeMatrix, cache_dir: str) -> str:
    """Write a Hecke matrix to the cache.

    Arguments
    ---------
    matrix : HeckeMatrix

    cache_dir : str
        Path to the cache directory.

    Returns
    -------
    Path written to.
    """
    cache_dir = str(cache_dir)
    fs, fs_dir = fsspec.core.url_to_fs(cache_dir)
    fs.makedirs(fs_dir, exist_ok=True)
    name = make_name("hecke", matrix.level, matrix.weight, matrix.character, matrix.sign, matrix.n)
    path = _join(cache_dir, name)
    payload = {META_KEY: matrix.provenance(), "matrix": matrix.matrix.to_dict()}
    with fsspec.open(path, "w") as f:
        json.dump(payload, f, sort_keys=True)
    logger.debug(f"Cached T_{matrix.n} at {path}")
    return path


def read_hecke_matrix(path: str) -> HeckeMatrix:
    """Read a cached Hecke matrix.

    Arguments
    ---------
    path : str
        Path to the cache file.

    Returns
    -------
    HeckeMatrix
    """
    with fsspec.open(str(path), "r") as f:
        payload = json.load(f)
    meta = payload[META_KEY]
    if meta.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"{path} has schema {meta.get('schema')}, expected {SCHEMA_VERSION}")
    return HeckeMatrix(
        n=int(meta["n"]),
        matrix=RationalMatrix.from_dict(payload["matrix"]),
        level=int(meta["level"]),
        weight=int(meta["weight"]),
        character=meta["character"],
        sign=int(meta["sign"]),
        fingerprint=meta["fingerprint"],
        heilbronn="cache",
    )


def load_cached_hecke_matrix(
    N: int, k: int, character: str, sign: int, n: int, cache_dir: Optional[str]
) -> Optional[HeckeMatrix]:
    """Return the cached matrix if there is one."""
    if not cache_dir:
        return None
    name = make_name("hecke", N, k, character, sign, n)
    if not cache_exists(name, cache_dir):
        OPERATION_COUNTS["cache miss"] += 1
        logger.info(f"Cache miss for {name}")
        return None
    OPERATION_COUNTS["cache hit"] += 1
    logger.info(f"Cache hit for {name}")
    return read_hecke_matrix(_join(cache_dir, name))


def dumps(obj: dict) -> str:
    """Deterministic JSON text for reports."""
    return json.dumps(obj, indent=2)


def write_json(obj: dict, out: str) -> str:
    """Write a JSON document to a local path or URL."""
    out = str(out)
    if "://" not in out:
        parent = os.path.dirname(out)
        if parent:
            os.makedirs(parent, exist_ok=True)
    with fsspec.open(out, "w") as f:
        f.write(dumps(obj) + "\n")
    return out


def table_to_records(table: pd.DataFrame) -> list:
    """Rows of a sweep table with None for missing values and native ints."""
    records = []
    for row in table.to_dict(orient="records"):
        clean = {}
        for key, value in row.items():
            if value is None or (isinstance(value, float) and value != value):
                clean[key] = None
            elif hasattr(value, "item"):
                clean[key] = value.item()
            else:
                clean[key] = value
        records.append(clean)
    return records


def write_table(table: pd.DataFrame, out: str, fmt: str = "csv") -> str:
    """Write a sweep table as CSV or JSON records.

    Arguments
    ---------
    table : pd.DataFrame

    out : str
        Path or URL to write to.

    fmt : str
        "csv" or "json".

    Returns
    -------
    Path written to.
    """
    out = str(out)
    if "://" not in out:
        parent = os.path.dirname(out)
        if parent:
            os.makedirs(parent, exist_ok=True)
    with fsspec.open(out, "w") as f:
        if fmt == "csv":
            table.to_csv(f, index=False)
        elif fmt == "json":
            f.write(json.dumps(table_to_records(table), indent=2) + "\n")
        else:
            raise ValueError(f"Unknown table format {fmt!r}")
    return out


def read_table(path: str) -> pd.DataFrame:
    """Read a sweep table written by write_table.

    Numbers stay as exact strings; "lambda" and the verdict columns keep
    their string form so CSV and JSON read back identically.
    """
    path = str(path)
    _, ext = os.path.splitext(path)
    with fsspec.open(path, "r") as f:
        if ext in CSV_EXTENSIONS:
            table = pd.read_csv(f, dtype=str, keep_default_na=False)
        elif ext in JSON_EXTENSIONS:
            table = pd.DataFrame(json.load(f), dtype=object)
            table = table.apply(lambda col: col.map(_stringify))
        else:
            raise ValueError(f"Unrecognised table extension {ext!r}")
    return table


def _stringify(value) -> str:
    return "" if value is None else str(value)
