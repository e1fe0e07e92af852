import io
import json
import logging
import sys
from types import SimpleNamespace

import pandas as pd
import pytest
from click.testing import CliRunner

import hecke_nullity
import hecke_nullity.db
import hecke_nullity.mult
import hecke_nullity.sweep
import hecke_nullity.weightred
from hecke_nullity.__main__ import main
from hecke_nullity.exceptions import InvariantViolation
from hecke_nullity.modsym import OPERATION_COUNTS


def setup_module(module):
    logging.basicConfig(stream=sys.stdout, level=logging.DEBUG)
    logging.getLogger("").handlers = []


@pytest.fixture
def run_main():
    def _run_cli(
        opts,
        catch_exceptions=False,
        expect_success=True,
        cli_method=main,
        input=None,
    ):
        exe_opts = []
        exe_opts.extend(opts)

        runner = CliRunner()
        result = runner.invoke(cli_method, exe_opts, catch_exceptions=catch_exceptions, input=input)
        if expect_success:
            assert 0 == result.exit_code, "Error for {!r}. output: {!r}".format(
                opts,
                result.output,
            )
        return result

    return _run_cli


def test_main(run_main):
    result = run_main([], expect_success=False)
    assert "mult" in result.output
    assert "verify" in result.output


def test_version(run_main):
    result = run_main(["--version"])
    assert hecke_nullity.__version__ in result.output


def test_mult(run_main):
    result = run_main(["mult", "-p", "2", "-N", "9", "-k", "4"])
    envelope = json.loads(result.output)
    assert envelope["query"] == {"p": 2, "N": 9, "k": 4, "chi": "trivial", "lambda": "0"}
    assert envelope["dimensions"] == {"full": 1, "new": 1}
    assert envelope["multiplicity"] == {"lambda": "0", "full": 1, "new": 1, "cm": 1}
    assert envelope["weight_reduction"] is None
    assert envelope["slopes"] == ["inf"]
    assert envelope["verdicts"] == {"theorem": None, "conjecture_equal": True}
    assert envelope["levels"] == {"1": 0, "3": 0, "9": 1}
    assert envelope["meta"]["version"] == hecke_nullity.__version__


def test_mult_level_one(run_main):
    result = run_main(["mult", "-p", "5", "-N", "1", "-k", "12"])
    envelope = json.loads(result.output)
    assert envelope["multiplicity"]["full"] == 0
    assert envelope["weight_reduction"]["chosen"] == [1, 2]
    assert envelope["verdicts"]["theorem"] is True
    assert envelope["slopes"] == ["1"]


def test_mult_nonzero_eigenvalue(run_main):
    result = run_main(["mult", "-p", "2", "-N", "1", "-k", "12", "--lambda=-24"])
    envelope = json.loads(result.output)
    assert envelope["multiplicity"] == {"lambda": "-24", "full": 1, "new": 1, "cm": None}
    assert envelope["verdicts"] == {"theorem": None, "conjecture_equal": None}
    assert envelope["cm"] is None


def test_mult_out(run_main, tmp_path):
    out = tmp_path / "report.json"
    result = run_main(["mult", "-p", "5", "-N", "27", "-k", "2", "--out", str(out)])
    assert result.output == ""
    with open(out) as f:
        envelope = json.load(f)
    assert envelope["multiplicity"]["new"] == 1
    assert envelope["cm"]["counts"] == {"-3": 1}


@pytest.mark.parametrize(
    "opts, error",
    [
        (["-p", "3", "-N", "9", "-k", "4"], "PDividesLevelError"),
        (["-p", "4", "-N", "9", "-k", "4"], "NotPrimeError"),
        (["-p", "2", "-N", "9", "-k", "3"], "ParityMismatchError"),
        (["-p", "2", "-N", "9", "-k", "4", "--chi", "legendre:5"], "CharacterSpecError"),
        (["-p", "2", "-N", "9", "-k", "4", "--lambda=1/0"], "PreconditionError"),
        (["-p", "2", "-N", "9", "-k", "4", "--lambda=abc"], "PreconditionError"),
    ],
)
def test_mult_bad_input(run_main, opts, error):
    result = run_main(["mult", *opts], expect_success=False)
    assert result.exit_code == 2
    payload = json.loads(result.output)
    assert payload["error"]["type"] == error
    assert payload["error"]["exit_code"] == 2


def test_mult_cache(run_main, tmp_path):
    cache = str(tmp_path / "cache")
    opts = ["mult", "-p", "2", "-N", "9", "-k", "4", "--cache", cache]
    first = json.loads(run_main(opts).output)
    computed = OPERATION_COUNTS["hecke_matrix computed"]
    second = json.loads(run_main(opts).output)
    assert OPERATION_COUNTS["hecke_matrix computed"] == computed
    del first["meta"], second["meta"]
    assert first == second


def test_mult_theorem_violation(run_main, monkeypatch):
    monkeypatch.setattr(hecke_nullity.weightred, "verify_bound", lambda *args: SimpleNamespace(holds=False))
    result = run_main(["mult", "-p", "5", "-N", "1", "-k", "12"], expect_success=False)
    assert result.exit_code == 3
    assert '"theorem": false' in result.output
    assert '"TheoremViolation"' in result.output


def test_mult_invariant_violation(run_main, monkeypatch):
    def broken(*args):
        raise InvariantViolation("divisor sum is negative")

    monkeypatch.setattr(hecke_nullity.mult, "multiplicity_report", broken)
    result = run_main(["mult", "-p", "5", "-N", "1", "-k", "12"], expect_success=False)
    assert result.exit_code == 4
    payload = json.loads(result.output)
    assert payload["error"] == {
        "type": "InvariantViolation",
        "message": "divisor sum is negative",
        "exit_code": 4,
    }


def test_too_verbose(run_main):
    result = run_main(["mult", "-p", "5", "-N", "1", "-k", "12", "-vvv"], expect_success=False)
    assert result.exit_code == 1


def test_verbose_logs(run_main):
    result = run_main(["reduce", "-p", "5", "-k", "12", "-vv"])
    assert '"chosen"' in result.output


@pytest.mark.parametrize(
    "p, k, chosen",
    [("5", "12", [1, 2]), ("7", "22", [0, 4]), ("5", "2", [0, 2])],
)
def test_reduce(run_main, p, k, chosen):
    result = run_main(["reduce", "-p", p, "-k", k])
    assert json.loads(result.output)["chosen"] == chosen


def test_reduce_bad_input(run_main):
    result = run_main(["reduce", "-p", "5", "-k", "13"], expect_success=False)
    assert result.exit_code == 2
    result = run_main(["reduce", "-p", "6", "-k", "12"], expect_success=False)
    assert result.exit_code == 2


def test_verify_csv(run_main):
    result = run_main(["verify", "--p-list", "5,7", "--N-list", "1,27", "--k-range", "2"])
    table = pd.read_csv(io.StringIO(result.output))
    assert list(table.columns) == hecke_nullity.sweep.COLUMNS
    assert list(zip(table["p"], table["N"])) == [(5, 1), (5, 27), (7, 1), (7, 27)]
    assert list(table["m_new"]) == [0, 1, 0, 0]
    assert list(table["m_cm"]) == [0, 1, 0, 0]
    assert table["theorem"].all()


def test_verify_json(run_main):
    result = run_main(["verify", "--p-list", "5", "--N-list", "27", "--k-range", "2", "--format", "json"])
    rows = json.loads(result.output)
    assert rows == [
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
        }
    ]


def test_verify_empty_range(run_main):
    result = run_main(["verify", "--p-list", "5", "--N-list", "1", "--k-range", "14:12"])
    assert result.output.strip() == ",".join(hecke_nullity.sweep.COLUMNS)


def test_verify_out_and_db(run_main, tmp_path):
    out = tmp_path / "sweep.json"
    path = tmp_path / "sweeps.db"
    opts = ["verify", "--p-list", "5", "--N-list", "1", "--k-range", "10:12", "--no-cm"]
    run_main([*opts, "--format", "json", "--out", str(out), "--db", str(path)])
    run_main([*opts, "--format", "json", "--out", str(out), "--db", str(path)])
    table = hecke_nullity.db.read_sweep_rows(hecke_nullity.db.get_engine_sqlite(path), 1)
    assert list(table["k"]) == [10, 12]
    assert list(table["dim_full"]) == [0, 1]
    with open(out) as f:
        assert [row["k"] for row in json.load(f)] == [10, 12]


@pytest.mark.parametrize(
    "opts",
    [
        ["--p-list", "4", "--N-list", "1", "--k-range", "12"],
        ["--p-list", "5", "--N-list", "25", "--k-range", "12"],
        ["--p-list", "5", "--N-list", "1", "--k-range", "a:b"],
        ["--p-list", "5", "--N-list", "1", "--k-range", "12", "--jobs", "0"],
        ["--p-list", "5", "--N-list", "1", "--k-range", "12", "--lambda", "x"],
    ],
)
def test_verify_bad_input(run_main, opts):
    result = run_main(["verify", *opts], expect_success=False)
    assert result.exit_code == 2


def test_verify_theorem_violation(run_main, monkeypatch):
    monkeypatch.setattr(
        hecke_nullity.sweep,
        "verify_bound",
        lambda *args: SimpleNamespace(k_prime=2, m_kprime_new=0, holds=False),
    )
    result = run_main(
        ["verify", "--p-list", "5", "--N-list", "1", "--k-range", "12", "--no-cm"],
        expect_success=False,
    )
    assert result.exit_code == 3
    assert "TheoremViolation" in result.output


def test_cm_count(run_main):
    result = run_main(["cm", "-p", "2", "-N", "9", "-k", "4"])
    report = json.loads(result.output)
    assert report["total"] == 1
    assert report["equal"] is True


def test_cm_construct(run_main):
    result = run_main(["cm", "--construct=-3", "--conductor", "0,2", "--w", "3", "--allow-ramified", "-B", "10"])
    series = json.loads(result.output)["series"]
    assert series["precision"] == 10
    assert series["coefficients"][:7] == ["1", "0", "0", "-8", "0", "0", "20"]
    assert series["character"] == "trivial"
    assert (series["weight"], series["level"]) == (4, 9)


def test_cm_bad_input(run_main):
    result = run_main(["cm", "--construct=-3", "--conductor", "0,2", "--w", "3"], expect_success=False)
    assert result.exit_code == 2
    assert json.loads(result.output)["error"]["type"] == "RamifiedPrimeError"
    result = run_main(["cm", "--construct=-3", "--w", "3"], expect_success=False)
    assert result.exit_code == 2
    result = run_main(["cm", "-p", "2"], expect_success=False)
    assert result.exit_code == 2


def test_qexp_delta(run_main):
    result = run_main(["qexp", "--form", "delta", "-B", "5"])
    payload = json.loads(result.output)
    assert payload["series"][0]["coefficients"] == ["1", "-24", "252", "-1472", "4830"]
    assert payload["hecke"] is None


def test_qexp_eta_hecke(run_main):
    result = run_main(["qexp", "--form", "eta", "--spec", "3:8", "-N", "9", "-B", "20", "--hecke", "2"])
    payload = json.loads(result.output)
    assert payload["series"][0]["weight"] == 4
    assert payload["hecke"][0]["coefficients"] == ["0"] * 10


def test_qexp_victor_miller(run_main):
    result = run_main(["qexp", "--form", "victor-miller", "-k", "24", "-B", "3"])
    series = json.loads(result.output)["series"]
    assert [s["coefficients"][:2] for s in series] == [["1", "0"], ["0", "1"]]


def test_qexp_bad_input(run_main):
    assert run_main(["qexp", "--form", "eta", "-B", "5"], expect_success=False).exit_code == 2
    assert run_main(["qexp", "--form", "eta", "--spec", "3:x", "-B", "5"], expect_success=False).exit_code == 2
    assert run_main(["qexp", "--form", "victor-miller", "-B", "5"], expect_success=False).exit_code == 2


def test_dim(run_main):
    result = run_main(["dim", "-N", "27", "-k", "2"])
    payload = json.loads(result.output)
    assert payload["dim_cusp"] == 1
    assert payload["envelope"] == "6"
    assert payload["deviation"] == "-5"
    assert payload["plus_dimension"] == 1
    assert payload["cuspidal_dimension"] == 2


def test_dim_formula_only(run_main):
    result = run_main(["dim", "-N", "16", "-k", "3", "--chi", "kronecker:-4", "--no-symbols"])
    payload = json.loads(result.output)
    assert payload["query"]["chi"] == "kronecker:-4"
    assert payload["dim_cusp"] == 1
    assert payload["plus_dimension"] is None
