"""CLI: multiplicities of Hecke eigenvalues, weight reduction and CM counts.

Every command writes JSON (or CSV for sweeps) to stdout or --out.
Exit codes: 0 success, 2 bad input, 3 a computed counterexample to the
weight bound, 4 an internal invariant failure.
"""

import datetime
import functools
import json
import logging
import sys

import click

import hecke_nullity
import hecke_nullity.cm
import hecke_nullity.db
import hecke_nullity.dimension
import hecke_nullity.io
import hecke_nullity.modsym
import hecke_nullity.mult
import hecke_nullity.qexp
import hecke_nullity.sweep
import hecke_nullity.weightred
from hecke_nullity.characters import parse_character
from hecke_nullity.exactalg import format_rational, format_slope, to_rational
from hecke_nullity.exceptions import (
    HeckeNullityError,
    InvariantViolation,
    PreconditionError,
    TheoremViolation,
)

logger = logging.getLogger(__name__)

CACHE_ENVVAR = "HECKE_NULLITY_CACHE"
DB_ENVVAR = "HECKE_NULLITY_DB"

EXIT_PRECONDITION = 2
EXIT_THEOREM = 3
EXIT_INVARIANT = 4


def exit_code_for(error: Exception) -> int:
    if isinstance(error, TheoremViolation):
        return EXIT_THEOREM
    if isinstance(error, InvariantViolation):
        return EXIT_INVARIANT
    if isinstance(error, PreconditionError):
        return EXIT_PRECONDITION
    return 1


def error_object(error: Exception) -> dict:
    return {
        "error": {
            "type": type(error).__name__,
            "message": str(error),
            "exit_code": exit_code_for(error),
        }
    }


def handle_errors(command):
    """Turn package errors into a JSON error object and an exit code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except HeckeNullityError as e:
            click.echo(hecke_nullity.io.dumps(error_object(e)))
            sys.exit(exit_code_for(e))

    return wrapper


def logging_setup(verbose: int):
    """Set up logging.

    Arguments
    ---------
    verbose : int
        Verbosity level (0, 1, 2).
    """
    loggers = [
        logging.getLogger(name)
        for name in logging.root.manager.loggerDict
        if not name.startswith("sqlalchemy") and not name.startswith("fsspec")
    ]
    if verbose == 0:
        level = logging.WARNING
    elif verbose == 1:
        level = logging.INFO
    elif verbose == 2:
        level = logging.DEBUG
    else:
        raise click.ClickException("Maximum verbosity is -vv")
    logging.basicConfig(level=level)
    # Replaced, not stacked: each CliRunner invocation swaps sys.stdout.
    stdout_hdlr = logging.StreamHandler(sys.stdout)
    for logger in loggers:
        logger.setLevel(level)
        logger.handlers = [stdout_hdlr]
        logger.propagate = False


def meta() -> dict:
    return {
        "version": hecke_nullity.__version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }


def emit(obj: dict, out: str = None):
    """Write a JSON document to --out, or to stdout."""
    if out:
        hecke_nullity.io.write_json(obj, out)
        logger.info(f"Wrote {out}")
    else:
        click.echo(hecke_nullity.io.dumps(obj))


def log_operation_counts():
    counts = hecke_nullity.modsym.OPERATION_COUNTS
    logger.debug(
        "Operation counts: "
        + ", ".join(f"{name}={counts[name]}" for name in ("space built", "hecke_matrix computed", "cache hit", "cache miss"))
    )


def build_envelope(p, N, k, chi_spec, lam, cache, heilbronn) -> dict:
    """Assemble the report for one (p, N, k, chi, lambda) query."""
    lam = to_rational(lam)
    chi = parse_character(chi_spec, N)
    report = hecke_nullity.mult.multiplicity_report(p, lam, k, chi, N, cache, heilbronn)

    reduction = None
    if p > 2 and k % 2 == 0:
        reduction = hecke_nullity.weightred.reduce_weight(p, k)

    theorem = None
    if reduction is not None and p >= 5 and lam == 0:
        theorem = hecke_nullity.weightred.verify_bound(p, chi, N, k, cache, heilbronn).holds

    cm_report = None
    if lam == 0:
        cm_report = hecke_nullity.cm.multiplicity_cm(p, k, chi, N, cache, heilbronn)

    return {
        "query": {"p": p, "N": N, "k": k, "chi": chi.spec, "lambda": format_rational(lam)},
        "dimensions": {"full": report.dim_full, "new": report.dim_new},
        "multiplicity": {
            "lambda": format_rational(lam),
            "full": report.m_full,
            "new": report.m_new,
            "cm": cm_report.total if cm_report is not None else None,
        },
        "weight_reduction": reduction.to_dict() if reduction is not None else None,
        "slopes": [format_slope(s) for s in report.slopes],
        "verdicts": {
            "theorem": theorem,
            "conjecture_equal": cm_report.equal if cm_report is not None else None,
        },
        "levels": {str(M): m for M, m in sorted(report.levels.items())},
        "cm": cm_report.to_dict() if cm_report is not None else None,
        "provenance": list(report.provenance),
        "meta": meta(),
    }


@click.group()
@click.version_option(version=hecke_nullity.__version__)
def main():
    """Run hecke-nullity."""


@main.command(no_args_is_help=True)
@click.option("-p", "p", type=int, required=True, help="Prime not dividing the level.")
@click.option("-N", "N", type=int, required=True, help="Level.")
@click.option("-k", "k", type=int, required=True, help="Weight.")
@click.option("--chi", default="trivial", show_default=True, help="Character: trivial or kronecker:D.")
@click.option("--lambda", "lam", default="0", show_default=True, help="Rational eigenvalue.")
@click.option("--out", "-o", type=click.Path(), default=None, help="Output JSON path. Default stdout.")
@click.option(
    "--cache",
    type=click.Path(),
    default=None,
    envvar=CACHE_ENVVAR,
    help=f"Hecke matrix cache directory. Default ${CACHE_ENVVAR}.",
)
@click.option(
    "--heilbronn",
    type=click.Choice(["auto", "cremona", "merel"]),
    default="auto",
    show_default=True,
    help="Heilbronn set used for Hecke matrices.",
)
@click.option("-v", "--verbose", count=True)
@handle_errors
def mult(p, N, k, chi, lam, out, cache, heilbronn, verbose):
    """
    Multiplicity of an eigenvalue of T_p on S_k(N, chi).
    """
    logging_setup(verbose)
    try:
        lam = to_rational(lam)
    except (ValueError, ZeroDivisionError):
        raise PreconditionError(f"Cannot read {lam!r} as a rational eigenvalue")
    envelope = build_envelope(p, N, k, chi, lam, cache, heilbronn)
    emit(envelope, out)
    log_operation_counts()
    if envelope["verdicts"]["theorem"] is False:
        raise TheoremViolation(f"m_new(0, {k}) exceeds its value at the reduced weight for p={p}, N={N}")
    return 0


@main.command(no_args_is_help=True)
@click.option("-p", "p", type=int, required=True, help="Odd prime.")
@click.option("-k", "k", type=int, required=True, help="Even weight.")
@click.option("--out", "-o", type=click.Path(), default=None, help="Output JSON path. Default stdout.")
@click.option("-v", "--verbose", count=True)
@handle_errors
def reduce(p, k, out, verbose):
    """
    Reduce the weight k at p.
    """
    logging_setup(verbose)
    reduction = hecke_nullity.weightred.reduce_weight(p, k)
    emit(reduction.to_dict(), out)
    return 0


@main.command(no_args_is_help=True)
@click.option("--p-list", required=True, help="Comma-separated primes, e.g. 5,7.")
@click.option("--N-list", "n_list", required=True, help="Comma-separated levels, e.g. 1,27.")
@click.option("--k-range", required=True, help="Weights as lo:hi (inclusive) or a comma list.")
@click.option("--chi", default="trivial", show_default=True, help="Character: trivial or kronecker:D.")
@click.option("--lambda", "lam", default="0", show_default=True, help="Rational eigenvalue.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", "-o", type=click.Path(), default=None, help="Output table path. Default stdout.")
@click.option("--jobs", "-j", type=int, default=1, show_default=True, help="Worker processes.")
@click.option(
    "--cache",
    type=click.Path(),
    default=None,
    envvar=CACHE_ENVVAR,
    help=f"Hecke matrix cache directory. Default ${CACHE_ENVVAR}.",
)
@click.option(
    "--db",
    type=click.Path(),
    default=None,
    envvar=DB_ENVVAR,
    help=f"SQLite file to persist rows to. Default ${DB_ENVVAR}.",
)
@click.option("--cm/--no-cm", default=True, help="Count CM forms for each row.")
@click.option("-v", "--verbose", count=True)
@handle_errors
def verify(p_list, n_list, k_range, chi, lam, fmt, out, jobs, cache, db, cm, verbose):
    """
    Sweep a grid and check m_new(0, k) <= m_new(0, k') rowwise.
    """
    logging_setup(verbose)
    try:
        lam = to_rational(lam)
    except (ValueError, ZeroDivisionError):
        raise PreconditionError(f"Cannot read {lam!r} as a rational eigenvalue")
    config = hecke_nullity.sweep.SweepConfig(
        p_list=hecke_nullity.sweep.parse_int_list(p_list),
        N_list=hecke_nullity.sweep.parse_int_list(n_list),
        k_values=hecke_nullity.sweep.parse_k_range(k_range),
        character=chi,
        lam=lam,
        fmt=fmt,
        cache_dir=cache,
        jobs=jobs,
        cm=cm,
    )
    table = hecke_nullity.sweep.run_sweep(config, progress=verbose > 0)

    if out:
        hecke_nullity.io.write_table(table, out, fmt)
        logger.info(f"Wrote {len(table)} rows to {out}")
    elif fmt == "csv":
        click.echo(table.to_csv(index=False), nl=False)
    else:
        click.echo(json.dumps(hecke_nullity.io.table_to_records(table), indent=2))

    if db:
        engine = hecke_nullity.db.get_engine_sqlite(db)
        run_id = hecke_nullity.db.write_sweep_rows(engine, config.to_dict(), hecke_nullity.__version__, table)
        logger.info(f"Persisted sweep run {run_id} to {db}")

    for summary in hecke_nullity.mult.boundedness_summary(hecke_nullity.io.table_to_records(table)):
        logger.info(f"Boundedness: {summary}")
    log_operation_counts()

    failures = hecke_nullity.sweep.theorem_failures(table)
    if len(failures):
        points = [(r["p"], r["N"], r["k"]) for r in hecke_nullity.io.table_to_records(failures)]
        raise TheoremViolation(f"Weight bound fails at (p, N, k) = {points}")
    return 0


@main.command(no_args_is_help=True)
@click.option("-p", "p", type=int, default=None, help="Prime not dividing the level.")
@click.option("-N", "N", type=int, default=None, help="Level.")
@click.option("-k", "k", type=int, default=None, help="Weight.")
@click.option("--chi", default="trivial", show_default=True, help="Character: trivial or kronecker:D.")
@click.option("--construct", "D", type=int, default=None, help="Build the CM form of a character of O_D.")
@click.option("--conductor", default=None, help="Conductor generator u,v meaning (u + v sqrt(D))/2.")
@click.option("--w", "w", type=int, default=None, help="Infinity type; the form has weight w + 1.")
@click.option("--allow-ramified", is_flag=True, default=False, help="Permit conductors sharing a prime with D.")
@click.option("--precision", "-B", type=int, default=None, help="q-expansion precision.")
@click.option("--out", "-o", type=click.Path(), default=None, help="Output JSON path. Default stdout.")
@click.option(
    "--cache",
    type=click.Path(),
    default=None,
    envvar=CACHE_ENVVAR,
    help=f"Hecke matrix cache directory. Default ${CACHE_ENVVAR}.",
)
@click.option("-v", "--verbose", count=True)
@handle_errors
def cm(p, N, k, chi, D, conductor, w, allow_ramified, precision, out, cache, verbose):
    """
    Count CM forms with a_p = 0, or construct a CM form with --construct.
    """
    logging_setup(verbose)
    if D is not None:
        if conductor is None or w is None:
            raise PreconditionError("--construct needs --conductor and --w")
        spec = hecke_nullity.cm.HeckeCharacterSpec(
            D=D,
            conductor=hecke_nullity.cm.parse_conductor(D, conductor),
            w=w,
            allow_ramified=allow_ramified,
        )
        B = precision if precision is not None else hecke_nullity.qexp.sturm_bound(spec.weight, spec.level)
        series = hecke_nullity.cm.cm_qexp(spec, B)
        emit({"series": series.to_dict(), "meta": meta()}, out)
        return 0

    if p is None or N is None or k is None:
        raise PreconditionError("Counting needs -p, -N and -k")
    chi = parse_character(chi, N)
    report = hecke_nullity.cm.multiplicity_cm(p, k, chi, N, cache)
    emit({**report.to_dict(), "meta": meta()}, out)
    log_operation_counts()
    return 0


@main.command(no_args_is_help=True)
@click.option(
    "--form",
    type=click.Choice(["delta", "victor-miller", "eta"]),
    required=True,
    help="Which oracle series to print.",
)
@click.option("--spec", default=None, help="Eta quotient as d:r pairs, e.g. 3:2,9:2.")
@click.option("-N", "N", type=int, default=1, show_default=True, help="Level tag for eta quotients.")
@click.option("-k", "k", type=int, default=None, help="Weight for the Victor-Miller basis.")
@click.option("--precision", "-B", type=int, required=True, help="Number of coefficients.")
@click.option("--hecke", type=int, default=None, help="Also apply T_p to each series.")
@click.option("--out", "-o", type=click.Path(), default=None, help="Output JSON path. Default stdout.")
@click.option("-v", "--verbose", count=True)
@handle_errors
def qexp(form, spec, N, k, precision, hecke, out, verbose):
    """
    Print oracle q-expansions.
    """
    logging_setup(verbose)
    if form == "delta":
        series = [hecke_nullity.qexp.delta_qexp(precision)]
    elif form == "victor-miller":
        if k is None:
            raise PreconditionError("--form victor-miller needs -k")
        series = hecke_nullity.qexp.victor_miller_basis(k, precision)
    else:
        if not spec:
            raise PreconditionError("--form eta needs --spec")
        pairs = []
        for part in spec.split(","):
            d, _, r = part.partition(":")
            try:
                pairs.append((int(d), int(r)))
            except ValueError:
                raise PreconditionError(f"Bad eta quotient term {part!r}")
        series = [hecke_nullity.qexp.eta_quotient(pairs, N, precision)]

    images = None
    if hecke is not None:
        images = [hecke_nullity.qexp.hecke_qexp(f, hecke, f.weight).to_dict() for f in series]
    emit({"form": form, "series": [f.to_dict() for f in series], "hecke": images}, out)
    return 0


@main.command(no_args_is_help=True)
@click.option("-N", "N", type=int, required=True, help="Level.")
@click.option("-k", "k", type=int, required=True, help="Weight.")
@click.option("--chi", default="trivial", show_default=True, help="Character: trivial or kronecker:D.")
@click.option("--symbols/--no-symbols", default=True, help="Also build the modular symbols space.")
@click.option("--out", "-o", type=click.Path(), default=None, help="Output JSON path. Default stdout.")
@click.option("-v", "--verbose", count=True)
@handle_errors
def dim(N, k, chi, symbols, out, verbose):
    """
    Dimension of S_k(N, chi) from the closed formula and from modular symbols.
    """
    logging_setup(verbose)
    chi = parse_character(chi, N)
    envelope = hecke_nullity.dimension.dimension_envelope(N, k, chi)
    result = {
        "query": {"N": N, "k": k, "chi": chi.spec},
        "dim_cusp": envelope["dimension"],
        "envelope": format_rational(envelope["envelope"]),
        "deviation": format_rational(envelope["deviation"]),
        "plus_dimension": None,
        "cuspidal_dimension": None,
    }
    if symbols:
        space = hecke_nullity.modsym.build_space(N, k, chi)
        result["plus_dimension"] = hecke_nullity.modsym.plus_dimension(space)
        result["cuspidal_dimension"] = hecke_nullity.modsym.cuspidal_dimension(space)
    emit({**result, "meta": meta()}, out)
    return 0


if __name__ == "__main__":
    main()
