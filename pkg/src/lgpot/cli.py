"""Command-line front end.

Every command prints one JSON document (or an aligned text table) on
stdout.  Exit status: 0 on success or a passing verification, 1 when a
verification fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import periods, theta, toric

COMMANDS = ("potential", "theta", "verify-product", "verify-wdvv", "period", "compare-period", "v10")


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    geometry: str | None = None
    laurent: str | None = None
    table: str | None = None
    order: int = 9
    terms: int | None = None
    pmax: int = 1
    kmax: int = 8
    zero_deg_cap: int = 0
    format: str = "json"

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.order < 1:
            raise InputError("--order must be at least 1")
        if self.pmax < 1:
            raise InputError("--pmax must be at least 1")
        if self.kmax < 1:
            raise InputError("--kmax must be at least 1")
        if self.zero_deg_cap < 0:
            raise InputError("--zero-deg-cap must be nonnegative")
        if self.format not in ("json", "table"):
            raise InputError("--format must be json or table")


def dumps(doc) -> str:
    """Canonical JSON text used for every emitted document."""
    return json.dumps(doc, indent=2)


def resolve(path: str) -> Path:
    """Use the path if it exists, else look its file name up in the corpus."""
    p = Path(path)
    if p.exists():
        return p
    candidate = toric.corpus_dir() / p.name
    if candidate.exists():
        return candidate
    raise InputError(f"{path}: no such file (also looked in {toric.corpus_dir()})")


def _read_json(path: str):
    p = resolve(path)
    try:
        with open(p) as fh:
            return json.load(fh)
    except json.JSONDecodeError as err:
        raise InputError(f"{p}: malformed JSON at line {err.lineno}, column {err.colno}: {err.msg}") from None


def _load_geometry(path: str) -> toric.ToricGeometry:
    doc = _read_json(path)
    try:
        return toric.ToricGeometry.from_dict(doc)
    except toric.GeometryError as err:
        raise InputError(f"{path}: invalid geometry, invariant {err}") from None
    except (TypeError, ValueError) as err:
        raise InputError(f"{path}: invalid geometry: {err}") from None


def _load_laurent(path: str) -> periods.LaurentPolynomial:
    doc = _read_json(path)
    try:
        return periods.LaurentPolynomial.from_dict(doc)
    except (KeyError, TypeError, ValueError) as err:
        raise InputError(f"{path}: invalid Laurent polynomial: {err}") from None


def _load_table(path: str) -> theta.InvariantTable:
    doc = _read_json(path)
    try:
        return theta.InvariantTable.from_dict(doc)
    except (KeyError, TypeError, ValueError) as err:
        raise InputError(f"{path}: invalid table: {err}") from None


def _need(cfg: RunConfig, attr: str):
    if getattr(cfg, attr) is None:
        raise InputError(f"{cfg.command} needs --{attr}")


def _frac(c: Fraction) -> str:
    return str(Fraction(c))


def _column1(geom: toric.ToricGeometry, grade: int, zero_deg_cap: int) -> theta.InvariantTable:
    potential = toric.proper_potential(geom, grade, zero_deg_cap)
    return toric.two_point_invariants(potential, geom)


def _table_for(cfg: RunConfig, pmax: int, grade: int) -> theta.InvariantTable:
    """Table complete for p <= pmax and n + p <= grade, from a geometry or a file."""
    if cfg.table is not None:
        table = _load_table(cfg.table)
        if table.pmax < pmax or table.max_grade < grade:
            if table.pmax == 1 and table.max_grade >= grade:
                return theta.wdvv_extend_table(table, pmax, grade - pmax)
            raise InputError(
                f"{cfg.table}: table covers pmax={table.pmax}, grade {table.max_grade}; "
                f"need pmax={pmax}, grade {grade}"
            )
        return table
    _need(cfg, "geometry")
    geom = _load_geometry(cfg.geometry)
    col1 = _column1(geom, grade, cfg.zero_deg_cap)
    return theta.wdvv_extend_table(col1, pmax, grade - pmax)


# commands

def cmd_potential(cfg: RunConfig):
    _need(cfg, "geometry")
    geom = _load_geometry(cfg.geometry)
    pot = toric.proper_potential(geom, cfg.order, cfg.zero_deg_cap)
    doc = {
        "command": "potential",
        "geometry": geom.name,
        "order": cfg.order,
        "zero_deg_cap": cfg.zero_deg_cap,
        "prefactor": "x^-1",
        "potential": pot.to_dict(),
    }
    try:
        flat = toric.specialize(pot, geom)
        doc["specialized"] = {"var": "t", "coeffs": [_frac(c) for c in flat.coefficients()]}
        doc["invariants"] = toric.two_point_invariants(pot, geom).to_dict()
    except toric.SpecializationError as err:
        doc["specialized"] = None
        doc["note"] = str(err)
    return 0, doc


def cmd_theta(cfg: RunConfig):
    table = _table_for(cfg, cfg.pmax, cfg.order)
    thetas = [theta.theta_series(table, p, cfg.order - p).to_dict() for p in range(1, cfg.pmax + 1)]
    return 0, {"command": "theta", "order": cfg.order, "table": table.to_dict(), "theta": thetas}


def cmd_verify_product(cfg: RunConfig):
    table = _table_for(cfg, 2 * cfg.pmax, cfg.order)
    results = []
    ok = True
    for p1 in range(1, cfg.pmax + 1):
        for p2 in range(p1, cfg.pmax + 1):
            rep = theta.verify_product(table, p1, p2, cfg.order)
            ok &= rep.passed
            results.append({"p1": p1, "p2": p2, **rep.to_dict()})
    return (0 if ok else 1), {"command": "verify-product", "order": cfg.order, "pass": ok, "results": results}


def cmd_verify_wdvv(cfg: RunConfig):
    grade = cfg.kmax + 2 * cfg.pmax
    table = _table_for(cfg, 2 * cfg.pmax, grade)
    results = []
    ok = True
    for p1 in range(1, cfg.pmax + 1):
        for p2 in range(1, cfg.pmax + 1):
            rep = theta.verify_wdvv(table, p1, p2, cfg.kmax)
            ok &= rep.passed
            results.append({"p1": p1, "p2": p2, **rep.to_dict()})
    return (0 if ok else 1), {"command": "verify-wdvv", "kmax": cfg.kmax, "pass": ok, "results": results}


def _period_with_terms(f: periods.LaurentPolynomial, nterms: int, limit: int = 64) -> periods.PeriodSequence:
    # grow the order until nterms nonzero periods beyond pi_0 are found
    K = max(nterms, 1)
    while True:
        pi = periods.classical_period(f, K)
        support = [k for k in range(1, len(pi)) if pi[k]]
        if len(support) >= nterms:
            return periods.PeriodSequence(pi.coeffs[: support[nterms - 1] + 1] if nterms else pi.coeffs[:1])
        if K >= limit:
            return pi
        K = min(2 * K, limit)


def cmd_period(cfg: RunConfig):
    _need(cfg, "laurent")
    f = _load_laurent(cfg.laurent)
    if cfg.terms is not None:
        pi = _period_with_terms(f, cfg.terms)
    else:
        pi = periods.classical_period(f, cfg.order)
    doc = {"command": "period", "order": pi.order, "period": pi.to_dict()}
    if len(pi) > 1 and not pi[1]:
        doc["g"] = periods.g_from_period(pi).to_dict()
    return 0, doc


def compare_period(geometry_path: str, laurent_path: str, order: int) -> theta.Report:
    geom = _load_geometry(geometry_path)
    f = _load_laurent(laurent_path)
    toric_g = toric.specialize(toric.g_series(geom, order), geom)
    pi = periods.classical_period(f, order)
    return periods.compare_g(toric_g, periods.g_from_period(pi))


def cmd_compare_period(cfg: RunConfig):
    _need(cfg, "geometry")
    _need(cfg, "laurent")
    rep = compare_period(cfg.geometry, cfg.laurent, cfg.order)
    return (0 if rep.passed else 1), {"command": "compare-period", "order": cfg.order, **rep.to_dict()}


def cmd_v10(cfg: RunConfig):
    pi = periods.v10_regularized_period(cfg.order)
    pot = periods.potential_from_period(pi, cfg.order)
    return 0, {
        "command": "v10",
        "order": cfg.order,
        "period": pi.to_dict(),
        "g": periods.g_from_period(pi).to_dict(),
        "prefactor": "x^-1",
        "potential": pot.to_dict(),
    }


HANDLERS = {
    "potential": cmd_potential,
    "theta": cmd_theta,
    "verify-product": cmd_verify_product,
    "verify-wdvv": cmd_verify_wdvv,
    "period": cmd_period,
    "compare-period": cmd_compare_period,
    "v10": cmd_v10,
}


def run(cfg: RunConfig) -> tuple[int, dict]:
    try:
        return HANDLERS[cfg.command](cfg)
    except (toric.SpecializationError, theta.MissingEntryError, periods.PeriodError) as err:
        raise InputError(str(err)) from None


# text rendering

def _series_rows(doc: dict) -> list[list[str]]:
    rows = [[",".join(doc["vars"]), "coefficient"]]
    for t in doc["terms"]:
        c = Fraction(int(t["num"]), int(t["den"]))
        rows.append([" ".join(str(e) for e in t["exp"]), str(c)])
    return rows


def _align(rows: list[list[str]]) -> str:
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows)


def render_table(doc: dict) -> str:
    cmd = doc.get("command")
    out = []
    if cmd in ("potential", "v10"):
        out.append(f"# {cmd} (prefactor {doc['prefactor']})")
        out.append(_align(_series_rows(doc["potential"])))
        if doc.get("invariants"):
            out.append("")
            out.append(render_table({"command": "table", "table": doc["invariants"]}))
    elif cmd in ("theta", "table"):
        rows = [["n", "p", "N_{n,p}"]]
        for e in doc["table"]["entries"]:
            rows.append([str(e["n"]), str(e["p"]), str(Fraction(int(e["num"]), int(e["den"])))])
        out.append(_align(rows))
    elif cmd == "period":
        rows = [["k", "pi_k"]] + [[str(k), c] for k, c in enumerate(doc["period"]["coeffs"])]
        out.append(_align(rows))
    elif cmd in ("verify-product", "verify-wdvv"):
        rows = [["p1", "p2", "verdict", "first mismatch"]]
        for r in doc["results"]:
            first = r["mismatches"][0] if r["mismatches"] else None
            loc = "" if first is None else f"x^{first.get('xpow')} t^{first['tpow']}: {first['lhs']} != {first['rhs']}"
            rows.append([str(r["p1"]), str(r["p2"]), "pass" if r["pass"] else "FAIL", loc])
        out.append(_align(rows))
    elif cmd == "compare-period":
        first = doc["mismatches"][0] if doc["mismatches"] else None
        out.append("pass" if doc["pass"] else f"FAIL at t^{first['tpow']}: toric {first['lhs']} != period {first['rhs']}")
    return "\n".join(out)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lgpot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("json", "table"), default="json")
        return p

    p = common(sub.add_parser("potential", help="proper potential and column p=1"))
    p.add_argument("--geometry", required=True)
    p.add_argument("--order", type=int, default=9)
    p.add_argument("--zero-deg-cap", type=int, default=0)

    for name, help_ in (("theta", "invariant table and theta functions"),
                        ("verify-product", "check the theta product rule")):
        p = common(sub.add_parser(name, help=help_))
        p.add_argument("--geometry")
        p.add_argument("--table")
        p.add_argument("--order", type=int, default=12)
        p.add_argument("--pmax", type=int, default=3)
        p.add_argument("--zero-deg-cap", type=int, default=0)

    p = common(sub.add_parser("verify-wdvv", help="check the general two-point WDVV identity"))
    p.add_argument("--geometry")
    p.add_argument("--table")
    p.add_argument("--pmax", type=int, default=4)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--zero-deg-cap", type=int, default=0)

    p = common(sub.add_parser("period", help="classical period of a Laurent polynomial"))
    p.add_argument("--laurent", required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--order", type=int, default=12)
    g.add_argument("--terms", type=int, help="stop after this many nonzero periods beyond pi_0")

    p = common(sub.add_parser("compare-period", help="toric g against the period-derived g"))
    p.add_argument("--geometry", required=True)
    p.add_argument("--laurent", required=True)
    p.add_argument("--order", type=int, default=12)

    p = common(sub.add_parser("v10", help="V10 regularized period and potential"))
    p.add_argument("--order", type=int, default=6)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    opts = {k: v for k, v in vars(args).items() if v is not None}
    try:
        cfg = RunConfig(**opts)
        status, doc = run(cfg)
    except InputError as err:
        print(f"lgpot: error: {err}", file=sys.stderr)
        return 2
    print(dumps(doc) if cfg.format == "json" else render_table(doc))
    return status


if __name__ == "__main__":
    sys.exit(main())
