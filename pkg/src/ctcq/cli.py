"""Command-line front end.

Every command prints one JSON document (or CSV where offered) to stdout.
Exit codes: 0 success, 1 domain error, 2 usage error.  Errors are printed as
``{"error": code, "detail": message}``.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import os
import sys
import warnings
from dataclasses import dataclass

import numpy as np

from . import appendix, prescriptions as pr, scenarios as sc, tomography as tm
from . import linalg as la
from .errors import CTCError, PostselectionImpossibleError
from .io import ParseError, dumps, load_matrix_file, matrix_to_json, parse_state_literal

COMMANDS = ("fixed-point", "ecp", "pctc-state", "tomograph", "scenario", "verify-appendix")
MODE_NAMES = {"exact": "exact-limit", "finite": "finite-epsilon", "sampled": "sampled"}

STATE_HELP = """\
state literals (--rho, --seed-state):
  |s><s|     projector onto a product ket; s uses labels 0 1 + - R L,
             e.g. "|0><0|", "|+><+|", "|00><00|"
  bell       (|00> + |11>)(<00| + <11|) / 2
  mixed      I/2; "mixed:n" for n qubits
matrix files (--unitary-file, --rho-file):
  {"dims": [d1, ...], "entries": [[re, im], ...]}  (row-major)
  any matrix printed by this tool can be saved and read back this way.
"""


class UsageError(Exception):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    command: str
    scenario: str | None = None
    unitary_file: str | None = None
    rho: str | None = None
    rho_file: str | None = None
    p: float | None = None
    g: float | None = None
    ctc: str = "pctc"
    mode: str = "exact"
    epsilon: float = tm.DEFAULT_EPSILON
    shots: int | None = None
    seed: int = 0
    normalization: str = "bell"
    seed_state: str = "mixed"
    tol: float | None = None
    max_iter: int = pr.ECP_MAX_ITER
    cases: int = 200
    format: str = "json"


def _default_seed() -> int:
    raw = os.environ.get("CTCQ_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"CTCQ_SEED must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ctcq",
        description="Simulate D-CTC and P-CTC qubit circuits and their weak-measurement tomography.",
        epilog=STATE_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, inputs=True):
        if inputs:
            src = p.add_mutually_exclusive_group()
            src.add_argument("--scenario", choices=sorted(sc.SCENARIOS))
            src.add_argument("--unitary-file", help="JSON matrix for U on CR (x) CV, CV last")
            st = p.add_mutually_exclusive_group()
            st.add_argument("--rho", help="CR input as a state literal (defaults to the scenario preset)")
            st.add_argument("--rho-file", help="CR input as a JSON matrix file")
            p.add_argument("--p", type=float, help="power for the power-swap scenario")
            p.add_argument("--g", type=float, help="family parameter for unproven-theorem oracles")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default: $CTCQ_SEED or 0)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--tol", type=float, help="override the command's numerical tolerance")

    for name, help_text in (
        ("fixed-point", "D-CTC fixed-point family and max-entropy member"),
        ("ecp", "iterate the D-CTC map from a seed state"),
        ("pctc-state", "P-CTC CV state and CR output"),
        ("tomograph", "weak-measurement tomography of the CV state"),
        ("scenario", "show a preset interaction and its closed-form states"),
    ):
        p = sub.add_parser(name, help=help_text, epilog=STATE_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
        common(p)
        if name == "ecp":
            p.add_argument("--seed-state", default="mixed", help="seed CV state literal (default mixed)")
            p.add_argument("--max-iter", type=int, default=pr.ECP_MAX_ITER)
        if name == "tomograph":
            p.add_argument("--ctc", choices=("pctc", "dctc"), default="pctc")
            p.add_argument("--mode", choices=tuple(MODE_NAMES), default="exact")
            p.add_argument("--epsilon", type=float, default=tm.DEFAULT_EPSILON)
            p.add_argument("--shots", type=int)
            p.add_argument("--normalization", choices=tm.NORMALIZATIONS, default="bell")
    p = sub.add_parser("verify-appendix", help="run the randomized expectation-value derivation checks")
    common(p, inputs=False)
    p.add_argument("--cases", type=int, default=200)
    return parser


def parse_args(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    kw = {k: v for k, v in vars(ns).items() if v is not None}
    kw["seed"] = ns.seed if ns.seed is not None else _default_seed()
    cfg = RunConfig(**kw)
    if cfg.command != "verify-appendix":
        if (cfg.scenario is None) == (cfg.unitary_file is None):
            raise UsageError("give exactly one of --scenario or --unitary-file")
        if cfg.unitary_file and cfg.rho is None and cfg.rho_file is None:
            raise UsageError("--unitary-file needs --rho or --rho-file")
        if cfg.p is not None and cfg.scenario != "power-swap":
            raise UsageError("--p only applies to --scenario power-swap")
    if cfg.g is not None and not 0 <= cfg.g <= 1:
        raise UsageError("--g must lie in [0, 1]")
    if not 0 <= cfg.epsilon <= 1:
        raise UsageError("--epsilon must lie in [0, 1]")
    if cfg.command == "tomograph" and cfg.mode != "exact" and cfg.epsilon == 0:
        raise UsageError("finite and sampled tomography need --epsilon > 0")
    if cfg.mode == "sampled" and (cfg.shots is None or cfg.shots < 1):
        raise UsageError("--mode sampled needs --shots >= 1")
    if cfg.shots is not None and cfg.mode != "sampled":
        raise UsageError("--shots only applies to --mode sampled")
    if cfg.tol is not None and not cfg.tol > 0:
        raise UsageError("--tol must be positive")
    if cfg.cases < 1 or cfg.max_iter < 1:
        raise UsageError("--cases and --max-iter must be positive")
    if cfg.format == "csv" and cfg.command not in ("ecp", "tomograph"):
        raise UsageError("csv output is only available for ecp traces and tomography Bloch vectors")
    return cfg


def _inputs(cfg: RunConfig):
    scen = None
    if cfg.scenario:
        scen = sc.get_scenario(cfg.scenario, cfg.p)
        u = scen.unitary
    else:
        u = load_matrix_file(cfg.unitary_file)
    if cfg.rho_file:
        rho = load_matrix_file(cfg.rho_file)
    elif cfg.rho:
        rho = parse_state_literal(cfg.rho)
    else:
        rho = scen.default_rho
    rho = la.validate_density(rho)
    if u.n % rho.n:
        raise UsageError(f"CR input of dimension {rho.n} does not fit a unitary of dimension {u.n}")
    if scen is not None and rho.dims != scen.cr_dims:
        rho = rho.with_dims(scen.cr_dims) if rho.n == int(np.prod(scen.cr_dims)) else rho
    return scen, u, rho


def _csv(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _fixed_point(cfg, scen, u, rho):
    fam = pr.dctc_fixed_points(u, rho, cfg.tol or pr.NULL_TOL)
    best = pr.max_entropy_member(fam)
    out = {
        "command": "fixed-point",
        "family": fam.to_dict(),
        "unique": fam.is_unique,
        "box_exact": fam.box_exact,
        "selection": fam.selection,
        "max_entropy_member": matrix_to_json(best),
        "cr_output": matrix_to_json(pr.dctc_cr_output(u, rho, best)),
    }
    return out


def _ecp(cfg, scen, u, rho):
    _, cv = la.split_dims(u, rho)
    seed_state = parse_state_literal(cfg.seed_state)
    trace = pr.ecp_iterate(u, rho, seed_state.with_dims(cv) if seed_state.n == int(np.prod(cv)) else seed_state,
                           cfg.tol or pr.ECP_TOL, cfg.max_iter)
    if cfg.format == "csv":
        qubit = trace.final.n == 2
        header = ["n", "residual"] + (["r1", "r2", "r3"] if qubit else [])
        rows = []
        for n, res in enumerate(trace.residuals):
            b = list(la.bloch_from_state(trace.iterates[n + 1])) if qubit else []
            rows.append([n + 1, float(res)] + [float(x) for x in b])
        return _csv(header, rows)
    return {
        "command": "ecp",
        "converged": trace.converged,
        "steps": trace.steps,
        "seed_state": matrix_to_json(trace.seed_state),
        "final": matrix_to_json(trace.final),
        "residuals": [float(x) for x in trace.residuals],
    }


def _pctc_state(cfg, scen, u, rho):
    out = {"command": "pctc-state", "tau_P": matrix_to_json(pr.pctc_cv_state(u, rho)),
           "survival": pr.pctc_survival(u, rho) / 4}
    try:
        out["rho_P"] = matrix_to_json(pr.pctc_cr_map(u, rho))
    except PostselectionImpossibleError as exc:
        out["rho_P"] = None
        out["warning"] = {"error": exc.code, "detail": str(exc)}
    return out


def _tomograph(cfg, scen, u, rho):
    res = tm.tomograph(u, rho, cfg.ctc, MODE_NAMES[cfg.mode], cfg.epsilon, cfg.shots, cfg.seed, cfg.normalization)
    if cfg.format == "csv":
        return _csv(["k", "r"], [[k, float(r)] for k, r in zip((1, 2, 3), res.r)])
    return {"command": "tomograph", "ctc": cfg.ctc, "seed": cfg.seed, "result": res.to_dict()}


def _scenario(cfg, scen, u, rho):
    if scen is None:
        raise UsageError("scenario command needs --scenario")
    params = {} if cfg.g is None else {"g": cfg.g}
    oracle = scen.oracle_states(rho, **params)
    return {
        "command": "scenario",
        "name": scen.name,
        "params": scen.params,
        "notes": list(scen.notes),
        "unitary": matrix_to_json(scen.unitary),
        "rho": matrix_to_json(rho),
        "oracle": {k: matrix_to_json(v) for k, v in oracle.items()},
    }


def _verify(cfg):
    reports = appendix.run_appendix_suite(cfg.cases, cfg.seed)
    code = 0 if all(r.passed for r in reports) else 1
    return code, {"command": "verify-appendix", "reports": [r.to_dict() for r in reports]}


HANDLERS = {
    "fixed-point": _fixed_point,
    "ecp": _ecp,
    "pctc-state": _pctc_state,
    "tomograph": _tomograph,
    "scenario": _scenario,
}


def _error(code: str, detail: str) -> str:
    return dumps({"error": code, "detail": detail})


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute a parsed configuration; returns (exit code, stdout text)."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if cfg.command == "verify-appendix":
                code, out = _verify(cfg)
                return code, dumps(out)
            scen, u, rho = _inputs(cfg)
            out = HANDLERS[cfg.command](cfg, scen, u, rho)
        return 0, out if isinstance(out, str) else dumps(out)
    except (UsageError, ParseError) as exc:
        return 2, _error(exc.code, str(exc))
    except CTCError as exc:
        return 1, _error(exc.code, str(exc))
    except (ValueError, KeyError) as exc:
        return 1, _error("invalid-input", str(exc))


def main(argv=None) -> int:
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        sys.stdout.write(_error(exc.code, str(exc)))
        return 2
    code, text = run(cfg)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
