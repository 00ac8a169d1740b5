"""Command-line batch driver.

Every subcommand turns its flags (optionally preloaded from a JSON config via
``--config``) into one *suite*: a normalized parameter record that is
validated in full before any computation starts. A suite writes one CSV and
one JSON summary into the output directory (``--output-dir``, else
``$RELLICHKIT_OUTPUT_DIR``, else the working directory). ``run CONFIG``
executes a list of suites, in parallel up to ``--jobs``.

Exit status is 0 when every check passed, 1 when some check failed and 2 for
usage, configuration or validation errors. A JSON line describing the
outcome, including the list of failed checks, is printed on stdout.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import platform
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .duality import riemannian_probe
from .errors import RellichError
from .inequalities import (
    REPORT_COLUMNS,
    InequalityInstance,
    Which,
    constants,
    green_deflection,
    hypothesis_violation,
    report,
)
from .model_spaces import ModelSpace, RadialProfile
from .norms import MinkowskiNorm
from .sharpness import DEFAULT_EPSILONS, MODELS, rayleigh_sweep

OUTPUT_ENV = "RELLICHKIT_OUTPUT_DIR"
COMMANDS = ("verify", "sweep", "kf-probe", "green-check", "constants")

DEFAULTS = {
    "verify": {"which": "rellich1", "n": 5, "alpha": 0.0, "c": 0.0, "norm": "euclidean",
               "profile": "bump", "rtol": 1e-9, "skip_invalid": False, "explicit": False},
    "sweep": {"which": "rellich1", "n": 5, "alpha": 0.0, "c": 0.0, "norm": "euclidean",
              "eps": list(DEFAULT_EPSILONS), "r": 0.1, "R": 0.2, "eta_factor": 0.1,
              "cutoff_order": 5, "model": "rational", "rtol": 1e-10, "gap_tol": 0.02},
    "kf-probe": {"norm": "pnorm:4", "dim": 2, "samples": 1000, "seed": 0, "expect": "auto"},
    "green-check": {"n": 5, "alpha": 0.0, "c": 0.0, "norm": "euclidean", "profile": "random",
                    "profiles": 10, "seed": 0, "rel_tol": 1e-6},
    "constants": {"n": 5, "alpha": 0.0},
}


class ConfigError(RellichError):
    """Malformed configuration or invalid suite parameters."""


@dataclass
class SuiteResult:
    name: str
    command: str
    params: dict
    columns: tuple
    rows: list
    summary: dict
    failures: list = field(default_factory=list)
    table: list | None = None

    @property
    def passed(self) -> bool:
        return not self.failures


# ------------------------------------------------------------ formatting
def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else format_value(v)
    return obj


def json_text(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def config_hash(params: dict) -> str:
    canon = json.dumps(_jsonable(params), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def provenance(params: dict) -> dict:
    try:
        import numba
        numba_version = numba.__version__
    except ImportError:  # pragma: no cover
        numba_version = None
    return {"config_hash": config_hash(params), "seed": params.get("seed"),
            "versions": {"rellichkit": __version__, "numpy": np.__version__,
                         "numba": numba_version, "python": platform.python_version()},
            "backend": kernels.BACKEND}


# ------------------------------------------------------------ config files
def load_config(path) -> dict:
    """Read a JSON config; syntax errors are reported as file:line:column."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1:1: top level must be an object")
    return data


def _listify(value, conv):
    if isinstance(value, str):
        parts = [p for p in value.replace(" ", "").split(",") if p]
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        parts = [value]
    return [conv(p) for p in parts]


def _which_list(value):
    if value == "all" or value == ["all"]:
        return [w.value for w in Which]
    return [Which.parse(v).value for v in _listify(value, str)]


def _norm(desc, n):
    if isinstance(desc, dict):
        rec = dict(desc)
        rec.setdefault("dimension", n)
        return MinkowskiNorm.from_record(rec)
    return MinkowskiNorm.parse(str(desc), n)


def _space(n, c, desc):
    c = float(c)
    if c == 0.0:
        return ModelSpace.flat(n, _norm(desc, n))
    return ModelSpace.hyperbolic(n, c)


def make_profile(desc, seed=0) -> RadialProfile:
    """``bump``, ``bump:R``, ``poly:a0,a1,...`` or ``random`` (seeded even polynomial bump)."""
    tag, _, arg = str(desc).partition(":")
    if tag == "bump":
        return RadialProfile.bump(float(arg) if arg else 1.0)
    if tag == "poly":
        return RadialProfile.even_polynomial_bump([float(v) for v in arg.split(",")])
    if tag == "random":
        rng = np.random.default_rng(seed)
        return RadialProfile.even_polynomial_bump(rng.normal(size=4))
    raise ConfigError(f"unknown profile {desc!r}")


def normalize(command: str, params: dict) -> dict:
    """Merge defaults, coerce types and validate; raises ConfigError."""
    if command not in DEFAULTS:
        raise ConfigError(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    known = set(DEFAULTS[command]) | {"name", "command", "model_space"}
    extra = sorted(set(params) - known)
    if extra:
        raise ConfigError(f"{command}: unknown parameter(s) {', '.join(extra)}")
    p = {**DEFAULTS[command], **{k: v for k, v in params.items() if v is not None}}
    p.pop("command", None)
    ms = p.pop("model_space", None)
    if ms:
        p["n"], p["c"] = ms.get("n", p.get("n")), ms.get("c", p.get("c", 0.0))
        if ms.get("norm"):
            p["norm"] = ms["norm"]
    try:
        if command == "verify":
            p["which"] = _which_list(p["which"])
            p["n"] = _listify(p["n"], int)
            p["alpha"] = _listify(p["alpha"], float)
            p["c"] = _listify(p["c"], float)
            p["rtol"] = float(p["rtol"])
            cases, skipped = [], []
            for w in p["which"]:
                for n in p["n"]:
                    for a in p["alpha"]:
                        for c in p["c"]:
                            why = hypothesis_violation(w, n, a)
                            if why is None:
                                cases.append((w, n, a, c))
                            elif p["skip_invalid"]:
                                skipped.append([w, n, a, c])
                            else:
                                raise ConfigError(f"verify: {w} at n={n}, alpha={a:g}: {why}")
            if not cases:
                raise ConfigError("verify: no hypothesis-valid case")
            for _, n, _, c in cases:
                _space(n, c, p["norm"])
            make_profile(p["profile"])
            if p["explicit"] and any(a != 0.0 for _, _, a, _ in cases):
                raise ConfigError("verify: explicit remainders are defined for alpha = 0")
            p["skipped"] = skipped
        elif command == "sweep":
            p["which"] = Which.parse(p["which"]).value
            if p["which"] == "hardy":
                raise ConfigError("sweep: which must be rellich1 or rellich2")
            p["n"], p["alpha"], p["c"] = int(p["n"]), float(p["alpha"]), float(p["c"])
            for k in ("r", "R", "eta_factor", "rtol", "gap_tol"):
                p[k] = float(p[k])
            p["cutoff_order"] = int(p["cutoff_order"])
            p["eps"] = _listify(p["eps"], float)
            why = hypothesis_violation(p["which"], p["n"], p["alpha"])
            if why:
                raise ConfigError(f"sweep: {p['which']} at n={p['n']}: {why}")
            if p["model"] not in MODELS:
                raise ConfigError(f"sweep: model must be one of {MODELS}")
            if not 0 < p["r"] < p["R"]:
                raise ConfigError("sweep: need 0 < r < R")
            eps = np.array(p["eps"])
            if np.any(np.diff(eps) >= 0) or np.any(eps <= 0) or np.any(eps >= p["r"]):
                raise ConfigError("sweep: eps must be strictly decreasing inside (0, r)")
            if not 0 < p["eta_factor"] < 0.5:
                raise ConfigError("sweep: eta_factor must lie in (0, 1/2)")
            if p["cutoff_order"] not in (5, 7):
                raise ConfigError("sweep: cutoff_order must be 5 or 7")
            _space(p["n"], p["c"], p["norm"])
        elif command == "kf-probe":
            p["dim"], p["samples"], p["seed"] = int(p["dim"]), int(p["samples"]), int(p["seed"])
            if p["samples"] < 100:
                raise ConfigError("kf-probe: samples must be >= 100")
            if p["expect"] not in ("auto", "riemannian", "non-riemannian", "any"):
                raise ConfigError("kf-probe: expect must be auto, riemannian, non-riemannian or any")
            _norm(p["norm"], p["dim"])
        elif command == "green-check":
            p["n"], p["alpha"], p["c"] = int(p["n"]), float(p["alpha"]), float(p["c"])
            p["profiles"], p["seed"] = int(p["profiles"]), int(p["seed"])
            p["rel_tol"] = float(p["rel_tol"])
            if not p["n"] - 4 + p["alpha"] > 0:
                raise ConfigError("green-check: needs n-4+alpha > 0")
            if p["profiles"] < 1:
                raise ConfigError("green-check: profiles must be >= 1")
            _space(p["n"], p["c"], p["norm"])
            make_profile(p["profile"], p["seed"])
        elif command == "constants":
            p["n"] = _listify(p["n"], int)
            p["alpha"] = _listify(p["alpha"], float)
    except RellichError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{command}: {exc}") from None
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"{command}: invalid parameter: {exc}") from None
    for k in ("norm",):
        if isinstance(p.get(k), dict):
            p[k] = dict(p[k])
    return p


# ------------------------------------------------------------ suite runners
def _run_verify(p):
    prof = make_profile(p["profile"])
    rows, failures = [], []
    cols = (*REPORT_COLUMNS, "tolerance", "passed")
    for w, n, a, c in ((w, n, a, c) for w in p["which"] for n in p["n"]
                       for a in p["alpha"] for c in p["c"]):
        if hypothesis_violation(w, n, a):
            continue
        rep = report(InequalityInstance(_space(n, c, p["norm"]), prof, a, w),
                     rtol=p["rtol"], explicit=p["explicit"])
        rows.append([*rep.csv_row(), rep.tolerance, rep.passed])
        if not rep.passed:
            failures.append({"check": "margin", "which": w, "n": n, "alpha": a, "c": c,
                             "margin": rep.margin, "tolerance": rep.tolerance})
    summary = {"cases": len(rows), "skipped": p["skipped"],
               "min_margin": min(r[8] for r in rows)}
    return cols, rows, summary, failures, None


def _run_sweep(p):
    sw = rayleigh_sweep(_space(p["n"], p["c"], p["norm"]), p["alpha"], p["which"],
                        p["eps"], p["r"], p["R"], p["eta_factor"], p["cutoff_order"],
                        p["rtol"], p["model"])
    rows = sw.rows()
    s = sw.summary()
    failures = []
    if not s["relative_gap"] < p["gap_tol"]:
        failures.append({"check": "relative_gap", "value": s["relative_gap"], "tolerance": p["gap_tol"]})
    for key in ("lower_bound_ok", "i_tilde_ok", "converged"):
        if not s[key]:
            failures.append({"check": key})
    return sw.columns, rows, s, failures, rows


def _run_probe(p):
    norm = _norm(p["norm"], p["dim"])
    res = riemannian_probe(norm, p["samples"], p["seed"])
    rec = res.to_record()
    expect = p["expect"]
    if expect == "auto":
        expect = "riemannian" if norm.is_riemannian else "non-riemannian"
    failures = []
    if expect != "any" and res.verdict != (expect == "riemannian"):
        failures.append({"check": "verdict", "expected": expect, "verdict": res.verdict})
    cols = ("norm", "dimension", "samples", "seed", "max_abs_kf", "scale", "verdict")
    return cols, [[rec[k] for k in cols]], {**rec, "expected": expect}, failures, None


def _run_green(p):
    space = _space(p["n"], p["c"], p["norm"])
    rows, failures = [], []
    for k in range(p["profiles"]):
        seed = p["seed"] + k
        g = green_deflection(space, make_profile(p["profile"], seed), p["alpha"])
        ok = g.vanishes(p["rel_tol"])
        rows.append([seed, g.value, g.term1, g.term2, g.error, ok])
        if not ok:
            failures.append({"check": "green_deflection", "seed": seed, "value": g.value,
                             "scale": g.scale})
    worst = max(abs(r[1]) / max(abs(r[2]), abs(r[3]), 1e-300) for r in rows)
    return (("seed", "value", "term1", "term2", "error", "passed"), rows,
            {"profiles": len(rows), "max_relative": worst}, failures, None)


def _run_constants(p):
    cols = ("n", "alpha", "gamma", "hardy_main", "hardy_rem", "rellich1_main", "rellich1_rem",
            "rellich2_main", "rellich2_rem", "hardy_valid", "rellich1_valid", "rellich2_valid")
    rows = []
    for n in p["n"]:
        for a in p["alpha"]:
            rec = constants(n, a).to_record()
            rows.append([rec[k] for k in cols])
    return cols, rows, {"rows": len(rows)}, [], None


RUNNERS = {"verify": _run_verify, "sweep": _run_sweep, "kf-probe": _run_probe,
           "green-check": _run_green, "constants": _run_constants}


def execute(name: str, command: str, params: dict, outdir: str) -> SuiteResult:
    """Run one validated suite and write its CSV/JSON files."""
    try:
        cols, rows, summary, failures, table = RUNNERS[command](params)
    except RellichError as exc:
        cols, rows, summary, table = ("error",), [[str(exc)]], {}, None
        failures = [{"check": "exception", "type": type(exc).__name__, "detail": str(exc)}]
    res = SuiteResult(name, command, params, tuple(cols), rows, summary,
                      [{"suite": name, **f} for f in failures], table)
    out = Path(outdir)
    atomic_write(out / f"{name}.csv", csv_text(res.columns, res.rows))
    if table is not None:
        dat = "# " + " ".join(res.columns) + "\n" + "".join(
            " ".join(format_value(v) for v in row) + "\n" for row in table)
        atomic_write(out / f"{name}.dat", dat)
    atomic_write(out / f"{name}.json", json_text({
        "suite": name, "command": command, "params": params, "passed": res.passed,
        "failures": res.failures, "summary": summary, "provenance": provenance(params)}))
    return res


def _execute_star(args):
    return execute(*args)


def run_suites(suites, outdir, jobs=1) -> list:
    """Validate every suite, then execute; returns SuiteResults in input order."""
    prepared, names = [], set()
    for i, s in enumerate(suites):
        if not isinstance(s, dict) or "command" not in s:
            raise ConfigError(f"suite {i}: needs a 'command' entry")
        cmd = s["command"]
        name = str(s.get("name") or f"{i:02d}_{cmd}")
        if name in names:
            raise ConfigError(f"suite {i}: duplicate name {name!r}")
        names.add(name)
        prepared.append((name, cmd, normalize(cmd, {k: v for k, v in s.items() if k != "name"}),
                         str(outdir)))
    if jobs > 1 and len(prepared) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_execute_star, prepared))
    return [execute(*a) for a in prepared]


def aggregate(indir, outdir, name="report") -> SuiteResult:
    """Collect the JSON summaries found in ``indir`` into one report."""
    rows, failures = [], []
    for path in sorted(Path(indir).glob("*.json")):
        if path.stem == name:
            continue
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError):
            continue
        if not isinstance(data, dict) or "suite" not in data or "passed" not in data:
            continue
        rows.append([data["suite"], data.get("command", ""), bool(data["passed"]),
                     len(data.get("failures", []))])
        failures.extend(data.get("failures", []))
    cols = ("suite", "command", "passed", "failures")
    res = SuiteResult(name, "report", {"inputs": str(indir)}, cols, rows,
                      {"suites": len(rows), "passed": sum(r[2] for r in rows)}, failures)
    if not rows:
        res.failures.append({"suite": name, "check": "inputs", "detail": f"no summaries in {indir}"})
    out = Path(outdir)
    atomic_write(out / f"{name}.csv", csv_text(cols, rows))
    atomic_write(out / f"{name}.json", json_text({
        "suite": name, "command": "report", "passed": res.passed, "failures": res.failures,
        "summary": res.summary}))
    return res


# ------------------------------------------------------------ argparse
def _add_common(p, cmd):
    p.add_argument("--config", help="JSON file supplying parameters (flags override)")
    p.add_argument("--output-dir", help=f"output directory (default ${OUTPUT_ENV} or .)")
    p.add_argument("--name", help=f"output file stem (default {cmd})")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rellichkit", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"rellichkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS

    v = sub.add_parser("verify", help="evaluate both sides of the inequalities")
    _add_common(v, "verify")
    v.add_argument("--which", default=S, help="hardy, rellich1, rellich2, comma list or all")
    v.add_argument("--n", default=S, help="dimension or comma list")
    v.add_argument("--alpha", default=S, help="weight exponent or comma list")
    v.add_argument("--c", default=S, help="curvature (<= 0) or comma list")
    v.add_argument("--norm", default=S, help="norm descriptor for flat models")
    v.add_argument("--profile", default=S, help="bump, bump:R, poly:a0,a1,... or random")
    v.add_argument("--rtol", type=float, default=S)
    v.add_argument("--skip-invalid", dest="skip_invalid", action="store_true", default=S,
                   help="skip combinations outside the hypotheses instead of failing")
    v.add_argument("--explicit", action="store_true", default=S,
                   help="use the explicit coth-bound remainder (alpha = 0)")

    s = sub.add_parser("sweep", help="Rayleigh-ratio sweep toward a sharp constant")
    _add_common(s, "sweep")
    s.add_argument("--which", default=S)
    s.add_argument("--n", type=int, default=S)
    s.add_argument("--alpha", type=float, default=S)
    s.add_argument("--c", type=float, default=S)
    s.add_argument("--norm", default=S)
    s.add_argument("--eps", default=S, help="comma list of decreasing epsilons")
    s.add_argument("--r", type=float, default=S)
    s.add_argument("--R", type=float, default=S)
    s.add_argument("--eta-factor", dest="eta_factor", type=float, default=S)
    s.add_argument("--cutoff-order", dest="cutoff_order", type=int, default=S)
    s.add_argument("--model", choices=MODELS, default=S)
    s.add_argument("--rtol", type=float, default=S)
    s.add_argument("--gap-tol", dest="gap_tol", type=float, default=S)

    k = sub.add_parser("kf-probe", help="K_F deflection probe for Riemannian detection")
    _add_common(k, "kf-probe")
    k.add_argument("--norm", default=S)
    k.add_argument("--dim", type=int, default=S)
    k.add_argument("--samples", type=int, default=S)
    k.add_argument("--seed", type=int, default=S)
    k.add_argument("--expect", default=S, help="auto, riemannian, non-riemannian or any")

    g = sub.add_parser("green-check", help="Green-deflection vanishing on random profiles")
    _add_common(g, "green-check")
    g.add_argument("--n", type=int, default=S)
    g.add_argument("--alpha", type=float, default=S)
    g.add_argument("--c", type=float, default=S)
    g.add_argument("--norm", default=S)
    g.add_argument("--profile", default=S)
    g.add_argument("--profiles", type=int, default=S)
    g.add_argument("--seed", type=int, default=S)
    g.add_argument("--rel-tol", dest="rel_tol", type=float, default=S)

    c = sub.add_parser("constants", help="tabulate the inequality constants")
    _add_common(c, "constants")
    c.add_argument("--n", default=S)
    c.add_argument("--alpha", default=S)

    r = sub.add_parser("report", help="aggregate prior JSON summaries")
    r.add_argument("--inputs", help="directory with summaries (default: output directory)")
    r.add_argument("--output-dir")
    r.add_argument("--name", default="report")

    run = sub.add_parser("run", help="run every suite of a JSON config")
    run.add_argument("config")
    run.add_argument("--output-dir")
    run.add_argument("--jobs", type=int, default=1)
    return ap


def _outdir(args, cfg=None) -> Path:
    d = getattr(args, "output_dir", None) or (cfg or {}).get("output_dir") \
        or os.environ.get(OUTPUT_ENV) or "."
    return Path(d)


def _emit(results, code=None) -> int:
    failures = [f for r in results for f in r.failures]
    passed = not failures
    print(json.dumps(_jsonable({"passed": passed, "suites": [r.name for r in results],
                                "failures": failures}), sort_keys=True))
    return (0 if passed else 1) if code is None else code


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "run":
            cfg = load_config(args.config)
            suites = cfg.get("suites")
            if not isinstance(suites, list) or not suites:
                raise ConfigError(f"{args.config}: needs a nonempty 'suites' list")
            if args.jobs < 1:
                raise ConfigError("--jobs must be >= 1")
            return _emit(run_suites(suites, _outdir(args, cfg), args.jobs))
        if args.command == "report":
            out = _outdir(args)
            return _emit([aggregate(args.inputs or out, out, args.name)])
        flags = {k: v for k, v in vars(args).items()
                 if k not in ("command", "config", "output_dir", "name")}
        cfg = load_config(args.config) if args.config else {}
        cfg_out = cfg.pop("output_dir", None)
        name = args.name or cfg.pop("name", None) or args.command
        params = normalize(args.command, {**cfg, **flags})
        out = Path(args.output_dir or cfg_out or os.environ.get(OUTPUT_ENV) or ".")
        return _emit([execute(name, args.command, params, str(out))])
    except ConfigError as exc:
        print(f"rellichkit: error: {exc}", file=sys.stderr)
        print(json.dumps({"passed": False, "suites": [],
                          "failures": [{"check": "config", "detail": str(exc)}]}))
        return 2
    except OSError as exc:
        print(f"rellichkit: I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
