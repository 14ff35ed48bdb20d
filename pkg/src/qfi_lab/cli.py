"""qfi-lab command line.

    qfi-lab list
    qfi-lab verify   --potential Vs1 [--params '{"k": 1}'] [--integrator rk4]
    qfi-lab brackets --potential V3a --seed 3
    qfi-lab discover --potential V27 --params '{"F1": "quartic", "F2": "cube"}'
    qfi-lab solve    --potential V3b --t-end 5

Exit codes: 0 success / within tolerance, 1 tolerance breach, 2 usage or
configuration error.
"""
import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import catalog, config, fields, solutions
from .discovery import DiscoveryOptions, assemble_report
from .errors import BadParams, QfiError
from .verification import bracket_table, verify_entry

COMMANDS = ("list", "verify", "brackets", "discover", "solve")
SOLVE_TOL = 1e-4

# potentials accepted by ``discover`` in addition to the catalog
BUILTINS = {
    "free": fields.free,
    "generic_asymmetric": fields.generic_asymmetric,
    "separable_polynomial": fields.separable_polynomial,
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    potential: Optional[str] = None
    params: Optional[dict] = None
    integrator: str = "verlet"
    dt: float = 1e-3
    t_end: Optional[float] = None
    seed: int = 0
    out: Optional[str] = None
    format: str = "json"
    no_scan: bool = False
    n_points: Optional[int] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise UsageError(f"--dt must be positive, got {self.dt!r}")
        if self.t_end is not None and not (self.t_end > self.dt and math.isfinite(self.t_end)):
            raise UsageError(f"--t-end must exceed --dt, got {self.t_end!r}")
        if self.command != "list" and not self.potential:
            raise UsageError(f"{self.command} needs --potential")
        if self.n_points is not None and self.n_points < 1:
            raise UsageError("--n-points must be positive")


def _jsonify(obj):
    """Make a report JSON-safe: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(report):
    return json.dumps(_jsonify(report), indent=2) + "\n"


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([("%.17g" % v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def _emit(cfg, text):
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _entry(cfg):
    try:
        return catalog.instantiate(cfg.potential, cfg.params)
    except QfiError as exc:
        raise UsageError(str(exc)) from None


# --- commands ----------------------------------------------------------------

def cmd_list(cfg):
    man = catalog.manifest()
    if cfg.format == "csv":
        rows = [(e["name"], e["class"], e["classification"], " ".join(f["name"] for f in e["first_integrals"]),
                 e["table_ref"]) for e in man["entries"]]
        _emit(cfg, _csv_text(["name", "class", "classification", "first_integrals", "table_ref"], rows))
    else:
        _emit(cfg, dumps(man))
    return 0


def cmd_verify(cfg):
    e = _entry(cfg)
    t_end = 10.0 if cfg.t_end is None else cfg.t_end
    rep = verify_entry(e, (cfg.integrator,), cfg.dt, t_end, cfg.seed)
    d = rep.to_dict()
    d["fis"] = [{"name": I.name, "kind": I.kind, "time_dependence": I.time_dependence,
                 "table_ref": e.table_ref} for I in e.fis]
    d["config"] = {"integrator": cfg.integrator, "dt": cfg.dt, "t_end": t_end, "seed": cfg.seed}
    if cfg.format == "csv":
        rows = []
        for integ, dd in rep.drift.items():
            rows += [("drift", f"{integ}:{k}", v) for k, v in dd.items()]
        rows += [("flow_derivative", k, v) for k, v in rep.flow.items()]
        rows += [("bracket", b["identity"], b["max_error"]) for b in rep.brackets]
        rows.append(("independence_rank", " ".join(e.independent), rep.rank))
        if rep.commuting:
            rows.append(("commuting", " ".join(rep.commuting["pair"]), rep.commuting["max_bracket"]))
        rows.append(("ok", "", int(rep.ok)))
        _emit(cfg, _csv_text(["check", "item", "value"], rows))
    else:
        _emit(cfg, dumps(d))
    for msg in rep.errors:
        print(f"qfi-lab: {msg}", file=sys.stderr)
    return 0 if rep.ok else 1


def cmd_brackets(cfg):
    e = _entry(cfg)
    names, states, values = bracket_table(e, cfg.seed)
    if cfg.format == "csv":
        rows = []
        for k, s in enumerate(states):
            for i, a in enumerate(names):
                for j, b in enumerate(names):
                    rows.append((k, s.t, s.x, s.y, s.vx, s.vy, a, b, values[k, i, j]))
        _emit(cfg, _csv_text(["state", "t", "x", "y", "vx", "vy", "F", "G", "bracket"], rows))
    else:
        _emit(cfg, dumps({
            "name": e.name, "table_ref": e.table_ref, "seed": cfg.seed, "fis": names,
            "states": [[s.t, s.x, s.y, s.vx, s.vy] for s in states],
            "max_abs": np.max(np.abs(values), axis=0),
            "values": values,
        }))
    return 0


def _discover_spec(cfg):
    if cfg.potential in BUILTINS:
        if cfg.params:
            raise UsageError(f"{cfg.potential} takes no parameters")
        return BUILTINS[cfg.potential](), None
    e = _entry(cfg)
    return e.potential, e


def cmd_discover(cfg):
    spec, e = _discover_spec(cfg)
    opts = DiscoveryOptions(n_points=cfg.n_points, scan=not cfg.no_scan, seed=cfg.seed)
    rep = assemble_report(spec, opts)
    d = rep.to_dict()
    if e is not None:
        d["table_ref"] = e.table_ref
    if cfg.format == "csv":
        rows = [("lfi", i, *p.as_array()) for i, p in enumerate(rep.lfi_basis)]
        rows += [("kt", i, *p.as_array()) for i, p in enumerate(rep.kt_basis)]
        for h in rep.integral3_hits:
            rows += [(f"integral3:{h.lam!r}", i, *p.as_array()) for i, p in enumerate(h.basis)]
        _emit(cfg, f"# verdict: {rep.verdict}\n" + _csv_text(["kind", "index", "coefficients..."], rows))
    else:
        _emit(cfg, dumps(d))
    return 0 if rep.lfi_validated and rep.kt_validated else 1


def cmd_solve(cfg):
    e = _entry(cfg)
    if e.name not in solutions.SOLVABLE:
        raise UsageError(f"solve supports {', '.join(solutions.SOLVABLE)}, not {e.name}")
    t_end = 5.0 if cfg.t_end is None else cfg.t_end
    cmp = solutions.compare(e, None, cfg.dt, t_end, cfg.integrator)
    cf = solutions.closed_form_solution(e)
    ok = cmp.rel_error <= SOLVE_TOL
    header = ["t", "x_closed", "y_closed", "x_numeric", "y_numeric"]
    if cfg.format == "csv":
        _emit(cfg, _csv_text(header, cmp.rows()))
    else:
        _emit(cfg, dumps({"name": e.name, "table_ref": e.table_ref, "constants": cf.constants,
                          "rule": cf.rule, "integrator": cfg.integrator, "dt": cfg.dt, "t_end": t_end,
                          "columns": header, "rows": cmp.rows(), "rel_error": cmp.rel_error,
                          "tolerance": SOLVE_TOL, "ok": ok}))
    return 0 if ok else 1


HANDLERS = {"list": cmd_list, "verify": cmd_verify, "brackets": cmd_brackets,
            "discover": cmd_discover, "solve": cmd_solve}


# --- argument parsing --------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="qfi-lab", description="Verify and discover first integrals of planar potentials.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--potential", help="catalog entry (or free / generic_asymmetric / separable_polynomial for discover)")
    p.add_argument("--params", default=None, help="JSON object of parameter overrides")
    p.add_argument("--integrator", choices=("verlet", "rk4"), default="verlet")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--t-end", type=float, default=None, help="default 10 for verify, 5 for solve")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write to this path instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--no-scan", action="store_true", help="discover: skip the exponential-integral scan")
    p.add_argument("--n-points", type=int, default=None, help="discover: collocation points")
    return p


def parse_config(argv):
    ns = build_parser().parse_args(argv)
    params = None
    if ns.params is not None:
        try:
            params = json.loads(ns.params)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--params is not valid JSON: {exc}") from None
        if not isinstance(params, dict):
            raise UsageError("--params must be a JSON object")
    return RunConfig(ns.command, ns.potential, params, ns.integrator, ns.dt, ns.t_end, ns.seed,
                     ns.out, ns.format, ns.no_scan, ns.n_points)


def main(argv=None):
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        config.max_threads()  # reject a malformed QFI_LAB_THREADS early
        return HANDLERS[cfg.command](cfg)
    except (UsageError, BadParams) as exc:
        print(f"qfi-lab: error: {exc}", file=sys.stderr)
        return 2
    except QfiError as exc:
        print(f"qfi-lab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        # configuration problems such as a malformed QFI_LAB_THREADS or an unwritable --out
        print(f"qfi-lab: error: {exc}", file=sys.stderr)
        return 2

if __name__ == "__main__":
    sys.exit(main())
