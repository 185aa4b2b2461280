"""Command-line front end: ``orlicz-frac <command> [--key value ...]``.

Parameters come from flags and/or a config file (``key = value`` lines,
``#`` comments, or a JSON sidecar written by a previous run); flags win.
With ``--out PREFIX`` the run writes ``PREFIX.csv`` and/or ``PREFIX.json``.

Exit status: 0 ok, 1 invalid input, 2 numeric failure, 3 study failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

import numpy as np

from . import __version__
from .errors import InvalidParameter, NumericFailure, OrliczFracError, StudyFailure
from .hardy import build_companion, hardy_check
from .limits import LOWER_BOUND_CONSTANT, counterexample_lower_bound, limit_study, ms_power_study
from .modular import limit_target, luxemburg_norm, orlicz_modular
from .quadrature import DEFAULT_CONFIG, QuadratureConfig
from .seminorm import (frac_modular_1d, frac_modular_mc, frac_modular_radial,
                       radial_identity_residual, shell_identity_residual)
from .testfn import BUILDERS, make_exp_decay, make_tent, scale
from .young import (abar_vec, diagnose, make_custom, make_exp_counterexample, make_expm1,
                    make_polynomial, make_power, make_power_log)

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_STUDY = 0, 1, 2, 3


def _float_list(v):
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    return [float(x) for x in str(v).replace(" ", "").split(",") if x]


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _terms(v):
    """``"1:2,1:3"`` -> [(1.0, 2.0), (1.0, 3.0)] as (coefficient, power)."""
    if isinstance(v, (list, tuple)):
        return [tuple(float(x) for x in t) for t in v]
    out = []
    for item in str(v).split(","):
        c, p = item.split(":")
        out.append((float(c), float(p)))
    return out


def _pieces(v):
    return json.loads(v) if isinstance(v, str) else v


def _window(v):
    w = _float_list(v)
    if len(w) != 2:
        raise ValueError("log_radius_window takes two numbers")
    return w


KEYS = {
    "family": str, "p": float, "k": float, "gamma": float, "t0": float, "terms": _terms,
    "pieces": _pieces, "testfn": str, "n": int, "kappa": float, "u_scale": float,
    "s": _float_list, "tol": float, "lam": float, "lambda": float, "sigma": float,
    "alpha": float, "method": str, "c_grid": _float_list, "t_min": float, "t_max": float,
    "luxemburg": _bool, "format": str,
    "rel_tol": float, "abs_tol": float, "max_subdivisions": int, "outer_truncation": float,
    "mc_samples": int, "rng_seed": int, "log_radius_window": _window,
}
YOUNG_KEYS = {"family", "p", "k", "gamma", "t0", "terms", "pieces"}
TESTFN_KEYS = {"testfn", "n", "kappa", "gamma", "u_scale"}
CFG_KEYS = {"rel_tol", "abs_tol", "max_subdivisions", "outer_truncation", "mc_samples",
            "rng_seed", "log_radius_window"}
COMMANDS = {
    "young-info": (YOUNG_KEYS | {"t_min", "t_max"}, {"family"}),
    "modular": (YOUNG_KEYS | TESTFN_KEYS | {"lam", "luxemburg"}, {"family", "testfn"}),
    "seminorm": (YOUNG_KEYS | TESTFN_KEYS | {"s", "method"}, {"family", "testfn", "s"}),
    "limit": (YOUNG_KEYS | TESTFN_KEYS | {"s", "tol"}, {"family", "testfn", "s"}),
    "ms-limit": (TESTFN_KEYS | {"p", "s", "tol"}, {"p", "testfn", "s"}),
    "hardy": (YOUNG_KEYS | TESTFN_KEYS | {"s", "c_grid", "t_min", "t_max"}, {"family", "s"}),
    "counterexample": ({"gamma", "lambda", "sigma", "kappa", "alpha", "s", "n"},
                       {"s"}),
    "identities": (set(), set()),
}
DEFAULTS = {"n": 1, "tol": 0.02, "lam": 1.0, "method": "auto", "format": "both",
            "t_min": 1e-2, "t_max": 1e2, "c_grid": [1.0, 2.0, 4.0, 8.0, 16.0, 32.0],
            "gamma": 2.0, "lambda": 1.5, "sigma": 0.9, "kappa": 1e6, "alpha": 1.0,
            "luxemburg": False}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidParameter(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="orlicz-frac", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"orlicz-frac {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (allowed, _) in COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="key = value file or JSON sidecar of an earlier run")
        p.add_argument("--out", help="output prefix for .csv / .json artifacts")
        p.add_argument("-v", "--verbose", action="store_true")
        for key in sorted(allowed | CFG_KEYS | {"format"}):
            flag = "--" + key.replace("_", "-")
            p.add_argument(flag, dest=key, default=argparse.SUPPRESS, metavar=key.upper())
    return parser


def read_config_file(path: str, command: str) -> dict:
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        run = doc.get("provenance", {}).get("config", doc)
        if "command" in run and run["command"] != command:
            raise InvalidParameter(f"config is for '{run['command']}', not '{command}'")
        return dict(run.get("parameters", run))
    params = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameter(f"{path}:{lineno}: expected 'key = value'")
        key, value = (x.strip() for x in line.split("=", 1))
        params[key.replace("-", "_")] = value
    return params


def resolve_params(command: str, raw: dict) -> dict:
    """Validate keys for ``command`` and convert values to their types."""
    allowed, required = COMMANDS[command]
    unknown = set(raw) - allowed - CFG_KEYS - {"format"}
    if unknown:
        raise InvalidParameter(f"unknown keys for {command}: {', '.join(sorted(unknown))}")
    missing = required - set(raw)
    if missing:
        raise InvalidParameter(f"missing keys for {command}: {', '.join(sorted(missing))}")
    out = {}
    for key, value in raw.items():
        try:
            out[key] = KEYS[key](value)
        except (TypeError, ValueError, json.JSONDecodeError) as exc:
            raise InvalidParameter(f"bad value for {key}: {value!r} ({exc})") from None
    if out.get("format", "both") not in ("csv", "json", "both"):
        raise InvalidParameter("format must be csv, json or both")
    return out


def _get(params, key):
    return params[key] if key in params else DEFAULTS.get(key)


def make_config(params: dict) -> QuadratureConfig:
    kw = {k: params[k] for k in CFG_KEYS if k in params}
    if "log_radius_window" in kw:
        kw["log_radius_window"] = tuple(kw["log_radius_window"])
    return DEFAULT_CONFIG.replace(**kw)


def make_young(params: dict):
    fam = params["family"]
    need = lambda k: params[k] if k in params else _missing(k, fam)
    if fam == "power":
        return make_power(need("p"))
    if fam in ("powerlog", "power_log"):
        return make_power_log(need("p"))
    if fam == "polynomial":
        return make_polynomial(need("terms"))
    if fam == "expm1":
        return make_expm1(params.get("k", 1.0))
    if fam in ("exp_counterexample", "counterexample"):
        kw = {"t0": params["t0"]} if "t0" in params else {}
        return make_exp_counterexample(_get(params, "gamma"), **kw)
    if fam == "custom":
        return make_custom([(float(a), str(t), dict(d)) for a, t, d in need("pieces")])
    raise InvalidParameter(f"unknown family {fam!r}")


def _missing(key, fam):
    raise InvalidParameter(f"family {fam} needs {key}")


def make_testfn(params: dict):
    name = params["testfn"]
    if name not in BUILDERS:
        raise InvalidParameter(f"unknown test function {name!r}; choose from {sorted(BUILDERS)}")
    u = BUILDERS[name](n=_get(params, "n"), gamma=_get(params, "gamma"), kappa=_get(params, "kappa"))
    if "u_scale" in params:
        u = scale(u, params["u_scale"])
    return u


# command handlers return (report, csv header, csv rows, extra payload for JSON)

def cmd_young_info(params, cfg):
    A = make_young(params)
    d = diagnose(A)
    report = {
        "family": A.family_tag,
        "delta2_constant": d.delta2_sup_ratio,
        "delta2_unbounded": d.delta2_unbounded,
        "matuszewska_index": d.matuszewska_index,
        "index_unbounded": d.index_unbounded,
        "growth_constant": d.growth_constant,
        "abar_1": float(abar_vec(A, 1.0, cfg)),
    }
    t = np.geomspace(_get(params, "t_min"), _get(params, "t_max"), 21)
    rows = [(x, float(A.eval(x)), float(abar_vec(A, x, cfg))) for x in t]
    return report, ["t", "A", "Abar"], rows, {}


def cmd_modular(params, cfg):
    A, u = make_young(params), make_testfn(params)
    lam = _get(params, "lam")
    res = orlicz_modular(u, A, lam, cfg)
    report = {"modular": res.value, "abs_error_estimate": res.abs_error_estimate,
              "truncation_radius": res.truncation_radius}
    if _get(params, "luxemburg"):
        report["luxemburg_norm"] = luxemburg_norm(u, A, cfg)
    rows = [(k, v) for k, v in report.items()]
    return report, ["quantity", "value"], rows, {"result": res.to_json()}


def _seminorm(u, A, s, method, cfg):
    if method == "auto":
        method = "1d" if u.dim == 1 else ("radial" if u.profile is not None else "mc")
    if method == "1d":
        return frac_modular_1d(u, A, s, cfg)
    if method == "radial":
        return frac_modular_radial(u, A, s, cfg=cfg)
    if method == "mc":
        return frac_modular_mc(u, A, s, cfg=cfg)
    raise InvalidParameter(f"unknown method {method!r}")


def cmd_seminorm(params, cfg):
    A, u = make_young(params), make_testfn(params)
    rows, results = [], []
    for s in params["s"]:
        res = _seminorm(u, A, s, _get(params, "method"), cfg)
        se = res.standard_error if res.standard_error is not None else math.nan
        rows.append((s, res.value, res.abs_error_estimate, res.method, se))
        results.append({"s": s, **res.to_json()})
    report = {"rows": len(rows)}
    return report, ["s", "value", "abs_err", "method", "standard_error"], rows, {"results": results}


def _study_payload(res):
    report = {"target": res.target, "extrapolated": res.extrapolated, "verdict": res.verdict}
    return report, ["s", "value", "abs_err"], res.csv_rows(), res.to_json()


def cmd_limit(params, cfg):
    res = limit_study(make_testfn(params), make_young(params), params["s"], cfg, _get(params, "tol"))
    return _study_payload(res)


def cmd_ms_limit(params, cfg):
    res = ms_power_study(make_testfn(params), params["p"], params["s"], cfg, _get(params, "tol"))
    return _study_payload(res)


def cmd_hardy(params, cfg):
    A = make_young(params)
    n = _get(params, "n")
    s_vals = params["s"]
    if len(s_vals) != 1:
        raise InvalidParameter("hardy takes a single s")
    s = s_vals[0]
    t_range = (_get(params, "t_min"), _get(params, "t_max"))
    comp = build_companion(A, s, n, cfg, t_range=t_range)
    rep = comp.condition_report
    report = {"small_t_condition": rep.small_t, "large_t_condition": rep.large_t,
              "condition_method": rep.method, "inverse_convention": comp.metadata["inverse_convention"]}
    t = np.geomspace(*t_range, 41)
    B = comp.B(t)
    report["B_over_t2_spread"] = float(np.max(B / t**2) / np.min(B / t**2))
    if "testfn" in params:
        chk = hardy_check(make_testfn(params), A, s, n, _get(params, "c_grid"), cfg, companion=comp)
        report["hardy_constant"] = chk.constant if chk.found else "none-in-grid"
        report["hardy_lhs"] = chk.lhs
    rows = [(ti, float(Bi)) for ti, Bi in zip(t, B)]
    inverse = list(zip(comp.r_grid.tolist(), comp.b_inverse_values.tolist()))
    return report, ["t", "B"], rows, {"_csv": {"_b_inverse": (["r", "b_inverse"], inverse)}}


def cmd_counterexample(params, cfg):
    g, lam = _get(params, "gamma"), _get(params, "lambda")
    sig, kap, al, n = _get(params, "sigma"), _get(params, "kappa"), _get(params, "alpha"), _get(params, "n")
    rows = [(s, counterexample_lower_bound(s, g, lam, sig, kap, al, n, cfg)) for s in params["s"]]
    vals = [v for _, v in rows]
    monotone = all(b > a for a, b in zip(vals, vals[1:]))
    v = BUILDERS["counterexample_v"](n=n, gamma=g, kappa=kap)
    mod = orlicz_modular(scale(v, lam), make_exp_counterexample(g), 1.0, cfg)
    report = {"monotone_growth": monotone, "growth_factor": vals[-1] / vals[0],
              "modular_of_v_over_lambda": mod.value, "constant": LOWER_BOUND_CONSTANT}
    return report, ["s", "lower_bound"], rows, {}


def cmd_identities(params, cfg):
    rows = [
        ("shell", "tent/power2/s=0.3/n=1",
         shell_identity_residual(make_tent(), make_power(2.0), 0.3, 1, cfg)),
        ("shell", "exp_decay/power1/s=0.5/n=2",
         shell_identity_residual(make_exp_decay(2), make_power(1.0), 0.5, 2, cfg)),
    ]
    for label, A, rho, t, s, eps in RADIAL_BATTERY:
        rows.append(("radial", label, radial_identity_residual(A(), rho, t, s, eps, cfg)))
    report = {"max_residual": max(r[2] for r in rows)}
    return report, ["identity", "case", "residual"], rows, {}


# (label, A, ρ, t, s, ε); the first case has LHS = RHS = 1 exactly
RADIAL_BATTERY = [
    ("power1/rho=0.5/t=1/s=0.5", lambda: make_power(1.0), 0.5, 1.0, 0.5, 0.0),
    ("power2/rho=1/t=2/s=0.3/eps=0.1", lambda: make_power(2.0), 1.0, 2.0, 0.3, 0.1),
    ("expm1/rho=0.7/t=0.5/s=0.2", lambda: make_expm1(), 0.7, 0.5, 0.2, 0.0),
]

HANDLERS = {
    "young-info": cmd_young_info, "modular": cmd_modular, "seminorm": cmd_seminorm,
    "limit": cmd_limit, "ms-limit": cmd_ms_limit, "hardy": cmd_hardy,
    "counterexample": cmd_counterexample, "identities": cmd_identities,
}


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows([_cell(c) for c in row] for row in rows)
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def run(command: str, params: dict, out: str | None = None) -> tuple[dict, str]:
    """Execute one command; returns (JSON document, CSV text) and writes artifacts."""
    cfg = make_config(params)
    report, header, rows, extra = HANDLERS[command](params, cfg)
    side_tables = extra.pop("_csv", {})
    body = csv_text(header, rows)
    echo = {k: v for k, v in params.items()}
    doc = {
        "provenance": {"tool": "orlicz-frac", "version": __version__, "seed": cfg.rng_seed,
                       "config": {"command": command, "parameters": echo},
                       "quadrature": cfg.to_dict()},
        "report": report,
        **extra,
    }
    doc = _jsonable(doc)
    fmt = params.get("format", "both")
    if out:
        if fmt in ("csv", "both"):
            with open(out + ".csv", "w", newline="") as fh:
                fh.write(body)
            for suffix, (h, r) in side_tables.items():
                with open(out + suffix + ".csv", "w", newline="") as fh:
                    fh.write(csv_text(h, r))
        if fmt in ("json", "both"):
            with open(out + ".json", "w") as fh:
                json.dump(doc, fh, indent=2, sort_keys=True)
                fh.write("\n")
    return doc, body


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        ns = vars(args)
        flags = {k: v for k, v in ns.items() if k in KEYS}
        raw = read_config_file(args.config, args.command) if args.config else {}
        raw.update(flags)
        params = resolve_params(args.command, raw)
        doc, body = run(args.command, params, args.out)
        for key, value in doc["report"].items():
            print(f"{key}: {value}")
        if not args.out:
            sys.stdout.write(body)
        return EXIT_OK
    except StudyFailure as exc:
        return _fail(exc, EXIT_STUDY)
    except NumericFailure as exc:
        return _fail(exc, EXIT_NUMERIC)
    except (OrliczFracError, ValueError, OSError) as exc:
        return _fail(exc, EXIT_INVALID)


def _fail(exc, status):
    code = getattr(exc, "code", "invalid-input")
    msg = " ".join(str(exc).split())
    print(f"orlicz-frac: error[{code}] {msg}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
