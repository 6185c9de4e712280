"""Batch command-line front end.

Every subcommand writes one report (JSON by default, CSV with
``--format csv``) embedding the resolved configuration and tool version.
Exit status: 0 on success (whatever the inequality checks find), 1 on a bad
configuration, 2 when a computation fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, is_dataclass

import numpy as np

from . import __version__
from . import entropy as _ent
from . import fockq as _fq
from . import freeconv as _fc
from . import ineq as _iq
from . import measure as _m
from . import ncpoly as _nc
from . import stein as _st
from . import transforms as _tr

SIG_DIGITS = 12
EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2


class ConfigError(Exception):
    """Invalid command line or unreadable input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# argument types


def _ranged(kind, lo=None, hi=None, open_lo=False):
    def parse(text):
        try:
            v = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a valid {kind.__name__}: {text!r}") from None
        if lo is not None and (v <= lo if open_lo else v < lo):
            raise argparse.ArgumentTypeError(f"{v} below allowed range")
        if hi is not None and v > hi:
            raise argparse.ArgumentTypeError(f"{v} above allowed range")
        return v
    return parse


def _float_list(lo=None, open_lo=True):
    item = _ranged(float, lo, open_lo=open_lo)

    def parse(text):
        return [item(s) for s in text.split(",") if s.strip()]
    return parse


def _int_list(lo=1, hi=1024):
    item = _ranged(int, lo, hi)

    def parse(text):
        return [item(s) for s in text.split(",") if s.strip()]
    return parse


POSITIVE = _ranged(float, 0.0, open_lo=True)


# ---------------------------------------------------------------------------
# inputs


def _load_json(arg):
    text = arg
    if not arg.lstrip().startswith("{"):
        try:
            with open(arg, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {arg}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {arg}: {exc}") from None


def _load_measure(arg, n):
    spec = _load_json(arg)
    if isinstance(spec, dict) and "family" in spec and n is not None:
        params = dict(spec.get("params", {}))
        if spec["family"] in ("semicircle", "arcsine", "uniform", "marchenko_pastur"):
            params.setdefault("n", n)
        spec = {**spec, "params": params}
    try:
        return _m.from_spec(spec)
    except (_m.MeasureError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad measure spec: {exc}") from None


def _load_qmatrix(path):
    try:
        Q = np.loadtxt(path, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read Q matrix {path}: {exc}") from None
    if Q.shape[0] != Q.shape[1] or not np.allclose(Q, Q.T):
        raise ConfigError("Q matrix must be square and symmetric")
    return Q


def _load_poly(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return _nc.from_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except _nc.NCPolyError as exc:
        raise ConfigError(f"bad polynomial file: {exc}") from None


# ---------------------------------------------------------------------------
# output


def _clean(obj):
    """JSON-ready copy with floats at 12 significant digits and non-finite as strings."""
    if is_dataclass(obj) and not isinstance(obj, type):
        obj = asdict(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return float(f"{v:.{SIG_DIGITS}g}")
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[f"{prefix}{k}"] = v
    return out


def _rows(result):
    if isinstance(result, dict):
        for key in ("rows", "points"):
            if key in result and isinstance(result[key], list):
                return result[key]
        flat = _flatten(result)
        if all(not isinstance(v, list) or not any(isinstance(e, dict) for e in v) for v in flat.values()):
            return [flat]
        return [{"key": k, "value": json.dumps(v, sort_keys=True)} for k, v in flat.items()]
    if isinstance(result, list):
        return [r if isinstance(r, dict) else {"value": r} for r in result]
    return [{"value": result}]


def render(payload, fmt):
    """Serialize a cleaned report."""
    if fmt == "json":
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# tool freestein {payload['version']}\n")
    buf.write(f"# config {json.dumps(payload['config'], sort_keys=True)}\n")
    buf.write(f"# status {payload['status']}\n")
    rows = _rows(payload.get("result") if payload["status"] == "ok" else {"error": payload["error"]})
    fields = []
    for r in rows:
        fields.extend(k for k in r if k not in fields)
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in r.items()})
    return buf.getvalue()


def write_atomic(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".freestein-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# subcommands


def _report_list(reps):
    return [r.as_dict() for r in reps]


def cmd_entropy(a):
    mu = _load_measure(a.measure, a.n)
    return _ent.entropy_report(mu, a.rho).as_dict() | {"log_energy": _tr.log_energy(mu)}


def cmd_fisher(a):
    mu = _load_measure(a.measure, a.n)
    return {"fisher": _ent.fisher(mu), "fisher_rel": _ent.relative_fisher(mu, a.rho),
            "fisher_from_density": _ent.fisher_from_density(mu), "rho": a.rho}


def cmd_stein(a):
    mu = _load_measure(a.measure, a.n)
    k = _st.estimate_kernel(mu, a.degree, rho=a.rho)
    return k.as_dict()


def cmd_transform(a):
    mu = _load_measure(a.measure, a.n)
    x = np.asarray(a.x, dtype=float)
    g = _tr.cauchy(mu, x + 1j * a.epsilon)
    lo, hi = mu.support
    rows = []
    inside = (x > lo) & (x < hi)
    h = np.full(x.shape, np.nan)
    if inside.any():
        h[inside] = _tr.hilbert(mu, x[inside])
    logp = _tr.log_potential(mu, x)
    for xi, gi, hi_, li in zip(x, g, h, logp):
        rows.append({"x": xi, "epsilon": a.epsilon, "cauchy_re": gi.real, "cauchy_im": gi.imag,
                     "hilbert": hi_, "log_potential": li})
    return {"rows": rows}


def cmd_flow(a):
    mu = _load_measure(a.measure, a.n)
    rows = []
    for t in a.t:
        p = _fc.ou_flow(mu, t, a.rho, n=a.n or _m.DEFAULT_N)
        rows.append({"t": t, "chi": p.chi, "chi_star": p.chi_star, "fisher_rel": p.fisher_rel,
                     "variance": p.variance})
    return {"rho": a.rho, "rows": rows}


def cmd_lsi(a):
    return _iq.lsi_check(_load_measure(a.measure, a.n), a.rho).as_dict()


def cmd_hsi(a):
    return _iq.hsi_check(_load_measure(a.measure, a.n), a.rho, a.degree).as_dict()


def cmd_deficit(a):
    return _iq.deficit_check(_load_measure(a.measure, a.n), a.rho).as_dict()


def _flow_checks(mu, a):
    fr = _iq.flow_checks(mu, a.rho, tuple(a.t), degree=a.degree, n=a.n or _iq.FLOW_N)
    return {"rho": a.rho, "rows": fr.rows(), "de_bruijn": _report_list(fr.de_bruijn),
            "exp_decay": _report_list(fr.exp_decay), "stein_decay": _report_list(fr.stein_decay)}


def cmd_flow_checks(a):
    return _flow_checks(_load_measure(a.measure, a.n), a)


def cmd_stam(a):
    mu = _load_measure(a.measure, a.n)
    nu = _load_measure(a.measure2, a.n)
    return _iq.stam_check(mu, nu, n=a.n or _m.DEFAULT_N).as_dict()


def cmd_clt(a):
    mu = _load_measure(a.measure, a.n)
    return _iq.clt_harness(mu, tuple(a.N), n=a.n or _m.DEFAULT_N).as_dict()


def cmd_fock(a):
    if a.qmatrix is not None:
        fock = _fq.build_mixed(_load_qmatrix(a.qmatrix), a.depth)
        qdesc = fock.Q
    else:
        if a.q is None:
            raise ConfigError("fock needs --q or --qmatrix")
        fock = _fq.build_fock(a.n_vars, a.q, a.depth)
        qdesc = a.q
    n = fock.n
    worst = 0.0
    for d in range(0, fock.depth):
        for w in itertools.product(range(1, n + 1), repeat=d):
            p = _nc.NCPoly(n, {tuple(w): 1.0})
            for j in range(1, n + 1):
                worst = max(worst, _fq.stein_identity_residual(fock, p, j))
    max_len = min(a.max_len, fock.depth)
    moments = _fq.vacuum_moments(fock, max_len)
    moment_err = max((abs(v - _fq.q_moment_oracle(n, qdesc, w)) for w, v in moments.items()),
                     default=0.0)
    ks = _fq.kernel_family(fock)
    return {
        "n": n, "depth": fock.depth, "mixed": fock.mixed,
        "max_stein_residual": worst,
        "max_moment_error": moment_err, "moment_max_len": max_len,
        "bound": _fq.discrepancy_bound(fock),
        "bound_truncated": _fq.discrepancy_bound(fock, truncated=True),
        "kernel_sq": [k.closed_form_sq for k in ks],
        "kernel_sq_truncated": [k.truncated_sq for k in ks],
    }


def cmd_ncpoly_check(a):
    if a.poly_file is not None:
        f = _load_poly(a.poly_file)
    else:
        f = _nc.gibbs_potential(2, 1.0)
    rng = np.random.default_rng(a.rng_seed)
    margins = []
    for _ in range(a.pairs):
        A = _nc.random_selfadjoint(f.n_vars, a.dim, rng)
        B = _nc.random_selfadjoint(f.n_vars, a.dim, rng)
        margins.append(_nc.tangent_inequality_check(f, A, B).margin)
    margins = np.asarray(margins)
    return {"poly": _nc.to_text(f), "pairs": a.pairs, "dim": a.dim,
            "min_margin": float(margins.min()), "violations": int(np.sum(margins < -_nc.TANGENT_MARGIN))}


def cmd_check_all(a):
    mu = _load_measure(a.measure, a.n)
    out = {}
    for name, fn in (("lsi", lambda: _iq.lsi_check(mu, a.rho).as_dict()),
                     ("hsi", lambda: _iq.hsi_check(mu, a.rho, a.degree).as_dict()),
                     ("deficit", lambda: _iq.deficit_check(mu, a.rho).as_dict()),
                     ("flow_checks", lambda: _flow_checks(mu, a))):
        try:
            out[name] = fn()
        except ValueError as exc:
            # precondition not met for this measure (e.g. infinite Fisher information)
            out[name] = {"skipped": str(exc)}
    return out


COMMANDS = {
    "entropy": (cmd_entropy, "free entropy and Fisher information of a measure"),
    "fisher": (cmd_fisher, "free Fisher information by two routes"),
    "stein": (cmd_stein, "least-norm free Stein kernel and discrepancy"),
    "transform": (cmd_transform, "Cauchy, Hilbert and log-potential transforms"),
    "flow": (cmd_flow, "Ornstein-Uhlenbeck flow samples"),
    "lsi": (cmd_lsi, "free log-Sobolev inequality"),
    "hsi": (cmd_hsi, "free HSI inequality"),
    "flow-checks": (cmd_flow_checks, "de Bruijn and decay checks along the OU flow"),
    "deficit": (cmd_deficit, "entropy deficit bound"),
    "stam": (cmd_stam, "free Stam inequality"),
    "clt": (cmd_clt, "entropy gap along the free central limit theorem"),
    "fock": (cmd_fock, "q-Fock space moments, Stein identity and kernel bounds"),
    "ncpoly-check": (cmd_ncpoly_check, "tangent-line inequality on random matrices"),
    "check-all": (cmd_check_all, "lsi, hsi, deficit and flow checks for one measure"),
}

MEASURE_CMDS = {"entropy", "fisher", "stein", "transform", "flow", "lsi", "hsi", "flow-checks",
                "deficit", "stam", "clt", "check-all"}


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--output", "-o", help="report path (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--rng-seed", type=_ranged(int, 0), default=0)

    p = _Parser(prog="freestein", description="Numerical free probability toolkit.")
    p.add_argument("--version", action="version", version=f"freestein {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    for name, (_, help_) in COMMANDS.items():
        s = sub.add_parser(name, parents=[common], help=help_)
        if name in MEASURE_CMDS:
            s.add_argument("--measure", required=True, help="measure spec JSON file or inline JSON")
            s.add_argument("--n", type=_ranged(int, 65, 65537), default=None, help="grid size")
            s.add_argument("--rho", type=POSITIVE, default=1.0)
        if name in ("stein", "hsi", "flow-checks", "check-all"):
            s.add_argument("--degree", type=_ranged(int, 1, _st.MAX_DEGREE),
                           default=8 if name == "hsi" else 6)
        if name in ("flow", "flow-checks", "check-all"):
            s.add_argument("--t", type=_float_list(0.0), default=[0.1, 0.25, 0.5, 1.0, 2.0])
        if name == "transform":
            s.add_argument("--x", type=_float_list(open_lo=False), required=True)
            s.add_argument("--epsilon", type=POSITIVE, default=1e-2)
        if name == "stam":
            s.add_argument("--measure2", required=True)
        if name == "clt":
            s.add_argument("--N", type=_int_list(1, 1024), default=[2, 4, 8, 16, 32, 64])
        if name == "fock":
            s.add_argument("--n", dest="n_vars", type=_ranged(int, 1, 8), default=1)
            s.add_argument("--q", type=_ranged(float, -1.0, 1.0, open_lo=True), default=None)
            s.add_argument("--qmatrix", default=None, help="whitespace-separated symmetric matrix")
            s.add_argument("--depth", type=_ranged(int, 1, _fq.ORACLE_MAX_LEN), default=None)
            s.add_argument("--max-len", type=_ranged(int, 0, _fq.ORACLE_MAX_LEN), default=6)
        if name == "ncpoly-check":
            s.add_argument("--poly-file", default=None)
            s.add_argument("--pairs", type=_ranged(int, 1, 100000), default=200)
            s.add_argument("--dim", type=_ranged(int, 1, 256), default=4)
    return p


def _config(args):
    cfg = {k: v for k, v in vars(args).items() if k != "output"}
    return _clean(cfg)


def run(argv=None, stdout=None):
    """Parse ``argv``, run the subcommand and emit its report; returns the exit status."""
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as exc:
        print(f"freestein: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    payload = {"tool": "freestein", "version": __version__, "config": _config(args)}
    fn = COMMANDS[args.subcommand][0]
    code = EXIT_OK
    try:
        payload["result"] = _clean(fn(args))
        payload["status"] = "ok"
    except ConfigError as exc:
        print(f"freestein: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        payload["status"] = "error"
        payload["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = EXIT_COMPUTE
    text = render(payload, args.format)
    if args.output:
        write_atomic(args.output, text)
    else:
        stdout.write(text)
    return code


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
