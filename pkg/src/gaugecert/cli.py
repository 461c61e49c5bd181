"""Command-line front end.

Subcommands ``certify``, ``minty``, ``barrier``, ``ekeland``, ``trace`` and
``graph``.  Settings come from an optional flat JSON file (``--config``) and
are overridden by flags.  Exit codes: 0 certified / related / done,
1 violation witnessed, 2 inconclusive or not converged, 64 bad config.
"""

import argparse
import csv
import io
import json
import logging
import os
import re
import sys
import warnings
from dataclasses import dataclass, field, fields

import numpy as np

from . import certify as _certify
from .barrier import Barrier, BarrierFunction, barrier_eval
from .bodies import body_from_spec
from .errors import ConvergenceWarning, InvalidInputError, PreconditionError
from .functions import make_function, parse_expression
from .subdiff import box_grid, fenchel_membership, sample_graph
from .variational import ekeland, lemma_trace

EXIT_OK, EXIT_VIOLATION, EXIT_INCONCLUSIVE, EXIT_CONFIG = 0, 1, 2, 64
COMMANDS = ("certify", "minty", "barrier", "ekeland", "trace", "graph")

class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    function: str = "quadratic"
    expr: str = None
    dimension: int = None
    domain: list = None
    resolution: int = 201
    lambdas: list = field(default_factory=lambda: [0.1, 0.01])
    tilts: int = 5
    tol: float = None
    body: object = None
    x0: list = None
    x0star: list = None
    ray: list = None
    steps: int = 50
    start: list = None
    eps: float = 0.1
    scale: float = 1.0
    nmax: int = 12
    out: str = None
    csv: str = None
    seed: int = 0
    random_tests: int = 100

    def validate(self):
        if self.dimension not in (1, 2, 3):
            raise ConfigError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if self.resolution < 2:
            raise ConfigError("resolution must be at least 2")
        if self.tilts < 1:
            raise ConfigError("tilts must be at least 1")
        if not self.lambdas or any(v <= 0 for v in self.lambdas):
            raise ConfigError("lambda values must be positive")
        for name in ("tol", "eps", "scale"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive")
        if self.steps < 1 or self.nmax < 1:
            raise ConfigError("steps and nmax must be positive")


def _floats(text):
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from None


def _domain(text, dim):
    if isinstance(text, (list, tuple)) and text and isinstance(text[0], (list, tuple)):
        rows = [[float(a), float(b)] for a, b in text]
    elif isinstance(text, (list, tuple)):
        rows = [_floats(text)]
    else:
        rows = [_floats(part) for part in str(text).split(";")]
    if any(len(r) != 2 for r in rows):
        raise ConfigError(f"domain must be lo,hi pairs, got {text!r}")
    if len(rows) == 1:
        rows = rows * dim
    if len(rows) != dim:
        raise ConfigError(f"domain has {len(rows)} axes but dimension is {dim}")
    lo, hi = np.array(rows).T
    if np.any(hi <= lo):
        raise ConfigError("domain needs lo < hi on every axis")
    return lo, hi


def parse_body(spec, dim):
    """Body from JSON (object or string) or shorthand.

    Shorthand: ``ball:R[:P]``, ``tube:P:Q:DELTA`` (points comma-separated)
    and ``polytope:A11,A12;A21,A22;...``.
    """
    if isinstance(spec, str) and spec.lstrip().startswith("{"):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed body JSON: {exc.msg}") from None
    if isinstance(spec, dict):
        return body_from_spec(spec, dim)
    kind, _, rest = str(spec).partition(":")
    parts = rest.split(":") if rest else []
    try:
        if kind == "ball" and 1 <= len(parts) <= 2:
            p = parts[1] if len(parts) == 2 else 2
            return body_from_spec({"type": "ball", "r": float(parts[0]), "p": p,
                                   "n": dim}, dim)
        if kind == "tube" and len(parts) == 3:
            return body_from_spec({"type": "tube", "p": _floats(parts[0]),
                                   "q": _floats(parts[1]), "delta": float(parts[2])})
        if kind == "polytope" and len(parts) == 1:
            rows = [_floats(r) for r in parts[0].split(";")]
            return body_from_spec({"type": "polytope", "normals": rows})
    except ValueError as exc:
        raise ConfigError(f"bad body {spec!r}: {exc}") from None
    raise ConfigError(f"bad body {spec!r}; use ball:R[:P], tube:P:Q:DELTA or "
                      f"polytope:ROWS")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if np.isfinite(obj) else None
    return obj


def _emit(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump_json(payload, path):
    _emit(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n", path)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                    for v in r])
    return buf.getvalue()


def _function(cfg):
    dom = _domain(cfg.domain, cfg.dimension) if cfg.domain is not None else None
    if cfg.expr:
        return parse_expression(cfg.expr, cfg.dimension, dom)
    return make_function(cfg.function, cfg.dimension, dom)


def cmd_certify(cfg):
    f = _function(cfg)
    rep = _certify.certify_convexity(
        f, cfg.resolution, cfg.lambdas, cfg.tilts, tol=cfg.tol,
        n_random=cfg.random_tests, seed=cfg.seed)
    mono = rep.monotonicity
    worst = None
    if mono.worst_pair is not None:
        (x1, s1), (x2, s2) = mono.worst_pair
        worst = {"x1": x1, "x1star": s1, "x2": x2, "x2star": s2,
                 "value": mono.worst_value}
    _dump_json({
        "function": f.name, "verdict": rep.verdict, "graph_size": rep.graph_size,
        "monotonicity": mono.verdict, "worst_value": mono.worst_value,
        "worst_pair": worst, "envelope_gap": rep.envelope_gap,
        "gap_witness": rep.gap_witness, "envelope_excess": rep.envelope_excess,
        "excess_witness": rep.excess_witness, "tolerance": rep.tolerance,
        "lipschitz_estimate": rep.lipschitz_estimate, "spacing": rep.spacing,
        "seed": cfg.seed, "notes": list(rep.notes),
    }, cfg.out)
    return {_certify.CERTIFIED: EXIT_OK, _certify.NONCONVEX: EXIT_VIOLATION}.get(
        rep.verdict, EXIT_INCONCLUSIVE)


def _required(cfg, name):
    v = getattr(cfg, name)
    if v is None:
        raise ConfigError(f"--{name} is required for this command")
    vals = _floats(v)
    if len(vals) != cfg.dimension:
        raise ConfigError(f"--{name} needs {cfg.dimension} coordinates")
    return np.array(vals)


def cmd_minty(cfg):
    f = _function(cfg)
    x0, x0star = _required(cfg, "x0"), _required(cfg, "x0star")
    graph = sample_graph(f, cfg.resolution, cfg.lambdas, cfg.tilts)
    res = _certify.minty_test(graph, x0, x0star, tol=cfg.tol or 1e-6)
    payload = {"function": f.name, "related": res.related, "x0": x0,
               "x0star": x0star, "graph_size": len(graph),
               "witness": None if res.witness is None else
               {"x": res.witness[0], "xstar": res.witness[1],
                "value": res.worst_value}}
    fx0 = f(x0)
    if np.isfinite(fx0):
        cert = fenchel_membership(f, x0, x0star, tol=cfg.tol or 1e-6,
                                  resolution=cfg.resolution)
        payload["fenchel_member"] = cert.member
    else:
        payload["fenchel_member"] = None
        payload["notes"] = ["x0 outside dom f on the grid; membership undecided"]
    _dump_json(payload, cfg.out)
    return EXIT_OK if res.related else EXIT_VIOLATION


def cmd_barrier(cfg):
    if cfg.body is None:
        raise ConfigError("--body is required for barrier")
    body = parse_body(cfg.body, cfg.dimension)
    ray = _required(cfg, "ray")
    mu_ray = body.gauge(ray)
    if not mu_ray > 0:
        raise ConfigError("--ray must be a non-zero direction")
    unit = ray / mu_ray
    bar = Barrier(body, cfg.scale)
    rows = []
    # steps + 1 samples with gauge j / (steps + 1), never touching the boundary
    for j in range(cfg.steps + 1):
        t = j / (cfg.steps + 1)
        x = t * unit
        rows.append([t, *x, float(body.gauge(x)), barrier_eval(bar, x)])
    header = ["t", *[f"x{i + 1}" for i in range(cfg.dimension)], "mu", "k"]
    _emit(_csv_text(header, rows), cfg.out)
    return EXIT_OK


def cmd_ekeland(cfg):
    f = _function(cfg)
    start = _required(cfg, "start")
    lam = cfg.lambdas[0]
    if cfg.body is not None:
        domain = parse_body(cfg.body, cfg.dimension)
    else:
        domain = box_grid(*f.domain, cfg.resolution).points
    res = ekeland(f, domain, start, cfg.eps, lam, resolution=cfg.resolution)
    _dump_json({"function": f.name, "y": res.y, "fy": res.fy, "eps": res.eps,
                "lambda": res.lam, "start": res.start, "moves": res.moves},
               cfg.out)
    return EXIT_OK


def cmd_trace(cfg):
    f = _function(cfg)
    body = parse_body(cfg.body if cfg.body is not None else "tube:0:1:0.5",
                      cfg.dimension)
    if body.dim != cfg.dimension:
        raise ConfigError("body dimension does not match the function")
    x0 = _required(cfg, "x0") if cfg.x0 is not None else np.zeros(cfg.dimension)
    lin = _required(cfg, "x0star") if cfg.x0star is not None else None
    g = BarrierFunction(Barrier(body, cfg.scale), x0, lin)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        rec = lemma_trace(f, g, x0, n_max=cfg.nmax,
                          resolution=cfg.resolution)
    rows = list(rec.rows())
    if cfg.csv:
        header = list(rows[0])
        _emit(_csv_text(header, [[r[k] for k in header] for r in rows]), cfg.csv)
    last = rec.iterations[-1]
    _dump_json({
        "function": f.name, "anchor": rec.anchor, "M": rec.M,
        "converged": rec.converged, "inf_estimate": rec.inf_estimate,
        "slack": rec.slack, "steps": len(rows),
        "final": {"n": last.n, "eps": last.eps, "gap_xy": last.gap_xy,
                  "value": last.value, "pairing": last.pairing},
        "warnings": [str(w.message) for w in caught],
    }, cfg.out)
    return EXIT_OK if rec.converged else EXIT_INCONCLUSIVE


def cmd_graph(cfg):
    f = _function(cfg)
    g = sample_graph(f, cfg.resolution, cfg.lambdas, cfg.tilts)
    n = f.dim
    header = [*[f"x{i + 1}" for i in range(n)],
              *[f"xstar{i + 1}" for i in range(n)], "fx"]
    rows = [[*x, *s, fx] for x, s, fx in g]
    _emit(_csv_text(header, rows), cfg.out)
    return EXIT_OK


HANDLERS = {"certify": cmd_certify, "minty": cmd_minty, "barrier": cmd_barrier,
            "ekeland": cmd_ekeland, "trace": cmd_trace, "graph": cmd_graph}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="gaugecert", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="flat JSON config file")
        s.add_argument("--function", help="registry name")
        s.add_argument("--expr", help="custom expression, e.g. 'max(x, 2*x)'")
        s.add_argument("--dim", dest="dimension", type=int)
        s.add_argument("--domain", help="lo,hi or lo,hi;lo,hi;...")
        s.add_argument("--resolution", type=int)
        s.add_argument("--lambda", dest="lambdas", help="comma-separated steps")
        s.add_argument("--tilts", type=int)
        s.add_argument("--tol", type=float)
        s.add_argument("--body")
        s.add_argument("--x0")
        s.add_argument("--x0star")
        s.add_argument("--ray")
        s.add_argument("--steps", type=int)
        s.add_argument("--start")
        s.add_argument("--eps", type=float)
        s.add_argument("--scale", type=float)
        s.add_argument("--nmax", type=int)
        s.add_argument("--random-tests", dest="random_tests", type=int)
        s.add_argument("--csv", help="CSV side output (trace)")
        s.add_argument("--out")
        s.add_argument("--seed", type=int)
    return p


# every option takes exactly one value, so a single-dash token right after
# one is a value such as "-1,1" or "-abs(x)", never a flag (except -h)
_NEG_VALUE = re.compile(r"^-(?!-|h$)")


def _join_negative_values(argv):
    # "--domain -1,1" would otherwise be read as an unknown option
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv) \
                and _NEG_VALUE.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def _infer_dimension(cfg):
    for name in ("ray", "x0", "start", "x0star"):
        v = getattr(cfg, name)
        if v is not None:
            return len(_floats(v))
    if isinstance(cfg.domain, str) and ";" in cfg.domain:
        return len(cfg.domain.split(";"))
    return 1


def load_config(args):
    cfg = RunConfig()
    data = {}
    known = {f.name for f in fields(RunConfig)}
    aliases = {"lambda": "lambdas", "lambda_schedule": "lambdas",
               "tilt_count": "tilts", "dim": "dimension"}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        for key, value in data.items():
            key = aliases.get(key, key)
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
    for key in known:
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    cfg.lambdas = _floats(cfg.lambdas)
    if cfg.dimension is None:
        cfg.dimension = _infer_dimension(cfg)
    for key in ("resolution", "tilts", "steps", "nmax", "seed", "random_tests",
                "dimension"):
        try:
            setattr(cfg, key, int(getattr(cfg, key)))
        except (TypeError, ValueError):
            raise ConfigError(f"{key} must be an integer") from None
    cfg.validate()
    return cfg


def _setup_logging():
    level = os.environ.get("GAUGE_CERTIFY_LOG", "quiet").lower()
    levels = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(_join_negative_values(argv))
    try:
        cfg = load_config(args)
        return HANDLERS[args.command](cfg)
    except (ConfigError, InvalidInputError, PreconditionError) as exc:
        print(f"gaugecert {args.command}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
