"""Command line experiment runner.

Every run appends one row per fitted model to ``<out>/results.csv`` and
writes, under a tag derived from the method and shape:

* ``<tag>.json``        the fitted approximant or network
* ``<tag>_spec.json``   the experiment spec, enough to rerun it
* ``<tag>_plot.csv``    model vs target on a grid 4x denser than the training grid
* method extras: ``_trace.csv`` (bisection), ``_residuals.csv`` (AAA),
  ``_epochs.csv`` and ``_report.json`` (networks)

Exit codes: 0 success, 2 bad usage or invalid options, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import aaa, bisection, diffcorr, nn
from .basis import Box, DegreeSpec, Scheme
from .data import (TARGETS, GridDataset, SampleSet, evaluate_target, grid_function,
                   load_grid, subsample_every_k, to_sample_set)
from .errors import BracketError, PoleError, RatnetError

log = logging.getLogger(__name__)

METHODS = ("diffcorr", "bisect", "aaa", "nn")
RESULT_COLUMNS = ("method", "target", "shape", "loss_kind", "error", "wall_time",
                  "min_loss_epoch", "condition", "den_bound", "status")
DENSITY = 4

_OPTION_KEYS = {
    "diffcorr": {"degree", "scheme", "max_iters", "tol", "lp"},
    "bisect": {"degree", "scheme", "den_lower", "den_upper", "z_tol", "z_hi", "lp"},
    "aaa": {"m_max", "rel_tol"},
    "nn": {"activation", "hidden", "loss", "mode", "epochs", "lr", "optimizer"},
}


@dataclass
class ExperimentSpec:
    method: str
    target: str = "sqrt_abs_shift"
    options: dict = field(default_factory=dict)
    out_dir: str = "results"
    seed: int = 0
    grid_points: int | None = None  # per axis; None keeps the target's default
    every_k: int = 1
    grid_file: str | None = None

    def validate(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.grid_file is None and self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}; choose from {sorted(TARGETS)}")
        extra = set(self.options) - _OPTION_KEYS[self.method]
        if extra:
            raise ValueError(f"options {sorted(extra)} do not apply to {self.method}")
        if self.grid_points is not None and self.grid_points < 2:
            raise ValueError("grid_points must be >= 2")
        if self.every_k < 1:
            raise ValueError("every_k must be >= 1")
        o = self.options
        if self.method in ("diffcorr", "bisect"):
            deg = o.get("degree")
            if deg is None or len(deg) != 2 or min(deg) < 0:
                raise ValueError("degree must be two non-negative integers (numerator, denominator)")
            Scheme(o.get("scheme", "total"))
        if self.method == "bisect":
            bisection.BisectOptions(**self._bisect_kwargs())
        if self.method == "aaa" and int(o.get("m_max", 0)) < 1:
            raise ValueError("m_max must be >= 1")
        if self.method == "nn":
            nn.Activation(o.get("activation", "relu"))
            if int(o.get("hidden", 10)) < 1:
                raise ValueError("hidden must be >= 1")
            self._train_config()
        return self

    def _bisect_kwargs(self):
        o = self.options
        kw = {k: o[k] for k in ("den_lower", "den_upper", "z_tol", "z_hi") if o.get(k) is not None}
        if "lp" in o:
            kw["lp_method"] = o["lp"]
        return kw

    def _train_config(self):
        o = self.options
        return nn.TrainConfig(loss=o.get("loss", "uniform"), optimizer=o.get("optimizer"),
                              epochs=int(o.get("epochs", 200)),
                              learning_rate=float(o.get("lr", 1e-2)),
                              seed=self.seed, mode=o.get("mode", "standard"))

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class ResultRow:
    method: str
    target: str
    shape: str
    loss_kind: str
    error: float
    wall_time: float
    min_loss_epoch: int | None = None
    condition: float | None = None
    den_bound: float | None = None
    status: str = "ok"

    def as_csv(self):
        d = asdict(self)
        return ["" if d[k] is None else d[k] for k in RESULT_COLUMNS]


# -- data ----------------------------------------------------------------------

def _grid(spec: ExperimentSpec) -> GridDataset:
    if spec.grid_file is not None:
        g = load_grid(spec.grid_file)
    else:
        dim = TARGETS[spec.target][1].dim
        n = None if spec.grid_points is None else (spec.grid_points,) * dim
        g = grid_function(spec.target, n_per_dim=n)
    if spec.every_k > 1:
        g = subsample_every_k(g, spec.every_k)
    return g


def _dense_points(spec, g: GridDataset):
    """Plot grid: DENSITY times the training density on the same box, or the
    data grid itself when the data came from a file."""
    if spec.grid_file is not None:
        dense = load_grid(spec.grid_file)
        return to_sample_set(dense)
    axes = [np.linspace(lo, hi, DENSITY * (a.size - 1) + 1)
            for lo, hi, a in zip(g.box.lower, g.box.upper, g.axes)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    return SampleSet(pts, evaluate_target(spec.target, pts, g.box), g.box)


def _safe_eval(fn, pts):
    try:
        return np.asarray(fn(pts), dtype=float)
    except PoleError:
        out = np.empty(len(pts))
        for i, p in enumerate(pts):
            try:
                out[i] = np.asarray(fn(pts[i:i + 1]), dtype=float).ravel()[0]
            except PoleError:
                out[i] = np.nan
        return out


# -- artifacts -----------------------------------------------------------------

def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def append_results(out: Path, rows):
    path = out / "results.csv"
    new = not path.exists() or path.stat().st_size == 0
    with open(path, "a", newline="") as fh:
        w = csv.writer(fh)
        if new:
            w.writerow(RESULT_COLUMNS)
        for r in rows:
            w.writerow(r.as_csv())


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if hasattr(o, "__dataclass_fields__"):
        return asdict(o)
    return str(o)


def _dump(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, default=_json_default) + "\n")


def _write_plot(out, tag, spec, g, model):
    dense = _dense_points(spec, g)
    approx = _safe_eval(model, dense.points if dense.dim > 1 else dense.x)
    if dense.dim == 1:
        rows = zip(dense.x, dense.values, approx)
        _write_csv(out / f"{tag}_plot.csv", ("x", "f", "approx"), rows)
    else:
        err = np.abs(dense.values - approx)
        cols = [dense.points[:, i] for i in range(dense.dim)]
        names = ("x", "t") if dense.dim == 2 else tuple(f"x{i}" for i in range(dense.dim))
        _write_csv(out / f"{tag}_plot.csv", names + ("f", "approx", "abs_error"),
                   zip(*cols, dense.values, approx, err))


# -- runners -------------------------------------------------------------------

def _degree_spec(spec, dim):
    n, m = spec.options["degree"]
    scheme = spec.options.get("scheme", "total")
    return DegreeSpec((int(n),) * dim, (int(m),) * dim, scheme)


def _target_name(spec):
    return Path(spec.grid_file).stem if spec.grid_file else spec.target


def _run_rational(spec, out, samples, g):
    degrees = _degree_spec(spec, samples.dim)
    if spec.method == "diffcorr":
        o = spec.options
        r, rep = diffcorr.fit(samples, degrees, max_iters=int(o.get("max_iters", 100)),
                              tol=float(o.get("tol", 1e-10)), lp_method=o.get("lp", "highs"))
        cond, bound = rep.condition, None
    else:
        r, rep = bisection.bisect_fit(samples, degrees,
                                      bisection.BisectOptions(**spec._bisect_kwargs()))
        cond = bisection.condition_estimate(samples, degrees, rep.extras["z_hi"],
                                            bisection.BisectOptions(**spec._bisect_kwargs()))
        bound = rep.extras["den_upper"]
        _write_csv(out / f"{spec.method}_{_tag_shape(degrees)}_trace.csv",
                   ("iteration", "z_lo", "z_hi", "z", "feasible"),
                   ([s.iteration, s.z_lo, s.z_hi, s.z, int(s.feasible)] for s in rep.extras["trace"]))
    tag = f"{spec.method}_{_tag_shape(degrees)}"
    _dump(out / f"{tag}.json", {"approximant": r.to_dict(), "report": rep.to_dict()})
    _write_plot(out, tag, spec, g, r)
    status = "ok" if rep.converged else "not-converged"
    if rep.ill_conditioned:
        status += ";ill-conditioned"
    return tag, [ResultRow(spec.method, _target_name(spec), degrees.label(), "uniform",
                           rep.error, rep.wall_time, None, cond, bound, status)]


def _tag_shape(degrees):
    return f"{max(degrees.num_degree)}-{max(degrees.den_degree)}" + (
        f"-{degrees.scheme.value}" if degrees.dim > 1 else "")


def _run_aaa(spec, out, samples, g):
    o = spec.options
    r, rep = aaa.aaa_fit(samples, int(o["m_max"]), float(o.get("rel_tol", 1e-13)))
    tag = f"aaa_m{r.m}"
    _dump(out / f"{tag}.json", {"approximant": r.to_dict(), "report": rep.to_dict()})
    _write_csv(out / f"{tag}_residuals.csv", ("m", "max_residual"),
               ((i + 1, e) for i, e in enumerate(rep.history)))
    _write_plot(out, tag, spec, g, r)
    status = "ok;unstable" if rep.extras["unstable"] else "ok"
    n, m = r.degree
    return tag, [ResultRow("aaa", _target_name(spec), f"({n},{m})", "uniform",
                           rep.error, rep.wall_time, None, None, None, status)]


def _run_nn(spec, out, samples, g):
    if samples.dim != 1:
        raise ValueError("networks are univariate")
    o = spec.options
    config = spec._train_config()
    act = nn.ActivationSpec(o.get("activation", "relu"))
    params = nn.init_params(int(o.get("hidden", 10)), act, spec.seed)
    t0 = time.perf_counter()
    rep = nn.train(params, samples, config)
    wall = max(time.perf_counter() - t0, 1e-9)
    tag = f"nn_{act.kind.value}_h{params.hidden}_{config.loss.value}_{config.mode.value}"
    _dump(out / f"{tag}.json", rep.params.to_dict())
    _dump(out / f"{tag}_report.json", rep.to_dict())
    _write_csv(out / f"{tag}_epochs.csv", ("epoch", "loss"),
               ((i + 1, v) for i, v in enumerate(rep.per_epoch_loss)))
    _write_plot(out, tag, spec, g, lambda x: nn.forward(rep.params, x))
    status = "ok" if rep.pole_error is None else "pole:" + rep.pole_error
    shape = f"1-{params.hidden}-1/{act.kind.value}/{config.mode.value}"
    return tag, [ResultRow("nn", _target_name(spec), shape, config.loss.value,
                           rep.final_loss, wall, rep.min_loss_epoch, None, None, status)]


_RUNNERS = {"diffcorr": _run_rational, "bisect": _run_rational, "aaa": _run_aaa, "nn": _run_nn}


def output_dir(cli_value=None):
    """``RATNET_OUT`` wins over the command line, which wins over ``results``."""
    return Path(os.environ.get("RATNET_OUT") or cli_value or "results")


def run(spec: ExperimentSpec):
    """Run one experiment, write its artifacts and return its result rows."""
    spec.validate()
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    g = _grid(spec)
    samples = to_sample_set(g)
    tag, rows = _RUNNERS[spec.method](spec, out, samples, g)
    _dump(out / f"{tag}_spec.json", spec.to_dict())
    append_results(out, rows)
    return rows


def six_way(out_dir="results", seed=0, epochs=200, hidden=10):
    """The six approaches compared on sqrt(|x - 0.25|): four networks and two rational fits
    with a matching parameter budget."""
    net = {"hidden": hidden, "loss": "uniform", "epochs": epochs}
    specs = [
        ExperimentSpec("nn", options={**net, "activation": "relu"}),
        ExperimentSpec("nn", options={**net, "activation": "rat-fixed"}),
        ExperimentSpec("nn", options={**net, "activation": "rat-learn"}),
        ExperimentSpec("nn", options={**net, "activation": "rat-learn", "mode": "split"}),
        ExperimentSpec("diffcorr", options={"degree": [2 * hidden + 1, 2 * hidden]}),
        ExperimentSpec("aaa", options={"m_max": 2 * hidden + 1}),
    ]
    for s in specs:
        s.out_dir, s.seed = str(out_dir), seed
    return specs


def compare(specs):
    """Run every spec, keep going past failures, return ``(rows, markdown)``."""
    rows = []
    for spec in specs:
        try:
            rows.extend(run(spec))
        except (RatnetError, ValueError) as exc:
            log.warning("%s failed: %s", spec.method, exc)
            rows.append(ResultRow(spec.method, spec.target, json.dumps(spec.options), "-",
                                  math.nan, 0.0, status=f"failed: {type(exc).__name__}: {exc}"))
    return rows, render_markdown(rows)


def render_markdown(rows):
    """Table sorted by error (failures last); ``*`` marks the best row per loss kind."""
    ordered = sorted(rows, key=lambda r: (math.isnan(r.error), r.error))
    best = {}
    for r in ordered:
        if not math.isnan(r.error):
            best.setdefault(r.loss_kind, id(r))
    lines = ["| rank | method | shape | loss | error | wall time (s) | status |",
             "|---:|---|---|---|---:|---:|---|"]
    for i, r in enumerate(ordered, 1):
        mark = " *" if best.get(r.loss_kind) == id(r) else ""
        err = "-" if math.isnan(r.error) else f"{r.error:.6g}"
        lines.append(f"| {i} | {r.method}{mark} | {r.shape} | {r.loss_kind} | {err} "
                     f"| {r.wall_time:.3g} | {r.status} |")
    return "\n".join(lines) + "\n"


# -- argument parsing ----------------------------------------------------------

def _parser():
    p = argparse.ArgumentParser(prog="ratnet", description=__doc__.splitlines()[0])
    p.add_argument("--out", help="output directory (RATNET_OUT overrides it)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-points", type=int, help="training points per axis")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def data_args(sp):
        sp.add_argument("--target", default="sqrt_abs_shift", choices=sorted(TARGETS))
        sp.add_argument("--grid-file", help="gridded data file (overrides --target)")
        sp.add_argument("--every-k", type=int, default=1, help="keep every k-th grid point per axis")

    for name, hlp in (("fit-dc", "differential correction"), ("fit-bisect", "bisection")):
        sp = sub.add_parser(name, help=hlp)
        data_args(sp)
        sp.add_argument("--degree", type=int, nargs=2, metavar=("N", "M"), required=True)
        sp.add_argument("--scheme", choices=[s.value for s in Scheme], default="total")
        sp.add_argument("--lp", choices=("highs", "simplex"), default="highs")
        if name == "fit-dc":
            sp.add_argument("--max-iters", type=int, default=100)
            sp.add_argument("--tol", type=float, default=1e-10)
        else:
            sp.add_argument("--den-lower", type=float, default=1e-2)
            sp.add_argument("--den-upper", type=float)
            sp.add_argument("--z-tol", type=float, default=1e-6)
            sp.add_argument("--z-hi", type=float)

    sp = sub.add_parser("fit-aaa", help="AAA barycentric fit")
    data_args(sp)
    sp.add_argument("--m-max", type=int, required=True)
    sp.add_argument("--rel-tol", type=float, default=1e-13)

    sp = sub.add_parser("train-nn", help="train a 1-H-1 network")
    data_args(sp)
    sp.add_argument("--activation", choices=[a.value for a in nn.Activation], default="relu")
    sp.add_argument("--hidden", type=int, default=10)
    sp.add_argument("--loss", choices=[k.value for k in nn.LossKind], default="uniform")
    sp.add_argument("--mode", choices=[m.value for m in nn.Mode], default="standard")
    sp.add_argument("--optimizer", choices=[o.value for o in nn.Optimizer])
    sp.add_argument("--epochs", type=int, default=200)
    sp.add_argument("--lr", type=float, default=1e-2)

    sp = sub.add_parser("compare", help="run several experiments and tabulate them")
    sp.add_argument("--specs", help="JSON file with one spec or a list of specs; default: the six-way comparison")
    sp.add_argument("--epochs", type=int, default=200)
    sp.add_argument("--hidden", type=int, default=10)

    sp = sub.add_parser("relu-rat", help="best uniform rational approximation to ReLU")
    sp.add_argument("--degree", type=int, nargs=2, metavar=("N", "M"), default=(3, 2))
    sp.add_argument("--lo", type=float, default=-1.0)
    sp.add_argument("--hi", type=float, default=1.0)
    return p


def _spec_from_args(args, out):
    common = {"target": args.target, "out_dir": str(out), "seed": args.seed,
              "grid_points": args.grid_points, "every_k": args.every_k,
              "grid_file": args.grid_file}
    if args.command == "fit-dc":
        opts = {"degree": list(args.degree), "scheme": args.scheme, "max_iters": args.max_iters,
                "tol": args.tol, "lp": args.lp}
        return ExperimentSpec("diffcorr", options=opts, **common)
    if args.command == "fit-bisect":
        opts = {"degree": list(args.degree), "scheme": args.scheme, "lp": args.lp,
                "den_lower": args.den_lower, "den_upper": args.den_upper,
                "z_tol": args.z_tol, "z_hi": args.z_hi}
        return ExperimentSpec("bisect", options=opts, **common)
    if args.command == "fit-aaa":
        return ExperimentSpec("aaa", options={"m_max": args.m_max, "rel_tol": args.rel_tol}, **common)
    opts = {"activation": args.activation, "hidden": args.hidden, "loss": args.loss,
            "mode": args.mode, "optimizer": args.optimizer, "epochs": args.epochs, "lr": args.lr}
    return ExperimentSpec("nn", options=opts, **common)


def _fail(out, exc, code):
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(payload), file=sys.stderr)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _dump(out / "error.json", payload)
    except OSError:
        pass
    return code


def main(argv=None):
    args = _parser().parse_args(argv)  # exits with 2 on usage errors
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = output_dir(args.out)
    try:
        if args.command == "relu-rat":
            box = Box.interval(args.lo, args.hi)
            r, rep = diffcorr.fit_relu_rational(DegreeSpec.univariate(*args.degree), box,
                                                args.grid_points or 2001)
            out.mkdir(parents=True, exist_ok=True)
            payload = {"approximant": r.to_dict(), "report": rep.to_dict()}
            _dump(out / "relu_rational.json", payload)
            print(json.dumps({"error": rep.error, "num": r.num_coeffs.tolist(),
                              "den": r.den_coeffs.tolist()}))
            return 0
        if args.command == "compare":
            if args.specs:
                raw = json.loads(Path(args.specs).read_text())
                if isinstance(raw, dict):  # a single echoed <tag>_spec.json
                    raw = [raw]
                specs = [ExperimentSpec.from_dict({**d, "out_dir": str(out)}) for d in raw]
            else:
                specs = six_way(out, args.seed, args.epochs, args.hidden)
            _, md = compare(specs)
            out.mkdir(parents=True, exist_ok=True)
            (out / "compare.md").write_text(md)
            print(md, end="")
            return 0
        rows = run(_spec_from_args(args, out))
        for r in rows:
            print(json.dumps(asdict(r), default=_json_default))
        return 0
    except BracketError as exc:  # an infeasible bracket end is a numerical outcome
        return _fail(out, exc, 3)
    except ValueError as exc:
        return _fail(out, exc, 2)
    except (RatnetError, ArithmeticError, RuntimeError) as exc:
        return _fail(out, exc, 3)


if __name__ == "__main__":
    sys.exit(main())
