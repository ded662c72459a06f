"""Command-line entry point.

Exit status: 0 success, 2 usage or configuration error, 3 a run that
completed but failed a validity check.  Errors print one line to stderr:
``error: code=<name> message=<text>``.
"""
import argparse
import json
import os
import sys
import time

import numpy as np

from . import config as cfg
from .config import ConfigError, Section

SUBCOMMANDS = ("generate", "passage", "variance-scan", "shift-test", "animals",
               "influence-check", "hn-check", "probe-determination")

EXIT_OK, EXIT_USAGE, EXIT_INVALID = 0, 2, 3


class RunInvalid(RuntimeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("usage", message, EXIT_USAGE)


def _fail(code, message, status):
    msg = " ".join(str(message).split())
    sys.stderr.write(f"error: code={code} message={msg}\n")
    raise SystemExit(status)


def build_parser():
    p = _Parser(prog="fpplab", description="Dependent first-passage percolation laboratory.")
    sub = p.add_subparsers(dest="command", metavar="subcommand")
    sub.required = True
    for name in SUBCOMMANDS:
        s = sub.add_parser(name, help=f"run {name}")
        s.error = p.error
        s.add_argument("--config", help="INI config file or a run summary JSON")
        s.add_argument("--seed", type=int, help="override every seed (64-bit unsigned)")
        s.add_argument("--out", default=".", help="output directory (default: .)")
        s.add_argument("--threads", type=int, default=1, help="worker threads (default: 1)")
        s.add_argument("--timing", action="store_true",
                       help="also write wall-clock time to timing.json")
        if name == "influence-check":
            s.add_argument("--exhaustive-3x3", action="store_true",
                           help="f = T(0,(2,2)), site version, 3x3 box, S={1,2}, p=1/2")
    return p


class Run:
    """Resolves config sections and collects the resolved values for the summary."""

    def __init__(self, raw, seed):
        self.raw = raw
        self.seed = seed
        self.sections = {}

    def section(self, name):
        if name not in self.sections:
            raw = dict(self.raw.get(name, {}))
            if self.seed is not None and name in ("model", "experiment", "run"):
                raw["seed"] = self.seed
            self.sections[name] = Section(name, raw)
        return self.sections[name]

    def resolved(self):
        for name, sec in self.sections.items():
            extra = sec.unknown()
            if extra:
                raise ConfigError(f"[{name}] unknown keys: {', '.join(extra)}")
        unused = sorted(set(self.raw) - set(self.sections))
        if unused:
            raise ConfigError(f"unused sections: {', '.join(unused)}")
        return {name: sec.resolved for name, sec in sorted(self.sections.items())}


def _dump(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (tuple, set, frozenset)):
        return list(x)
    raise TypeError(f"not serializable: {type(x)}")


def _experiment(run, threads):
    from .experiments import ExperimentSpec
    model = cfg.model_from(run.section("model"))
    sec = run.section("experiment")
    return ExperimentSpec(
        model=model,
        sizes=tuple(sec.ints("sizes", (16, 32, 64, 128, 256))),
        replications=sec.int("replications", 400),
        seed=sec.int("seed", 0),
        direction=tuple(sec.ints("direction", (1, 0))),
        margin_factor=sec.float("margin_factor", 1.5),
        boundary_threshold=sec.float("boundary_threshold", 0.001),
        n_boot=sec.int("n_boot", 2000),
        workers=threads,
    )


def cmd_generate(run, out, threads):
    from .lattice import BoxSpec
    from .weights import generate_field, write_grid
    model = cfg.model_from(run.section("model"))
    sec = run.section("box")
    box = BoxSpec(tuple(sec.ints("lower", (0, 0))), tuple(sec.ints("upper", (15, 15))),
                  sec.str("mode", "open"))
    fld = generate_field(model, box, model.seed)
    write_grid(os.path.join(out, "field.txt"), fld, seed=model.seed, model=model.to_dict())
    vals = fld.values
    return {"indexing": fld.indexing, "mean": float(vals.mean()), "min": float(vals.min()),
            "max": float(vals.max())}


def cmd_passage(run, out, threads):
    from .lattice import BoxSpec
    from .passage import (passage_time, passage_time_hop_constrained, write_geodesic)
    from .weights import generate_field, read_grid
    sec = run.section("passage")
    src = tuple(sec.ints("src", (0, 0)))
    dst = tuple(sec.ints("dst", (8, 0)))
    field_file = sec.str("field_file", "")
    c1 = sec.float("c1", 0.0)
    if field_file:
        fld = read_grid(field_file)
    else:
        model = cfg.model_from(run.section("model"))
        bsec = run.section("box")
        box = BoxSpec(tuple(bsec.ints("lower", (-8, -8))), tuple(bsec.ints("upper", (16, 8))),
                      bsec.str("mode", "open"))
        fld = generate_field(model, box, model.seed)
    res = passage_time(fld, src, dst)
    write_geodesic(os.path.join(out, "geodesic.txt"), res)
    report = {"value": res.value, "edge_count": res.edge_count,
              "touched_boundary": res.touched_boundary}
    if c1 > 0:
        report["hop_constrained_value"] = passage_time_hop_constrained(fld, src, dst, c1).value
    _dump(os.path.join(out, "passage.json"), report)
    return report


def cmd_variance_scan(run, out, threads):
    from .experiments import (nonincreasing_within_ci, variance_scan, write_records_jsonl,
                              write_scan_csv)
    spec = _experiment(run, threads)
    raw_dump = run.section("output").bool("raw", False)
    res = variance_scan(spec)
    write_scan_csv(os.path.join(out, "scan.csv"), res, spec)
    if raw_dump:
        write_records_jsonl(os.path.join(out, "raw.jsonl"), res.records)
    report = {"valid": res.valid, "diagnostics": res.diagnostics,
              "nonincreasing_within_ci": nonincreasing_within_ci(res.rows)}
    if not res.valid:
        raise RunInvalid("; ".join(res.diagnostics), report)
    return report


def cmd_shift_test(run, out, threads):
    from dataclasses import asdict
    from .experiments import shift_invariance_test
    spec = _experiment(run, threads)
    sec = run.section("shift")
    rep = shift_invariance_test(spec, sec.int("size", 64), sec.int("samples", 500))
    report = asdict(rep)
    report["diff_ci_contains_zero"] = rep.diff_ci_contains_zero
    _dump(os.path.join(out, "shift.json"), report)
    return report


def cmd_animals(run, out, threads):
    from .animals import martin_ratio_experiment
    sec = run.section("animals")
    values = sec.floats("values", (0.0, 1.0))
    probs = sec.floats("probs", (0.5, 0.5))
    d = sec.int("dimension", 2)
    n_list = sec.ints("sizes", range(1, 9))
    reps = sec.int("replications", 200)
    seed = sec.int("seed", 0) if run.seed is None else run.seed
    sec.resolved["seed"] = seed
    rows, vals = martin_ratio_experiment(list(zip(values, probs)), d, n_list, reps, seed)
    with open(os.path.join(out, "martin.csv"), "w") as fh:
        fh.write("n,replications,mean_ratio,ci_low,ci_high,integral,normalized,exact\n")
        for r in rows:
            fh.write(f"{r.n},{r.replications},{r.mean_ratio!r},{r.ci_low!r},{r.ci_high!r},"
                     f"{r.integral!r},{r.normalized!r},{str(r.exact).lower()}\n")
    monotone = bool(np.all(np.diff(vals, axis=1) >= 0)) if len(n_list) > 1 else True
    return {"monotone_in_n": monotone, "integral": rows[0].integral}


def cmd_influence_check(run, out, threads, exhaustive_3x3=False):
    from .influence import (delta, efron_stein_check, efron_stein_sum, passage_function_table,
                            second_moment_check, talagrand_functional, VacuousCheck,
                            write_function_table)
    sec = run.section("influence")
    if exhaustive_3x3:
        shape, alphabet, probs = [3, 3], [1.0, 2.0], [0.5, 0.5]
        sec.resolved.update({"shape": shape, "alphabet": alphabet, "probs": probs})
    else:
        shape = sec.ints("shape", (3, 3))
        alphabet = sec.floats("alphabet", (1.0, 2.0))
        probs = sec.floats("probs", (0.5, 0.5))
    f = passage_function_table(tuple(shape), alphabet=tuple(alphabet), probs=tuple(probs))
    rep = talagrand_functional(f)
    second = []
    for i in range(f.n):
        try:
            second.append(second_moment_check(delta(f, i)))
        except VacuousCheck:
            second.append(None)
    write_function_table(os.path.join(out, "function_table.txt"), f)
    report = {"n": f.n, "variance": rep.variance, "talagrand_sum": rep.influence_sum,
              "log_factor": rep.log_factor, "binary_log_factor": rep.binary_log_factor,
              "empirical_K": rep.ratio, "terms": rep.terms,
              "efron_stein_sum": efron_stein_sum(f), "efron_stein_holds": efron_stein_check(f),
              "second_moment_holds": second}
    _dump(os.path.join(out, "influence.json"), report)
    print(f"variance={rep.variance!r} talagrand_sum={rep.influence_sum!r} "
          f"log_factor={rep.log_factor!r} empirical_K={rep.ratio!r} "
          f"efron_stein={str(report['efron_stein_holds']).lower()}")
    return report


def cmd_hn_check(run, out, threads):
    from .weights import hn_gamma
    sec = run.section("hn")
    model = cfg.model_from(run.section("model"))
    d = sec.int("dimension", 2)
    mode = sec.str("mode", model.kernel_mode)
    kernel = model.build_kernel(d)
    gamma, ok = hn_gamma(kernel, mode)
    report = {"gamma": gamma, "satisfied": ok, "mode": mode}
    _dump(os.path.join(out, "hn.json"), report)
    print(f"gamma={gamma!r} satisfied={str(ok).lower()}")
    return report


def cmd_probe_determination(run, out, threads):
    from .lattice import BoxSpec
    from .weights import probe_curve
    model = cfg.model_from(run.section("model"))
    sec = run.section("probe")
    shape = sec.ints("torus", (16, 16))
    torus = BoxSpec.from_shape(tuple(shape), "torus")
    v = tuple(sec.ints("site", tuple(s // 2 for s in shape)))
    ks = sec.ints("sweeps", (1, 2, 4, 8))
    reps = sec.int("replications", 20000)
    curve = probe_curve(model, torus, v, ks, reps, model.seed)
    with open(os.path.join(out, "probe.csv"), "w") as fh:
        fh.write("k,replications,undetermined,estimate,ci_low,ci_high\n")
        for r in curve:
            fh.write(f"{r.k},{r.replications},{r.undetermined},{r.estimate!r},"
                     f"{r.ci_low!r},{r.ci_high!r}\n")
    return {"estimates": [r.estimate for r in curve]}


COMMANDS = {
    "generate": cmd_generate,
    "passage": cmd_passage,
    "variance-scan": cmd_variance_scan,
    "shift-test": cmd_shift_test,
    "animals": cmd_animals,
    "influence-check": cmd_influence_check,
    "hn-check": cmd_hn_check,
    "probe-determination": cmd_probe_determination,
}


def run(argv=None):
    """Parse ``argv``, execute one subcommand, return the exit status."""
    try:
        return _run(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE


def _run(argv):
    args = build_parser().parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        _fail("usage", "seed must be a 64-bit unsigned integer", EXIT_USAGE)
    if args.threads < 1:
        _fail("usage", "threads must be >= 1", EXIT_USAGE)
    try:
        raw = cfg.load(args.config) if args.config else {}
    except ConfigError as exc:
        _fail("config", exc, EXIT_USAGE)
    os.makedirs(args.out, exist_ok=True)
    r = Run(raw, args.seed)
    fn = COMMANDS[args.command]
    kwargs = {"exhaustive_3x3": args.exhaustive_3x3} if args.command == "influence-check" else {}
    start = time.perf_counter()
    status, report = EXIT_OK, None
    try:
        report = fn(r, args.out, args.threads, **kwargs)
        resolved = r.resolved()
    except RunInvalid as exc:
        status, report = EXIT_INVALID, exc.args[1]
        resolved = r.resolved()
        msg = exc.args[0]
    except (ConfigError, ValueError, KeyError) as exc:
        _fail("config", exc, EXIT_USAGE)
    summary = {"subcommand": args.command, "config": resolved, "report": report,
               "valid": status == EXIT_OK}
    _dump(os.path.join(args.out, "summary.json"), summary)
    if args.timing:
        _dump(os.path.join(args.out, "timing.json"),
              {"wall_clock_seconds": time.perf_counter() - start})
    if status != EXIT_OK:
        _fail("invalid", msg, status)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
