"""Command-line entry point: ``nematic-walls {simulate,thresholds,verify,sweep}``.

Exit codes: 0 success, 1 bad input, 2 solver did not converge,
3 profile violates the standing hypotheses, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import subprocess
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from importlib import metadata
from pathlib import Path


from . import acceptance, thresholds, walls
from .fields import Field, field_spline
from .model import ConfigError, GridSpec, ModelConfig, config_from_dict, config_to_dict, validate_hypotheses
from .solver import RANDOM_SEED, NoConvergenceError, SolveResult, minimize_multistart

log = logging.getLogger("nematic_walls")

EXIT_OK, EXIT_INPUT, EXIT_NOCONV, EXIT_HYPOTHESIS, EXIT_VERIFY = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def load_config(path: str | None) -> ModelConfig:
    if path is None:
        return ModelConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise InputError(f"{path}: top level must be a JSON object")
    try:
        return config_from_dict(data)
    except (ConfigError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _revision() -> str:
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True, text=True,
                             cwd=Path(__file__).parent, timeout=5)
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    dist = metadata.packages_distributions().get("nematic_walls", ["artifact"])[0]
    try:
        return f"{dist} {metadata.version(dist)}"
    except metadata.PackageNotFoundError:
        return "unknown"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_field_csv(u: Field, path: Path) -> None:
    x1, x2 = u.grid.mesh()
    with open(path, "w", newline="") as fh:
        fh.write("x1,x2,u\n")
        for a, b, c in zip(x1.ravel(), x2.ravel(), u.values.ravel()):
            fh.write(f"{_fmt(a)},{_fmt(b)},{_fmt(c)}\n")


def write_outputs(result: SolveResult, config: ModelConfig, out: Path, command: str, seed: int,
                  started: float) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    files = {"field": "field.csv", "energy": "energy.json", "zeroset": "zeroset.csv"}
    write_field_csv(result.field, out / files["field"])
    payload = {**result.energy.to_dict(), "solver": result.summary(), "candidates": result.candidates}
    (out / files["energy"]).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    z = walls.extract_zero_set(result.field, walls.DEFAULT_NOISE_FLOOR, exclude_boundary=True)
    z.to_csv(out / files["zeroset"])
    manifest = {
        "command": command,
        "config": config_to_dict(config),
        "seed": seed,
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z", time.localtime(started)),
        "finished": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "revision": _revision(),
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


# ---------------------------------------------------------------------------
# commands

def cmd_simulate(args) -> int:
    config = load_config(args.config)
    started = time.time()
    try:
        res = minimize_multistart(config, seed=args.seed)
    except NoConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.best is not None and args.out:
            write_outputs(exc.best, config, Path(args.out), "simulate", args.seed, started)
        return EXIT_NOCONV
    if args.out:
        write_outputs(res, config, Path(args.out), "simulate", args.seed, started)
    summary = res.summary()
    if args.json:
        print(json.dumps(summary, indent=2))
    else:
        for k, v in summary.items():
            print(f"{k:>14s}  {v}")
    return EXIT_OK


def cmd_thresholds(args) -> int:
    config = load_config(args.config)
    hyp = validate_hypotheses(config)
    if not hyp.passed:
        for name in hyp.failures:
            print(f"hypothesis violated: {name}: {hyp.details.get(name, '')}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    rep = thresholds.threshold_report(config)
    if args.json:
        print(json.dumps(rep.to_dict()))
        return EXIT_OK
    print(f"a_*          {rep.a_star:.12g}   at x = ({rep.argmin[0]:.6g}, {rep.argmin[1]:.6g})")
    print(f"middle bound {rep.middle_bound:.12g}")
    print(f"a^*          {rep.a_star_sup:.12g}   at x = ({rep.argmax[0]:.6g}, {rep.argmax[1]:.6g})")
    print(f"error bar    {rep.error_bar:.3g}")
    for w in rep.warnings:
        print(f"warning: {w}")
    print("\n      x2        a_*(x2)        a^*(x2)")
    for x2, lo, hi in rep.slices[:: max(1, len(rep.slices) // 12)]:
        print(f"{x2:9.5f}  {lo:13.8f}  {hi:13.8f}")
    return EXIT_OK


def _parse_tols(items) -> dict[str, float]:
    out = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--tol expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise InputError(f"--tol {name}: {value!r} is not a number") from None
    unknown = set(out) - set(acceptance.DEFAULT_LIMITS)
    if unknown:
        raise InputError(f"unknown tolerance(s) {sorted(unknown)}; known: {sorted(acceptance.DEFAULT_LIMITS)}")
    return out


def cmd_verify(args) -> int:
    base = load_config(args.config) if args.config else None
    lab = acceptance.Lab(_parse_tols(args.tol), cache_dir=args.cache, base=base)
    try:
        checks = acceptance.run_suite(lab, args.suite, only=args.only)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from None
    for c in checks:
        print(c.line(), flush=True)
    failed = [c for c in checks if not c.passed]
    if args.json:
        print(json.dumps([{"number": c.number, "name": c.name, "passed": c.passed, "summary": c.summary}
                          for c in checks], indent=2))
    if failed:
        print(f"{len(failed)} of {len(checks)} checks failed: " + ", ".join(f"[{c.number}] {c.name}" for c in failed),
              file=sys.stderr)
        return EXIT_VERIFY
    print(f"all {len(checks)} checks passed", file=sys.stderr)
    return EXIT_OK


def _parse_values(text: str | None) -> list[float]:
    if not text or not text.strip():
        raise InputError("--values needs at least one number")
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"--values: cannot parse {text!r}") from None


def _regrid(u: Field, grid: GridSpec) -> Field:
    if grid == u.grid:
        return u
    x1, x2 = grid.axes()
    v = field_spline(u)(x1, x2)
    v[[0, -1], :] = 0.0
    v[:, [0, -1]] = 0.0
    return Field(grid, v)


def _sweep_one(config, seed, out_dir, warm):
    """One sweep entry; returns (row, field or None)."""
    started = time.time()
    extra = None if warm is None else {"warm": _regrid(warm, config.grid)}
    row = {"status": "ok"}
    try:
        res = minimize_multistart(config, seed=seed, extra=extra)
    except NoConvergenceError as exc:
        row["status"] = f"no convergence: {exc}"
        res = exc.best
    if res is None:
        return row, None
    write_outputs(res, config, out_dir, "sweep", seed, started)
    report = thresholds.threshold_report(config) if config.a > 0 else None
    z = walls.extract_zero_set(res.field, walls.DEFAULT_NOISE_FLOOR, exclude_boundary=True)
    if report is not None:
        v = walls.wall_deviation(z, config, config.a, report)
        dev, regime = v.deviation_to_predicted, v.regime
    else:
        dev, regime = (0.0 if z.empty else float("inf")), "no_wall"
    row.update(energy=res.energy.total, renormalized=res.energy.renormalized, wall_deviation=dev,
               regime=regime, thomas_fermi_error=walls.thomas_fermi_error(res.field, config),
               initializer=res.initializer_label, converged=res.converged)
    return row, (res.field if res.converged else None)


def cmd_sweep(args) -> int:
    base = load_config(args.config)
    values = _parse_values(args.values)
    out = Path(args.out or "sweep_out")
    configs = []
    for v in values:
        if args.param == "epsilon":
            grid = GridSpec.for_epsilon(v, base.grid.half_extent) if args.auto_grid else base.grid
            configs.append(base.with_(epsilon=v, grid=grid))
        else:
            configs.append(base.with_(a=v))
    dirs = [out / f"run_{i:03d}_{args.param}_{v:g}" for i, v in enumerate(values)]
    rows = []
    if args.jobs > 1:
        # independent runs, no warm starts across processes
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futs = [pool.submit(_sweep_one, c, args.seed, d, None) for c, d in zip(configs, dirs)]
            for f in futs:
                try:
                    rows.append(f.result()[0])
                except Exception as exc:  # recorded, not fatal
                    rows.append({"status": f"error: {exc}"})
    else:
        warm = None
        for c, d in zip(configs, dirs):
            try:
                row, warm_next = _sweep_one(c, args.seed, d, warm)
            except Exception as exc:
                log.exception("sweep entry failed")
                row, warm_next = {"status": f"error: {exc}"}, None
            warm = warm_next if warm_next is not None else warm
            rows.append(row)
            print(f"{args.param}={c.epsilon if args.param == 'epsilon' else c.a:g}: "
                  f"{row.get('regime', '-')} E={row.get('energy', float('nan')):.8g} [{row['status']}]", flush=True)
    out.mkdir(parents=True, exist_ok=True)
    cols = ["value", "energy", "renormalized", "wall_deviation", "regime", "thomas_fermi_error",
            "initializer", "converged", "status"]
    with open(out / "sweep_summary.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(cols)
        for v, row in zip(values, rows):
            cells = [v] + [row.get(k, "") for k in cols[1:]]
            wr.writerow([_fmt(x) if isinstance(x, float) else x for x in cells])
    return EXIT_OK if any(r["status"] == "ok" for r in rows) else EXIT_NOCONV


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nematic-walls", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="minimize the energy and export the minimizer")
    s.add_argument("--config")
    s.add_argument("--out")
    s.add_argument("--json", action="store_true")
    s.add_argument("--seed", type=int, default=RANDOM_SEED)
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("thresholds", help="critical forcing amplitudes for a profile")
    t.add_argument("--config")
    t.add_argument("--json", action="store_true")
    t.set_defaults(func=cmd_thresholds)

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--config")
    v.add_argument("--suite", choices=sorted(acceptance.SUITES), default="full")
    v.add_argument("--tol", action="append", metavar="NAME=VALUE", help="override one acceptance tolerance")
    v.add_argument("--cache", help="directory for cached minimizers")
    v.add_argument("--only", type=int, nargs="+", metavar="N", help="run only these check numbers")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep", help="simulate over a list of epsilon or a values")
    w.add_argument("--config")
    w.add_argument("--param", choices=("epsilon", "a"), required=True)
    w.add_argument("--values", required=True, help="comma-separated list")
    w.add_argument("--out")
    w.add_argument("--jobs", type=int, default=1)
    w.add_argument("--seed", type=int, default=RANDOM_SEED)
    w.add_argument("--fixed-grid", dest="auto_grid", action="store_false",
                   help="keep the config grid for every epsilon instead of scaling it")
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
