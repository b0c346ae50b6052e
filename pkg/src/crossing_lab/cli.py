"""Experiment runner: JSON config in, CSV/JSON artifacts plus a manifest out.

Subcommands: simulate | crossings | tv-decay | lln | overshoot |
verify-minorization | objective | optimize-grid | optimize-kw.  Every run
writes its artifacts into the output directory together with manifest.json
(resolved config, config hash, seed, version, wall time), and a rerun with
the same config and seed reproduces the numeric CSV fields byte for byte.
Floats are serialized with repr, i.e. full round-trip precision.

Exit codes: 1 for an invalid config (the message names the offending field),
2 when a step budget is exhausted.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from ._engine import stream_records
from .errors import ConfigError, CrossingLabError, InvalidSpecError, PathBudgetExceededError
from .ergodics import (UBox, ZBox, lln_average, tv_decay_experiment, verify_minorization)
from .kernels import FAMILIES, Kernel, KernelSpec, build_kernel
from .optimizer import KwConfig, ThresholdBox, grid_search, kiefer_wolfowitz
from .trading import PenaltySpec, UtilitySpec, long_run_objective, objective_trace
from .walk import Thresholds, extract_crossings, extract_crossings_mirrored, \
    extract_overshoots, simulate_path

__all__ = ["main", "load_config", "run"]

SUBCOMMANDS = ("simulate", "crossings", "tv-decay", "lln", "overshoot",
               "verify-minorization", "objective", "optimize-grid", "optimize-kw")

PHI_CHOICES = {
    "exp_neg_duration": lambda rec, scale: float(np.exp(-rec.duration / scale)),
    "capped_profit": lambda rec, scale: float(min(rec.s_at_l - rec.s_at_t, scale)),
}


# -- config ---------------------------------------------------------------------


def _require(cfg: dict, key: str, types, where: str):
    if key not in cfg:
        raise ConfigError(f"{where}{key}", "missing required field")
    val = cfg[key]
    if types is not None and not isinstance(val, types):
        raise ConfigError(f"{where}{key}", f"expected {types}, got {type(val).__name__}")
    return val


def _reject_unknown(cfg: dict, allowed: set, where: str):
    unknown = set(cfg) - allowed
    if unknown:
        raise ConfigError(f"{where}{sorted(unknown)[0]}", "unknown key")


def _interval(raw, where: str) -> tuple[float, float]:
    if not (isinstance(raw, (list, tuple)) and len(raw) == 2):
        raise ConfigError(where, "expected a [lo, hi] pair")
    return float(raw[0]), float(raw[1])


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"invalid JSON: {exc}")
    if not isinstance(cfg, dict):
        raise ConfigError("config", "top level must be an object")
    return cfg


def validate_config(cfg: dict) -> dict:
    """Structural validation shared by all subcommands; returns cfg unchanged."""
    _reject_unknown(cfg, {"seed", "out_dir", "workers", "max_steps", "kernel",
                          "thresholds", "mu", "simulate", "diagnostics", "lln",
                          "overshoot", "minorization", "trading", "optimizer"}, "")
    seed = _require(cfg, "seed", int, "")
    if isinstance(seed, bool) or seed < 0:
        raise ConfigError("seed", "must be a nonnegative integer")
    if "workers" in cfg and (not isinstance(cfg["workers"], int) or cfg["workers"] < 1):
        raise ConfigError("workers", "must be a positive integer")
    if "max_steps" in cfg and (not isinstance(cfg["max_steps"], int) or cfg["max_steps"] < 1):
        raise ConfigError("max_steps", "must be a positive integer")
    return cfg


def _kernel_from(cfg: dict) -> Kernel:
    raw = _require(cfg, "kernel", dict, "")
    _reject_unknown(raw, {"family", "alpha", "regen_width", "bound", "shape_params"},
                    "kernel.")
    family = _require(raw, "family", str, "kernel.")
    if family not in FAMILIES:
        raise ConfigError("kernel.family", f"must be one of {FAMILIES}")
    spec = KernelSpec(family=family,
                      alpha=float(_require(raw, "alpha", (int, float), "kernel.")),
                      regen_width=float(_require(raw, "regen_width", (int, float), "kernel.")),
                      bound=float(_require(raw, "bound", (int, float), "kernel.")),
                      shape_params=raw.get("shape_params", {}))
    try:
        return build_kernel(spec)
    except InvalidSpecError as exc:
        raise ConfigError(f"kernel.{exc.field}", str(exc))


def _thresholds_from(cfg: dict) -> Thresholds:
    raw = _require(cfg, "thresholds", dict, "")
    _reject_unknown(raw, {"lower", "upper", "boundary"}, "thresholds.")
    try:
        return Thresholds(lower=float(_require(raw, "lower", (int, float), "thresholds.")),
                          upper=float(_require(raw, "upper", (int, float), "thresholds.")),
                          boundary=raw.get("boundary", "strict"))
    except ValueError as exc:
        raise ConfigError("thresholds", str(exc))


def _utility_from(raw: dict) -> UtilitySpec:
    _reject_unknown(raw, {"kind", "param", "domain"}, "trading.utility.")
    try:
        return UtilitySpec(kind=_require(raw, "kind", str, "trading.utility."),
                           param=float(_require(raw, "param", (int, float), "trading.utility.")),
                           domain=raw.get("domain", "wealth"))
    except InvalidSpecError as exc:
        raise ConfigError(f"trading.{exc.field}", str(exc))


def _penalty_from(raw: dict) -> PenaltySpec:
    _reject_unknown(raw, {"kind", "slope", "cap"}, "trading.penalty.")
    try:
        return PenaltySpec(kind=_require(raw, "kind", str, "trading.penalty."),
                           slope=float(raw.get("slope", 0.0)), cap=float(raw.get("cap", 0.0)))
    except InvalidSpecError as exc:
        raise ConfigError(f"trading.{exc.field}", str(exc))


# -- artifact helpers --------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


# -- subcommand bodies ---------------------------------------------------------------


def _records_csv_rows(records):
    for r in records:
        yield (r.index, r.t_idx, r.l_idx, r.x_at_t, r.s_at_t, r.x_at_l, r.s_at_l,
               r.duration, r.in_state_space)


def _cmd_simulate(cfg, out, workers):
    kernel = _kernel_from(cfg)
    raw = _require(cfg, "simulate", dict, "")
    _reject_unknown(raw, {"s0", "x0", "n_steps"}, "simulate.")
    n_steps = _require(raw, "n_steps", int, "simulate.")
    if n_steps < 1:
        raise ConfigError("simulate.n_steps", "must be >= 1")
    path = simulate_path(kernel, float(raw.get("s0", 0.0)), float(raw.get("x0", 0.0)),
                         n_steps, cfg["seed"])
    rows = [(0, path.x0, path.s0, 0)]
    rows += [(i + 1, path.increments[i], path.partial_sums[i], bool(path.regen_flags[i]))
             for i in range(n_steps)]
    _write_csv(out / "path.csv", ["step", "x", "s", "regen"], rows)
    return ["path.csv"]


def _cmd_crossings(cfg, out, workers):
    kernel = _kernel_from(cfg)
    thr = _thresholds_from(cfg)
    raw = _require(cfg, "simulate", dict, "")
    path = simulate_path(kernel, float(raw.get("s0", 0.0)), float(raw.get("x0", 0.0)),
                         _require(raw, "n_steps", int, "simulate."), cfg["seed"])
    side = cfg.get("trading", {}).get("side", "long")
    extract = extract_crossings_mirrored if side == "short" else extract_crossings
    records = extract(path, thr)
    _write_csv(out / "crossings.csv",
               ["index", "t_idx", "l_idx", "x_at_t", "s_at_t", "x_at_l", "s_at_l",
                "duration", "in_state_space"],
               _records_csv_rows(records))
    return ["crossings.csv"]


def _cmd_tv_decay(cfg, out, workers):
    kernel = _kernel_from(cfg)
    raw = _require(cfg, "diagnostics", dict, "")
    _reject_unknown(raw, {"chain", "n_list", "replicates", "bins", "m_max",
                          "init_pair", "step_cap"}, "diagnostics.")
    chain = _require(raw, "chain", str, "diagnostics.")
    if chain not in ("U", "U_mirrored", "O", "X"):
        raise ConfigError("diagnostics.chain", "must be one of U, U_mirrored, O, X")
    if chain in ("U", "U_mirrored") or "thresholds" in cfg:
        thr = _thresholds_from(cfg)
    else:
        thr = None
    init_pair = _require(raw, "init_pair", list, "diagnostics.")
    if len(init_pair) != 2:
        raise ConfigError("diagnostics.init_pair", "expected two [s0, x0] pairs")
    series = tv_decay_experiment(
        kernel, thr, chain, [tuple(map(float, p)) for p in init_pair],
        _require(raw, "n_list", list, "diagnostics."),
        _require(raw, "replicates", int, "diagnostics."),
        cfg["seed"], bins=raw.get("bins"), m_max=raw.get("m_max", 8),
        step_cap=raw.get("step_cap", 1 << 15), workers=workers)
    _write_csv(out / "tv_decay.csv", ["n", "tv", "stderr"],
               zip(series.indices.tolist(), series.tv, series.stderr))
    _write_json(out / "tv_decay.json", {
        "fitted_rate": series.fitted_rate, "fit_window": series.fit_window,
        "noise_floor": series.noise_floor, "control_tv": series.control_tv.tolist(),
        **series.meta})
    return ["tv_decay.csv", "tv_decay.json"]


def _cmd_lln(cfg, out, workers):
    kernel = _kernel_from(cfg)
    thr = _thresholds_from(cfg)
    raw = _require(cfg, "lln", dict, "")
    _reject_unknown(raw, {"n_cycles", "phi", "phi_scale", "s0", "x0", "step_cap"}, "lln.")
    n_cycles = _require(raw, "n_cycles", int, "lln.")
    phi_name = raw.get("phi", "exp_neg_duration")
    if phi_name not in PHI_CHOICES:
        raise ConfigError("lln.phi", f"must be one of {sorted(PHI_CHOICES)}")
    scale = float(raw.get("phi_scale", 8.0))
    records, steps = stream_records(
        kernel, thr.lower, thr.upper, weak=thr.boundary == "weak",
        s0=float(raw.get("s0", 0.0)), x0=float(raw.get("x0", 0.0)), seed=cfg["seed"],
        max_records=n_cycles + 1, step_cap=raw.get("step_cap", cfg.get("max_steps", 10 ** 8)))
    counted = [r for r in records if r.in_state_space][:n_cycles]
    if len(counted) < n_cycles:
        raise PathBudgetExceededError(len(counted), n_cycles, steps)
    phi = np.array([PHI_CHOICES[phi_name](r, scale) for r in counted])
    running = lln_average(phi)
    _write_csv(out / "lln.csv", ["cycle", "phi", "running_mean"],
               zip(range(1, len(phi) + 1), phi, running))
    from .ergodics import batch_means_stderr
    _write_json(out / "lln.json", {
        "phi": phi_name, "phi_scale": scale, "n_cycles": len(phi),
        "final_mean": float(running[-1]), "stderr": batch_means_stderr(phi),
        "steps_used": steps})
    return ["lln.csv", "lln.json"]


def _cmd_overshoot(cfg, out, workers):
    kernel = _kernel_from(cfg)
    raw = _require(cfg, "overshoot", dict, "")
    _reject_unknown(raw, {"boundary", "n_steps", "s0", "x0"}, "overshoot.")
    n_steps = _require(raw, "n_steps", int, "overshoot.")
    path = simulate_path(kernel, float(raw.get("s0", 0.0)), float(raw.get("x0", 0.0)),
                         n_steps, cfg["seed"])
    o0, records = extract_overshoots(path, raw.get("boundary", "strict"))
    _write_csv(out / "overshoots.csv", ["index", "l_idx", "x_at_l", "o"],
               ((r.index, r.l_idx, r.x_at_l, r.o) for r in records))
    _write_json(out / "overshoot.json", {"o0": o0, "n_records": len(records),
                                         "boundary": raw.get("boundary", "strict")})
    return ["overshoots.csv", "overshoot.json"]


def _parse_boxes(raw_boxes, chain: str):
    boxes = []
    for i, b in enumerate(raw_boxes):
        where = f"minorization.boxes[{i}]."
        if chain == "Z":
            _reject_unknown(b, {"x_at_l", "o"}, where)
            boxes.append(ZBox(x_at_l=_interval(_require(b, "x_at_l", list, where), where + "x_at_l"),
                              o=_interval(_require(b, "o", list, where), where + "o")))
        else:
            _reject_unknown(b, {"x_at_t", "s_at_t", "x_at_l", "s_at_l", "durations"}, where)
            boxes.append(UBox(
                x_at_t=_interval(_require(b, "x_at_t", list, where), where + "x_at_t"),
                s_at_t=_interval(_require(b, "s_at_t", list, where), where + "s_at_t"),
                x_at_l=_interval(_require(b, "x_at_l", list, where), where + "x_at_l"),
                s_at_l=_interval(_require(b, "s_at_l", list, where), where + "s_at_l"),
                durations=tuple(int(d) for d in _require(b, "durations", list, where))))
    return boxes


def _cmd_verify_minorization(cfg, out, workers):
    kernel = _kernel_from(cfg)
    raw = _require(cfg, "minorization", dict, "")
    _reject_unknown(raw, {"chain", "gamma", "inflate", "replicates", "step_cap",
                          "probes", "boxes"}, "minorization.")
    chain = _require(raw, "chain", str, "minorization.")
    if chain not in ("U", "Z"):
        raise ConfigError("minorization.chain", "must be 'U' or 'Z'")
    thr = _thresholds_from(cfg) if chain == "U" else None
    probes = [tuple(map(float, p)) for p in _require(raw, "probes", list, "minorization.")]
    boxes = _parse_boxes(_require(raw, "boxes", list, "minorization."), chain)
    report = verify_minorization(
        kernel, thr, chain, probes, boxes,
        _require(raw, "replicates", int, "minorization."), cfg["seed"],
        gamma=raw.get("gamma"), inflate=float(raw.get("inflate", 1.0)),
        step_cap=raw.get("step_cap", 1 << 14), workers=workers)
    _write_json(out / "minorization_report.json", {
        "chain": report.chain, "gamma": report.gamma, "inflate": report.inflate,
        "replicates": report.replicates, "n_violations": report.n_violations,
        "checks": report.to_rows()})
    return ["minorization_report.json"]


def _trading_pieces(cfg):
    raw = _require(cfg, "trading", dict, "")
    _reject_unknown(raw, {"utility", "penalty", "variant", "side", "n_cycles",
                          "s0", "x0"}, "trading.")
    u = _utility_from(_require(raw, "utility", dict, "trading."))
    p = _penalty_from(_require(raw, "penalty", dict, "trading."))
    variant = raw.get("variant", "level")
    if variant not in ("level", "logprice"):
        raise ConfigError("trading.variant", "must be 'level' or 'logprice'")
    side = raw.get("side", "long")
    if side not in ("long", "short"):
        raise ConfigError("trading.side", "must be 'long' or 'short'")
    return raw, u, p, variant, side


def _cmd_objective(cfg, out, workers):
    kernel = _kernel_from(cfg)
    thr = _thresholds_from(cfg)
    raw, u, p, variant, side = _trading_pieces(cfg)
    mu = float(cfg.get("mu", 0.0))
    n_cycles = _require(raw, "n_cycles", int, "trading.")
    counted, terms = objective_trace(kernel, thr, u, p, mu, variant, side, n_cycles,
                                     cfg["seed"], s0=float(raw.get("s0", 0.0)),
                                     x0=float(raw.get("x0", 0.0)),
                                     step_cap=cfg.get("max_steps", 10 ** 8))
    running = lln_average(terms)
    from .ergodics import batch_means_stderr
    from .trading import cycle_profit
    _write_csv(out / "objective.csv",
               ["cycle", "profit", "duration", "term", "running_mean"],
               ((i + 1, cycle_profit(r, mu, side), r.duration, terms[i], running[i])
                for i, r in enumerate(counted)))
    _write_json(out / "objective.json", {
        "mean": float(terms.mean()), "stderr": batch_means_stderr(terms),
        "n_cycles": len(terms), "variant": variant, "side": side, "mu": mu})
    return ["objective.csv", "objective.json"]


def _optimizer_box(raw: dict, kernel: Kernel) -> ThresholdBox:
    _reject_unknown(raw, {"lower_range", "upper_range", "grid_counts", "margin"},
                    "optimizer.box.")
    try:
        box = ThresholdBox(
            lower_range=_interval(_require(raw, "lower_range", list, "optimizer.box."),
                                  "optimizer.box.lower_range"),
            upper_range=_interval(_require(raw, "upper_range", list, "optimizer.box."),
                                  "optimizer.box.upper_range"),
            grid_counts=tuple(raw.get("grid_counts", [5, 5])))
        box.require_margin(float(raw.get("margin", kernel.regen_width / 10.0)))
    except InvalidSpecError as exc:
        raise ConfigError(f"optimizer.box.{exc.field}", str(exc))
    return box


def _make_evaluator(cfg, kernel, u, p, variant, side, mu, s0, x0):
    step_cap = cfg.get("max_steps", 10 ** 8)

    def evaluator(theta, n_cycles, seed):
        thr = Thresholds(lower=theta[0], upper=theta[1])
        return long_run_objective(kernel, thr, u, p, mu, variant, side, n_cycles,
                                  seed, s0=s0, x0=x0, step_cap=step_cap)

    return evaluator


def _cmd_optimize_grid(cfg, out, workers):
    kernel = _kernel_from(cfg)
    raw_opt = _require(cfg, "optimizer", dict, "")
    _reject_unknown(raw_opt, {"box", "n_cycles", "kw"}, "optimizer.")
    box = _optimizer_box(_require(raw_opt, "box", dict, "optimizer."), kernel)
    raw, u, p, variant, side = _trading_pieces(cfg)
    evaluator = _make_evaluator(cfg, kernel, u, p, variant, side,
                                float(cfg.get("mu", 0.0)),
                                float(raw.get("s0", 0.0)), float(raw.get("x0", 0.0)))
    result = grid_search(evaluator, box,
                         _require(raw_opt, "n_cycles", int, "optimizer."), cfg["seed"])
    _write_csv(out / "surface.csv",
               ["theta_lower", "theta_upper", "mean", "stderr", "n_cycles"],
               ((r["theta_lower"], r["theta_upper"], r["mean"], r["stderr"], r["n_cycles"])
                for r in result.table))
    _write_json(out / "grid_best.json", {
        "theta_lower": result.best[0], "theta_upper": result.best[1],
        "mean": result.best_estimate.mean, "stderr": result.best_estimate.stderr})
    return ["surface.csv", "grid_best.json"]


def _cmd_optimize_kw(cfg, out, workers):
    kernel = _kernel_from(cfg)
    raw_opt = _require(cfg, "optimizer", dict, "")
    box = _optimizer_box(_require(raw_opt, "box", dict, "optimizer."), kernel)
    raw_kw = _require(raw_opt, "kw", dict, "optimizer.")
    _reject_unknown(raw_kw, {"a0", "stability", "gamma_a", "c0", "gamma_c",
                             "iterations", "n_cycles", "theta0"}, "optimizer.kw.")
    theta0 = _interval(_require(raw_kw, "theta0", list, "optimizer.kw."),
                       "optimizer.kw.theta0")
    try:
        kw_cfg = KwConfig(a0=float(raw_kw.get("a0", 1.0)),
                          stability=float(raw_kw.get("stability", 10.0)),
                          gamma_a=float(raw_kw.get("gamma_a", 1.0)),
                          c0=float(raw_kw.get("c0", 0.5)),
                          gamma_c=float(raw_kw.get("gamma_c", 0.25)),
                          iterations=int(raw_kw.get("iterations", 500)),
                          n_cycles=int(raw_kw.get("n_cycles", 500)),
                          projection=box)
    except InvalidSpecError as exc:
        raise ConfigError(f"optimizer.{exc.field}", str(exc))
    raw, u, p, variant, side = _trading_pieces(cfg)
    evaluator = _make_evaluator(cfg, kernel, u, p, variant, side,
                                float(cfg.get("mu", 0.0)),
                                float(raw.get("s0", 0.0)), float(raw.get("x0", 0.0)))
    traj = kiefer_wolfowitz(evaluator, kw_cfg, theta0, cfg["seed"])
    _write_csv(out / "kw_trace.csv",
               ["iter", "theta_lower", "theta_upper", "grad_lower", "grad_upper", "value"],
               ((n + 1, traj.theta[n + 1, 0], traj.theta[n + 1, 1],
                 traj.gradients[n, 0], traj.gradients[n, 1], traj.values[n])
                for n in range(len(traj.values))))
    _write_json(out / "kw_final.json", {
        "theta_lower": traj.final[0], "theta_upper": traj.final[1],
        "iterations": len(traj.values)})
    return ["kw_trace.csv", "kw_final.json"]


_COMMANDS = {
    "simulate": _cmd_simulate,
    "crossings": _cmd_crossings,
    "tv-decay": _cmd_tv_decay,
    "lln": _cmd_lln,
    "overshoot": _cmd_overshoot,
    "verify-minorization": _cmd_verify_minorization,
    "objective": _cmd_objective,
    "optimize-grid": _cmd_optimize_grid,
    "optimize-kw": _cmd_optimize_kw,
}


def run(subcommand: str, config_path: str, *, seed=None, out_dir=None,
        workers=None, max_steps=None) -> int:
    """Programmatic entry point; returns the process exit status."""
    started = time.time()
    cfg = load_config(config_path)
    if seed is not None:
        cfg["seed"] = seed
    if max_steps is not None:
        cfg["max_steps"] = max_steps
    validate_config(cfg)
    if workers is None:
        workers = cfg.get("workers")
    if workers is None:
        env = os.environ.get("CROSSING_LAB_WORKERS")
        workers = int(env) if env else (os.cpu_count() or 1)
    out = Path(out_dir if out_dir is not None else cfg.get("out_dir", "out"))
    out.mkdir(parents=True, exist_ok=True)
    outputs = _COMMANDS[subcommand](cfg, out, workers)
    _write_json(out / "manifest.json", {
        "subcommand": subcommand,
        "config": cfg,
        "config_sha256": _config_hash(cfg),
        "seed": cfg["seed"],
        "version": __version__,
        "workers": workers,
        "wall_time_s": time.time() - started,
        "outputs": outputs,
    })
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="crossing-lab",
                                     description="threshold-crossing simulation lab")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", required=True, help="path to the JSON experiment config")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--max-steps", type=int, default=None)
    args = parser.parse_args(argv)
    try:
        return run(args.subcommand, args.config, seed=args.seed, out_dir=args.out,
                   workers=args.workers, max_steps=args.max_steps)
    except (ConfigError, InvalidSpecError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PathBudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CrossingLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
