"""Command-line front end: ``massart {learn,baselines,lowerbounds,verify}``.

A run is described by one JSON document with the sections ``geometry``,
``noise``, ``schedule``, ``solver`` and ``experiment``; command-line flags
override individual fields. Every output file records the SHA-256 of the
resolved config and the seed, contains no timestamps, and is written
atomically, so the same config and seed reproduce identical bytes.

Exit codes: 0 success, 1 invalid config or unknown check, 2 flagged
rounds or failing checks.
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import lower_bounds as lb
from . import verify as vf
from .geometry import angle, sample_unit_ball
from .learners import (Oracle, average_initializer, average_learner, margin_based_learn,
                       one_shot_hinge, paper_schedule, practical_schedule)
from .losses import excess_error_mc
from .noise import instance_from_config, label
from .solver import SolverOptions

EXIT_OK, EXIT_CONFIG, EXIT_FLAGGED = 0, 1, 2
SECTIONS = ("geometry", "noise", "schedule", "solver", "experiment")
ROUND_COLUMNS = ["k", "angle_rad", "excess_err", "labels", "unlabeled", "hinge", "converged"]

BASE_CONFIG = {
    "geometry": {"d": 5},
    "noise": {"kind": "rcn", "eta": 0.05},
    "schedule": {"kind": "practical", "epsilon": 0.05, "delta": 0.1, "lam": 0.5,
                 "c_band": 1.5, "tau_ratio": 0.5, "m_scale": 5.0},
    "solver": asdict(SolverOptions()),
    "experiment": {"seed": 0},
}

COMMAND_DEFAULTS = {
    "learn": {"experiment": {"init_samples": 10_000, "excess_samples": 1_000_000}},
    "baselines": {"geometry": {"d": 2}, "noise": {"kind": "quadrant", "beta": 0.5},
                  "experiment": {"samples": 100_000, "trials": 20, "tau": 1.0,
                                 "excess_samples": 200_000}},
    "lowerbounds": {"geometry": {"d": 2}, "noise": {"kind": "wedge", "alpha": math.pi / 6},
                    "experiment": {"tau": 1.0, "samples": 1_000_000,
                                   "etas": [0.1, 0.15, 0.2, 0.25, 0.3, 0.4],
                                   "betas": [0.25, 0.5, 0.9]}},
    "verify": {"experiment": {"samples": 10_000_000, "sigmas": vf.SIGMAS,
                              "checks": None, "gen_m": 100_000, "gen_trials": 20}},
}


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------- config


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if key not in SECTIONS:
            raise ConfigError(f"unknown config section {key!r}")
        if not isinstance(val, dict):
            raise ConfigError(f"config section {key!r} must be an object")
        out.setdefault(key, {}).update(copy.deepcopy(val))
    return out


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then the command's defaults, then ``--config``, then flags."""
    cfg = _merge(BASE_CONFIG, COMMAND_DEFAULTS[command])
    if args.config:
        try:
            user = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        cfg = _merge(cfg, user)
        # a user-supplied noise model replaces the default one wholesale
        if "noise" in user:
            cfg["noise"] = copy.deepcopy(user["noise"])
    if args.seed is not None:
        cfg["experiment"]["seed"] = args.seed
    if args.d is not None:
        cfg["geometry"]["d"] = args.d
    if args.epsilon is not None:
        cfg["schedule"]["epsilon"] = args.epsilon
    if args.schedule is not None:
        cfg["schedule"]["kind"] = args.schedule
    if args.beta is not None:
        cfg["noise"].pop("eta", None)
        cfg["noise"]["beta"] = args.beta
    if args.alpha is not None:
        cfg["noise"]["alpha"] = args.alpha
    if args.tau is not None:
        cfg["experiment"]["tau"] = args.tau
    if args.samples is not None:
        cfg["experiment"]["samples"] = args.samples
    seed = cfg["experiment"]["seed"]
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _instance(cfg):
    noise = dict(cfg["noise"], d=cfg["geometry"]["d"])
    if "beta" in noise and not 0.0 < float(noise["beta"]) <= 1.0:
        raise ConfigError(f"beta must lie in (0, 1], got {noise['beta']}")
    return instance_from_config(noise)


def _solver(cfg):
    try:
        return SolverOptions(**cfg["solver"])
    except TypeError as exc:
        raise ConfigError(f"bad solver section: {exc}") from exc


def _schedule(cfg):
    s = dict(cfg["schedule"])
    d = cfg["geometry"]["d"]
    kind = s.pop("kind")
    eps, delta = float(s.pop("epsilon")), float(s.pop("delta"))
    if kind == "paper":
        return paper_schedule(d, eps, delta, c_m=float(s.get("m_scale", 5.0)))
    if kind == "practical":
        return practical_schedule(d, eps, delta, **s)
    raise ConfigError(f"unknown schedule kind {kind!r}")


# ----------------------------------------------------------------- output


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_json(path: Path, payload: dict) -> None:
    _atomic_write(path, json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n")


def write_csv(path: Path, header: list, rows: list, digest: str, seed: int) -> None:
    buf = io.StringIO()
    buf.write(f"# config_sha256={digest} seed={seed}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        row = [v.item() if isinstance(v, np.generic) else v for v in row]
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    _atomic_write(path, buf.getvalue())


# --------------------------------------------------------------- commands


def cmd_learn(cfg: dict, out: Path) -> int:
    exp = cfg["experiment"]
    seed = exp["seed"]
    inst = _instance(cfg)
    schedule = _schedule(cfg)
    solver = _solver(cfg)
    rng = np.random.default_rng(seed)
    oracle = Oracle(inst, rng)
    w0 = average_initializer(oracle, int(exp.get("samples", exp["init_samples"])))
    init_labels = oracle.labels_used
    report = margin_based_learn(oracle, schedule, w0, solver)
    excess, stderr = excess_error_mc(report.final_w, inst, int(exp["excess_samples"]), rng)

    digest = config_hash(cfg)
    rows = [[r.k, r.angle_to_target, r.angle_to_target / math.pi, r.labels_used,
             r.unlabeled_drawn, r.hinge_achieved, int(r.converged)] for r in report.per_round]
    write_csv(out / "rounds.csv", ROUND_COLUMNS, rows, digest, seed)
    write_json(out / "runreport.json", {
        "config": cfg, "config_sha256": digest, "seed": seed,
        "schedule": schedule.to_config(),
        "initial_angle": report.initial_angle, "initializer_labels": init_labels,
        "final_w": report.final_w, "final_angle": report.final_angle,
        "final_disagreement": report.final_angle / math.pi,
        "excess_error_mc": excess, "excess_error_stderr": stderr,
        "total_labels": report.total_labels, "total_unlabeled": report.total_unlabeled,
        "flagged": report.flagged,
        "per_round": [asdict(r) for r in report.per_round],
    })
    print(f"final angle {report.final_angle:.6g} rad, excess {excess:.4g} +- {stderr:.2g}, "
          f"labels {report.total_labels}, flagged {report.flagged}")
    return EXIT_FLAGGED if report.flagged else EXIT_OK


def cmd_baselines(cfg: dict, out: Path) -> int:
    exp = cfg["experiment"]
    seed = exp["seed"]
    tau = float(exp["tau"])
    noise = cfg["noise"]
    reference = None
    if noise.get("kind") == "wedge" and "alpha" not in noise:
        eta = noise["eta"] if "eta" in noise else (1 - noise["beta"]) / 2
        cfg["noise"]["alpha"] = lb.choose_alpha(tau, float(eta))
    inst = _instance(cfg)
    if inst.kind == "quadrant":
        reference = lb.average_drift_angle(inst.beta)
    elif inst.kind == "wedge":
        reference = inst.params["alpha"]
    solver = _solver(cfg)
    m = int(exp["samples"])
    rows = []
    for t in range(int(exp["trials"])):
        rng = np.random.default_rng([seed, t])
        X = sample_unit_ball(inst.dimension, rng, m)
        y = label(inst, X, rng)
        w_avg = average_learner(X, y)
        w_avg = w_avg / np.linalg.norm(w_avg)
        w_hinge, _ = one_shot_hinge(X, y, tau, solver)
        for method, w in (("average", w_avg), ("hinge", w_hinge)):
            if w is None:
                rows.append([method, t, float("nan"), float("nan"), float("nan")])
                continue
            exc, se = excess_error_mc(w, inst, int(exp["excess_samples"]), rng)
            rows.append([method, t, angle(w, inst.target), exc, se])

    digest = config_hash(cfg)
    write_csv(out / "baselines.csv", ["method", "trial", "angle_rad", "excess_err",
                                      "excess_stderr"], rows, digest, seed)
    summary = {}
    for method in ("average", "hinge"):
        angles = np.array([r[2] for r in rows if r[0] == method])
        excess = np.array([r[3] for r in rows if r[0] == method])
        summary[method] = {"mean_angle": float(np.nanmean(angles)),
                           "min_angle": float(np.nanmin(angles)),
                           "mean_excess": float(np.nanmean(excess))}
    write_json(out / "baselines.json", {"config": cfg, "config_sha256": digest, "seed": seed,
                                        "reference_angle": reference, "summary": summary})
    for method, s in summary.items():
        print(f"{method}: mean angle {s['mean_angle']:.6g} rad, "
              f"mean excess {s['mean_excess']:.4g}")
    return EXIT_OK


def cmd_lowerbounds(cfg: dict, out: Path) -> int:
    exp = cfg["experiment"]
    seed = exp["seed"]
    alpha = float(cfg["noise"].get("alpha", math.pi / 6))
    tau = float(exp["tau"])
    n = int(exp["samples"])
    rng = np.random.default_rng(seed)
    e1 = lb.eta1(alpha)
    e2 = lb.eta2(alpha, tau) if tau < 1 else float("nan")

    gap_rows = []
    reports = []
    for eta in exp["etas"]:
        cert = lb.certify_gap(alpha, float(eta), tau)
        mc = lb.mc_hinge_by_region(alpha, float(eta), tau, n, rng)
        gap_rows.append([float(eta), cert["gap"], cert["upper_bound"], cert["status"],
                         mc.gap, mc.stderr["gap"]])
        reports.append({"closed_form": asdict(lb.closed_form_report(alpha, float(eta), tau)),
                        "monte_carlo": asdict(mc)})
    closed = lb.hinge_areas(alpha, tau)
    mc = lb.mc_hinge_by_region(alpha, float(exp["etas"][0]), tau, n, rng)
    region_rows = [[name, getattr(closed, name), getattr(mc, name), mc.stderr[name]]
                   for name in ("cA", "dA", "cB", "dB", "cC", "dC", "cD", "dD")]
    avg_rows = []
    for beta in exp["betas"]:
        angle_version, closed_version = lb.average_excess_lower(float(beta))
        avg_rows.append([float(beta), lb.average_drift_angle(float(beta)), angle_version,
                         closed_version])

    digest = config_hash(cfg)
    write_csv(out / "hinge_gap.csv", ["eta", "gap_closed", "gap_upper", "status", "gap_mc",
                                      "gap_mc_stderr"], gap_rows, digest, seed)
    write_csv(out / "regions.csv", ["region", "closed", "mc", "mc_stderr"], region_rows,
              digest, seed)
    write_csv(out / "average.csv", ["beta", "drift_angle", "excess_angle_form",
                                    "excess_closed_form"], avg_rows, digest, seed)
    write_json(out / "lowerbounds.json", {
        "config": cfg, "config_sha256": digest, "seed": seed, "alpha": alpha, "tau": tau,
        "eta1": e1, "eta2": e2, "threshold_eta": lb.threshold_eta(alpha, tau),
        "reports": reports})
    print(f"alpha {alpha:.6g} tau {tau:.6g}: eta1 {e1:.6g} eta2 {e2:.6g}")
    return EXIT_OK


def _verify_registry(exp: dict) -> dict:
    from .learners import PAPER_C_BAND, PAPER_TAU_RATIO, paper_schedule as _paper

    n = int(exp["samples"])
    m_band = _paper(25, 0.5, 0.1).labels(1)

    def error_in_band(rng):
        return [vf.check_lemma_error_in_band(25, beta, PAPER_C_BAND, PAPER_TAU_RATIO, m_band, n,
                                             rng)
                for beta in (1.0, 1 - 3.6e-6)]

    return {
        "theorem_inequality": lambda rng: [vf.check_theorem_inequality()],
        "lemma_Lwstar": lambda rng: [vf.check_lemma_Lwstar(25, PAPER_C_BAND, PAPER_TAU_RATIO,
                                                           n, rng)],
        "lemma_clean_dirty": lambda rng: [vf.check_lemma_clean_dirty(
            25, 0.99, PAPER_C_BAND, PAPER_TAU_RATIO, n, rng)],
        "lemma_error_in_band": error_in_band,
        "band_lemmas": lambda rng: vf.check_band_lemmas(None, rng, n=n),
        "generalization": lambda rng: [vf.check_generalization(
            5, 1, 0.1, int(exp["gen_trials"]), rng, m=int(exp["gen_m"]),
            n_true=min(2_000_000, n))],
    }


def cmd_verify(cfg: dict, out: Path) -> int:
    exp = cfg["experiment"]
    seed = exp["seed"]
    registry = _verify_registry(exp)
    names = exp["checks"] or list(registry)
    unknown = [c for c in names if c not in registry]
    if unknown:
        raise ConfigError(f"unknown check(s): {', '.join(unknown)}; "
                          f"known: {', '.join(registry)}")
    results = []
    order = list(registry)
    for name in names:
        # one independent stream per check, fixed by its registry position
        rng = np.random.default_rng([seed, order.index(name)])
        for res in registry[name](rng):
            results.append(vf.rejudge(res, float(exp["sigmas"])))
    records = []
    for res in results:
        rec = res.as_dict()
        rec["pass"] = rec.pop("passed")
        records.append(rec)
    failing = [r for r in results if not r.passed and not r.report_only]
    digest = config_hash(cfg)
    write_json(out / "verify.json", {"config": cfg, "config_sha256": digest, "seed": seed,
                                     "all_pass": not failing, "results": records})
    for res in results:
        status = "PASS" if res.passed else ("REPORT" if res.report_only else "FAIL")
        print(f"{status} {res.check} statistic={res.statistic:.6g} bound={res.bound:.6g} "
              f"sigma={res.sigma:.2g}")
    return EXIT_FLAGGED if failing else EXIT_OK


COMMANDS = {"learn": cmd_learn, "baselines": cmd_baselines, "lowerbounds": cmd_lowerbounds,
            "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="massart",
        description="Active learning of halfspaces under Massart noise: experiments and checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"learn": "run the margin-based learner",
             "baselines": "compare Average and one-shot hinge minimization",
             "lowerbounds": "closed-form vs Monte-Carlo tables for the negative results",
             "verify": "run the lemma checks"}
    for name, text in helps.items():
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", help="JSON config with geometry/noise/schedule/solver/"
                                        "experiment sections")
        p.add_argument("--seed", type=int, help="unsigned 64-bit seed")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--d", type=int, help="dimension")
        p.add_argument("--epsilon", type=float, help="target excess error")
        p.add_argument("--beta", type=float, help="Massart parameter")
        p.add_argument("--alpha", type=float, help="wedge angle in radians")
        p.add_argument("--tau", type=float, help="hinge scale for baselines/lowerbounds")
        p.add_argument("--schedule", choices=["paper", "practical"])
        p.add_argument("--samples", type=int,
                       help="sample count (initializer, baseline m, or Monte-Carlo n)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        return COMMANDS[args.command](cfg, Path(args.out))
    except (ConfigError, ValueError, KeyError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
