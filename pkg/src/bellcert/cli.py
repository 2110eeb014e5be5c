"""Command-line front end.

Every subcommand prints a human-readable table, or with ``--json`` a JSON
document ``{"schema_version", "command", "result"}`` validated by the schemas
shipped in ``bellcert/schemas``.  Options may also come from ``--config FILE``
(``key = value`` lines, ``#`` comments); explicit flags win over the file,
which wins over built-in defaults.

Exit codes: 0 success, 1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict

import numpy as np

from . import mc
from .circuit import build_circuit, joint_parity_distribution, output_state_on_success
from .errors import BellCertError
from .estimate import ParityProportions, invert
from .plan import pairs_for_certification, purify_and_certify_plan
from .protocol import run_protocol
from .purify import find_lambda_threshold, iterate
from .states import BELL_LABELS, BellDiagonalState, make_werner
from .stats import CONVENTIONS, DEFAULT_CONVENTION, confidence_interval, shot_covariance, sigma_one

SCHEMA_VERSION = 1
EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _floats(text, count=None):
    try:
        vals = [float(v) for v in str(text).replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if count is not None and len(vals) != count:
        raise argparse.ArgumentTypeError(f"expected {count} comma-separated numbers, got {text!r}")
    return vals


def _state_arg(text):
    return _floats(text, 4)


def _triple_arg(text):
    return _floats(text, 3)


def _state_from(args) -> BellDiagonalState:
    if args.state is not None and args.fidelity is not None:
        raise UsageError("give either --state or --fidelity, not both")
    if args.state is not None:
        return BellDiagonalState(*args.state)
    if args.fidelity is not None:
        return make_werner(args.fidelity)
    raise UsageError("one of --state or --fidelity is required")


def _state_dict(s: BellDiagonalState) -> dict:
    return dict(zip("abcd", (float(x) for x in s)))


def _clean(x):
    """JSON-safe copy: NaN and infinities become null, tuples become lists."""
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (np.floating, float)):
        return None if not math.isfinite(float(x)) else float(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


# Each command returns (result_dict, human_text).

def cmd_purify(args):
    s = _state_from(args)
    traj = iterate(s, args.lam, args.rounds)
    rounds = [
        {"round": r.round_index, "state": _state_dict(r.output), "success_probability": r.success_probability}
        for r in traj.rounds
    ]
    lines = [f"{'round':>5}  {'a':>10} {'b':>10} {'c':>10} {'d':>10}  {'P':>9}"]
    for r in traj.rounds:
        a, b, c, d = r.output
        lines.append(f"{r.round_index:>5}  {a:10.6f} {b:10.6f} {c:10.6f} {d:10.6f}  {r.success_probability:9.6f}")
    return {"lambda": args.lam, "rounds": rounds}, "\n".join(lines)


def cmd_success_prob(args):
    s = _state_from(args)
    out, P = output_state_on_success(s, build_circuit(args.lam))
    res = {"lambda": args.lam, "input": _state_dict(s), "success_probability": P, "output": _state_dict(out)}
    text = f"success probability {P:.6f}\noutput {tuple(round(x, 7) for x in out)}"
    return res, text


def cmd_distribution(args):
    s = _state_from(args)
    dist = joint_parity_distribution(s, build_circuit(args.lam))
    cells = []
    lines = ["loc1     loc2     loc3     probability"]
    names = ("agree", "disagree")
    for i in range(2):
        for j in range(2):
            for k in range(2):
                p = float(dist.prob[i, j, k])
                cells.append({"loc1": names[i], "loc2": names[j], "loc3": names[k], "probability": p})
                lines.append(f"{names[i]:8} {names[j]:8} {names[k]:8} {p:.10f}")
    f = dist.agree
    lines.append(f"agree marginals {f[0]:.10f} {f[1]:.10f} {f[2]:.10f}")
    res = {"lambda": args.lam, "cells": cells, "agree": list(map(float, f)),
           "success_probability": dist.success_probability}
    return res, "\n".join(lines)


def cmd_estimate(args):
    if (args.p is None) == (args.counts is None):
        raise UsageError("give exactly one of --p or --counts")
    if args.counts is not None:
        if args.shots is None or args.shots < 1:
            raise UsageError("--counts needs --shots >= 1")
        k = args.counts
        if any(c < 0 or c > args.shots for c in k):
            raise UsageError("counts must lie in [0, shots]")
        p = ParityProportions(*(c / args.shots for c in k), n_shots=args.shots)
    else:
        p = ParityProportions(*args.p)
    r = invert(p, args.lam)
    res = {
        "lambda": args.lam, "proportions": [p.p1, p.p2, p.p3], "a_hat": r.a_hat,
        "state": _state_dict(r.state), "clamped": r.clamped, "projected": r.projected,
        "ambiguous": r.ambiguous, "method": r.method, "interval": None,
    }
    if p.n_shots:
        try:
            lo, hi = confidence_interval(r.a_hat, sigma_one(r.state, args.lam), p.n_shots, args.k)
            res["interval"] = [lo, hi]
        except BellCertError:
            pass
    text = f"a_hat = {r.a_hat:.8f}\nstate {tuple(round(x, 8) for x in r.state)}"
    flags = [n for n in ("clamped", "projected", "ambiguous") if res[n]]
    if flags:
        text += "\nflags: " + ", ".join(flags)
    if res["interval"]:
        text += f"\n{args.k:g}-sigma interval [{res['interval'][0]:.6f}, {res['interval'][1]:.6f}]"
    return res, text


def cmd_sigma(args):
    s = _state_from(args)
    curve = sigma_one(s, args.lam, convention=args.convention)
    cov = shot_covariance(s, build_circuit(args.lam), args.convention).matrix
    res = {"lambda": args.lam, "state": _state_dict(s), "sigma1": curve.sigma1,
           "convention": args.convention, "covariance": cov.tolist()}
    return res, f"sigma(n) = {curve.sigma1:.6f} / sqrt(n)   [{args.convention} covariance]"


def _plan_dict(p):
    d = asdict(p)
    d["per_round_success"] = list(p.per_round_success)
    return d


def cmd_plan(args):
    p = pairs_for_certification(args.fidelity, args.lam, args.halfwidth, args.k, args.convention)
    text = (f"F={args.fidelity:g} lambda={args.lam:g}: {p.circuit_runs:,} circuit runs, "
            f"{p.bell_pairs:,} Bell pairs (sigma1={p.sigma1:.6f}, +/-{args.halfwidth:g} at {args.k:g} sigma)")
    return _plan_dict(p), text


def cmd_certify_plan(args):
    p = purify_and_certify_plan(args.fidelity, args.lam, args.threshold, args.k, args.rounding, args.convention)
    probs = ", ".join(f"{x:.6f}" for x in p.per_round_success) or "none"
    text = (f"{p.rounds} purification round(s) -> fidelity {p.fidelity:.6f}\n"
            f"success probabilities: {probs}\n"
            f"certification runs n={p.circuit_runs:,} (sigma target {p.target_sigma:.6f})\n"
            f"Bell pairs consumed: {p.bell_pairs:,}")
    return _plan_dict(p), text


def cmd_sweep(args):
    grid = tuple(range(args.n_start, args.n_stop + 1, args.n_step))
    cfg = mc.SweepConfig(args.fidelity, args.lam, grid, args.replicates, args.seed)
    rows = mc.run_reconstruction_sweep(cfg, workers=args.workers)
    text = mc.sweep_csv(cfg, rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        text = f"wrote {len(rows)} rows to {args.out}"
    if args.manifest:
        mc.write_manifest(args.manifest, cfg, csv=args.out or "<stdout>", workers=args.workers)
    res = {"config": _clean(asdict(cfg)), "rows": [asdict(r) for r in rows], "csv_path": args.out}
    return res, text.rstrip("\n")


def cmd_sampled_purify(args):
    s = _state_from(args)
    rows = mc.run_sampled_purification(s, args.lam, args.rounds, args.shots, args.seed)
    res = {"lambda": args.lam, "rounds": [asdict(r) for r in rows]}
    return res, mc.sampled_purification_csv(rows).rstrip("\n")


def cmd_protocol(args):
    s = _state_from(args)
    log = run_protocol(s, args.lam, args.threshold, args.batch_shots, args.max_rounds, args.seed)
    lines = []
    for e in log.events:
        if e.kind == "estimate":
            a = "n/a" if e.a_hat is None else f"{e.a_hat:.6f}"
            lines.append(f"round {e.round}: {e.circuit_runs:,} runs, a_hat={a} (true {e.true_fidelity:.6f}) {e.note}".rstrip())
        else:
            lines.append(f"purify -> round {e.round}: P={e.success_probability:.6f}, fidelity {e.fidelity_before:.6f} -> {e.fidelity_after:.6f}")
    lines.append(f"decision: {log.decision} ({log.reason})")
    lines.append(f"totals: {log.circuit_runs:,} circuit runs, {log.bell_pairs:,} Bell pairs")
    return log.to_dict(), "\n".join(lines)


def cmd_threshold_lambda(args):
    lam = find_lambda_threshold(args.fidelity)
    return {"initial_fidelity": args.fidelity, "lambda_threshold": lam}, f"lambda* = {lam:.5f}"


def _add_common(p, state=False, lam=True):
    p.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    p.add_argument("--config", help="key = value defaults file")
    if state:
        p.add_argument("--state", type=_state_arg, help="Bell coefficients a,b,c,d")
        p.add_argument("--fidelity", type=float, help="Werner state of this fidelity")
    if lam:
        p.add_argument("--lambda", dest="lam", type=float, default=0.0, help="depolarizing parameter")


def build_parser():
    parser = argparse.ArgumentParser(prog="bellcert", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    cmds = {}

    def add(name, func, help_, **kw):
        p = sub.add_parser(name, help=help_, description=help_)
        _add_common(p, **kw)
        p.set_defaults(func=func)
        cmds[name] = p
        return p

    p = add("purify", cmd_purify, "iterate purification rounds", state=True)
    p.add_argument("--rounds", type=int, default=1)
    add("success-prob", cmd_success_prob, "success probability and post-selected output", state=True)
    add("distribution", cmd_distribution, "joint parity-outcome distribution", state=True)
    p = add("estimate", cmd_estimate, "reconstruct a state from parity data")
    p.add_argument("--p", type=_triple_arg, help="agree proportions p1,p2,p3")
    p.add_argument("--counts", type=lambda t: [int(round(x)) for x in _floats(t, 3)], help="agree counts k1,k2,k3")
    p.add_argument("--shots", type=int)
    p.add_argument("--k", type=float, default=3.0, help="interval width in standard deviations")
    p = add("sigma", cmd_sigma, "delta-method sigma1 for a state", state=True)
    p.add_argument("--convention", choices=CONVENTIONS, default=DEFAULT_CONVENTION)
    p = add("plan", cmd_plan, "Bell pairs to certify a Werner fidelity")
    p.add_argument("--fidelity", type=float, required=True)
    p.add_argument("--halfwidth", type=float, default=0.01)
    p.add_argument("--k", type=float, default=3.0)
    p.add_argument("--convention", choices=CONVENTIONS, default=DEFAULT_CONVENTION)
    p = add("certify-plan", cmd_certify_plan, "Bell pairs to purify past a threshold and certify it")
    p.add_argument("--fidelity", type=float, required=True, help="initial Werner fidelity")
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--k", type=float, default=3.0)
    p.add_argument("--rounding", choices=("printed", "exact"), default="printed")
    p.add_argument("--convention", choices=CONVENTIONS, default=DEFAULT_CONVENTION)
    p = add("sweep", cmd_sweep, "reconstruction accuracy against shot count (CSV)")
    p.add_argument("--fidelity", type=float, required=True)
    p.add_argument("--n-start", type=int, default=1000)
    p.add_argument("--n-stop", type=int, default=70000)
    p.add_argument("--n-step", type=int, default=1000)
    p.add_argument("--replicates", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--manifest", help="run-manifest path")
    p = add("sampled-purify", cmd_sampled_purify, "shot-sampled nested purification", state=True)
    p.add_argument("--rounds", type=int, default=3)
    p.add_argument("--shots", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p = add("protocol", cmd_protocol, "estimate-and-purify driver", state=True)
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--batch-shots", type=int, default=None)
    p.add_argument("--max-rounds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p = add("threshold-lambda", cmd_threshold_lambda, "largest noise at which one round helps", lam=False)
    p.add_argument("--fidelity", type=float, required=True)
    return parser, cmds


def read_config(path) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (t.strip() for t in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _apply_config(sub_parser, config):
    known = {a.dest: a for a in sub_parser._actions}
    for key, value in config.items():
        dest = "lam" if key == "lambda" else key
        if dest not in known or dest in ("help", "config"):
            raise UsageError(f"unknown config key {key!r}")
        action = known[dest]
        if isinstance(action, argparse._StoreTrueAction):
            val = value.lower() in ("1", "true", "yes", "on")
        elif action.type is not None:
            val = action.type(value)
        else:
            val = value
        if action.choices is not None and val not in action.choices:
            raise UsageError(f"config value {value!r} for {key} not in {list(action.choices)}")
        sub_parser.set_defaults(**{dest: val})
        action.required = False


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, cmds = build_parser()
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config")
        known, _ = pre.parse_known_args(argv)
        command = next((a for a in argv if not a.startswith("-")), None)
        if known.config and command in cmds:
            _apply_config(cmds[command], read_config(known.config))
        args = parser.parse_args(argv)
        result, text = args.func(args)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except (UsageError, argparse.ArgumentTypeError, OSError) as exc:
        print(f"bellcert {argv[0] if argv else ''}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BellCertError as exc:
        print(f"bellcert: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    if args.json:
        doc = {"schema_version": SCHEMA_VERSION, "command": args.command, "result": _clean(result)}
        print(json.dumps(doc, indent=2, allow_nan=False))
    else:
        print(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
