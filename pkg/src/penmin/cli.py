"""Command-line front end.

Verbs::

    penmin path in.csv
    penmin select --method window --eta 0.1 in.csv
    penmin simulate --setting easy --N 2000 --seed 1
    penmin reproduce table3 --N 2000 --seed 42 --out results/

Exit status: 0 on success, 1 on I/O errors, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path

from .collection import read_csv
from .exceptions import PenminError, ValidationError
from .path import compute_path
from .select import fpe_select, gcv_select, mallows_select, minimal_penalty_select
from .sim import SimConfig, overpenalization_sweep, run_monte_carlo, run_replicates, agreement_from

EXIT_IO = 1
EXIT_INVALID = 2

METHOD_CHOICES = ("maxjump", "threshold", "window", "slope", "capushe", "median", "consensus",
                  "mallows", "fpe", "gcv")
TARGETS = ("table1", "table3", "table4", "fig8")
# config-file keys and their types; names match the long flags
CONFIG_KEYS = {"method": str, "Tn": float, "eta": float, "D0": float, "pct": float,
               "sigma2": float, "overpen": float, "N": int, "seed": int, "jobs": int,
               "setting": str, "n": int}


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValidationError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ValidationError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = CONFIG_KEYS[key](value)
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: bad value for {key}: {value!r}") from None
    return out


def _add_common(p):
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--Tn", type=float, help="threshold T for the threshold calibrator")
    p.add_argument("--eta", type=float, help="window half-width (log scale) for the window calibrator")
    p.add_argument("--D0", type=float, help="smallest complexity used by the slope fit")
    p.add_argument("--pct", type=float, help="platform-size fraction for capushe")
    p.add_argument("--sigma2", type=float, help="noise variance")
    p.add_argument("--overpen", type=float, help="overpenalization factor")
    p.add_argument("--n", type=int, help="sample size (default: largest complexity / setting default)")


def _add_sim(p):
    p.add_argument("--N", type=int, help="number of replicates")
    p.add_argument("--seed", type=int, help="master seed (fallback: $PENMIN_SEED, then 0)")
    p.add_argument("--jobs", type=int, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="penmin", description="Minimal-penalty model selection.")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("path", help="print the penalized-argmin path of a collection as JSON")
    p.add_argument("csv", help="collection CSV (- for stdin)")

    p = sub.add_parser("select", help="calibrate and select a model from a collection CSV")
    p.add_argument("csv", help="collection CSV (- for stdin)")
    p.add_argument("--method", choices=METHOD_CHOICES)
    _add_common(p)

    p = sub.add_parser("simulate", help="run a Monte-Carlo experiment")
    p.add_argument("--setting", choices=("easy", "hard", "kernel"))
    p.add_argument("--out", help="write the JSON report here (default: stdout)")
    p.add_argument("--format", choices=("json", "text"), default="text")
    _add_common(p)
    _add_sim(p)

    p = sub.add_parser("reproduce", help="rerun a published experiment and compare")
    p.add_argument("target", choices=TARGETS)
    p.add_argument("--out", default=".", help="output directory")
    _add_common(p)
    _add_sim(p)
    return parser


def _settings(args) -> dict:
    conf = read_config(args.config) if getattr(args, "config", None) else {}
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            conf[key] = v
    if conf.get("seed") is None and "seed" in vars(args):
        env = os.environ.get("PENMIN_SEED")
        if env is not None:
            try:
                conf["seed"] = int(env)
            except ValueError:
                raise ValidationError(f"PENMIN_SEED must be an integer, got {env!r}") from None
    return conf


def _load(path):
    if path == "-":
        return read_csv(sys.stdin)
    with open(path, newline="", encoding="utf-8") as fh:
        return read_csv(fh)


def cmd_path(args):
    coll = _load(args.csv)
    print(compute_path(coll).to_json())


def cmd_select(args):
    conf = _settings(args)
    method = conf.get("method")
    if method is None:
        raise ValidationError("--method is required")
    coll = _load(args.csv)
    if method == "mallows":
        if conf.get("sigma2") is None:
            raise ValidationError("mallows needs --sigma2")
        out = mallows_select(coll, conf["sigma2"], conf.get("overpen", 1.0))
    elif method in ("fpe", "gcv"):
        n = conf.get("n") or int(round(coll.complexity.max()))
        out = (fpe_select if method == "fpe" else gcv_select)(coll, n)
    else:
        out = minimal_penalty_select(coll, method, T=conf.get("Tn"), eta=conf.get("eta"),
                                     D0=conf.get("D0"), pct=conf.get("pct"), n=conf.get("n"))
    print(out.to_json())


def _config(conf, setting=None) -> SimConfig:
    setting = setting or conf.get("setting", "easy")
    kw = {"setting": setting, "N": conf.get("N", 2000), "master_seed": conf.get("seed", 0)}
    if conf.get("n") is not None:
        kw["n"] = conf["n"]
    elif setting == "kernel":
        kw["n"] = 200
    for src, dst in (("sigma2", "sigma2"), ("Tn", "T_n"), ("eta", "eta"), ("D0", "D0"),
                     ("pct", "pct"), ("overpen", "overpen")):
        if conf.get(src) is not None:
            kw[dst] = conf[src]
    try:
        return SimConfig(**kw)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def cmd_simulate(args):
    conf = _settings(args)
    report = run_monte_carlo(_config(conf), jobs=conf.get("jobs", 1))
    text = report.to_json(indent=1) if args.format == "json" or args.out else report.to_text()
    if args.out:
        Path(args.out).write_text(report.to_json(indent=1) + "\n")
        print(report.to_text())
    else:
        print(text)


def load_reference() -> dict:
    return json.loads(resources.files("penmin").joinpath("data/reference_values.json").read_text())


def _line(label, observed, expected, tol, ok):
    return f"{'PASS' if ok else 'FAIL'}  {label:<40} observed {observed:.4f}  reference {expected:.4f}  tol {tol:.4f}"


def compare_table(report, ref_table, ref, N):
    """Pass/fail lines for a table of calibrators; tolerances grow as sqrt(base_N/N)."""
    tol = ref["tolerance"]
    scale = math.sqrt(ref["base_N"] / N)
    lines, ok_all = [], True
    for name, r in ref_table["methods"].items():
        got = report.methods.get(name)
        if got is None:
            continue
        checks = []
        if r["mean"] is not None and got.mean is not None:
            t = tol["capushe_mean"] if name == "capushe" else tol["mean"] * scale
            checks.append(("mean C/sigma2", got.mean, r["mean"], t))
        if name == "capushe":
            t = tol["capushe_risk_ratio"]
        else:
            t = tol["risk_ratio_se_multiple"] * r["risk_ratio_se"] * scale
        checks.append(("risk ratio", got.risk_ratio, r["risk_ratio"], t))
        for what, obs, exp, t in checks:
            ok = abs(obs - exp) <= t
            ok_all &= ok
            lines.append(_line(f"{name} {what}", obs, exp, t, ok))
    return lines, ok_all


def compare_agreement(freqs, ref_freqs, ref, N):
    scale = math.sqrt(ref["base_N"] / N)
    t = ref["tolerance"]["frequency"] * scale
    lines, ok_all = [], True
    for key, exp in ref_freqs.items():
        if key.endswith("_max"):
            name = key[:-4]
            ok = freqs[name] <= exp + t
            lines.append(_line(f"{name} (upper bound)", freqs[name], exp, t, ok))
        else:
            ok = abs(freqs[key] - exp) <= t
            lines.append(_line(key, freqs[key], exp, t, ok))
        ok_all &= ok
    return lines, ok_all


def cmd_reproduce(args):
    conf = _settings(args)
    N = conf.get("N", 2000)
    jobs = conf.get("jobs", 1)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ref = load_reference()
    lines = []
    if args.target in ("table3", "table4"):
        setting = "easy" if args.target == "table3" else "hard"
        report = run_monte_carlo(_config(conf, setting), jobs=jobs)
        (out / f"{args.target}.json").write_text(report.to_json(indent=1) + "\n")
        (out / f"{args.target}.txt").write_text(report.to_text() + "\n")
        print(report.to_text())
        lines, _ = compare_table(report, ref[args.target], ref, N)
    elif args.target == "table1":
        result = {}
        for setting in ("easy", "hard"):
            freqs = agreement_from(run_replicates(_config(conf, setting), jobs))
            result[setting] = freqs
            got, _ = compare_agreement(freqs, ref["table1"][setting], ref, N)
            lines += [f"[{setting}] {s}" for s in got]
        doc = {"N": N, "seed": conf.get("seed", 0), "frequencies": result}
        (out / "table1.json").write_text(json.dumps(doc, indent=1) + "\n")
    else:
        sweep = overpenalization_sweep(_config(conf, "easy"), jobs=jobs)
        (out / "fig8.csv").write_text(sweep.to_csv())
        f8 = ref["fig8"]
        tol = ref["tolerance"]
        scale = math.sqrt(ref["base_N"] / N)
        for label, obs, exp, t in (("best C", sweep.best_C, f8["best_C"], tol["fig8_best_C"] * scale),
                                   ("improvement factor", sweep.improvement_factor,
                                    f8["improvement_factor"], tol["fig8_improvement"] * scale)):
            lines.append(_line(label, obs, exp, t, abs(obs - exp) <= t))
    print()
    print("\n".join(lines))
    n_fail = sum(s.startswith("FAIL") or "] FAIL" in s for s in lines)
    print(f"{len(lines) - n_fail}/{len(lines)} comparisons within tolerance")


COMMANDS = {"path": cmd_path, "select": cmd_select, "simulate": cmd_simulate,
            "reproduce": cmd_reproduce}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.verb](args)
    except OSError as exc:
        print(f"penmin: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValidationError, PenminError) as exc:
        print(f"penmin: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return 0


if __name__ == "__main__":
    sys.exit(main())
