"""Command-line entry points.

Commands: approx-quality, descent-compare, qad-compare,
reconstruct-check, selftest. Options resolve as CLI flag > config file
> built-in default; config files are flat ``key = value`` lines. Every
run echoes its effective configuration into the output directory, so
the outputs are reproducible from the directory contents alone.

Exit codes: 0 success, 1 invalid arguments or config, 2 failed checks.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import kernels
from .circuit import sample_instance
from .experiments import (
    ApproxQualityConfig,
    DescentCompareConfig,
    QadCompareConfig,
    run_approx_quality,
    run_descent_compare,
    run_qad_compare,
    summary_json,
    write_approx_csv,
    write_descent_curves_csv,
    write_qad_curves_csv,
)
from .rng import child_rng
from .surrogate import build_surrogate
from . import svgplot

ENV_OUT_DIR = "KERNELDESCENT_OUT"
_FALLBACK_OUT_DIR = "kerneldescent-out"


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


_COMMON = {"seed": 1, "out_dir": None, "workers": 1, "svg": True}

DEFAULTS = {
    "approx-quality": {"n": 10, "m": 10, "samples": 25000, "pair": "L1",
                       "epsilon": 1e-12, **_COMMON},
    "descent-compare": {"n": 8, "m": 8, "runs": 5000, "iterations": 20,
                        "alphas": (7.0, 8.5, 10.0), "k": 100,
                        "epsilon": 1e-12, **_COMMON},
    "qad-compare": {"n": 8, "m": 8, "runs": 500, "iterations": 5,
                    "inner_lr": 0.01, "check_every": 1000, "cap": 10000,
                    **_COMMON},
    "reconstruct-check": {"n": 4, "m": 4, "points": 100, "tolerance": 1e-9,
                          "seed": 1, "out_dir": None},
    "selftest": {"out_dir": None},
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="kerneldescent",
                     description="surrogate-descent experiments on simulated circuits")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--workers", type=int)
        p.add_argument("--no-svg", dest="svg", action="store_const", const=False)

    p = sub.add_parser("approx-quality",
                       help="local model error scatter study")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--pair", choices=("L1", "L2"))
    p.add_argument("--epsilon", type=float)

    p = sub.add_parser("descent-compare",
                       help="kernel descent vs gradient descent curves")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--alphas", help="comma-separated step sizes")
    p.add_argument("--k", type=int)
    p.add_argument("--epsilon", type=float)

    p = sub.add_parser("qad-compare",
                       help="order-2 kernel descent vs analytic descent")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--inner-lr", dest="inner_lr", type=float)
    p.add_argument("--check-every", dest="check_every", type=int)
    p.add_argument("--cap", type=int)

    p = sub.add_parser("reconstruct-check",
                       help="verify order-m surrogates reproduce f exactly")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--points", type=int)
    p.add_argument("--tolerance", type=float)

    p = sub.add_parser("selftest", help="run the built-in property checks")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--out-dir", dest="out_dir")

    return parser


def parse_config_file(path: str) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment; keys use _ or -."""
    out = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _convert(raw: str, default, key: str):
    try:
        if isinstance(default, bool):
            low = raw.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
        if isinstance(default, tuple):
            return tuple(float(v) for v in raw.split(",") if v.strip())
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {raw!r}") from exc


def resolve_options(command: str, args: argparse.Namespace) -> dict:
    defaults = DEFAULTS[command]
    eff = dict(defaults)
    if getattr(args, "config", None):
        for key, raw in parse_config_file(args.config).items():
            if key not in defaults:
                raise ConfigError(f"unknown config key {key!r} for {command}")
            base = defaults[key]
            eff[key] = _convert(raw, base if base is not None else "", key)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            if key == "alphas" and isinstance(value, str):
                value = tuple(float(v) for v in value.split(",") if v.strip())
            eff[key] = value
    if eff.get("out_dir") is None:
        eff["out_dir"] = os.environ.get(ENV_OUT_DIR, _FALLBACK_OUT_DIR)
    if "workers" in eff and eff["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    return eff


def _echo_config(out_dir: str, command: str, eff: dict):
    os.makedirs(out_dir, exist_ok=True)
    lines = [f"command = {command}"]
    for key in sorted(eff):
        value = eff[key]
        if isinstance(value, tuple):
            value = ",".join(repr(v) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    with open(os.path.join(out_dir, "config.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _write(out_dir: str, name: str, text: str):
    with open(os.path.join(out_dir, name), "w", encoding="utf-8") as fh:
        fh.write(text)


_MEASURE_COLS = {"value": (1, 2), "grad_l2": (3, 4), "grad_cos": (5, 6)}


def render_approx_svgs(result) -> dict:
    """All six scatter views from an approx-quality result, name -> svg."""
    cfg = result.config
    rec = result.records
    comp_name = "linear model" if cfg.pair == "L1" else "QAD"
    out = {}
    for meas, (ki, ci) in _MEASURE_COLS.items():
        s = result.summary
        out[f"approx_scatter_{meas}.svg"] = svgplot.render_scatter_compare(
            rec[:, ci], rec[:, ki], measure=meas,
            title=f"{comp_name} vs kernel model ({cfg.pair}, n={cfg.n}, m={cfg.m})",
            win_fraction=s["win_fraction"][meas],
            mean_angle=s["mean_polar_angle"][meas],
            labels=(f"{comp_name} error", "kernel model error"))
        out[f"approx_fit_{meas}.svg"] = svgplot.render_scatter_fit(
            rec[:, 0], rec[:, ki], rec[:, ci],
            exponent=s["fit_exponent"][meas],
            c_kernel=s["fit_c"][meas]["kernel"],
            c_comp=s["fit_c"][meas]["competitor"],
            measure=meas,
            title=f"{meas} error vs displacement ({cfg.pair}, n={cfg.n}, m={cfg.m})",
            comp_label=comp_name)
    return out


def _cmd_approx(eff: dict) -> int:
    cfg = ApproxQualityConfig(n=eff["n"], m=eff["m"], samples=eff["samples"],
                              pair=eff["pair"], seed=eff["seed"],
                              epsilon=eff["epsilon"], workers=eff["workers"])
    result = run_approx_quality(cfg)
    out_dir = eff["out_dir"]
    _echo_config(out_dir, "approx-quality", eff)
    with open(os.path.join(out_dir, "approx_samples.csv"), "w", encoding="utf-8") as fh:
        write_approx_csv(fh, result.records)
    _write(out_dir, "summary.json", summary_json(result.summary))
    if eff["svg"]:
        for name, svg in render_approx_svgs(result).items():
            _write(out_dir, name, svg)
    wf = result.summary["win_fraction"]
    print(f"approx-quality {cfg.pair}: kernel wins "
          f"value {100 * wf['value']:.1f}%, grad {100 * wf['grad_l2']:.1f}%, "
          f"cos {100 * wf['grad_cos']:.1f}% over {cfg.samples} samples")
    print(f"outputs in {out_dir}")
    return 0


def _cmd_descent(eff: dict) -> int:
    cfg = DescentCompareConfig(n=eff["n"], m=eff["m"], runs=eff["runs"],
                               iterations=eff["iterations"],
                               alphas=tuple(eff["alphas"]), k=eff["k"],
                               epsilon=eff["epsilon"], seed=eff["seed"],
                               workers=eff["workers"])
    result = run_descent_compare(cfg)
    out_dir = eff["out_dir"]
    _echo_config(out_dir, "descent-compare", eff)
    with open(os.path.join(out_dir, "descent_curves.csv"), "w", encoding="utf-8") as fh:
        write_descent_curves_csv(fh, result.curves)
    _write(out_dir, "summary.json", summary_json(result.summary))
    if eff["svg"]:
        _write(out_dir, "descent_curves.svg", svgplot.render_descent_curves(
            result.curves,
            title=f"normalized objective, n={cfg.n}, m={cfg.m}, {cfg.runs} runs",
            ylabel="normalized objective"))
    for c in result.curves:
        print(f"{c.algorithm} alpha={c.alpha:g}: final mean {c.mean[-1]:.4f}")
    print(f"outputs in {out_dir}")
    return 0


def _cmd_qad(eff: dict) -> int:
    cfg = QadCompareConfig(n=eff["n"], m=eff["m"], runs=eff["runs"],
                           iterations=eff["iterations"], inner_lr=eff["inner_lr"],
                           check_every=eff["check_every"], cap=eff["cap"],
                           seed=eff["seed"], workers=eff["workers"])
    result = run_qad_compare(cfg)
    out_dir = eff["out_dir"]
    _echo_config(out_dir, "qad-compare", eff)
    with open(os.path.join(out_dir, "qad_curves.csv"), "w", encoding="utf-8") as fh:
        write_qad_curves_csv(fh, result.curves)
    _write(out_dir, "summary.json", summary_json(result.summary))
    if eff["svg"]:
        _write(out_dir, "qad_curves.svg", svgplot.render_descent_curves(
            result.curves,
            title=f"normalized objective, n={cfg.n}, m={cfg.m}, {cfg.runs} runs",
            ylabel="normalized objective"))
    for c in result.curves:
        print(f"{c.algorithm}: final mean {c.mean[-1]:.4f}")
    print(f"outputs in {out_dir}")
    return 0


def _cmd_reconstruct(eff: dict) -> int:
    rng = child_rng(eff["seed"], "reconstruct")
    inst, p = sample_instance(rng, eff["n"], eff["m"])
    surr = build_surrogate(inst, p, eff["m"])
    worst = 0.0
    for _ in range(eff["points"]):
        x = rng.uniform(-np.pi, np.pi, eff["m"])
        worst = max(worst, abs(surr.value(x) - inst.evaluate(x)))
    ok = worst < eff["tolerance"]
    out_dir = eff["out_dir"]
    _echo_config(out_dir, "reconstruct-check", eff)
    report = (f"order-{eff['m']} surrogate vs exact objective, n={eff['n']}\n"
              f"evaluations for build: {surr.values.shape[0]}\n"
              f"max abs deviation over {eff['points']} points: {worst:.3e}\n"
              f"tolerance: {eff['tolerance']:.1e}\nresult: {'PASS' if ok else 'FAIL'}\n")
    _write(out_dir, "reconstruct_check.txt", report)
    print(report, end="")
    return 0 if ok else 2


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        command = args.command
        eff = resolve_options(command, args)
        if command == "selftest":
            from .selftest import run_selftest
            failures = run_selftest()
            return 2 if failures else 0
        if command == "approx-quality":
            return _cmd_approx(eff)
        if command == "descent-compare":
            return _cmd_descent(eff)
        if command == "qad-compare":
            return _cmd_qad(eff)
        if command == "reconstruct-check":
            return _cmd_reconstruct(eff)
        raise ConfigError(f"unknown command {command!r}")
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
