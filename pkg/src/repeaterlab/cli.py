"""Command-line surface: run the engines from a config file or flags.

Subcommands: ``rate`` (one optimized rate breakdown), ``compare``
(distance-sweep CSV of all selected protocols against direct
transmission), ``crossover``, ``coeffs`` (brute-force error-coefficient
table), ``mc`` (waiting-time Monte Carlo), ``sweep`` (efficiency
sensitivity CSV).  Flags override the config file; ``--dump-config``
prints the effective configuration in a form that parses back
identically.

Exit codes: 0 success, 2 configuration or usage error, 3 infeasible
optimization, 1 unexpected failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields, replace
from typing import Dict, List, Optional, Sequence, TextIO

from . import dlcz, rates, waiting
from . import optimizer as opt

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3

COMMANDS = ("rate", "compare", "crossover", "coeffs", "mc", "sweep")


class ConfigError(ValueError):
    """Config rejection with the offending line and key."""

    def __init__(self, message: str, line: Optional[int] = None,
                 key: Optional[str] = None):
        loc = f"line {line}: " if line is not None else ""
        what = f"{key}: " if key else ""
        super().__init__(f"{loc}{what}{message}")
        self.line = line
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    """Validated run description; every field has a usable default."""

    command: str = "rate"
    protocol: str = "dlcz"
    L_km: float = 600.0
    L_att_km: float = 22.0
    c_fiber: float = 2.0e8
    eta_m: float = 0.9
    eta_d: float = 0.9
    p: Optional[float] = None
    p1: float = 0.9
    alpha2: Optional[float] = None
    N_m: int = 1
    rep_rate: float = 1.0e7
    F_target: float = 0.9
    n_max: int = 4
    seed: int = 0
    trials: int = 100_000
    out: Optional[str] = None
    L_min_km: float = 400.0
    L_max_km: float = 1000.0
    L_step_km: float = 50.0
    sweep_param: str = "eta_m"
    sweep_min: float = 0.8
    sweep_max: float = 1.0
    sweep_step: float = 0.01
    source_rate: float = 1.0e10

    def params_template(self) -> rates.ProtocolParams:
        return rates.ProtocolParams(
            L_km=self.L_km,
            L_att_km=self.L_att_km,
            c_fiber=self.c_fiber,
            eta_m=self.eta_m,
            eta_d=self.eta_d,
            p=self.p,
            p1=self.p1,
            alpha2=self.alpha2,
            N_m=self.N_m,
            rep_rate=self.rep_rate,
            F_target=self.F_target,
        )

    def protocols(self) -> List[str]:
        if self.protocol == "all":
            return list(opt.PROTOCOL_NAMES)
        return [s.strip() for s in self.protocol.split(",") if s.strip()]


def _parse_value(key: str, raw: str, line: int):
    spec = _KEYS[key]
    try:
        value = spec["type"](raw)
    except ValueError:
        raise ConfigError(
            f"cannot parse {raw!r} as {spec['type'].__name__}", line, key
        ) from None
    check = spec.get("check")
    if check is not None and not check(value):
        raise ConfigError(
            f"value {raw} is out of range ({spec['range']})", line, key
        )
    return value


def _opt_float(raw: str) -> Optional[float]:
    if raw.lower() in ("none", ""):
        return None
    return float(raw)


_KEYS: Dict[str, dict] = {
    "command": {
        "type": str,
        "check": lambda v: v in COMMANDS,
        "range": "one of " + ", ".join(COMMANDS),
    },
    "protocol": {
        "type": str,
        "check": lambda v: all(
            s.strip() in opt.PROTOCOL_NAMES + ("all",)
            for s in v.split(",") if s.strip()
        ) and v.strip() != "",
        "range": "comma list of " + ", ".join(opt.PROTOCOL_NAMES) + ", or all",
    },
    "L_km": {"type": float, "check": lambda v: v > 0, "range": "> 0"},
    "L_att_km": {"type": float, "check": lambda v: v > 0, "range": "> 0"},
    "c_fiber": {"type": float, "check": lambda v: v > 0, "range": "> 0"},
    "eta_m": {"type": float, "check": lambda v: 0 <= v <= 1, "range": "[0, 1]"},
    "eta_d": {"type": float, "check": lambda v: 0 <= v <= 1, "range": "[0, 1]"},
    "p": {
        "type": _opt_float,
        "check": lambda v: v is None or 0 < v <= 1,
        "range": "(0, 1] or none",
    },
    "p1": {"type": float, "check": lambda v: 0 <= v <= 1, "range": "[0, 1]"},
    "alpha2": {
        "type": _opt_float,
        "check": lambda v: v is None or 0 <= v <= 1,
        "range": "[0, 1] or none",
    },
    "N_m": {"type": int, "check": lambda v: v >= 1, "range": ">= 1"},
    "rep_rate": {"type": float, "check": lambda v: v > 0, "range": "> 0"},
    "F_target": {
        "type": float, "check": lambda v: 0 < v <= 1, "range": "(0, 1]",
    },
    "n_max": {"type": int, "check": lambda v: 0 <= v <= 4, "range": "0..4"},
    "seed": {"type": int, "check": lambda v: v >= 0, "range": ">= 0"},
    "trials": {"type": int, "check": lambda v: v >= 1, "range": ">= 1"},
    "out": {
        "type": lambda s: None if s.lower() in ("", "none") else s,
        "check": None,
        "range": "path or none",
    },
    "L_min_km": {"type": float, "check": lambda v: v > 0, "range": "> 0"},
    "L_max_km": {"type": float, "check": lambda v: v > 0, "range": "> 0"},
    "L_step_km": {"type": float, "check": lambda v: v > 0, "range": "> 0"},
    "sweep_param": {
        "type": str,
        "check": lambda v: v in ("eta_m", "eta_d"),
        "range": "eta_m or eta_d",
    },
    "sweep_min": {
        "type": float, "check": lambda v: 0 < v <= 1, "range": "(0, 1]",
    },
    "sweep_max": {
        "type": float, "check": lambda v: 0 < v <= 1, "range": "(0, 1]",
    },
    "sweep_step": {"type": float, "check": lambda v: v > 0, "range": "> 0"},
    "source_rate": {"type": float, "check": lambda v: v > 0, "range": "> 0"},
}


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines with ``#`` comments into a RunConfig.

    Rejects unknown keys, duplicate keys, and out-of-range values, each
    diagnostic naming the line number and key.
    """
    seen: Dict[str, int] = {}
    values: Dict[str, object] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno)
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _KEYS:
            raise ConfigError("unknown key", lineno, key)
        if key in seen:
            raise ConfigError(
                f"duplicate key (first set on line {seen[key]})", lineno, key
            )
        seen[key] = lineno
        values[key] = _parse_value(key, raw, lineno)
    return RunConfig(**values)


def dump_config(cfg: RunConfig) -> str:
    """Emit the configuration so that parse_config round-trips it."""
    lines = []
    for f in fields(RunConfig):
        v = getattr(cfg, f.name)
        if v is None:
            v = "none"
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    """Times and probabilities with 4 significant digits."""
    if x is None or (isinstance(x, float) and math.isinf(x)):
        return "inf"
    return f"{x:.4g}"


# ---------------------------------------------------------------------------
# subcommands


def _cmd_rate(cfg: RunConfig, out: TextIO) -> int:
    proto = cfg.protocols()[0]
    res = opt.optimize(
        proto, cfg.L_km, cfg.params_template(), n_max=cfg.n_max
    )
    if not res.feasible:
        out.write(f"infeasible: no parameters reach F >= {cfg.F_target}\n")
        return EXIT_INFEASIBLE
    bd = res.breakdown
    out.write(f"protocol            {proto}\n")
    out.write(f"distance_km         {cfg.L_km:g}\n")
    out.write(f"links               {res.links}\n")
    if res.p is not None:
        out.write(f"p                   {_fmt(res.p)}\n")
    if res.alpha2 is not None:
        out.write(f"alpha2              {_fmt(res.alpha2)}\n")
        out.write(f"beta2               {_fmt(res.beta2)}\n")
    out.write(f"P0                  {_fmt(bd.P0)}\n")
    for i, P in enumerate(bd.swap_probs, start=1):
        out.write(f"P{i}                  {_fmt(P)}\n")
    out.write(f"P_ps                {_fmt(bd.P_ps)}\n")
    if bd.T_prep is not None:
        out.write(f"T_prep_s            {_fmt(bd.T_prep)}\n")
    if bd.T_s is not None:
        out.write(f"T_s_s               {_fmt(bd.T_s)}\n")
    for note in bd.notes:
        out.write(f"note                {note}\n")
    out.write(f"T_tot_s             {_fmt(bd.T_tot)}\n")
    direct = rates.direct_transmission_time(cfg.L_km, cfg.source_rate)
    out.write(f"direct_s            {_fmt(direct)}\n")
    return EXIT_OK


def _grid(cfg: RunConfig) -> List[float]:
    if cfg.L_max_km < cfg.L_min_km:
        raise ConfigError("L_max_km must not be below L_min_km")
    n = int(round((cfg.L_max_km - cfg.L_min_km) / cfg.L_step_km))
    return [cfg.L_min_km + i * cfg.L_step_km for i in range(n + 1)]


def _cmd_compare(cfg: RunConfig, out: TextIO) -> int:
    protos = cfg.protocols()
    pts = opt.curve(
        protos, _grid(cfg), cfg.params_template(),
        source_rate=cfg.source_rate,
    )
    header = ["L_km"] + [f"{p}_s" for p in protos] + ["direct_transmission_s"]
    out.write(",".join(header) + "\n")
    for pt in pts:
        row = [f"{pt.L_km:g}"]
        row += [_fmt(pt.times[p]) for p in protos]
        row.append(_fmt(pt.direct_s))
        out.write(",".join(row) + "\n")
    return EXIT_OK


def _cmd_crossover(cfg: RunConfig, out: TextIO) -> int:
    out.write("protocol,crossover_km\n")
    status = EXIT_OK
    for proto in cfg.protocols():
        x = opt.crossover(
            proto, cfg.params_template(), source_rate=cfg.source_rate
        )
        out.write(f"{proto},{'none' if x is None else f'{x:.0f}'}\n")
        if x is None:
            status = EXIT_INFEASIBLE
    return status


def _cmd_coeffs(cfg: RunConfig, out: TextIO) -> int:
    eta = cfg.eta_m * cfg.eta_d
    if not 0.0 < eta < 1.0:
        raise ConfigError("coeffs needs 0 < eta_m * eta_d < 1")
    out.write("n,A_n,B_n\n")
    for n in range(5):
        # extraction at several efficiencies confirms the (1-eta) powers
        c = dlcz.verified_coefficients(n, (0.5, eta, 0.9))
        out.write(f"{n},{c.A_n:.0f},{c.B_n:.0f}\n")
    return EXIT_OK


def _cmd_mc(cfg: RunConfig, out: TextIO) -> int:
    proto = cfg.protocols()[0]
    res = opt.optimize(
        proto, cfg.L_km, cfg.params_template(), n_max=cfg.n_max
    )
    if not res.feasible:
        out.write("infeasible: nothing to simulate\n")
        return EXIT_INFEASIBLE
    bd = res.breakdown
    model = waiting.ChainModel(bd.P0, bd.swap_probs)
    stats = waiting.simulate_chain(model, cfg.trials, cfg.seed)
    analytic = waiting.analytic_chain_time(model)
    out.write(f"protocol            {proto}\n")
    out.write(f"trials              {stats.trials}\n")
    out.write(f"mean_periods        {_fmt(stats.mean_time)}\n")
    out.write(f"std_error_periods   {_fmt(stats.std_error)}\n")
    out.write(f"mean_seconds        {_fmt(stats.mean_time * bd.params.comm_time)}\n")
    out.write(f"analytic_periods    {_fmt(analytic)}\n")
    out.write(f"mc_over_analytic    {_fmt(stats.mean_time / analytic)}\n")
    for i, f in enumerate(stats.empirical_f):
        out.write(f"f_level_{i}           {_fmt(f)}\n")
    return EXIT_OK


def _cmd_sweep(cfg: RunConfig, out: TextIO) -> int:
    protos = cfg.protocols()
    if cfg.sweep_max < cfg.sweep_min:
        raise ConfigError("sweep_max must not be below sweep_min")
    npts = int(round((cfg.sweep_max - cfg.sweep_min) / cfg.sweep_step))
    grid = [cfg.sweep_min + i * cfg.sweep_step for i in range(npts + 1)]
    out.write(
        ",".join([cfg.sweep_param] + [f"{p}_s" for p in protos]) + "\n"
    )
    columns = {
        p: dict(
            opt.sensitivity(
                p, cfg.sweep_param, grid, cfg.L_km, cfg.params_template()
            )
        )
        for p in protos
    }
    for v in grid:
        row = [f"{v:g}"] + [_fmt(columns[p][v]) for p in protos]
        out.write(",".join(row) + "\n")
    return EXIT_OK


_RUNNERS = {
    "rate": _cmd_rate,
    "compare": _cmd_compare,
    "crossover": _cmd_crossover,
    "coeffs": _cmd_coeffs,
    "mc": _cmd_mc,
    "sweep": _cmd_sweep,
}


def run(cfg: RunConfig, out: Optional[TextIO] = None) -> int:
    """Execute one configured command, writing to ``cfg.out`` or stdout."""
    runner = _RUNNERS.get(cfg.command)
    if runner is None:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.command in ("rate", "mc") and len(cfg.protocols()) != 1:
        raise ConfigError(f"{cfg.command} needs exactly one protocol")
    cfg.params_template()  # surface range violations before running
    if out is not None:
        return runner(cfg, out)
    if cfg.out:
        with open(cfg.out, "w", encoding="ascii") as fh:
            return runner(cfg, fh)
    return runner(cfg, sys.stdout)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="repeaterlab",
        description="entanglement-distribution rate analysis for "
        "ensemble-based repeater protocols",
    )
    ap.add_argument("command", choices=COMMANDS, nargs="?")
    ap.add_argument("--config", metavar="PATH")
    ap.add_argument("--protocol")
    ap.add_argument("--L-km", dest="L_km", type=float)
    ap.add_argument("--eta-m", dest="eta_m", type=float)
    ap.add_argument("--eta-d", dest="eta_d", type=float)
    ap.add_argument("--p", type=float)
    ap.add_argument("--alpha2", type=float)
    ap.add_argument("--n-max", dest="n_max", type=int)
    ap.add_argument("--nm", dest="N_m", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--trials", type=int)
    ap.add_argument("--out")
    ap.add_argument("--dump-config", action="store_true")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            with open(args.config, encoding="ascii") as fh:
                cfg = parse_config(fh.read())
        else:
            cfg = RunConfig()
        overrides = {}
        for key in ("protocol", "L_km", "eta_m", "eta_d", "p", "alpha2",
                    "n_max", "N_m", "seed", "trials", "out"):
            v = getattr(args, key)
            if v is not None:
                check = _KEYS[key].get("check")
                if check is not None and not check(v):
                    raise ConfigError(
                        f"value {v} is out of range ({_KEYS[key]['range']})",
                        key=key,
                    )
                overrides[key] = v
        if args.command:
            overrides["command"] = args.command
        cfg = replace(cfg, **overrides)
        if args.dump_config:
            sys.stdout.write(dump_config(cfg))
            return EXIT_OK
        return run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (rates.InfeasibleError,) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
