"""Command line runner; every subcommand writes CSV (LF line endings) to --out or stdout."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import capacity as cap
from . import counterexamples as cx
from .belief import AlphaPolicy, make_policy
from .channel import ChannelParams
from .delay import DelayPmf
from .evaluation.exact import InfeasibleError, check_feasible, optimal_value, policy_value_exact
from .evaluation.genie import genie_value
from .evaluation.montecarlo import decision_logs, policy_value_mc
from .evaluation.report import CSV_COLUMNS
from .experiments import FIGURE1_COLUMNS, TABLE_COLUMNS, run_figure1, run_table
from .system import SystemConfig

DEFAULTS = dict(n="2", m="10", p="0.8", r="0.2", delay="1", pi="steady", policy="greedy", episodes=None, seed=None)
CONFIG_KEYS = set(DEFAULTS) | {"out"}


def read_config(path: str) -> dict[str, str]:
    """Flat ``key = value`` file; blank lines and ``#`` comments ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.lower().replace("-", "_")
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = val
    return out


def _floats(text: str) -> list[float]:
    return [float(Fraction(s.strip())) for s in text.split(",") if s.strip()]


@dataclass
class ExperimentConfig:
    n: int
    m: int
    p: list[float]
    r: list[float]
    delay: DelayPmf
    pi: str
    policy: str
    episodes: int | None
    seed: int | None
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def system(self) -> SystemConfig:
        if len(self.p) == 1 and len(self.r) == 1:
            params = ChannelParams(self.p[0], self.r[0])
        else:
            ps = self.p * self.n if len(self.p) == 1 else self.p
            rs = self.r * self.n if len(self.r) == 1 else self.r
            params = tuple(ChannelParams(a, b) for a, b in zip(ps, rs))
            if len(ps) != self.n or len(rs) != self.n:
                raise ValueError("per-user p/r lists need one entry per user")
        init = () if self.pi == "steady" else tuple(_floats(self.pi))
        return SystemConfig(self.n, self.m, params, self.delay, init)

    def require_seed(self) -> int:
        if self.seed is None:
            raise ValueError("--seed is required for simulation")
        return self.seed


def resolve(args: argparse.Namespace) -> ExperimentConfig:
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        merged.update(read_config(args.config))
    for key in CONFIG_KEYS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = str(val)
    episodes = merged.get("episodes")
    seed = merged.get("seed")
    return ExperimentConfig(
        n=int(merged["n"]),
        m=int(merged["m"]),
        p=_floats(merged["p"]),
        r=_floats(merged["r"]),
        delay=DelayPmf.parse(merged["delay"]),
        pi=merged["pi"].strip(),
        policy=merged["policy"],
        episodes=None if episodes is None else int(episodes),
        seed=None if seed is None else int(seed),
        out=merged.get("out"),
    )


def write_csv(rows: Sequence[dict], columns: Sequence[str], out: str | None) -> None:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    text = buf.getvalue()
    if out and out != "-":
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


REPORT_COLUMNS = CSV_COLUMNS + ("pi", "episodes", "seed")


def _report_row(rep, timing: bool, seed=None) -> dict:
    row = rep.csv_row()
    if not timing:
        row["runtime_ms"] = ""
    row["pi"] = rep.config.get("pi", "")
    row["episodes"] = "" if rep.episodes is None else str(rep.episodes)
    row["seed"] = "" if seed is None or rep.episodes is None else str(seed)
    return row


# ---------------------------------------------------------------------------
# subcommands


def cmd_capacity(args, cfg: ExperimentConfig):
    params = ChannelParams(cfg.p[0], cfg.r[0])
    base = dict(N=str(cfg.n), p=f"{params.p:.10g}", r=f"{params.r:.10g}", delay_pmf=str(cfg.delay))
    rows = [
        dict(base, quantity="sum_capacity_two_user", value=f"{cap.sum_capacity_two_user(params, cfg.delay).value:.12f}"),
        dict(base, quantity="genie_sum_capacity", value=f"{cap.genie_sum_capacity(params, cfg.delay, cfg.n).value:.12f}"),
    ]
    if cfg.n > 2:
        b = cap.sum_capacity_bounds(params, cfg.delay, cfg.n)
        rows.append(dict(base, quantity="sum_capacity_lower", value=f"{b['lower']:.12f}"))
        rows.append(dict(base, quantity="sum_capacity_upper", value=f"{b['upper']:.12f}"))
    write_csv(rows, ("quantity", "N", "p", "r", "delay_pmf", "value"), cfg.out)


def cmd_genie(args, cfg):
    write_csv([_report_row(genie_value(cfg.system()), args.timing)], REPORT_COLUMNS, cfg.out)


def cmd_optimal(args, cfg):
    write_csv([_report_row(optimal_value(cfg.system()), args.timing)], REPORT_COLUMNS, cfg.out)


def cmd_value(args, cfg):
    system = cfg.system()
    policy = make_policy(cfg.policy)
    exact_ok = not policy.stateful and not policy.needs_genie
    if exact_ok:
        try:
            check_feasible(system)
        except InfeasibleError:
            exact_ok = False
    if exact_ok and not cfg.episodes:
        rep = policy_value_exact(system, policy)
    else:
        if not cfg.episodes:
            raise ValueError(f"{policy.name} on this instance needs simulation; give --episodes >= 1")
        rep = policy_value_mc(system, policy, cfg.episodes, cfg.require_seed())
    write_csv([_report_row(rep, args.timing, cfg.seed)], REPORT_COLUMNS, cfg.out)


LOG_COLUMNS = ("episode", "slot", "user", "reward", "beliefs", "arrivals")


def cmd_simulate(args, cfg):
    system = cfg.system()
    policy = make_policy(cfg.policy)
    if not cfg.episodes or cfg.episodes < 1:
        raise ValueError("simulation needs --episodes >= 1")
    seed = cfg.require_seed()
    rep = policy_value_mc(system, policy, cfg.episodes, seed, genie=args.genie or isinstance(policy, AlphaPolicy))
    write_csv([_report_row(rep, args.timing, seed)], REPORT_COLUMNS, cfg.out)
    if args.log:
        count = min(args.log_episodes, cfg.episodes)
        rows = []
        for e, ep in enumerate(decision_logs(system, make_policy(cfg.policy), count, seed, genie=args.genie)):
            for j, (a, rwd) in enumerate(zip(ep.actions, ep.rewards)):
                rows.append(
                    dict(
                        episode=e,
                        slot=system.horizon - j,
                        user=a + 1,
                        reward=rwd,
                        beliefs=";".join(f"{b:.10g}" for b in ep.beliefs[j]),
                        arrivals=";".join(
                            f"{ev.user + 1}@{ev.origin_slot}:{'ACK' if ev.bit else 'NACK'}" for ev in ep.arrivals[j]
                        ),
                    )
                )
        write_csv(rows, LOG_COLUMNS, args.log)


def _region_rows(cfg):
    params = ChannelParams(cfg.p[0], cfg.r[0])
    outer, inner = cap.region_bounds(params, cfg.delay, cfg.n)
    dims = [f"x{i + 1}" for i in range(cfg.n)]
    rows = []
    for v in inner:
        rows.append(dict(kind="inner_vertex", label=v.label, bound="", **dict(zip(dims, map(repr, v.coords)))))
    for subset, bound in outer.constraints:
        label = "S=" + ";".join(str(i + 1) for i in subset)
        coef = {d: ("1" if i in subset else "0") for i, d in enumerate(dims)}
        rows.append(dict(kind="outer_constraint", label=label, bound=repr(bound), **coef))
    genie = None
    if cfg.n == 2 and cfg.delay.is_deterministic:
        genie = cap.genie_region_n2(params, cfg.delay)
        for v in genie:
            rows.append(dict(kind="genie_vertex", label=v.label, bound="", **dict(zip(dims, map(repr, v.coords)))))
    return rows, ("kind", "label", *dims, "bound"), inner, genie


def _polygon_text(inner, genie, n) -> str:
    """gnuplot data: one closed polygon (N=2) or triangle facets (N=3) per block, blocks split by blank lines."""
    import numpy as np

    blocks = []
    pts = np.array([v.coords for v in inner])
    if n == 2:
        for name, verts in (("inner", pts), ("genie", None if genie is None else np.array([v.coords for v in genie]))):
            if verts is None:
                continue
            hull = cap._hull_2d(verts)
            lines = [f"# {name}"] + [f"{x:.12g} {y:.12g}" for x, y in list(hull) + [hull[0]]]
            blocks.append("\n".join(lines))
    else:
        for tri in cap.hull_facets_3d(pts):
            lines = ["# inner facet"] + [" ".join(f"{c:.12g}" for c in q) for q in list(tri) + [tri[0]]]
            blocks.append("\n".join(lines))
    return "\n\n\n".join(blocks) + "\n"


def cmd_region(args, cfg):
    rows, cols, inner, genie = _region_rows(cfg)
    write_csv(rows, cols, cfg.out)
    if args.polygon:
        if cfg.n not in (2, 3):
            raise ValueError("polygon output is for N = 2 or 3")
        with open(args.polygon, "w", encoding="utf-8", newline="") as fh:
            fh.write(_polygon_text(inner, genie, cfg.n))


CX_COLUMNS = ("kind", "p", "r", "r2", "m", "pi", "gap", "verdict", "oracle_gap", "oracle_delta")


def cmd_counterexample(args, cfg):
    kind = args.kind
    given_pi = None if cfg.pi == "steady" else _floats(cfg.pi)
    rows = []
    if kind == "N3-delay1-m4":
        cases = [(t["p"], t["r"], t["pi"]) for t in cx.TABLE_VII] if args.p is None else [(cfg.p[0], cfg.r[0], given_pi)]
        for p, r, pi in cases:
            gap = cx.greedy_vs_tilde_gap_m4(p, r, pi)
            orc = cx.m4_oracle_gap(p, r, pi)
            rows.append(_cx_row(kind, p, r, "", 4, pi, gap, orc, suboptimal=gap > 0))
    elif kind == "general-m":
        p, r = (0.9, 0.2) if args.p is None else (cfg.p[0], cfg.r[0])
        pi = given_pi or [0.5, 0.5, 0.5]
        m = cfg.m if args.m is not None else 6
        prm = ChannelParams(p, r)
        gap = cx.greedy_vs_tilde_gap_general(m, len(pi), prm, pi)
        orc = cx.general_oracle_gap(m, prm, pi) if len(pi) * m <= 20 else None
        rows.append(_cx_row(kind, p, r, "", m, pi, gap, orc, suboptimal=gap > 0))
    elif kind == "nonidentical-N2":
        if args.p is None:
            cases = [(t["p"], t["r1"], t["r2"], t["pi"]) for t in cx.TABLE_VIII]
        else:
            if args.r2 is None:
                raise ValueError("nonidentical counterexample needs --r2")
            cases = [(cfg.p[0], cfg.r[0], args.r2, given_pi)]
        for p, r1, r2, pi in cases:
            gap = cx.nonidentical_gap(p, r1, r2, pi)
            orc = cx.nonidentical_oracle_gap(p, r1, r2, pi)
            rows.append(_cx_row(kind, p, r1, r2, 2, pi, gap, orc, suboptimal=gap < 0))
    write_csv(rows, CX_COLUMNS, cfg.out)


def _cx_row(kind, p, r, r2, m, pi, gap, oracle, suboptimal):
    return dict(
        kind=kind,
        p=f"{p:.10g}",
        r=f"{r:.10g}",
        r2="" if r2 == "" else f"{r2:.10g}",
        m=m,
        pi=";".join(f"{x:.10g}" for x in pi),
        gap=f"{gap:.12f}",
        verdict="greedy suboptimal" if suboptimal else "no violation",
        oracle_gap="" if oracle is None else f"{oracle:.12f}",
        oracle_delta="" if oracle is None else f"{abs(oracle - gap):.3e}",
    )


def cmd_table(args, cfg):
    episodes = cfg.episodes if cfg.episodes is not None else 100_000
    seed = cfg.seed if cfg.seed is not None else 0
    init = None if cfg.pi == "steady" else _floats(cfg.pi)
    rows = None if args.rows is None else {int(x) - 1 for x in args.rows.split(",")}
    write_csv(run_table(args.table_id, episodes, seed, init, rows), TABLE_COLUMNS, cfg.out)


def cmd_figure1(args, cfg):
    init = None if cfg.pi == "steady" or args.pi is None else _floats(cfg.pi)
    rows = run_figure1(range(1, args.max_m + 1), initial=init)
    fmt = [{k: (v if k == "m" else f"{v:.10f}") for k, v in row.items()} for row in rows]
    write_csv(fmt, FIGURE1_COLUMNS, cfg.out)


# ---------------------------------------------------------------------------


def _common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="key = value file; flags override it")
    sp.add_argument("--n", type=int)
    sp.add_argument("--m", type=int)
    sp.add_argument("--p", help="ON->ON probability (comma list for per-user laws)")
    sp.add_argument("--r", help="OFF->ON probability (comma list for per-user laws)")
    sp.add_argument("--delay", help="delay pmf over d = 0, 1, ..., e.g. 0.5,0.5 or 1/3,1/3,1/3")
    sp.add_argument("--pi", help="initial beliefs, comma separated, or 'steady'")
    sp.add_argument("--policy", help="greedy | greedy-queue | random | fixed:<i> | alpha:<a1,a2,a3,a4>")
    sp.add_argument("--episodes", type=int)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", help="output CSV path (default stdout)")
    sp.add_argument("--timing", action="store_true", help="fill the runtime_ms column (breaks byte-identical reruns)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="arqsched", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn, text in (
        ("capacity", cmd_capacity, "two-user and genie sum capacities, N-user bounds"),
        ("genie", cmd_genie, "finite-horizon genie-aided value"),
        ("optimal", cmd_optimal, "exact optimal value (small instances)"),
        ("value", cmd_value, "exact or simulated value of a policy"),
        ("simulate", cmd_simulate, "Monte Carlo value, optional decision log"),
        ("region", cmd_region, "capacity-region bound vertices and constraints"),
        ("counterexample", cmd_counterexample, "closed-form greedy-suboptimality gaps with exact cross-check"),
        ("table", cmd_table, "evaluate a built-in comparison table"),
        ("figure1", cmd_figure1, "rate vs horizon for genie, delayed-ARQ optimal and random scheduling"),
    ):
        sp = sub.add_parser(name, help=text)
        _common(sp)
        sp.set_defaults(func=fn)
        if name == "simulate":
            sp.add_argument("--genie", action="store_true", help="full state vector in every feedback")
            sp.add_argument("--log", help="write a per-slot decision log CSV here")
            sp.add_argument("--log-episodes", type=int, default=10)
        if name == "region":
            sp.add_argument("--polygon", help="gnuplot polygon data file (N = 2 or 3)")
        if name == "counterexample":
            sp.add_argument("--kind", required=True, choices=cx.KINDS)
            sp.add_argument("--r2", type=float, help="second user's OFF->ON probability")
        if name == "table":
            sp.add_argument("table_id", type=int, choices=(1, 2, 3, 4))
            sp.add_argument("--rows", help="1-based row numbers, comma separated")
        if name == "figure1":
            sp.add_argument("--max-m", type=int, default=8)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = resolve(args)
        args.func(args, cfg)
    except (ValueError, IndexError, InfeasibleError) as exc:
        print(f"arqsched: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
