"""Built-in parameter grids for the four comparison tables and the rate-vs-horizon figure.

Each table row keeps the reference numbers it is compared against. Initial
beliefs default to steady state; the reference numbers were produced with
initial beliefs that are not known, so large gaps on the genie-based tables
are expected (see README).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .belief import RandomPolicy
from .delay import DelayPmf
from .evaluation.compare import suboptimality_report
from .evaluation.exact import optimal_value, policy_value_exact
from .evaluation.genie import genie_value
from .system import SystemConfig


@dataclass(frozen=True)
class TableRow:
    table: int
    n: int
    m: int
    p: float
    r: float
    delay: DelayPmf
    ref_top: float  # optimal (table 1) or genie value
    ref_greedy: float
    ref_percent: float
    initial: tuple[float, ...] = field(default=())

    def config(self) -> SystemConfig:
        return SystemConfig.build(self.n, self.m, self.p, self.r, self.delay, self.initial or None)


def _frac(*xs) -> DelayPmf:
    return DelayPmf(tuple(float(Fraction(x)) for x in xs))


# delays printed with four decimals; rescaled so they sum to one exactly
TABLE_1 = tuple(
    TableRow(1, n, 7, p, r, DelayPmf.normalized(d), vo, vg, pc)
    for n, d, p, r, vo, vg, pc in (
        (3, (0.8822, 0.1178), 0.9172, 0.2858, 6.0707, 6.0696, 0.0182),
        (4, (0.5387, 0.4613), 0.9464, 0.1666, 5.9700, 5.9586, 0.1910),
        (3, (0.5908, 0.3959, 0.0132), 0.6619, 0.2389, 3.9933, 3.9914, 0.0476),
        (4, (0.6647, 0.1844, 0.1510), 0.9281, 0.2824, 5.8934, 5.8854, 0.1364),
    )
)

_D1 = (_frac(0, 1), _frac("1/3", "2/3"), _frac("1/2", "1/2"), _frac("2/3", "1/3"))
_D2 = (
    _frac(0, 0, 1),
    _frac("1/6", "1/3", "1/2"),
    _frac("1/3", "1/3", "1/3"),
    _frac("1/2", "1/3", "1/6"),
)


def _block(table, n, p, r, delays, refs):
    return tuple(TableRow(table, n, 10, p, r, d, *ref) for d, ref in zip(delays, refs))


TABLE_2 = (
    _block(2, 10, 0.5848, 0.3509, _D1, ((5.3908, 5.2912, 1.8470), (5.6547, 5.4281, 4.0072), (5.7867, 5.4987, 4.9771), (5.9187, 5.5712, 5.8703)))
    + _block(2, 10, 0.6392, 0.2328, _D1, ((5.5279, 5.2067, 5.8109), (5.9195, 5.4119, 8.5741), (6.1152, 5.5208, 9.7203), (6.3110, 5.6353, 10.7070)))
    + _block(2, 20, 0.9148, 0.4309, _D1, ((8.8565, 8.8254, 0.3504), (8.9715, 8.9291, 0.4723), (9.0290, 8.9820, 0.5203), (9.0865, 9.0357, 0.5593)))
    + _block(2, 20, 0.3079, 0.2517, _D1, ((3.4487, 3.4371, 0.3368), (3.5525, 3.4661, 2.4315), (3.6043, 3.4807, 3.4300), (3.6562, 3.4955, 4.3967)))
)

TABLE_3 = (
    _block(3, 10, 0.2148, 0.1100, _D2, ((2.0196, 2.0162, 0.1716), (2.1261, 2.0384, 4.1241), (2.2152, 2.0577, 7.1089), (2.3018, 2.0772, 9.7568)))
    + _block(3, 10, 0.6863, 0.4136, _D2, ((6.2768, 6.2571, 0.3131), (6.4895, 6.3813, 1.6663), (6.6375, 6.4743, 2.4587), (6.7764, 6.5677, 3.0792)))
    + _block(3, 20, 0.8822, 0.2816, _D2, ((8.0485, 7.9811, 0.8376), (8.3208, 8.1880, 1.5952), (8.4754, 8.3186, 1.8493), (8.6131, 8.4490, 1.9057)))
    + _block(3, 20, 0.7120, 0.5713, _D2, ((7.0084, 7.0066, 0.0251), (7.0868, 7.0585, 0.3989), (7.1495, 7.1017, 0.6675), (7.2099, 7.1448, 0.9018)))
)

TABLE_4 = _block(4, 20, 0.6, 0.4, _D2, ((5.6342, 5.6232, 0.1953), (5.8068, 5.7105, 1.6592), (5.9357, 5.7797, 2.6283), (6.0584, 5.8494, 3.4499))) + _block(
    4, 20, 0.9, 0.1, _D2, ((7.9848, 7.7252, 3.2520), (8.3585, 8.0181, 4.0726), (8.5551, 8.1843, 4.3347), (8.7265, 8.3522, 4.2890))
)

TABLES = {1: TABLE_1, 2: TABLE_2, 3: TABLE_3, 4: TABLE_4}

TABLE_COLUMNS = (
    "table", "row", "N", "m", "p", "r", "delay_pmf", "pi", "benchmark",
    "v_benchmark", "v_greedy", "percent", "greedy_stderr", "episodes", "seed",
    "ref_benchmark", "ref_greedy", "ref_percent",
)


def run_table(table_id: int, episodes: int = 100_000, seed: int = 0, initial=None, rows=None) -> list[dict[str, str]]:
    """Evaluate a table preset. ``initial`` overrides the steady-state start for every row."""
    if table_id not in TABLES:
        raise ValueError(f"no table {table_id}; choose 1-4")
    out = []
    for idx, row in enumerate(TABLES[table_id]):
        if rows is not None and idx not in rows:
            continue
        cfg = row.config()
        if initial is not None:
            cfg = SystemConfig.build(row.n, row.m, row.p, row.r, row.delay, initial)
        force = "optimal" if table_id == 1 else "genie"
        rep = suboptimality_report(cfg, episodes=episodes, seed=seed, force=force)
        echo = cfg.echo()
        out.append(
            {
                "table": str(table_id),
                "row": str(idx + 1),
                "N": echo["N"],
                "m": echo["m"],
                "p": echo["p"],
                "r": echo["r"],
                "delay_pmf": echo["delay_pmf"],
                "pi": echo["pi"],
                "benchmark": rep.benchmark,
                "v_benchmark": f"{rep.v_benchmark:.6f}",
                "v_greedy": f"{rep.v_greedy:.6f}",
                "percent": f"{rep.percent:.4f}",
                "greedy_stderr": "" if rep.greedy_stderr is None else f"{rep.greedy_stderr:.6f}",
                "episodes": "" if rep.episodes is None else str(rep.episodes),
                "seed": "" if rep.episodes is None else str(seed),
                "ref_benchmark": f"{row.ref_top:.4f}",
                "ref_greedy": f"{row.ref_greedy:.4f}",
                "ref_percent": f"{row.ref_percent:.4f}",
            }
        )
    return out


# rate-vs-horizon figure: three users, uniform delay over {0, 1, 2}
FIGURE1 = dict(p=0.87, r=0.1083, delay=_frac("1/3", "1/3", "1/3"), initial=(0.3358, 0.1851, 0.5483))
FIGURE1_COLUMNS = ("m", "genie_rate", "arq_optimal_rate", "random_rate")


def run_figure1(horizons=range(1, 9), p=None, r=None, delay=None, initial=None) -> list[dict[str, float]]:
    """Per-slot rates of the genie optimum, the delayed-ARQ optimum and random scheduling."""
    p = FIGURE1["p"] if p is None else p
    r = FIGURE1["r"] if r is None else r
    delay = FIGURE1["delay"] if delay is None else delay
    initial = FIGURE1["initial"] if initial is None else tuple(initial)
    rows = []
    for m in horizons:
        cfg = SystemConfig.build(len(initial), m, p, r, delay, initial)
        rows.append(
            {
                "m": m,
                "genie_rate": genie_value(cfg).total / m,
                "arq_optimal_rate": optimal_value(cfg).total / m,
                "random_rate": policy_value_exact(cfg, RandomPolicy()).total / m,
            }
        )
    return rows
