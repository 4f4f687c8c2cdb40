"""Sum capacity and capacity-region bounds for the delayed-ARQ downlink.

Capacities are per-slot throughputs under steady-state beliefs. Because the
delay pmf has finite support, every series here is a finite sum.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import ChannelParams, t_operator
from .delay import DelayPmf, as_pmf, freshness_pmf

HULL_TOL = 1e-9


@dataclass(frozen=True)
class CapacityResult:
    value: float
    terms: tuple[float, ...]  # contribution of each freshness l = 0..d_max

    def __float__(self):
        return self.value


def _freshness_weights(pmf: DelayPmf) -> list[float]:
    # long-run freshness law: enough elapsed slots that "nothing yet" is impossible
    law = freshness_pmf(pmf, pmf.d_max + 1)
    return [law[l] for l in range(pmf.d_max + 1)]


def _series(per_l, pmf: DelayPmf) -> CapacityResult:
    terms = tuple(per_l(l) * w for l, w in enumerate(_freshness_weights(pmf)))
    return CapacityResult(math.fsum(terms), terms)


def sum_capacity_two_user(params: ChannelParams, pmf) -> CapacityResult:
    pmf = as_pmf(pmf)
    ps = params.steady
    return _series(lambda l: ps * t_operator(params.p, l, params) + (1 - ps) * ps, pmf)


def genie_sum_capacity(params: ChannelParams, pmf, n: int) -> CapacityResult:
    if n < 1:
        raise ValueError("need at least one user")
    pmf = as_pmf(pmf)
    off = (1 - params.steady) ** n

    def per_l(l):
        return (1 - off) * t_operator(params.p, l, params) + off * t_operator(params.r, l, params)

    return _series(per_l, pmf)


def sum_capacity_bounds(params: ChannelParams, pmf, n: int) -> dict[str, float]:
    """Lower and upper bounds on the N-user sum capacity (N > 2)."""
    if n <= 2:
        raise ValueError("for N <= 2 the sum capacity is known exactly; use sum_capacity_two_user")
    lower = sum_capacity_two_user(params, pmf).value
    upper = genie_sum_capacity(params, pmf, n).value
    return {"lower": lower, "upper": upper}


# ---------------------------------------------------------------------------
# region


@dataclass(frozen=True)
class RegionVertex:
    label: str
    coords: tuple[float, ...]


@dataclass(frozen=True)
class OuterPolytope:
    """Constraints sum_{i in S} x_i <= bound, one per nonempty user subset S (0-based)."""

    n: int
    constraints: tuple[tuple[tuple[int, ...], float], ...]

    def violation(self, point: Sequence[float]) -> float:
        """Largest amount by which the point breaks a constraint (<= 0 means inside)."""
        x = np.asarray(point, dtype=float)
        worst = float(-x.min()) if len(x) else 0.0
        for subset, bound in self.constraints:
            worst = max(worst, float(x[list(subset)].sum()) - bound)
        return worst

    def contains(self, point, tol: float = HULL_TOL) -> bool:
        return self.violation(point) <= tol


def _vertex_name(prefix: str, idx: Sequence[int]) -> str:
    return prefix + "_" + ",".join(str(i + 1) for i in idx)


def region_bounds(params: ChannelParams, pmf, n: int) -> tuple[OuterPolytope, list[RegionVertex]]:
    if n < 2:
        raise ValueError("region bounds need N >= 2")
    pmf = as_pmf(pmf)
    genie = {k: genie_sum_capacity(params, pmf, k).value for k in range(1, n + 1)}
    cons = []
    for size in range(1, n + 1):
        for subset in itertools.combinations(range(n), size):
            cons.append((subset, genie[size]))
    outer = OuterPolytope(n, tuple(cons))

    ps = params.steady
    half = sum_capacity_two_user(params, pmf).value / 2
    inner = [RegionVertex("O", (0.0,) * n)]
    for i in range(n):
        x = [0.0] * n
        x[i] = ps
        inner.append(RegionVertex(_vertex_name("X", [i]), tuple(x)))
    for j, k in itertools.combinations(range(n), 2):
        y = [0.0] * n
        y[j] = y[k] = half
        inner.append(RegionVertex(_vertex_name("Y", [j, k]), tuple(y)))
    return outer, inner


def _deterministic_delay(pmf_or_d) -> int:
    if isinstance(pmf_or_d, (int, np.integer)):
        if pmf_or_d < 0:
            raise ValueError("delay must be nonnegative")
        return int(pmf_or_d)
    pmf = as_pmf(pmf_or_d)
    if not pmf.is_deterministic:
        raise ValueError("the exact two-user genie region needs a deterministic delay")
    return pmf.d_max


def z_points(params: ChannelParams, d) -> tuple[tuple[float, float], tuple[float, float]]:
    d = _deterministic_delay(d)
    ps = params.steady
    tp, tr = t_operator(params.p, d, params), t_operator(params.r, d, params)
    z1 = (ps * tp + (1 - ps) ** 2 * tr, (1 - ps) * ps * tp)
    return z1, (z1[1], z1[0])


def genie_region_n2(params: ChannelParams, d) -> list[RegionVertex]:
    """Vertices O, X_1, Z_1, Z_2, X_2 of the two-user genie capacity region."""
    ps = params.steady
    z1, z2 = z_points(params, d)
    return [
        RegionVertex("O", (0.0, 0.0)),
        RegionVertex("X_1", (ps, 0.0)),
        RegionVertex("Z_1", z1),
        RegionVertex("Z_2", z2),
        RegionVertex("X_2", (0.0, ps)),
    ]


def alpha_throughputs(params: ChannelParams, d, alpha: Sequence[float]) -> tuple[float, float, float]:
    """(mu1, mu2, mu1 + mu2) of the genie scheduler driven by the state pair d+1 slots back.

    alpha[k] is the probability of picking user 1 when that pair is
    (0,0), (0,1), (1,0), (1,1) for k = 0..3.
    """
    d = _deterministic_delay(d)
    a1, a2, a3, a4 = (float(a) for a in alpha)
    if len(alpha) != 4 or any(not 0.0 <= a <= 1.0 for a in (a1, a2, a3, a4)):
        raise ValueError(f"alpha must lie in [0,1]^4, got {tuple(alpha)}")
    ps = params.steady
    q = 1 - ps
    tp, tr = t_operator(params.p, d, params), t_operator(params.r, d, params)
    mu1 = q * q * a1 * tr + q * ps * a2 * tr + ps * q * a3 * tp + ps * ps * a4 * tp
    mu2 = q * q * (1 - a1) * tr + q * ps * (1 - a2) * tp + ps * q * (1 - a3) * tr + ps * ps * (1 - a4) * tp
    return mu1, mu2, mu1 + mu2


def e_points(params: ChannelParams, d, alpha: Sequence[float]) -> tuple[tuple[float, float], tuple[float, float]]:
    """Points on edges X_1Z_1 and X_2Z_2 whose coordinate sum equals mu1 + mu2 (needs alpha3 > alpha2)."""
    a2, a3 = float(alpha[1]), float(alpha[2])
    if not a3 > a2:
        raise ValueError("E points are defined for alpha3 > alpha2")
    ps = params.steady
    z1, _ = z_points(params, d)
    g = a3 - a2
    e1 = (ps * (1 - g) + z1[0] * g, z1[1] * g)
    return e1, (e1[1], e1[0])


# ---------------------------------------------------------------------------
# hull membership


def _coords(vertices) -> np.ndarray:
    pts = [v.coords if isinstance(v, RegionVertex) else v for v in vertices]
    return np.asarray(pts, dtype=float)


def _hull_2d(pts: np.ndarray) -> np.ndarray:
    """Counter-clockwise hull by the monotone chain, collinear points dropped."""
    uniq = sorted(set(map(tuple, pts)))
    if len(uniq) <= 2:
        return np.asarray(uniq)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for q in uniq:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], q) <= 0:
            lower.pop()
        lower.append(q)
    upper: list = []
    for q in reversed(uniq):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], q) <= 0:
            upper.pop()
        upper.append(q)
    return np.asarray(lower[:-1] + upper[:-1])


def _on_segment(a, b, x, tol) -> bool:
    ab = b - a
    L = float(ab @ ab)
    if L == 0.0:
        return float(np.abs(x - a).max()) <= tol
    s = min(1.0, max(0.0, float((x - a) @ ab) / L))
    return float(np.abs(a + s * ab - x).max()) <= tol


def _contains_2d(pts, x, tol) -> bool:
    hull = _hull_2d(pts)
    if len(hull) == 1:
        return float(np.abs(hull[0] - x).max()) <= tol
    if len(hull) == 2:
        return _on_segment(hull[0], hull[1], x, tol)
    for i in range(len(hull)):
        a, b = hull[i], hull[(i + 1) % len(hull)]
        edge = b - a
        # outward distance of x from edge a->b (hull is counter-clockwise)
        out = (edge[1] * (x[0] - a[0]) - edge[0] * (x[1] - a[1])) / math.hypot(*edge)
        if out > tol:
            return False
    return True


def _contains_3d(pts, x, tol) -> bool | None:
    facets = 0
    for i, j, k in itertools.combinations(range(len(pts)), 3):
        nrm = np.cross(pts[j] - pts[i], pts[k] - pts[i])
        size = float(np.linalg.norm(nrm))
        if size < 1e-14:
            continue
        nrm = nrm / size
        side = (pts - pts[i]) @ nrm
        if side.max() <= 1e-12:
            pass
        elif side.min() >= -1e-12:
            nrm, side = -nrm, -side
        else:
            continue
        facets += 1
        if float((x - pts[i]) @ nrm) > tol:
            return False
    if facets == 0:
        return None  # flat vertex set; let the general solver decide
    return True


def _contains_lp(pts, x, tol) -> bool:
    from scipy.optimize import linprog

    k, n = pts.shape
    # find beta >= 0 with sum beta = 1 and pts^T beta = x, minimising the l1 residual
    a_eq = np.zeros((n + 1, k + 2 * n))
    a_eq[:n, :k] = pts.T
    a_eq[:n, k : k + n] = np.eye(n)
    a_eq[:n, k + n :] = -np.eye(n)
    a_eq[n, :k] = 1.0
    b_eq = np.concatenate([x, [1.0]])
    cost = np.concatenate([np.zeros(k), np.ones(2 * n)])
    res = linprog(cost, A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    return bool(res.status == 0 and res.fun <= tol)


def hull_contains(vertices, point, tol: float = HULL_TOL) -> bool:
    """True iff ``point`` is a convex combination of ``vertices`` (within ``tol``)."""
    pts = _coords(vertices)
    x = np.asarray(point, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != x.shape[0]:
        raise ValueError(f"point of dimension {x.shape[0]} against vertices of dimension {pts.shape[-1]}")
    if pts.shape[1] == 2:
        return _contains_2d(pts, x, tol)
    if pts.shape[1] == 3:
        got = _contains_3d(pts, x, tol)
        if got is not None:
            return got
    return _contains_lp(pts, x, tol)


def hull_facets_3d(pts) -> list[np.ndarray]:
    """Triangles (as 3x3 vertex arrays) covering the boundary of a 3-d hull."""
    pts = np.asarray(pts, dtype=float)
    out = []
    for i, j, k in itertools.combinations(range(len(pts)), 3):
        nrm = np.cross(pts[j] - pts[i], pts[k] - pts[i])
        if np.linalg.norm(nrm) < 1e-14:
            continue
        side = (pts - pts[i]) @ nrm
        if side.max() <= 1e-12 or side.min() >= -1e-12:
            out.append(pts[[i, j, k]])
    return out
