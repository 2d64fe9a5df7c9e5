"""Drone repositioning strategies for one timeslot's active users.

Four placements are supported: the static cell center, the center of the
smallest bounding circle of the users (SBC, minimax fairness), the point
of maximum aggregate rate (MAR), and the center-most point of the two
(CMP). All solvers work in a normalized frame with the cell center at the
origin and unit cell radius; public results are mapped back to metric
coordinates. Everything here is deterministic: identical inputs produce
bit-identical outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import rate_function
from .params import ScenarioParams

_CONTAINMENT_SLACK = 1e-9
# multiplicative tolerance for point-in-circle tests; keeps the incremental
# construction stable without inflating the circle measurably
_IN_CIRCLE_EPS = 1.0 + 1e-12
_COLLINEAR_EPS = 1e-12

_NM_STEP = 0.05
_NM_XATOL = 1e-10
_NM_FATOL = 1e-10
_NM_MAX_ITER = 500


class Strategy(str, Enum):
    STATIC = "static"
    SBC = "sbc"
    MAR = "mar"
    CMP = "cmp"


@dataclass(frozen=True, eq=False)
class UserSet:
    """Active users of one timeslot inside a designated cell.

    users has shape (n, 2) in meters; may be empty (idle timeslot). Every
    user must lie within d_max of cell_center.
    """

    users: np.ndarray
    cell_center: np.ndarray
    d_max: float

    def __post_init__(self) -> None:
        users = np.asarray(self.users, dtype=float)
        if users.size == 0:
            users = users.reshape(0, 2)
        users = np.atleast_2d(users)
        if users.ndim != 2 or users.shape[1] != 2:
            raise ValueError(f"users must have shape (n, 2), got {users.shape}")
        center = np.asarray(self.cell_center, dtype=float).reshape(2)
        if not (np.all(np.isfinite(users)) and np.all(np.isfinite(center))):
            raise ValueError("coordinates must be finite")
        if not self.d_max > 0.0:
            raise ValueError(f"cell radius must be positive, got {self.d_max}")
        r = np.hypot(users[:, 0] - center[0], users[:, 1] - center[1])
        if np.any(r > self.d_max * (1.0 + _CONTAINMENT_SLACK) + _CONTAINMENT_SLACK):
            raise ValueError("every user must lie inside the designated cell")
        object.__setattr__(self, "users", users)
        object.__setattr__(self, "cell_center", center)
        object.__setattr__(self, "d_max", float(self.d_max))

    @property
    def n_users(self) -> int:
        return self.users.shape[0]

    def normalized(self) -> np.ndarray:
        """User coordinates with the cell center at the origin, unit radius."""
        return (self.users - self.cell_center) / self.d_max


@dataclass(frozen=True, eq=False)
class PlacementResult:
    """Drone position chosen by one strategy plus the per-user geometry.

    kappas[i] is the horizontal distance from user i to the position,
    normalized by the cell radius. aggregate_rate is the summed per-user
    expected rate, or None when no channel context was supplied.
    """

    strategy: Strategy
    position: np.ndarray
    kappas: np.ndarray
    aggregate_rate: float | None = None


# ---------------------------------------------------------------------------
# Smallest enclosing circle (exact, move-to-front incremental)
# ---------------------------------------------------------------------------

def min_enclosing_circle(points) -> tuple[np.ndarray, float]:
    """Exact smallest circle containing all points: (center, radius).

    Incremental construction with move-to-front restarts; the circle is
    determined by at most three boundary points. Near-collinear triples
    whose circumcircle determinant vanishes fall back to diameter circles.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise ValueError("need at least one point")
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"points must have shape (n, 2), got {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise ValueError("coordinates must be finite")
    p_list = [(float(x), float(y)) for x, y in pts]
    cx, cy, r = _mec_incremental(p_list)
    return np.array([cx, cy]), r


def _in_circle(c, p) -> bool:
    return math.hypot(p[0] - c[0], p[1] - c[1]) <= c[2] * _IN_CIRCLE_EPS


def _diameter_circle(p, q):
    cx = (p[0] + q[0]) / 2.0
    cy = (p[1] + q[1]) / 2.0
    r = max(math.hypot(cx - p[0], cy - p[1]), math.hypot(cx - q[0], cy - q[1]))
    return (cx, cy, r)


def _circumcircle(p, q, s):
    # centered for conditioning; None when the triple is (near-)collinear
    ox = (min(p[0], q[0], s[0]) + max(p[0], q[0], s[0])) / 2.0
    oy = (min(p[1], q[1], s[1]) + max(p[1], q[1], s[1])) / 2.0
    ax, ay = p[0] - ox, p[1] - oy
    bx, by = q[0] - ox, q[1] - oy
    sx, sy = s[0] - ox, s[1] - oy
    d = 2.0 * (ax * (by - sy) + bx * (sy - ay) + sx * (ay - by))
    scale = max(abs(ax), abs(ay), abs(bx), abs(by), abs(sx), abs(sy))
    if abs(d) <= _COLLINEAR_EPS * scale * scale:
        return None
    x = ox + ((ax * ax + ay * ay) * (by - sy) + (bx * bx + by * by) * (sy - ay)
              + (sx * sx + sy * sy) * (ay - by)) / d
    y = oy + ((ax * ax + ay * ay) * (sx - bx) + (bx * bx + by * by) * (ax - sx)
              + (sx * sx + sy * sy) * (bx - ax)) / d
    r = max(math.hypot(x - p[0], y - p[1]),
            math.hypot(x - q[0], y - q[1]),
            math.hypot(x - s[0], y - s[1]))
    return (x, y, r)


def _cross(ox, oy, ax, ay, bx, by) -> float:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def _mec_incremental(pts):
    c = None
    for i, p in enumerate(pts):
        if c is None or not _in_circle(c, p):
            c = _mec_with_one(pts[: i + 1], p)
    return c


def _mec_with_one(pts, p):
    c = (p[0], p[1], 0.0)
    for i, q in enumerate(pts):
        if not _in_circle(c, q):
            c = _diameter_circle(p, q) if c[2] == 0.0 else _mec_with_two(pts[: i + 1], p, q)
    return c


def _mec_with_two(pts, p, q):
    circ = _diameter_circle(p, q)
    left = None
    right = None
    for s in pts:
        if _in_circle(circ, s):
            continue
        side = _cross(p[0], p[1], q[0], q[1], s[0], s[1])
        c = _circumcircle(p, q, s)
        if c is None:
            continue
        d = _cross(p[0], p[1], q[0], q[1], c[0], c[1])
        if side > 0.0 and (left is None
                           or d > _cross(p[0], p[1], q[0], q[1], left[0], left[1])):
            left = c
        elif side < 0.0 and (right is None
                             or d < _cross(p[0], p[1], q[0], q[1], right[0], right[1])):
            right = c
    if left is None and right is None:
        return circ
    if left is None:
        return right
    if right is None:
        return left
    return left if left[2] <= right[2] else right


# ---------------------------------------------------------------------------
# Strategies
# ---------------------------------------------------------------------------

def _make_rate(theta_edge_deg, params):
    if theta_edge_deg is None and params is None:
        return None
    if theta_edge_deg is None or params is None:
        raise ValueError("supply both theta_edge_deg and params, or neither")
    return rate_function(theta_edge_deg, params)


def _result(strategy: Strategy, users: UserSet, pos_norm, rate) -> PlacementResult:
    pos_norm = np.asarray(pos_norm, dtype=float)
    u = users.normalized()
    kappas = np.hypot(u[:, 0] - pos_norm[0], u[:, 1] - pos_norm[1])
    aggregate = float(np.sum(rate(kappas))) if rate is not None else None
    position = users.cell_center + pos_norm * users.d_max
    return PlacementResult(strategy=strategy, position=position,
                           kappas=kappas, aggregate_rate=aggregate)


def static_position(users: UserSet, theta_edge_deg: float | None = None,
                    params: ScenarioParams | None = None) -> PlacementResult:
    """Baseline: the drone stays at the cell center."""
    rate = _make_rate(theta_edge_deg, params)
    return _result(Strategy.STATIC, users, np.zeros(2), rate)


def sbc_position(users: UserSet, theta_edge_deg: float | None = None,
                 params: ScenarioParams | None = None) -> PlacementResult:
    """Center of the smallest bounding circle of the active users.

    Minimizes the largest user distance; no user is ever left beyond the
    cell radius. An empty timeslot places the drone at the cell center.
    """
    rate = _make_rate(theta_edge_deg, params)
    if users.n_users == 0:
        return _result(Strategy.SBC, users, np.zeros(2), rate)
    center, _ = min_enclosing_circle(users.normalized())
    return _result(Strategy.SBC, users, center, rate)


def mar_objective(position, users: UserSet, theta_edge_deg: float,
                  params: ScenarioParams) -> float:
    """Aggregate expected rate over all users for a candidate drone position.

    The position must lie inside the cell disc.
    """
    rate = rate_function(theta_edge_deg, params)
    pos = np.asarray(position, dtype=float).reshape(2)
    pos_norm = (pos - users.cell_center) / users.d_max
    if math.hypot(pos_norm[0], pos_norm[1]) > 1.0 + _CONTAINMENT_SLACK:
        raise ValueError("candidate position lies outside the cell disc")
    u = users.normalized()
    kappas = np.hypot(u[:, 0] - pos_norm[0], u[:, 1] - pos_norm[1])
    return float(np.sum(rate(kappas)))


def mar_position(users: UserSet, theta_edge_deg: float,
                 params: ScenarioParams) -> PlacementResult:
    """Approximate global maximizer of the aggregate rate over the cell disc.

    Multi-start simplex descent seeded at the cell center, every user,
    the SBC center and the best of a coarse polar grid; the returned
    objective is never below any of those candidates. An empty timeslot
    places the drone at the cell center.
    """
    rate = _make_rate(theta_edge_deg, params)
    if users.n_users == 0:
        return _result(Strategy.MAR, users, np.zeros(2), rate)
    u = users.normalized()[None, :, :]
    sbc_center, _ = min_enclosing_circle(users.normalized())
    pos, _ = solve_mar_batch(u, rate, sbc_center[None, :])
    return _result(Strategy.MAR, users, pos[0], rate)


def cmp_position(users: UserSet, theta_edge_deg: float,
                 params: ScenarioParams) -> PlacementResult:
    """Center-most point: whichever of the SBC and MAR positions lies
    closer to the cell center; ties go to the SBC (fairness) position."""
    sbc = sbc_position(users, theta_edge_deg, params)
    mar = mar_position(users, theta_edge_deg, params)
    c = users.cell_center
    d_sbc = math.hypot(*(sbc.position - c))
    d_mar = math.hypot(*(mar.position - c))
    chosen = sbc if d_sbc <= d_mar else mar
    return PlacementResult(strategy=Strategy.CMP, position=chosen.position,
                           kappas=chosen.kappas,
                           aggregate_rate=chosen.aggregate_rate)


# ---------------------------------------------------------------------------
# Batched MAR solver
# ---------------------------------------------------------------------------

def _coarse_polar_grid() -> np.ndarray:
    radii = np.array([0.25, 0.5, 0.75, 1.0])
    angles = np.arange(16) * (2.0 * math.pi / 16.0)
    r, a = np.meshgrid(radii, angles, indexing="ij")
    return np.stack([r * np.cos(a), r * np.sin(a)], axis=-1).reshape(-1, 2)


_POLAR_GRID = _coarse_polar_grid()


def _aggregate_rates(positions: np.ndarray, users: np.ndarray, rate) -> np.ndarray:
    """Objective at many candidate positions: positions (B, P, 2) against
    users (B, N, 2) -> (B, P)."""
    dx = users[:, None, :, 0] - positions[:, :, None, 0]
    dy = users[:, None, :, 1] - positions[:, :, None, 1]
    return rate(np.hypot(dx, dy)).sum(axis=-1)


def solve_mar_batch(users: np.ndarray, rate, sbc_centers: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray]:
    """Solve the MAR placement for a batch of same-size instances.

    users: (B, N, 2) in the normalized frame (cell center at the origin,
    unit radius), N >= 1; sbc_centers: (B, 2). Returns (positions (B, 2),
    objectives (B,)). Each instance is solved independently, so results do
    not depend on how instances are batched together.
    """
    users = np.asarray(users, dtype=float)
    b, n, _ = users.shape
    grid_vals = _aggregate_rates(np.broadcast_to(_POLAR_GRID, (b,) + _POLAR_GRID.shape),
                                 users, rate)
    grid_best = _POLAR_GRID[np.argmax(grid_vals, axis=1)]
    starts = np.concatenate([
        np.zeros((b, 1, 2)),
        users,
        sbc_centers[:, None, :],
        grid_best[:, None, :],
    ], axis=1)  # (B, S, 2)
    s = starts.shape[1]
    inst_users = np.repeat(users, s, axis=0)  # (B*S, N, 2)

    def neg_objective(x: np.ndarray, idx: np.ndarray) -> np.ndarray:
        uu = inst_users[idx]
        dx = uu[:, :, 0] - x[:, None, 0]
        dy = uu[:, :, 1] - x[:, None, 1]
        return -rate(np.hypot(dx, dy)).sum(axis=-1)

    finals, _ = _nelder_mead_batch(neg_objective, starts.reshape(-1, 2))
    # project onto the closed cell disc (a projection never lowers the
    # objective: users live inside the disc)
    radius = np.hypot(finals[:, 0], finals[:, 1])
    outside = radius > 1.0
    if np.any(outside):
        finals[outside] /= radius[outside, None]
    finals = finals.reshape(b, s, 2)
    # candidate set: refined finals first, then the raw starts, so that the
    # first-occurrence argmax prefers refined points on exact ties
    candidates = np.concatenate([finals, starts], axis=1)
    values = _aggregate_rates(candidates, users, rate)
    pick = np.argmax(values, axis=1)
    rows = np.arange(b)
    return candidates[rows, pick], values[rows, pick]


def _nelder_mead_batch(fun, x0: np.ndarray, step: float = _NM_STEP,
                       xatol: float = _NM_XATOL, fatol: float = _NM_FATOL,
                       max_iter: int = _NM_MAX_ITER
                       ) -> tuple[np.ndarray, np.ndarray]:
    """Minimize fun independently for a batch of 2-D start points.

    fun(x (K, 2), idx (K,)) evaluates instances idx at positions x.
    Standard reflection/expansion/contraction/shrink simplex updates,
    vectorized across instances; converged instances freeze so results are
    independent of batch composition. Returns (best points, best values).
    """
    m = x0.shape[0]
    sim = np.repeat(x0[:, None, :], 3, axis=1)
    sim[:, 1, 0] += step
    sim[:, 2, 1] += step
    idx_all = np.arange(m)
    fsim = np.stack([fun(sim[:, j], idx_all) for j in range(3)], axis=1)
    sim, fsim = _sorted_simplex(sim, fsim)
    active = np.ones(m, dtype=bool)

    for _ in range(max_iter):
        ii = np.flatnonzero(active)
        if ii.size == 0:
            break
        s = sim[ii]
        f = fsim[ii]
        k = ii.size
        xbar = 0.5 * (s[:, 0] + s[:, 1])
        xr = 2.0 * xbar - s[:, 2]
        fr = fun(xr, ii)

        new_x = np.empty((k, 2))
        new_f = np.empty(k)
        shrink = np.zeros(k, dtype=bool)

        expand = fr < f[:, 0]
        if np.any(expand):
            j = np.flatnonzero(expand)
            xe = 3.0 * xbar[j] - 2.0 * s[j, 2]
            fe = fun(xe, ii[j])
            take_e = fe < fr[j]
            new_x[j] = np.where(take_e[:, None], xe, xr[j])
            new_f[j] = np.where(take_e, fe, fr[j])

        reflect = ~expand & (fr < f[:, 1])
        new_x[reflect] = xr[reflect]
        new_f[reflect] = fr[reflect]

        contract = ~expand & ~reflect
        if np.any(contract):
            j_out = np.flatnonzero(contract & (fr < f[:, 2]))
            if j_out.size:
                xc = 1.5 * xbar[j_out] - 0.5 * s[j_out, 2]
                fc = fun(xc, ii[j_out])
                ok = fc <= fr[j_out]
                new_x[j_out] = np.where(ok[:, None], xc, new_x[j_out])
                new_f[j_out] = np.where(ok, fc, new_f[j_out])
                shrink[j_out] = ~ok
            j_in = np.flatnonzero(contract & (fr >= f[:, 2]))
            if j_in.size:
                xcc = 0.5 * xbar[j_in] + 0.5 * s[j_in, 2]
                fcc = fun(xcc, ii[j_in])
                ok = fcc < f[j_in, 2]
                new_x[j_in] = np.where(ok[:, None], xcc, new_x[j_in])
                new_f[j_in] = np.where(ok, fcc, new_f[j_in])
                shrink[j_in] = ~ok

        keep = ~shrink
        s[keep, 2] = new_x[keep]
        f[keep, 2] = new_f[keep]
        if np.any(shrink):
            j = np.flatnonzero(shrink)
            s[j, 1] = s[j, 0] + 0.5 * (s[j, 1] - s[j, 0])
            s[j, 2] = s[j, 0] + 0.5 * (s[j, 2] - s[j, 0])
            f[j, 1] = fun(s[j, 1], ii[j])
            f[j, 2] = fun(s[j, 2], ii[j])

        s, f = _sorted_simplex(s, f)
        sim[ii] = s
        fsim[ii] = f
        span = np.max(np.abs(s[:, 1:] - s[:, :1]), axis=(1, 2))
        spread = np.max(np.abs(f[:, 1:] - f[:, :1]), axis=1)
        done = (span <= xatol) & (spread <= fatol)
        active[ii[done]] = False

    return sim[:, 0].copy(), fsim[:, 0].copy()


def _sorted_simplex(sim: np.ndarray, fsim: np.ndarray):
    order = np.argsort(fsim, axis=1, kind="stable")
    return (np.take_along_axis(sim, order[:, :, None], axis=1),
            np.take_along_axis(fsim, order, axis=1))
