"""Air-to-ground channel model: LoS probability, path loss, per-user rate.

All public angle arguments are in degrees, distances in meters, losses in
dB. Rates are in bits/symbol and are normalized so that a user at the
cell edge receives exactly 1.0; absolute transmit power and noise levels
therefore never appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import SPEED_OF_LIGHT, ScenarioParams


def _p_los_raw(theta_user_deg, params: ScenarioParams):
    return 1.0 / (1.0 + params.a * np.exp(-params.b * (theta_user_deg - params.a)))


def _scalar_like(out, ref):
    return float(out) if np.ndim(ref) == 0 else out


def p_los(theta_user_deg, params: ScenarioParams):
    """Line-of-sight probability at a user elevation angle (degrees).

    S-curve fit in the elevation angle; strictly increasing, in (0, 1).
    Accepts scalars or arrays.
    """
    th = np.asarray(theta_user_deg, dtype=float)
    if np.any(th < 0.0) or np.any(th > 90.0):
        raise ValueError("elevation angle must lie in [0, 90] degrees")
    return _scalar_like(_p_los_raw(th, params), theta_user_deg)


def fspl_offset_db(params: ScenarioParams) -> float:
    """Frequency part of the free-space path loss: 20*log10(4*pi*f/c), dB."""
    return 20.0 * math.log10(params.freq_hz * 4.0 * math.pi / SPEED_OF_LIGHT)


def _path_loss(d, params, directivity_db, eta):
    dist = np.asarray(d, dtype=float)
    if np.any(dist <= 0.0):
        raise ValueError("propagation distance must be positive")
    out = -directivity_db + 20.0 * np.log10(dist) + fspl_offset_db(params) + eta
    return _scalar_like(out, d)


def path_loss_los(d, params: ScenarioParams, directivity_db: float = 0.0):
    """Path loss of the LoS group at slant distance d (meters), dB."""
    return _path_loss(d, params, directivity_db, params.eta_los)


def path_loss_nlos(d, params: ScenarioParams, directivity_db: float = 0.0):
    """Path loss of the NLoS group at slant distance d (meters), dB."""
    return _path_loss(d, params, directivity_db, params.eta_nlos)


def g_pos(kappa, theta_edge_deg: float, params: ScenarioParams):
    """Horizontal repositioning gain, dB: the kappa-dependent part of the
    expected path loss for a user at normalized horizontal distance kappa.

    The user elevation angle follows from the cell geometry,
    theta_user = arctan(tan(theta_edge)/kappa), which is 90 degrees for a
    user directly under the drone (kappa = 0). Strictly increasing in
    kappa.
    """
    k = np.asarray(kappa, dtype=float)
    if np.any(k < 0.0):
        raise ValueError("kappa must be non-negative")
    _check_edge_angle(theta_edge_deg)
    t = math.tan(math.radians(theta_edge_deg))
    theta_user = np.degrees(np.arctan2(t, k))
    out = (params.eta_los - params.eta_nlos) * _p_los_raw(theta_user, params) \
        + 10.0 * np.log10(k * k + t * t)
    return _scalar_like(out, kappa)


def expected_path_loss_db(kappa, theta_edge_deg: float, d_max: float,
                          params: ScenarioParams):
    """Expected path loss (dB) of a user at normalized distance kappa in a
    cell of radius d_max, with the drone-side directivity set by the cell
    edge angle and the antenna efficiency exponent.

    Closed form; identical to mixing the LoS/NLoS losses at the slant
    distance d_max*sqrt(kappa^2 + tan(theta_edge)^2) with the LoS
    probability at the user's elevation angle.
    """
    if not d_max > 0.0:
        raise ValueError(f"cell radius must be positive, got {d_max}")
    _check_edge_angle(theta_edge_deg)
    t = math.radians(theta_edge_deg)
    directivity_db = params.e_r * 10.0 * math.log10(2.0 / (1.0 - math.sin(t)))
    g = g_pos(kappa, theta_edge_deg, params)
    return g + 20.0 * math.log10(d_max) + fspl_offset_db(params) \
        + params.eta_nlos - directivity_db


def rate_function(theta_edge_deg: float, params: ScenarioParams):
    """Vectorized kappa -> expected rate callable, edge gain precomputed.

    The returned callable accepts any non-negative kappa array and does no
    range checking; it is the hot kernel shared by the placement
    optimizers and the simulator.
    """
    _check_edge_angle(theta_edge_deg)
    t = math.tan(math.radians(theta_edge_deg))
    a, b = params.a, params.b
    d_eta = params.eta_los - params.eta_nlos

    def _g(k):
        theta_user = np.degrees(np.arctan2(t, k))
        return d_eta / (1.0 + a * np.exp(-b * (theta_user - a))) \
            + 10.0 * np.log10(k * k + t * t)

    g_edge = float(_g(np.float64(1.0)))

    def rate(kappa):
        k = np.asarray(kappa, dtype=float)
        return np.log2(1.0 + 10.0 ** ((g_edge - _g(k)) * 0.1))

    return rate


def user_rate(kappa, theta_edge_deg: float, params: ScenarioParams):
    """Expected per-user rate, bits/symbol, for normalized distance kappa.

    Normalized so user_rate(1, ...) == 1 exactly; strictly decreasing in
    kappa; independent of the cell radius and the carrier frequency.
    """
    k = np.asarray(kappa, dtype=float)
    if np.any(k < 0.0) or np.any(k > 2.0):
        raise ValueError("kappa must lie in [0, 2]: the drone never leaves the cell")
    return _scalar_like(rate_function(theta_edge_deg, params)(k), kappa)


def max_gain(e_r: float, params: ScenarioParams) -> float:
    """Best-case per-user rate: drone directly above the user (kappa = 0),
    cell edge angle solved for the given antenna efficiency exponent.
    """
    from .design import solve_edge_angle  # local import: design builds on this module

    p = params.with_efficiency(e_r)
    theta = solve_edge_angle(p)
    return user_rate(0.0, theta, p)


@dataclass(frozen=True)
class UserRate:
    """Per-user link summary: normalized distance, elevation angle, rate."""

    kappa: float
    theta_user_deg: float
    rate: float

    @classmethod
    def from_kappa(cls, kappa: float, theta_edge_deg: float,
                   params: ScenarioParams) -> "UserRate":
        r = user_rate(kappa, theta_edge_deg, params)
        t = math.tan(math.radians(theta_edge_deg))
        theta_user = math.degrees(math.atan2(t, kappa))
        return cls(kappa=float(kappa), theta_user_deg=theta_user, rate=float(r))


def _check_edge_angle(theta_edge_deg: float) -> None:
    if not 0.0 < theta_edge_deg < 90.0:
        raise ValueError(f"edge elevation angle must lie in (0, 90) degrees, got {theta_edge_deg}")
