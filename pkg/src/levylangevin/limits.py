"""Small-noise limit processes, pathwise coupling residual, and rescalings.

For friction exponent ``beta < 2`` the position process converges, without
rescaling, to the initial position plus the summed responses of all jumps up
to time t: each input jump ``z`` becomes an output jump ``response(z)``.  At
``beta = 2`` the position grows like ``ln(1/eps)`` and the limit after that
rescaling counts jump signs; for ``beta > 2`` the correct prefactor is
``eps^((beta-2)/(beta-1))`` and the limit weights each inter-jump gap.

The ``beta > 2`` constants here are the ones consistent with the explicit
inter-jump displacement asymptotics (coefficient
``(beta-1)^((beta-2)/(beta-1)) / (beta-2)``, gap exponent
``(beta-2)/(beta-1)``); the scaled exact solver converges to exactly this
form, which is how the ``limit_power_gaps`` contract is verified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dynamics import SystemParams, TrajectoryPath, response, solve_exact
from .noise import JumpPath, LevyModel, tail_mass

__all__ = [
    "LimitRegime",
    "LimitPath",
    "RegimeError",
    "limit_filtered_sum",
    "limit_log_signs",
    "limit_power_gaps",
    "power_scaling_exponent",
    "pathwise_residual",
    "rescale_to_unit_friction",
    "stable_filter_params",
    "filtered_tail_mass",
]


class RegimeError(ValueError):
    """Raised when parameters fall outside the requested asymptotic regime."""


class LimitRegime(Enum):
    FILTERED_SUM = "FilteredSum"
    LOG_SCALED_SIGNS = "LogScaledSigns"
    POWER_SCALED_GAPS = "PowerScaledGaps"


@dataclass(frozen=True, eq=False)
class LimitPath:
    """Limit-process values on a time grid.

    ``scaling`` records the eps-prefactor under which the exact solution
    converges to these values ("identity" for the unscaled filtered sum).
    """

    t_grid: np.ndarray
    values: np.ndarray
    regime: LimitRegime
    scaling: str

    def __post_init__(self):
        for name in ("t_grid", "values"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def at(self, t: float) -> float:
        """Value at time ``t`` (grid lookup; ``t`` must be a grid point)."""
        idx = np.searchsorted(self.t_grid, t)
        if idx >= self.t_grid.size or self.t_grid[idx] != t:
            raise ValueError("t is not a grid point of this LimitPath")
        return float(self.values[idx])


def _response_sum(amplitudes: np.ndarray, beta: float) -> np.ndarray:
    """Cumulative summed responses of a jump sequence (empty prefix = 0)."""
    if amplitudes.size == 0:
        return np.zeros(1)
    f = np.abs(amplitudes) ** (2.0 - beta) * np.sign(amplitudes) / (2.0 - beta)
    return np.concatenate(([0.0], np.cumsum(f)))


def _grid(noise: JumpPath, t_grid) -> np.ndarray:
    ts = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if ts.size == 0 or not np.all(np.isfinite(ts)):
        raise ValueError("t_grid must be nonempty and finite")
    if np.any(ts < 0) or np.any(ts > noise.horizon):
        raise ValueError("t_grid must lie within [0, horizon]")
    return ts


def limit_filtered_sum(
    noise: JumpPath, x0: float, v0: float, beta: float, t_grid
) -> LimitPath:
    """Unscaled limit for ``beta < 2``: initial position plus the response to
    the initial velocity plus the summed responses of all jumps up to t.

    For symmetric noise this is simultaneously the realized compensated-sum
    limit: oddness of the response makes the compensator vanish, so the
    filtered sum needs no correction term.
    """
    if beta >= 2.0:
        raise RegimeError("filtered-sum limit requires beta < 2")
    ts = _grid(noise, t_grid)
    cum = _response_sum(noise.amplitudes, beta)
    idx = np.searchsorted(noise.times, ts, side="right")
    base = x0 + response(v0, beta)
    return LimitPath(ts, base + cum[idx], LimitRegime.FILTERED_SUM, "identity")


def limit_log_signs(noise: JumpPath, v0: float, t_grid) -> LimitPath:
    """Limit of ``X / ln(1/eps)`` at ``beta = 2``: the running sum of jump
    signs, seeded with ``sgn v0`` (``sgn 0 = 0``)."""
    ts = _grid(noise, t_grid)
    signs = np.concatenate(([0.0], np.cumsum(np.sign(noise.amplitudes))))
    idx = np.searchsorted(noise.times, ts, side="right")
    return LimitPath(
        ts, np.sign(v0) + signs[idx], LimitRegime.LOG_SCALED_SIGNS, "1/ln(1/eps)"
    )


def power_scaling_exponent(beta: float) -> float:
    """Exponent ``(beta-2)/(beta-1)`` of the eps-prefactor for ``beta > 2``."""
    if beta <= 2.0:
        raise RegimeError("power scaling applies only for beta > 2")
    return (beta - 2.0) / (beta - 1.0)


def limit_power_gaps(noise: JumpPath, v0: float, beta: float, t: float) -> float:
    """Limit of ``eps^((beta-2)/(beta-1)) X_t`` for ``beta > 2``.

    Every segment start (the initial instant counts as a jump with amplitude
    ``v0``) contributes its sign weighted by
    ``((t - tau_k) ^ (tau_{k+1} - tau_k))^((beta-2)/(beta-1))``, with overall
    coefficient ``(beta-1)^((beta-2)/(beta-1)) / (beta-2)``.
    """
    if beta <= 2.0:
        raise RegimeError("gap-weighted limit requires beta > 2")
    if not (0.0 <= t <= noise.horizon):
        raise ValueError("t must lie within [0, horizon]")
    q = power_scaling_exponent(beta)
    coef = (beta - 1.0) ** q / (beta - 2.0)
    k = noise.count_until(t)
    starts = np.concatenate(([0.0], noise.times[:k]))
    nexts = np.concatenate((noise.times[:k], [math.inf]))
    signs = np.concatenate(([np.sign(v0)], np.sign(noise.amplitudes[:k])))
    gaps = np.minimum(t - starts, nexts - starts)
    return float(coef * np.sum(gaps**q * signs))


def pathwise_residual(noise: JumpPath, params: SystemParams, t: float) -> float:
    """Exact-solution position minus the filtered-sum limit on the same
    noise realization; its decay as eps shrinks is the pathwise (not merely
    in-law) form of the convergence."""
    if params.beta >= 2.0:
        raise RegimeError("pathwise residual requires beta < 2")
    traj = solve_exact(noise, params, np.array([t]))
    lim = limit_filtered_sum(noise, params.x0, params.v0, params.beta, [t])
    return float(traj.X[0] - lim.values[0])


def rescale_to_unit_friction(traj: TrajectoryPath, alpha: float) -> TrajectoryPath:
    """Space-time rescaling that removes the ``1/eps`` factor from the drift.

    With ``gamma = 1/(alpha + beta - 1)`` the velocity ``Y_s =
    eps^(-gamma) V(s eps^(alpha gamma))`` solves the unit-friction equation
    driven by the rescaled jumps.  The returned path carries ``Y`` in its
    velocity slot on the rescaled grid, and in its position slot the
    original positions recomputed through the Y-frame integral
    ``x0 + eps^((2-beta) gamma) * int_0^s Y``; agreement with the original
    ``X`` (to 1e-9 relative) is the exactness check of the exponent
    arithmetic.
    """
    params = traj.params
    if not math.isfinite(alpha):
        raise ValueError("alpha must be finite")
    if alpha + params.beta <= 1.0:
        raise RegimeError("rescaling requires alpha + beta > 1")
    gamma = 1.0 / (alpha + params.beta - 1.0)
    eps = params.eps
    time_scale = eps ** (-alpha * gamma)
    vel_scale = eps ** (-gamma)
    noise = traj.noise_ref

    s_grid = traj.t_grid * time_scale
    y_vals = traj.V * vel_scale

    y_noise = JumpPath(
        horizon=noise.horizon * time_scale,
        times=noise.times * time_scale,
        amplitudes=noise.amplitudes * vel_scale,
        seed=noise.seed,
    )
    y_params = SystemParams(beta=params.beta, eps=1.0, x0=0.0, v0=params.v0 * vel_scale)
    y_integral = solve_exact(y_noise, y_params, s_grid).X
    x_check = params.x0 + eps ** ((2.0 - params.beta) * gamma) * y_integral
    return TrajectoryPath(s_grid, x_check, y_vals, params, noise)


def stable_filter_params(alpha: float, beta: float, c: float) -> tuple[float, float]:
    """Stable parameters of the output process when the input is symmetric
    stable with index ``alpha`` and tail constant ``c``:
    ``alpha_X = alpha / (2 - beta)`` and ``c_X = c / (2 - beta)^(alpha + 1)``.

    Only valid in the non-Gaussian regime ``alpha + 2 beta < 4`` (which is
    exactly where ``alpha_X < 2``).
    """
    if not (0.0 < alpha < 2.0):
        raise ValueError("alpha must lie in (0, 2)")
    if not (c > 0 and math.isfinite(c)):
        raise ValueError("c must be positive")
    if not (beta < 2.0 and math.isfinite(beta)):
        raise ValueError("beta must be finite and < 2")
    if alpha + 2.0 * beta >= 4.0:
        raise RegimeError("alpha + 2*beta >= 4: output is not a stable law")
    alpha_x = alpha / (2.0 - beta)
    c_x = c / (2.0 - beta) ** (alpha + 1.0)
    return alpha_x, c_x


def filtered_tail_mass(model: LevyModel, beta: float, u: float) -> float:
    """Tail ``mu^X(|x| > u)`` of the image of the jump measure under the
    response map, computed exactly by inverting the response:
    ``|response(z)| > u`` iff ``|z| > ((2-beta) u)^(1/(2-beta))``."""
    if beta >= 2.0:
        raise RegimeError("response map requires beta < 2")
    if not (u > 0 and math.isfinite(u)):
        raise ValueError("tail level u must be positive and finite")
    z = ((2.0 - beta) * u) ** (1.0 / (2.0 - beta))
    return tail_mass(model, z)
