"""Numerical verification tools: second-difference quadrature, Monte Carlo
ensembles, and heavy-tail statistics.

The quadrature target is the jump-measure average of the symmetric second
difference of the response function,

    integral over (0, cutoff] of
        (response(v+z) + response(v-z) - 2 response(v)) * z^(-alpha-1) dz,

whose behaviour near v = 0 separates the regular regime (vanishing) from the
quasi-ergodic one (blow-up).  The integrand has a removable cancellation at
z -> 0 (it shrinks like z^2 while each term is O(1)) and a kink at z = |v|,
so the integral is split: an analytic series panel on [0, |v|/2] where the
binomial expansion converges geometrically, and adaptive quadrature with a
declared breakpoint on the rest.

Ensemble drivers fan trajectories out to threads; the per-path RNG stream is
derived from (master_seed, eps_index, path_index), and results are written
into index-addressed slots, so output is byte-identical for any worker
count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.integrate import quad

from .dynamics import SystemParams, solve_exact, velocity_sup
from .noise import model_for, sample_jump_events, total_intensity

__all__ = [
    "DampedStable",
    "QuadratureError",
    "response_second_difference",
    "ExperimentConfig",
    "EnsembleSample",
    "DissipationRow",
    "monte_carlo_ensemble",
    "residual_ensemble",
    "limit_ensemble",
    "dissipation_probe",
    "ks_two_sample",
    "ks_critical_value",
    "hill_tail_index",
    "hill_k",
]


# ---------------------------------------------------------------------------
# second-difference quadrature


@dataclass(frozen=True)
class DampedStable:
    """Jump measure with density ``z^(-alpha-1)`` on ``(0, cutoff]``."""

    alpha: float
    cutoff: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.alpha < 2.0):
            raise ValueError("alpha must lie in (0, 2)")
        if not (self.cutoff > 0 and math.isfinite(self.cutoff)):
            raise ValueError("cutoff must be positive and finite")


class QuadratureError(RuntimeError):
    """Quadrature failed to reach the requested tolerance.

    Carries the best available ``estimate`` and the ``achieved`` error bound.
    """

    def __init__(self, message, estimate=None, achieved=None):
        super().__init__(message)
        self.estimate = estimate
        self.achieved = achieved


def _series_panel(av, m, alpha, delta, tol):
    # integral over [0, delta], delta <= av: binomial expansion of
    # (av+z)^m + (av-z)^m - 2 av^m in powers of (z/av)^2, integrated in z.
    base = (2.0 / m) * av**m * delta ** (-alpha)
    ratio = (delta / av) ** 2
    total = 0.0
    coeff = 1.0  # running binomial coefficient C(m, k)
    k = 0
    rpow = 1.0
    for j in range(1, 501):
        while k < 2 * j:
            coeff *= (m - k) / (k + 1.0)
            k += 1
        rpow *= ratio
        term = base * coeff * rpow / (2.0 * j - alpha)
        total += term
        if j >= 2 and abs(term) < tol:
            return total
        if coeff == 0.0:  # integer m: expansion terminates exactly
            return total
    raise QuadratureError(
        "series panel did not converge within 500 terms",
        estimate=total,
        achieved=abs(term),
    )


def response_second_difference(
    v: float, beta: float, measure: DampedStable, quad_tol: float = 1e-8
) -> float:
    """Second difference of the response averaged over the jump measure.

    Odd in ``v`` and zero at the origin.  Absolute error at most
    ``quad_tol``; raises :class:`QuadratureError` (with the partial
    estimate attached) if the budget cannot be met.
    """
    if not math.isfinite(v):
        raise ValueError("v must be finite")
    if not (beta < 2.0 and math.isfinite(beta)):
        raise ValueError("response is undefined for beta >= 2")
    if not (quad_tol > 0):
        raise ValueError("quad_tol must be positive")
    if v == 0.0:
        return 0.0
    sign = 1.0 if v > 0.0 else -1.0
    av = abs(v)
    m = 2.0 - beta
    alpha, cut = measure.alpha, measure.cutoff

    delta = min(0.5 * av, cut)
    total = _series_panel(av, m, alpha, delta, 0.5 * quad_tol / 10.0)
    if delta >= cut:
        return sign * total

    avm = av**m

    # Integrate in log z: the dominant mass sits within a few octaves of
    # z = |v|, which for small |v| is an invisibly thin spike on a linear
    # scale but an O(1)-wide feature in u = ln z.
    def integrand(u):
        z = math.exp(u)
        upper = (av + z) ** m
        if z < av:
            lower = (av - z) ** m
        elif z > av:
            lower = -((z - av) ** m)
        else:
            lower = 0.0
        return (upper + lower - 2.0 * avm) / m * math.exp(-alpha * u)

    lo, hi = math.log(delta), math.log(cut)
    points = [math.log(av)] if delta < av < cut else None
    val, abserr = quad(
        integrand,
        lo,
        hi,
        points=points,
        epsabs=0.5 * quad_tol,
        epsrel=1e-12,
        limit=300,
    )
    if abserr > quad_tol:
        raise QuadratureError(
            f"adaptive panel reached abserr={abserr:.3e} > quad_tol={quad_tol:.3e}",
            estimate=sign * (total + val),
            achieved=abserr,
        )
    return sign * (total + val)


# ---------------------------------------------------------------------------
# Monte Carlo ensembles


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one Monte Carlo experiment.

    ``family`` maps eps to a noise model (see ``noise.TruncatedStableFamily``).
    ``params.eps`` is a placeholder; the grid value is substituted per run.
    ``event_budget`` optionally caps the expected total number of sampled
    jump events per eps; when it binds, fewer paths are run and the result
    reports the reduced count.
    """

    family: object
    params: SystemParams
    eps_grid: tuple[float, ...]
    horizon: float
    eval_times: tuple[float, ...]
    n_paths: int
    master_seed: int
    hill_fraction: float = 0.05
    record_velocity: bool = False
    event_budget: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "eps_grid", tuple(float(e) for e in self.eps_grid))
        object.__setattr__(
            self, "eval_times", tuple(float(t) for t in self.eval_times)
        )
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        if not self.eps_grid or any(not (0.0 < e <= 1.0) for e in self.eps_grid):
            raise ValueError("eps_grid values must lie in (0, 1]")
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ValueError("horizon must be positive and finite")
        ts = self.eval_times
        if not ts or any(not (0.0 <= t <= self.horizon) for t in ts):
            raise ValueError("eval_times must lie within [0, horizon]")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("eval_times must be strictly increasing")
        if not (0.0 < self.hill_fraction <= 0.5):
            raise ValueError("hill_fraction must lie in (0, 0.5]")


@dataclass(frozen=True, eq=False)
class EnsembleSample:
    """Realizations of the position (optionally velocity) at one (eps, t)."""

    eps: float
    eval_time: float
    values: np.ndarray
    velocities: np.ndarray | None
    seed: tuple
    n_requested: int

    @property
    def truncated(self) -> bool:
        return self.values.size < self.n_requested


@dataclass(frozen=True)
class DissipationRow:
    """Monte Carlo exceedance estimates for one eps."""

    eps: float
    p_sup_exceed: float
    se_sup: float
    p_abs_exceed: float
    se_abs: float
    n_paths: int


def _map_paths(model, horizon, n_paths, seed_prefix, fn, workers):
    """Evaluate ``fn(noise)`` on ``n_paths`` independent jump paths.

    Per-path streams are keyed on ``seed_prefix + (i,)`` and results land in
    slot ``i``, so the output does not depend on the thread schedule.
    """
    out = [None] * n_paths
    if n_paths == 0:
        return out

    def run_block(lo, hi):
        for i in range(lo, hi):
            noise = sample_jump_events(model, horizon, seed_prefix + (i,))
            out[i] = fn(noise)

    if workers <= 1:
        run_block(0, n_paths)
    else:
        block = max(1, -(-n_paths // (workers * 4)))
        edges = list(range(0, n_paths, block)) + [n_paths]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_block, lo, hi) for lo, hi in zip(edges, edges[1:])
            ]
            for fut in futures:
                fut.result()
    return out


def _paths_allowed(config: ExperimentConfig, model) -> int:
    # at least one path always runs; the result object reports the shortfall
    if config.event_budget is None:
        return config.n_paths
    per_path = total_intensity(model) * config.horizon
    if per_path <= 0:
        return config.n_paths
    return min(config.n_paths, max(1, int(config.event_budget / per_path)))


def monte_carlo_ensemble(
    config: ExperimentConfig, workers: int = 1
) -> list[EnsembleSample]:
    """Independent exact solutions per eps, one sample set per (eps, t).

    Deterministic for a given config: per-trajectory streams derive from
    ``(master_seed, eps_index, path_index)`` regardless of worker count.
    """
    eval_times = np.asarray(config.eval_times)
    samples = []
    for k, eps in enumerate(config.eps_grid):
        model = model_for(config.family, eps)
        params = replace(config.params, eps=eps)
        n_run = _paths_allowed(config, model)
        record_v = config.record_velocity

        def fn(noise, params=params):
            traj = solve_exact(noise, params, eval_times)
            return (traj.X, traj.V) if record_v else (traj.X, None)

        rows = _map_paths(
            model, config.horizon, n_run, (config.master_seed, k), fn, workers
        )
        xs = np.array([r[0] for r in rows]).reshape(n_run, eval_times.size)
        vs = (
            np.array([r[1] for r in rows]).reshape(n_run, eval_times.size)
            if record_v
            else None
        )
        for j, t in enumerate(config.eval_times):
            samples.append(
                EnsembleSample(
                    eps=eps,
                    eval_time=t,
                    values=xs[:, j].copy(),
                    velocities=None if vs is None else vs[:, j].copy(),
                    seed=(config.master_seed, k),
                    n_requested=config.n_paths,
                )
            )
    return samples


def residual_ensemble(
    config: ExperimentConfig, t: float | None = None, workers: int = 1
) -> list[tuple[float, np.ndarray]]:
    """Per-eps samples of the pathwise residual at time ``t``.

    The residual of one path is the exact position minus the filtered-sum
    limit evaluated on the same jump realization.
    """
    from .limits import pathwise_residual

    if t is None:
        t = config.eval_times[-1]
    results = []
    for k, eps in enumerate(config.eps_grid):
        model = model_for(config.family, eps)
        params = replace(config.params, eps=eps)
        n_run = _paths_allowed(config, model)

        def fn(noise, params=params):
            return pathwise_residual(noise, params, t)

        vals = _map_paths(
            model, config.horizon, n_run, (config.master_seed, k), fn, workers
        )
        results.append((eps, np.asarray(vals, dtype=float)))
    return results


def limit_ensemble(
    config: ExperimentConfig, t: float | None = None, workers: int = 1
) -> list[tuple[float, np.ndarray]]:
    """Per-eps samples of the filtered-sum limit at time ``t`` on fresh
    noise draws (the direct simulation of the limit law)."""
    from .limits import limit_filtered_sum

    if t is None:
        t = config.eval_times[-1]
    results = []
    for k, eps in enumerate(config.eps_grid):
        model = model_for(config.family, eps)
        params = replace(config.params, eps=eps)
        n_run = _paths_allowed(config, model)

        def fn(noise, params=params):
            lim = limit_filtered_sum(noise, params.x0, params.v0, params.beta, [t])
            return float(lim.values[0])

        vals = _map_paths(
            model, config.horizon, n_run, (config.master_seed, k), fn, workers
        )
        results.append((eps, np.asarray(vals, dtype=float)))
    return results


def dissipation_probe(
    config: ExperimentConfig,
    r_level: float,
    delta: float,
    workers: int = 1,
) -> list[DissipationRow]:
    """Exceedance probabilities of the velocity, one row per eps.

    Estimates ``P(sup_{s<=T} |V| > r_level)`` and ``P(|V(t)| > delta)`` at
    the last eval time with binomial standard errors.  The running supremum
    is exact: inter-jump flows are monotone, so it is attained at segment
    starts.
    """
    if not (r_level > 0 and delta > 0):
        raise ValueError("levels must be positive")
    t = config.eval_times[-1]
    rows = []
    for k, eps in enumerate(config.eps_grid):
        model = model_for(config.family, eps)
        params = replace(config.params, eps=eps)
        n_run = _paths_allowed(config, model)

        def fn(noise, params=params):
            sup = velocity_sup(noise, params)
            v_t = solve_exact(noise, params, np.array([t])).V[0]
            return sup, abs(v_t)

        vals = _map_paths(
            model, config.horizon, n_run, (config.master_seed, k), fn, workers
        )
        sups = np.array([a for a, _ in vals])
        abss = np.array([b for _, b in vals])
        p_sup = float(np.mean(sups > r_level))
        p_abs = float(np.mean(abss > delta))
        rows.append(
            DissipationRow(
                eps=eps,
                p_sup_exceed=p_sup,
                se_sup=math.sqrt(p_sup * (1.0 - p_sup) / n_run),
                p_abs_exceed=p_abs,
                se_abs=math.sqrt(p_abs * (1.0 - p_abs) / n_run),
                n_paths=n_run,
            )
        )
    return rows


# ---------------------------------------------------------------------------
# distribution statistics


def ks_two_sample(a, b) -> float:
    """Exact sup-distance between the two empirical distribution functions."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise ValueError("samples must be nonempty")
    support = np.concatenate([a, b])
    fa = np.searchsorted(a, support, side="right") / a.size
    fb = np.searchsorted(b, support, side="right") / b.size
    return float(np.max(np.abs(fa - fb)))


def ks_critical_value(n: int, m: int, alpha: float = 0.01) -> float:
    """Asymptotic two-sample rejection threshold at level ``alpha``."""
    if n < 1 or m < 1:
        raise ValueError("sample sizes must be positive")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    c = math.sqrt(-0.5 * math.log(alpha / 2.0))
    return c * math.sqrt((n + m) / (n * m))


def hill_k(n: int, fraction: float = 0.05) -> int:
    """Default order-statistic count: ``ceil(fraction * n)``, at least 2."""
    return max(2, math.ceil(fraction * n))


def hill_tail_index(samples, k: int) -> float:
    """Hill estimate of the tail index of ``|samples|``.

    Reciprocal of the mean log-excess of the top-k order statistics over the
    (k+1)-th; exactly scale invariant because only ratios enter.
    """
    x = np.abs(np.asarray(samples, dtype=float))
    if k < 2 or k >= x.size:
        raise ValueError("k must satisfy 2 <= k < len(samples)")
    x = np.sort(x)[::-1]
    top, pivot = x[:k], x[k]
    if pivot <= 0.0:
        raise ValueError("ties at zero within the top-k order statistics")
    mean_log = float(np.mean(np.log(top / pivot)))
    if mean_log == 0.0:
        raise ValueError("zero log-spacings: top-k values all equal")
    return 1.0 / mean_log
