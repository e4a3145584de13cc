"""Driving-noise models: compound Poisson jump sampling and tail quantities.

Two model kinds are supported.  A plain compound Poisson process carries a
finite jump intensity and one of four symmetric amplitude laws.  A truncated
symmetric stable model keeps the power-law jump density ``c |z|^(-alpha-1)``
and removes all jumps with ``|z| <= ell``, which leaves a finite total
intensity ``2 c ell^(-alpha) / alpha`` and makes exact path-by-path
simulation possible for any friction exponent.

All sampling is driven by a counter-based (Philox) generator keyed on an
explicit seed, so a path is a pure function of ``(model, horizon, seed)``
and ensembles are reproducible independent of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence, Union

import numpy as np

__all__ = [
    "Rademacher",
    "TwoPoint",
    "UniformSym",
    "GaussianSym",
    "CompoundPoisson",
    "TruncatedStable",
    "LevyModel",
    "TruncatedStableFamily",
    "ConstantFamily",
    "JumpPath",
    "LimitKind",
    "Regularity",
    "RegimeReport",
    "jump_rng",
    "total_intensity",
    "tail_mass",
    "bg_family_bound",
    "sample_jump_events",
    "classify_regime",
]


# ---------------------------------------------------------------------------
# symmetric jump-amplitude laws


@dataclass(frozen=True)
class Rademacher:
    """Jumps of fixed magnitude ``scale`` with equiprobable sign."""

    scale: float = 1.0

    def __post_init__(self):
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise ValueError("Rademacher scale must be positive and finite")

    def tail_prob(self, r: float) -> float:
        return 1.0 if r < self.scale else 0.0

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.scale * _signs(rng, n)


@dataclass(frozen=True)
class TwoPoint:
    """Jumps equal to ``+a`` or ``-a`` with probability 1/2 each."""

    a: float

    def __post_init__(self):
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError("TwoPoint amplitude must be positive and finite")

    def tail_prob(self, r: float) -> float:
        return 1.0 if r < self.a else 0.0

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return self.a * _signs(rng, n)


@dataclass(frozen=True)
class UniformSym:
    """Jumps uniform on ``(-half_width, half_width)``."""

    half_width: float

    def __post_init__(self):
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValueError("UniformSym half-width must be positive and finite")

    def tail_prob(self, r: float) -> float:
        return max(0.0, 1.0 - r / self.half_width)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(-self.half_width, self.half_width, n)


@dataclass(frozen=True)
class GaussianSym:
    """Centred Gaussian jumps with standard deviation ``std``."""

    std: float

    def __post_init__(self):
        if not (self.std > 0 and math.isfinite(self.std)):
            raise ValueError("GaussianSym std must be positive and finite")

    def tail_prob(self, r: float) -> float:
        return math.erfc(r / (self.std * math.sqrt(2.0)))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(0.0, self.std, n)


JumpLaw = Union[Rademacher, TwoPoint, UniformSym, GaussianSym]


def _signs(rng: np.random.Generator, n: int) -> np.ndarray:
    return np.where(rng.random(n) < 0.5, -1.0, 1.0)


# ---------------------------------------------------------------------------
# noise models


@dataclass(frozen=True)
class CompoundPoisson:
    """Compound Poisson noise: ``intensity`` events per unit time, i.i.d.
    amplitudes from a symmetric ``jump_law``."""

    intensity: float
    jump_law: JumpLaw

    def __post_init__(self):
        if not (self.intensity > 0 and math.isfinite(self.intensity)):
            raise ValueError("compound Poisson intensity must be positive")


@dataclass(frozen=True)
class TruncatedStable:
    """Symmetric stable jump measure ``c |z|^(-alpha-1) dz`` with jumps of
    magnitude ``<= ell`` removed.

    The remaining measure is finite with total mass ``2 c ell^(-alpha) / alpha``
    and the normalized amplitude magnitude is exactly Pareto:
    ``P(|J| > r) = (ell / r)^alpha`` for ``r >= ell``.
    """

    alpha: float
    c: float
    ell: float

    def __post_init__(self):
        if not (0.0 < self.alpha < 2.0):
            raise ValueError("stability index alpha must lie in (0, 2)")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ValueError("tail constant c must be positive")
        if not (self.ell > 0 and math.isfinite(self.ell)):
            raise ValueError("truncation level ell must be positive")


LevyModel = Union[CompoundPoisson, TruncatedStable]


@dataclass(frozen=True)
class TruncatedStableFamily:
    """Family ``eps -> TruncatedStable``.

    ``ell=None`` uses the default schedule ``ell(eps) = eps``; a float keeps a
    fixed truncation level for every ``eps``.
    """

    alpha: float
    c: float = 1.0
    ell: float | None = None

    def model_for(self, eps: float) -> TruncatedStable:
        level = self.ell if self.ell is not None else eps
        return TruncatedStable(self.alpha, self.c, level)

    __call__ = model_for


@dataclass(frozen=True)
class ConstantFamily:
    """Family returning the same model for every ``eps``."""

    model: LevyModel

    def model_for(self, eps: float) -> LevyModel:
        return self.model

    __call__ = model_for


def model_for(family, eps: float) -> LevyModel:
    """Resolve a family (callable or object with ``model_for``) at ``eps``."""
    if hasattr(family, "model_for"):
        return family.model_for(eps)
    if callable(family):
        return family(eps)
    raise TypeError("family must be callable or provide model_for(eps)")


# ---------------------------------------------------------------------------
# realized noise


@dataclass(frozen=True, eq=False)
class JumpPath:
    """Realized jump events ``(tau_k, J_k)`` on ``(0, horizon]``.

    Times are strictly increasing and no amplitude is zero.  Arrays are
    frozen so a path can be shared between threads.
    """

    horizon: float
    times: np.ndarray
    amplitudes: np.ndarray
    seed: tuple | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        amps = np.asarray(self.amplitudes, dtype=float)
        if times.ndim != 1 or amps.shape != times.shape:
            raise ValueError("times and amplitudes must be 1-d arrays of equal length")
        if not (self.horizon >= 0 and math.isfinite(self.horizon)):
            raise ValueError("horizon must be finite and nonnegative")
        if times.size:
            if not np.all(np.isfinite(times)) or not np.all(np.isfinite(amps)):
                raise ValueError("jump events must be finite")
            if times[0] <= 0 or np.any(np.diff(times) <= 0):
                raise ValueError("jump times must be strictly increasing in (0, horizon]")
            if times[-1] > self.horizon:
                raise ValueError("jump time beyond horizon")
            if np.any(amps == 0.0):
                raise ValueError("zero-amplitude jumps are not stored")
        times.setflags(write=False)
        amps.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_events(self) -> int:
        return int(self.times.size)

    def count_until(self, t: float) -> int:
        """Number of jumps with ``tau_k <= t``."""
        return int(np.searchsorted(self.times, t, side="right"))


def jump_rng(seed) -> np.random.Generator:
    """Counter-based generator for a seed scalar/tuple/SeedSequence."""
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def _normalize_seed(seed) -> tuple | None:
    if isinstance(seed, np.random.Generator):
        return None
    if isinstance(seed, np.random.SeedSequence):
        ent = seed.entropy
        return tuple(ent) if isinstance(ent, (list, tuple)) else (ent,)
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


# ---------------------------------------------------------------------------
# tail quantities


def total_intensity(model: LevyModel) -> float:
    """Total jump rate ``mu(R)`` of the model, events per unit time."""
    if isinstance(model, CompoundPoisson):
        return model.intensity
    return 2.0 * model.c * model.ell ** (-model.alpha) / model.alpha


def tail_mass(model: LevyModel, r: float) -> float:
    """Jump-measure tail ``mu(z : |z| > r)``, exact closed form.

    For the truncated stable model this is ``2 c max(r, ell)^(-alpha) / alpha``;
    for compound Poisson it is ``intensity * P(|J| > r)``.
    """
    if not (r > 0 and math.isfinite(r)):
        raise ValueError("tail level r must be positive and finite")
    if isinstance(model, CompoundPoisson):
        return model.intensity * model.jump_law.tail_prob(r)
    eff = max(r, model.ell)
    return 2.0 * model.c * eff ** (-model.alpha) / model.alpha


def bg_family_bound(
    model_family,
    alpha_test: float,
    r_grid: Sequence[float],
    eps_grid: Sequence[float],
) -> float:
    """Grid supremum of ``r^alpha_test * mu_eps(|z| > r)``.

    A finite value over ``r in (0, 1]`` uniformly in ``eps`` is what makes
    ``alpha_test`` an upper bound for the family's small-jump activity index.
    For a truncated-stable family probed at its own stability index the
    supremum equals ``2 c / alpha`` independent of the truncation schedule.
    """
    if not (0.0 < alpha_test <= 2.0):
        raise ValueError("alpha_test must lie in (0, 2]")
    r_grid = [float(r) for r in r_grid]
    eps_grid = [float(e) for e in eps_grid]
    if not r_grid or not eps_grid:
        raise ValueError("r_grid and eps_grid must be nonempty")
    if any(not (0.0 < r <= 1.0) for r in r_grid):
        raise ValueError("r values must lie in (0, 1]")
    best = 0.0
    for eps in eps_grid:
        model = model_for(model_family, eps)
        for r in r_grid:
            best = max(best, r**alpha_test * tail_mass(model, r))
    return best


# ---------------------------------------------------------------------------
# sampling


def sample_jump_events(model: LevyModel, horizon: float, seed) -> JumpPath:
    """Draw one realization of the model's jump events on ``(0, horizon]``.

    Arrival times form a homogeneous Poisson process with the model's total
    intensity; amplitudes are i.i.d. from the normalized jump law.  Truncated
    stable magnitudes use the exact inverse-tail transform
    ``|J| = ell * U^(-1/alpha)`` with ``U`` uniform on ``(0, 1]`` and an
    independent symmetric sign.  The result is a pure function of
    ``(model, horizon, seed)``.
    """
    if not (horizon >= 0 and math.isfinite(horizon)):
        raise ValueError("horizon must be finite and nonnegative")
    rng = jump_rng(seed)
    rate = total_intensity(model)
    n = int(rng.poisson(rate * horizon)) if horizon > 0 else 0
    if n == 0:
        return JumpPath(horizon, np.empty(0), np.empty(0), _normalize_seed(seed))
    times = np.sort(horizon * (1.0 - rng.random(n)))
    if isinstance(model, CompoundPoisson):
        amps = model.jump_law.sample(rng, n)
    else:
        u = 1.0 - rng.random(n)
        amps = model.ell * u ** (-1.0 / model.alpha) * _signs(rng, n)
    times, amps = _merge_ties(times, amps)
    keep = amps != 0.0
    return JumpPath(horizon, times[keep], amps[keep], _normalize_seed(seed))


def _merge_ties(times: np.ndarray, amps: np.ndarray):
    # Simultaneous arrivals have probability zero; if float collisions occur,
    # compose them into a single jump so times stay strictly increasing.
    if times.size < 2 or np.all(np.diff(times) > 0):
        return times, amps
    uniq, inverse = np.unique(times, return_inverse=True)
    summed = np.zeros_like(uniq)
    np.add.at(summed, inverse, amps)
    return uniq, summed


# ---------------------------------------------------------------------------
# regime classification


class LimitKind(Enum):
    NON_GAUSSIAN_FILTER = "NonGaussianFilter"
    GAUSSIAN_CLT = "GaussianCLT"
    OPEN_BOUNDARY = "OpenBoundary"


class Regularity(Enum):
    REGULAR = "Regular"
    NON_REGULAR_QUASI_ERGODIC = "NonRegularQuasiErgodic"


@dataclass(frozen=True)
class RegimeReport:
    """Classification of ``(alpha, beta)`` against the balance and
    regularity thresholds, plus the response exponent when finite."""

    alpha: float
    beta: float
    limit_kind: LimitKind
    regularity: Regularity
    response_exponent: float | None = field(default=None)


def classify_regime(alpha: float, beta: float) -> RegimeReport:
    """Classify the asymptotic regime of the pair ``(alpha, beta)``.

    ``alpha + 2 beta < 4`` gives the non-Gaussian filter limit, ``> 4`` the
    central-limit regime (reported, never simulated here), ``= 4`` is open.
    Within the filter regime, ``alpha + beta < 2`` (with the explicit corner
    ``(2, 0)``) is the regular case; everything else is quasi-ergodic.
    """
    if not (0.0 <= alpha <= 2.0) or not math.isfinite(alpha):
        raise ValueError("alpha must lie in [0, 2]")
    if not math.isfinite(beta):
        raise ValueError("beta must be finite")
    balance = alpha + 2.0 * beta
    if balance < 4.0:
        kind = LimitKind.NON_GAUSSIAN_FILTER
    elif balance > 4.0:
        kind = LimitKind.GAUSSIAN_CLT
    else:
        kind = LimitKind.OPEN_BOUNDARY
    if alpha + beta < 2.0 or (alpha == 2.0 and beta == 0.0):
        reg = Regularity.REGULAR
    else:
        reg = Regularity.NON_REGULAR_QUASI_ERGODIC
    exponent = 2.0 - beta if beta < 2.0 else None
    return RegimeReport(alpha, beta, kind, reg, exponent)
