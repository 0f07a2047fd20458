"""Closed-form recurrence times and crossing densities for generic spectra.

For rationally independent energies with many populated levels the crossing
density of F(t) = u is

    D(u) = (2/sqrt(pi)) * dE * sqrt(u/Fbar) * exp(-u/Fbar),

with Fbar = sum p^2 the mean fidelity and dE the squared-weight energy
spread; the average recurrence time is its reciprocal,

    T_R(u) = (sqrt(pi)/2) * (1/dE) * U(u/Fbar),   U(x) = (sqrt(pi)/2-free form)

where U(x) = (sqrt(pi)/2) e^x / sqrt(x) carries the whole shape.  These
formulas knowingly extend to the boundary u -> 1 where the Gaussian
approximation predicts a small finite density of exact recurrences even
though, for rationally independent energies, F(t) = 1 only at t = 0.
"""

from __future__ import annotations

import math

from .errors import NumericalError, ValidationError
from .spectrum import SpectralStats

# exp overflows a double just above this.
_LOG_DOUBLE_MAX = 709.0

_SQRT_PI = math.sqrt(math.pi)


class LevelRangeError(ValidationError):
    """Fidelity level outside the reachable range [0, (sum p)^2]."""


class DegenerateSpectrumError(ValidationError):
    """dE = 0: a single-frequency spectrum has no finite-density prediction."""


class RecurrenceDiverges(NumericalError):
    """The recurrence time diverges at this level (u = 0)."""


def _check_stats(stats: SpectralStats) -> None:
    if stats.delta_E <= 0:
        raise DegenerateSpectrumError(
            "delta_E = 0: no finite crossing-density prediction"
        )
    if stats.mean_fidelity <= 0:
        raise ValidationError("mean fidelity must be positive")


def _check_level(u: float, stats: SpectralStats, allow_zero: bool) -> None:
    top = stats.total_weight ** 2
    if u < 0 or u > top * (1 + 1e-12):
        raise LevelRangeError(f"level u = {u} outside [0, {top}]")
    if u == 0 and not allow_zero:
        raise LevelRangeError("level u = 0 not allowed here")


def universal_function(x: float) -> float:
    """U(x) = (sqrt(pi)/2) * exp(x) / sqrt(x), the dimensionless shape of the
    recurrence time versus x = u / Fbar.  Defined for x > 0."""
    if not x > 0:
        raise ValidationError(f"universal function needs x > 0, got {x}")
    return 0.5 * _SQRT_PI * math.exp(x) / math.sqrt(x)


def density_generic(u: float, stats: SpectralStats) -> float:
    """Crossing density D(u) of F(t) = u (crossings per unit time).

    Zero at u = 0: orthogonalization times have vanishing density.
    """
    _check_stats(stats)
    _check_level(u, stats, allow_zero=True)
    if u == 0.0:
        return 0.0
    x = u / stats.mean_fidelity
    return 2.0 / _SQRT_PI * stats.delta_E * math.sqrt(x) * math.exp(-x)


def log_recurrence_time_generic(
    u: float, stats: SpectralStats, clamp: float | None = None
) -> float:
    """ln T_R(u), always finite.

    This is the safe entry point in the doubly exponential regime
    u >> Fbar where T_R itself overflows a double.  ``clamp`` replaces
    any smaller u (callers probing the u -> 0 divergence numerically).
    """
    _check_stats(stats)
    if clamp is not None:
        u = max(u, clamp)
    _check_level(u, stats, allow_zero=True)
    if u == 0.0:
        raise RecurrenceDiverges("recurrence time diverges at u = 0")
    x = u / stats.mean_fidelity
    return math.log(0.5 * _SQRT_PI / stats.delta_E) + x - 0.5 * math.log(x)


def recurrence_time_generic(
    u: float, stats: SpectralStats, clamp: float | None = None
) -> float:
    """Average recurrence time T_R(u) = 1/D(u).

    Raises :class:`RecurrenceDiverges` at u = 0 (pass ``clamp`` to evaluate at
    a floor level instead).  Values beyond the double range come back as inf;
    use :func:`log_recurrence_time_generic` there.
    """
    log_tr = log_recurrence_time_generic(u, stats, clamp=clamp)
    if log_tr > _LOG_DOUBLE_MAX:
        return math.inf
    return math.exp(log_tr)


def fidelity_pdf(u: float, mean_fidelity: float) -> float:
    """Long-time probability density of the fidelity,
    P_F(u) = exp(-u/Fbar)/Fbar for u >= 0."""
    if mean_fidelity <= 0:
        raise ValidationError("mean fidelity must be positive")
    if u < 0:
        raise ValidationError("fidelity value must be >= 0")
    return math.exp(-u / mean_fidelity) / mean_fidelity


def crossing_count_estimate(T: float, u: float, stats: SpectralStats) -> float:
    """Expected number of solutions of F(t) = u on [0, T]: T * D(u)."""
    if not T > 0:
        raise ValidationError("duration T must be positive")
    return T * density_generic(u, stats)
