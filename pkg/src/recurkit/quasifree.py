"""Quasi-free fermion machinery: product fidelity, per-mode phase-space
moments, extensive log-fidelity statistics, and the integrable recurrence
density.

For a quadratic fermion Hamiltonian with a Gaussian initial state the fidelity
factorizes over quasi-momentum modes,

    F(t) = prod_k [1 - alpha_k sin^2(t eps_k / 2)],

so Z(t) = ln F(t) is a sum of independent almost-periodic terms.  For many
modes Z becomes Gaussian and the crossing density of Z(t) = ln u follows from
three extensive sums: the mean of Z, its variance, and the variance of Z'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import spence

from .errors import NumericalError, ValidationError

# Modes this close to alpha = 1 make ln(1 - alpha sin^2) non-square-integrable.
ALPHA_STATS_CUTOFF = 1.0 - 1e-12
_TIME_CHUNK = 1 << 16
VAR_QUAD_TOL = 1e-12


class ModeSetError(ValidationError):
    """Malformed quasi-free mode list."""


class LevelDiverges(NumericalError):
    """Recurrence time diverges at this fidelity level."""


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Quasi-free mode list: excitation amplitudes alpha_k in [0, 1] with
    one-particle frequencies eps_k > 0.

    ``sites`` records the chain length the modes were built from, when known.
    """

    alpha: np.ndarray
    epsilon: np.ndarray
    sites: int | None = None

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        e = np.asarray(self.epsilon, dtype=float)
        if a.ndim != 1 or e.ndim != 1:
            raise ModeSetError("alpha and epsilon must be one-dimensional")
        if a.size != e.size:
            raise ModeSetError(f"length mismatch: {a.size} alpha vs {e.size} epsilon")
        if a.size == 0:
            raise ModeSetError("empty mode set")
        if not (np.isfinite(a).all() and np.isfinite(e).all()):
            raise ModeSetError("non-finite mode entry")
        if (a < 0).any() or (a > 1).any():
            raise ModeSetError("alpha outside [0, 1]")
        if (e <= 0).any():
            raise ModeSetError("epsilon must be positive")
        a, e = a.copy(), e.copy()
        a.flags.writeable = False
        e.flags.writeable = False
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "epsilon", e)

    @property
    def count(self) -> int:
        return self.alpha.size


@dataclass(frozen=True)
class QuasifreeStats:
    """Extensive statistics of Z(t) = ln F(t): its time average (<= 0), its
    standard deviation, and the standard deviation of Z'(t)."""

    mean_logF: float
    sigma_Z: float
    sigma_Zprime: float


def log_fidelity_product(m: ModeSet, times) -> np.ndarray:
    """Z(t) = sum_k ln[1 - alpha_k sin^2(t eps_k / 2)] on arbitrary times.

    A mode hitting alpha_k = 1 at t eps_k/2 = pi/2 gives an exact zero of the
    fidelity; the result there is -inf, not an error.
    """
    t = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.empty(t.size)
    half = m.epsilon / 2.0
    for lo in range(0, t.size, _TIME_CHUNK):
        hi = min(lo + _TIME_CHUNK, t.size)
        s = np.sin(t[lo:hi, None] * half[None, :])
        with np.errstate(divide="ignore"):
            logs = np.log1p(-m.alpha[None, :] * s * s)
        out[lo:hi] = logs.sum(axis=1)
    return out


def eval_fidelity_product(m: ModeSet, times) -> np.ndarray:
    """F(t) = prod_k [1 - alpha_k sin^2(t eps_k / 2)].

    Accumulated in log space, so deep products underflow gracefully to 0
    instead of losing factors.
    """
    return np.exp(log_fidelity_product(m, times))


def mode_moments(alpha: float, epsilon: float) -> tuple[float, float, float]:
    """Phase-space moments of a single mode z(t) = ln(1 - alpha sin^2(t eps/2)).

    Returns ``(zbar, var_z, zprime_sq)``: the time average of z, its variance,
    and the time average of z'(t)^2.  zbar and zprime_sq come from closed
    forms; var_z from adaptive quadrature of the defining period integral
    (absolute tolerance 1e-12), which sidesteps the delicate branch
    cancellations of the dilogarithm closed form.

    Raises
    ------
    ValidationError
        alpha outside [0, 1) or epsilon <= 0; at alpha = 1 the moments
        diverge.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValidationError(f"alpha = {alpha} outside [0, 1); moments diverge at 1")
    if not epsilon > 0:
        raise ValidationError("epsilon must be positive")
    if alpha == 0.0:
        return 0.0, 0.0, 0.0
    root = math.sqrt(1.0 - alpha)
    zbar = 2.0 * math.log((1.0 + root) / 2.0)
    zprime_sq = epsilon * epsilon * (2.0 - 2.0 * root - alpha) / (2.0 * root)
    second, err = quad(
        lambda phi: math.log1p(-alpha * math.sin(phi) ** 2) ** 2 / math.pi,
        0.0,
        math.pi,
        epsabs=VAR_QUAD_TOL,
        limit=200,
        points=[math.pi / 2],  # extremum of the integrand
    )
    if err > 1e4 * VAR_QUAD_TOL:
        raise NumericalError(f"variance quadrature error estimate {err} too large")
    var_z = max(second - zbar * zbar, 0.0)
    return zbar, var_z, zprime_sq


def mode_variance_dilog(alpha: float) -> complex:
    """Dilogarithm closed form of the single-mode variance of z(t).

    The expression is formally complex: two dilogarithms are evaluated just
    above the branch cut on [1, inf) and an explicit 4*i*pi*log term cancels
    their imaginary parts.  Returned unreduced so callers can check that the
    imaginary part vanishes; the real part equals the quadrature value of
    ``mode_moments``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha must lie strictly inside (0, 1)")
    root = math.sqrt(1.0 - alpha)

    def li2(z: complex) -> complex:
        return spence(1.0 - z + 0j)

    return (
        -4.0 * math.log(root + 1.0) ** 2
        - 4.0 * math.log(2.0) * math.log(alpha)
        + 4.0 * math.log(4.0 - 4.0 * root) * math.log(root + 1.0)
        + 4.0j * math.pi * math.log(2.0 / (root + 1.0))
        + 4.0 * li2(2.0 * (root + 1.0) / alpha)
        - 4.0 * li2((2.0 - alpha + 2.0 * root) / alpha)
    )


def quasifree_stats(m: ModeSet) -> QuasifreeStats:
    """Extensive sums of the per-mode moments, with exactly rounded
    accumulation and a fixed (ascending-k) summation order.

    Modes with alpha >= 1 - 1e-12 are rejected: the Gaussian log-fidelity
    machinery needs square-integrable mode contributions.
    """
    if (m.alpha >= ALPHA_STATS_CUTOFF).any():
        raise ValidationError(
            "mode with alpha >= 1 - 1e-12: log-fidelity moments diverge"
        )
    moments = [mode_moments(a, e) for a, e in zip(m.alpha, m.epsilon)]
    mean_logf = math.fsum(mm[0] for mm in moments)
    var_z = math.fsum(mm[1] for mm in moments)
    var_zp = math.fsum(mm[2] for mm in moments)
    return QuasifreeStats(
        mean_logF=mean_logf,
        sigma_Z=math.sqrt(var_z),
        sigma_Zprime=math.sqrt(var_zp),
    )


def _check_level(u: float) -> None:
    if not 0.0 < u < 1.0:
        raise ValidationError(f"fidelity level u = {u} outside (0, 1)")


def density_integrable(u: float, stats: QuasifreeStats) -> float:
    """Crossing density of F(t) = u for a quasi-free mode set:

        D(u) = sigma_Z' / (pi sigma_Z) * exp[-(ln u - mean_logF)^2 / (2 sigma_Z^2)].
    """
    _check_level(u)
    if stats.sigma_Z <= 0:
        raise ValidationError("sigma_Z = 0: no crossing-density prediction")
    dev = math.log(u) - stats.mean_logF
    return (
        stats.sigma_Zprime
        / (math.pi * stats.sigma_Z)
        * math.exp(-dev * dev / (2.0 * stats.sigma_Z ** 2))
    )


def log_recurrence_time_integrable(u: float, stats: QuasifreeStats) -> float:
    """ln T_R(u) = -ln D(u); always finite, safe in the deep tails where the
    recurrence time itself overflows a double."""
    _check_level(u)
    if stats.sigma_Z <= 0:
        raise ValidationError("sigma_Z = 0: no recurrence-time prediction")
    dev = math.log(u) - stats.mean_logF
    return (
        math.log(math.pi * stats.sigma_Z / stats.sigma_Zprime)
        + dev * dev / (2.0 * stats.sigma_Z ** 2)
    )


def recurrence_time_integrable(u: float, stats: QuasifreeStats) -> float:
    """T_R(u) = 1/D(u).  Overflows to inf beyond the double range; use the
    log variant there."""
    log_tr = log_recurrence_time_integrable(u, stats)
    if log_tr > 709.0:
        return math.inf
    return math.exp(log_tr)
