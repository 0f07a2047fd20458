"""Empirical root counting of F(t) = u over long windows.

The scan samples the signal g(t) = F(t) - u (or ln F - ln u for quasi-free
providers) on a uniform grid tied to the provider's fastest-frequency bound,
brackets every sign change, refines each bracket by bisection, subdivides
suspicious near-tangent extrema, and reports counts, root times, and a
block-resampled density with its standard error.

The grid values depend only on the absolute sample index, so the scan can be
partitioned into arbitrary contiguous chunks (and run on any number of
workers) and still produce the identical report.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError
from .quasifree import ModeSet, log_fidelity_product
from .spectrum import DEFAULT_RESYNC, DiscreteSpectrum, fidelity_at, grid_fidelity

TANGENCY_SUBDIVISION = 16  # extra samples per grid step when probing a near-miss
_MAX_BISECT = 200


class ScanError(ValidationError):
    """Invalid scan setup (bad level, bound, or window)."""


def worker_count(explicit: int | None = None) -> int:
    """Worker cap: explicit argument, else RTK_THREADS, else CPU count."""
    if explicit is not None:
        if explicit < 1:
            raise ValidationError("worker count must be >= 1")
        return explicit
    env = os.environ.get("RTK_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValidationError(f"RTK_THREADS = {env!r} is not an integer") from exc
        if n < 1:
            raise ValidationError("RTK_THREADS must be >= 1")
        return n
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ScanConfig:
    """Scan window and discretization knobs.

    ``oversample`` counts samples per period of the provider's fastest
    oscillation; ``root_tolerance`` is relative to the sample step;
    ``tangency_threshold`` is in signal units.
    """

    horizon_T: float
    oversample: int = 16
    tangency_threshold: float = 1e-9
    root_tolerance: float = 1e-10
    blocks: int = 16
    burn_in: float = 0.0

    def __post_init__(self):
        if not self.horizon_T > self.burn_in >= 0.0:
            raise ValidationError("need horizon_T > burn_in >= 0")
        if self.oversample < 4:
            raise ValidationError("oversample must be >= 4")
        if self.tangency_threshold <= 0 or self.root_tolerance <= 0:
            raise ValidationError("thresholds must be positive")
        if self.blocks < 1:
            raise ValidationError("blocks must be >= 1")


@dataclass(frozen=True)
class CrossingReport:
    """Result of one crossing scan at level u."""

    level_u: float
    count: int
    root_times: tuple[float, ...]
    density_estimate: float
    density_stderr: float
    suspected_tangencies: int
    supremum_F: float
    supremum_time: float
    samples_evaluated: int
    burn_in: float
    horizon_T: float


class SpectrumProvider:
    """Fidelity signal of a discrete spectrum.

    The scan signal is F(t) itself; the fastest beat frequency of |chi|^2 is
    the spectral width ``max E - min E``.
    """

    def __init__(self, spectrum: DiscreteSpectrum, resync: int = DEFAULT_RESYNC):
        self.spectrum = spectrum
        self.resync = resync

    @property
    def frequency_bound(self) -> float:
        return self.spectrum.spectral_width

    @property
    def peak_fidelity(self) -> float:
        return self.spectrum.peak_fidelity

    def level_to_signal(self, u: float) -> float:
        return u

    def fidelity_of_signal(self, g: float) -> float:
        return g

    def signal_grid(self, t0: float, dt: float, first_index: int, count: int) -> np.ndarray:
        return grid_fidelity(self.spectrum, t0, dt, first_index, count, self.resync)

    def signal_at(self, t: float) -> float:
        return float(self.signal_at_many(np.array([t]))[0])

    def signal_at_many(self, ts: np.ndarray) -> np.ndarray:
        # Elementwise ufuncs plus a row-wise pairwise sum keep each element's
        # value independent of the batch composition, which makes refinement
        # results partition-independent.
        w = self.spectrum.weights
        out = np.empty(ts.size)
        chunk = max(1, (1 << 20) // max(self.spectrum.dim, 1))
        for i0 in range(0, ts.size, chunk):
            ph = np.outer(ts[i0 : i0 + chunk], self.spectrum.energies)
            x = (np.cos(ph) * w).sum(axis=1)
            y = (np.sin(ph) * w).sum(axis=1)
            out[i0 : i0 + chunk] = x * x + y * y
        return out


class ModeSetProvider:
    """Log-fidelity signal Z(t) = ln F(t) of a quasi-free mode set.

    The scan signal is Z, so level u maps to ln u.  The frequency bound must
    cover the fastest oscillation actually present in Z, which is the largest
    eps_k among modes with nonzero amplitude no matter how weak the quench;
    the amplitude-weighted sum sum_k alpha_k eps_k alone collapses for weak
    quenches and lets the grid undersample the signal, so the bound takes the
    larger of the two.
    """

    def __init__(self, modes: ModeSet):
        self.modes = modes

    @property
    def frequency_bound(self) -> float:
        active = self.modes.alpha > 0
        fastest = float(self.modes.epsilon[active].max()) if active.any() else 0.0
        weighted = math.fsum(
            float(a) * float(e) for a, e in zip(self.modes.alpha, self.modes.epsilon)
        )
        return max(fastest, weighted)

    @property
    def peak_fidelity(self) -> float:
        return 1.0

    def level_to_signal(self, u: float) -> float:
        if not u > 0:
            raise ScanError("log-fidelity scans need a level u > 0")
        return math.log(u)

    def fidelity_of_signal(self, g: float) -> float:
        return math.exp(g)

    def signal_grid(self, t0: float, dt: float, first_index: int, count: int) -> np.ndarray:
        idx = np.arange(first_index, first_index + count, dtype=float)
        return log_fidelity_product(self.modes, t0 + idx * dt)

    def signal_at(self, t: float) -> float:
        return float(log_fidelity_product(self.modes, [t])[0])

    def signal_at_many(self, ts: np.ndarray) -> np.ndarray:
        return log_fidelity_product(self.modes, ts)


def refine_root(provider, bracket: tuple[float, float], u: float, tol: float) -> float:
    """Bisection refinement of one sign-change bracket of F(t) = u.

    Returns the bracket midpoint once its width is at most ``tol``.
    """
    level = provider.level_to_signal(u)
    lo, hi = float(bracket[0]), float(bracket[1])
    if not hi > lo:
        raise ScanError("bracket endpoints must be increasing")
    return _bisect(lambda t: provider.signal_at(t) - level, lo, hi, tol)


def _refine_batch(
    eval_many, level: float, lo: np.ndarray, hi: np.ndarray, tol: float,
    width: float,
) -> np.ndarray:
    """Lock-step bisection of equal-width brackets detected on the grid.

    Each element's trajectory depends only on its own values, so the result is
    independent of how brackets are batched.  If the pointwise evaluation
    disagrees in sign with the grid (a sample landed on the level within float
    noise), the closer endpoint is returned directly.
    """
    lo = lo.astype(float).copy()
    hi = hi.astype(float).copy()
    out = np.empty_like(lo)
    g_lo = eval_many(lo) - level
    g_hi = eval_many(hi) - level
    done = g_lo == 0.0
    out[done] = lo[done]
    hit_hi = (g_hi == 0.0) & ~done
    out[hit_hi] = hi[hit_hi]
    done |= hit_hi
    same = (g_lo * g_hi > 0) & ~done
    out[same] = np.where(np.abs(g_lo[same]) <= np.abs(g_hi[same]), lo[same], hi[same])
    done |= same
    idx = np.nonzero(~done)[0]
    if idx.size:
        n_iter = min(_MAX_BISECT, max(1, int(math.ceil(math.log2(width / tol))) + 1))
        a, b, ga = lo[idx], hi[idx], g_lo[idx]
        for _ in range(n_iter):
            mid = 0.5 * (a + b)
            gm = eval_many(mid) - level
            zero = gm == 0.0
            left = (ga * gm < 0) & ~zero
            right = ~left & ~zero
            b = np.where(left | zero, mid, b)
            a = np.where(right | zero, mid, a)
            ga = np.where(right, gm, ga)
        out[idx] = 0.5 * (a + b)
    return out


def _bisect(g, lo: float, hi: float, tol: float) -> float:
    g_lo = g(lo)
    g_hi = g(hi)
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if g_lo * g_hi > 0:
        raise ScanError("invalid bracket: endpoints have the same sign")
    for _ in range(_MAX_BISECT):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break  # step below float resolution
        g_mid = g(mid)
        if g_mid == 0.0:
            return mid
        if g_lo * g_mid < 0:
            hi = mid
        else:
            lo, g_lo = mid, g_mid
    return 0.5 * (lo + hi)


def _scan_chunk(provider, level, t0, dt, lo, hi, n, tol_abs, tangency_threshold):
    """Detect and refine the roots owned by grid indices [lo, hi).

    A bracket (i, i+1) and a tangency triple centered at i are owned by the
    chunk containing i.  The chunk reads one sample of context on each side,
    so ownership (and every value) is independent of the partition.
    """
    ctx_lo = max(lo - 1, 0)
    ctx_hi = min(hi + 1, n)
    vals = provider.signal_grid(t0, dt, ctx_lo, ctx_hi - ctx_lo)
    g = vals - level
    roots: list[float] = []
    tangencies = 0
    extra_samples = 0
    owned_hi = min(hi, n)

    # Exact hits on owned samples.
    own = g[lo - ctx_lo : owned_hi - ctx_lo]
    for rel in np.nonzero(own == 0.0)[0]:
        roots.append(t0 + (lo + int(rel)) * dt)

    # Sign-change brackets (i, i+1) with i owned.
    b_hi = min(hi, n - 1)
    if b_hi > lo:
        seg = g[lo - ctx_lo : b_hi - ctx_lo]
        nxt = g[lo - ctx_lo + 1 : b_hi - ctx_lo + 1]
        cross = np.nonzero((seg * nxt < 0) & (seg != 0.0))[0] + lo
        if cross.size:
            lo_t = t0 + cross * dt
            refined = _refine_batch(
                provider.signal_at_many, level, lo_t, lo_t + dt, tol_abs, dt
            )
            roots.extend(refined.tolist())

    # Near-tangent extrema: same-sign triples whose interior extremum comes
    # closer to the level than the threshold get a 16x subdivision and either
    # yield a root pair or count as a suspected tangency.
    c_lo, c_hi = max(lo, 1), min(hi, n - 1)
    if c_hi > c_lo:
        gm = g[c_lo - ctx_lo - 1 : c_hi - ctx_lo - 1]
        gi = g[c_lo - ctx_lo : c_hi - ctx_lo]
        gp = g[c_lo - ctx_lo + 1 : c_hi - ctx_lo + 1]
        cand = (
            (gm * gi > 0)
            & (gi * gp > 0)
            & (np.abs(gi) < np.abs(gm))
            & (np.abs(gi) < np.abs(gp))
        )
        for rel in np.nonzero(cand)[0]:
            i = c_lo + int(rel)
            g_mid = float(gi[rel])
            vertex = _parabola_extremum(float(gm[rel]), g_mid, float(gp[rel]))
            grazing = min(abs(g_mid), abs(vertex)) < tangency_threshold
            # A vertex on the far side of the level predicts a missed root
            # pair between the samples.
            overshoot = vertex * g_mid < 0
            if not (grazing or overshoot):
                continue
            sub = 2 * TANGENCY_SUBDIVISION
            ts = t0 + (i - 1) * dt + np.arange(sub + 1) * (2 * dt / sub)
            gs = provider.signal_at_many(ts) - level
            extra_samples += sub + 1
            found: list[float] = []
            for j in np.nonzero(gs == 0.0)[0]:
                found.append(float(ts[j]))
            sub_cross = np.nonzero((gs[:-1] * gs[1:] < 0) & (gs[:-1] != 0.0))[0]
            if sub_cross.size:
                lo_t = ts[sub_cross]
                refined = _refine_batch(
                    provider.signal_at_many,
                    level,
                    lo_t,
                    lo_t + (2 * dt / sub),
                    tol_abs,
                    2 * dt / sub,
                )
                found.extend(refined.tolist())
            if found:
                roots.extend(found)
            else:
                tangencies += 1

    roots.sort()
    best = int(np.argmax(own))
    return roots, tangencies, (float(own[best]), lo + best), extra_samples


def _parabola_extremum(gm: float, gi: float, gp: float) -> float:
    """Extremum value of the parabola through three equispaced samples."""
    a = 0.5 * (gm + gp) - gi
    b = 0.5 * (gp - gm)
    if a == 0.0:
        return gi
    return gi - b * b / (4.0 * a)


def scan_crossings(
    provider,
    u: float,
    config: ScanConfig,
    workers: int | None = None,
    _partition: list[tuple[int, int]] | None = None,
) -> CrossingReport:
    """Count and locate the solutions of F(t) = u on [burn_in, horizon_T].

    The sample step is ``2*pi / (W * oversample)`` with W the provider's
    frequency bound.  Every sign change is refined by bisection to
    ``root_tolerance`` sample steps; same-sign intervals grazing the level
    closer than ``tangency_threshold`` are subdivided 16x and either yield a
    root pair or are reported as suspected tangencies.

    The report is identical for any worker count or chunk partition.
    """
    w_bound = provider.frequency_bound
    if not w_bound > 0:
        raise ScanError(f"frequency bound {w_bound} must be positive")
    if u < 0 or u > provider.peak_fidelity * (1 + 1e-12):
        raise ScanError(
            f"level u = {u} outside [0, {provider.peak_fidelity}]"
        )
    level = provider.level_to_signal(u)
    dt = 2.0 * math.pi / (w_bound * config.oversample)
    window = config.horizon_T - config.burn_in
    n = int(math.floor(window / dt)) + 1
    if n < 2:
        raise ScanError("horizon too short: fewer than two samples")
    t0 = config.burn_in
    tol_abs = config.root_tolerance * dt

    if _partition is None:
        n_workers = worker_count(workers)
        n_chunks = min(max(n_workers, 1), n)
        bounds = np.linspace(0, n, n_chunks + 1).astype(int)
        partition = [
            (int(bounds[i]), int(bounds[i + 1]))
            for i in range(n_chunks)
            if bounds[i + 1] > bounds[i]
        ]
    else:
        partition = _partition
        n_workers = worker_count(workers)

    args = [
        (provider, level, t0, dt, lo, hi, n, tol_abs, config.tangency_threshold)
        for lo, hi in partition
    ]
    if n_workers > 1 and len(args) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(lambda a: _scan_chunk(*a), args))
    else:
        results = [_scan_chunk(*a) for a in args]

    roots: list[float] = []
    tangencies = 0
    extra = 0
    best_val = -math.inf
    best_idx = -1
    for chunk_roots, chunk_tang, (val, idx), chunk_extra in results:
        roots.extend(chunk_roots)
        tangencies += chunk_tang
        extra += chunk_extra
        if val > best_val or (val == best_val and idx < best_idx):
            best_val, best_idx = val, idx
    roots.sort()
    for a, b in zip(roots, roots[1:]):
        if not b > a:
            raise NumericalError("refined root times are not strictly increasing")

    density = len(roots) / window
    _, stderr = _block_density(roots, config.burn_in, config.horizon_T, config.blocks)
    return CrossingReport(
        level_u=u,
        count=len(roots),
        root_times=tuple(roots),
        density_estimate=density,
        density_stderr=stderr,
        suspected_tangencies=tangencies,
        supremum_F=provider.fidelity_of_signal(best_val + level),
        supremum_time=t0 + best_idx * dt,
        samples_evaluated=n + extra,
        burn_in=config.burn_in,
        horizon_T=config.horizon_T,
    )


def _block_density(
    root_times, burn_in: float, horizon: float, blocks: int
) -> tuple[float, float]:
    if blocks < 1:
        raise ValidationError("blocks must be >= 1")
    window = horizon - burn_in
    counts = np.zeros(blocks)
    width = window / blocks
    for t in root_times:
        idx = min(int((t - burn_in) / width), blocks - 1)
        counts[idx] += 1
    densities = counts / width
    mean = float(densities.mean())
    if blocks < 2:
        return mean, math.nan
    stderr = float(densities.std(ddof=1) / math.sqrt(blocks))
    return mean, stderr


def estimate_density(report: CrossingReport, config: ScanConfig) -> tuple[float, float]:
    """Block-resampled density estimate.

    Partitions the scan window into ``config.blocks`` equal sub-windows and
    returns the mean and standard error of the per-block densities.  With a
    single block the standard error is nan.
    """
    return _block_density(
        report.root_times, report.burn_in, report.horizon_T, config.blocks
    )


def track_supremum(
    provider, config: ScanConfig, exclude_until: float
) -> tuple[float, float]:
    """Grid-refined maximum of F on (exclude_until, horizon_T].

    ``exclude_until`` skips the trivial peak at t = 0 (a few equilibration
    times, e.g. 3/dE, is a sensible choice).  The best grid sample is refined
    by golden-section search on its one-step neighborhood.
    """
    if not exclude_until > 0:
        raise ValidationError("exclude_until must be positive")
    if exclude_until >= config.horizon_T:
        raise ValidationError("exclude_until must lie before the horizon")
    w_bound = provider.frequency_bound
    if not w_bound > 0:
        raise ScanError(f"frequency bound {w_bound} must be positive")
    dt = 2.0 * math.pi / (w_bound * config.oversample)
    n = int(math.floor((config.horizon_T - exclude_until) / dt))
    if n < 1:
        raise ScanError("horizon too short: no samples beyond the exclusion")
    t_first = exclude_until + dt
    vals = provider.signal_grid(t_first, dt, 0, n)
    best = int(np.argmax(vals))
    t_best = t_first + best * dt
    lo = max(t_best - dt, exclude_until)
    hi = min(t_best + dt, config.horizon_T)
    t_star, v_star = _golden_max(provider.signal_at, lo, hi)
    if v_star < vals[best]:
        t_star, v_star = t_best, float(vals[best])
    return provider.fidelity_of_signal(v_star), t_star


def _golden_max(f, lo: float, hi: float, iters: int = 80) -> tuple[float, float]:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < 1e-14 * max(1.0, abs(a)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    if fc > fd:
        return c, fc
    return d, fd


@dataclass(frozen=True)
class Histogram:
    """Normalized histogram of fidelity samples over a scan grid."""

    density: np.ndarray = field(repr=False)
    edges: np.ndarray = field(repr=False)
    samples: int = 0


def empirical_pdf(provider, config: ScanConfig, bins: int) -> Histogram:
    """Normalized histogram of F(t_i) over the scan grid on [burn_in, horizon].

    For a constant signal (single level, frequency bound 0) the grid falls
    back to 100 samples per bin.
    """
    if bins < 10:
        raise ValidationError("need at least 10 bins")
    w_bound = provider.frequency_bound
    window = config.horizon_T - config.burn_in
    if w_bound > 0:
        dt = 2.0 * math.pi / (w_bound * config.oversample)
        n = int(math.floor(window / dt)) + 1
    else:
        n = 100 * bins
        dt = window / (n - 1)
    vals = provider.signal_grid(config.burn_in, dt, 0, n)
    fid = np.array([provider.fidelity_of_signal(v) for v in vals])
    top = provider.peak_fidelity
    density, edges = np.histogram(fid, bins=bins, range=(0.0, top), density=True)
    return Histogram(density=density, edges=edges, samples=n)
