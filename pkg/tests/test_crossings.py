import math

import numpy as np
import pytest

from recurkit import (
    ModeSet,
    ModeSetProvider,
    ScanConfig,
    SpectrumProvider,
    empirical_pdf,
    estimate_density,
    eval_fidelity,
    random_spectrum,
    refine_root,
    scan_crossings,
    spectral_stats,
    track_supremum,
    validate_spectrum,
)
from recurkit.crossings import ScanError, worker_count


class TestScanTwoLevel:
    def test_exact_count(self, two_level):
        config = ScanConfig(horizon_T=100 * 2 * math.pi, oversample=16, blocks=10)
        report = scan_crossings(SpectrumProvider(two_level), 0.5, config)
        assert report.count == 200
        assert report.density_estimate == pytest.approx(1 / math.pi, rel=1e-12)
        assert report.suspected_tangencies == 0
        assert report.density_stderr <= 0.01 * report.density_estimate

    def test_root_times_match_closed_form(self, two_level):
        config = ScanConfig(horizon_T=10 * 2 * math.pi, oversample=16)
        report = scan_crossings(SpectrumProvider(two_level), 0.5, config)
        ks = np.arange(report.count)
        expected = (math.pi / 2) + ks * math.pi  # cos^2(t/2) = 1/2
        np.testing.assert_allclose(report.root_times, expected, atol=1e-9)

    def test_unreachable_level(self, spectrum_d8):
        # burn-in excludes the t=0 peak; beyond it F never gets this close to 1
        st = spectral_stats(spectrum_d8)
        config = ScanConfig(
            horizon_T=200 / st.delta_E, oversample=16, burn_in=5 / st.delta_E
        )
        report = scan_crossings(SpectrumProvider(spectrum_d8), 0.999, config)
        assert report.count == 0
        assert report.suspected_tangencies == 0
        assert report.density_estimate == 0.0

    def test_level_out_of_range(self, two_level):
        config = ScanConfig(horizon_T=10.0)
        with pytest.raises(ScanError):
            scan_crossings(SpectrumProvider(two_level), 1.5, config)

    def test_degenerate_frequency_bound(self):
        s = validate_spectrum([1.0], [1.0])
        with pytest.raises(ScanError):
            scan_crossings(SpectrumProvider(s), 0.5, ScanConfig(horizon_T=10.0))

    def test_horizon_too_short(self, two_level):
        config = ScanConfig(horizon_T=1e-6)
        with pytest.raises(ScanError):
            scan_crossings(SpectrumProvider(two_level), 0.5, config)


class TestScanConfig:
    def test_validation(self):
        with pytest.raises(Exception):
            ScanConfig(horizon_T=0.0)
        with pytest.raises(Exception):
            ScanConfig(horizon_T=10.0, oversample=2)
        with pytest.raises(Exception):
            ScanConfig(horizon_T=10.0, burn_in=20.0)
        with pytest.raises(Exception):
            ScanConfig(horizon_T=10.0, blocks=0)


class TestRefineRoot:
    def test_known_root(self, two_level):
        root = refine_root(SpectrumProvider(two_level), (1.4, 1.7), 0.5, 1e-10)
        assert root == pytest.approx(math.pi / 2, abs=1e-10)

    def test_invalid_bracket(self, two_level):
        with pytest.raises(ScanError):
            refine_root(SpectrumProvider(two_level), (0.1, 0.2), 0.5, 1e-10)

    def test_residuals_after_refinement(self, spectrum_d8):
        from recurkit import fidelity_at

        st = spectral_stats(spectrum_d8)
        u = st.mean_fidelity
        config = ScanConfig(horizon_T=300 / st.delta_E, oversample=16)
        report = scan_crossings(SpectrumProvider(spectrum_d8), u, config)
        assert report.count > 10
        residuals = [abs(fidelity_at(spectrum_d8, t) - u) for t in report.root_times]
        assert max(residuals) <= 1e-8


class TestDensityEstimate:
    def test_two_level_exact(self, two_level):
        config = ScanConfig(horizon_T=100 * 2 * math.pi, oversample=16, blocks=10)
        report = scan_crossings(SpectrumProvider(two_level), 0.5, config)
        density, stderr = estimate_density(report, config)
        assert density == pytest.approx(1 / math.pi, rel=1e-12)
        assert stderr <= 0.01 * density

    def test_empty_report(self, spectrum_d8):
        st = spectral_stats(spectrum_d8)
        config = ScanConfig(
            horizon_T=100 / st.delta_E, oversample=16, burn_in=5 / st.delta_E
        )
        report = scan_crossings(SpectrumProvider(spectrum_d8), 0.999, config)
        density, stderr = estimate_density(report, config)
        assert density == 0.0
        assert stderr == 0.0

    def test_matches_generic_formula(self, spectrum_d32):
        st = spectral_stats(spectrum_d32)
        from recurkit import density_generic

        u = st.mean_fidelity
        config = ScanConfig(horizon_T=1e4 / st.delta_E, oversample=16, blocks=16)
        report = scan_crossings(SpectrumProvider(spectrum_d32), u, config, workers=4)
        density, stderr = estimate_density(report, config)
        predicted = density_generic(u, st)
        assert density == pytest.approx(predicted, rel=0.1)
        assert stderr < 0.05 * density


class TestDeterminism:
    def test_worker_counts_identical(self, spectrum_d32):
        st = spectral_stats(spectrum_d32)
        config = ScanConfig(horizon_T=1000 / st.delta_E, oversample=16)
        prov = SpectrumProvider(spectrum_d32)
        u = st.mean_fidelity
        reports = [scan_crossings(prov, u, config, workers=w) for w in (1, 2, 8)]
        assert reports[0] == reports[1] == reports[2]

    def test_arbitrary_partitions_identical(self, spectrum_d8):
        st = spectral_stats(spectrum_d8)
        config = ScanConfig(horizon_T=500 / st.delta_E, oversample=16)
        prov = SpectrumProvider(spectrum_d8)
        u = st.mean_fidelity
        base = scan_crossings(prov, u, config, workers=1)
        w = prov.frequency_bound
        n = int((config.horizon_T) / (2 * math.pi / (w * 16))) + 1
        rng = np.random.default_rng(0)
        for _ in range(3):
            cuts = sorted(rng.choice(np.arange(1, n), size=5, replace=False).tolist())
            partition = list(zip([0] + cuts, cuts + [n]))
            alt = scan_crossings(prov, u, config, workers=2, _partition=partition)
            assert alt == base

    def test_worker_count_env(self, monkeypatch):
        monkeypatch.setenv("RTK_THREADS", "3")
        assert worker_count() == 3
        assert worker_count(5) == 5
        monkeypatch.setenv("RTK_THREADS", "junk")
        with pytest.raises(Exception):
            worker_count()


class TestSignAlternation:
    def test_g_alternates_between_roots(self, spectrum_d8):
        from recurkit import fidelity_at

        st = spectral_stats(spectrum_d8)
        u = st.mean_fidelity
        config = ScanConfig(horizon_T=300 / st.delta_E, oversample=32)
        report = scan_crossings(SpectrumProvider(spectrum_d8), u, config)
        mids = [
            0.5 * (a + b) for a, b in zip(report.root_times, report.root_times[1:])
        ]
        signs = [math.copysign(1, fidelity_at(spectrum_d8, t) - u) for t in mids]
        assert all(a != b for a, b in zip(signs, signs[1:]))


class TestOversampleConsistency:
    def test_counts_stable_under_refinement(self, spectrum_d32):
        st = spectral_stats(spectrum_d32)
        prov = SpectrumProvider(spectrum_d32)
        u = st.mean_fidelity
        counts = {}
        for oversample in (16, 32, 64):
            config = ScanConfig(horizon_T=2000 / st.delta_E, oversample=oversample)
            counts[oversample] = scan_crossings(prov, u, config, workers=4).count
        assert counts[16] <= counts[32] <= counts[64]
        assert counts[16] == counts[64]

    def test_coarse_scan_flags_missing_roots(self):
        # At a level deep below the mean, valleys are narrower than a coarse
        # grid; when the coarse count falls short, its report must carry
        # suspected tangencies.
        s = random_spectrum(16, seed=5)
        st = spectral_stats(s)
        prov = SpectrumProvider(s)
        u = 1e-3 * st.mean_fidelity
        coarse = scan_crossings(
            prov, u, ScanConfig(horizon_T=1e5, oversample=32), workers=4
        )
        fine = scan_crossings(
            prov, u, ScanConfig(horizon_T=1e5, oversample=128), workers=4
        )
        assert coarse.count <= fine.count
        if coarse.count < fine.count:
            assert coarse.suspected_tangencies > 0


class TestPairedRootsNearPeak:
    def test_two_level_pairs(self, two_level):
        # Roots straddle each maximum of cos^2(t/2); the t=0 peak contributes
        # only its right root, so pairs start at index 1.
        prov = SpectrumProvider(two_level)
        gaps_by_u = {}
        for u in (0.99, 0.999):
            config = ScanConfig(horizon_T=50 * 2 * math.pi, oversample=64)
            report = scan_crossings(prov, u, config)
            roots = np.array(report.root_times)
            assert (report.count - 1) % 2 == 0
            gaps = roots[2::2] - roots[1::2]
            expected = 4 * math.acos(math.sqrt(u))
            np.testing.assert_allclose(gaps, expected, rtol=1e-6)
            gaps_by_u[u] = gaps.mean()
        assert gaps_by_u[0.999] < gaps_by_u[0.99]

    def test_three_level_clusters_even(self):
        s = validate_spectrum([0.0, 1.0, 1.61803398875], [0.5, 0.3, 0.2])
        prov = SpectrumProvider(s)
        config = ScanConfig(horizon_T=4e4, oversample=32)
        report = scan_crossings(prov, 0.99, config, workers=4)
        assert report.count > 20
        roots = np.array(report.root_times)
        # cluster roots belonging to one visit of a near-unit peak
        breaks = np.nonzero(np.diff(roots) > 5.0)[0]
        clusters = np.split(roots, breaks + 1)
        for cluster in clusters[:-1]:  # last may be cut by the horizon
            assert len(cluster) % 2 == 0


class TestTrackSupremum:
    def test_commensurate_two_level_recurs_exactly(self, two_level):
        config = ScanConfig(horizon_T=20.0, oversample=64)
        sup, t_at = track_supremum(SpectrumProvider(two_level), config, 3.0)
        assert sup == pytest.approx(1.0, abs=1e-9)
        assert t_at == pytest.approx(2 * math.pi, abs=1e-4)

    def test_incommensurate_stays_below_one(self, spectrum_d8):
        st = spectral_stats(spectrum_d8)
        config = ScanConfig(horizon_T=1e4 / st.delta_E, oversample=16)
        sup, _ = track_supremum(
            SpectrumProvider(spectrum_d8), config, 3.0 / st.delta_E
        )
        assert sup < 1.0 - 1e-6

    def test_single_level_fidelity_constant(self):
        s = validate_spectrum([2.0], [1.0])
        ts = np.linspace(0.0, 100.0, 101)
        np.testing.assert_allclose(eval_fidelity(s, ts), 1.0, atol=1e-14)

    def test_exclusion_validation(self, two_level):
        config = ScanConfig(horizon_T=10.0)
        with pytest.raises(Exception):
            track_supremum(SpectrumProvider(two_level), config, 10.0)
        with pytest.raises(Exception):
            track_supremum(SpectrumProvider(two_level), config, 0.0)


class TestEmpiricalPdf:
    def test_single_level_all_mass_at_one(self):
        s = validate_spectrum([2.0], [1.0])
        config = ScanConfig(horizon_T=10.0)
        hist = empirical_pdf(SpectrumProvider(s), config, 20)
        widths = np.diff(hist.edges)
        assert hist.density[-1] * widths[-1] == pytest.approx(1.0, rel=1e-12)
        assert hist.density[:-1].sum() == 0.0

    def test_two_level_arcsine_shape(self, two_level):
        config = ScanConfig(horizon_T=2000.0, oversample=16)
        hist = empirical_pdf(SpectrumProvider(two_level), config, 20)
        assert hist.density[0] > 2.0
        assert hist.density[-1] > 2.0
        assert hist.density[8:12].mean() < 1.0

    def test_two_level_arcsine_not_exponential(self, two_level):
        # Sampled on a grid incommensurate with the period, cos^2(t/2) draws
        # from the arcsine law exactly, nothing like an exponential.
        from scipy import stats as sps

        phi = (1 + math.sqrt(5)) / 2
        ts = np.arange(100_000) * (2 * math.pi / 16 * phi)
        f = eval_fidelity(two_level, ts)
        ks_arcsine = sps.kstest(
            f, lambda x: 2 / math.pi * np.arcsin(np.sqrt(np.clip(x, 0, 1)))
        ).statistic
        ks_exponential = sps.kstest(f, lambda x: 1 - np.exp(-x / 0.5)).statistic
        assert ks_arcsine < 0.01
        assert ks_exponential > 0.1

    def test_bins_validated(self, two_level):
        with pytest.raises(Exception):
            empirical_pdf(SpectrumProvider(two_level), ScanConfig(horizon_T=10.0), 5)


class TestModeSetProviderScan:
    def test_single_mode_crossings(self):
        # F = 1 - 0.5 sin^2(t); F = 0.75 twice per period pi
        modes = ModeSet(alpha=np.array([0.5]), epsilon=np.array([2.0]))
        prov = ModeSetProvider(modes)
        config = ScanConfig(horizon_T=100 * math.pi, oversample=16)
        report = scan_crossings(prov, 0.75, config)
        assert report.count == 200
        assert report.supremum_F <= 1.0 + 1e-12

    def test_log_level_requires_positive_u(self):
        modes = ModeSet(alpha=np.array([0.5]), epsilon=np.array([2.0]))
        with pytest.raises(ScanError):
            scan_crossings(ModeSetProvider(modes), 0.0, ScanConfig(horizon_T=10.0))

    def test_weak_quench_frequency_bound_covers_fast_modes(self):
        # Tiny amplitudes must not shrink the sampling rate below the fastest
        # mode frequency.
        modes = ModeSet(alpha=np.array([1e-6, 1e-6]), epsilon=np.array([0.3, 5.0]))
        assert ModeSetProvider(modes).frequency_bound >= 5.0
