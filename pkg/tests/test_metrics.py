import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eval_rows_fixture import (
    EXPECTED_AVERAGES,
    EXPECTED_FAST_SNR,
    EXPECTED_SLOW_SNR,
    FIXTURE_ROWS,
    RELATIVE_TOL,
)
from ppgdenoise.errors import InsufficientPeaksError, InvalidInputError
from ppgdenoise.metrics import (
    EvalRow,
    PeakSeries,
    aggregate,
    detect_peaks,
    hr_at_times,
    hr_bpm,
    improvement_ratio,
    matched_hr_pairs,
    ppe_bpm,
    rmse_bpm,
    write_report_csv,
)


def sinusoid(freq_hz, duration_s=8.0, rate_hz=32.0):
    t = np.arange(int(duration_s * rate_hz)) / rate_hz
    return np.sin(2 * np.pi * freq_hz * t)


def analytic_peak_count(freq_hz, duration_s=8.0):
    # Maxima of sin(2*pi*f*t) fall at t = (k + 1/4) / f.
    return sum(1 for k in range(1000) if (k + 0.25) / freq_hz < duration_s)


class TestDetectPeaks:
    def test_constant_signal_has_no_peaks(self):
        assert len(detect_peaks(np.full(256, 1.0), 32.0)) == 0

    def test_one_hz_sinusoid(self):
        peaks = detect_peaks(sinusoid(1.0), 32.0)
        assert len(peaks) == 8
        np.testing.assert_array_equal(np.diff(peaks.indices), np.full(7, 32))

    def test_one_and_a_half_hz_sinusoid(self):
        assert len(detect_peaks(sinusoid(1.5), 32.0)) == 12

    def test_too_short_rejected(self):
        with pytest.raises(InvalidInputError):
            detect_peaks(np.zeros(63), 32.0)

    @pytest.mark.parametrize("freq", np.arange(0.75, 3.01, 0.25))
    def test_analytic_count_over_hr_band(self, freq):
        assert len(detect_peaks(sinusoid(freq), 32.0)) == analytic_peak_count(freq)


class TestHrBpm:
    def test_sixty_bpm(self):
        peaks = PeakSeries(np.arange(0, 256, 32), 32.0)
        np.testing.assert_array_equal(hr_bpm(peaks), np.full(7, 60.0))

    def test_one_twenty_bpm(self):
        peaks = PeakSeries(np.arange(0, 128, 16), 32.0)
        np.testing.assert_array_equal(hr_bpm(peaks), np.full(7, 120.0))

    def test_irregular_gaps(self):
        peaks = PeakSeries(np.array([0, 32, 80]), 32.0)
        np.testing.assert_array_equal(hr_bpm(peaks), [60.0, 40.0])

    def test_insufficient_peaks(self):
        with pytest.raises(InsufficientPeaksError):
            hr_bpm(PeakSeries(np.array([5]), 32.0))


class TestRmse:
    def test_zero_on_identical(self):
        assert rmse_bpm([60.0, 61.0], [60.0, 61.0]) == 0.0

    def test_constant_offset(self):
        assert rmse_bpm([62.0, 63.0], [60.0, 61.0]) == pytest.approx(2.0)

    def test_symmetric_deviations(self):
        assert rmse_bpm([58.0, 62.0], [60.0, 60.0]) == pytest.approx(2.0)

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            rmse_bpm([1.0], [1.0, 2.0])

    def test_swap_symmetric(self, rng):
        a, b = rng.normal(60, 5, 20), rng.normal(60, 5, 20)
        assert rmse_bpm(a, b) == rmse_bpm(b, a)


class TestPpe:
    def test_zero_on_identical(self):
        peaks = PeakSeries(np.arange(0, 256, 32), 32.0)
        assert ppe_bpm(peaks, peaks) == 0.0

    def test_uniform_two_bpm_offset(self):
        # 62 BPM at 62 Hz and 60 BPM at 60 Hz share 60-sample gaps, so the
        # peak times stay within tolerance while per-beat HR differs by 2.
        est = PeakSeries(np.arange(0, 6 * 60, 60), 62.0)
        ref = PeakSeries(np.arange(0, 6 * 60, 60), 60.0)
        assert ppe_bpm(est, ref) == pytest.approx(2.0, abs=1e-12)

    def test_missing_final_beat_penalized(self):
        ref = PeakSeries(np.arange(0, 6 * 32, 32), 32.0)  # five 60 BPM beats
        est = PeakSeries(np.arange(0, 5 * 32, 32), 32.0)  # last beat missing
        assert ppe_bpm(est, ref) == pytest.approx((0 + 0 + 0 + 0 + 60) / 5)

    def test_dropped_middle_peak_penalizes_two_beats(self):
        ref = PeakSeries(np.arange(0, 6 * 32, 32), 32.0)
        est = PeakSeries(np.array([0, 32, 96, 128, 160]), 32.0)  # peak at 64 missing
        # Beats 1->2 and 2->3 are unmatched; the est beat spanning 32..96 is
        # not consecutive-peak aligned with either.
        assert ppe_bpm(est, ref) == pytest.approx((0 + 60 + 60 + 0 + 0) / 5)

    def test_insufficient_peaks(self):
        with pytest.raises(InsufficientPeaksError):
            ppe_bpm(PeakSeries(np.array([0]), 32.0), PeakSeries(np.arange(0, 96, 32), 32.0))


class TestMatchedPairs:
    def test_aligned_series_match_fully(self):
        peaks = PeakSeries(np.arange(0, 8 * 32, 32), 32.0)
        est_vals, ref_vals = matched_hr_pairs(peaks, peaks)
        assert len(est_vals) == 7
        np.testing.assert_array_equal(est_vals, ref_vals)

    def test_peaks_outside_tolerance_do_not_match(self):
        est = PeakSeries(np.arange(0, 8 * 32, 32) + 8, 32.0)  # 0.25 s away
        ref = PeakSeries(np.arange(0, 8 * 32, 32), 32.0)
        est_vals, _ = matched_hr_pairs(est, ref, tol_s=0.2)
        assert len(est_vals) == 0
        est_vals, _ = matched_hr_pairs(est, ref, tol_s=0.5)
        assert len(est_vals) == 7


class TestHrAtTimes:
    def test_constant_rate_is_constant_everywhere(self):
        peaks = PeakSeries(np.arange(0, 10 * 32, 32), 32.0)
        times = np.arange(9) + 0.5
        np.testing.assert_allclose(hr_at_times(peaks, times), np.full(9, 60.0))

    def test_interpolates_between_beats(self):
        # Beats of 60 then 40 BPM anchored at their midpoints.
        peaks = PeakSeries(np.array([0, 32, 80]), 32.0)
        values = hr_at_times(peaks, [0.5, 1.75, 3.0])
        assert values[0] == 60.0  # clamped before the first midpoint
        assert 40.0 < values[1] < 60.0
        assert values[2] == 40.0  # clamped after the last midpoint


class TestImprovementRatio:
    def test_published_waving_row(self):
        assert improvement_ratio(41.76, 0.213) == pytest.approx(196.07, rel=0.005)

    def test_published_finger_tapping_row(self):
        assert improvement_ratio(21.76, 3.008) == pytest.approx(7.235, rel=0.005)

    def test_equal_errors(self):
        assert improvement_ratio(3.3, 3.3) == 1.0

    def test_zero_gen_error_gives_infinity(self):
        assert improvement_ratio(5.0, 0.0) == math.inf

    def test_negative_rejected(self):
        with pytest.raises(InvalidInputError):
            improvement_ratio(-1.0, 2.0)


class TestAggregate:
    def test_fixture_averages(self):
        report = aggregate(FIXTURE_ROWS)
        for name, expected in EXPECTED_AVERAGES.items():
            got = getattr(report.averages, name)
            assert got == pytest.approx(expected, rel=RELATIVE_TOL), name

    def test_slow_and_fast_subsets(self):
        slow = [r for r in FIXTURE_ROWS if r.intensity == "low"]
        fast = [r for r in FIXTURE_ROWS if r.intensity == "high"]
        assert aggregate(slow).averages.snr_db == pytest.approx(EXPECTED_SLOW_SNR, rel=RELATIVE_TOL)
        assert aggregate(fast).averages.snr_db == pytest.approx(EXPECTED_FAST_SNR, rel=RELATIVE_TOL)

    def test_single_row_passthrough(self):
        row = FIXTURE_ROWS[0]
        report = aggregate([row])
        assert report.averages.snr_db == row.snr_db
        assert report.averages.ppe_improvement == row.ppe_improvement

    def test_mean_of_ratios_not_ratio_of_means(self):
        report = aggregate(FIXTURE_ROWS)
        ratio_of_means = report.averages.rmse_noisy_bpm / report.averages.rmse_gen_bpm
        assert report.averages.rmse_improvement != pytest.approx(ratio_of_means, rel=0.05)

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            aggregate([])

    def test_report_csv_layout(self, tmp_path):
        report = aggregate(FIXTURE_ROWS)
        path = tmp_path / "report.csv"
        write_report_csv(report, path)
        lines = path.read_text().splitlines()
        assert lines[0].startswith("Noise Type,S/N (dB),RMSE Gen. (BPM)")
        assert len(lines) == 1 + 12 + 1
        assert lines[-1].startswith("Average,")


class TestEvalRowInvariants:
    def test_inconsistent_improvement_rejected(self):
        with pytest.raises(InvalidInputError):
            EvalRow(
                noise_type="x",
                snr_db=10.0,
                rmse_gen_bpm=1.0,
                rmse_noisy_bpm=50.0,
                rmse_improvement=10.0,  # should be ~50
                ppe_gen_bpm=1.0,
                ppe_noisy_bpm=50.0,
                ppe_improvement=50.0,
            )

    def test_negative_error_rejected(self):
        with pytest.raises(InvalidInputError):
            EvalRow(
                noise_type="x",
                snr_db=10.0,
                rmse_gen_bpm=-1.0,
                rmse_noisy_bpm=50.0,
                rmse_improvement=1.0,
                ppe_gen_bpm=1.0,
                ppe_noisy_bpm=50.0,
                ppe_improvement=50.0,
            )


class TestPeakSeries:
    def test_rejects_unsorted(self):
        with pytest.raises(InvalidInputError):
            PeakSeries(np.array([5, 3]), 32.0)

    @given(st.lists(st.integers(0, 10_000), min_size=2, max_size=30, unique=True))
    @settings(max_examples=40, deadline=None)
    def test_hr_positive_for_any_sorted_series(self, indices):
        peaks = PeakSeries(np.sort(indices), 32.0)
        assert (hr_bpm(peaks) > 0).all()
