import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import radonyaw as ry
from radonyaw.bev import BevImage, GridSpec
from radonyaw.heading import (
    EmptySceneError,
    InvariantDescriptor,
    circular_correlate,
    correlate_bruteforce,
    dft_magnitude_rows,
    disambiguate_halfturn,
    estimate_heading,
    refine_peak,
)
from radonyaw.radon import RadonSpec, Sinogram, radon_transform


def make_sino(rows: np.ndarray) -> Sinogram:
    rows = np.asarray(rows, dtype=np.float64)
    spec = RadonSpec(n_angles=rows.shape[0], n_offsets=rows.shape[1])
    return Sinogram(data=rows, spec=spec, source_size_px=rows.shape[1])


def test_unit_impulse_rows_have_flat_magnitude():
    sino = make_sino([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])
    desc = dft_magnitude_rows(sino, drop_dc=False, half_spectrum=False)
    np.testing.assert_allclose(desc.data, 1.0)


def test_zero_sinogram_zero_descriptor():
    sino = make_sino(np.zeros((8, 16)))
    desc = dft_magnitude_rows(sino)
    assert not desc.data.any()


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 7))
def test_descriptor_invariant_under_row_shifts(seed, shift):
    rng = np.random.default_rng(seed)
    rows = rng.random((6, 8))
    rolled = np.stack([np.roll(r, (shift * (i + 1)) % 8) for i, r in enumerate(rows)])
    d0 = dft_magnitude_rows(make_sino(rows), drop_dc=False, half_spectrum=False)
    d1 = dft_magnitude_rows(make_sino(rolled), drop_dc=False, half_spectrum=False)
    # Oracle: |DFT| directly on the raw vectors.
    oracle = np.abs(np.fft.fft(rows, axis=1))
    np.testing.assert_allclose(d0.data, oracle, atol=1e-12)
    np.testing.assert_allclose(d0.data, d1.data, atol=1e-12)


def test_descriptor_shapes_and_l2():
    rows = np.random.default_rng(0).random((12, 20))
    sino = make_sino(rows)
    assert dft_magnitude_rows(sino, drop_dc=True, half_spectrum=True).data.shape == (12, 10)
    assert dft_magnitude_rows(sino, drop_dc=False, half_spectrum=True).data.shape == (12, 11)
    assert dft_magnitude_rows(sino, drop_dc=True, half_spectrum=False).data.shape == (12, 19)
    d = dft_magnitude_rows(sino, normalization="l2")
    assert np.linalg.norm(d.data) == pytest.approx(1.0)


def test_autocorrelation_peaks_at_zero():
    rng = np.random.default_rng(1)
    d = InvariantDescriptor(data=rng.random((36, 9)))
    corr = circular_correlate(d, d)
    assert corr.best_bin == 0
    assert corr.scores[0] >= corr.scores.max() - 1e-12


def test_rolled_descriptor_peaks_at_shift():
    rng = np.random.default_rng(2)
    base = rng.random((360, 12))
    dq = InvariantDescriptor(data=base)
    # dp[i] = dq[i + 30]: the reference content sits 30 bins ahead.
    dp = InvariantDescriptor(data=np.roll(base, -30, axis=0))
    corr = circular_correlate(dq, dp)
    assert corr.best_bin in (30, 210)
    assert set(corr.ambiguity_pair) == {30.0, 210.0} or set(corr.ambiguity_pair) == {210.0, 30.0}
    assert corr.ambiguity_pair[0] == corr.best_angle_deg


def test_fft_correlation_equals_bruteforce():
    rng = np.random.default_rng(3)
    for shape in [(16, 9), (48, 5), (90, 17)]:
        dq = rng.random(shape)
        dp = rng.random(shape)
        fast = circular_correlate(InvariantDescriptor(dq), InvariantDescriptor(dp)).scores
        slow = correlate_bruteforce(dq, dp)
        scale = np.abs(slow).max()
        assert np.abs(fast - slow).max() / scale <= 1e-9


def test_correlate_shape_mismatch():
    with pytest.raises(ValueError, match="shapes"):
        circular_correlate(
            InvariantDescriptor(np.ones((8, 4))), InvariantDescriptor(np.ones((8, 5)))
        )


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-6, 1e6), st.integers(0, 2**32 - 1))
def test_scale_invariance_of_argmax(c, seed):
    rng = np.random.default_rng(seed)
    dq = rng.random((24, 6))
    dp = rng.random((24, 6))
    r1 = circular_correlate(InvariantDescriptor(dq), InvariantDescriptor(dp))
    r2 = circular_correlate(InvariantDescriptor(dq * c), InvariantDescriptor(dp))
    assert r1.best_bin == r2.best_bin
    assert r1.ambiguity_pair == r2.ambiguity_pair
    np.testing.assert_allclose(r2.scores, r1.scores * c, rtol=1e-9)


def test_halfturn_twin_scores_nearly_equal(toy_bev):
    spec = RadonSpec(n_angles=360, n_offsets=400)
    d = dft_magnitude_rows(radon_transform(toy_bev, spec))
    scores = circular_correlate(d, d).scores
    twin_gap = np.abs(scores - np.roll(scores, 180)).max() / scores.max()
    assert twin_gap <= 0.02


def test_refine_symmetric_triple_is_centered():
    scores = np.array([0.0, 1.0, 2.0, 1.0, 0.0])
    assert refine_peak(scores, 2) == pytest.approx(2 * 360 / 5)


def test_refine_flat_triple_returns_center():
    scores = np.ones(8)
    assert refine_peak(scores, 3) == pytest.approx(3 * 360 / 8)


def test_refine_asymmetric_triple_matches_polyfit_oracle():
    # Independent oracle: quadratic fit through (-1, 1.0), (0, 2.0), (1, 1.5).
    coeffs = np.polyfit([-1.0, 0.0, 1.0], [1.0, 2.0, 1.5], 2)
    vertex = -coeffs[1] / (2.0 * coeffs[0])
    assert vertex == pytest.approx(1.0 / 6.0)
    scores = np.zeros(360)
    scores[99:102] = [1.0, 2.0, 1.5]
    assert refine_peak(scores, 100) == pytest.approx(100.0 + vertex, abs=1e-12)


def test_refine_clamps_to_half_bin():
    scores = np.zeros(36)
    scores[9:12] = [1.0, 1.001, 1.0009999]  # near-flat: huge raw vertex offset
    refined = refine_peak(scores, 10)
    assert abs(refined - 10 * 10.0) <= 0.5 * 10.0 + 1e-9


def test_disambiguate_quarter_turn(toy_bev):
    bp = ry.transform_bev(toy_bev, 90.0)
    chosen, peaks, low = disambiguate_halfturn(toy_bev, bp, (90.0, 270.0))
    assert chosen == 90.0
    assert peaks[0] > peaks[1]
    assert not low


def test_disambiguate_identity_beats_halfturn(toy_bev):
    chosen, peaks, low = disambiguate_halfturn(toy_bev, toy_bev, (0.0, 180.0))
    assert chosen == 0.0
    assert peaks[0] > peaks[1]
    assert not low


def test_disambiguate_rejects_bad_pair(toy_bev):
    with pytest.raises(ValueError):
        disambiguate_halfturn(toy_bev, toy_bev, (0.0, 90.0))


def test_disambiguate_l_scene_full_pipeline():
    # L-shaped structure rotated 217 degrees and translated: the end-to-end
    # estimate must land within a degree of the known transform.
    pts = []
    for x in np.arange(-20, 20, 0.1):
        pts.append((x, -15.0, 1.0))
    for y in np.arange(-15, 25, 0.1):
        pts.append((-20.0, y, 1.0))
    cloud = ry.PointCloud(np.array(pts))
    moved = ry.transform_cloud(cloud, 217.0, (2.0, -3.0))
    bq = ry.rasterize_bev(cloud, GridSpec())
    bp = ry.rasterize_bev(moved, GridSpec())
    est = estimate_heading(bq, bp)
    assert ry.angular_error_deg(est.angle_deg, 217.0) <= 1.0


def test_estimate_identity(toy_bev):
    est = estimate_heading(toy_bev, toy_bev)
    assert ry.angular_error_deg(est.angle_deg, 0.0) <= 1e-6
    assert est.correlation.chosen in est.correlation.ambiguity_pair


def test_estimate_quarter_turn_exact(toy_bev):
    est = estimate_heading(toy_bev, ry.transform_bev(toy_bev, 90.0))
    assert est.angle_deg == pytest.approx(90.0, abs=1e-6)


def test_estimate_rotation_with_translation_argmax_within_bin(toy_bev):
    for alpha, t in [(33.0, (4.0, -3.0)), (275.0, (-5.0, 0.0)), (181.0, (2.5, 2.5))]:
        bp = ry.transform_bev(toy_bev, alpha, t)
        est = estimate_heading(toy_bev, bp)
        pair_err = min(
            ry.angular_error_deg(c, alpha) for c in est.correlation.ambiguity_pair
        )
        assert pair_err <= 1.0 + 1e-9
        assert ry.angular_error_deg(est.angle_deg, alpha) <= 1.0


def test_estimate_empty_raises(toy_bev):
    empty = BevImage(grid=np.zeros_like(toy_bev.grid), spec=toy_bev.spec)
    with pytest.raises(EmptySceneError):
        estimate_heading(empty, toy_bev)
    with pytest.raises(EmptySceneError):
        estimate_heading(toy_bev, empty)


def test_estimate_grid_mismatch(toy_bev):
    other = BevImage(
        grid=np.zeros((100, 100), dtype=np.uint8), spec=GridSpec(size_px=100)
    )
    with pytest.raises(ValueError):
        estimate_heading(toy_bev, other)


def test_estimate_deterministic(toy_bev):
    bp = ry.transform_bev(toy_bev, 123.0, (1.0, -2.0))
    a = estimate_heading(toy_bev, bp)
    b = estimate_heading(toy_bev, bp)
    assert a.angle_deg == b.angle_deg
    assert a.confidence == b.confidence
    np.testing.assert_array_equal(a.correlation.scores, b.correlation.scores)


def test_all_ones_mask_keeps_result(toy_bev):
    bp = ry.transform_bev(toy_bev, 45.0)
    plain = estimate_heading(toy_bev, bp)
    ones = np.ones_like(toy_bev.grid, dtype=np.float64)
    masked = estimate_heading(toy_bev, bp, mask_q=ones, mask_p=ones)
    assert masked.angle_deg == pytest.approx(plain.angle_deg, abs=1e-9)
    np.testing.assert_allclose(masked.correlation.scores, plain.correlation.scores, rtol=1e-12)


def test_mask_shape_mismatch(toy_bev):
    with pytest.raises(ValueError, match="mask"):
        estimate_heading(toy_bev, toy_bev, mask_q=np.ones((10, 10)))


def test_descriptor_translation_invariance(toy_bev):
    spec = RadonSpec(n_angles=360, n_offsets=400)
    d0 = dft_magnitude_rows(radon_transform(toy_bev, spec)).data
    for t in [(0.5, 0.0), (2.0, 1.5), (5.0, 2.5), (5.0, 5.0)]:
        shifted = ry.transform_bev(toy_bev, 0.0, t)
        d1 = dft_magnitude_rows(radon_transform(shifted, spec)).data
        rel = np.linalg.norm(d1 - d0) / np.linalg.norm(d0)
        assert rel <= 0.05
        est = estimate_heading(toy_bev, shifted)
        assert ry.angular_error_deg(est.angle_deg, 0.0) <= 1.0
