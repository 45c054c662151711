import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chim import (
    ChannelLabel,
    NormalizationSpec,
    apply_normalization,
    fit_normalization,
    grid_to_image,
    image_to_grid,
    invert_normalization,
)

LABEL = ChannelLabel("etu", 50.0)

finite_floats = st.floats(
    min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False, width=64
)


def complex_grids(max_dim=12):
    shapes = st.tuples(
        st.integers(min_value=1, max_value=max_dim),
        st.integers(min_value=1, max_value=max_dim),
    )
    return shapes.flatmap(
        lambda s: st.tuples(
            arrays(np.float64, s, elements=finite_floats),
            arrays(np.float64, s, elements=finite_floats),
        ).map(lambda parts: parts[0] + 1j * parts[1])
    )


def test_plane_assignment():
    grid = np.full((3, 4), 1.0 + 2.0j)
    image = grid_to_image(grid, LABEL)
    assert np.all(image.planes[:, :, 0] == 1.0)
    assert np.all(image.planes[:, :, 1] == 2.0)
    assert image.label == LABEL


def test_real_grid_has_zero_imag_plane():
    image = grid_to_image(np.ones((5, 2)), LABEL)
    assert np.all(image.planes[:, :, 1] == 0.0)


def test_shape_m_n_2():
    image = grid_to_image(np.zeros((72, 14), dtype=complex), LABEL)
    assert image.planes.shape == (72, 14, 2)


@given(complex_grids())
@settings(max_examples=50)
def test_round_trip_exact(grid):
    assert np.array_equal(image_to_grid(grid_to_image(grid, LABEL)), grid)


def test_round_trip_with_scale():
    rng = np.random.default_rng(0)
    grid = rng.normal(size=(6, 5)) + 1j * rng.normal(size=(6, 5))
    spec = fit_normalization(grid_to_image(grid, LABEL).planes)
    normalized, clamped = apply_normalization(grid_to_image(grid, LABEL).planes, spec)
    assert clamped == 0
    back = image_to_grid(
        grid_to_image(grid / spec.scale, LABEL), scale=spec.scale
    )
    assert np.allclose(back, grid, rtol=1e-6)


def test_non_finite_rejected():
    bad = np.ones((2, 2), dtype=complex)
    bad[0, 0] = np.nan
    with pytest.raises(ValueError):
        grid_to_image(bad, LABEL)


class TestNormalization:
    def test_global_max_scale(self):
        data = np.array([1.0, -4.0, 2.0])
        assert fit_normalization(data).scale == 4.0

    def test_idempotent_refit(self):
        rng = np.random.default_rng(1)
        data = rng.normal(size=1000)
        spec = fit_normalization(data)
        normalized, _ = apply_normalization(data, spec)
        refit = fit_normalization(normalized)
        assert refit.scale == pytest.approx(1.0, rel=1e-6)

    def test_apply_invert_identity(self):
        rng = np.random.default_rng(2)
        data = rng.normal(size=(4, 3, 2))
        spec = fit_normalization(data)
        normalized, _ = apply_normalization(data, spec)
        assert np.allclose(invert_normalization(normalized, spec), data, rtol=1e-12)

    def test_global_max_bounds(self):
        rng = np.random.default_rng(3)
        data = rng.normal(size=2000) * 7
        normalized, clamped = apply_normalization(data, fit_normalization(data))
        assert clamped == 0
        assert np.all((normalized >= -1.0) & (normalized <= 1.0))

    def test_percentile_clamps_and_counts(self):
        rng = np.random.default_rng(4)
        data = rng.normal(size=100_000)
        spec = fit_normalization(data, method="global-percentile")
        normalized, clamped = apply_normalization(data, spec)
        assert np.all((normalized >= -1.0) & (normalized <= 1.0))
        # 99.9th percentile of |x| leaves ~0.1% outside
        assert 0 < clamped <= 0.002 * data.size

    def test_all_zero_degenerate(self):
        with pytest.raises(ValueError, match="zero"):
            fit_normalization(np.zeros(10))

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            NormalizationSpec(scale=0.0)
        with pytest.raises(ValueError):
            NormalizationSpec(scale=1.0, method="minmax")

    def test_label_validation(self):
        with pytest.raises(ValueError):
            ChannelLabel("etu", -5.0)
