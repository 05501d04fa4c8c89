import numpy as np
import pytest

from nwavelab.grid import grid_function
from nwavelab.kernels import KERNEL_FAMILIES, convolve, make_kernel, rescale

# Second moments of the continuum densities at half-width 1, checked
# against adaptive quadrature of the densities written out from scratch.
M2_REF = {
    "uniform": 1.0 / 3.0,
    "triangle": 1.0 / 6.0,
    "truncated_gaussian": 0.0624330806482796,
}


@pytest.mark.parametrize("family", KERNEL_FAMILIES)
def test_moments_match_continuum(family):
    k = make_kernel(family, 1.0, 1.0 / 256.0)
    assert k.m0 == pytest.approx(1.0, abs=1e-14)
    assert k.m2 == pytest.approx(M2_REF[family], abs=1e-13)


@pytest.mark.parametrize("family", KERNEL_FAMILIES)
def test_even_and_nonnegative(family):
    k = make_kernel(family, 1.0, 1.0 / 64.0)
    np.testing.assert_array_equal(k.samples, k.samples[::-1])
    assert k.samples.min() >= 0.0


def test_width_scales_m2_quadratically():
    m2_1 = make_kernel("uniform", 1.0, 1.0 / 64.0).m2
    m2_2 = make_kernel("uniform", 2.0, 1.0 / 64.0).m2
    assert m2_2 == pytest.approx(4.0 * m2_1, rel=1e-13)


@pytest.mark.parametrize("lam", [2.0, 4.0, 8.0, 16.0])
def test_rescale_moment_identity(lam):
    k = make_kernel("uniform", 1.0, 1.0 / 256.0)
    kl = rescale(k, lam)
    assert kl.m0 == pytest.approx(1.0, abs=1e-14)
    assert kl.m2 == pytest.approx(k.m2 / lam**2, rel=1e-12)
    assert kl.support_radius == pytest.approx(k.support_radius / lam)
    assert kl.dx == k.dx


def test_rescale_composes():
    k = make_kernel("triangle", 1.0, 1.0 / 512.0)
    a = rescale(rescale(k, 2.0), 4.0)
    b = rescale(k, 8.0)
    np.testing.assert_allclose(a.samples, b.samples, rtol=1e-13)


def test_rescale_refuses_unresolvable_support():
    k = make_kernel("uniform", 1.0, 1.0 / 16.0)
    with pytest.raises(ValueError, match="at least 9"):
        rescale(k, 8.0)


def test_coarse_dx_rejected():
    with pytest.raises(ValueError, match="too coarse"):
        make_kernel("uniform", 1.0, 0.3)


def test_unknown_family_rejected():
    with pytest.raises(ValueError, match="unknown kernel family"):
        make_kernel("cauchy", 1.0, 1.0 / 64.0)


def test_convolve_backends_agree():
    rng = np.random.default_rng(3)
    k = make_kernel("truncated_gaussian", 1.0, 1.0 / 128.0)
    u = grid_function(rng.standard_normal(700), -3.0, 1.0 / 128.0)
    direct = convolve(k, u, backend="direct").values
    fft = convolve(k, u, backend="fft").values
    np.testing.assert_allclose(fft, direct, atol=1e-12)


def test_convolve_matches_hand_sum():
    # 5-cell stencil against an explicit double loop with zero extension
    k = make_kernel("uniform", 1.0, 0.25)
    u = grid_function([0.0, 1.0, -2.0, 0.5, 0.0, 3.0], 0.0, 0.25)
    w, half = k.weights, k.half_cells
    expect = np.zeros(u.n)
    for j in range(u.n):
        for i, wi in enumerate(w):
            src = j - (i - half)
            if 0 <= src < u.n:
                expect[j] += wi * u.values[src]
    np.testing.assert_allclose(convolve(k, u).values, expect, atol=1e-15)


def test_convolve_preserves_interior_mass():
    # compact field far from the boundary: J*u has exactly u's mass
    k = make_kernel("triangle", 1.0, 1.0 / 32.0)
    u = grid_function(np.zeros(256), -4.0, 1.0 / 32.0)
    u.values[100:130] = 1.7
    assert convolve(k, u).mass() == pytest.approx(u.mass(), abs=1e-12)


def test_convolve_requires_matching_spacing():
    k = make_kernel("uniform", 1.0, 1.0 / 32.0)
    u = grid_function(np.zeros(64), 0.0, 1.0 / 16.0)
    with pytest.raises(ValueError, match="spacing"):
        convolve(k, u)
