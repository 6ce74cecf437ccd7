import numpy as np
import pytest

from spinlab.spectral import FourierScalar, FourierSpinorField


def test_scalar_roundtrip_and_reality():
    u = FourierScalar.cosine(0.3, 0, (1.0, 2.0), harmonic=2)
    assert u.is_real()
    grid = u.on_grid(16)
    back = FourierScalar.from_grid(grid, u.lengths, u.band)
    assert np.max(np.abs(back.pad_to(u.band).coeffs - u.coeffs)) < 1e-14


def test_scalar_product_is_exact_for_bandlimited_data():
    u = FourierScalar.cosine(1.0, 0, (1.0,))
    v = FourierScalar.cosine(1.0, 0, (1.0,))
    w = u * v  # cos^2 = 1/2 + cos(2.)/2
    pts = np.linspace(0.05, 0.95, 7)[:, None]
    expect = np.cos(2 * np.pi * pts[:, 0]) ** 2
    assert np.max(np.abs(w.evaluate_points(pts).real - expect)) < 1e-13


def test_scalar_derivative():
    u = FourierScalar.cosine(1.0, 1, (1.0, 0.5))
    du = u.derivative(1)
    pts = np.random.default_rng(0).random((9, 2)) * np.array([1.0, 0.5])
    expect = -(2 * np.pi / 0.5) * np.sin(2 * np.pi * pts[:, 1] / 0.5)
    assert np.max(np.abs(du.evaluate_points(pts).real - expect)) < 1e-12


def test_exp_projection_tail_control():
    u = FourierScalar.cosine(0.1, 0, (1.0, 1.0))
    g = u.exp(-1.0)
    pts = np.random.default_rng(1).random((20, 2))
    expect = np.exp(-0.1 * np.cos(2 * np.pi * pts[:, 0]))
    assert np.max(np.abs(g.evaluate_points(pts).real - expect)) < 1e-13
    with pytest.raises(ValueError):
        # an enormous exponent cannot be resolved within the band cap
        u.exp(400.0, max_band=8)


@pytest.mark.parametrize("delta", [(0.0, 0.0), (0.5, 0.5), (0.0, 0.5)])
def test_spinor_mode_lattice(delta):
    fld = FourierSpinorField.zero((1.0, 2.0), delta, 3, 4)
    for ax in range(2):
        ks = fld.mode_values(ax)
        assert np.max(np.abs(ks)) <= 3
        assert np.allclose(ks % 1.0, delta[ax])


def test_parseval_matches_grid_quadrature():
    rng = np.random.default_rng(2)
    fld = FourierSpinorField.zero((1.0, 1.0), (0.5, 0.0), 2, 3)
    fld.coeffs[:] = rng.standard_normal(fld.coeffs.shape) + 1j * (
        rng.standard_normal(fld.coeffs.shape)
    )
    n = 16
    vals = fld.on_grid(n)
    quad = np.sum(np.abs(vals) ** 2) * fld.volume / n**2
    assert abs(quad - fld.l2_norm_sq()) < 1e-12 * fld.l2_norm_sq()


def test_antiperiodic_boundary_phase():
    fld = FourierSpinorField.single_mode(
        (0.5,), np.array([1.0 + 0j]), (2.0,), (0.5,), 1
    )
    a = fld.evaluate_points(np.array([[0.3]]))
    b = fld.evaluate_points(np.array([[2.3]]))
    assert np.max(np.abs(a + b)) < 1e-13


def test_deriv_multiplies_by_frequency():
    fld = FourierSpinorField.single_mode(
        (1.5,), np.array([2.0 + 0j]), (1.0,), (0.5,), 2
    )
    d = fld.deriv(0)
    ratio = d.coeffs[d.mode_index((1.5,))] / fld.coeffs[fld.mode_index((1.5,))]
    assert abs(ratio - 1j * 2 * np.pi * 1.5) < 1e-13


def test_times_scalar_grows_band_exactly():
    fld = FourierSpinorField.single_mode(
        (0.5, -0.5), np.array([1.0, 2.0j]), (1.0, 1.0), (0.5, 0.5), 1
    )
    g = FourierScalar.cosine(1.0, 0, (1.0, 1.0))
    out = fld.times_scalar(g)
    assert out.kmax == 2
    # product of exp(i pi x) and cos(2 pi x) has modes 3/2 and -1/2
    assert abs(out.coeffs[out.mode_index((1.5, -0.5))][0] - 0.5) < 1e-13
    assert abs(out.coeffs[out.mode_index((-0.5, -0.5))][0] - 0.5) < 1e-13


def test_shape_validation():
    with pytest.raises(ValueError):
        FourierSpinorField(np.zeros((4, 2)), (1.0,), (0.0,), 2)
    with pytest.raises(ValueError):
        FourierSpinorField.zero((1.0,), (0.3,), 2, 2)
    with pytest.raises(ValueError):
        FourierScalar(np.zeros((4,)), (1.0,))
