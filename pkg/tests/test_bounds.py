import numpy as np
import pytest

from spinlab import bounds as bd
from spinlab import clifford as cl
from spinlab import models as md
from spinlab import operators as ops
from spinlab.spectral import FourierScalar, FourierSpinorField


def make_split(m, n, jm=0, jn=0):
    return cl.tensor_construct(cl.build_rep(m, jm), cl.build_rep(n, jn))


@pytest.fixture(scope="module")
def torus_setup():
    model = md.CircleProductModel((1.0, 1.0))
    split = make_split(2, 2)
    spec = ops.spectrum(ops.assemble_DH(model, split, 4))
    return model, split, spec


@pytest.fixture(scope="module")
def sphere_setup():
    model = md.SphereModel(2, 1.0)
    split = make_split(2, 1)
    fld = model.parallel_spinor(split, np.array([1.0, 0.0], dtype=complex))
    sampled = bd.sample_field(fld, model, split)
    return model, split, sampled


def structured_kernel_field(model, split):
    """The boundary-equality kernel vector at mode (1/2, 1/2): the product
    of +1 eigenvectors of (s1+s2)/sqrt(2) and (s1-s2)/sqrt(2)."""
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    _, v1 = np.linalg.eigh((s1 + s2) / np.sqrt(2))
    _, v2 = np.linalg.eigh((s1 - s2) / np.sqrt(2))
    psi0 = np.kron(v1[:, -1], v2[:, -1])
    return FourierSpinorField.single_mode(
        (0.5, 0.5), psi0, model.lengths, model.spin_delta, 1
    )


# -- normal curvature -----------------------------------------------------


def test_rn_psi_zero_for_flat_catalog(torus_setup):
    model, split, spec = torus_setup
    s = bd.sample_field(spec.pairs[0].field, model, split)
    rn = bd.compute_RN_psi(s, None)
    assert np.max(np.abs(rn)) == 0.0


def test_rn_psi_eigenvector_recovers_eigenvalue():
    split = make_split(2, 2)
    rng = np.random.default_rng(0)
    curv = bd.random_normal_curvature(2, 2, rng)
    op = curv.fiber_operator(split)
    vals, vecs = np.linalg.eigh(op)
    model = md.FlatTorusModel(2, 2)
    for col in (0, -1):
        fld = FourierSpinorField.single_mode(
            (0.0, 0.0), vecs[:, col], model.lengths, model.spin_delta, 1
        )
        s = bd.sample_field(fld, model, split)
        rn = bd.compute_RN_psi(s, curv)
        assert abs(rn[0] - vals[col]) < 1e-12


def test_rn_psi_bounded_below_by_kappa1():
    split = make_split(3, 2)
    rng = np.random.default_rng(1)
    model = md.FlatTorusModel(3, 2)
    for _ in range(20):
        curv = bd.random_normal_curvature(3, 2, rng)
        k1 = bd.kappa1(curv, split)
        vec = rng.standard_normal(split.fiber_dim) + 1j * rng.standard_normal(
            split.fiber_dim
        )
        fld = FourierSpinorField.single_mode(
            (0.0,) * 3, vec, model.lengths, model.spin_delta, 1
        )
        s = bd.sample_field(fld, model, split)
        rn = bd.compute_RN_psi(s, curv)
        assert rn[0] >= k1 - 1e-10


def test_rn_psi_rejects_vanishing_field(torus_setup):
    model, split, _ = torus_setup
    fld = FourierSpinorField.zero(
        model.lengths, model.spin_delta, 1, split.fiber_dim
    )
    s = bd.sample_field(fld, model, split)
    with pytest.raises(ValueError):
        bd.compute_RN_psi(s, None)


def test_kappa1_zero_and_scaling():
    split = make_split(2, 2)
    assert bd.kappa1(None, split) == 0.0
    rng = np.random.default_rng(2)
    curv = bd.random_normal_curvature(2, 2, rng)
    k1 = bd.kappa1(curv, split)
    scaled = bd.NormalCurvature(3.0 * curv.components)
    assert bd.kappa1(scaled, split) == pytest.approx(3.0 * k1, rel=1e-12)


def test_normal_curvature_validates_antisymmetry():
    bad = np.ones((2, 2, 2, 2))
    with pytest.raises(ValueError):
        bd.NormalCurvature(bad)


def test_fiber_operator_hermitian_100_draws():
    rng = np.random.default_rng(3)
    for m, n in ((2, 2), (3, 2)):
        split = make_split(m, n)
        for _ in range(50):
            curv = bd.random_normal_curvature(m, n, rng)
            op = curv.fiber_operator(split)
            assert np.max(np.abs(op - op.conj().T)) < 1e-12


# -- energy-momentum tensor --------------------------------------------------


def test_sphere_parallel_spinor_em(sphere_setup):
    model, split, s = sphere_setup
    em = bd.energy_momentum(s)
    assert em.symmetry_defect() < 1e-14
    assert np.max(np.abs(em.q - 0.5 * np.eye(2))) < 1e-10
    assert np.max(np.abs(em.norm_sq - 0.5)) < 1e-10
    assert em.tracefree_deviation() < 1e-10


def test_zero_mode_on_flat_torus_has_zero_em():
    model = md.FlatTorusModel(2, 1)
    split = make_split(2, 1)
    fld = model.parallel_spinor(split, np.array([1.0, 1.0j]) / np.sqrt(2))
    s = bd.sample_field(fld, model, split)
    em = bd.energy_momentum(s)
    assert np.max(np.abs(em.q)) < 1e-14


def test_norm_sq_consistency(torus_setup):
    model, split, spec = torus_setup
    pair = spec.lowest(20)[-1]
    s = bd.sample_field(pair.field, model, split)
    em = bd.energy_momentum(s)
    assert np.max(
        np.abs(em.norm_sq - np.sum(em.q**2, axis=(1, 2)))
    ) < 1e-14


def test_twisted_killing_em_shape(sphere_setup):
    # a twisted Killing spinor has Q = (mu/m) g
    model, split, s = sphere_setup
    em = bd.energy_momentum(s)
    mu = 1.0
    assert np.max(np.abs(em.q - (mu / 2.0) * np.eye(2))) < 1e-10


# -- q choice ------------------------------------------------------------------


def test_q_choice_killing_closed_form():
    m, c, h = 2, 5.0, 1.0
    q = bd.q_choice("killing", m, c, h)
    target = (m - 1) * h / (np.sqrt(m / (m - 1) * c) - h)
    assert abs((1 - m * q) ** 2 - target) < 1e-12
    assert q != pytest.approx(1.0 / m)


def test_q_choice_killing_large_curvature_limit():
    # convergence to 1/m goes like c**(-1/4)
    qs = [bd.q_choice("killing", 2, c, 1.0) for c in (1e3, 1e6, 1e9)]
    assert abs(qs[-1] - 0.5) < 5e-3
    assert abs(qs[2] - 0.5) < abs(qs[1] - 0.5) < abs(qs[0] - 0.5)
    assert all(q < 0.5 for q in qs)


def test_q_choice_em_threshold_identity():
    m, h = 2, np.sqrt(2.0)
    c = 4.0  # R + kappa1 + 4|Q|^2 at the torus boundary mode
    q = bd.q_choice("energy-momentum", m, c, h)
    bracket = c / (1 + m * q**2) - h**2 / (m * q**2)
    rhs = (np.sqrt(c) - h) ** 2
    assert abs(0.25 * bracket - 0.25 * rhs) < 1e-12


def test_q_choice_rejects_bad_hypothesis():
    with pytest.raises(ValueError):
        bd.q_choice("killing", 2, 0.1, 1.0)
    with pytest.raises(ValueError):
        bd.q_choice("energy-momentum", 2, 0.5, 1.0)
    with pytest.raises(ValueError):
        bd.q_choice("nonsense", 2, 5.0, 1.0)


# -- integral identities ---------------------------------------------------------


@pytest.mark.parametrize("q", [-1.0, 0.2, 1.0])
def test_killing_identity_on_lowest_pairs(torus_setup, q):
    model, split, spec = torus_setup
    for pair in spec.lowest(3):
        out = bd.connection_identity_residual(
            "killing", model, split, pair.value, pair.field, q
        )
        assert out["residual"] < 1e-9


@pytest.mark.parametrize("q", [0.3, 1.0])
def test_em_identity_on_lowest_pairs(torus_setup, q):
    model, split, spec = torus_setup
    for pair in spec.lowest(3):
        out = bd.connection_identity_residual(
            "energy-momentum", model, split, pair.value, pair.field, q
        )
        assert out["residual"] < 1e-9
        assert out["deficit_min"] >= -1e-12


def test_identities_on_nonzero_eigenvalues(torus_setup):
    model, split, spec = torus_setup
    pairs = [p for p in spec.pairs if abs(p.value) > 0.5][:4]
    for pair in pairs:
        for q in (-1.0, 0.2, 1.0):
            out = bd.connection_identity_residual(
                "killing", model, split, pair.value, pair.field, q
            )
            assert out["residual"] < 1e-9
        for q in (0.3, 1.0):
            out = bd.connection_identity_residual(
                "energy-momentum", model, split, pair.value, pair.field, q
            )
            assert out["residual"] < 1e-9


def test_flat_zero_mode_identity_trivial():
    model = md.FlatTorusModel(2, 1)
    split = make_split(2, 1)
    fld = model.parallel_spinor(split, np.array([1.0, 0.0]))
    out = bd.connection_identity_residual(
        "killing", model, split, 0.0, fld, 0.2
    )
    assert abs(out["lhs"]) < 1e-14
    assert abs(out["rhs"]) < 1e-14


def test_identity_rejects_excluded_q(torus_setup):
    model, split, spec = torus_setup
    pair = spec.pairs[0]
    with pytest.raises(ValueError):
        bd.connection_identity_residual(
            "killing", model, split, pair.value, pair.field, 0.5
        )
    with pytest.raises(ValueError):
        bd.connection_identity_residual(
            "energy-momentum", model, split, pair.value, pair.field, 0.0
        )


def test_identity_with_variable_q(torus_setup):
    """q may be a band-limited function respecting its exclusion zone."""
    model, split, spec = torus_setup
    pair = spec.lowest(1)[0]
    qfun = FourierScalar.constant(1.0, model.lengths) + FourierScalar.cosine(
        0.2, 0, model.lengths
    )
    out = bd.connection_identity_residual(
        "killing", model, split, pair.value, pair.field, qfun, grid_n=48
    )
    assert out["residual"] < 1e-9


# -- bound evaluation -------------------------------------------------------------


def test_sphere_genus_zero_equality(sphere_setup):
    model, split, s = sphere_setup
    rep = bd.evaluate_bound("genus-zero", model, split, 0.0, sampled=s)
    assert abs(rep.rhs) < 1e-10
    assert abs(rep.margin) < 1e-10
    # 8 pi / Area + 4 |Q|^2 = |H|^2 exactly: the strict hypothesis fails
    assert not rep.hypothesis_ok


def test_torus_em_bound_margins(torus_setup):
    model, split, spec = torus_setup
    for pair in spec.pairs:
        rep = bd.evaluate_bound(
            "energy-momentum", model, split, pair.value, fld=pair.field
        )
        if rep.hypothesis_ok:
            assert rep.margin >= -1e-9


def test_flat_torus_reports_violated_clause():
    model = md.FlatTorusModel(2, 1)
    split = make_split(2, 1)
    fld = model.parallel_spinor(split, np.array([1.0, 0.0]))
    rep = bd.evaluate_bound("energy-momentum", model, split, 0.0, fld=fld)
    assert not rep.hypothesis_ok
    assert rep.violated_clause == "|H|^2 > 0"


def test_curvature_bounds_with_synthetic_data(torus_setup):
    model, split, spec = torus_setup
    rng = np.random.default_rng(5)
    curv = bd.random_normal_curvature(2, 2, rng, scale=0.1)
    k1 = bd.kappa1(curv, split)
    pair = spec.lowest(1)[0]
    rep12 = bd.evaluate_bound(
        "curvature", model, split, pair.value, fld=pair.field, curvature=curv
    )
    rep17 = bd.evaluate_bound(
        "curvature-min",
        model,
        split,
        pair.value,
        fld=pair.field,
        curvature=curv,
        kappa1_val=k1,
    )
    # R = 0 and kappa1 <= R^N_psi make neither hypothesis hold here, but the
    # reports stay ordered
    assert rep17.rhs <= rep12.rhs + 1e-12


def test_bound_kind_validation(torus_setup):
    model, split, spec = torus_setup
    pair = spec.pairs[0]
    with pytest.raises(ValueError):
        bd.evaluate_bound("no-such", model, split, 0.0, fld=pair.field)
    with pytest.raises(ValueError):
        bd.evaluate_bound("yamabe", model, split, 0.0, fld=pair.field)
    with pytest.raises(ValueError):
        bd.evaluate_bound("conformal", model, split, 0.0, fld=pair.field)
    with pytest.raises(ValueError):
        bd.evaluate_bound("genus-zero", model, split, 0.0, fld=pair.field)
    with pytest.raises(ValueError):
        bd.evaluate_bound(
            "aux-curvature", model, split, 0.0, fld=pair.field
        )


def test_aux_bounds_margins():
    f = FourierScalar.constant(0.8, (1.0, 1.0))
    model = md.AuxTorusModel(2, 2, f=f)
    split = make_split(2, 2)
    spec = ops.spectrum(ops.assemble_Df(model, split, 3))
    checked = 0
    for pair in spec.pairs:
        rep = bd.evaluate_bound(
            "aux-energy-momentum", model, split, pair.value, fld=pair.field
        )
        if rep.hypothesis_ok:
            assert rep.margin >= -1e-9
            checked += 1
    assert checked > 0


def test_yamabe_bound_on_three_torus():
    model = md.CircleProductModel((1.0, 1.0, 1.0))
    split = make_split(3, 3)
    spec = ops.spectrum(ops.assemble_DH(model, split, 1))
    mu1, _ = md.yamabe_first_eigenvalue(model, 2)
    for pair in spec.lowest(16):
        rep = bd.evaluate_bound(
            "yamabe", model, split, pair.value, fld=pair.field, mu1=mu1
        )
        if rep.hypothesis_ok:
            assert rep.margin >= -1e-9


def test_conformal_bound_on_torus(torus_setup):
    model, split, spec = torus_setup
    conf = md.ConformalData(FourierScalar.cosine(0.05, 0, model.lengths))
    pair = [p for p in spec.pairs if abs(p.value) > 1.0][0]
    rep = bd.evaluate_bound(
        "conformal", model, split, pair.value, fld=pair.field, conf=conf
    )
    if rep.hypothesis_ok:
        assert rep.margin >= -1e-9
    assert rep.bound_kind == "conformal"


# -- limiting cases ---------------------------------------------------------------


def test_sphere_killing_chain(sphere_setup):
    model, split, s = sphere_setup
    lim = bd.limiting_case_residuals(
        s, 0.0, include=("killing", "alignment", "em", "norm",
                        "integrability")
    )
    assert lim["killing"] < 1e-10
    assert abs(lim["killing_mu_abs"] - 1.0) < 1e-10
    assert lim["alignment"] < 1e-10
    assert lim["em"] < 1e-10
    assert lim["norm_constancy"] < 1e-12
    assert lim["integrability_killing"] < 1e-12
    assert lim["integrability_em"] < 1e-12


def test_boundary_mode_em_equation(torus_setup):
    model, split, _ = torus_setup
    fld = structured_kernel_field(model, split)
    s = bd.sample_field(fld, model, split)
    em = bd.energy_momentum(s)
    assert abs(4.0 * em.norm_sq[0] - 2.0) < 1e-12
    lim = bd.limiting_case_residuals(s, 0.0, include=("em", "integrability"))
    assert lim["em"] < 1e-12
    assert lim["integrability_em"] < 1e-12


def test_flat_zero_mode_limiting_cases():
    model = md.FlatTorusModel(2, 1)
    split = make_split(2, 1)
    fld = model.parallel_spinor(split, np.array([1.0, 1.0]) / np.sqrt(2))
    s = bd.sample_field(fld, model, split)
    lim = bd.limiting_case_residuals(
        s, 0.0, include=("em", "norm", "integrability")
    )
    assert lim["em"] < 1e-14  # Q = 0 and the derivative vanishes
    assert lim["integrability_em"] < 1e-14
    with pytest.raises(ValueError):
        bd.limiting_case_residuals(s, 0.0, include=("alignment",))


def test_wem_reduces_to_em_for_constant_norm(torus_setup):
    model, split, _ = torus_setup
    fld = structured_kernel_field(model, split)
    s = bd.sample_field(fld, model, split)
    lim = bd.limiting_case_residuals(s, 0.0, include=("em", "wem"))
    assert abs(lim["wem"] - lim["em"]) < 1e-12


def test_cauchy_schwarz_deficit_any_field(torus_setup):
    """|H|^2 - (H.psi, omega_perp.psi)^2/|psi|^4 >= 0 pointwise for every
    spinor field, not only eigenfields."""
    model, split, _ = torus_setup
    rng = np.random.default_rng(8)
    fld = FourierSpinorField.zero(
        model.lengths, model.spin_delta, 2, split.fiber_dim
    )
    fld.coeffs[:] = rng.standard_normal(fld.coeffs.shape) + 1j * (
        rng.standard_normal(fld.coeffs.shape)
    )
    s = bd.sample_field(fld, model, split, grid_n=32)
    gH = bd._gamma_H(model, split)
    om = np.einsum("gf,pf->pg", split.omega_perp, s.values)
    hv = np.einsum("gf,pf->pg", gH, s.values)
    h0 = np.real(np.einsum("pf,pf->p", np.conjugate(om), hv)) / s.density
    hnorm2 = float(np.sum(model.mean_curvature**2))
    assert float(np.min(hnorm2 - h0**2)) >= -1e-12


def test_equality_detection_invariant(torus_setup):
    """Whenever the energy-momentum bound is saturated while its hypothesis
    holds, the eigenfield satisfies the EM-spinor equation and the normal
    volume element aligns with the mean curvature direction."""
    model, split, spec = torus_setup
    found = 0
    for pair in spec.pairs:
        rep = bd.evaluate_bound(
            "energy-momentum", model, split, pair.value, fld=pair.field
        )
        if rep.hypothesis_ok and rep.margin < 1e-8:
            found += 1
            assert rep.limiting_case["em"] < 1e-6
            assert rep.limiting_case["alignment"] < 1e-6
            assert rep.limiting_case["integrability_em"] < 1e-6
    # the lower branch of this model saturates the bound identically
    assert found > 0


def test_report_serialization(torus_setup):
    model, split, spec = torus_setup
    pair = spec.pairs[0]
    rep = bd.evaluate_bound(
        "energy-momentum", model, split, pair.value, fld=pair.field
    )
    d = rep.as_dict()
    assert d["bound_kind"] == "energy-momentum"
    assert set(d) == {
        "bound_kind",
        "model",
        "eigenvalue",
        "lambda_sq",
        "hypothesis_ok",
        "violated_clause",
        "rhs",
        "margin",
        "limiting_case",
    }
