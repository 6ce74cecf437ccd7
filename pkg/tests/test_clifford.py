import numpy as np
import pytest

from spinlab import clifford as cl


def split_cases(max_total=8):
    cases = []
    for m in range(1, max_total):
        for n in range(1, max_total - m + 1):
            for jm in ((0, 1) if m % 2 else (0,)):
                for jn in ((0, 1) if n % 2 else (0,)):
                    cases.append((m, n, jm, jn))
    return cases


def make_split(m, n, jm=0, jn=0):
    return cl.tensor_construct(cl.build_rep(m, jm), cl.build_rep(n, jn))


def test_base_rep_parity_classes():
    assert cl.base_rep(1, 0).generators[0][0, 0] == -1j
    assert cl.base_rep(1, 1).generators[0][0, 0] == 1j
    # the volume element i * rho(e1) realizes the class sign
    for j in (0, 1):
        rep = cl.base_rep(1, j)
        vol = cl.volume_element(rep)
        assert abs(vol[0, 0] - (-1.0) ** j) < 1e-15


def test_base_rep_two_dimensional():
    rep = cl.base_rep(2)
    vol = cl.volume_element(rep)
    assert np.allclose(vol, np.diag([1.0, -1.0]))
    for g in rep.generators:
        assert np.allclose(g @ g, -np.eye(2))
        assert np.allclose(g, -g.conj().T)


def test_base_rep_rejects_other_dimensions():
    with pytest.raises(ValueError):
        cl.base_rep(3)
    with pytest.raises(ValueError):
        cl.base_rep(1, parity_class=2)


def test_volume_element_squares_to_identity():
    for k in range(1, 7):
        rep = cl.build_rep(k)
        vol = cl.volume_element(rep)
        assert np.max(np.abs(vol @ vol - np.eye(rep.fiber_dim))) < 1e-12


@pytest.mark.parametrize("j", [0, 1])
def test_three_dimensional_parity_from_recursion(j):
    rep = cl.build_rep(3, j)
    vol = cl.volume_element(rep)
    assert np.max(np.abs(vol - (-1.0) ** j * np.eye(2))) < 1e-12


def test_even_even_volume_is_tensor_product():
    split = make_split(2, 2)
    vol = cl.volume_element(split.rep_total)
    w2 = cl.volume_element(cl.base_rep(2))
    assert np.max(np.abs(vol - np.kron(w2, w2))) < 1e-14


def test_odd_odd_doubled_volume_block_form():
    split = make_split(1, 1)
    assert split.doubling
    assert split.fiber_dim == 2
    vol = cl.volume_element(split.rep_total)
    assert np.max(np.abs(vol - np.diag([1.0, -1.0]))) < 1e-14


@pytest.mark.parametrize("m,n,jm,jn", split_cases(8))
def test_identity_suite(m, n, jm, jn):
    split = make_split(m, n, jm, jn)
    res = cl.verify_identities(split)
    worst = max(res.values())
    assert worst < cl.ALGEBRA_TOL, f"worst residual {worst:.3e} in {res}"


def test_random_vector_squares():
    rng = np.random.default_rng(0)
    split = make_split(3, 2, jm=1)
    for _ in range(10):
        v = rng.standard_normal(5)
        g = split.gamma_vector(v)
        assert np.max(np.abs(g @ g + (v @ v) * np.eye(split.fiber_dim))) < 1e-12


def test_dimension_cap():
    with pytest.raises(ValueError):
        cl.tensor_construct(cl.build_rep(6), cl.build_rep(8))
    with pytest.raises(ValueError):
        cl.build_rep(13)
    # cap is configurable
    split = cl.tensor_construct(cl.build_rep(6), cl.build_rep(8), cap=14)
    assert split.fiber_dim == 2**7


def test_clifford_apply_words():
    split = make_split(2, 1)
    rng = np.random.default_rng(1)
    psi = rng.standard_normal(split.fiber_dim) + 1j * rng.standard_normal(
        split.fiber_dim
    )
    assert np.allclose(cl.clifford_apply(split, [], psi), psi)
    assert np.allclose(cl.clifford_apply(split, [1, 1], psi), -psi)
    # signed indices negate the generator
    assert np.allclose(
        cl.clifford_apply(split, [-2], psi),
        -cl.clifford_apply(split, [2], psi),
    )
    # intrinsic multiplication agrees with the omega_perp word
    for i in range(split.m):
        assert np.allclose(
            cl.clifford_apply(split, [i + 1, cl.OMEGA_PERP], psi),
            split.tangent_action[i] @ psi,
        )
    with pytest.raises(ValueError):
        cl.clifford_apply(split, [4], psi)


def test_left_to_right_word_order():
    split = make_split(2, 2)
    rng = np.random.default_rng(2)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    word = [1, 3, 2]
    expected = (
        split.rep_total.generators[0]
        @ split.rep_total.generators[2]
        @ split.rep_total.generators[1]
        @ psi
    )
    assert np.allclose(cl.clifford_apply(split, word, psi), expected)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_normal_vector_moves_past_omega_perp(n):
    split = make_split(2, n)
    rng = np.random.default_rng(3)
    w = rng.standard_normal(n)
    gw = split.gamma_vector(np.concatenate([np.zeros(2), w]))
    lhs = gw @ split.omega_perp
    rhs = (-1.0) ** (n - 1) * split.omega_perp @ gw
    assert np.max(np.abs(lhs - rhs)) < 1e-13


def test_omega_perp_square_sign():
    for n in (1, 2, 3, 4):
        split = make_split(2, n)
        eye = np.eye(split.fiber_dim)
        assert np.max(
            np.abs(split.omega_perp @ split.omega_perp - (-1.0) ** n * eye)
        ) < 1e-13


def test_doubled_fiber_block_structure():
    split = make_split(1, 3, jm=0, jn=1)
    assert split.doubling
    half = split.fiber_dim // 2
    for t in split.tangent_action:
        assert np.max(np.abs(t[:half, half:])) == 0.0
        assert np.max(np.abs(t[half:, :half])) == 0.0
    for a in range(split.n):
        g = split.gamma_normal(a)
        assert np.max(np.abs(g[:half, :half])) == 0.0
        assert np.max(np.abs(g[half:, half:])) == 0.0


def test_generators_are_immutable():
    split = make_split(2, 2)
    with pytest.raises(ValueError):
        split.rep_total.generators[0][0, 0] = 5.0
