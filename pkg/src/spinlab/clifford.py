"""Irreducible complex Clifford representations and tangent/normal splittings.

Representations of Cl_1 and Cl_2 are fixed matrices; a representation of
Cl_{m+n} adapted to an m+n splitting is assembled from representations of
Cl_m and Cl_n by one of four tensor-product formulas selected by the parities
of m and n.  The split carries, besides the plain generators, the normal
volume element omega_perp and the intrinsic multiplication by tangent
vectors, which together realize the compatibility

    X ._M psi = (X . omega_perp . psi)

between intrinsic and ambient Clifford multiplication.

All matrices are dense complex arrays.  Generators square to -Id, pairwise
anticommute and are skew-Hermitian; for odd k the two inequivalent
representation classes are labelled by the sign of the complex volume
element.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

__all__ = [
    "CliffordRep",
    "SplitRep",
    "base_rep",
    "build_rep",
    "tensor_construct",
    "volume_element",
    "clifford_apply",
    "verify_identities",
    "DEFAULT_DIM_CAP",
    "ALGEBRA_TOL",
]

DEFAULT_DIM_CAP = 12
ALGEBRA_TOL = 1e-12

OMEGA_PERP = "omega_perp"  # token accepted by clifford_apply words


def _freeze(a):
    a = np.asarray(a, dtype=complex)
    a.setflags(write=False)
    return a


def _prod(mats):
    return reduce(np.matmul, mats)


@dataclass(frozen=True)
class CliffordRep:
    """Irreducible complex representation of Cl_dim.

    parity_class is meaningful only for odd dim: it is the j with
    volume element = (-1)^j * Id.  Even-dimensional representations carry
    parity_class None.
    """

    dim: int
    generators: tuple
    parity_class: object = None

    def __post_init__(self):
        object.__setattr__(
            self, "generators", tuple(_freeze(g) for g in self.generators)
        )
        if len(self.generators) != self.dim:
            raise ValueError("need one generator per Euclidean direction")
        want = 2 ** (self.dim // 2)
        for g in self.generators:
            if g.shape != (want, want):
                raise ValueError(
                    f"Cl_{self.dim} spinor fiber must have dimension {want}"
                )
        if self.dim % 2 == 1 and self.parity_class not in (0, 1):
            raise ValueError("odd dimension needs parity_class 0 or 1")

    @property
    def fiber_dim(self):
        return self.generators[0].shape[0]

    def identity(self):
        return np.eye(self.fiber_dim, dtype=complex)


@dataclass(frozen=True)
class SplitRep:
    """Representation of Cl_{m+n} adapted to a tangent/normal splitting."""

    rep_total: CliffordRep
    rep_m: CliffordRep
    rep_n: CliffordRep
    m: int
    n: int
    tangent_action: tuple
    omega_perp: np.ndarray
    doubling: bool

    def __post_init__(self):
        object.__setattr__(
            self,
            "tangent_action",
            tuple(_freeze(t) for t in self.tangent_action),
        )
        object.__setattr__(self, "omega_perp", _freeze(self.omega_perp))

    @property
    def fiber_dim(self):
        return self.rep_total.fiber_dim

    def gamma_tangent(self, i):
        return self.rep_total.generators[i]

    def gamma_normal(self, a):
        return self.rep_total.generators[self.m + a]

    def gamma_vector(self, v):
        """Clifford multiplication by sum_i v[i] e_i over all m+n slots."""
        v = np.asarray(v)
        out = np.zeros(
            (self.fiber_dim, self.fiber_dim), dtype=complex
        )
        for i, c in enumerate(v):
            if c != 0:
                out += c * self.rep_total.generators[i]
        return out


def base_rep(k, parity_class=0):
    """Fixed generators for Cl_1 and Cl_2 (recursion base).

    Any concrete choice passing the algebra invariants is equivalent up to
    unitary conjugation; these are pinned so results are reproducible.
    """
    if k == 1:
        if parity_class not in (0, 1):
            raise ValueError("parity_class must be 0 or 1")
        # i * rho(e1) = (-1)^parity_class
        gen = np.array([[-1j if parity_class == 0 else 1j]])
        return CliffordRep(1, (gen,), parity_class)
    if k == 2:
        s1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        s2 = np.array([[0.0, -1j], [1j, 0.0]], dtype=complex)
        return CliffordRep(2, (1j * s1, 1j * s2), None)
    raise ValueError("base representations exist for k in {1, 2} only")


def volume_element(rep: CliffordRep):
    """i^floor((k+1)/2) * rho(e_1) ... rho(e_k); squares to the identity."""
    power = (rep.dim + 1) // 2
    return (1j**power) * _prod(rep.generators)


def _embedded_normal_volume(normal_gens, n):
    power = (n + 1) // 2
    return (1j**power) * _prod(normal_gens)


def tensor_construct(rep_m, rep_n, cap=DEFAULT_DIM_CAP):
    """Assemble the adapted representation of Cl_{m+n} from Cl_m and Cl_n.

    The four parity cases produce, in order (m, n):
      even/even and odd/even:  gamma(v) = rho_m(v) (x) vol_n,
                               gamma(w) = Id (x) rho_n(w)
      even/odd:                gamma(v) = i rho_m(v) vol_m (x) Id,
                               gamma(w) = vol_m (x) rho_n(w)
      odd/odd (doubled fiber): antidiagonal blocks, with the second copy of
                               the normal representation taken as
                               rho_n^1 := -rho_n^0 and the intertwiner the
                               identity.
    """
    m, n = rep_m.dim, rep_n.dim
    if m + n > cap:
        raise ValueError(
            f"total dimension {m + n} exceeds cap {cap}; fibers grow as"
            " 2**((m+n)//2)"
        )
    im = rep_m.identity()
    in_ = rep_n.identity()
    vol_m = volume_element(rep_m)
    vol_n = volume_element(rep_n)
    doubling = False

    if n % 2 == 0:
        tangent = [np.kron(g, vol_n) for g in rep_m.generators]
        normal = [np.kron(im, g) for g in rep_n.generators]
    elif m % 2 == 0:
        tangent = [1j * np.kron(g @ vol_m, in_) for g in rep_m.generators]
        normal = [np.kron(vol_m, g) for g in rep_n.generators]
    else:
        doubling = True
        d = rep_m.fiber_dim * rep_n.fiber_dim
        zero = np.zeros((d, d), dtype=complex)
        tangent = []
        for g in rep_m.generators:
            blk = np.kron(g, in_)
            tangent.append(1j * np.block([[zero, blk], [-blk, zero]]))
        normal = []
        for g in rep_n.generators:
            blk = np.kron(im, g)
            normal.append(np.block([[zero, blk], [blk, zero]]))

    if (m + n) % 2 == 0:
        parity = None
    elif m % 2 == 1:
        parity = rep_m.parity_class
    else:
        parity = rep_n.parity_class

    rep_total = CliffordRep(m + n, tuple(tangent) + tuple(normal), parity)

    vol_n_embedded = _embedded_normal_volume(normal, n)
    omega_perp = vol_n_embedded if n % 2 == 0 else -1j * vol_n_embedded
    tangent_action = tuple(g @ omega_perp for g in tangent)

    return SplitRep(
        rep_total=rep_total,
        rep_m=rep_m,
        rep_n=rep_n,
        m=m,
        n=n,
        tangent_action=tangent_action,
        omega_perp=omega_perp,
        doubling=doubling,
    )


def build_rep(k, parity_class=0, cap=DEFAULT_DIM_CAP):
    """Representation of Cl_k by repeated (k-2, 2) tensor steps.

    Every intermediate step stays inside the four splitting cases, and the
    parity class of an odd k is inherited from the Cl_1 base.
    """
    if k < 1:
        raise ValueError("dimension must be positive")
    if k > cap:
        raise ValueError(f"dimension {k} exceeds cap {cap}")
    if k <= 2:
        return base_rep(k, parity_class) if k == 1 else base_rep(2)
    rep = base_rep(1, parity_class) if k % 2 == 1 else base_rep(2)
    while rep.dim < k:
        rep = tensor_construct(rep, base_rep(2), cap=cap).rep_total
    return rep


def clifford_apply(split: SplitRep, word, spinor):
    """Apply a Clifford word to a fiber vector, left factor first.

    Word entries are 1-based signed generator indices (a negative index
    multiplies by the negated generator) or the token "omega_perp".
    """
    out = np.asarray(spinor, dtype=complex)
    total = split.m + split.n
    for tok in reversed(list(word)):
        if tok == OMEGA_PERP:
            out = split.omega_perp @ out
            continue
        idx = int(tok)
        if idx == 0 or abs(idx) > total:
            raise ValueError(f"generator index {idx} outside 1..{total}")
        g = split.rep_total.generators[abs(idx) - 1]
        out = (g if idx > 0 else -g) @ out
    return out


def _max_abs(a):
    return float(np.max(np.abs(a))) if a.size else 0.0


def verify_identities(split: SplitRep, seed=0, draws=8):
    """Max residuals of the defining algebraic identities of the split.

    Returns a dict with one entry per identity family; for exact inputs all
    values sit at rounding level.
    """
    rng = np.random.default_rng(seed)
    gens = split.rep_total.generators
    m, n, total = split.m, split.n, split.m + split.n
    d = split.fiber_dim
    eye = np.eye(d, dtype=complex)
    res = {}

    anti = 0.0
    for a in range(total):
        for b in range(a, total):
            target = -2.0 * eye if a == b else 0.0
            anti = max(
                anti, _max_abs(gens[a] @ gens[b] + gens[b] @ gens[a] - target)
            )
    res["clifford_relations"] = anti

    res["skew_hermitian"] = max(
        _max_abs(g + g.conj().T) for g in gens
    )

    sq = 0.0
    for _ in range(draws):
        v = rng.standard_normal(m)
        w = rng.standard_normal(n)
        gvw = split.gamma_vector(np.concatenate([v, w]))
        norm2 = float(v @ v + w @ w)
        sq = max(sq, _max_abs(gvw @ gvw + norm2 * eye))
    res["vector_square"] = sq

    res["omega_perp_square"] = _max_abs(
        split.omega_perp @ split.omega_perp - ((-1.0) ** n) * eye
    )

    comm = 0.0
    for _ in range(draws):
        w = rng.standard_normal(n)
        gw = split.gamma_vector(np.concatenate([np.zeros(m), w]))
        comm = max(
            comm,
            _max_abs(
                gw @ split.omega_perp
                - ((-1.0) ** (n - 1)) * split.omega_perp @ gw
            ),
        )
    res["normal_volume_commutation"] = comm

    # volume element relations
    vol_m_emb = (1j ** ((m + 1) // 2)) * _prod(gens[:m])
    vol_n_emb = _embedded_normal_volume(gens[m:], n)
    vol_total = volume_element(split.rep_total)
    if m % 2 == 1 and n % 2 == 1:
        rel = vol_total - (-1j) * (vol_m_emb @ vol_n_emb)
    else:
        rel = vol_total - vol_m_emb @ vol_n_emb
    res["volume_product"] = _max_abs(rel)
    res["volume_square"] = _max_abs(vol_total @ vol_total - eye)
    if (m + n) % 2 == 1:
        j = split.rep_total.parity_class
        res["volume_parity"] = _max_abs(vol_total - ((-1.0) ** j) * eye)

    # case-resolved form of gamma(v . omega_n) and of the tangent action
    jn = split.rep_n.parity_class
    in_ = np.eye(split.rep_n.fiber_dim, dtype=complex)

    def expected_tensor(rho_v, factor, doubled_sign):
        blk = np.kron(rho_v, in_)
        if not split.doubling:
            return factor * blk
        zero = np.zeros_like(blk)
        return factor * np.block(
            [[blk, zero], [zero, doubled_sign * blk]]
        )

    case_res = 0.0
    tang_res = 0.0
    for _ in range(draws):
        v = rng.standard_normal(m)
        rho_v = sum(
            c * g for c, g in zip(v, split.rep_m.generators)
        )
        gv = split.gamma_vector(np.concatenate([v, np.zeros(n)]))
        lhs = gv @ vol_n_emb
        if n % 2 == 0:
            expect = expected_tensor(rho_v, 1.0, +1)
        elif not split.doubling:
            expect = expected_tensor(rho_v, ((-1.0) ** jn) * 1j, +1)
        else:
            expect = expected_tensor(rho_v, ((-1.0) ** jn) * 1j, -1)
        case_res = max(case_res, _max_abs(lhs - expect))

        # same statement through omega_perp: the intrinsic multiplication
        tv = sum(c * t for c, t in zip(v, split.tangent_action))
        if n % 2 == 0:
            texpect = expected_tensor(rho_v, 1.0, +1)
        else:
            texpect = expected_tensor(rho_v, (-1.0) ** jn, -1 if split.doubling else +1)
        tang_res = max(tang_res, _max_abs(tv - texpect))
    res["case_equation"] = case_res
    res["tangent_action_form"] = tang_res

    tanti = 0.0
    t = split.tangent_action
    for a in range(m):
        for b in range(a, m):
            target = -2.0 * eye if a == b else 0.0
            tanti = max(tanti, _max_abs(t[a] @ t[b] + t[b] @ t[a] - target))
    res["tangent_action_relations"] = tanti

    mult = 0.0
    for i in range(m):
        spinor = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        via_word = clifford_apply(split, [i + 1, OMEGA_PERP], spinor)
        mult = max(mult, _max_abs(via_word - t[i] @ spinor))
    res["tangent_multiplication"] = mult

    if split.doubling:
        half = d // 2
        blocks = 0.0
        for i in range(m):
            blocks = max(
                blocks,
                _max_abs(t[i][:half, half:]),
                _max_abs(t[i][half:, :half]),
            )
        for a in range(n):
            g = split.gamma_normal(a)
            blocks = max(
                blocks,
                _max_abs(g[:half, :half]),
                _max_abs(g[half:, half:]),
            )
        res["doubled_block_structure"] = blocks

    return res
