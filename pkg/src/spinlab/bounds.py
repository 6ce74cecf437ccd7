"""Curvature functionals, eigenvalue lower bounds and limiting-case tests.

Pointwise quantities (the normal-curvature Rayleigh quotient, the
energy-momentum tensor of a spinor, hypothesis infima) are computed on
sample sets; for single-mode eigenfields on torus models one point suffices
because all densities are constant.  Points where |psi|^2 falls below
1e-10 times its maximum are excluded, mirroring the restriction to the open
set where the spinor does not vanish.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .models import AuxTorusModel, SphereModel, SphereSpinorField
from .operators import assemble_connection
from .spectral import FourierScalar, FourierSpinorField

__all__ = [
    "EMTensor",
    "BoundReport",
    "NormalCurvature",
    "SampledField",
    "random_normal_curvature",
    "sample_field",
    "compute_RN_psi",
    "kappa1",
    "energy_momentum",
    "q_choice",
    "connection_identity_residual",
    "limiting_case_residuals",
    "evaluate_bound",
    "BOUND_KINDS",
    "MARGIN_TOL",
]

TINY = 1e-300
VANISHING_CUT = 1e-10
MARGIN_TOL = 1e-9
EQUALITY_THRESHOLD = 1e-8

BOUND_KINDS = (
    "curvature",
    "curvature-min",
    "energy-momentum",
    "conformal",
    "yamabe",
    "genus-zero",
    "aux-curvature",
    "aux-conformal",
    "aux-energy-momentum",
    "aux-conformal-energy-momentum",
)

_AUX_KINDS = tuple(k for k in BOUND_KINDS if k.startswith("aux-"))
_CONFORMAL_KINDS = (
    "conformal",
    "aux-conformal",
    "aux-conformal-energy-momentum",
)


# ---------------------------------------------------------------------------
# sampled spinor data


@dataclass
class SampledField:
    """Values and covariant derivatives of a spinor field on sample points."""

    values: np.ndarray          # (P, fiber)
    derivs: np.ndarray          # (m, P, fiber)
    weights: np.ndarray         # (P,), quadrature weights summing to volume
    points: np.ndarray          # (P, chart_dim)
    model: object
    split: object

    @property
    def density(self):
        return np.sum(np.abs(self.values) ** 2, axis=-1)

    @property
    def valid(self):
        dens = self.density
        return dens >= VANISHING_CUT * float(np.max(dens))

    def norm_sq(self):
        return float(np.sum(self.weights * self.density))


def _default_grid(m, kmax):
    if m <= 2:
        return max(64, 4 * kmax + 5)
    return max(16, 2 * kmax + 3)


def sample_field(fld, model, split, grid_n=None):
    """Sample a spinor field and its covariant derivatives.

    Fourier fields supported by a single mode have constant densities, so a
    single sample point is exact; otherwise a uniform grid is used (default
    64 points per direction for surfaces).
    """
    if isinstance(fld, SphereSpinorField):
        pts, w = model.sample_grid()
        values = fld.values(pts)
        derivs = fld.cov_derivs(pts)
        weights = w * model.area
        return SampledField(values, derivs, weights, pts, model, split)
    if not isinstance(fld, FourierSpinorField):
        raise ValueError("unsupported field type")
    conn = assemble_connection(model, split, "intrinsic")
    dfields = conn.derivative_fields(fld)
    if grid_n is None:
        grid_n = 1 if fld.is_single_mode() else _default_grid(
            fld.m, fld.kmax
        )
    if grid_n == 1:
        pts = np.zeros((1, fld.m))
        values = fld.evaluate_points(pts)
        derivs = np.stack(
            [df.evaluate_points(pts) for df in dfields], axis=0
        )
        weights = np.array([fld.volume])
        return SampledField(values, derivs, weights, pts, model, split)
    values = fld.on_grid(grid_n).reshape(-1, fld.fiber_dim)
    derivs = np.stack(
        [
            df.on_grid(grid_n).reshape(-1, fld.fiber_dim)
            for df in dfields
        ],
        axis=0,
    )
    count = values.shape[0]
    weights = np.full(count, fld.volume / count)
    axes = [np.arange(grid_n) * (L / grid_n) for L in fld.lengths]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=-1)
    return SampledField(values, derivs, weights, pts, model, split)


# ---------------------------------------------------------------------------
# normal curvature


@dataclass(frozen=True)
class NormalCurvature:
    """Constant synthetic curvature of the normal (or auxiliary) bundle.

    components[i, j, a, b] is antisymmetric under i<->j and a<->b; the
    induced fiber action is built from products of two normal generators,
    which keeps the curvature endomorphism Hermitian.
    """

    components: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.components, dtype=float)
        if c.ndim != 4 or c.shape[0] != c.shape[1] or c.shape[2] != c.shape[3]:
            raise ValueError("components must have shape (m, m, n, n)")
        if np.max(np.abs(c + np.transpose(c, (1, 0, 2, 3)))) > 1e-12:
            raise ValueError("components must be antisymmetric in (i, j)")
        if np.max(np.abs(c + np.transpose(c, (0, 1, 3, 2)))) > 1e-12:
            raise ValueError("components must be antisymmetric in (a, b)")
        object.__setattr__(self, "components", c)

    @property
    def m(self):
        return self.components.shape[0]

    @property
    def n(self):
        return self.components.shape[2]

    def twist_matrix(self, split, i, j):
        d = split.fiber_dim
        out = np.zeros((d, d), dtype=complex)
        for a in range(self.n):
            for b in range(self.n):
                c = self.components[i, j, a, b]
                if c != 0.0:
                    out += 0.25 * c * (
                        split.gamma_normal(a) @ split.gamma_normal(b)
                    )
        return out

    def fiber_operator(self, split, check=True):
        """2 sum_ij gamma_i gamma_j (twist curvature)_ij, the Hermitian
        endomorphism whose lowest eigenvalue bounds the Rayleigh term."""
        d = split.fiber_dim
        out = np.zeros((d, d), dtype=complex)
        for i in range(self.m):
            for j in range(self.m):
                if i == j:
                    continue
                out += 2.0 * (
                    split.gamma_tangent(i)
                    @ split.gamma_tangent(j)
                    @ self.twist_matrix(split, i, j)
                )
        if check:
            defect = float(np.max(np.abs(out - out.conj().T)))
            if defect > 1e-12 * max(1.0, float(np.max(np.abs(out)))):
                raise ValueError(
                    f"curvature endomorphism not Hermitian ({defect:.3e})"
                )
        return out


def random_normal_curvature(m, n, rng, scale=1.0):
    raw = rng.standard_normal((m, m, n, n))
    raw = 0.5 * (raw - np.transpose(raw, (1, 0, 2, 3)))
    raw = 0.5 * (raw - np.transpose(raw, (0, 1, 3, 2)))
    return NormalCurvature(scale * raw)


def compute_RN_psi(sampled: SampledField, curvature=None):
    """Pointwise Rayleigh quotient of the curvature endomorphism; zero for
    the flat catalog bundles.  Raises when the field vanishes everywhere."""
    dens = sampled.density
    if float(np.max(dens)) == 0.0:
        raise ValueError("field vanishes identically")
    if curvature is None:
        return np.zeros(dens.shape)
    op = curvature.fiber_operator(sampled.split)
    num = np.real(
        np.einsum(
            "pf,gf,pg->p", np.conjugate(sampled.values), op, sampled.values
        )
    )
    out = np.zeros_like(num)
    mask = sampled.valid
    out[mask] = num[mask] / dens[mask]
    return out


def kappa1(curvature, split, samples=None):
    """Infimum over sample points of the lowest eigenvalue of the fiberwise
    curvature endomorphism (a single matrix for constant data)."""
    if curvature is None:
        return 0.0
    op = curvature.fiber_operator(split)
    return float(np.min(np.linalg.eigvalsh(op)))


# ---------------------------------------------------------------------------
# energy-momentum tensor


@dataclass
class EMTensor:
    """Symmetric tensor Q_ij(p) with its pointwise norm and trace."""

    q: np.ndarray        # (P, m, m)
    norm_sq: np.ndarray  # (P,)
    trace: np.ndarray    # (P,)

    def symmetry_defect(self):
        return float(np.max(np.abs(self.q - np.transpose(self.q, (0, 2, 1)))))

    def tracefree_deviation(self):
        m = self.q.shape[-1]
        dev = self.q - (
            self.trace[:, None, None] / m * np.eye(m)[None, :, :]
        )
        return float(np.sqrt(np.max(np.sum(dev**2, axis=(1, 2)))))


def energy_momentum(sampled: SampledField):
    """Q_ij = ((e_i . omega_perp . nabla_j + e_j . omega_perp . nabla_i) psi,
    psi) / (2 |psi|^2), which is also the intrinsic tensor of the
    identified field."""
    dens = sampled.density
    if float(np.max(dens)) == 0.0:
        raise ValueError("field vanishes identically")
    split = sampled.split
    m = split.m
    count = sampled.values.shape[0]
    tmats = split.tangent_action
    applied = np.stack(
        [
            np.einsum("gf,pf->pg", tmats[i], sampled.derivs[j])
            for i in range(m)
            for j in range(m)
        ],
        axis=0,
    ).reshape(m, m, count, -1)
    raw = np.real(
        np.einsum("pf,ijpf->pij", np.conjugate(sampled.values), applied)
    )
    q = 0.5 * (raw + np.transpose(raw, (0, 2, 1)))
    mask = sampled.valid
    out = np.zeros_like(q)
    out[mask] = q[mask] / dens[mask, None, None]
    return EMTensor(
        q=out,
        norm_sq=np.sum(out**2, axis=(1, 2)),
        trace=np.trace(out, axis1=1, axis2=2),
    )


# ---------------------------------------------------------------------------
# the optimizing function q


def q_choice(kind, m, curvature_value, hnorm):
    """The coefficient function making the modified-connection identity
    close the bound; constant curvature data gives a constant q.

    kind "killing": (1 - m q)^2 = (m-1) h / (sqrt(m/(m-1) c) - h) with
    c = R + (normal curvature term); kind "energy-momentum":
    q = sqrt(h / (m (sqrt(c) - h))) with c = R + kappa_1 + 4 |Q|^2.
    """
    c = float(curvature_value)
    h = float(hnorm)
    if kind == "killing":
        if h <= 0.0 or m * c <= (m - 1) * h**2:
            raise ValueError("hypothesis violated: m c > (m-1) h^2 > 0 fails")
        root = np.sqrt(m / (m - 1) * c)
        target = (m - 1) * h / (root - h)
        q = (1.0 - np.sqrt(target)) / m
        assert abs((1.0 - m * q) ** 2 - target) <= 1e-12 * max(1.0, target)
        return float(q)
    if kind == "energy-momentum":
        if h <= 0.0 or c <= h**2:
            raise ValueError("hypothesis violated: c > h^2 > 0 fails")
        return float(np.sqrt(h / (m * (np.sqrt(c) - h))))
    raise ValueError(f"unknown q kind {kind!r}")


# ---------------------------------------------------------------------------
# integral identities for the modified connections


def _gamma_H(model, split):
    d = split.fiber_dim
    out = np.zeros((d, d), dtype=complex)
    for a in range(split.n):
        c = model.mean_curvature[a]
        if c != 0.0:
            out += c * split.gamma_normal(a)
    return out


def _qvals(q, points, lengths):
    if isinstance(q, FourierScalar):
        return np.real(q.evaluate_points(points))
    return np.full(points.shape[0], float(q))


def connection_identity_residual(
    kind,
    model,
    split,
    lam,
    fld,
    q,
    curvature=None,
    kappa1_val=0.0,
    grid_n=None,
):
    """Relative defect of the modified-connection norm identity.

    kind "killing" uses nabla + (1-q)/(2(1-mq)) e_i.H. + q lambda
    e_i.omega_perp.; kind "energy-momentum" uses
    nabla + 1/(2mq) e_i.H. - q lambda e_i.omega_perp. + Q-term, whose right
    side carries the Cauchy-Schwarz deficit (reported as deficit_min, which
    must be nonnegative).
    """
    if isinstance(model, (AuxTorusModel, SphereModel)):
        raise ValueError("identity checks run on embedded torus models")
    s = sample_field(fld, model, split, grid_n=grid_n)
    m = split.m
    qv = _qvals(q, s.points, model.lengths)
    hnorm2 = float(np.sum(model.mean_curvature**2))
    R = model.scalar_curvature
    rn = compute_RN_psi(s, curvature)
    dens = s.density
    w = s.weights
    gH = _gamma_H(model, split)
    omega = split.omega_perp
    gi = [split.gamma_tangent(i) for i in range(m)]
    values = s.values

    def op(mat, arr):
        return np.einsum("gf,pf->pg", mat, arr)

    if kind == "killing":
        if np.any(np.abs(1.0 - m * qv) < 1e-12):
            raise ValueError("q must stay away from 1/m")
        c1 = (1.0 - qv) / (2.0 * (1.0 - m * qv))
        lhs = 0.0
        for i in range(m):
            term = (
                s.derivs[i]
                + c1[:, None] * op(gi[i] @ gH, values)
                + (qv * lam)[:, None] * op(gi[i] @ omega, values)
            )
            lhs += float(np.sum(w * np.sum(np.abs(term) ** 2, axis=-1)))
        pref = 1.0 + m * qv**2 - 2.0 * qv
        integrand = pref * (
            lam**2
            - 0.25
            * (
                (R + rn) / pref
                - (m - 1) * hnorm2 / (1.0 - m * qv) ** 2
            )
        )
        rhs = float(np.sum(w * integrand * dens))
        return {
            "residual": abs(lhs - rhs) / (abs(lhs) + abs(rhs) + TINY),
            "lhs": lhs,
            "rhs": rhs,
        }

    if kind == "energy-momentum":
        if np.any(np.abs(qv) < 1e-12):
            raise ValueError("q must be nowhere zero")
        em = energy_momentum(s)
        omval = op(omega, values)
        gHval = op(gH, values)
        h0 = np.zeros_like(dens)
        mask = s.valid
        h0[mask] = (
            np.real(np.einsum("pf,pf->p", np.conjugate(omval), gHval))[mask]
            / dens[mask]
        )
        alpha = 1.0 / (2.0 * m * qv)
        lhs = 0.0
        for i in range(m):
            qterm = np.zeros_like(values)
            for j in range(m):
                qterm += em.q[:, i, j][:, None] * op(gi[j] @ omega, values)
            term = (
                s.derivs[i]
                + alpha[:, None] * op(gi[i] @ gH, values)
                - (qv * lam)[:, None] * op(gi[i] @ omega, values)
                + qterm
            )
            lhs += float(np.sum(w * np.sum(np.abs(term) ** 2, axis=-1)))
        pref = 1.0 + m * qv**2
        deficit = hnorm2 - h0**2
        integrand = (
            pref
            * (
                lam**2
                - 0.25
                * ((R + rn + 4.0 * em.norm_sq) / pref - hnorm2 / (m * qv**2))
            )
            - deficit / (2.0 * m * qv)
        )
        rhs = float(np.sum(w * integrand * dens))
        return {
            "residual": abs(lhs - rhs) / (abs(lhs) + abs(rhs) + TINY),
            "lhs": lhs,
            "rhs": rhs,
            "deficit_min": float(np.min(deficit[mask])),
        }

    raise ValueError(f"unknown identity kind {kind!r}")


# ---------------------------------------------------------------------------
# limiting-case residuals


def _l2(w, arr):
    return float(np.sqrt(np.sum(w * np.sum(np.abs(arr) ** 2, axis=-1))))


def limiting_case_residuals(
    sampled: SampledField,
    lam,
    kappa1_val=0.0,
    curvature=None,
    include=("killing", "alignment", "em", "wem", "norm", "integrability"),
):
    """L2-normalized residuals of the special-section equations.

    At lambda = 0 both signs are admitted and the better residual is
    reported.  Requesting the alignment residual on a model with vanishing
    mean curvature is an error (the alignment is undefined there).
    """
    s = sampled
    split = s.split
    model = s.model
    m = split.m
    w = s.weights
    values = s.values
    tmats = split.tangent_action
    out = {}

    def op(mat, arr):
        return np.einsum("gf,pf->pg", mat, arr)

    grad_norm = np.sqrt(
        sum(_l2(w, s.derivs[i]) ** 2 for i in range(m))
    )
    psi_norm = np.sqrt(s.norm_sq())

    tw = np.zeros_like(values)
    for i in range(m):
        tw += op(tmats[i], s.derivs[i])
    mu_fit = float(
        np.sum(w * np.real(np.einsum("pf,pf->p", np.conjugate(values), tw)))
    ) / (psi_norm**2 + TINY)

    if "killing" in include:
        R = model.scalar_curvature
        mu_mag = 0.5 * np.sqrt(
            max(m / (m - 1) * (R + kappa1_val), 0.0)
        )
        signs = (1.0, -1.0) if lam == 0.0 else (np.sign(lam),)
        best = None
        for sgn in signs:
            mu = sgn * mu_mag
            num = np.sqrt(
                sum(
                    _l2(w, s.derivs[i] + (mu / m) * op(tmats[i], values)) ** 2
                    for i in range(m)
                )
            )
            den = grad_norm + abs(mu_mag / m) * np.sqrt(m) * psi_norm + TINY
            r = num / den
            if best is None or r < best:
                best = r
        out["killing"] = best
        out["killing_mu_abs"] = abs(mu_fit)
        out["killing_mu_fit"] = mu_fit

    if "alignment" in include:
        hnorm = float(np.sqrt(np.sum(model.mean_curvature**2)))
        if hnorm == 0.0:
            raise ValueError("alignment undefined: mean curvature vanishes")
        gH = _gamma_H(model, split)
        omval = op(split.omega_perp, values)
        hval = op(gH, values) / hnorm
        signs = (1.0, -1.0) if lam == 0.0 else (np.sign(lam),)
        best = min(
            _l2(w, omval - sgn * hval) / (2.0 * psi_norm + TINY)
            for sgn in signs
        )
        out["alignment"] = best

    em = None
    if "em" in include or "wem" in include or "integrability" in include:
        em = energy_momentum(s)

    if "em" in include:
        terms = []
        for i in range(m):
            qterm = np.zeros_like(values)
            for j in range(m):
                qterm += em.q[:, i, j][:, None] * op(tmats[j], values)
            terms.append(s.derivs[i] + qterm)
        num = np.sqrt(sum(_l2(w, t) ** 2 for t in terms))
        qnorm = np.sqrt(
            float(np.sum(w * em.norm_sq * s.density))
        )
        out["em"] = num / (grad_norm + qnorm + TINY)

    if "wem" in include:
        du = _log_norm_gradient(s)
        terms = []
        tdu = np.zeros_like(values)
        for j in range(m):
            tdu += du[j][:, None] * op(tmats[j], values)
        for i in range(m):
            qterm = np.zeros_like(values)
            for j in range(m):
                qterm += em.q[:, i, j][:, None] * op(tmats[j], values)
            rhs = (
                0.5 * op(tmats[i], tdu)
                + (m / 2.0) * du[i][:, None] * values
                - qterm
            )
            terms.append(s.derivs[i] - rhs)
        num = np.sqrt(sum(_l2(w, t) ** 2 for t in terms))
        out["wem"] = num / (grad_norm + np.sqrt(
            float(np.sum(w * em.norm_sq * s.density))
        ) + TINY)

    if "norm" in include:
        dens = s.density[s.valid]
        top = float(np.sqrt(np.max(dens)))
        bot = float(np.sqrt(np.min(dens)))
        out["norm_constancy"] = (top - bot) / (top + TINY)

    if "integrability" in include:
        R = model.scalar_curvature
        target = m / (4.0 * (m - 1)) * (R + kappa1_val)
        out["integrability_killing"] = abs(mu_fit**2 - target) / (
            mu_fit**2 + abs(target) + TINY
        )
        rn = compute_RN_psi(s, curvature)
        lhs = em.trace**2
        rhs = 0.25 * (R + rn + 4.0 * em.norm_sq)
        mask = s.valid
        out["integrability_em"] = float(
            np.max(
                np.abs(lhs[mask] - rhs[mask])
                / (np.abs(lhs[mask]) + np.abs(rhs[mask]) + 1.0)
            )
        )
        out["q_tracefree_deviation"] = em.tracefree_deviation()

    return out


def _log_norm_gradient(sampled: SampledField):
    """du = 2 d(ln |psi|) / (m - 1) on the sample set, computed spectrally
    for grid-sampled torus fields, zero for constant densities."""
    dens = sampled.density
    m = sampled.split.m
    spread = float(np.max(dens) - np.min(dens))
    if spread <= 1e-14 * float(np.max(dens)):
        return np.zeros((m, dens.shape[0]))
    model = sampled.model
    if not getattr(model, "is_torus", False):
        raise ValueError("log-gradient sampling needs a torus grid")
    count = dens.shape[0]
    n = round(count ** (1.0 / m))
    if n**m != count:
        raise ValueError("needs a full uniform grid sample")
    ln = np.log(np.sqrt(np.maximum(dens, 1e-280))).reshape((n,) * m)
    band = (n - 1) // 2
    u = FourierScalar.from_grid(ln, model.lengths, band)
    out = []
    for ax in range(m):
        vals = np.real(
            u.derivative(ax).evaluate_points(sampled.points)
        )
        out.append(2.0 / (m - 1) * vals)
    return np.stack(out, axis=0)


# ---------------------------------------------------------------------------
# bound evaluation


@dataclass
class BoundReport:
    """Outcome of one lower-bound evaluation for one eigenpair."""

    bound_kind: str
    model_label: str
    eigenvalue: float
    lambda_sq: float
    hypothesis_ok: bool
    violated_clause: str
    rhs: float
    margin: float
    limiting_case: dict = dc_field(default_factory=dict)

    def as_dict(self):
        return {
            "bound_kind": self.bound_kind,
            "model": self.model_label,
            "eigenvalue": self.eigenvalue,
            "lambda_sq": self.lambda_sq,
            "hypothesis_ok": self.hypothesis_ok,
            "violated_clause": self.violated_clause,
            "rhs": self.rhs,
            "margin": self.margin,
            "limiting_case": {
                k: float(v) for k, v in sorted(self.limiting_case.items())
            },
        }


def _conformal_curvature_times_weight(model, conf, points):
    """Pointwise R-bar * exp(2u): the conformal transformation bracket
    R + 2(m-1) Lap u - (m-1)(m-2)|du|^2, which is exactly band-limited."""
    m = model.m
    u = conf.u
    if not isinstance(u, FourierScalar):
        return np.full(points.shape[0], model.scalar_curvature)
    bracket = FourierScalar.constant(model.scalar_curvature, model.lengths)
    bracket = bracket + 2.0 * (m - 1) * u.neg_laplacian()
    if m > 2:
        grad = FourierScalar.zero(model.lengths)
        for ax in range(m):
            du = u.derivative(ax)
            grad = grad + du * du
        bracket = bracket - float((m - 1) * (m - 2)) * grad
    return np.real(bracket.evaluate_points(points))


def evaluate_bound(
    kind,
    model,
    split,
    lam,
    fld=None,
    sampled=None,
    kappa1_val=None,
    curvature=None,
    conf=None,
    mu1=None,
    grid_n=None,
    equality_threshold=EQUALITY_THRESHOLD,
):
    """Evaluate one eigenvalue lower bound for one eigenpair.

    Checks the strict hypothesis pointwise on the sample set, computes the
    infimum of the bound expression, and, when the bound is saturated while
    the hypothesis holds, attaches the limiting-case residuals appropriate
    for the bound family.
    """
    if kind not in BOUND_KINDS:
        raise ValueError(f"unknown bound kind {kind!r}")
    if sampled is None:
        if fld is None:
            raise ValueError("need a field or a sampled field")
        sampled = sample_field(fld, model, split, grid_n=grid_n)
    s = sampled
    m = split.m
    if kappa1_val is None:
        kappa1_val = kappa1(curvature, split)
    mask = s.valid
    pts = s.points[mask]
    lam = float(lam)
    R = model.scalar_curvature
    is_aux = kind in _AUX_KINDS
    if is_aux:
        if not isinstance(model, AuxTorusModel):
            raise ValueError(f"{kind} applies to auxiliary-bundle models")
        fvals = np.real(model.potential.evaluate_points(pts))
        bvals = np.abs(fvals)
        b_squared_clause = "f^2 > 0"
    else:
        hnorm2 = float(np.sum(model.mean_curvature**2))
        bvals = np.full(pts.shape[0], np.sqrt(hnorm2))
        b_squared_clause = "|H|^2 > 0"

    need_em = kind in (
        "energy-momentum",
        "conformal",
        "yamabe",
        "genus-zero",
        "aux-energy-momentum",
        "aux-conformal-energy-momentum",
    )
    em = energy_momentum(s) if need_em else None
    qn = em.norm_sq[mask] if em is not None else None

    if kind == "curvature":
        if m < 2:
            raise ValueError("needs m >= 2")
        rn = compute_RN_psi(s, curvature)[mask]
        core = R + rn
        cond = m * core - (m - 1) * bvals**2
        cexpr = m / (m - 1) * core
        main_clause = "m (R + R^N_psi) > (m-1) |H|^2"
    elif kind == "curvature-min":
        if m < 2:
            raise ValueError("needs m >= 2")
        core = np.full(pts.shape[0], R + kappa1_val)
        cond = m * core - (m - 1) * bvals**2
        cexpr = m / (m - 1) * core
        main_clause = "m (R + kappa_1) > (m-1) |H|^2"
    elif kind == "energy-momentum":
        core = R + kappa1_val + 4.0 * qn
        cond = core - bvals**2
        cexpr = core
        main_clause = "R + kappa_1 + 4|Q|^2 > |H|^2"
    elif kind == "conformal":
        if conf is None:
            raise ValueError("conformal bound needs conformal data")
        rbar = _conformal_curvature_times_weight(model, conf, pts)
        core = rbar + kappa1_val + 4.0 * qn
        cond = core - bvals**2
        cexpr = core
        main_clause = "Rbar e^{2u} + kappa_1 + 4|Q|^2 > |H|^2"
    elif kind == "yamabe":
        if m < 3:
            raise ValueError("needs m >= 3")
        if mu1 is None:
            raise ValueError("needs the first conformal-Laplacian eigenvalue")
        core = float(mu1) + kappa1_val + 4.0 * qn
        cond = core - bvals**2
        cexpr = core
        main_clause = "mu_1 + kappa_1 + 4|Q|^2 > |H|^2"
    elif kind == "genus-zero":
        if not isinstance(model, SphereModel) or model.m != 2:
            raise ValueError("genus-zero bound needs a compact surface of"
                             " genus zero (sphere catalog model)")
        core = 8.0 * np.pi / model.area + kappa1_val + 4.0 * qn
        cond = core - bvals**2
        cexpr = core
        main_clause = "8 pi / Area + kappa_1 + 4|Q|^2 > |H|^2"
    elif kind == "aux-curvature":
        if m < 2:
            raise ValueError("needs m >= 2")
        core = np.full(pts.shape[0], R + kappa1_val)
        cond = m * core - (m - 1) * bvals**2
        cexpr = m / (m - 1) * core
        main_clause = "m (R + kappa_1) > (m-1) f^2"
    elif kind == "aux-conformal":
        if m < 2:
            raise ValueError("needs m >= 2")
        if conf is None:
            raise ValueError("needs conformal data")
        rbar = _conformal_curvature_times_weight(model, conf, pts)
        core = rbar + kappa1_val
        cond = m * core - (m - 1) * bvals**2
        cexpr = m / (m - 1) * core
        main_clause = "m (Rbar e^{2u} + kappa_1) > (m-1) f^2"
    elif kind == "aux-energy-momentum":
        core = R + kappa1_val + 4.0 * qn
        cond = core - bvals**2
        cexpr = core
        main_clause = "R + kappa_1 + 4|Q|^2 > f^2"
    else:  # aux-conformal-energy-momentum
        if conf is None:
            raise ValueError("needs conformal data")
        rbar = _conformal_curvature_times_weight(model, conf, pts)
        core = rbar + kappa1_val + 4.0 * qn
        cond = core - bvals**2
        cexpr = core
        main_clause = "Rbar e^{2u} + kappa_1 + 4|Q|^2 > f^2"

    violated = ""
    hyp_ok = True
    if not np.all(bvals**2 > 0.0):
        hyp_ok = False
        violated = b_squared_clause
    elif not np.all(cond > 0.0):
        hyp_ok = False
        violated = main_clause

    rhs = 0.25 * float(
        np.min((np.sqrt(np.clip(cexpr, 0.0, None)) - bvals) ** 2)
    )
    margin = lam**2 - rhs

    limiting = {}
    if hyp_ok and margin < equality_threshold:
        limiting = _equality_residuals(
            kind, s, lam, kappa1_val, curvature, model
        )

    return BoundReport(
        bound_kind=kind,
        model_label=model.label(),
        eigenvalue=lam,
        lambda_sq=lam**2,
        hypothesis_ok=hyp_ok,
        violated_clause=violated,
        rhs=rhs,
        margin=margin,
        limiting_case=limiting,
    )


def _equality_residuals(kind, sampled, lam, kappa1_val, curvature, model):
    geometric = not isinstance(model, AuxTorusModel)
    has_h = geometric and float(np.sum(model.mean_curvature**2)) > 0.0
    if kind in ("curvature", "curvature-min", "aux-curvature"):
        include = ["killing", "norm", "integrability"]
        if has_h:
            include.append("alignment")
    elif kind in ("energy-momentum", "aux-energy-momentum", "genus-zero",
                  "yamabe"):
        include = ["em", "integrability"]
        if has_h:
            include.append("alignment")
    else:
        include = ["wem", "integrability"]
    return limiting_case_residuals(
        sampled,
        lam,
        kappa1_val=kappa1_val,
        curvature=curvature,
        include=tuple(include),
    )
