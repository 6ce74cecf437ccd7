"""Exactly solvable embedded model geometries.

Every catalog model carries analytic adapted frames, constant second
fundamental form components in that frame, mean curvature, scalar curvature
and a flat normal bundle.  Torus-like models use arclength coordinates on
[0, L_i) per direction; the round sphere uses a colatitude/longitude chart.

Conventions pinned here:
  * h(X, Y) is the normal part of the ambient derivative of Y along X, so a
    round sphere has h(e_i, e_i) = -nu_out / r as a vector.
  * The sphere's adapted frame uses the inward unit normal as its normal
    frame vector (the tangent frame is flipped accordingly so the adapted
    frame stays positively oriented); reversing the normal orientation flips
    the sign of the normal volume element.
  * Spin structure shifts are measured for embedded circle factors by a
    parallel-transport oracle, never assumed: each circle of a product of
    circles is antiperiodic (shift 1/2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .spectral import FourierScalar

__all__ = [
    "ConformalData",
    "SphereModel",
    "CircleProductModel",
    "FlatTorusModel",
    "AuxTorusModel",
    "SphereSpinorField",
    "build_model",
    "gauss_formula_residual",
    "conformal_scalar_curvature",
    "metric_scalar_curvature_fd",
    "yamabe_first_eigenvalue",
    "auxiliary_bundle_data",
    "spin_structure_oracle",
    "ambient_connection_fd",
]

FD_STEP = 1e-5


@dataclass(frozen=True)
class ConformalData:
    """Conformal factor exp(2u) with vanishing normal gradient.

    u is a real band-limited function on the submanifold (FourierScalar for
    torus models, a plain float for spheres, where only constants are
    supported).
    """

    u: object
    normal_gradient_zero: bool = True

    def __post_init__(self):
        if not self.normal_gradient_zero:
            raise ValueError("only regular conformal changes are supported")
        if isinstance(self.u, FourierScalar) and not self.u.is_real():
            raise ValueError("conformal exponent must be real-valued")


class _TorusBase:
    """Shared surface for models whose intrinsic geometry is a flat torus."""

    is_torus = True

    @property
    def volume(self):
        return float(np.prod(self.lengths))

    def chart_samples(self, rng, count):
        pts = rng.random((count, self.m))
        return pts * np.asarray(self.lengths)

    def chart_directions(self, points):
        points = np.atleast_2d(points)
        eye = np.eye(self.m)
        return np.broadcast_to(eye, (points.shape[0], self.m, self.m))

    def intrinsic_connection(self, points):
        points = np.atleast_2d(points)
        return np.zeros((points.shape[0], self.m, self.m, self.m))

    def label(self):
        return self.kind


class CircleProductModel(_TorusBase):
    """Product of circles S^1(r_1) x ... x S^1(r_m) inside R^(2m).

    The adapted frame rotates once in each coordinate plane per loop, so the
    induced spin structure is antiperiodic on every factor.
    """

    kind = "circle-product"

    def __init__(self, radii):
        radii = tuple(float(r) for r in radii)
        if not radii or any(r <= 0 for r in radii):
            raise ValueError("radii must be positive")
        self.radii = radii
        self.m = len(radii)
        self.n = len(radii)
        self.lengths = tuple(2.0 * np.pi * r for r in radii)
        self.spin_delta = (0.5,) * self.m
        self.scalar_curvature = 0.0
        h = np.zeros((self.m, self.m, self.n))
        for i, r in enumerate(radii):
            h[i, i, i] = -1.0 / r
        self.h_components = h
        self.mean_curvature = np.array([-1.0 / r for r in radii])
        self.normal_curvature = None

    @property
    def ambient_dim(self):
        return 2 * self.m

    def _angles(self, points):
        return np.atleast_2d(points) / np.asarray(self.radii)

    def embedding(self, points):
        ang = self._angles(points)
        out = np.zeros(ang.shape[:-1] + (2 * self.m,))
        for i, r in enumerate(self.radii):
            out[..., 2 * i] = r * np.cos(ang[..., i])
            out[..., 2 * i + 1] = r * np.sin(ang[..., i])
        return out

    def tangent_frame(self, points):
        ang = self._angles(points)
        out = np.zeros(ang.shape[:-1] + (self.m, 2 * self.m))
        for i in range(self.m):
            out[..., i, 2 * i] = -np.sin(ang[..., i])
            out[..., i, 2 * i + 1] = np.cos(ang[..., i])
        return out

    def normal_frame(self, points):
        ang = self._angles(points)
        out = np.zeros(ang.shape[:-1] + (self.n, 2 * self.m))
        for i in range(self.n):
            out[..., i, 2 * i] = np.cos(ang[..., i])
            out[..., i, 2 * i + 1] = np.sin(ang[..., i])
        return out

    def spin_lift(self, split, points):
        """Spin lift of the frame rotation relative to theta = 0."""
        ang = self._angles(points)
        d = split.fiber_dim
        out = np.broadcast_to(
            np.eye(d, dtype=complex), ang.shape[:-1] + (d, d)
        ).copy()
        for i in range(self.m):
            j = split.gamma_tangent(i) @ split.gamma_normal(i)
            half = ang[..., i] / 2.0
            rot = (
                np.cos(half)[..., None, None] * np.eye(d)
                - np.sin(half)[..., None, None] * j
            )
            out = rot @ out
        return out

    def parallel_spinor(self, split, psi0):
        """Restriction of a constant ambient spinor, as an exact two-mode
        (k = +-1/2 per axis) Fourier field in the adapted gauge."""
        from .spectral import FourierSpinorField

        psi0 = np.asarray(psi0, dtype=complex)
        d = split.fiber_dim
        field = FourierSpinorField.zero(self.lengths, self.spin_delta, 1, d)
        eye = np.eye(d, dtype=complex)
        for signs in np.ndindex(*(2,) * self.m):
            mat = eye
            for i, s in enumerate(signs):
                sgn = 1.0 if s == 1 else -1.0
                j = split.gamma_tangent(i) @ split.gamma_normal(i)
                mat = 0.5 * (eye - 1j * sgn * j) @ mat
            mode = tuple(0.5 if s == 1 else -0.5 for s in signs)
            field.coeffs[field.mode_index(mode)] += mat @ psi0
        return field

    def label(self):
        r = ",".join(f"{x:g}" for x in self.radii)
        return f"circle-product({r})"


class FlatTorusModel(_TorusBase):
    """Totally geodesic linear T^m inside a flat T^(m+n)."""

    kind = "flat-torus"

    def __init__(self, m, n, lengths=None, spin_delta=None):
        m, n = int(m), int(n)
        if m < 1 or n < 1:
            raise ValueError("need m >= 1 and n >= 1")
        lengths = (1.0,) * m if lengths is None else tuple(map(float, lengths))
        if len(lengths) != m or any(L <= 0 for L in lengths):
            raise ValueError("need one positive length per tangent direction")
        spin_delta = (0.0,) * m if spin_delta is None else tuple(spin_delta)
        if len(spin_delta) != m or any(d not in (0.0, 0.5) for d in spin_delta):
            raise ValueError("spin shifts must be 0 or 1/2 per direction")
        self.m, self.n = m, n
        self.lengths = lengths
        self.spin_delta = spin_delta
        self.scalar_curvature = 0.0
        self.h_components = np.zeros((m, m, n))
        self.mean_curvature = np.zeros(n)
        self.normal_curvature = None

    @property
    def ambient_dim(self):
        return self.m + self.n

    def embedding(self, points):
        points = np.atleast_2d(points)
        out = np.zeros(points.shape[:-1] + (self.ambient_dim,))
        out[..., : self.m] = points
        return out

    def tangent_frame(self, points):
        points = np.atleast_2d(points)
        out = np.zeros(points.shape[:-1] + (self.m, self.ambient_dim))
        for i in range(self.m):
            out[..., i, i] = 1.0
        return out

    def normal_frame(self, points):
        points = np.atleast_2d(points)
        out = np.zeros(points.shape[:-1] + (self.n, self.ambient_dim))
        for a in range(self.n):
            out[..., a, self.m + a] = 1.0
        return out

    def parallel_spinor(self, split, psi0):
        from .spectral import FourierSpinorField

        if any(d != 0.0 for d in self.spin_delta):
            raise ValueError(
                "parallel spinors need the trivial spin structure"
            )
        mode = (0.0,) * self.m
        return FourierSpinorField.single_mode(
            mode, np.asarray(psi0, complex), self.lengths, self.spin_delta, 1
        )

    def label(self):
        return f"flat-torus(m={self.m},n={self.n})"


class AuxTorusModel(_TorusBase):
    """Flat T^m with an auxiliary rank-n spinor twist in place of a normal
    bundle: a flat connection acting by constant phases on the twist fiber
    weights, plus a real band-limited potential function.
    """

    kind = "aux-torus"

    def __init__(
        self,
        m,
        n,
        lengths=None,
        spin_delta=None,
        holonomy=None,
        f=None,
        mult_sign=1,
    ):
        m, n = int(m), int(n)
        if m < 1 or n < 1:
            raise ValueError("need m >= 1 and n >= 1")
        lengths = (1.0,) * m if lengths is None else tuple(map(float, lengths))
        if len(lengths) != m or any(L <= 0 for L in lengths):
            raise ValueError("need one positive length per direction")
        spin_delta = (0.0,) * m if spin_delta is None else tuple(spin_delta)
        if len(spin_delta) != m or any(d not in (0.0, 0.5) for d in spin_delta):
            raise ValueError("spin shifts must be 0 or 1/2 per direction")
        weights = 2 ** (n // 2)
        if holonomy is None:
            holonomy = np.zeros((m, weights))
        holonomy = np.asarray(holonomy, dtype=float)
        if holonomy.shape != (m, weights):
            raise ValueError(
                f"holonomy table must have shape ({m}, {weights})"
            )
        if np.any(holonomy < 0.0) or np.any(holonomy >= 1.0):
            raise ValueError("holonomy phases must lie in [0, 1)")
        if f is None:
            f = FourierScalar.zero(lengths)
        if not isinstance(f, FourierScalar):
            f = FourierScalar.constant(float(f), lengths)
        if f.lengths != lengths:
            raise ValueError("potential lives on a different torus")
        if not f.is_real():
            raise ValueError("potential must be real-valued")
        if mult_sign not in (1, -1):
            raise ValueError("mult_sign selects the Clifford sign, +-1")
        self.m, self.n = m, n
        self.lengths = lengths
        self.spin_delta = spin_delta
        self.holonomy = holonomy
        self.potential = f
        self.mult_sign = int(mult_sign)
        self.scalar_curvature = 0.0
        self.h_components = np.zeros((m, m, 0))
        self.mean_curvature = np.zeros(0)
        self.normal_curvature = None

    @property
    def ambient_dim(self):
        return self.m

    def embedding(self, points):
        return np.atleast_2d(points).astype(float)

    def tangent_frame(self, points):
        points = np.atleast_2d(points)
        out = np.zeros(points.shape[:-1] + (self.m, self.m))
        for i in range(self.m):
            out[..., i, i] = 1.0
        return out

    def normal_frame(self, points):
        points = np.atleast_2d(points)
        return np.zeros(points.shape[:-1] + (0, self.m))

    def label(self):
        return f"aux-torus(m={self.m},n={self.n})"


class SphereModel:
    """Round sphere S^m(r) in R^(m+1).

    Frames and spinor fields are provided for m = 2 on the colatitude chart;
    scalar data (curvature, mean curvature, area, conformal spectra) is
    available for any m >= 2.  The adapted frame is (e_theta, -e_phi) with
    the inward unit normal, which keeps the juxtaposed frame positively
    oriented.
    """

    kind = "sphere"
    is_torus = False

    def __init__(self, m, radius=1.0):
        m = int(m)
        radius = float(radius)
        if m < 2:
            raise ValueError("sphere models need m >= 2")
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.m = m
        self.n = 1
        self.radius = radius
        self.scalar_curvature = m * (m - 1) / radius**2
        h = np.zeros((m, m, 1))
        for i in range(m):
            h[i, i, 0] = 1.0 / radius  # inward-normal component
        self.h_components = h
        self.mean_curvature = np.array([m / radius])
        self.normal_curvature = None
        self.spin_delta = None

    @property
    def ambient_dim(self):
        return self.m + 1

    @property
    def area(self):
        if self.m != 2:
            raise ValueError("area formula kept for surfaces only")
        return 4.0 * np.pi * self.radius**2

    def _require_chart(self):
        if self.m != 2:
            raise ValueError("frames are implemented for m = 2 only")

    def chart_samples(self, rng, count):
        self._require_chart()
        theta = 0.5 + rng.random(count) * (np.pi - 1.0)
        phi = 0.3 + rng.random(count) * (2.0 * np.pi - 0.6)
        return np.stack([theta, phi], axis=-1)

    def sample_grid(self, n_theta=12, n_phi=16):
        self._require_chart()
        theta = np.linspace(0.5, np.pi - 0.5, n_theta)
        phi = np.linspace(0.3, 2.0 * np.pi - 0.3, n_phi)
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        pts = np.stack([tt.ravel(), pp.ravel()], axis=-1)
        w = np.sin(tt.ravel())
        return pts, w / w.sum()

    def embedding(self, points):
        self._require_chart()
        points = np.atleast_2d(points)
        th, ph = points[..., 0], points[..., 1]
        r = self.radius
        return np.stack(
            [
                r * np.sin(th) * np.cos(ph),
                r * np.sin(th) * np.sin(ph),
                r * np.cos(th),
            ],
            axis=-1,
        )

    def tangent_frame(self, points):
        self._require_chart()
        points = np.atleast_2d(points)
        th, ph = points[..., 0], points[..., 1]
        e1 = np.stack(
            [np.cos(th) * np.cos(ph), np.cos(th) * np.sin(ph), -np.sin(th)],
            axis=-1,
        )
        e2 = np.stack(
            [np.sin(ph), -np.cos(ph), np.zeros_like(ph)], axis=-1
        )
        return np.stack([e1, e2], axis=-2)

    def normal_frame(self, points):
        self._require_chart()
        points = np.atleast_2d(points)
        th, ph = points[..., 0], points[..., 1]
        nu = -np.stack(
            [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)],
            axis=-1,
        )
        return nu[..., None, :]

    def chart_directions(self, points):
        """d(chart)/d(arclength) along each adapted tangent direction."""
        self._require_chart()
        points = np.atleast_2d(points)
        th = points[..., 0]
        out = np.zeros(points.shape[:-1] + (2, 2))
        out[..., 0, 0] = 1.0 / self.radius
        out[..., 1, 1] = -1.0 / (self.radius * np.sin(th))
        return out

    def intrinsic_connection(self, points):
        """<nabla_{e_i} e_j, e_k> for the adapted frame."""
        self._require_chart()
        points = np.atleast_2d(points)
        th = points[..., 0]
        cot = np.cos(th) / np.sin(th)
        out = np.zeros(points.shape[:-1] + (2, 2, 2))
        out[..., 1, 0, 1] = cot / self.radius
        out[..., 1, 1, 0] = -cot / self.radius
        return out

    def spin_lift(self, split, points):
        """Spin lift of the frame rotation on the chart."""
        self._require_chart()
        points = np.atleast_2d(points)
        th, ph = points[..., 0], points[..., 1]
        g1, g2 = split.gamma_tangent(0), split.gamma_tangent(1)
        g3 = split.gamma_normal(0)
        d = split.fiber_dim
        eye = np.eye(d, dtype=complex)

        def rot(angle, a, b):
            half = angle / 2.0
            return (
                np.cos(half)[..., None, None] * eye
                + np.sin(half)[..., None, None] * (a @ b)
            )

        flip = g2 @ g3  # half-turn in the (2,3) plane
        return rot(ph, g1, g2) @ rot(th, g3, g1) @ flip

    def parallel_spinor(self, split, psi0):
        return SphereSpinorField(self, split, psi0)

    def label(self):
        return f"sphere(m={self.m},r={self.radius:g})"


class SphereSpinorField:
    """Restriction of a constant ambient spinor to the sphere, in the
    adapted gauge, optionally multiplied by a constant fiber matrix that
    commutes with the intrinsic spin connection (identity, the normal
    generator, and their scalar multiples).
    """

    def __init__(self, model, split, psi0, left=None):
        model._require_chart()
        self.model = model
        self.split = split
        self.psi0 = np.asarray(psi0, dtype=complex)
        d = split.fiber_dim
        self.left = np.eye(d, dtype=complex) if left is None else left

    def raw_values(self, points):
        lifts = self.model.spin_lift(self.split, points)
        inv = np.conjugate(np.swapaxes(lifts, -1, -2))  # lifts are unitary
        return np.einsum("...gf,f->...g", inv, self.psi0)

    def values(self, points):
        return np.einsum(
            "gf,...f->...g", self.left, self.raw_values(points)
        )

    def cov_derivs(self, points):
        """Intrinsic covariant derivative values along each frame direction."""
        raw = self.raw_values(points)
        out = []
        r = self.model.radius
        g3 = self.split.gamma_normal(0)
        for i in range(self.model.m):
            mat = -0.5 / r * (self.split.gamma_tangent(i) @ g3)
            out.append(
                np.einsum("gf,...f->...g", self.left @ mat, raw)
            )
        return np.stack(out, axis=0)

    def with_left(self, matrix):
        return SphereSpinorField(
            self.model, self.split, self.psi0, matrix @ self.left
        )

    def apply_dirac(self):
        """Intrinsic-connection, ambient-multiplication Dirac operator.

        Valid because the stored left matrix commutes with the intrinsic
        spin connection, so nabla(left psi) = left nabla(psi)."""
        split = self.split
        r = self.model.radius
        acc = np.zeros_like(self.left)
        g3 = split.gamma_normal(0)
        for i in range(self.model.m):
            deriv_rule = -0.5 / r * (split.gamma_tangent(i) @ g3)
            acc = acc + split.gamma_tangent(i) @ self.left @ deriv_rule
        return SphereSpinorField(self.model, self.split, self.psi0, acc)


def build_model(kind, **params):
    """Instantiate a catalog model by kind name."""
    table = {
        "sphere": SphereModel,
        "circle-product": CircleProductModel,
        "flat-torus": FlatTorusModel,
        "aux-torus": AuxTorusModel,
    }
    if kind not in table:
        raise ValueError(
            f"unknown model kind {kind!r}; choose from {sorted(table)}"
        )
    return table[kind](**params)


def gauss_formula_residual(model, n_samples=40, step=FD_STEP, seed=0):
    """Max residual of the frame-field decomposition of ambient derivatives.

    Finite differences of the embedded frame fields are compared against the
    intrinsic connection plus second-fundamental-form terms; the tolerance is
    set by the O(step^2) truncation of central differences.
    """
    rng = np.random.default_rng(seed)
    pts = model.chart_samples(rng, n_samples)
    m, n = model.m, model.n if model.kind != "aux-torus" else 0
    dirs = model.chart_directions(pts)
    h = model.h_components
    conn = model.intrinsic_connection(pts)
    worst = 0.0

    def frames(points):
        return np.concatenate(
            [model.tangent_frame(points), model.normal_frame(points)],
            axis=-2,
        )

    base_t = model.tangent_frame(pts)
    base_n = model.normal_frame(pts)
    for i in range(m):
        plus = frames(pts + step * dirs[:, i, :])
        minus = frames(pts - step * dirs[:, i, :])
        deriv = (plus - minus) / (2.0 * step)
        for j in range(m):
            analytic = np.einsum("pk,pkd->pd", conn[:, i, j, :], base_t)
            if n:
                analytic = analytic + np.einsum(
                    "a,pad->pd", h[i, j, :], base_n
                )
            worst = max(worst, float(np.max(np.abs(deriv[:, j, :] - analytic))))
        for a in range(n):
            analytic = -np.einsum("j,pjd->pd", h[i, :, a], base_t)
            worst = max(
                worst, float(np.max(np.abs(deriv[:, m + a, :] - analytic)))
            )
    return worst


def ambient_connection_fd(model, split, points, step=FD_STEP):
    """Spin connection matrices of the restricted ambient bundle in the
    adapted gauge, from finite differences of the frame fields."""
    points = np.atleast_2d(points)
    m, n = model.m, model.n
    dirs = model.chart_directions(points)
    gens = split.rep_total.generators

    def frames(pts):
        return np.concatenate(
            [model.tangent_frame(pts), model.normal_frame(pts)], axis=-2
        )

    base = frames(points)
    total = m + n
    d = split.fiber_dim
    out = np.zeros((m,) + points.shape[:-1] + (d, d), dtype=complex)
    for i in range(m):
        plus = frames(points + step * dirs[:, i, :])
        minus = frames(points - step * dirs[:, i, :])
        deriv = (plus - minus) / (2.0 * step)
        omega = np.einsum("pad,pbd->pab", deriv, base)
        for a in range(total):
            for b in range(total):
                out[i] += 0.25 * omega[:, a, b][..., None, None] * (
                    gens[a] @ gens[b]
                )
    return out


def spin_structure_oracle(model, split, axis, rtol=1e-10):
    """Measure the gauge holonomy of the adapted frame around one loop.

    Integrates parallel transport of the restricted ambient connection
    (finite-difference coefficients) around the closed coordinate loop and
    classifies the result as +Id (shift 0) or -Id (shift 1/2).
    """
    if not getattr(model, "is_torus", False):
        raise ValueError("spin structure loops exist for torus models only")
    L = model.lengths[axis]
    d = split.fiber_dim
    base = np.zeros(model.m)

    def rhs(t, y):
        pt = base.copy()
        pt[axis] = t % L
        gamma = ambient_connection_fd(model, split, pt[None, :])[axis][0]
        u = y.reshape(d, d)
        du = -gamma @ u
        return du.ravel()

    y0 = np.eye(d, dtype=complex).ravel()
    sol = solve_ivp(
        rhs, (0.0, L), y0, rtol=rtol, atol=rtol, method="DOP853"
    )
    hol = sol.y[:, -1].reshape(d, d)
    eye = np.eye(d)
    dev_plus = float(np.max(np.abs(hol - eye)))
    dev_minus = float(np.max(np.abs(hol + eye)))
    if dev_plus <= dev_minus:
        return 0.0, dev_plus
    return 0.5, dev_minus


def restricted_parallel_transport_residual(
    model, split, fld, points=None, step=FD_STEP
):
    """Finite-difference check that a restricted ambient-parallel spinor is
    annihilated by the ambient covariant derivative in the adapted gauge.

    Differences the gauge-expressed field along each frame direction and
    adds the finite-difference spin connection; the result divided by the
    field magnitude is the residual (O(step^2) + rounding).
    """
    if points is None:
        rng = np.random.default_rng(7)
        points = model.chart_samples(rng, 25)
    points = np.atleast_2d(points)

    def values(pts):
        if hasattr(fld, "values"):
            return fld.values(pts)
        return fld.evaluate_points(pts)

    dirs = model.chart_directions(points)
    gammas = ambient_connection_fd(model, split, points, step=step)
    base = values(points)
    worst = 0.0
    scale = float(np.max(np.abs(base))) + 1e-300
    for i in range(model.m):
        plus = values(points + step * dirs[:, i, :])
        minus = values(points - step * dirs[:, i, :])
        deriv = (plus - minus) / (2.0 * step)
        conn = np.einsum("pgf,pf->pg", gammas[i], base)
        worst = max(worst, float(np.max(np.abs(deriv + conn))) / scale)
    return worst


def conformal_scalar_curvature(model, conf: ConformalData):
    """Scalar curvature of the conformally changed induced metric.

    For torus models this is the band-limited projection of
    exp(-2u) (R + 2(m-1) Lap(u) - (m-1)(m-2) |du|^2) with the nonnegative
    Laplacian; spheres support constant u only (a homothety).
    """
    m = model.m
    if m < 2:
        raise ValueError("scalar curvature needs m >= 2")
    if isinstance(model, SphereModel):
        c = float(conf.u)
        return np.exp(-2.0 * c) * model.scalar_curvature
    u = conf.u
    if not isinstance(u, FourierScalar):
        u = FourierScalar.constant(float(u), model.lengths)
    bracket = FourierScalar.constant(
        model.scalar_curvature, model.lengths
    ) + 2.0 * (m - 1) * u.neg_laplacian()
    if m > 2:
        grad_sq = FourierScalar.zero(model.lengths)
        for ax in range(m):
            du = u.derivative(ax)
            grad_sq = grad_sq + du * du
        bracket = bracket - float((m - 1) * (m - 2)) * grad_sq
    return u.exp(-2.0) * bracket


def metric_scalar_curvature_fd(u: FourierScalar, lengths, points, step=1e-4):
    """Scalar curvature of exp(2u) * (flat metric) by finite differences.

    Independent oracle: Christoffel symbols from differenced metric
    components, curvature from differenced Christoffels.
    """
    points = np.atleast_2d(points)
    m = len(lengths)

    def metric(p):
        e2u = np.exp(2.0 * np.real(u.evaluate_points(p)))
        return e2u[:, None, None] * np.eye(m)

    def christoffel(p):
        g = metric(p)
        ginv = np.linalg.inv(g)
        dg = np.zeros((p.shape[0], m, m, m))
        for k in range(m):
            dp = np.zeros(m)
            dp[k] = step
            dg[:, k] = (metric(p + dp) - metric(p - dp)) / (2 * step)
        gamma = 0.5 * (
            np.einsum("pkl,pijl->pkij", ginv, dg)
            + np.einsum("pkl,pjil->pkij", ginv, dg)
            - np.einsum("pkl,plij->pkij", ginv, dg)
        )
        return gamma

    g = metric(points)
    ginv = np.linalg.inv(g)
    gamma = christoffel(points)
    dgamma = np.zeros((points.shape[0], m, m, m, m))
    for k in range(m):
        dp = np.zeros(m)
        dp[k] = step
        dgamma[:, k] = (
            christoffel(points + dp) - christoffel(points - dp)
        ) / (2 * step)
    ricci = (
        np.einsum("pkkij->pij", dgamma)
        - np.einsum("pjkik->pij", dgamma)
        + np.einsum("pkkl,plij->pij", gamma, gamma)
        - np.einsum("pkjl,plik->pij", gamma, gamma)
    )
    return np.einsum("pij,pij->p", ginv, ricci)


def yamabe_first_eigenvalue(model, truncation=8):
    """Lowest eigenvalue and eigenfunction of 4(m-1)/(m-2) Lap + R on the
    truncated spectral basis; catalog curvatures are constant, so the
    operator is diagonal there."""
    m = model.m
    if m < 3:
        raise ValueError("the conformal Laplacian comparison needs m >= 3")
    coef = 4.0 * (m - 1) / (m - 2)
    R = model.scalar_curvature
    if isinstance(model, SphereModel):
        ells = np.arange(truncation + 1)
        vals = coef * ells * (ells + m - 1) / model.radius**2 + R
        best = int(np.argmin(vals))
        return float(vals[best]), best
    best_val, best_mode = None, None
    for idx in np.ndindex(*(2 * truncation + 1,) * m):
        k = np.array(idx) - truncation
        lam = coef * float(
            np.sum((2.0 * np.pi * k / np.array(model.lengths)) ** 2)
        ) + R
        if best_val is None or lam < best_val - 1e-15:
            best_val, best_mode = lam, k
    u1 = FourierScalar.zero(model.lengths)
    band = tuple(max(1, abs(int(k))) for k in best_mode)
    u1 = u1.pad_to(band)
    idx = tuple(b + int(k) for b, k in zip(band, best_mode))
    u1.coeffs[idx] = 1.0
    return float(best_val), u1


def auxiliary_bundle_data(model):
    """Connection phases and potential of an auxiliary-bundle torus."""
    if not isinstance(model, AuxTorusModel):
        raise ValueError("auxiliary data exists for aux-torus models only")
    return model.holonomy.copy(), model.potential
