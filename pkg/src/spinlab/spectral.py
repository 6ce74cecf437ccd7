"""Band-limited Fourier data on rectangular tori.

Scalar functions live on integer frequency lattices; spinor coefficient
fields live on lattices shifted by the spin-structure offsets (0 or 1/2 per
axis).  Pointwise products are formed on oversampled uniform grids, which is
exact for band-limited inputs whenever the grid resolves the combined
bandwidth, so the only truncation happens where a genuinely non-polynomial
function (an exponential weight, a Rayleigh quotient) is projected back.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = ["FourierScalar", "FourierSpinorField", "uniform_grid"]


def uniform_grid(lengths, n):
    """Per-axis sample points 0, L/n, ..., L(n-1)/n."""
    return [np.arange(n) * (L / n) for L in lengths]


def _phase_matrix(points, kvals, length):
    # rows: sample points, columns: modes exp(2*pi*i*k*x/L)
    return np.exp(2j * np.pi * np.outer(points, kvals) / length)


def _eval_tensor(coeffs, mats):
    """Contract coefficient axes 0..m-1 with per-axis evaluation matrices."""
    out = coeffs
    m = len(mats)
    # after step ax the original axis ax sits at position ax (behind the
    # accumulated point axes), so contract there; point axes pile up in front
    for ax in range(m):
        out = np.tensordot(mats[ax], out, axes=(1, ax))
    extra = out.ndim - m
    perm = list(range(m - 1, -1, -1)) + list(range(m, m + extra))
    return np.transpose(out, perm)


class FourierScalar:
    """Trigonometric polynomial on a torus with side lengths ``lengths``.

    Coefficient array axes run over modes -J..J per direction (odd sizes).
    """

    def __init__(self, coeffs, lengths):
        coeffs = np.asarray(coeffs, dtype=complex)
        lengths = tuple(float(L) for L in lengths)
        if coeffs.ndim != len(lengths):
            raise ValueError("coefficient rank does not match number of axes")
        for size in coeffs.shape:
            if size % 2 != 1:
                raise ValueError("scalar mode axes must have odd length")
        self.coeffs = coeffs
        self.lengths = lengths

    # -- constructors -------------------------------------------------

    @classmethod
    def constant(cls, value, lengths):
        shape = (1,) * len(lengths)
        return cls(np.full(shape, value, dtype=complex), lengths)

    @classmethod
    def zero(cls, lengths):
        return cls.constant(0.0, lengths)

    @classmethod
    def cosine(cls, amplitude, axis, lengths, harmonic=1):
        """amplitude * cos(2*pi*harmonic*theta_axis / L_axis)."""
        m = len(lengths)
        band = [0] * m
        band[axis] = harmonic
        shape = tuple(2 * b + 1 for b in band)
        coeffs = np.zeros(shape, dtype=complex)
        lo = [b for b in band]
        idx_plus = list(lo)
        idx_minus = list(lo)
        idx_plus[axis] += harmonic
        idx_minus[axis] -= harmonic
        coeffs[tuple(idx_plus)] = amplitude / 2.0
        coeffs[tuple(idx_minus)] = amplitude / 2.0
        return cls(coeffs, lengths)

    @classmethod
    def from_grid(cls, values, lengths, band):
        """Project grid samples onto the band-``band`` lattice (exact if the
        data is band-limited and every grid axis has > 2*band points)."""
        values = np.asarray(values, dtype=complex)
        m = len(lengths)
        band = (band,) * m if np.isscalar(band) else tuple(band)
        mats = []
        for ax in range(m):
            n = values.shape[ax]
            if n < 2 * band[ax] + 1:
                raise ValueError("grid too coarse for requested band")
            pts = np.arange(n) * (lengths[ax] / n)
            modes = np.arange(-band[ax], band[ax] + 1)
            mats.append(_phase_matrix(pts, modes, lengths[ax]).conj().T / n)
        return cls(_eval_tensor(values, mats), lengths)

    # -- structure -----------------------------------------------------

    @property
    def ndim(self):
        return len(self.lengths)

    @property
    def band(self):
        return tuple((s - 1) // 2 for s in self.coeffs.shape)

    def modes(self, axis):
        b = self.band[axis]
        return np.arange(-b, b + 1)

    def is_real(self, tol=1e-12):
        flipped = self.coeffs
        for ax in range(self.ndim):
            flipped = np.flip(flipped, axis=ax)
        return float(np.max(np.abs(flipped.conj() - self.coeffs))) <= tol

    def pad_to(self, band):
        band = (band,) * self.ndim if np.isscalar(band) else tuple(band)
        out = np.zeros(tuple(2 * b + 1 for b in band), dtype=complex)
        slices = tuple(
            slice(b - ob, b + ob + 1) for b, ob in zip(band, self.band)
        )
        out[slices] = self.coeffs
        return FourierScalar(out, self.lengths)

    # -- calculus ------------------------------------------------------

    def derivative(self, axis):
        factor_shape = [1] * self.ndim
        factor_shape[axis] = self.coeffs.shape[axis]
        factor = (2j * np.pi / self.lengths[axis]) * self.modes(axis)
        return FourierScalar(
            self.coeffs * factor.reshape(factor_shape), self.lengths
        )

    def neg_laplacian(self):
        """Geometer's Laplacian -sum d^2/dtheta^2 (nonnegative spectrum)."""
        out = FourierScalar(np.zeros_like(self.coeffs), self.lengths)
        for ax in range(self.ndim):
            out = out + (-1.0) * self.derivative(ax).derivative(ax)
        return out

    # -- evaluation ----------------------------------------------------

    def evaluate_axes(self, axes_points):
        mats = [
            _phase_matrix(axes_points[ax], self.modes(ax), self.lengths[ax])
            for ax in range(self.ndim)
        ]
        return _eval_tensor(self.coeffs, mats)

    def on_grid(self, n):
        return self.evaluate_axes(uniform_grid(self.lengths, n))

    def evaluate_points(self, points):
        """Evaluate at an (P, m) array of points."""
        points = np.atleast_2d(points)
        out = np.zeros(points.shape[0], dtype=complex)
        it = np.nditer(self.coeffs, flags=["multi_index"])
        for c in it:
            if c == 0:
                continue
            k = np.array(
                [
                    it.multi_index[ax] - self.band[ax]
                    for ax in range(self.ndim)
                ]
            )
            phase = np.exp(
                2j * np.pi * points @ (k / np.array(self.lengths))
            )
            out += complex(c) * phase
        return out

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        if np.isscalar(other):
            other = FourierScalar.constant(other, self.lengths)
        band = tuple(max(a, b) for a, b in zip(self.band, other.band))
        return FourierScalar(
            self.pad_to(band).coeffs + other.pad_to(band).coeffs, self.lengths
        )

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, other):
        if np.isscalar(other):
            return FourierScalar(self.coeffs * other, self.lengths)
        band = tuple(a + b for a, b in zip(self.band, other.band))
        n = 2 * max(band) + 1
        prod = self.on_grid(n) * other.on_grid(n)
        return FourierScalar.from_grid(prod, self.lengths, band)

    __rmul__ = __mul__

    def exp(self, scale=1.0, tol=1e-13, max_band=96):
        """Band-limited projection of exp(scale*u); raises when the requested
        tolerance needs more modes than ``max_band``."""
        band = max(4, 2 * max(self.band) + 2)
        while True:
            n = 2 * band + 1
            g = FourierScalar.from_grid(
                np.exp(scale * self.on_grid(n).real), self.lengths, band
            )
            edge = 0.0
            for ax in range(g.ndim):
                edge = max(
                    edge,
                    float(np.max(np.abs(np.take(g.coeffs, 0, axis=ax)))),
                    float(np.max(np.abs(np.take(g.coeffs, -1, axis=ax)))),
                )
            if edge <= tol * max(1.0, float(np.max(np.abs(g.coeffs)))):
                return g
            if band >= max_band:
                raise ValueError(
                    "padding insufficient: exp() tail above tolerance at band"
                    f" {band}"
                )
            band *= 2


class FourierSpinorField:
    """Spinor-valued trigonometric polynomial with spin-structure shifts.

    Mode values along axis j are k = index - K + delta_j with |k| <= K, so an
    axis holds 2K+1 modes for periodic (delta 0) and 2K for antiperiodic
    (delta 1/2) boundary conditions.  The trailing coefficient axis is the
    fiber.
    """

    def __init__(self, coeffs, lengths, delta, kmax):
        coeffs = np.asarray(coeffs, dtype=complex)
        lengths = tuple(float(L) for L in lengths)
        delta = tuple(float(d) for d in delta)
        m = len(lengths)
        if coeffs.ndim != m + 1:
            raise ValueError("expected one mode axis per direction plus fiber")
        if len(delta) != m:
            raise ValueError("delta length mismatch")
        for d in delta:
            if d not in (0.0, 0.5):
                raise ValueError("spin shifts must be 0 or 1/2")
        if kmax < 1:
            raise ValueError("truncation must be >= 1")
        for ax in range(m):
            want = 2 * kmax + 1 if delta[ax] == 0.0 else 2 * kmax
            if coeffs.shape[ax] != want:
                raise ValueError(
                    f"axis {ax}: expected {want} modes, got {coeffs.shape[ax]}"
                )
        self.coeffs = coeffs
        self.lengths = lengths
        self.delta = delta
        self.kmax = int(kmax)

    # -- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, lengths, delta, kmax, fiber_dim):
        m = len(lengths)
        shape = tuple(
            2 * kmax + 1 if delta[ax] == 0.0 else 2 * kmax for ax in range(m)
        ) + (fiber_dim,)
        return cls(np.zeros(shape, dtype=complex), lengths, delta, kmax)

    @classmethod
    def single_mode(cls, mode, coeff, lengths, delta, kmax):
        field = cls.zero(lengths, delta, kmax, len(coeff))
        idx = field.mode_index(mode)
        field.coeffs[idx] = np.asarray(coeff, dtype=complex)
        return field

    # -- structure ---------------------------------------------------------

    @property
    def m(self):
        return len(self.lengths)

    @property
    def fiber_dim(self):
        return self.coeffs.shape[-1]

    @property
    def volume(self):
        return float(np.prod(self.lengths))

    def mode_values(self, axis):
        n = self.coeffs.shape[axis]
        return np.arange(n) - self.kmax + self.delta[axis]

    def mode_index(self, mode):
        idx = []
        for ax, k in enumerate(mode):
            pos = k + self.kmax - self.delta[ax]
            ipos = int(round(pos))
            if abs(pos - ipos) > 1e-9 or not (
                0 <= ipos < self.coeffs.shape[ax]
            ):
                raise KeyError(f"mode {mode} not on the retained lattice")
            idx.append(ipos)
        return tuple(idx)

    def freqs(self, axis):
        return 2.0 * np.pi * self.mode_values(axis) / self.lengths[axis]

    def nonzero_modes(self, tol=0.0):
        mags = np.linalg.norm(self.coeffs, axis=-1)
        out = []
        for idx in np.argwhere(mags > tol):
            mode = tuple(
                idx[ax] - self.kmax + self.delta[ax] for ax in range(self.m)
            )
            out.append(mode)
        return out

    def is_single_mode(self):
        mags = np.linalg.norm(self.coeffs, axis=-1)
        return int(np.count_nonzero(mags > 0.0)) == 1

    # -- norms --------------------------------------------------------------

    def l2_norm_sq(self):
        """Parseval: integral of |psi|^2 over the torus."""
        return self.volume * float(np.sum(np.abs(self.coeffs) ** 2))

    def inner(self, other):
        a, b = _common_band(self, other)
        return self.volume * complex(np.vdot(a.coeffs, b.coeffs))

    # -- linear maps -------------------------------------------------------

    def deriv(self, axis):
        shape = [1] * (self.m + 1)
        shape[axis] = self.coeffs.shape[axis]
        factor = 1j * self.freqs(axis)
        return FourierSpinorField(
            self.coeffs * factor.reshape(shape),
            self.lengths,
            self.delta,
            self.kmax,
        )

    def fiber_map(self, matrix):
        return FourierSpinorField(
            np.einsum("gf,...f->...g", matrix, self.coeffs),
            self.lengths,
            self.delta,
            self.kmax,
        )

    def pad_to(self, kmax):
        if kmax < self.kmax:
            raise ValueError("cannot shrink the retained band")
        out = FourierSpinorField.zero(
            self.lengths, self.delta, kmax, self.fiber_dim
        )
        slices = []
        for ax in range(self.m):
            lo = kmax - self.kmax
            slices.append(slice(lo, lo + self.coeffs.shape[ax]))
        out.coeffs[tuple(slices) + (slice(None),)] = self.coeffs
        return out

    def __add__(self, other):
        a, b = _common_band(self, other)
        return FourierSpinorField(
            a.coeffs + b.coeffs, a.lengths, a.delta, a.kmax
        )

    def __sub__(self, other):
        a, b = _common_band(self, other)
        return FourierSpinorField(
            a.coeffs - b.coeffs, a.lengths, a.delta, a.kmax
        )

    def __mul__(self, scalar):
        return FourierSpinorField(
            self.coeffs * scalar, self.lengths, self.delta, self.kmax
        )

    __rmul__ = __mul__

    # -- evaluation ----------------------------------------------------------

    def _phase_mats(self, axes_points):
        return [
            _phase_matrix(
                axes_points[ax], self.mode_values(ax), self.lengths[ax]
            )
            for ax in range(self.m)
        ]

    def evaluate_axes(self, axes_points):
        return _eval_tensor(self.coeffs, self._phase_mats(axes_points))

    def on_grid(self, n):
        return self.evaluate_axes(uniform_grid(self.lengths, n))

    def evaluate_points(self, points):
        points = np.atleast_2d(points)
        out = np.zeros((points.shape[0], self.fiber_dim), dtype=complex)
        mags = np.linalg.norm(self.coeffs, axis=-1)
        for idx in np.argwhere(mags > 0.0):
            tidx = tuple(int(i) for i in idx)
            k = np.array(
                [
                    self.mode_values(ax)[tidx[ax]]
                    for ax in range(self.m)
                ]
            )
            phase = np.exp(
                2j * np.pi * points @ (k / np.array(self.lengths))
            )
            out += np.outer(phase, self.coeffs[tidx])
        return out

    @classmethod
    def from_grid(cls, values, lengths, delta, kmax):
        values = np.asarray(values, dtype=complex)
        m = len(lengths)
        mats = []
        for ax in range(m):
            n = values.shape[ax]
            nmodes = 2 * kmax + 1 if delta[ax] == 0.0 else 2 * kmax
            if n < nmodes:
                raise ValueError("grid too coarse for requested truncation")
            pts = np.arange(n) * (lengths[ax] / n)
            kv = np.arange(nmodes) - kmax + delta[ax]
            mats.append(_phase_matrix(pts, kv, lengths[ax]).conj().T / n)
        return cls(_eval_tensor(values, mats), lengths, delta, kmax)

    def times_scalar(self, scalar: FourierScalar):
        """Pointwise product with a band-limited scalar; the band grows by
        the scalar's band (exact, no truncation)."""
        kout = self.kmax + max(scalar.band) if scalar.band else self.kmax
        n = 2 * kout + 3
        vals = self.on_grid(n) * scalar.on_grid(n)[..., None]
        return FourierSpinorField.from_grid(
            vals, self.lengths, self.delta, kout
        )


def _common_band(a: FourierSpinorField, b: FourierSpinorField):
    if a.lengths != b.lengths or a.delta != b.delta:
        raise ValueError("fields live on different tori")
    k = max(a.kmax, b.kmax)
    return a.pad_to(k), b.pad_to(k)
