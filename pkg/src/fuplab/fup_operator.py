"""Discrete Fourier localization operators and their norm curves.

Discretizes the map f -> 1_X * InverseFourier(1_Y * fhat) for a spatial
set X inside [-1,1]^d and a frequency set Y inside [-N,N]^d, on matched
dual grids where the full transform is exactly unitary.  Measures the
operator norm across scales N = M^k, fits the empirical decay exponent,
assembles the diffeomorphism-distorted variant by direct oscillatory
quadrature, and runs the induction-on-scales damping iteration on a
sampled function.

Grid model: physical nodes are the midpoints -1 + (m + 1/2) h with
h = 1/(N * oversample), so the period is exactly 2; frequency nodes sit
on the dual lattice with spacing 1/2 (optionally refined by a frequency
oversampling factor for quadrature-grade kernels).  Masks rasterize set
membership of the node positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .localization import SampledFunction, TorusGrid
from .mollifier import REFERENCE_CONSTANTS, phi_d, phi_hat
from .regular_sets import CantorSpec, GridSet, build_cantor, check_porosity, \
    merged_intervals, scale_shift

__all__ = [
    "DENSE_CAP",
    "DiffeoSpec",
    "FupInstance",
    "FupOperator",
    "NormCurve",
    "NormPoint",
    "IterationReport",
    "assemble_operator",
    "operator_norm",
    "fup_decay_curve",
    "distorted_fup_norm",
    "discrete_subfourier",
    "sample_with_spectrum_in",
    "iterate_damping_demo",
]

#: largest matrix dimension assembled densely for SVD
DENSE_CAP = 8192

_POWER_TOL = 1e-8
_POWER_MAXITER = 10_000


# ---------------------------------------------------------------------------
# diffeomorphism families


@dataclass(frozen=True)
class DiffeoSpec:
    """Closed-form base diffeomorphism on [-1,1]^d with a derivative bound.

    ``d0`` bounds each of sup|DPsi0|, sup|DPsi0^-1|, sup|D^2 Psi0| (operator
    norms for the first two, largest entry for the second derivative), so
    the sum-form derivative inequality holds with 3*d0.  The Jacobian
    determinant must stay >= 1/d0.  Families:

    * ``identity``
    * ``sine_shear``: x + (a/pi) sin(pi x) in 1-D; in 2-D the first
      coordinate is sheared by (a/pi) sin(pi x_2)
    * ``radial_bump`` (2-D): x * (1 + a exp(-2|x|^2))
    """

    kind: str
    dimension: int = 1
    amplitude: float = 0.0
    d0: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("identity", "sine_shear", "radial_bump"):
            raise ValueError(f"unknown diffeomorphism family {self.kind!r}")
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if self.kind == "radial_bump" and self.dimension != 2:
            raise ValueError("radial_bump is a 2-D family")
        if self.d0 < 1.0:
            raise ValueError("d0 must be >= 1")
        self.validate()

    def map(self, pts: np.ndarray) -> np.ndarray:
        """Apply Psi0 to points of shape (n,) in 1-D or (n, 2) in 2-D."""
        pts = np.asarray(pts, dtype=float)
        a = self.amplitude
        if self.kind == "identity":
            return pts.copy()
        if self.kind == "sine_shear":
            if self.dimension == 1:
                return pts + (a / math.pi) * np.sin(math.pi * pts)
            out = pts.copy()
            out[:, 0] += (a / math.pi) * np.sin(math.pi * pts[:, 1])
            return out
        r2 = np.sum(pts * pts, axis=-1, keepdims=True)
        return pts * (1.0 + a * np.exp(-2.0 * r2))

    def jacobian(self, pts: np.ndarray) -> np.ndarray:
        """DPsi0 at each point: shape (n,) in 1-D, (n, 2, 2) in 2-D."""
        pts = np.asarray(pts, dtype=float)
        a = self.amplitude
        if self.dimension == 1:
            if self.kind == "identity":
                return np.ones_like(pts)
            return 1.0 + a * np.cos(math.pi * pts)
        n = pts.shape[0]
        jac = np.zeros((n, 2, 2))
        jac[:, 0, 0] = jac[:, 1, 1] = 1.0
        if self.kind == "sine_shear":
            jac[:, 0, 1] = a * np.cos(math.pi * pts[:, 1])
        elif self.kind == "radial_bump":
            r2 = np.sum(pts * pts, axis=1)
            e = a * np.exp(-2.0 * r2)
            for i in range(2):
                jac[:, i, i] += e
                for j in range(2):
                    jac[:, i, j] -= 4.0 * e * pts[:, i] * pts[:, j]
        return jac

    def second_derivative_sup(self, pts: np.ndarray) -> float:
        """Largest |second derivative entry| over the points (closed form)."""
        pts = np.asarray(pts, dtype=float)
        a = self.amplitude
        if self.kind == "identity":
            return 0.0
        if self.kind == "sine_shear":
            arg = pts if self.dimension == 1 else pts[:, 1]
            return float(np.max(np.abs(a * math.pi * np.sin(math.pi * arg))))
        r2 = np.sum(pts * pts, axis=1)
        e = 4.0 * a * np.exp(-2.0 * r2)
        worst = 0.0
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    term = (pts[:, k] * (i == j) + pts[:, j] * (i == k)
                            + pts[:, i] * (j == k)
                            - 4.0 * pts[:, i] * pts[:, j] * pts[:, k])
                    worst = max(worst, float(np.max(np.abs(e * term))))
        return worst

    def validate(self, lattice_per_axis: int = 201) -> dict:
        """Check the derivative bounds on a test lattice; raise on violation."""
        axis = np.linspace(-1.0, 1.0, lattice_per_axis)
        if self.dimension == 1:
            pts = axis
            jac = self.jacobian(pts)
            det = jac
            norm_d = float(np.max(np.abs(jac)))
            norm_dinv = float(np.max(1.0 / np.abs(jac)))
        else:
            gx, gy = np.meshgrid(axis, axis, indexing="ij")
            pts = np.column_stack([gx.ravel(), gy.ravel()])
            jac = self.jacobian(pts)
            det = np.linalg.det(jac)
            svals = np.linalg.svd(jac, compute_uv=False)
            norm_d = float(np.max(svals[:, 0]))
            norm_dinv = float(np.max(1.0 / svals[:, -1]))
        norm_d2 = self.second_derivative_sup(pts)
        checks = {
            "sup_jacobian": norm_d,
            "sup_inverse_jacobian": norm_dinv,
            "sup_second_derivative": norm_d2,
            "min_determinant": float(np.min(det)),
        }
        worst = max(norm_d, norm_dinv, norm_d2)
        if worst > self.d0 * (1 + 1e-9):
            raise ValueError(
                f"derivative bound violated: sup {worst:.6g} > d0 = {self.d0}"
            )
        if checks["min_determinant"] < 1.0 / self.d0 * (1 - 1e-9):
            raise ValueError("Jacobian determinant drops below 1/d0")
        return checks

    def scaled_map(self, eta: np.ndarray, scale: float) -> np.ndarray:
        """Phi_N(eta) = N * Psi0(eta / N) with N = scale."""
        return scale * self.map(np.asarray(eta, dtype=float) / scale)


# ---------------------------------------------------------------------------
# instances and grids


@dataclass(frozen=True)
class FupInstance:
    """One localization-operator problem: scale, masks, discretization."""

    N: float
    X: GridSet
    Y: GridSet
    oversample: int = 4
    freq_oversample: int = 1
    distortion: DiffeoSpec | None = None

    def __post_init__(self) -> None:
        if self.N < 1.0:
            raise ValueError("N must be >= 1")
        if self.oversample < 2 or self.freq_oversample < 1:
            raise ValueError("need oversample >= 2 and freq_oversample >= 1")
        d = self.X.dimension
        if self.Y.dimension != d:
            raise ValueError("X and Y dimensions differ")
        tol = 1e-9
        for lo, hi in self.X.extent:
            if lo < -1.0 - tol or hi > 1.0 + tol:
                raise ValueError("X must lie inside [-1,1]^d")
        for lo, hi in self.Y.extent:
            if lo < -self.N - tol or hi > self.N + tol:
                raise ValueError("Y must lie inside [-N,N]^d")
        h, dxi = self.spacings()
        if self.X.resolution < 2.0 * h * (1 - 1e-9):
            raise ValueError("physical grid too coarse for X's cube side")
        if self.Y.resolution < 2.0 * dxi * (1 - 1e-9):
            raise ValueError("frequency grid too coarse for Y's cube side")
        if self.distortion is not None and self.distortion.dimension != d:
            raise ValueError("distortion dimension mismatch")

    @property
    def dimension(self) -> int:
        return self.X.dimension

    def nodes_per_axis(self) -> int:
        return 2 * int(math.ceil(self.N)) * self.oversample

    def spacings(self) -> tuple[float, float]:
        """(physical spacing h, frequency spacing) for this discretization."""
        n = self.nodes_per_axis()
        h = 2.0 / n
        return h, 0.5 / self.freq_oversample


def _phys_axis(n: int) -> np.ndarray:
    h = 2.0 / n
    return -1.0 + (np.arange(n) + 0.5) * h


def _freq_axis(n: int, freq_oversample: int) -> np.ndarray:
    m = n * freq_oversample
    dxi = 0.5 / freq_oversample
    return (np.arange(m) - m // 2) * dxi


# ---------------------------------------------------------------------------
# operator descriptor


class FupOperator:
    """Descriptor of the masked Fourier-restriction matrix.

    Acts from frequency coefficients on the Y nodes to values on the X
    nodes; entries sqrt(h*dxi) * exp(2 pi i x . xi).  With unit frequency
    oversampling this is a submatrix of a unitary transform, so the norm
    is at most 1.  ``matvec``/``rmatvec`` use full-grid FFTs; ``dense()``
    materializes the matrix when within the dense cap.
    """

    def __init__(self, instance: FupInstance):
        self.instance = instance
        d = instance.dimension
        n = instance.nodes_per_axis()
        ovf = instance.freq_oversample
        self.n_per_axis = n
        self.h, self.dxi = instance.spacings()
        self.x_axis = _phys_axis(n)
        self.xi_axis = _freq_axis(n, ovf)
        if d == 1:
            self.x_mask = instance.X.contains_points(self.x_axis)
            self.y_mask = instance.Y.contains_points(self.xi_axis)
        else:
            xg = np.stack(np.meshgrid(self.x_axis, self.x_axis, indexing="ij"),
                          axis=-1).reshape(-1, 2)
            fg = np.stack(np.meshgrid(self.xi_axis, self.xi_axis, indexing="ij"),
                          axis=-1).reshape(-1, 2)
            self.x_mask = instance.X.contains_points(xg).reshape(n, n)
            m = self.xi_axis.size
            self.y_mask = instance.Y.contains_points(fg).reshape(m, m)
        self.n_x = int(np.count_nonzero(self.x_mask))
        self.n_y = int(np.count_nonzero(self.y_mask))
        self.shape = (self.n_x, self.n_y)
        self._scale = math.sqrt(self.h * self.dxi) ** d
        self._dense: np.ndarray | None = None

    # -- full-grid transform helpers (unit frequency oversampling only) --

    def _can_fft(self) -> bool:
        return self.instance.freq_oversample == 1

    def _full_forward(self, g: np.ndarray) -> np.ndarray:
        """sqrt(h dxi)^d sum_k g_k exp(2 pi i x_m . xi_k) on the full grid."""
        n = self.n_per_axis
        d = self.instance.dimension
        # x_m = -1 + (m + 1/2) h and xi_k = (k - n/2) dxi give
        # exp(2 pi i x xi) = (-1)^m * c * exp(2 pi i k m / n) phases
        k = np.arange(n)
        pre = np.exp(2j * np.pi * (k - n / 2) * self.dxi * (-1.0 + self.h / 2.0))
        post = (-1.0) ** np.arange(n) * n
        if d == 1:
            return post * np.fft.ifft(g * pre) * self._scale
        out = np.fft.ifft2(g * pre[:, None] * pre[None, :])
        return out * post[:, None] * post[None, :] * self._scale

    def _full_adjoint(self, f: np.ndarray) -> np.ndarray:
        n = self.n_per_axis
        d = self.instance.dimension
        k = np.arange(n)
        pre = np.exp(2j * np.pi * (k - n / 2) * self.dxi * (-1.0 + self.h / 2.0))
        post = (-1.0) ** np.arange(n) * n
        if d == 1:
            return np.conj(pre) * np.fft.fft(f * np.conj(post)) / n * self._scale
        tmp = np.fft.fft2(f * np.conj(post)[:, None] * np.conj(post)[None, :])
        return tmp * np.conj(pre)[:, None] * np.conj(pre)[None, :] / n**d * self._scale

    def matvec(self, v: np.ndarray) -> np.ndarray:
        if not self._can_fft():
            return self.dense() @ v
        g = np.zeros(self.y_mask.shape, dtype=complex)
        g[self.y_mask] = v
        return self._full_forward(g)[self.x_mask]

    def rmatvec(self, w: np.ndarray) -> np.ndarray:
        if not self._can_fft():
            return self.dense().conj().T @ w
        f = np.zeros(self.x_mask.shape, dtype=complex)
        f[self.x_mask] = w
        return self._full_adjoint(f)[self.y_mask]

    def dense(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense
        if max(self.shape) > DENSE_CAP:
            raise ValueError(
                f"matrix dimension {max(self.shape)} above dense cap {DENSE_CAP};"
                " use matrix-free routines"
            )
        d = self.instance.dimension
        if d == 1:
            x = self.x_axis[self.x_mask]
            xi = self.xi_axis[self.y_mask]
            mat = np.exp(2j * np.pi * np.outer(x, xi))
        else:
            xi_idx = np.argwhere(self.x_mask)
            yi_idx = np.argwhere(self.y_mask)
            x_pts = self.x_axis[xi_idx]  # (n_x, 2)
            f_pts = self.xi_axis[yi_idx]
            mat = np.exp(2j * np.pi * (
                np.outer(x_pts[:, 0], f_pts[:, 0])
                + np.outer(x_pts[:, 1], f_pts[:, 1])
            ))
        self._dense = mat * self._scale
        return self._dense


def assemble_operator(instance: FupInstance) -> FupOperator:
    """Operator descriptor for the instance (dense or matrix-free access)."""
    return FupOperator(instance)


def operator_norm(op: FupOperator, method: str = "auto") -> tuple[float, float, int]:
    """(norm, residual, iterations) by dense SVD or seeded power iteration."""
    if op.n_x == 0 or op.n_y == 0:
        return 0.0, 0.0, 0
    if method == "auto":
        method = "svd" if max(op.shape) <= DENSE_CAP else "power"
    if method == "svd":
        s = np.linalg.svd(op.dense(), compute_uv=False)
        return float(s[0]), 0.0, 0
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(op.n_y) + 1j * rng.standard_normal(op.n_y)
    v /= np.linalg.norm(v)
    for it in range(1, _POWER_MAXITER + 1):
        u = op.rmatvec(op.matvec(v))  # A*A v
        lam = float(np.real(np.vdot(v, u)))
        if lam <= 0.0:
            return 0.0, 0.0, it
        # eigen-residual of the Rayleigh pair; for the normal matrix A*A the
        # eigenvalue error is bounded by it, so sqrt(lam) carries half of it
        resid = float(np.linalg.norm(u - lam * v)) / lam
        v = u / float(np.linalg.norm(u))
        if resid <= _POWER_TOL:
            return math.sqrt(lam), resid, it
    return math.sqrt(lam), resid, _POWER_MAXITER


# ---------------------------------------------------------------------------
# norm curves


@dataclass(frozen=True)
class NormPoint:
    k: int
    N: float
    dimension: int
    norm: float
    method: str
    iterations: int
    residual: float


@dataclass(frozen=True)
class NormCurve:
    """Operator norms across scales with a fitted decay exponent.

    beta_hat is the least-squares slope of -log(norm) against log(N);
    the k = 1 point is excluded from the fit (pre-asymptotic) whenever at
    least four points are available.
    """

    points: tuple
    beta_hat: float
    r_squared: float
    residual_max: float
    excluded_k1: bool

    def __post_init__(self) -> None:
        ns = [p.N for p in self.points]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("scales N must be strictly increasing")
        for p in self.points:
            if not 0.0 < p.norm <= 1.0 + 1e-12:
                raise ValueError("norms must lie in (0, 1]")


def _fit_beta(points: Sequence[NormPoint]) -> tuple[float, float, float, bool]:
    if len(points) < 3:
        raise ValueError("need at least 3 points to fit a decay exponent")
    exclude = len(points) >= 4
    fit_pts = [p for p in points if not (exclude and p.k == 1)]
    xs = np.array([math.log(p.N) for p in fit_pts])
    ys = np.array([-math.log(p.norm) for p in fit_pts])
    slope, intercept = np.polyfit(xs, ys, 1)
    pred = slope * xs + intercept
    ss_res = float(np.sum((ys - pred) ** 2))
    ss_tot = float(np.sum((ys - np.mean(ys)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2, float(np.max(np.abs(ys - pred))), exclude


class _RotatedProduct:
    """Membership proxy: xi belongs iff R(-theta) xi lies in Y1 x Y2."""

    def __init__(self, y1: GridSet, y2: GridSet, theta: float):
        self.y1, self.y2, self.theta = y1, y2, theta
        self.dimension = 2
        self.resolution = min(y1.resolution, y2.resolution)
        c, s = math.cos(theta), math.sin(theta)
        lim = max(abs(v) for g in (y1, y2) for pair in g.extent for v in pair)
        lim *= abs(c) + abs(s)
        self.extent = ((-lim, lim), (-lim, lim))

    def contains_points(self, pts: np.ndarray) -> np.ndarray:
        c, s = math.cos(self.theta), math.sin(self.theta)
        u = pts[:, 0] * c + pts[:, 1] * s
        v = -pts[:, 0] * s + pts[:, 1] * c
        return self.y1.contains_points(u) & self.y2.contains_points(v)


def fup_decay_curve(
    spec: CantorSpec,
    k_range: Sequence[int],
    *,
    oversample: int = 4,
    rotate_degrees: float = 0.0,
    method: str = "auto",
) -> NormCurve:
    """Norm curve for the Cantor family of ``spec`` at depths ``k_range``.

    Per k, the scale is N = base^k; X is the depth-k set scaled to
    [-1,1]^d and Y the same pattern scaled to [-N,N]^d (rotated as a
    product membership test when ``rotate_degrees`` is nonzero, 2-D only).
    """
    ks = sorted(int(k) for k in k_range)
    if rotate_degrees and spec.dimension != 2:
        raise ValueError("rotation requires a 2-D family")
    base = spec.base if isinstance(spec.base, int) else spec.base[0]
    points = []
    for k in ks:
        n_scale = float(base**k)
        spec_k = CantorSpec(base=spec.base, alphabet=spec.alphabet, depth=k,
                            dimension=spec.dimension,
                            extent=((0.0, 1.0),) * spec.dimension)
        unit = build_cantor(spec_k)
        X = scale_shift(unit, 2.0, (-1.0,) * spec.dimension)
        Y = scale_shift(unit, 2.0 * n_scale, (-n_scale,) * spec.dimension)
        if rotate_degrees:
            spec_1d = CantorSpec(base=base, alphabet=spec.alphabet, depth=k,
                                 dimension=1, extent=((0.0, 1.0),))
            y1 = scale_shift(build_cantor(spec_1d), 2.0 * n_scale, -n_scale)
            theta = math.radians(rotate_degrees)
            # shrink so the rotated product still fits inside [-N,N]^2
            shrink = 1.0 / (abs(math.cos(theta)) + abs(math.sin(theta)))
            y1 = scale_shift(y1, shrink, 0.0)
            Y = _RotatedProduct(y1, y1, theta)
        instance = FupInstance(N=n_scale, X=X, Y=Y, oversample=oversample)
        op = assemble_operator(instance)
        use = method
        if use == "auto":
            use = "svd" if max(op.shape) <= DENSE_CAP else "power"
        norm, resid, iters = operator_norm(op, use)
        points.append(NormPoint(k=k, N=n_scale, dimension=spec.dimension,
                                norm=norm, method=use, iterations=iters,
                                residual=resid))
    beta, r2, res_max, excl = _fit_beta(points)
    return NormCurve(points=tuple(points), beta_hat=beta, r_squared=r2,
                     residual_max=res_max, excluded_k1=excl)


# ---------------------------------------------------------------------------
# distorted operator


def distorted_fup_norm(instance: FupInstance) -> float:
    """Norm of the distortion-weighted oscillatory kernel (direct quadrature).

    Kernel entries sqrt(h d_eta)^d exp(2 pi i x . Phi_N(eta)) |det DPhi_N(eta)|
    over X rows and Y columns.  Requires the frequency spacing to keep the
    phase variation per cell at the largest |x| below pi/4.  The kernel is
    always evaluated entry by entry (no fast transform); when it fits in
    memory the norm comes from a full SVD, otherwise the Gram matrix on the
    smaller side is accumulated in column blocks and the norm is the square
    root of its top eigenvalue.
    """
    diffeo = instance.distortion
    if diffeo is None:
        raise ValueError("instance has no distortion")
    d = instance.dimension
    op = FupOperator(instance)
    h, deta = op.h, op.dxi
    # phase increment per frequency cell: 2 pi |x|_1 sup|DPhi_N| d_eta
    if 2.0 * math.pi * d * diffeo.d0 * deta > math.pi / 4.0 + 1e-12:
        raise ValueError(
            "frequency grid too coarse for the distorted phase: need"
            f" freq_oversample >= {math.ceil(8 * d * diffeo.d0 * 0.5)}"
        )
    if min(op.shape) > DENSE_CAP:
        raise ValueError("distorted operator is dense-only; instance too large")
    if op.n_x == 0 or op.n_y == 0:
        return 0.0

    if d == 1:
        x_pts = op.x_axis[op.x_mask]
        f_pts = op.xi_axis[op.y_mask]
        phi = diffeo.scaled_map(f_pts, instance.N)
        jac = np.abs(diffeo.jacobian(f_pts / instance.N))
    else:
        x_pts = op.x_axis[np.argwhere(op.x_mask)]
        f_pts = op.xi_axis[np.argwhere(op.y_mask)]
        phi = diffeo.scaled_map(f_pts, instance.N)
        jac = np.abs(np.linalg.det(diffeo.jacobian(f_pts / instance.N)))
    weight = math.sqrt(h * deta) ** d

    def block(j0: int, j1: int) -> np.ndarray:
        if d == 1:
            m = np.exp(2j * np.pi * np.outer(x_pts, phi[j0:j1]))
        else:
            m = np.exp(2j * np.pi * (
                np.outer(x_pts[:, 0], phi[j0:j1, 0])
                + np.outer(x_pts[:, 1], phi[j0:j1, 1])
            ))
        return m * (weight * jac[j0:j1])[None, :]

    if op.n_x * op.n_y <= DENSE_CAP * DENSE_CAP // 4:
        s = np.linalg.svd(block(0, op.n_y), compute_uv=False)
        return float(s[0])
    # tall kernel: norm^2 = top eigenvalue of the row-side Gram matrix
    gram = np.zeros((op.n_x, op.n_x), dtype=complex)
    step = max(1, (DENSE_CAP * DENSE_CAP // 8) // max(op.n_x, 1))
    for j0 in range(0, op.n_y, step):
        b = block(j0, min(j0 + step, op.n_y))
        gram += b @ b.conj().T
    top = float(np.linalg.eigvalsh(gram)[-1])
    return math.sqrt(max(top, 0.0))


# ---------------------------------------------------------------------------
# exact discrete model over Z_{M^k}


def discrete_subfourier(base: int, alphabet: Sequence[int], depth: int) -> np.ndarray:
    """Submatrix of the M^k-point unitary DFT on Cantor digit words.

    Rows and columns are indexed by the integers in Z_{M^k} whose base-M
    digits all lie in the alphabet; entries exp(-2 pi i j l / M^k)/sqrt(M^k).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    words = [0]
    for _ in range(depth):
        words = [w * base + a for w in words for a in alphabet]
    idx = np.array(sorted(words))
    m = base**depth
    return np.exp(-2j * np.pi * np.outer(idx, idx) / m) / math.sqrt(m)


# ---------------------------------------------------------------------------
# induction-on-scales damping iteration


def sample_with_spectrum_in(Y: GridSet, grid: TorusGrid, seed: int) -> SampledFunction:
    """Unit-norm random function whose discrete spectrum is supported in Y."""
    if grid.dimension != Y.dimension:
        raise ValueError("grid and Y dimensions differ")
    freqs = grid.freq_axis()
    if grid.dimension == 1:
        mask = Y.contains_points(freqs)
    else:
        pts = np.stack(np.meshgrid(freqs, freqs, indexing="ij"), axis=-1).reshape(-1, 2)
        mask = Y.contains_points(pts).reshape(freqs.size, freqs.size)
    if not np.any(mask):
        raise ValueError("no grid frequencies inside Y")
    rng = np.random.default_rng(seed)
    coeff = np.zeros(mask.shape, dtype=complex)
    coeff[mask] = rng.standard_normal(int(mask.sum())) \
        + 1j * rng.standard_normal(int(mask.sum()))
    d = grid.dimension
    phase = np.exp(-2j * np.pi * grid.half_period * freqs)
    spec = coeff * (phase if d == 1 else phase[:, None] * phase[None, :])
    samples = np.fft.ifftn(spec) / grid.spacing**d
    norm = math.sqrt(float(np.sum(np.abs(samples) ** 2)) * grid.spacing**d)
    return SampledFunction.from_samples(grid, samples / norm,
                                        band=float(np.max(grid.freq_l1()[mask])))


@dataclass(frozen=True)
class IterationReport:
    """Norms and certificates from the damping iteration demo."""

    norms: tuple  # ||f_m||_{L2([-1,1]^d)} for m = 0..steps
    ratios: tuple
    product_bound: float  # (1 - C_phi / L^(T-1))^steps
    product_margin: float  # min over X nodes of (prod Psi_n - bound)
    mollifier_leakage: float
    porous: bool


def _scale_cubes_meeting(X: GridSet, side: float) -> np.ndarray:
    """Intervals [a, a+side) of the partition of [-1,1] that meet X (1-D)."""
    intervals = merged_intervals(X)
    count = int(round(2.0 / side))
    starts = -1.0 + side * np.arange(count)
    hits = np.zeros(count, dtype=bool)
    for lo, hi in intervals:
        i0 = max(0, int(math.floor((lo + 1.0) / side - 1e-12)))
        i1 = min(count - 1, int(math.ceil((hi + 1.0) / side + 1e-12)) - 1)
        for i in range(i0, i1 + 1):
            if min(hi, starts[i] + side) - max(lo, starts[i]) > 1e-15 * side:
                hits[i] = True
    return starts[hits]


def _psi_multiplier(X: GridSet, grid: TorusGrid, L: int, n: int, T: int,
                    leakage_tol: float) -> tuple[np.ndarray, float]:
    """Psi_n = phi_{n+T} (*) indicator(S*_{n+1}) sampled on the torus grid."""
    side = float(L) ** (-(n + 1))
    scale_box = float(L) ** (n + T)
    if scale_box > grid.nyquist * (1 + 1e-12):
        raise ValueError(
            f"torus grid cannot resolve the scale-{scale_box:g} mollifier"
            " spectrum (leakage box beyond Nyquist); increase points_per_cell"
        )
    starts = _scale_cubes_meeting(X, side)
    pad = side / 10.0
    x = grid.axis()
    ind = np.zeros(x.size)
    for a in starts:
        ind[(x >= a - pad - 1e-15) & (x <= a + side + pad + 1e-15)] = 1.0
    scale = float(L) ** (n + T)
    # signed torus coordinate for the convolution kernel, origin at index 0
    wrap = (x - x[0]) % (2 * grid.half_period)
    wrap[wrap > grid.half_period] -= 2 * grid.half_period
    kernel = scale * phi_d(wrap * scale, 1)
    k_hat = np.fft.fft(kernel) * grid.spacing
    freqs = grid.freq_axis()
    outside = np.abs(freqs) > float(L) ** (n + T) + 1e-9
    total = float(np.sum(np.abs(k_hat) ** 2))
    leak = float(np.sum(np.abs(k_hat[outside]) ** 2)) / total if total else 0.0
    if leak > leakage_tol:
        raise ValueError(
            f"mollifier spectral leakage {leak:.3e} beyond the scale box"
            f" exceeds {leakage_tol:.1e}; refine the grid"
        )
    psi = np.real(np.fft.ifft(np.fft.fft(ind) * k_hat))
    return np.clip(psi, 0.0, None), leak


def iterate_damping_demo(
    f: SampledFunction,
    X: GridSet,
    T: int,
    steps: int,
    *,
    L: int = 3,
    leakage_tol: float = 1e-9,
) -> IterationReport:
    """Run f_{m+1} = Psi_{mT} f_m and report window norms and certificates.

    Psi_n is the mollified indicator of the 1/10-thickened union of
    scale-(n+1) cubes meeting X.  The report carries the per-step norms
    over [-1,1]^d, their ratios, and the pointwise product certificate
    prod_{n<steps} Psi_n >= (1 - C_phi/L^(T-1))^steps on X (the mollifier
    tail constant C_phi is the reference value for the dimension).
    """
    if X.dimension != 1 or f.grid.dimension != 1:
        raise NotImplementedError("the iteration demo is one-dimensional")
    if T < 1 or steps < 1:
        raise ValueError("T and steps must be positive integers")
    depths = list(range(0, steps * T))
    porosity = check_porosity(X, L, depths)
    if not porosity.porous():
        raise ValueError(f"X is not porous at scale {L} for depths {depths}")

    grid = f.grid
    x = grid.axis()
    window = np.abs(x) <= 1.0 + 1e-12
    cur = f.samples.copy()
    norms = [math.sqrt(float(np.sum(np.abs(cur[window]) ** 2)) * grid.spacing)]
    leak_max = 0.0
    for m in range(steps):
        psi, leak = _psi_multiplier(X, grid, L, m * T, T, leakage_tol)
        leak_max = max(leak_max, leak)
        cur = psi * cur
        norms.append(math.sqrt(float(np.sum(np.abs(cur[window]) ** 2)) * grid.spacing))
    ratios = tuple(
        norms[i + 1] / norms[i] if norms[i] > 0 else 0.0 for i in range(steps)
    )

    c_phi = REFERENCE_CONSTANTS["C_phi"][1]
    bound = (1.0 - c_phi / float(L) ** (T - 1)) ** steps
    product = np.ones(x.size)
    for n in range(steps):
        psi, leak = _psi_multiplier(X, grid, L, n, T, leakage_tol)
        leak_max = max(leak_max, leak)
        product *= psi
    on_x = X.contains_points(x)
    margin = float(np.min(product[on_x] - bound)) if np.any(on_x) else math.inf
    return IterationReport(
        norms=tuple(norms),
        ratios=ratios,
        product_bound=bound,
        product_margin=margin,
        mollifier_leakage=leak_max,
        porous=True,
    )
