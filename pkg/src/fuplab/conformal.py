"""Conformal map from the unit disk onto a thin rectangle, via elliptic integrals.

The map is the composition ``Phi_q = F_q o phi`` where ``phi(w) = i(1+w)/(1-w)``
sends the disk to the upper half-plane and ``F_q(z) = -(i/H(k)) * arcsn(z, k)``
sends the half-plane to the rectangle ``[0,1] x [-q,q]`` once the elliptic
modulus ``k`` is tuned so that the period ratio ``L(k)/H(k)`` equals the target
half-height ``q``.  The module also extracts, by numerical inversion, the
boundary quantities governing the map's small-q behaviour:

* ``theta``: boundary-arc half-angle around ``w = 1`` whose image is the right
  edge of the rectangle, with prediction ``8 exp(-pi/(2q))``;
* ``delta_1, delta_2``: gaps ``1 - a_j`` where the real points ``a_1 < a_2``
  map to 1/4 and 3/4, with predictions ``4 exp(-pi/(8q))`` and
  ``4 exp(-3 pi/(8q))``.

Branch convention: ``arcsn`` integrates from 0 along paths kept in the closed
upper half-plane; values on the real cuts ``[1, 1/k]`` and ``[-1/k, -1]`` are
the limits from above (the exact limit of paths lifted into Im > 0).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConformalRectangleMap",
    "AsymptoticsReport",
    "elliptic_L",
    "elliptic_H",
    "solve_k_for_q",
    "arcsn",
    "phi_moebius",
    "asymptotics_report",
]


# ---------------------------------------------------------------------------
# complete elliptic integrals via the arithmetic-geometric mean
# ---------------------------------------------------------------------------

def _agm(a: float, b: float) -> float:
    for _ in range(64):
        if abs(a - b) <= 1e-17 * abs(a):
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def elliptic_L(k: float) -> float:
    """Complete integral of 1/sqrt((1-t^2)(1-k^2 t^2)) over [0, 1]."""
    if not 0.0 <= k < 1.0:
        raise ValueError("modulus k must lie in [0, 1)")
    return math.pi / (2.0 * _agm(1.0, math.sqrt((1.0 - k) * (1.0 + k))))


def elliptic_H(k: float) -> float:
    """Complete integral of 1/sqrt((1+s^2)(1+k^2 s^2)) over [0, infinity)."""
    if not 0.0 < k < 1.0:
        raise ValueError("modulus k must lie in (0, 1)")
    return math.pi / (2.0 * _agm(1.0, k))


def solve_k_for_q(q: float, rel_tol: float = 1e-10, max_iter: int = 200) -> float:
    """Modulus k with L(k)/H(k) = q, by bisection in log k.

    Seeded at the small-q prediction ``4 exp(-pi/(2q))``; the objective is
    strictly increasing in k, so a sign-changing bracket is expanded from the
    seed and then bisected.
    """
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")

    def ratio(log_k: float) -> float:
        k = math.exp(log_k)
        return elliptic_L(k) / elliptic_H(k)

    seed = math.log(4.0) - math.pi / (2.0 * q)
    if seed < math.log(1e-300):
        raise ValueError("q too small: modulus underflows double precision")
    lo = min(seed - 2.0, math.log(1e-300) + 1.0)
    hi = min(seed + 2.0, math.log(1.0 - 1e-12))
    for _ in range(200):
        if ratio(lo) < q:
            break
        lo -= 2.0
    for _ in range(200):
        if ratio(hi) > q:
            break
        hi = 0.5 * (hi + math.log(1.0 - 1e-15))
    k = math.exp(0.5 * (lo + hi))
    for it in range(max_iter):
        mid = 0.5 * (lo + hi)
        k = math.exp(mid)
        r = elliptic_L(k) / elliptic_H(k)
        if abs(r - q) <= rel_tol * q:
            return k
        if r < q:
            lo = mid
        else:
            hi = mid
    raise RuntimeError(f"solve_k_for_q: no convergence in {max_iter} iterations")


# ---------------------------------------------------------------------------
# arcsn: path integral of 1/sqrt((1-t^2)(1-k^2 t^2)) in the upper half-plane
# ---------------------------------------------------------------------------

_GL_LO = np.polynomial.legendre.leggauss(15)
_GL_HI = np.polynomial.legendre.leggauss(31)


def _axis_sqrt_dec(v: np.ndarray) -> np.ndarray:
    """sqrt of real (1 - a t)-type factors, as the limit from Im t > 0."""
    neg = v < 0
    out = np.sqrt(np.abs(v)).astype(complex)
    out[neg] *= -1j
    return out


def _axis_sqrt_inc(v: np.ndarray) -> np.ndarray:
    """sqrt of real (1 + a t)-type factors, as the limit from Im t > 0."""
    neg = v < 0
    out = np.sqrt(np.abs(v)).astype(complex)
    out[neg] *= 1j
    return out


def _sqrt_g(t: np.ndarray, k: float) -> np.ndarray:
    """sqrt((1-t^2)(1-k^2 t^2)), analytic on Im t > 0, equal to 1 at t = 0,
    continued to the real axis as the limit from above."""
    t = np.asarray(t, dtype=complex)
    out = np.empty(t.shape, dtype=complex)
    on_axis = t.imag == 0.0
    ti = t[~on_axis]
    out[~on_axis] = (np.sqrt(1 - ti) * np.sqrt(1 + ti)
                     * np.sqrt(1 - k * ti) * np.sqrt(1 + k * ti))
    x = t[on_axis].real
    out[on_axis] = (_axis_sqrt_dec(1 - x) * _axis_sqrt_inc(1 + x)
                    * _axis_sqrt_dec(1 - k * x) * _axis_sqrt_inc(1 + k * x))
    return out


def _adaptive_01(f, tol: float, max_depth: int = 40,
                 max_intervals: int = 200_000) -> complex:
    """Adaptive Gauss-Legendre integral of a vectorized f over [0, 1].

    Accepts a subinterval when the 31- vs 15-point difference is below the
    proportional share of ``tol`` or below a noise floor of the local
    quadrature magnitude.  The floor (3e-12 relative) reflects that path
    nodes near branch points carry cancellation noise well above machine
    epsilon; splitting below it only chases that noise.
    """
    xs_lo, ws_lo = _GL_LO
    xs_hi, ws_hi = _GL_HI
    total = 0.0 + 0.0j
    used = 0
    stack = [(0.0, 1.0, 0)]
    while stack:
        a, b, depth = stack.pop()
        used += 1
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        fv_hi = f(mid + half * xs_hi)
        v_lo = np.sum(ws_lo * f(mid + half * xs_lo)) * half
        v_hi = np.sum(ws_hi * fv_hi) * half
        err = abs(v_hi - v_lo)
        floor = 3e-12 * float(np.sum(ws_hi * np.abs(fv_hi))) * half
        if (err <= tol * (b - a) or err <= floor
                or depth >= max_depth or used >= max_intervals):
            total += v_hi
        else:
            stack.append((a, mid, depth + 1))
            stack.append((mid, b, depth + 1))
    return complex(total)


def _leg(k: float, za: complex, zb: complex, tol: float,
         sqrt_end: bool = False) -> complex:
    """Integral of 1/sqrt_g along the straight segment za -> zb.

    The four linear factors of g are evaluated as (base + slope * s) with the
    base fixed at one endpoint, so nodes near a branch point carry no
    subtractive cancellation; the principal square roots of the factors give
    the upper-half-plane branch (each factor's imaginary part keeps one sign
    along legs in the closed upper half-plane).

    With ``sqrt_end`` the substitution t = zb + (za - zb)(1-u)^2 absorbs an
    inverse-square-root singularity at (or near) the endpoint zb.
    """
    if za == zb:
        return 0.0 + 0.0j
    delta = zb - za

    def sqrt_factors(s: np.ndarray, anchor: complex, step: complex) -> np.ndarray:
        # sqrt of (1-t)(1+t)(1-kt)(1+kt) at t = anchor + step * s.  Each
        # linear factor is re-anchored at its closest approach to zero so
        # nodes near a root carry no subtractive cancellation noise.
        out = np.ones(s.shape, dtype=complex)
        for sign in (1.0, -1.0):
            for a in (1.0, k):
                base = 1.0 + sign * a * anchor
                slp = sign * a * step
                mag2 = slp.real * slp.real + slp.imag * slp.imag
                s_star = -(base.real * slp.real + base.imag * slp.imag) / mag2
                s_star = min(max(s_star, 0.0), 1.0)
                fac0 = base + slp * s_star
                fac = fac0 + slp * (s - s_star)
                # keep the upper-limit branch when rounding flips Im to -0.0
                neg = (fac.imag == 0.0) & (fac.real < 0.0)
                root = np.sqrt(fac)
                if np.any(neg):
                    root[neg] = (1j if sign > 0 else -1j) * np.sqrt(-fac[neg].real)
                out = out * root
        return out

    if sqrt_end:
        def f(u):
            w = (1.0 - u) ** 2
            return (2.0 * delta * (1.0 - u)) / sqrt_factors(w, zb, za - zb)
    else:
        def f(u):
            return delta / sqrt_factors(u, za, delta)
    # f carries the Jacobian, so tol is already an absolute budget for the leg
    return _adaptive_01(f, tol)


_BRANCH_TOL = 1e-12


def arcsn(z: complex, k: float, *, endpoint_limit: bool = True,
          tol: float = 1e-12) -> complex:
    """Integral of 1/sqrt((1-t^2)(1-k^2 t^2)) from 0 to z, upper-half-plane branch.

    Paths are deformed through Im t > 0; values on the real segments
    [1, 1/k] and [-1/k, -1] are limits from above.  ``endpoint_limit=False``
    rejects z on those closed segments instead.
    """
    if not 0.0 < k < 1.0:
        raise ValueError("modulus k must lie in (0, 1)")
    z = complex(z)
    if z.imag < -1e-9:
        raise ValueError("arcsn requires Im z >= 0")
    if z.imag < 0.0:
        z = complex(z.real, 0.0)
    if z == 0:
        return 0.0 + 0.0j

    bp = 1.0 / k
    on_axis = z.imag == 0.0
    x = z.real
    if on_axis and 1.0 <= abs(x) <= bp:
        if not endpoint_limit:
            raise ValueError("z lies on a branch segment; "
                             "enable endpoint_limit to take the limit from above")

    if on_axis and abs(x) <= 1.0:
        # real fast path: t = x sin(u); the identities
        # 1 - x^2 sin^2 u = cos^2 u + (1-x^2) sin^2 u (and likewise with kx)
        # keep the integrand cancellation-free up to the endpoints +-1
        off_x = (1.0 - x) * (1.0 + x)
        off_kx = (1.0 - k * x) * (1.0 + k * x)

        def f(u):
            su = np.sin(u)
            cu = np.cos(u)
            c2, s2 = cu * cu, su * su
            return (x * cu) / np.sqrt((c2 + off_x * s2) * (c2 + off_kx * s2))

        val = _adaptive_01(lambda u: f(u * (math.pi / 2)) * (math.pi / 2), tol)
        return complex(val.real, 0.0)

    if x == 0.0:
        # vertical fast path on a log grid: u = e^w - 1 spreads the decades
        # 1 << u << 1/k evenly and involves no cancelling trig forms
        wmax = math.log1p(z.imag)

        def f(w):
            u = np.expm1(w)
            ku = k * u
            return np.exp(w) / np.sqrt((1.0 + u * u) * (1.0 + ku * ku))

        val = _adaptive_01(lambda u: f(u * wmax) * wmax, tol)
        return complex(0.0, val.real)

    # general rectangular path: 0 -> ic -> Re z + ic -> z
    c = max(1.0, z.imag)
    # endpoint near a branch point: the square-root substitution on the final
    # descent clusters nodes quadratically and absorbs the near-singularity
    dist_bp = min(abs(z - s * b) for s in (1.0, -1.0) for b in (1.0, bp))
    near_branch = dist_bp < 1e-3 * max(1.0, min(abs(z.real), bp))
    total = _leg(k, 0.0 + 0.0j, 1j * c, tol / 3)
    total += _leg(k, 1j * c, complex(x, c), tol / 3)
    total += _leg(k, complex(x, c), z, tol / 3, sqrt_end=near_branch)
    return total


def phi_moebius(w: complex) -> complex:
    """Disk-to-half-plane Moebius map i(1+w)/(1-w)."""
    w = complex(w)
    if w == 1.0:
        return complex(math.inf, math.inf)
    return 1j * (1.0 + w) / (1.0 - w)


# ---------------------------------------------------------------------------
# the rectangle map
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConformalRectangleMap:
    """Conformal bijection of the closed unit disk onto [0,1] x [-q, q].

    Normalization: -1 -> 0, +1 -> 1, +-i -> +-iq.
    """

    q: float
    k: float
    L_k: float
    H_k: float

    @classmethod
    def from_q(cls, q: float, rel_tol: float = 1e-10) -> "ConformalRectangleMap":
        k = solve_k_for_q(q, rel_tol=rel_tol)
        return cls(q=q, k=k, L_k=elliptic_L(k), H_k=elliptic_H(k))

    # -- half-plane leg -----------------------------------------------------
    def F(self, z: complex, tol: float = 1e-12) -> complex:
        """Half-plane-to-rectangle leg: -(i/H) arcsn(z, k)."""
        return -1j / self.H_k * arcsn(z, self.k, tol=tol)

    # -- full map -----------------------------------------------------------
    def phi_q(self, w: complex, tol: float = 1e-12) -> complex:
        """Image of a point of the closed unit disk in the rectangle."""
        w = complex(w)
        r = abs(w)
        if r > 1.0 + 1e-12:
            raise ValueError("phi_q requires |w| <= 1")
        if r > 1.0:
            w /= r
        if abs(w - 1.0) < 1e-14:
            return 1.0 + 0.0j
        z = phi_moebius(w)
        if z.imag < 0.0:  # rounding on the boundary circle
            z = complex(z.real, 0.0)
        return self.F(z, tol=tol)

    def derivative(self, w: complex) -> complex:
        """Closed-form derivative of phi_q (chain rule through the integrand)."""
        w = complex(w)
        if abs(w - 1.0) < 1e-14:
            raise ValueError("derivative is singular at w = 1")
        z = phi_moebius(w)
        if z.imag < 0.0:
            z = complex(z.real, 0.0)
        dphi = 2j / (1.0 - w) ** 2
        g = complex(_sqrt_g(np.array([z]), self.k)[0])
        return -1j / self.H_k / g * dphi

    def corners(self) -> tuple:
        q = self.q
        return (1j * q, -1j * q, 1.0 + 1j * q, 1.0 - 1j * q)

    def in_rectangle(self, v: complex, tol: float = 1e-8) -> bool:
        return (-tol <= v.real <= 1.0 + tol) and (abs(v.imag) <= self.q + tol)

    def boundary_distance(self, v: complex) -> float:
        """Distance from v to the rectangle boundary (negative never occurs
        for points produced by phi_q within tolerance)."""
        dx = min(abs(v.real), abs(1.0 - v.real))
        dy = abs(self.q - abs(v.imag))
        inside_x = 0.0 <= v.real <= 1.0
        inside_y = abs(v.imag) <= self.q
        if inside_x and inside_y:
            return min(dx, dy)
        ox = 0.0 if inside_x else min(abs(v.real), abs(v.real - 1.0))
        oy = 0.0 if inside_y else abs(v.imag) - self.q
        return math.hypot(ox, oy)


# ---------------------------------------------------------------------------
# asymptotics extraction
# ---------------------------------------------------------------------------

def _imag_axis_integral(m: ConformalRectangleMap, s: float) -> float:
    """G(s) = integral of 1/sqrt((1+u^2)(1+k^2 u^2)) over [0, s]."""
    return arcsn(1j * s, m.k).imag


def _invert_real_axis(m: ConformalRectangleMap, target: float) -> float:
    """Find s > 0 with G(s)/H = target, by bisection in log s."""
    goal = target * m.H_k
    lo, hi = math.log(1e-12), math.log(1e15)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _imag_axis_integral(m, math.exp(mid)) < goal:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    return math.exp(0.5 * (lo + hi))


def _invert_boundary_angle(m: ConformalRectangleMap) -> float:
    """Angle alpha > 0 where Phi(e^{i alpha}) leaves the right edge Re = 1."""
    tau = 1e-8

    def on_right_edge(alpha: float) -> bool:
        # the predicate only needs ~tau accuracy; a looser quadrature target
        # keeps near-corner evaluations cheap
        return m.phi_q(cmath.exp(1j * alpha), tol=1e-9).real >= 1.0 - tau

    lo, hi = math.log(m.k) - 6.0, math.log(math.pi / 2)
    if not on_right_edge(math.exp(lo)):
        raise RuntimeError("boundary inversion failed: bracket low end off edge")
    if on_right_edge(math.exp(hi)):
        raise RuntimeError("boundary inversion failed: bracket high end on edge")
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if on_right_edge(math.exp(mid)):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12:
            break
    return math.exp(0.5 * (lo + hi))


@dataclass(frozen=True)
class AsymptoticsReport:
    """Numeric boundary quantities of the map vs their small-q predictions."""

    q: float
    k: float
    theta_num: float
    delta1_num: float
    delta2_num: float
    theta_asym: float
    delta1_asym: float
    delta2_asym: float
    theta_pred_2k: float  # modulus-based prediction recorded alongside
    rel_dev_theta: float
    rel_dev_delta1: float
    rel_dev_delta2: float
    fitted_c: float  # max deviation / q

    def rel_devs(self) -> tuple:
        return (self.rel_dev_theta, self.rel_dev_delta1, self.rel_dev_delta2)


def asymptotics_report(q: float) -> AsymptoticsReport:
    """Extract theta, delta_1, delta_2 by inversion and compare to predictions."""
    if not 0.0 < q <= 0.3:
        raise ValueError("asymptotic regime requires 0 < q <= 0.3")
    m = ConformalRectangleMap.from_q(q)

    theta_num = _invert_boundary_angle(m)
    s1 = _invert_real_axis(m, 0.25)
    s2 = _invert_real_axis(m, 0.75)
    delta1_num = 2.0 / (s1 + 1.0)
    delta2_num = 2.0 / (s2 + 1.0)

    theta_asym = 8.0 * math.exp(-math.pi / (2.0 * q))
    delta1_asym = 4.0 * math.exp(-math.pi / (8.0 * q))
    delta2_asym = 4.0 * math.exp(-3.0 * math.pi / (8.0 * q))

    dev_t = abs(theta_num - theta_asym) / theta_num
    dev_1 = abs(delta1_num - delta1_asym) / delta1_num
    dev_2 = abs(delta2_num - delta2_asym) / delta2_num
    return AsymptoticsReport(
        q=q, k=m.k,
        theta_num=theta_num, delta1_num=delta1_num, delta2_num=delta2_num,
        theta_asym=theta_asym, delta1_asym=delta1_asym, delta2_asym=delta2_asym,
        theta_pred_2k=2.0 * m.k,
        rel_dev_theta=dev_t, rel_dev_delta1=dev_1, rel_dev_delta2=dev_2,
        fitted_c=max(dev_t, dev_1, dev_2) / q,
    )
