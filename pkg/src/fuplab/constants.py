"""Explicit constant chain for the fractal uncertainty bound, in log space.

Starting from the geometry inputs (dimension, regularity exponents,
regularity constant, obliqueness margin, smallness knob iota) the chain
produces, in order: the porosity base L, the damping constants (c2, c3), the
frequency threshold R1 (a six-case maximum), the localization constant C*,
the iteration depth T0, the per-step gain gamma0, and finally the exponent
beta of the power-law norm decay together with the closed-form headline lower
bound it must dominate.  Magnitudes range from ~1 down to exp(-exp(6.5e20)),
so every derived quantity is carried as a :class:`~fuplab.logspace.LogValue`
with an audit trail of per-step values, clamps, and dropped corrections.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import mpmath as mp

from .logspace import LogValue
from .mollifier import REFERENCE_CONSTANTS

# log-magnitudes beyond the double range are reported one log deeper (see
# ConstantChain.log_magnitudes); 1e300 comfortably bounds what a double can
# hold while staying far above every singly-exponential chain quantity.
_ITERATED_LOG_CUTOFF = mp.mpf("1e300")

__all__ = [
    "theta_weight",
    "choose_L",
    "DampingParams",
    "damping_params",
    "r1_threshold",
    "ChainInputs",
    "ConstantChain",
    "beta_chain",
]


def theta_weight(xi_l1: float, alpha: float) -> float:
    """Logarithmic decay profile (log(2+xi))^(-alpha) for xi = |.|_1 >= 0."""
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0,1), got {alpha}")
    if xi_l1 < 0:
        raise ValueError("theta_weight needs a nonnegative l1 norm")
    return math.log(2.0 + xi_l1) ** (-alpha)


def choose_L(d: int, delta: float, C_R: float) -> int:
    """Smallest admissible porosity base: ceil((2^{d/2} sqrt(2d+1) C_R)^{2/(d-delta)}).

    Clamped up to 4 (the iteration lemma needs L >= 4).
    """
    if not (0.0 < delta < d):
        raise ValueError(f"need 0 < delta < d, got delta={delta}, d={d}")
    if C_R < 1.0:
        raise ValueError("regularity constant must be >= 1")
    base = (2.0 ** (d / 2.0)) * math.sqrt(2.0 * d + 1.0) * C_R
    val = base ** (2.0 / (d - delta))
    L = int(math.ceil(val - 1e-12))  # protect exact-integer values from FP fuzz
    return max(L, 4)


@dataclass(frozen=True)
class DampingParams:
    """Damping constants (log-space) plus clamp bookkeeping."""

    c2: LogValue
    c3: LogValue
    c3_unclamped: LogValue
    c3_clamped: bool
    c3_star: float


def damping_params(
    c1: float,
    C_R: float,
    delta1: float,
    m: int = 1,
    d: int = 1,
    iota: float = 1e-2,
    q_star: float = 0.05,
) -> DampingParams:
    """Damping constants c2, c3 from the construction inputs.

    1-D: c2 = iota*c1^10, c3 = iota*c1*C_R^-2*delta1(1-delta1).
    d-D (m frames): c2 = iota^m c1^{(10m+2)d} m^{-10md} C_R^{-4d}
    (delta1(1-delta1))^{2d}; c3 additionally carries 1/m.  c3 is clamped below
    c3*(d) = 2 pi q_star with the clamp recorded.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if not (0.0 < delta1 < 1.0):
        raise ValueError("delta1 must lie in (0,1)")
    if not (0.0 < c1 <= 0.5):
        raise ValueError("c1 must lie in (0, 1/2]")
    lv = LogValue.from_number
    c1v, crv, dd = lv(c1), lv(C_R), lv(delta1) * lv(1.0 - delta1)
    iv, mv = lv(iota), lv(m)
    if d == 1:
        c2 = iv * c1v.powi(10)
    else:
        c2 = (
            iv.powi(m)
            * c1v.powi((10 * m + 2) * d)
            * mv.powi(-10 * m * d)
            * crv.powi(-4 * d)
            * dd.powi(2 * d)
        )
    c3_raw = iv * c1v * crv.powi(-2) * dd / mv
    c3_star = 2.0 * math.pi * q_star
    clamped = c3_raw.to_float() >= c3_star
    c3 = lv(c3_star * 0.999999) if clamped else c3_raw
    return DampingParams(c2=c2, c3=c3, c3_unclamped=c3_raw,
                         c3_clamped=clamped, c3_star=c3_star)


def r1_threshold(
    d: int,
    c1: float,
    c2: LogValue,
    c3: LogValue,
    alpha: float,
    C_d: float = 1.0,
    absorb_cd: bool = True,
) -> tuple[LogValue, dict]:
    """Frequency threshold R1 = max over the six explicit cases (log-space).

    ``absorb_cd`` folds the absolute prefactor of the exponential case into
    the smallness knob (the headline-consistent convention); the literal
    prefactor 16*pi*C_d is used otherwise.  Per-case values are returned in
    the trail dict (case label -> LogValue).
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0,1)")
    lv = LogValue.from_number
    inv_c3 = LogValue.one() / c3
    exp_pow = mp.mpf(1) / (1 - mp.mpf(alpha))

    pre = lv(1.0) if absorb_cd else lv(16.0 * math.pi * C_d)
    case_i = ((pre * inv_c3).powi(exp_pow)).exp()
    case_ii = lv(4.0).powi(exp_pow).exp()
    neg_log_c1 = lv(-d * math.log(c1))
    case_iii = (neg_log_c1.powi(d) * inv_c3).powi(8)
    # 4*log(2 C_d / c2^2), evaluated from the log-representation of c2
    log_term = mp.log(2 * mp.mpf(C_d)) - 2 * c2.log_abs * c2.sign
    case_iv = (lv(4.0) * lv(log_term)).powi(2)
    case_v = lv(float((8 * d) ** 4))
    case_vi = (lv(2.0 * d) * inv_c3).powi(2)

    cases = {
        "case_i_exp": case_i,
        "case_ii_exp": case_ii,
        "case_iii_logpow": case_iii,
        "case_iv_c2": case_iv,
        "case_v_floor": case_v,
        "case_vi_kernel": case_vi,
    }
    r1 = max(cases.values(), key=lambda v: (v.sign, v.log_abs))
    dominant = max(cases, key=lambda k: (cases[k].sign, cases[k].log_abs))
    trail = dict(cases)
    trail["dominant_case"] = dominant
    return r1, trail


@dataclass(frozen=True)
class ChainInputs:
    """Inputs of the constant chain (see beta_chain)."""

    d: int = 2
    delta: float = 1.0
    delta1: float = 0.5
    C_R: float = 1.0
    eps0: float = 0.9
    iota: float = 1e-2
    alpha: Optional[float] = None  # defaults to (1+delta1)/2
    c1: Optional[float] = None  # defaults to 1/(2L)
    m: int = 1
    q_star: float = 0.05
    C_d: float = 1.0
    absorb_cd: bool = True
    precision: int = 200  # mpmath working precision in bits


@dataclass
class ConstantChain:
    """Full evaluated chain: values in log space plus a readable audit trail."""

    inputs: ChainInputs
    L: int
    values: dict = field(default_factory=dict)  # name -> LogValue
    clamps: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    dominant_case: str = ""

    def render(self, digits: int = 6) -> dict:
        """Decimal / iterated-log rendering of every chain value."""
        out = {}
        for name, v in self.values.items():
            out[name] = v.describe(digits) if isinstance(v, LogValue) else repr(v)
        return out

    def log_magnitudes(self) -> dict:
        """name -> (sign, nesting, payload) for precision comparisons.

        nesting 0: payload = log|value|.  nesting 1 (doubly exponential
        values whose plain log exceeds the double range, and whose plain log
        is therefore not precision-stable): payload = sign(log|value|) *
        log|log|value||.  Comparing payloads at equal nesting is stable
        under precision changes; comparing the plain log of a doubly
        exponential value is not, because it is the exponential of an
        already huge quantity.
        """
        out = {}
        for name, v in self.values.items():
            if not (isinstance(v, LogValue) and not v.is_zero()):
                continue
            la = v.log_abs
            if abs(la) > _ITERATED_LOG_CUTOFF:
                payload = mp.log(abs(la)) * (1 if la > 0 else -1)
                out[name] = (v.sign, 1, payload)
            else:
                out[name] = (v.sign, 0, la)
        return out


def beta_chain(inputs: ChainInputs) -> ConstantChain:
    """Evaluate the full constant chain at the given inputs.

    Raises ValueError when an intermediate leaves its invariant range;
    records every clamp and every dropped correction in the trail.
    """
    with mp.workprec(inputs.precision):
        return _beta_chain_inner(inputs)


def _beta_chain_inner(inputs: ChainInputs) -> ConstantChain:
    lv = LogValue.from_number
    d, delta, delta1 = inputs.d, inputs.delta, inputs.delta1

    L = choose_L(d, delta, inputs.C_R)
    chain = ConstantChain(inputs=inputs, L=L)
    vals = chain.values
    raw = (2.0 ** (d / 2.0) * math.sqrt(2 * d + 1) * inputs.C_R) ** (2.0 / (d - delta))
    if L == 4 and raw < 4:
        chain.clamps.append("L clamped up to 4")

    alpha = inputs.alpha if inputs.alpha is not None else (1.0 + delta1) / 2.0
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha out of range")
    c1 = inputs.c1 if inputs.c1 is not None else 1.0 / (2.0 * L)
    if inputs.c1 is None and c1 > 0.5:
        c1 = 0.5
    vals["c1"] = lv(c1)
    vals["alpha"] = lv(alpha)

    dp = damping_params(c1, inputs.C_R, delta1, m=inputs.m, d=d,
                        iota=inputs.iota, q_star=inputs.q_star)
    if dp.c3_clamped:
        chain.clamps.append(f"c3 clamped below c3*={dp.c3_star:.6g}")
    vals["c2"] = dp.c2
    vals["c3"] = dp.c3
    vals["q_star"] = lv(inputs.q_star)
    vals["c3_star"] = lv(dp.c3_star)

    sigma = c1 / 5.0
    if sigma > 0.1 - 1e-6:
        sigma = 0.1 - 1e-6
        chain.clamps.append("sigma clamped to 1/10 - 1e-6")
    vals["sigma"] = lv(sigma)

    r1, trail = r1_threshold(d, c1, dp.c2, dp.c3, alpha,
                             C_d=inputs.C_d, absorb_cd=inputs.absorb_cd)
    chain.dominant_case = trail.pop("dominant_case")
    for k, v in trail.items():
        vals[k] = v
    r0 = max((v for k, v in trail.items() if k != "case_vi_kernel"),
             key=lambda v: (v.sign, v.log_abs))
    vals["R0"] = r0
    vals["R1"] = r1
    if r1 < vals["case_vi_kernel"]:
        raise ValueError("invariant violated: R1 < (2d/c3)^2")

    # Theta(R1) and C* = exp(c3 * Theta(R1) * (R1+2)/2)
    log_2pR1 = _log_two_plus(r1)
    theta_r1 = LogValue.from_log(-mp.mpf(alpha) * mp.log(log_2pR1))
    vals["Theta_R1"] = theta_r1
    r1p2 = r1 + lv(2.0)
    exponent = vals["c3"] * theta_r1 * r1p2 / lv(2.0)
    vals["log_C_star"] = exponent
    c_star = exponent.exp()
    vals["C_star"] = c_star

    # T0 = ceil( log(2 C_phi C*^2 + sqrt(4 C_phi^2 C*^4 + c_phi^2)) / log L )
    C_phi = lv(REFERENCE_CONSTANTS["C_phi"][min(d, 2)])
    c_phi = lv(REFERENCE_CONSTANTS["c_phi"][min(d, 2)])
    vals["C_phi"] = C_phi
    vals["c_phi"] = c_phi
    inner = lv(2.0) * C_phi * c_star.powi(2)
    root = (lv(4.0) * C_phi.powi(2) * c_star.powi(4) + c_phi.powi(2)).sqrt()
    t0_raw = (inner + root).log() / lv(mp.log(L))
    if t0_raw.log_abs < mp.log(mp.mpf("1e15")):
        t0 = lv(mp.ceil(t0_raw.to_mpf()))
        chain.notes.append("T0 ceiling applied exactly")
    else:
        t0 = t0_raw
        chain.notes.append("T0 ceiling absorbed (astronomical magnitude)")
    if t0.sign <= 0:
        raise ValueError("invariant violated: T0 must be positive")
    vals["T0"] = t0
    T = t0 if t0.to_float() >= 2.0 else lv(2.0)
    vals["T"] = T

    # gamma0(T) = (1 - c_phi^2 / L^{2(T-1)}) / (2 C*^2)
    l_pow = (lv(2.0) * (T - LogValue.one()) * lv(mp.log(L))).exp()
    correction = c_phi.powi(2) / l_pow
    one_minus = LogValue.one() - correction
    if one_minus.sign <= 0:
        raise ValueError("invariant violated: gamma0 numerator nonpositive "
                         "(T too small for c_phi)")
    if correction.log_abs < -mp.mpf(1e5):
        chain.notes.append("gamma0: c_phi^2/L^(2(T-1)) below working precision, dropped")
    gamma0 = one_minus / (lv(2.0) * c_star.powi(2))
    vals["gamma0"] = gamma0
    if not (gamma0.sign > 0 and gamma0 <= LogValue.one()):
        raise ValueError("invariant violated: gamma0 outside (0,1)")

    # beta = -log(1 - gamma0/2) / (T log L);  C~ = (1 - gamma0/2)^{-1/T}
    x = gamma0 / lv(2.0)
    neg_log1m = _neg_log_one_minus(x, chain)
    t_logl = T * lv(mp.log(L))
    beta = neg_log1m / t_logl
    vals["beta"] = beta
    if not (beta.sign > 0 and beta < LogValue.one()):
        raise ValueError("invariant violated: beta outside (0,1)")
    vals["C_tilde"] = (neg_log1m / T).exp()

    # headline: beta_head = exp(-exp(u)), u = (C_R^2/(iota delta1(1-delta1)))^e
    e_head = (6.0 - 2.0 * delta) / ((1.0 - delta1) * (2.0 - delta))
    base = lv(inputs.C_R).powi(2) / (lv(inputs.iota) * lv(delta1) * lv(1 - delta1))
    u = base.powi(e_head)
    vals["headline_inner"] = u
    log_inv_beta_head = u.exp()  # = exp(u), the magnitude of log(1/beta_head)
    beta_head = LogValue.from_log(-log_inv_beta_head.to_mpf())
    vals["headline_beta"] = beta_head
    chain.notes.append(
        "headline domination: " + ("holds" if beta >= beta_head else "VIOLATED")
    )
    return chain


def _log_two_plus(v: LogValue) -> mp.mpf:
    """log(2 + v) for a positive LogValue, stable at any magnitude."""
    if v.sign <= 0:
        raise ValueError("needs a positive value")
    if v.log_abs > 50:
        # log(2+v) = log v + log(1 + 2/v); the correction underflows
        return v.log_abs
    return mp.log(2 + v.to_mpf())


def _neg_log_one_minus(x: LogValue, chain: ConstantChain) -> LogValue:
    """-log(1-x) for x in (0, 1/2], keeping tiny x in log space."""
    if x.sign <= 0:
        raise ValueError("x must be positive")
    if x.log_abs < -50:
        # -log(1-x) = x(1 + x/2 + ...); the first correction already
        # underflows relative precision
        chain.notes.append("-log(1-gamma0/2): series correction dropped")
        return x
    xv = x.to_mpf()
    if xv > 0.5:
        raise ValueError("gamma0/2 > 1/2 should be impossible")
    return LogValue.from_number(-mp.log(1 - xv))
