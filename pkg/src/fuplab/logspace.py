"""Sign/log-magnitude arithmetic on top of mpmath.

The constant chains produced by the fractal-uncertainty machinery involve
quantities like ``exp(-exp(6.5e20))`` whose magnitudes cannot be stored as
ordinary floats.  An mpmath ``mpf`` keeps its exponent as a Python integer, so
a *logarithm* of such a quantity is representable directly; this module wraps
values as ``(sign, log|x|)`` pairs and implements exact-in-log arithmetic with
explicit under/overflow guards instead of silent saturation.

All operations honour the ambient ``mpmath.mp.prec`` working precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath as mp

__all__ = ["LogValue", "EXP_LOG_CAP", "LSE_GAP"]

# exp() of a LogValue requires materializing its value as the new
# log-magnitude; that is safe while the value's own exponent integer stays of
# manageable size.  1e300 leaves enormous headroom (the resulting mpf exponent
# integer has ~1000 digits) while still failing loudly on runaway recursion.
EXP_LOG_CAP = mp.mpf("1e300")

# log-sum-exp gap beyond which the smaller term is below working precision for
# any practical precision setting; the correction term is dropped exactly.
LSE_GAP = mp.mpf("1e5")


def _mpf(x) -> mp.mpf:
    if isinstance(x, str):
        return mp.mpf(x)
    return mp.mpf(x)


@dataclass(frozen=True)
class LogValue:
    """A real number stored as ``sign * exp(log_abs)``.

    ``sign`` is -1, 0 or +1; ``log_abs`` is an mpmath float (ignored when
    ``sign == 0``).  The representation is exact under multiplication,
    division and powers, and uses guarded log-sum-exp for addition.
    """

    sign: int
    log_abs: mp.mpf

    # --- constructors -----------------------------------------------------

    @staticmethod
    def zero() -> "LogValue":
        return LogValue(0, mp.mpf(0))

    @staticmethod
    def one() -> "LogValue":
        return LogValue(1, mp.mpf(0))

    @staticmethod
    def from_number(x) -> "LogValue":
        """Wrap an int/float/mpf/str literal (exact at working precision)."""
        v = _mpf(x)
        if v == 0:
            return LogValue.zero()
        return LogValue(1 if v > 0 else -1, mp.log(abs(v)))

    @staticmethod
    def from_log(log_abs, sign: int = 1) -> "LogValue":
        """Build ``sign * exp(log_abs)`` without evaluating the exponential."""
        if sign == 0:
            return LogValue.zero()
        return LogValue(1 if sign > 0 else -1, _mpf(log_abs))

    # --- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.sign == 0

    def to_mpf(self) -> mp.mpf:
        """Materialize the value. Raises OverflowError past the guard cap."""
        if self.sign == 0:
            return mp.mpf(0)
        if abs(self.log_abs) > EXP_LOG_CAP:
            raise OverflowError(
                f"log-magnitude {mp.nstr(self.log_abs, 8)} exceeds the "
                f"materialization cap {mp.nstr(EXP_LOG_CAP, 3)}"
            )
        return self.sign * mp.exp(self.log_abs)

    def to_float(self) -> float:
        """Best-effort float (0.0 / inf on under/overflow of the double range)."""
        if self.sign == 0:
            return 0.0
        if self.log_abs > 709:
            return self.sign * float("inf")
        if self.log_abs < -745:
            return self.sign * 0.0
        return float(self.sign * mp.exp(self.log_abs))

    def log10(self) -> mp.mpf:
        """log10 of the magnitude (requires nonzero)."""
        if self.sign == 0:
            raise ValueError("log10 of zero LogValue")
        return self.log_abs / mp.log(10)

    # --- arithmetic ---------------------------------------------------------

    def __mul__(self, other: "LogValue") -> "LogValue":
        if self.sign == 0 or other.sign == 0:
            return LogValue.zero()
        return LogValue(self.sign * other.sign, self.log_abs + other.log_abs)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        if other.sign == 0:
            raise ZeroDivisionError("LogValue division by zero")
        if self.sign == 0:
            return LogValue.zero()
        return LogValue(self.sign * other.sign, self.log_abs - other.log_abs)

    def __neg__(self) -> "LogValue":
        return LogValue(-self.sign, self.log_abs)

    def __abs__(self) -> "LogValue":
        if self.sign == 0:
            return LogValue.zero()
        return LogValue(1, self.log_abs)

    def powi(self, p) -> "LogValue":
        """Raise to a real power (positive base required unless p is integer)."""
        pv = _mpf(p)
        if self.sign == 0:
            if pv <= 0:
                raise ZeroDivisionError("0 to a nonpositive power")
            return LogValue.zero()
        if self.sign < 0:
            if pv != mp.floor(pv):
                raise ValueError("fractional power of a negative LogValue")
            s = -1 if (int(pv) % 2) else 1
            return LogValue(s, self.log_abs * pv)
        return LogValue(1, self.log_abs * pv)

    def __add__(self, other: "LogValue") -> "LogValue":
        if self.sign == 0:
            return other
        if other.sign == 0:
            return self
        a, b = self, other
        if b.log_abs > a.log_abs:
            a, b = b, a
        gap = b.log_abs - a.log_abs  # <= 0
        if gap < -LSE_GAP:
            # smaller term is below any realistic working precision
            return a
        t = mp.exp(gap)  # in (0, 1]
        if a.sign == b.sign:
            return LogValue(a.sign, a.log_abs + mp.log1p(t))
        if t == 1:
            return LogValue.zero()
        return LogValue(a.sign, a.log_abs + mp.log1p(-t))

    def __sub__(self, other: "LogValue") -> "LogValue":
        return self + (-other)

    # --- transcendental -----------------------------------------------------

    def exp(self) -> "LogValue":
        """exp(value), staying in log space: new log_abs = value."""
        if self.sign == 0:
            return LogValue.one()
        # the result's log-magnitude is the value itself: exp(v) has
        # log_abs = v.  That stays mpf-representable while log_abs <= the cap
        # (an mpf exponent is an arbitrary Python int, so only its digit
        # count matters).
        if self.log_abs > EXP_LOG_CAP:
            raise OverflowError(
                "exp() of a LogValue with log-magnitude "
                f"{mp.nstr(self.log_abs, 8)}: result exponent would be "
                "astronomically nested (guard cap exceeded)"
            )
        if self.log_abs < -LSE_GAP:
            # exp(1 +- e^{-huge}); the deviation from 1 is below any working
            # precision and its log-representation is not materializable
            return LogValue.one()
        return LogValue(1, self.sign * mp.exp(self.log_abs))

    def log(self) -> "LogValue":
        """log(value) for positive values; exact from the representation."""
        if self.sign <= 0:
            raise ValueError("log of a nonpositive LogValue")
        if self.log_abs == 0:
            return LogValue.zero()
        return LogValue.from_number(self.log_abs)

    def sqrt(self) -> "LogValue":
        if self.sign < 0:
            raise ValueError("sqrt of a negative LogValue")
        if self.sign == 0:
            return LogValue.zero()
        return LogValue(1, self.log_abs / 2)

    # --- comparisons ----------------------------------------------------------

    def _cmp(self, other: "LogValue") -> int:
        if self.sign != other.sign:
            return 1 if self.sign > other.sign else -1
        if self.sign == 0:
            return 0
        if self.log_abs == other.log_abs:
            return 0
        mag = 1 if self.log_abs > other.log_abs else -1
        return mag * self.sign

    def __lt__(self, other: "LogValue") -> bool:
        return self._cmp(other) < 0

    def __le__(self, other: "LogValue") -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other: "LogValue") -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other: "LogValue") -> bool:
        return self._cmp(other) >= 0

    # equality: structural on (sign, log_abs) via dataclass

    # --- rendering ------------------------------------------------------------

    def describe(self, digits: int = 6) -> str:
        """Human-readable magnitude, nesting logs as needed.

        Values with |log10| <= 300 render as decimals; larger ones render as
        ``10^(+E)``; once even E is huge the form ``exp(+exp(u))`` is used.
        """
        if self.sign == 0:
            return "0"
        pre = "-" if self.sign < 0 else ""
        l10 = self.log_abs / mp.log(10)
        if abs(l10) <= 300:
            return pre + mp.nstr(self.to_mpf() * self.sign, digits)
        if abs(l10) <= mp.mpf("1e300"):
            return f"{pre}10^({mp.nstr(l10, digits)})"
        # log10 itself is astronomically large: report the doubly-nested form
        inner = mp.log(abs(self.log_abs))
        s = "+" if self.log_abs > 0 else "-"
        return f"{pre}exp({s}exp({mp.nstr(inner, digits)}))"
