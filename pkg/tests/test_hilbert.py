"""Tests for the modified Hilbert transform on uniform grids."""

import numpy as np
import pytest
from scipy.special import dawsn

from fuplab.hilbert import (
    TailFit,
    fit_tail_model,
    hat_kernel_values,
    hilbert_modified,
)

# Frozen oracle: modified-kernel principal values of the standard compact
# bump exp(-1/(1-t^2)) on |t|<1, computed at 30 digits with tanh-sinh
# quadrature on the symmetric difference form
#   p.v. integral f(t)/(x-t) dt = integral_0^U (f(x-u) - f(x+u))/u du,
# plus the exact compensation integral of f(t) t/(1+t^2).
BUMP_ORACLE = {
    0.5: 0.23764407805424115,
    0.25: 0.12368927965217708,
    0.0: 0.0,
    -0.75: -0.29211018047435733,
    2.0: 0.07372020361131676,
    -1.5: -0.10207285506365739,
}


def bump(x: np.ndarray) -> np.ndarray:
    inside = np.abs(x) < 1
    out = np.zeros_like(x)
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


class TestHatKernel:
    def test_closed_form_small_offsets(self):
        # V(k) = (k+1)log|k+1| + (k-1)log|k-1| - 2k log|k|
        got = hat_kernel_values(np.array([-2.0, -1.0, 0.0, 1.0, 2.0, 3.0]))
        v2 = 3 * np.log(3) + 1 * np.log(1) - 4 * np.log(2)
        v3 = 4 * np.log(4) + 2 * np.log(2) - 6 * np.log(3)
        assert got == pytest.approx([-v2, -2 * np.log(2), 0.0, 2 * np.log(2), v2, v3])

    def test_odd_and_decaying(self):
        k = np.arange(1.0, 200.0)
        v = hat_kernel_values(k)
        assert hat_kernel_values(-k) == pytest.approx(-v)
        # V(k) ~ 1/k for large k
        assert v[-1] == pytest.approx(1.0 / 199.0, rel=1e-3)
        assert np.all(np.diff(v[2:]) < 0)

    def test_large_offset_no_cancellation(self):
        # naive evaluation of the closed form loses all digits near 1e8;
        # compare against the asymptotic series 1/k + 1/(3k^3)
        k = np.array([1e6, 1e8])
        v = hat_kernel_values(k)
        assert v == pytest.approx(1.0 / k + 1.0 / (3.0 * k**3), rel=1e-9)


class TestTransform:
    def test_gaussian_matches_dawson(self):
        # H(exp(-t^2))(x) = (2/sqrt(pi)) dawsn(x) under the H(cos) = sin
        # convention; the compensation term vanishes for even input
        x = np.arange(-12.0, 12.0 + 1e-12, 2.0**-8)
        h = hilbert_modified(x, np.exp(-x * x))
        ref = 2.0 / np.sqrt(np.pi) * dawsn(x)
        assert float(np.max(np.abs(h - ref))) < 5e-6

    def test_compact_bump_matches_quadrature_oracle(self):
        dx = 2.0**-9
        x = np.arange(-4.0, 4.0 + 1e-12, dx)
        h = hilbert_modified(x, bump(x))
        for xv, want in BUMP_ORACLE.items():
            i = int(round((xv - x[0]) / dx))
            assert x[i] == pytest.approx(xv, abs=1e-12)
            assert h[i] == pytest.approx(want, abs=5e-6)

    def test_inversion_identity(self):
        # H(H f) = -f + mean-like constant for decaying f; checked in the
        # interior away from the grid edges
        dx = 2.0**-8
        x = np.arange(-24.0, 24.0 + 1e-12, dx)
        f = 1.0 / (1.0 + x * x)
        hh = hilbert_modified(x, hilbert_modified(x, f))
        core = np.abs(x) <= 10.0
        resid = hh[core] + f[core]
        # remove the additive constant the modified kernel is allowed
        resid -= np.median(resid)
        assert float(np.max(np.abs(resid))) < 1e-3

    def test_derivative_identity_for_log_kernel(self):
        # d/dx H(log(1+x^2)) = -2/(1+x^2): the transform of the slowly
        # growing logarithm is differentiable with an elementary closed form
        dx = 2.0**-10
        x = np.arange(-64.0, 64.0 + 1e-12, dx)
        h = hilbert_modified(x, np.log1p(x * x))
        d = np.gradient(h, dx)
        core = np.abs(x) <= 10.0
        err = np.max(np.abs(d[core] + 2.0 / (1.0 + x[core] ** 2)))
        assert float(err) < 1e-3

    def test_odd_input_even_output(self):
        x = np.arange(-16.0, 16.0 + 1e-12, 2.0**-7)
        f = x * np.exp(-x * x)
        h = hilbert_modified(x, f)
        # H maps odd to even (kernel is a convolution with an odd function)
        sym = h - h[::-1]
        assert float(np.max(np.abs(sym))) < 1e-8

    def test_linearity(self):
        x = np.arange(-8.0, 8.0 + 1e-12, 2.0**-6)
        f, g = np.exp(-x * x), bump(x / 2.0)
        lhs = hilbert_modified(x, 2.0 * f - 3.0 * g, tail_model="none")
        rhs = 2.0 * hilbert_modified(x, f, tail_model="none") - 3.0 * hilbert_modified(
            x, g, tail_model="none"
        )
        assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_rejects_nonuniform_grid(self):
        x = np.array([0.0, 1.0, 2.5])
        with pytest.raises(ValueError):
            hilbert_modified(x, np.zeros_like(x))


class TestTailModels:
    def test_fit_constant_tail(self):
        x = np.arange(-32.0, 32.0 + 1e-12, 2.0**-4)
        fit = fit_tail_model(x, np.full_like(x, 2.5), model="constant")
        assert isinstance(fit, TailFit)
        assert fit.evaluate(np.array([100.0]))[0] == pytest.approx(2.5, rel=1e-9)
        assert fit.residual_rms < 1e-12

    def test_auto_picks_log_for_log_input(self):
        x = np.arange(-64.0, 64.0 + 1e-12, 2.0**-4)
        fit = fit_tail_model(x, np.log1p(x * x), model="auto")
        assert fit.model == "log"

    def test_return_fit_flag(self):
        x = np.arange(-16.0, 16.0 + 1e-12, 2.0**-5)
        h, fit = hilbert_modified(x, np.exp(-np.abs(x)), return_fit=True)
        assert h.shape == x.shape
        assert isinstance(fit, TailFit)

    def test_unknown_model_rejected(self):
        x = np.arange(-4.0, 4.0 + 1e-12, 0.25)
        with pytest.raises(ValueError):
            hilbert_modified(x, np.zeros_like(x), tail_model="fourier")

    def test_tail_model_rescues_growing_input(self):
        # the tail machinery exists for slowly growing inputs, where plain
        # truncation is catastrophic: H(log(1+x^2)) = -2 arctan(x) + C
        x = np.arange(-16.0, 16.0 + 1e-12, 2.0**-6)
        f = np.log1p(x * x)
        ref = -2.0 * np.arctan(x)
        core = np.abs(x) <= 12.0

        def err(tail_model):
            h = hilbert_modified(x, f, tail_model=tail_model)
            d = h[core] - ref[core]
            d -= np.median(d)  # additive constants are allowed
            return float(np.max(np.abs(d)))

        assert err("auto") < 1e-10
        assert err("none") > 1.0
