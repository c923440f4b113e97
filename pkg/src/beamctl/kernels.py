"""Moment-problem kernels and the synthesized control signal.

Every constraint kernel used by the moment problem is, in the reversed time
variable u = T - s, a short linear combination of terms u^p e^(lam u) with
p in {0, 1}:

    const        1
    linear       s = T - u
    exp          e^(lam (T-s))                     (real rate)
    polyexp      (T-s) e^(lam (T-s))               (critical-regime partner)
    expcos       e^(beta (T-s)) cos(alpha (T-s))   (conjugate-pair real part)
    expsin       e^(beta (T-s)) sin(alpha (T-s))   (conjugate-pair imag part)

That uniform representation gives closed forms for every L2 inner product,
for pointwise evaluation, and for the first and second antiderivatives that
turn the curvature profile f'' into the actual boundary signal f.  The only
primitive needed is the truncated moment

    M_d(nu, t) = int_0^t w^d e^(nu w) dw,

computed by a stable series for small |nu t| and by the usual recursion in d
otherwise.
"""
from __future__ import annotations

import math

from dataclasses import dataclass
from math import comb
from typing import Optional, Sequence, Tuple

import mpmath as mp
import numpy as np

from ._numutil import decimal_str, strip_imag, to_mpf

__all__ = [
    "Kernel",
    "ControlSignal",
    "power_exp_moment",
    "gram_entry",
    "kernel_value",
    "kernel_antiderivatives",
    "monomial_kernel_product",
    "convolution_moment",
]

_GUARD_BITS = 64


def power_exp_moment(d: int, nu, t):
    """M_d(nu, t) = int_0^t w^d e^(nu w) dw at the current working precision.

    Series when |nu t| < 1/2 (covers nu = 0 exactly); otherwise the downward
    recursion M_d = (t^d e^(nu t) - d M_(d-1)) / nu seeded with
    M_0 = expm1(nu t)/nu.
    """
    if d < 0:
        raise ValueError("moment order must be nonnegative")
    t = mp.mpf(t)
    if t == 0:
        return mp.mpf(0)
    if abs(nu) * t < mp.mpf("0.5"):
        # sum_k nu^k t^(k+d+1) / (k! (k+d+1)); geometric-factorial decay
        total = mp.mpf(0)
        term = t ** (d + 1)
        k = 0
        while True:
            contrib = term / (k + d + 1)
            total += contrib
            if abs(contrib) < abs(total) * mp.eps and k > 2:
                return total
            k += 1
            term = term * nu * t / k

    m = mp.expm1(nu * t) / nu
    if d == 0:
        return m
    tp = mp.mpf(1)
    e = mp.e ** (nu * t)
    for j in range(1, d + 1):
        tp = tp * t
        m = (tp * e - j * m) / nu
    return m


@dataclass(frozen=True)
class Kernel:
    """One constraint kernel on [0, T]; see the module docstring for kinds."""

    kind: str
    rate: Optional[mp.mpf] = None     # exp / polyexp
    decay: Optional[mp.mpf] = None    # expcos / expsin
    freq: Optional[mp.mpf] = None     # expcos / expsin

    def __post_init__(self):
        if self.kind in ("const", "linear"):
            if self.rate is not None or self.decay is not None or self.freq is not None:
                raise ValueError(f"{self.kind} kernel takes no parameters")
        elif self.kind in ("exp", "polyexp"):
            if self.rate is None:
                raise ValueError(f"{self.kind} kernel requires a rate")
        elif self.kind in ("expcos", "expsin"):
            if self.decay is None or self.freq is None:
                raise ValueError(f"{self.kind} kernel requires decay and freq")
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    def exponential_parts(self, horizon) -> Tuple[Tuple[mp.mpc, int, mp.mpc], ...]:
        """(coefficient, power, rate) terms of sum a u^p e^(lam u), u = T - s."""
        T = to_mpf(horizon)
        if self.kind == "const":
            return ((mp.mpf(1), 0, mp.mpf(0)),)
        if self.kind == "linear":
            return ((T, 0, mp.mpf(0)), (mp.mpf(-1), 1, mp.mpf(0)))
        if self.kind == "exp":
            return ((mp.mpf(1), 0, mp.mpf(self.rate)),)
        if self.kind == "polyexp":
            return ((mp.mpf(1), 1, mp.mpf(self.rate)),)
        lam = mp.mpc(self.decay, self.freq)
        conj = mp.mpc(self.decay, -self.freq)
        if self.kind == "expcos":
            return ((mp.mpf("0.5"), 0, lam), (mp.mpf("0.5"), 0, conj))
        # expsin: sin(x) = (e^(ix) - e^(-ix)) / (2i)
        return ((mp.mpc(0, "-0.5"), 0, lam), (mp.mpc(0, "0.5"), 0, conj))

    def descriptor(self, precision_bits: int) -> dict:
        """JSON-ready description with decimal-string parameters."""
        out = {"kind": self.kind}
        if self.rate is not None:
            out["rate"] = decimal_str(self.rate, precision_bits)
        if self.decay is not None:
            out["decay"] = decimal_str(self.decay, precision_bits)
            out["freq"] = decimal_str(self.freq, precision_bits)
        return out

    @staticmethod
    def from_descriptor(d: dict) -> "Kernel":
        kind = d["kind"]
        if kind in ("const", "linear"):
            return Kernel(kind)
        if kind in ("exp", "polyexp"):
            return Kernel(kind, rate=mp.mpf(d["rate"]))
        return Kernel(kind, decay=mp.mpf(d["decay"]), freq=mp.mpf(d["freq"]))

    def label(self) -> str:
        if self.kind in ("const", "linear"):
            return self.kind
        if self.rate is not None:
            return f"{self.kind}({mp.nstr(self.rate, 8)})"
        return f"{self.kind}({mp.nstr(self.decay, 8)}, {mp.nstr(self.freq, 8)})"


def kernel_value(kernel: Kernel, s, horizon):
    """Pointwise value at time s in [0, T], at the current working precision."""
    s = mp.mpf(s)
    T = to_mpf(horizon)
    u = T - s
    if kernel.kind == "const":
        return mp.mpf(1)
    if kernel.kind == "linear":
        return s
    if kernel.kind == "exp":
        return mp.e ** (kernel.rate * u)
    if kernel.kind == "polyexp":
        return u * mp.e ** (kernel.rate * u)
    if kernel.kind == "expcos":
        return mp.e ** (kernel.decay * u) * mp.cos(kernel.freq * u)
    return mp.e ** (kernel.decay * u) * mp.sin(kernel.freq * u)


def gram_entry(kernel_a: Kernel, kernel_b: Kernel, horizon,
               precision_bits: int = 256):
    """L2(0, T) inner product of two kernels, by closed form.

    Expands both kernels into u^p e^(lam u) terms and sums
    a_i conj(b_j) M_(p_i + p_j)(lam_i + conj(mu_j), T).  Real for the real
    kernel kinds; the roundoff-level imaginary residue is stripped.
    """
    with mp.workprec(precision_bits + _GUARD_BITS):
        T = to_mpf(horizon)
        total = mp.mpf(0)
        for (a, p, lam) in kernel_a.exponential_parts(T):
            for (b, q, mu) in kernel_b.exponential_parts(T):
                total = total + a * mp.conj(b) * power_exp_moment(p + q, lam + mp.conj(mu), T)
        return strip_imag(total, precision_bits)


def monomial_kernel_product(degree: int, kernel: Kernel, horizon,
                            precision_bits: int = 256):
    """<s^degree, kernel> over [0, T]: monomials expand as (T - u)^degree."""
    with mp.workprec(precision_bits + _GUARD_BITS):
        T = to_mpf(horizon)
        total = mp.mpf(0)
        for (b, q, mu) in kernel.exponential_parts(T):
            for j in range(degree + 1):
                coef = comb(degree, j) * (-1) ** j * T ** (degree - j)
                total = total + coef * mp.conj(b) * power_exp_moment(j + q, mp.conj(mu), T)
        return strip_imag(total, precision_bits)


def convolution_moment(part, d: int, lam, t, horizon):
    """int_0^t (T-s)^p e^(mu (T-s)) (t-s)^d e^(lam (t-s)) ds for one kernel part.

    Binomially rewrites (T-s)^p around (T-t) so everything reduces to
    M moments in the local variable w = t - s.  Used by the modal response.
    """
    a, p, mu = part
    t = mp.mpf(t)
    T = to_mpf(horizon)
    head = a * mp.e ** (mu * (T - t))
    total = mp.mpf(0)
    for j in range(p + 1):
        total = total + comb(p, j) * (T - t) ** (p - j) * power_exp_moment(d + j, mu + lam, t)
    return head * total


def kernel_antiderivatives(kernel: Kernel, t, horizon, precision_bits: int = 256):
    """(I1, I2) with I1(t) = int_0^t k(s) ds and I2(t) = int_0^t I1.

    These turn the curvature profile into slope and value of the boundary
    signal: f' = I1-combination, f = I2-combination, both vanishing at 0.
    """
    with mp.workprec(precision_bits + _GUARD_BITS):
        t = mp.mpf(t)
        T = to_mpf(horizon)
        i1 = mp.mpf(0)
        i2 = mp.mpf(0)
        for (a, p, lam) in kernel.exponential_parts(T):
            if lam == 0:
                if p == 0:
                    j1, j2 = t, t * t / 2
                else:
                    j1 = T * t - t * t / 2
                    j2 = T * t * t / 2 - t ** 3 / 6
            else:
                # F_p antiderivative of w^p e^(lam w); G_p antiderivative of F_p
                def F(w):
                    if p == 0:
                        return mp.e ** (lam * w) / lam
                    return mp.e ** (lam * w) * (w / lam - 1 / lam ** 2)

                def G(w):
                    if p == 0:
                        return mp.e ** (lam * w) / lam ** 2
                    return mp.e ** (lam * w) * (w / lam ** 2 - 2 / lam ** 3)

                j1 = F(T) - F(T - t)
                j2 = t * F(T) - (G(T) - G(T - t))
            i1 = i1 + a * j1
            i2 = i2 + a * j2
        return (strip_imag(i1, precision_bits), strip_imag(i2, precision_bits))


@dataclass(frozen=True)
class ControlSignal:
    """Boundary control in curvature form: f''(s) = sum_k c_k kernel_k(s).

    The signal itself and its slope are recovered by integrating twice from
    zero, so f(0) = f'(0) = 0 holds by construction; f(T) = f'(T) = 0 holds
    when the constant and linear moments of f'' vanish (the first two rows of
    every assembled moment system).
    """

    kernels: Tuple[Kernel, ...]
    coefficients: Tuple[mp.mpf, ...]
    horizon: mp.mpf
    precision_bits: int = 256

    def __post_init__(self):
        if len(self.kernels) != len(self.coefficients):
            raise ValueError("one coefficient per kernel required")

    def curvature(self, t):
        """f''(t)."""
        with mp.workprec(self.precision_bits + _GUARD_BITS):
            acc = mp.mpf(0)
            for c, k in zip(self.coefficients, self.kernels):
                acc = acc + c * kernel_value(k, t, self.horizon)
            return acc

    def slope(self, t):
        """f'(t) = int_0^t f''."""
        with mp.workprec(self.precision_bits + _GUARD_BITS):
            acc = mp.mpf(0)
            for c, k in zip(self.coefficients, self.kernels):
                acc = acc + c * kernel_antiderivatives(k, t, self.horizon,
                                                       self.precision_bits)[0]
            return acc

    def value(self, t):
        """f(t) = double integral of f'' from 0."""
        with mp.workprec(self.precision_bits + _GUARD_BITS):
            acc = mp.mpf(0)
            for c, k in zip(self.coefficients, self.kernels):
                acc = acc + c * kernel_antiderivatives(k, t, self.horizon,
                                                       self.precision_bits)[1]
            return acc

    def term_scale_bound(self) -> float:
        """Upper bound on the magnitude of any single coefficient-times-kernel
        term across [0, T], signal and antiderivatives included.

        Synthesized curvatures are small numbers written as differences of
        enormous ones; this bound measures the enormity, which decides how
        much precision faithful samples require.
        """
        T = float(self.horizon)
        bound = 0.0
        for c, k in zip(self.coefficients, self.kernels):
            cf = abs(float(c))
            if cf == 0.0:
                continue
            if k.kind == "const":
                peak = 1.0
            elif k.kind == "linear":
                peak = max(T, 1.0)
            elif k.kind in ("exp", "polyexp"):
                rate = float(k.rate)
                grow = math.exp(max(rate, 0.0) * T)
                if k.kind == "exp":
                    peak = max(1.0, grow)
                else:
                    u_star = T if rate >= 0 else min(T, -1.0 / rate)
                    peak = max(u_star * math.exp(min(rate, 0.0) * u_star), grow * T)
            else:
                peak = math.exp(max(float(k.decay), 0.0) * T)
            bound += cf * peak
        return bound * max(1.0, T, T * T / 2)

    def sample(self, times) -> dict:
        """Float64 samples {t, f, f_prime, f_second} for export and integration.

        Each returned number is the signal's value at that time, rounded to
        float64.  When every term of the exponential sum is modest the
        evaluation runs vectorized in complex128; when the terms are huge and
        the values small (the normal situation for synthesized controls, where
        coefficients of 1e10 and beyond cancel pointwise) plain float64
        evaluation would lose the value entirely, so the sum is carried out in
        extended precision sized to the cancellation and only the final values
        are rounded.
        """
        t = np.asarray([float(x) for x in times], dtype=np.float64)
        if t.size == 0:
            return {"t": t, "f": t.copy(), "f_prime": t.copy(), "f_second": t.copy()}
        if self.term_scale_bound() <= 1e6:
            return self._sample_float64(t)
        return self._sample_extended(t)

    def _sample_float64(self, t: np.ndarray) -> dict:
        T = float(self.horizon)
        f = np.zeros_like(t)
        fp = np.zeros_like(t)
        fpp = np.zeros_like(t)
        for c, k in zip(self.coefficients, self.kernels):
            cf = float(c)
            for (a, p, lam) in k.exponential_parts(self.horizon):
                af = complex(a)
                lf = complex(lam)
                u = T - t
                if lf == 0:
                    if p == 0:
                        fpp_k = np.ones_like(t)
                        f1 = t.copy()
                        f2 = t * t / 2
                    else:
                        fpp_k = u
                        f1 = T * t - t * t / 2
                        f2 = T * t * t / 2 - t ** 3 / 6
                    fpp += cf * (af * fpp_k).real
                    fp += cf * (af * f1).real
                    f += cf * (af * f2).real
                else:
                    eu = np.exp(lf * u)
                    eT = np.exp(lf * T)
                    fpp_k = (u ** p) * eu
                    if p == 0:
                        F = lambda w, ew: ew / lf
                        G = lambda w, ew: ew / lf ** 2
                    else:
                        F = lambda w, ew: ew * (w / lf - 1 / lf ** 2)
                        G = lambda w, ew: ew * (w / lf ** 2 - 2 / lf ** 3)
                    f1 = F(T, eT) - F(u, eu)
                    f2 = t * F(T, eT) - (G(T, eT) - G(u, eu))
                    fpp += cf * (af * fpp_k).real
                    fp += cf * (af * f1).real
                    f += cf * (af * f2).real
        return {"t": t, "f": f, "f_prime": fp, "f_second": fpp}

    def _sample_extended(self, t: np.ndarray) -> dict:
        """Cancellation-proof sampling at precision sized to the term bound.

        All terms are evaluated on one shared time basis (an exact uniform
        ladder when the grid is uniform, the exact given times otherwise):
        evaluating different terms at times differing even by one float64
        ulp would smear the cancellation by bound * ulp, which is exactly
        the failure mode this path exists to avoid.  Uniform ladders advance
        each exponential by a single precomputed ratio per step.
        """
        bound = self.term_scale_bound()
        bits = max(128, int(math.log2(bound)) + 80) if math.isfinite(bound) \
            else max(256, self.precision_bits)
        n = t.size
        h_f = (t[-1] - t[0]) / (n - 1) if n > 1 else 0.0
        uniform = n > 2 and bool(np.allclose(np.diff(t), h_f, rtol=1e-9, atol=1e-18))
        out2 = np.empty(n)
        out1 = np.empty(n)
        out0 = np.empty(n)
        with mp.workprec(bits):
            T = to_mpf(self.horizon)
            if uniform:
                t0 = mp.mpf(float(t[0]))
                h = (mp.mpf(float(t[-1])) - t0) / (n - 1)
                ts = [t0 + j * h for j in range(n)]
            else:
                h = None
                ts = [mp.mpf(float(x)) for x in t]
            us = [T - tt for tt in ts]

            # global polynomial parts (degrees 1 / 2 / 3 in t)
            poly2 = [mp.mpf(0), mp.mpf(0)]
            poly1 = [mp.mpf(0), mp.mpf(0), mp.mpf(0)]
            poly0 = [mp.mpf(0), mp.mpf(0), mp.mpf(0), mp.mpf(0)]
            real_terms = []     # (C2, A2, C1, A1, C0, A0, z0, ratio, lam)
            cplx_terms = []

            for c, k in zip(self.coefficients, self.kernels):
                c = to_mpf(c)
                if c == 0:
                    continue
                for (a, p, lam) in k.exponential_parts(T):
                    lam_c = mp.mpc(lam)
                    if lam_c.imag < 0:
                        continue            # conjugate twin carries it
                    fold = 2 if lam_c.imag > 0 else 1
                    if lam_c == 0:
                        ca = c * mp.mpf(fold) * mp.re(a)
                        if p == 0:
                            poly2[0] += ca
                            poly1[1] += ca
                            poly0[2] += ca / 2
                        else:
                            poly2[0] += ca * T
                            poly2[1] -= ca
                            poly1[1] += ca * T
                            poly1[2] -= ca / 2
                            poly0[2] += ca * T / 2
                            poly0[3] -= ca / 6
                        continue
                    if lam_c.imag == 0:
                        lam_r = lam_c.real
                        ca = c * mp.re(a)
                        eT = mp.e ** (lam_r * T)
                        z0 = mp.e ** (lam_r * us[0])
                        ratio = mp.e ** (-lam_r * h) if uniform else None
                        if p == 0:
                            FT = eT / lam_r
                            GT = eT / lam_r ** 2
                            poly1[0] += ca * FT
                            poly0[1] += ca * FT
                            poly0[0] -= ca * GT
                            # f2: C2 z; f1: -(ca/lam) z; f0: +(ca/lam^2) z
                            real_terms.append((ca, mp.mpf(0), -ca / lam_r, mp.mpf(0),
                                               ca / lam_r ** 2, mp.mpf(0),
                                               z0, ratio, lam_r))
                        else:
                            FT = eT * (T / lam_r - 1 / lam_r ** 2)
                            GT = eT * (T / lam_r ** 2 - 2 / lam_r ** 3)
                            poly1[0] += ca * FT
                            poly0[1] += ca * FT
                            poly0[0] -= ca * GT
                            # f2: ca u z; f1: -(A1 u + B1) z; f0: (A0 u + B0) z
                            real_terms.append((mp.mpf(0), ca,
                                               ca / lam_r ** 2, -ca / lam_r,
                                               -2 * ca / lam_r ** 3, ca / lam_r ** 2,
                                               z0, ratio, lam_r))
                    else:
                        ca = mp.mpf(fold) * c * mp.mpc(a)
                        eT = mp.e ** (lam_c * T)
                        FT = eT / lam_c
                        GT = eT / lam_c ** 2
                        poly1[0] += mp.re(ca * FT)
                        poly0[1] += mp.re(ca * FT)
                        poly0[0] -= mp.re(ca * GT)
                        z0 = mp.e ** (lam_c * us[0])
                        ratio = mp.e ** (-lam_c * h) if uniform else None
                        cplx_terms.append((ca, -ca / lam_c, ca / lam_c ** 2,
                                           z0, ratio, lam_c))

            r_state = [term[6] for term in real_terms]
            c_state = [term[3] for term in cplx_terms]
            for j in range(n):
                tj = ts[j]
                uj = us[j]
                f2 = poly2[0] + poly2[1] * tj
                f1 = poly1[0] + (poly1[1] + poly1[2] * tj) * tj
                f0 = poly0[0] + (poly0[1] + (poly0[2] + poly0[3] * tj) * tj) * tj
                for i, (C2, A2, C1, A1, C0, A0, z0, ratio, lam_r) in enumerate(real_terms):
                    z = r_state[i] if uniform else mp.e ** (lam_r * uj)
                    if A2 == 0:
                        f2 += C2 * z
                        f1 += C1 * z
                        f0 += C0 * z
                    else:
                        uz = uj * z
                        f2 += A2 * uz
                        f1 += A1 * uz + C1 * z
                        f0 += A0 * uz + C0 * z
                    if uniform:
                        r_state[i] = z * ratio
                for i, (P, Q, R, z0, ratio, lam_c) in enumerate(cplx_terms):
                    z = c_state[i] if uniform else mp.e ** (lam_c * uj)
                    f2 += P.real * z.real - P.imag * z.imag
                    f1 += Q.real * z.real - Q.imag * z.imag
                    f0 += R.real * z.real - R.imag * z.imag
                    if uniform:
                        c_state[i] = z * ratio
                out2[j] = float(f2)
                out1[j] = float(f1)
                out0[j] = float(f0)
        return {"t": t, "f": out0, "f_prime": out1, "f_second": out2}
