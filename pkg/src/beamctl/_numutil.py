"""Exact-rational and extended-precision helpers shared across modules."""
from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Optional, Union

import mpmath as mp

RealLike = Union[int, float, str, Fraction]


def as_fraction(x: RealLike, what: str = "value") -> Fraction:
    """Exact Fraction from int, Fraction, decimal/rational string, or float.

    Floats are dyadic rationals, so the conversion is exact for the supplied
    representation; decimal strings like "2.5" parse exactly.
    """
    if isinstance(x, bool):
        raise TypeError(f"{what} must be numeric, got bool")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse {what} from {x!r}") from exc
    raise TypeError(f"{what} must be int, float, str or Fraction, got {type(x).__name__}")


def rational_sqrt(q: Fraction) -> Optional[Fraction]:
    """Exact square root of a nonnegative rational, or None if irrational."""
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def to_mpf(x) -> mp.mpf:
    """Convert to mpf at the current working precision (Fractions exactly rounded)."""
    if isinstance(x, Fraction):
        return mp.mpf(x.numerator) / mp.mpf(x.denominator)
    return mp.mpf(x)


def strip_imag(z, precision_bits: int, scale=None):
    """Drop an imaginary residue known to be roundoff; object if it is not.

    `scale` defaults to max(1, |Re z|).  A residue above 2^(-precision_bits/2)
    relative indicates a real algebra bug upstream, so it raises.
    """
    if not isinstance(z, mp.mpc):
        return mp.mpf(z)
    re, im = z.real, z.imag
    ref = scale if scale is not None else max(mp.mpf(1), abs(re))
    if abs(im) > ref * mp.mpf(2) ** (-(precision_bits // 2)):
        raise ArithmeticError(
            f"imaginary residue {mp.nstr(im, 8)} exceeds the roundoff budget "
            f"(scale {mp.nstr(ref, 8)}, {precision_bits} bits)"
        )
    return re


def decimal_str(x, precision_bits: int) -> str:
    """Deterministic decimal string carrying the full working precision."""
    dps = max(17, int(precision_bits * 0.30103) + 2)
    return mp.nstr(mp.mpf(x), dps)


def ulp_close(a, b, ulps: int = 10) -> bool:
    """|a - b| within `ulps` units in the last place at current precision."""
    a, b = mp.mpf(a), mp.mpf(b)
    scale = max(abs(a), abs(b), mp.mpf(2) ** (-mp.mp.prec))
    return abs(a - b) <= ulps * scale * mp.mpf(2) ** (-mp.mp.prec)
