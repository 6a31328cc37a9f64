"""Arbitrary-precision float support.

Thin wrapper around mpmath.  Every public evaluation routine in this
package takes a decimal-digit count `digits`; internally we compute
with GUARD_DIGITS extra digits and round once at the end, so results
carry a relative error below about 10**-(digits-2), comfortably inside
the contract that values at precision P and P+64 bits agree to a
relative 2**(8-P).

The process-wide default is 128 decimal digits; the CLI can override it
through the LGF_PREC environment variable.
"""

from __future__ import annotations

import contextlib
from fractions import Fraction

import mpmath as mp

DEFAULT_DIGITS = 128
GUARD_DIGITS = 12


@contextlib.contextmanager
def working_digits(digits: int):
    """mpmath context at `digits` + guard decimal digits."""
    if digits < 1:
        raise ValueError("digits must be positive")
    with mp.workdps(digits + GUARD_DIGITS):
        yield mp


def to_mpf(x: Fraction | int, digits: int = DEFAULT_DIGITS) -> mp.mpf:
    """Exact rational -> float at the requested precision."""
    with working_digits(digits):
        if isinstance(x, Fraction):
            return mp.mpf(x.numerator) / mp.mpf(x.denominator)
        return mp.mpf(x)


def nstr(x, digits: int) -> str:
    with mp.workdps(digits + 2):
        return mp.nstr(x, digits, strip_zeros=False)


def agm(a, b):
    """Arithmetic-geometric mean at the current mpmath precision.

    Quadratic convergence; iterate until the pair coincides to working
    precision.  Both arguments must be positive.
    """
    a = mp.mpf(a)
    b = mp.mpf(b)
    if a <= 0 or b <= 0:
        raise ValueError("agm needs positive arguments")
    eps = mp.mpf(2) ** (-mp.mp.prec + 4)
    while abs(a - b) > eps * a:
        a, b = (a + b) / 2, mp.sqrt(a * b)
    return (a + b) / 2
