"""Working-precision plumbing.

Scalars are mpmath ``mpf`` values.  A :class:`PrecisionContext` fixes the
number of significant decimal digits reported to the caller and adds guard
digits to the internal working precision.  The AIM hot loop runs on gmpy2
``mpfr`` values, so entering a context also configures gmpy2.
"""
from __future__ import annotations

import contextlib
import os
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import gmpy2
import mpmath
from mpmath import mpf

ENV_DIGITS = "SOFTCORE_AIM_DIGITS"
DEFAULT_DIGITS = 50
DEFAULT_GUARD = 10
MIN_DIGITS = 16

_BITS_PER_DIGIT = 3.3219280948873623


def default_digits() -> int:
    """Default precision, overridable through ``$SOFTCORE_AIM_DIGITS``."""
    raw = os.environ.get(ENV_DIGITS)
    if raw is None or not raw.strip():
        return DEFAULT_DIGITS
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{ENV_DIGITS} must be an integer, got {raw!r}") from None
    if value < MIN_DIGITS:
        raise ValueError(f"{ENV_DIGITS} must be at least {MIN_DIGITS}, got {value}")
    return value


@dataclass(frozen=True)
class PrecisionContext:
    digits: int = DEFAULT_DIGITS
    guard_digits: int = DEFAULT_GUARD

    def __post_init__(self):
        if int(self.digits) != self.digits or self.digits < MIN_DIGITS:
            raise ValueError(f"digits must be an integer >= {MIN_DIGITS}, got {self.digits}")
        if int(self.guard_digits) != self.guard_digits or self.guard_digits < 0:
            raise ValueError(f"guard_digits must be a non-negative integer, got {self.guard_digits}")

    @classmethod
    def from_env(cls, guard_digits: int = DEFAULT_GUARD) -> "PrecisionContext":
        return cls(default_digits(), guard_digits)

    @property
    def working_digits(self) -> int:
        return self.digits + self.guard_digits

    @property
    def working_bits(self) -> int:
        return int(self.working_digits * _BITS_PER_DIGIT) + 8

    @property
    def eps(self) -> mpf:
        """Relative resolution of the reported digits."""
        return mpf(10) ** (-self.digits)

    @contextlib.contextmanager
    def activate(self):
        """Run a block at the working precision (mpmath and gmpy2)."""
        with mpmath.workdps(self.working_digits):
            with gmpy2.context(gmpy2.get_context(), precision=self.working_bits):
                yield self

    @property
    def default_tol(self) -> mpf:
        """Agreement required between successive N: 20 digits short of ``digits``, but never more than half of them."""
        return mpf(10) ** -(self.digits - min(20, self.digits // 2))

    def fmt(self, x, digits: int | None = None) -> str:
        """Decimal string with ``digits`` significant figures (default: reported digits)."""
        return to_decimal(x, self.digits if digits is None else digits)


def to_mpf(x) -> mpf:
    """Convert ints, Fractions, decimal strings, floats, gmpy2 values to ``mpf``."""
    if isinstance(x, mpf):
        return x
    if isinstance(x, (Fraction, Rational)) and not isinstance(x, int):
        return mpf(x.numerator) / x.denominator
    if isinstance(x, type(gmpy2.mpfr(0))):
        man, exp = x.as_mantissa_exp()
        return mpmath.ldexp(mpf(int(man)), int(exp))
    if isinstance(x, type(gmpy2.mpq(0))):
        return mpf(int(x.numerator)) / int(x.denominator)
    return mpf(x)


def to_fraction(x) -> Fraction:
    """Exact rational value of an int, Fraction, mpf or mpfr (binary floats are dyadic)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, type(gmpy2.mpfr(0))):
        n, d = x.as_integer_ratio()
        return Fraction(int(n), int(d))
    sign, man, exp, _ = to_mpf(x)._mpf_
    if not man:
        return Fraction(0)
    v = Fraction(int(man) << exp) if exp >= 0 else Fraction(int(man), 1 << -exp)
    return -v if sign else v


def to_mpfr(x):
    """Convert to gmpy2 ``mpfr``: exact for mpf input, one rounding for a Fraction."""
    if isinstance(x, Fraction):
        return gmpy2.mpfr(gmpy2.mpq(x.numerator, x.denominator))
    x = to_mpf(x)
    sign, man, exp, _ = x._mpf_
    if not man:
        return gmpy2.mpfr(0)
    value = gmpy2.mul_2exp(gmpy2.mpfr(gmpy2.mpz(man)), exp)
    return -value if sign else value


def to_decimal(x, digits: int) -> str:
    """Decimal string of ``x`` with ``digits`` significant figures, no exponent for moderate values."""
    x = to_mpf(x)
    if x == 0:
        return "0." + "0" * (digits - 1) if digits > 1 else "0"
    s = mpmath.nstr(x, digits, strip_zeros=False, min_fixed=-8, max_fixed=digits + 1)
    return s


def from_decimal(s: str) -> mpf:
    return mpf(s)
