"""Exact Gaussian-rational coefficients with a symbolic power of mu^2."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

Number = Union[int, Fraction, "ExactCoeff"]


def _frac(x: int | Fraction | str) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True, order=True)
class ExactCoeff:
    """The value ``(re + i*im) * mu**(2*mu_exp)``."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)
    mu_exp: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "re", _frac(self.re))
        object.__setattr__(self, "im", _frac(self.im))
        if self.mu_exp < 0:
            raise ValueError("mu_exp must be nonnegative")

    @classmethod
    def one(cls) -> ExactCoeff:
        return cls(Fraction(1))

    @classmethod
    def i_power(cls, n: int) -> ExactCoeff:
        return [cls(1), cls(0, 1), cls(-1), cls(0, -1)][n % 4]

    @classmethod
    def coerce(cls, x: Number) -> ExactCoeff:
        if isinstance(x, ExactCoeff):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(Fraction(x))
        raise TypeError(f"cannot coerce {type(x).__name__} to ExactCoeff")

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __add__(self, other: Number) -> ExactCoeff:
        o = ExactCoeff.coerce(other)
        if o.is_zero():
            return self
        if self.is_zero():
            return o
        if o.mu_exp != self.mu_exp:
            raise ValueError("cannot add coefficients with different powers of mu")
        return ExactCoeff(self.re + o.re, self.im + o.im, self.mu_exp)

    __radd__ = __add__

    def __neg__(self) -> ExactCoeff:
        return ExactCoeff(-self.re, -self.im, self.mu_exp)

    def __sub__(self, other: Number) -> ExactCoeff:
        return self + (-ExactCoeff.coerce(other))

    def __mul__(self, other: Number) -> ExactCoeff:
        o = ExactCoeff.coerce(other)
        return ExactCoeff(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
            self.mu_exp + o.mu_exp,
        )

    __rmul__ = __mul__

    def conjugate(self) -> ExactCoeff:
        return ExactCoeff(self.re, -self.im, self.mu_exp)

    def to_complex(self, mu: float = 1.0) -> complex:
        return complex(float(self.re), float(self.im)) * mu ** (2 * self.mu_exp)

    def __str__(self) -> str:
        return format_coeff(self)


def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_coeff(c: ExactCoeff) -> str:
    """Render as ``3/2``, ``-i``, ``2i`` or ``(1/2+3i)``, with an optional ``mu^m`` suffix."""
    if c.im == 0:
        body = _fmt_q(c.re)
    elif c.re == 0:
        body = {1: "i", -1: "-i"}.get(c.im) or f"{_fmt_q(c.im)}i"
    else:
        sign = "+" if c.im > 0 else "-"
        body = f"({_fmt_q(c.re)}{sign}{_fmt_q(abs(c.im))}i)"
    if c.mu_exp:
        body += f" mu^{2 * c.mu_exp}"
    return body
