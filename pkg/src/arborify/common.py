"""Shared vocabulary: models, integer frequency vectors and error types."""

from __future__ import annotations

from enum import Enum
from typing import Iterable, Sequence

Freq = tuple[int, ...]


class Model(str, Enum):
    NLS = "nls"
    WAVE = "wave"

    @classmethod
    def parse(cls, value: "Model | str") -> Model:
        if isinstance(value, Model):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown model {value!r}; expected 'nls' or 'wave'") from None


class ArborifyError(Exception):
    """Base class for domain errors."""


class KirchhoffError(ArborifyError):
    """Inner frequency does not match the signed sum over its children."""


class DecorationError(ArborifyError):
    """Edge decoration is not admissible at its position."""


class PairingError(ArborifyError):
    """Pairing is malformed or not valid for the model."""


class ResourceError(ArborifyError):
    """A combinatorial enumeration exceeds its size guard."""


def freq(*xs: int | Sequence[int]) -> Freq:
    """Build a frequency from ints or a single sequence: ``freq(1, 0)`` or ``freq([1, 0])``."""
    if len(xs) == 1 and not isinstance(xs[0], int):
        return tuple(int(x) for x in xs[0])
    return tuple(int(x) for x in xs)  # type: ignore[arg-type]


def fadd(a: Freq, b: Freq) -> Freq:
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {a} vs {b}")
    return tuple(x + y for x, y in zip(a, b))


def fneg(a: Freq) -> Freq:
    return tuple(-x for x in a)


def fsum(terms: Iterable[tuple[int, Freq]], d: int) -> Freq:
    """Signed sum of ``(sign, freq)`` pairs."""
    out = [0] * d
    for s, f in terms:
        if len(f) != d:
            raise ValueError(f"dimension mismatch: expected {d}, got {f}")
        for j, x in enumerate(f):
            out[j] += s * x
    return tuple(out)


def conj_sign(c: int) -> int:
    return -1 if c else 1


def norm2(f: Freq) -> int:
    return sum(x * x for x in f)
