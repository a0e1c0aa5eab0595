"""Exact arithmetic modulo a Fermat number F = 2^b + 1, b = 2^t.

All structural operations (reduction, powers of two, the square root of
two) are expressible as shifts, adds and folds via the identity
2^b = -1 (mod F).  Only the general product `mul` is a true multiplier
and is the thing the cost model counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .complexity import COUNTER

#: Fermat indices with prime F (the only supported moduli).
PRIME_FERMAT_INDICES = (0, 1, 2, 3, 4)


@dataclass(frozen=True)
class FermatParams:
    """Modulus description F = 2^(2^t) + 1 for a prime Fermat number."""

    t: int

    def __post_init__(self) -> None:
        if self.t not in PRIME_FERMAT_INDICES:
            raise ValueError(f"t must be in {PRIME_FERMAT_INDICES}, got {self.t}")

    @property
    def b(self) -> int:
        """Exponent b = 2^t; also the word size of a residue minus one."""
        return 1 << self.t

    @property
    def F(self) -> int:
        return (1 << self.b) + 1

    @property
    def half(self) -> int:
        """(F - 1) / 2, the largest encodable signed magnitude."""
        return (self.F - 1) // 2


@lru_cache(maxsize=None)
def for_modulus(F: int) -> FermatParams:
    for t in PRIME_FERMAT_INDICES:
        p = FermatParams(t)
        if p.F == F:
            return p
    raise ValueError(f"{F} is not a supported (prime) Fermat number")


def reduce(v: int, p: FermatParams) -> int:
    """v mod F for 0 <= v < F^2, by folding the high half with 2^b = -1."""
    assert 0 <= v < p.F * p.F
    lo = v & ((1 << p.b) - 1)
    hi = v >> p.b
    r = lo - hi
    if r < 0:
        r += p.F
    if r < 0:
        r += p.F
    return r


def encode_signed(v: int, p: FermatParams) -> int:
    if abs(v) > p.half:
        raise ValueError(f"|{v}| exceeds the encodable range {p.half}")
    return v if v >= 0 else p.F + v


def decode_signed(r: int, p: FermatParams) -> int:
    return r if r <= p.half else r - p.F


def add(a: int, b: int, p: FermatParams) -> int:
    s = a + b
    return s - p.F if s >= p.F else s


def sub(a: int, b: int, p: FermatParams) -> int:
    s = a - b
    return s + p.F if s < 0 else s


def neg(a: int, p: FermatParams) -> int:
    return 0 if a == 0 else p.F - a


def mul(a: int, b: int, p: FermatParams) -> int:
    """General product; the only counted operation in the cost model."""
    COUNTER.add(1)
    return reduce(a * b, p)


def mul_pow2(a: int, s: int, p: FermatParams) -> int:
    """a * 2^s mod F using shifts and folds only; s may be negative.

    2 has order 2b (2^b = -1), so the exponent is taken mod 2b and the
    upper half of the range contributes a sign flip.
    """
    e = s % (2 * p.b)
    if e >= p.b:
        return neg(reduce(a << (e - p.b), p), p)
    return reduce(a << e, p)


def sqrt2(p: FermatParams) -> int:
    """The square root of two 2^(b/4) * (2^(b/2) - 1) mod F; needs b >= 4."""
    if p.b < 4:
        raise ValueError(f"sqrt(2) construction needs b >= 4, got b={p.b}")
    r = (1 << (p.b // 4)) * ((1 << (p.b // 2)) - 1) % p.F
    assert r * r % p.F == 2
    return r


# Vectorized helpers used by the transform and convolution layers.
# Arrays hold canonical residues in int64; products of two residues of
# F_4 stay below 2^34 so int64 intermediate precision is exact.

def encode_signed_array(v: np.ndarray, p: FermatParams) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64)
    if np.any(np.abs(v) > p.half):
        raise ValueError("input exceeds the encodable signed range")
    return np.where(v >= 0, v, v + p.F).astype(np.int64)


def decode_signed_array(r: np.ndarray, p: FermatParams) -> np.ndarray:
    r = np.asarray(r, dtype=np.int64)
    return np.where(r <= p.half, r, r - p.F).astype(np.int64)
