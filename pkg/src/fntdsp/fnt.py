"""Radix-2 transforms over a Fermat modulus and fast cyclic convolution.

Transforms are decimation-in-time with an explicit bit-reversal
pre-permutation.  All twiddles are powers of the radix (2 or sqrt(2)),
i.e. shift-add realizable, so the butterflies contribute zero general
multiplications; only the pointwise products of the convolution routines
are counted.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .complexity import COUNTER
from .fermat import (FermatParams, decode_signed_array, encode_signed_array)


class InvalidPlanError(ValueError):
    """Radix/modulus/length triple does not support a radix-2 transform."""


def _bit_reverse_permutation(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def _stage_twiddles(root: int, n: int, F: int) -> list[np.ndarray]:
    """Per-stage twiddle tables root^(j * n / 2^(s+1)), j < 2^s."""
    tables = []
    stages = n.bit_length() - 1
    for s in range(stages):
        half = 1 << s
        step = n >> (s + 1)
        tables.append(np.array([pow(root, j * step, F) for j in range(half)],
                               dtype=np.int64))
    return tables


@dataclass(frozen=True)
class TransformPlan:
    """Validated (modulus, radix, length) triple with precomputed schedule."""

    params: FermatParams
    n: int
    alpha: int
    alpha_inv: int
    n_inv: int
    bitrev: np.ndarray = field(repr=False)
    fwd_twiddles: tuple = field(repr=False)
    inv_twiddles: tuple = field(repr=False)


def make_plan(params: FermatParams, alpha: int, n: int) -> TransformPlan:
    """Validate that alpha has order exactly n mod F and precompute tables."""
    F = params.F
    if n < 2 or n & (n - 1):
        raise InvalidPlanError(f"length must be a power of two >= 2, got {n}")
    if not 0 < alpha < F:
        raise InvalidPlanError(f"radix {alpha} is not a canonical nonzero residue")
    if pow(alpha, n, F) != 1:
        raise InvalidPlanError(
            f"radix {alpha} does not satisfy alpha^{n} = 1 (mod {F})")
    if pow(alpha, n // 2, F) != F - 1:
        raise InvalidPlanError(
            f"radix {alpha} has order < {n} mod {F} (alpha^{n // 2} != -1)")
    alpha_inv = pow(alpha, -1, F)
    return TransformPlan(
        params=params,
        n=n,
        alpha=alpha,
        alpha_inv=alpha_inv,
        n_inv=pow(n, -1, F),
        bitrev=_bit_reverse_permutation(n),
        fwd_twiddles=tuple(_stage_twiddles(alpha, n, F)),
        inv_twiddles=tuple(_stage_twiddles(alpha_inv, n, F)),
    )


def _butterflies(plan: TransformPlan, x: np.ndarray,
                 twiddles: tuple) -> np.ndarray:
    F = plan.params.F
    a = np.asarray(x, dtype=np.int64)
    if a.shape[-1] != plan.n:
        raise ValueError(f"expected length {plan.n}, got {a.shape[-1]}")
    lead = a.shape[:-1]
    a = a[..., plan.bitrev]
    for tw in twiddles:
        half = tw.shape[0]
        a = a.reshape(*lead, -1, 2, half)
        u = a[..., 0, :]
        v = (a[..., 1, :] * tw) % F  # twiddle = power of the radix: shift-add
        out = np.empty_like(a)
        out[..., 0, :] = (u + v) % F
        out[..., 1, :] = (u - v) % F
        a = out.reshape(*lead, plan.n)
    return a


def fnt(plan: TransformPlan, x: np.ndarray) -> np.ndarray:
    """Forward transform of residue vectors along the last axis."""
    return _butterflies(plan, x, plan.fwd_twiddles)


def ifnt(plan: TransformPlan, X: np.ndarray) -> np.ndarray:
    """Inverse transform; the 1/n factor is a power-of-two inverse."""
    a = _butterflies(plan, X, plan.inv_twiddles)
    return (a * plan.n_inv) % plan.params.F


def cyclic_convolve_real(plan: TransformPlan, x: np.ndarray,
                         h: np.ndarray) -> np.ndarray:
    """Residue-domain cyclic convolution: one general product per bin."""
    F = plan.params.F
    X = fnt(plan, x)
    H = fnt(plan, h)
    P = (X * H) % F
    COUNTER.add(P.size)
    return ifnt(plan, P)


def cyclic_convolve_complex(plan: TransformPlan,
                            x_re: np.ndarray, x_im: np.ndarray,
                            y_re: np.ndarray, y_im: np.ndarray
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Complex cyclic convolution with two general products per bin.

    2^(b/2) squares to -1 mod F and plays the imaginary unit, so the
    complex product collapses to the two real products
    (X + jX')(Y + jY') and (X - jX')(Y - jY'); sums/differences of those
    recover the real and imaginary convolution outputs after scaling by
    power-of-two inverses.
    """
    p = plan.params
    q = p.b
    if q < 2:
        raise ValueError(f"complex decomposition needs b >= 2, got b={q}")
    F = p.F
    j = 1 << (q // 2)
    Xr, Xi = fnt(plan, x_re), fnt(plan, x_im)
    Yr, Yi = fnt(plan, y_re), fnt(plan, y_im)
    a_plus = (Xr + j * Xi) % F
    a_minus = (Xr - j * Xi) % F
    b_plus = (Yr + j * Yi) % F
    b_minus = (Yr - j * Yi) % F
    u_plus = (a_plus * b_plus) % F
    u_minus = (a_minus * b_minus) % F
    COUNTER.add(u_plus.size + u_minus.size)
    s = (u_plus + u_minus) % F
    d = (u_plus - u_minus) % F
    c_re = (F - pow(2, q - 1, F)) % F        # -2^(q-1) = 2^-1 (mod F)
    c_im = (F - pow(2, q // 2 - 1, F)) % F   # -(2^(q/2+1))^-1 (mod F)
    z_re = (ifnt(plan, s) * c_re) % F
    z_im = (ifnt(plan, d) * c_im) % F
    return z_re, z_im


def convolve_signed_real(plan: TransformPlan, x: np.ndarray,
                         h: np.ndarray) -> np.ndarray:
    """Cyclic convolution of signed integer sequences, exact within budget."""
    p = plan.params
    xr = encode_signed_array(x, p)
    hr = encode_signed_array(h, p)
    return decode_signed_array(cyclic_convolve_real(plan, xr, hr), p)


def convolve_signed_complex(plan: TransformPlan,
                            x_re: np.ndarray, x_im: np.ndarray,
                            y_re: np.ndarray, y_im: np.ndarray
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Complex cyclic convolution of signed sequences, exact within budget."""
    p = plan.params
    zr, zi = cyclic_convolve_complex(
        plan,
        encode_signed_array(x_re, p), encode_signed_array(x_im, p),
        encode_signed_array(y_re, p), encode_signed_array(y_im, p))
    return decode_signed_array(zr, p), decode_signed_array(zi, p)


def default_plans() -> dict[str, TransformPlan]:
    """The three shipped plans: golden mod-17 8-point, equalizer 32, dispersion 64."""
    from .fermat import sqrt2
    f17 = FermatParams(2)
    f65537 = FermatParams(4)
    return {
        "mod17": make_plan(f17, 2, 8),
        "aeq32": make_plan(f65537, 2, 32),
        "cdc64": make_plan(f65537, sqrt2(f65537), 64),
    }
