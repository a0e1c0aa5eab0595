"""Quantization, overflow budgeting and the 14-bit -> 2x7-bit tap split.

The overflow budget bounds every cyclic-convolution output by
max|signal| * sum(|taps|) (only nonzero taps count: linear-via-circular
convolution zero-pads, which relaxes the constraint).  A configuration
passes when that bound fits the signed range (F - 1) / 2 of the modulus;
complex convolution doubles the bound because the real output is a
difference of two real convolutions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fermat import FermatParams


@dataclass(frozen=True)
class QuantSpec:
    """Signed symmetric quantizer: bit_width total bits, physical scale."""

    bit_width: int
    scale: float

    def __post_init__(self) -> None:
        if self.bit_width < 2:
            raise ValueError("bit_width must be >= 2")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def max_int(self) -> int:
        return (1 << (self.bit_width - 1)) - 1


@dataclass
class QuantizedBlock:
    re: np.ndarray
    im: np.ndarray | None
    spec: QuantSpec
    n_clipped: int = 0

    @property
    def clip_fraction(self) -> float:
        n = self.re.size + (self.im.size if self.im is not None else 0)
        return self.n_clipped / n if n else 0.0


def _round_half_away(x: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize_real(samples: np.ndarray, spec: QuantSpec) -> tuple[np.ndarray, int]:
    """Round-to-nearest (ties away from zero), clip to +-max_int."""
    v = _round_half_away(np.asarray(samples, dtype=float) * spec.scale)
    clipped = int(np.count_nonzero(np.abs(v) > spec.max_int))
    v = np.clip(v, -spec.max_int, spec.max_int)
    return v.astype(np.int64), clipped


def quantize(samples: np.ndarray, spec: QuantSpec) -> QuantizedBlock:
    """Quantize a complex (or real) sample block; clipping is reported."""
    samples = np.asarray(samples)
    if np.iscomplexobj(samples):
        re, c_re = quantize_real(samples.real, spec)
        im, c_im = quantize_real(samples.imag, spec)
        return QuantizedBlock(re, im, spec, c_re + c_im)
    re, c_re = quantize_real(samples, spec)
    return QuantizedBlock(re, None, spec, c_re)


def dequantize(block: QuantizedBlock) -> np.ndarray:
    if block.im is None:
        return block.re / block.spec.scale
    return (block.re + 1j * block.im) / block.spec.scale


@dataclass
class BudgetReport:
    """Outcome of the convolution overflow check against (F - 1) / 2."""

    bound: int
    limit: int
    complex_mode: bool
    passed: bool = field(init=False)
    margin: int = field(init=False)

    def __post_init__(self) -> None:
        self.passed = self.bound <= self.limit
        self.margin = self.limit - self.bound

    def __str__(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        kind = "complex" if self.complex_mode else "real"
        return (f"overflow budget [{kind}]: bound {self.bound} vs limit "
                f"{self.limit} -> {verdict} (margin {self.margin})")


def check_overflow(tap_mags, sig_spec: QuantSpec, p: FermatParams,
                   complex_mode: bool = False) -> BudgetReport:
    """Worst-case convolution magnitude vs the signed range of the modulus."""
    mags = np.abs(np.asarray(tap_mags, dtype=np.int64))
    bound = int(sig_spec.max_int * mags.sum())
    if complex_mode:
        bound *= 2
    return BudgetReport(bound=bound, limit=p.half, complex_mode=complex_mode)


@dataclass
class SplitTaps:
    """Sign-magnitude split of wide taps into two 7-bit groups.

    128 * high + low reproduces the wide tap exactly; the sign is applied
    to both groups so each group stays within a signed 7-bit budget.
    """

    high: np.ndarray
    low: np.ndarray

    def recombined(self) -> np.ndarray:
        return (self.high << 7) + self.low


GROUP_BITS = 7
TAP_MAG_BITS = 14


def split_taps(w: np.ndarray) -> SplitTaps:
    w = np.asarray(w, dtype=np.int64)
    if np.any(np.abs(w) >= 1 << TAP_MAG_BITS):
        raise ValueError(f"tap magnitude must be < 2^{TAP_MAG_BITS}")
    sign = np.sign(w)
    mag = np.abs(w)
    return SplitTaps(high=sign * (mag >> GROUP_BITS),
                     low=sign * (mag & ((1 << GROUP_BITS) - 1)))


def recombine(conv_high: np.ndarray, conv_low: np.ndarray) -> np.ndarray:
    """Weighted sum of the per-group convolutions: 2^7 * high + low."""
    return ((np.asarray(conv_high, dtype=np.int64) << GROUP_BITS)
            + np.asarray(conv_low, dtype=np.int64))
