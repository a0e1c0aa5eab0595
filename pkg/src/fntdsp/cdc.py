"""Chromatic dispersion compensation: residue-domain overlap-save engine
plus floating-point frequency-domain and time-domain baselines.

The 64-point engine runs 50% overlap-save with the complex two-product
decomposition, so each block costs exactly 2 general multiplications per
frequency bin.  The float baselines share the same tap design and output
alignment and double as oracles for the quantized path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .complexity import COUNTER
from .fermat import FermatParams, decode_signed_array, encode_signed_array
from .fixedpoint import BudgetReport, QuantSpec, check_overflow, quantize
from .fnt import TransformPlan, default_plans, fnt, ifnt

SPEED_OF_LIGHT = 299792458.0


class BudgetError(ValueError):
    """Configuration would overflow the convolution budget."""


@dataclass
class CdcConfig:
    z_km: float
    fs_hz: float
    dispersion_ps_nm_km: float = 17.0
    wavelength_nm: float = 1550.0
    n_taps: int = 32
    tap_bits: int = 6
    block_n: int = 64
    scheme: str = "fnt"  # fnt | fd-float | td-float

    def __post_init__(self) -> None:
        if self.n_taps > self.block_n // 2 + 1:
            raise ValueError(
                f"n_taps={self.n_taps} exceeds overlap-save validity "
                f"{self.block_n // 2 + 1} for block_n={self.block_n}")

    @property
    def accumulated_dispersion(self) -> float:
        """D * lambda^2 * z / c in s^2 (group-delay curvature)."""
        d_si = self.dispersion_ps_nm_km * 1e-6
        lam = self.wavelength_nm * 1e-9
        return d_si * lam * lam * (self.z_km * 1e3) / SPEED_OF_LIGHT


def required_taps(cfg: CdcConfig) -> int:
    """Full-band tap-count estimate for complete dispersion coverage."""
    n = cfg.accumulated_dispersion * cfg.fs_hz ** 2
    return 2 * int(n / 2) + 1


def design_cd_taps(cfg: CdcConfig) -> np.ndarray:
    """Truncated inverse-dispersion all-pass impulse response.

    Constant-modulus quadratic-phase chirp sampled at the working rate,
    centered on index n_taps // 2 and energy-normalized to 1.  The
    channel convention is exp(-j pi lambda^2 D z f^2 / c); these taps
    apply the conjugate.
    """
    h = np.zeros(cfg.n_taps, dtype=complex)
    c = cfg.n_taps // 2
    if cfg.z_km == 0:
        h[c] = 1.0
        return h
    acc = cfg.accumulated_dispersion
    t = (np.arange(cfg.n_taps) - c) / cfg.fs_hz
    h = np.exp(-1j * math.pi * t * t / acc)
    return h / np.linalg.norm(h)


def quantize_taps(taps: np.ndarray, bits: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Quantize complex taps on a power-of-two scale filling the grid."""
    max_int = (1 << (bits - 1)) - 1
    peak = max(np.abs(taps.real).max(), np.abs(taps.imag).max())
    scale = 2.0 ** math.floor(math.log2(max_int / peak))
    blk = quantize(taps, QuantSpec(bits, scale))
    return blk.re, blk.im, scale


def _overlap_save_blocks(x: np.ndarray, block_n: int) -> np.ndarray:
    """Strided (n_blocks, block_n) view with 50% overlap and zero lead-in."""
    hop = block_n // 2
    n_blocks = -(-(len(x) + hop) // hop)  # enough to cover len(x)+hop outputs
    padded = np.zeros(hop + n_blocks * hop + hop, dtype=x.dtype)
    padded[hop:hop + len(x)] = x
    return sliding_window_view(padded, block_n)[::hop][:n_blocks]


@dataclass
class FntCdcEngine:
    """Residue-domain overlap-save dispersion equalizer for one polarization."""

    config: CdcConfig
    sig_spec: QuantSpec
    plan: TransformPlan = None
    taps: np.ndarray = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.plan is None:
            self.plan = default_plans()["cdc64"]
        if self.plan.n != self.config.block_n:
            raise ValueError("plan length does not match block_n")
        if self.taps is None:
            self.taps = design_cd_taps(self.config)
        self.tap_re, self.tap_im, self.tap_scale = quantize_taps(
            self.taps, self.config.tap_bits)
        self.budget = check_overflow(
            np.maximum(np.abs(self.tap_re), np.abs(self.tap_im)),
            self.sig_spec, self.plan.params, complex_mode=True)
        if not self.budget.passed:
            raise BudgetError(str(self.budget))
        self.support_warning = self.config.n_taps < required_taps(self.config)
        self._cache_tap_spectra()

    def _cache_tap_spectra(self) -> None:
        p = self.plan.params
        F = p.F
        j = 1 << (p.b // 2)
        hr = np.zeros(self.plan.n, dtype=np.int64)
        hi = np.zeros(self.plan.n, dtype=np.int64)
        hr[:self.config.n_taps] = self.tap_re
        hi[:self.config.n_taps] = self.tap_im
        Hr = fnt(self.plan, encode_signed_array(hr, p))
        Hi = fnt(self.plan, encode_signed_array(hi, p))
        self._b_plus = (Hr + j * Hi) % F
        self._b_minus = (Hr - j * Hi) % F

    @property
    def output_scale(self) -> float:
        return self.sig_spec.scale * self.tap_scale

    def _convolve_blocks(self, xr: np.ndarray, xi: np.ndarray
                         ) -> tuple[np.ndarray, np.ndarray]:
        """Cyclic complex convolution of (..., n) blocks with the cached taps."""
        p = self.plan.params
        F, q = p.F, p.b
        j = 1 << (q // 2)
        Xr = fnt(self.plan, encode_signed_array(xr, p))
        Xi = fnt(self.plan, encode_signed_array(xi, p))
        u_plus = (((Xr + j * Xi) % F) * self._b_plus) % F
        u_minus = (((Xr - j * Xi) % F) * self._b_minus) % F
        COUNTER.add(u_plus.size + u_minus.size)
        c_re = (F - pow(2, q - 1, F)) % F
        c_im = (F - pow(2, q // 2 - 1, F)) % F
        z_re = (ifnt(self.plan, (u_plus + u_minus) % F) * c_re) % F
        z_im = (ifnt(self.plan, (u_plus - u_minus) % F) * c_im) % F
        return decode_signed_array(z_re, p), decode_signed_array(z_im, p)

    def process_block(self, xr: np.ndarray, xi: np.ndarray
                      ) -> tuple[np.ndarray, np.ndarray]:
        """One 64-sample block in, the 32 valid (newest) samples out."""
        hop = self.plan.n // 2
        zr, zi = self._convolve_blocks(np.asarray(xr), np.asarray(xi))
        return zr[hop:], zi[hop:]

    def process_int(self, xr: np.ndarray, xi: np.ndarray
                    ) -> tuple[np.ndarray, np.ndarray]:
        """Full stream, integer output aligned with the input (delay removed)."""
        hop = self.plan.n // 2
        with COUNTER.scope("cdc-fnt"):
            zr, zi = self._convolve_blocks(_overlap_save_blocks(xr, self.plan.n),
                                           _overlap_save_blocks(xi, self.plan.n))
        yr = zr[:, hop:].reshape(-1)
        yi = zi[:, hop:].reshape(-1)
        c = self.config.n_taps // 2
        return yr[c:c + len(xr)], yi[c:c + len(xr)]

    def process(self, xr: np.ndarray, xi: np.ndarray) -> np.ndarray:
        """Full stream, rescaled to physical (float) complex samples."""
        yr, yi = self.process_int(xr, xi)
        return (yr + 1j * yi) / self.output_scale


def fd_cdc_float(x: np.ndarray, cfg: CdcConfig,
                 taps: np.ndarray | None = None) -> np.ndarray:
    """Floating-point FFT overlap-save baseline, same blocking and alignment."""
    if taps is None:
        taps = design_cd_taps(cfg)
    n = cfg.block_n
    hop = n // 2
    H = np.fft.fft(np.concatenate([taps, np.zeros(n - len(taps))]))
    blocks = _overlap_save_blocks(np.asarray(x, dtype=complex), n)
    with COUNTER.scope("cdc-fd"):
        Y = np.fft.fft(blocks, axis=-1) * H
        y = np.fft.ifft(Y, axis=-1)[:, hop:].reshape(-1)
        # 2 transforms/block at 4 * (N/2) log2 N real mults + 4N pointwise
        COUNTER.add(len(blocks) * (2 * 2 * n * int(math.log2(n)) + 4 * n))
    c = cfg.n_taps // 2
    return y[c:c + len(x)]


def td_cdc_float(x: np.ndarray, cfg: CdcConfig,
                 taps: np.ndarray | None = None) -> np.ndarray:
    """Direct FIR baseline (half-length taps in the scheme comparison)."""
    if taps is None:
        taps = design_cd_taps(cfg)
    with COUNTER.scope("cdc-td"):
        y = np.convolve(np.asarray(x, dtype=complex), taps)
        COUNTER.add(4 * len(taps) * len(x))
    c = len(taps) // 2
    return y[c:c + len(x)]


def save_taps(path, tap_re: np.ndarray, tap_im: np.ndarray, scale: float) -> None:
    with open(path, "w") as f:
        f.write(f"# scale {scale!r}\n")
        for r, i in zip(tap_re, tap_im):
            f.write(f"{int(r)} {int(i)}\n")


def load_taps(path) -> tuple[np.ndarray, np.ndarray, float]:
    scale = 1.0
    re, im = [], []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line.startswith("# scale"):
                scale = float(line.split()[-1])
            elif line:
                a, b = line.split()
                re.append(int(a))
                im.append(int(b))
    return np.array(re, dtype=np.int64), np.array(im, dtype=np.int64), scale
