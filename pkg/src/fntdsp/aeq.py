"""4x4 real-valued MIMO radially-directed equalizer.

Forward filtering runs in the residue domain: each of the 16 real FIR
filters is split into two 7-bit groups, convolved per 32-point block
with 50% overlap-save, and recombined as 128 * high + low, which is
bit-exact against a wide-integer time-domain filter.  Tap adaptation is
ordinary high-precision arithmetic, block-accumulated, then requantized
to 14-bit sign-magnitude and re-split.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit
from numpy.lib.stride_tricks import sliding_window_view

from .cdc import BudgetError
from .complexity import COUNTER
from .fermat import decode_signed_array, encode_signed_array
from .fixedpoint import (QuantSpec, check_overflow, recombine, split_taps)
from .fnt import TransformPlan, default_plans, fnt, ifnt

STREAMS = ("XI", "XQ", "YI", "YQ")
TAP_MAG_MAX = (1 << 14) - 1


def qam16_radii() -> np.ndarray:
    """Ring moduli of unit-average-energy 16QAM (alphabet +-1, +-3)."""
    return np.sqrt(np.array([2.0, 10.0, 18.0]) / 10.0)


@dataclass
class AeqConfig:
    block_n: int = 32
    l_taps: int = 16
    mu: float = 1e-3
    radii: np.ndarray = field(default_factory=qam16_radii)
    tap_bits: int = 14  # magnitude bits; sign carried separately
    group_bits: int = 7
    sig_spec: QuantSpec = field(default_factory=lambda: QuantSpec(5, 8.0))
    tap_scale: float = float(1 << 13)

    def __post_init__(self) -> None:
        if self.l_taps != self.block_n // 2:
            raise ValueError("l_taps must equal block_n / 2")
        if self.mu < 0:
            raise ValueError("mu must be >= 0")
        self.radii = np.sort(np.asarray(self.radii, dtype=float))


def rde_error(y_i: np.ndarray, y_q: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Radius error R^2 - |y|^2 against the nearest ring; shared by I and Q."""
    r2 = np.asarray(y_i) ** 2 + np.asarray(y_q) ** 2
    r = np.sqrt(r2)
    nearest = radii[np.argmin(np.abs(r[..., None] - radii), axis=-1)]
    return nearest ** 2 - r2


@dataclass
class RvMimoTaps:
    """16 real FIR filters indexed (output stream, input stream, lag)."""

    w_int: np.ndarray  # (4, 4, l_taps) int64, |w| <= 2^14 - 1
    high: np.ndarray = field(init=False)
    low: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.resplit()

    def resplit(self) -> None:
        s = split_taps(self.w_int)
        self.high, self.low = s.high, s.low

    @classmethod
    def center_spike(cls, l_taps: int, spike: int) -> "RvMimoTaps":
        w = np.zeros((4, 4, l_taps), dtype=np.int64)
        for s in range(4):
            w[s, s, l_taps // 2] = spike
        return cls(w)


class FntAeq:
    """Block equalizer state: taps, overlap history, error trace."""

    def __init__(self, config: AeqConfig, plan: TransformPlan | None = None):
        self.config = config
        self.plan = plan if plan is not None else default_plans()["aeq32"]
        if self.plan.n != config.block_n:
            raise ValueError("plan length does not match block_n")
        self.budget = check_overflow(
            np.full(config.l_taps, (1 << config.group_bits) - 1),
            config.sig_spec, self.plan.params)
        if not self.budget.passed:
            raise BudgetError(str(self.budget))
        spike = int(round(config.tap_scale))
        self.taps = RvMimoTaps.center_spike(config.l_taps, spike)
        self.w = self.taps.w_int.astype(float) / config.tap_scale
        self.history = np.zeros((4, config.l_taps), dtype=np.int64)
        self.err_trace: list[float] = []
        self.saturations = 0
        self.symbols_processed = 0
        self._tap_spectra = None

    # -- forward path -------------------------------------------------

    def _spectra(self) -> tuple[np.ndarray, np.ndarray]:
        if self._tap_spectra is None:
            p = self.plan.params
            n = self.plan.n
            padded = np.zeros((2, 4, 4, n), dtype=np.int64)
            padded[0, :, :, :self.config.l_taps] = self.taps.high
            padded[1, :, :, :self.config.l_taps] = self.taps.low
            self._tap_spectra = fnt(self.plan, encode_signed_array(padded, p))
        return self._tap_spectra

    def equalize_block(self, x_new: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Equalize 4 x hop new quantized samples; returns (y_float, x_block).

        Each filter needs two residue-domain convolutions (one per 7-bit
        group): 2 * 16 * block_n general products per block of
        block_n / 2 output symbols.
        """
        hop = self.config.l_taps
        x_new = np.asarray(x_new, dtype=np.int64)
        if x_new.shape != (4, hop):
            raise ValueError(f"expected (4, {hop}) block, got {x_new.shape}")
        x_block = np.concatenate([self.history, x_new], axis=1)
        self.history = x_new.copy()

        p = self.plan.params
        F = p.F
        with COUNTER.scope("aeq-fnt"):
            X = fnt(self.plan, encode_signed_array(x_block, p))  # (4, n)
            W = self._spectra()                                  # (2, 4, 4, n)
            prod = (W * X[None, None, :, :]) % F
            COUNTER.add(prod.size)
            conv = decode_signed_array(ifnt(self.plan, prod), p)
        full = recombine(conv[0], conv[1])          # (4, 4, n) wide-integer
        y_int = full.sum(axis=1)[:, hop:]           # (4, hop) valid outputs
        y = y_int / (self.config.sig_spec.scale * self.config.tap_scale)
        self.symbols_processed += hop
        return y, x_block

    # -- adaptation ---------------------------------------------------

    def update_taps(self, x_block: np.ndarray, y: np.ndarray,
                    mu: float | None = None) -> None:
        """Block-accumulated radius-directed update, then requantize."""
        cfg = self.config
        mu = cfg.mu if mu is None else mu
        hop = cfg.l_taps
        xf = x_block / cfg.sig_spec.scale
        e_x = rde_error(y[0], y[1], cfg.radii)
        e_y = rde_error(y[2], y[3], cfg.radii)
        e = np.stack([e_x, e_x, e_y, e_y])          # (4, hop) per output stream
        self.err_trace.append(float(np.mean(np.abs(np.stack([e_x, e_y])))))
        if mu == 0.0:
            return
        # lags[s1, m, k] = x[s1, hop + m - k] for m, k in [0, hop)
        sw = sliding_window_view(xf, hop, axis=1)   # (4, hop+1, hop)
        lags = sw[:, 1:, ::-1]
        self.w += mu * np.einsum("sm,tmk->stk", e * y, lags)
        w_int = np.rint(self.w * cfg.tap_scale).astype(np.int64)
        over = np.abs(w_int) > TAP_MAG_MAX
        self.saturations += int(np.count_nonzero(over))
        np.clip(w_int, -TAP_MAG_MAX, TAP_MAG_MAX, out=w_int)
        self.taps = RvMimoTaps(w_int)
        self._tap_spectra = None

    def process(self, x: np.ndarray, adapt: bool = True,
                mu_schedule=None) -> np.ndarray:
        """Stream 4 x n quantized samples through the equalize/update loop.

        mu_schedule maps an absolute symbol index to a step size,
        overriding config.mu (gear shifting).
        """
        hop = self.config.l_taps
        x = np.asarray(x, dtype=np.int64)
        n_blocks = x.shape[1] // hop
        out = np.zeros((4, n_blocks * hop))
        for b in range(n_blocks):
            xb = x[:, b * hop:(b + 1) * hop]
            y, x_block = self.equalize_block(xb)
            out[:, b * hop:(b + 1) * hop] = y
            if adapt:
                mu = mu_schedule(b * hop) if mu_schedule else None
                self.update_taps(x_block, y, mu=mu)
        return out


@njit(cache=True)
def _td_rde_kernel(x, w, mu_arr, radii, l_taps):  # pragma: no cover - jit
    n_streams, n = x.shape
    y = np.zeros((n_streams, n))
    n_radii = radii.shape[0]
    for m in range(l_taps - 1, n):
        for s2 in range(4):
            acc = 0.0
            for s1 in range(4):
                for k in range(l_taps):
                    acc += w[s2, s1, k] * x[s1, m - k]
            y[s2, m] = acc
        for pol in range(2):
            yi = y[2 * pol, m]
            yq = y[2 * pol + 1, m]
            r = np.sqrt(yi * yi + yq * yq)
            best = radii[0]
            for ri in range(1, n_radii):
                if abs(radii[ri] - r) < abs(best - r):
                    best = radii[ri]
            e = best * best - (yi * yi + yq * yq)
            mu = mu_arr[m]
            for ii in range(2):
                s2 = 2 * pol + ii
                g = mu * e * y[s2, m]
                if g != 0.0:
                    for s1 in range(4):
                        for k in range(l_taps):
                            w[s2, s1, k] += g * x[s1, m - k]
    return y


def td_aeq_float(x: np.ndarray, config: AeqConfig,
                 mu_schedule=None, w0: np.ndarray | None = None
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Per-symbol floating-point 4x4 radius-directed baseline.

    Returns (outputs, final taps).  Forward cost is 16 * l_taps real
    multiplications per symbol, booked under the "aeq-td" scope.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[1]
    if w0 is None:
        w = np.zeros((4, 4, config.l_taps))
        for s in range(4):
            w[s, s, config.l_taps // 2] = 1.0
    else:
        w = w0.astype(float).copy()
    if mu_schedule is None:
        mu_arr = np.full(n, config.mu)
    else:
        mu_arr = np.array([mu_schedule(i) for i in range(n)])
    with COUNTER.scope("aeq-td"):
        y = _td_rde_kernel(x, w, mu_arr, np.asarray(config.radii, dtype=float),
                           config.l_taps)
        COUNTER.add(16 * config.l_taps * n)
    return y, w
