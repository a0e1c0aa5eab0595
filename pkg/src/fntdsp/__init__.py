"""Integer transform-domain DSP for coherent receivers.

Exact cyclic convolution in rings of integers modulo a Fermat number,
with fixed-point chromatic dispersion compensation, a 4x4 real-valued
adaptive equalizer, a dual-polarization 16QAM link simulator and a
real-multiplication cost model.
"""

from .complexity import COUNTER, ComplexityReport, MultCounter, tab1_formula
from .fermat import (FermatParams, add, decode_signed, decode_signed_array,
                     encode_signed, encode_signed_array, mul, mul_pow2, neg,
                     reduce, sqrt2, sub)
from .fixedpoint import (BudgetReport, QuantSpec, QuantizedBlock,
                         check_overflow, dequantize, quantize, quantize_real,
                         recombine, split_taps)
from .fnt import (InvalidPlanError, TransformPlan, convolve_signed_complex,
                  convolve_signed_real, cyclic_convolve_complex,
                  cyclic_convolve_real, default_plans, fnt, ifnt, make_plan)
from .cdc import (BudgetError, CdcConfig, FntCdcEngine, design_cd_taps,
                  fd_cdc_float, required_taps, td_cdc_float)
from .aeq import AeqConfig, FntAeq, RvMimoTaps, qam16_radii, td_aeq_float
from .linksim import (HD_FEC_BER, LinkConfig, Metrics, fec_crossing_snr,
                      penalty_at_fec, run_link, run_single)

__version__ = "0.1.0"

__all__ = [
    "COUNTER", "ComplexityReport", "MultCounter", "tab1_formula",
    "FermatParams", "add", "sub", "neg", "mul", "mul_pow2", "reduce", "sqrt2",
    "encode_signed", "decode_signed", "encode_signed_array",
    "decode_signed_array",
    "BudgetReport", "QuantSpec", "QuantizedBlock", "check_overflow",
    "dequantize", "quantize", "quantize_real", "recombine", "split_taps",
    "InvalidPlanError", "TransformPlan", "default_plans", "make_plan",
    "fnt", "ifnt", "cyclic_convolve_real", "cyclic_convolve_complex",
    "convolve_signed_real", "convolve_signed_complex",
    "BudgetError", "CdcConfig", "FntCdcEngine", "design_cd_taps",
    "fd_cdc_float", "td_cdc_float", "required_taps",
    "AeqConfig", "FntAeq", "RvMimoTaps", "qam16_radii", "td_aeq_float",
    "HD_FEC_BER", "LinkConfig", "Metrics", "fec_crossing_snr",
    "penalty_at_fec", "run_link", "run_single",
]
