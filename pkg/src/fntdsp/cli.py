"""Batch command line front end: selftest, transforms, convolution,
link sweeps and complexity reports, all reproducible under a fixed seed."""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .complexity import COUNTER, ComplexityReport, tab1_formula
from .fermat import FermatParams, encode_signed_array, decode_signed_array, sqrt2
from .fixedpoint import QuantSpec, check_overflow, recombine, split_taps
from .fnt import default_plans, fnt, ifnt, make_plan
from .linksim import (HD_FEC_BER, LinkConfig, Metrics, penalty_at_fec,
                      run_link)


@dataclass
class RunManifest:
    config_path: str
    seed: int
    schemes: tuple
    out_dir: str
    version: str = __version__

    def digest(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


# -- config files ---------------------------------------------------------

def dump_config(cfg: LinkConfig, path: Path) -> None:
    cp = configparser.ConfigParser()
    cp["link"] = {}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        cp["link"][f.name] = str(v)
    with open(path, "w") as fh:
        cp.write(fh)


def load_config(path: Path) -> LinkConfig:
    cp = configparser.ConfigParser()
    with open(path) as fh:
        cp.read_file(fh)
    kwargs = {}
    defaults = {f.name: f for f in fields(LinkConfig)}
    for key, raw in cp["link"].items():
        f = defaults[key]
        default = getattr(LinkConfig(), key)
        if isinstance(default, tuple):
            items = [x for x in raw.split(",") if x]
            elem = float if key == "snr_db" else str
            kwargs[key] = tuple(elem(x) for x in items)
        elif isinstance(default, bool):
            kwargs[key] = raw.lower() in ("1", "true", "yes")
        elif isinstance(default, int):
            kwargs[key] = int(raw)
        elif isinstance(default, float):
            kwargs[key] = float(raw)
        else:
            kwargs[key] = raw
    return LinkConfig(**kwargs)


# -- selftest -------------------------------------------------------------

def _selftest_suites(fault_inject: bool = False):
    """Yield (suite name, n_pass, n_total) for the golden-vector suites."""
    rng = np.random.default_rng(7)
    plans = default_plans()
    if fault_inject:
        # negative control: corrupt one twiddle of the golden plan
        plans["mod17"].fwd_twiddles[-1][1] += 1

    # golden vectors on the 8-point mod-17 plan
    ok = total = 0
    p17 = plans["mod17"]
    delta = np.array([1, 0, 0, 0, 0, 0, 0, 0])
    total += 1
    ok += int(np.array_equal(fnt(p17, delta), np.ones(8, dtype=np.int64)))
    total += 1
    golden = np.array([2, 3, 5, 9, 0, 16, 14, 10])
    ok += int(np.array_equal(fnt(p17, np.array([1, 1, 0, 0, 0, 0, 0, 0])),
                             golden))
    total += 1
    ok += int(np.array_equal(ifnt(p17, golden),
                             np.array([1, 1, 0, 0, 0, 0, 0, 0])))
    yield "golden-vectors", ok, total

    ok = total = 0
    for name, plan in plans.items():
        F = plan.params.F
        x = rng.integers(0, F, size=(50, plan.n))
        total += 1
        ok += int(np.array_equal(ifnt(plan, fnt(plan, x)), x))
    yield "round-trips", ok, total

    ok = total = 0
    plan = plans["mod17"]
    x = np.array([1, 2, 0, 0, 0, 0, 0, 0])
    h = np.array([3, 1, 0, 0, 0, 0, 0, 0])
    from .fnt import convolve_signed_real
    total += 1
    ok += int(np.array_equal(convolve_signed_real(plan, x, h),
                             np.array([3, 7, 2, 0, 0, 0, 0, 0])))
    total += 1
    r = sqrt2(FermatParams(4))
    ok += int(r == 4080 and r * r % 65537 == 2)
    total += 1
    rep = check_overflow(np.full(32, 31), QuantSpec(5, 8.0), FermatParams(4),
                         complex_mode=True)
    ok += int(rep.passed and rep.bound == 29760)
    total += 1
    w = rng.integers(-16383, 16384, size=64)
    s = split_taps(w)
    ok += int(np.array_equal(recombine(s.high, s.low), w))
    total += 1
    ok += int(tab1_formula("FD-CDC", 64) == 84.0)
    yield "oracle-spot-checks", ok, total


def cmd_selftest(args) -> int:
    failures = 0
    for name, ok, total in _selftest_suites(args.fault_inject):
        status = "PASS" if ok == total else "FAIL"
        print(f"{name:<20} {ok}/{total} {status}")
        failures += total - ok
    return 1 if failures else 0


# -- transform / convolve -------------------------------------------------

def _read_ints(path: Path, columns: int = 1) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#")[0].strip()
            if line:
                rows.append([int(x) for x in line.split()])
    arr = np.array(rows, dtype=np.int64)
    if columns == 1:
        return arr.reshape(-1)
    return arr


def _write_ints(path: Path, arr: np.ndarray) -> None:
    arr = np.atleast_2d(np.asarray(arr, dtype=np.int64).T).T
    with open(path, "w") as fh:
        for row in arr:
            fh.write(" ".join(str(int(v)) for v in np.atleast_1d(row)) + "\n")


def _get_plan(name: str):
    plans = default_plans()
    if name not in plans:
        raise SystemExit(f"unknown plan {name!r}; choose from {sorted(plans)}")
    return plans[name]


def cmd_transform(args) -> int:
    plan = _get_plan(args.plan)
    data = _read_ints(Path(args.input))
    if len(data) != plan.n:
        raise SystemExit(f"input length {len(data)} != plan length {plan.n}")
    if args.inverse:
        out = decode_signed_array(ifnt(plan, data % plan.params.F), plan.params)
    else:
        out = fnt(plan, encode_signed_array(data, plan.params))
    _write_ints(Path(args.output), out)
    return 0


def cmd_convolve(args) -> int:
    from .fnt import convolve_signed_complex, convolve_signed_real
    plan = _get_plan(args.plan)
    p = plan.params
    cols = 2 if args.mode == "complex" else 1
    x = _read_ints(Path(args.x), cols)
    h = _read_ints(Path(args.h), cols)
    sig_max = int(np.abs(x).max()) if x.size else 0
    tap_mags = np.max(np.abs(h.reshape(len(h), -1)), axis=1)
    spec = QuantSpec(max(2, int(sig_max).bit_length() + 1), 1.0)
    # budget uses the actual data magnitudes rather than nominal widths
    bound = int(sig_max * tap_mags.sum()) * (2 if cols == 2 else 1)
    if bound > p.half:
        print(f"overflow budget violated: {bound} > {p.half} "
              f"(max|x|={sig_max}, sum|h|={int(tap_mags.sum())})",
              file=sys.stderr)
        return 2
    if args.mode == "real":
        out = convolve_signed_real(plan, x, h)
    else:
        zr, zi = convolve_signed_complex(plan, x[:, 0], x[:, 1],
                                         h[:, 0], h[:, 1])
        out = np.stack([zr, zi], axis=1)
    _write_ints(Path(args.output), out)
    return 0


# -- sweep / complexity ---------------------------------------------------

CSV_COLUMNS = ["scheme", "snr_db", "ber", "evm_db", "est_snr_db", "q_db",
               "n_bits", "clip_fraction", "converged"]


def _format_cell(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.6e}"
    return str(v)


def write_sweep_csv(path: Path, rows: list[Metrics],
                    manifest: RunManifest) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# fntdsp sweep v{manifest.version}\n")
        fh.write(f"# manifest {manifest.digest()}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for m in rows:
            d = m.as_row()
            writer.writerow([_format_cell(d[c]) for c in CSV_COLUMNS])


def cmd_sweep(args) -> int:
    cfg = load_config(Path(args.config)) if args.config else LinkConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.schemes:
        cfg.schemes = tuple(args.schemes.split(","))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config_path=args.config or "<defaults>",
                           seed=cfg.seed, schemes=cfg.schemes,
                           out_dir=str(out_dir))
    rows = run_link(cfg)
    write_sweep_csv(out_dir / "sweep.csv", rows, manifest)
    warnings = [m for m in rows if not m.converged]
    lines = [f"sweep complete: {len(rows)} points -> {out_dir / 'sweep.csv'}"]
    if len(cfg.schemes) >= 2:
        a, b = cfg.schemes[0], cfg.schemes[1]
        try:
            pen = penalty_at_fec(rows, a, b)
            lines.append(f"penalty {a} vs {b} at BER {HD_FEC_BER:g}: "
                         f"{pen:+.3f} dB")
        except ValueError:
            lines.append("penalty: BER curves do not cross the FEC threshold")
    for m in warnings:
        lines.append(f"warning: non-convergent run {m.scheme} @ {m.snr_db} dB")
    summary = "\n".join(lines)
    print(summary)
    (out_dir / "summary.txt").write_text(summary + "\n")
    return 3 if warnings else 0


def _measured_counts() -> dict:
    """Small instrumented runs yielding measured multiplications/symbol."""
    from .aeq import AeqConfig, FntAeq
    from .cdc import CdcConfig, FntCdcEngine, fd_cdc_float, td_cdc_float
    rng = np.random.default_rng(3)
    n = 4096
    spec = QuantSpec(5, 8.0)
    cfg = CdcConfig(z_km=25.0, fs_hz=80e9, n_taps=32)
    measured = {}
    with COUNTER.enabled_ctx():
        COUNTER.reset()
        eng = FntCdcEngine(cfg, spec)
        for _ in range(2):  # dual polarization
            eng.process_int(rng.integers(-15, 16, n),
                            rng.integers(-15, 16, n))
        hop = cfg.block_n // 2
        n_out = -(-(n + hop) // hop) * hop
        measured["FNT-CDC"] = COUNTER.total("cdc-fnt") / n_out
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        fd_cdc_float(x, cfg)
        fd_cdc_float(x, cfg)
        measured["FD-CDC"] = COUNTER.total("cdc-fd") / n_out
        cfg_td = CdcConfig(z_km=25.0, fs_hz=80e9, n_taps=32)
        td_cdc_float(x, cfg_td)
        td_cdc_float(x, cfg_td)
        measured["TD-CDC"] = COUNTER.total("cdc-td") / n
        acfg = AeqConfig(mu=0.0)
        eq = FntAeq(acfg)
        eq.process(rng.integers(-15, 16, (4, 1024)), adapt=False)
        measured["FNT-AEQ"] = COUNTER.total("aeq-fnt") / eq.symbols_processed
        from .aeq import td_aeq_float
        td_aeq_float(rng.standard_normal((4, 1024)), acfg)
        measured["TD-AEQ"] = COUNTER.total("aeq-td") / 1024
    return measured


def cmd_complexity(args) -> int:
    report = ComplexityReport(measured=_measured_counts() if args.measure
                              else {})
    print(report.as_text())
    if args.out_dir:
        out_dir = Path(args.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "complexity.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(report.rows()[0]))
            writer.writeheader()
            writer.writerows(report.rows())
        (out_dir / "complexity.txt").write_text(report.as_text() + "\n")
    return 0


def cmd_write_config(args) -> int:
    dump_config(LinkConfig(), Path(args.output))
    print(f"wrote default config to {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fntdsp")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("selftest", help="run the golden-vector suites")
    p.add_argument("--fault-inject", action="store_true",
                   help="corrupt a twiddle table (negative control)")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("transform", help="forward/inverse transform of a file")
    p.add_argument("--plan", default="mod17")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--inverse", action="store_true")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("convolve", help="cyclic convolution of two files")
    p.add_argument("--plan", default="mod17")
    p.add_argument("--x", required=True)
    p.add_argument("--h", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--mode", choices=["real", "complex"], default="real")
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("sweep", help="run the link simulation sweep")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--schemes")
    p.add_argument("--out-dir", default="out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("complexity", help="cost table and reductions")
    p.add_argument("--out-dir")
    p.add_argument("--measure", action="store_true",
                   help="add instrumented measured counts")
    p.set_defaults(func=cmd_complexity)

    p = sub.add_parser("write-config", help="write the default config file")
    p.add_argument("--output", default="link.ini")
    p.set_defaults(func=cmd_write_config)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
