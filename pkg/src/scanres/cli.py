"""Command-line front end.

Each subcommand reads delimited inputs, runs the corresponding analysis,
and writes into --output: a JSON (or flattened CSV) report with
provenance, the delimited results, and a rendered PNG figure.

Exit status: 0 = completed (soft non-convergence is recorded in the
report), 1 = usage error, 2 = data error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import io as sio
from . import plots
from .fitting import FitConfig, fit_s11, phase_slope_at_resonance
from .fixtures import CAL_TRUTH, GOLDEN_PARAMS
from .loss import fit_power_sweep, fit_temperature_sweep
from .quantities import dbm_to_watts
from .reports import build_report, dump_report, flatten_report
from .response import ResonatorParams
from .sensitivity import capacitance_noise_chain, phase_psd, sensitivity_vs_bandwidth
from .tipsample import (
    CalibrationResult,
    TipModel,
    calibrate_distance,
    edge_resolution,
    simulate_scan,
)
from .transmon import (
    QubitResonatorParams,
    TransmonParams,
    g_ref_for_t1,
    gamma1_vs_distance,
    invert_spectrum,
    transition_frequencies,
    two_tone_spectrum,
)


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the CLI contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


class UsageError(Exception):
    pass


# allowed config keys per command: section -> keys
_CONFIG_KEYS = {
    "fit-s11": {"fit": {"max_iter", "rel_tol", "damping_init"}},
    "loss-sweep": {"loss": {"f0_ghz", "t_k", "p_dbm", "tls_pc_dbm"}},
    "calibrate": {"tip": {"radius_um", "c_stray_ff", "series_terms"}},
    "scan": {
        "scan": {"height_um", "noise_zf", "seed", "channel"},
        "tip": {"radius_um", "c_stray_ff", "series_terms"},
        "resonator": {"f0_ghz", "qi", "qc", "theta_rad", "b_mag", "b_phase_rad", "tau_ns"},
        "calibration": {"alpha_cal_ff_per_hz", "d0_um"},
    },
    "sensitivity": {
        "sensitivity": {"segment_len", "overlap", "bands_hz"},
        "resonator": {"f0_ghz", "qi", "qc", "theta_rad", "b_mag", "b_phase_rad", "tau_ns"},
        "calibration": {"alpha_cal_ff_per_hz", "d0_um"},
    },
    "transmon": {
        "transmon": {"f_ge_mhz", "f_gf2_mhz", "ec_ghz", "ej_ghz", "ng", "ncut"},
        "two_tone": {"g_mhz", "kappa_mhz", "resonator_f0_ghz", "gamma2_mhz",
                     "power_steps", "span_mhz", "points"},
    },
    "purcell": {
        "purcell": {"d_min_um", "d_max_um", "n_points", "d_ref_um", "g_ref_mhz",
                    "t1_target_us", "delta_mhz", "kappa_mhz", "gamma_other_mhz"},
        "tip": {"radius_um", "c_stray_ff", "series_terms"},
    },
}


def _load_config(args, command):
    if args.config is None:
        return {}
    return sio.load_config(args.config, _CONFIG_KEYS[command])


def _resonator_from_cfg(cfg: dict) -> ResonatorParams:
    sec = cfg.get("resonator", {})
    return ResonatorParams(
        f0=sec.get("f0_ghz", GOLDEN_PARAMS.f0 / 1e9) * 1e9,
        Qi=sec.get("qi", GOLDEN_PARAMS.Qi),
        Qc=sec.get("qc", GOLDEN_PARAMS.Qc),
        theta=sec.get("theta_rad", GOLDEN_PARAMS.theta),
        B_mag=sec.get("b_mag", GOLDEN_PARAMS.B_mag),
        B_phase=sec.get("b_phase_rad", GOLDEN_PARAMS.B_phase),
        tau=sec.get("tau_ns", GOLDEN_PARAMS.tau * 1e9) * 1e-9,
    )


def _tip_from_cfg(cfg: dict) -> TipModel:
    sec = cfg.get("tip", {})
    return TipModel(
        R=sec.get("radius_um", 1.0) * 1e-6,
        C_stray=sec.get("c_stray_ff", 0.0) * 1e-15,
        series_terms=int(sec.get("series_terms", 20)),
    )


def _alpha_from_cfg(cfg: dict) -> float:
    return cfg.get("calibration", {}).get(
        "alpha_cal_ff_per_hz", CAL_TRUTH["alpha_cal"] * 1e15) * 1e-15


def _write_outputs(args, report: dict, figure=None, figure_name: str = None) -> None:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    name = report["command"]
    if args.format == "csv":
        with open(out / f"{name}-report.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["key", "value"])
            writer.writerows(flatten_report(report))
    else:
        (out / f"{name}-report.json").write_text(dump_report(report))
    if figure is not None:
        plots.save(figure, out / (figure_name or f"{name}.png"))


def cmd_fit_s11(args) -> int:
    cfg = _load_config(args, "fit-s11")
    trace = sio.read_trace(args.input)
    fsec = cfg.get("fit", {})
    config = FitConfig(
        max_iter=int(fsec.get("max_iter", 200)),
        rel_tol=fsec.get("rel_tol", 1e-10),
        damping_init=fsec.get("damping_init", 1e-3),
    )
    result = fit_s11(trace, config)
    p = result.params
    results = {
        "params": {
            "f0_hz": p.f0, "qi": p.Qi, "qc": p.Qc, "theta_rad": p.theta,
            "b_mag": p.B_mag, "b_phase_rad": p.B_phase, "tau_s": p.tau,
        },
        "stderr": {k.lower(): v for k, v in result.stderr.items()},
        "residual_rms": result.residual_rms,
        "iterations": result.iterations,
        "converged": result.converged,
        "total_q": p.total_q,
        "phase_slope_rad_per_hz": phase_slope_at_resonance(p),
    }
    report = build_report("fit-s11", results, inputs={"trace": args.input},
                          seed=args.seed, config=cfg)
    _write_outputs(args, report, plots.fit_s11_figure(trace, p))
    return 0


def cmd_loss_sweep(args) -> int:
    cfg = _load_config(args, "loss-sweep")
    sec = cfg.get("loss", {})
    omega = 2.0 * math.pi * sec.get("f0_ghz", GOLDEN_PARAMS.f0 / 1e9) * 1e9
    data = sio.read_sweep(args.input, args.mode)
    if args.mode == "power":
        t_k = sec.get("t_k", 0.010)
        fit = fit_power_sweep(data, omega, t_k)
        figure = plots.power_sweep_figure(data[:, 0], data[:, 1], fit.values, omega, t_k)
    else:
        p_in = dbm_to_watts(sec.get("p_dbm", -141.0))
        tls_pc = dbm_to_watts(sec["tls_pc_dbm"]) if "tls_pc_dbm" in sec else math.inf
        fit = fit_temperature_sweep(data, omega, p_in, tls_pc=tls_pc)
        figure = plots.temperature_sweep_figure(data[:, 0], data[:, 1], fit.values, omega, p_in)
    results = {
        "mode": args.mode,
        "values": fit.values,
        "stderr": fit.stderr,
        "converged": fit.converged,
        "residual_rms_inv_q": fit.residual_rms,
        "n_points": int(data.shape[0]),
    }
    report = build_report("loss-sweep", results, inputs={"sweep": args.input},
                          seed=args.seed, config=cfg)
    _write_outputs(args, report, figure)
    return 0


def cmd_calibrate(args) -> int:
    cfg = _load_config(args, "calibrate")
    tip = _tip_from_cfg(cfg)
    approach = sio.read_approach(args.input)
    try:
        cal = calibrate_distance(approach, tip)
    except ValueError as exc:
        raise sio.DataFormatError(f"{args.input}: {exc}") from exc
    results = {
        "d0_m": cal.d0,
        "alpha_cal_f_per_hz": cal.alpha_cal,
        "alpha_cal_ff_per_hz": cal.alpha_cal * 1e15,
        "residual_rms_f": cal.residual_rms,
        "converged": cal.converged,
        "tip_radius_m": tip.R,
    }
    report = build_report("calibrate", results, inputs={"approach": args.input},
                          seed=args.seed, config=cfg)
    figure = plots.calibration_figure(approach[:, 0], approach[:, 1], cal, tip)
    _write_outputs(args, report, figure)
    return 0


def cmd_scan(args) -> int:
    cfg = _load_config(args, "scan")
    sec = cfg.get("scan", {})
    noise_zf = sec.get("noise_zf", 0.0)
    seed = args.seed if args.seed is not None else sec.get("seed")
    if noise_zf > 0 and seed is None:
        raise UsageError("scan with noise requires a seed (config [scan].seed or --seed)")
    material = sio.read_material_map(args.input)
    tip = _tip_from_cfg(cfg)
    res = _resonator_from_cfg(cfg)
    cal = CalibrationResult(
        d0=cfg.get("calibration", {}).get("d0_um", CAL_TRUTH["d0"] * 1e6) * 1e-6,
        alpha_cal=_alpha_from_cfg(cfg),
        residual_rms=0.0,
    )
    height = sec.get("height_um", 0.5) * 1e-6
    channel = sec.get("channel", "phase_rad")
    image = simulate_scan(material, height, tip, res, cal,
                          noise_c_rms=noise_zf * 1e-21,
                          seed=0 if seed is None else int(seed), channel=channel)

    # edge resolution from the central-row linecut of a noiseless
    # frequency-shift render (monotone even when the near-critically
    # coupled phase response is not)
    shift_img = (image if channel == "delta_f0_hz" and noise_zf == 0 else
                 simulate_scan(material, height, tip, res, cal, channel="delta_f0_hz"))
    row = shift_img.grid[shift_img.grid.shape[0] // 2]
    half = row[: row.size // 2 + 1]
    try:
        resolution = edge_resolution(half, image.pitch)
    except ValueError:
        resolution = None

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    sio.write_scan_image(out / "scan_image.csv", image)
    results = {
        "channel": channel,
        "height_m": height,
        "noise_c_rms_f": noise_zf * 1e-21,
        "image_shape": list(image.grid.shape),
        "pitch_m": image.pitch,
        "edge_resolution_m": resolution,
        "background_phase_rad": float(image.grid[0, 0]),
    }
    report = build_report("scan", results, inputs={"map": args.input},
                          seed=None if seed is None else int(seed), config=cfg)
    _write_outputs(args, report, plots.scan_figure(image))
    return 0


def cmd_sensitivity(args) -> int:
    cfg = _load_config(args, "sensitivity")
    sec = cfg.get("sensitivity", {})
    series = sio.read_timeseries(args.input)
    res = _resonator_from_cfg(cfg)
    alpha = _alpha_from_cfg(cfg)
    # default segmenting: several averages while still resolving ~Hz bands
    default_seg = min(4096, 2 ** int(math.log2(series.samples.size / 4)))
    segment_len = int(sec.get("segment_len", default_seg))
    overlap = sec.get("overlap", 0.5)
    nyquist = series.sample_rate / 2.0
    f_lo = max(1.0 / series.duration, series.sample_rate / segment_len)
    bands = sec.get("bands_hz",
                    [b for b in (1.0, 10.0, 100.0, nyquist) if f_lo <= b <= nyquist])

    spec_phi = phase_psd(series, segment_len, overlap)
    spec_c = capacitance_noise_chain(series, res, alpha, segment_len, overlap)
    dc_bands = sensitivity_vs_bandwidth(series, res, alpha, bands, segment_len, overlap)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    sio.write_spectrum(out / "phase_asd.csv", spec_phi)
    sio.write_spectrum(out / "capacitance_asd.csv", spec_c)
    results = {
        "slope_rad_per_hz": phase_slope_at_resonance(res),
        "alpha_cal_f_per_hz": alpha,
        "segment_len": segment_len,
        "overlap": overlap,
        "bands": [{"bandwidth_hz": b, "delta_c_rms_f": v} for b, v in dc_bands],
        "white_dc_asd_f_rthz": float(np.median(spec_c.asd[spec_c.freqs > 0])),
    }
    report = build_report("sensitivity", results, inputs={"timeseries": args.input},
                          seed=args.seed, config=cfg)
    _write_outputs(args, report, plots.sensitivity_figure(spec_c, dc_bands))
    return 0


def cmd_transmon(args) -> int:
    cfg = _load_config(args, "transmon")
    sec = cfg.get("transmon", {})
    ng = sec.get("ng", 0.0)
    ncut = int(sec.get("ncut", 30))
    results: dict = {}
    figure = None

    if args.input:
        devices = sio.read_device_table(args.input)
        rows = []
        for dev in devices:
            p = TransmonParams(EC=dev["ec_hz"], EJ=dev["ej_hz"], ng=ng, ncut=ncut)
            f_ge, f_gf2 = transition_frequencies(p)
            rows.append({
                "device": dev["device"], "ec_hz": p.EC, "ej_hz": p.EJ,
                "f_ge_hz": f_ge, "f_gf2_hz": f_gf2,
                "anharmonicity_hz": 2.0 * (f_gf2 - f_ge),
            })
        results["devices"] = rows
    elif "f_ge_mhz" in sec and "f_gf2_mhz" in sec:
        p = invert_spectrum(sec["f_ge_mhz"] * 1e6, sec["f_gf2_mhz"] * 1e6, ng=ng, ncut=ncut)
        f_ge, f_gf2 = transition_frequencies(p)
        results.update({
            "ec_hz": p.EC, "ej_hz": p.EJ, "ej_over_ec": p.EJ / p.EC,
            "f_ge_hz": f_ge, "f_gf2_hz": f_gf2,
        })
    elif "ec_ghz" in sec and "ej_ghz" in sec:
        p = TransmonParams(EC=sec["ec_ghz"] * 1e9, EJ=sec["ej_ghz"] * 1e9, ng=ng, ncut=ncut)
        f_ge, f_gf2 = transition_frequencies(p)
        results.update({
            "ec_hz": p.EC, "ej_hz": p.EJ, "ej_over_ec": p.EJ / p.EC,
            "f_ge_hz": f_ge, "f_gf2_hz": f_gf2,
        })
    else:
        raise UsageError(
            "transmon needs --input DEVICE_TABLE.csv or config [transmon] with "
            "f_ge_mhz+f_gf2_mhz or ec_ghz+ej_ghz"
        )

    if "ec_hz" in results:
        tt = cfg.get("two_tone", {})
        f_res = tt.get("resonator_f0_ghz", GOLDEN_PARAMS.f0 / 1e9) * 1e9
        qr = QubitResonatorParams(
            g=tt.get("g_mhz", 50.0) * 1e6,
            delta=results["f_ge_hz"] - f_res,
            kappa=tt.get("kappa_mhz", 1.3) * 1e6,
        )
        span = tt.get("span_mhz", 300.0) * 1e6
        center = 0.5 * (results["f_ge_hz"] + results["f_gf2_hz"])
        freqs = np.linspace(center - span / 2, center + span / 2, int(tt.get("points", 401)))
        powers = np.logspace(-2, 1, int(tt.get("power_steps", 12)))
        response = two_tone_spectrum(p, qr, powers,
                                     freqs, gamma2=tt.get("gamma2_mhz", 2.0) * 1e6)
        figure = plots.two_tone_figure(freqs, powers, response)

    inputs = {"devices": args.input} if args.input else None
    report = build_report("transmon", results, inputs=inputs, seed=args.seed, config=cfg)
    _write_outputs(args, report, figure)
    return 0


def cmd_purcell(args) -> int:
    cfg = _load_config(args, "purcell")
    sec = cfg.get("purcell", {})
    tip = _tip_from_cfg(cfg)
    delta = sec.get("delta_mhz", -276.0) * 1e6
    kappa = sec.get("kappa_mhz", 1.3) * 1e6
    gamma_other = sec.get("gamma_other_mhz", 0.1) * 1e6
    d_ref = sec.get("d_ref_um", 2.5) * 1e-6
    qr = QubitResonatorParams(g=1.0, delta=delta, kappa=kappa)

    if "g_ref_mhz" in sec:
        g_ref = sec["g_ref_mhz"] * 1e6
        t1_target = None
    else:
        t1_target = sec.get("t1_target_us", 3.8) * 1e-6
        g_ref = g_ref_for_t1(t1_target, d_ref, qr, tip, d_ref, gamma_other)

    ds = np.linspace(sec.get("d_min_um", 1.0), sec.get("d_max_um", 50.0),
                     int(sec.get("n_points", 40))) * 1e-6
    rates = gamma1_vs_distance(ds, qr, tip, g_ref, d_ref, gamma_other)

    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    sio._write_csv(out / "purcell_rates.csv", ["d_m", "gamma1_hz"], rates)
    results = {
        "g_ref_hz": g_ref,
        "d_ref_m": d_ref,
        "delta_hz": delta,
        "kappa_hz": kappa,
        "gamma_other_hz": gamma_other,
        "t1_target_s": t1_target,
        "gamma1_at_d_ref_hz": float(
            gamma1_vs_distance([d_ref], qr, tip, g_ref, d_ref, gamma_other)[0][1]),
        "n_points": len(rates),
    }
    report = build_report("purcell", results, seed=args.seed, config=cfg)
    _write_outputs(args, report, plots.purcell_figure(rates, gamma_other))
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="scanres", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, needs_input=True):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None)
        p.add_argument("--input", type=Path, required=needs_input, default=None)
        p.add_argument("--output", type=Path, required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.set_defaults(func=func)
        return p

    add("fit-s11", cmd_fit_s11)
    p = add("loss-sweep", cmd_loss_sweep)
    p.add_argument("--mode", choices=("power", "temperature"), required=True)
    add("calibrate", cmd_calibrate)
    add("scan", cmd_scan)
    add("sensitivity", cmd_sensitivity)
    add("transmon", cmd_transmon, needs_input=False)
    add("purcell", cmd_purcell, needs_input=False)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"scanres: error: {exc}", file=sys.stderr)
        return 1
    except (sio.DataFormatError, ValueError, OSError) as exc:
        print(f"scanres: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
