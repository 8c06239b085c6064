"""Command-line interface: ``pabeam {simulate,beamform,metrics,bench,run}``.

Exit codes: 0 success, 2 bad arguments or configuration, 3 I/O error,
4 malformed input file, 5 images on different grids.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import math
import sys
from pathlib import Path

from . import io
from .beamformers import METHODS, reconstruct_methods
from .bench import loglog_slope, run_bench
from .config import RunConfig, load_config
from .errors import ConfigError, FormatError, GridMismatch, OutOfExtent, PabeamError
from .metrics import depth_sweep_report, lateral_profile
from .phantom import simulate
from .plotting import plot_bench, plot_image, plot_profiles
from .signal import add_noise_at_snr, analytic_signal, envelope, log_compress

log = logging.getLogger("pabeam")

EXIT_CONFIG, EXIT_IO, EXIT_FORMAT, EXIT_GRID = 2, 3, 4, 5


def _snr(text: str):
    value = float(text)
    if math.isnan(value):
        raise argparse.ArgumentTypeError("SNR must be a number or inf")
    return None if math.isinf(value) and value > 0 else value


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers: {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers: {text!r}")


def _load(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if getattr(args, "snr_db", False) is not False:
        overrides["snr_db"] = args.snr_db
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "out", None):
        overrides["out_dir"] = str(args.out)
    if overrides:
        try:
            cfg = cfg.with_overrides(**overrides)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return cfg


def _simulate(cfg: RunConfig):
    array = cfg.sensor_array()
    data = simulate(cfg.phantom(), array, cfg.pulse_model(), cfg.sound_speed,
                    cfg.sampling_rate, cfg.duration)
    if cfg.snr_db is not None:
        data = add_noise_at_snr(data, cfg.snr_db, cfg.seed)
    return data, array


def cmd_simulate(args) -> int:
    cfg = _load(args)
    try:
        data, array = _simulate(cfg)
    except PabeamError as exc:
        raise ConfigError(str(exc)) from None
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_channel_file(out / "channels.pabf", data, array)
    (out / "config.json").write_text(cfg.to_json())
    print(f"wrote {out / 'channels.pabf'} ({data.element_count} x {data.sample_count})")
    return 0


def _beamform(data, array, cfg: RunConfig, methods):
    bf = cfg.beamformer_config()
    bf.validate(array.element_count)
    grid = cfg.image_grid()
    images = reconstruct_methods(analytic_signal(data), grid, array, bf, methods)
    return {m: envelope(im) for m, im in images.items()}


def _write_images(envs, out: Path, figure: bool):
    out.mkdir(parents=True, exist_ok=True)
    for m, env in envs.items():
        io.write_envelope(out / f"envelope_{m}.f32", env)
        lc = log_compress(env)
        io.write_pgm(out / f"image_{m}.pgm", lc, 40.0)
        if figure:
            plot_image(lc, out / f"image_{m}.png", 40.0)


def cmd_beamform(args) -> int:
    cfg = _load(args)
    data, array = io.read_channel_file(args.input)
    bf = cfg.beamformer_config()
    bf.validate(array.element_count)
    cfg.image_grid()
    envs = _beamform(data, array, cfg, [args.method])
    _write_images(envs, Path(cfg.out_dir), args.figure)
    print(f"flagged_pixels {envs[args.method].flagged}")
    return 0


def _profiles_csv(profiles) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "depth_mm", "lateral_mm", "linear", "db"])
    for depth, by_method in profiles.items():
        for m, prof in by_method.items():
            for x, lin, db in zip(prof.lateral, prof.linear, prof.db):
                w.writerow([m, f"{depth * 1e3:.6g}", f"{x * 1e3:.6f}", repr(float(lin)), f"{db:.4f}"])
    return buf.getvalue()


def _metrics(envs, depths_m, band_m, config_snapshot):
    report = depth_sweep_report(envs, depths_m, band_m, config_snapshot)
    profiles = {d: {m: lateral_profile(im, d) for m, im in envs.items()} for d in depths_m}
    return report, profiles


def _write_metrics(report, profiles, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.json").write_text(json.dumps(report.to_dict(), indent=2))
    (out / "profiles.csv").write_text(_profiles_csv(profiles))
    plot_profiles(profiles, out / "profiles.png")


def _print_report(report):
    print(f"{'method':<6} {'depth_mm':>8} {'fwhm_um':>10} {'snr_db':>8}")
    for r in report.rows:
        f = "n/a" if r.fwhm_um is None else f"{r.fwhm_um:.1f}"
        s = "n/a" if r.snr_db is None else f"{r.snr_db:.2f}"
        print(f"{r.method:<6} {r.depth_mm:>8g} {f:>10} {s:>8}")


def cmd_metrics(args) -> int:
    envs = {}
    for path in args.envelopes:
        im = io.read_envelope(path)
        key = im.method or Path(path).stem
        while key in envs:
            key += "'"
        envs[key] = im
    if len({im.grid for im in envs.values()}) > 1:
        raise GridMismatch("envelope images are on different grids")
    depths = [d * 1e-3 for d in (args.depths or range(25, 66, 5))]
    snapshot = {"inputs": [str(p) for p in args.envelopes], "band_mm": args.band_mm}
    try:
        report, profiles = _metrics(envs, depths, args.band_mm * 1e-3, snapshot)
    except OutOfExtent as exc:
        raise ConfigError(f"--depths: {exc}") from None
    _write_metrics(report, profiles, Path(args.out))
    _print_report(report)
    return 0


def cmd_bench(args) -> int:
    cfg = _load(args)
    if not args.sweep or any(m < 8 for m in args.sweep):
        raise ConfigError("--sweep needs element counts, each >= 8")
    if args.repeats < 5:
        raise ConfigError("--repeats must be >= 5")
    for M in args.sweep:
        cfg.beamformer_config().validate(M)
    rows = run_bench(args.sweep, cfg, repeats=args.repeats)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    buf = _io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    (out / "bench.csv").write_text(buf.getvalue())
    slopes = {m: loglog_slope(rows, m) for m in METHODS} if len(args.sweep) > 1 else {}
    (out / "bench.json").write_text(json.dumps(
        {"config": json.loads(cfg.to_json()), "rows": rows, "loglog_slope": slopes}, indent=2))
    plot_bench(rows, out / "bench.png")
    sys.stdout.write(buf.getvalue())
    return 0


def cmd_run(args) -> int:
    cfg = _load(args)
    try:
        cfg.beamformer_config().validate(cfg.array.element_count)
        cfg.image_grid()
        data, array = _simulate(cfg)
    except PabeamError as exc:
        raise ConfigError(str(exc)) from None
    methods = [args.method] if args.method else cfg.methods
    envs = _beamform(data, array, cfg, methods)
    depths = [a.axial for a in cfg.absorbers]
    report, profiles = _metrics(envs, depths, args.band_mm * 1e-3, json.loads(cfg.to_json()))
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_channel_file(out / "channels.pabf", data, array)
    (out / "config.json").write_text(cfg.to_json())
    _write_images(envs, out, args.figure)
    _write_metrics(report, profiles, out)
    _print_report(report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pabeam", description="Photoacoustic DAS / MV / D-MV beamforming")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_default=None):
        sp.add_argument("--config", type=Path, help="run configuration (JSON)")
        sp.add_argument("--out", type=Path, default=out_default, help="output directory")

    sp = sub.add_parser("simulate", help="simulate channel data for the configured phantom")
    common(sp)
    sp.add_argument("--snr-db", type=_snr, default=False, help="input SNR in dB, or inf for no noise")
    sp.add_argument("--seed", type=int)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("beamform", help="reconstruct one image from a channel file")
    sp.add_argument("input", type=Path)
    common(sp)
    sp.add_argument("--method", choices=METHODS, required=True)
    sp.add_argument("--figure", action="store_true", help="also render a PNG")
    sp.set_defaults(func=cmd_beamform)

    sp = sub.add_parser("metrics", help="FWHM / SNR report from envelope rasters")
    sp.add_argument("envelopes", nargs="+", type=Path)
    sp.add_argument("--depths", type=_float_list, help="target depths in mm (default 25,30,...,65)")
    sp.add_argument("--band-mm", type=float, default=5.0, help="axial band for per-depth SNR")
    sp.add_argument("--out", type=Path, default=Path("out"))
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("bench", help="per-pixel timing against element count")
    common(sp)
    sp.add_argument("--sweep", type=_int_list, default=[32, 64, 128])
    sp.add_argument("--repeats", type=int, default=5)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("run", help="simulate, beamform every method and report metrics")
    common(sp)
    sp.add_argument("--snr-db", type=_snr, default=False)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--method", choices=METHODS)
    sp.add_argument("--band-mm", type=float, default=5.0)
    sp.add_argument("--figure", action="store_true")
    sp.set_defaults(func=cmd_run)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"pabeam: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FormatError as exc:
        print(f"pabeam: malformed input: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except GridMismatch as exc:
        print(f"pabeam: grid mismatch: {exc}", file=sys.stderr)
        return EXIT_GRID
    except OSError as exc:
        print(f"pabeam: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
