"""Command-line interface.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure,
4 experiment finished with failed cells.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config, parse_value
from .dispersion import WaveParams
from .errors import BathyError, ConfigError, FieldFormatError
from .experiment import compute_metrics, metrics_csv, run_experiment, simulate_measurement
from .grid import ComplexField, Grid, RealField, export_pgm, read_field, write_field
from .measurement import Measurement, add_noise, add_snapshot_noise
from .spectral import InversionConfig, interior_mask, reconstruct
from .tikhonov import (
    build_k_operator,
    export_spectrum_csv,
    middle_decade,
    singular_spectrum,
    spectrum_slope,
    tikhonov_reconstruct,
)
from .topography import generate_topography, preset

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PARTIAL = 0, 2, 3, 4
log = logging.getLogger("bathyscatter")


def _wave_args(p, need_depth=True):
    p.add_argument("--omega", type=float, required=True, help="angular frequency (rad/s)")
    if need_depth:
        p.add_argument("--background-depth", type=float, required=True, help="H0 in meters")
    p.add_argument("--amplitude", type=float, default=0.3)
    p.add_argument("--g", type=float, default=9.81)


def _inversion_args(p):
    p.add_argument("--sigma", type=float, default=2.5)
    p.add_argument("--gamma", type=float, default=0.001)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--cutoff-margin", type=float, default=None)
    p.add_argument("--edge-trim", type=int, default=None)
    p.add_argument("--sampled-kernel", action="store_true")
    p.add_argument("--compensate-attenuation", action="store_true")


def _read(path, kind):
    f = read_field(path)
    if kind is ComplexField and isinstance(f, RealField):
        f = ComplexField(f.grid, f.values)
    if not isinstance(f, kind):
        raise ConfigError(f"{path}: expected a {kind.__name__}")
    return f


def _pgm(field: RealField, path):
    lo, hi = float(field.values.min()), float(field.values.max())
    export_pgm(field, path, lo, hi if hi > lo else lo + 1.0)


def cmd_simulate(a):
    grid = Grid(a.side_length, a.samples)
    spec = preset(a.topography, a.background_depth)
    depth_fine = generate_topography(spec, grid.refined(a.refinement))
    wave = WaveParams(a.omega, spec.background_depth_m, a.amplitude, g=a.g)
    sol, eta = simulate_measurement(depth_fine, wave, grid, a.model, a.tol)
    write_field(eta, a.output)
    if a.depth_output:
        write_field(generate_topography(spec, grid).base, a.depth_output)
    print(f"k_i = {wave.k_incoming:.6f}  method = {sol.method}  iterations = {sol.iterations}  "
          f"residual = {sol.residual:.2e}")
    return EXIT_OK


def cmd_measure(a):
    eta = _read(a.input, ComplexField)
    if a.real_noise:
        if a.omega is None:
            raise ConfigError("--real-noise needs --omega")
        m = add_snapshot_noise(eta, a.omega, a.noise_level, a.seed)
    else:
        m = add_noise(eta, a.noise_level, a.seed)
    write_field(m.field, a.output)
    print(f"noise_level = {m.noise_level:.17g}  seed = {m.seed}")
    return EXIT_OK


def cmd_invert(a):
    field = _read(a.input, ComplexField)
    wave = WaveParams(a.omega, a.background_depth, a.amplitude, g=a.g)
    cfg = InversionConfig(a.sigma, a.gamma, a.alpha, a.cutoff_margin, a.edge_trim, None,
                          a.sampled_kernel, a.compensate_attenuation)
    rec = reconstruct(Measurement(field, a.noise_level, 0), wave, cfg)
    write_field(rec.depth, a.output)
    if a.k_output:
        write_field(rec.k_eps, a.k_output)
    if a.pgm:
        _pgm(rec.depth, a.pgm)
    print(f"interior cells = {int(rec.interior.sum())}  saturated = {int(rec.saturated.sum())}  "
          f"sigma heuristic ok = {rec.heuristic_ok}")
    return EXIT_OK


def cmd_tikhonov(a):
    field = _read(a.input, ComplexField)
    wave = WaveParams(a.omega, a.background_depth, a.amplitude, g=a.g)
    m = Measurement(field, a.noise_level, 0)
    out = tikhonov_reconstruct(m, wave, a.gamma, a.alpha, lam=a.lam)
    write_field(out.depth, a.output)
    print(f"lambda = {out.result.lam:.6e}  discrepancy = {out.result.discrepancy:.6e}")
    return EXIT_OK


def cmd_svd(a):
    grid = Grid(a.side_length, a.samples)
    k_i = WaveParams(a.omega, a.background_depth, g=a.g).k_incoming
    s = singular_spectrum(build_k_operator(grid, k_i, cap=a.cap))
    lo, hi = middle_decade(grid)
    if a.csv:
        export_spectrum_csv(s, a.csv)
    print(f"n = {len(s)}  s_1 = {s[0]:.6e}  s_min = {s[-1]:.6e}  "
          f"slope[{lo},{hi}] = {spectrum_slope(s, lo, hi):.4f}")
    return EXIT_OK


_EXPERIMENT_FLAGS = (
    "side_length_m", "samples_per_side", "refinement", "topographies", "omegas", "amplitude_m",
    "noise_level", "noise_kind", "sigma", "gamma", "alpha", "cutoff_margin", "edge_trim",
    "model", "seed", "output_dir",
)


def cmd_experiment(a):
    cfg = load_config(a.config) if a.config else ExperimentConfig()
    overrides = {}
    for key in _EXPERIMENT_FLAGS:
        val = getattr(a, key)
        if val is not None:
            overrides[key] = parse_value(key, val)
    if a.sampled_kernel:
        overrides["sampled_kernel"] = True
    if a.compensate_attenuation:
        overrides["compensate_attenuation"] = True
    cfg = cfg.with_overrides(**overrides)
    report = run_experiment(cfg)
    sys.stdout.write(metrics_csv(report))
    for c in report.failed:
        print(f"FAILED {c.topography} omega={c.omega:g}: {c.error}", file=sys.stderr)
    return EXIT_PARTIAL if report.failed else EXIT_OK


def cmd_metrics(a):
    d_true = _read(a.true, RealField)
    d_rec = _read(a.rec, RealField)
    eta = _read(a.wave, ComplexField)
    region = interior_mask(d_true.grid, a.trim) if a.trim else None
    m = compute_metrics(d_true, d_rec, eta, region)
    print(f"relative_l2 = {m.relative_l2:.17g}")
    print(f"paper_normalization = {m.paper_normalization:.17g}")
    print(f"max_abs = {m.max_abs:.17g}")
    if a.relative_error:
        write_field(m.relative_error, a.relative_error)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bathyscatter", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="forward-solve a preset topography")
    s.add_argument("--topography", default="d1")
    s.add_argument("--background-depth", type=float, default=None)
    _wave_args(s, need_depth=False)
    s.add_argument("--side-length", type=float, default=100.0)
    s.add_argument("--samples", type=int, default=100)
    s.add_argument("--refinement", type=int, default=2)
    s.add_argument("--model", choices=("simplified", "full"), default="simplified")
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--output", required=True)
    s.add_argument("--depth-output")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("measure", help="add seeded relative noise to a complex field")
    s.add_argument("--input", required=True)
    s.add_argument("--noise-level", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--real-noise", action="store_true", help="perturb two snapshots instead")
    s.add_argument("--omega", type=float)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_measure)

    s = sub.add_parser("invert", help="spectral depth inversion")
    s.add_argument("--input", required=True)
    _wave_args(s)
    _inversion_args(s)
    s.add_argument("--noise-level", type=float, default=0.0, help="recorded only")
    s.add_argument("--output", required=True)
    s.add_argument("--k-output")
    s.add_argument("--pgm")
    s.set_defaults(func=cmd_invert)

    s = sub.add_parser("tikhonov", help="Tikhonov depth inversion (N <= 48)")
    s.add_argument("--input", required=True)
    _wave_args(s)
    s.add_argument("--gamma", type=float, default=0.001)
    s.add_argument("--alpha", type=float, default=0.1)
    s.add_argument("--lambda", dest="lam", type=float, default=None)
    s.add_argument("--noise-level", type=float, default=0.0,
                   help="relative noise level used by the discrepancy principle")
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_tikhonov)

    s = sub.add_parser("svd-diag", help="singular spectrum of the volume potential")
    _wave_args(s)
    s.add_argument("--side-length", type=float, default=24.0)
    s.add_argument("--samples", type=int, default=24)
    s.add_argument("--cap", type=int, default=48)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_svd)

    s = sub.add_parser("experiment", help="run the topography x frequency experiment")
    s.add_argument("--config")
    for key in _EXPERIMENT_FLAGS:
        flag = "--" + key.replace("_", "-")
        s.add_argument(flag, dest=key, default=None, metavar="VALUE")
    s.add_argument("--sampled-kernel", action="store_true")
    s.add_argument("--compensate-attenuation", action="store_true")
    s.set_defaults(func=cmd_experiment)

    s = sub.add_parser("metrics", help="error metrics between two depth fields")
    s.add_argument("--true", required=True)
    s.add_argument("--rec", required=True)
    s.add_argument("--wave", required=True, help="clean wave field for the wave-norm normalization")
    s.add_argument("--trim", type=int, default=0)
    s.add_argument("--relative-error")
    s.set_defaults(func=cmd_metrics)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(a.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return a.func(a)
    except (ConfigError, FieldFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BathyError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
