"""
ercavity/cli.py
Command-line interface for the Er:YSO cavity toolkit.

USAGE:
  ercavity <command> [flags] [--config FILE] [--out REPORT.json] [--verbose]

EXAMPLES:
  ercavity purcell --q 11400 --vnorm 1.65 --overlap 1
  ercavity spin-init --gamma-opt 90.9hz --tz 100ms --calibrate-eta 0.68 --reduction 6
  ercavity synth-decay --seed 7 --csv-out trace.csv
  ercavity fit-decay --in trace.csv --components 2 --fix-tau1 10.8ms
  ercavity reproduce-paper

Dimensional flags take unit suffixes (1536nm, 11.4ms, 90.9hz, 24.5/cm).
Exit codes: 0 success, 1 reproduce-paper check failed, 2 usage or parse
error, 3 numerical domain or configuration error.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ercavity import __version__
from ercavity.cavity.field_grid import material_mask, mode_volume
from ercavity.cavity.purcell import CavityMode, purcell_factor
from ercavity.cavity.surrogate import surrogate_mode
from ercavity.cavity.transmission import EnsembleLine, cavity_transmission, transmission_spectrum
from ercavity.config import SCHEMA, Scenario, parse_quantity, resolve_scenario
from ercavity.ensemble.decay import DetectorConfig, synthesize_decay
from ercavity.ensemble.distribution import (
    EnhancementDistribution,
    average_enhancement,
    enhancement_distribution,
    monte_carlo_enhancement,
)
from ercavity.errors import ToolkitError, UsageError
from ercavity.exporters.csv_exporter import (
    write_decay_trace,
    write_distribution,
    write_efficiency_curve,
    write_normalized_decay,
    write_spectrum,
)
from ercavity.exporters.field_grid_exporter import write_field_grid
from ercavity.exporters.output import write_output_text
from ercavity.fitting.decay import fit_decay, normalize_to_bulk
from ercavity.fitting.lorentzian import fit_lorentzian
from ercavity.parsers.field_grid_parser import FORMATS, load_field_grid
from ercavity.parsers.record_parser import load_decay_trace, load_distribution, load_spectrum
from ercavity.pumping import PumpModel, calibrate_return_branching, efficiency_vs_purcell
from ercavity.report import build_report
from ercavity.report_export import export_to_json
from ercavity.reproduce import format_table, run_checks
from ercavity.spectroscopy.absorption import (
    beer_lambert,
    confinement_for_attenuation,
    cooperativity_to_dip,
    dip_to_cooperativity,
    optical_depth_enhancement,
    saturated_cooperativity,
)
from ercavity.spectroscopy.rate_chain import (
    CONVENTIONS,
    active_density,
    branching_ratio,
    effective_purcell_from_lifetimes,
    get_convention,
    oscillator_strength,
    purcell_lifetime,
    radiative_rate,
    select_convention,
)

logger = logging.getLogger(__name__)

GREEN  = '\033[92m'
RED    = '\033[91m'
CYAN   = '\033[96m'
RESET  = '\033[0m'
BOLD   = '\033[1m'

AXES = {'x': (1.0, 0.0, 0.0), 'y': (0.0, 1.0, 0.0), 'z': (0.0, 0.0, 1.0)}


# ── FLAG HELPERS ─────────────────────────────────────────────

def _quantity(dimension: str) -> Callable[[str], Any]:
    def convert(text: str):
        try:
            return parse_quantity(text, dimension)
        except UsageError as e:
            raise argparse.ArgumentTypeError(str(e)) from None
    convert.__name__ = dimension
    return convert


def _setting(p: argparse.ArgumentParser, flag: str, key: str, help: str) -> None:
    """Flag bound to a config key; default None so config and built-ins fill the gap."""
    dimension = SCHEMA[key][0]
    p.add_argument(flag, dest=key, type=_quantity(dimension), default=None,
                   help=f"{help} [{dimension}; default from config]")


def _common(p: argparse.ArgumentParser, csv: bool = False) -> None:
    p.add_argument('--config', type=Path, default=None, help='key=value config file')
    p.add_argument('--out', type=Path, default=None, help='JSON report path (default: stdout)')
    p.add_argument('--verbose', '-v', action='store_true', help='Enable debug logging')
    if csv:
        p.add_argument('--csv-out', type=Path, default=None, help='Write the curve as CSV')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog            = 'ercavity',
        description     = 'Er:YSO nanocavity toolkit: Purcell enhancement, rate chain, pumping and fitting',
        formatter_class = argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    p = sub.add_parser('purcell', help='Purcell factor from Q and mode volume')
    _setting(p, '--q', 'q', 'quality factor')
    _setting(p, '--vnorm', 'vnorm', 'mode volume in (lambda/n)^3')
    _setting(p, '--overlap', 'overlap', 'dipole/field overlap |E.d|^2/|E_max|^2')
    _setting(p, '--lambda0', 'lambda0', 'resonance wavelength')
    _setting(p, '--n', 'n', 'refractive index')
    _common(p)

    p = sub.add_parser('modevolume', help='Mode volume of a field grid or the surrogate mode')
    p.add_argument('--grid', type=Path, default=None, help='field grid file (default: surrogate mode)')
    p.add_argument('--grid-format', choices=FORMATS, default='fieldgrid-v1')
    p.add_argument('--write-grid', type=Path, default=None, help='also write the grid used')
    _setting(p, '--lambda0', 'lambda0', 'resonance wavelength')
    _common(p)

    p = sub.add_parser('average-enhancement', help='Ensemble-averaged Purcell factor over the mode')
    p.add_argument('--grid', type=Path, default=None, help='field grid file (default: surrogate mode)')
    p.add_argument('--grid-format', choices=FORMATS, default='fieldgrid-v1')
    p.add_argument('--dist', type=Path, default=None, help='distribution JSON instead of a grid')
    p.add_argument('--dipole', choices=sorted(AXES), default='x', help='dipole axis in grid coordinates')
    p.add_argument('--z-extent', type=_quantity('length'), default=None,
                   help='coupled section |z| <= z_extent; dielectric beyond it is uncoupled')
    p.add_argument('--mc-samples', type=int, default=0, help='Monte Carlo cross-check sample count')
    p.add_argument('--seed', type=int, default=None, help='RNG seed (required with --mc-samples)')
    p.add_argument('--dist-out', type=Path, default=None, help='write the distribution JSON')
    _setting(p, '--f-max', 'f_max', 'peak Purcell factor')
    _setting(p, '--hist-bins', 'hist_bins', 'histogram bins')
    _common(p)

    p = sub.add_parser('lifetime', help='Cavity-shortened lifetime')
    _setting(p, '--tau-bulk', 'tau_bulk', 'bulk lifetime')
    _setting(p, '--f-eff', 'f_eff', 'effective Purcell factor')
    _setting(p, '--beta', 'beta', 'branching ratio')
    _common(p)

    p = sub.add_parser('invert-purcell', help='Effective Purcell factor from two lifetimes')
    _setting(p, '--tau-ref', 'tau_bulk', 'reference (bulk) lifetime')
    _setting(p, '--tau-cav', 'tau_cav', 'cavity lifetime')
    _setting(p, '--beta', 'beta', 'branching ratio')
    _common(p)

    p = sub.add_parser('transmission', help='Cavity transmission with an absorbing ensemble')
    _setting(p, '--q', 'q', 'quality factor')
    _setting(p, '--lambda0', 'lambda0', 'resonance wavelength')
    _setting(p, '--n', 'n', 'refractive index')
    _setting(p, '--vnorm', 'vnorm', 'mode volume in (lambda/n)^3')
    _setting(p, '--cooperativity', 'cooperativity', 'ensemble cooperativity')
    _setting(p, '--gamma-a', 'inhom_fwhm', 'ensemble linewidth')
    p.add_argument('--span', type=float, default=3.0, help='scan half-width in cavity linewidths')
    p.add_argument('--points', type=int, default=401)
    p.add_argument('--noise', type=float, default=0.0, help='relative Gaussian noise')
    p.add_argument('--seed', type=int, default=None, help='RNG seed (required with --noise)')
    _common(p, csv=True)

    p = sub.add_parser('dip', help='Dip depth <-> cooperativity, with saturation')
    group = p.add_mutually_exclusive_group()
    group.add_argument('--dip', type=float, default=None, help='fractional dip depth')
    _setting(group, '--cooperativity', 'cooperativity', 'unsaturated cooperativity')
    _setting(p, '--saturation', 'saturation', 'saturation parameter I/I_sat')
    _common(p)

    p = sub.add_parser('attenuation', help='Single-pass Beer-Lambert attenuation')
    _setting(p, '--alpha', 'alpha_d1', 'absorption coefficient')
    _setting(p, '--length', 'waveguide_length', 'propagation length')
    _setting(p, '--confinement', 'confinement', 'confinement factor')
    p.add_argument('--target', type=float, default=None, help='attenuation to reproduce by confinement')
    p.add_argument('--cavity-dip', type=float, default=None, help='cavity dip to compare with the single pass')
    _common(p)

    p = sub.add_parser('oscillator-strength', help='Oscillator strength from the absorption line')
    _setting(p, '--dipole-axis', 'dipole_axis', 'D1 or D2')
    p.add_argument('--alpha', type=_quantity('inverse_length'), default=None, help='override alpha_max')
    p.add_argument('--fwhm', type=_quantity('frequency'), default=None, help='override line FWHM')
    _setting(p, '--dopant-fraction', 'dopant_fraction', 'Er fraction of Y sites')
    _setting(p, '--y-density', 'y_density', 'yttrium density')
    _setting(p, '--site-share', 'site_share', 'fraction of Y sites holding the active ions')
    _setting(p, '--n', 'n', 'refractive index')
    _setting(p, '--convention', 'convention', 'local-field convention')
    _common(p)

    p = sub.add_parser('radrate', help='Radiative rate from the oscillator strength')
    _setting(p, '--f', 'oscillator_strength', 'oscillator strength')
    _setting(p, '--lambda0', 'lambda0', 'transition wavelength')
    _setting(p, '--n', 'n', 'refractive index')
    _setting(p, '--convention', 'convention', 'local-field convention')
    p.add_argument('--target-rate', type=_quantity('frequency'), default=None,
                   help='also report the convention closest to this rate')
    _common(p)

    p = sub.add_parser('branching', help='Branching ratio of the cavity-coupled transition')
    _setting(p, '--gamma-rad', 'gamma_rad', 'radiative rate')
    _setting(p, '--tau-bulk', 'tau_bulk', 'total lifetime')
    _common(p)

    p = sub.add_parser('spin-init', help='Zeeman spin-initialization efficiency')
    _setting(p, '--gamma-opt', 'gamma_opt', 'optical decay rate')
    _setting(p, '--tz', 't_z', 'Zeeman lifetime')
    _setting(p, '--calibrate-eta', 'eta_target', 'efficiency to calibrate p_return against')
    _setting(p, '--p-return', 'p_return', 'fixed return probability (skips calibration)')
    p.add_argument('--reduction', type=float, nargs='+', default=[1.0], help='lifetime reduction factors')
    _common(p, csv=True)

    p = sub.add_parser('synth-decay', help='Synthesize a photoluminescence decay trace')
    p.add_argument('--dist', type=Path, default=None, help='distribution JSON (default: two populations)')
    p.add_argument('--fast-fraction', type=float, default=0.5, help='coupled fraction for the two-population model')
    _setting(p, '--f-eff', 'f_eff', 'Purcell factor of the coupled population')
    _setting(p, '--beta', 'beta', 'branching ratio')
    _setting(p, '--tau-bulk', 'tau_bulk_measured', 'bulk lifetime')
    _setting(p, '--pulse', 'pulse_duration', 'excitation pulse length')
    _setting(p, '--period', 'repetition_period', 'repetition period')
    _setting(p, '--bin-width', 'bin_width', 'bin width')
    _setting(p, '--n-bins', 'n_bins', 'number of bins')
    _setting(p, '--t0', 't0', 'delay after the pulse')
    _setting(p, '--dark-rate', 'dark_rate', 'dark count rate')
    _setting(p, '--scale', 'collection_scale', 'expected counts per bin at t=0 per pulse')
    _setting(p, '--n-pulses', 'n_pulses', 'pulses accumulated')
    p.add_argument('--weighting', choices=('population', 'pulse'), default='population')
    p.add_argument('--no-poisson', action='store_true', help='emit the expected trace')
    p.add_argument('--seed', type=int, default=None, help='RNG seed (required unless --no-poisson)')
    _common(p, csv=True)

    p = sub.add_parser('fit-decay', help='Fit one or two exponentials to a decay trace')
    p.add_argument('--in', dest='infile', type=Path, required=True, help='trace CSV (time_s,counts)')
    p.add_argument('--components', type=int, choices=(1, 2), default=1)
    p.add_argument('--fix-tau1', type=_quantity('time'), default=None, help='freeze the slow time constant')
    p.add_argument('--fix-background', type=float, default=None, help='freeze the background (counts per bin)')
    p.add_argument('--normalize', action='store_true', help='CSV output scaled by the bulk coefficient')
    _common(p, csv=True)

    p = sub.add_parser('fit-lorentzian', help='Fit a Lorentzian and report Q')
    p.add_argument('--in', dest='infile', type=Path, required=True, help='spectrum CSV')
    _common(p)

    p = sub.add_parser('reproduce-paper', help='Run every acceptance check and print a table')
    _common(p)
    return parser


# ── COMMANDS ─────────────────────────────────────────────────

def _mode(cfg: Dict[str, Any]) -> CavityMode:
    return CavityMode(lambda0=cfg['lambda0'], Q=cfg['q'], V_norm=cfg['vnorm'], n=cfg['n'])


def _require_seed(args, reason: str) -> None:
    if args.seed is None:
        raise UsageError(f"--seed is required {reason}")


def cmd_purcell(args, cfg) -> Dict[str, Any]:
    mode = _mode(cfg)
    return {'results': {'F_P': purcell_factor(mode, cfg['overlap']), 'linewidth': mode.kappa,
                        'V_physical': mode.V_physical},
            'units': {'F_P': '1', 'linewidth': 'Hz', 'V_physical': 'm^3'}}


def _grid(args):
    if args.grid is not None:
        return load_field_grid(args.grid, args.grid_format)
    _step("Building surrogate mode...")
    return surrogate_mode()


def cmd_modevolume(args, cfg) -> Dict[str, Any]:
    grid = _grid(args)
    mv = mode_volume(grid, cfg['lambda0'])
    artifacts = []
    if args.write_grid:
        artifacts.append(str(write_field_grid(grid, args.write_grid, args.grid_format)))
    return {'results': {'V_physical': mv.V_physical, 'V_norm': mv.V_norm, 'n': mv.n, 'dims': list(grid.dims)},
            'units': {'V_physical': 'm^3', 'V_norm': '(lambda/n)^3'}, 'artifacts': artifacts}


def cmd_average_enhancement(args, cfg) -> Dict[str, Any]:
    if args.mc_samples:
        _require_seed(args, "with --mc-samples")
    if args.dist is not None:
        dist = load_distribution(args.dist)
    else:
        grid = _grid(args)
        region = material_mask(grid, args.z_extent) if args.z_extent is not None else None
        dist = enhancement_distribution(grid, AXES[args.dipole], cfg['f_max'], region, cfg['hist_bins'])
    results = {'F_eff': average_enhancement(dist), 'uncoupled_fraction': dist.uncoupled_fraction,
               'n_bins': int(dist.factors.size)}
    if args.mc_samples:
        mean, stderr = monte_carlo_enhancement(dist, args.mc_samples, args.seed)
        results.update(F_eff_mc=mean, F_eff_mc_stderr=stderr)
    artifacts = [str(write_distribution(dist, args.dist_out))] if args.dist_out else []
    return {'results': results, 'artifacts': artifacts}


def cmd_lifetime(args, cfg) -> Dict[str, Any]:
    tau = purcell_lifetime(cfg['tau_bulk'], cfg['f_eff'], cfg['beta'])
    return {'results': {'tau_cav': tau, 'reduction_factor': cfg['tau_bulk'] / tau}, 'units': {'tau_cav': 's'}}


def cmd_invert_purcell(args, cfg) -> Dict[str, Any]:
    return {'results': {'F_eff': effective_purcell_from_lifetimes(cfg['tau_bulk'], cfg['tau_cav'], cfg['beta'])}}


def cmd_transmission(args, cfg) -> Dict[str, Any]:
    if args.noise > 0:
        _require_seed(args, "with --noise")
    mode = _mode(cfg)
    nu0 = float(mode.nu0)
    ensemble = EnsembleLine(nu_a=nu0, gamma_a=cfg['inhom_fwhm'], cooperativity=cfg['cooperativity'])
    T0 = cavity_transmission(nu0, mode, ensemble)
    artifacts = []
    if args.csv_out:
        nu = nu0 + np.linspace(-args.span, args.span, args.points) * mode.kappa
        scan = transmission_spectrum(mode, nu, ensemble, noise=args.noise, seed=args.seed)
        artifacts.append(str(write_spectrum(scan, args.csv_out)))
    return {'results': {'T_resonant': T0, 'dip': 1.0 - T0, 'linewidth': mode.kappa},
            'units': {'linewidth': 'Hz'}, 'artifacts': artifacts}


def cmd_dip(args, cfg) -> Dict[str, Any]:
    C0 = dip_to_cooperativity(args.dip) if args.dip is not None else cfg['cooperativity']
    C = saturated_cooperativity(C0, cfg['saturation'])
    return {'results': {'cooperativity': C0, 'dip': cooperativity_to_dip(C0),
                        'saturated_cooperativity': C, 'saturated_dip': cooperativity_to_dip(C)}}


def cmd_attenuation(args, cfg) -> Dict[str, Any]:
    absorbed = beer_lambert(cfg['alpha_d1'], cfg['waveguide_length'], cfg['confinement'])
    results = {'attenuation': absorbed}
    if args.target is not None:
        results['confinement_for_target'] = confinement_for_attenuation(
            args.target, cfg['alpha_d1'], cfg['waveguide_length'])
    if args.cavity_dip is not None:
        results['optical_depth_enhancement'] = optical_depth_enhancement(args.cavity_dip, absorbed)
    return {'results': results}


def cmd_oscillator_strength(args, cfg) -> Dict[str, Any]:
    axis = cfg['dipole_axis'].lower()
    alpha = args.alpha if args.alpha is not None else cfg[f"alpha_{axis}"]
    fwhm = args.fwhm if args.fwhm is not None else cfg[f"fwhm_{axis}"]
    N = active_density(cfg['dopant_fraction'], cfg['y_density'], cfg['site_share'])
    conv = get_convention(cfg['convention'])
    f = oscillator_strength(alpha, fwhm, N, cfg['n'], conv)
    return {'results': {'oscillator_strength': f, 'N': N, 'alpha_max': alpha, 'fwhm': fwhm},
            'units': {'N': '1/m^3', 'alpha_max': '1/m', 'fwhm': 'Hz'}, 'conventions': {'local_field': conv.name}}


def cmd_radrate(args, cfg) -> Dict[str, Any]:
    conv = get_convention(cfg['convention'])
    results = {'gamma_rad': radiative_rate(cfg['oscillator_strength'], cfg['lambda0'], cfg['n'], conv)}
    if args.target_rate is not None:
        best = select_convention(cfg['oscillator_strength'], cfg['lambda0'], cfg['n'], args.target_rate)
        results['closest_convention'] = best.name
        results['rates_by_convention'] = {
            name: radiative_rate(cfg['oscillator_strength'], cfg['lambda0'], cfg['n'], c)
            for name, c in CONVENTIONS.items()
        }
    return {'results': results, 'units': {'gamma_rad': 'Hz'}, 'conventions': {'local_field': conv.name}}


def cmd_branching(args, cfg) -> Dict[str, Any]:
    return {'results': {'beta': branching_ratio(cfg['gamma_rad'], cfg['tau_bulk'])}}


def cmd_spin_init(args, cfg) -> Dict[str, Any]:
    if args.p_return is not None:
        p = cfg['p_return']
    else:
        p = calibrate_return_branching(cfg['eta_target'], cfg['gamma_opt'], cfg['t_z'])
    model = PumpModel(gamma_opt=cfg['gamma_opt'], T_Z=cfg['t_z'], p_return=p)
    etas = efficiency_vs_purcell(model, args.reduction)
    artifacts = []
    if args.csv_out:
        artifacts.append(str(write_efficiency_curve(args.reduction, etas, args.csv_out)))
    return {'results': {'p_return': p, 'reduction_factors': list(args.reduction), 'eta': etas},
            'artifacts': artifacts}


def cmd_synth_decay(args, cfg) -> Dict[str, Any]:
    if not args.no_poisson:
        _require_seed(args, "for Poisson sampling (or pass --no-poisson)")
    if args.dist is not None:
        dist = load_distribution(args.dist)
    else:
        dist = EnhancementDistribution([cfg['f_eff']], [args.fast_fraction], 1.0 - args.fast_fraction)
    det = DetectorConfig(
        pulse_duration    = cfg['pulse_duration'],
        repetition_period = cfg['repetition_period'],
        dark_rate         = cfg['dark_rate'],
        collection_scale  = cfg['collection_scale'],
        rng_seed          = args.seed,
        bin_width         = cfg['bin_width'],
        n_bins            = cfg['n_bins'],
        t0                = cfg['t0'],
        poisson           = not args.no_poisson,
        weighting         = args.weighting,
    )
    trace = synthesize_decay(dist, cfg['beta'], cfg['tau_bulk_measured'], det, cfg['n_pulses'])
    artifacts = [str(write_decay_trace(trace, args.csv_out))] if args.csv_out else []
    return {'results': {'total_counts': trace.total_counts, 'n_bins': len(trace)}, 'artifacts': artifacts}


def cmd_fit_decay(args, cfg) -> Dict[str, Any]:
    trace = load_decay_trace(args.infile)
    fit = fit_decay(trace, args.components, args.fix_tau1, args.fix_background)
    artifacts = []
    if args.csv_out:
        if args.normalize:
            times, values = normalize_to_bulk(trace, fit)
            artifacts.append(str(write_normalized_decay(times, values, args.csv_out)))
        else:
            artifacts.append(str(write_decay_trace(trace, args.csv_out)))
    return {'results': {'fit': fit.to_dict()}, 'warnings': list(fit.warnings), 'artifacts': artifacts}


def cmd_fit_lorentzian(args, cfg) -> Dict[str, Any]:
    fit = fit_lorentzian(load_spectrum(args.infile))
    return {'results': {'fit': fit.to_dict(), 'Q': fit.derived['Q']}, 'warnings': list(fit.warnings)}


COMMANDS: Dict[str, Callable] = {
    'purcell':             cmd_purcell,
    'modevolume':          cmd_modevolume,
    'average-enhancement': cmd_average_enhancement,
    'lifetime':            cmd_lifetime,
    'invert-purcell':      cmd_invert_purcell,
    'transmission':        cmd_transmission,
    'dip':                 cmd_dip,
    'attenuation':         cmd_attenuation,
    'oscillator-strength': cmd_oscillator_strength,
    'radrate':             cmd_radrate,
    'branching':           cmd_branching,
    'spin-init':           cmd_spin_init,
    'synth-decay':         cmd_synth_decay,
    'fit-decay':           cmd_fit_decay,
    'fit-lorentzian':      cmd_fit_lorentzian,
}

# Command-line options that are not config keys but belong in the echoed inputs.
_RUN_OPTIONS = ('grid', 'grid_format', 'dist', 'dipole', 'z_extent', 'mc_samples', 'seed', 'span', 'points',
                'noise', 'dip', 'target', 'cavity_dip', 'alpha', 'fwhm', 'target_rate', 'reduction',
                'fast_fraction', 'weighting', 'no_poisson', 'infile', 'components', 'fix_tau1',
                'fix_background', 'normalize')


def run(args: argparse.Namespace) -> int:
    flags = {k: v for k, v in vars(args).items() if k in SCHEMA}
    outputs = [str(p) for p in (args.out, getattr(args, 'csv_out', None)) if p is not None]
    scenario: Scenario = resolve_scenario(args.command, flags, args.config, outputs)

    if args.command == 'reproduce-paper':
        return _reproduce(args, scenario)

    t0 = time.time()
    _step(f"Running {args.command}...")
    out = COMMANDS[args.command](args, scenario.inputs)
    extras = {k: _jsonable(getattr(args, k)) for k in _RUN_OPTIONS if getattr(args, k, None) is not None}
    report = build_report(
        command     = args.command,
        inputs      = {**scenario.inputs, **extras},
        results     = out['results'],
        units       = out.get('units'),
        conventions = out.get('conventions'),
        warnings    = out.get('warnings'),
        artifacts   = out.get('artifacts'),
    )
    _emit(export_to_json(report), args.out)
    _ok(f"{args.command} done in {_elapsed(t0)}")
    return 0


def _reproduce(args, scenario: Scenario) -> int:
    checks = run_checks()
    _print(format_table(checks))
    report = build_report(
        command = 'reproduce-paper',
        inputs  = scenario.inputs,
        results = {'checks': checks, 'passed': all(c.passed for c in checks)},
    )
    if args.out:
        _emit(export_to_json(report), args.out)
    failed = [c.number for c in checks if not c.passed]
    if failed:
        _print(f"{RED}FAILED checks: {failed}{RESET}", err=True)
        return 1
    _ok("all checks passed")
    return 0


def _jsonable(value):
    return str(value) if isinstance(value, Path) else value


def _emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text + '\n')
        return
    if path.exists():
        logger.warning(f"Overwriting {path}")
    write_output_text(path, text + '\n')


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(
        level   = logging.DEBUG if args.verbose else logging.INFO,
        format  = '%(asctime)s [%(levelname)s] %(name)s: %(message)s',
        datefmt = '%H:%M:%S',
    )
    try:
        return run(args)
    except ToolkitError as e:
        _print(f"{RED}Error: {e}{RESET}", err=True)
        return e.exit_code
    except OSError as e:
        _print(f"{RED}Error: {e}{RESET}", err=True)
        return UsageError.exit_code


# ── PRINT HELPERS ────────────────────────────────────────────

def _step(msg):
    _print(f"  {CYAN}->{RESET} {msg}", err=True)

def _ok(msg):
    _print(f"  {GREEN}[OK]{RESET} {msg}", err=True)

def _print(msg, err: bool = False):
    print(msg, file=sys.stderr if err else sys.stdout)

def _elapsed(t0: float) -> str:
    s = time.time() - t0
    return f"{s:.1f}s" if s < 60 else f"{int(s//60)}m {int(s%60)}s"


if __name__ == '__main__':
    sys.exit(main())
