"""Command-line entry point: ``cavitynet <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from . import architecture as arch
from . import config as C
from .cavity import (backscatter_error, best_cell, cooperativity, evolve_transfer,
                     landscape_rows, LANDSCAPE_HEADER, optimize_omega0, scan_landscape)
from .errors import BoundarySolutionError, ConfigError, IntegrationError, NumericError
from .herald import ErrorBudget, full_protocol_sim, teleported_cnot_error
from .ionchain import com_spread, normal_modes, thermal_infidelity_mc

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

UNITS_HELP = """\
units: all frequencies and rates are angular (rad/s) unless written as
{"value": x, "unit": "Hz" | "MHz_times_2pi" | "rad_per_s"} in the config;
times are seconds, lengths meters, temperatures kelvin.
"""


class _Failure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _manifest(args, doc, outputs):
    return {
        "subcommand": args.command,
        "config": doc,
        "seed": args.seed,
        "version": __version__,
        "outputs": outputs,
    }


def _num(x):
    if isinstance(x, (np.floating, np.integer)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return _num(obj)


def _dump_json(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(_num(v)) if isinstance(_num(v), float) else _num(v) for v in row])
    return buf.getvalue()


def _write(path, text):
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise _Failure(EXIT_IO, f"cannot write {path}: {exc}") from exc


def _emit(args, doc, payload, *, table=None, default_format="json"):
    """Write ``payload`` as JSON, or ``table=(header, rows)`` as CSV.

    CSV output gets a sidecar ``<out>.manifest.json`` (stderr without --out)
    carrying the manifest and ``payload``.
    """
    fmt = args.format or default_format
    outputs = [args.out] if args.out else ["-"]
    if fmt == "csv":
        if table is None:
            raise _Failure(EXIT_CONFIG, f"{args.command} has no CSV output")
        _write(args.out, _csv_text(*table))
        side = dict(payload, manifest=_manifest(args, doc, outputs))
        if args.out:
            _write(str(args.out) + ".manifest.json", _dump_json(side))
        else:
            sys.stderr.write(_dump_json(side))
    else:
        body = dict(payload)
        if table is not None:
            body["table"] = {"header": list(table[0]), "rows": [list(r) for r in table[1]]}
        body["manifest"] = _manifest(args, doc, outputs)
        _write(args.out, _dump_json(body))


def cmd_transfer(args, doc):
    cfg = C.transfer_config(doc)
    result = evolve_transfer(cfg)
    payload = {"transfer": result.to_dict(),
               "cooperativity": cooperativity(cfg.params) if cfg.params.kappa > 0
               and cfg.params.gamma > 0 else None,
               "backscatter": asdict(backscatter_error(result, C.branching_spec(doc)))}
    _emit(args, doc, payload)


def _landscape_grids(args, doc):
    ls = doc["landscape"]
    om_lo, om_hi = C.freq(ls["omega0_min"]), C.freq(ls["omega0_max"])
    d_lo, d_hi = ls["duration_min"], ls["duration_max"]
    n_om, n_d = ls["n_omega0"], ls["n_duration"]
    if args.omega0_range:
        om_lo, om_hi = args.omega0_range
    if args.duration_range:
        d_lo, d_hi = args.duration_range
    if args.grid:
        n_om, n_d = args.grid
    if min(om_lo, d_lo) <= 0:
        raise ConfigError("landscape ranges must be positive")
    return np.linspace(om_lo, om_hi, n_om).tolist(), np.linspace(d_lo, d_hi, n_d).tolist()


def cmd_landscape(args, doc):
    cfg = C.transfer_config(doc)
    om, du = _landscape_grids(args, doc)
    cells = scan_landscape(cfg, om, du, workers=args.workers)
    best = best_cell(cells)
    summary = {
        "n_cells": len(cells),
        "n_failed": sum(not c.ok for c in cells),
        "argmax": None if best is None else {
            "omega0_rad_s": best.omega0, "omega0_MHz_times_2pi": best.omega0 / (2e6 * math.pi),
            "duration_s": best.duration, "p_success": best.result.p_success},
    }
    _emit(args, doc, summary, table=(LANDSCAPE_HEADER, landscape_rows(cells)), default_format="csv")


def cmd_optimize(args, doc):
    cfg = C.transfer_config(doc)
    o = doc["optimize"]
    bracket = (C.freq(o["omega0_min"]), C.freq(o["omega0_max"]))
    try:
        res = optimize_omega0(cfg, o["duration"], bracket, n_coarse=o["n_coarse"])
    except BoundarySolutionError as exc:
        raise _Failure(EXIT_NUMERIC, f"{exc}; best endpoint omega0={exc.x_best:.6g} rad/s "
                                     f"p={exc.f_best:.6g}") from exc
    _emit(args, doc, {"optimize": {**asdict(res),
                                   "omega0_star_MHz_times_2pi": res.omega0_star / (2e6 * math.pi)}})


def cmd_protocol(args, doc):
    cfg = C.transfer_config(doc)
    p = doc["protocol"]
    out, (t1, t2) = full_protocol_sim(cfg, interpulse_gap=p["interpulse_gap"],
                                      swap_error=p["swap_error"],
                                      interpulse_phase=p["interpulse_phase"])
    budget = C.error_budget(doc)
    eps_bell = out.infidelity if out.heralded else None
    payload = {"bell": out.to_dict(), "transfers": [t1.to_dict(), t2.to_dict()],
               "eps_cnot": None if eps_bell is None else teleported_cnot_error(
                   ErrorBudget(budget.eps_local, budget.eps_M, min(1.0, max(0.0, eps_bell))))}
    _emit(args, doc, payload)


def cmd_thermal(args, doc):
    if args.seed is None:
        raise ConfigError("thermal requires --seed")
    spec = C.chain_spec(doc)
    cfg = C.transfer_config(doc)
    th = doc["thermal"]
    res = thermal_infidelity_mc(spec, cfg, interpulse_gap=th["interpulse_gap"],
                                n_modes=th["n_modes"], n_samples=th["n_samples"],
                                seed=args.seed, independent_nodes=th["independent_nodes"],
                                workers=args.workers)
    _emit(args, doc, {"thermal": res.to_dict(), "com_spread_m": com_spread(spec)})


def cmd_modes(args, doc):
    spec = C.chain_spec(doc)
    m = normal_modes(spec)
    b = m.vecs[spec.comm_index]
    rows = [(p, float(m.freqs[p]), float(b[p])) for p in range(spec.n_ions)]
    payload = {"positions": m.u.tolist(), "length_scale_m": m.ell,
               "eigenvalues": m.eigenvalues.tolist(), "com_spread_m": com_spread(spec),
               "comm_index": spec.comm_index,
               "reference_mass_kg": spec.m_ref,
               "uniform_masses": len(set(spec.masses)) == 1,
               # Mixed chains: lowest mode departs from the reference-ion frequency.
               "lowest_mode_over_omega_com": float(m.freqs[0] / spec.omega_com)}
    _emit(args, doc, payload,
          table=(("index", "frequency_rad_s", "participation_of_comm_ion"), rows), default_format="csv")


def cmd_throughput(args, doc):
    models = C.rate_models(doc)
    rows = arch.rate_curves(models, doc["architecture"]["M_values"])
    budget = C.timing_budget(doc)
    payload = {"tau_serial_from_budget_s": arch.serial_budget(budget),
               "sk1_duration_s": arch.sk1_duration(budget.raman_rabi)}
    _emit(args, doc, payload, table=(arch.RATE_HEADER, rows), default_format="csv")


def cmd_capacity(args, doc):
    ion = doc["capacity"]["ion"]
    ryd = doc["capacity"]["rydberg"]
    ic = arch.ion_capacity(ion["chain_length"], ion["gap"], ion["rayleigh"], ion["M"],
                           ion["ions_per_chain"])
    rc = arch.rydberg_capacity(ryd["spacing"], ryd["rayleigh"], ryd["rows"], ryd["fill"])
    geom = arch.derived_cavity(C.cavity_geometry(doc))
    _emit(args, doc, {"ion": asdict(ic), "rydberg_qubits": rc, "cavity": asdict(geom),
                      "cavity_kappa_Hz": geom.kappa / (2 * math.pi)})


def cmd_scaling(args, doc):
    s = doc["scaling"]
    if args.n is not None:
        s["n_qubits"] = args.n
    if args.dimension is not None:
        s["dimension"] = "inf" if args.dimension in ("inf", "infinity") else float(args.dimension)
    if args.parallel is not None:
        s["n_parallel"] = args.parallel
    C.validate(doc)
    q = C.scaling_query(doc)
    eps_cnot = 2 * q.eps_r
    payload = {
        "relative_time": arch.nonlocal_time_scaling(q),
        "storage_error": arch.storage_error(q),
        "storage_limited_qubits": arch.storage_limited_qubits(eps_cnot, q.gate_time,
                                                              q.qubit_lifetime),
        "teleported_error": eps_cnot,
    }
    rows = [(d, arch.swap_gate_error(d, q.eps_r), eps_cnot)
            for d in range(1, s["max_distance"] + 1)]
    _emit(args, doc, payload, table=(("d", "swap_error", "teleported_error"), rows))


COMMANDS = {
    "transfer": (cmd_transfer, "simulate one photon transfer"),
    "landscape": (cmd_landscape, "scan success probability over (omega0, duration)"),
    "optimize": (cmd_optimize, "optimize omega0 at fixed duration"),
    "protocol": (cmd_protocol, "two-transfer heralded Bell protocol"),
    "thermal": (cmd_thermal, "thermal-motion Bell infidelity Monte Carlo (needs --seed)"),
    "modes": (cmd_modes, "ion-chain equilibrium and axial normal modes"),
    "throughput": (cmd_throughput, "entanglement-distribution time vs chain count"),
    "capacity": (cmd_capacity, "trap capacity and derived cavity parameters"),
    "scaling": (cmd_scaling, "nonlocal gate time, storage and swap error scaling"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="config JSON, bundled preset name "
                        f"({', '.join(C.PRESETS)}), or a previous output with a manifest")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="dotted-path override, VALUE parsed as JSON")
    common.add_argument("--seed", type=int, help="unsigned integer seed")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes for scans and Monte Carlo")

    parser = argparse.ArgumentParser(prog="cavitynet", description=__doc__, epilog=UNITS_HELP,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}
    for name, (_, help_text) in COMMANDS.items():
        subs[name] = sub.add_parser(name, parents=[common], help=help_text,
                                    description=help_text, epilog=UNITS_HELP,
                                    formatter_class=argparse.RawDescriptionHelpFormatter)
    ls = subs["landscape"]
    ls.add_argument("--omega0-range", nargs=2, type=float, metavar=("LO", "HI"),
                    help="peak Rabi frequency range, rad/s")
    ls.add_argument("--duration-range", nargs=2, type=float, metavar=("LO", "HI"),
                    help="pulse duration range, s")
    ls.add_argument("--grid", nargs=2, type=int, metavar=("N_OMEGA0", "N_DURATION"))
    sc = subs["scaling"]
    sc.add_argument("--n", type=int, help="number of qubits")
    sc.add_argument("--dimension", help="connectivity dimension D, or 'inf'")
    sc.add_argument("--parallel", type=float, help="parallel operations N*")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None and args.seed < 0:
        parser.error("--seed must be unsigned")
    handler = COMMANDS[args.command][0]
    try:
        doc = C.resolve(args.config, args.overrides)
        handler(args, doc)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, NumericError, ZeroDivisionError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _Failure as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except (FileNotFoundError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
