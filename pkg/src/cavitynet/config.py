"""JSON configuration: defaults, strict validation, overrides and presets.

Frequencies are either bare numbers (rad/s) or ``{"value": x, "unit": u}``
with ``u`` in ``rad_per_s``, ``Hz`` or ``MHz_times_2pi``. Times are seconds,
lengths meters, temperatures kelvin.
"""

import copy
import json
import math
from importlib import resources
from pathlib import Path

import jsonschema

from .architecture import (ArchitectureParams, CavityGeometry, RateModels, ScalingQuery,
                           TimingBudget)
from .cavity import BranchingSpec, CavityAtomParams, PulseProfile, PulseShape, TransferConfig
from .errors import ConfigError
from .herald import ErrorBudget
from .ionchain import ChainSpec
from .trajectories import from_spec as trajectory_from_spec
from .units import AMU, FREQUENCY_UNITS, to_angular

PRESETS = ("ion_barium", "rydberg_rb")

_FREQ = {
    "oneOf": [
        {"type": "number"},
        {"type": "object",
         "properties": {"value": {"type": "number"}, "unit": {"enum": list(FREQUENCY_UNITS)}},
         "required": ["value", "unit"], "additionalProperties": False},
    ]
}
_NONNEG_FREQ = {
    "oneOf": [
        {"type": "number", "minimum": 0},
        {"type": "object",
         "properties": {"value": {"type": "number", "minimum": 0},
                        "unit": {"enum": list(FREQUENCY_UNITS)}},
         "required": ["value", "unit"], "additionalProperties": False},
    ]
}
_PROB = {"type": "number", "minimum": 0, "maximum": 1}
_POS = {"type": "number", "exclusiveMinimum": 0}
_NONNEG = {"type": "number", "minimum": 0}
_COUNT = {"type": "integer", "minimum": 1}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_TRAJECTORY = _obj({
    "kind": {"enum": ["constant", "sinusoid", "mode_sum"]},
    "value": {"type": "number"},
    "g0": {"type": "number"},
    "wavelength": _POS,
    "amplitude": {"type": "number"},
    "frequency": _NONNEG,
    "phase": {"type": "number"},
    "amplitudes": {"type": "array", "items": {"type": "number"}},
    "omegas": {"type": "array", "items": {"type": "number"}},
    "phases": {"type": "array", "items": {"type": "number"}},
}, ["kind"])

SCHEMA = _obj({
    "name": {"type": "string"},
    "description": {"type": "string"},
    "cavity": _obj({"g_A": _NONNEG_FREQ, "g_B": _NONNEG_FREQ, "kappa": _NONNEG_FREQ,
                    "gamma": _NONNEG_FREQ, "delta": _FREQ}),
    "pulse": _obj({"omega0": _NONNEG_FREQ, "duration": _POS,
                   "shape": _obj({"pump_center_fraction": _PROB,
                                  "stokes_center_fraction": _PROB,
                                  "width_fraction": _PROB})}),
    "integrator": _obj({"rtol": _POS, "atol": _POS, "max_step_fraction": _POS}),
    "trajectories": _obj({"A": _TRAJECTORY, "B": _TRAJECTORY}),
    "protocol": _obj({"interpulse_gap": _POS, "swap_error": _PROB,
                      "interpulse_phase": {"type": "number"}}),
    "branching": _obj({"p_backscatter_branch": _PROB, "include_sender": {"type": "boolean"}}),
    "budget": _obj({"eps_local": _PROB, "eps_M": _PROB, "eps_bell": _PROB}),
    "landscape": _obj({"omega0_min": _NONNEG_FREQ, "omega0_max": _NONNEG_FREQ,
                       "n_omega0": _COUNT, "duration_min": _POS, "duration_max": _POS,
                       "n_duration": _COUNT}),
    "optimize": _obj({"duration": _POS, "omega0_min": _NONNEG_FREQ,
                      "omega0_max": _NONNEG_FREQ, "n_coarse": {"type": "integer", "minimum": 3}}),
    "chain": _obj({"n_ions": _COUNT,
                   "masses_amu": {"type": "array", "items": _POS, "minItems": 1},
                   "ion_mass_amu": _POS,
                   "omega_com": _NONNEG_FREQ, "temperature": _NONNEG,
                   "comm_index": {"type": ["integer", "null"], "minimum": 0},
                   "cavity_wavelength": _POS, "g0": _NONNEG_FREQ}),
    "thermal": _obj({"n_modes": _COUNT, "n_samples": _COUNT, "interpulse_gap": _POS,
                     "independent_nodes": {"type": "boolean"}}),
    "architecture": _obj({"tau_serial": _NONNEG, "tau_parallel": _NONNEG,
                          "p_success": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                          "ions_per_chain": _COUNT,
                          "M_values": {"type": "array", "items": {"type": "integer",
                                                                  "minimum": 0}},
                          "photonic_two_ion_time": _NONNEG, "purification_factor": _POS,
                          "insertion_loss_db_per_photon": _NONNEG,
                          "photons_per_attempt": _COUNT, "switch_overhead": _NONNEG,
                          "shuttle_per_op_time": _NONNEG, "single_cavity_limit": _COUNT}),
    "timing": _obj({"transfer_time": _POS, "raman_rabi": _NONNEG_FREQ,
                    "n_transfers": {"type": "integer", "minimum": 0},
                    "n_rotations": {"type": "integer", "minimum": 0}}),
    "geometry": _obj({"length": _POS, "finesse": _POS, "waist": _POS, "wavelength": _POS}),
    "capacity": _obj({
        "ion": _obj({"chain_length": _POS, "gap": _NONNEG, "rayleigh": _POS, "M": _COUNT,
                     "ions_per_chain": _COUNT}),
        "rydberg": _obj({"spacing": _POS, "rayleigh": _POS, "rows": _COUNT,
                         "fill": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}}),
    }),
    "scaling": _obj({"n_qubits": _COUNT,
                     "dimension": {"oneOf": [{"type": "number", "minimum": 1},
                                             {"enum": ["inf"]}]},
                     "n_parallel": {"type": "number", "minimum": 1},
                     "gate_time": _NONNEG, "qubit_lifetime": _POS, "eps_r": _PROB,
                     "max_distance": _COUNT}),
})


def _mhz(x):
    return {"value": x, "unit": "MHz_times_2pi"}


# Trapped-ion parameter set; presets override sections wholesale or in part.
DEFAULTS = {
    "name": "default",
    "cavity": {"g_A": _mhz(5.8), "g_B": _mhz(5.8), "kappa": _mhz(0.340),
               "gamma": _mhz(25.0), "delta": 0.0},
    "pulse": {"omega0": _mhz(18.0), "duration": 1.0e-6,
              "shape": {"pump_center_fraction": 0.65, "stokes_center_fraction": 0.35,
                        "width_fraction": 0.20}},
    "integrator": {"rtol": 1e-8, "atol": 1e-10, "max_step_fraction": 0.005},
    "trajectories": {"A": {"kind": "constant"}, "B": {"kind": "constant"}},
    "protocol": {"interpulse_gap": 2.5e-6, "swap_error": 0.0, "interpulse_phase": 0.0},
    "branching": {"p_backscatter_branch": 0.029 * 3 / 25, "include_sender": False},
    "budget": {"eps_local": 1e-3, "eps_M": 0.0, "eps_bell": 0.0},
    "landscape": {"omega0_min": _mhz(5.0), "omega0_max": _mhz(40.0), "n_omega0": 20,
                  "duration_min": 0.25e-6, "duration_max": 1.0e-6, "n_duration": 20},
    "optimize": {"duration": 1.0e-6, "omega0_min": _mhz(5.0), "omega0_max": _mhz(40.0),
                 "n_coarse": 16},
    "chain": {"n_ions": 25, "ion_mass_amu": 137.0, "omega_com": {"value": 200e3, "unit": "Hz"},
              "temperature": 1e-3, "comm_index": None, "cavity_wavelength": 455e-9},
    "thermal": {"n_modes": 5, "n_samples": 1000, "interpulse_gap": 2.5e-6,
                "independent_nodes": True},
    "architecture": {"tau_serial": 5.3e-6, "tau_parallel": 28e-6, "p_success": 0.40,
                     "ions_per_chain": 25, "M_values": list(range(2, 42, 2)),
                     "photonic_two_ion_time": 5e-3, "purification_factor": 2.0,
                     "insertion_loss_db_per_photon": 1.3, "photons_per_attempt": 2,
                     "switch_overhead": 10e-3, "shuttle_per_op_time": 1e-3,
                     "single_cavity_limit": 500},
    "timing": {"transfer_time": 1.0e-6, "raman_rabi": _mhz(3.0), "n_transfers": 2,
               "n_rotations": 4},
    "geometry": {"length": 2.8e-3, "finesse": 1.575e5, "waist": 13e-6, "wavelength": 455e-9},
    "capacity": {"ion": {"chain_length": 88e-6, "gap": 30e-6, "rayleigh": 1170e-6, "M": 20,
                         "ions_per_chain": 25},
                 "rydberg": {"spacing": 2.6e-6, "rayleigh": 403e-6, "rows": 1, "fill": 0.25}},
    "scaling": {"n_qubits": 100, "dimension": "inf", "n_parallel": 1, "gate_time": 10e-6,
                "qubit_lifetime": 26.0, "eps_r": 1e-3, "max_distance": 10},
}


def deep_merge(base, override):
    out = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = deep_merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def preset_path(name):
    stem = name[:-5] if name.endswith(".json") else name
    return resources.files("cavitynet") / "presets" / f"{stem}.json"


def _read_json(path):
    text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def load_document(path):
    """Read a config file, a bundled preset name, or a run manifest."""
    p = Path(path)
    if not p.exists():
        candidate = preset_path(p.name)
        if candidate.is_file():
            p = candidate
        else:
            raise FileNotFoundError(f"no such config file or preset: {path}")
    doc = _read_json(p)
    if isinstance(doc, dict) and "manifest" in doc and "config" in doc["manifest"]:
        doc = doc["manifest"]["config"]
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return doc


def validate(doc):
    errors = sorted(jsonschema.Draft202012Validator(SCHEMA).iter_errors(doc),
                    key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for e in errors:
            where = ".".join(str(x) for x in e.absolute_path) or "<root>"
            lines.append(f"{where}: {e.message}")
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(lines))


def _resolve_key(doc, dotted):
    parts = dotted.split(".")
    if parts[0] not in SCHEMA["properties"]:
        hits = [s for s, v in doc.items() if isinstance(v, dict) and parts[0] in v]
        if len(hits) != 1:
            raise ConfigError(f"--set {dotted}: cannot resolve key"
                              + (f" (ambiguous: {', '.join(hits)})" if hits else ""))
        parts = [hits[0]] + parts
    return parts


def apply_override(doc, assignment):
    """Apply one ``KEY=VALUE`` override in place; VALUE is parsed as JSON."""
    if "=" not in assignment:
        raise ConfigError(f"--set expects KEY=VALUE, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    parts = _resolve_key(doc, key.strip())
    node = doc
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"--set {key}: {part} is not a section")
    node[parts[-1]] = value


def resolve(path=None, overrides=()):
    """Fully defaulted, validated configuration document."""
    user = load_document(path) if path else {}
    if user:
        validate(user)
    doc = deep_merge(DEFAULTS, user)
    for assignment in overrides:
        apply_override(doc, assignment)
    validate(doc)
    return doc


def freq(value):
    if isinstance(value, dict):
        return to_angular(value["value"], value["unit"])
    return float(value)


def _checked(factory, section, **kw):
    try:
        return factory(**kw)
    except ValueError as exc:
        raise ConfigError(f"{section}: {exc}") from exc


def cavity_params(doc):
    c = doc["cavity"]
    g_a = freq(c["g_A"])
    return _checked(CavityAtomParams, "cavity", g_A=g_a, g_B=freq(c.get("g_B", g_a)),
                    kappa=freq(c["kappa"]), gamma=freq(c["gamma"]),
                    delta=freq(c.get("delta", 0.0)))


def pulse_profile(doc):
    p = doc["pulse"]
    shape = _checked(PulseShape, "pulse.shape", **p["shape"])
    return _checked(PulseProfile, "pulse", omega0=freq(p["omega0"]),
                    duration=float(p["duration"]), shape=shape)


def transfer_config(doc):
    params = cavity_params(doc)
    integ = doc["integrator"]
    trajs = doc.get("trajectories", {})
    try:
        ta = trajectory_from_spec(trajs.get("A"), nominal=params.g_A)
        tb = trajectory_from_spec(trajs.get("B"), nominal=params.g_B)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"trajectories: {exc}") from exc
    return _checked(TransferConfig, "integrator", params=params, pulse=pulse_profile(doc),
                    traj_A=ta, traj_B=tb, rtol=integ["rtol"], atol=integ["atol"],
                    max_step_fraction=integ["max_step_fraction"])


def branching_spec(doc):
    return _checked(BranchingSpec, "branching", **doc["branching"])


def error_budget(doc):
    return _checked(ErrorBudget, "budget", **doc["budget"])


def chain_spec(doc):
    c = doc["chain"]
    if "masses_amu" in c:
        masses = [m * AMU for m in c["masses_amu"]]
    else:
        masses = [c["ion_mass_amu"] * AMU] * c["n_ions"]
    comm = c.get("comm_index")
    if comm is None:
        comm = len(masses) // 2
    g0 = freq(c["g0"]) if "g0" in c else cavity_params(doc).g_A
    return _checked(ChainSpec, "chain", masses=tuple(masses), omega_com=freq(c["omega_com"]),
                    temperature=float(c["temperature"]), comm_index=comm,
                    cavity_wavelength=float(c["cavity_wavelength"]), g0=g0)


def architecture_params(doc):
    a = doc["architecture"]
    return _checked(ArchitectureParams, "architecture", tau_serial=a["tau_serial"],
                    tau_parallel=a["tau_parallel"], p_success=a["p_success"],
                    ions_per_chain=a["ions_per_chain"])


def rate_models(doc):
    a = doc["architecture"]
    return RateModels(cavity=architecture_params(doc),
                      photonic_two_ion_time=a["photonic_two_ion_time"],
                      purification_factor=a["purification_factor"],
                      insertion_loss_db_per_photon=a["insertion_loss_db_per_photon"],
                      photons_per_attempt=a["photons_per_attempt"],
                      switch_overhead=a["switch_overhead"],
                      shuttle_per_op_time=a["shuttle_per_op_time"],
                      single_cavity_limit=a["single_cavity_limit"])


def timing_budget(doc):
    t = doc["timing"]
    return TimingBudget(transfer_time=t["transfer_time"], raman_rabi=freq(t["raman_rabi"]),
                        n_transfers=t["n_transfers"], n_rotations=t["n_rotations"])


def cavity_geometry(doc):
    return _checked(CavityGeometry, "geometry", **doc["geometry"])


def scaling_query(doc):
    s = doc["scaling"]
    dim = math.inf if s["dimension"] == "inf" else float(s["dimension"])
    return ScalingQuery(n_qubits=s["n_qubits"], dimension=dim, n_parallel=s["n_parallel"],
                        gate_time=s["gate_time"], qubit_lifetime=s["qubit_lifetime"],
                        eps_r=s["eps_r"])
