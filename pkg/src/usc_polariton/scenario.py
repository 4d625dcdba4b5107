"""Declarative scenarios: flat ``key = value`` files dispatched to the solvers.

Every key is listed in ``SCHEMA`` with its default (``None`` marks a required
key).  Lines starting with ``#`` and blank lines are ignored; an inline ``#``
starts a comment.  See ``scenarios/SCHEMA.txt`` for the documented schema.
"""
from __future__ import annotations

import json
import platform
import re
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .detection import output_detection_spectrum
from .errors import ConfigError, InvalidParameters
from .fano import spectral_weight
from .fock import FockConfig, build_mode_operators, density
from .hopfield import MomentMatrix, SystemParams, diagonalize_polaritons
from .inputoutput import intracavity_occupations, ordered_output_spectrum
from .master import build_filtered_dissipator, markov_generator, propagate, steady_state
from .reservoir import KernelSpec, squeezed_ground_correlations, vacuum_correlations

SOLVERS = ("master_vacuum", "master_squeezed", "markov_nonlindblad", "markov_rwa_lindblad",
           "input_output", "fano")
RESERVOIR_MODES = ("vacuum", "squeezed_ground")

# key -> (type, default)
SCHEMA = {
    "name": (str, None),
    "solver": (str, None),
    "params.omega_c": (float, 1.0),
    "params.omega_x": (float, None),
    "params.rabi": (float, None),
    "params.diamag": (float, "minimal"),
    "kernel.photonic.gamma": (float, None),
    "kernel.photonic.cutoff": (float, 1e3),
    "kernel.photonic.shape": (str, "flat"),
    "kernel.excitonic.gamma": (float, None),
    "kernel.excitonic.cutoff": (float, 1e3),
    "kernel.excitonic.shape": (str, "flat"),
    "reservoir.mode": (str, "squeezed_ground"),
    "fock.n_a": (int, 8),
    "fock.n_b": (int, 8),
    "fock.basis": (str, "bare"),
    "time.t_end": (float, 100.0),
    "time.dt": (float, 1e-3),
    "time.output_stride": (int, 100),
    "omega_grid.min": (float, 0.01),
    "omega_grid.max": (float, 5.0),
    "omega_grid.points": (int, 4096),
    "initial_state": (str, "dressed_ground"),
    "output.spectrum": (bool, False),
    "input_output.replaced": (bool, True),
}

FOCK_STATE = re.compile(r"^fock\(\s*(\d+)\s*,\s*(\d+)\s*\)$")


def _convert(key, kind, text):
    try:
        if kind is bool:
            low = text.lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(text)
            return low in ("true", "yes", "1")
        return kind(text)
    except ValueError:
        raise ConfigError(key, f"cannot read {text!r} as {kind.__name__}") from None


def parse_config(text: str) -> dict:
    """Raw key/value pairs with types applied; unknown or repeated keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(key, "unknown key")
        if key in values:
            raise ConfigError(key, "given twice")
        if key == "params.diamag" and value == "minimal":
            values[key] = value
        else:
            values[key] = _convert(key, SCHEMA[key][0], value)
    return values


@dataclass
class Scenario:
    """A validated scenario with every key resolved."""

    values: dict
    source: str = ""

    def __getitem__(self, key):
        return self.values[key]

    @property
    def name(self):
        return self.values["name"]

    @property
    def solver(self):
        return self.values["solver"]

    def params(self):
        v = self.values
        diamag = v["params.diamag"]
        if diamag == "minimal":
            return SystemParams.minimal_coupling(v["params.omega_c"], v["params.omega_x"],
                                                 v["params.rabi"])
        return SystemParams(v["params.omega_c"], v["params.omega_x"], v["params.rabi"], diamag)

    def kernels(self):
        return {ch: KernelSpec(ch, self.values[f"kernel.{ch}.gamma"],
                               self.values[f"kernel.{ch}.cutoff"],
                               self.values[f"kernel.{ch}.shape"])
                for ch in ("photonic", "excitonic")}

    def fock(self):
        v = self.values
        return FockConfig(v["fock.n_a"], v["fock.n_b"], v["fock.basis"])

    def reservoir_mode(self):
        if self.solver == "master_vacuum":
            return "vacuum"
        if self.solver == "master_squeezed":
            return "squeezed_ground"
        return self.values["reservoir.mode"]

    def omega_grid(self):
        v = self.values
        return np.linspace(v["omega_grid.min"], v["omega_grid.max"], v["omega_grid.points"])

    def time_grid(self):
        v = self.values
        spacing = v["time.dt"] * v["time.output_stride"]
        count = int(round(v["time.t_end"] / spacing))
        return np.arange(count + 1) * spacing


def _require(values, keys):
    for key in keys:
        if values.get(key) is None:
            raise ConfigError(key, "required by this solver but missing")


def validate(values: dict, source: str = "") -> Scenario:
    """Fill defaults and check that the chosen solver has everything it needs."""
    if not values:
        raise ConfigError("solver", "empty configuration")
    _require(values, ["name", "solver"])
    solver = values["solver"]
    if solver not in SOLVERS:
        raise ConfigError("solver", f"unknown solver {solver!r}; choose from {', '.join(SOLVERS)}")
    needed = ["params.omega_x", "params.rabi", "kernel.photonic.gamma"]
    if solver != "fano":
        needed.append("kernel.excitonic.gamma")
    _require(values, needed)
    resolved = {key: values.get(key, default) for key, (_, default) in SCHEMA.items()}
    if resolved["kernel.excitonic.gamma"] is None:
        resolved["kernel.excitonic.gamma"] = 0.0
    if resolved["reservoir.mode"] not in RESERVOIR_MODES:
        raise ConfigError("reservoir.mode", f"choose from {', '.join(RESERVOIR_MODES)}")
    init = resolved["initial_state"]
    if init not in ("dressed_ground", "bare_vacuum") and not FOCK_STATE.match(init):
        raise ConfigError("initial_state", f"unknown initial state {init!r}")
    for key in ("time.t_end", "time.dt", "time.output_stride", "omega_grid.points"):
        if not resolved[key] > 0 and not (key == "time.t_end" and resolved[key] == 0):
            raise ConfigError(key, "must be positive")
    if resolved["omega_grid.min"] >= resolved["omega_grid.max"]:
        raise ConfigError("omega_grid.max", "must exceed omega_grid.min")
    scenario = Scenario(resolved, source)
    # build the physics objects once so that invalid values are reported by key
    for key, build in (("params.rabi", scenario.params), ("kernel.photonic.gamma", scenario.kernels),
                       ("fock.n_a", scenario.fock)):
        try:
            build()
        except InvalidParameters as exc:
            raise ConfigError(key, str(exc)) from None
    return scenario


def bundled_scenarios():
    return sorted(p.name.removesuffix(".scenario")
                  for p in resources.files(__package__).joinpath("scenarios").iterdir()
                  if p.name.endswith(".scenario"))


def read_scenario_text(spec: str) -> tuple[str, str]:
    """Text of a scenario given a path or the name of a bundled scenario."""
    path = Path(spec)
    if not path.exists() and spec in bundled_scenarios():
        res = resources.files(__package__).joinpath("scenarios", f"{spec}.scenario")
        return res.read_text(), f"bundled:{spec}"
    return path.read_text(), str(path)


def load_scenario(spec: str) -> Scenario:
    text, source = read_scenario_text(spec)
    return validate(parse_config(text), source)


# --------------------------------------------------------------------------- running

MOMENT_HEADER = ["index", "n_a", "n_b", "n_L", "n_U", "re_aa", "im_aa", "re_bb", "im_bb",
                 "re_ab", "im_ab", "re_adag_b", "im_adag_b"]


def _moment_row(moments, basis):
    q = moments.polariton(basis)
    return [0, moments.n_a, moments.n_b, q[2, 0].real, q[3, 1].real,
            moments.aa.real, moments.aa.imag, moments.bb.real, moments.bb.imag,
            moments.ab.real, moments.ab.imag, moments.adag_b.real, moments.adag_b.imag]


def write_csv(path, header, rows):
    np.savetxt(path, np.atleast_2d(np.asarray(rows, dtype=float)), delimiter=",",
               header=",".join(header), comments="", fmt="%.12g")


def _moments_from_state(ops, rho):
    s = ops.s
    second = np.array([[np.trace(sm @ sn @ rho) for sn in s] for sm in s])
    return MomentMatrix(second)


def _correlations(scenario, basis):
    specs = scenario.kernels()
    if scenario.reservoir_mode() == "vacuum":
        return vacuum_correlations(specs)
    return squeezed_ground_correlations(basis, specs)


def _initial_state(scenario, ops):
    init = scenario["initial_state"]
    if init == "dressed_ground":
        return density(ops.ground_state())
    if init == "bare_vacuum":
        return density(ops.bare_vacuum())
    n1, n2 = (int(g) for g in FOCK_STATE.match(init).groups())
    return density(ops.fock_state(n1, n2))


def _run_master(scenario, out: Path, files):
    params = scenario.params()
    basis = diagonalize_polaritons(params)
    ops = build_mode_operators(scenario.fock(), params, basis)
    corr = _correlations(scenario, basis)
    if scenario.solver.startswith("master"):
        gen = build_filtered_dissipator(ops, corr, scenario.solver)
    else:
        gen = markov_generator(ops, corr, scenario.solver.removeprefix("markov_"))
    if scenario["time.t_end"] > 0:
        traj = propagate(_initial_state(scenario, ops), gen, scenario.time_grid(),
                         dt=scenario["time.dt"])
        traj.to_csv(out / "trajectory.csv")
        files.append("trajectory.csv")
    rho = steady_state(gen)
    write_csv(out / "moments.csv", MOMENT_HEADER, [_moment_row(_moments_from_state(ops, rho), basis)])
    files.append("moments.csv")
    if scenario["output.spectrum"]:
        spec = output_detection_spectrum(rho, gen, corr, scenario.omega_grid())
        spec.to_csv(out / "spectrum.csv")
        files.append("spectrum.csv")


def _run_input_output(scenario, out: Path, files):
    params = scenario.params()
    basis = diagonalize_polaritons(params)
    mode = scenario.reservoir_mode()
    spec = ordered_output_spectrum(params, scenario.kernels(), basis, scenario.omega_grid(),
                                   mode=mode, replaced=scenario["input_output.replaced"])
    spec.to_csv(out / "spectrum.csv")
    files.append("spectrum.csv")
    occ = intracavity_occupations(params, scenario.kernels(), _correlations(scenario, basis))
    write_csv(out / "moments.csv", MOMENT_HEADER, [_moment_row(occ.moments, basis)])
    files.append("moments.csv")


def _run_fano(scenario, out: Path, files):
    weights = spectral_weight(scenario.kernels(), scenario.params())
    weights.to_csv(out / "weight.csv")
    files.append("weight.csv")


RUNNERS = {
    "master_vacuum": _run_master,
    "master_squeezed": _run_master,
    "markov_nonlindblad": _run_master,
    "markov_rwa_lindblad": _run_master,
    "input_output": _run_input_output,
    "fano": _run_fano,
}


def run_scenario(scenario: Scenario, out_dir) -> dict:
    """Run the solver, write its CSV files and manifest.json; return the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    start = time.perf_counter()
    RUNNERS[scenario.solver](scenario, out, files)
    params = scenario.params()
    manifest = {
        "name": scenario.name,
        "solver": scenario.solver,
        "source": scenario.source,
        "parameters": {**scenario.values, "params.diamag": params.diamag},
        "reservoir_mode": scenario.reservoir_mode(),
        "polariton_frequencies": [float(w) for w in diagonalize_polaritons(params).omega],
        "outputs": files,
        "versions": {"usc_polariton": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
        "wall_time_s": round(time.perf_counter() - start, 3),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


# --------------------------------------------------------------------------- comparing runs

class SchemaMismatch(Exception):
    pass


def _load_table(directory, name):
    path = Path(directory) / f"{name}.csv"
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))
    return header, data


def compare_runs(dir_a, dir_b, quantity: str):
    """Per-column max-abs and RMS differences of one exported table.

    ``quantity`` is a table name (trajectory, spectrum, weight, moments),
    optionally followed by ``:column`` to restrict the comparison.
    """
    table, _, column = quantity.partition(":")
    head_a, a = _load_table(dir_a, table)
    head_b, b = _load_table(dir_b, table)
    if head_a != head_b:
        raise SchemaMismatch(f"columns differ: {head_a} vs {head_b}")
    if a.shape != b.shape:
        raise SchemaMismatch(f"table shapes differ: {a.shape} vs {b.shape}")
    if not np.allclose(a[:, 0], b[:, 0], rtol=1e-9, atol=1e-12):
        raise SchemaMismatch(f"grids in column {head_a[0]!r} differ")
    columns = head_a[1:] if not column else [column]
    rows = []
    for name in columns:
        if name not in head_a[1:]:
            raise SchemaMismatch(f"no column {name!r} in {table}")
        k = head_a.index(name)
        diff = a[:, k] - b[:, k]
        rows.append((name, float(np.max(np.abs(diff))), float(np.sqrt(np.mean(diff ** 2)))))
    return rows
