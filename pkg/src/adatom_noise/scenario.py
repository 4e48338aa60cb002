"""Declarative scenario files and the end-to-end pipeline.

A scenario is a JSON document in which every physical quantity carries an
explicit unit, ``{"value": 0.068, "unit": "hartree"}``.  Relative file
paths are resolved against the scenario's directory.  Runs are
deterministic: outputs contain no timestamps or absolute paths, so
repeating a run reproduces every file byte for byte.
"""

from __future__ import annotations

import contextlib
import hashlib
import json
import math
import platform
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
import scipy
from scipy.optimize import curve_fit

from . import __version__, units
from .boundstates import default_grid, dump_wavefunctions, level_dipoles, solve_bound_states
from .diffusion import (DiffusionInput, arrhenius_rate, crossover_temperature, debroglie_wavelength,
                        diffusion_coefficient, redhead_temperature, tunneling_rate)
from .electrostatics import plane_average, read_grid, work_function, dipole_from_workfunction, write_profile
from .fluctuator import dipole_spectrum, transition_rates
from .phonons import DebyePDOS, HostMaterial, load_pdos_table
from .potentials import (HarmonicPotential, MorsePotential, PowerLawDipole, TailedPotential,
                         load_tabulated_dipole, load_tabulated_potential, morse_from_observables)
from .stochastic import RNG_ALGORITHM, empirical_spectrum, gillespie_sample
from .trapnoise import Scales, TrapGeometry, field_spectrum, harmonic_estimates, heating_rate, mass_rescale

SCHEMA_VERSION = 1
COMPUTATION_SECTIONS = ("spectrum", "trap", "diffusion", "electrostatics", "estimates")
SCANNABLE = {"T": "K", "d": "micrometer", "m": "amu", "omega_t": "2pi*MHz",
             "sigma": "1/meter^2", "zeta": "1"}


class ScenarioError(ValueError):
    """Scenario failed validation; ``problems`` lists every issue found."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid scenario:\n  " + "\n  ".join(self.problems))


class StageError(RuntimeError):
    """Numerical failure inside one pipeline stage."""

    def __init__(self, stage, exc):
        self.stage = stage
        super().__init__(f"stage '{stage}' failed: {type(exc).__name__}: {exc}")


@contextlib.contextmanager
def _stage(name):
    try:
        yield
    except (ScenarioError, StageError):
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


# -- validation ------------------------------------------------------------

class _Checker:
    """Collects problems instead of stopping at the first one."""

    def __init__(self, base_dir: Path):
        self.base = base_dir
        self.problems: list[str] = []

    def qty(self, sec, key, dimension, where, positive=True, optional=False):
        item = sec.get(key) if isinstance(sec, dict) else None
        if item is None:
            if not optional:
                self.problems.append(f"{where}.{key}: missing")
            return None
        if not isinstance(item, dict) or "value" not in item or "unit" not in item:
            self.problems.append(f"{where}.{key}: expected {{'value': ..., 'unit': ...}}")
            return None
        try:
            val = units.to_au(item["value"], item["unit"], dimension)
        except units.UnitError as exc:
            self.problems.append(f"{where}.{key}: {exc}")
            return None
        except TypeError:
            self.problems.append(f"{where}.{key}: value must be numeric")
            return None
        arr = np.atleast_1d(np.asarray(val, dtype=float))
        if positive and np.any(arr <= 0):
            self.problems.append(f"{where}.{key}: must be positive")
        return val

    def path(self, sec, key, where):
        rel = sec.get(key) if isinstance(sec, dict) else None
        if not isinstance(rel, str):
            self.problems.append(f"{where}.{key}: missing file path")
            return None
        p = (self.base / rel).resolve()
        if not p.is_file():
            self.problems.append(f"{where}.{key}: file not found: {rel}")
            return None
        return p


@dataclass
class Scenario:
    name: str
    source: Path
    sha256: str
    raw: dict
    seed: int
    mass: float | None = None
    potential: object = None
    dipole: object = None
    host: HostMaterial | None = None
    phonons: object = None
    temperatures: list = field(default_factory=list)
    omega_grid: np.ndarray | None = None
    n_levels: int = 8
    points_per_sigma: float = 800.0
    trap: TrapGeometry | None = None
    zeta: float | None = None
    diffusion: DiffusionInput | None = None
    diffusion_T: list = field(default_factory=list)
    electro: dict | None = None
    stochastic: dict | None = None
    output_dir: str = ""

    def sections(self):
        return [s for s in COMPUTATION_SECTIONS if s in self.raw]


def shipped_scenario(name: str) -> Path:
    """Path of a scenario bundled with the package (``bare_au``, ...)."""
    return Path(str(resources.files("adatom_noise") / "scenarios" / f"{name}.json"))


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise ScenarioError([f"cannot read scenario: {exc}"]) from None
    try:
        raw = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ScenarioError([f"not valid UTF-8 JSON: {exc}"]) from None
    if not isinstance(raw, dict):
        raise ScenarioError(["top level must be a JSON object"])
    return _build(raw, path.resolve(), hashlib.sha256(data).hexdigest())


def _build(raw: dict, source: Path, sha: str) -> Scenario:
    chk = _Checker(source.parent)
    if raw.get("schema_version") != SCHEMA_VERSION:
        chk.problems.append(f"schema_version: expected {SCHEMA_VERSION}")
    name = raw.get("name")
    if not isinstance(name, str) or not name:
        chk.problems.append("name: missing")
        name = source.stem
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        chk.problems.append("seed: must be an integer")
        seed = 0
    present = [s for s in COMPUTATION_SECTIONS if s in raw]
    if not present:
        chk.problems.append("no computation section (need one of: " + ", ".join(COMPUTATION_SECTIONS) + ")")
    sc = Scenario(name=name, source=source, sha256=sha, raw=raw, seed=seed,
                  output_dir=raw.get("output_dir", f"runs/{name}"))

    needs_well = any(s in raw for s in ("spectrum", "trap", "estimates"))
    if needs_well:
        sc.mass = chk.qty(raw.get("adatom", {}), "mass", "mass", "adatom")
        sc.potential = _build_potential(raw.get("potential"), sc.mass, chk)
        sc.host = _build_host(raw.get("host"), chk)
    if "spectrum" in raw or "trap" in raw:
        sc.dipole = _build_dipole(raw.get("dipole"), chk)
        sc.phonons = _build_phonons(raw.get("phonons"), sc.host, chk)
        spec = raw.get("spectrum", {})
        temps = chk.qty(spec, "temperatures", "temperature", "spectrum", positive=False)
        if temps is not None:
            sc.temperatures = [float(t) for t in np.atleast_1d(temps)]
            if any(t < 0 for t in sc.temperatures):
                chk.problems.append("spectrum.temperatures: must be non-negative")
        sc.omega_grid = _build_omega_grid(spec.get("omega_grid"), chk)
        sc.n_levels = int(spec.get("n_levels", 8))
        if sc.n_levels < 2:
            chk.problems.append("spectrum.n_levels: must be >= 2")
        sc.points_per_sigma = float(spec.get("grid_points_per_sigma", 800))
        if "stochastic_check" in spec:
            sc.stochastic = dict(spec["stochastic_check"])
    if "trap" in raw:
        t = raw["trap"]
        vals = [chk.qty(t, k, d, "trap") for k, d in
                (("q", "charge"), ("m_I", "mass"), ("omega_t", "angular-frequency"),
                 ("d", "length"), ("sigma", "surface-density"))]
        if None not in vals:
            try:
                sc.trap = TrapGeometry(*vals)
            except ValueError as exc:
                chk.problems.append(f"trap: {exc}")
    if "estimates" in raw:
        z = raw["estimates"].get("zeta", 1.0)
        if not isinstance(z, (int, float)) or z <= 0:
            chk.problems.append("estimates.zeta: must be a positive number")
        sc.zeta = float(z) if isinstance(z, (int, float)) else 1.0
    if "diffusion" in raw:
        d = raw["diffusion"]
        vals = [chk.qty(d, k, dim, "diffusion", positive=(k != "E_a")) for k, dim in
                (("E_a", "energy"), ("gamma", "rate"), ("mass", "mass"), ("b", "length"), ("r0", "length"))]
        temps = chk.qty(d, "temperatures", "temperature", "diffusion")
        if None not in vals and temps is not None:
            sc.diffusion_T = [float(t) for t in np.atleast_1d(temps)]
            E_a, gamma, m, b, r0 = vals
            sc.diffusion = DiffusionInput(E_a, gamma, sc.diffusion_T[0], m, b, r0)
    if "electrostatics" in raw:
        e = raw["electrostatics"]
        sc.electro = {
            "clean": chk.path(e, "clean_grid", "electrostatics"),
            "adsorbate": chk.path(e, "adsorbate_grid", "electrostatics") if "adsorbate_grid" in e else None,
            "E_F": chk.qty(e, "E_F", "energy", "electrostatics", positive=False),
            "window": chk.qty(e, "window", "length", "electrostatics", positive=False),
            "area": chk.qty(e, "area", "area", "electrostatics", optional=True),
            "tol": chk.qty(e, "flatness_tolerance", "energy", "electrostatics", optional=True),
        }
        w = sc.electro["window"]
        if w is not None and np.atleast_1d(w).size != 2:
            chk.problems.append("electrostatics.window: need [z_start, z_stop]")
    if chk.problems:
        raise ScenarioError(chk.problems)
    return sc


def _build_potential(sec, mass, chk):
    where = "potential"
    if not isinstance(sec, dict):
        chk.problems.append("potential: missing section")
        return None
    kind = sec.get("kind")
    model = None
    if kind == "morse":
        v = [chk.qty(sec, k, d, where) for k, d in (("U0", "energy"), ("z0", "length"), ("a", "inverse-length"))]
        if None not in v:
            model = MorsePotential(*v)
    elif kind == "morse_from_observables":
        v = [chk.qty(sec, k, d, where) for k, d in
             (("U0", "energy"), ("z0", "length"), ("nu10", "angular-frequency"))]
        m_ref = chk.qty(sec, "reference_mass", "mass", where, optional=True) or mass
        if None not in v and m_ref:
            model = morse_from_observables(v[0], v[1], v[2], m_ref)
    elif kind == "harmonic":
        v = [chk.qty(sec, k, d, where) for k, d in
             (("U0", "energy"), ("z0", "length"), ("omega", "angular-frequency"))]
        m_ref = chk.qty(sec, "reference_mass", "mass", where, optional=True) or mass
        if None not in v and m_ref:
            model = HarmonicPotential(v[0], v[1], v[2], m_ref)
    elif kind == "tabulated":
        p = chk.path(sec, "path", where)
        if p is not None:
            try:
                model = load_tabulated_potential(p)
            except ValueError as exc:
                chk.problems.append(f"potential.path: {exc}")
    else:
        chk.problems.append(f"potential.kind: unknown kind {kind!r}")
    tail = sec.get("long_range_tail")
    if model is not None and tail is not None:
        eps = tail.get("epsilon")
        zm = chk.qty(tail, "z_match", "length", "potential.long_range_tail")
        c3 = chk.qty(tail, "C3", "energy", "potential.long_range_tail", optional=True)
        if zm is not None and isinstance(eps, (int, float)):
            try:
                model = TailedPotential(model, float(eps), zm, c3)
            except ValueError as exc:
                chk.problems.append(f"potential.long_range_tail: {exc}")
        elif not isinstance(eps, (int, float)):
            chk.problems.append("potential.long_range_tail.epsilon: must be a number")
    return model


def _build_dipole(sec, chk):
    if not isinstance(sec, dict):
        chk.problems.append("dipole: missing section")
        return None
    kind = sec.get("kind")
    if kind == "power_law":
        mu = chk.qty(sec, "mu_contact", "dipole", "dipole", positive=False)
        z0 = chk.qty(sec, "z0", "length", "dipole")
        return PowerLawDipole(mu, z0) if None not in (mu, z0) else None
    if kind == "tabulated":
        p = chk.path(sec, "path", "dipole")
        if p is not None:
            try:
                return load_tabulated_dipole(p)
            except ValueError as exc:
                chk.problems.append(f"dipole.path: {exc}")
        return None
    chk.problems.append(f"dipole.kind: unknown kind {kind!r}")
    return None


def _build_host(sec, chk):
    if not isinstance(sec, dict):
        chk.problems.append("host: missing section")
        return None
    v = [chk.qty(sec, k, d, "host") for k, d in (("M", "mass"), ("rho", "mass-density"), ("v", "velocity"))]
    return HostMaterial(*v, name=sec.get("name", "")) if None not in v else None


def _build_phonons(sec, host, chk):
    if not isinstance(sec, dict):
        chk.problems.append("phonons: missing section")
        return None
    kind = sec.get("kind")
    if kind == "debye":
        return DebyePDOS(host) if host else None
    if kind == "tabulated":
        p = chk.path(sec, "path", "phonons")
        if p is not None and host is not None:
            try:
                return load_pdos_table(p, host)
            except ValueError as exc:
                chk.problems.append(f"phonons.path: {exc}")
        return None
    chk.problems.append(f"phonons.kind: unknown kind {kind!r}")
    return None


def _build_omega_grid(sec, chk):
    if not isinstance(sec, dict):
        chk.problems.append("spectrum.omega_grid: missing")
        return None
    try:
        start, stop, num = float(sec["start"]), float(sec["stop"]), int(sec["num"])
        unit = sec["unit"]
        scale = units.to_au(1.0, unit, "angular-frequency")
    except (KeyError, TypeError, ValueError) as exc:
        chk.problems.append(f"spectrum.omega_grid: need start/stop/num/unit ({exc})")
        return None
    spacing = sec.get("spacing", "linear")
    if num < 2 or stop <= start or start < 0:
        chk.problems.append("spectrum.omega_grid: need 0 <= start < stop and num >= 2")
        return None
    if spacing == "log":
        if start <= 0:
            chk.problems.append("spectrum.omega_grid: log spacing needs start > 0")
            return None
        return np.geomspace(start, stop, num) * scale
    if spacing != "linear":
        chk.problems.append(f"spectrum.omega_grid.spacing: unknown {spacing!r}")
        return None
    return np.linspace(start, stop, num) * scale


def validate(path) -> list[str]:
    """All validation problems of a scenario file (empty list if valid)."""
    try:
        load_scenario(path)
    except ScenarioError as exc:
        return exc.problems
    return []


# -- pipeline --------------------------------------------------------------

def _fnum(x) -> float | None:
    x = float(x)
    return x if math.isfinite(x) else None


class Pipeline:
    """Lazily evaluated stages of one scenario, with per-mass caching."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        self._states = {}

    def states(self, mass=None):
        sc = self.sc
        m = sc.mass if mass is None else mass
        if m not in self._states:
            with _stage("boundstates"):
                grid = default_grid(sc.potential, m, sc.points_per_sigma)
                self._states[m] = solve_bound_states(sc.potential, m, grid, n_max=max(sc.n_levels, 2))
        return self._states[m]

    def fluctuator(self, T, mass=None):
        sc = self.sc
        with _stage("rates"):
            return transition_rates(self.states(mass), sc.potential, sc.phonons, T,
                                    n_levels=sc.n_levels, dipole_curve=sc.dipole)

    def gamma0(self, mass=None) -> float:
        with _stage("rates"):
            return float(transition_rates(self.states(mass), self.sc.potential, self.sc.phonons,
                                          0.0, n_levels=2).rates[1, 0])

    def spectrum(self, T, mass=None):
        sys = self.fluctuator(T, mass)
        with _stage("spectrum"):
            dec, vals = dipole_spectrum(sys, self.sc.omega_grid)
        return sys, dec, vals


def fit_lorentzian(omega, S):
    """Least-squares fit of S = A 2 gamma / (gamma^2 + omega^2); returns (A, gamma).

    Fitted in log space so the high-frequency tail is weighted like the plateau.
    """
    omega = np.asarray(omega, dtype=float)
    S = np.asarray(S, dtype=float)
    keep = S > 0
    if keep.sum() < 3:
        raise ValueError("need at least 3 positive spectrum points to fit")
    w, s = omega[keep], S[keep]
    g_start = float(np.interp(0.5 * s[0], s[::-1], w[::-1])) if s[0] > s[-1] else float(w.mean())
    g_start = max(g_start, 1e-300)
    a_start = s[0] * g_start / 2.0

    def model(x, log_a, log_g):
        g = np.exp(log_g)
        return log_a + np.log(2.0 * g / (g * g + x * x))

    popt, _ = curve_fit(model, w, np.log(s), p0=[np.log(a_start), np.log(g_start)])
    return float(np.exp(popt[0])), float(np.exp(popt[1]))


def _dump_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def _write_table(path_stem: Path, columns: dict, fmt: str) -> Path:
    """CSV with header row, or JSON object of columns."""
    names = list(columns)
    cols = [np.asarray(columns[n]) for n in names]
    if fmt == "json":
        path = path_stem.with_suffix(".json")
        _dump_json(path, {"schema_version": SCHEMA_VERSION,
                          "columns": {n: [_cell(v) for v in c] for n, c in zip(names, cols)}})
        return path
    path = path_stem.with_suffix(".csv")
    lines = [",".join(names)]
    for i in range(len(cols[0]) if cols else 0):
        lines.append(",".join(_fmt_cell(c[i]) for c in cols))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _cell(v):
    if isinstance(v, (str, np.str_)):
        return str(v)
    if v is None:
        return None
    return _fnum(v)


def _fmt_cell(v):
    if v is None:
        return ""
    if isinstance(v, (str, np.str_)):
        return str(v)
    return repr(float(v))


def _tlabel(T):
    return f"T{units.from_au(T, 'K'):07.2f}K".replace(".", "p")


SI_SMU = "(coulomb*meter)^2*s"


def _spectrum_stage(pipe: Pipeline, out: Path, fmt: str, report: dict, written: list, seed: int):
    sc = pipe.sc
    states = pipe.states()
    g0 = pipe.gamma0()
    report["boundstates"]["gamma0_2pi_THz"] = units.from_au(g0, "2pi*THz")
    entries = []
    for T in sc.temperatures:
        sys, dec, vals = pipe.spectrum(T)
        label = _tlabel(T)
        table = _write_table(out / f"spectrum_{label}",
                             {"omega_rad_s": units.from_au(sc.omega_grid, "rad/s"),
                              "S_mu_si": units.from_au(vals, SI_SMU)}, fmt)
        w_dom, lam_dom = dec.dominant()
        meta = {
            "schema_version": SCHEMA_VERSION,
            "scenario": sc.name,
            "temperature_K": units.from_au(T, "K"),
            "kT_over_hbar_nu10": (T / states.nu10()),
            "n_levels": sys.n_levels,
            "level_energies_hartree": [float(x) for x in sys.energies],
            "level_dipoles_debye": [float(units.from_au(x, "debye")) for x in sys.dipoles],
            "stationary": [float(x) for x in sys.stationary],
            "rates_per_s": [[float(units.from_au(x, "1/s")) for x in row] for row in sys.rates],
            "modes": [{"weight_debye2": float(units.from_au(np.sqrt(w), "debye") ** 2),
                       "decay_2pi_THz": float(units.from_au(l, "2pi*THz"))}
                      for w, l in zip(dec.weights, dec.decays)],
            "dominant_decay_2pi_THz": _fnum(units.from_au(lam_dom, "2pi*THz")) if w_dom > 0 else None,
            "mean_dipole_debye": float(units.from_au(dec.mean_dipole, "debye")),
            "variance_debye2": float(units.from_au(math.sqrt(dec.variance), "debye") ** 2),
            "S_mu_zero_si": float(units.from_au(dec(0.0), SI_SMU)),
            "fitted_width_2pi_THz": _fitted_width(sc.omega_grid, vals),
            "table": table.name,
            "provenance": {"scenario_sha256": sc.sha256, "potential": _describe(sc.potential),
                           "phonons": getattr(sc.phonons, "provenance", "") or sc.phonons.kind},
        }
        _dump_json(out / f"spectrum_{label}.json", meta)
        written += [table.name, f"spectrum_{label}.json"]
        entry = {"temperature_K": meta["temperature_K"], "table": table.name,
                 "dominant_decay_2pi_THz": meta["dominant_decay_2pi_THz"],
                 "fitted_width_2pi_THz": meta["fitted_width_2pi_THz"],
                 "S_mu_zero_si": meta["S_mu_zero_si"]}
        if sc.stochastic is not None and T > 0:
            entry["stochastic_check"] = _stochastic_check(sys, dec, sc.stochastic, seed, out, label, fmt, written)
        entries.append(entry)
    report["spectrum"] = entries


def _fitted_width(omega, vals):
    try:
        _, g = fit_lorentzian(omega, vals)
    except (ValueError, RuntimeError):
        return None
    return float(units.from_au(g, "2pi*THz"))


def _stochastic_check(sys, dec, cfg, seed, out, label, fmt, written):
    n_seg = int(cfg.get("n_segments", 200))
    per_seg = float(cfg.get("relaxation_times_per_segment", 200.0))
    t_seg = per_seg / dec.decays.min()
    traj = gillespie_sample(sys, n_seg * t_seg, seed)
    sys_omega = np.linspace(0.0, 4.0 * dec.decays.max(), 16)
    mean, err = empirical_spectrum(traj, sys.dipoles, sys_omega, n_seg)
    ref = dec(sys_omega)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(err > 0, (mean - ref) / err, 0.0)
    table = _write_table(out / f"gillespie_{label}",
                         {"omega_rad_s": units.from_au(sys_omega, "rad/s"),
                          "S_mu_empirical_si": units.from_au(mean, SI_SMU),
                          "S_mu_stderr_si": units.from_au(err, SI_SMU),
                          "S_mu_analytic_si": units.from_au(ref, SI_SMU)}, fmt)
    written.append(table.name)
    return {"table": table.name, "jumps": traj.n_jumps, "max_abs_z": float(np.abs(z).max()),
            "seed": seed, "rng": RNG_ALGORITHM}


def _describe(model):
    kind = getattr(model, "kind", "?")
    if kind == "morse":
        return {"kind": "morse", "U0_hartree": model.U0, "z0_angstrom": units.from_au(model.z0, "angstrom"),
                "a_per_angstrom": units.from_au(model.a, "1/angstrom")}
    if kind == "harmonic":
        return {"kind": "harmonic", "U0_hartree": model.U0, "z0_angstrom": units.from_au(model.z0, "angstrom"),
                "omega_2pi_THz": units.from_au(model.omega, "2pi*THz")}
    if kind == "tailed":
        return {"kind": "tailed", "base": _describe(model.base), "epsilon": model.epsilon,
                "z_match_angstrom": units.from_au(model.z_match, "angstrom"), "C3_hartree_bohr3": model.C3}
    return {"kind": kind, "provenance": getattr(model, "provenance", "")}


def _boundstates_stage(pipe, out, fmt, report, written):
    sc = pipe.sc
    st = pipe.states()
    mus = level_dipoles(st, sc.dipole) if sc.dipole is not None else np.zeros(st.n_states)
    table = _write_table(out / "levels", {
        "n": np.arange(st.n_states),
        "E_hartree": st.energies,
        "E_eV": units.from_au(st.energies, "eV"),
        "mu_debye": units.from_au(mus, "debye"),
    }, fmt)
    dump_wavefunctions(st, out / "wavefunctions.csv")
    written += [table.name, "wavefunctions.csv"]
    report["boundstates"] = {
        "n_states": st.n_states,
        "grid": {"z_min_angstrom": units.from_au(st.grid.z_min, "angstrom"),
                 "z_max_angstrom": units.from_au(st.grid.z_max, "angstrom"),
                 "n_points": st.grid.n_points},
        "nu10_2pi_THz": units.from_au(st.nu10(), "2pi*THz"),
        "potential": _describe(sc.potential),
    }


def _trap_stage(pipe, out, report, written):
    sc = pipe.sc
    geom = sc.trap
    rows = []
    for T in sc.temperatures:
        sys = pipe.fluctuator(T)
        with _stage("trap"):
            _, s_mu = dipole_spectrum(sys, [geom.omega_t])
            s_e = field_spectrum(geom.sigma, geom.d, float(s_mu[0]))
            rate = heating_rate(geom, s_e)
        rows.append({"temperature_K": units.from_au(T, "K"),
                     "S_mu_at_trap_si": float(units.from_au(s_mu[0], SI_SMU)),
                     "S_E_V2_m2_Hz": float(units.from_au(s_e, "V^2/m^2/Hz")),
                     "heating_rate_quanta_per_s": float(units.from_au(rate, "1/s"))})
    doc = {"schema_version": SCHEMA_VERSION,
           "geometry": {"q_e": units.from_au(geom.q, "e"), "m_I_amu": units.from_au(geom.m_I, "amu"),
                        "omega_t_2pi_MHz": units.from_au(geom.omega_t, "2pi*MHz"),
                        "d_micrometer": units.from_au(geom.d, "micrometer"),
                        "sigma_per_m2": units.from_au(geom.sigma, "1/meter^2")},
           "spectrum_reference": {"scenario": sc.name, "scenario_sha256": sc.sha256},
           "results": rows}
    _dump_json(out / "heating.json", doc)
    written.append("heating.json")
    report["trap"] = rows


def _estimates_stage(pipe, out, report, written):
    sc = pipe.sc
    with _stage("estimates"):
        est = harmonic_estimates(sc.potential.U0, sc.potential.z0, sc.mass, sc.host, sc.zeta)
        unit_est = harmonic_estimates(sc.potential.U0, sc.potential.z0, sc.mass, sc.host, 1.0)
    doc = {"zeta": sc.zeta,
           "nu10_estimate_2pi_THz": units.from_au(est.nu10, "2pi*THz"),
           "gamma0_estimate_2pi_THz": units.from_au(est.Gamma0, "2pi*THz")}
    if "spectrum" in sc.raw or "trap" in sc.raw:
        nu = pipe.states().nu10()
        doc["nu10_solved_2pi_THz"] = units.from_au(nu, "2pi*THz")
        doc["zeta_matching_solved_nu10"] = nu / unit_est.nu10
    _dump_json(out / "estimates.json", doc)
    written.append("estimates.json")
    report["estimates"] = doc


def _diffusion_stage(sc, out, fmt, report, written):
    base = sc.diffusion
    with _stage("diffusion"):
        g_tun = tunneling_rate(base)
        therm = [arrhenius_rate(base.with_T(T)) for T in sc.diffusion_T]
        d_therm = [diffusion_coefficient(base.r0, g) for g in therm]
        lam = [debroglie_wavelength(base.m, T) for T in sc.diffusion_T]
        t_mig = redhead_temperature(base.E_a) if base.E_a > 0 else None
        t_star = crossover_temperature(base) if base.E_a > 0 else None
    table = _write_table(out / "diffusion_rates", {
        "T_K": units.from_au(np.array(sc.diffusion_T), "K"),
        "gamma_therm_Hz": units.from_au(np.array(therm), "1/s"),
        "D_therm_cm2_s": units.from_au(np.array(d_therm), "cm^2/s"),
        "lambda_B_angstrom": units.from_au(np.array(lam), "angstrom"),
    }, fmt)
    doc = {"schema_version": SCHEMA_VERSION,
           "gamma_therm_Hz": [float(units.from_au(g, "1/s")) for g in therm],
           "temperatures_K": [float(units.from_au(T, "K")) for T in sc.diffusion_T],
           "D_therm_cm2_s": [float(units.from_au(d, "cm^2/s")) for d in d_therm],
           "gamma_tunnel_Hz": units.from_au(g_tun, "1/s"),
           "D_tunnel_cm2_s": units.from_au(diffusion_coefficient(base.r0, g_tun), "cm^2/s"),
           "T_migration_K": units.from_au(t_mig, "K") if t_mig else None,
           "lambda_B_angstrom": [float(units.from_au(x, "angstrom")) for x in lam],
           "crossover_T_K": units.from_au(t_star, "K") if t_star else None,
           "table": table.name}
    _dump_json(out / "diffusion.json", doc)
    written += [table.name, "diffusion.json"]
    report["diffusion"] = doc


def _electro_stage(sc, out, fmt, report, written):
    e = sc.electro
    tol = e["tol"] if e["tol"] is not None else units.to_au(10.0, "meV")
    window = tuple(float(x) for x in np.atleast_1d(e["window"]))
    doc = {"schema_version": SCHEMA_VERSION}
    results = {}
    for key in ("clean", "adsorbate"):
        if e[key] is None:
            continue
        with _stage("electrostatics"):
            prof = plane_average(read_grid(e[key]))
            rep = work_function(prof, e["E_F"], window, tol)
        write_profile(out / f"profile_{key}.csv", prof)
        written.append(f"profile_{key}.csv")
        results[key] = rep
        doc[key] = {"V_infinity_eV": units.from_au(rep.V_infinity, "eV"),
                    "E_F_eV": units.from_au(rep.E_F, "eV"), "W_eV": units.from_au(rep.W, "eV"),
                    "plateau_flatness_meV": units.from_au(rep.flatness, "meV"),
                    "profile": f"profile_{key}.csv"}
    if "clean" in results and "adsorbate" in results:
        dW = results["adsorbate"].W - results["clean"].W
        doc["delta_W_eV"] = units.from_au(dW, "eV")
        if e["area"] is not None:
            doc["area_per_adatom_angstrom2"] = units.from_au(e["area"], "angstrom^2")
            doc["delta_mu_debye"] = units.from_au(dipole_from_workfunction(dW, e["area"]), "debye")
    _dump_json(out / "workfunction.json", doc)
    written.append("workfunction.json")
    report["electrostatics"] = doc


STAGES = ("boundstates", "spectrum", "trap", "estimates", "diffusion", "electrostatics")


def run_scenario(path, out_dir=None, seed=None, fmt="csv", stages=None) -> dict:
    """Execute a scenario and write its artifacts.

    ``stages`` restricts the run (e.g. ``["diffusion"]``); by default every
    section present in the file is computed.  Returns the run report,
    which is also written to ``report.json`` next to ``manifest.json``.
    """
    if fmt not in ("csv", "json"):
        raise ValueError("fmt must be 'csv' or 'json'")
    sc = load_scenario(path)
    if seed is not None:
        sc.seed = int(seed)
    wanted = _resolve_stages(sc, stages)
    out = Path(out_dir) if out_dir is not None else Path(sc.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    pipe = Pipeline(sc)
    report = {"schema_version": SCHEMA_VERSION, "scenario": sc.name, "stages": wanted}
    written: list[str] = []
    if "boundstates" in wanted:
        _boundstates_stage(pipe, out, fmt, report, written)
    if "spectrum" in wanted:
        _spectrum_stage(pipe, out, fmt, report, written, sc.seed)
    if "trap" in wanted:
        _trap_stage(pipe, out, report, written)
    if "estimates" in wanted:
        _estimates_stage(pipe, out, report, written)
    if "diffusion" in wanted:
        _diffusion_stage(sc, out, fmt, report, written)
    if "electrostatics" in wanted:
        _electro_stage(sc, out, fmt, report, written)
    _dump_json(out / "report.json", report)
    written.append("report.json")
    _dump_json(out / "manifest.json", _manifest(sc, out, written))
    return report


def _resolve_stages(sc: Scenario, stages):
    present = set(sc.sections())
    if stages is None:
        wanted = set(present)
        if present & {"spectrum", "trap", "estimates"}:
            wanted.add("boundstates")
    else:
        wanted = set(stages)
        missing = [s for s in wanted - {"boundstates"} if s not in present]
        if "boundstates" in wanted and sc.potential is None:
            missing.append("potential")
        if missing:
            raise ScenarioError([f"scenario has no '{m}' section" for m in sorted(missing)])
    if "trap" in wanted or "spectrum" in wanted:
        wanted.add("boundstates")
    if "trap" in wanted and not sc.temperatures:
        raise ScenarioError(["trap stage needs spectrum.temperatures"])
    return [s for s in STAGES if s in wanted]


def _manifest(sc: Scenario, out: Path, written):
    files = {}
    for name in sorted(set(written)):
        files[name] = hashlib.sha256((out / name).read_bytes()).hexdigest()
    return {
        "schema_version": SCHEMA_VERSION,
        "package": "adatom_noise",
        "package_version": __version__,
        "constants_version": units.CONSTANTS_VERSION,
        "scenario": sc.name,
        "scenario_file": sc.source.name,
        "scenario_sha256": sc.sha256,
        "module_versions": {"numpy": np.__version__, "scipy": scipy.__version__,
                            "python": platform.python_version()},
        "seeds": {"scenario": sc.seed, "rng": RNG_ALGORITHM},
        "outputs": files,
    }


# -- scans -----------------------------------------------------------------

def scan(path, parameter: str, values, unit: str | None = None, out_dir=None, fmt="csv"):
    """Re-evaluate summary outputs for each value of one parameter.

    Scannable: T, d, m, omega_t, sigma, zeta.  Mass scans keep the
    potential fixed and re-solve the levels; alongside, ``mass_rescale``
    carries the base-mass (nu10, Gamma0) to the new mass.
    """
    if parameter not in SCANNABLE:
        raise ScenarioError([f"unknown scan parameter {parameter!r}; choose from {', '.join(SCANNABLE)}"])
    sc = load_scenario(path)
    unit = unit or SCANNABLE[parameter]
    try:
        dim = units.dimension_of(unit)
    except units.UnitError as exc:
        raise ScenarioError([str(exc)]) from None
    expected = {"T": "temperature", "d": "length", "m": "mass", "omega_t": "angular-frequency",
                "sigma": "surface-density", "zeta": "dimensionless"}[parameter]
    if dim != expected:
        raise ScenarioError([f"unit {unit!r} is not a {expected}"])
    if parameter in ("d", "omega_t", "sigma") and sc.trap is None:
        raise ScenarioError([f"scanning {parameter} needs a trap section"])
    if parameter in ("T", "m") and "spectrum" not in sc.raw:
        raise ScenarioError([f"scanning {parameter} needs a spectrum section"])
    if parameter == "zeta" and sc.potential is None:
        raise ScenarioError(["scanning zeta needs a potential"])
    pipe = Pipeline(sc)
    T0 = sc.temperatures[0] if sc.temperatures else None
    base_scales = None
    if parameter == "m":
        base_scales = Scales(pipe.states().nu10(), pipe.gamma0())
    rows = []
    for raw_value in values:
        v = units.to_au(float(raw_value), unit)
        row = {"parameter": parameter, "value": float(raw_value), "unit": unit}
        mass = None
        T = T0
        geom = sc.trap
        zeta = sc.zeta or 1.0
        if parameter == "T":
            T = v
        elif parameter == "m":
            mass = v
        elif parameter == "zeta":
            zeta = v
        elif geom is not None:
            field_name = {"d": "d", "omega_t": "omega_t", "sigma": "sigma"}[parameter]
            try:
                geom = replace(geom, **{field_name: v})
            except ValueError as exc:
                raise ScenarioError([f"scan value {raw_value}: {exc}"]) from None
        if sc.potential is not None and sc.phonons is not None and T is not None:
            st = pipe.states(mass)
            row["nu10_2pi_THz"] = units.from_au(st.nu10(), "2pi*THz")
            row["gamma0_2pi_THz"] = units.from_au(pipe.gamma0(mass), "2pi*THz")
            row["T_K"] = units.from_au(T, "K")
            sys = pipe.fluctuator(T, mass)
            with _stage("spectrum"):
                dec, _ = dipole_spectrum(sys, [0.0])
            row["S_mu_zero_si"] = units.from_au(dec(0.0), SI_SMU)
            low = sc.omega_grid[0] if sc.omega_grid is not None else 0.0
            row["S_mu_low_si"] = units.from_au(dec(low), SI_SMU)
            if geom is not None:
                s_mu = dec(geom.omega_t)
                s_e = field_spectrum(geom.sigma, geom.d, s_mu)
                row["S_mu_trap_si"] = units.from_au(s_mu, SI_SMU)
                row["S_E_V2_m2_Hz"] = units.from_au(s_e, "V^2/m^2/Hz")
                row["heating_rate_quanta_per_s"] = units.from_au(heating_rate(geom, s_e), "1/s")
        if base_scales is not None:
            r = mass_rescale(base_scales, sc.mass, mass)
            row["nu10_rescaled_2pi_THz"] = units.from_au(r.nu10, "2pi*THz")
            row["gamma0_rescaled_2pi_THz"] = units.from_au(r.Gamma0, "2pi*THz")
        if sc.potential is not None and sc.host is not None and parameter in ("zeta", "m"):
            est = harmonic_estimates(sc.potential.U0, sc.potential.z0, mass or sc.mass, sc.host, zeta)
            row["nu10_estimate_2pi_THz"] = units.from_au(est.nu10, "2pi*THz")
            row["gamma0_estimate_2pi_THz"] = units.from_au(est.Gamma0, "2pi*THz")
        rows.append(row)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        keys = []
        for r in rows:
            keys += [k for k in r if k not in keys]
        _write_table(out / f"scan_{parameter}", {k: [r.get(k) for r in rows] for k in keys}, fmt)
    return rows
