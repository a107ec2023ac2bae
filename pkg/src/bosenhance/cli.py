"""
Command-line front end.

    bosenhance [--out PATH] [--threads N] [--tol REL] sweep SCENARIO
    bosenhance profile SCENARIO
    bosenhance fit MODEL_CSV DATA_CSV
    bosenhance polarization ETA_CSV [--gamma G|fit] [--data CSV]
    bosenhance classify --d 3 --alpha 2
    bosenhance selftest

Scenario files are ``key = value`` lines (``#`` starts a comment); a file
whose first non-blank character is ``{`` is read as JSON with the same
keys, nested objects flattened with dots.  See README.md for the keys.

Exit codes: 0 success, 1 configuration error, 2 numerical failure of the
whole run, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import constants as C
from .errors import BoseEnhanceError, ConfigError, DegenerateFit, DomainError, RangeError
from .ideal import SF_TOL, GasState, condensate_fraction, fugacity, structure_factor
from .interact import (
    InteractionSpec,
    Model,
    SFModel,
    model_critical_temperature,
    profile,
    structure_factor_interacting,
    temperature_for_fraction,
)
from .numerics import Tolerance
from .polarization import fit_gamma, sigma_minus_enhancement
from .trap import RecoilSpec, Statistics, TrapSpec, classify_regime

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

_SWEEP_VARIABLES = ("t", "kappa", "f")
_KNOWN_KEYS = {
    "schema_version", "trap", "d", "alpha", "statistics", "model", "kappa", "t", "f",
    "sweep.variable", "sweep.start", "sweep.stop", "sweep.points", "sweep.spacing",
    "sweep.values",
    "scattering_length_a0", "atom_number", "trap_frequency_hz", "mass_amu",
    "profile.models", "profile.t", "profile.f",
}


def fmt(x):
    """17 significant digits: enough to round-trip any double."""
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# scenario parsing

@dataclass(frozen=True)
class Sweep:
    variable: str
    values: tuple


@dataclass(frozen=True)
class Scenario:
    trap: TrapSpec
    recoil: RecoilSpec
    model: SFModel = SFModel.IDEAL
    interaction: InteractionSpec | None = None
    t: float | None = None
    f: float | None = None
    sweep: Sweep | None = None
    profile_models: tuple = ()
    raw: dict = field(default_factory=dict, compare=False)


def _flatten(obj, prefix=""):
    out = {}
    for k, v in obj.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = ",".join(str(x) for x in v)
        else:
            out[key] = str(v)
    return out


def parse_scenario_text(text):
    """Raw ``{key: str}`` mapping from key=value or JSON text."""
    if text.lstrip().startswith("{"):
        try:
            return _flatten(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key", field=key)
        raw[key] = value
    return raw


def _num(raw, key, default=None, kind=float):
    if key not in raw:
        if default is None:
            raise ConfigError(f"missing required key '{key}'", field=key)
        return default
    try:
        val = kind(raw[key])
    except ValueError:
        raise ConfigError(f"'{key}' must be a number, got {raw[key]!r}", field=key) from None
    if kind is float and not math.isfinite(val):
        raise ConfigError(f"'{key}' must be finite", field=key)
    return val


def _enum(enum_cls, raw, key, default):
    value = raw.get(key, default)
    try:
        return enum_cls(value.strip().lower())
    except ValueError:
        choices = ", ".join(m.value for m in enum_cls)
        raise ConfigError(f"'{key}' must be one of {choices}; got {value!r}", field=key) from None


def build_scenario(raw):
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown key '{unknown[0]}'", field=unknown[0])
    version = _num(raw, "schema_version", kind=int)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}", field="schema_version")

    kind = raw.get("trap", "harmonic").strip().lower()
    if kind == "harmonic":
        trap = TrapSpec.harmonic()
    elif kind == "box":
        trap = TrapSpec.box()
    elif kind == "power":
        try:
            alpha_raw = raw.get("alpha", "").strip().lower()
            # a box is the alpha -> infinity limit
            alpha = math.inf if alpha_raw in ("inf", "infinity") else _num(raw, "alpha")
            trap = TrapSpec(_num(raw, "d", kind=int), alpha)
        except BoseEnhanceError as exc:
            raise ConfigError(str(exc), field="alpha") from None
    else:
        raise ConfigError("'trap' must be harmonic, box or power", field="trap")

    statistics = _enum(Statistics, raw, "statistics", "bose")
    model = _enum(SFModel, raw, "model", "ideal")
    kappa = _num(raw, "kappa", 0.0)
    if kappa < 0:
        raise ConfigError("'kappa' must be >= 0", field="kappa")
    recoil = RecoilSpec(kappa, statistics)

    interaction = None
    if "scattering_length_a0" in raw:
        a = _num(raw, "scattering_length_a0") * C.a0
        N = _num(raw, "atom_number", C.REFERENCE_ATOM_NUMBER)
        nu = _num(raw, "trap_frequency_hz", C.REFERENCE_OMEGA / (2 * math.pi))
        mass = _num(raw, "mass_amu", C.mass_na23 / C.amu) * C.amu
        try:
            interaction = InteractionSpec(a, 2 * math.pi * nu, N, mass)
        except BoseEnhanceError as exc:
            raise ConfigError(str(exc), field="scattering_length_a0") from None
    if model is not SFModel.IDEAL:
        if interaction is None:
            raise ConfigError(f"model '{model.value}' needs scattering_length_a0",
                              field="scattering_length_a0")
        if not trap.is_harmonic:
            raise ConfigError("interacting models need trap = harmonic", field="trap")

    t = _num(raw, "t") if "t" in raw else None
    f = _num(raw, "f") if "f" in raw else None
    if t is not None and t <= 0:
        raise ConfigError("'t' must be positive", field="t")
    if f is not None and not 0 <= f < 1:
        raise ConfigError("'f' must lie in [0, 1)", field="f")

    sweep = None
    if "sweep.variable" in raw:
        var = raw["sweep.variable"].strip()
        if var not in _SWEEP_VARIABLES:
            raise ConfigError(f"'sweep.variable' must be one of {', '.join(_SWEEP_VARIABLES)}",
                              field="sweep.variable")
        if "sweep.values" in raw:
            try:
                values = tuple(float(v) for v in raw["sweep.values"].split(","))
            except ValueError:
                raise ConfigError("'sweep.values' must be comma-separated numbers",
                                  field="sweep.values") from None
            if len(values) < 1 or any(v < 0 or not math.isfinite(v) for v in values):
                raise ConfigError("'sweep.values' must be non-negative", field="sweep.values")
            values = tuple(sorted(values))
        else:
            start = _num(raw, "sweep.start")
            stop = _num(raw, "sweep.stop")
            points = _num(raw, "sweep.points", kind=int)
            spacing = raw.get("sweep.spacing", "linear").strip()
            if points < 2:
                raise ConfigError("'sweep.points' must be >= 2", field="sweep.points")
            if not 0 < start < stop:
                raise ConfigError("sweep range must satisfy 0 < start < stop", field="sweep.start")
            if spacing == "linear":
                values = np.linspace(start, stop, points)
            elif spacing == "log":
                values = np.geomspace(start, stop, points)
            else:
                raise ConfigError("'sweep.spacing' must be linear or log", field="sweep.spacing")
            values = tuple(float(v) for v in values)
        if var == "f" and trap.x <= 0:
            raise ConfigError("a condensate fraction sweep needs x > 0", field="sweep.variable")
        sweep = Sweep(var, values)

    profile_models = ()
    if "profile.models" in raw:
        names = [s.strip().lower() for s in raw["profile.models"].split(",") if s.strip()]
        try:
            profile_models = tuple(Model(n) for n in names)
        except ValueError:
            raise ConfigError("'profile.models' entries must be ideal, semi_ideal or "
                              "hartree_fock", field="profile.models") from None

    return Scenario(trap, recoil, model, interaction, t, f, sweep, profile_models, dict(raw))


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return build_scenario(parse_scenario_text(text))


# ---------------------------------------------------------------------------
# sweep evaluation

SWEEP_COLUMNS = ("value", "t", "kappa", "S", "term_single", "term_bec_thermal",
                 "term_thermal_thermal", "factors", "error")


def _point(scn, value, tol):
    """Evaluate one sweep point; returns ``(t, kappa, EnhancementResult)``."""
    var = scn.sweep.variable if scn.sweep else None
    t, kappa, f = scn.t, scn.recoil.kappa, scn.f
    if var == "t":
        t = value
    elif var == "kappa":
        kappa = value
    elif var == "f":
        f = value
    recoil = RecoilSpec(kappa, scn.recoil.statistics)
    x = scn.trap.x

    if scn.model is SFModel.IDEAL:
        if t is None:
            if f is None:
                raise ConfigError("one of 't' or 'f' is required", field="t")
            t = (1 - f) ** (1 / (1 + x))
        if x <= 0:
            raise DomainError(f"no Bose gas state is implemented for x = {x:g}")
        if t > 1:
            state = GasState(t, fugacity(t, x), 0.0, 1, x)
        else:
            state = GasState(t, 1.0, condensate_fraction(t, x), 1, x)
        return t, kappa, structure_factor(state, recoil, tol)

    spec = scn.interaction
    if t is None:
        if f is None:
            raise ConfigError("one of 't' or 'f' is required", field="t")
        if scn.model is not SFModel.SEMI_IDEAL_BELOW_TC:
            raise ConfigError("an f sweep is only defined for ideal and semi_ideal_below_tc",
                              field="sweep.variable")
        T = temperature_for_fraction(Model.SEMI_IDEAL, f, spec)
        t = T / spec.T_c
    else:
        T = t * model_critical_temperature(scn.model, spec)
    return t, kappa, structure_factor_interacting(T, spec, recoil, scn.model)


def _factors_text(factors):
    return ";".join(f"{name}={fmt(val)}" for name, val in factors)


def evaluate_row(args):
    scn, value, tol = args
    try:
        t, kappa, res = _point(scn, value, tol)
        return (value, t, kappa, res.S, res.term_single, res.term_bec_thermal,
                res.term_thermal_thermal, _factors_text(res.factors), "")
    except ConfigError:
        raise
    except (BoseEnhanceError, ArithmeticError, ValueError) as exc:
        nan = float("nan")
        return (value, nan, nan, nan, nan, nan, nan, "", type(exc).__name__)


def run_sweep(scn, threads=1, tol=None):
    """Rows in sweep order; a failing point carries its error class name instead of numbers.

    ``tol`` overrides the structure-factor quadrature tolerance of the ideal model.
    """
    tol = SF_TOL if tol is None else tol
    values = scn.sweep.values if scn.sweep else (float("nan"),)
    jobs = [(scn, v, tol) for v in values]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(evaluate_row, jobs))
    else:
        rows = [evaluate_row(j) for j in jobs]
    return rows


def _header(kind, scn_raw=None, extra=()):
    lines = [f"# bosenhance {kind}", f"# version = {__version__}",
             f"# timestamp = {_dt.datetime.now(_dt.timezone.utc).isoformat(timespec='seconds')}"]
    for k in sorted(scn_raw or {}):
        lines.append(f"# scenario {k} = {scn_raw[k]}")
    lines.extend(f"# {e}" for e in extra)
    return lines


def write_sweep(rows, scn, stream):
    for line in _header("sweep", scn.raw):
        stream.write(line + "\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else v for v in row])


def read_csv_table(path):
    """``(header_comments, column_names, rows)`` from a '#'-commented CSV."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    comments = [ln for ln in text.splitlines() if ln.startswith("#")]
    body = [ln for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    reader = list(csv.reader(body))
    if not reader:
        raise ConfigError(f"{path}: no data")
    names = [c.strip() for c in reader[0]]
    return comments, names, reader[1:]


def read_sweep(path):
    """Sweep CSV back into ``{column: list}``; floats parse bit-exactly."""
    _, names, rows = read_csv_table(path)
    missing = [c for c in SWEEP_COLUMNS if c not in names]
    if missing:
        raise ConfigError(f"{path}: not a sweep output (missing column '{missing[0]}')",
                          field=missing[0])
    cols = {n: [] for n in names}
    for row in rows:
        for n, v in zip(names, row):
            cols[n].append(v if n in ("factors", "error") else float(v))
    return cols


# ---------------------------------------------------------------------------
# fitting

@dataclass(frozen=True)
class ScaleFit:
    scale: float
    chi2: float
    dof: int


def _model_curve(cols, xcol="t"):
    ok = [i for i, e in enumerate(cols["error"]) if not e]
    x = np.array([cols[xcol][i] for i in ok])
    y = np.array([cols["S"][i] for i in ok])
    order = np.argsort(x, kind="stable")
    return x[order], y[order]


def fit_scale(model_t, model_S, t, signal, sigma):
    """Least-squares ``scale`` minimising ``sum ((scale S(t_i) - signal_i) / sigma_i)^2``.

    ``S`` is linearly interpolated on the model curve.  Returns the scale,
    chi-square and ``dof = n - 1``.
    """
    model_t = np.asarray(model_t, dtype=float)
    model_S = np.asarray(model_S, dtype=float)
    t = np.asarray(t, dtype=float)
    signal = np.asarray(signal, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if t.size < 2:
        raise DegenerateFit("need at least two data points")
    if np.any(sigma <= 0):
        raise DegenerateFit("sigma must be positive")
    if model_t.size < 2 or t.min() < model_t.min() or t.max() > model_t.max():
        raise RangeError(f"data t-range [{t.min():g}, {t.max():g}] is outside the model "
                         f"curve [{model_t.min():g}, {model_t.max():g}]")
    S = np.interp(t, model_t, model_S)
    w = 1.0 / sigma ** 2
    sxx = float(np.sum(w * S * S))
    if sxx == 0:
        raise DegenerateFit("model curve vanishes at the data points")
    scale = float(np.sum(w * S * signal)) / sxx
    chi2 = float(np.sum(w * (scale * S - signal) ** 2))
    return ScaleFit(scale, chi2, int(t.size - 1))


def _read_columns(path, wanted):
    _, names, rows = read_csv_table(path)
    idx = []
    for c in wanted:
        if c not in names:
            raise ConfigError(f"{path}: missing column '{c}'", field=c)
        idx.append(names.index(c))
    try:
        return [np.array([float(r[i]) for r in rows]) for i in idx]
    except (ValueError, IndexError):
        raise ConfigError(f"{path}: non-numeric entry") from None


# ---------------------------------------------------------------------------
# polarization report

TRIAL_FUNCTIONS = ("linear", "exponential", "cubic")


def trial_curve(x, eta, kind="linear"):
    """Smooth stand-in for a sigma+ enhancement curve, returned as a callable.

    ``linear`` interpolates the points; ``exponential`` fits
    ``1 + A exp(-x / tau)``; ``cubic`` fits a cubic polynomial.  The choice
    only affects eta between curve points, not the physics.
    """
    x = np.asarray(x, dtype=float)
    eta = np.asarray(eta, dtype=float)
    if kind == "linear":
        return lambda v: np.interp(v, x, eta)
    if kind == "cubic":
        if x.size < 4:
            raise DegenerateFit("cubic trial function needs at least four curve points")
        coef = np.polyfit(x, eta, 3)
        return lambda v: np.polyval(coef, v)
    if kind == "exponential":
        from scipy.optimize import curve_fit

        excess = eta - 1.0
        if x.size < 2 or np.any(excess <= 0):
            raise DegenerateFit("exponential trial function needs eta > 1 at every curve point")
        slope, icpt = np.polyfit(x, np.log(excess), 1)
        if slope >= 0:
            raise DegenerateFit("curve does not decay; exponential trial function does not apply")
        model = lambda v, A, tau: 1.0 + A * np.exp(-v / tau)
        (A, tau), _ = curve_fit(model, x, eta, p0=(math.exp(icpt), -1.0 / slope), maxfev=10000)
        return lambda v: model(np.asarray(v, dtype=float), A, tau)
    raise ConfigError(f"trial function must be one of {', '.join(TRIAL_FUNCTIONS)}", field="trial")


def polarization_report(cols, gamma="fit", data=None, trial="linear"):
    """Predicted sigma- enhancement along an eta curve, optionally fitting gamma.

    ``data`` is ``(t, observed, sigma)``; eta at the data temperatures comes
    from the ``trial`` function through the curve.  Returns
    ``(rows, gamma, stderr)``.
    """
    x, eta = _model_curve(cols, "value")
    stderr = None
    if gamma == "fit":
        if data is None:
            raise ConfigError("--gamma fit needs --data", field="gamma")
        t, obs, sig = data
        if t.min() < x.min() or t.max() > x.max():
            raise RangeError("data outside the eta curve")
        eta_d = trial_curve(x, eta, trial)(t)
        gamma, stderr = fit_gamma(eta_d, obs, 1.0 / sig ** 2)
    gamma = float(gamma)
    pred = sigma_minus_enhancement(eta, gamma)
    return list(zip(x, eta, pred)), gamma, stderr


# ---------------------------------------------------------------------------
# self test

def selftest(stream, color):
    from .ideal import (
        enhancement_closed_form_k0,
        nested_pair_integral,
        phase_space_oracle,
        thermal_pair_integral,
    )
    from .numerics import integrate_1d
    from .specfun import polylog, zeta

    checks = []

    def check(name, ok, detail):
        checks.append(ok)
        tag = "PASS" if ok else "FAIL"
        if color:
            tag = ("\033[32m" if ok else "\033[31m") + tag + "\033[0m"
        stream.write(f"{tag}  {name}: {detail}\n")

    v = enhancement_closed_form_k0(1.0, 2.0)
    check("zeta ratio bound", abs(v - zeta(2) / zeta(3)) < 1e-12, f"{v:.12f}")
    for s, z in ((1.5, 0.5), (2.5, 0.95), (0.5, 0.3)):
        ref = z / math.gamma(s) * integrate_1d(
            lambda u: u ** (s - 1) / (np.exp(u) - z), 0.0, math.inf,
            Tolerance(1e-14, 1e-12, 2000), points=(1.0,))
        got = polylog(s, z)
        check(f"polylog({s}, {z})", abs(got / ref - 1) < 1e-9, f"rel diff {got / ref - 1:.1e}")
    a = thermal_pair_integral(2.0, 0.5, 0.6)
    b = nested_pair_integral(2.0, 0.5, 0.6)
    check("reduced vs nested pair integral", abs(a / b - 1) < 1e-6, f"rel diff {a / b - 1:.1e}")
    state = GasState(1.5, fugacity(1.5, 2.0), 0.0, 1, 2.0)
    S = structure_factor(state, RecoilSpec(0.6)).S
    O = phase_space_oracle(state, RecoilSpec(0.6))
    check("phase-space oracle", abs((S - 1) / (O - 1) - 1) < 1e-2, f"S={S:.6f} oracle={O:.6f}")
    rows = [classify_regime(x).enhancement_class.value for x in (-0.5, 0.75, 2.0)]
    check("regime table", rows == ["bounded", "diverges_at_tc", "bounded_above_tc_by_zeta_ratio"],
          ", ".join(rows))
    return all(checks)


# ---------------------------------------------------------------------------
# entry point

def _use_color(stream):
    return "NO_COLOR" not in os.environ and hasattr(stream, "isatty") and stream.isatty()


def build_parser():
    p = argparse.ArgumentParser(prog="bosenhance", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("--out", help="write output here instead of stdout")
    p.add_argument("--threads", type=int, default=1, help="worker processes for sweeps")
    p.add_argument("--tol", type=float, default=None,
                   help="relative tolerance for the structure-factor quadrature")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("sweep", help="structure factor along a parameter sweep")
    s.add_argument("scenario")
    s = sub.add_parser("profile", help="density profiles of the interacting cloud")
    s.add_argument("scenario")
    s = sub.add_parser("fit", help="scale-only fit of a sweep curve to data")
    s.add_argument("model_csv")
    s.add_argument("data_csv", help="columns t, signal, sigma")
    s = sub.add_parser("polarization", help="sigma- prediction from a sigma+ enhancement curve")
    s.add_argument("eta_csv")
    s.add_argument("--gamma", default=str(1 / 3), help="Rayleigh fraction or 'fit'")
    s.add_argument("--data", help="columns t, observed, sigma")
    s.add_argument("--trial", choices=TRIAL_FUNCTIONS, default="linear",
                   help="how eta is evaluated at the data temperatures")
    s = sub.add_parser("classify", help="regime of a d-dimensional r^alpha trap")
    s.add_argument("--d", type=int, default=3)
    s.add_argument("--alpha", type=float, default=2.0, help="trap power; inf for a box")
    sub.add_parser("selftest", help="oracle agreement checks")
    return p


def _cmd_sweep(args, out):
    scn = load_scenario(args.scenario)
    if scn.sweep is None:
        raise ConfigError("sweep needs 'sweep.variable'", field="sweep.variable")
    tol = None if args.tol is None else Tolerance(SF_TOL.abs_tol, args.tol, SF_TOL.max_iter)
    rows = run_sweep(scn, max(1, args.threads), tol)
    write_sweep(rows, scn, out)
    if rows and all(r[-1] for r in rows):
        sys.stderr.write("every sweep point failed\n")
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_profile(args, out):
    scn = load_scenario(args.scenario)
    spec = scn.interaction
    if spec is None:
        raise ConfigError("profile needs scattering_length_a0", field="scattering_length_a0")
    models = scn.profile_models or tuple(Model)
    raw = scn.raw
    if "profile.t" in raw:
        temps = {m: _num(raw, "profile.t") * spec.T_c for m in models}
    elif "profile.f" in raw:
        f = _num(raw, "profile.f")
        temps = {m: temperature_for_fraction(m, f, spec) for m in models}
    else:
        raise ConfigError("profile needs 'profile.t' or 'profile.f'", field="profile.t")
    for line in _header("profile", raw):
        out.write(line + "\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("model", "r_um", "n_total_cm3", "n_bec_cm3", "n_thermal_cm3"))
    for m in models:
        p = profile(m, temps[m], spec)
        out.write(f"# model = {m.value}, T = {fmt(p.T)} K, T/Tc = {fmt(p.T / spec.T_c)}, "
                  f"mu = {fmt(p.mu)} J, N = {fmt(p.N)}, N0 = {fmt(p.N0)}\n")
        for i in range(p.r.size):
            w.writerow((m.value, fmt(p.r[i] * 1e6), fmt(p.n_total[i] * 1e-6),
                        fmt(p.n_bec[i] * 1e-6), fmt(p.n_thermal[i] * 1e-6)))
    return EXIT_OK


def _cmd_fit(args, out):
    cols = read_sweep(args.model_csv)
    mt, mS = _model_curve(cols, "t")
    t, signal, sigma = _read_columns(args.data_csv, ("t", "signal", "sigma"))
    res = fit_scale(mt, mS, t, signal, sigma)
    out.write(f"scale,chi2,dof\n{fmt(res.scale)},{fmt(res.chi2)},{res.dof}\n")
    return EXIT_OK


def _cmd_polarization(args, out):
    cols = read_sweep(args.eta_csv)
    data = _read_columns(args.data, ("t", "observed", "sigma")) if args.data else None
    if args.gamma == "fit":
        gamma = "fit"
    else:
        try:
            gamma = float(args.gamma)
        except ValueError:
            raise ConfigError("--gamma must be a number or 'fit'", field="gamma") from None
    rows, g, se = polarization_report(cols, gamma, data, args.trial)
    extra = [f"gamma = {fmt(g)}"] + ([f"gamma_stderr = {fmt(se)}", f"trial = {args.trial}"]
                                     if se is not None else [])
    for line in _header("polarization", None, extra):
        out.write(line + "\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("value", "eta_sigma_plus", "eta_sigma_minus"))
    for row in rows:
        w.writerow([fmt(float(v)) for v in row])
    if se is not None:
        sys.stderr.write(f"gamma = {g:.4f} +/- {se:.4f}\n")
    return EXIT_OK


def _cmd_classify(args, out):
    try:
        trap = TrapSpec(args.d, args.alpha)
    except BoseEnhanceError as exc:
        raise ConfigError(str(exc), field="alpha") from None
    rep = classify_regime(trap.x)
    out.write(f"x = {fmt(rep.x)}\nbec = {'yes' if rep.has_bec else 'no'}\n"
              f"class = {rep.enhancement_class.value}\n{rep.describe()}\n")
    return EXIT_OK


def _cmd_selftest(args, out):
    color = args.out is None and _use_color(sys.stdout)
    return EXIT_OK if selftest(out, color) else EXIT_NUMERIC


_COMMANDS = {
    "sweep": _cmd_sweep,
    "profile": _cmd_profile,
    "fit": _cmd_fit,
    "polarization": _cmd_polarization,
    "classify": _cmd_classify,
    "selftest": _cmd_selftest,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.tol is not None and not args.tol > 0:
        sys.stderr.write("config error [tol]: --tol must be positive\n")
        return EXIT_CONFIG
    buf = io.StringIO()
    try:
        code = _COMMANDS[args.command](args, buf)
    except ConfigError as exc:
        where = f" [{exc.field}]" if exc.field else ""
        sys.stderr.write(f"config error{where}: {exc}\n")
        return EXIT_CONFIG
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO
    except (BoseEnhanceError, ArithmeticError) as exc:
        sys.stderr.write(f"numerical failure ({type(exc).__name__}): {exc}\n")
        return EXIT_NUMERIC
    try:
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
    except OSError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
