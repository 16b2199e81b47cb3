"""Seeded Monte Carlo sweeps and deterministic CSV output.

Config files are UTF-8 ``key = value`` lines; ``#`` starts a comment.
Keys are the ScenarioConfig / ExperimentSpec field names in lower case
(``m``, ``s0``, ``alpha_g``, ``sweep_axis`` ...). Positions and lists are
comma separated.

Every trial t draws from ``SeedSequence(seed, spawn_key=(t,))``, split into
independent streams for user placement, channels and initial phases. All
schemes and all sweep points see the same draws for a given trial, so
comparisons are paired and adding sweep points never perturbs other points.
"""

from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import dataclass, field, fields
import io
import logging
import math
import warnings

import numpy as np

from . import caching
from .exceptions import ConfigError
from .pipeline import SCHEMES, network_cost, run_scheme
from .scenario import ScenarioConfig, Vec3, gen_channels, place_users

logger = logging.getLogger(__name__)

SWEEP_AXES = ("none", "n_elements", "zipf_eps", "ris_y", "alpha_G", "alpha_ru")
CACHING = ("oc", "fppc", "urc", "none")
CSV_HEADER = ("axis_value", "scheme", "caching", "mean_power_mw", "mean_backhaul_mbps",
              "mean_total_cost", "feasible_fraction", "trials")
DUMP_HEADER = ("axis_value", "trial", "scheme", "caching", "power_mw", "backhaul_mbps",
               "total_cost", "feasible")
FEASIBLE_WARN = 0.9


@dataclass(frozen=True)
class ExperimentSpec:
    base: ScenarioConfig = field(default_factory=ScenarioConfig)
    trials: int = 1
    seed: int = 0
    sweep_axis: str = "none"
    sweep_values: tuple = ()
    schemes: tuple = SCHEMES
    caching: tuple = ("oc",)

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer, got {self.trials}", "trials")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer", "seed")
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.sweep_axis!r}", "sweep_axis")
        if self.sweep_axis != "none" and not self.sweep_values:
            raise ConfigError("sweep_values must be non-empty for a sweep", "sweep_values")
        if not self.schemes or any(s not in SCHEMES for s in self.schemes):
            raise ConfigError(f"schemes must be a non-empty subset of {SCHEMES}", "schemes")
        if not self.caching or any(c not in CACHING for c in self.caching):
            raise ConfigError(f"caching must be a non-empty subset of {CACHING}", "caching")
        for v in self.sweep_values:
            try:
                self.config_at(v)
            except ValueError as exc:
                raise ConfigError(f"sweep value {v}: {exc}", "sweep_values") from None

    @property
    def points(self):
        return list(self.sweep_values) if self.sweep_axis != "none" else [None]

    def config_at(self, value):
        """Scenario for one sweep point."""
        cfg = self.base
        axis = self.sweep_axis
        if axis == "none" or value is None:
            return cfg
        if axis == "n_elements":
            if int(value) != value:
                raise ValueError("n_elements values must be integers")
            return cfg.replace(N=int(value))
        if axis == "zipf_eps":
            return cfg.replace(zipf_eps=float(value))
        if axis == "ris_y":
            r = cfg.ris_pos
            return cfg.replace(ris_pos=Vec3(r.x, float(value), r.z))
        return cfg.replace(**{axis: float(value)})


@dataclass(frozen=True)
class ResultRow:
    axis_value: object
    scheme: str
    caching: str
    mean_power_mw: float
    mean_backhaul_mbps: float
    mean_total_cost: float
    feasible_fraction: float
    trials: int


# ---------------------------------------------------------------- parsing

_SCENARIO_KEYS = {name.lower(): name for name in ScenarioConfig.field_names()}
_EXPERIMENT_KEYS = ("trials", "seed", "sweep_axis", "sweep_values", "schemes", "caching")
REQUIRED_KEYS = ("trials",)


def _parse_list(text, conv, key):
    items = [t.strip() for t in text.split(",") if t.strip()]
    try:
        return tuple(conv(t) for t in items)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}", key) from None


def _parse_number(text, key):
    # integers are parsed exactly so 64-bit seeds survive
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"bad numeric value for {key}: {text!r}", key) from None


def _scenario_value(name, text, key):
    if name in ("bs_pos", "ris_pos", "user_center"):
        vals = _parse_list(text, float, key)
        if len(vals) != 3:
            raise ConfigError(f"{key} needs three coordinates", key)
        return Vec3(*vals)
    if name == "rate_targets":
        vals = _parse_list(text, float, key)
        if not vals:
            raise ConfigError(f"{key} is empty", key)
        return vals[0] if len(vals) == 1 else vals
    if name in ("M", "K", "N", "F"):
        v = _parse_number(text, key)
        if not isinstance(v, int):
            raise ConfigError(f"{key} must be an integer", key)
        return v
    v = _parse_number(text, key)
    if name in ("rician_G", "rician_ru") and text.strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(v)


def parse_config(text, overrides=None):
    """Parse ``key = value`` text into a validated ExperimentSpec.

    ``overrides`` (e.g. from command-line flags) replace config entries and
    may supply required keys.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'", None)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"duplicate key {key!r}", key)
        raw[key] = value
    for k, v in (overrides or {}).items():
        if v is not None:
            raw[k] = str(v)

    for key in raw:
        if key not in _SCENARIO_KEYS and key not in _EXPERIMENT_KEYS:
            raise ConfigError(f"unknown key {key!r}", key)
    for key in REQUIRED_KEYS:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}", key)

    scenario = {}
    for key, name in _SCENARIO_KEYS.items():
        if key in raw:
            scenario[name] = _scenario_value(name, raw[key], key)
    try:
        base = ScenarioConfig(**scenario)
    except ValueError as exc:
        bad = next((k for k in raw if k in str(exc).lower().split()[0:1]), None)
        raise ConfigError(str(exc), bad or _guess_key(str(exc), raw)) from None

    exp = {"base": base}
    if "trials" in raw:
        v = _parse_number(raw["trials"], "trials")
        if not isinstance(v, int):
            raise ConfigError("trials must be an integer", "trials")
        exp["trials"] = v
    if "seed" in raw:
        v = _parse_number(raw["seed"], "seed")
        if not isinstance(v, int):
            raise ConfigError("seed must be an integer", "seed")
        exp["seed"] = v
    if "sweep_axis" in raw:
        axis = raw["sweep_axis"]
        canon = {a.lower(): a for a in SWEEP_AXES}
        if axis.lower() not in canon:
            raise ConfigError(f"unknown sweep axis {axis!r}", "sweep_axis")
        exp["sweep_axis"] = canon[axis.lower()]
    if "sweep_values" in raw:
        exp["sweep_values"] = _parse_list(raw["sweep_values"], float, "sweep_values")
    if "schemes" in raw:
        exp["schemes"] = _parse_list(raw["schemes"], str, "schemes")
    if "caching" in raw:
        exp["caching"] = _parse_list(raw["caching"], str, "caching")
    return ExperimentSpec(**exp)


def _guess_key(message, raw):
    for key, name in _SCENARIO_KEYS.items():
        if message.startswith(name + " ") or f" {name} " in message:
            return key
    return None


# ---------------------------------------------------------------- running

def trial_streams(seed, trial):
    """Independent generators (users, channels, phases) for one trial."""
    ss = np.random.SeedSequence(seed, spawn_key=(trial,))
    return [np.random.default_rng(s) for s in ss.spawn(3)]


def run_trial(cfg, seed, trial, schemes, caching_list):
    """One realization: per scheme, (power in mW or nan, feasible, {caching: (bh, total)})."""
    rng_users, rng_ch, rng_theta = trial_streams(seed, trial)
    users = place_users(cfg, rng_users)
    ch = gen_channels(cfg, users, rng_ch)
    theta0 = 2 * np.pi * rng_theta.random(cfg.N)
    b = caching.zipf_popularity(cfg.F, cfg.zipf_eps)
    placements = {c: caching.make_placement(c, b, cfg.S0) for c in caching_list}
    out = {}
    for scheme in schemes:
        rep = run_scheme(scheme, ch, cfg, theta0)
        per_cache = {}
        for c, place in placements.items():
            if rep.feasible:
                cost = network_cost(place, b, cfg.rates, rep.precoder, cfg.eta)
                per_cache[c] = (cost.power, cost.backhaul, cost.total)
            else:
                bh = caching.backhaul_cost(place, b, cfg.rates) * 1e-6
                per_cache[c] = (math.nan, bh, math.nan)
        out[scheme] = (rep.feasible, per_cache)
    return out


def _run_point(args):
    cfg, seed, trial, schemes, caching_list = args
    return run_trial(cfg, seed, trial, schemes, caching_list)


def run_experiment(spec, jobs=1, dump=None):
    """Run every (sweep point, scheme, caching) cell of ``spec``.

    Means are taken over feasible trials; ``dump`` (a list) receives one
    tuple per trial and cell in DUMP_HEADER order.
    """
    rows = []
    for value in spec.points:
        cfg = spec.config_at(value)
        tasks = [(cfg, spec.seed, t, spec.schemes, spec.caching) for t in range(spec.trials)]
        if jobs and jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_run_point, tasks))
        else:
            results = [_run_point(t) for t in tasks]
        axis_value = "" if value is None else value
        for scheme in spec.schemes:
            for c in spec.caching:
                power, bh, total, feas = [], [], [], []
                for t, res in enumerate(results):
                    ok, per_cache = res[scheme]
                    p, b_, tot = per_cache[c]
                    feas.append(ok)
                    if dump is not None:
                        dump.append((axis_value, t, scheme, c, p, b_, tot, int(ok)))
                    if ok:
                        power.append(p)
                        bh.append(b_)
                        total.append(tot)
                frac = sum(feas) / len(feas)
                if frac < FEASIBLE_WARN:
                    warnings.warn(f"only {frac:.0%} feasible trials at {spec.sweep_axis}="
                                  f"{axis_value}, scheme={scheme}", RuntimeWarning)
                rows.append(ResultRow(
                    axis_value=axis_value,
                    scheme=scheme,
                    caching=c,
                    mean_power_mw=_mean(power),
                    mean_backhaul_mbps=_mean(bh),
                    mean_total_cost=_mean(total),
                    feasible_fraction=frac,
                    trials=spec.trials,
                ))
    return rows


def _mean(values):
    # fixed left-to-right reduction in trial order
    if not values:
        return math.nan
    acc = 0.0
    for v in values:
        acc += v
    return acc / len(values)


# ---------------------------------------------------------------- output

def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.9g}"


def _sort_key(row):
    av = row[0]
    return (0.0 if av == "" else float(av), row[1], row[2])


def format_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    tuples = [(r.axis_value, r.scheme, r.caching, r.mean_power_mw, r.mean_backhaul_mbps,
               r.mean_total_cost, r.feasible_fraction, r.trials) for r in rows]
    for t in sorted(tuples, key=_sort_key):
        w.writerow([_fmt(v) for v in t])
    return buf.getvalue()


def emit_csv(rows, out_path):
    """Write result rows sorted by (axis_value, scheme, caching)."""
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(rows))


def emit_dump(records, out_path):
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(DUMP_HEADER)
        for rec in sorted(records, key=lambda r: (_sort_key((r[0], r[2], r[3])), r[1])):
            w.writerow([_fmt(v) for v in rec])


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
