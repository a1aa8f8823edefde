"""Command-line front end: INI scenario in, CSV sweep out.

A scenario names a mode, one section per factor group, an optional sweep
axis and an optional series of parameter overrides.  Every sweep row
gets its own Monte Carlo substream, so rows can be computed in any order
and the output stays byte-identical for a given seed.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, DomainError, FitDomainError, NumericalError
from .fisher_f import FisherFParams
from .goodness_of_fit import EmpiricalCDF, ks_test
from .lognormal_fit import (
    FitReport,
    LogNormalParams,
    fit_ratio_of_products,
    fit_tuned,
    kolmogorov_distance,
    lognormal_cdf,
    lognormal_pdf,
    tune_epsilon,
)
from .montecarlo import RandomStream, estimate_mean, estimate_probability
from .ratio_stats import RatioSpec, cdf_z, mgf_z, pdf_z, sample_z
from .wireless_metrics import (
    RelayConfig,
    SecrecyConfig,
    fd_outage_asymptotic,
    fd_outage_bound,
    fd_outage_exact_mc,
    pnsc,
    pnsc_mc,
    relay_terms,
    sop_asymptotic,
    sop_exact_mc,
    sop_lower_bound,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

MODES = ("pdf", "cdf", "mgf", "fit", "kstest", "secrecy", "relay")
DISTRIBUTION_GROUPS = ("numerator", "denominator")
GROUPS = {
    "secrecy": ("legit", "eaves"),
    "relay": ("first_hop", "second_hop", "self_interference"),
}
REQUIRED_GROUPS = {
    "secrecy": ("legit", "eaves"),
    "relay": ("first_hop", "second_hop", "self_interference"),
}
SWEPT_MODES = ("pdf", "cdf", "mgf", "secrecy", "relay")
SCALAR_AXES = {
    "pdf": ("x",), "cdf": ("x",), "mgf": ("s",),
    "secrecy": ("rate_threshold",), "relay": ("rate",),
}
AXIS_COLUMNS = {"legit.gamma_bar_db": "gammaD_db", "first_hop.gamma_bar_db": "gammaAR_db"}
FACTOR_KEYS = ("gamma_bar_db", "gamma_bar", "m", "m_s")
EPSILON_MODES = ("zero", "fixed", "tuned")

DEFAULT_MC_SAMPLES = 100_000
DEFAULT_KS_SAMPLES = 10_000


def _groups_for(mode: str) -> tuple[str, ...]:
    return GROUPS.get(mode, DISTRIBUTION_GROUPS)


# --- config ---------------------------------------------------------------


@dataclass(frozen=True)
class FactorGroup:
    """``count`` F factors; each parameter is one value or one per factor."""

    count: int
    gamma_bar: tuple[float, ...]
    m: tuple[float, ...]
    m_s: tuple[float, ...]

    def factors(self) -> tuple[FisherFParams, ...]:
        def pick(vals, i):
            return vals[0] if len(vals) == 1 else vals[i]
        return tuple(FisherFParams(pick(self.gamma_bar, i), pick(self.m, i), pick(self.m_s, i))
                     for i in range(self.count))

    def assign(self, key: str, value: float) -> "FactorGroup":
        if key == "gamma_bar_db":
            return replace(self, gamma_bar=(10.0 ** (value / 10.0),))
        if key == "count":
            return replace(self, count=int(value))
        return replace(self, **{key: (float(value),)})


@dataclass(frozen=True)
class Sweep:
    variable: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class Series:
    keys: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]


@dataclass(frozen=True)
class FitSettings:
    epsilon_mode: str = "zero"
    epsilon: float = 0.0
    reference: str = "exact"


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str
    groups: dict[str, FactorGroup]
    sweep: Sweep | None = None
    series: Series | None = None
    mc_samples: int = DEFAULT_MC_SAMPLES
    seed: int = 1
    fit: FitSettings = field(default_factory=FitSettings)
    alpha: float = 0.05
    sample_size: int = DEFAULT_KS_SAMPLES
    repetitions: int = 1
    rate_threshold: float = 1.0
    rate: float = 1.0
    output: str | None = None
    source_hash: str = ""

    def assign(self, target: str, value: float) -> "ScenarioConfig":
        """Copy with one swept or series parameter set.

        ``group.key`` targets one factor group; a bare factor key targets
        every group; ``rate_threshold`` and ``rate`` are scenario scalars.
        """
        if target in ("rate_threshold", "rate"):
            return replace(self, **{target: float(value)})
        group, _, key = target.rpartition(".")
        names = (group,) if group else tuple(self.groups)
        groups = dict(self.groups)
        for name in names:
            groups[name] = groups[name].assign(key, value)
        return replace(self, groups=groups)

    def ratio_spec(self) -> RatioSpec:
        den = self.groups.get("denominator")
        return RatioSpec(self.groups["numerator"].factors(), den.factors() if den else ())

    def secrecy(self) -> SecrecyConfig:
        return SecrecyConfig(self.groups["legit"].factors(), self.groups["eaves"].factors(),
                             self.rate_threshold)

    def relay(self) -> RelayConfig:
        si = self.groups["self_interference"].factors()
        if len(si) != 1:
            raise ConfigError("[self_interference] count must be 1")
        return RelayConfig(self.groups["first_hop"].factors(), self.groups["second_hop"].factors(),
                           si[0], self.rate)


def _floats(section: str, key: str, raw: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(v) for v in raw.replace(",", " ").split())
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r}: expected numbers") from None
    if not vals:
        raise ConfigError(f"[{section}] {key} is empty")
    return vals


def _number(parser, section: str, key: str, fallback=None, kind=float):
    if not parser.has_option(section, key):
        if fallback is None:
            raise ConfigError(f"[{section}] missing key {key!r}")
        return fallback
    raw = parser.get(section, key)
    try:
        return kind(float(raw)) if kind is int else kind(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r}: expected a number") from None


def _parse_group(parser, name: str) -> FactorGroup:
    unknown = set(parser.options(name)) - set(FACTOR_KEYS) - {"count"}
    if unknown:
        raise ConfigError(f"[{name}] unknown key {sorted(unknown)[0]!r}")
    count = _number(parser, name, "count", 1, int)
    if count < 1:
        raise ConfigError(f"[{name}] count = {count}: count must be at least 1")
    if parser.has_option(name, "gamma_bar_db") and parser.has_option(name, "gamma_bar"):
        raise ConfigError(f"[{name}] give gamma_bar_db or gamma_bar, not both")
    if parser.has_option(name, "gamma_bar_db"):
        gbar = tuple(10.0 ** (v / 10.0)
                     for v in _floats(name, "gamma_bar_db", parser.get(name, "gamma_bar_db")))
    elif parser.has_option(name, "gamma_bar"):
        gbar = _floats(name, "gamma_bar", parser.get(name, "gamma_bar"))
    else:
        raise ConfigError(f"[{name}] missing key 'gamma_bar_db'")
    vals = {"gamma_bar": gbar}
    for key in ("m", "m_s"):
        if not parser.has_option(name, key):
            raise ConfigError(f"[{name}] missing key {key!r}")
        vals[key] = _floats(name, key, parser.get(name, key))
    for key, v in vals.items():
        if len(v) not in (1, count):
            raise ConfigError(f"[{name}] {key}: give one value or {count}")
    group = FactorGroup(count, vals["gamma_bar"], vals["m"], vals["m_s"])
    _check_factors(name, group)
    return group


def _check_factors(name: str, group: FactorGroup) -> None:
    for m in group.m:
        if not m > 0.5:
            raise ConfigError(f"[{name}] m = {m:g}: m must exceed 1/2")
    for ms in group.m_s:
        if not ms > 1:
            raise ConfigError(f"[{name}] m_s = {ms:g}: m_s must exceed 1")
    for g in group.gamma_bar:
        if not (g > 0 and math.isfinite(g)):
            raise ConfigError(f"[{name}] average SNR must be positive and finite")


def _parse_sweep(parser) -> Sweep:
    sec = "sweep"
    variable = parser.get(sec, "variable", fallback="").strip()
    if not variable:
        raise ConfigError("[sweep] missing key 'variable'")
    if parser.has_option(sec, "values"):
        values = _floats(sec, "values", parser.get(sec, "values"))
    else:
        start = _number(parser, sec, "start")
        stop = _number(parser, sec, "stop")
        points = _number(parser, sec, "points", kind=int)
        spacing = parser.get(sec, "spacing", fallback="linear").strip()
        if points < 2:
            raise ConfigError(f"[sweep] points = {points}: sweep points must be at least 2")
        if spacing == "linear":
            values = np.linspace(start, stop, points)
        elif spacing == "log":
            if not (start > 0 and stop > 0):
                raise ConfigError("[sweep] log spacing needs positive start and stop")
            values = np.geomspace(start, stop, points)
        elif spacing == "db":
            # start and stop in dB, values linear
            values = 10.0 ** (np.linspace(start, stop, points) / 10.0)
        else:
            raise ConfigError(f"[sweep] spacing = {spacing!r}: expected linear, log or db")
        values = tuple(float(v) for v in values)
    if len(values) < 2:
        raise ConfigError("[sweep] sweep points must be at least 2")
    return Sweep(variable, values)


def _parse_series(parser) -> Series:
    keys = tuple(k.strip() for k in parser.get("series", "vary", fallback="").split(",") if k.strip())
    if not keys:
        raise ConfigError("[series] missing key 'vary'")
    raw = parser.get("series", "values", fallback="")
    rows = tuple(_floats("series", "values", chunk) for chunk in raw.split(";") if chunk.strip())
    if not rows:
        raise ConfigError("[series] missing key 'values'")
    for row in rows:
        if len(row) != len(keys):
            raise ConfigError(f"[series] values: each entry needs {len(keys)} numbers")
    return Series(keys, rows)


def _check_target(cfg: ScenarioConfig, target: str, section: str) -> None:
    if target in SCALAR_AXES.get(cfg.mode, ()):
        return
    group, _, key = target.rpartition(".")
    if key not in FACTOR_KEYS + ("count",) or (group and group not in cfg.groups):
        raise ConfigError(f"[{section}] unknown variable {target!r}")


def _check_fit_domain(cfg: ScenarioConfig) -> None:
    """Moment matching needs finite second moments unless eps is tuned."""
    if cfg.fit.epsilon_mode == "tuned" or cfg.mode in ("mgf", "kstest"):
        return
    if cfg.mode == "relay":
        upstairs, downstairs = ("first_hop",), ("self_interference",)
    elif cfg.mode == "secrecy":
        upstairs, downstairs = ("legit",), ("eaves",)
    else:
        upstairs, downstairs = ("numerator",), ("denominator",)
    for name in upstairs:
        for ms in cfg.groups[name].m_s:
            if not ms > 2:
                raise ConfigError(f"[{name}] m_s = {ms:g}: m_s must exceed 2 for log-normal fitting")
    for name in downstairs:
        if name in cfg.groups:
            for m in cfg.groups[name].m:
                if not m > 2:
                    raise ConfigError(f"[{name}] m = {m:g}: m must exceed 2 for log-normal fitting")


def parse_config(text: str, mode: str | None = None) -> ScenarioConfig:
    """Parse and validate an INI scenario.

    ``mode`` overrides a missing ``[scenario] mode`` and must agree with it
    when both are given.  Errors raise :class:`ConfigError` naming the key.
    """
    # series values use ';' as a separator, so only '#' starts comments there
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}".splitlines()[0]) from None

    declared = parser.get("scenario", "mode", fallback=None)
    if declared and mode and declared.strip() != mode:
        raise ConfigError(f"[scenario] mode = {declared.strip()!r} conflicts with command {mode!r}")
    chosen = (declared or mode or "").strip()
    if chosen not in MODES:
        raise ConfigError(f"[scenario] mode = {chosen!r}: expected one of {', '.join(MODES)}")

    names = _groups_for(chosen)
    required = REQUIRED_GROUPS.get(chosen, ("numerator",))
    for name in required:
        if not parser.has_section(name):
            raise ConfigError(f"missing section [{name}]")
    known = set(names) | {"scenario", "sweep", "series", "montecarlo", "fit", "kstest"}
    for sec in parser.sections():
        if sec not in known:
            raise ConfigError(f"unknown section [{sec}] for mode {chosen!r}")
    groups = {name: _parse_group(parser, name) for name in names if parser.has_section(name)}

    fit = FitSettings()
    if parser.has_section("fit"):
        emode = parser.get("fit", "epsilon_mode", fallback="zero").strip()
        if emode not in EPSILON_MODES:
            raise ConfigError(f"[fit] epsilon_mode = {emode!r}: expected zero, fixed or tuned")
        ref = parser.get("fit", "reference", fallback="exact").strip()
        if ref not in ("exact", "samples"):
            raise ConfigError(f"[fit] reference = {ref!r}: expected exact or samples")
        eps = _number(parser, "fit", "epsilon", 0.0) if emode == "fixed" else 0.0
        fit = FitSettings(emode, eps, ref)

    seed = _number(parser, "montecarlo", "seed", 1, int) if parser.has_section("montecarlo") else 1
    n = (_number(parser, "montecarlo", "n", DEFAULT_MC_SAMPLES, int)
         if parser.has_section("montecarlo") else DEFAULT_MC_SAMPLES)
    if n < 0:
        raise ConfigError(f"[montecarlo] n = {n}: must be non-negative")
    if not 0 <= seed < 2**64:
        raise ConfigError(f"[montecarlo] seed = {seed}: must be an unsigned 64-bit integer")

    alpha = _number(parser, "kstest", "alpha", 0.05) if parser.has_section("kstest") else 0.05
    v = (_number(parser, "kstest", "sample_size", DEFAULT_KS_SAMPLES, int)
         if parser.has_section("kstest") else DEFAULT_KS_SAMPLES)
    reps = _number(parser, "kstest", "repetitions", 1, int) if parser.has_section("kstest") else 1
    if not 0 < alpha < 1:
        raise ConfigError(f"[kstest] alpha = {alpha:g}: alpha must lie in (0, 1)")
    if v < 1 or reps < 1:
        raise ConfigError("[kstest] sample_size and repetitions must be at least 1")

    scalars = {}
    for key in ("rate_threshold", "rate"):
        if parser.has_option("scenario", key):
            scalars[key] = _number(parser, "scenario", key)
            if scalars[key] < 0:
                raise ConfigError(f"[scenario] {key} must be non-negative")
    output = parser.get("scenario", "output", fallback=None)

    cfg = ScenarioConfig(
        mode=chosen, groups=groups, mc_samples=n, seed=seed, fit=fit, alpha=alpha,
        sample_size=v, repetitions=reps, output=output.strip() if output else None,
        source_hash=hashlib.sha256(text.encode("utf-8")).hexdigest(), **scalars,
    )
    if chosen in SWEPT_MODES:
        if not parser.has_section("sweep"):
            raise ConfigError(f"mode {chosen!r} needs a [sweep] section")
        sweep = _parse_sweep(parser)
        _check_target(cfg, sweep.variable, "sweep")
        cfg = replace(cfg, sweep=sweep)
    elif parser.has_section("sweep"):
        raise ConfigError(f"mode {chosen!r} takes no [sweep]; use [series]")
    if parser.has_section("series"):
        series = _parse_series(parser)
        for key in series.keys:
            _check_target(cfg, key, "series")
        cfg = replace(cfg, series=series)
    for combo in _series_configs(cfg):
        for name, group in combo.groups.items():
            _check_factors(name, group)
        _check_fit_domain(combo)
    return cfg


# --- runs -------------------------------------------------------------------


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: list[tuple]


def _series_configs(cfg: ScenarioConfig) -> list[ScenarioConfig]:
    if cfg.series is None:
        return [cfg]
    out = []
    for row in cfg.series.rows:
        c = cfg
        for key, value in zip(cfg.series.keys, row):
            c = c.assign(key, value)
        out.append(c)
    return out


def _lognormal(cfg: ScenarioConfig, spec: RatioSpec) -> LogNormalParams | None:
    if cfg.fit.epsilon_mode == "tuned":
        return fit_tuned(spec).params
    try:
        return fit_ratio_of_products(spec, cfg.fit.epsilon).params
    except FitDomainError:
        return None


def _stream(cfg: ScenarioConfig, stream_id: int) -> RandomStream:
    return RandomStream(cfg.seed, stream_id)


def _sampler(spec: RatioSpec):
    return lambda rng, k: sample_z(spec, rng.generator, k)


NAN = math.nan


def _distribution_row(mode: str):
    def row(c: ScenarioConfig, point: float, stream: RandomStream, extra) -> tuple:
        spec, params = extra
        if mode == "pdf":
            return (pdf_z(spec, point), lognormal_pdf(params, point) if params else NAN)
        if mode == "cdf":
            exact = cdf_z(spec, point)
            approx = lognormal_cdf(params, point) if params else NAN
            if c.mc_samples == 0:
                return (exact, approx, NAN, NAN)
            est = estimate_probability(lambda d: d <= point, _sampler(spec), c.mc_samples, stream)
            return (exact, approx, est.value, est.stderr)
        exact = mgf_z(spec, point)
        if c.mc_samples == 0:
            return (exact, NAN, NAN)
        est = estimate_mean(lambda d: np.exp(-point * d), _sampler(spec), c.mc_samples, stream)
        return (exact, est.value, est.stderr)
    return row


def _secrecy_row(c: ScenarioConfig, point: float, stream: RandomStream, extra) -> tuple:
    sc = c.secrecy()
    bound = sop_lower_bound(sc)
    p_nsc = pnsc(sc)
    if c.mc_samples:
        sop = sop_exact_mc(sc, c.mc_samples, stream.substream(2 * stream.stream_id))
        nz = pnsc_mc(sc, c.mc_samples, stream.substream(2 * stream.stream_id + 1))
    else:
        sop = nz = None
    params = _lognormal(c, sc.spec)
    approx = lognormal_cdf(params, sc.tau) if params else NAN
    return (bound, sop.value if sop else NAN, sop.stderr if sop else NAN,
            sop_asymptotic(sc).value, p_nsc,
            nz.value if nz else NAN, nz.stderr if nz else NAN, approx)


def _relay_row(c: ScenarioConfig, point: float, stream: RandomStream, extra) -> tuple:
    rc = c.relay()
    terms = relay_terms(rc)
    bound = fd_outage_bound(rc)
    est = fd_outage_exact_mc(rc, c.mc_samples, stream) if c.mc_samples else None
    if rc.sigma == 0.0:
        approx = 0.0
    else:
        params = _lognormal(c, rc.first_hop_spec)
        fy = lognormal_cdf(params, rc.sigma) if params else NAN
        approx = fy + terms.second_hop_cdf - fy * terms.second_hop_cdf
    return (bound, est.value if est else NAN, est.stderr if est else NAN,
            fd_outage_asymptotic(rc), terms.second_hop_cdf, approx)


ROW_COLUMNS = {
    "pdf": ("exact_pdf", "lognormal_pdf"),
    "cdf": ("exact_cdf", "lognormal_cdf", "mc_estimate", "mc_stderr"),
    "mgf": ("exact_mgf", "mc_estimate", "mc_stderr"),
    "secrecy": ("sop_bound", "sop_mc", "sop_mc_stderr", "sop_asymptotic",
                "pnsc", "pnsc_mc", "pnsc_mc_stderr", "sop_lognormal"),
    "relay": ("op_bound", "op_mc", "op_mc_stderr", "op_asymptotic",
              "second_hop_cdf", "op_lognormal"),
}
FIT_COLUMNS = ("epsilon", "mu", "sigma", "kolmogorov_distance")
KS_COLUMNS = ("repetition", "epsilon", "mu", "sigma", "statistic", "critical",
              "sample_size", "accepted")


def _axis_column(cfg: ScenarioConfig) -> str:
    name = cfg.sweep.variable
    return AXIS_COLUMNS.get(name, name.replace(".", "_"))


def _series_columns(cfg: ScenarioConfig) -> tuple[str, ...]:
    return tuple(k.replace(".", "_") for k in cfg.series.keys) if cfg.series else ()


def _run_sweep(cfg: ScenarioConfig, pool) -> Table:
    row_fn: Callable = {"secrecy": _secrecy_row, "relay": _relay_row}.get(
        cfg.mode) or _distribution_row(cfg.mode)
    jobs = []
    for si, combo in enumerate(_series_configs(cfg)):
        extra = None
        if cfg.mode in ("pdf", "cdf", "mgf"):
            spec = combo.ratio_spec()
            extra = (spec, _lognormal(combo, spec) if cfg.mode != "mgf" else None)
        label = cfg.series.rows[si] if cfg.series else ()
        for point in cfg.sweep.values:
            jobs.append((label, combo, point, extra))

    def work(k: int) -> tuple:
        label, combo, point, extra = jobs[k]
        c = combo if combo.sweep.variable in ("x", "s") else combo.assign(combo.sweep.variable, point)
        return label + (point,) + tuple(row_fn(c, point, _stream(cfg, k), extra))

    rows = list(pool.map(work, range(len(jobs))))
    columns = _series_columns(cfg) + (_axis_column(cfg),) + ROW_COLUMNS[cfg.mode]
    return Table(columns, rows)


def _fit_reference(combo: ScenarioConfig, spec: RatioSpec, stream: RandomStream):
    if combo.fit.reference == "samples":
        return EmpiricalCDF(sample_z(spec, stream.generator, combo.sample_size))
    return None


def _run_fit(cfg: ScenarioConfig, pool) -> Table:
    combos = _series_configs(cfg)

    def work(k: int) -> tuple:
        combo = combos[k]
        spec = combo.ratio_spec()
        if combo.fit.epsilon_mode == "tuned":
            report = fit_tuned(spec, _fit_reference(combo, spec, _stream(cfg, k)))
        else:
            report = fit_ratio_of_products(spec, combo.fit.epsilon)
        label = cfg.series.rows[k] if cfg.series else ()
        return label + (report.epsilon, report.params.mu, report.params.sigma,
                        _report_distance(report, spec))

    rows = list(pool.map(work, range(len(combos))))
    return Table(_series_columns(cfg) + FIT_COLUMNS, rows)


def _report_distance(report: FitReport, spec: RatioSpec) -> float:
    if math.isfinite(report.kolmogorov_distance):
        return report.kolmogorov_distance
    return kolmogorov_distance(report.params, spec)


def ks_command(cfg: ScenarioConfig, spec: RatioSpec, stream: RandomStream) -> tuple:
    """One KS experiment: draw ``sample_size`` values, fit, test.

    With ``epsilon_mode = tuned`` the adjustment factor is tuned first,
    against the exact CDF or the drawn samples per ``[fit] reference``.
    """
    samples = EmpiricalCDF(sample_z(spec, stream.generator, cfg.sample_size))
    if cfg.fit.epsilon_mode == "tuned":
        reference = samples if cfg.fit.reference == "samples" else None
        try:
            eps = tune_epsilon(spec, reference).epsilon
            params = fit_ratio_of_products(spec, eps).params
        except FitDomainError:
            report = fit_tuned(spec, reference)
            eps, params = report.epsilon, report.params
    else:
        eps = cfg.fit.epsilon
        params = fit_ratio_of_products(spec, eps).params
    rep = ks_test(samples, lambda z: lognormal_cdf(params, z), cfg.alpha)
    return (eps, params.mu, params.sigma, rep.statistic, rep.critical,
            rep.sample_size, int(rep.accepted))


def _run_kstest(cfg: ScenarioConfig, pool) -> Table:
    combos = _series_configs(cfg)
    jobs = [(si, r) for si in range(len(combos)) for r in range(cfg.repetitions)]

    def work(k: int) -> tuple:
        si, r = jobs[k]
        label = cfg.series.rows[si] if cfg.series else ()
        combo = combos[si]
        return label + (r,) + ks_command(combo, combo.ratio_spec(), _stream(cfg, k))

    rows = list(pool.map(work, range(len(jobs))))
    return Table(_series_columns(cfg) + KS_COLUMNS, rows)


def run_scenario(cfg: ScenarioConfig, jobs: int = 1) -> Table:
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        if cfg.mode == "fit":
            return _run_fit(cfg, pool)
        if cfg.mode == "kstest":
            return _run_kstest(cfg, pool)
        return _run_sweep(cfg, pool)


# --- output -----------------------------------------------------------------


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".9g")


def render_csv(table: Table, cfg: ScenarioConfig) -> str:
    buf = io.StringIO()
    buf.write(f"# fratio {__version__}\n")
    buf.write(f"# mode: {cfg.mode}\n")
    buf.write(f"# seed: {cfg.seed}\n")
    buf.write(f"# mc_samples: {cfg.mc_samples}\n")
    buf.write(f"# config_sha256: {cfg.source_hash}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fratio", description="Ratios of products of squared F variates.")
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", required=True, help="INI scenario file")
    ap.add_argument("--seed", type=int, help="override [montecarlo] seed")
    ap.add_argument("--out", help="CSV destination (default: [scenario] output, else stdout)")
    ap.add_argument("--mc-samples", type=int, help="override [montecarlo] n")
    ap.add_argument("--alpha", type=float, help="override [kstest] alpha")
    ap.add_argument("--jobs", type=int, default=1, help="worker threads for sweep rows")
    ap.add_argument("--version", action="version", version=f"fratio {__version__}")
    return ap


def _apply_overrides(cfg: ScenarioConfig, args) -> ScenarioConfig:
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError(f"--seed {args.seed}: must be an unsigned 64-bit integer")
        cfg = replace(cfg, seed=args.seed)
    if args.mc_samples is not None:
        if args.mc_samples < 0:
            raise ConfigError("--mc-samples must be non-negative")
        cfg = replace(cfg, mc_samples=args.mc_samples)
    if args.alpha is not None:
        if not 0 < args.alpha < 1:
            raise ConfigError("--alpha must lie in (0, 1)")
        cfg = replace(cfg, alpha=args.alpha)
    return cfg


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"fratio: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        cfg = _apply_overrides(parse_config(text, args.mode), args)
    except (ConfigError, DomainError) as exc:
        print(f"fratio: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        csv_text = render_csv(run_scenario(cfg, args.jobs), cfg)
    except NumericalError as exc:
        print(f"fratio: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, DomainError) as exc:
        print(f"fratio: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or cfg.output
    try:
        if out:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(csv_text)
        else:
            sys.stdout.write(csv_text)
            sys.stdout.flush()
    except OSError as exc:
        print(f"fratio: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
