"""Sweep runners behind the ``nfpolar`` subcommands.

Each runner takes an `ExperimentConfig` and returns a `CsvTable`. Sweep
points are independent and are farmed out to a process pool; rows always
come back in grid order.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from functools import partial
import datetime
import math
import os

import numpy as np

from . import __version__
from .beamfocus import design_precoder, focal_region, mismatched_rate, RateProfile
from .capacity import alpha_function, db_to_linear, high_snr_rate, optimal_epsilon, optimal_spacing
from .channel import CANONICAL_CONFIGS, PolarizationConfig, Scenario
from .geometry import PhysicalConstants, UePosition, UlaGeometry
from .spectrum import closed_form_eigenvalues, exact_gramian

CONFIGS = [PolarizationConfig(*c) for c in CANONICAL_CONFIGS]


class ConfigError(ValueError):
    """Bad experiment configuration; maps to exit code 2."""


def available_jobs() -> int:
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:
        return os.cpu_count() or 1


@dataclass
class FocusCase:
    config: PolarizationConfig
    length: float
    half_count: int

    @property
    def label(self) -> str:
        return f"{self.config.label}_L{self.length:g}_M{self.half_count}"

    @classmethod
    def parse(cls, text: str) -> "FocusCase":
        cfg, length, m = text.strip().split(":")
        return cls(PolarizationConfig.parse(cfg), float(length), int(m))


DEFAULT_FOCUS_CASES = "2x2:0.5:100, 2x2:9.058:100, 3x3:9.058:100, 3x2:7.144:100"


@dataclass
class ExperimentConfig:
    """Scenario parameters, one sweep spec and run options.

    Unset (None) fields fall back to per-subcommand defaults in `DEFAULTS`.
    """

    D: float = None
    M: int = None
    delta_t: float = None
    L: float = None
    rpol: int = None
    tpol: int = None
    wavelength: float = 0.1
    eta: float = 1.0
    snr_db: float = None
    sweep_min: float = None
    sweep_max: float = None
    sweep_count: int = None
    drop: float = 10.0
    cases: str = None
    reactive: bool = False
    allow_noncanonical: bool = False
    timestamp: bool = False
    jobs: int = None

    @property
    def constants(self) -> PhysicalConstants:
        return PhysicalConstants(self.eta, self.wavelength)

    def sweep(self) -> np.ndarray:
        return np.linspace(self.sweep_min, self.sweep_max, int(self.sweep_count))

    def configs(self) -> list[PolarizationConfig]:
        if self.rpol is None and self.tpol is None:
            return list(CONFIGS)
        return [PolarizationConfig(self.rpol or 3, self.tpol or 3)]

    def half_counts(self) -> list[int]:
        return [self.M] if isinstance(self.M, int) else list(self.M)

    def echo(self) -> list[tuple[str, object]]:
        return [(f.name, getattr(self, f.name)) for f in fields(self) if f.name != "jobs"]


DEFAULTS = {
    "eigenvalues": dict(D=5.0, M=(3, 15), sweep_min=0.0, sweep_max=1.0, sweep_count=101),
    "rate-vs-snr": dict(D=5.0, M=20, sweep_min=-10.0, sweep_max=60.0, sweep_count=15),
    "optimal-size": dict(M=20, snr_db=20.0, sweep_min=1.0, sweep_max=10.0, sweep_count=10),
    "focus-sweep": dict(D=5.0, snr_db=20.0, sweep_min=0.5, sweep_max=15.0, sweep_count=1451,
                        cases=DEFAULT_FOCUS_CASES),
    "alpha-curve": dict(sweep_min=0.01, sweep_max=5.0, sweep_count=500),
}
SWEEP_VARIABLE = {"eigenvalues": "delta_t", "rate-vs-snr": "snr_db", "optimal-size": "D",
                  "focus-sweep": "d", "alpha-curve": "epsilon"}

_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}
_ALIASES = {"lambda": "wavelength", "delta-t": "delta_t", "r_pol": "rpol", "t_pol": "tpol"}


def read_config_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key] = value
    return out


def _coerce(name: str, value):
    if value is None:
        return None
    kinds = {f.name: f.type for f in fields(ExperimentConfig)}
    kind = kinds[name]
    if not isinstance(value, str):
        return value
    if kind is bool:
        v = value.lower()
        if v in _BOOL_TRUE:
            return True
        if v in _BOOL_FALSE:
            return False
        raise ConfigError(f"{name}: expected a boolean, got {value!r}")
    try:
        if name == "M" and "," in value:
            return tuple(int(v) for v in value.split(","))
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {value!r}") from None
    return value


def build_config(command: str, file_values: dict = None, overrides: dict = None) -> ExperimentConfig:
    """Merge defaults < config file < command-line overrides and validate."""
    known = {f.name for f in fields(ExperimentConfig)}
    merged = dict(DEFAULTS.get(command, {}))
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            name = _ALIASES.get(key, key).replace("-", "_")
            if name == "sweep":
                continue
            if name not in known:
                raise ConfigError(f"unknown configuration key {key!r}")
            merged[name] = _coerce(name, value)
    cfg = ExperimentConfig(**merged)
    validate_config(command, cfg)
    return cfg


def validate_config(command: str, cfg: ExperimentConfig) -> None:
    if cfg.delta_t is not None and cfg.L is not None:
        raise ConfigError("give exactly one of delta_t or L, not both")
    for name in ("D", "wavelength", "eta", "L"):
        v = getattr(cfg, name)
        if v is not None and not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
            raise ConfigError(f"{name} must be a positive finite number, got {v!r}")
    if cfg.delta_t is not None and not cfg.delta_t >= 0:
        raise ConfigError("delta_t must be non-negative")
    if cfg.M is not None:
        ms = [cfg.M] if isinstance(cfg.M, int) else cfg.M
        if any(m < 0 for m in ms):
            raise ConfigError("M must be non-negative")
    if cfg.drop is not None and not cfg.drop > 0:
        raise ConfigError("drop must be positive")
    if cfg.sweep_count is not None and cfg.sweep_count < 2:
        raise ConfigError("sweep_count must be at least 2")
    if cfg.sweep_min is not None and cfg.sweep_max is not None and not cfg.sweep_max > cfg.sweep_min:
        raise ConfigError("sweep_max must exceed sweep_min")
    if command in ("eigenvalues", "optimal-size", "focus-sweep") and cfg.sweep_min is not None:
        if command != "eigenvalues" and not cfg.sweep_min > 0:
            raise ConfigError(f"{SWEEP_VARIABLE[command]} sweep must stay positive")
        if command == "eigenvalues" and cfg.sweep_min < 0:
            raise ConfigError("delta_t sweep must be non-negative")
    if command == "alpha-curve" and cfg.sweep_min is not None and cfg.sweep_min < 0:
        raise ConfigError("epsilon sweep must be non-negative")
    if cfg.rpol is not None or cfg.tpol is not None:
        r, t = cfg.rpol or 3, cfg.tpol or 3
        if r not in (2, 3) or t not in (2, 3):
            raise ConfigError(f"rpol/tpol must be 2 or 3, got ({r}, {t})")
        if (r, t) not in CANONICAL_CONFIGS and not cfg.allow_noncanonical:
            raise ConfigError(f"config {r}x{t} is not canonical; pass --allow-noncanonical to run it")
    if cfg.cases is not None:
        try:
            [FocusCase.parse(c) for c in cfg.cases.split(",")]
        except ValueError as exc:
            raise ConfigError(f"cases: {exc}") from None


@dataclass
class CsvTable:
    header: list[str]
    rows: list[list[float]]
    metadata: list[str] = field(default_factory=list)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValueError("ragged CSV table")

    def column(self, name: str) -> np.ndarray:
        k = self.header.index(name)
        return np.array([r[k] for r in self.rows], dtype=float)

    @staticmethod
    def format_value(v) -> str:
        if v is None or not math.isfinite(v):
            return ""
        return f"{v:.11e}"

    def to_text(self) -> str:
        lines = [f"# {m}" for m in self.metadata]
        lines.append(",".join(self.header))
        lines.extend(",".join(self.format_value(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"


def _metadata(command: str, cfg: ExperimentConfig) -> list[str]:
    meta = [f"nearfield_polar {__version__} {command}",
            f"sweep variable = {SWEEP_VARIABLE.get(command, '')}"]
    meta += [f"{k} = {v}" for k, v in cfg.echo() if v is not None]
    if cfg.timestamp:
        meta.append(f"generated = {datetime.datetime.now(datetime.timezone.utc).isoformat()}")
    return meta


def parallel_map(fn, items, jobs=None):
    items = list(items)
    jobs = available_jobs() if jobs is None else jobs
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * jobs))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=chunk))


def _pad(values, n=3):
    v = list(values)[:n]
    return v + [math.nan] * (n - len(v))


def _eigen_row(point, D, constants, configs, reactive):
    M, dt = point
    row = [float(M), float(dt)]
    ue = UePosition(D)
    eps = M * dt / D
    for cfg in configs:
        exact = exact_gramian(Scenario(UlaGeometry(M, dt), ue, constants, cfg, reactive))
        row += _pad(exact.eigenvalues)
    for cfg in configs:
        closed = closed_form_eigenvalues(cfg, M, eps, constants, D)
        row += _pad(closed.eigenvalues)
    return row


def run_eigenvalue_sweep(cfg: ExperimentConfig) -> CsvTable:
    configs = cfg.configs()
    # per config: exact l1..l3 then closed l1..l3; blank where rank < 3
    header = ["M", "delta_t"] + [f"{kind}_{c.label}_l{k}" for c in configs
                                 for kind in ("exact", "closed") for k in (1, 2, 3)]
    points = [(m, dt) for m in cfg.half_counts() for dt in cfg.sweep()]
    fn = partial(_eigen_row, D=cfg.D, constants=cfg.constants, configs=configs,
                 reactive=cfg.reactive)
    raw = parallel_map(fn, points, cfg.jobs)
    n = len(configs)
    rows = []
    for r in raw:
        exact, closed = r[2:2 + 3 * n], r[2 + 3 * n:]
        row = r[:2]
        for k in range(n):
            row += exact[3 * k:3 * k + 3] + closed[3 * k:3 * k + 3]
        rows.append(row)
    return CsvTable(header, rows, _metadata("eigenvalues", cfg))


def _rate_row(snr_db, D, M, constants, configs, reactive):
    rho = float(db_to_linear(snr_db))
    sim, lemma = [], []
    for c in configs:
        sim.append(optimal_spacing(c, constants, M, D, rho, include_reactive=reactive)[1])
        lemma.append(high_snr_rate(c, constants, M, D, rho).rate)
    return [float(snr_db)] + sim + lemma


def run_rate_vs_snr(cfg: ExperimentConfig) -> CsvTable:
    configs = cfg.configs()
    header = (["snr_db"] + [f"rate_simulated_{c.label}" for c in configs]
              + [f"rate_lemma4_{c.label}" for c in configs])
    fn = partial(_rate_row, D=cfg.D, M=_single_m(cfg), constants=cfg.constants,
                 configs=configs, reactive=cfg.reactive)
    rows = parallel_map(fn, cfg.sweep(), cfg.jobs)
    return CsvTable(header, rows, _metadata("rate-vs-snr", cfg))


def _size_row(D, M, rho, constants, configs, reactive):
    opt, pred = [], []
    for c in configs:
        eps, _ = optimal_spacing(c, constants, M, D, rho, include_reactive=reactive)
        opt.append(2 * eps * D)
        pred.append(2 * optimal_epsilon(c)[0] * D)
    return [float(D)] + opt + pred


def run_optimal_size(cfg: ExperimentConfig) -> CsvTable:
    configs = cfg.configs()
    header = (["D"] + [f"L_optimal_{c.label}" for c in configs]
              + [f"L_predicted_{c.label}" for c in configs])
    fn = partial(_size_row, M=_single_m(cfg), rho=float(db_to_linear(cfg.snr_db)),
                 constants=cfg.constants, configs=configs, reactive=cfg.reactive)
    rows = parallel_map(fn, cfg.sweep(), cfg.jobs)
    return CsvTable(header, rows, _metadata("optimal-size", cfg))


def _single_m(cfg):
    ms = cfg.half_counts()
    if len(ms) != 1:
        raise ConfigError("this experiment takes a single M")
    return ms[0]


def focus_cases(cfg: ExperimentConfig) -> list[FocusCase]:
    """Cases from the flags when any of rpol/tpol/L/delta_t/M is set, else from `cases`."""
    if any(v is not None for v in (cfg.rpol, cfg.tpol, cfg.L, cfg.delta_t)):
        cases = []
        for c in cfg.configs():
            M = cfg.M if isinstance(cfg.M, int) else 100
            if cfg.L is not None:
                length = cfg.L
            elif cfg.delta_t is not None:
                length = 2 * M * cfg.delta_t
            else:
                length = 2 * optimal_epsilon(c)[0] * cfg.D
            cases.append(FocusCase(c, length, M))
        return cases
    return [FocusCase.parse(c) for c in cfg.cases.split(",")]


def _focus_point(d, precoder, rho):
    return mismatched_rate(precoder, precoder.design_scenario.at_distance(d), rho)


def run_focus_sweep(cfg: ExperimentConfig) -> CsvTable:
    rho = float(db_to_linear(cfg.snr_db))
    grid = cfg.sweep()
    cases = focus_cases(cfg)
    columns, summary = [], []
    for case in cases:
        geo = UlaGeometry.from_length(case.half_count, case.length)
        sc = Scenario(geo, UePosition(cfg.D), cfg.constants, case.config, cfg.reactive)
        pre = design_precoder(sc, rho)
        rates = np.array(parallel_map(partial(_focus_point, precoder=pre, rho=rho),
                                      grid, cfg.jobs))
        columns.append(rates)
        region = focal_region(RateProfile(grid, rates, pre), cfg.drop)
        summary.append(
            f"summary {case.label}: streams = {pre.streams}, "
            f"design_rate = {_focus_point(cfg.D, pre, rho):.11e}, "
            f"peak_rate = {region.peak_rate:.11e}, peak_d = {region.peak_position:.11e}, "
            f"focal_lower = {region.lower:.11e}, focal_upper = {region.upper:.11e}, "
            f"drop = {cfg.drop:g}, clipped = {str(region.clipped).lower()}")
    header = ["d"] + [f"rate_{c.label}" for c in cases]
    rows = [[float(d)] + [float(col[i]) for col in columns] for i, d in enumerate(grid)]
    return CsvTable(header, rows, _metadata("focus-sweep", cfg) + summary)


def _alpha_row(eps, configs):
    return [float(eps)] + [alpha_function(c, eps) for c in configs]


def run_alpha_curve(cfg: ExperimentConfig) -> CsvTable:
    configs = list(CONFIGS)
    header = ["epsilon"] + [f"alpha_{c.label}" for c in configs]
    rows = [_alpha_row(e, configs) for e in cfg.sweep()]
    meta = _metadata("alpha-curve", cfg)
    for c in configs:
        eps, val = optimal_epsilon(c)
        meta.append(f"argmax {c.label}: epsilon = {eps:.11e}, alpha = {val:.11e}")
    return CsvTable(header, rows, meta)


RUNNERS = {
    "eigenvalues": run_eigenvalue_sweep,
    "rate-vs-snr": run_rate_vs_snr,
    "optimal-size": run_optimal_size,
    "focus-sweep": run_focus_sweep,
    "alpha-curve": run_alpha_curve,
}
