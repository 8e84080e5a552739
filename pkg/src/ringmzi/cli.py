"""Batch command-line interface: config parsing, sweeps, CSV tables.

Configuration is flat ``section.key = value`` text ('#' starts a comment,
SI units throughout). Every physics error at a grid point flags the row
instead of aborting the run; only configuration problems change the exit
code (0 success, 2 config error, 3 I/O error).
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cavity_io import jsi as jsi_density
from .cavity_io import output_moments, quadrature_variance, to_db
from .constants import HBAR
from .errors import ConfigError, DomainError, PoleError, ThresholdError
from .interferometer import (SensorSpec, improvement_factor, mzi_input_state, mzi_transform,
                             phase_sensitivity_coherent, phase_sensitivity_numeric,
                             phase_sensitivity_squeezed, shot_noise_limit)
from .meanfield import SolverConfig, comparison_curve
from .params import (CavityRates, Injection, REFERENCE_GEOMETRY, RingGeometry, derive_rates,
                     fwm_gain, sigma_from_power, threshold_power)

COMMANDS = ("rates", "squeezing", "jsi", "meanfield", "sensitivity", "pole", "improvement")

_GEOMETRY_KEYS = ("ring_length", "n_eff", "n_g", "cross_coupling", "alpha_loss",
                  "n2", "a_eff", "lambda_p")

KNOWN_KEYS = (
    tuple(f"geometry.{k}" for k in _GEOMETRY_KEYS)
    + ("pump.sigma_n", "pump.p_l", "pump.p_c", "pump.alpha_c", "pump.delta_p",
       "sensor.phi", "sensor.eta", "sensor.length", "sensor.alpha_loss",
       "sweep.variable", "sweep.start", "sweep.stop", "sweep.points", "sweep.scale",
       "jsi.span", "jsi.points", "improvement.decay_ratio", "meanfield.t_max_factor")
)

_SWEEP_VARIABLES = {
    "squeezing": ("phi_lo",),
    "meanfield": ("sigma_n",),
    "sensitivity": ("p_c", "phi"),
    "pole": ("alpha_c",),
    "improvement": ("sensor_length",),
}

_DEFAULT_SWEEPS = {
    "squeezing": ("phi_lo", 0.0, math.pi, 181, "linear"),
    "meanfield": ("sigma_n", 0.1, 1.15, 22, "linear"),
    "sensitivity": ("p_c", 1e-8, 1.0, 161, "log"),
    "pole": ("alpha_c", 1e1, 1e6, 201, "log"),
    "improvement": ("sensor_length", 1e-3, 1e2, 181, "log"),
}


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self) -> None:
        if self.points < 2:
            raise ConfigError(f"sweep.points must be >= 2, got {self.points}")
        if self.scale not in ("linear", "log"):
            raise ConfigError(f"sweep.scale must be linear or log, got {self.scale!r}")
        if self.scale == "log" and (self.start <= 0 or self.stop <= 0):
            raise ConfigError("log sweeps need positive start/stop")
        if self.start == self.stop:
            raise ConfigError("sweep.start and sweep.stop must differ")

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass
class RunConfig:
    """Validated run description assembled from defaults, file and --set lines."""

    command: str
    geometry: RingGeometry
    sigma_n: float | None
    p_l: float | None
    p_c: float | None
    alpha_c: float | None
    delta_p: float
    phi: float
    eta: float | None
    sensor_length: float | None
    sensor_alpha_loss: float
    sweep: SweepSpec | None
    jsi_span: float | None
    jsi_points: int
    decay_ratio: float | None
    t_max_factor: float
    resolved: dict[str, str] = field(default_factory=dict)

    def config_sha256(self) -> str:
        canonical = "".join(f"{k} = {self.resolved[k]}\n" for k in sorted(self.resolved))
        canonical = f"command = {self.command}\n" + canonical
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


@dataclass
class ResultTable:
    """Rectangular numeric table with provenance metadata."""

    columns: list[str]
    rows: list[list]
    meta: dict[str, str]

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ConfigError("result rows must match the column count")


def _parse_lines(text: str, first_lineno: int = 1) -> list[tuple[int, str, str]]:
    entries = []
    for offset, raw in enumerate(text.splitlines()):
        lineno = first_lineno + offset
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        entries.append((lineno, key, value))
    return entries


def _to_float(key: str, value: str, lineno: int) -> float:
    try:
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: {key} expects a number, got {value!r}") from exc


def _to_int(key: str, value: str, lineno: int) -> int:
    number = _to_float(key, value, lineno)
    if number != int(number):
        raise ConfigError(f"line {lineno}: {key} expects an integer, got {value!r}")
    return int(number)


def parse_config(text: str, command: str = "") -> RunConfig:
    """Parse flat key-value configuration text into a validated RunConfig.

    Later assignments override earlier ones; unknown keys, malformed values
    and conflicting settings raise ConfigError with the offending key and
    line number. An empty text yields the reference design profile.
    """
    values: dict[str, tuple[str, int]] = {}
    for lineno, key, value in _parse_lines(text):
        values[key] = (value, lineno)

    def take_float(key: str) -> float | None:
        if key not in values:
            return None
        value, lineno = values[key]
        return _to_float(key, value, lineno)

    def take_float_default(key: str, default: float) -> float:
        number = take_float(key)
        return default if number is None else number

    def take_int(key: str, default: int) -> int:
        if key not in values:
            return default
        value, lineno = values[key]
        return _to_int(key, value, lineno)

    geometry_kwargs = {}
    for name in _GEOMETRY_KEYS:
        override = take_float(f"geometry.{name}")
        geometry_kwargs[name] = getattr(REFERENCE_GEOMETRY, name) if override is None else override
    try:
        geometry = RingGeometry(**geometry_kwargs)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc

    sigma_n = take_float("pump.sigma_n")
    p_l = take_float("pump.p_l")
    if sigma_n is not None and p_l is not None:
        raise ConfigError("pump.sigma_n and pump.p_l are mutually exclusive")
    if sigma_n is None and p_l is None:
        sigma_n = 0.99895
    if sigma_n is not None and sigma_n < 0:
        raise ConfigError(f"pump.sigma_n out of range: {sigma_n}")
    if p_l is not None and p_l < 0:
        raise ConfigError(f"pump.p_l out of range: {p_l}")

    p_c = take_float("pump.p_c")
    alpha_c = take_float("pump.alpha_c")
    if p_c is not None and alpha_c is not None:
        raise ConfigError("pump.p_c and pump.alpha_c are mutually exclusive")
    if p_c is None and alpha_c is None:
        alpha_c = 1e5
    if alpha_c is not None and alpha_c < 0:
        raise ConfigError(f"pump.alpha_c out of range: {alpha_c}")
    if p_c is not None and p_c < 0:
        raise ConfigError(f"pump.p_c out of range: {p_c}")

    eta = take_float("sensor.eta")
    sensor_length = take_float("sensor.length")
    if eta is not None and sensor_length is not None:
        raise ConfigError("sensor.eta and sensor.length are mutually exclusive")
    if eta is None and sensor_length is None:
        eta = 1.0
    if eta is not None and not 0 < eta <= 1:
        raise ConfigError(f"sensor.eta out of range (0, 1]: {eta}")

    sensor_alpha_loss = take_float("sensor.alpha_loss")
    if sensor_alpha_loss is None:
        sensor_alpha_loss = geometry.alpha_loss

    sweep = None
    if any(key.startswith("sweep.") for key in values):
        default = _DEFAULT_SWEEPS.get(command)
        if "sweep.variable" in values:
            variable = values["sweep.variable"][0]
        elif default is not None:
            variable = default[0]
        else:
            raise ConfigError(f"command {command!r} does not take a sweep")
        if default is not None and variable == default[0]:
            base_start, base_stop, base_points, base_scale = default[1:]
        else:
            base_start = base_stop = None
            base_points, base_scale = 101, "linear"
        start = take_float_default("sweep.start", base_start) if base_start is not None \
            else take_float("sweep.start")
        stop = take_float_default("sweep.stop", base_stop) if base_stop is not None \
            else take_float("sweep.stop")
        if start is None or stop is None:
            raise ConfigError("sweep.start and sweep.stop are required")
        sweep = SweepSpec(
            variable=variable,
            start=start,
            stop=stop,
            points=take_int("sweep.points", base_points),
            scale=values.get("sweep.scale", (base_scale, 0))[0],
        )

    config = RunConfig(
        command=command,
        geometry=geometry,
        sigma_n=sigma_n,
        p_l=p_l,
        p_c=p_c,
        alpha_c=alpha_c,
        delta_p=take_float_default("pump.delta_p", 0.0),
        phi=take_float_default("sensor.phi", math.pi / 2),
        eta=eta,
        sensor_length=sensor_length,
        sensor_alpha_loss=sensor_alpha_loss,
        sweep=sweep,
        jsi_span=take_float("jsi.span"),
        jsi_points=take_int("jsi.points", 200),
        decay_ratio=take_float("improvement.decay_ratio"),
        t_max_factor=take_float_default("meanfield.t_max_factor", 3e6),
    )
    config.resolved = _resolve_for_hash(config)
    return config


def _resolve_for_hash(cfg: RunConfig) -> dict[str, str]:
    resolved = {f"geometry.{name}": repr(getattr(cfg.geometry, name)) for name in _GEOMETRY_KEYS}
    resolved.update({
        "pump.sigma_n": repr(cfg.sigma_n),
        "pump.p_l": repr(cfg.p_l),
        "pump.p_c": repr(cfg.p_c),
        "pump.alpha_c": repr(cfg.alpha_c),
        "pump.delta_p": repr(cfg.delta_p),
        "sensor.phi": repr(cfg.phi),
        "sensor.eta": repr(cfg.eta),
        "sensor.length": repr(cfg.sensor_length),
        "sensor.alpha_loss": repr(cfg.sensor_alpha_loss),
        "jsi.span": repr(cfg.jsi_span),
        "jsi.points": repr(cfg.jsi_points),
        "improvement.decay_ratio": repr(cfg.decay_ratio),
        "meanfield.t_max_factor": repr(cfg.t_max_factor),
    })
    if cfg.sweep is not None:
        resolved.update({
            "sweep.variable": cfg.sweep.variable,
            "sweep.start": repr(cfg.sweep.start),
            "sweep.stop": repr(cfg.sweep.stop),
            "sweep.points": repr(cfg.sweep.points),
            "sweep.scale": cfg.sweep.scale,
        })
    return resolved


def _sweep_for(cfg: RunConfig) -> SweepSpec:
    if cfg.sweep is not None:
        allowed = _SWEEP_VARIABLES[cfg.command]
        if cfg.sweep.variable not in allowed:
            raise ConfigError(
                f"command {cfg.command!r} sweeps one of {allowed}, got {cfg.sweep.variable!r}")
        return cfg.sweep
    return SweepSpec(*_DEFAULT_SWEEPS[cfg.command])


def _map_ordered(fn, items):
    items = list(items)
    if len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(8, len(items))) as pool:
        return list(pool.map(fn, items))


def _resolve_drive(cfg: RunConfig, rates: CavityRates, gain: float):
    """(injection, alpha_c, pump_power) for the configured pump block."""
    omega_p = cfg.geometry.pump_frequency()
    if cfg.p_l is not None:
        injection = sigma_from_power(cfg.p_l, rates, gain, omega_p, cfg.delta_p)
        pump_power = cfg.p_l
    else:
        injection = Injection.from_sigma_n(cfg.sigma_n, rates)
        pump_power = cfg.sigma_n * threshold_power(rates, gain, omega_p, cfg.delta_p)
    alpha_c = cfg.alpha_c
    if alpha_c is None:
        alpha_c = math.sqrt(cfg.p_c / (HBAR * omega_p))
    return injection, alpha_c, pump_power


def _sensor_spec(cfg: RunConfig, alpha_c: float, pump_power: float, phi: float | None = None,
                 eta: float | None = None, length: float | None = None) -> SensorSpec:
    omega_p = cfg.geometry.pump_frequency()
    kwargs = dict(phi=cfg.phi if phi is None else phi, alpha_c=alpha_c,
                  alpha_l_power=pump_power, omega_p=omega_p)
    if length is not None:
        return SensorSpec(sensor_length=length, alpha_loss=cfg.sensor_alpha_loss, **kwargs)
    if eta is not None:
        return SensorSpec(eta=eta, **kwargs)
    if cfg.sensor_length is not None:
        return SensorSpec(sensor_length=cfg.sensor_length, alpha_loss=cfg.sensor_alpha_loss, **kwargs)
    return SensorSpec(eta=cfg.eta, **kwargs)


def run_command(cfg: RunConfig) -> ResultTable:
    """Evaluate one command; per-point physics errors become flagged rows."""
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    if cfg.sweep is not None and cfg.command not in _SWEEP_VARIABLES:
        raise ConfigError(f"command {cfg.command!r} does not take a sweep")
    rates = derive_rates(cfg.geometry)
    gain = fwm_gain(cfg.geometry).gain
    meta = {"tool_version": __version__, "config_sha256": cfg.config_sha256()}
    builder = {
        "rates": _run_rates,
        "squeezing": _run_squeezing,
        "jsi": _run_jsi,
        "meanfield": _run_meanfield,
        "sensitivity": _run_sensitivity,
        "pole": _run_pole,
        "improvement": _run_improvement,
    }[cfg.command]
    columns, rows = builder(cfg, rates, gain)
    return ResultTable(columns=columns, rows=rows, meta=meta)


def _run_rates(cfg: RunConfig, rates: CavityRates, gain: float):
    omega_p = cfg.geometry.pump_frequency()
    strength = fwm_gain(cfg.geometry)
    p_th = threshold_power(rates, gain, omega_p, cfg.delta_p)
    columns = ["kappa", "gamma", "gamma_total", "t_round", "t_trans", "g", "gamma_nl", "p_th"]
    rows = [[rates.kappa, rates.gamma, rates.gamma_total, rates.t_round, rates.t_trans,
             strength.gain, strength.gamma_nl, p_th]]
    return columns, rows


def _run_squeezing(cfg: RunConfig, rates: CavityRates, gain: float):
    injection, _, _ = _resolve_drive(cfg, rates, gain)
    sweep = _sweep_for(cfg)

    def point(phi_lo: float):
        try:
            variance = quadrature_variance(rates, injection, phi_lo)
            return [phi_lo, variance, to_db(variance), ""]
        except ThresholdError:
            return [phi_lo, math.inf, math.inf, "threshold"]

    return ["phi_lo", "variance", "variance_db", "flag"], _map_ordered(point, sweep.grid())


def _run_jsi(cfg: RunConfig, rates: CavityRates, gain: float):
    injection, _, _ = _resolve_drive(cfg, rates, gain)
    span = cfg.jsi_span if cfg.jsi_span is not None else 3.0 * rates.gamma_total
    axis = np.linspace(-span, span, cfg.jsi_points)
    grid_s, grid_i = np.meshgrid(axis, axis, indexing="ij")
    values = jsi_density(rates, injection, grid_s, grid_i)
    rows = [[float(ws), float(wi), float(val)]
            for ws, wi, val in zip(grid_s.ravel(), grid_i.ravel(), values.ravel())]
    return ["delta_ws", "delta_wi", "value"], rows


def _run_meanfield(cfg: RunConfig, rates: CavityRates, gain: float):
    sweep = _sweep_for(cfg)
    solver = SolverConfig.for_rates(rates, t_max=cfg.t_max_factor / rates.gamma_total)
    records = comparison_curve(rates, gain, sweep.grid(), solver)
    rows = [[rec["sigma_n"], rec["ns_lin"], rec["ns_mf"], rec["np_lin"], rec["np_mf"],
             "threshold" if not math.isfinite(rec["ns_lin"]) else ""] for rec in records]
    return ["sigma_n", "ns_lin", "ns_mf", "np_lin", "np_mf", "flag"], rows


def _run_sensitivity(cfg: RunConfig, rates: CavityRates, gain: float):
    injection, alpha_c, pump_power = _resolve_drive(cfg, rates, gain)
    sweep = _sweep_for(cfg)
    omega_p = cfg.geometry.pump_frequency()
    moments = None
    try:
        moments = output_moments(rates, injection)
    except ThresholdError:
        pass

    def snl_at(spec: SensorSpec):
        state = mzi_transform(mzi_input_state(spec.alpha_c, moments), spec)
        return shot_noise_limit(spec, state)

    if sweep.variable == "p_c":
        def point(p_c: float):
            a_c = math.sqrt(p_c / (HBAR * omega_p))
            spec = _sensor_spec(cfg, a_c, pump_power)
            try:
                if moments is None:
                    raise ThresholdError("above threshold")
                return [p_c, a_c, phase_sensitivity_squeezed(spec, rates, injection),
                        phase_sensitivity_coherent(spec), snl_at(spec), ""]
            except PoleError:
                return [p_c, a_c, math.inf, phase_sensitivity_coherent(spec), snl_at(spec), "pole"]
            except (ThresholdError, DomainError) as exc:
                flag = "threshold" if isinstance(exc, ThresholdError) else "domain"
                return [p_c, a_c, math.inf, math.inf, math.inf, flag]

        columns = ["p_c", "alpha_c", "dphi_squeezed", "dphi_coherent", "dphi_snl", "flag"]
        return columns, _map_ordered(point, sweep.grid())

    def point(phi: float):
        spec = _sensor_spec(cfg, alpha_c, pump_power, phi=phi)
        try:
            if moments is None:
                raise ThresholdError("above threshold")
            report = phase_sensitivity_numeric(spec, moments)
            return [phi, report.dphi, phase_sensitivity_coherent(spec), report.snl, ""]
        except PoleError:
            return [phi, math.inf, phase_sensitivity_coherent(spec), snl_at(spec), "pole"]
        except (ThresholdError, DomainError) as exc:
            flag = "threshold" if isinstance(exc, ThresholdError) else "domain"
            return [phi, math.inf, math.inf, math.inf, flag]

    columns = ["phi", "dphi_squeezed", "dphi_coherent", "dphi_snl", "flag"]
    return columns, _map_ordered(point, sweep.grid())


def _run_pole(cfg: RunConfig, rates: CavityRates, gain: float):
    injection, _, pump_power = _resolve_drive(cfg, rates, gain)
    sweep = _sweep_for(cfg)

    def point(alpha_c: float):
        spec = _sensor_spec(cfg, alpha_c, pump_power)
        try:
            return [alpha_c, phase_sensitivity_squeezed(spec, rates, injection), ""]
        except PoleError:
            return [alpha_c, math.inf, "pole"]
        except ThresholdError:
            return [alpha_c, math.inf, "threshold"]

    return ["alpha_c", "dphi_squeezed", "flag"], _map_ordered(point, sweep.grid())


def _run_improvement(cfg: RunConfig, rates: CavityRates, gain: float):
    # Sweep protocol: gamma adjusted at fixed kappa to reach the target
    # decay ratio, sigma_n held at the configured value.
    ratio = cfg.decay_ratio if cfg.decay_ratio is not None else rates.kappa / rates.gamma
    if ratio <= 0:
        raise ConfigError(f"improvement.decay_ratio must be positive, got {ratio}")
    ring = CavityRates(kappa=rates.kappa, gamma=rates.kappa / ratio)
    injection, alpha_c, pump_power = _resolve_drive(cfg, ring, gain)
    sweep = _sweep_for(cfg)

    def point(length: float):
        spec = _sensor_spec(cfg, alpha_c, pump_power, length=length)
        try:
            return [length, spec.eta_value, improvement_factor(spec, ring, injection), ""]
        except PoleError:
            return [length, spec.eta_value, math.inf, "pole"]
        except ThresholdError:
            return [length, spec.eta_value, math.inf, "threshold"]

    return ["sensor_length", "eta", "improvement", "flag"], _map_ordered(point, sweep.grid())


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    number = float(value)
    if math.isinf(number):
        return "inf" if number > 0 else "-inf"
    if math.isnan(number):
        return "nan"
    return format(number, ".17e")


def write_table(table: ResultTable, path: str | None) -> None:
    """Write the table as CSV with '#'-prefixed metadata lines.

    Output bytes are a pure function of the table contents, so identical
    configurations produce identical files.
    """
    lines = [f"# {key}={table.meta[key]}" for key in sorted(table.meta)]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_format_cell(cell) for cell in row))
    payload = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(payload)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(payload)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ringmzi",
        description="Microring squeezed-light interferometry design tables.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="path to a key-value configuration file")
    parser.add_argument("--out", help="output CSV path (default: stdout)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a configuration entry (repeatable)")
    args = parser.parse_args(argv)

    text = ""
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            print(f"ringmzi: cannot read config: {exc}", file=sys.stderr)
            return 3
    if args.set:
        text += "\n" + "\n".join(args.set)

    try:
        cfg = parse_config(text, command=args.command)
        table = run_command(cfg)
    except (ConfigError, DomainError) as exc:
        print(f"ringmzi: config error: {exc}", file=sys.stderr)
        return 2

    try:
        write_table(table, args.out)
    except OSError as exc:
        print(f"ringmzi: cannot write output: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
