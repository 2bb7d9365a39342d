"""Experiment configuration: TOML ingestion, validation and re-serialization.

All unit conversions (dBm to watts, GHz to meters, wavelengths to meters)
happen here, once.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .channel import PathLossParams
from .geometry import SimArchitecture
from .metrics import LinkBudget
from .optimizer import FitHyperparams

SPEED_OF_LIGHT = 299_792_458.0
DEFAULT_WAVELENGTH = 0.0107

SWEEP_AXES = ("layers", "atoms", "spacing", "streams", "distance", "power")


class ConfigError(ValueError):
    """Invalid or unreadable experiment configuration."""


@dataclass(frozen=True)
class Sweep:
    axis: str
    values: Tuple[float, ...]

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}; expected one of {SWEEP_AXES}")
        if not self.values:
            raise ConfigError("sweep needs at least one value")


@dataclass(frozen=True)
class ExperimentConfig:
    arch: SimArchitecture
    pathloss: PathLossParams = field(default_factory=PathLossParams)
    correlated: bool = True
    tx_power_dbm: float = 20.0
    noise_power_dbm: float = -110.0
    hyper: FitHyperparams = field(default_factory=FitHyperparams)
    sweep: Optional[Sweep] = None
    trials: int = 100
    master_seed: int = 0
    ber_bits_per_stream: int = 0
    ber_powers_dbm: Tuple[float, ...] = ()
    baseline_antennas: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")
        if self.ber_bits_per_stream < 0:
            raise ConfigError("ber bits_per_stream must be >= 0")
        if self.sweep is not None:
            for value in self.sweep.values:
                try:
                    self.at(value)
                except ValueError as exc:
                    raise ConfigError(f"sweep value {value!r} on axis {self.sweep.axis!r}: {exc}") from exc

    @property
    def budget(self) -> LinkBudget:
        return LinkBudget.from_dbm(self.tx_power_dbm, self.noise_power_dbm)

    def at(self, value) -> "ExperimentConfig":
        """Copy of this config with the sweep axis set to ``value``."""
        axis = self.sweep.axis if self.sweep else None
        arch = self.arch
        if axis == "layers":
            arch = replace(arch, L=_as_int(value), K=_as_int(value))
        elif axis == "atoms":
            arch = replace(arch, M=_as_int(value), N=_as_int(value))
        elif axis == "spacing":
            arch = replace(arch, r_et=float(value), t_er=float(value))
        elif axis == "streams":
            arch = replace(arch, S=_as_int(value))
        elif axis == "distance":
            return replace(self, pathloss=replace(self.pathloss, d=float(value)), sweep=None)
        elif axis == "power":
            return replace(self, tx_power_dbm=float(value), sweep=None)
        return replace(self, arch=arch, sweep=None)


def _as_int(value) -> int:
    if float(value) != int(value):
        raise ValueError(f"expected an integer, got {value!r}")
    return int(value)


def _take(section: Dict[str, Any], key: str, default=None, required=False):
    if key in section:
        return section.pop(key)
    if required:
        raise ConfigError(f"missing required key {key!r}")
    return default


def _length(section, name, wavelength, default=None, required=False):
    """Length given as ``<name>_m`` or ``<name>_wavelengths``."""
    meters = section.pop(f"{name}_m", None)
    waves = section.pop(f"{name}_wavelengths", None)
    if meters is not None and waves is not None:
        raise ConfigError(f"give either {name}_m or {name}_wavelengths, not both")
    if waves is not None:
        return float(waves) * wavelength
    if meters is not None:
        return float(meters)
    if required:
        raise ConfigError(f"missing required key {name}_m (or {name}_wavelengths)")
    return default


def _no_leftovers(name: str, section: Dict[str, Any]):
    if section:
        raise ConfigError(f"unknown key(s) in [{name}]: {', '.join(sorted(section))}")


def from_dict(doc: Dict[str, Any]) -> ExperimentConfig:
    doc = {k: dict(v) if isinstance(v, dict) else v for k, v in doc.items()}
    known = {"architecture", "channel", "budget", "optimizer", "sweep", "experiment", "ber", "baseline"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    try:
        a = doc.get("architecture", {})
        wavelength = a.pop("wavelength_m", None)
        freq = a.pop("frequency_ghz", None)
        if wavelength is not None and freq is not None:
            raise ConfigError("give either wavelength_m or frequency_ghz, not both")
        if freq is not None:
            wavelength = SPEED_OF_LIGHT / (float(freq) * 1e9)
        wavelength = float(wavelength) if wavelength is not None else DEFAULT_WAVELENGTH
        arch = SimArchitecture(
            S=int(_take(a, "streams", required=True)),
            L=int(_take(a, "tx_layers", required=True)),
            K=int(_take(a, "rx_layers", required=True)),
            M=int(_take(a, "tx_atoms", required=True)),
            N=int(_take(a, "rx_atoms", required=True)),
            r_et=_length(a, "tx_spacing", wavelength, default=wavelength / 2),
            t_er=_length(a, "rx_spacing", wavelength, default=wavelength / 2),
            D_t=float(_take(a, "tx_thickness_m", 0.05)),
            D_r=float(_take(a, "rx_thickness_m", 0.05)),
            wavelength=wavelength,
            area_tx=_take(a, "tx_atom_area_m2"),
            area_rx=_take(a, "rx_atom_area_m2"),
        )
        _no_leftovers("architecture", a)

        c = doc.get("channel", {})
        pathloss = PathLossParams(
            d=float(_take(c, "distance_m", 250.0)),
            d0=float(_take(c, "reference_distance_m", 1.0)),
            b=float(_take(c, "pathloss_exponent", 3.5)),
            delta_db=float(_take(c, "shadowing_db", 9.0)),
        )
        correlated = bool(_take(c, "correlated", True))
        _no_leftovers("channel", c)

        b = doc.get("budget", {})
        tx_dbm = float(_take(b, "tx_power_dbm", 20.0))
        noise_dbm = float(_take(b, "noise_power_dbm", -110.0))
        _no_leftovers("budget", b)

        o = doc.get("optimizer", {})
        stop = _take(o, "stop_delta")
        hyper = FitHyperparams(
            eta0=float(_take(o, "eta0", 0.1)),
            beta=float(_take(o, "beta", 0.5)),
            max_iters=int(_take(o, "max_iters", 100)),
            n_starts=int(_take(o, "n_starts", 10)),
            stop_delta=None if stop is None else float(stop),
            multistart=str(_take(o, "multistart", "full")),
        )
        _no_leftovers("optimizer", o)

        sweep = None
        if "sweep" in doc:
            s = doc["sweep"]
            axis = str(_take(s, "axis", required=True))
            values = _take(s, "values", required=True)
            if axis == "spacing" and "unit" in s:
                unit = s.pop("unit")
                if unit == "wavelengths":
                    values = [v * wavelength for v in values]
                elif unit != "m":
                    raise ConfigError(f"spacing unit must be 'm' or 'wavelengths', got {unit!r}")
            sweep = Sweep(axis, tuple(values))
            _no_leftovers("sweep", s)

        e = doc.get("experiment", {})
        trials = int(_take(e, "trials", 100))
        seed = int(_take(e, "master_seed", 0))
        _no_leftovers("experiment", e)

        r = doc.get("ber", {})
        ber_bits = int(_take(r, "bits_per_stream", 0))
        ber_powers = tuple(float(v) for v in _take(r, "tx_power_dbm", []))
        _no_leftovers("ber", r)

        m = doc.get("baseline", {})
        antennas = tuple(int(v) for v in _take(m, "antennas", []))
        _no_leftovers("baseline", m)

        return ExperimentConfig(
            arch=arch,
            pathloss=pathloss,
            correlated=correlated,
            tx_power_dbm=tx_dbm,
            noise_power_dbm=noise_dbm,
            hyper=hyper,
            sweep=sweep,
            trials=trials,
            master_seed=seed,
            ber_bits_per_stream=ber_bits,
            ber_powers_dbm=ber_powers,
            baseline_antennas=antennas,
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc


def load(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return from_dict(doc)


def loads(text: str) -> ExperimentConfig:
    try:
        return from_dict(tomllib.loads(text))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc


def to_dict(cfg: ExperimentConfig) -> Dict[str, Any]:
    a = cfg.arch
    arch: Dict[str, Any] = {
        "streams": a.S,
        "tx_layers": a.L,
        "rx_layers": a.K,
        "tx_atoms": a.M,
        "rx_atoms": a.N,
        "tx_spacing_m": a.r_et,
        "rx_spacing_m": a.t_er,
        "tx_thickness_m": a.D_t,
        "rx_thickness_m": a.D_r,
        "wavelength_m": a.wavelength,
    }
    if a.area_tx is not None:
        arch["tx_atom_area_m2"] = a.area_tx
    if a.area_rx is not None:
        arch["rx_atom_area_m2"] = a.area_rx
    h = cfg.hyper
    optimizer: Dict[str, Any] = {
        "eta0": h.eta0,
        "beta": h.beta,
        "max_iters": h.max_iters,
        "n_starts": h.n_starts,
        "multistart": h.multistart,
    }
    if h.stop_delta is not None:
        optimizer["stop_delta"] = h.stop_delta
    doc: Dict[str, Any] = {
        "architecture": arch,
        "channel": {
            "distance_m": cfg.pathloss.d,
            "reference_distance_m": cfg.pathloss.d0,
            "pathloss_exponent": cfg.pathloss.b,
            "shadowing_db": cfg.pathloss.delta_db,
            "correlated": cfg.correlated,
        },
        "budget": {"tx_power_dbm": cfg.tx_power_dbm, "noise_power_dbm": cfg.noise_power_dbm},
        "optimizer": optimizer,
        "experiment": {"trials": cfg.trials, "master_seed": cfg.master_seed},
    }
    if cfg.sweep is not None:
        doc["sweep"] = {"axis": cfg.sweep.axis, "values": list(cfg.sweep.values)}
    if cfg.ber_bits_per_stream or cfg.ber_powers_dbm:
        doc["ber"] = {"bits_per_stream": cfg.ber_bits_per_stream, "tx_power_dbm": list(cfg.ber_powers_dbm)}
    if cfg.baseline_antennas:
        doc["baseline"] = {"antennas": list(cfg.baseline_antennas)}
    return doc


def dumps(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(to_dict(cfg))


def reference_defaults(**arch_overrides) -> ExperimentConfig:
    """Full-scale parameter pack of the reference simulations (S=4,
    L=K=7, M=N=100, half-wavelength spacing)."""
    params = dict(S=4, L=7, K=7, M=100, N=100, r_et=DEFAULT_WAVELENGTH / 2, t_er=DEFAULT_WAVELENGTH / 2)
    params.update(arch_overrides)
    return ExperimentConfig(arch=SimArchitecture(**params))
