"""Flat key = value run configuration with explicit unit resolution.

A configuration is a flat mapping assembled in three layers: an optional
named preset, an optional config file, then individual overrides, later
layers winning.  Setting any member of an alternative-form group (say
`T` in internal units) drops the other forms (`T_ns`) inherited from
lower layers, so overriding a preset never leaves contradictory keys.

Times given in nanoseconds are converted through the mode frequency,
which requires both `omega_c_ghz` and `angular_convention`; leaving the
convention implicit is a rejected input, not a guess.  Everything else
is already a fraction of omega_c and passes through unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .dynamics import DissipationParams, IntegratorConfig
from .model import PulseSpec, SystemParams
from .presets import preset
from .protocol import ProtocolRun

_FLOAT_KEYS = frozenset(
    {
        "epsilon",
        "epsilon_prime",
        "lam",
        "lam_prime",
        "omega_c_ghz",
        "T",
        "T_ns",
        "tau",
        "tau_ns",
        "tau_over_T",
        "w_s_peak",
        "w_p_peak",
        "w_p_over_w_s",
        "kappa",
        "gamma",
        "omega_p",
        "omega_s",
        "rel_tol",
        "abs_tol",
        "max_step",
    }
)
_INT_KEYS = frozenset({"n_max", "n_samples"})
_STRING_KEYS = frozenset(
    {
        "configuration",
        "eg_coupling_form",
        "angular_convention",
        "doublet_reference",
        "kappa_grid",
    }
)
KNOWN_KEYS = _FLOAT_KEYS | _INT_KEYS | _STRING_KEYS

# Alternative spellings of one quantity; at most one may be in effect.
_EXCLUSIVE_GROUPS = (
    ("T", "T_ns"),
    ("tau", "tau_ns", "tau_over_T"),
    ("w_p_peak", "w_p_over_w_s"),
)

ANGULAR_CONVENTIONS = ("cycles", "angular")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


def parse_config_text(text: str, source: str = "<config>") -> dict[str, object]:
    """Parse `key = value` lines; '#' comments and [section] headers allowed.

    Section headers are cosmetic grouping only, the key space is flat.
    """
    out: dict[str, object] = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = _convert(key, value, f"{source}:{lineno}")
    return out


def parse_overrides(pairs: "list[str]") -> dict[str, object]:
    """Parse repeated 'key=value' override arguments."""
    out: dict[str, object] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override {pair!r} is not of the form key=value")
        out[key.strip()] = _convert(key.strip(), value.strip(), f"override {pair!r}")
    return out


def _convert(key: str, value: object, where: str) -> object:
    if key not in KNOWN_KEYS:
        raise ConfigError(f"{where}: unknown configuration key {key!r}")
    if not isinstance(value, str):
        return value
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        kind = "an integer" if key in _INT_KEYS else "a number"
        raise ConfigError(f"{where}: key {key!r} needs {kind}, got {value!r}") from None
    return value


def layer_configs(*layers: "dict[str, object] | None") -> dict[str, object]:
    """Merge override layers, later layers winning.

    A layer that sets one spelling of a quantity evicts the other
    spellings inherited from earlier layers.
    """
    merged: dict[str, object] = {}
    for layer in layers:
        if not layer:
            continue
        for key in layer:
            if key not in KNOWN_KEYS:
                raise ConfigError(f"unknown configuration key {key!r}")
        for group in _EXCLUSIVE_GROUPS:
            if any(key in layer for key in group):
                for key in group:
                    merged.pop(key, None)
        merged.update(layer)
    return merged


@dataclass(frozen=True)
class ResolvedConfig:
    """Internal-unit run parameters plus the normalized echo block."""

    system: SystemParams
    pulses: PulseSpec | None
    dissipation: DissipationParams
    integrator: IntegratorConfig
    doublet_reference: str
    kappa_grid: "np.ndarray | None"

    def protocol_run(self) -> ProtocolRun:
        if self.pulses is None:
            raise ConfigError("this configuration has no pulse parameters")
        return ProtocolRun(
            system=self.system,
            pulses=self.pulses,
            dissipation=self.dissipation,
            integrator=self.integrator,
            doublet_reference=self.doublet_reference,
        )

    def echo(self) -> dict[str, object]:
        """Every physical parameter in units of omega_c, flat and ordered."""
        out: dict[str, object] = {}
        for f in fields(SystemParams):
            out[f.name] = getattr(self.system, f.name)
        out.pop("omega_c", None)
        if self.pulses is not None:
            p = self.pulses
            out.update(
                configuration=p.configuration,
                w_s_peak=p.w_s_peak,
                w_p_peak=p.w_p_peak,
                T=p.T,
                tau=p.tau,
                omega_p="derived" if p.omega_p is None else p.omega_p,
                omega_s="derived" if p.omega_s is None else p.omega_s,
                doublet_reference=self.doublet_reference,
            )
        out.update(kappa=self.dissipation.kappa, gamma=self.dissipation.gamma)
        out.update(
            rel_tol=self.integrator.rel_tol,
            abs_tol=self.integrator.abs_tol,
            max_step="derived" if self.integrator.max_step is None else self.integrator.max_step,
            n_samples=self.integrator.n_samples,
        )
        if self.kappa_grid is not None:
            out["kappa_grid"] = ",".join(f"{k:.12g}" for k in self.kappa_grid)
        return out


def _require(raw: dict, key: str, context: str) -> object:
    if key not in raw:
        raise ConfigError(f"missing required key {key!r} ({context})")
    return raw[key]


def _time_scale(raw: dict, needed_by: str) -> float:
    ghz = _require(raw, "omega_c_ghz", f"needed to convert {needed_by}")
    convention = _require(
        raw, "angular_convention", f"needed to convert {needed_by}; no default is assumed"
    )
    if convention not in ANGULAR_CONVENTIONS:
        raise ConfigError(
            f"angular_convention = {convention!r}, expected one of {ANGULAR_CONVENTIONS}"
        )
    # internal time unit is 1/omega_c; t_internal = t_ns * omega_c[rad/ns]
    return 2.0 * math.pi * float(ghz) if convention == "cycles" else float(ghz)


def parse_kappa_grid(text: str) -> np.ndarray:
    """Either 'log:<lo>:<hi>:<n>' or a comma-separated ascending list."""
    if text.startswith("log:"):
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError(f"kappa_grid {text!r} is not of the form log:lo:hi:n")
        try:
            lo, hi, count = float(parts[1]), float(parts[2]), int(parts[3])
        except ValueError:
            raise ConfigError(f"kappa_grid {text!r} has non-numeric fields") from None
        if lo <= 0 or hi <= lo or count < 2:
            raise ConfigError(f"kappa_grid {text!r} needs 0 < lo < hi and n >= 2")
        return np.geomspace(lo, hi, count)
    try:
        grid = np.array([float(part) for part in text.split(",")])
    except ValueError:
        raise ConfigError(f"kappa_grid {text!r} has non-numeric entries") from None
    if grid.size == 0:
        raise ConfigError("kappa_grid is empty")
    return grid


def resolve(raw: dict, require_pulses: bool = True) -> ResolvedConfig:
    """Turn a merged flat mapping into internal-unit parameter objects."""
    for key in raw:
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown configuration key {key!r}")
    for group in _EXCLUSIVE_GROUPS:
        present = [key for key in group if key in raw]
        if len(present) > 1:
            raise ConfigError(f"keys {present} are alternative forms; give only one")

    system_kwargs = {}
    for name in ("epsilon", "epsilon_prime", "lam", "lam_prime", "eg_coupling_form", "n_max"):
        if name in raw:
            system_kwargs[name] = raw[name]
    try:
        system = SystemParams(**system_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    dissipation_config = raw.get("configuration")
    pulses = None
    doublet_reference = str(raw.get("doublet_reference", "lower"))
    if require_pulses:
        configuration = str(_require(raw, "configuration", "selects the drive scheme"))
        if "T" in raw:
            width = float(raw["T"])
        else:
            width = float(_require(raw, "T_ns", "pulse width: give T or T_ns")) * _time_scale(
                raw, "T_ns"
            )
        if "tau" in raw:
            tau = float(raw["tau"])
        elif "tau_ns" in raw:
            tau = float(raw["tau_ns"]) * _time_scale(raw, "tau_ns")
        else:
            tau = float(_require(raw, "tau_over_T", "pulse delay: tau, tau_ns or tau_over_T"))
            tau *= width
        w_s = float(_require(raw, "w_s_peak", "Stokes peak amplitude"))
        if "w_p_peak" in raw:
            w_p = float(raw["w_p_peak"])
        else:
            w_p = float(_require(raw, "w_p_over_w_s", "pump amplitude: w_p_peak or w_p_over_w_s"))
            w_p *= w_s
        try:
            pulses = PulseSpec(
                w_s_peak=w_s,
                w_p_peak=w_p,
                T=width,
                tau=tau,
                configuration=configuration,
                omega_p=raw.get("omega_p"),
                omega_s=raw.get("omega_s"),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    try:
        dissipation = DissipationParams(
            kappa=float(raw.get("kappa", 0.0)),
            gamma=float(raw.get("gamma", 0.0)),
            configuration=str(dissipation_config) if dissipation_config else "lambda",
        )
        integrator_kwargs = {}
        for name in ("rel_tol", "abs_tol", "max_step", "n_samples"):
            if name in raw:
                integrator_kwargs[name] = raw[name]
        integrator = IntegratorConfig(**integrator_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    grid = parse_kappa_grid(str(raw["kappa_grid"])) if "kappa_grid" in raw else None
    return ResolvedConfig(
        system=system,
        pulses=pulses,
        dissipation=dissipation,
        integrator=integrator,
        doublet_reference=doublet_reference,
        kappa_grid=grid,
    )


def load(
    preset_name: str | None = None,
    config_text: str | None = None,
    overrides: "list[str] | None" = None,
    require_pulses: bool = True,
    source: str = "<config>",
) -> ResolvedConfig:
    """Assemble preset, file and override layers and resolve them."""
    layers = []
    if preset_name is not None:
        try:
            layers.append(preset(preset_name))
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
    if config_text is not None:
        layers.append(parse_config_text(config_text, source))
    if overrides:
        layers.append(parse_overrides(overrides))
    return resolve(layer_configs(*layers), require_pulses=require_pulses)
