"""TOML run configuration: parsing, validation, and sweep expansion.

Grammar (all rates in units of chi unless a [physical] block is given):

    [model]        omega0, omega, kappa, chi (floats)
    [oscillator]   kind = "coherent" | "thermal" | "mixture"
                   alpha = 3.0 or [re, im]; nbar = 2.0;
                   components = [[weight, re, im], ...]
    [[channels]]   kind = "one_body" | "three_body" | "dephasing"
                   rate = 0.005            (exactly one of rate / catalog.*)
                   catalog = { k1 = ..., k2 = ..., k3 = ..., n_atoms = ..., volume = ... }
    [protocol]     n_delta, method, cutoff, dt, invariant_samples
    [sweep]        axis = "gamma" | "alpha_sq" | "nbar" | "kappa", values = [...]
    [physical]     mass, volume, scattering_length  (optional; feeds the
                   geometric coupling converter and switches the units tag)
"""

from __future__ import annotations

import hashlib

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, replace
from pathlib import Path

from .dissipation import ChannelKind, LossRateCatalog, loss_rates
from .errors import BecProbeError, ConfigError, ValidationError
from .fock import FockCutoff, OscState
from .model import ModelParams, coupling_from_geometry
from .protocol import ProbeConfig

SWEEP_AXES = ("gamma", "alpha_sq", "nbar", "kappa")


@dataclass(frozen=True)
class RunConfig:
    probe: ProbeConfig
    sweep_axis: str | None
    sweep_values: tuple
    config_hash: str
    units: str

    def sweep_points(self) -> list[tuple[float, ProbeConfig]]:
        if self.sweep_axis is None:
            raise ValidationError("config has no [sweep] block")
        return [(v, apply_axis(self.probe, self.sweep_axis, v))
                for v in self.sweep_values]


def _require_keys(table: dict, allowed: set, where: str) -> None:
    extra = set(table) - allowed
    if extra:
        raise ValidationError(f"unknown keys {sorted(extra)} in [{where}]")


def _as_complex(value, where: str) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, list) and len(value) == 2 \
            and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise ValidationError(f"{where} must be a number or [re, im], got {value!r}")


def _parse_oscillator(table: dict) -> OscState:
    _require_keys(table, {"kind", "alpha", "nbar", "components"}, "oscillator")
    kind = table.get("kind")
    if kind == "coherent":
        if "alpha" not in table:
            raise ValidationError("coherent oscillator needs alpha")
        return OscState.coherent(_as_complex(table["alpha"], "oscillator.alpha"))
    if kind == "thermal":
        if "nbar" not in table:
            raise ValidationError("thermal oscillator needs nbar")
        return OscState.thermal(float(table["nbar"]))
    if kind == "mixture":
        comps = table.get("components")
        if not isinstance(comps, list) or not comps:
            raise ValidationError("mixture oscillator needs components")
        parsed = []
        for c in comps:
            if not isinstance(c, list) or len(c) not in (2, 3):
                raise ValidationError(
                    f"mixture component must be [weight, re] or [weight, re, im], got {c!r}")
            parsed.append((float(c[0]), complex(c[1], c[2] if len(c) == 3 else 0.0)))
        return OscState.mixture(parsed)
    raise ValidationError(f"unknown oscillator kind {kind!r}")


def _parse_channel(table: dict) -> tuple[ChannelKind, float]:
    _require_keys(table, {"kind", "rate", "catalog"}, "channels")
    try:
        kind = ChannelKind(table.get("kind"))
    except ValueError:
        raise ValidationError(f"unknown channel kind {table.get('kind')!r}") from None
    has_rate = "rate" in table
    has_catalog = "catalog" in table
    if has_rate == has_catalog:
        raise ValidationError(
            f"channel {kind.value}: give exactly one of rate / catalog")
    if has_rate:
        rate = float(table["rate"])
    else:
        cat = table["catalog"]
        _require_keys(cat, {"k1", "k2", "k3", "n_atoms", "volume"}, "channels.catalog")
        rates = loss_rates(LossRateCatalog(
            K1=float(cat.get("k1", 0.0)), K2=float(cat.get("k2", 0.0)),
            K3=float(cat.get("k3", 0.0)), n_atoms=int(cat.get("n_atoms", 1)),
            volume=float(cat.get("volume", 1.0))))
        if kind.value not in rates:
            raise ValidationError(
                f"channel {kind.value} has no catalog-derived rate; use rate=")
        rate = rates[kind.value]
    if rate < 0:
        raise ValidationError(f"channel {kind.value}: rate must be >= 0, got {rate}")
    return kind, rate


def parse_config(path) -> RunConfig:
    raw = Path(path).read_bytes()
    try:
        doc = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    _require_keys(doc, {"model", "oscillator", "channels", "protocol",
                        "sweep", "physical", "output"}, "top level")

    model = doc.get("model", {})
    _require_keys(model, {"omega0", "omega", "kappa", "chi", "n_atoms"}, "model")
    units = "chi"
    physical = doc.get("physical")
    kappa = float(model.get("kappa", 0.0))
    if physical is not None:
        _require_keys(physical, {"mass", "volume", "scattering_length"}, "physical")
        kappa = coupling_from_geometry(float(physical["scattering_length"]),
                                       float(physical["mass"]),
                                       float(physical["volume"]))
        units = "physical"
    params = ModelParams(omega0=float(model.get("omega0", 0.0)),
                         omega=float(model.get("omega", 0.0)),
                         kappa=kappa,
                         chi=float(model.get("chi", 1.0)),
                         n_atoms=model.get("n_atoms"))
    if params.chi <= 0:
        raise ValidationError(f"model.chi must be > 0, got {params.chi}")

    if "oscillator" not in doc:
        raise ValidationError("missing [oscillator] block")
    osc = _parse_oscillator(doc["oscillator"])

    channels = tuple(_parse_channel(t) for t in doc.get("channels", []))

    proto = doc.get("protocol", {})
    _require_keys(proto, {"n_delta", "method", "cutoff", "dt",
                          "invariant_samples"}, "protocol")
    try:
        cutoff = None
        if "cutoff" in proto:
            cutoff = FockCutoff(int(proto["cutoff"]))
        probe = ProbeConfig(params=params, osc=osc, channels=channels,
                            n_delta=int(proto.get("n_delta", 16)),
                            method=str(proto.get("method", "auto")),
                            cutoff=cutoff,
                            dt=float(proto["dt"]) if "dt" in proto else None,
                            invariant_samples=int(proto.get("invariant_samples", 0)))
    except ValidationError:
        raise
    except (ValueError, BecProbeError) as exc:
        raise ValidationError(str(exc)) from exc

    sweep = doc.get("sweep")
    axis, values = None, ()
    if sweep is not None:
        _require_keys(sweep, {"axis", "values"}, "sweep")
        axis = sweep.get("axis")
        if axis not in SWEEP_AXES:
            raise ValidationError(
                f"sweep.axis must be one of {SWEEP_AXES}, got {axis!r}")
        values = tuple(float(v) for v in sweep.get("values", ()))
        if not values:
            raise ValidationError("sweep.values must be a nonempty list")
        for v in values:
            apply_axis(probe, axis, v)  # validate every point up front

    return RunConfig(probe=probe, sweep_axis=axis, sweep_values=values,
                     config_hash=hashlib.sha256(raw).hexdigest()[:12],
                     units=units)


def apply_axis(probe: ProbeConfig, axis: str, value: float) -> ProbeConfig:
    if axis == "gamma":
        if not probe.channels:
            raise ValidationError("gamma sweep needs at least one channel")
        if value < 0:
            raise ValidationError(f"gamma must be >= 0, got {value}")
        kind = probe.channels[0][0]
        return replace(probe, channels=((kind, value),) + probe.channels[1:])
    if axis == "alpha_sq":
        if value < 0:
            raise ValidationError(f"alpha_sq must be >= 0, got {value}")
        return replace(probe, osc=OscState.coherent(value ** 0.5))
    if axis == "nbar":
        if value < 0:
            raise ValidationError(f"nbar must be >= 0, got {value}")
        return replace(probe, osc=OscState.thermal(value))
    if axis == "kappa":
        return replace(probe, params=replace(probe.params, kappa=value))
    raise ValidationError(f"unknown sweep axis {axis!r}")
