"""Scenario files: a flat key = value format with SI-suffixed numbers.

Grammar, one statement per line:

    key = value        # '#' starts a comment, blank lines are ignored

Keys are snake_case and strictly checked: unknown keys, keys that do not
apply to the declared kind, and malformed or mis-suffixed values all raise
ConfigError naming the offending line and key. Lengths accept m, cm, mm,
um (or µm), nm, pm; times accept s, ms, us (or µs), ns, ps, fs; bare
numbers are base SI. Counts and rates are plain numbers.

parse_scenario returns a fully resolved ScenarioConfig (defaults filled);
dump_scenario emits the canonical form, and parse(dump(cfg)) == cfg.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields
from typing import Optional

from .errors import ConfigError
from .optics import (
    GaussianProfile,
    OpticalGeometry,
    SourceSpec,
    TransmissionMask,
    UniformProfile,
)

__all__ = ["ScenarioConfig", "parse_scenario", "dump_scenario", "KINDS", "METHODS"]

KINDS = ("focused_image", "z2_sweep", "hbt")
METHODS = ("montecarlo", "analytic", "both")

_LENGTH_UNITS = {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6,
                 "nm": 1e-9, "pm": 1e-12}
_TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "ns": 1e-9,
               "ps": 1e-12, "fs": 1e-15}

_NUMBER_RE = re.compile(
    r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([a-zA-Zµ]*)$"
)

_SPATIAL = ("focused_image", "z2_sweep")

# key -> (value type, kinds the key applies to)
_KEY_TABLE = {
    "kind": ("enum:kind", KINDS),
    "method": ("enum:method", KINDS),
    "seed": ("int", KINDS),
    "output": ("str", KINDS),
    "wavelength": ("length", KINDS),
    "source_profile": ("enum:profile", _SPATIAL),
    "source_radius": ("length", _SPATIAL),
    "coherence_time": ("time", KINDS),
    "z1": ("length", _SPATIAL),
    "z2": ("length", ("focused_image",)),
    "z2_min": ("length", ("z2_sweep",)),
    "z2_max": ("length", ("z2_sweep",)),
    "z2_steps": ("int", ("z2_sweep",)),
    "mask": ("enum:mask", _SPATIAL),
    "mask_separation": ("length", _SPATIAL),
    "mask_diameter_1": ("length", _SPATIAL),
    "mask_diameter_2": ("length", _SPATIAL),
    "mask_slit_width": ("length", _SPATIAL),
    "mask_half_width": ("length", _SPATIAL),
    "n_realizations": ("int", _SPATIAL),
    "detector_aperture": ("length", _SPATIAL),
    "detector_step": ("length", _SPATIAL),
    "detector_span": ("length", _SPATIAL),
    "detector_points": ("int", _SPATIAL),
    "object_span": ("length", _SPATIAL),
    "object_points": ("int", _SPATIAL),
    "bucket_half_width": ("length", _SPATIAL),
    "start_rate": ("float", ("hbt",)),
    "stop_rate": ("float", ("hbt",)),
    "hbt_dt": ("time", ("hbt",)),
    "hbt_batch_duration": ("time", ("hbt",)),
    "hbt_batches": ("int", ("hbt",)),
    "hbt_bin_width": ("time", ("hbt",)),
    "hbt_window": ("time", ("hbt",)),
    "jitter_sigma": ("time", ("hbt",)),
    "dead_time": ("time", ("hbt",)),
}

_ENUMS = {
    "enum:kind": KINDS,
    "enum:method": METHODS,
    "enum:profile": ("uniform", "gaussian"),
    "enum:mask": ("pinhole_pair", "double_slit", "uniform", "opaque"),
}

_MASK_PARAM_KEYS = {
    "pinhole_pair": ("mask_separation", "mask_diameter_1", "mask_diameter_2"),
    "double_slit": ("mask_separation", "mask_slit_width"),
    "uniform": ("mask_half_width",),
    "opaque": ("mask_half_width",),
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved scenario. None marks fields the kind does not use."""

    kind: str
    method: str = "montecarlo"
    seed: int = 12345
    output: str = "ghostsim-out"
    wavelength: float = 6.93e-7
    source_profile: Optional[str] = None
    source_radius: Optional[float] = None
    coherence_time: Optional[float] = None
    z1: Optional[float] = None
    z2: Optional[float] = None
    z2_min: Optional[float] = None
    z2_max: Optional[float] = None
    z2_steps: Optional[int] = None
    mask: Optional[str] = None
    mask_separation: Optional[float] = None
    mask_diameter_1: Optional[float] = None
    mask_diameter_2: Optional[float] = None
    mask_slit_width: Optional[float] = None
    mask_half_width: Optional[float] = None
    n_realizations: Optional[int] = None
    detector_aperture: Optional[float] = None
    detector_step: Optional[float] = None
    detector_span: Optional[float] = None
    detector_points: Optional[int] = None
    object_span: Optional[float] = None
    object_points: Optional[int] = None
    bucket_half_width: Optional[float] = None
    start_rate: Optional[float] = None
    stop_rate: Optional[float] = None
    hbt_dt: Optional[float] = None
    hbt_batch_duration: Optional[float] = None
    hbt_batches: Optional[int] = None
    hbt_bin_width: Optional[float] = None
    hbt_window: Optional[float] = None
    jitter_sigma: Optional[float] = None
    dead_time: Optional[float] = None

    def source(self) -> SourceSpec:
        if self.source_profile == "gaussian":
            profile = GaussianProfile(self.source_radius)
        else:
            profile = UniformProfile(self.source_radius)
        return SourceSpec(self.wavelength, profile,
                          coherence_time=self.coherence_time or 0.0)

    def geometry(self, z2: Optional[float] = None) -> OpticalGeometry:
        return OpticalGeometry(self.z1, self.z2 if z2 is None else z2)

    def build_mask(self, grid) -> TransmissionMask:
        if self.mask == "pinhole_pair":
            return TransmissionMask.pinhole_pair(
                grid, d1=self.mask_diameter_1, d2=self.mask_diameter_2,
                separation=self.mask_separation)
        if self.mask == "double_slit":
            return TransmissionMask.double_slit(
                grid, self.mask_slit_width, self.mask_separation)
        if self.mask == "uniform":
            return TransmissionMask.uniform(grid)
        return TransmissionMask.opaque(grid)

    def mask_extent(self) -> float:
        """Full transverse extent of the mask's transmitting features."""
        if self.mask == "pinhole_pair":
            return self.mask_separation + 0.5 * (
                self.mask_diameter_1 + self.mask_diameter_2)
        if self.mask == "double_slit":
            return self.mask_separation + self.mask_slit_width
        return 2.0 * self.mask_half_width


def _parse_number(raw: str, units: Optional[dict], key: str, line: int) -> float:
    m = _NUMBER_RE.match(raw)
    if not m:
        raise ConfigError(f"expected a number, got {raw!r}", line=line, key=key)
    value, suffix = float(m.group(1)), m.group(2)
    if not suffix:
        return value
    if units is None or suffix not in units:
        allowed = ", ".join(sorted(units)) if units else "none"
        raise ConfigError(
            f"unit suffix {suffix!r} not valid here (allowed: {allowed})",
            line=line, key=key)
    return value * units[suffix]


def _parse_value(vtype: str, raw: str, key: str, line: int):
    if vtype == "str":
        return raw
    if vtype.startswith("enum:"):
        allowed = _ENUMS[vtype]
        if raw not in allowed:
            raise ConfigError(
                f"must be one of {', '.join(allowed)}; got {raw!r}",
                line=line, key=key)
        return raw
    if vtype == "int":
        if not re.fullmatch(r"[+-]?\d+", raw):
            raise ConfigError(f"expected an integer, got {raw!r}",
                              line=line, key=key)
        return int(raw)
    if vtype == "length":
        return _parse_number(raw, _LENGTH_UNITS, key, line)
    if vtype == "time":
        return _parse_number(raw, _TIME_UNITS, key, line)
    return _parse_number(raw, None, key, line)  # bare float


def _require(values: dict, lines: dict, keys, context: str) -> None:
    for key in keys:
        if values.get(key) is None:
            raise ConfigError(f"missing required key for {context}", key=key)


def _positive(values: dict, lines: dict, keys) -> None:
    for key in keys:
        v = values.get(key)
        if v is not None and v <= 0:
            raise ConfigError("must be positive", key=key,
                              line=lines.get(key))


def parse_scenario(text: str) -> ScenarioConfig:
    """Parse and validate a scenario document into a ScenarioConfig."""
    values: dict = {}
    lines: dict = {}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}",
                              line=lineno)
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _KEY_TABLE:
            raise ConfigError("unknown key", line=lineno, key=key)
        if key in values:
            raise ConfigError("duplicate key", line=lineno, key=key)
        if not raw:
            raise ConfigError("empty value", line=lineno, key=key)
        vtype, _ = _KEY_TABLE[key]
        values[key] = _parse_value(vtype, raw, key, lineno)
        lines[key] = lineno

    if "kind" not in values:
        raise ConfigError("missing required key", key="kind")
    kind = values["kind"]
    for key in values:
        if kind not in _KEY_TABLE[key][1]:
            raise ConfigError(f"key does not apply to kind {kind!r}",
                              line=lines[key], key=key)

    values.setdefault("method", "montecarlo")
    values.setdefault("seed", 12345)
    values.setdefault("output", "ghostsim-out")
    values.setdefault("wavelength", 6.93e-7)
    _positive(values, lines, ("wavelength",))
    if values["seed"] < 0:
        raise ConfigError("must be non-negative", key="seed",
                          line=lines.get("seed"))

    if kind == "hbt":
        _resolve_hbt(values, lines)
    else:
        _resolve_spatial(kind, values, lines)

    return ScenarioConfig(**values)


def _resolve_spatial(kind: str, values: dict, lines: dict) -> None:
    if values["method"] != "analytic":
        values.setdefault("n_realizations", 4096)
        if values["n_realizations"] < 2:
            raise ConfigError("need at least 2 realizations",
                              key="n_realizations",
                              line=lines.get("n_realizations"))
    _require(values, lines, ("source_radius", "z1", "mask"), f"kind {kind}")
    values.setdefault("source_profile", "uniform")
    values.setdefault("coherence_time", 0.0)
    values.setdefault("detector_aperture", 0.0)
    _positive(values, lines, ("source_radius", "z1", "z2", "z2_min", "z2_max",
                              "mask_separation", "mask_diameter_1",
                              "mask_diameter_2", "mask_slit_width",
                              "mask_half_width", "detector_step",
                              "detector_span", "object_span",
                              "bucket_half_width"))
    if values["detector_aperture"] < 0 or values["coherence_time"] < 0:
        key = ("detector_aperture" if values["detector_aperture"] < 0
               else "coherence_time")
        raise ConfigError("must be non-negative", key=key, line=lines.get(key))

    if kind == "focused_image":
        _require(values, lines, ("z2",), "kind focused_image")
    else:
        _require(values, lines, ("z2_min", "z2_max", "z2_steps"),
                 "kind z2_sweep")
        if values["z2_min"] >= values["z2_max"]:
            raise ConfigError("sweep bounds must satisfy z2_min < z2_max",
                              key="z2_min", line=lines.get("z2_min"))
        if values["z2_steps"] < 2:
            raise ConfigError("need at least 2 sweep steps", key="z2_steps",
                              line=lines.get("z2_steps"))

    mask = values["mask"]
    needed = _MASK_PARAM_KEYS[mask]
    _require(values, lines, needed, f"mask {mask}")
    for key in ("mask_separation", "mask_diameter_1", "mask_diameter_2",
                "mask_slit_width", "mask_half_width"):
        if values.get(key) is not None and key not in needed:
            raise ConfigError(f"key does not apply to mask {mask!r}",
                              key=key, line=lines.get(key))
    if mask == "pinhole_pair":
        if values["mask_separation"] <= 0.5 * (values["mask_diameter_1"]
                                               + values["mask_diameter_2"]):
            raise ConfigError("pinholes overlap: separation must exceed the "
                              "mean diameter", key="mask_separation",
                              line=lines.get("mask_separation"))
    if mask == "double_slit" and values["mask_separation"] <= values["mask_slit_width"]:
        raise ConfigError("slits overlap: center separation must exceed the "
                          "slit width", key="mask_separation",
                          line=lines.get("mask_separation"))

    for key in ("detector_points", "object_points"):
        if values.get(key) is not None and values[key] < 2:
            raise ConfigError("need at least 2 points", key=key,
                              line=lines.get(key))


def _resolve_hbt(values: dict, lines: dict) -> None:
    if values["method"] != "montecarlo":
        raise ConfigError(
            "kind hbt has no analytic path; method must be montecarlo",
            key="method", line=lines.get("method"))
    _require(values, lines, ("coherence_time",), "kind hbt")
    tau0 = values["coherence_time"]
    _positive(values, lines, ("coherence_time",))
    values.setdefault("hbt_dt", tau0 / 20.0)
    values.setdefault("hbt_batch_duration", 8_000_000 * values["hbt_dt"])
    values.setdefault("hbt_batches", 84)
    values.setdefault("hbt_bin_width", tau0 / 4.0)
    values.setdefault("hbt_window", 18.0 * tau0)
    values.setdefault("jitter_sigma", 0.0)
    values.setdefault("dead_time", 0.0)
    values.setdefault("start_rate", 0.09 / values["hbt_dt"])
    values.setdefault("stop_rate", 0.009 / values["hbt_window"])
    _positive(values, lines, ("hbt_dt", "hbt_batch_duration", "hbt_batches",
                              "hbt_bin_width", "hbt_window", "start_rate",
                              "stop_rate"))
    for key in ("jitter_sigma", "dead_time"):
        if values[key] < 0:
            raise ConfigError("must be non-negative", key=key,
                              line=lines.get(key))
    if values["hbt_dt"] > tau0 / 10.0:
        raise ConfigError("hbt_dt must not exceed coherence_time / 10",
                          key="hbt_dt", line=lines.get("hbt_dt"))
    if values["hbt_batch_duration"] < 100.0 * tau0:
        raise ConfigError("hbt_batch_duration must cover at least 100 "
                          "coherence times", key="hbt_batch_duration",
                          line=lines.get("hbt_batch_duration"))
    if values["hbt_window"] < values["hbt_bin_width"]:
        raise ConfigError("hbt_window must be at least one bin wide",
                          key="hbt_window", line=lines.get("hbt_window"))
    for key in ("start_rate", "stop_rate"):
        if values[key] * values["hbt_dt"] >= 0.1:
            raise ConfigError(
                "rate * hbt_dt must stay below 0.1 for Bernoulli thinning",
                key=key, line=lines.get(key))


def _format_value(v) -> str:
    if isinstance(v, bool):
        raise TypeError("no boolean scenario keys")
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_scenario(cfg: ScenarioConfig) -> str:
    """Canonical dump: every resolved key, base SI units, fixed order."""
    out = []
    for f in fields(ScenarioConfig):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        out.append(f"{f.name} = {_format_value(v)}")
    return "\n".join(out) + "\n"
