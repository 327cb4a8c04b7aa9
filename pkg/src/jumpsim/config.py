"""TOML run configuration.

Layout::

    [model]       type = "prismatic" | "baton" | "rhomboid", g, d or L, ideal_tol
    [masses]      m_body/m_foot, m_body, or m1..m8 (or preset = "table1")
    [spring]      k | alpha, k_r | k_norm | alpha, theta_ini(_deg), theta_end(_deg)
    [integrator]  rel_tol, abs_tol, max_step, fixed_step, contact_stiffness, t_max
    [output]      trajectory, report

Angles may be given in radians or, with a ``_deg`` suffix, in degrees; they
are converted once here and the rest of the package only sees radians.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Union

import tomli
import tomli_w

from .baton import BatonConfig
from .core import G_DEFAULT, IDEAL_TOL_DEFAULT, ConfigError
from .integrator import IntegratorSettings
from .prismatic import PrismaticConfig
from .rhomboid import MassLayout, RhomboidConfig

MODELS = ("prismatic", "baton", "rhomboid")
MASS_KEYS = tuple(f"m{i}" for i in range(1, 9))

_ALLOWED = {
    "prismatic": {
        "model": {"type", "g", "d", "ideal_tol"},
        "masses": {"m_body", "m_foot"},
        "spring": {"k", "alpha"},
    },
    "baton": {
        "model": {"type", "g", "d", "ideal_tol"},
        "masses": {"m_body"},
        "spring": {"k_r", "k_norm", "theta_ini", "theta_ini_deg"},
    },
    "rhomboid": {
        "model": {"type", "g", "L", "ideal_tol"},
        "masses": {"preset", *MASS_KEYS},
        "spring": {"k_r", "alpha", "theta_ini", "theta_ini_deg", "theta_end", "theta_end_deg"},
    },
}
_COMMON = {
    "integrator": set(IntegratorSettings.__dataclass_fields__),
    "output": {"trajectory", "report"},
}


class ConfigFileError(ConfigError):
    pass


@dataclass(frozen=True)
class RunConfig:
    model: str
    params: Union[PrismaticConfig, BatonConfig, RhomboidConfig]
    settings: IntegratorSettings = IntegratorSettings()
    ideal_tol: float = IDEAL_TOL_DEFAULT
    trajectory_path: Optional[str] = None
    report_path: Optional[str] = None
    source: Optional[str] = field(default=None, compare=False)


def bundled_path(name: str) -> Optional[Path]:
    """Resolve a bundled example config (``table1``, ``examples/table1.toml``...)."""
    stem = Path(name).name
    if not stem.endswith((".toml", ".csv")):
        stem += ".toml"
    candidate = resources.files("jumpsim") / "data" / stem
    return Path(str(candidate)) if candidate.is_file() else None


def resolve_path(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = bundled_path(name)
    if bundled is None:
        raise ConfigFileError(f"{name}: no such file (and no bundled example of that name)")
    return bundled


def _line_of(text: str, section: str, key: str) -> Optional[int]:
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        header = re.match(r"^\[\s*([^\]]+?)\s*\]", line)
        if header:
            current = header.group(1)
            continue
        if current == section and re.match(rf"^{re.escape(key)}\s*=", line):
            return lineno
    return None


class _Reader:
    """Key access with error messages that carry file name and line."""

    def __init__(self, data: dict, text: str, origin: str):
        self.data = data
        self.text = text
        self.origin = origin
        self.used: set[tuple[str, str]] = set()

    def where(self, section: str, key: str) -> str:
        line = _line_of(self.text, section, key)
        return f"{self.origin}:{line}" if line else self.origin

    def fail(self, section: str, key: str, message: str):
        raise ConfigFileError(f"{self.where(section, key)}: [{section}] {key}: {message}")

    def has(self, section: str, key: str) -> bool:
        return key in self.data.get(section, {})

    def number(self, section: str, key: str, default=None, *, positive=False, nonneg=False) -> float:
        sect = self.data.get(section, {})
        if key not in sect:
            if default is None:
                raise ConfigFileError(f"{self.origin}: [{section}] missing required key '{key}'")
            return default
        value = sect[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(section, key, f"expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            self.fail(section, key, "must be finite")
        if positive and value <= 0:
            self.fail(section, key, f"must be positive, got {value}")
        if nonneg and value < 0:
            self.fail(section, key, f"must be non-negative, got {value}")
        return value

    def angle(self, section: str, key: str, default_deg: Optional[float] = None) -> float:
        has_rad, has_deg = self.has(section, key), self.has(section, key + "_deg")
        if has_rad and has_deg:
            self.fail(section, key + "_deg", f"give either '{key}' or '{key}_deg', not both")
        if has_deg:
            return math.radians(self.number(section, key + "_deg", positive=True))
        if has_rad:
            return self.number(section, key, positive=True)
        if default_deg is not None:
            return math.radians(default_deg)
        raise ConfigFileError(f"{self.origin}: [{section}] missing '{key}' or '{key}_deg'")

    def exactly_one(self, section: str, keys: tuple[str, ...]) -> str:
        present = [k for k in keys if self.has(section, k)]
        if len(present) != 1:
            wanted = " or ".join(repr(k) for k in keys)
            raise ConfigFileError(f"{self.origin}: [{section}] needs exactly one of {wanted}, got {present or 'none'}")
        return present[0]


def _check_keys(reader: _Reader, model: str):
    allowed = dict(_ALLOWED[model])
    allowed.update(_COMMON)
    for section, body in reader.data.items():
        if section not in allowed:
            line = _line_of(reader.text, section, "") or _section_line(reader.text, section)
            loc = f"{reader.origin}:{line}" if line else reader.origin
            raise ConfigFileError(f"{loc}: unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigFileError(f"{reader.origin}: '{section}' must be a table")
        for key in body:
            if key not in allowed[section]:
                reader.fail(section, key, f"unknown key for model '{model}'")


def _section_line(text: str, section: str) -> Optional[int]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if re.match(rf"^\s*\[\s*{re.escape(section)}\s*\]", raw):
            return lineno
    return None


def parse_overrides(pairs) -> dict:
    """``["spring.k_norm=4.5", ...]`` to a nested dict, values parsed as TOML."""
    out: dict = {}
    for pair in pairs or ():
        if "=" not in pair or "." not in pair.split("=", 1)[0]:
            raise ConfigFileError(f"override {pair!r} must look like section.key=value")
        path, raw = pair.split("=", 1)
        section, key = path.strip().split(".", 1)
        try:
            value = tomli.loads(f"v = {raw.strip()}")["v"]
        except tomli.TOMLDecodeError:
            value = raw.strip()
        out.setdefault(section, {})[key] = value
    return out


def _apply_overrides(data: dict, overrides: dict) -> dict:
    merged = {k: dict(v) if isinstance(v, dict) else v for k, v in data.items()}
    for section, body in overrides.items():
        target = merged.setdefault(section, {})
        for key, value in body.items():
            # An override in one unit replaces the other spelling of the same angle.
            if key.endswith("_deg"):
                target.pop(key[:-4], None)
            else:
                target.pop(key + "_deg", None)
            if section == "spring":
                for group in (("k", "alpha"), ("k_r", "k_norm", "alpha")):
                    if key in group:
                        for other in group:
                            if other != key:
                                target.pop(other, None)
            target[key] = value
    return merged


def loads(text: str, origin: str = "<config>", overrides: Optional[dict] = None) -> RunConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigFileError(f"{origin}: {exc}") from None
    if overrides:
        data = _apply_overrides(data, overrides)
    reader = _Reader(data, text, origin)

    model = data.get("model", {}).get("type")
    if model is None:
        raise ConfigFileError(f"{origin}: [model] missing required key 'type'")
    if model not in MODELS:
        reader.fail("model", "type", f"must be one of {', '.join(MODELS)}, got {model!r}")
    _check_keys(reader, model)

    g = reader.number("model", "g", G_DEFAULT, nonneg=True)
    ideal_tol = reader.number("model", "ideal_tol", IDEAL_TOL_DEFAULT, positive=True)
    settings_kwargs = {
        key: reader.number("integrator", key, positive=True)
        for key in data.get("integrator", {})
    }
    try:
        settings = IntegratorSettings(**settings_kwargs)
    except ValueError as exc:
        raise ConfigFileError(f"{origin}: [integrator] {exc}") from None

    try:
        if model == "prismatic":
            params = _prismatic(reader, g)
        elif model == "baton":
            params = _baton(reader, g)
        else:
            params = _rhomboid(reader, g)
    except ConfigFileError:
        raise
    except ConfigError as exc:
        raise ConfigFileError(f"{origin}: {exc}") from None

    out = data.get("output", {})
    return RunConfig(
        model=model,
        params=params,
        settings=settings,
        ideal_tol=ideal_tol,
        trajectory_path=out.get("trajectory"),
        report_path=out.get("report"),
        source=origin,
    )


def load(path, overrides: Optional[dict] = None) -> RunConfig:
    path = resolve_path(str(path))
    return loads(path.read_text(), origin=str(path), overrides=overrides)


def _prismatic(r: _Reader, g: float) -> PrismaticConfig:
    d = r.number("model", "d", positive=True)
    m_body = r.number("masses", "m_body", positive=True)
    m_foot = r.number("masses", "m_foot", 0.0, nonneg=True)
    which = r.exactly_one("spring", ("k", "alpha"))
    if which == "k":
        return PrismaticConfig(m_body=m_body, m_foot=m_foot, k=r.number("spring", "k", positive=True), d=d, g=g)
    alpha = r.number("spring", "alpha", positive=True)
    m_total = m_body + m_foot
    return PrismaticConfig.from_alpha(alpha, m_total, m_body / m_total, d, g)


def _baton(r: _Reader, g: float) -> BatonConfig:
    d = r.number("model", "d", positive=True)
    m_body = r.number("masses", "m_body", positive=True)
    theta_ini = r.angle("spring", "theta_ini")
    which = r.exactly_one("spring", ("k_r", "k_norm"))
    if which == "k_r":
        return BatonConfig(m_body=m_body, d=d, k_r=r.number("spring", "k_r", positive=True), theta_ini=theta_ini, g=g)
    return BatonConfig.from_k_norm(r.number("spring", "k_norm", positive=True), m_body, d, theta_ini, g)


def _rhomboid(r: _Reader, g: float) -> RhomboidConfig:
    L = r.number("model", "L", positive=True)
    masses_sect = r.data.get("masses", {})
    preset = masses_sect.get("preset")
    if preset is not None:
        if preset != "table1":
            r.fail("masses", "preset", f"unknown preset {preset!r} (known: 'table1')")
        base = MassLayout.table1().as_array()
        values = [r.number("masses", k, float(base[i]), nonneg=True) for i, k in enumerate(MASS_KEYS)]
    else:
        values = [r.number("masses", k, 0.0, nonneg=True) for k in MASS_KEYS]
    masses = MassLayout.from_array(values)
    theta_ini = r.angle("spring", "theta_ini")
    theta_end = r.angle("spring", "theta_end")
    which = r.exactly_one("spring", ("k_r", "alpha"))
    if which == "k_r":
        return RhomboidConfig(masses, L, r.number("spring", "k_r", positive=True), theta_ini, theta_end, g)
    return RhomboidConfig.from_alpha(r.number("spring", "alpha", positive=True), masses, L, theta_ini, theta_end, g)


def to_dict(run: RunConfig) -> dict[str, Any]:
    """Canonical, fully resolved form: derived stiffnesses explicit, angles in radians."""
    p = run.params
    data: dict[str, Any] = {"model": {"type": run.model, "g": p.g, "ideal_tol": run.ideal_tol}}
    if run.model == "prismatic":
        data["model"]["d"] = p.d
        data["masses"] = {"m_body": p.m_body, "m_foot": p.m_foot}
        data["spring"] = {"k": p.k}
    elif run.model == "baton":
        data["model"]["d"] = p.d
        data["masses"] = {"m_body": p.m_body}
        data["spring"] = {"k_r": p.k_r, "theta_ini": p.theta_ini}
    else:
        data["model"]["L"] = p.L
        data["masses"] = {k: float(v) for k, v in zip(MASS_KEYS, p.masses.as_array())}
        data["spring"] = {"k_r": p.k_r, "theta_ini": p.theta_ini, "theta_end": p.theta_end}
    data["integrator"] = {k: getattr(run.settings, k) for k in IntegratorSettings.__dataclass_fields__}
    out = {}
    if run.trajectory_path:
        out["trajectory"] = run.trajectory_path
    if run.report_path:
        out["report"] = run.report_path
    if out:
        data["output"] = out
    return data


def dumps(run: RunConfig) -> str:
    return tomli_w.dumps(to_dict(run))
