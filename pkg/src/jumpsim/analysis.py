"""Design-space sweeps, normalised jump-height bounds and robot comparison."""

from __future__ import annotations

import csv
import enum
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import G_DEFAULT, ConfigError, TakeoffClass
from .integrator import IntegratorSettings
from .rhomboid import MassLayout, RhomboidConfig, simulate_rhomboid

FRACTION_KEYS = ("gpe", "ke_y_cg", "epe", "ke_x", "ke_y_rel", "ke_rot")
SWEEP_COLUMNS = ("param", "efficiency", "h_norm", "class") + tuple(f"frac_{k}" for k in FRACTION_KEYS)
ROBOT_COLUMNS = (
    "name", "total_mass_kg", "char_length_m", "stored_energy_J", "peak_force_N", "takeoff_velocity_mps",
)
COMPARE_COLUMNS = (
    "name", "alpha", "h_norm_measured", "h_norm_inertialess", "bound_ideal", "bound_linear", "warning",
)


class Family(str, enum.Enum):
    EXPERIMENTAL_PLUS_PAYLOAD = "experimental_plus_payload"
    BODY_FOOT = "body_foot"
    BODY_KNEES = "body_knees"


class SweptParam(str, enum.Enum):
    BODY_MASS_FRACTION = "body_mass_fraction"
    FORCE_TO_WEIGHT = "force_to_weight"


def payload_fraction_range(base: MassLayout, payload: float) -> tuple[float, float]:
    """Body mass fractions reachable by splitting ``payload`` between body and foot."""
    m_total = base.total + payload
    return base.m1 / m_total, (base.m1 + payload) / m_total


def family_layout(family: Family, fraction: float, base: MassLayout, payload: float = 0.2) -> MassLayout:
    """Mass layout for one point of a body-mass-fraction sweep.

    ``body_foot`` and ``body_knees`` are massless linkages carrying the total
    mass of the payload-modified robot; ``experimental_plus_payload`` keeps
    the base layout and puts the payload on the body and foot.
    """
    family = Family(family)
    m_total = base.total + payload
    if family is Family.EXPERIMENTAL_PLUS_PAYLOAD:
        lo, hi = payload_fraction_range(base, payload)
        if not lo - 1e-12 <= fraction <= hi + 1e-12:
            raise ConfigError(
                f"body fraction {fraction} unreachable with a {payload} kg payload (range {lo:.4f}..{hi:.4f})"
            )
        m1 = min(max(fraction * m_total, base.m1), base.m1 + payload)
        extra_foot = payload - (m1 - base.m1)
        return MassLayout(m1, base.m2, base.m3, base.m4, base.m5, base.m6, base.m7, base.m8 + extra_foot)
    if not 0.0 <= fraction <= 1.0:
        raise ConfigError(f"body fraction must lie in [0, 1], got {fraction}")
    body = fraction * m_total
    rest = m_total - body
    if family is Family.BODY_FOOT:
        return MassLayout(body, 0, 0, 0, 0, 0, 0, rest)
    return MassLayout(body, 0, 0, rest / 2, rest / 2, 0, 0, 0)


def relocate_knee_mass(masses: MassLayout, to: str) -> MassLayout:
    """Move both knee masses (springs and joints) onto the body or the foot joint."""
    knees = masses.m4 + masses.m5
    m = masses.as_array()
    m[3] = m[4] = 0.0
    if to == "body":
        m[0] += knees
    elif to == "foot":
        m[7] += knees
    else:
        raise ValueError(f"knee mass can go to 'body' or 'foot', not {to!r}")
    return MassLayout.from_array(m)


@dataclass(frozen=True)
class SweepSpec:
    family: Family
    swept_param: SweptParam
    grid: tuple[float, ...]
    base_config: RhomboidConfig
    payload: float = 0.2

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "swept_param", SweptParam(self.swept_param))
        object.__setattr__(self, "grid", tuple(float(v) for v in self.grid))
        if not self.grid:
            raise ConfigError("sweep grid is empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("sweep grid must be strictly increasing")
        if self.payload < 0:
            raise ConfigError("payload must be non-negative")
        if self.swept_param is SweptParam.FORCE_TO_WEIGHT:
            if self.grid[0] <= 0:
                raise ConfigError("force-to-weight ratios must be positive")
        elif self.family is Family.EXPERIMENTAL_PLUS_PAYLOAD:
            lo, hi = payload_fraction_range(self.base_config.masses, self.payload)
            if self.grid[0] < lo - 1e-12 or self.grid[-1] > hi + 1e-12:
                raise ConfigError(f"body fractions must lie in [{lo:.4f}, {hi:.4f}] for this payload")
        elif self.grid[0] < 0 or self.grid[-1] > 1:
            raise ConfigError("body fractions must lie in [0, 1]")

    def config_at(self, value: float) -> RhomboidConfig:
        base = self.base_config
        if self.swept_param is SweptParam.FORCE_TO_WEIGHT:
            return base.with_alpha(value)
        return base.replace(masses=family_layout(self.family, value, base.masses, self.payload))


@dataclass(frozen=True)
class SweepRow:
    param: float
    efficiency: float
    h_norm: float
    classification: TakeoffClass
    fractions: dict = field(default_factory=dict)

    def as_csv_row(self) -> list[str]:
        return [
            _fmt(self.param), _fmt(self.efficiency), _fmt(self.h_norm), self.classification.value,
            *(_fmt(self.fractions.get(k, 0.0)) for k in FRACTION_KEYS),
        ]


def _evaluate(args) -> SweepRow:
    value, cfg, settings = args
    report = simulate_rhomboid(cfg, settings).report
    return SweepRow(
        param=value,
        efficiency=report.efficiency,
        h_norm=report.jump_height_normalized,
        classification=report.classification,
        fractions=report.ledger_at_takeoff.fractions(report.epe_initial),
    )


def sweep(spec: SweepSpec, settings: IntegratorSettings = IntegratorSettings(), jobs: int = 1) -> list[SweepRow]:
    """Simulate every grid point; rows come back in grid order whatever ``jobs`` is."""
    work = [(v, spec.config_at(v), settings) for v in spec.grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_evaluate, work))
    return [_evaluate(w) for w in work]


def force_to_weight_sweep(
    base: RhomboidConfig,
    alphas: Sequence[float],
    settings: IntegratorSettings = IntegratorSettings(),
    jobs: int = 1,
) -> list[SweepRow]:
    """Efficiency against force-to-weight ratio at fixed masses and geometry.

    Only the spring stiffness changes with ``alpha``; spring and motor mass
    are held fixed.
    """
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ConfigError("force-to-weight grid is empty")
    if min(alphas) <= 0:
        raise ConfigError("force-to-weight ratios must be positive")
    work = [(a, base.with_alpha(a), settings) for a in alphas]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_evaluate, work))
    return [_evaluate(w) for w in work]


def bounds(alpha: float) -> tuple[float, float]:
    """Normalised jump height of the inertialess constant-force and linear-spring jumpers."""
    return alpha, (alpha - 1.0) / 2.0


# ---------------------------------------------------------------------------
# Robot records
# ---------------------------------------------------------------------------


class MissingFieldError(ValueError):
    pass


@dataclass(frozen=True)
class RobotRecord:
    name: str
    total_mass: float
    char_length: float
    stored_energy: Optional[float] = None
    peak_force: Optional[float] = None
    takeoff_velocity: Optional[float] = None

    def __post_init__(self):
        if not (self.total_mass > 0 and self.char_length > 0):
            raise ConfigError(f"{self.name}: mass and characteristic length must be positive")
        for name in ("stored_energy", "peak_force", "takeoff_velocity"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ConfigError(f"{self.name}: {name} must be non-negative")


def peak_force_estimate(record: RobotRecord) -> float:
    """Peak force, or ``2*E/d`` from stored energy when the peak force is not published."""
    if record.peak_force is not None:
        return record.peak_force
    if record.stored_energy is None:
        raise MissingFieldError(f"{record.name}: needs stored_energy or peak_force")
    return 2.0 * record.stored_energy / record.char_length


def force_to_weight(record: RobotRecord, g: float = G_DEFAULT) -> float:
    return peak_force_estimate(record) / (record.total_mass * g)


def measured_h_norm(record: RobotRecord, g: float = G_DEFAULT) -> float:
    if record.takeoff_velocity is None:
        raise MissingFieldError(f"{record.name}: needs takeoff_velocity")
    return record.takeoff_velocity**2 / (2 * g * record.char_length)


def inertialess_prediction(record: RobotRecord, g: float = G_DEFAULT) -> tuple[float, float]:
    """Measured normalised jump height and the one with every kilogram at the top.

    With no inertial losses all stored energy lifts the CG: ``m g (h + d) = E``.
    The prediction is never reported below the measurement.
    """
    if record.stored_energy is None:
        raise MissingFieldError(f"{record.name}: needs stored_energy")
    measured = measured_h_norm(record, g)
    d = record.char_length
    ideal = (record.stored_energy / (record.total_mass * g) - d) / d
    return measured, max(ideal, measured)


def _optional(text: str) -> Optional[float]:
    text = text.strip()
    return float(text) if text else None


def read_robot_records(source) -> list[RobotRecord]:
    """Parse robot CSV text or a path. Lines starting with ``#`` are notes."""
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and source.endswith(".csv")):
        text = Path(source).read_text()
    else:
        text = str(source)
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        return []
    reader = csv.DictReader(lines)
    missing = [c for c in ROBOT_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ConfigError(f"robot CSV is missing columns: {', '.join(missing)}")
    records = []
    for row in reader:
        records.append(RobotRecord(
            name=row["name"].strip(),
            total_mass=float(row["total_mass_kg"]),
            char_length=float(row["char_length_m"]),
            stored_energy=_optional(row["stored_energy_J"]),
            peak_force=_optional(row["peak_force_N"]),
            takeoff_velocity=_optional(row["takeoff_velocity_mps"]),
        ))
    return records


def compare_rows(records: Iterable[RobotRecord], g: float = G_DEFAULT) -> list[dict]:
    rows = []
    for rec in records:
        row = dict.fromkeys(COMPARE_COLUMNS, None)
        row["name"] = rec.name
        warnings = []
        try:
            alpha = force_to_weight(rec, g)
            row["alpha"] = alpha
            row["bound_ideal"], row["bound_linear"] = bounds(alpha)
        except MissingFieldError as exc:
            warnings.append(str(exc))
        try:
            row["h_norm_measured"] = measured_h_norm(rec, g)
        except MissingFieldError as exc:
            warnings.append(str(exc))
        try:
            row["h_norm_inertialess"] = inertialess_prediction(rec, g)[1]
        except MissingFieldError as exc:
            warnings.append(f"inertialess: {exc}")
        row["warning"] = "; ".join(warnings)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def write_csv(columns: Sequence[str], rows: Iterable[Sequence], out: Optional[io.TextIOBase] = None) -> str:
    """Locale-independent CSV with LF endings; returns the text if ``out`` is None."""
    buf = out if out is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue() if out is None else ""


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv_row())
    return buf.getvalue()


def compare_csv(rows: Sequence[dict]) -> str:
    return write_csv(COMPARE_COLUMNS, ([r[c] for c in COMPARE_COLUMNS] for r in rows))


def columns_csv(columns: dict) -> str:
    names = list(columns)
    data = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    return write_csv(names, data.tolist())
