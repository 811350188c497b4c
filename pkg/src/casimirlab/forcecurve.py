"""AFM approach-scan data model and calibration transforms.

A ForceCurve is immutable: every transform returns a new curve. The piezo
axis is plate displacement toward the sphere in nm, strictly increasing, so
contact (if reached) sits at the end of the arrays. Attractive forces are
negative; deflection toward the plate (negative signal) shortens the true
gap.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, replace

import numpy as np

from .errors import CalibrationError, ParseError, SegmentationError

MIN_SAMPLES = 10
REGION2_MIN_NM = 16.0    # region 2: separation-from-contact in (16, 516] nm
REGION2_MAX_NM = 516.0


@dataclass(frozen=True)
class ForceCurve:
    """One approach scan: piezo axis plus either raw signal or force."""

    scan_id: str
    applied_voltage: float
    piezo_nm: np.ndarray
    signal: np.ndarray | None = None
    force_pn: np.ndarray | None = None
    spring_constant: float | None = None
    temperature_k: float | None = None

    def __post_init__(self):
        piezo = np.asarray(self.piezo_nm, dtype=float)
        object.__setattr__(self, "piezo_nm", piezo)
        if (self.signal is None) == (self.force_pn is None):
            raise ValueError("exactly one of signal/force must be present")
        for name in ("signal", "force_pn"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, np.asarray(val, dtype=float))
        obs = self.signal if self.signal is not None else self.force_pn
        if piezo.size < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples, got {piezo.size}")
        if obs.size != piezo.size:
            raise ValueError("piezo and observable columns differ in length")
        if not np.all(np.diff(piezo) > 0):
            raise ValueError("piezo axis must be strictly increasing")

    @property
    def has_force(self) -> bool:
        return self.force_pn is not None


@dataclass(frozen=True)
class CalibrationParams:
    """Cantilever and piezo calibration inputs.

    ``hysteresis_poly`` holds coefficients (c1, c2, ...) of the monotone map
    commanded -> true displacement, true = sum_k c_k * piezo^k; the constant
    term is fixed at zero. The deflection sensitivity (nm per diode unit) is
    a required input; it is not published separately from k.
    """

    k: float = 0.0169                      # N/m
    deflection_sensitivity: float = 1.0    # nm per signal unit
    hysteresis_poly: tuple = (1.0,)
    V2_residual: float = 7.9e-3            # V
    temperature: float = 300.0             # K

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError(f"spring constant must be > 0, got {self.k}")
        if self.deflection_sensitivity <= 0:
            raise ValueError("deflection sensitivity must be > 0")
        if not self.hysteresis_poly:
            raise ValueError("hysteresis polynomial needs at least one coefficient")

    def hysteresis_map(self, piezo_nm):
        piezo_nm = np.asarray(piezo_nm, dtype=float)
        out = np.zeros_like(piezo_nm)
        for power, coeff in enumerate(self.hysteresis_poly, start=1):
            out += coeff * piezo_nm**power
        return out


@dataclass(frozen=True)
class RegionBounds:
    """Index partition of one scan, ordered region 3 -> 2 -> 1 along the array."""

    contact_index: int
    contact_displacement_nm: float
    region1: range   # near/post contact (separation <= 16 nm)
    region2: range   # separation in (16, 516] nm
    region3: range   # separation > 516 nm


def load_scan(source) -> ForceCurve:
    """Parse the scan CSV dialect (see save_scan for the writer)."""
    lines = _read_lines(source)
    meta = {}
    header = None
    piezo, obs = [], []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                meta[key.strip()] = value.strip()
            continue
        if header is None:
            header = [c.strip() for c in line.split(",")]
            if header not in (["piezo_nm", "signal"], ["piezo_nm", "force_pn"]):
                if "signal" in header and "force_pn" in header:
                    raise ParseError("ambiguous observable: both signal and force present",
                                     line=lineno)
                raise ParseError(f"unrecognized header {line!r}", line=lineno)
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"expected two columns, got {line!r}", line=lineno)
        try:
            p, v = float(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(f"malformed number in {line!r}", line=lineno) from None
        if piezo and p <= piezo[-1]:
            raise ParseError("non-monotone piezo", line=lineno)
        piezo.append(p)
        obs.append(v)
    if header is None:
        raise ParseError("missing column header")
    for key in ("scan_id", "applied_voltage_v"):
        if key not in meta:
            raise ParseError(f"missing metadata key '{key}'")
    try:
        voltage = float(meta["applied_voltage_v"])
    except ValueError:
        raise ParseError("malformed applied_voltage_v") from None
    kwargs = {}
    if "spring_constant_n_per_m" in meta:
        kwargs["spring_constant"] = float(meta["spring_constant_n_per_m"])
    if "temperature_k" in meta:
        kwargs["temperature_k"] = float(meta["temperature_k"])
    observable = {"signal": "signal", "force_pn": "force_pn"}[header[1]]
    try:
        return ForceCurve(meta["scan_id"], voltage, np.array(piezo),
                          **{observable: np.array(obs)}, **kwargs)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def save_scan(curve: ForceCurve, fh) -> None:
    """Write a curve in the CSV dialect accepted by load_scan."""
    fh.write(f"# scan_id={curve.scan_id}\n")
    fh.write(f"# applied_voltage_v={curve.applied_voltage:.9g}\n")
    if curve.spring_constant is not None:
        fh.write(f"# spring_constant_n_per_m={curve.spring_constant:.9g}\n")
    if curve.temperature_k is not None:
        fh.write(f"# temperature_k={curve.temperature_k:.9g}\n")
    column = "force_pn" if curve.has_force else "signal"
    values = curve.force_pn if curve.has_force else curve.signal
    fh.write(f"piezo_nm,{column}\n")
    for p, v in zip(curve.piezo_nm, values):
        fh.write(f"{p:.9g},{v:.9g}\n")


def _read_lines(source):
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
    else:
        with open(source, "r", encoding="utf-8") as fh:
            data = fh.read()
    return io.StringIO(data).read().splitlines()


def signal_to_force(curve: ForceCurve, cal: CalibrationParams) -> ForceCurve:
    """Hooke's-law conversion: F = k * deflection, attraction negative."""
    if curve.has_force:
        raise CalibrationError("curve already carries force")
    deflection_nm = curve.signal * cal.deflection_sensitivity
    force_pn = cal.k * deflection_nm * 1e3  # N/m * nm -> pN
    return replace(curve, signal=None, force_pn=force_pn,
                   spring_constant=cal.k, temperature_k=cal.temperature)


def correct_separation_axis(curve: ForceCurve, cal: CalibrationParams) -> ForceCurve:
    """Apply piezo hysteresis and cantilever-deflection corrections.

    The corrected axis is hysteresis(piezo) + F/k: attraction (F < 0) pulls
    the sphere toward the plate, shortening the true gap.
    """
    if not curve.has_force:
        raise CalibrationError("force must be populated before axis correction")
    mapped = cal.hysteresis_map(curve.piezo_nm)
    if not np.all(np.diff(mapped) > 0):
        raise CalibrationError("hysteresis polynomial non-monotone over the scan range")
    deflection_nm = curve.force_pn / (cal.k * 1e3)
    return replace(curve, piezo_nm=mapped + deflection_nm)


def segment_regions(curve: ForceCurve) -> RegionBounds:
    """Locate contact and partition the scan into the three analysis regions.

    Contact is the intersection of the least-squares line through the steep
    post-contact flexing segment with the far-field baseline; the flexing
    slope must exceed 5x the baseline noise slope.
    """
    if not curve.has_force:
        raise SegmentationError("force must be populated before segmentation")
    piezo = curve.piezo_nm
    force = curve.force_pn
    n = piezo.size
    n_base = max(MIN_SAMPLES, n // 4)
    b1, b0 = np.polyfit(piezo[:n_base], force[:n_base], 1)
    sigma = float(np.std(force[:n_base] - (b0 + b1 * piezo[:n_base])))
    spacing = float(np.median(np.diff(piezo)))
    noise_slope = sigma * np.sqrt(2.0) / spacing
    threshold = 5.0 * max(abs(b1), noise_slope, 1e-12)

    slopes = np.diff(force) / np.diff(piezo)
    i = n - 1
    while i > 0 and slopes[i - 1] >= threshold:
        i -= 1
    flex = range(i, n)
    if len(flex) < 3:
        raise SegmentationError("no flexing segment detected; scan never reaches contact")
    a1, a0 = np.polyfit(piezo[flex.start:], force[flex.start:], 1)
    if a1 <= b1:
        raise SegmentationError("flexing slope does not exceed the baseline slope")
    contact = (b0 - a0) / (a1 - b1)
    separation = contact - piezo
    contact_index = int(np.searchsorted(piezo, contact))

    i2 = int(np.searchsorted(-separation, -REGION2_MAX_NM))   # first with sep <= 516
    i1 = int(np.searchsorted(-separation, -REGION2_MIN_NM))   # first with sep <= 16
    bounds = RegionBounds(
        contact_index=min(contact_index, n - 1),
        contact_displacement_nm=float(contact),
        region1=range(i1, n),
        region2=range(i2, i1),
        region3=range(0, i2),
    )
    return bounds


def separation_from_contact(curve: ForceCurve, bounds: RegionBounds) -> np.ndarray:
    """Separation-from-contact axis in nm (positive before contact)."""
    return bounds.contact_displacement_nm - curve.piezo_nm
