"""Plain-text key=value run configuration.

Every tunable default of the pipeline lives here; unknown keys are
rejected and the canonical rendering of the config is hashed into output
metadata so reruns are attributable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields

from .errors import ParseError


@dataclass
class RunConfig:
    # geometry / material
    sphere_radius_um: float = 100.85
    drude_wp_ev: float = 12.398
    drude_gamma_ev: float = 0.063
    material_csv: str = ""
    crossover_ev: float = 0.04
    table_refine: int = 4
    # corrections
    roughness_amplitude_nm: float = 11.8
    roughness_c2: float = 0.86
    roughness_c3: float = 1.02
    roughness_c4: float = 1.90
    temperature_k: float = 300.0
    cap_offset_nm: float = 15.8
    enable_roughness: bool = True
    enable_temperature: bool = True
    # quadrature
    rel_tol: float = 1e-4
    xi_cut_multiplier: float = 40.0
    # theory cache (metal-to-metal separations)
    theory_cache_lo_nm: float = 45.0
    theory_cache_hi_nm: float = 1250.0
    theory_cache_points: int = 160
    # electrostatics / calibration
    v2_residual_mv: float = 7.9
    spring_constant_n_per_m: float = 0.0169
    deflection_sensitivity_nm: float = 1.0
    # statistics window
    window_lo_nm: float = 100.0
    window_hi_nm: float = 500.0
    window_points: int = 441
    pooled_noise_pn: float = 7.0
    # synthesis
    noise_pn: float = 7.0
    n_scans: int = 27
    seed: int = 0
    z0_true_nm: float = 48.9
    c_true_pn_per_nm: float = 0.001
    grid_lo_nm: float = 30.0
    grid_hi_nm: float = 920.0
    grid_points: int = 982

    def to_text(self) -> str:
        """Canonical key=value rendering (field order, one per line)."""
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{f.name}={value}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def _coerce(value: str, target_type):
    if target_type is bool:
        lowered = value.lower()
        if lowered in ("true", "1", "yes", "on"):
            return True
        if lowered in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    return target_type(value)


def parse_config(text: str) -> RunConfig:
    """Parse key=value lines; '#' comments allowed; unknown keys rejected."""
    known = {f.name: f.type for f in fields(RunConfig)}
    types = {f.name: type(getattr(RunConfig(), f.name)) for f in fields(RunConfig)}
    cfg = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(f"expected key=value, got {line!r}", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in known:
            raise ParseError(f"unknown config key {key!r}", line=lineno)
        try:
            setattr(cfg, key, _coerce(value, types[key]))
        except ValueError as exc:
            raise ParseError(f"bad value for {key!r}: {exc}", line=lineno) from None
    return cfg


def load_config(path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
