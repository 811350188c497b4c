"""Builders turning a RunConfig into the physics and pipeline objects."""

from __future__ import annotations

from .config import RunConfig
from .corrections import (RoughnessSpec, TemperatureParams, TheoryCurve,
                          TheoryParams)
from .dielectric import (DielectricModel, DrudeParams, drude_only,
                         load_optical_table, tabulated_with_drude_tail)
from .electrostatics import ElectrostaticConfig
from .forcecurve import CalibrationParams
from .lifshitz import QuadratureParams, SphereGeometry
from .synth import SynthTruth


def dielectric_model(cfg: RunConfig, force_drude: bool = False,
                     material_csv: str | None = None) -> DielectricModel:
    drude = DrudeParams.from_ev(cfg.drude_wp_ev, cfg.drude_gamma_ev)
    path = material_csv if material_csv else cfg.material_csv
    if force_drude or not path:
        return drude_only(drude)
    table = load_optical_table(path)
    return tabulated_with_drude_tail(table, drude, cfg.crossover_ev,
                                     cfg.table_refine)


def theory_params(cfg: RunConfig, model: DielectricModel) -> TheoryParams:
    return TheoryParams(
        geom=SphereGeometry(cfg.sphere_radius_um * 1e-6),
        model=model,
        rough=RoughnessSpec(A=cfg.roughness_amplitude_nm * 1e-9,
                            coeffs=(cfg.roughness_c2, cfg.roughness_c3,
                                    cfg.roughness_c4)),
        temp=TemperatureParams(T=cfg.temperature_k),
        cap_offset=cfg.cap_offset_nm * 1e-9,
        quad=QuadratureParams(rel_tol=cfg.rel_tol,
                              xi_cut_multiplier=cfg.xi_cut_multiplier),
        enable_roughness=cfg.enable_roughness,
        enable_temperature=cfg.enable_temperature,
    )


def theory_curve(cfg: RunConfig, params: TheoryParams) -> TheoryCurve:
    return TheoryCurve(params, cfg.theory_cache_lo_nm * 1e-9,
                       cfg.theory_cache_hi_nm * 1e-9, cfg.theory_cache_points)


def electrostatic_config(cfg: RunConfig, V1: float = 0.0) -> ElectrostaticConfig:
    return ElectrostaticConfig(R=cfg.sphere_radius_um * 1e-6, V1=V1,
                               V2=cfg.v2_residual_mv * 1e-3)


def calibration_params(cfg: RunConfig) -> CalibrationParams:
    return CalibrationParams(k=cfg.spring_constant_n_per_m,
                             deflection_sensitivity=cfg.deflection_sensitivity_nm,
                             V2_residual=cfg.v2_residual_mv * 1e-3,
                             temperature=cfg.temperature_k)


def synth_truth(cfg: RunConfig, seed: int | None = None) -> SynthTruth:
    return SynthTruth(
        z0_true_nm=cfg.z0_true_nm,
        C_true_pn_per_nm=cfg.c_true_pn_per_nm,
        k_true=cfg.spring_constant_n_per_m,
        V2_residual=cfg.v2_residual_mv * 1e-3,
        noise_sigma_pn=cfg.noise_pn,
        n_scans=cfg.n_scans,
        grid_nm=(cfg.grid_lo_nm, cfg.grid_hi_nm, cfg.grid_points),
        seed=cfg.seed if seed is None else seed,
        cap_offset_nm=cfg.cap_offset_nm,
    )
