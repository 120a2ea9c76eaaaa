"""Optomechanical mass-sensing simulator (Python bindings)."""

from ._optosense import (
    EnsembleResult,
    IntegratorConfig,
    OptosenseError,
    SensingResult,
    SweepRow,
    SystemParams,
    __version__,
    delta_xc_exact,
    drive_envelope,
    ensemble_mean,
    find_optimal_drive,
    first_order_delta,
    frame_offset,
    infer_mass_ratio,
    integrate_means,
    load_params,
    parse_params,
    run,
    sample_trajectory,
    sweep_coupling,
    sweep_drive,
    sweep_quality,
    sweep_sideband,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
