from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Numerical knobs shared by the physics modules, the services and the CLI.
    Values can be overridden with FENNEC_* environment variables or a .env file.
    """

    model_config = SettingsConfigDict(env_prefix="FENNEC_", env_file=".env", extra="ignore")

    # junction
    weak_limit_warn_transmission: float = 0.1
    sec_floor: float = 1e-9
    spline_smoothing: float = 0.0
    spectral_periods: int = 64
    spectral_samples_per_period: int = 64

    # coupling
    mean_field_damping: float = 0.5
    mean_field_tolerance: float = 1e-10
    mean_field_max_iter: int = 200

    # network / design
    singular_det_floor: float = 1e-14
    frequency_root_xtol: float = 1e-12
    tolerance_root_xtol: float = 1e-10
    bracket_growth: float = 1.5
    bandwidth_notch_fraction: float = 0.5
    bandwidth_notch_samples: int = 128
    disorder_warn_fraction: float = 0.1
    disorder_norm: Literal["max", "fro"] = "max"

    # lindblad
    lindblad_substeps: int = 512
    lindblad_min_substeps: int = 64
    eta_warn: float = 0.5
    eigenvalue_floor: float = -1e-8
    contraction_slack: float = 1e-6
    sin_order: int = 5
    levels_per_mode: int = 6
    excitation_cap: int = 5

    # nonlinear
    series_n_max: int = 4
    series_m_max: int = 6
    inversion_order: int = 3

    # cli
    cli_jobs: int = 1
    csv_significant_digits: int = 17


settings = Settings()
