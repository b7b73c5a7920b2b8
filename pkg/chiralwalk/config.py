from pathlib import Path
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Library and CLI settings loaded from environment variables (prefix CHIRALWALK_)"""

    model_config = SettingsConfigDict(env_prefix="CHIRALWALK_", env_file=".env", extra="ignore")

    DEBUG: bool = False
    LOG_LEVEL: str = "INFO"
    LOG_TO_FILE: bool = False
    LOG_DIR: Path = Path("logs")

    OUTPUT_DIR: Path = Path("results")

    # Numerical tolerances
    HERMITICITY_TOL: float = 1e-12
    UNITARY_TOL: float = 1e-9
    LINDBLAD_TOL: float = 1e-7

    # Time grids (units of 1/J, FMO in ps)
    GRID_POINTS: int = 2000
    TRAP_RATE: float = 1.0
    # Open-system defaults calibrated for the switch and the triangle chain
    SWITCH_TRAP_RATE: float = 0.8
    CHAIN_TRAP_RATE: float = 0.97
    CHAIN_DEPHASING: float = 0.052
    SWITCH_HORIZON: float = 20.0
    CHAIN_HORIZON: float = 60.0
    FMO_HORIZON: float = 10.0
    WS_HORIZON: float = 50.0

    # Phase optimizer
    OPT_RESTARTS: int = 32
    OPT_MAXITER: int = 500
    OPT_FTOL: float = 1e-6

    WORKERS: int = 1

    API_HOST: str = "0.0.0.0"
    API_PORT: int = 8000


settings = Settings()
