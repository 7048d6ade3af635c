from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables from .env file
load_dotenv()

class Settings(BaseSettings):
    """Library-wide numerical defaults and logging options.

    Run parameters (momenta, grids, cutoff) never come from here; they are read
    from the JSON run config so that a report is reproducible from its config alone.
    """
    model_config = SettingsConfigDict(
        env_prefix="QVACUUM_",
        case_sensitive=True,
        env_file=".env",
        extra="ignore",
    )

    PROJECT_NAME: str = "qvacuum-lab"
    VERSION: str = "0.1.0"

    # Fock space limits
    MAX_DIMENSION: int = 10_000_000
    DENSE_EIGEN_LIMIT: int = 4096
    SAFE_MARGIN: int = 2

    # Numerical tolerances
    DEFAULT_TOLERANCE: float = 1e-8
    EPSILON_MIN: float = 1e-6
    Q_LIMIT_WINDOW: float = 1e-8

    # Scaled Taylor exponential
    EXP_MAX_TERMS: int = 200
    EXP_STEP_NORM: float = 0.5

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_DIR: str = "logs"
    LOG_TO_FILE: bool = True

    # Orchestrator
    MAX_WORKERS: int = 4

settings = Settings()
