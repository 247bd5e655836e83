import os
from dotenv import load_dotenv, dotenv_values

load_dotenv()


class ConfigurationError(ValueError):
    """Raised for invalid experiment or environment configuration"""


def _env_flag(name: str, default: str = 'false') -> bool:
    return os.getenv(name, default).strip().lower() in ('1', 'true', 'yes', 'on')


class Config:
    # Output Settings
    OUTPUT_DIR = os.getenv('QWALK_OUTPUT_DIR', 'results')
    CSV_DIGITS = 12

    # Logging Settings
    LOG_LEVEL = os.getenv('QWALK_LOG_LEVEL', 'INFO')

    # Sweep Settings
    SWEEP_WORKERS = int(os.getenv('QWALK_SWEEP_WORKERS', 1))

    # Density Path Settings
    MAX_DENSITY_DIM = int(os.getenv('QWALK_MAX_DENSITY_DIM', 4096))
    CHECK_INVARIANTS = _env_flag('QWALK_CHECK_INVARIANTS')

    @classmethod
    def validate(cls):
        """Validate environment configuration"""
        if cls.SWEEP_WORKERS < 1:
            raise ConfigurationError("QWALK_SWEEP_WORKERS must be at least 1")
        if cls.MAX_DENSITY_DIM < 1:
            raise ConfigurationError("QWALK_MAX_DENSITY_DIM must be positive")
        if cls.LOG_LEVEL.upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            raise ConfigurationError(f"Unknown QWALK_LOG_LEVEL: {cls.LOG_LEVEL}")


# Keys accepted in a key=value experiment file; they mirror the CLI flags
FILE_KEYS = (
    'scheme', 'steps', 'noise', 'k', 'p', 'theta', 'measure',
    'schedule', 'format', 'out', 'seed', 'preset',
)


def load_config_file(path: str) -> dict:
    """Read a plain-text key=value experiment file"""
    if not os.path.exists(path):
        raise ConfigurationError(f"Config file not found: {path}")

    values = {}
    for key, value in dotenv_values(path).items():
        normalized = key.strip().lower().replace('-', '_')
        if normalized not in FILE_KEYS:
            raise ConfigurationError(f"Unknown key '{key}' in {path}")
        if value is None or value == '':
            continue
        values[normalized] = value.strip()
    return values
