from dataclasses import dataclass, field
import os
from dotenv import load_dotenv

load_dotenv()


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name, "").strip()
    return int(raw) if raw else default


@dataclass
class Settings:
    # Worker threads for replicate-level parallelism; --threads wins over this.
    threads: int = field(default_factory=lambda: _env_int("PARADIGM_LAB_THREADS", 1))
    # Raw chain steps a single trajectory may take before HorizonTooLarge.
    step_budget: int = field(default_factory=lambda: _env_int("PARADIGM_LAB_STEP_BUDGET", 2_000_000_000))
    # Uniform draws per RNG block handed to the chain kernel.
    chunk: int = field(default_factory=lambda: _env_int("PARADIGM_LAB_CHUNK", 1 << 16))
    output_dir: str = field(default_factory=lambda: os.getenv("PARADIGM_LAB_OUT", "results"))

    log_level: str = field(default_factory=lambda: os.getenv("LOG_LEVEL", "INFO").upper())
    log_format: str = field(default_factory=lambda: os.getenv("LOG_FORMAT", "text"))


settings = Settings()
