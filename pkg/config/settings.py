"""Global configuration settings for the hdlogit project."""

import os
from pathlib import Path
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _float_list(raw: str) -> list[float]:
    return [float(tok) for tok in raw.split(",") if tok.strip()]


class Settings:
    """Application settings loaded from environment variables."""

    # Cache directory for frontier curves (env var wins over --cache-dir)
    CACHE_DIR: str = os.getenv("HDLOGIT_CACHE", str(Path.home() / ".cache" / "hdlogit"))
    CACHE_FROM_ENV: bool = "HDLOGIT_CACHE" in os.environ

    OUTPUT_DIR: str = os.getenv("HDLOGIT_OUTPUT_DIR", "hdlogit_output")

    # Execution
    THREADS: int = int(os.getenv("HDLOGIT_THREADS", str(os.cpu_count() or 1)))
    SEED: int = int(os.getenv("HDLOGIT_SEED", "20240101"))

    # Theory engine
    QUADRATURE_ORDER: int = int(os.getenv("HDLOGIT_QUADRATURE_ORDER", "40"))

    # Monte-Carlo frontier (covariance-free, i.i.d. pilot designs)
    FRONTIER_N: int = int(os.getenv("HDLOGIT_FRONTIER_N", "1000"))
    FRONTIER_REPS: int = int(os.getenv("HDLOGIT_FRONTIER_REPS", "200"))
    FRONTIER_KAPPAS: list[float] = _float_list(
        os.getenv(
            "HDLOGIT_FRONTIER_KAPPAS",
            "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5",
        )
    )

    # ProbeFrontier
    PROBE_RESAMPLES: int = int(os.getenv("HDLOGIT_PROBE_RESAMPLES", "10"))

    # Tests
    SLOW_TESTS: bool = os.getenv("HDLOGIT_SLOW_TESTS", "false").lower() == "true"

    # Application Configuration
    DEBUG: bool = os.getenv("DEBUG", "false").lower() == "true"

    def validate(self) -> None:
        """Validate numeric settings."""
        if self.THREADS < 1:
            raise ValueError("HDLOGIT_THREADS must be at least 1.")
        if self.QUADRATURE_ORDER < 8:
            raise ValueError(
                "HDLOGIT_QUADRATURE_ORDER must be at least 8 nodes per axis.\n"
                "The default of 40 keeps quadrature error below 1e-8."
            )
        if self.FRONTIER_N < 10 or self.FRONTIER_REPS < 1:
            raise ValueError("HDLOGIT_FRONTIER_N must be >= 10 and HDLOGIT_FRONTIER_REPS >= 1.")
        if not self.FRONTIER_KAPPAS or any(not 0 < k <= 0.5 for k in self.FRONTIER_KAPPAS):
            raise ValueError("HDLOGIT_FRONTIER_KAPPAS must be a comma list of values in (0, 0.5].")
        if self.PROBE_RESAMPLES < 1:
            raise ValueError("HDLOGIT_PROBE_RESAMPLES must be at least 1.")

    def cache_dir(self, cli_value: str | None = None) -> Path:
        """Resolve the cache directory; HDLOGIT_CACHE overrides the CLI flag."""
        if self.CACHE_FROM_ENV or not cli_value:
            return Path(self.CACHE_DIR).expanduser()
        return Path(cli_value).expanduser()

    def __repr__(self) -> str:
        """String representation of settings."""
        return (
            f"Settings(THREADS={self.THREADS}, "
            f"SEED={self.SEED}, "
            f"QUADRATURE_ORDER={self.QUADRATURE_ORDER}, "
            f"FRONTIER_N={self.FRONTIER_N}, "
            f"FRONTIER_REPS={self.FRONTIER_REPS}, "
            f"DEBUG={self.DEBUG})"
        )


# Singleton instance
settings = Settings()
