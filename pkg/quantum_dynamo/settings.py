"""Process-level settings read from the environment."""

import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

load_dotenv()


class Settings:
    """Runtime defaults for solvers, output and the run registry."""

    def __init__(self, output_dir: Optional[str] = None):
        """Initialize settings.

        Args:
            output_dir: Root directory for run outputs. If None, reads from environment.
        """
        if output_dir is None:
            output_dir = os.getenv("DYNAMO_OUTPUT_DIR", "dynamo_output")
        self.output_dir = Path(output_dir)

        workers = os.getenv("DYNAMO_WORKERS")
        self.workers = int(workers) if workers else (os.cpu_count() or 1)
        self.tol = float(os.getenv("DYNAMO_TOL", "1e-9"))
        self.sse_batch = int(os.getenv("DYNAMO_SSE_BATCH", "64"))
        self.log_level = os.getenv("DYNAMO_LOG_LEVEL", "INFO").upper()
        self.sql_echo = os.getenv("DYNAMO_SQL_ECHO", "false").lower() == "true"

        registry_url = os.getenv("DYNAMO_REGISTRY_URL")
        if registry_url is None:
            registry_url = f"sqlite:///{self.output_dir / 'runs.db'}"
        self.registry_url = registry_url


# Global settings instance
settings = Settings()
