"""
Process settings - read from the environment (.env supported)
Unset values stay None so the config file keeps its own value.
"""

import os

from dotenv import load_dotenv
from pydantic import BaseModel, Field


class Settings(BaseModel):
    output_dir: str | None = None
    parallelism: int | None = Field(default=None, ge=1)
    log_level: str = "INFO"


def load_settings() -> Settings:
    """Load environment variables from .env, then build the settings"""
    load_dotenv()

    parallelism = os.getenv("MAES_PARALLELISM")
    return Settings(
        output_dir=os.getenv("MAES_OUTPUT_DIR") or None,
        parallelism=int(parallelism) if parallelism else None,
        log_level=os.getenv("MAES_LOG_LEVEL", "INFO"),
    )
