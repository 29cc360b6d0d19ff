"""Environment-driven configuration for the service and CLI."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .errors import ValidationError

MOCK = "mock"
LIVE = "live"


@dataclass
class RegcheckConfig:
    data_dir: Path = Path("./regcheck-data")
    bind_addr: str = "127.0.0.1:8000"
    provider: str = MOCK
    registry_base_url: str = "https://clinicaltrials.gov"
    grobid_url: Optional[str] = None
    embeddings_url: Optional[str] = None
    embeddings_key: str = ""
    embeddings_model: str = "text-embedding-3-large"
    llm_url: Optional[str] = None
    llm_key: str = ""
    llm_model: str = "gpt-5"
    cors_origins: tuple[str, ...] = ()
    task_workers: int = 2
    provider_concurrency: int = 2
    upload_limit_bytes: int = 30 * 1024 * 1024

    def __post_init__(self) -> None:
        if self.provider not in (MOCK, LIVE):
            raise ValidationError(f"provider must be '{MOCK}' or '{LIVE}', got {self.provider!r}")


def config_from_env(env: Mapping[str, str] | None = None) -> RegcheckConfig:
    env = os.environ if env is None else env
    config = RegcheckConfig(
        data_dir=Path(env.get("REGCHECK_DATA_DIR", "./regcheck-data")),
        bind_addr=env.get("REGCHECK_BIND_ADDR", "127.0.0.1:8000"),
        provider=env.get("REGCHECK_PROVIDER", MOCK),
        registry_base_url=env.get("REGCHECK_REGISTRY_BASE_URL", "https://clinicaltrials.gov"),
        grobid_url=env.get("REGCHECK_GROBID_URL") or None,
        embeddings_url=env.get("REGCHECK_EMBEDDINGS_URL") or None,
        embeddings_key=env.get("REGCHECK_EMBEDDINGS_KEY", ""),
        llm_url=env.get("REGCHECK_LLM_URL") or None,
        llm_key=env.get("REGCHECK_LLM_KEY", ""),
        llm_model=env.get("REGCHECK_LLM_MODEL", "gpt-5"),
        cors_origins=tuple(
            origin.strip()
            for origin in env.get("REGCHECK_CORS_ORIGINS", "").split(",")
            if origin.strip()
        ),
    )
    return config
