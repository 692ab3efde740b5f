"""
🛠️ QTT Utilities - Settings and Logging
Environment-driven configuration and the structured logging setup shared by the CLI and the REPL
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import structlog
import toml
from dotenv import load_dotenv
from pydantic import Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict
from rich.console import Console
from rich.logging import RichHandler

logger = logging.getLogger(__name__)

STDLIB_PATH = Path(__file__).parent / "stdlib"


class Settings(BaseSettings):
    """Toolchain settings; every field can be set through a QTT_ environment variable"""

    model_config = SettingsConfigDict(env_prefix="QTT_", env_file=".env", extra="ignore")

    no_color: bool = False
    log_level: str = "WARNING"
    search_depth: int = Field(default=8, ge=1, le=64)
    recursion_limit: int = Field(default=20000, ge=1000)
    stdlib_path: Path = STDLIB_PATH
    hole_separator_width: int = Field(default=30, ge=1)


class ConfigUtils:
    """Configuration loading"""

    @staticmethod
    def load_settings(config_path: Optional[str] = None) -> Settings:
        """Environment and .env first, then the [qtt] table of a TOML file on top"""
        load_dotenv()
        overrides: Dict[str, Any] = {}
        if config_path:
            overrides = ConfigUtils.load_toml(config_path)
        try:
            return Settings(**overrides)
        except ValidationError as e:
            logger.error(f"Invalid configuration in {config_path}: {e}")
            raise

    @staticmethod
    def load_toml(config_path: str) -> Dict[str, Any]:
        """The [qtt] table of a TOML file, or an empty dict when the file is unusable"""
        try:
            data = toml.load(config_path)
        except (FileNotFoundError, toml.TomlDecodeError) as e:
            logger.error(f"Failed to load configuration from {config_path}: {e}")
            return {}
        table = data.get("qtt", {})
        logger.debug(f"Loaded {len(table)} settings from {config_path}")
        return table

    @staticmethod
    def color_enabled(settings: Settings) -> bool:
        return not settings.no_color and "NO_COLOR" not in os.environ


config_utils = ConfigUtils()


def setup_logging(log_level: str = "WARNING", no_color: bool = False) -> None:
    """Rich handler on stderr under structlog; stdout stays free for program output"""
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True, no_color=no_color))],
        force=True,
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.dev.ConsoleRenderer(colors=not no_color),
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )
