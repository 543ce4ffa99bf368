"""Configuration loading from config.ini."""
import configparser
import os
import sys
from dataclasses import dataclass, field, replace
from typing import Optional


def get_base_dir() -> str:
    """Get the base directory, handling frozen executables."""
    if getattr(sys, 'frozen', False):
        return os.path.dirname(sys.executable)
    return os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


BASE_DIR = get_base_dir()

DEFAULTS = {
    'engine': {
        'seed': '0',
        'budget_ms': '60000',
        'max_tower_depth': '8',
        'prescribed_locus_attempts': '500',
        'batch_workers': '0',
    },
    'server': {
        'host': '127.0.0.1',
        'port': '8000',
    },
    'storage': {
        'database': 'data/conicert.db',
    },
}


@dataclass(frozen=True)
class EngineConfig:
    seed: int = 0
    budget_ms: int = 60000
    max_tower_depth: int = 8
    prescribed_locus_attempts: int = 500
    batch_workers: int = 0


@dataclass(frozen=True)
class ServerConfig:
    host: str = '127.0.0.1'
    port: int = 8000


@dataclass(frozen=True)
class Settings:
    engine: EngineConfig = field(default_factory=EngineConfig)
    server: ServerConfig = field(default_factory=ServerConfig)
    database_url: str = ''

    def with_engine(self, **overrides) -> "Settings":
        """Copy with some engine values replaced (CLI flags)."""
        clean = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, engine=replace(self.engine, **clean))


def load_config(path: Optional[str] = None) -> Settings:
    """Load configuration from a config.ini file.

    Args:
        path: Explicit file; defaults to config.ini in the base directory

    Returns:
        Settings with file values layered over DEFAULTS
    """
    config = configparser.ConfigParser()
    config.read_dict(DEFAULTS)
    config_path = path or os.path.join(BASE_DIR, "config.ini")
    if os.path.exists(config_path):
        config.read(config_path)

    engine = EngineConfig(
        seed=config.getint('engine', 'seed'),
        budget_ms=config.getint('engine', 'budget_ms'),
        max_tower_depth=config.getint('engine', 'max_tower_depth'),
        prescribed_locus_attempts=config.getint('engine', 'prescribed_locus_attempts'),
        batch_workers=config.getint('engine', 'batch_workers'),
    )
    server = ServerConfig(
        host=config.get('server', 'host'),
        port=config.getint('server', 'port'),
    )

    database_url = os.environ.get("CONICERT_DATABASE_URL")
    if not database_url:
        db_path = config.get('storage', 'database')
        if not os.path.isabs(db_path):
            db_path = os.path.join(BASE_DIR, db_path)
        database_url = f"sqlite:///{db_path}"

    return Settings(engine=engine, server=server, database_url=database_url)


CONFIG = load_config()
