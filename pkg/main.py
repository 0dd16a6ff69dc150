#!/usr/bin/env python3
"""
deblurgrid: grid-based deblurring radiance fields.
Entry point for all commands.

Usage:
    python main.py synth --spec configs/synthetic.yaml --out data/scene
    python main.py preprocess --data data/scene --prior sml --nk 16 --nskip 4
    python main.py train --data data/scene --config configs/desk.cfg --out data/scene.ckpt
    python main.py --help     # Full command list
"""

import sys
from pathlib import Path

# project root on sys.path when run as a script
sys.path.insert(0, str(Path(__file__).parent))

# .env overrides the process environment
from dotenv import load_dotenv as _load_dotenv

_load_dotenv(dotenv_path=Path(__file__).parent / ".env", override=True)

# Configure loguru before any other imports
from loguru import logger

from deblurgrid.config import get_settings

_settings = get_settings()
_settings.log_dir.mkdir(parents=True, exist_ok=True)

logger.remove()
logger.add(
    _settings.log_dir / "deblurgrid.log",
    rotation="10 MB",
    retention="30 days",
    level=_settings.log_level,
    format="{time:YYYY-MM-DD HH:mm:ss} | {level:<8} | {name}:{line} | {message}",
    enqueue=True,
)
# Console output is handled by Rich; only surface warnings and worse here
logger.add(sys.stderr, level=_settings.console_log_level, format="{level}: {message}")

from deblurgrid.cli.app import run

if __name__ == "__main__":
    run()
