#!/usr/bin/env python
"""CLI script for running the shrinkage benchmark."""

import sys
from pathlib import Path

# Add the project root to Python path to enable absolute imports
project_root = Path(__file__).parents[1].absolute()
sys.path.append(str(project_root))

from src.bench.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
