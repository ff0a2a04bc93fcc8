"""
hdlogit - main entry point

Usage:
    uv run python hdlogit.py simulate table1.json
    uv run python hdlogit.py infer data.csv --label-col y
"""

import sys

from cli.main import main

if __name__ == "__main__":
    sys.exit(main())
