#!/usr/bin/env python3
"""
偏差次梯度实验平台 - 命令行入口
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from src.cli.app import main


if __name__ == '__main__':
    sys.exit(main())
