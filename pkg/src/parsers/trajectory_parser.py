"""
轨迹 CSV 解析器（读取 run 命令写出的文件）
"""
import csv
import logging
import re
from typing import Dict, Tuple

import numpy as np

from ..models.data_types import Trajectory
from ..models.errors import InvalidInputError

logger = logging.getLogger(__name__)

_META_PATTERN = re.compile(r"(\w+)=(\S+)")


class TrajectoryCSVParser:
    """轨迹 CSV 解析器"""

    @staticmethod
    def parse_metadata(line: str) -> Dict[str, str]:
        """解析 `# config_hash=... seed=...` 行"""
        return dict(_META_PATTERN.findall(line.lstrip('#')))

    @staticmethod
    def _columns(header: list) -> Tuple[list, list]:
        x_cols = [i for i, name in enumerate(header) if name.startswith('x_')]
        oracle_cols = [i for i, name in enumerate(header) if name.startswith('oracle_')]
        required = {'k', 'alpha_k', 'f'}
        if not required.issubset(header) or not x_cols or len(x_cols) != len(oracle_cols):
            raise InvalidInputError(f"轨迹 CSV 表头不完整: {header}")
        return x_cols, oracle_cols

    @staticmethod
    def parse_file(file_path: str, function: str = "") -> Trajectory:
        """
        解析轨迹 CSV

        格式错误的数据行记录警告后跳过。

        Returns:
            轨迹（seed 取自元数据行）
        """
        with open(file_path, 'r', encoding='utf-8') as f:
            lines = f.read().splitlines()

        meta: Dict[str, str] = {}
        if lines and lines[0].startswith('#'):
            meta = TrajectoryCSVParser.parse_metadata(lines[0])
            lines = lines[1:]
        rows = list(csv.reader(lines))
        if not rows:
            raise InvalidInputError(f"轨迹文件为空: {file_path}")

        header = rows[0]
        x_cols, oracle_cols = TrajectoryCSVParser._columns(header)
        alpha_col, f_col = header.index('alpha_k'), header.index('f')

        points, values, oracles, steps = [], [], [], []
        for line_num, row in enumerate(rows[1:], 2):
            if not row:
                continue
            if len(row) != len(header):
                logger.warning(f"第{line_num}行格式错误，字段数={len(row)}，跳过")
                continue
            try:
                point = [float(row[i]) for i in x_cols]
                value = float(row[f_col])
                if row[alpha_col] != '':
                    steps.append(float(row[alpha_col]))
                    oracles.append([float(row[i]) for i in oracle_cols])
            except ValueError as e:
                logger.warning(f"第{line_num}行解析失败: {e}，跳过")
                continue
            points.append(point)
            values.append(value)

        if len(points) != len(steps) + 1:
            raise InvalidInputError(
                f"轨迹不完整: {len(points)} 个点，{len(steps)} 个步长（应为点数 - 1）"
            )
        dim = len(x_cols)
        logger.info(f"读取轨迹 {file_path}: {len(points)} 个点")
        return Trajectory(
            points=np.array(points, dtype=float).reshape(-1, dim),
            values=np.array(values, dtype=float),
            oracle_vectors=np.array(oracles, dtype=float).reshape(-1, dim),
            steps=np.array(steps, dtype=float),
            seed=int(meta.get('seed', 0)),
            function=function,
        )


def load_trajectory_csv(file_path: str, function: str = "") -> Trajectory:
    return TrajectoryCSVParser.parse_file(file_path, function)
