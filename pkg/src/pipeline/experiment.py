"""
单次实验管线

读取配置、运行偏差次梯度法、写出轨迹 CSV 与波动报告 JSON。
"""
import csv
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..catalog.functions import get_function
from ..analysis.fluctuation import fluctuation
from ..solver.biased_subgradient import run
from ..models.data_types import BiasModel, FluctuationReport, StepSchedule, Trajectory
from ..models.errors import ConfigError, DivergedError, InvalidInputError

logger = logging.getLogger(__name__)


def config_hash(config_dict: Dict[str, Any]) -> str:
    """规范 JSON（键排序、紧凑分隔符）的 sha256 前 16 位"""
    canonical = json.dumps(config_dict, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()[:16]


def _load_json(json_path: str) -> Dict[str, Any]:
    try:
        with open(json_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"配置文件不存在: {json_path}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"配置文件不是合法 JSON: {json_path} ({e})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"配置文件顶层必须是对象: {json_path}")
    return data


@dataclass
class ExperimentConfig:
    """单次实验配置"""
    function: str
    x0: Tuple[float, ...]
    schedule: StepSchedule
    bias: BiasModel = field(default_factory=BiasModel)
    iterations: int = 1000
    seed: int = 0
    burn_in_fraction: float = 0.5
    output_path: str = "output/run"

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> 'ExperimentConfig':
        """从字典创建配置（忽略未知键）"""
        data = {k: v for k, v in config_dict.items() if k in cls.__annotations__}
        for key in ("function", "x0", "schedule", "seed"):
            if key not in data:
                raise ConfigError(f"配置缺少字段: {key}")
        try:
            x0 = data["x0"]
            data["x0"] = tuple(float(v) for v in (x0 if isinstance(x0, (list, tuple)) else [x0]))
            if isinstance(data["schedule"], dict):
                data["schedule"] = StepSchedule.from_dict(data["schedule"])
            if isinstance(data.get("bias"), dict):
                data["bias"] = BiasModel.from_dict(data["bias"])
        except (InvalidInputError, TypeError, ValueError) as e:
            raise ConfigError(f"配置字段非法: {e}") from None
        if not isinstance(data["schedule"], StepSchedule):
            raise ConfigError(f"schedule 必须是对象: {data['schedule']!r}")
        if not isinstance(data.get("bias", BiasModel()), BiasModel):
            raise ConfigError(f"bias 必须是对象: {data['bias']!r}")
        return cls(**data)

    @classmethod
    def from_json(cls, json_path: str) -> 'ExperimentConfig':
        """从JSON文件加载配置"""
        return cls.from_dict(_load_json(json_path))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "function": self.function,
            "x0": list(self.x0),
            "schedule": self.schedule.to_dict(),
            "bias": self.bias.to_dict(),
            "iterations": self.iterations,
            "seed": self.seed,
            "burn_in_fraction": self.burn_in_fraction,
            "output_path": self.output_path,
        }

    def to_json(self, json_path: str) -> None:
        with open(json_path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, ensure_ascii=False)

    def config_hash(self) -> str:
        return config_hash(self.to_dict())

    def validate(self) -> None:
        """
        验证配置有效性

        Raises:
            CatalogMissError: 未知函数名
            ConfigError: 其余字段非法
        """
        if not isinstance(self.schedule, StepSchedule) or not isinstance(self.bias, BiasModel):
            raise ConfigError(
                f"schedule/bias 类型非法: {type(self.schedule).__name__}, {type(self.bias).__name__}"
            )
        fn = get_function(self.function)
        if len(self.x0) != fn.dim:
            raise ConfigError(f"x0 维度 {len(self.x0)} 与 {fn.name} 维度 {fn.dim} 不一致")
        if not all(np.isfinite(self.x0)):
            raise ConfigError(f"x0 必须有限: {self.x0}")
        if not isinstance(self.iterations, int) or self.iterations < 1:
            raise ConfigError(f"iterations 必须为 ≥ 1 的整数: {self.iterations}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed 必须为整数: {self.seed}")
        if not 0.0 < self.burn_in_fraction < 1.0:
            raise ConfigError(f"burn_in_fraction 必须在 (0,1) 内: {self.burn_in_fraction}")
        if self.bias.kind == "fixed" and len(self.bias.direction) != fn.dim:
            raise ConfigError(f"偏差方向维度 {len(self.bias.direction)} 与函数维度 {fn.dim} 不一致")


def _trajectory_header(dim: int) -> list:
    return (['k', 'alpha_k'] + [f'x_{i}' for i in range(dim)] + ['f']
            + [f'oracle_{i}' for i in range(dim)] + ['dist_crit'])


def write_trajectory_csv(traj: Trajectory, output_file: Path, digest: str, dist_crit: np.ndarray) -> None:
    """
    写出轨迹 CSV

    第一行为 `# config_hash=... seed=...`，最后一行（x_K）没有步长与预言机向量。
    浮点数按 repr 写出，可逐位还原。
    """
    with open(output_file, 'w', newline='', encoding='utf-8') as f:
        f.write(f"# config_hash={digest} seed={traj.seed}\n")
        writer = csv.writer(f)
        writer.writerow(_trajectory_header(traj.dim))
        for k in range(len(traj)):
            if k < traj.iterations:
                alpha = [repr(float(traj.steps[k]))]
                oracle = [repr(float(v)) for v in traj.oracle_vectors[k]]
            else:
                alpha, oracle = [''], [''] * traj.dim
            writer.writerow(
                [k] + alpha + [repr(float(v)) for v in traj.points[k]]
                + [repr(float(traj.values[k]))] + oracle + [repr(float(dist_crit[k]))]
            )


@dataclass
class ExperimentResults:
    """单次实验输出"""
    trajectory: Trajectory
    report: Optional[FluctuationReport]
    status: str                  # ok / diverged
    config_hash: str
    output_dir: Optional[Path] = None


class ExperimentRunner:
    """单次实验管线"""

    def __init__(self, config: ExperimentConfig):
        config.validate()
        self.config = config
        self.fn = get_function(config.function)
        self.digest = config.config_hash()
        self.output_dir = Path(config.output_path)
        logger.info(f"实验初始化完成: {self.fn.name}, config_hash={self.digest}")

    def run(self) -> ExperimentResults:
        """运行完整管线"""
        cfg = self.config
        logger.info(f"[1/3] 运行 {cfg.schedule.label()} / {cfg.bias.label()}，K={cfg.iterations}, seed={cfg.seed}")
        status = "ok"
        try:
            traj = run(self.fn, cfg.x0, cfg.schedule, cfg.bias, cfg.iterations, seed=cfg.seed)
        except DivergedError as e:
            logger.warning(f"运行发散: {e}")
            traj, status = e.partial, "diverged"
        logger.info(f"  完成 {traj.iterations} 步，f(x_K) = {traj.values[-1]:.6g}")

        logger.info("[2/3] 计算尾部波动...")
        report = None
        if status == "ok":
            try:
                report = fluctuation(traj, self.fn, cfg.bias.epsilon, cfg.burn_in_fraction)
                logger.info(f"  半径 {report.radius:.6g}，值距离 {report.value_dist:.6g}")
            except InvalidInputError as e:
                logger.warning(f"跳过波动报告: {e}")

        logger.info("[3/3] 保存结果...")
        self._save(traj, report, status)
        return ExperimentResults(traj, report, status, self.digest, self.output_dir)

    def _save(self, traj: Trajectory, report: Optional[FluctuationReport], status: str) -> None:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        csv_file = self.output_dir / "trajectory.csv"
        write_trajectory_csv(traj, csv_file, self.digest, self.fn.dist_to_crit_batch(traj.points))
        logger.info(f"  轨迹: {csv_file} ({len(traj)} 行)")

        json_file = self.output_dir / "fluctuation.json"
        payload = {
            "config_hash": self.digest,
            "seed": self.config.seed,
            "status": status,
            "config": self.config.to_dict(),
            "fluctuation": report.to_dict() if report else None,
        }
        with open(json_file, 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2, ensure_ascii=False)
        logger.info(f"  报告: {json_file}")
