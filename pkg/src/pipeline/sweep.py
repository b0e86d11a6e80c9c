"""
ε/α 扫描管线
"""
import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from ..catalog.functions import get_function
from ..analysis.fluctuation import sweep
from ..models.data_types import BIAS_KINDS, SweepTable
from ..models.errors import ConfigError
from .experiment import _load_json, config_hash

logger = logging.getLogger(__name__)

SWEEP_SCHEDULES = ("constant", "one_over_k", "power")


@dataclass
class SweepConfig:
    """扫描配置"""
    function: str
    eps_grid: Tuple[float, ...]
    alpha_grid: Tuple[float, ...] = ()
    bias_kind: str = "adversarial"
    schedule_kind: str = "constant"
    power: Optional[float] = None
    iterations: int = 10_000
    seeds: Tuple[int, ...] = (0,)
    x0: Optional[Tuple[float, ...]] = None
    x0_jitter: float = 0.0
    # 给出时每个 ε 的步长为 alpha_coef·ε^alpha_eps_power
    alpha_eps_power: Optional[float] = None
    alpha_coef: float = 1.0
    burn_in_fraction: float = 0.5
    output_path: str = "output/sweep"

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> 'SweepConfig':
        """从字典创建配置（忽略未知键）"""
        data = {k: v for k, v in config_dict.items() if k in cls.__annotations__}
        if "function" not in data or "eps_grid" not in data:
            raise ConfigError("扫描配置需要 function 与 eps_grid")
        try:
            for key in ("eps_grid", "alpha_grid"):
                if key in data:
                    data[key] = tuple(float(v) for v in data[key])
            if "seeds" in data:
                data["seeds"] = tuple(int(s) for s in data["seeds"])
            if data.get("x0") is not None:
                x0 = data["x0"]
                data["x0"] = tuple(float(v) for v in (x0 if isinstance(x0, (list, tuple)) else [x0]))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"配置字段非法: {e}") from None
        return cls(**data)

    @classmethod
    def from_json(cls, json_path: str) -> 'SweepConfig':
        """从JSON文件加载配置"""
        return cls.from_dict(_load_json(json_path))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "function": self.function,
            "eps_grid": list(self.eps_grid),
            "alpha_grid": list(self.alpha_grid),
            "bias_kind": self.bias_kind,
            "schedule_kind": self.schedule_kind,
            "power": self.power,
            "iterations": self.iterations,
            "seeds": list(self.seeds),
            "x0": None if self.x0 is None else list(self.x0),
            "x0_jitter": self.x0_jitter,
            "alpha_eps_power": self.alpha_eps_power,
            "alpha_coef": self.alpha_coef,
            "burn_in_fraction": self.burn_in_fraction,
            "output_path": self.output_path,
        }

    def config_hash(self) -> str:
        return config_hash(self.to_dict())

    def validate(self) -> None:
        """验证配置有效性"""
        fn = get_function(self.function)
        if not self.eps_grid:
            raise ConfigError("ε 网格不能为空")
        if min(self.eps_grid) < 0:
            raise ConfigError(f"ε 必须非负: {self.eps_grid}")
        if self.alpha_eps_power is None and not self.alpha_grid:
            raise ConfigError("需要 alpha_grid 或 alpha_eps_power")
        if self.alpha_grid and min(self.alpha_grid) <= 0:
            raise ConfigError(f"α 必须为正: {self.alpha_grid}")
        if self.bias_kind not in BIAS_KINDS:
            raise ConfigError(f"不支持的偏差类型: {self.bias_kind}")
        if self.schedule_kind not in SWEEP_SCHEDULES:
            raise ConfigError(f"扫描只支持 {SWEEP_SCHEDULES} 步长: {self.schedule_kind}")
        if self.schedule_kind == "power" and not (self.power and self.power > 0):
            raise ConfigError(f"power 步长需要正的指数: {self.power}")
        if self.iterations < 1:
            raise ConfigError(f"iterations 必须 ≥ 1: {self.iterations}")
        if not self.seeds:
            raise ConfigError("seeds 不能为空")
        if self.x0 is not None and len(self.x0) != fn.dim:
            raise ConfigError(f"x0 维度 {len(self.x0)} 与 {fn.name} 维度 {fn.dim} 不一致")
        if not 0.0 < self.burn_in_fraction < 1.0:
            raise ConfigError(f"burn_in_fraction 必须在 (0,1) 内: {self.burn_in_fraction}")


@dataclass
class SweepResults:
    table: SweepTable
    config_hash: str
    output_dir: Optional[Path] = None
    files: List[Path] = field(default_factory=list)


class SweepRunner:
    """扫描管线"""

    def __init__(self, config: SweepConfig, jobs: int = 1):
        config.validate()
        self.config = config
        self.jobs = max(1, jobs)
        self.fn = get_function(config.function)
        self.digest = config.config_hash()
        self.output_dir = Path(config.output_path)

    def run(self) -> SweepResults:
        cfg = self.config
        logger.info(f"[1/3] 扫描 {self.fn.name}: {len(cfg.eps_grid)} 个 ε，偏差 {cfg.bias_kind}")
        table = sweep(
            self.fn, cfg.bias_kind, cfg.schedule_kind, cfg.eps_grid, cfg.alpha_grid,
            cfg.iterations, jobs=self.jobs, seeds=cfg.seeds, x0=cfg.x0, power=cfg.power,
            alpha_eps_power=cfg.alpha_eps_power, alpha_coef=cfg.alpha_coef,
            burn_in_fraction=cfg.burn_in_fraction, x0_jitter=cfg.x0_jitter,
        )

        logger.info("[2/3] 拟合结果:")
        if table.fitted_slope is not None:
            logger.info(f"  斜率 {table.fitted_slope:.4f}，ρ = {table.rho}，C = {table.fitted_C:.4g}")
        logger.info(f"  {table.fit_message}")

        logger.info("[3/3] 保存结果...")
        files = self._save(table)
        return SweepResults(table, self.digest, self.output_dir, files)

    def _save(self, table: SweepTable) -> List[Path]:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        csv_file = self.output_dir / "sweep.csv"
        with open(csv_file, 'w', newline='', encoding='utf-8') as f:
            f.write(f"# config_hash={self.digest} seeds={' '.join(map(str, self.config.seeds))}\n")
            writer = csv.writer(f)
            writer.writerow(['epsilon', 'alpha', 'seed', 'radius', 'value_dist', 'status'])
            for row in table.rows:
                writer.writerow([repr(row.epsilon), repr(row.alpha), row.seed,
                                 repr(row.radius), repr(row.value_dist), row.status])
        logger.info(f"  扫描表: {csv_file} ({len(table.rows)} 行)")

        json_file = self.output_dir / "sweep_fit.json"
        payload = {
            "config_hash": self.digest,
            "seeds": list(self.config.seeds),
            "config": self.config.to_dict(),
            "fit": table.fit_dict(),
        }
        with open(json_file, 'w', encoding='utf-8') as f:
            json.dump(payload, f, indent=2, ensure_ascii=False)
        logger.info(f"  拟合: {json_file}")
        return [csv_file, json_file]
