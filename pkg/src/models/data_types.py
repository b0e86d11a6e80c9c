"""
数据结构定义
"""
from dataclasses import dataclass, field, asdict
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidInputError


@dataclass
class Polytope:
    """
    凸多面体（顶点表示），用于存放 Clarke 次微分

    vertices 的每一行是一个顶点；标量列表按一维顶点处理，
    例如 Polytope([-1, 1]) 表示区间 [-1, 1]。
    """
    vertices: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        rows = [np.atleast_1d(np.asarray(v, dtype=float)) for v in self.vertices]
        if not rows:
            raise InvalidInputError("多面体顶点列表不能为空")
        shapes = {r.shape for r in rows}
        if len(shapes) != 1 or rows[0].ndim != 1:
            raise InvalidInputError(f"顶点维度不一致: {sorted(shapes)}")
        self.vertices = np.vstack(rows)
        self.dim = self.vertices.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def is_singleton(self) -> bool:
        return self.n_vertices == 1


@dataclass(frozen=True)
class KLParams:
    """非光滑 KL 不等式参数: dist(f(x), vcrit f)^θ ≤ c·dist(0, ∂f(x))"""
    theta: float
    c: float
    valid_band: float
    source: str = "analytic"  # analytic: 解析给出；certified: 网格认证

    def __post_init__(self):
        if not 0.0 <= self.theta < 1.0:
            raise InvalidInputError(f"θ 必须在 [0,1) 内: {self.theta}")
        if self.c <= 0:
            raise InvalidInputError(f"KL 常数 c 必须为正: {self.c}")


@dataclass(frozen=True)
class MRParams:
    """度量次正则参数: dist(x, crit f) ≤ c·dist(0, ∂f(x))^β"""
    beta: float
    c: float
    valid_band: float
    source: str = "analytic"

    def __post_init__(self):
        if self.beta <= 0:
            raise InvalidInputError(f"β 必须为正: {self.beta}")
        if self.c <= 0:
            raise InvalidInputError(f"MR 常数 c 必须为正: {self.c}")


@dataclass(frozen=True)
class ErrorBoundParams:
    """凸误差界参数: c/2((f - min f)^a + (f - min f)) ≥ dist(x, argmin f)"""
    a: float
    c: float
    source: str = "analytic"

    def __post_init__(self):
        if not 0.0 < self.a <= 1.0:
            raise InvalidInputError(f"误差界指数 a 必须在 (0,1] 内: {self.a}")
        if self.c <= 0:
            raise InvalidInputError(f"误差界常数 c 必须为正: {self.c}")


BIAS_KINDS = ("none", "fixed", "adversarial", "random_bounded")


@dataclass(frozen=True)
class BiasModel:
    """
    偏差模型：产生满足 ‖b‖ ≤ ε 的扰动

    fixed 使用 direction 方向（使用时归一化），random_bounded 在 ε 球内均匀采样，
    seed 为空时使用运行种子。
    """
    kind: str = "none"
    epsilon: float = 0.0
    direction: Optional[Tuple[float, ...]] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in BIAS_KINDS:
            raise InvalidInputError(f"不支持的偏差类型: {self.kind}，可选 {BIAS_KINDS}")
        if not np.isfinite(self.epsilon) or self.epsilon < 0:
            raise InvalidInputError(f"ε 必须为非负有限数: {self.epsilon}")
        if self.direction is not None:
            object.__setattr__(self, "direction", tuple(float(d) for d in self.direction))
        if self.kind == "fixed":
            if self.direction is None or not np.any(self.direction):
                raise InvalidInputError("fixed 偏差需要非零方向向量")

    def unit_direction(self) -> np.ndarray:
        d = np.asarray(self.direction, dtype=float)
        return d / np.linalg.norm(d)

    def label(self) -> str:
        return f"{self.kind}({self.epsilon:g})"

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> "BiasModel":
        """从字典创建"""
        return cls(**{k: v for k, v in config_dict.items() if k in cls.__annotations__})

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        if self.direction is not None:
            data["direction"] = list(self.direction)
        return data


SCHEDULE_KINDS = ("constant", "sqrt_horizon", "one_over_k", "power", "explicit")


@dataclass(frozen=True)
class StepSchedule:
    """
    步长序列

    - constant:      α_k = alpha
    - sqrt_horizon:  α_k = 1/√(horizon+1)，k ≤ horizon
    - one_over_k:    α_k = alpha/(k+1)
    - power:         α_k = alpha/(k+1)^power
    - explicit:      α_k = values[k]，越界时沿用最后一个值
    """
    kind: str = "constant"
    alpha: Optional[float] = None
    horizon: Optional[int] = None
    power: Optional[float] = None
    values: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise InvalidInputError(f"不支持的步长类型: {self.kind}，可选 {SCHEDULE_KINDS}")
        if self.values is not None:
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))

        if self.kind in ("constant", "one_over_k", "power"):
            if self.alpha is None or not self.alpha > 0:
                raise InvalidInputError(f"{self.kind} 步长需要正的 alpha: {self.alpha}")
        if self.kind == "power" and (self.power is None or self.power <= 0):
            raise InvalidInputError(f"power 步长需要正的指数: {self.power}")
        if self.kind == "sqrt_horizon" and (self.horizon is None or self.horizon < 0):
            raise InvalidInputError(f"sqrt_horizon 需要非负 horizon: {self.horizon}")
        if self.kind == "explicit":
            if not self.values or min(self.values) <= 0:
                raise InvalidInputError("explicit 步长列表必须非空且全部为正")

    def step(self, k: int) -> float:
        """第 k 步的步长"""
        if self.kind == "constant":
            return float(self.alpha)
        if self.kind == "sqrt_horizon":
            return 1.0 / np.sqrt(self.horizon + 1)
        if self.kind == "one_over_k":
            return self.alpha / (k + 1)
        if self.kind == "power":
            return self.alpha / (k + 1) ** self.power
        return self.values[min(k, len(self.values) - 1)]

    def steps(self, n: int) -> np.ndarray:
        """前 n 个步长"""
        return np.array([self.step(k) for k in range(n)], dtype=float)

    def max_step(self, n: int) -> float:
        return float(self.steps(n).max())

    def label(self) -> str:
        if self.kind == "constant":
            return f"constant({self.alpha:g})"
        if self.kind == "sqrt_horizon":
            return f"sqrt_horizon({self.horizon})"
        if self.kind == "one_over_k":
            return f"one_over_k({self.alpha:g})"
        if self.kind == "power":
            return f"power({self.alpha:g},{self.power:g})"
        return f"explicit[{len(self.values)}]"

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> "StepSchedule":
        """从字典创建"""
        return cls(**{k: v for k, v in config_dict.items() if k in cls.__annotations__})

    def to_dict(self) -> Dict[str, Any]:
        data = {k: v for k, v in asdict(self).items() if v is not None}
        if self.values is not None:
            data["values"] = list(self.values)
        return data


@dataclass
class Trajectory:
    """
    一次离散运行的轨迹

    points/values 长度 K+1，oracle_vectors/steps 长度 K，
    满足 points[k+1] = points[k] - steps[k] * oracle_vectors[k]。
    """
    points: np.ndarray          # (K+1, p)
    values: np.ndarray          # (K+1,)
    oracle_vectors: np.ndarray  # (K, p)
    steps: np.ndarray           # (K,)
    seed: int = 0
    function: str = ""

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def iterations(self) -> int:
        return self.steps.shape[0]

    @property
    def horizon(self) -> float:
        """累计步长 Σα_k"""
        return float(np.sum(self.steps))


@dataclass
class Curve:
    """
    连续时间曲线（均匀网格 h）

    states[j+1] = states[j] + h * (-selections[j] + bias_vectors[j])
    """
    times: np.ndarray         # (n,)
    states: np.ndarray        # (n, p)
    selections: np.ndarray    # (n, p)
    bias_vectors: np.ndarray  # (n, p)
    h: float
    epsilon: float = 0.0
    function: str = ""

    def __len__(self) -> int:
        return self.times.shape[0]

    @property
    def horizon(self) -> float:
        return float(self.times[-1] - self.times[0])


@dataclass
class FluctuationReport:
    """轨迹尾部波动报告"""
    burn_in: int
    radius: float       # sup_{k≥burn_in} dist(x_k, crit f)
    value_dist: float   # sup_{k≥burn_in} dist(f(x_k), vcrit_ε f)
    epsilon: float
    alpha: Union[float, str]
    function: str = ""
    n_points: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SweepRow:
    """扫描表中的一个单元 (ε, α, seed)"""
    epsilon: float
    alpha: float
    seed: int
    radius: float
    value_dist: float
    status: str = "ok"  # ok / diverged


@dataclass
class SweepTable:
    """ε/α 扫描结果与双对数拟合"""
    rows: List[SweepRow]
    function: str = ""
    bias_kind: str = ""
    rho: Optional[float] = None
    fitted_slope: Optional[float] = None
    fitted_C: Optional[float] = None
    bound_C: Optional[float] = None
    slope_ok: Optional[bool] = None
    bound_ok: Optional[bool] = None
    fit_message: str = ""

    @property
    def consistent(self) -> Optional[bool]:
        """与 ε^ρ 标度一致（两项条件同时满足）"""
        if self.slope_ok is None or self.bound_ok is None:
            return None
        return self.slope_ok and self.bound_ok

    def fit_dict(self) -> Dict[str, Any]:
        return {
            "function": self.function,
            "bias_kind": self.bias_kind,
            "rho": self.rho,
            "fitted_slope": self.fitted_slope,
            "fitted_C": self.fitted_C,
            "bound_C": self.bound_C,
            "slope_ok": self.slope_ok,
            "bound_ok": self.bound_ok,
            "consistent": self.consistent,
            "fit_message": self.fit_message,
            "n_rows": len(self.rows),
            "n_diverged": sum(1 for r in self.rows if r.status != "ok"),
        }


@dataclass
class CheckResult:
    """单项验证结果"""
    name: str
    passed: bool
    max_violation: float = 0.0
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def as_point(x: Union[float, Sequence[float], np.ndarray]) -> np.ndarray:
    """把标量/序列统一转成一维 float 向量"""
    return np.atleast_1d(np.asarray(x, dtype=float)).reshape(-1)
