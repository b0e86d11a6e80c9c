"""
带偏差的次梯度法

    x_{k+1} = x_k - α_k v_ε(x_k),   dist(v_ε(x_k), ∂f(x_k)) ≤ ε

v_ε = s + b，其中 s 为 Clarke 次微分的最小范数元素，b 由偏差模型给出且 ‖b‖ ≤ ε。
"""
import logging
from typing import Optional

import numpy as np

from ..catalog.functions import CatalogFunction
from ..polytope.min_norm import min_norm_of_vertices
from ..models.data_types import BiasModel, StepSchedule, Trajectory, as_point
from ..models.errors import DivergedError, InvalidInputError

logger = logging.getLogger(__name__)

DIVERGENCE_NORM = 1e8


def select_subgradient(fn: CatalogFunction, x, via_polytope: bool = False) -> np.ndarray:
    """
    最小范数次梯度（确定性选择）

    目录函数的 Clarke 次微分是区间乘积，投影即逐坐标截断；
    via_polytope=True 时改走顶点枚举 + Wolfe，供可采纳性核对使用。
    """
    if via_polytope:
        return min_norm_of_vertices(fn.clarke_vertices(x))
    x = as_point(x)
    if x.shape[0] != fn.dim:
        raise InvalidInputError(f"{fn.name} 的维度为 {fn.dim}，收到 {x.shape[0]} 维输入")
    return fn.min_norm_point(x)


class BiasOracle:
    """
    偏差预言机

    random_bounded 使用独立的随机数生成器，种子取 bias.seed，缺省为运行种子。
    """

    def __init__(self, bias: BiasModel, dim: int, seed: int = 0):
        self.bias = bias
        self.dim = dim
        self.rng = np.random.default_rng(bias.seed if bias.seed is not None else seed)
        if bias.kind == "fixed":
            direction = bias.unit_direction()
            if direction.shape[0] != dim:
                raise InvalidInputError(f"偏差方向维度 {direction.shape[0]} 与函数维度 {dim} 不一致")
            self._fixed = bias.epsilon * direction
        self._e1 = np.zeros(dim)
        self._e1[0] = 1.0

    def perturbation(self, s: np.ndarray) -> np.ndarray:
        """给定选择 s，返回扰动 b（‖b‖ ≤ ε）"""
        eps = self.bias.epsilon
        kind = self.bias.kind
        if kind == "none" or eps == 0.0:
            return np.zeros(self.dim)
        if kind == "fixed":
            return self._fixed.copy()
        if kind == "adversarial":
            norm = np.linalg.norm(s)
            if norm == 0.0:
                return eps * self._e1
            return -eps * s / norm
        # random_bounded: ε 球内均匀分布
        g = self.rng.standard_normal(self.dim)
        g /= np.linalg.norm(g)
        return eps * self.rng.uniform() ** (1.0 / self.dim) * g

    def __call__(self, fn: CatalogFunction, x) -> np.ndarray:
        s = select_subgradient(fn, x)
        return s + self.perturbation(s)


def biased_oracle(fn: CatalogFunction, x, bias: BiasModel,
                  rng_state: Optional[BiasOracle] = None) -> np.ndarray:
    """
    单次偏差预言机调用 v = s + b

    Args:
        rng_state: 复用的 BiasOracle（random_bounded 需要连续的随机流）
    """
    oracle = rng_state if rng_state is not None else BiasOracle(bias, fn.dim)
    return oracle(fn, x)


def run(fn: CatalogFunction, x0, schedule: StepSchedule, bias: BiasModel, K: int,
        seed: int = 0) -> Trajectory:
    """
    运行 K 步偏差次梯度法

    Returns:
        长度 K+1 的轨迹

    Raises:
        DivergedError: 出现非有限值或 ‖x_k‖ > 1e8，携带已完成的部分轨迹
    """
    if K < 1:
        raise InvalidInputError(f"迭代次数 K 必须 ≥ 1: {K}")
    x = as_point(x0)
    if x.shape[0] != fn.dim:
        raise InvalidInputError(f"初始点维度 {x.shape[0]} 与 {fn.name} 维度 {fn.dim} 不一致")
    if not np.all(np.isfinite(x)):
        raise InvalidInputError(f"初始点必须有限: {x}")

    oracle = BiasOracle(bias, fn.dim, seed)
    steps = schedule.steps(K)
    points = np.empty((K + 1, fn.dim))
    oracle_vectors = np.empty((K, fn.dim))

    points[0] = x
    for k in range(K):
        v = oracle(fn, points[k])
        oracle_vectors[k] = v
        x_next = points[k] - steps[k] * v
        norm = np.linalg.norm(x_next)
        if not np.isfinite(norm) or norm > DIVERGENCE_NORM:
            partial = Trajectory(
                points=points[:k + 1].copy(),
                values=fn.value_batch(points[:k + 1]),
                oracle_vectors=oracle_vectors[:k].copy(),
                steps=steps[:k].copy(),
                seed=seed,
                function=fn.name,
            )
            raise DivergedError(f"{fn.name}: 第 {k + 1} 步发散（‖x‖ = {norm:.3g}）", partial=partial)
        points[k + 1] = x_next

    values = fn.value_batch(points)
    logger.debug(f"{fn.name}: 完成 {K} 步，f(x_K) = {values[-1]:.6g}")
    return Trajectory(
        points=points,
        values=values,
        oracle_vectors=oracle_vectors,
        steps=steps,
        seed=seed,
        function=fn.name,
    )
