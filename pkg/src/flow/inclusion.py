"""
带偏差的微分包含

    ẋ(t) ∈ -∂f(x(t)) + B̄(0, ε)

显式 Euler 离散，选择为最小范数次梯度，偏差按 BiasModel 逐点给出。
非光滑界面处不做事件检测，选择在网格点切换。
"""
import dataclasses
import logging
from typing import Union

import numpy as np

from ..catalog.functions import CatalogFunction
from ..solver.biased_subgradient import BiasOracle, select_subgradient, DIVERGENCE_NORM
from ..models.data_types import BiasModel, Curve, as_point
from ..models.errors import DivergedError, InvalidInputError

logger = logging.getLogger(__name__)


def _resolve_bias(bias_field: Union[str, BiasModel, None], eps: float) -> BiasModel:
    if bias_field is None:
        bias_field = "none" if eps == 0 else "adversarial"
    if isinstance(bias_field, str):
        return BiasModel(kind=bias_field, epsilon=eps)
    return dataclasses.replace(bias_field, epsilon=eps)


def integrate(fn: CatalogFunction, x0, eps: float, bias_field: Union[str, BiasModel, None],
              T: float, h: float, seed: int = 0) -> Curve:
    """
    Euler 积分 [0, T]

    Args:
        fn: 目录函数
        x0: 初始点
        eps: 偏差半径 ε
        bias_field: 偏差类型名或 BiasModel（ε 以参数 eps 为准）
        T: 时间长度
        h: 网格步长

    Returns:
        均匀网格上的曲线，共 round(T/h) + 1 个节点
    """
    if h <= 0 or T < h:
        raise InvalidInputError(f"需要 h > 0 且 T ≥ h: h={h}, T={T}")
    x = as_point(x0)
    if x.shape[0] != fn.dim:
        raise InvalidInputError(f"初始点维度 {x.shape[0]} 与 {fn.name} 维度 {fn.dim} 不一致")

    bias = _resolve_bias(bias_field, eps)
    oracle = BiasOracle(bias, fn.dim, seed)
    n_steps = int(round(T / h))
    n = n_steps + 1

    times = np.arange(n) * h
    states = np.empty((n, fn.dim))
    selections = np.empty((n, fn.dim))
    bias_vectors = np.empty((n, fn.dim))

    states[0] = x
    for j in range(n):
        s = select_subgradient(fn, states[j])
        b = -oracle.perturbation(s)   # ẋ = -(s + b_oracle)，与离散迭代同号
        selections[j] = s
        bias_vectors[j] = b
        if j == n - 1:
            break
        x_next = states[j] + h * (-s + b)
        norm = np.linalg.norm(x_next)
        if not np.isfinite(norm) or norm > DIVERGENCE_NORM:
            raise DivergedError(f"{fn.name}: 积分在 t={times[j + 1]:.4g} 发散", partial=None)
        states[j + 1] = x_next

    logger.debug(f"{fn.name}: 积分完成 T={T}, h={h}, 终点 {states[-1]}")
    return Curve(
        times=times,
        states=states,
        selections=selections,
        bias_vectors=bias_vectors,
        h=float(h),
        epsilon=float(eps),
        function=fn.name,
    )
