"""
连续时间下降性质的数值检查

- 弱 Lyapunov 不等式: f(x(t₂)) - f(x(t₁)) ≤ -∫ ‖v_x‖(‖v_x‖ - ε) dt
- 定量估计: δ > ε 时，在 T = (b - a)/(δ(δ - ε)) 之前必到达 dist(0, ∂f) ≤ δ
- ε-平稳性: f 沿曲线几乎不变时，曲线位于 crit_ε f 附近
- 下降性: l ∉ vcrit_ε f 且 f(x(0)) ≤ l 时 f(x(t)) < l

连续命题只能在 O(h) 意义下检验，每项检查同时给出原始违反量和扣除离散松弛后的判定。
"""
import logging
from dataclasses import dataclass, asdict
from typing import Any, Dict, Optional

import numpy as np

from ..catalog.functions import CatalogFunction
from ..catalog.critical_sets import dist_value_to_vcrit_eps
from ..models.data_types import Curve
from ..models.errors import InapplicableError, InvalidInputError

logger = logging.getLogger(__name__)

SLACK_FACTOR = 10.0
DEFAULT_WINDOW = 8
BAND_TOL = 1e-12


def _enlarged_stationarity(states: np.ndarray, fn: CatalogFunction, radius: float,
                           stop_below: Optional[float] = None) -> np.ndarray:
    """逐点 dist(0, 放大次微分)；给出 stop_below 时在首个不超过它的点处截断"""
    dists = []
    for x in states:
        lo, hi = fn.enlarged_bounds(x, radius)
        dists.append(float(np.linalg.norm(np.clip(0.0, lo, hi))))
        if stop_below is not None and dists[-1] <= stop_below:
            break
    return np.array(dists)


def _curve_lipschitz(curve: Curve) -> float:
    """曲线上选择范数的最大值，作为局部 Lipschitz 常数"""
    return float(np.max(np.linalg.norm(curve.selections, axis=1), initial=0.0))


def _window_velocity(curve: Curve, window: int) -> np.ndarray:
    """前向窗口平均速度 (x_{j+w} - x_j)/(w h)，末端退化为后向差分"""
    n = len(curve)
    if n == 1:
        return np.zeros_like(curve.states)
    idx = np.arange(n)
    ahead = np.minimum(idx + window, n - 1)
    behind = np.where(ahead == idx, np.maximum(idx - window, 0), idx)
    span = (ahead - behind) * curve.h
    return (curve.states[ahead] - curve.states[behind]) / span[:, None]


def lyapunov_selections(curve: Curve, fn: CatalogFunction, window: int = DEFAULT_WINDOW) -> np.ndarray:
    """
    v_x(t) ∈ argmin_{v ∈ ∂f} ‖ẋ(t) + v‖ 的网格版本

    ẋ 取窗口平均速度，∂f 取半径 window·h·(L+ε) 的放大次微分（区间乘积，投影即逐坐标截断）。
    """
    velocity = _window_velocity(curve, window)
    radius = window * curve.h * (_curve_lipschitz(curve) + curve.epsilon)
    out = np.empty_like(velocity)
    for j in range(len(curve)):
        lo, hi = fn.enlarged_bounds(curve.states[j], radius)
        out[j] = np.clip(-velocity[j], lo, hi)
    return out


@dataclass
class LyapunovReport:
    """弱 Lyapunov 检查结果"""
    raw_max_violation: float
    max_violation: float       # 扣除松弛后
    slack_rate: float          # C_slack·h
    slack_offset: float        # L(L+ε)h
    lipschitz: float
    n_points: int
    worst_pair: tuple = ()

    @property
    def passed(self) -> bool:
        return self.max_violation <= 1e-9

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["worst_pair"] = list(self.worst_pair)
        data["passed"] = self.passed
        return data


def _max_forward_increase(G: np.ndarray):
    """max_{i<j} G_j - G_i 及取到最大值的 (i, j)，O(n)"""
    if G.shape[0] < 2:
        return 0.0, ()
    running_min = np.minimum.accumulate(G[:-1])
    diffs = G[1:] - running_min
    j = int(np.argmax(diffs))
    return float(diffs[j]), (int(np.argmin(G[:j + 1])), j + 1)


def weak_lyapunov_check(curve: Curve, fn: CatalogFunction, eps: float,
                        window: int = DEFAULT_WINDOW) -> LyapunovReport:
    """
    对所有网格点对 t₁ < t₂ 检查积分不等式

    松弛量 C_slack·h·(t₂ - t₁) + L(L+ε)h，C_slack = 10(L+ε)²。
    """
    if len(curve) < 2:
        return LyapunovReport(0.0, 0.0, 0.0, 0.0, 0.0, len(curve))

    values = fn.value_batch(curve.states)
    v = lyapunov_selections(curve, fn, window)
    norms = np.linalg.norm(v, axis=1)
    integrand = norms * (norms - eps)
    # 梯形累积积分
    cumulative = np.concatenate([[0.0], np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * curve.h)])

    lip = _curve_lipschitz(curve)
    slack_rate = SLACK_FACTOR * (lip + eps) ** 2 * curve.h
    slack_offset = lip * (lip + eps) * curve.h
    t = curve.times - curve.times[0]

    raw, _ = _max_forward_increase(values + cumulative)
    adjusted, pair = _max_forward_increase(values + cumulative - slack_rate * t)
    report = LyapunovReport(
        raw_max_violation=max(0.0, raw),
        max_violation=max(0.0, adjusted - slack_offset),
        slack_rate=slack_rate,
        slack_offset=slack_offset,
        lipschitz=lip,
        n_points=len(curve),
        worst_pair=tuple(float(curve.times[i]) for i in pair),
    )
    if not report.passed:
        logger.warning(f"{fn.name}: 弱 Lyapunov 不等式违反 {report.max_violation:.3g}")
    return report


@dataclass
class QuantitativeReport:
    """定量估计检查结果"""
    horizon: float            # T = (b - a)/(δ(δ - ε))
    hit_time: Optional[float]
    violation: bool
    delta: float
    band: tuple

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["band"] = list(self.band)
        return data


def quantitative_estimate_check(curve: Curve, fn: CatalogFunction, eps: float,
                                a: float, b: float, delta: float) -> QuantitativeReport:
    """
    返回 [0, T] 内第一个满足 dist(0, ∂f(x(t))) ≤ δ 的网格时间（次微分按半径 h(L+ε) 放大）

    Raises:
        InvalidInputError: δ ≤ ε 或 a > b
        InapplicableError: 到达之前曲线离开 [a, b]，或曲线短于 T 且未到达
    """
    if delta <= eps:
        raise InvalidInputError(f"需要 δ > ε: δ={delta}, ε={eps}")
    if a > b:
        raise InvalidInputError(f"值带 [a, b] 非法: [{a}, {b}]")

    horizon = (b - a) / (delta * (delta - eps))
    t = curve.times - curve.times[0]
    within = t <= horizon + 1e-12
    states = curve.states[within]
    # 半径 h(L+ε) 吸收 Euler 在折点两侧的抖动
    radius = curve.h * (_curve_lipschitz(curve) + eps)
    stat = _enlarged_stationarity(states, fn, radius, stop_below=delta)
    values = fn.value_batch(states[:stat.shape[0]])
    hits = np.flatnonzero(stat <= delta)

    last = hits[0] if hits.size else int(within.sum()) - 1
    band_ok = np.all((values[:last + 1] >= a - BAND_TOL) & (values[:last + 1] <= b + BAND_TOL))
    if not band_ok:
        raise InapplicableError(f"{fn.name}: 曲线在到达前离开值带 [{a}, {b}]")

    if hits.size:
        return QuantitativeReport(horizon, float(t[hits[0]]), False, float(delta), (a, b))

    if curve.horizon < horizon:
        raise InapplicableError(
            f"{fn.name}: 曲线时长 {curve.horizon:.4g} 短于 T={horizon:.4g}，且未到达 δ-平稳点"
        )
    logger.warning(f"{fn.name}: T={horizon:.4g} 内未到达 dist(0,∂f) ≤ {delta}")
    return QuantitativeReport(horizon, None, True, float(delta), (a, b))


@dataclass
class StationarityReport:
    """ε-平稳性检查结果"""
    value_variation: float
    max_excess: float         # max dist(0, ∂f) - ε（放大次微分）
    tol_prime: float

    @property
    def passed(self) -> bool:
        return self.max_excess <= self.tol_prime

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


def stationarity_check(curve: Curve, fn: CatalogFunction, eps: float, tol: float,
                       tol_prime: float, window: int = DEFAULT_WINDOW) -> StationarityReport:
    """
    f 在曲线上的变化不超过 tol 时，检查所有网格点 dist(0, ∂f) ≤ ε + tol′

    平稳性用半径 window·h·(L+ε) 的放大次微分度量，以吸收折点处的 O(h) 抖动。

    Raises:
        InapplicableError: f 的变化超过 tol
    """
    values = fn.value_batch(curve.states)
    variation = float(values.max() - values.min())
    if variation > tol:
        raise InapplicableError(f"{fn.name}: f 沿曲线变化 {variation:.3g} 超过 {tol}")

    radius = window * curve.h * (_curve_lipschitz(curve) + eps)
    dists = _enlarged_stationarity(curve.states, fn, radius)
    return StationarityReport(variation, float(dists.max() - eps), float(tol_prime))


@dataclass
class DecreaseReport:
    """下降性检查结果"""
    level: float
    max_value: float
    slack: float
    level_gap: float          # dist(l, vcrit_ε f)

    @property
    def passed(self) -> bool:
        return self.max_value < self.level + self.slack

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


def decrease_check(curve: Curve, fn: CatalogFunction, eps: float, level: float,
                   box=None, resolution: Optional[int] = None) -> DecreaseReport:
    """
    l ∉ vcrit_ε f 且 f(x(0)) ≤ l 时，检查 f(x(t)) < l + L(L+ε)h

    Raises:
        InapplicableError: l 属于 vcrit_ε f 或 f(x(0)) > l
    """
    gap = dist_value_to_vcrit_eps(fn, level, eps, box, resolution)
    if gap <= 0:
        raise InapplicableError(f"{fn.name}: l={level} 属于 vcrit_ε f")
    values = fn.value_batch(curve.states)
    if values[0] > level:
        raise InapplicableError(f"{fn.name}: f(x(0))={values[0]:.6g} > l={level}")
    lip = _curve_lipschitz(curve)
    slack = lip * (lip + eps) * curve.h
    return DecreaseReport(float(level), float(values[1:].max(initial=values[0])), slack, float(gap))
