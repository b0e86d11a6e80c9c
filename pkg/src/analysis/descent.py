"""
离散下降性质：Ekeland 见证点、正则值排斥、拟下降与长时程下降
"""
import logging
from dataclasses import dataclass, asdict, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..catalog.functions import CatalogFunction
from ..catalog.critical_sets import GridScanner, _normalize_box, default_resolution, vcrit_eps, dist_to_segments
from ..models.data_types import Trajectory, as_point
from ..models.errors import InapplicableError, InvalidInputError

logger = logging.getLogger(__name__)

WITNESS_RESOLUTION = {1: 4001, 2: 201}
VALUE_TOL = 1e-12


@dataclass
class EkelandResult:
    """Ekeland 见证点搜索结果"""
    found: bool
    y: Optional[List[float]]
    best_candidate: List[float]
    norm_shortfall: float      # max(0, ‖x‖ - ‖x‖^a - ‖y‖)，允许一个网格单元
    stationarity_excess: float  # dist(0,∂f(y))·‖x‖^a - (f(x) - inf f)
    radius: float              # ‖x‖^a
    cell: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def ekeland_witness(fn: CatalogFunction, x, a: float, resolution: Optional[int] = None) -> EkelandResult:
    """
    在以 x 为中心、半径 ‖x‖^a 的球上穷举网格，寻找满足
        ‖y‖ ≥ ‖x‖ - ‖x‖^a                      （允许一个网格单元的误差）
        dist(0, ∂f(y))·‖x‖^a ≤ f(x) - inf f
    的 y；目录中的临界点若落在球内也作为候选。

    未找到不是错误，结果中给出最优候选。
    """
    if not 0.0 < a < 1.0:
        raise InvalidInputError(f"a 必须在 (0,1) 内: {a}")
    x = as_point(x)
    norm_x = float(np.linalg.norm(x))
    r = norm_x ** a
    gap = fn.value(x) - fn.min_value

    resolution = resolution or WITNESS_RESOLUTION.get(fn.dim, 101)
    if resolution % 2 == 0:
        resolution += 1
    if r > 0:
        box = tuple((float(c - r), float(c + r)) for c in x)
        nodes = GridScanner.nodes(box, resolution)
        cell = GridScanner.cell_size(box, resolution)
        nodes = nodes[np.linalg.norm(nodes - x, axis=1) <= r + cell]
    else:
        nodes = x[None, :]
        cell = 0.0
    crit_in_ball = fn.crit_points[np.linalg.norm(fn.crit_points - x, axis=1) <= r]
    candidates = np.vstack([nodes, crit_in_ball])

    shortfall = np.maximum(norm_x - r - np.linalg.norm(candidates, axis=1) - cell, 0.0)
    excess = fn.stationarity_batch(candidates) * r - gap
    ok = (shortfall <= 0.0) & (excess <= VALUE_TOL * max(1.0, abs(gap)))

    score = np.maximum(shortfall, excess)
    best = int(np.argmin(score))
    found = bool(ok.any())
    pick = int(np.flatnonzero(ok)[0]) if found else best
    return EkelandResult(
        found=found,
        y=candidates[pick].tolist() if found else None,
        best_candidate=candidates[best].tolist(),
        norm_shortfall=float(shortfall[pick]),
        stationarity_excess=float(excess[pick]),
        radius=float(r),
        cell=float(cell),
    )


def _tail(traj: Trajectory, tail_fraction: float) -> np.ndarray:
    start = int(len(traj) * (1.0 - tail_fraction))
    return traj.values[min(start, len(traj) - 1):]


@dataclass
class RepulsionReport:
    """正则值排斥检查结果"""
    level: float
    eta: float
    eta_uncertainty: float
    branches: List[str] = field(default_factory=list)   # above / below / violation
    robust: List[bool] = field(default_factory=list)     # 在 η + 不确定度下仍成立
    tail_min: List[float] = field(default_factory=list)
    tail_max: List[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(b != "violation" for b in self.branches)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


def level_repulsion_check(fn: CatalogFunction, level: float, eps: float, runs: Sequence[Trajectory],
                          tail_fraction: float = 0.5, box=None,
                          resolution: Optional[int] = None) -> RepulsionReport:
    """
    检查每条轨迹尾部满足 inf f > l + 2η 或 sup f < l - 2η，η = dist(l, vcrit_ε f)/16

    η 由网格近似的 vcrit_ε f 计算，网格单元对应的值误差计入 η 的不确定度。

    Raises:
        InapplicableError: l 属于（网格近似的）vcrit_ε f
    """
    box = _normalize_box(fn, box)
    resolution = resolution or default_resolution(fn.dim)
    segments = vcrit_eps(fn, eps, box, resolution)
    gap = float(dist_to_segments(level, segments))
    if gap <= 0:
        raise InapplicableError(f"{fn.name}: l={level} 属于 vcrit_ε f")

    eta = gap / 16.0
    uncertainty = fn.lipschitz_on_box * GridScanner.cell_size(box, resolution) / 16.0
    report = RepulsionReport(level=float(level), eta=eta, eta_uncertainty=uncertainty)
    for traj in runs:
        tail = _tail(traj, tail_fraction)
        lo, hi = float(tail.min()), float(tail.max())
        if lo > level + 2 * eta:
            branch, robust = "above", lo > level + 2 * (eta + uncertainty)
        elif hi < level - 2 * eta:
            branch, robust = "below", hi < level - 2 * (eta + uncertainty)
        else:
            branch, robust = "violation", False
        report.branches.append(branch)
        report.robust.append(bool(robust))
        report.tail_min.append(lo)
        report.tail_max.append(hi)

    if not report.passed:
        logger.warning(f"{fn.name}: l={level} 的排斥性在 {report.branches.count('violation')} 条轨迹上不成立")
    return report


@dataclass
class QuasiDescentReport:
    """拟下降检查：f(x₀) ≤ l 的轨迹始终满足 f(x_k) ≤ l + η 且有界"""
    level: float
    eta: float
    n_checked: int
    n_skipped: int
    max_excess: float        # max_k f(x_k) - l
    max_norm: float

    @property
    def passed(self) -> bool:
        return self.max_excess <= self.eta and np.isfinite(self.max_norm)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = bool(self.passed)
        return data


def quasi_descent_check(fn: CatalogFunction, level: float, eta: Optional[float],
                        runs: Sequence[Trajectory], eps: float = 0.0, box=None,
                        resolution: Optional[int] = None) -> QuasiDescentReport:
    """
    Args:
        eta: 允许的上升量；为 None 时取 dist(l, vcrit_ε f)/16

    Raises:
        InapplicableError: l 属于 vcrit_ε f
    """
    segments = vcrit_eps(fn, eps, box, resolution)
    gap = float(dist_to_segments(level, segments))
    if gap <= 0:
        raise InapplicableError(f"{fn.name}: l={level} 属于 vcrit_ε f")
    eta = gap / 16.0 if eta is None else eta

    checked = [t for t in runs if t.values[0] <= level]
    max_excess = max((float(t.values.max()) - level for t in checked), default=-np.inf)
    max_norm = max((float(np.linalg.norm(t.points, axis=1).max()) for t in checked), default=0.0)
    return QuasiDescentReport(float(level), float(eta), len(checked), len(runs) - len(checked),
                              max_excess, max_norm)


@dataclass
class EventualLevelReport:
    """长时程下降：f(x_k) ≤ f(x₀) + η 且尾部 f(x_k) ≤ c + η"""
    eta: float
    start_values: List[float] = field(default_factory=list)
    target_levels: List[float] = field(default_factory=list)   # c
    max_values: List[float] = field(default_factory=list)
    tail_max: List[float] = field(default_factory=list)
    passed_runs: List[bool] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.passed_runs)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


def eventual_level_check(fn: CatalogFunction, runs: Sequence[Trajectory], eps: float, eta: float,
                         tail_fraction: float = 0.5, box=None,
                         resolution: Optional[int] = None) -> EventualLevelReport:
    """
    c 为 f(x₀) 之下第一个 ε-临界值 sup{v ∈ vcrit_ε f : v ≤ f(x₀)}

    Raises:
        InapplicableError: 某条轨迹的 f(x₀) 属于 vcrit_ε f，或其下方没有 ε-临界值
    """
    segments = vcrit_eps(fn, eps, box, resolution)
    report = EventualLevelReport(eta=float(eta))
    for traj in runs:
        v0 = float(traj.values[0])
        if dist_to_segments(v0, segments) <= 0:
            raise InapplicableError(f"{fn.name}: f(x₀)={v0:.6g} 属于 vcrit_ε f")
        below = [hi for lo, hi in segments if hi <= v0]
        if not below:
            raise InapplicableError(f"{fn.name}: f(x₀)={v0:.6g} 之下没有 ε-临界值")
        c = max(below)
        tail_max = float(_tail(traj, tail_fraction).max())
        overall = float(traj.values.max())
        report.start_values.append(v0)
        report.target_levels.append(c)
        report.max_values.append(overall)
        report.tail_max.append(tail_max)
        report.passed_runs.append(overall <= v0 + eta and tail_max <= c + eta)
    return report
