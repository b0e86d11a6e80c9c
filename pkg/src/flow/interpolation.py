"""
离散轨迹的仿射插值

γ(τ_k) = x_k，τ_k = Σ_{i<k} α_i，γ 在 [τ_k, τ_{k+1}] 上仿射。
插值曲线重采样到均匀网格后可与积分曲线一样参与各项检查。
"""
import logging
from dataclasses import dataclass, asdict
from typing import Any, Dict, Optional

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import interp1d

from ..catalog.functions import CatalogFunction
from ..polytope.min_norm import distance
from ..solver.biased_subgradient import select_subgradient
from ..models.data_types import Curve, Trajectory
from ..models.errors import InvalidInputError

logger = logging.getLogger(__name__)

POINTS_PER_STEP = 4
MAX_NODES = 200_000
SEGMENT_SAMPLES = 9   # 每段 Simpson 采样点（奇数）
MESH_SLACK_FACTOR = 10.0


class AffineInterpolator:
    """仿射插值器"""

    @staticmethod
    def _validate_input(traj: Trajectory) -> np.ndarray:
        """校验轨迹并返回节点时间 τ_k"""
        if len(traj) == 0:
            raise InvalidInputError("轨迹为空，无法插值")
        if traj.iterations != len(traj) - 1:
            raise InvalidInputError(
                f"轨迹长度不一致: {len(traj)} 个点, {traj.iterations} 个步长"
            )
        if np.any(traj.steps <= 0):
            raise InvalidInputError("步长必须为正")
        return np.concatenate([[0.0], np.cumsum(traj.steps)])

    @staticmethod
    def default_mesh(traj: Trajectory) -> float:
        """缺省网格：最小步长的 1/4，节点总数不超过 MAX_NODES"""
        horizon = traj.horizon
        return max(float(traj.steps.min()) / POINTS_PER_STEP, horizon / MAX_NODES)

    @staticmethod
    def segment_index(taus: np.ndarray, t: np.ndarray) -> np.ndarray:
        """t 所在的段号 k（τ_k ≤ t < τ_{k+1}，末端归入最后一段）"""
        idx = np.searchsorted(taus, t, side='right') - 1
        return np.clip(idx, 0, len(taus) - 2)

    @staticmethod
    def interpolate(traj: Trajectory, fn: Optional[CatalogFunction] = None,
                    h: Optional[float] = None) -> Curve:
        """
        构造仿射插值曲线并重采样到均匀网格

        Args:
            traj: 离散轨迹
            fn: 目录函数；给出时按段记录最小范数选择与速度扰动 s_k - v_k
            h: 网格步长，缺省见 default_mesh

        Returns:
            均匀网格曲线
        """
        taus = AffineInterpolator._validate_input(traj)
        dim = traj.dim

        if traj.iterations == 0:
            zeros = np.zeros((1, dim))
            return Curve(np.zeros(1), traj.points.copy(), zeros, zeros.copy(), h=h or 0.0,
                         function=traj.function)

        h = h or AffineInterpolator.default_mesh(traj)
        n = int(np.floor(taus[-1] / h + 1e-9)) + 1
        times = np.arange(n) * h

        f = interp1d(taus, traj.points, kind='linear', axis=0)
        states = f(np.clip(times, 0.0, taus[-1]))

        seg = AffineInterpolator.segment_index(taus, times)
        velocities = traj.oracle_vectors[seg]
        if fn is not None:
            seg_selections = np.array([select_subgradient(fn, x) for x in traj.points[:-1]])
            selections = seg_selections[seg]
            bias_vectors = selections - velocities
        else:
            selections = velocities.copy()
            bias_vectors = np.zeros_like(velocities)

        logger.debug(f"插值曲线: {traj.iterations} 段 -> {n} 个网格点 (h={h:.3g})")
        return Curve(
            times=times,
            states=states,
            selections=selections,
            bias_vectors=bias_vectors,
            h=float(h),
            function=traj.function,
        )


def interpolate(trajectory: Trajectory, fn: Optional[CatalogFunction] = None,
                h: Optional[float] = None) -> Curve:
    return AffineInterpolator.interpolate(trajectory, fn, h)


@dataclass
class DefectReport:
    """插值缺陷 ∫ dist((γ, γ̇), graph Z) dt 与其上界"""
    defect: float
    bound: float
    max_step: float
    horizon: float
    lipschitz: float
    epsilon: float
    mesh_slack: float

    @property
    def passed(self) -> bool:
        return self.defect <= self.bound

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


def interpolation_defect(trajectory: Trajectory, fn: CatalogFunction, eps: float,
                         h: Optional[float] = None) -> DefectReport:
    """
    插值曲线到 Z = -∂f + B̄(0, ε) 图像的距离积分

    第 k 段上以基点 (x_k, z) 作为图像中的候选点，其中 z 为 -v_k 在 Z(x_k) 上的投影：
        dist² ≤ (s‖v_k‖)² + max(0, dist(v_k, ∂f(x_k)) - ε)²,  s ∈ [0, α_k]
    每段用 Simpson 公式积分。
    """
    AffineInterpolator._validate_input(trajectory)
    if trajectory.iterations == 0:
        return DefectReport(0.0, 0.0, 0.0, 0.0, fn.lipschitz_on_box, float(eps), 0.0)

    steps = trajectory.steps
    speeds = np.linalg.norm(trajectory.oracle_vectors, axis=1)
    excess = np.array([
        max(0.0, distance(fn.clarke(x), v) - eps)
        for x, v in zip(trajectory.points[:-1], trajectory.oracle_vectors)
    ])

    # (K, m) 采样：s_j = α_k·j/(m-1)
    frac = np.linspace(0.0, 1.0, SEGMENT_SAMPLES)
    s = steps[:, None] * frac[None, :]
    integrand = np.sqrt((s * speeds[:, None]) ** 2 + excess[:, None] ** 2)
    per_segment = simpson(integrand, x=s, axis=1)
    defect = float(per_segment.sum())

    max_step = float(steps.max())
    horizon = float(steps.sum())
    mesh = h or AffineInterpolator.default_mesh(trajectory)
    mesh_slack = MESH_SLACK_FACTOR * mesh * horizon
    bound = max_step * horizon * (fn.lipschitz_on_box + eps) + mesh_slack
    if defect > bound:
        logger.warning(f"{fn.name}: 插值缺陷 {defect:.3g} 超过上界 {bound:.3g}")
    return DefectReport(defect, bound, max_step, horizon, fn.lipschitz_on_box, float(eps), mesh_slack)
