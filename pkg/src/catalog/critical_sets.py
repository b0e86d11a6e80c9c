"""
ε-临界集的网格近似

crit_ε f = {x : dist(0, ∂f(x)) ≤ ε}，vcrit_ε f = f(crit_ε f)。
vcrit_ε f 按网格连通分量拆分为有限个区间（每个分量映射为 [min f, max f]）。
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .functions import ACTIVITY_TOL, CatalogFunction, get_function
from ..models.errors import EmptyCriticalSetError, InvalidInputError

logger = logging.getLogger(__name__)

CRIT_TOL = 1e-12
DEFAULT_RESOLUTION = {1: 4001, 2: 801}

Box = Tuple[Tuple[float, float], ...]


def default_resolution(dim: int) -> int:
    return DEFAULT_RESOLUTION.get(dim, 101)


def _normalize_box(fn: CatalogFunction, box: Optional[Sequence]) -> Box:
    if box is None:
        return fn.default_box
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    if box.shape[0] == 1 and fn.dim > 1:
        box = np.repeat(box, fn.dim, axis=0)
    if box.shape[0] != fn.dim:
        raise InvalidInputError(f"网格范围维度 {box.shape[0]} 与函数维度 {fn.dim} 不一致")
    if np.any(box[:, 1] <= box[:, 0]) or not np.all(np.isfinite(box)):
        raise InvalidInputError(f"网格范围必须有界且非退化: {box.tolist()}")
    return tuple((float(lo), float(hi)) for lo, hi in box)


class GridScanner:
    """在盒子网格上扫描 dist(0, ∂f)"""

    @staticmethod
    def axes(box: Box, resolution: int) -> List[np.ndarray]:
        if resolution < 2:
            raise InvalidInputError(f"每个坐标轴至少需要 2 个网格点: {resolution}")
        return [np.linspace(lo, hi, resolution) for lo, hi in box]

    @staticmethod
    def nodes(box: Box, resolution: int) -> np.ndarray:
        """网格节点 (resolution^p, p)，按 C 顺序排列"""
        mesh = np.meshgrid(*GridScanner.axes(box, resolution), indexing='ij')
        return np.stack([m.ravel() for m in mesh], axis=1)

    @staticmethod
    def cell_size(box: Box, resolution: int) -> float:
        """网格单元对角线长度"""
        widths = np.array([hi - lo for lo, hi in box]) / (resolution - 1)
        return float(np.linalg.norm(widths))

    @staticmethod
    def crit_mask(fn: CatalogFunction, eps: float, box: Box, resolution: int) -> np.ndarray:
        """形状为 (resolution,)*p 的布尔掩码"""
        nodes = GridScanner.nodes(box, resolution)
        stat = fn.stationarity_batch(nodes)
        return (stat <= eps + CRIT_TOL).reshape((resolution,) * fn.dim)

    @staticmethod
    def analytic_in_box(fn: CatalogFunction, box: Box) -> np.ndarray:
        """落在盒子内的解析临界点（网格节点未必恰好落在折点上）"""
        lo = np.array([b[0] for b in box])
        hi = np.array([b[1] for b in box])
        inside = np.all((fn.crit_points >= lo) & (fn.crit_points <= hi), axis=1)
        return fn.crit_points[inside]


def crit_eps_grid(fn: CatalogFunction, eps: float, box=None, resolution: Optional[int] = None) -> np.ndarray:
    """
    网格上的 ε-临界点，并入盒子内的解析临界点

    Returns:
        满足 dist(0, ∂f(x)) ≤ ε 的点 (n, p)
    """
    if eps < 0:
        raise InvalidInputError(f"ε 必须非负: {eps}")
    box = _normalize_box(fn, box)
    resolution = resolution or default_resolution(fn.dim)
    nodes = GridScanner.nodes(box, resolution)
    stat = fn.stationarity_batch(nodes)
    hits = nodes[stat <= eps + CRIT_TOL]
    analytic = GridScanner.analytic_in_box(fn, box)
    if hits.shape[0]:
        gaps = np.linalg.norm(analytic[:, None, :] - hits[None, :, :], axis=2).min(axis=1)
        analytic = analytic[gaps > ACTIVITY_TOL]
    return np.vstack([hits, analytic])


@lru_cache(maxsize=256)
def _segments_cached(name: str, eps: float, box: Box, resolution: int) -> Tuple[Tuple[float, float], ...]:
    fn = get_function(name)
    mask = GridScanner.crit_mask(fn, eps, box, resolution)
    analytic_values = fn.value_batch(GridScanner.analytic_in_box(fn, box))
    if not mask.any() and analytic_values.size == 0:
        raise EmptyCriticalSetError(
            f"{name} 在 ε={eps} 下网格近似的临界集为空（分辨率 {resolution}）"
        )

    structure = ndimage.generate_binary_structure(fn.dim, fn.dim)
    labels, n_components = ndimage.label(mask, structure=structure)
    values = fn.value_batch(GridScanner.nodes(box, resolution)).reshape(mask.shape)
    index = np.arange(1, n_components + 1)
    lows = np.atleast_1d(ndimage.minimum(values, labels, index=index)) if n_components else np.empty(0)
    highs = np.atleast_1d(ndimage.maximum(values, labels, index=index)) if n_components else np.empty(0)
    lows = np.concatenate([lows, analytic_values])
    highs = np.concatenate([highs, analytic_values])

    # 合并重叠区间
    segments: List[List[float]] = []
    for lo, hi in sorted(zip(lows, highs)):
        if segments and lo <= segments[-1][1]:
            segments[-1][1] = max(segments[-1][1], float(hi))
        else:
            segments.append([float(lo), float(hi)])
    logger.debug(f"{name}: ε={eps} 临界集 {n_components} 个连通分量，合并为 {len(segments)} 个区间")
    return tuple((lo, hi) for lo, hi in segments)


def vcrit_eps(fn: CatalogFunction, eps: float, box=None, resolution: Optional[int] = None) -> List[Tuple[float, float]]:
    """
    vcrit_ε f 的区间表示（升序、互不相交）

    Raises:
        EmptyCriticalSetError: 网格上没有 ε-临界点
    """
    if eps < 0:
        raise InvalidInputError(f"ε 必须非负: {eps}")
    box = _normalize_box(fn, box)
    resolution = resolution or default_resolution(fn.dim)
    return list(_segments_cached(fn.name, float(eps), box, int(resolution)))


def dist_to_segments(v, segments: Sequence[Tuple[float, float]]) -> np.ndarray:
    """点（或数组）到区间并集的距离"""
    v = np.asarray(v, dtype=float)
    lo = np.array([s[0] for s in segments])
    hi = np.array([s[1] for s in segments])
    gaps = np.maximum(lo - v[..., None], 0.0) + np.maximum(v[..., None] - hi, 0.0)
    return gaps.min(axis=-1)


def dist_value_to_vcrit_eps(fn: CatalogFunction, v, eps: float, box=None,
                            resolution: Optional[int] = None):
    """dist(v, vcrit_ε f)，vcrit_ε f 由网格近似"""
    segments = vcrit_eps(fn, eps, box, resolution)
    d = dist_to_segments(v, segments)
    return float(d) if np.ndim(d) == 0 else d


@dataclass
class BoundednessVerdict:
    """crit_ε f 有界性的网格证据"""
    function: str
    epsilon: float
    bounded: bool
    witnesses: np.ndarray = field(default_factory=lambda: np.empty((0, 1)))
    box: Box = ()

    def to_dict(self):
        return {
            "function": self.function,
            "epsilon": self.epsilon,
            "bounded": self.bounded,
            "n_witnesses": int(self.witnesses.shape[0]),
            "witnesses": self.witnesses[:10].tolist(),
            "box": [list(b) for b in self.box],
        }


def check_crit_eps_bounded(fn: CatalogFunction, eps: float, box=None,
                           resolution: Optional[int] = None) -> BoundednessVerdict:
    """
    有界性检查：盒子边界壳层上的网格点都不属于 crit_ε f 时判为有界

    Returns:
        判定与壳层上的 ε-临界见证点
    """
    box = _normalize_box(fn, box)
    resolution = resolution or default_resolution(fn.dim)
    mask = GridScanner.crit_mask(fn, eps, box, resolution)

    shell = np.zeros_like(mask)
    for axis in range(fn.dim):
        idx = [slice(None)] * fn.dim
        idx[axis] = 0
        shell[tuple(idx)] = True
        idx[axis] = -1
        shell[tuple(idx)] = True

    nodes = GridScanner.nodes(box, resolution)
    witnesses = nodes[(mask & shell).ravel()]
    bounded = witnesses.shape[0] == 0
    if not bounded:
        logger.info(f"{fn.name}: ε={eps} 时边界上有 {witnesses.shape[0]} 个 ε-临界点，临界集可能无界")
    return BoundednessVerdict(fn.name, float(eps), bounded, witnesses, box)
