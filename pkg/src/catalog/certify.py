"""
KL / MR 常数的网格认证

在带域 f⁻¹(vcrit_ε̄ f) 的网格点上测量使
    dist(f(x), vcrit f)^θ ≤ c·dist(0, ∂f(x))          (KL)
    dist(x, crit f) ≤ c·dist(0, ∂f(x))^β              (MR)
成立的最小常数 c，并与目录中存储的常数比较。约定 0^0 = 0。
"""
import logging
from dataclasses import dataclass, asdict
from typing import Any, Dict, Optional

import numpy as np

from .functions import CatalogFunction
from .critical_sets import GridScanner, _normalize_box, default_resolution, dist_to_segments, vcrit_eps
from ..models.errors import InapplicableError

logger = logging.getLogger(__name__)

CHECK_TOL = 1e-9


def _kl_lhs(value_dist: np.ndarray, theta: float) -> np.ndarray:
    """dist^θ，约定 0^0 = 0"""
    safe = np.where(value_dist > 0, value_dist, 1.0)
    return np.where(value_dist > 0, safe ** theta, 0.0)


@dataclass
class CertificateReport:
    """常数认证结果"""
    function: str
    eps_bar: float
    n_band_points: int
    kl_theta: Optional[float] = None
    kl_c_stored: Optional[float] = None
    kl_c_measured: Optional[float] = None
    kl_max_violation: Optional[float] = None
    mr_beta: Optional[float] = None
    mr_c_stored: Optional[float] = None
    mr_c_measured: Optional[float] = None
    mr_max_violation: Optional[float] = None

    @property
    def kl_ok(self) -> bool:
        return self.kl_max_violation is None or self.kl_max_violation <= CHECK_TOL

    @property
    def mr_ok(self) -> bool:
        return self.mr_max_violation is None or self.mr_max_violation <= CHECK_TOL

    @property
    def passed(self) -> bool:
        return self.kl_ok and self.mr_ok

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.update(kl_ok=self.kl_ok, mr_ok=self.mr_ok, passed=self.passed)
        return data


def band_points(fn: CatalogFunction, eps_bar: float, box=None, resolution: Optional[int] = None) -> np.ndarray:
    """网格上满足 f(x) ∈ vcrit_ε̄ f 的点"""
    box = _normalize_box(fn, box)
    resolution = resolution or default_resolution(fn.dim)
    segments = vcrit_eps(fn, eps_bar, box, resolution)
    nodes = GridScanner.nodes(box, resolution)
    in_band = dist_to_segments(fn.value_batch(nodes), segments) <= 0.0
    return nodes[in_band]


def _smallest_constant(lhs: np.ndarray, rhs_unit: np.ndarray) -> float:
    """使 lhs ≤ c·rhs_unit 成立的最小 c；rhs_unit = 0 而 lhs > 0 时为无穷"""
    positive = lhs > 0
    if not np.any(positive):
        return 0.0
    with np.errstate(divide='ignore'):
        ratios = np.where(rhs_unit[positive] > 0, lhs[positive] / rhs_unit[positive], np.inf)
    return float(ratios.max())


def kl_mr_certificate(fn: CatalogFunction, eps_bar: Optional[float] = None, box=None,
                      resolution: Optional[int] = None) -> CertificateReport:
    """
    在带域上认证 (KL)/(MR) 常数

    Args:
        fn: 目录函数（需带 kl 或 mr 参数）
        eps_bar: 带域参数，缺省使用存储的 valid_band
    """
    if fn.kl is None and fn.mr is None:
        raise InapplicableError(f"{fn.name} 没有 KL/MR 参数，无法认证")

    if eps_bar is None:
        eps_bar = (fn.kl or fn.mr).valid_band
    X = band_points(fn, eps_bar, box, resolution)
    stat = fn.stationarity_batch(X)
    report = CertificateReport(function=fn.name, eps_bar=float(eps_bar), n_band_points=int(X.shape[0]))

    if fn.kl is not None:
        lhs = _kl_lhs(fn.dist_value_to_vcrit(fn.value_batch(X)), fn.kl.theta)
        report.kl_theta = fn.kl.theta
        report.kl_c_stored = fn.kl.c
        report.kl_c_measured = _smallest_constant(lhs, stat)
        report.kl_max_violation = float(np.max(lhs - fn.kl.c * stat, initial=0.0))

    if fn.mr is not None:
        lhs = fn.dist_to_crit_batch(X)
        rhs_unit = stat ** fn.mr.beta
        report.mr_beta = fn.mr.beta
        report.mr_c_stored = fn.mr.c
        report.mr_c_measured = _smallest_constant(lhs, rhs_unit)
        report.mr_max_violation = float(np.max(lhs - fn.mr.c * rhs_unit, initial=0.0))

    logger.debug(
        f"{fn.name}: 带域 {report.n_band_points} 点，KL c={report.kl_c_measured}，MR c={report.mr_c_measured}"
    )
    return report


@dataclass
class GrowthReport:
    """增长条件 liminf f(x)/‖x‖^β > 0 的壳层估计"""
    function: str
    beta: float
    radius: float
    min_ratio: float

    @property
    def passed(self) -> bool:
        return self.min_ratio > 0

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed
        return data


def growth_exponent_check(fn: CatalogFunction, beta: float, box=None,
                          resolution: Optional[int] = None) -> GrowthReport:
    """
    在盒子外壳上估计 min f(x)/‖x‖^β

    增长条件成立时 crit_ε f 对足够小的 ε 有界。
    """
    box = _normalize_box(fn, box)
    resolution = resolution or default_resolution(fn.dim)
    nodes = GridScanner.nodes(box, resolution)
    lows = np.array([lo for lo, _ in box])
    highs = np.array([hi for _, hi in box])
    on_shell = np.any(np.isclose(nodes, lows) | np.isclose(nodes, highs), axis=1)
    shell = nodes[on_shell]
    norms = np.linalg.norm(shell, axis=1)
    ratios = fn.value_batch(shell) / norms ** beta
    return GrowthReport(fn.name, float(beta), float(norms.min()), float(ratios.min()))
