"""
波动半径分析

- ρ = β / max{θ(β+2), 1}
- 轨迹尾部 sup dist(x_k, crit f) 与 sup dist(f(x_k), vcrit_ε f)
- ε/α 网格扫描与双对数拟合（单侧比较斜率与 ρ）
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from ..catalog.functions import CatalogFunction, get_function
from ..catalog.critical_sets import GridScanner, default_resolution, dist_value_to_vcrit_eps
from ..solver.biased_subgradient import run
from ..models.data_types import (
    BiasModel, FluctuationReport, StepSchedule, SweepRow, SweepTable, Trajectory, as_point
)
from ..models.errors import DivergedError, InvalidInputError

logger = logging.getLogger(__name__)

SLOPE_MARGIN = 0.1


@dataclass(frozen=True)
class RhoResult:
    """ρ 及 max 中取到的分支"""
    rho: float
    branch: str      # "kl": θ(β+2) > 1；"unit": θ(β+2) ≤ 1
    product: float   # θ(β+2)


def rho_exponent(theta: float, beta: float) -> RhoResult:
    """ρ = β / max{θ(β+2), 1}"""
    if not 0.0 <= theta < 1.0:
        raise InvalidInputError(f"θ 必须在 [0,1) 内: {theta}")
    if not beta > 0:
        raise InvalidInputError(f"β 必须为正: {beta}")
    product = theta * (beta + 2.0)
    if product > 1.0:
        return RhoResult(beta / product, "kl", product)
    return RhoResult(beta, "unit", product)


def rho_for(fn: CatalogFunction) -> Optional[float]:
    if fn.kl is None or fn.mr is None:
        return None
    return rho_exponent(fn.kl.theta, fn.mr.beta).rho


def fluctuation(traj: Trajectory, fn: CatalogFunction, eps: float,
                burn_in_fraction: float = 0.5, alpha: Union[float, str, None] = None,
                box=None, resolution: Optional[int] = None) -> FluctuationReport:
    """
    轨迹尾部（去掉前 burn_in_fraction 比例）的波动

    Args:
        traj: 轨迹（长度至少 10/burn_in_fraction）
        fn: 目录函数
        eps: 偏差半径
        alpha: 步长标签；缺省时常数步长取其值，否则为 "schedule"
    """
    if not 0.0 < burn_in_fraction < 1.0:
        raise InvalidInputError(f"burn_in_fraction 必须在 (0,1) 内: {burn_in_fraction}")
    n = len(traj)
    if n < 10.0 / burn_in_fraction:
        raise InvalidInputError(f"轨迹过短: {n} < {10.0 / burn_in_fraction:.0f}")

    burn_in = int(n * burn_in_fraction)
    tail = traj.points[burn_in:]
    radius = float(np.max(fn.dist_to_crit_batch(tail)))
    value_dist = float(np.max(dist_value_to_vcrit_eps(fn, traj.values[burn_in:], eps, box, resolution)))

    if alpha is None:
        if traj.iterations and np.all(traj.steps == traj.steps[0]):
            alpha = float(traj.steps[0])
        else:
            alpha = "schedule"
    return FluctuationReport(
        burn_in=burn_in,
        radius=radius,
        value_dist=value_dist,
        epsilon=float(eps),
        alpha=alpha,
        function=fn.name,
        n_points=n,
    )


# ---------- 扫描 ----------

@dataclass(frozen=True)
class SweepCell:
    """扫描单元参数（可跨进程传递）"""
    function: str
    x0: Tuple[float, ...]
    epsilon: float
    alpha: float
    seed: int
    bias_kind: str
    schedule_kind: str
    power: Optional[float]
    iterations: int
    burn_in_fraction: float
    x0_jitter: float = 0.0

    def schedule(self) -> StepSchedule:
        if self.schedule_kind == "power":
            return StepSchedule(kind="power", alpha=self.alpha, power=self.power)
        return StepSchedule(kind=self.schedule_kind, alpha=self.alpha)

    def bias(self) -> BiasModel:
        direction = None
        if self.bias_kind == "fixed":
            direction = tuple([1.0] + [0.0] * (len(self.x0) - 1))
        return BiasModel(kind=self.bias_kind, epsilon=self.epsilon, direction=direction)

    def start(self) -> np.ndarray:
        x0 = np.asarray(self.x0, dtype=float)
        if self.x0_jitter > 0:
            rng = np.random.default_rng(self.seed)
            x0 = x0 + self.x0_jitter * rng.uniform(-1.0, 1.0, size=x0.shape)
        return x0


def run_cell(cell: SweepCell) -> SweepRow:
    """运行单个扫描单元；发散时标记而不抛出"""
    fn = get_function(cell.function)
    try:
        traj = run(fn, cell.start(), cell.schedule(), cell.bias(), cell.iterations, seed=cell.seed)
        report = fluctuation(traj, fn, cell.epsilon, cell.burn_in_fraction, alpha=cell.alpha)
    except DivergedError as e:
        logger.warning(f"单元 ε={cell.epsilon:g}, α={cell.alpha:g}, seed={cell.seed} 发散: {e}")
        return SweepRow(cell.epsilon, cell.alpha, cell.seed, float('nan'), float('nan'), status="diverged")
    logger.debug(f"单元 ε={cell.epsilon:g}, α={cell.alpha:g}, seed={cell.seed}: 半径 {report.radius:.4g}")
    return SweepRow(cell.epsilon, cell.alpha, cell.seed, report.radius, report.value_dist)


def sweep_cells(fn: CatalogFunction, bias_kind: str, schedule_kind: str,
                eps_grid: Sequence[float], alpha_grid: Sequence[float], K: int,
                seeds: Sequence[int] = (0,), x0=None, power: Optional[float] = None,
                alpha_eps_power: Optional[float] = None, alpha_coef: float = 1.0,
                burn_in_fraction: float = 0.5, x0_jitter: float = 0.0) -> List[SweepCell]:
    """
    展开扫描网格

    alpha_eps_power 给出时，每个 ε 的步长为 alpha_coef·ε^alpha_eps_power（忽略 alpha_grid）。
    """
    if x0 is None:
        x0 = np.ones(fn.dim)
    x0 = tuple(float(v) for v in as_point(x0))
    cells = []
    for eps in eps_grid:
        if alpha_eps_power is not None:
            alphas = [alpha_coef * eps ** alpha_eps_power]
        else:
            alphas = list(alpha_grid)
        for alpha in alphas:
            for seed in seeds:
                cells.append(SweepCell(
                    function=fn.name, x0=x0, epsilon=float(eps), alpha=float(alpha),
                    seed=int(seed), bias_kind=bias_kind, schedule_kind=schedule_kind,
                    power=power, iterations=int(K), burn_in_fraction=burn_in_fraction,
                    x0_jitter=x0_jitter,
                ))
    return cells


def execute_cells(cells: Sequence[SweepCell], jobs: int = 1) -> List[SweepRow]:
    """执行扫描单元，结果按 (ε 降序, α 降序, seed) 排序"""
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(c) for c in cells]
    return sorted(rows, key=lambda r: (-r.epsilon, -r.alpha, r.seed))


def fit_sweep(table: SweepTable) -> SweepTable:
    """
    log 半径对 log ε 的线性拟合

    每个 ε 取最小 α 的单元（多个种子取中位数）；ε ≤ 0、发散或半径为 0 的单元不参与拟合。
    不同 ε 少于 3 个时拒绝拟合。
    """
    usable = [r for r in table.rows if r.status == "ok" and r.epsilon > 0]
    by_eps = {}
    for eps in sorted({r.epsilon for r in usable}, reverse=True):
        cells = [r for r in usable if r.epsilon == eps]
        alpha_min = min(r.alpha for r in cells)
        by_eps[eps] = float(np.median([r.radius for r in cells if r.alpha == alpha_min]))

    if len(by_eps) < 3:
        table.fit_message = f"拟合被拒绝: 只有 {len(by_eps)} 个有效 ε（至少需要 3 个）"
        logger.warning(table.fit_message)
        return table

    eps_values = np.array(list(by_eps.keys()))
    radii = np.array(list(by_eps.values()))
    span = np.log10(eps_values.max() / eps_values.min())
    if span < 1.0:
        logger.warning(f"ε 网格跨度 {span:.2f} 个数量级，不足 1 个数量级，拟合仅供参考")

    positive = radii > 0
    if positive.sum() < 3:
        table.fit_message = "拟合被拒绝: 半径为正的 ε 少于 3 个"
        logger.warning(table.fit_message)
    else:
        fit = stats.linregress(np.log(eps_values[positive]), np.log(radii[positive]))
        table.fitted_slope = float(fit.slope)
        table.fitted_C = float(np.exp(fit.intercept))

    if table.rho is not None:
        table.bound_C = float(np.max(radii / eps_values ** table.rho))
        if table.fitted_slope is not None:
            table.slope_ok = table.fitted_slope >= table.rho - SLOPE_MARGIN
            table.bound_ok = bool(np.all(radii <= table.fitted_C * eps_values ** table.rho * (1 + 1e-9)))
            table.fit_message = "与 ε^ρ 标度一致" if table.consistent else "与 ε^ρ 标度不一致"
    return table


def sweep(fn: CatalogFunction, bias_kind: str, schedule_family: str,
          eps_grid: Sequence[float], alpha_grid: Sequence[float], K: int,
          jobs: int = 1, **cell_options) -> SweepTable:
    """
    ε/α 扫描

    Args:
        fn: 目录函数
        bias_kind: 偏差类型
        schedule_family: constant / one_over_k / power
        eps_grid: ε 网格
        alpha_grid: α 网格
        K: 每个单元的迭代次数
        jobs: 并行进程数
        cell_options: 见 sweep_cells
    """
    if len(eps_grid) == 0:
        raise InvalidInputError("ε 网格不能为空")
    cells = sweep_cells(fn, bias_kind, schedule_family, eps_grid, alpha_grid, K, **cell_options)
    logger.info(f"扫描 {fn.name}: {len(cells)} 个单元，{jobs} 个进程")
    rows = execute_cells(cells, jobs)
    table = SweepTable(rows=rows, function=fn.name, bias_kind=bias_kind, rho=rho_for(fn))
    return fit_sweep(table)


# ---------- 递减步长与单调性 ----------

VANISHING_POWER = 0.6
VANISHING_RATIO_TOL = 1e-3
MONOTONE_JITTER = 0.05


@dataclass
class VanishingStepReport:
    """α_k = alpha/(k+1)^power 下 K 与 2K 步的尾部值距离"""
    function: str
    epsilon: float
    iterations: int
    value_dist_K: float
    value_dist_2K: float
    grid_floor: float       # 网格近似 vcrit_ε f 的分辨率下限

    @property
    def ratio(self) -> float:
        if self.value_dist_K == 0.0:
            return 1.0 if self.value_dist_2K == 0.0 else float('inf')
        return self.value_dist_2K / self.value_dist_K

    @property
    def excess(self) -> float:
        """超出 max(比值容差, 网格下限) 的部分"""
        limit = max(self.value_dist_K * (1.0 + VANISHING_RATIO_TOL), self.grid_floor)
        return max(0.0, self.value_dist_2K - limit)

    @property
    def passed(self) -> bool:
        return self.excess == 0.0

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["ratio"] = self.ratio
        data["passed"] = self.passed
        return data


def _prefix(traj: Trajectory, K: int) -> Trajectory:
    return Trajectory(
        points=traj.points[:K + 1],
        values=traj.values[:K + 1],
        oracle_vectors=traj.oracle_vectors[:K],
        steps=traj.steps[:K],
        seed=traj.seed,
        function=traj.function,
    )


def vanishing_step_check(fn: CatalogFunction, eps: float, K: int, bias_kind: str = "adversarial",
                         alpha: float = 0.1, power: float = VANISHING_POWER, x0=None,
                         seed: int = 0) -> VanishingStepReport:
    """
    递减步长下，步数加倍后尾部 dist(f(x_k), vcrit_ε f) 不增大

    跑一条 2K 步轨迹，前 K 步即 K 步的运行；两者都去掉前一半再取尾部。
    """
    x0 = np.full(fn.dim, 0.5) if x0 is None else as_point(x0)
    schedule = StepSchedule(kind="power", alpha=alpha, power=power)
    bias = BiasModel(kind=bias_kind, epsilon=eps, direction=tuple([1.0] + [0.0] * (fn.dim - 1)))
    traj = run(fn, x0, schedule, bias, 2 * K, seed=seed)
    short = fluctuation(_prefix(traj, K), fn, eps, alpha="schedule")
    full = fluctuation(traj, fn, eps, alpha="schedule")

    tail_stationarity = float(fn.stationarity_batch(traj.points[full.burn_in:]).max())
    cell = GridScanner.cell_size(fn.default_box, default_resolution(fn.dim))
    report = VanishingStepReport(fn.name, float(eps), int(K), short.value_dist, full.value_dist,
                                 cell * (tail_stationarity + eps))
    logger.debug(f"{fn.name}: 递减步长 K={K} 值距离 {report.value_dist_K:.3g} → {report.value_dist_2K:.3g}")
    return report


@dataclass
class MonotoneReport:
    """固定 α 下各 ε 的中位数波动半径（按 ε 升序）"""
    function: str
    alpha: float
    epsilons: List[float]
    median_radii: List[float]
    n_seeds: int

    @property
    def worst_drop(self) -> float:
        """相邻 ε 之间半径的最大相对下降"""
        drops = [max(0.0, 1.0 - b / a) for a, b in zip(self.median_radii, self.median_radii[1:]) if a > 0]
        return max(drops, default=0.0)

    @property
    def passed(self) -> bool:
        return self.worst_drop <= MONOTONE_JITTER

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["worst_drop"] = self.worst_drop
        data["passed"] = self.passed
        return data


def monotone_radius_check(fn: CatalogFunction, eps_grid: Sequence[float], alpha: float, K: int,
                          bias_kind: str = "adversarial", n_seeds: int = 5, x0=None,
                          x0_jitter: float = 0.05, jobs: int = 1) -> MonotoneReport:
    """
    固定函数、偏差类型与 α 时，波动半径随 ε 不减（容许 5% 的采样抖动，比较多种子中位数）

    发散单元不参与中位数。
    """
    cells = sweep_cells(fn, bias_kind, "constant", eps_grid, (alpha,), K, seeds=range(n_seeds),
                        x0=x0, x0_jitter=x0_jitter)
    rows = execute_cells(cells, jobs)
    epsilons = sorted({r.epsilon for r in rows})
    medians = []
    for eps in epsilons:
        radii = [r.radius for r in rows if r.epsilon == eps and r.status == "ok"]
        medians.append(float(np.median(radii)) if radii else float('nan'))
    return MonotoneReport(fn.name, float(alpha), epsilons, medians, n_seeds)
