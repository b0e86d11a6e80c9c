"""
凸情形的复杂度界、误差界与数值引理
"""
import logging
from dataclasses import dataclass, asdict
from typing import Any, Dict, Optional, Sequence

import numpy as np

from ..catalog.functions import CatalogFunction
from ..catalog.critical_sets import GridScanner, _normalize_box, default_resolution
from ..models.data_types import CheckResult, ErrorBoundParams
from ..models.errors import BoundUndefinedError, InvalidInputError

logger = logging.getLogger(__name__)

BOUND_TOL = 1e-9
ERROR_BOUND_TOL = 1e-9
LEMMA_TOL = 1e-12


@dataclass
class ConvexBoundReport:
    """
    (2 - a - εc)·Σα_i(f_i - f*)/Σα_i ≤ (1 - a)(εc)^{1/(1-a)} + (‖x₀ - x*‖² + (L+ε)²Σα_i²)/Σα_i
    """
    lhs: float
    rhs: float
    factor: float                 # 2 - a - εc
    weighted_gap: float           # Σα_i(f_i - f*)/Σα_i
    min_gap: float                # min_i f_i - f*
    min_gap_bound: Optional[float]

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def verdict(self) -> bool:
        return self.lhs <= self.rhs + BOUND_TOL

    @property
    def min_gap_ok(self) -> Optional[bool]:
        if self.min_gap_bound is None:
            return None
        return self.min_gap <= self.min_gap_bound + BOUND_TOL

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data.update(margin=self.margin, verdict=self.verdict, min_gap_ok=self.min_gap_ok)
        return data


def convex_bound(L: float, eps: float, eb: ErrorBoundParams, x0_dist: float,
                 steps: Sequence[float], values: Sequence[float],
                 min_value: float = 0.0) -> ConvexBoundReport:
    """
    由一次运行的步长与函数值计算凸情形界的两侧

    steps 与 values 逐项对应（i = 0..k）。

    Raises:
        BoundUndefinedError: a = 1 且 εc ≥ 1
    """
    steps = np.asarray(steps, dtype=float)
    values = np.asarray(values, dtype=float)
    if steps.shape != values.shape or steps.size == 0:
        raise InvalidInputError(f"步长与函数值长度不一致: {steps.shape} vs {values.shape}")

    ec = eps * eb.c
    if eb.a == 1.0:
        if ec >= 1.0:
            raise BoundUndefinedError(f"a = 1 且 εc = {ec:g} ≥ 1，界无定义")
        bias_term = 0.0
    else:
        bias_term = (1.0 - eb.a) * ec ** (1.0 / (1.0 - eb.a))

    total = steps.sum()
    gaps = values - min_value
    weighted_gap = float(np.dot(steps, gaps) / total)
    factor = 2.0 - eb.a - ec
    rhs = bias_term + (x0_dist ** 2 + (L + eps) ** 2 * np.dot(steps, steps)) / total
    min_gap_bound = float(rhs / factor) if factor > 0 else None
    report = ConvexBoundReport(
        lhs=float(factor * weighted_gap),
        rhs=float(rhs),
        factor=float(factor),
        weighted_gap=weighted_gap,
        min_gap=float(gaps.min()),
        min_gap_bound=min_gap_bound,
    )
    logger.debug(f"凸界: lhs={report.lhs:.6g}, rhs={report.rhs:.6g}, min gap={report.min_gap:.3g}")
    return report


def error_bound_check(fn: CatalogFunction, grid: Optional[np.ndarray] = None,
                      eb: Optional[ErrorBoundParams] = None, box=None,
                      resolution: Optional[int] = None) -> CheckResult:
    """
    max_x dist(x, argmin f) - c/2((f(x) - min f)^a + (f(x) - min f))，≤ 1e-9 为通过
    """
    eb = eb or fn.error_bound
    if eb is None or fn.argmin_points is None:
        raise InvalidInputError(f"{fn.name} 没有误差界参数或 argmin 描述")
    if grid is None:
        box = _normalize_box(fn, box)
        grid = GridScanner.nodes(box, resolution or default_resolution(fn.dim))

    gap = np.maximum(fn.value_batch(grid) - fn.min_value, 0.0)
    violation = fn.dist_to_argmin_batch(grid) - 0.5 * eb.c * (gap ** eb.a + gap)
    worst = int(np.argmax(violation))
    max_violation = float(violation[worst])
    return CheckResult(
        name=f"error_bound/{fn.name}",
        passed=max_violation <= ERROR_BOUND_TOL,
        max_violation=max_violation,
        details={"a": eb.a, "c": eb.c, "n_points": int(grid.shape[0]),
                 "worst_point": grid[worst].tolist()},
    )


def numeric_lemma_check(s: float, t: float, delta: float) -> bool:
    """
    g(δ) = sδ^t - δ ≤ -(1 - t)(δ - s^{1/(1-t)})，相对容差 1e-12
    """
    if not s > 0 or not 0.0 < t < 1.0 or delta < 0:
        raise InvalidInputError(f"参数越界: s={s}, t={t}, δ={delta}")
    with np.errstate(over='ignore'):
        touch = np.power(s, 1.0 / (1.0 - t))
        g = s * delta ** t - delta
        bound = -(1.0 - t) * (delta - touch)
    scale = max(1.0, delta, s * delta ** t)
    return bool(g <= bound + LEMMA_TOL * scale)


def numeric_lemma_battery(n: int = 10_000, seed: int = 0) -> CheckResult:
    """随机三元组 s ∈ (0,10], t ∈ (0,1), δ ∈ [0,100]"""
    rng = np.random.default_rng(seed)
    s = 10.0 - 10.0 * rng.random(n)           # (0, 10]
    t = rng.uniform(np.nextafter(0.0, 1.0), 1.0, n)
    delta = rng.uniform(0.0, 100.0, n)
    failures = [i for i in range(n) if not numeric_lemma_check(s[i], t[i], delta[i])]
    return CheckResult(
        name="numeric_lemma",
        passed=not failures,
        max_violation=float(len(failures)),
        details={"n_triples": n, "n_failures": len(failures),
                 "first_failures": [[s[i], t[i], delta[i]] for i in failures[:5]]},
    )
