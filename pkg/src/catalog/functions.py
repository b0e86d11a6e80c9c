"""
非光滑半代数测试函数目录

目录中的函数均为可分离形式 f(x) = Σ_i φ_i(x_i)，每个分量为偶函数 φ(t) = h(|t|)，
h 在 [0, ∞) 上光滑。于是 Clarke 次微分是各坐标次微分区间的乘积：
    t ≠ 0:  ∂φ(t) = {sign(t)·h'(|t|)}
    t = 0:  ∂φ(0) = [-|h'(0)|, |h'(0)|]
坐标满足 |t| ≤ 1e-12 时视为位于折点上（两侧分支同时激活）。
"""
import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ..models.data_types import (
    Polytope, KLParams, MRParams, ErrorBoundParams, as_point
)
from ..models.errors import CatalogMissError, InvalidInputError

logger = logging.getLogger(__name__)

ACTIVITY_TOL = 1e-12
DEFAULT_HALF_WIDTH = 10.0


@dataclass(frozen=True)
class EvenPiece:
    """
    一维偶函数分量 φ(t) = h(|t|)

    turning 为 h' 在 (0, ∞) 上的驻点（h'' = 0），用于求导数在区间上的极值。
    """
    name: str
    h: Callable[[np.ndarray], np.ndarray]
    dh: Callable[[np.ndarray], np.ndarray]
    turning: Tuple[float, ...] = ()

    @cached_property
    def kink(self) -> bool:
        """原点处是否不可微"""
        return float(self.dh(np.array(0.0))) != 0.0

    def value(self, t: np.ndarray) -> np.ndarray:
        return self.h(np.abs(t))

    def derivative(self, t: np.ndarray) -> np.ndarray:
        """单侧分支导数 sign(t)·h'(|t|)，t = 0 取右侧"""
        t = np.asarray(t, dtype=float)
        sign = np.where(t < 0, -1.0, 1.0)
        return sign * self.dh(np.abs(t))

    def interval(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Clarke 次微分区间 [lo, hi]（向量化）"""
        t = np.asarray(t, dtype=float)
        d = self.derivative(t)
        if not self.kink:
            return d, d
        at_kink = np.abs(t) <= ACTIVITY_TOL
        spread = np.abs(self.dh(np.abs(t)))
        lo = np.where(at_kink, -spread, d)
        hi = np.where(at_kink, spread, d)
        return lo, hi

    def enlarged_interval(self, t: float, radius: float) -> Tuple[float, float]:
        """[t - r, t + r] 上所有点次微分的并的凸包"""
        a, b = t - radius, t + radius
        candidates = [a, b]
        for u in self.turning:
            candidates.extend(s for s in (u, -u) if a <= s <= b)
        values = list(self.derivative(np.array(candidates)))
        if a <= ACTIVITY_TOL and b >= -ACTIVITY_TOL:
            spread = abs(float(self.dh(np.array(0.0))))
            values.extend([-spread, spread])
        return float(min(values)), float(max(values))


# ---------- 分量库 ----------

def _abs_piece() -> EvenPiece:
    return EvenPiece("abs", h=lambda u: u, dh=lambda u: np.ones_like(u, dtype=float))


def _power_piece(a: float) -> EvenPiece:
    return EvenPiece(f"pow{a:g}", h=lambda u: u ** a, dh=lambda u: a * u ** (a - 1))


def _double_well_piece() -> EvenPiece:
    return EvenPiece("well", h=lambda u: (u - 1.0) ** 2, dh=lambda u: 2.0 * (u - 1.0))


def _shifted_square_piece() -> EvenPiece:
    # (|t| + 1)^2
    return EvenPiece("shift_sq", h=lambda u: (u + 1.0) ** 2, dh=lambda u: 2.0 * (u + 1.0))


def _quartic_well_piece() -> EvenPiece:
    # (t^2 - 1)^2
    return EvenPiece(
        "quartic",
        h=lambda u: (u * u - 1.0) ** 2,
        dh=lambda u: 4.0 * u * (u * u - 1.0),
        turning=(1.0 / np.sqrt(3.0),),
    )


def _sqrt_growth_piece() -> EvenPiece:
    # (1 + t^2)^(1/4)
    return EvenPiece(
        "sqrt_growth",
        h=lambda u: (1.0 + u * u) ** 0.25,
        dh=lambda u: 0.5 * u * (1.0 + u * u) ** (-0.75),
        turning=(np.sqrt(2.0),),
    )


@dataclass(frozen=True, eq=False)
class CatalogFunction:
    """
    目录函数：求值、精确 Clarke 次微分与解析临界信息
    """
    name: str
    pieces: Tuple[EvenPiece, ...]
    crit_points: np.ndarray
    lipschitz_on_box: float
    min_value: float
    description: str = ""
    convex: bool = False
    diagnostic: bool = False
    kl: Optional[KLParams] = None
    mr: Optional[MRParams] = None
    error_bound: Optional[ErrorBoundParams] = None
    argmin_points: Optional[np.ndarray] = None
    half_width: float = DEFAULT_HALF_WIDTH
    exponent_source: str = "analytic"

    @property
    def dim(self) -> int:
        return len(self.pieces)

    @property
    def crit_values(self) -> np.ndarray:
        """vcrit f = f(crit f)，升序去重"""
        return np.unique(self.value_batch(self.crit_points))

    @property
    def default_box(self) -> Tuple[Tuple[float, float], ...]:
        return tuple((-self.half_width, self.half_width) for _ in range(self.dim))

    def _point(self, x) -> np.ndarray:
        x = as_point(x)
        if x.shape[0] != self.dim:
            raise InvalidInputError(f"{self.name} 的维度为 {self.dim}，收到 {x.shape[0]} 维输入")
        return x

    # ---------- 求值 ----------

    def value(self, x) -> float:
        x = self._point(x)
        return float(sum(piece.value(x[i]) for i, piece in enumerate(self.pieces)))

    def value_batch(self, X: np.ndarray) -> np.ndarray:
        """批量求值，X 形状 (n, p)"""
        X = np.asarray(X, dtype=float).reshape(-1, self.dim)
        total = np.zeros(X.shape[0])
        for i, piece in enumerate(self.pieces):
            total += piece.value(X[:, i])
        return total

    # ---------- 次微分 ----------

    def clarke_vertices(self, x) -> np.ndarray:
        """Clarke 次微分的顶点（各坐标区间端点的乘积）"""
        x = self._point(x)
        axes = []
        for i, piece in enumerate(self.pieces):
            lo, hi = piece.interval(x[i])
            lo, hi = float(lo), float(hi)
            axes.append((lo,) if lo == hi else (lo, hi))
        return np.array(list(itertools.product(*axes)), dtype=float)

    def clarke(self, x) -> Polytope:
        return Polytope(self.clarke_vertices(x))

    def enlarged_bounds(self, x, radius: float) -> Tuple[np.ndarray, np.ndarray]:
        """放大次微分的逐坐标区间 [lo, hi]"""
        if radius < 0:
            raise InvalidInputError(f"半径必须非负: {radius}")
        x = self._point(x)
        bounds = [piece.enlarged_interval(float(x[i]), radius) for i, piece in enumerate(self.pieces)]
        return np.array([b[0] for b in bounds]), np.array([b[1] for b in bounds])

    def enlarged_clarke(self, x, radius: float) -> Polytope:
        """
        半径 radius 球内所有点 Clarke 次微分的并所含于的多面体
        """
        lo, hi = self.enlarged_bounds(x, radius)
        axes = [(a,) if a == b else (a, b) for a, b in zip(lo, hi)]
        return Polytope(np.array(list(itertools.product(*axes)), dtype=float))

    def min_norm_batch(self, X: np.ndarray) -> np.ndarray:
        """批量最小范数次梯度（区间乘积上的投影即逐坐标截断）"""
        X = np.asarray(X, dtype=float).reshape(-1, self.dim)
        out = np.empty_like(X)
        for i, piece in enumerate(self.pieces):
            lo, hi = piece.interval(X[:, i])
            out[:, i] = np.clip(0.0, lo, hi)
        return out

    def min_norm_point(self, x: np.ndarray) -> np.ndarray:
        """单点最小范数次梯度：折点处区间对称，截断结果为 0"""
        out = np.empty(self.dim)
        for i, piece in enumerate(self.pieces):
            t = float(x[i])
            if piece.kink and abs(t) <= ACTIVITY_TOL:
                out[i] = 0.0
            else:
                out[i] = (-1.0 if t < 0 else 1.0) * float(piece.dh(abs(t)))
        return out

    def stationarity_batch(self, X: np.ndarray) -> np.ndarray:
        """批量计算 dist(0, ∂f(x))"""
        return np.linalg.norm(self.min_norm_batch(X), axis=1)

    def gradient(self, x) -> np.ndarray:
        """单侧分支梯度（光滑点处即梯度）"""
        x = self._point(x)
        return np.array([float(p.derivative(x[i])) for i, p in enumerate(self.pieces)])

    # ---------- 临界集 ----------

    def dist_to_crit(self, x) -> float:
        x = self._point(x)
        return float(np.min(np.linalg.norm(self.crit_points - x, axis=1)))

    def dist_to_crit_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float).reshape(-1, self.dim)
        diffs = X[:, None, :] - self.crit_points[None, :, :]
        return np.min(np.linalg.norm(diffs, axis=2), axis=1)

    def dist_to_argmin_batch(self, X: np.ndarray) -> np.ndarray:
        if self.argmin_points is None:
            raise InvalidInputError(f"{self.name} 不是凸函数，没有 argmin 描述")
        X = np.asarray(X, dtype=float).reshape(-1, self.dim)
        diffs = X[:, None, :] - self.argmin_points[None, :, :]
        return np.min(np.linalg.norm(diffs, axis=2), axis=1)

    def dist_value_to_vcrit(self, values: np.ndarray) -> np.ndarray:
        """dist(v, vcrit f)，vcrit f 为有限集"""
        values = np.asarray(values, dtype=float)
        return np.min(np.abs(values[..., None] - self.crit_values), axis=-1)

    def metadata(self) -> Dict[str, Any]:
        """JSON 可序列化的函数描述"""
        def _params(obj):
            return None if obj is None else {k: getattr(obj, k) for k in obj.__dataclass_fields__}

        return {
            "name": self.name,
            "dim": self.dim,
            "description": self.description,
            "convex": self.convex,
            "diagnostic": self.diagnostic,
            "box": [list(b) for b in self.default_box],
            "lipschitz_on_box": self.lipschitz_on_box,
            "min_value": self.min_value,
            "crit_points": self.crit_points.tolist(),
            "crit_values": self.crit_values.tolist(),
            "argmin_points": None if self.argmin_points is None else self.argmin_points.tolist(),
            "kl": _params(self.kl),
            "mr": _params(self.mr),
            "error_bound": _params(self.error_bound),
            "exponent_source": self.exponent_source,
        }


# ---------- 目录 ----------

def _power_entry(a: int) -> CatalogFunction:
    origin = np.zeros((1, 1))
    return CatalogFunction(
        name=f"power_{a}",
        pieces=(_power_piece(float(a)),),
        crit_points=origin,
        lipschitz_on_box=a * DEFAULT_HALF_WIDTH ** (a - 1),
        min_value=0.0,
        description=f"|x|^{a}",
        convex=True,
        kl=KLParams(theta=1.0 - 1.0 / a, c=1.0 / a, valid_band=1.0),
        mr=MRParams(beta=1.0 / (a - 1), c=a ** (-1.0 / (a - 1)), valid_band=1.0),
        error_bound=ErrorBoundParams(a=1.0 / a, c=2.0),
        argmin_points=origin,
    )


def _build_catalog() -> Dict[str, CatalogFunction]:
    origin1 = np.zeros((1, 1))
    origin2 = np.zeros((1, 2))
    entries: List[CatalogFunction] = [
        CatalogFunction(
            name="abs",
            pieces=(_abs_piece(),),
            crit_points=origin1,
            lipschitz_on_box=1.0,
            min_value=0.0,
            description="|x|",
            convex=True,
            kl=KLParams(theta=0.0, c=1.0, valid_band=0.5),
            mr=MRParams(beta=1.0, c=1.0, valid_band=0.5),
            error_bound=ErrorBoundParams(a=1.0, c=1.0),
            argmin_points=origin1,
        ),
        *(_power_entry(a) for a in (2, 3, 4)),
        CatalogFunction(
            name="double_well",
            pieces=(_double_well_piece(),),
            crit_points=np.array([[-1.0], [0.0], [1.0]]),
            lipschitz_on_box=2.0 * (DEFAULT_HALF_WIDTH - 1.0),
            min_value=0.0,
            description="(|x| - 1)^2",
            kl=KLParams(theta=0.5, c=0.5, valid_band=0.5),
            mr=MRParams(beta=1.0, c=0.5, valid_band=0.5),
        ),
        CatalogFunction(
            name="l1_2d",
            pieces=(_abs_piece(), _abs_piece()),
            crit_points=origin2,
            lipschitz_on_box=float(np.sqrt(2.0)),
            min_value=0.0,
            description="|x| + |y|",
            convex=True,
            kl=KLParams(theta=0.0, c=1.0, valid_band=0.5),
            mr=MRParams(beta=1.0, c=1.0, valid_band=0.5),
            error_bound=ErrorBoundParams(a=1.0, c=1.0),
            argmin_points=origin2,
        ),
        CatalogFunction(
            name="max_quad",
            # max(x² + (y-1)², x² + (y+1)²) = x² + (|y| + 1)²
            pieces=(_power_piece(2.0), _shifted_square_piece()),
            crit_points=origin2,
            lipschitz_on_box=float(np.hypot(2.0 * DEFAULT_HALF_WIDTH, 2.0 * (DEFAULT_HALF_WIDTH + 1.0))),
            min_value=1.0,
            description="max(x^2 + (y-1)^2, x^2 + (y+1)^2)",
            convex=True,
            kl=KLParams(theta=0.5, c=0.5, valid_band=1.0),
            mr=MRParams(beta=1.0, c=0.5, valid_band=1.0),
            error_bound=ErrorBoundParams(a=0.5, c=2.0),
            argmin_points=origin2,
        ),
        CatalogFunction(
            name="ridge_nc",
            pieces=(_abs_piece(), _quartic_well_piece()),
            crit_points=np.array([[0.0, -1.0], [0.0, 0.0], [0.0, 1.0]]),
            lipschitz_on_box=float(np.hypot(1.0, 4.0 * DEFAULT_HALF_WIDTH * (DEFAULT_HALF_WIDTH ** 2 - 1.0))),
            min_value=0.0,
            description="|x| + (y^2 - 1)^2",
            kl=KLParams(theta=0.5, c=0.5, valid_band=0.5, source="certified"),
            mr=MRParams(beta=1.0, c=2.0, valid_band=0.5, source="certified"),
            exponent_source="certified",
        ),
        CatalogFunction(
            name="sqrt_growth",
            pieces=(_sqrt_growth_piece(),),
            crit_points=origin1,
            # max |h'| 在 |t| = √2 处取得
            lipschitz_on_box=float(0.5 * np.sqrt(2.0) * 3.0 ** (-0.75)),
            min_value=1.0,
            description="(1 + x^2)^(1/4)，代替 sqrt(|x|)：增长阶相同且原点处光滑；临界集有界性的反例（仅用于诊断）",
            diagnostic=True,
            exponent_source="none",
        ),
    ]
    return {fn.name: fn for fn in entries}


CATALOG: Dict[str, CatalogFunction] = _build_catalog()


def get_function(name: str) -> CatalogFunction:
    """按名称取目录函数"""
    try:
        return CATALOG[name]
    except KeyError:
        logger.debug(f"目录中没有 '{name}'")
        raise CatalogMissError(name, CATALOG.keys()) from None


def list_functions(include_diagnostic: bool = True) -> List[str]:
    return [name for name, fn in CATALOG.items() if include_diagnostic or not fn.diagnostic]


def describe_catalog() -> List[Dict[str, Any]]:
    """目录清单（命令行 catalog 子命令输出）"""
    return [fn.metadata() for fn in CATALOG.values()]


# 模块级便捷函数，与目录对象方法一一对应

def evaluate(fn: CatalogFunction, x) -> float:
    return fn.value(x)


def clarke(fn: CatalogFunction, x) -> Polytope:
    return fn.clarke(x)


def enlarged_clarke(fn: CatalogFunction, x, radius: float) -> Polytope:
    return fn.enlarged_clarke(x, radius)


def dist_to_crit(fn: CatalogFunction, x) -> float:
    return fn.dist_to_crit(x)
