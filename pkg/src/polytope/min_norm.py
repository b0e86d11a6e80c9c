"""
多面体最小范数点

Clarke 次微分以顶点凸包表示，本模块求凸包中离原点（或任意点）最近的元素。
主算法为 Wolfe 最小范数点算法（主循环加入顶点，次循环做仿射最小范数与线搜索），
活动集退化时改用单纯形上的加速投影梯度。
"""
import logging
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.linalg import lstsq
from scipy.optimize import linprog

from ..models.data_types import Polytope, as_point
from ..models.errors import InvalidInputError

logger = logging.getLogger(__name__)

DEDUP_TOL = 1e-14
GAP_TOL = 1e-12          # 平方范数下降的收敛容差（按顶点尺度缩放）
WEIGHT_TOL = 1e-15
MAX_MAJOR = 200
FALLBACK_ITERS = 20000


class WolfeSolver:
    """Wolfe 最小范数点算法"""

    @staticmethod
    def deduplicate(vertices: np.ndarray) -> np.ndarray:
        """
        去除重复顶点（容差 1e-14），保留首次出现的顶点以维持索引顺序
        """
        kept = [0]
        for i in range(1, vertices.shape[0]):
            dists = np.linalg.norm(vertices[kept] - vertices[i], axis=1)
            if dists.min() > DEDUP_TOL:
                kept.append(i)
        if len(kept) < vertices.shape[0]:
            logger.debug(f"去除了 {vertices.shape[0] - len(kept)} 个重复顶点")
        return vertices[kept]

    @staticmethod
    def _affine_weights(C: np.ndarray) -> np.ndarray:
        """
        仿射包上的最小范数点系数

        求解 KKT 系统 [[0, 1ᵀ], [1, CCᵀ]] [μ; w] = [1; 0]
        """
        k = C.shape[0]
        M = np.zeros((k + 1, k + 1))
        M[0, 1:] = 1.0
        M[1:, 0] = 1.0
        M[1:, 1:] = C @ C.T
        rhs = np.zeros(k + 1)
        rhs[0] = 1.0
        sol = lstsq(M, rhs)[0]
        return sol[1:]

    @staticmethod
    def solve(V: np.ndarray) -> Tuple[np.ndarray, bool]:
        """
        Wolfe 主/次循环

        Returns:
            (最小范数点, 是否正常收敛)
        """
        scale = max(1.0, float(np.max(np.sum(V * V, axis=1))))
        tol = GAP_TOL * scale

        # 初始点取范数最小的顶点，平局取最小索引
        i0 = int(np.argmin(np.sum(V * V, axis=1)))
        corral = [i0]
        lam = np.array([1.0])
        x = V[i0].copy()

        for _ in range(MAX_MAJOR):
            dots = V @ x
            j = int(np.argmin(dots))
            if x @ x - dots[j] <= tol:
                return x, True
            if j in corral:
                # 数值退化：最优方向上的顶点已在活动集中
                return x, False

            corral.append(j)
            lam = np.append(lam, 0.0)

            for _minor in range(len(V) + 1):
                C = V[corral]
                alpha = WolfeSolver._affine_weights(C)
                if np.all(alpha > WEIGHT_TOL):
                    lam = alpha
                    x = C.T @ lam
                    break

                # 线搜索：沿 lam -> alpha 前进到第一个系数为零处
                neg = (alpha <= WEIGHT_TOL) & (lam - alpha > 0)
                if not np.any(neg):
                    return x, False
                theta = float(np.min(lam[neg] / (lam[neg] - alpha[neg])))
                lam = lam + theta * (alpha - lam)

                drop = np.flatnonzero(lam <= WEIGHT_TOL)
                if drop.size == 0:
                    drop = np.array([int(np.argmin(lam))])
                keep = np.setdiff1d(np.arange(len(corral)), drop)
                corral = [corral[i] for i in keep]
                lam = lam[keep]
                lam = lam / lam.sum()
                x = V[corral].T @ lam
            else:
                return x, False

        return x, False


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """欧氏投影到概率单纯形（排序法）"""
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, n + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def _simplex_fallback(V: np.ndarray) -> np.ndarray:
    """单纯形权重上的 FISTA：min ½‖Vᵀλ‖²"""
    G = V @ V.T
    lip = max(float(np.linalg.eigvalsh(G).max()), 1e-300)
    lam = np.full(V.shape[0], 1.0 / V.shape[0])
    y = lam.copy()
    t = 1.0
    for _ in range(FALLBACK_ITERS):
        lam_next = _project_simplex(y - (G @ y) / lip)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = lam_next + ((t - 1.0) / t_next) * (lam_next - lam)
        if np.linalg.norm(lam_next - lam) <= 1e-16:
            lam = lam_next
            break
        lam, t = lam_next, t_next
    return V.T @ lam


def min_norm_of_vertices(V: np.ndarray) -> np.ndarray:
    """
    顶点数组 (m, p) 的凸包最小范数点

    单顶点和线段直接给出闭式解，其余情况调用 Wolfe 算法。
    """
    if V.shape[0] == 1:
        return V[0].copy()
    if V.shape[0] == 2:
        a, b = V[0], V[1]
        d = b - a
        dd = d @ d
        if dd <= DEDUP_TOL * DEDUP_TOL:
            return a.copy()
        t = min(1.0, max(0.0, -(a @ d) / dd))
        return a + t * d

    V = WolfeSolver.deduplicate(V)
    if V.shape[0] <= 2:
        return min_norm_of_vertices(V)
    x, converged = WolfeSolver.solve(V)
    if not converged:
        logger.warning(f"Wolfe 活动集退化（{V.shape[0]} 个顶点），改用单纯形投影梯度")
        x = _simplex_fallback(V)
    return x


def min_norm_element(P: Polytope) -> np.ndarray:
    """
    凸包中范数最小的元素（原点到多面体的欧氏投影）

    Args:
        P: 多面体

    Returns:
        最小范数点，‖结果‖ = dist(0, P)
    """
    return min_norm_of_vertices(P.vertices)


def _check_dim(P: Polytope, w: np.ndarray) -> None:
    if w.shape[0] != P.dim:
        raise InvalidInputError(f"点维度 {w.shape[0]} 与多面体维度 {P.dim} 不一致")


def project_point(P: Polytope, w: Union[float, Sequence[float], np.ndarray]) -> np.ndarray:
    """argmin_{v∈P} ‖w − v‖，即 w + min_norm(P − w)"""
    w = as_point(w)
    _check_dim(P, w)
    return w + min_norm_of_vertices(P.vertices - w)


def dist_origin(P: Polytope) -> float:
    """dist(0, P)"""
    return float(np.linalg.norm(min_norm_element(P)))


def distance(P: Polytope, w: Union[float, Sequence[float], np.ndarray]) -> float:
    """dist(w, P)"""
    w = as_point(w)
    return float(np.linalg.norm(w - project_point(P, w)))


def hull_contains(P: Polytope, w: Union[float, Sequence[float], np.ndarray]) -> bool:
    """
    线性规划可行性判定 w ∈ conv(vertices)

    求 λ ≥ 0，Σλ = 1，Vᵀλ = w 的可行解。
    """
    w = as_point(w)
    _check_dim(P, w)
    m = P.n_vertices
    A_eq = np.vstack([P.vertices.T, np.ones((1, m))])
    b_eq = np.append(w, 1.0)
    res = linprog(np.zeros(m), A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method='highs')
    return res.status == 0
