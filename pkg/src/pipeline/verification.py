"""
验证管线

按套件运行各项数值检查，汇总为 JSON 报告。任一检查失败时报告 passed = false。
"""
import itertools
import json
import logging
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from ..catalog.functions import CATALOG, get_function, list_functions
from ..catalog.critical_sets import check_crit_eps_bounded, vcrit_eps, dist_to_segments
from ..catalog.certify import kl_mr_certificate, growth_exponent_check
from ..polytope.min_norm import min_norm_element, hull_contains
from ..solver.biased_subgradient import run
from ..flow.inclusion import integrate
from ..flow.interpolation import interpolation_defect
from ..flow.descent_checks import weak_lyapunov_check, quantitative_estimate_check, decrease_check
from ..analysis.fluctuation import (
    rho_exponent, sweep, fluctuation, vanishing_step_check, monotone_radius_check
)
from ..analysis.convex import convex_bound, error_bound_check, numeric_lemma_battery
from ..analysis.descent import (
    ekeland_witness, level_repulsion_check, quasi_descent_check, eventual_level_check
)
from ..models.data_types import BiasModel, CheckResult, Polytope, StepSchedule
from ..models.errors import ConfigError, LabError
from .experiment import _load_json, config_hash

logger = logging.getLogger(__name__)

SUITES = (
    "exponents", "numeric-lemma", "polytope", "catalog", "convex", "error-bound",
    "ekeland", "fluctuation", "lyapunov", "interpolation", "repulsion",
)
ORACLE_TOL = 1e-6
EXPONENT_TOL = 1e-15


@dataclass
class VerifyConfig:
    """验证套件参数（缺省值即完整验证规模）"""
    seed: int = 0
    output_path: str = "output/verify"
    # numeric-lemma
    lemma_triples: int = 10_000
    # polytope
    polytope_sets: int = 1000
    # catalog
    catalog_resolution: Optional[int] = None
    # convex
    convex_iterations: int = 10_000
    convex_seeds: int = 5
    # ekeland
    ekeland_triples: int = 100
    # fluctuation
    fluctuation_iterations: int = 100_000
    fluctuation_eps_grid: Tuple[float, ...] = (0.2, 0.1, 0.05, 0.025)
    band_alphas: Tuple[float, ...] = (0.4, 0.04, 0.004)
    vanishing_iterations: int = 10_000
    vanishing_eps: float = 0.05
    monotone_alpha: float = 1e-3
    monotone_iterations: int = 20_000
    monotone_seeds: int = 5
    # lyapunov
    flow_horizon: float = 10.0
    flow_mesh: float = 1e-4
    flow_functions: Tuple[str, ...] = ("power_2", "abs", "double_well")
    flow_eps: Tuple[float, ...] = (0.0, 0.1)
    # interpolation
    interpolation_configs: int = 20
    interpolation_iterations: int = 200
    # repulsion
    repulsion_runs: int = 20
    repulsion_iterations: int = 100_000
    repulsion_alpha: float = 1e-3
    repulsion_eps: float = 0.05
    repulsion_level: float = 0.5

    @classmethod
    def from_dict(cls, config_dict: Dict[str, Any]) -> 'VerifyConfig':
        """从字典创建配置（忽略未知键）"""
        data = {k: v for k, v in config_dict.items() if k in cls.__annotations__}
        for key in ("fluctuation_eps_grid", "band_alphas", "flow_eps"):
            if key in data:
                data[key] = tuple(float(v) for v in data[key])
        if "flow_functions" in data:
            data["flow_functions"] = tuple(data["flow_functions"])
        return cls(**data)

    @classmethod
    def from_json(cls, json_path: str) -> 'VerifyConfig':
        """从JSON文件加载配置"""
        return cls.from_dict(_load_json(json_path))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        for key, value in data.items():
            if isinstance(value, tuple):
                data[key] = list(value)
        return data

    def validate(self) -> None:
        for name in self.flow_functions:
            get_function(name)
        counts = (self.lemma_triples, self.polytope_sets, self.convex_iterations, self.convex_seeds,
                  self.ekeland_triples, self.fluctuation_iterations, self.interpolation_configs,
                  self.interpolation_iterations, self.repulsion_runs, self.repulsion_iterations,
                  self.vanishing_iterations, self.monotone_iterations, self.monotone_seeds)
        if min(counts) < 1:
            raise ConfigError("验证规模参数必须为正整数")
        if not 0 < self.flow_mesh < self.flow_horizon:
            raise ConfigError(f"需要 0 < flow_mesh < flow_horizon: {self.flow_mesh}, {self.flow_horizon}")
        if len(self.fluctuation_eps_grid) < 3:
            raise ConfigError("fluctuation_eps_grid 至少需要 3 个 ε")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"无法序列化: {type(obj)}")


def enumeration_min_norm(V: np.ndarray) -> float:
    """
    穷举活动集的最小范数参考解

    对每个至多 p+1 个顶点的子集求原点在其仿射包上的投影，保留重心坐标非负者。
    """
    n, dim = V.shape
    best = float(np.min(np.linalg.norm(V, axis=1)))
    for size in range(2, min(n, dim + 1) + 1):
        for subset in itertools.combinations(range(n), size):
            S = V[list(subset)]
            B = (S[1:] - S[0]).T
            mu, *_ = np.linalg.lstsq(B, -S[0], rcond=None)
            weights = np.append(1.0 - mu.sum(), mu)
            if np.all(weights >= -1e-12):
                best = min(best, float(np.linalg.norm(S[0] + B @ mu)))
    return best


class VerificationRunner:
    """验证管线"""

    def __init__(self, config: Optional[VerifyConfig] = None, jobs: int = 1):
        self.config = config or VerifyConfig()
        self.config.validate()
        self.jobs = max(1, jobs)
        self.output_dir = Path(self.config.output_path)
        self.digest = config_hash(self.config.to_dict())
        self._suites: Dict[str, Callable[[], List[CheckResult]]] = {
            "exponents": self.exponents,
            "numeric-lemma": self.numeric_lemma,
            "polytope": self.polytope,
            "catalog": self.catalog,
            "convex": self.convex,
            "error-bound": self.error_bound,
            "ekeland": self.ekeland,
            "fluctuation": self.fluctuation,
            "lyapunov": self.lyapunov,
            "interpolation": self.interpolation,
            "repulsion": self.repulsion,
        }

    def run(self, suite: str) -> Dict[str, Any]:
        """
        运行套件并写出 verify_<suite>.json

        Raises:
            ConfigError: 未知套件名
        """
        if suite != "all" and suite not in self._suites:
            raise ConfigError(f"未知验证套件 '{suite}'，可选: {', '.join(SUITES + ('all',))}")
        names = list(SUITES) if suite == "all" else [suite]

        checks: List[CheckResult] = []
        for i, name in enumerate(names, 1):
            logger.info(f"[{i}/{len(names)}] 验证套件 {name}...")
            results = self._suites[name]()
            failed = [r.name for r in results if not r.passed]
            logger.info(f"  {len(results) - len(failed)}/{len(results)} 项通过")
            for r in failed:
                logger.warning(f"  未通过: {r}")
            checks.extend(results)

        report = {
            "suite": suite,
            "config_hash": self.digest,
            "seed": self.config.seed,
            "passed": all(c.passed for c in checks),
            "n_checks": len(checks),
            "n_failed": sum(1 for c in checks if not c.passed),
            "checks": [c.to_dict() for c in checks],
        }
        self.output_dir.mkdir(parents=True, exist_ok=True)
        output_file = self.output_dir / f"verify_{suite}.json"
        with open(output_file, 'w', encoding='utf-8') as f:
            json.dump(report, f, indent=2, ensure_ascii=False, default=_json_default)
        logger.info(f"报告已保存: {output_file}")
        return report

    # ---------- 套件 ----------

    def exponents(self) -> List[CheckResult]:
        """ρ 公式与幂函数恒等式 θ(β+2) = 2 - 1/a"""
        results = []
        for a in (2, 3, 4):
            fn = get_function(f"power_{a}")
            rho = rho_exponent(fn.kl.theta, fn.mr.beta)
            expected_rho = fn.mr.beta / max(fn.kl.theta * (fn.mr.beta + 2.0), 1.0)
            gap = max(abs(rho.product - (2.0 - 1.0 / a)), abs(rho.rho - expected_rho))
            results.append(CheckResult(
                name=f"exponents/power_{a}",
                passed=gap <= EXPONENT_TOL,
                max_violation=gap,
                details={"theta": fn.kl.theta, "beta": fn.mr.beta, "rho": rho.rho,
                         "branch": rho.branch, "product": rho.product},
            ))
        return results

    def numeric_lemma(self) -> List[CheckResult]:
        return [numeric_lemma_battery(self.config.lemma_triples, self.config.seed)]

    def polytope(self) -> List[CheckResult]:
        """Wolfe 最小范数点与穷举活动集参考解比较"""
        rng = np.random.default_rng(self.config.seed)
        worst, failures = 0.0, 0
        for _ in range(self.config.polytope_sets):
            dim = int(rng.integers(2, 4))
            m = int(rng.integers(1, 7))
            V = rng.normal(size=(m, dim)) + rng.normal(scale=1.5, size=dim)
            x = min_norm_element(Polytope(V))
            error = abs(float(np.linalg.norm(x)) - enumeration_min_norm(V))
            inside = m == 1 or hull_contains(Polytope(V), x)
            worst = max(worst, error)
            failures += int(error > ORACLE_TOL or not inside)
        return [CheckResult(
            name="polytope/min_norm_oracle",
            passed=failures == 0,
            max_violation=worst,
            details={"n_sets": self.config.polytope_sets, "n_failures": failures},
        )]

    def catalog(self) -> List[CheckResult]:
        """临界集有界性、增长条件与 KL/MR 常数认证"""
        resolution = self.config.catalog_resolution
        results = []
        for name, fn in CATALOG.items():
            if fn.diagnostic:
                verdict = check_crit_eps_bounded(fn, 0.1, box=[(-100.0, 100.0)] * fn.dim, resolution=resolution)
                results.append(CheckResult(f"catalog/{name}/unbounded_crit", not verdict.bounded,
                                           details=verdict.to_dict()))
                continue
            verdict = check_crit_eps_bounded(fn, 0.1, resolution=resolution)
            results.append(CheckResult(f"catalog/{name}/bounded_crit", verdict.bounded, details=verdict.to_dict()))
            growth = growth_exponent_check(fn, 1.0, resolution=resolution)
            results.append(CheckResult(f"catalog/{name}/growth", growth.passed, details=growth.to_dict()))
            if fn.kl is not None or fn.mr is not None:
                cert = kl_mr_certificate(fn, resolution=resolution)
                violation = max(cert.kl_max_violation or 0.0, cert.mr_max_violation or 0.0)
                results.append(CheckResult(f"catalog/{name}/kl_mr", cert.passed, violation, cert.to_dict()))
        return results

    def convex(self) -> List[CheckResult]:
        """凸情形复杂度界：每个凸函数 × ε ∈ {0, 0.1, 0.5/c} × 种子"""
        cfg = self.config
        K = cfg.convex_iterations
        schedule = StepSchedule(kind="sqrt_horizon", horizon=K)
        steps = schedule.steps(K + 1)
        results = []
        for name, fn in CATALOG.items():
            if not fn.convex or fn.error_bound is None:
                continue
            x0 = np.ones(fn.dim)
            x0_dist = float(fn.dist_to_argmin_batch(x0[None, :])[0])
            for eps in (0.0, 0.1, 0.5 / fn.error_bound.c):
                for seed in range(cfg.seed, cfg.seed + cfg.convex_seeds):
                    kind = "adversarial" if seed == cfg.seed else "random_bounded"
                    traj = run(fn, x0, schedule, BiasModel(kind=kind, epsilon=eps), K, seed=seed)
                    report = convex_bound(fn.lipschitz_on_box, eps, fn.error_bound, x0_dist,
                                          steps, traj.values, fn.min_value)
                    results.append(CheckResult(
                        name=f"convex/{name}/eps={eps:g}/{kind}/seed={seed}",
                        passed=report.verdict,
                        max_violation=max(0.0, -report.margin),
                        details=report.to_dict(),
                    ))

        # abs, ε = 0.5：最小间隙的闭式上界
        fn = get_function("abs")
        traj = run(fn, [1.0], schedule, BiasModel(kind="adversarial", epsilon=0.5), K, seed=cfg.seed)
        report = convex_bound(1.0, 0.5, fn.error_bound, 1.0, steps, traj.values)
        closed_form = (1.0 + 1.5 ** 2) / (0.5 * np.sqrt(K + 1))
        min_gap_ok = report.min_gap <= closed_form + 1e-9
        results.append(CheckResult(
            name="convex/abs/min_gap",
            passed=report.verdict and min_gap_ok,
            max_violation=max(0.0, report.min_gap - closed_form),
            details={**report.to_dict(), "closed_form": closed_form},
        ))
        return results

    def error_bound(self) -> List[CheckResult]:
        return [error_bound_check(fn, resolution=self.config.catalog_resolution)
                for fn in CATALOG.values() if fn.convex and fn.error_bound is not None]

    def ekeland(self) -> List[CheckResult]:
        """一维函数上随机 (fn, x, a) 的 Ekeland 见证点"""
        rng = np.random.default_rng(self.config.seed)
        names = [name for name, fn in CATALOG.items() if fn.dim == 1]
        misses = []
        worst = 0.0
        for _ in range(self.config.ekeland_triples):
            name = names[int(rng.integers(len(names)))]
            x = float(rng.uniform(-4.0, 4.0))
            a = float(rng.uniform(0.2, 0.8))
            result = ekeland_witness(get_function(name), [x], a)
            if not result.found:
                misses.append([name, x, a])
                worst = max(worst, result.norm_shortfall, result.stationarity_excess)
        return [CheckResult(
            name="ekeland/witness",
            passed=not misses,
            max_violation=worst,
            details={"n_triples": self.config.ekeland_triples, "misses": misses[:10]},
        )]

    def fluctuation(self) -> List[CheckResult]:
        """
        power_2 的 ε 扫描（α = ε²/10）、abs 的常数步长带、
        递减步长下步数加倍的尾部值距离，以及半径随 ε 的单调性
        """
        cfg = self.config
        results = []
        fn = get_function("power_2")
        table = sweep(fn, "adversarial", "constant", cfg.fluctuation_eps_grid, (),
                      cfg.fluctuation_iterations, seeds=(cfg.seed,), x0=[1.0],
                      alpha_eps_power=2.0, alpha_coef=0.1, jobs=self.jobs)
        ratio = max(r.radius / r.epsilon for r in table.rows)
        results.append(CheckResult("fluctuation/power_2/radius_le_0.6eps", ratio <= 0.6,
                                   max(0.0, ratio - 0.6), {"max_ratio": ratio}))
        results.append(CheckResult("fluctuation/power_2/slope", bool(table.slope_ok),
                                   details=table.fit_dict()))

        fn = get_function("abs")
        radii = []
        for alpha in cfg.band_alphas:
            traj = run(fn, [0.7371], StepSchedule(kind="constant", alpha=alpha), BiasModel(),
                       cfg.fluctuation_iterations, seed=cfg.seed)
            radii.append(fluctuation(traj, fn, 0.0).radius)
        within = all(r <= alpha for r, alpha in zip(radii, cfg.band_alphas))
        order = np.argsort(cfg.band_alphas)
        monotone = bool(np.all(np.diff(np.asarray(radii)[order]) > 0))
        results.append(CheckResult(
            name="fluctuation/abs/constant_step_band",
            passed=within and monotone,
            max_violation=max(0.0, max(r - a for r, a in zip(radii, cfg.band_alphas))),
            details={"alphas": list(cfg.band_alphas), "radii": radii, "monotone": monotone},
        ))

        for name, fn in CATALOG.items():
            vanishing = vanishing_step_check(fn, cfg.vanishing_eps, cfg.vanishing_iterations, seed=cfg.seed)
            results.append(CheckResult(
                name=f"fluctuation/{name}/vanishing_steps",
                passed=vanishing.passed,
                max_violation=vanishing.excess,
                details=vanishing.to_dict(),
            ))

        for name, x0 in (("power_2", [1.0]), ("double_well", [2.0])):
            mono = monotone_radius_check(get_function(name), cfg.fluctuation_eps_grid, cfg.monotone_alpha,
                                         cfg.monotone_iterations, n_seeds=cfg.monotone_seeds, x0=x0,
                                         jobs=self.jobs)
            results.append(CheckResult(f"fluctuation/{name}/monotone_in_eps", mono.passed,
                                       mono.worst_drop, mono.to_dict()))
        return results

    def lyapunov(self) -> List[CheckResult]:
        """积分曲线上的弱 Lyapunov 不等式、定量估计与下降性"""
        cfg = self.config
        x0_by_name = {"power_2": [1.5], "abs": [1.5], "double_well": [2.5]}
        results = []
        for name in cfg.flow_functions:
            fn = get_function(name)
            x0 = x0_by_name.get(name, np.ones(fn.dim))
            f0 = fn.value(x0)
            for eps in cfg.flow_eps:
                curve = integrate(fn, x0, eps, None, cfg.flow_horizon, cfg.flow_mesh, seed=cfg.seed)
                tag = f"{name}/eps={eps:g}"
                lyap = weak_lyapunov_check(curve, fn, eps)
                results.append(CheckResult(f"lyapunov/{tag}", lyap.passed, lyap.max_violation, lyap.to_dict()))
                try:
                    quant = quantitative_estimate_check(curve, fn, eps, fn.min_value, f0, eps + 0.5)
                    results.append(CheckResult(f"quantitative/{tag}", not quant.violation,
                                               details=quant.to_dict()))
                except LabError as e:
                    results.append(CheckResult(f"quantitative/{tag}", False, details={"error": str(e)}))
                try:
                    dec = decrease_check(curve, fn, eps, f0)
                    results.append(CheckResult(f"decrease/{tag}", dec.passed,
                                               max(0.0, dec.max_value - f0), dec.to_dict()))
                except LabError as e:
                    logger.info(f"{tag}: 跳过下降性检查（{e}）")
        return results

    def interpolation(self) -> List[CheckResult]:
        """随机配置下的插值缺陷上界"""
        cfg = self.config
        rng = np.random.default_rng(cfg.seed)
        names = list_functions(include_diagnostic=False)
        failures, worst = [], 0.0
        for i in range(cfg.interpolation_configs):
            fn = get_function(names[int(rng.integers(len(names)))])
            x0 = rng.uniform(-2.0, 2.0, size=fn.dim)
            alpha = float(10 ** rng.uniform(-3.0, -2.0))
            eps = float(rng.uniform(0.0, 0.2))
            kind = ("none", "adversarial", "random_bounded")[int(rng.integers(3))]
            traj = run(fn, x0, StepSchedule(kind="constant", alpha=alpha), BiasModel(kind=kind, epsilon=eps),
                       cfg.interpolation_iterations, seed=cfg.seed + i)
            report = interpolation_defect(traj, fn, eps)
            worst = max(worst, report.defect - report.bound)
            if not report.passed:
                failures.append({"function": fn.name, "alpha": alpha, "eps": eps, **report.to_dict()})
        return [CheckResult(
            name="interpolation/defect",
            passed=not failures,
            max_violation=max(0.0, worst),
            details={"n_configs": cfg.interpolation_configs, "failures": failures[:5]},
        )]

    def repulsion(self) -> List[CheckResult]:
        """double_well 上正则值排斥、拟下降与长时程下降"""
        cfg = self.config
        fn = get_function("double_well")
        rng = np.random.default_rng(cfg.seed)
        schedule = StepSchedule(kind="constant", alpha=cfg.repulsion_alpha)
        bias = BiasModel(kind="adversarial", epsilon=cfg.repulsion_eps)
        runs = [
            run(fn, [rng.uniform(-3.0, 3.0)], schedule, bias, cfg.repulsion_iterations, seed=cfg.seed + i)
            for i in range(cfg.repulsion_runs)
        ]

        repulsion = level_repulsion_check(fn, cfg.repulsion_level, cfg.repulsion_eps, runs)
        results = [CheckResult("repulsion/double_well", repulsion.passed, details=repulsion.to_dict())]

        quasi = quasi_descent_check(fn, cfg.repulsion_level, None, runs, eps=cfg.repulsion_eps)
        results.append(CheckResult("quasi_descent/double_well", quasi.passed,
                                   max(0.0, quasi.max_excess - quasi.eta), quasi.to_dict()))

        segments = vcrit_eps(fn, cfg.repulsion_eps)
        eligible = [t for t in runs if dist_to_segments(t.values[0], segments) > 0]
        eventual = eventual_level_check(fn, eligible, cfg.repulsion_eps, repulsion.eta)
        results.append(CheckResult("eventual_level/double_well", eventual.passed, details=eventual.to_dict()))
        return results
