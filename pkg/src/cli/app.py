"""
偏差次梯度实验平台 - 命令行工具

子命令: run / sweep / verify / catalog
退出码: 0 成功，1 检查未通过或运行发散，2 配置或用法错误
"""
import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from ..catalog.functions import describe_catalog
from ..pipeline.experiment import ExperimentConfig, ExperimentRunner
from ..pipeline.sweep import SweepConfig, SweepRunner
from ..pipeline.verification import SUITES, VerifyConfig, VerificationRunner
from ..models.errors import CatalogMissError, ConfigError, InvalidInputError, LabError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def setup_logging(verbose: bool = False):
    """配置日志"""
    level = logging.DEBUG if verbose else logging.INFO
    logging.basicConfig(
        level=level,
        format='%(levelname)s: %(message)s'
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description='偏差次梯度法实验平台',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例:
  # 单次运行
  %(prog)s run --config config.json --out output/abs

  # ε 扫描（4 个进程）
  %(prog)s sweep --config configs/sweep_power2.json --jobs 4

  # 验证套件
  %(prog)s verify numeric-lemma
  %(prog)s verify all --config configs/verify_quick.json

  # 列出测试函数
  %(prog)s catalog
        """
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', '-c', type=str, help='配置文件路径（JSON格式）')
    common.add_argument('--out', '-o', type=str, help='输出目录（覆盖配置中的 output_path）')
    common.add_argument('--seed', type=int, help='随机种子（覆盖配置）')
    common.add_argument('--jobs', '-j', type=int, default=1, help='并行进程数（默认: 1）')
    common.add_argument('--verbose', '-v', action='store_true', help='详细输出')

    sub = parser.add_subparsers(dest='command', required=True)
    sub.add_parser('run', parents=[common], help='运行单次实验')
    sub.add_parser('sweep', parents=[common], help='ε/α 扫描与拟合')
    verify = sub.add_parser('verify', parents=[common], help='运行验证套件')
    verify.add_argument('suite', choices=SUITES + ('all',), help='套件名')
    sub.add_parser('catalog', parents=[common], help='列出测试函数及元数据')
    return parser


def cmd_run(args) -> int:
    if not args.config:
        raise ConfigError("run 需要 --config")
    config = ExperimentConfig.from_json(args.config)
    if args.out:
        config = dataclasses.replace(config, output_path=args.out)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)

    results = ExperimentRunner(config).run()
    print("\n" + "=" * 60)
    print(f"运行完成: {config.function}  状态: {results.status}")
    print("=" * 60)
    print(f"输出目录: {results.output_dir.absolute()}")
    print(f"config_hash: {results.config_hash}")
    if results.report:
        print(f"波动半径: {results.report.radius:.6g}")
        print(f"值距离:   {results.report.value_dist:.6g}")
    return EXIT_OK if results.status == "ok" else EXIT_FAILED


def cmd_sweep(args) -> int:
    if not args.config:
        raise ConfigError("sweep 需要 --config")
    config = SweepConfig.from_json(args.config)
    if args.out:
        config = dataclasses.replace(config, output_path=args.out)
    if args.seed is not None:
        config = dataclasses.replace(config, seeds=(args.seed,))

    results = SweepRunner(config, jobs=args.jobs).run()
    table = results.table
    print("\n" + "=" * 60)
    print(f"扫描完成: {config.function}  {len(table.rows)} 个单元")
    print("=" * 60)
    print(f"输出目录: {results.output_dir.absolute()}")
    if table.fitted_slope is not None:
        print(f"拟合斜率: {table.fitted_slope:.4f}  (ρ = {table.rho})")
    print(table.fit_message)
    return EXIT_OK


def cmd_verify(args) -> int:
    config = VerifyConfig.from_json(args.config) if args.config else VerifyConfig()
    if args.out:
        config = dataclasses.replace(config, output_path=args.out)
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)

    report = VerificationRunner(config, jobs=args.jobs).run(args.suite)
    print("\n" + "=" * 60)
    print(f"验证套件 {args.suite}: {report['n_checks'] - report['n_failed']}/{report['n_checks']} 项通过")
    print("=" * 60)
    for check in report["checks"]:
        mark = "PASS" if check["passed"] else "FAIL"
        print(f"  [{mark}] {check['name']}  (max violation {check['max_violation']:.3g})")
    return EXIT_OK if report["passed"] else EXIT_FAILED


def cmd_catalog(args) -> int:
    entries = describe_catalog()
    text = json.dumps(entries, indent=2, ensure_ascii=False)
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "catalog.json").write_text(text, encoding='utf-8')
        logger.info(f"目录已保存: {out_dir / 'catalog.json'}")
    print(text)
    return EXIT_OK


COMMANDS = {
    'run': cmd_run,
    'sweep': cmd_sweep,
    'verify': cmd_verify,
    'catalog': cmd_catalog,
}


def main(argv: Optional[List[str]] = None) -> int:
    """主函数，返回退出码"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    try:
        return COMMANDS[args.command](args)
    except (ConfigError, CatalogMissError, InvalidInputError) as e:
        logging.error(f"配置错误: {e}")
        return EXIT_CONFIG
    except OSError as e:
        logging.error(f"文件读写失败: {e}")
        return EXIT_CONFIG
    except LabError as e:
        logging.error(f"执行失败: {e}")
        if args.verbose:
            raise
        return EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
