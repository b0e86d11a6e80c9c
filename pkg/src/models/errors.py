"""
异常定义

库代码只负责抛出异常，由命令行入口统一转换为退出码。
"""


class LabError(Exception):
    """所有实验库异常的基类"""


class InvalidInputError(LabError, ValueError):
    """输入非法（维度不一致、参数越界等）"""


class CatalogMissError(LabError, KeyError):
    """测试函数目录中不存在该名称"""

    def __init__(self, name: str, valid_names):
        self.name = name
        self.valid_names = sorted(valid_names)
        super().__init__(
            f"未知函数 '{name}'，可选: {', '.join(self.valid_names)}"
        )

    def __str__(self) -> str:
        return self.args[0]


class ConfigError(LabError, ValueError):
    """配置校验失败"""


class DivergedError(LabError, RuntimeError):
    """迭代发散，携带已生成的部分轨迹"""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class EmptyCriticalSetError(LabError, ValueError):
    """网格近似的 ε-临界集为空"""


class BoundUndefinedError(LabError, ValueError):
    """凸情形复杂度界无定义（a = 1 且 εc ≥ 1）"""


class InapplicableError(LabError, ValueError):
    """引理前提不满足，检查不适用"""
