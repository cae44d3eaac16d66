# -*- coding: utf-8 -*-
"""
数值模块接口定义
定义张量库的数据结构、运行时开关与异常类
"""

import os
import threading
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np


#region 运行时开关

# BLAS 线程池相关环境变量，确定性模式下固定为单线程
_BLAS_THREAD_VARS = (
    'OMP_NUM_THREADS',
    'OPENBLAS_NUM_THREADS',
    'MKL_NUM_THREADS',
    'VECLIB_MAXIMUM_THREADS',
    'NUMEXPR_NUM_THREADS',
)


# 参数与激活的存储精度
FLOAT_DTYPE = np.float32


class _RuntimeState(threading.local):
    """线程局部的运行时状态"""

    def __init__(self):
        self.GradEnabled = True
        self.WorkingDtype = FLOAT_DTYPE


_runtime = _RuntimeState()
_deterministic = False


def IsGradEnabled() -> bool:
    """当前线程是否记录计算图"""
    return _runtime.GradEnabled


def SetGradEnabled(enabled: bool) -> None:
    """设置当前线程是否记录计算图"""
    _runtime.GradEnabled = enabled


def GetWorkingDtype():
    """当前线程中算子输出与梯度使用的浮点类型"""
    return _runtime.WorkingDtype


def SetWorkingDtype(dtype) -> None:
    """设置当前线程的计算精度，只接受 float32 与 float64"""
    dtype = np.dtype(dtype).type
    if dtype not in (np.float32, np.float64):
        raise ValueError(f"不支持的计算精度: {dtype}")
    _runtime.WorkingDtype = dtype


def PinBlasThreads() -> None:
    """将 BLAS 线程数固定为 1

    只有在 numpy 首次导入之前调用才对已加载的 BLAS 生效，
    因此进程入口会在解析参数前调用它。
    """
    for name in _BLAS_THREAD_VARS:
        os.environ[name] = '1'


def EnableDeterministicMode(enabled: bool = True) -> None:
    """开启或关闭确定性模式"""
    global _deterministic
    _deterministic = enabled
    if enabled:
        PinBlasThreads()


def IsDeterministic() -> bool:
    """是否处于确定性模式"""
    return _deterministic

#endregion


#region 数据结构定义

@dataclass
class AdamState:
    """Adam 优化器状态

    一阶、二阶矩按参数名存放，形状与所跟踪的参数一致。
    """
    LearningRate: float = 0.001
    Beta1: float = 0.9
    Beta2: float = 0.999
    Epsilon: float = 1e-8
    StepCount: int = 0
    FirstMoment: Dict[str, np.ndarray] = field(default_factory=dict)
    SecondMoment: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.LearningRate <= 0:
            raise ValueError(f"学习率必须为正: {self.LearningRate}")
        if not (0.0 < self.Beta1 < 1.0 and 0.0 < self.Beta2 < 1.0):
            raise ValueError(f"beta 必须位于 (0,1): {self.Beta1}, {self.Beta2}")
        if self.Epsilon <= 0:
            raise ValueError(f"epsilon 必须为正: {self.Epsilon}")

#endregion


#region 异常类

class NumericsError(Exception):
    """数值模块异常基类"""

    def __init__(self, message: str, error_code: Optional[int] = None):
        super().__init__(message)
        self._error_code = error_code

    @property
    def ErrorCode(self) -> Optional[int]:
        return self._error_code


class ShapeMismatchError(NumericsError):
    """算子形状不兼容"""

    def __init__(self, opName: str, shapeA, shapeB, detail: str = ""):
        message = f"{opName}: 形状不兼容 {tuple(shapeA)} 与 {tuple(shapeB)}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)
        self.OpName = opName
        self.Shapes = (tuple(shapeA), tuple(shapeB))


class GradientError(NumericsError):
    """梯度缺失或反向传播用法错误"""
    pass


class NonFiniteError(NumericsError):
    """算子产生了非有限值"""
    pass

#endregion
