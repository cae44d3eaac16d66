# -*- coding: utf-8 -*-
"""
数值模块

提供网络计算所需的最小张量库：
- 张量与反向模式自动微分
- 卷积、池化、批归一化、激活等算子
- Adam 优化器
- 中心差分梯度检验
"""

# 接口与运行时
from .interfaces import (
    AdamState, NumericsError, ShapeMismatchError, GradientError, NonFiniteError,
    EnableDeterministicMode, IsDeterministic, IsGradEnabled, GetWorkingDtype
)

# 张量
from .tensor import (
    Tensor, NoGrad, WorkingPrecision, ZeroGrad, AsTensor,
    Add, Sub, Mul, Div, Neg, Abs, Log, Exp, Sum, Mean,
    Reshape, Transpose, Slice, Concatenate, MatMul
)

# 网络算子
from .functional import (
    Conv1d, Conv2d, MaxPool1dAlong, BatchNorm, Elu, Softplus,
    Softmax, LogSoftmax, Dropout, GuardedDenominator
)

# 优化与检验
from .optimizer import AdamStep, AdamOptimizer
from .gradcheck import GradCheckResult, GradientCheck
from .module import Module

__all__ = [
    'AdamState', 'NumericsError', 'ShapeMismatchError', 'GradientError', 'NonFiniteError',
    'EnableDeterministicMode', 'IsDeterministic', 'IsGradEnabled', 'GetWorkingDtype',
    'Tensor', 'NoGrad', 'WorkingPrecision', 'ZeroGrad', 'AsTensor',
    'Add', 'Sub', 'Mul', 'Div', 'Neg', 'Abs', 'Log', 'Exp', 'Sum', 'Mean',
    'Reshape', 'Transpose', 'Slice', 'Concatenate', 'MatMul',
    'Conv1d', 'Conv2d', 'MaxPool1dAlong', 'BatchNorm', 'Elu', 'Softplus',
    'Softmax', 'LogSoftmax', 'Dropout', 'GuardedDenominator',
    'AdamStep', 'AdamOptimizer', 'GradCheckResult', 'GradientCheck',
    'Module'
]
