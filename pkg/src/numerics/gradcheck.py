# -*- coding: utf-8 -*-
"""
梯度检验
在 float64 下用中心差分核对解析梯度
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from .tensor import Tensor, WorkingPrecision


@dataclass
class GradCheckResult:
    """梯度检验结果"""
    RelativeErrors: Dict[str, np.ndarray] = field(default_factory=dict)
    Skipped: int = 0

    def AllErrors(self) -> np.ndarray:
        if not self.RelativeErrors:
            return np.zeros(0)
        return np.concatenate([e.reshape(-1) for e in self.RelativeErrors.values()])

    def PassRate(self, tolerance: float = 1e-3) -> float:
        errors = self.AllErrors()
        if errors.size == 0:
            return 1.0
        return float(np.mean(errors < tolerance))


def _RelativeError(analytic: float, numeric: float, floor: float) -> float:
    scale = max(abs(analytic), abs(numeric), floor)
    return abs(analytic - numeric) / scale


def GradientCheck(lossFn: Callable[[], Tensor], params: Dict[str, Tensor], h: float = 1e-6,
                  maxEntriesPerParam: Optional[int] = None, floor: float = 1e-5,
                  rng: Optional[np.random.Generator] = None,
                  skip: Optional[Callable[[str, tuple], bool]] = None) -> GradCheckResult:
    """中心差分梯度检验

    lossFn 每次调用都要重新构建前向图。整个检验在 float64 下进行：
    参数临时换成 float64 副本，解析梯度与差分商用同一精度计算，
    结束后恢复原来的 float32 数组。没有到达损失的参数梯度按 0 处理。

    Args:
        lossFn: 返回标量损失的闭包
        params: 需要检验的参数
        h: 差分步长
        maxEntriesPerParam: 每个参数抽检的元素上限，None 表示全部
        floor: 相对误差分母下限，避免梯度接近 0 时放大噪声
        skip: 返回 True 的 (参数名, 索引) 不参与比较（如 |·| 折点或守护区）

    Returns:
        GradCheckResult
    """
    rng = rng or np.random.default_rng(0)
    saved = {name: param.Data for name, param in params.items()}
    result = GradCheckResult()
    try:
        with WorkingPrecision(np.float64):
            for name, param in params.items():
                param.Data = saved[name].astype(np.float64)
                param.ZeroGrad()
            lossFn().Backward()
            analytic = {
                name: (np.zeros(param.Shape) if param.Grad is None else param.Grad.astype(np.float64))
                for name, param in params.items()
            }

            for name, param in params.items():
                flatCount = param.Size
                indices = np.arange(flatCount)
                if maxEntriesPerParam is not None and flatCount > maxEntriesPerParam:
                    indices = rng.choice(flatCount, size=maxEntriesPerParam, replace=False)
                errors: List[float] = []
                original = param.Data
                for flatIndex in indices:
                    index = np.unravel_index(int(flatIndex), param.Shape)
                    if skip is not None and skip(name, index):
                        result.Skipped += 1
                        continue
                    plus = original.copy()
                    plus[index] += h
                    param.Data = plus
                    lossPlus = lossFn().Item()
                    minus = original.copy()
                    minus[index] -= h
                    param.Data = minus
                    lossMinus = lossFn().Item()
                    param.Data = original
                    numeric = (lossPlus - lossMinus) / (2.0 * h)
                    errors.append(_RelativeError(float(analytic[name][index]), numeric, floor))
                result.RelativeErrors[name] = np.asarray(errors)
    finally:
        for name, param in params.items():
            param.Data = saved[name]
            param.ZeroGrad()
    return result
